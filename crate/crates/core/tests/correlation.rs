mod common;

use caop::correlation::{fov_weights, inverse_distance_weights, neighbor_sets, WeightModel};
use caop::geometry::{expected_sq_distance, Point, Segment};
use caop::instance::{from_segments, Instance};
use common::mc_expected_sq_distance;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_network(rng: &mut ChaCha8Rng, n: usize) -> Instance {
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.random_range(0..20) as f64, rng.random_range(0..20) as f64)).collect();
    let pairs: Vec<(usize, usize)> = (1..n).map(|v| (rng.random_range(0..v), v)).collect();
    from_segments(&pts, &pairs, 0, 10.0).unwrap()
}

fn transformed(inst: &Instance, f: impl Fn(f64, f64) -> (f64, f64)) -> Instance {
    let pts: Vec<(f64, f64)> = inst.vertices().iter().map(|v| f(v.x, v.y)).collect();
    let pairs: Vec<(usize, usize)> = inst.edges().iter().map(|e| (e.tail, e.head)).collect();
    from_segments(&pts, &pairs, 0, 10.0).unwrap()
}

#[test]
fn expected_sq_distance_matches_monte_carlo() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..10 {
        let mut p = || Point::new(rng.random_range(-5.0..5.0), rng.random_range(-5.0..5.0));
        let (s, t) = (Segment::new(p(), p()), Segment::new(p(), p()));
        let exact = expected_sq_distance(&s, &t);
        let mc = mc_expected_sq_distance(&s, &t, 400_000, &mut rng);
        assert!((exact - mc).abs() <= 0.01 * exact.max(1.0), "{exact} vs {mc}");
    }
}

#[test]
fn expected_sq_distance_of_a_segment_with_itself() {
    // two independent uniform points on a unit segment: E|u - v|^2 = 1/6
    let s = Segment::new(Point::new(0.0, 0.0), Point::new(1.0, 0.0));
    assert!((expected_sq_distance(&s, &s) - 1.0 / 6.0).abs() < 1e-15);
}

#[test]
fn inverse_distance_weights_are_normalized() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..10 {
        let inst = random_network(&mut rng, 9);
        let wm = inverse_distance_weights(&inst).unwrap();
        for (from, to, w) in wm.entries() {
            assert_ne!(from, to);
            assert!(w > 0.0 && w <= 1.0);
        }
    }
}

proptest! {
    #[test]
    fn neighbors_and_co_neighbors_are_dual(seed in any::<u64>(), m in 2usize..20) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let wm = common::unbounded_weights(&mut rng, m, 0.3);
        let (n, co) = neighbor_sets(&wm);
        for e in 0..m {
            for &o in &n[e] {
                prop_assert!(co[o].contains(&e));
            }
            for &o in &co[e] {
                prop_assert!(n[o].contains(&e));
            }
            prop_assert!(!n[e].contains(&e));
            let incoming: f64 = (0..m).map(|f| wm.weight(f, e)).sum();
            prop_assert!((wm.incoming_sum(e) - incoming).abs() < 1e-12);
        }
    }

    #[test]
    fn fov_weights_grow_with_the_field_of_view(seed in any::<u64>(), small in 0.5f64..3.0, extra in 0.0f64..3.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_network(&mut rng, 8);
        let narrow = fov_weights(&inst, small).unwrap();
        let wide = fov_weights(&inst, small + extra).unwrap();
        for (from, to, w) in narrow.entries() {
            prop_assert!(wide.weight(from, to) >= w);
        }
    }

    #[test]
    fn weights_are_invariant_under_rigid_motion(seed in any::<u64>(), dx in -50i32..50, dy in -50i32..50, turns in 0u8..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = random_network(&mut rng, 8);
        let moved = transformed(&inst, |x, y| {
            let (mut x, mut y) = (x, y);
            for _ in 0..turns {
                (x, y) = (-y, x);
            }
            (x + dx as f64, y + dy as f64)
        });
        prop_assert_eq!(fov_weights(&inst, 3.0).unwrap(), fov_weights(&moved, 3.0).unwrap());
        let a = inverse_distance_weights(&inst).unwrap();
        let b = inverse_distance_weights(&moved).unwrap();
        let m = inst.num_edges();
        for from in 0..m {
            for to in 0..m {
                prop_assert!((a.weight(from, to) - b.weight(from, to)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn entry_lists_rebuild_the_same_model(seed in any::<u64>(), m in 1usize..15) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let wm = common::unbounded_weights(&mut rng, m, 0.4);
        let again = WeightModel::from_entries(m, wm.entries().collect::<Vec<_>>()).unwrap();
        prop_assert_eq!(&again, &wm);
        prop_assert_eq!(wm.len(), wm.entries().count());
    }
}
