mod common;

use caop::exact::{min_route_cost_exact, SubsetRoutes};
use caop::instance::DistanceTable;
use caop::routing::{audit_solution, insert_edge, route_cost, route_walk, Direction, Route, ServiceArc, Solution};
use common::{brute_insertion_cost, floyd, insertion_candidates, integer_instance, min_cost_by_permutation, walk_cost};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_arcs(rng: &mut ChaCha8Rng, m: usize, l: usize) -> Vec<ServiceArc> {
    let mut ids: Vec<usize> = (0..m).collect();
    ids.shuffle(rng);
    ids.truncate(l);
    ids.into_iter()
        .map(|e| ServiceArc::new(e, if rng.random_bool(0.5) { Direction::Backward } else { Direction::Forward }))
        .collect()
}

#[test]
fn candidate_count_is_four_plus_eight_per_inner_cut() {
    for l in 0..7 {
        let arcs: Vec<ServiceArc> = (0..l).map(ServiceArc::forward).collect();
        let expected = if l == 0 { 2 } else { 4 + 8 * (l - 1) };
        assert_eq!(insertion_candidates(&arcs, 99).len(), expected);
    }
}

#[test]
fn distance_table_matches_floyd_warshall() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..20 {
        let n = rng.random_range(2..15);
        let m = n + rng.random_range(0..10);
        let inst = integer_instance(&mut rng, n, m, 2, 1, 50.0);
        let dist = DistanceTable::new(&inst);
        let d = floyd(&inst);
        for u in 0..n {
            for v in 0..n {
                assert_eq!(dist.dist(u, v), d[u][v]);
            }
        }
    }
}

#[test]
fn subset_routes_match_permutation_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..25 {
        let n = rng.random_range(2..7);
        let inst = integer_instance(&mut rng, n, n + 2, 1, 1, 100.0);
        let dist = DistanceTable::new(&inst);
        let d = floyd(&inst);
        let depot = inst.robots()[0].depot;
        let edges: Vec<usize> = (0..inst.num_edges().min(6)).collect();
        let table = SubsetRoutes::new(&inst, &dist, depot, &edges);
        for mask in 1usize..(1 << edges.len()) {
            let chosen: Vec<usize> = (0..edges.len()).filter(|i| mask >> i & 1 == 1).map(|i| edges[i]).collect();
            let brute = min_cost_by_permutation(&inst, &d, depot, &chosen);
            assert_eq!(table.cost(mask), brute, "mask {mask:b}");
            let arcs = table.arcs(mask);
            assert_eq!(walk_cost(&inst, &d, depot, &arcs), brute);
        }
        let full = min_route_cost_exact(&inst, &dist, depot, &edges).unwrap();
        assert_eq!(full, min_cost_by_permutation(&inst, &d, depot, &edges));
    }
}

#[test]
fn insertion_keeps_every_route_a_closed_balanced_walk() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let inst = integer_instance(&mut rng, 12, 30, 3, 1, 1e9);
    let dist = DistanceTable::new(&inst);
    let mut route = Route::empty(inst.robots()[0].depot);
    let mut order: Vec<usize> = (0..inst.num_edges()).collect();
    order.shuffle(&mut rng);
    for e in order {
        route = insert_edge(&inst, &dist, &route, e).unwrap();
        let walk = route_walk(&inst, &dist, &route);
        assert_eq!(walk.first().unwrap().from, route.depot());
        assert_eq!(walk.last().unwrap().to, route.depot());
        assert!(walk.windows(2).all(|w| w[0].to == w[1].from));
        let sol = Solution::new(vec![route.clone()], 0.0);
        assert!(audit_solution(&inst, &dist, &sol).is_empty());
    }
}

proptest! {
    #[test]
    fn insertion_matches_exhaustive_candidates(seed in any::<u64>(), n in 3usize..12, extra in 0usize..12, l in 0usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = integer_instance(&mut rng, n, n - 1 + extra + l, 2, 1, 1e9);
        let dist = DistanceTable::new(&inst);
        let d = floyd(&inst);
        let m = inst.num_edges();
        let l = l.min(m - 1);
        let arcs = random_arcs(&mut rng, m, l + 1);
        let (base, edge) = (arcs[..l].to_vec(), arcs[l].edge);
        let depot = inst.robots()[0].depot;
        let route = Route::from_arcs(&inst, &dist, depot, base.clone()).unwrap();
        let inserted = insert_edge(&inst, &dist, &route, edge).unwrap();
        let brute = brute_insertion_cost(&inst, &d, depot, &base, edge);
        prop_assert_eq!(inserted.total_cost(), brute);
        prop_assert_eq!(route_cost(&inst, &dist, &inserted), walk_cost(&inst, &d, depot, inserted.arcs()));
        prop_assert_eq!(inserted.len(), l + 1);
    }

    #[test]
    fn shortest_paths_satisfy_the_triangle_inequality(seed in any::<u64>(), n in 2usize..14) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = integer_instance(&mut rng, n, n + 3, 0, 1, 10.0);
        let dist = DistanceTable::new(&inst);
        for u in 0..n {
            prop_assert_eq!(dist.dist(u, u), 0.0);
            for v in 0..n {
                prop_assert_eq!(dist.dist(u, v), dist.dist(v, u));
                for w in 0..n {
                    prop_assert!(dist.dist(u, w) <= dist.dist(u, v) + dist.dist(v, w));
                }
            }
        }
    }

    #[test]
    fn cached_route_costs_match_recomputation(seed in any::<u64>(), l in 0usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let inst = integer_instance(&mut rng, 8, 14, 2, 1, 1e9);
        let dist = DistanceTable::new(&inst);
        let arcs = random_arcs(&mut rng, inst.num_edges(), l);
        let route = Route::from_arcs(&inst, &dist, inst.robots()[0].depot, arcs).unwrap();
        prop_assert_eq!(route.total_cost(), route_cost(&inst, &dist, &route));
        prop_assert_eq!(route.service_cost() + route.deadhead_cost(), route.total_cost());
        let walked: f64 = route_walk(&inst, &dist, &route)
            .iter()
            .map(|t| if t.serviced { inst.edge(t.edge).service_cost } else { inst.edge(t.edge).deadhead_cost })
            .sum();
        prop_assert_eq!(walked, route.total_cost());
    }
}
