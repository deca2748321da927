mod common;

use std::collections::BTreeMap;

use caop::apps::{gen_micro, MicroSpec};
use caop::exact::{export_miqp, parse_lp, solve_bruteforce, ExactError, ExportOptions, OracleLimits};
use caop::greedy::reward_of_serviced;
use caop::instance::DistanceTable;
use caop::routing::audit_solution;
use common::integer_instance;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Constraint counts by name prefix, from the written file.
fn row_counts(text: &str) -> BTreeMap<&'static str, usize> {
    let parsed = parse_lp(text).unwrap();
    let prefixes = ["depot_", "cons_", "flowcount_", "flowsupport_", "sym_", "once_", "omega_", "cap_", "ylin_w_", "ylin_s_"];
    let mut out = BTreeMap::new();
    for c in &parsed.constraints {
        let p = prefixes.iter().find(|p| c.name.starts_with(**p)).unwrap_or_else(|| panic!("unexpected row {}", c.name));
        *out.entry(*p).or_insert(0) += 1;
    }
    out
}

fn expected_rows(v: usize, e: usize, k: usize, linearize: bool) -> BTreeMap<&'static str, usize> {
    let mut out = BTreeMap::from([
        ("depot_", k),
        ("cons_", k * (v - 1)),
        ("flowcount_", 2 * e * k),
        ("flowsupport_", 2 * e * k),
        ("sym_", k * v),
        ("once_", e),
        ("omega_", e),
        ("cap_", k),
    ]);
    if linearize {
        out.insert("ylin_w_", e);
        out.insert("ylin_s_", e);
    }
    out
}

#[test]
fn oracle_solutions_are_feasible_and_consistently_scored() {
    for seed in 0..40 {
        let (inst, wm) = gen_micro(&MicroSpec::default(), seed).unwrap();
        let dist = DistanceTable::new(&inst);
        let sol = solve_bruteforce(&inst, &dist, &wm, &OracleLimits::default()).unwrap();
        assert!(audit_solution(&inst, &dist, &sol).is_empty(), "seed {seed}");
        let mut serviced = vec![false; inst.num_edges()];
        sol.serviced().into_iter().for_each(|e| serviced[e] = true);
        assert!((reward_of_serviced(&inst, &wm, &serviced) - sol.total_reward()).abs() < 1e-12);
    }
}

#[test]
fn oracle_refuses_oversized_instances() {
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    let inst = integer_instance(&mut rng, 6, 12, 0, 1, 100.0);
    let dist = DistanceTable::new(&inst);
    let wm = caop::WeightModel::empty(12);
    let all_rewarded = inst.edges().iter().filter(|e| e.reward > 0.0).count() > 8;
    let res = solve_bruteforce(&inst, &dist, &wm, &OracleLimits::default());
    assert_eq!(all_rewarded, matches!(res, Err(ExactError::TooLarge(_))));
}

proptest! {
    #[test]
    fn row_counts_follow_the_closed_form(
        seed in any::<u64>(), n in 2usize..10, extra in 0usize..10, loops in 0usize..3, k in 1usize..4, linearize in any::<bool>()
    ) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut inst = integer_instance(&mut rng, n, n - 1 + extra, loops, k, 30.0);
        if inst.total_reward() == 0.0 {
            let v = inst.num_vertices() - 1;
            inst.add_point_feature(v, 1.0, 1.0).unwrap();
        }
        let wm = common::unbounded_weights(&mut rng, inst.num_edges(), 0.2);
        let model = export_miqp(&inst, &wm, ExportOptions { linearize }).unwrap();
        let text = model.to_lp();
        let (v, e) = (inst.num_vertices(), inst.num_edges());
        prop_assert_eq!(row_counts(&text), expected_rows(v, e, k, linearize));
        let parsed = parse_lp(&text).unwrap();
        let vars = parsed.variable_names();
        let count = |p: &str| vars.iter().filter(|name| name.starts_with(p)).count();
        prop_assert_eq!(count("s_"), 2 * e * k);
        prop_assert_eq!(count("d_"), 2 * e * k);
        prop_assert_eq!(count("z_"), 2 * e * k);
        prop_assert_eq!(count("w_"), e);
        prop_assert_eq!(count("y_"), if linearize { e } else { 0 });
        model.verify_parsed(&parsed).map_err(TestCaseError::fail)?;
        prop_assert_eq!(model.to_lp(), text);
    }
}

#[test]
fn substitution_reproduces_the_scaled_objective_on_micro_instances() {
    for seed in 0..40 {
        let (inst, wm) = gen_micro(&MicroSpec::default(), seed).unwrap();
        let dist = DistanceTable::new(&inst);
        let sol = solve_bruteforce(&inst, &dist, &wm, &OracleLimits::default()).unwrap();
        for linearize in [false, true] {
            let model = export_miqp(&inst, &wm, ExportOptions { linearize }).unwrap();
            let x = model.assignment_from_solution(&inst, &dist, &wm, &sol);
            let expected = model.lambda * sol.total_reward() - sol.total_cost();
            assert!((model.objective_value(&x) - expected).abs() <= 1e-6, "seed {seed}");
            assert!(model.violated(&x, 1e-9, false).is_empty(), "seed {seed}");
            let parsed = parse_lp(&model.to_lp()).unwrap();
            let from_file = parsed.objective_value(&model.named_values(&x)).unwrap();
            assert!((from_file - expected).abs() <= 1e-6, "seed {seed}");
        }
    }
}
