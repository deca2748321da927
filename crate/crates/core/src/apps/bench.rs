use std::time::Instant;

use rayon::prelude::*;

use super::Result;
use crate::correlation::WeightModel;
use crate::exact::{solve_bruteforce, OracleLimits};
use crate::greedy::{solve_greedy, GreedyConfig};
use crate::instance::{DistanceTable, Instance};
use crate::routing::Solution;

/// Coverage at or above this counts as a fully observed segment.
pub const FULL_COVERAGE: f64 = 0.999;

/// Serviced edges plus unserviced service edges whose clamped observed
/// fraction reaches [`FULL_COVERAGE`].
pub fn covered_segments(inst: &Instance, wm: &WeightModel, sol: &Solution) -> usize {
    let mut serviced = vec![false; inst.num_edges()];
    for e in sol.serviced() {
        serviced[e] = true;
    }
    inst.service_edges()
        .filter(|e| {
            serviced[e.id] || {
                let level: f64 = wm.neighbors(e.id).iter().filter(|(n, _)| serviced[*n]).map(|(_, w)| w).sum();
                level.min(1.0) >= FULL_COVERAGE
            }
        })
        .count()
}

#[derive(Debug, Clone)]
pub struct BenchCase {
    pub name: String,
    pub instance: Instance,
    pub weights: WeightModel,
    /// Also solve exactly and report the gap.
    pub oracle: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub name: String,
    pub edges: usize,
    pub robots: usize,
    pub greedy_reward: f64,
    pub oracle_reward: Option<f64>,
    pub gap_pct: Option<f64>,
    pub greedy_ms: f64,
}

pub const BENCH_COLUMNS: [&str; 7] = ["name", "edges", "robots", "greedy_reward", "oracle_reward", "gap_pct", "greedy_ms"];

/// Relative shortfall of `greedy` against `oracle`, in percent.
fn gap_pct(greedy: f64, oracle: f64) -> f64 {
    if oracle > 0.0 {
        (oracle - greedy) / oracle * 100.0
    } else {
        0.0
    }
}

/// Solves every case in parallel; records keep the input order.
pub fn run_benchmark(cases: &[BenchCase], cfg: &GreedyConfig, limits: &OracleLimits) -> Result<Vec<BenchRecord>> {
    cases
        .par_iter()
        .map(|case| {
            let inst = &case.instance;
            let start = Instant::now();
            let dist = DistanceTable::new(inst);
            let greedy = solve_greedy(inst, &dist, &case.weights, cfg);
            let greedy_ms = start.elapsed().as_secs_f64() * 1e3;
            let oracle = if case.oracle {
                Some(solve_bruteforce(inst, &dist, &case.weights, limits)?.total_reward())
            } else {
                None
            };
            Ok(BenchRecord {
                name: case.name.clone(),
                edges: inst.num_service_edges(),
                robots: inst.robots().len(),
                greedy_reward: greedy.total_reward(),
                oracle_reward: oracle,
                gap_pct: oracle.map(|o| gap_pct(greedy.total_reward(), o)),
                greedy_ms,
            })
        })
        .collect()
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// CSV with one row per record followed by `mean` and `max` summary rows
/// over the gap and time columns.
pub fn bench_csv(records: &[BenchRecord]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(BENCH_COLUMNS)?;
    for r in records {
        w.write_record([
            r.name.clone(),
            r.edges.to_string(),
            r.robots.to_string(),
            r.greedy_reward.to_string(),
            opt(r.oracle_reward),
            opt(r.gap_pct),
            format!("{:.3}", r.greedy_ms),
        ])?;
    }
    let gaps: Vec<f64> = records.iter().filter_map(|r| r.gap_pct).collect();
    let times: Vec<f64> = records.iter().map(|r| r.greedy_ms).collect();
    let mean = |v: &[f64]| (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64);
    let max = |v: &[f64]| v.iter().copied().reduce(f64::max);
    for (label, gap, time) in [("mean", mean(&gaps), mean(&times)), ("max", max(&gaps), max(&times))] {
        w.write_record([
            label.to_string(),
            String::new(),
            String::new(),
            String::new(),
            String::new(),
            opt(gap),
            time.map(|t| format!("{t:.3}")).unwrap_or_default(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| super::AppError::InvalidParameter(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::from_segments;

    fn trivial(name: &str) -> BenchCase {
        let inst = from_segments(&[(0.0, 0.0), (1.0, 0.0)], &[(0, 1)], 0, 5.0).unwrap();
        BenchCase { name: name.into(), weights: WeightModel::empty(1), instance: inst, oracle: true }
    }

    #[test]
    fn trivial_batch_has_zero_gaps() {
        let cases = vec![trivial("a"), trivial("b")];
        let recs = run_benchmark(&cases, &GreedyConfig::default(), &OracleLimits::default()).unwrap();
        assert_eq!(recs.iter().map(|r| r.name.as_str()).collect::<Vec<_>>(), ["a", "b"]);
        assert!(recs.iter().all(|r| r.gap_pct == Some(0.0)));
        let csv = bench_csv(&recs).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 5);
        assert_eq!(lines[0], BENCH_COLUMNS.join(","));
        assert!(lines[3].starts_with("mean,,,,,0,"));
        assert_eq!(csv, bench_csv(&recs).unwrap());
    }

    #[test]
    fn coverage_counts_full_observation_only() {
        let inst = from_segments(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0), (3.0, 0.0)], &[(0, 1), (1, 2), (2, 3)], 0, 5.0).unwrap();
        let dist = DistanceTable::new(&inst);
        let wm = WeightModel::from_entries(3, [(0, 1, 1.0), (0, 2, 0.5)]).unwrap();
        let route = crate::routing::initial_route(&inst, &dist, 0, 0).unwrap();
        let sol = Solution::new(vec![route], 2.5);
        assert_eq!(covered_segments(&inst, &wm, &sol), 2);
        assert_eq!(covered_segments(&inst, &WeightModel::empty(3), &sol), 1);
    }
}
