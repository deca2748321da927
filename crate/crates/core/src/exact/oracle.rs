use std::time::{Duration, Instant};

use super::{ExactError, Result};
use crate::correlation::WeightModel;
use crate::greedy::{reward_of_serviced, utilities};
use crate::instance::{DistanceTable, EdgeId, Instance, VertexId};
use crate::routing::{fits_capacity, Route, ServiceArc, Solution};

const REWARD_TIE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleLimits {
    pub max_edges: usize,
    pub max_robots: usize,
    pub time_budget: Option<Duration>,
}

impl Default for OracleLimits {
    fn default() -> Self {
        Self { max_edges: 8, max_robots: 2, time_budget: None }
    }
}

/// Cheapest closed route from one depot for every subset of a small edge set,
/// by dynamic programming over (subset, last arc).
pub struct SubsetRoutes {
    depot: VertexId,
    edges: Vec<EdgeId>,
    best: Vec<f64>,
    best_last: Vec<usize>,
    parent: Vec<usize>,
}

const NO_ARC: usize = usize::MAX;

impl SubsetRoutes {
    pub fn new(inst: &Instance, dist: &DistanceTable, depot: VertexId, edges: &[EdgeId]) -> Self {
        let n = edges.len();
        let arcs = 2 * n;
        let arc = |a: usize| ServiceArc::new(edges[a / 2], if a.is_multiple_of(2) { crate::routing::Direction::Forward } else { crate::routing::Direction::Backward });
        let start: Vec<VertexId> = (0..arcs).map(|a| arc(a).start(inst)).collect();
        let end: Vec<VertexId> = (0..arcs).map(|a| arc(a).end(inst)).collect();
        let service: Vec<f64> = edges.iter().map(|&e| inst.edge(e).service_cost).collect();

        let states = 1usize << n;
        let mut dp = vec![f64::INFINITY; states * arcs];
        let mut parent = vec![NO_ARC; states * arcs];
        for a in 0..arcs {
            dp[(1 << (a / 2)) * arcs + a] = dist.dist(depot, start[a]) + service[a / 2];
        }
        for mask in 1..states {
            for a in 0..arcs {
                let here = dp[mask * arcs + a];
                if !here.is_finite() || mask & (1 << (a / 2)) == 0 {
                    continue;
                }
                for b in 0..arcs {
                    let bit = 1 << (b / 2);
                    if mask & bit != 0 {
                        continue;
                    }
                    let next = mask | bit;
                    let cost = here + dist.dist(end[a], start[b]) + service[b / 2];
                    if cost < dp[next * arcs + b] {
                        dp[next * arcs + b] = cost;
                        parent[next * arcs + b] = a;
                    }
                }
            }
        }
        let mut best = vec![f64::INFINITY; states];
        let mut best_last = vec![NO_ARC; states];
        best[0] = 0.0;
        for mask in 1..states {
            for a in 0..arcs {
                if mask & (1 << (a / 2)) == 0 {
                    continue;
                }
                let cost = dp[mask * arcs + a] + dist.dist(end[a], depot);
                if cost < best[mask] {
                    best[mask] = cost;
                    best_last[mask] = a;
                }
            }
        }
        Self { depot, edges: edges.to_vec(), best, best_last, parent }
    }

    pub fn cost(&self, mask: usize) -> f64 {
        self.best[mask]
    }

    /// Arc sequence realizing [`SubsetRoutes::cost`] for `mask`.
    pub fn arcs(&self, mask: usize) -> Vec<ServiceArc> {
        let arcs = 2 * self.edges.len();
        let mut out = Vec::new();
        let mut mask = mask;
        let mut a = self.best_last[mask];
        while mask != 0 {
            let dir = if a.is_multiple_of(2) { crate::routing::Direction::Forward } else { crate::routing::Direction::Backward };
            out.push(ServiceArc::new(self.edges[a / 2], dir));
            let prev = self.parent[mask * arcs + a];
            mask &= !(1 << (a / 2));
            a = prev;
        }
        out.reverse();
        out
    }

    pub fn depot(&self) -> VertexId {
        self.depot
    }
}

/// Minimum route cost over every ordering and orientation of `edges`.
pub fn min_route_cost_exact(inst: &Instance, dist: &DistanceTable, depot: VertexId, edges: &[EdgeId]) -> Result<f64> {
    let limit = OracleLimits::default().max_edges;
    if edges.len() > limit {
        return Err(ExactError::TooLarge(format!("{} edges, limit {limit}", edges.len())));
    }
    if edges.is_empty() {
        return Ok(0.0);
    }
    let table = SubsetRoutes::new(inst, dist, depot, edges);
    Ok(table.cost((1 << edges.len()) - 1))
}

/// Optimal solution by enumerating every assignment of the rewarding service
/// edges to robots (or to nobody). Ties on reward go to the cheaper total cost.
pub fn solve_bruteforce(
    inst: &Instance,
    dist: &DistanceTable,
    wm: &WeightModel,
    limits: &OracleLimits,
) -> Result<Solution> {
    let robots = inst.robots();
    if robots.len() > limits.max_robots {
        return Err(ExactError::TooLarge(format!("{} robots, limit {}", robots.len(), limits.max_robots)));
    }
    let utility = utilities(inst, wm);
    let candidates: Vec<EdgeId> = inst
        .service_edges()
        .filter(|e| e.reward > 0.0 || utility[e.id].unwrap_or(0.0) > 0.0)
        .map(|e| e.id)
        .collect();
    if candidates.len() > limits.max_edges {
        return Err(ExactError::TooLarge(format!(
            "{} candidate edges, limit {}",
            candidates.len(),
            limits.max_edges
        )));
    }
    let n = candidates.len();
    let full = (1usize << n) - 1;

    let mut tables: Vec<(VertexId, SubsetRoutes)> = Vec::new();
    let table_of: Vec<usize> = robots
        .iter()
        .map(|r| match tables.iter().position(|(d, _)| *d == r.depot) {
            Some(i) => i,
            None => {
                tables.push((r.depot, SubsetRoutes::new(inst, dist, r.depot, &candidates)));
                tables.len() - 1
            }
        })
        .collect();
    // subsets each robot can afford, cheapest-first not required
    let feasible: Vec<Vec<usize>> = robots
        .iter()
        .zip(&table_of)
        .map(|(r, &t)| (0..=full).filter(|&m| fits_capacity(tables[t].1.cost(m), r.capacity)).collect())
        .collect();

    let mut serviced = vec![false; inst.num_edges()];
    let reward: Vec<f64> = (0..=full)
        .map(|mask| {
            for (i, &e) in candidates.iter().enumerate() {
                serviced[e] = mask & (1 << i) != 0;
            }
            reward_of_serviced(inst, wm, &serviced)
        })
        .collect();

    struct Search<'a> {
        feasible: &'a [Vec<usize>],
        cost: Vec<&'a SubsetRoutes>,
        reward: &'a [f64],
        best: (f64, f64, Vec<usize>),
        chosen: Vec<usize>,
        visited: u64,
        deadline: Option<Instant>,
    }

    impl Search<'_> {
        fn go(&mut self, k: usize, used: usize, cost: f64) -> Result<()> {
            if k == self.feasible.len() {
                self.visited += 1;
                if self.visited.is_multiple_of(4096) && self.deadline.is_some_and(|d| Instant::now() > d) {
                    return Err(ExactError::TimeBudget(self.visited));
                }
                let r = self.reward[used];
                let (br, bc, _) = &self.best;
                if r > br + REWARD_TIE || (r >= br - REWARD_TIE && cost < *bc) {
                    self.best = (r, cost, self.chosen.clone());
                }
                return Ok(());
            }
            for i in 0..self.feasible[k].len() {
                let mask = self.feasible[k][i];
                if mask & used != 0 {
                    continue;
                }
                self.chosen.push(mask);
                let c = self.cost[k].cost(mask);
                self.go(k + 1, used | mask, cost + c)?;
                self.chosen.pop();
            }
            Ok(())
        }
    }

    let mut search = Search {
        feasible: &feasible,
        cost: table_of.iter().map(|&t| &tables[t].1).collect(),
        reward: &reward,
        best: (f64::NEG_INFINITY, f64::INFINITY, Vec::new()),
        chosen: Vec::new(),
        visited: 0,
        deadline: limits.time_budget.map(|b| Instant::now() + b),
    };
    search.go(0, 0, 0.0)?;
    let (total, _, masks) = search.best;

    let routes = masks
        .iter()
        .zip(robots)
        .zip(&table_of)
        .map(|((&mask, robot), &t)| {
            Route::from_arcs(inst, dist, robot.depot, tables[t].1.arcs(mask)).expect("oracle arcs are service edges")
        })
        .collect();
    Ok(Solution::new(routes, total))
}
