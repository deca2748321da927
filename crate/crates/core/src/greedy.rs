//! Greedy constructive solver and the canonical correlated-reward evaluator.
//!
//! Each iteration scores every (robot, candidate edge) pair by
//! `λ·U(e) − (c(ρ) − c(π))`, where `ρ` is the robot's current route with `e`
//! inserted and `λ = c_max / u_min` (the largest `|Δc|` when no candidate adds
//! cost) is rescaled every iteration so the utility term never drowns the
//! cost difference. The best pair is committed, the
//! utilities of its neighbors and co-neighbors are discounted, the other
//! observers of those co-neighbors are re-scored under the clamp, and the
//! candidate routes of the changed robot are rebuilt.

use thiserror::Error;

use crate::correlation::WeightModel;
use crate::instance::{DistanceTable, EdgeId, Instance};
use crate::routing::{fits_capacity, initial_route, insert_edge, Route, Solution};

pub const DEFAULT_UTILITY_FLOOR: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GreedyError {
    #[error("infeasible solution: {0}")]
    InfeasibleSolution(String),
}

/// Custom update applied to each unserviced co-neighbor of the committed edge.
/// Arguments: utilities, the co-neighbor, the committed edge, the instance,
/// weights, serviced flags.
pub type CoNeighborHook = fn(&mut [f64], EdgeId, EdgeId, &Instance, &WeightModel, &[bool]);

/// Update for the other observers of an edge that the committed edge observes.
#[derive(Debug, Clone, Copy, Default)]
pub enum ObserverUpdate {
    /// Leave them alone: only neighbors and co-neighbors are discounted.
    FirstOrder,
    /// Recompute each observer's utility as its exact marginal gain under the
    /// clamped reward, so coverage already collected is not counted again.
    #[default]
    ClampedMarginal,
    Custom(CoNeighborHook),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RecomputePolicy {
    /// Rebuild candidate routes only for the robot whose route changed.
    #[default]
    ChangedRoute,
    /// Rebuild candidate routes for every robot after each insertion.
    AllRoutes,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TieBreak {
    /// Equal scores go to the higher utility, then lower edge id, then lower robot index.
    #[default]
    UtilityThenIds,
    /// The first pair found scanning robots in order, then their candidate lists.
    FirstFound,
}

#[derive(Debug, Clone)]
pub struct GreedyConfig {
    /// Lower bound on `u_min` when computing `λ`; must be positive.
    pub utility_floor: f64,
    pub recompute: RecomputePolicy,
    pub tie_break: TieBreak,
    pub observer_update: ObserverUpdate,
}

impl Default for GreedyConfig {
    fn default() -> Self {
        Self {
            utility_floor: DEFAULT_UTILITY_FLOOR,
            recompute: RecomputePolicy::default(),
            tie_break: TieBreak::default(),
            observer_update: ObserverUpdate::default(),
        }
    }
}

/// One committed insertion.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedyStep {
    pub robot: usize,
    pub edge: EdgeId,
    pub score: f64,
    pub lambda: f64,
    pub utility: f64,
    /// Canonical reward of all edges serviced so far.
    pub reward: f64,
}

/// `U(e) = r(e) + Σ_{e' ∈ N̄(e)} w(e, e') r(e')` for service edges, `None` for
/// deadhead-only edges.
pub fn utilities(inst: &Instance, wm: &WeightModel) -> Vec<Option<f64>> {
    inst.edges()
        .iter()
        .map(|e| {
            e.is_serviceable().then(|| {
                e.reward + wm.co_neighbors(e.id).iter().map(|&(o, w)| w * inst.edge(o).reward).sum::<f64>()
            })
        })
        .collect()
}

/// Correlated reward of a set of serviced edges:
/// `Σ r(e)·[s_e + (1 − s_e)·min(1, Σ_{e' ∈ N(e)} w(e', e)·s_e')]`.
pub fn reward_of_serviced(inst: &Instance, wm: &WeightModel, serviced: &[bool]) -> f64 {
    inst.edges()
        .iter()
        .map(|e| {
            if serviced[e.id] {
                e.reward
            } else if e.reward == 0.0 {
                0.0
            } else {
                let observed: f64 =
                    wm.neighbors(e.id).iter().filter(|&&(o, _)| serviced[o]).map(|&(_, w)| w).sum();
                e.reward * observed.min(1.0)
            }
        })
        .sum()
}

/// Canonical reward of a solution after checking that no edge is serviced
/// twice, no deadhead-only edge is serviced and every route fits its robot.
pub fn evaluate_reward(inst: &Instance, wm: &WeightModel, sol: &Solution) -> Result<f64, GreedyError> {
    if sol.routes().len() != inst.robots().len() {
        return Err(GreedyError::InfeasibleSolution(format!(
            "{} routes for {} robots",
            sol.routes().len(),
            inst.robots().len()
        )));
    }
    let counts = sol.service_counts(inst.num_edges());
    if let Some(e) = counts.iter().position(|&c| c > 1) {
        return Err(GreedyError::InfeasibleSolution(format!("edge {e} serviced {} times", counts[e])));
    }
    if let Some(e) = counts.iter().zip(inst.edges()).position(|(&c, e)| c > 0 && e.deadhead_only) {
        return Err(GreedyError::InfeasibleSolution(format!("deadhead-only edge {e} serviced")));
    }
    for (k, (route, robot)) in sol.routes().iter().zip(inst.robots()).enumerate() {
        if !fits_capacity(route.total_cost(), robot.capacity) {
            return Err(GreedyError::InfeasibleSolution(format!(
                "robot {k} route costs {} over capacity {}",
                route.total_cost(),
                robot.capacity
            )));
        }
    }
    let serviced: Vec<bool> = counts.iter().map(|&c| c > 0).collect();
    Ok(reward_of_serviced(inst, wm, &serviced))
}

pub fn solve_greedy(inst: &Instance, dist: &DistanceTable, wm: &WeightModel, cfg: &GreedyConfig) -> Solution {
    run(inst, dist, wm, cfg, false).0
}

/// Like [`solve_greedy`], also returning every committed insertion.
pub fn solve_greedy_traced(
    inst: &Instance,
    dist: &DistanceTable,
    wm: &WeightModel,
    cfg: &GreedyConfig,
) -> (Solution, Vec<GreedyStep>) {
    run(inst, dist, wm, cfg, true)
}

struct Pick {
    score: f64,
    utility: f64,
    edge: EdgeId,
    robot: usize,
    slot: usize,
}

impl Pick {
    fn beats(&self, other: &Pick, rule: TieBreak) -> bool {
        if self.score != other.score {
            return self.score > other.score;
        }
        match rule {
            TieBreak::FirstFound => false,
            TieBreak::UtilityThenIds => {
                if self.utility != other.utility {
                    self.utility > other.utility
                } else {
                    (self.edge, self.robot) < (other.edge, other.robot)
                }
            }
        }
    }
}

/// Reward gained by servicing `e` now: its own uncovered share plus the
/// coverage it adds to unserviced co-neighbors, all under the clamp.
fn marginal_gain(inst: &Instance, wm: &WeightModel, serviced: &[bool], coverage: &[f64], e: EdgeId) -> f64 {
    let own = inst.edge(e).reward * (1.0 - coverage[e].min(1.0));
    let observed: f64 = wm
        .co_neighbors(e)
        .iter()
        .filter(|(t, _)| !serviced[*t])
        .map(|&(t, w)| inst.edge(t).reward * ((coverage[t] + w).min(1.0) - coverage[t].min(1.0)))
        .sum();
    (own + observed).max(0.0)
}

fn run(
    inst: &Instance,
    dist: &DistanceTable,
    wm: &WeightModel,
    cfg: &GreedyConfig,
    traced: bool,
) -> (Solution, Vec<GreedyStep>) {
    assert!(cfg.utility_floor > 0.0, "utility floor must be positive");
    let robots = inst.robots();
    let mut utility: Vec<f64> = utilities(inst, wm).into_iter().map(|u| u.unwrap_or(0.0)).collect();
    let mut serviced = vec![false; inst.num_edges()];
    let mut routes: Vec<Route> = robots.iter().map(|r| Route::empty(r.depot)).collect();
    let mut unserviced: Vec<EdgeId> = inst.service_edges().map(|e| e.id).collect();
    // summed weight from serviced observers, unclamped
    let mut coverage = vec![0.0; inst.num_edges()];
    let mut stamp = vec![usize::MAX; inst.num_edges()];
    let mut steps_taken = 0usize;

    let mut pool: Vec<Vec<(EdgeId, Route)>> = robots
        .iter()
        .map(|robot| {
            unserviced
                .iter()
                .filter_map(|&e| {
                    let rho = initial_route(inst, dist, robot.depot, e).expect("service edge");
                    fits_capacity(rho.total_cost(), robot.capacity).then_some((e, rho))
                })
                .collect()
        })
        .collect();

    let mut steps = Vec::new();
    loop {
        for list in &mut pool {
            list.retain(|(e, _)| !serviced[*e]);
        }
        unserviced.retain(|&e| !serviced[e]);
        if unserviced.is_empty() || pool.iter().all(Vec::is_empty) {
            break;
        }
        let u_min = unserviced.iter().map(|&e| utility[e]).fold(f64::INFINITY, f64::min);
        let (c_max, c_abs) = pool
            .iter()
            .zip(&routes)
            .flat_map(|(list, pi)| list.iter().map(move |(_, rho)| rho.total_cost() - pi.total_cost()))
            .fold((f64::NEG_INFINITY, 0.0_f64), |(hi, abs), d| (hi.max(d), abs.max(d.abs())));
        // every candidate saves deadheading: fall back to the largest saving
        let scale = if c_max > 0.0 {
            c_max
        } else if c_abs > 0.0 {
            c_abs
        } else {
            1.0
        };
        let lambda = scale / u_min.max(cfg.utility_floor);

        let mut best: Option<Pick> = None;
        for (k, list) in pool.iter().enumerate() {
            let base = routes[k].total_cost();
            for (slot, (e, rho)) in list.iter().enumerate() {
                let pick = Pick {
                    score: lambda * utility[*e] - (rho.total_cost() - base),
                    utility: utility[*e],
                    edge: *e,
                    robot: k,
                    slot,
                };
                if best.as_ref().is_none_or(|b| pick.beats(b, cfg.tie_break)) {
                    best = Some(pick);
                }
            }
        }
        let Some(pick) = best else { break };
        if pick.score < 0.0 {
            break;
        }

        let chosen = pick.edge;
        serviced[chosen] = true;
        routes[pick.robot] = pool[pick.robot].swap_remove(pick.slot).1;
        let reward = inst.edge(chosen).reward;
        for &(n, w) in wm.neighbors(chosen) {
            if !serviced[n] {
                utility[n] = (utility[n] - w * reward).max(0.0);
            }
        }
        for &(c, w) in wm.co_neighbors(chosen) {
            coverage[c] += w;
            if !serviced[c] {
                utility[c] = (utility[c] - w * inst.edge(c).reward).max(0.0);
                if let ObserverUpdate::Custom(hook) = cfg.observer_update {
                    hook(&mut utility, c, chosen, inst, wm, &serviced);
                }
            }
        }
        if let ObserverUpdate::ClampedMarginal = cfg.observer_update {
            for &(c, _) in wm.co_neighbors(chosen) {
                for &(o, _) in wm.neighbors(c) {
                    if !serviced[o] && stamp[o] != steps_taken {
                        stamp[o] = steps_taken;
                        utility[o] = marginal_gain(inst, wm, &serviced, &coverage, o);
                    }
                }
            }
        }
        steps_taken += 1;

        let refresh: Vec<usize> = match cfg.recompute {
            RecomputePolicy::ChangedRoute => vec![pick.robot],
            RecomputePolicy::AllRoutes => (0..robots.len()).collect(),
        };
        for k in refresh {
            let pi = &routes[k];
            let capacity = robots[k].capacity;
            let list = std::mem::take(&mut pool[k]);
            pool[k] = list
                .into_iter()
                .filter(|(e, _)| !serviced[*e])
                .filter_map(|(e, _)| {
                    let rho = insert_edge(inst, dist, pi, e).expect("unserviced service edge");
                    fits_capacity(rho.total_cost(), capacity).then_some((e, rho))
                })
                .collect();
            // keep candidate order stable across swap_remove
            pool[k].sort_by_key(|(e, _)| *e);
        }

        if traced {
            steps.push(GreedyStep {
                robot: pick.robot,
                edge: chosen,
                score: pick.score,
                lambda,
                utility: pick.utility,
                reward: reward_of_serviced(inst, wm, &serviced),
            });
        }
    }

    let total = reward_of_serviced(inst, wm, &serviced);
    (Solution::new(routes, total), steps)
}
