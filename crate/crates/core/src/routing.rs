//! Routes as depot-anchored sequences of service arcs, their cost, and the
//! constructive edge-insertion heuristic.
//!
//! Deadheading is implicit: consecutive service arcs (and the depot at both
//! ends) are joined by shortest deadhead paths from the [`DistanceTable`].

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instance::{DistanceTable, EdgeId, Instance, VertexId};

/// Relative slack allowed when comparing a route cost against a capacity.
pub const COST_TOLERANCE: f64 = 1e-9;

/// `cost <= capacity` up to [`COST_TOLERANCE`].
pub fn fits_capacity(cost: f64, capacity: f64) -> bool {
    cost <= capacity + COST_TOLERANCE * capacity.abs().max(1.0)
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RoutingError {
    #[error("edge {0} is already serviced by this route")]
    AlreadyServiced(EdgeId),
    #[error("edge {0} is deadhead-only and cannot be serviced")]
    NotServiceable(EdgeId),
    #[error("edge {0} does not exist")]
    UnknownEdge(EdgeId),
    #[error("vertex {0} does not exist")]
    UnknownVertex(VertexId),
    #[error("solution has {found} routes for {robots} robots")]
    RouteCount { found: usize, robots: usize },
    #[error("malformed solution file: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, RoutingError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    /// tail → head
    Forward,
    /// head → tail
    Backward,
}

impl Direction {
    pub fn flip(self) -> Self {
        match self {
            Direction::Forward => Direction::Backward,
            Direction::Backward => Direction::Forward,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ServiceArc {
    pub edge: EdgeId,
    pub dir: Direction,
}

impl ServiceArc {
    pub const fn new(edge: EdgeId, dir: Direction) -> Self {
        Self { edge, dir }
    }

    pub const fn forward(edge: EdgeId) -> Self {
        Self::new(edge, Direction::Forward)
    }

    pub const fn backward(edge: EdgeId) -> Self {
        Self::new(edge, Direction::Backward)
    }

    pub fn start(&self, inst: &Instance) -> VertexId {
        let e = inst.edge(self.edge);
        match self.dir {
            Direction::Forward => e.tail,
            Direction::Backward => e.head,
        }
    }

    pub fn end(&self, inst: &Instance) -> VertexId {
        let e = inst.edge(self.edge);
        match self.dir {
            Direction::Forward => e.head,
            Direction::Backward => e.tail,
        }
    }

    pub fn reversed(self) -> Self {
        Self::new(self.edge, self.dir.flip())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    depot: VertexId,
    arcs: Vec<ServiceArc>,
    service_cost: f64,
    deadhead_cost: f64,
}

impl Route {
    pub fn empty(depot: VertexId) -> Self {
        Self { depot, arcs: Vec::new(), service_cost: 0.0, deadhead_cost: 0.0 }
    }

    /// Builds a route from an arc sequence, costing it from scratch.
    pub fn from_arcs(inst: &Instance, dist: &DistanceTable, depot: VertexId, arcs: Vec<ServiceArc>) -> Result<Self> {
        if depot >= inst.num_vertices() {
            return Err(RoutingError::UnknownVertex(depot));
        }
        let mut seen = BTreeSet::new();
        for arc in &arcs {
            if arc.edge >= inst.num_edges() {
                return Err(RoutingError::UnknownEdge(arc.edge));
            }
            if inst.edge(arc.edge).deadhead_only {
                return Err(RoutingError::NotServiceable(arc.edge));
            }
            if !seen.insert(arc.edge) {
                return Err(RoutingError::AlreadyServiced(arc.edge));
            }
        }
        Ok(Self::costed(inst, dist, depot, arcs))
    }

    fn costed(inst: &Instance, dist: &DistanceTable, depot: VertexId, arcs: Vec<ServiceArc>) -> Self {
        let (service_cost, deadhead_cost) = cost_parts(inst, dist, depot, &arcs);
        Self { depot, arcs, service_cost, deadhead_cost }
    }

    pub fn depot(&self) -> VertexId {
        self.depot
    }

    pub fn arcs(&self) -> &[ServiceArc] {
        &self.arcs
    }

    pub fn len(&self) -> usize {
        self.arcs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    pub fn contains(&self, edge: EdgeId) -> bool {
        self.arcs.iter().any(|a| a.edge == edge)
    }

    pub fn service_cost(&self) -> f64 {
        self.service_cost
    }

    pub fn deadhead_cost(&self) -> f64 {
        self.deadhead_cost
    }

    pub fn total_cost(&self) -> f64 {
        self.service_cost + self.deadhead_cost
    }

    /// Vertex paths of the deadhead connectors: depot to the first arc,
    /// between consecutive arcs, and back to the depot. Empty for an empty route.
    pub fn connectors(&self, inst: &Instance, dist: &DistanceTable) -> Vec<Vec<VertexId>> {
        connector_endpoints(inst, self.depot, &self.arcs).map(|(u, v)| dist.vertex_path(u, v)).collect()
    }
}

fn connector_endpoints<'a>(
    inst: &'a Instance,
    depot: VertexId,
    arcs: &'a [ServiceArc],
) -> impl Iterator<Item = (VertexId, VertexId)> + 'a {
    let n = arcs.len();
    (0..if n == 0 { 0 } else { n + 1 }).map(move |i| {
        let from = if i == 0 { depot } else { arcs[i - 1].end(inst) };
        let to = if i == n { depot } else { arcs[i].start(inst) };
        (from, to)
    })
}

fn cost_parts(inst: &Instance, dist: &DistanceTable, depot: VertexId, arcs: &[ServiceArc]) -> (f64, f64) {
    let service = arcs.iter().map(|a| inst.edge(a.edge).service_cost).sum();
    let deadhead = connector_endpoints(inst, depot, arcs).map(|(u, v)| dist.dist(u, v)).sum();
    (service, deadhead)
}

/// Total cost of a route recomputed from scratch: service costs plus the
/// shortest deadhead connectors.
pub fn route_cost(inst: &Instance, dist: &DistanceTable, route: &Route) -> f64 {
    let (service, deadhead) = cost_parts(inst, dist, route.depot, &route.arcs);
    service + deadhead
}

fn check_serviceable(inst: &Instance, edge: EdgeId) -> Result<()> {
    if edge >= inst.num_edges() {
        return Err(RoutingError::UnknownEdge(edge));
    }
    if inst.edge(edge).deadhead_only {
        return Err(RoutingError::NotServiceable(edge));
    }
    Ok(())
}

/// Single-arc route from `depot` over `edge`, in the cheaper orientation
/// (tail → head on ties).
pub fn initial_route(inst: &Instance, dist: &DistanceTable, depot: VertexId, edge: EdgeId) -> Result<Route> {
    insert_edge(inst, dist, &Route::empty(depot), edge)
}

/// Inserts `edge` into `route` at the cheapest of the candidate positions.
///
/// Candidates, in enumeration order (ties keep the earliest):
/// - position 0: the edge before the first arc, tail → head then head → tail;
/// - positions `1..l`: the route is cut after `p` arcs into halves `A` and `B`
///   and rebuilt as `A e B`, for all 8 combinations of reversing `A`, reversing
///   `B` and orienting `e` (combination bits: 1 = `e` backward, 2 = `A`
///   reversed, 4 = `B` reversed);
/// - position `l`: the edge after the last arc, both orientations.
///
/// Service cost is the same for every candidate, so only deadheading is
/// compared. Each candidate is priced in constant time from prefix sums of the
/// inner connectors, which do not change when a half is reversed because the
/// deadhead distances are symmetric. Runs in `O(l)`.
pub fn insert_edge(inst: &Instance, dist: &DistanceTable, route: &Route, edge: EdgeId) -> Result<Route> {
    check_serviceable(inst, edge)?;
    if route.contains(edge) {
        return Err(RoutingError::AlreadyServiced(edge));
    }
    let depot = route.depot;
    let arcs = &route.arcs;
    let l = arcs.len();
    let new_arc = |backward: bool| if backward { ServiceArc::backward(edge) } else { ServiceArc::forward(edge) };
    let ends = |backward: bool| {
        let arc = new_arc(backward);
        (arc.start(inst), arc.end(inst))
    };

    if l == 0 {
        let mut best = (f64::INFINITY, false);
        for backward in [false, true] {
            let (s, t) = ends(backward);
            let cost = dist.dist(depot, s) + dist.dist(t, depot);
            if cost < best.0 {
                best = (cost, backward);
            }
        }
        return Ok(Route::costed(inst, dist, depot, vec![new_arc(best.1)]));
    }

    let starts: Vec<VertexId> = arcs.iter().map(|a| a.start(inst)).collect();
    let finishes: Vec<VertexId> = arcs.iter().map(|a| a.end(inst)).collect();
    // prefix[i] = deadhead between arcs 0..=i, i.e. connectors (0,1) .. (i-1,i)
    let mut prefix = Vec::with_capacity(l);
    prefix.push(0.0);
    for i in 1..l {
        prefix.push(prefix[i - 1] + dist.dist(finishes[i - 1], starts[i]));
    }
    let inner = |a: usize, b: usize| prefix[b] - prefix[a];

    #[derive(Clone, Copy)]
    enum Choice {
        Front(bool),
        Split(usize, u8),
        Back(bool),
    }
    let mut best_cost = f64::INFINITY;
    let mut best = Choice::Front(false);

    for backward in [false, true] {
        let (s, t) = ends(backward);
        let cost = dist.dist(depot, s) + dist.dist(t, starts[0]) + inner(0, l - 1) + dist.dist(finishes[l - 1], depot);
        if cost < best_cost {
            best_cost = cost;
            best = Choice::Front(backward);
        }
    }
    for p in 1..l {
        let inner_a = inner(0, p - 1);
        let inner_b = inner(p, l - 1);
        for combo in 0u8..8 {
            let (s, t) = ends(combo & 1 != 0);
            let (a_start, a_end) = if combo & 2 != 0 { (finishes[p - 1], starts[0]) } else { (starts[0], finishes[p - 1]) };
            let (b_start, b_end) = if combo & 4 != 0 { (finishes[l - 1], starts[p]) } else { (starts[p], finishes[l - 1]) };
            let cost = dist.dist(depot, a_start)
                + inner_a
                + dist.dist(a_end, s)
                + dist.dist(t, b_start)
                + inner_b
                + dist.dist(b_end, depot);
            if cost < best_cost {
                best_cost = cost;
                best = Choice::Split(p, combo);
            }
        }
    }
    for backward in [false, true] {
        let (s, t) = ends(backward);
        let cost = dist.dist(depot, starts[0]) + inner(0, l - 1) + dist.dist(finishes[l - 1], s) + dist.dist(t, depot);
        if cost < best_cost {
            best_cost = cost;
            best = Choice::Back(backward);
        }
    }

    let mut out = Vec::with_capacity(l + 1);
    match best {
        Choice::Front(backward) => {
            out.push(new_arc(backward));
            out.extend_from_slice(arcs);
        }
        Choice::Back(backward) => {
            out.extend_from_slice(arcs);
            out.push(new_arc(backward));
        }
        Choice::Split(p, combo) => {
            push_half(&mut out, &arcs[..p], combo & 2 != 0);
            out.push(new_arc(combo & 1 != 0));
            push_half(&mut out, &arcs[p..], combo & 4 != 0);
        }
    }
    Ok(Route::costed(inst, dist, depot, out))
}

fn push_half(out: &mut Vec<ServiceArc>, half: &[ServiceArc], reverse: bool) {
    if reverse {
        out.extend(half.iter().rev().map(|a| a.reversed()));
    } else {
        out.extend_from_slice(half);
    }
}

/// One traversal of an edge on the fully expanded closed walk of a route.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Traversal {
    pub edge: EdgeId,
    pub from: VertexId,
    pub to: VertexId,
    pub serviced: bool,
}

/// Expands a route into the edge-level closed walk it denotes.
pub fn route_walk(inst: &Instance, dist: &DistanceTable, route: &Route) -> Vec<Traversal> {
    let mut walk = Vec::new();
    let n = route.arcs.len();
    for (i, (u, v)) in connector_endpoints(inst, route.depot, &route.arcs).enumerate() {
        walk.extend(dist.path(u, v).into_iter().map(|s| Traversal { edge: s.edge, from: s.from, to: s.to, serviced: false }));
        if i < n {
            let arc = route.arcs[i];
            walk.push(Traversal { edge: arc.edge, from: arc.start(inst), to: arc.end(inst), serviced: true });
        }
    }
    walk
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    routes: Vec<Route>,
    total_reward: f64,
}

impl Solution {
    pub fn new(routes: Vec<Route>, total_reward: f64) -> Self {
        Self { routes, total_reward }
    }

    /// One empty route per robot.
    pub fn empty(inst: &Instance) -> Self {
        Self::new(inst.robots().iter().map(|r| Route::empty(r.depot)).collect(), 0.0)
    }

    pub fn routes(&self) -> &[Route] {
        &self.routes
    }

    pub fn total_reward(&self) -> f64 {
        self.total_reward
    }

    pub fn route_costs(&self) -> Vec<f64> {
        self.routes.iter().map(Route::total_cost).collect()
    }

    pub fn total_cost(&self) -> f64 {
        self.routes.iter().map(Route::total_cost).sum()
    }

    /// Serviced edges, with an edge listed once even if several routes service it.
    pub fn serviced(&self) -> BTreeSet<EdgeId> {
        self.routes.iter().flat_map(|r| r.arcs.iter().map(|a| a.edge)).collect()
    }

    /// `s_e` for every edge of `inst`; counts how many times it is serviced.
    pub fn service_counts(&self, num_edges: usize) -> Vec<u32> {
        let mut counts = vec![0u32; num_edges];
        for arc in self.routes.iter().flat_map(|r| r.arcs.iter()) {
            counts[arc.edge] += 1;
        }
        counts
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    RouteCount { found: usize, robots: usize },
    WrongDepot { robot: usize, depot: VertexId, expected: VertexId },
    OverCapacity { robot: usize, cost: f64, capacity: f64 },
    StaleCost { robot: usize, cached: f64, recomputed: f64 },
    ServicedTwice(EdgeId),
    DeadheadOnlyServiced(EdgeId),
    BrokenWalk { robot: usize, step: usize },
    Unbalanced { robot: usize, vertex: VertexId, inflow: usize, outflow: usize },
}

/// Checks every structural requirement on a solution: one route per robot at
/// its depot, capacity, at-most-once service, and that each route expands to
/// a depot-anchored closed walk with balanced in/out degree at every vertex.
pub fn audit_solution(inst: &Instance, dist: &DistanceTable, sol: &Solution) -> Vec<Violation> {
    let mut out = Vec::new();
    if sol.routes.len() != inst.robots().len() {
        out.push(Violation::RouteCount { found: sol.routes.len(), robots: inst.robots().len() });
    }
    for (count, edge) in sol.service_counts(inst.num_edges()).into_iter().zip(0..) {
        if count > 1 {
            out.push(Violation::ServicedTwice(edge));
        }
        if count > 0 && inst.edge(edge).deadhead_only {
            out.push(Violation::DeadheadOnlyServiced(edge));
        }
    }
    for (robot, (route, spec)) in sol.routes.iter().zip(inst.robots()).enumerate() {
        if route.depot != spec.depot {
            out.push(Violation::WrongDepot { robot, depot: route.depot, expected: spec.depot });
        }
        let recomputed = route_cost(inst, dist, route);
        if (recomputed - route.total_cost()).abs() > COST_TOLERANCE * recomputed.max(1.0) {
            out.push(Violation::StaleCost { robot, cached: route.total_cost(), recomputed });
        }
        if !fits_capacity(recomputed, spec.capacity) {
            out.push(Violation::OverCapacity { robot, cost: recomputed, capacity: spec.capacity });
        }
        out.extend(audit_walk(inst, robot, route.depot, &route_walk(inst, dist, route)));
    }
    out
}

fn audit_walk(inst: &Instance, robot: usize, depot: VertexId, walk: &[Traversal]) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut at = depot;
    let mut inflow: BTreeMap<VertexId, usize> = BTreeMap::new();
    let mut outflow: BTreeMap<VertexId, usize> = BTreeMap::new();
    for (step, t) in walk.iter().enumerate() {
        let e = inst.edge(t.edge);
        let matches_edge = (e.tail, e.head) == (t.from, t.to) || (e.head, e.tail) == (t.from, t.to);
        if t.from != at || !matches_edge {
            out.push(Violation::BrokenWalk { robot, step });
        }
        *outflow.entry(t.from).or_default() += 1;
        *inflow.entry(t.to).or_default() += 1;
        at = t.to;
    }
    if at != depot {
        out.push(Violation::BrokenWalk { robot, step: walk.len() });
    }
    let vertices: BTreeSet<VertexId> = inflow.keys().chain(outflow.keys()).copied().collect();
    for v in vertices {
        let (i, o) = (inflow.get(&v).copied().unwrap_or(0), outflow.get(&v).copied().unwrap_or(0));
        if i != o {
            out.push(Violation::Unbalanced { robot, vertex: v, inflow: i, outflow: o });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RouteRecord {
    pub robot: usize,
    pub depot: VertexId,
    pub capacity: f64,
    pub arcs: Vec<ServiceArc>,
    pub connectors: Vec<Vec<VertexId>>,
    pub service_cost: f64,
    pub deadhead_cost: f64,
    pub total_cost: f64,
}

/// On-disk solution document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolutionFile {
    pub routes: Vec<RouteRecord>,
    pub total_reward: f64,
    pub serviced_edges: Vec<EdgeId>,
}

impl SolutionFile {
    pub fn from_solution(inst: &Instance, dist: &DistanceTable, sol: &Solution) -> Self {
        let routes = sol
            .routes
            .iter()
            .zip(inst.robots())
            .enumerate()
            .map(|(robot, (route, spec))| RouteRecord {
                robot,
                depot: route.depot,
                capacity: spec.capacity,
                arcs: route.arcs.clone(),
                connectors: route.connectors(inst, dist),
                service_cost: route.service_cost,
                deadhead_cost: route.deadhead_cost,
                total_cost: route.total_cost(),
            })
            .collect();
        Self { routes, total_reward: sol.total_reward, serviced_edges: sol.serviced().into_iter().collect() }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| RoutingError::Parse(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("solution documents always serialize")
    }

    /// Rebuilds the routes against `inst`, re-costing every arc sequence.
    pub fn to_solution(&self, inst: &Instance, dist: &DistanceTable) -> Result<Solution> {
        if self.routes.len() != inst.robots().len() {
            return Err(RoutingError::RouteCount { found: self.routes.len(), robots: inst.robots().len() });
        }
        let routes = self
            .routes
            .iter()
            .map(|r| Route::from_arcs(inst, dist, r.depot, r.arcs.clone()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Solution::new(routes, self.total_reward))
    }
}
