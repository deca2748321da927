//! Independent reference implementations shared by the integration tests.
#![allow(dead_code)]

use caop::correlation::WeightModel;
use caop::geometry::Segment;
use caop::instance::{Edge, EdgeId, Instance, Robot, Vertex, VertexId};
use caop::routing::{Direction, ServiceArc};
use rand::Rng;

/// Floyd-Warshall over deadhead costs.
pub fn floyd(inst: &Instance) -> Vec<Vec<f64>> {
    let n = inst.num_vertices();
    let mut d = vec![vec![f64::INFINITY; n]; n];
    for (v, row) in d.iter_mut().enumerate() {
        row[v] = 0.0;
    }
    for e in inst.edges() {
        let c = e.deadhead_cost;
        if c < d[e.tail][e.head] {
            d[e.tail][e.head] = c;
            d[e.head][e.tail] = c;
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    d
}

fn ends(inst: &Instance, arc: ServiceArc) -> (VertexId, VertexId) {
    let e = inst.edge(arc.edge);
    match arc.dir {
        Direction::Forward => (e.tail, e.head),
        Direction::Backward => (e.head, e.tail),
    }
}

/// Cost of the closed walk depot → arcs in order → depot.
pub fn walk_cost(inst: &Instance, d: &[Vec<f64>], depot: VertexId, arcs: &[ServiceArc]) -> f64 {
    let mut at = depot;
    let mut cost = 0.0;
    for &a in arcs {
        let (s, t) = ends(inst, a);
        cost += d[at][s] + inst.edge(a.edge).service_cost;
        at = t;
    }
    cost + d[at][depot]
}

fn reversed(half: &[ServiceArc]) -> Vec<ServiceArc> {
    half.iter()
        .rev()
        .map(|a| ServiceArc::new(a.edge, if a.dir == Direction::Forward { Direction::Backward } else { Direction::Forward }))
        .collect()
}

/// Every arc sequence the insertion rule considers: both orientations at
/// the front and back, and at each inner cut all reversals of the two halves
/// combined with both orientations of the new edge.
pub fn insertion_candidates(arcs: &[ServiceArc], edge: EdgeId) -> Vec<Vec<ServiceArc>> {
    let l = arcs.len();
    let both = [ServiceArc::new(edge, Direction::Forward), ServiceArc::new(edge, Direction::Backward)];
    let mut out = Vec::new();
    for a in both {
        let mut v = vec![a];
        v.extend_from_slice(arcs);
        out.push(v);
    }
    if l == 0 {
        return out;
    }
    for p in 1..l {
        let (a, b) = arcs.split_at(p);
        for a_half in [a.to_vec(), reversed(a)] {
            for b_half in [b.to_vec(), reversed(b)] {
                for e in both {
                    let mut v = a_half.clone();
                    v.push(e);
                    v.extend_from_slice(&b_half);
                    out.push(v);
                }
            }
        }
    }
    for a in both {
        let mut v = arcs.to_vec();
        v.push(a);
        out.push(v);
    }
    out
}

/// Cheapest candidate cost by explicit enumeration.
pub fn brute_insertion_cost(inst: &Instance, d: &[Vec<f64>], depot: VertexId, arcs: &[ServiceArc], edge: EdgeId) -> f64 {
    insertion_candidates(arcs, edge)
        .iter()
        .map(|c| walk_cost(inst, d, depot, c))
        .fold(f64::INFINITY, f64::min)
}

fn permutations(items: &[EdgeId]) -> Vec<Vec<EdgeId>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let first = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, first);
            out.push(tail);
        }
    }
    out
}

/// Minimum closed-walk cost servicing every edge of `edges`, over all orders
/// and orientations.
pub fn min_cost_by_permutation(inst: &Instance, d: &[Vec<f64>], depot: VertexId, edges: &[EdgeId]) -> f64 {
    let mut best = f64::INFINITY;
    for order in permutations(edges) {
        for dirs in 0u32..(1 << order.len()) {
            let arcs: Vec<ServiceArc> = order
                .iter()
                .enumerate()
                .map(|(i, &e)| ServiceArc::new(e, if dirs >> i & 1 == 1 { Direction::Backward } else { Direction::Forward }))
                .collect();
            best = best.min(walk_cost(inst, d, depot, &arcs));
        }
    }
    best
}

/// The bilinear reward written out term by term:
/// `Σ r(e) (s_e + Σ_{e' ∈ N(e)} w(e', e) s_e' (s_e' − s_e))`.
pub fn quadratic_reward(inst: &Instance, wm: &WeightModel, serviced: &[bool]) -> f64 {
    let s = |e: EdgeId| if serviced[e] { 1.0 } else { 0.0 };
    let mut total = 0.0;
    for e in inst.edges() {
        let mut inner = s(e.id);
        for from in 0..inst.num_edges() {
            let w = wm.weight(from, e.id);
            inner += w * s(from) * (s(from) - s(e.id));
        }
        total += e.reward * inner;
    }
    total
}

/// Monte Carlo estimate of `E‖X − Y‖²` for independent uniform points.
pub fn mc_expected_sq_distance(s: &Segment, t: &Segment, samples: usize, rng: &mut impl Rng) -> f64 {
    let mut acc = 0.0;
    for _ in 0..samples {
        let p = s.point_at(rng.random::<f64>());
        let q = t.point_at(rng.random::<f64>());
        acc += p.distance_sq(q);
    }
    acc / samples as f64
}

/// Connected multigraph on integer coordinates with integer-valued costs and
/// rewards, so every path and route cost is exact in floating point.
/// `loops` self-loop point features are appended.
pub fn integer_instance(rng: &mut impl Rng, n: usize, m: usize, loops: usize, robots: usize, capacity: f64) -> Instance {
    assert!(m + 1 >= n, "need at least a spanning tree");
    let vertices: Vec<Vertex> =
        (0..n).map(|id| Vertex { id, x: rng.random_range(0..30) as f64, y: rng.random_range(0..30) as f64 }).collect();
    let mut pairs: Vec<(VertexId, VertexId)> = (1..n).map(|v| (rng.random_range(0..v), v)).collect();
    while pairs.len() < m {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            pairs.push((a, b));
        }
    }
    for _ in 0..loops {
        let v = rng.random_range(0..n);
        pairs.push((v, v));
    }
    let edges = pairs
        .iter()
        .enumerate()
        .map(|(id, &(tail, head))| {
            let length = vertices[tail].point().distance(vertices[head].point());
            Edge {
                id,
                tail,
                head,
                service_cost: rng.random_range(1..8) as f64,
                deadhead_cost: if tail == head { 0.0 } else { rng.random_range(1..6) as f64 },
                length,
                reward: rng.random_range(0..5) as f64,
                deadhead_only: false,
            }
        })
        .collect();
    let robots: Vec<Robot> = (0..robots).map(|_| Robot { depot: rng.random_range(0..n), capacity }).collect();
    let mut depots: Vec<VertexId> = robots.iter().map(|r| r.depot).collect();
    depots.sort_unstable();
    depots.dedup();
    Instance::new(vertices, edges, depots, robots).expect("generated instance is valid")
}

/// Random weights with every incoming sum at most one.
pub fn bounded_weights(rng: &mut impl Rng, m: usize, density: f64) -> WeightModel {
    let mut entries = Vec::new();
    for to in 0..m {
        let mut budget = 1.0;
        for from in 0..m {
            if from != to && rng.random_bool(density) {
                let w = (rng.random_range(0.0..budget) * 1e6_f64).floor() / 1e6;
                if w > 0.0 {
                    budget -= w;
                    entries.push((from, to, w));
                }
            }
        }
    }
    WeightModel::from_entries(m, entries).expect("weights are in range")
}

/// Random weights with no bound on the incoming sums.
pub fn unbounded_weights(rng: &mut impl Rng, m: usize, density: f64) -> WeightModel {
    let entries: Vec<_> = (0..m)
        .flat_map(|from| (0..m).map(move |to| (from, to)))
        .filter(|&(from, to)| from != to)
        .filter(|_| rng.random_bool(density))
        .collect::<Vec<_>>()
        .into_iter()
        .map(|(from, to)| (from, to, rng.random_range(0.05..1.0)))
        .collect();
    WeightModel::from_entries(m, entries).expect("weights are in range")
}
