use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{AppError, Result};
use crate::correlation::{fov_weights, inverse_distance_weights, WeightModel};
use crate::geometry::{Point, Segment};
use crate::instance::{Edge, Instance, Robot, Vertex, VertexId};

fn positive(x: f64, what: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(AppError::InvalidParameter(format!("{what} must be positive, got {x}")))
    }
}

/// Instance with length costs and rewards, one robot at vertex 0 whose
/// capacity equals the total edge length.
fn build(points: &[Point], pairs: &[(VertexId, VertexId)]) -> Result<Instance> {
    let vertices = points.iter().enumerate().map(|(id, p)| Vertex { id, x: p.x, y: p.y }).collect();
    let edges: Vec<Edge> = pairs
        .iter()
        .enumerate()
        .map(|(id, &(tail, head))| {
            let length = points[tail].distance(points[head]);
            Edge {
                id,
                tail,
                head,
                service_cost: length,
                deadhead_cost: length,
                length,
                reward: length,
                deadhead_only: false,
            }
        })
        .collect();
    let capacity = edges.iter().map(|e| e.length).sum();
    Ok(Instance::new(vertices, edges, vec![0], vec![Robot { depot: 0, capacity }])?)
}

/// Rectilinear square spiral walked inward. Built outward from the center
/// with arm lengths 1, 1, 2, 2, 3, 3, ... times `spacing`, each arm cut into
/// unit-length pieces, then reversed so vertex 0 is the outer endpoint,
/// placed at the origin. Edge `i` joins vertices `i` and `i + 1`.
pub fn gen_spiral(n_segments: usize, spacing: f64) -> Result<Instance> {
    if n_segments == 0 {
        return Err(AppError::InvalidParameter("a spiral needs at least one segment".into()));
    }
    positive(spacing, "spacing")?;
    let dirs = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
    let mut points = vec![Point::new(0.0, 0.0)];
    let mut arm = 0;
    'outer: loop {
        let length = (arm / 2 + 1) as f64 * spacing;
        let pieces = (length - 1e-9).ceil().max(1.0) as usize;
        let (dx, dy) = dirs[arm % 4];
        let start = *points.last().unwrap();
        for p in 1..=pieces {
            let t = length * p as f64 / pieces as f64;
            points.push(Point::new(start.x + dx * t, start.y + dy * t));
            if points.len() == n_segments + 1 {
                break 'outer;
            }
        }
        arm += 1;
    }
    points.reverse();
    let origin = points[0];
    for p in &mut points {
        *p = Point::new(p.x - origin.x, p.y - origin.y);
    }
    let pairs: Vec<(VertexId, VertexId)> = (0..n_segments).map(|i| (i, i + 1)).collect();
    build(&points, &pairs)
}

/// Rectangular lattice of `cols x rows` cells. Vertex `(i, j)` has id
/// `j * (cols + 1) + i`; horizontal edges come first.
pub fn gen_grid(cols: usize, rows: usize, spacing: f64) -> Result<Instance> {
    if cols == 0 && rows == 0 {
        return Err(AppError::InvalidParameter("a grid needs at least one cell side".into()));
    }
    positive(spacing, "spacing")?;
    let nx = cols + 1;
    let points: Vec<Point> = (0..=rows)
        .flat_map(|j| (0..nx).map(move |i| Point::new(i as f64 * spacing, j as f64 * spacing)))
        .collect();
    let id = |i: usize, j: usize| j * nx + i;
    let mut pairs = Vec::new();
    for j in 0..=rows {
        for i in 0..cols {
            pairs.push((id(i, j), id(i + 1, j)));
        }
    }
    for j in 0..rows {
        for i in 0..=cols {
            pairs.push((id(i, j), id(i, j + 1)));
        }
    }
    build(&points, &pairs)
}

/// Connected planar straight-line graph: uniform points in an
/// `extent x extent` square, their Euclidean minimum spanning tree, then the
/// shortest remaining pairs that cross no chosen edge until `n_edges` exist.
pub fn gen_random_planar(n_vertices: usize, n_edges: usize, extent: f64, seed: u64) -> Result<Instance> {
    if n_vertices < 2 {
        return Err(AppError::InvalidParameter("need at least two vertices".into()));
    }
    positive(extent, "extent")?;
    let max_edges = if n_vertices < 3 { 1 } else { 3 * n_vertices - 6 };
    if n_edges + 1 < n_vertices || n_edges > max_edges {
        return Err(AppError::InvalidParameter(format!(
            "{n_edges} edges cannot form a connected planar graph on {n_vertices} vertices"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points: Vec<Point> =
        (0..n_vertices).map(|_| Point::new(rng.random::<f64>() * extent, rng.random::<f64>() * extent)).collect();

    // Prim on the complete graph
    let n = n_vertices;
    let mut in_tree = vec![false; n];
    let mut best = vec![(f64::INFINITY, 0usize); n];
    let mut pairs: Vec<(VertexId, VertexId)> = Vec::with_capacity(n_edges);
    in_tree[0] = true;
    for v in 1..n {
        best[v] = (points[0].distance(points[v]), 0);
    }
    for _ in 1..n {
        let v = (0..n).filter(|&v| !in_tree[v]).min_by(|&a, &b| best[a].0.total_cmp(&best[b].0)).unwrap();
        in_tree[v] = true;
        pairs.push((best[v].1, v));
        for u in 0..n {
            let d = points[v].distance(points[u]);
            if !in_tree[u] && d < best[u].0 {
                best[u] = (d, v);
            }
        }
    }

    if pairs.len() < n_edges {
        let mut joined = std::collections::HashSet::new();
        for &(a, b) in &pairs {
            joined.insert((a.min(b), a.max(b)));
        }
        let mut candidates: Vec<(f64, VertexId, VertexId)> = (0..n)
            .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
            .filter(|p| !joined.contains(p))
            .map(|(u, v)| (points[u].distance(points[v]), u, v))
            .collect();
        candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut chosen: Vec<Segment> = pairs.iter().map(|&(a, b)| Segment::new(points[a], points[b])).collect();
        for (_, u, v) in candidates {
            if pairs.len() == n_edges {
                break;
            }
            let s = Segment::new(points[u], points[v]);
            let blocked = chosen.iter().any(|t| s.properly_intersects(t))
                || points.iter().enumerate().any(|(w, &p)| w != u && w != v && s.distance_to_point(p) < 1e-9 * extent);
            if !blocked {
                pairs.push((u, v));
                chosen.push(s);
            }
        }
        if pairs.len() < n_edges {
            return Err(AppError::InvalidParameter(format!(
                "only {} non-crossing edges fit on these points",
                pairs.len()
            )));
        }
    }
    build(&points, &pairs)
}

/// Shape of the small random instances used to compare against the exact solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicroSpec {
    pub max_edges: usize,
    pub max_robots: usize,
    pub extent: f64,
}

impl Default for MicroSpec {
    fn default() -> Self {
        Self { max_edges: 8, max_robots: 2, extent: 10.0 }
    }
}

/// Small seeded instance with random rewards, budgets and depots, paired
/// with a correlation model picked from none, field of view, inverse
/// distance or sparse random weights.
pub fn gen_micro(spec: &MicroSpec, seed: u64) -> Result<(Instance, WeightModel)> {
    if spec.max_edges < 3 || spec.max_robots == 0 {
        return Err(AppError::InvalidParameter("micro instances need at least 3 edges and 1 robot".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let max_m = spec.max_edges;
    let m = rng.random_range(3.min(max_m)..=max_m);
    // planar and connected: n - 1 <= m <= 3n - 6
    let lo = (m + 6).div_ceil(3).max(3);
    let hi = (m + 1).min(6).max(lo);
    let n = rng.random_range(lo..=hi);
    // greedy edge insertion can fall short of the planar maximum, so resample
    let mut attempt = 0;
    let base = loop {
        match gen_random_planar(n, m, spec.extent, rng.random()) {
            Ok(b) => break b,
            Err(e) if attempt == 100 => return Err(e),
            Err(_) => attempt += 1,
        }
    };

    let mut edges = base.edges().to_vec();
    for e in &mut edges {
        e.reward = (rng.random_range(0.2..3.0) * 100.0_f64).round() / 100.0;
    }
    let k = rng.random_range(1..=spec.max_robots);
    let total: f64 = edges.iter().map(|e| e.service_cost).sum();
    let robots: Vec<Robot> = (0..k)
        .map(|_| Robot { depot: rng.random_range(0..n), capacity: total * rng.random_range(0.3..1.2) })
        .collect();
    let mut depots: Vec<VertexId> = robots.iter().map(|r| r.depot).collect();
    depots.sort_unstable();
    depots.dedup();
    let inst = Instance::new(base.vertices().to_vec(), edges, depots, robots)?;

    let wm = match rng.random_range(0..4) {
        0 => WeightModel::empty(m),
        1 => fov_weights(&inst, spec.extent * rng.random_range(0.1..0.4))?,
        2 => inverse_distance_weights(&inst)?,
        _ => {
            let mut entries = Vec::new();
            for from in 0..m {
                for to in 0..m {
                    if from != to && rng.random_bool(0.3) {
                        entries.push((from, to, (rng.random_range(0.05..0.7) * 1000.0_f64).round() / 1000.0));
                    }
                }
            }
            WeightModel::from_entries(m, entries)?
        }
    };
    Ok((inst, wm))
}
