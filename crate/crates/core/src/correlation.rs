//! Correlation weights `w(from, to)`: the fraction of `to`'s reward collected
//! by servicing `from`.
//!
//! Weights are sparse. For every edge we keep its neighbors (edges that observe
//! it) and its co-neighbors (edges it observes); the two relations are exact
//! inverses of each other.

use rayon::prelude::*;
use thiserror::Error;

use crate::geometry::{expected_sq_distance, round_sig, Segment};
use crate::instance::{EdgeId, Instance, WeightEntry};

/// Digits kept when weights are built or written.
pub const WEIGHT_DIGITS: usize = 12;
/// Samples along the observed edge for field-of-view fractions.
pub const DEFAULT_FOV_SAMPLES: usize = 50;
/// Weights below this are dropped by the inverse-distance builder.
pub const DEFAULT_SPARSITY_FLOOR: f64 = 1e-4;
/// Expected distances below this are raised to it before inversion.
pub const DEFAULT_D_MIN: f64 = 1.0;

const FOV_EPS: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum WeightError {
    #[error("edge {0} has a positive length but no geometry")]
    MissingGeometry(EdgeId),
    #[error("weight entry references edge {0}, which does not exist")]
    BadReference(EdgeId),
    #[error("weight entry ({from}, {to}) touches a deadhead-only edge")]
    DeadheadOnly { from: EdgeId, to: EdgeId },
    #[error("weight ({from}, {to}) = {w} is outside [0, 1]")]
    OutOfRange { from: EdgeId, to: EdgeId, w: f64 },
    #[error("weight ({from}, {to}) given twice")]
    Duplicate { from: EdgeId, to: EdgeId },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("need at least two service edges, found {0}")]
    TooFewEdges(usize),
}

pub type Result<T> = std::result::Result<T, WeightError>;

#[derive(Debug, Clone, PartialEq, Default)]
pub struct WeightModel {
    /// `neighbors[e]` holds `(e', w(e', e))`, sorted by `e'`.
    neighbors: Vec<Vec<(EdgeId, f64)>>,
    /// `co_neighbors[e]` holds `(e', w(e, e'))`, sorted by `e'`.
    co_neighbors: Vec<Vec<(EdgeId, f64)>>,
    len: usize,
}

impl WeightModel {
    pub fn empty(num_edges: usize) -> Self {
        Self { neighbors: vec![Vec::new(); num_edges], co_neighbors: vec![Vec::new(); num_edges], len: 0 }
    }

    /// Builds a model from `(from, to, w)` triples. Zero weights and diagonal
    /// entries are dropped.
    pub fn from_entries(num_edges: usize, entries: impl IntoIterator<Item = (EdgeId, EdgeId, f64)>) -> Result<Self> {
        let mut model = Self::empty(num_edges);
        for (from, to, w) in entries {
            for id in [from, to] {
                if id >= num_edges {
                    return Err(WeightError::BadReference(id));
                }
            }
            if !(0.0..=1.0).contains(&w) {
                return Err(WeightError::OutOfRange { from, to, w });
            }
            if w == 0.0 || from == to {
                continue;
            }
            model.co_neighbors[from].push((to, w));
            model.neighbors[to].push((from, w));
            model.len += 1;
        }
        for list in model.neighbors.iter_mut().chain(model.co_neighbors.iter_mut()) {
            list.sort_by_key(|&(e, _)| e);
        }
        for (from, list) in model.co_neighbors.iter().enumerate() {
            if let Some(pair) = list.windows(2).find(|p| p[0].0 == p[1].0) {
                return Err(WeightError::Duplicate { from, to: pair[0].0 });
            }
        }
        Ok(model)
    }

    /// Like [`WeightModel::from_entries`] but also rejects entries that touch
    /// deadhead-only edges of `inst`.
    pub fn for_instance(inst: &Instance, entries: &[WeightEntry]) -> Result<Self> {
        for e in entries {
            for id in [e.from, e.to] {
                if id >= inst.num_edges() {
                    return Err(WeightError::BadReference(id));
                }
            }
            if e.w != 0.0 && (inst.edge(e.from).deadhead_only || inst.edge(e.to).deadhead_only) {
                return Err(WeightError::DeadheadOnly { from: e.from, to: e.to });
            }
        }
        Self::from_entries(inst.num_edges(), entries.iter().map(|e| (e.from, e.to, e.w)))
    }

    pub fn num_edges(&self) -> usize {
        self.neighbors.len()
    }

    /// Number of stored (positive) entries.
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn weight(&self, from: EdgeId, to: EdgeId) -> f64 {
        let list = &self.co_neighbors[from];
        match list.binary_search_by_key(&to, |&(e, _)| e) {
            Ok(i) => list[i].1,
            Err(_) => 0.0,
        }
    }

    /// `N(e)`: edges that observe `e`, with `w(e', e)`.
    pub fn neighbors(&self, e: EdgeId) -> &[(EdgeId, f64)] {
        &self.neighbors[e]
    }

    /// `N̄(e)`: edges observed by `e`, with `w(e, e')`.
    pub fn co_neighbors(&self, e: EdgeId) -> &[(EdgeId, f64)] {
        &self.co_neighbors[e]
    }

    /// Sum of the weights of all edges observing `e`.
    pub fn incoming_sum(&self, e: EdgeId) -> f64 {
        self.neighbors[e].iter().map(|&(_, w)| w).sum()
    }

    /// All entries ordered by `(from, to)`.
    pub fn entries(&self) -> impl Iterator<Item = (EdgeId, EdgeId, f64)> + '_ {
        self.co_neighbors.iter().enumerate().flat_map(|(from, list)| list.iter().map(move |&(to, w)| (from, to, w)))
    }

    /// The `weights` array of an instance document.
    pub fn to_entries(&self) -> Vec<WeightEntry> {
        self.entries().map(|(from, to, w)| WeightEntry { from, to, w: round_sig(w, WEIGHT_DIGITS) }).collect()
    }
}

/// Neighbor and co-neighbor id lists for every edge.
pub fn neighbor_sets(wm: &WeightModel) -> (Vec<Vec<EdgeId>>, Vec<Vec<EdgeId>>) {
    let ids = |lists: &[Vec<(EdgeId, f64)>]| lists.iter().map(|l| l.iter().map(|&(e, _)| e).collect()).collect();
    (ids(&wm.neighbors), ids(&wm.co_neighbors))
}

fn service_segments(inst: &Instance) -> Result<Vec<(EdgeId, Segment)>> {
    inst.service_edges()
        .map(|e| {
            let seg = inst.segment(e.id);
            if !e.is_loop() && seg.a == seg.b && e.length > 0.0 {
                Err(WeightError::MissingGeometry(e.id))
            } else {
                Ok((e.id, seg))
            }
        })
        .collect()
}

/// Field-of-view correlation: `w(from, to)` is the fraction of `to` lying
/// within `fov / 2` of segment `from`, using the default sample count.
pub fn fov_weights(inst: &Instance, fov: f64) -> Result<WeightModel> {
    fov_weights_with(inst, fov, DEFAULT_FOV_SAMPLES)
}

pub fn fov_weights_with(inst: &Instance, fov: f64, samples: usize) -> Result<WeightModel> {
    if !(fov > 0.0 && fov.is_finite()) {
        return Err(WeightError::InvalidParameter(format!("field of view must be positive, got {fov}")));
    }
    if samples == 0 {
        return Err(WeightError::InvalidParameter("sample count must be positive".into()));
    }
    let segments = service_segments(inst)?;
    let reach = fov / 2.0 + FOV_EPS;
    let entries: Vec<(EdgeId, EdgeId, f64)> = segments
        .par_iter()
        .flat_map_iter(|&(to, observed)| {
            let probes: Vec<_> = (0..samples).map(|i| observed.point_at((i as f64 + 0.5) / samples as f64)).collect();
            let segments = &segments;
            segments.iter().filter_map(move |&(from, viewer)| {
                if from == to || viewer.bbox_gap(&observed) > reach {
                    return None;
                }
                let seen = probes.iter().filter(|&&p| viewer.distance_to_point(p) <= reach).count();
                (seen > 0).then(|| (from, to, round_sig(seen as f64 / samples as f64, WEIGHT_DIGITS)))
            })
        })
        .collect();
    WeightModel::from_entries(inst.num_edges(), entries)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InverseDistanceOptions {
    /// Expected distances below this are raised to it.
    pub d_min: f64,
    /// Normalized weights below this are dropped.
    pub sparsity_floor: f64,
}

impl Default for InverseDistanceOptions {
    fn default() -> Self {
        Self { d_min: DEFAULT_D_MIN, sparsity_floor: DEFAULT_SPARSITY_FLOOR }
    }
}

/// Correlation from the root expected squared distance between uniform points
/// on two edges: inverted, clamped from below by `d_min`, normalized by the
/// largest inverse over all ordered pairs (diagonal included), then the
/// diagonal is zeroed.
pub fn inverse_distance_weights(inst: &Instance) -> Result<WeightModel> {
    inverse_distance_weights_with(inst, InverseDistanceOptions::default())
}

pub fn inverse_distance_weights_with(inst: &Instance, opts: InverseDistanceOptions) -> Result<WeightModel> {
    if !(opts.d_min > 0.0 && opts.d_min.is_finite()) {
        return Err(WeightError::InvalidParameter(format!("d_min must be positive, got {}", opts.d_min)));
    }
    if !(opts.sparsity_floor >= 0.0) {
        return Err(WeightError::InvalidParameter(format!(
            "sparsity floor must be non-negative, got {}",
            opts.sparsity_floor
        )));
    }
    let segments = service_segments(inst)?;
    if segments.len() < 2 {
        return Err(WeightError::TooFewEdges(segments.len()));
    }
    let inverse = |s: &Segment, t: &Segment| 1.0 / expected_sq_distance(s, t).sqrt().max(opts.d_min);
    let raw: Vec<Vec<f64>> =
        segments.par_iter().map(|(_, s)| segments.iter().map(|(_, t)| inverse(s, t)).collect()).collect();
    let max = raw.iter().flatten().copied().fold(0.0_f64, f64::max);
    let mut entries = Vec::new();
    for (i, &(from, _)) in segments.iter().enumerate() {
        for (j, &(to, _)) in segments.iter().enumerate() {
            if i == j {
                continue;
            }
            let w = round_sig(raw[i][j] / max, WEIGHT_DIGITS).min(1.0);
            if w >= opts.sparsity_floor && w > 0.0 {
                entries.push((from, to, w));
            }
        }
    }
    WeightModel::from_entries(inst.num_edges(), entries)
}
