use serde::{Deserialize, Serialize};

use super::{apply_depots, gen_grid, gen_random_planar, gen_spiral, kmedoids_depots, AppError, Result};
use crate::correlation::{fov_weights, inverse_distance_weights, WeightModel};
use crate::instance::{DistanceTable, Instance, Robot};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorKind {
    Spiral { segments: usize, spacing: f64 },
    Grid { cols: usize, rows: usize, spacing: f64 },
    RandomPlanar { vertices: usize, edges: usize, extent: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CorrelationRecipe {
    None,
    Fov { fov: f64 },
    InverseDistance,
}

/// Everything needed to regenerate an instance and its weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub generator: GeneratorKind,
    pub correlation: CorrelationRecipe,
    pub robots: usize,
    pub capacity: f64,
    /// `(service_speed, deadhead_speed)`: re-cost edges from lengths and add a
    /// straight deadhead-only edge between every unjoined vertex pair.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub direct_deadhead: Option<(f64, f64)>,
    /// Required by the random generator and by depot clustering.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl ScenarioSpec {
    fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(AppError::InvalidParameter(m.into()));
        if self.robots == 0 {
            return bad("at least one robot is required");
        }
        if !(self.capacity >= 0.0 && self.capacity.is_finite()) {
            return bad("capacity must be finite and non-negative");
        }
        let needs_seed = matches!(self.generator, GeneratorKind::RandomPlanar { .. }) || self.robots > 1;
        if needs_seed && self.seed.is_none() {
            return bad("this scenario needs a seed");
        }
        if let CorrelationRecipe::Fov { fov } = self.correlation {
            if !(fov > 0.0) {
                return bad("field of view must be positive");
            }
        }
        Ok(())
    }

    /// Builds the instance, places depots (k-medoids when there are several
    /// robots, vertex 0 otherwise) and computes the weights.
    pub fn build(&self) -> Result<(Instance, WeightModel)> {
        self.check()?;
        let seed = self.seed.unwrap_or(0);
        let mut inst = match self.generator {
            GeneratorKind::Spiral { segments, spacing } => gen_spiral(segments, spacing)?,
            GeneratorKind::Grid { cols, rows, spacing } => gen_grid(cols, rows, spacing)?,
            GeneratorKind::RandomPlanar { vertices, edges, extent } => gen_random_planar(vertices, edges, extent, seed)?,
        };
        if let Some((s, d)) = self.direct_deadhead {
            inst.set_speeds(s, d)?;
            inst.add_direct_deadhead_edges(s, d)?;
        }
        if self.robots == 1 {
            inst.set_robots(vec![Robot { depot: 0, capacity: self.capacity }])?;
        } else {
            let dist = DistanceTable::new(&inst);
            let plan = kmedoids_depots(&inst, &dist, self.robots, seed)?;
            apply_depots(&mut inst, &plan, self.capacity)?;
        }
        let wm = match self.correlation {
            CorrelationRecipe::None => WeightModel::empty(inst.num_edges()),
            CorrelationRecipe::Fov { fov } => fov_weights(&inst, fov)?,
            CorrelationRecipe::InverseDistance => inverse_distance_weights(&inst)?,
        };
        Ok((inst, wm))
    }
}
