//! JSON instance schema.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CostMode, Edge, Instance, InstanceError, Result, Robot, Vertex};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VertexRecord {
    pub id: usize,
    pub x: f64,
    pub y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeRecord {
    pub id: usize,
    pub tail: usize,
    pub head: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub service_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub deadhead_cost: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length: Option<f64>,
    pub reward: f64,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub deadhead_only: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotRecord {
    pub depot: usize,
    pub capacity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightEntry {
    pub from: usize,
    pub to: usize,
    pub w: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CostModeRepr {
    Named(String),
    Speeds { service_speed: f64, deadhead_speed: f64 },
}

/// On-disk instance document. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub vertices: Vec<VertexRecord>,
    pub edges: Vec<EdgeRecord>,
    pub depots: Vec<usize>,
    pub robots: Vec<RobotRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<WeightEntry>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cost_mode: Option<CostModeRepr>,
}

impl InstanceFile {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| InstanceError::Parse(e.to_string()))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| InstanceError::Parse(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance documents always serialize")
    }

    /// Serializes an instance with every cost written explicitly; the cost
    /// mode is kept so speed-derived instances stay speed-derived.
    pub fn from_instance(inst: &Instance, weights: Option<Vec<WeightEntry>>) -> Self {
        let cost_mode = match inst.cost_mode {
            CostMode::Explicit => None,
            CostMode::FromSpeeds { service_speed, deadhead_speed } => {
                Some(CostModeRepr::Speeds { service_speed, deadhead_speed })
            }
        };
        Self {
            vertices: inst.vertices.iter().map(|v| VertexRecord { id: v.id, x: v.x, y: v.y }).collect(),
            edges: inst
                .edges
                .iter()
                .map(|e| EdgeRecord {
                    id: e.id,
                    tail: e.tail,
                    head: e.head,
                    service_cost: Some(e.service_cost),
                    deadhead_cost: Some(e.deadhead_cost),
                    length: Some(e.length),
                    reward: e.reward,
                    deadhead_only: e.deadhead_only,
                })
                .collect(),
            depots: inst.depots.clone(),
            robots: inst.robots.iter().map(|r| RobotRecord { depot: r.depot, capacity: r.capacity }).collect(),
            weights,
            cost_mode,
        }
    }
}

pub(super) fn to_instance(raw: &InstanceFile) -> Result<Instance> {
    let cost_mode = match &raw.cost_mode {
        None => CostMode::Explicit,
        Some(CostModeRepr::Named(name)) if name == "explicit" => CostMode::Explicit,
        Some(CostModeRepr::Named(name)) => return Err(InstanceError::UnknownCostMode(name.clone())),
        Some(CostModeRepr::Speeds { service_speed, deadhead_speed }) => {
            let (service_speed, deadhead_speed) = (*service_speed, *deadhead_speed);
            if !(service_speed > 0.0 && deadhead_speed > 0.0 && service_speed.is_finite() && deadhead_speed.is_finite()) {
                return Err(InstanceError::ZeroSpeed { service: service_speed, deadhead: deadhead_speed });
            }
            CostMode::FromSpeeds { service_speed, deadhead_speed }
        }
    };

    let mut vertices: Vec<Vertex> = raw.vertices.iter().map(|v| Vertex { id: v.id, x: v.x, y: v.y }).collect();
    vertices.sort_by_key(|v| v.id);
    for (i, v) in vertices.iter().enumerate() {
        if v.id != i {
            return Err(InstanceError::NonDenseIds(format!("vertex ids are not 0..{}", vertices.len())));
        }
    }

    let mut records: Vec<&EdgeRecord> = raw.edges.iter().collect();
    records.sort_by_key(|e| e.id);
    let n = vertices.len();
    let mut edges = Vec::with_capacity(records.len());
    for (i, rec) in records.iter().enumerate() {
        if rec.id != i {
            return Err(InstanceError::NonDenseIds(format!("edge ids are not 0..{}", records.len())));
        }
        if rec.tail >= n || rec.head >= n {
            return Err(InstanceError::BadReference(format!(
                "edge {} references vertex {} in a {n}-vertex graph",
                rec.id,
                rec.tail.max(rec.head)
            )));
        }
        let length = rec
            .length
            .unwrap_or_else(|| vertices[rec.tail].point().distance(vertices[rec.head].point()));
        let (service_cost, deadhead_cost) = match cost_mode {
            CostMode::Explicit => {
                let deadhead = rec.deadhead_cost.ok_or(InstanceError::MissingCost(rec.id))?;
                let service = match rec.service_cost {
                    Some(c) => c,
                    None if rec.deadhead_only => deadhead,
                    None => return Err(InstanceError::MissingCost(rec.id)),
                };
                (service, deadhead)
            }
            CostMode::FromSpeeds { service_speed, deadhead_speed } => (
                rec.service_cost.unwrap_or(length / service_speed),
                rec.deadhead_cost.unwrap_or(length / deadhead_speed),
            ),
        };
        edges.push(Edge {
            id: rec.id,
            tail: rec.tail,
            head: rec.head,
            service_cost,
            deadhead_cost,
            length,
            reward: rec.reward,
            deadhead_only: rec.deadhead_only,
        });
    }

    let mut depots = raw.depots.clone();
    depots.sort_unstable();
    depots.dedup();
    let robots = raw.robots.iter().map(|r| Robot { depot: r.depot, capacity: r.capacity }).collect();
    let inst = Instance { vertices, edges, depots, robots, cost_mode };
    inst.check()?;
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "vertices": [{"id": 0, "x": 0, "y": 0}, {"id": 1, "x": 3, "y": 4}],
        "edges": [{"id": 0, "tail": 0, "head": 1, "service_cost": 2, "deadhead_cost": 1, "reward": 1}],
        "depots": [0],
        "robots": [{"depot": 0, "capacity": 10}]
    }"#;

    #[test]
    fn parses_minimal_document() {
        let inst = to_instance(&InstanceFile::from_json(MINIMAL).unwrap()).unwrap();
        assert_eq!(inst.edge(0).length, 5.0);
        assert_eq!(inst.edge(0).service_cost, 2.0);
        assert_eq!(inst.cost_mode(), CostMode::Explicit);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("\"depots\"", "\"colour\": 3, \"depots\"");
        assert!(matches!(InstanceFile::from_json(&text), Err(InstanceError::Parse(_))));
        let text = MINIMAL.replace("\"reward\": 1", "\"reward\": 1, \"lanes\": 2");
        assert!(InstanceFile::from_json(&text).is_err());
    }

    #[test]
    fn speed_mode_derives_missing_costs() {
        let text = r#"{
            "vertices": [{"id": 0, "x": 0, "y": 0}, {"id": 1, "x": 1, "y": 0}],
            "edges": [{"id": 0, "tail": 0, "head": 1, "reward": 1}],
            "depots": [0],
            "robots": [{"depot": 0, "capacity": 10}],
            "cost_mode": {"service_speed": 3, "deadhead_speed": 5}
        }"#;
        let inst = to_instance(&InstanceFile::from_json(text).unwrap()).unwrap();
        assert_eq!(inst.edge(0).service_cost, 1.0 / 3.0);
        assert_eq!(inst.edge(0).deadhead_cost, 1.0 / 5.0);
    }

    #[test]
    fn explicit_mode_requires_costs() {
        let text = MINIMAL.replace("\"service_cost\": 2, \"deadhead_cost\": 1, ", "");
        let err = to_instance(&InstanceFile::from_json(&text).unwrap()).unwrap_err();
        assert_eq!(err, InstanceError::MissingCost(0));
        let text = MINIMAL.replace("\"depots\"", "\"cost_mode\": \"magic\", \"depots\"");
        let err = to_instance(&InstanceFile::from_json(&text).unwrap()).unwrap_err();
        assert!(matches!(err, InstanceError::UnknownCostMode(_)));
    }

    #[test]
    fn dangling_reference_in_file() {
        let text = MINIMAL.replace("\"tail\": 0", "\"tail\": 5");
        let err = to_instance(&InstanceFile::from_json(&text).unwrap()).unwrap_err();
        assert!(matches!(err, InstanceError::BadReference(_)));
    }

    #[test]
    fn serialize_then_validate_is_identity() {
        let inst = to_instance(&InstanceFile::from_json(MINIMAL).unwrap()).unwrap();
        let text = InstanceFile::from_instance(&inst, None).to_json();
        let again = to_instance(&InstanceFile::from_json(&text).unwrap()).unwrap();
        assert_eq!(inst, again);
    }
}
