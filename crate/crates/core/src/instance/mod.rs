//! Graph data model: vertices, service/deadhead edges, depots and robots.
//!
//! An [`Instance`] is an undirected connected multigraph. Every edge carries a
//! service cost (paid when the robot performs its task along the edge), a
//! deadhead cost (paid when merely travelling over it) and a reward. Point
//! features are self-loops; `deadhead_only` edges exist purely for travel.

mod distance;
mod file;

pub use distance::{DistanceTable, PathStep};
pub use file::{CostModeRepr, EdgeRecord, InstanceFile, RobotRecord, VertexRecord, WeightEntry};

use std::collections::HashSet;

use thiserror::Error;

use crate::geometry::{Point, Segment};

pub type VertexId = usize;
pub type EdgeId = usize;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum InstanceError {
    #[error("graph is not connected ({components} components)")]
    Disconnected { components: usize },
    #[error("bad reference: {0}")]
    BadReference(String),
    #[error("negative or non-finite value: {0}")]
    NegativeValue(String),
    #[error("speeds must be strictly positive (service {service}, deadhead {deadhead})")]
    ZeroSpeed { service: f64, deadhead: f64 },
    #[error("ids must be unique and dense: {0}")]
    NonDenseIds(String),
    #[error("edge {0} has no cost and the instance uses explicit costs")]
    MissingCost(EdgeId),
    #[error("deadhead-only edge {0} carries a reward")]
    RewardOnDeadheadOnly(EdgeId),
    #[error("instance has no robots")]
    NoRobots,
    #[error("unknown cost mode {0:?}")]
    UnknownCostMode(String),
    #[error("malformed instance file: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, InstanceError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Vertex {
    pub id: VertexId,
    pub x: f64,
    pub y: f64,
}

impl Vertex {
    pub fn point(&self) -> Point {
        Point::new(self.x, self.y)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub id: EdgeId,
    pub tail: VertexId,
    pub head: VertexId,
    pub service_cost: f64,
    pub deadhead_cost: f64,
    /// Geometric length; the Euclidean distance between the endpoints unless given.
    pub length: f64,
    pub reward: f64,
    pub deadhead_only: bool,
}

impl Edge {
    pub fn is_loop(&self) -> bool {
        self.tail == self.head
    }

    pub fn is_serviceable(&self) -> bool {
        !self.deadhead_only
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Robot {
    pub depot: VertexId,
    pub capacity: f64,
}

/// How edge costs were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum CostMode {
    #[default]
    Explicit,
    /// Costs missing from the file are `length / speed`.
    FromSpeeds { service_speed: f64, deadhead_speed: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    depots: Vec<VertexId>,
    robots: Vec<Robot>,
    cost_mode: CostMode,
}

impl Instance {
    /// Builds and validates an instance from in-memory parts.
    pub fn new(
        vertices: Vec<Vertex>,
        edges: Vec<Edge>,
        depots: Vec<VertexId>,
        robots: Vec<Robot>,
    ) -> Result<Self> {
        let inst = Self { vertices, edges, depots, robots, cost_mode: CostMode::Explicit };
        inst.check()?;
        Ok(inst)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id]
    }

    pub fn vertex(&self, id: VertexId) -> &Vertex {
        &self.vertices[id]
    }

    pub fn depots(&self) -> &[VertexId] {
        &self.depots
    }

    pub fn robots(&self) -> &[Robot] {
        &self.robots
    }

    pub fn cost_mode(&self) -> CostMode {
        self.cost_mode
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn service_edges(&self) -> impl Iterator<Item = &Edge> + '_ {
        self.edges.iter().filter(|e| e.is_serviceable())
    }

    pub fn num_service_edges(&self) -> usize {
        self.service_edges().count()
    }

    pub fn segment(&self, e: EdgeId) -> Segment {
        let edge = &self.edges[e];
        Segment::new(self.vertices[edge.tail].point(), self.vertices[edge.head].point())
    }

    pub fn total_reward(&self) -> f64 {
        self.edges.iter().map(|e| e.reward).sum()
    }

    /// Replaces the robot fleet; depots are re-derived from the robots.
    pub fn set_robots(&mut self, robots: Vec<Robot>) -> Result<()> {
        let mut depots: Vec<VertexId> = robots.iter().map(|r| r.depot).collect();
        depots.sort_unstable();
        depots.dedup();
        let old = (std::mem::replace(&mut self.robots, robots), std::mem::replace(&mut self.depots, depots));
        if let Err(err) = self.check() {
            (self.robots, self.depots) = old;
            return Err(err);
        }
        Ok(())
    }

    /// Re-costs every non-loop edge as `length / speed` and derives future
    /// costs from the same speeds.
    pub fn set_speeds(&mut self, service_speed: f64, deadhead_speed: f64) -> Result<()> {
        if !(service_speed > 0.0 && deadhead_speed > 0.0) || !service_speed.is_finite() || !deadhead_speed.is_finite() {
            return Err(InstanceError::ZeroSpeed { service: service_speed, deadhead: deadhead_speed });
        }
        for e in self.edges.iter_mut().filter(|e| !e.is_loop()) {
            e.service_cost = e.length / service_speed;
            e.deadhead_cost = e.length / deadhead_speed;
        }
        self.cost_mode = CostMode::FromSpeeds { service_speed, deadhead_speed };
        Ok(())
    }

    /// Adds a self-loop at `v` representing a point feature. Returns the new edge id.
    pub fn add_point_feature(&mut self, v: VertexId, service_cost: f64, reward: f64) -> Result<EdgeId> {
        if v >= self.vertices.len() {
            return Err(InstanceError::BadReference(format!("point feature at unknown vertex {v}")));
        }
        non_negative(service_cost, "point feature service cost")?;
        non_negative(reward, "point feature reward")?;
        let id = self.edges.len();
        self.edges.push(Edge {
            id,
            tail: v,
            head: v,
            service_cost,
            deadhead_cost: 0.0,
            length: 0.0,
            reward,
            deadhead_only: false,
        });
        Ok(id)
    }

    /// Adds a deadhead-only edge for every unordered vertex pair that is not
    /// already joined by an edge, costed at `euclidean / deadhead_speed`. When
    /// the instance derives its costs from geometry, the existing non-loop
    /// edges are re-costed with the new speeds. Returns the number of edges added.
    pub fn add_direct_deadhead_edges(&mut self, service_speed: f64, deadhead_speed: f64) -> Result<usize> {
        if !(service_speed > 0.0 && deadhead_speed > 0.0) || !service_speed.is_finite() || !deadhead_speed.is_finite() {
            return Err(InstanceError::ZeroSpeed { service: service_speed, deadhead: deadhead_speed });
        }
        if let CostMode::FromSpeeds { .. } = self.cost_mode {
            self.set_speeds(service_speed, deadhead_speed)?;
        }

        let n = self.vertices.len();
        let mut joined: HashSet<(VertexId, VertexId)> = HashSet::with_capacity(self.edges.len());
        for e in self.edges.iter().filter(|e| !e.is_loop()) {
            joined.insert((e.tail.min(e.head), e.tail.max(e.head)));
        }
        let before = self.edges.len();
        for u in 0..n {
            for v in (u + 1)..n {
                if joined.contains(&(u, v)) {
                    continue;
                }
                let length = self.vertices[u].point().distance(self.vertices[v].point());
                let id = self.edges.len();
                self.edges.push(Edge {
                    id,
                    tail: u,
                    head: v,
                    service_cost: length / service_speed,
                    deadhead_cost: length / deadhead_speed,
                    length,
                    reward: 0.0,
                    deadhead_only: true,
                });
            }
        }
        Ok(self.edges.len() - before)
    }

    fn check(&self) -> Result<()> {
        for (i, v) in self.vertices.iter().enumerate() {
            if v.id != i {
                return Err(InstanceError::NonDenseIds(format!("vertex at position {i} has id {}", v.id)));
            }
            if !v.x.is_finite() || !v.y.is_finite() {
                return Err(InstanceError::NegativeValue(format!("vertex {i} has non-finite coordinates")));
            }
        }
        let n = self.vertices.len();
        if n == 0 {
            return Err(InstanceError::BadReference("instance has no vertices".into()));
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.id != i {
                return Err(InstanceError::NonDenseIds(format!("edge at position {i} has id {}", e.id)));
            }
            if e.tail >= n || e.head >= n {
                return Err(InstanceError::BadReference(format!(
                    "edge {i} references vertex {} in a {n}-vertex graph",
                    e.tail.max(e.head)
                )));
            }
            non_negative(e.service_cost, &format!("edge {i} service cost"))?;
            non_negative(e.deadhead_cost, &format!("edge {i} deadhead cost"))?;
            non_negative(e.length, &format!("edge {i} length"))?;
            non_negative(e.reward, &format!("edge {i} reward"))?;
            if e.deadhead_only && e.reward != 0.0 {
                return Err(InstanceError::RewardOnDeadheadOnly(i));
            }
        }
        for &d in &self.depots {
            if d >= n {
                return Err(InstanceError::BadReference(format!("depot {d} is not a vertex")));
            }
        }
        if self.robots.is_empty() {
            return Err(InstanceError::NoRobots);
        }
        for (k, r) in self.robots.iter().enumerate() {
            if !self.depots.contains(&r.depot) {
                return Err(InstanceError::BadReference(format!("robot {k} uses unknown depot {}", r.depot)));
            }
            non_negative(r.capacity, &format!("robot {k} capacity"))?;
        }
        let components = self.count_components();
        if components != 1 {
            return Err(InstanceError::Disconnected { components });
        }
        Ok(())
    }

    fn count_components(&self) -> usize {
        let n = self.vertices.len();
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        let mut components = n;
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.tail), find(&mut parent, e.head));
            if a != b {
                parent[a] = b;
                components -= 1;
            }
        }
        components
    }
}

fn non_negative(x: f64, what: &str) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(InstanceError::NegativeValue(format!("{what} = {x}")))
    }
}

/// Converts a parsed instance description into a validated [`Instance`].
pub fn validate_instance(raw: &InstanceFile) -> Result<Instance> {
    file::to_instance(raw)
}

/// Builds an instance from coordinates and `(tail, head)` pairs with
/// geometry-derived unit-speed costs and length rewards. Handy for generators
/// and tests.
pub fn from_segments(
    points: &[(f64, f64)],
    pairs: &[(VertexId, VertexId)],
    depot: VertexId,
    capacity: f64,
) -> Result<Instance> {
    let vertices: Vec<Vertex> =
        points.iter().enumerate().map(|(id, &(x, y))| Vertex { id, x, y }).collect();
    let mut edges = Vec::with_capacity(pairs.len());
    for (id, &(tail, head)) in pairs.iter().enumerate() {
        let (Some(a), Some(b)) = (vertices.get(tail), vertices.get(head)) else {
            return Err(InstanceError::BadReference(format!("edge {id} references a missing vertex")));
        };
        let length = a.point().distance(b.point());
        edges.push(Edge {
            id,
            tail,
            head,
            service_cost: length,
            deadhead_cost: length,
            length,
            reward: length,
            deadhead_only: false,
        });
    }
    Instance::new(vertices, edges, vec![depot], vec![Robot { depot, capacity }])
}
