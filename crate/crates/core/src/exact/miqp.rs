use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use super::lp::{format_coef, ParsedModel};
use super::{ExactError, Result};
use crate::correlation::WeightModel;
use crate::instance::{DistanceTable, EdgeId, Instance, VertexId};
use crate::routing::{route_walk, Direction, Solution};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Binary,
    Integer,
    Continuous,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    pub lower: f64,
    pub upper: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintSense {
    Le,
    Eq,
    Ge,
}

impl ConstraintSense {
    pub fn symbol(self) -> &'static str {
        match self {
            Self::Le => "<=",
            Self::Eq => "=",
            Self::Ge => ">=",
        }
    }
}

/// Constraint families of the model, in file order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Family {
    /// Flow leaving the depot equals the number of serviced arcs.
    DepotFlow,
    /// Flow drops by one at the head of every serviced arc.
    FlowConservation,
    /// Flow on an arc is at most the number of serviced arcs.
    FlowCount,
    /// Flow only on traversed arcs.
    FlowSupport,
    /// In-degree equals out-degree at every vertex.
    Symmetry,
    /// Each edge is serviced at most once over all robots and directions.
    ServiceOnce,
    /// Observation level is bounded by the weighted serviced neighbors.
    ObservationBound,
    /// Route cost within the robot budget.
    Capacity,
    /// Linearization: observed-only indicator below the observation level.
    LinearObservation,
    /// Linearization: observed-only indicator excludes servicing.
    LinearService,
}

impl Family {
    pub const ALL: [Family; 10] = [
        Family::DepotFlow,
        Family::FlowConservation,
        Family::FlowCount,
        Family::FlowSupport,
        Family::Symmetry,
        Family::ServiceOnce,
        Family::ObservationBound,
        Family::Capacity,
        Family::LinearObservation,
        Family::LinearService,
    ];

    fn is_flow(self) -> bool {
        matches!(self, Family::DepotFlow | Family::FlowConservation | Family::FlowCount | Family::FlowSupport)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub family: Family,
    pub terms: Vec<(usize, f64)>,
    pub sense: ConstraintSense,
    pub rhs: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ExportOptions {
    /// Replace the bilinear objective terms with an auxiliary continuous
    /// variable per edge and two linear constraints.
    pub linearize: bool,
}

/// Variable and constraint counts of a model.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Census {
    pub service_vars: usize,
    pub deadhead_vars: usize,
    pub flow_vars: usize,
    pub observation_vars: usize,
    pub linear_vars: usize,
    pub constraints: BTreeMap<Family, usize>,
}

impl Census {
    pub fn total_vars(&self) -> usize {
        self.service_vars + self.deadhead_vars + self.flow_vars + self.observation_vars + self.linear_vars
    }

    pub fn total_constraints(&self) -> usize {
        self.constraints.values().sum()
    }
}

/// Counts implied by the formulation for a graph with `v` vertices, `e` edges
/// and `k` robots.
pub fn expected_census(v: usize, e: usize, k: usize, linearize: bool) -> Census {
    let arcs = 2 * e * k;
    let mut constraints = BTreeMap::new();
    constraints.insert(Family::DepotFlow, k);
    constraints.insert(Family::FlowConservation, k * v.saturating_sub(1));
    constraints.insert(Family::FlowCount, arcs);
    constraints.insert(Family::FlowSupport, arcs);
    constraints.insert(Family::Symmetry, k * v);
    constraints.insert(Family::ServiceOnce, e);
    constraints.insert(Family::ObservationBound, e);
    constraints.insert(Family::Capacity, k);
    if linearize {
        constraints.insert(Family::LinearObservation, e);
        constraints.insert(Family::LinearService, e);
    }
    Census {
        service_vars: arcs,
        deadhead_vars: arcs,
        flow_vars: arcs,
        observation_vars: e,
        linear_vars: if linearize { e } else { 0 },
        constraints,
    }
}

/// The route-planning problem as a mixed-integer program with a quadratic
/// objective (maximized).
#[derive(Debug, Clone, PartialEq)]
pub struct MiqpModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub linear_objective: Vec<(usize, f64)>,
    /// `(i, j, c)` contributes `c * x_i * x_j`.
    pub quadratic_objective: Vec<(usize, usize, f64)>,
    pub lambda: f64,
    pub linearized: bool,
    robots: usize,
    edges: usize,
}

fn dir_index(dir: Direction) -> usize {
    match dir {
        Direction::Forward => 0,
        Direction::Backward => 1,
    }
}

impl MiqpModel {
    fn arc_index(&self, k: usize, e: EdgeId, dir: usize) -> usize {
        (k * self.edges + e) * 2 + dir
    }

    pub fn service_var(&self, k: usize, e: EdgeId, dir: Direction) -> usize {
        self.arc_index(k, e, dir_index(dir))
    }

    pub fn deadhead_var(&self, k: usize, e: EdgeId, dir: Direction) -> usize {
        2 * self.edges * self.robots + self.arc_index(k, e, dir_index(dir))
    }

    pub fn flow_var(&self, k: usize, e: EdgeId, dir: Direction) -> usize {
        4 * self.edges * self.robots + self.arc_index(k, e, dir_index(dir))
    }

    pub fn observation_var(&self, e: EdgeId) -> usize {
        6 * self.edges * self.robots + e
    }

    pub fn linear_var(&self, e: EdgeId) -> Option<usize> {
        self.linearized.then(|| 6 * self.edges * self.robots + self.edges + e)
    }

    pub fn census(&self) -> Census {
        let block = 2 * self.edges * self.robots;
        let mut constraints = BTreeMap::new();
        for c in &self.constraints {
            *constraints.entry(c.family).or_insert(0) += 1;
        }
        Census {
            service_vars: block,
            deadhead_vars: block,
            flow_vars: block,
            observation_vars: self.edges,
            linear_vars: if self.linearized { self.edges } else { 0 },
            constraints,
        }
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        let lin: f64 = self.linear_objective.iter().map(|&(i, c)| c * values[i]).sum();
        let quad: f64 = self.quadratic_objective.iter().map(|&(i, j, c)| c * values[i] * values[j]).sum();
        lin + quad
    }

    /// Constraints not satisfied by `values` within `tol`, optionally ignoring
    /// the flow families.
    pub fn violated(&self, values: &[f64], tol: f64, include_flow: bool) -> Vec<&Constraint> {
        self.constraints
            .iter()
            .filter(|c| include_flow || !c.family.is_flow())
            .filter(|c| {
                let lhs: f64 = c.terms.iter().map(|&(i, a)| a * values[i]).sum();
                match c.sense {
                    ConstraintSense::Le => lhs > c.rhs + tol,
                    ConstraintSense::Ge => lhs < c.rhs - tol,
                    ConstraintSense::Eq => (lhs - c.rhs).abs() > tol,
                }
            })
            .collect()
    }

    pub fn named_values(&self, values: &[f64]) -> BTreeMap<String, f64> {
        self.variables.iter().zip(values).map(|(v, &x)| (v.name.clone(), x)).collect()
    }

    /// Variable values encoding a solution: service and deadhead traversal
    /// counts per arc, the load carried along each closed walk, and the
    /// clamped observation levels.
    pub fn assignment_from_solution(
        &self,
        inst: &Instance,
        dist: &DistanceTable,
        wm: &WeightModel,
        sol: &Solution,
    ) -> Vec<f64> {
        let mut x = vec![0.0; self.variables.len()];
        let mut serviced = vec![0.0; self.edges];
        for (k, route) in sol.routes().iter().enumerate().take(self.robots) {
            let walk = route_walk(inst, dist, route);
            let mut remaining = walk.iter().filter(|t| t.serviced).count() as f64;
            for t in &walk {
                let edge = inst.edge(t.edge);
                let dir = if edge.tail == t.from && edge.head == t.to { Direction::Forward } else { Direction::Backward };
                x[self.flow_var(k, t.edge, dir)] += remaining;
                if t.serviced {
                    x[self.service_var(k, t.edge, dir)] += 1.0;
                    serviced[t.edge] += 1.0;
                    remaining -= 1.0;
                } else {
                    x[self.deadhead_var(k, t.edge, dir)] += 1.0;
                }
            }
        }
        for e in 0..self.edges {
            let level: f64 = wm.neighbors(e).iter().map(|&(n, w)| w * serviced[n]).sum();
            let omega = level.min(1.0);
            x[self.observation_var(e)] = omega;
            if let Some(y) = self.linear_var(e) {
                x[y] = omega * (1.0 - serviced[e]).max(0.0);
            }
        }
        x
    }

    pub fn to_lp(&self) -> String {
        let mut out = String::new();
        out.push_str("\\ route planning with correlated observations\n");
        out.push_str(&format!("\\ lambda = {}\n", format_coef(self.lambda)));
        out.push_str("Maximize\n obj:");
        let mut line = Line::new(&mut out);
        for &(i, c) in &self.linear_objective {
            line.term(c, &self.variables[i].name);
        }
        if !self.quadratic_objective.is_empty() {
            line.raw("+ [");
            for &(i, j, c) in &self.quadratic_objective {
                line.term(2.0 * c, &format!("{} * {}", self.variables[i].name, self.variables[j].name));
            }
            line.raw("] / 2");
        }
        if self.linear_objective.is_empty() && self.quadratic_objective.is_empty() {
            line.term(0.0, &self.variables[0].name);
        }
        out.push_str("\nSubject To\n");
        for c in &self.constraints {
            out.push_str(&format!(" {}:", c.name));
            let mut line = Line::new(&mut out);
            if c.terms.is_empty() {
                line.term(0.0, &self.variables[0].name);
            }
            for &(i, a) in &c.terms {
                line.term(a, &self.variables[i].name);
            }
            line.raw(c.sense.symbol());
            line.raw(&format_coef(c.rhs));
            out.push('\n');
        }
        out.push_str("Bounds\n");
        for v in &self.variables {
            match (v.kind, v.upper) {
                (VarKind::Binary, Some(u)) if u == 1.0 && v.lower == 0.0 => {}
                (_, Some(u)) => out.push_str(&format!(" {} <= {} <= {}\n", format_coef(v.lower), v.name, format_coef(u))),
                (_, None) => out.push_str(&format!(" {} >= {}\n", v.name, format_coef(v.lower))),
            }
        }
        for (header, kind) in [("Binaries", VarKind::Binary), ("Generals", VarKind::Integer)] {
            out.push_str(header);
            out.push('\n');
            let names: Vec<&str> = self.variables.iter().filter(|v| v.kind == kind).map(|v| v.name.as_str()).collect();
            for chunk in names.chunks(8) {
                out.push(' ');
                out.push_str(&chunk.join(" "));
                out.push('\n');
            }
        }
        out.push_str("End\n");
        out
    }

    pub fn write_lp(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path.as_ref(), self.to_lp())
            .map_err(|e| ExactError::IoFailure(format!("{}: {e}", path.as_ref().display())))
    }

    /// Checks that a parsed file carries exactly this model at the written
    /// precision. Returns a description of the first mismatch.
    pub fn verify_parsed(&self, parsed: &ParsedModel) -> std::result::Result<(), String> {
        let written = |c: f64| format_coef(c).parse::<f64>().expect("formatted coefficient parses");
        let mut linear: BTreeMap<String, f64> = BTreeMap::new();
        for &(i, c) in &self.linear_objective {
            *linear.entry(self.variables[i].name.clone()).or_insert(0.0) += written(c);
        }
        linear.retain(|_, c| *c != 0.0);
        let mut parsed_linear = parsed.linear.clone();
        parsed_linear.retain(|_, c| *c != 0.0);
        if linear != parsed_linear {
            return Err("linear objective differs".into());
        }
        let quadratic: BTreeMap<(String, String), f64> = self
            .quadratic_objective
            .iter()
            .map(|&(i, j, c)| ((self.variables[i].name.clone(), self.variables[j].name.clone()), written(2.0 * c) / 2.0))
            .collect();
        if quadratic != parsed.quadratic {
            return Err("quadratic objective differs".into());
        }
        if self.constraints.len() != parsed.constraints.len() {
            return Err(format!("{} constraints written, {} parsed", self.constraints.len(), parsed.constraints.len()));
        }
        for (c, p) in self.constraints.iter().zip(&parsed.constraints) {
            let terms: BTreeMap<String, f64> =
                c.terms.iter().map(|&(i, a)| (self.variables[i].name.clone(), written(a))).collect();
            let mut got = p.terms.clone();
            got.retain(|_, a| *a != 0.0);
            if c.name != p.name || terms != got || c.sense != p.sense || written(c.rhs) != p.rhs {
                return Err(format!("constraint {} differs", c.name));
            }
        }
        for v in &self.variables {
            let kind_ok = match v.kind {
                VarKind::Binary => parsed.binaries.contains(&v.name),
                VarKind::Integer => parsed.generals.contains(&v.name),
                VarKind::Continuous => !parsed.binaries.contains(&v.name) && !parsed.generals.contains(&v.name),
            };
            if !kind_ok {
                return Err(format!("variable {} has the wrong type", v.name));
            }
            let (lo, hi) = parsed.bounds_of(&v.name);
            let hi = hi.or((v.kind == VarKind::Binary).then_some(1.0));
            if lo != written(v.lower) || hi != v.upper.map(written) {
                return Err(format!("variable {} has the wrong bounds", v.name));
            }
        }
        let declared = self.variables.len();
        if parsed.variable_names().len() != declared {
            return Err(format!("{declared} variables written, {} parsed", parsed.variable_names().len()));
        }
        Ok(())
    }
}

/// Writes `+ c name` terms, wrapping long rows.
struct Line<'a> {
    out: &'a mut String,
    width: usize,
}

impl<'a> Line<'a> {
    fn new(out: &'a mut String) -> Self {
        Self { out, width: 0 }
    }

    fn push(&mut self, piece: &str) {
        if self.width + piece.len() > 200 {
            self.out.push_str("\n   ");
            self.width = 3;
        }
        self.out.push(' ');
        self.out.push_str(piece);
        self.width += piece.len() + 1;
    }

    fn raw(&mut self, piece: &str) {
        self.push(piece);
    }

    fn term(&mut self, coef: f64, name: &str) {
        let sign = if coef < 0.0 { '-' } else { '+' };
        self.push(&format!("{sign} {} {name}", format_coef(coef.abs())));
    }
}

/// Distinguishes the two orientations of a self-loop, whose endpoints agree.
fn loop_tag(i: VertexId, j: VertexId, dir: usize) -> &'static str {
    if i == j && dir == 1 {
        "r"
    } else {
        ""
    }
}

struct Builder {
    vars: Vec<Variable>,
    rows: Vec<Constraint>,
}

impl Builder {
    fn row(&mut self, name: String, family: Family, terms: impl IntoIterator<Item = (usize, f64)>, sense: ConstraintSense, rhs: f64) {
        let mut merged: BTreeMap<usize, f64> = BTreeMap::new();
        for (i, a) in terms {
            *merged.entry(i).or_insert(0.0) += a;
        }
        let terms = merged.into_iter().filter(|&(_, a)| a != 0.0).collect();
        self.rows.push(Constraint { name, family, terms, sense, rhs });
    }
}

/// Builds the model for an instance and a weight model. The reward scale is
/// the largest robot budget over the smallest positive reward.
pub fn export_miqp(inst: &Instance, wm: &WeightModel, opts: ExportOptions) -> Result<MiqpModel> {
    let min_reward = inst.edges().iter().map(|e| e.reward).filter(|&r| r > 0.0).fold(f64::INFINITY, f64::min);
    if !min_reward.is_finite() {
        return Err(ExactError::NoPositiveReward);
    }
    let max_capacity = inst.robots().iter().map(|r| r.capacity).fold(0.0, f64::max);
    let lambda = max_capacity / min_reward;
    let m = inst.num_edges();
    let k_count = inst.robots().len();
    let big_m = m as f64;
    let mut model = MiqpModel {
        variables: Vec::new(),
        constraints: Vec::new(),
        linear_objective: Vec::new(),
        quadratic_objective: Vec::new(),
        lambda,
        linearized: opts.linearize,
        robots: k_count,
        edges: m,
    };

    let arc_ends = |e: EdgeId, dir: usize| -> (VertexId, VertexId) {
        let edge = inst.edge(e);
        if dir == 0 {
            (edge.tail, edge.head)
        } else {
            (edge.head, edge.tail)
        }
    };
    let mut vars = Vec::with_capacity(6 * m * k_count + 2 * m);
    for (prefix, kind) in [("s", VarKind::Binary), ("d", VarKind::Integer), ("z", VarKind::Integer)] {
        for k in 0..k_count {
            for e in 0..m {
                for dir in 0..2 {
                    let (i, j) = arc_ends(e, dir);
                    let upper = match kind {
                        VarKind::Binary => Some(if inst.edge(e).deadhead_only { 0.0 } else { 1.0 }),
                        _ => None,
                    };
                    vars.push(Variable { name: format!("{prefix}_{k}_{i}_{j}_{e}{}", loop_tag(i, j, dir)), kind, lower: 0.0, upper });
                }
            }
        }
    }
    for e in 0..m {
        vars.push(Variable { name: format!("w_{e}"), kind: VarKind::Continuous, lower: 0.0, upper: Some(1.0) });
    }
    if opts.linearize {
        for e in 0..m {
            vars.push(Variable { name: format!("y_{e}"), kind: VarKind::Continuous, lower: 0.0, upper: None });
        }
    }
    let mut b = Builder { vars, rows: Vec::new() };

    let s = |k, e, d| (k * m + e) * 2 + d;
    let dh = |k, e, d| 2 * m * k_count + (k * m + e) * 2 + d;
    let z = |k, e, d| 4 * m * k_count + (k * m + e) * 2 + d;
    let w = |e| 6 * m * k_count + e;
    let y = |e| 6 * m * k_count + m + e;

    let mut tails: HashMap<VertexId, Vec<(EdgeId, usize)>> = HashMap::new();
    let mut heads: HashMap<VertexId, Vec<(EdgeId, usize)>> = HashMap::new();
    for e in 0..m {
        for dir in 0..2 {
            let (i, j) = arc_ends(e, dir);
            tails.entry(i).or_default().push((e, dir));
            heads.entry(j).or_default().push((e, dir));
        }
    }
    let none = Vec::new();
    let all_service = |k: usize| (0..m).flat_map(move |e| (0..2).map(move |d| (s(k, e, d), -1.0)));

    for (k, robot) in inst.robots().iter().enumerate() {
        let depot = robot.depot;
        let out = tails.get(&depot).unwrap_or(&none).iter().map(|&(e, d)| (z(k, e, d), 1.0));
        b.row(format!("depot_{k}"), Family::DepotFlow, out.chain(all_service(k)), ConstraintSense::Eq, 0.0);
    }
    for k in 0..k_count {
        let depot = inst.robots()[k].depot;
        for v in (0..inst.num_vertices()).filter(|&v| v != depot) {
            let h = heads.get(&v).unwrap_or(&none);
            let t = tails.get(&v).unwrap_or(&none);
            let terms = h
                .iter()
                .map(|&(e, d)| (z(k, e, d), 1.0))
                .chain(t.iter().map(|&(e, d)| (z(k, e, d), -1.0)))
                .chain(h.iter().map(|&(e, d)| (s(k, e, d), -1.0)));
            b.row(format!("cons_{k}_{v}"), Family::FlowConservation, terms, ConstraintSense::Eq, 0.0);
        }
    }
    for k in 0..k_count {
        for e in 0..m {
            for d in 0..2 {
                let (i, j) = arc_ends(e, d);
                let terms = std::iter::once((z(k, e, d), 1.0)).chain(all_service(k));
                b.row(format!("flowcount_{k}_{i}_{j}_{e}{}", loop_tag(i, j, d)), Family::FlowCount, terms, ConstraintSense::Le, 0.0);
            }
        }
    }
    for k in 0..k_count {
        for e in 0..m {
            for d in 0..2 {
                let (i, j) = arc_ends(e, d);
                let terms = [(z(k, e, d), 1.0), (s(k, e, d), -big_m), (dh(k, e, d), -big_m)];
                b.row(format!("flowsupport_{k}_{i}_{j}_{e}{}", loop_tag(i, j, d)), Family::FlowSupport, terms, ConstraintSense::Le, 0.0);
            }
        }
    }
    for k in 0..k_count {
        for v in 0..inst.num_vertices() {
            let h = heads.get(&v).unwrap_or(&none);
            let t = tails.get(&v).unwrap_or(&none);
            let terms = h
                .iter()
                .flat_map(|&(e, d)| [(s(k, e, d), 1.0), (dh(k, e, d), 1.0)])
                .chain(t.iter().flat_map(|&(e, d)| [(s(k, e, d), -1.0), (dh(k, e, d), -1.0)]));
            b.row(format!("sym_{k}_{v}"), Family::Symmetry, terms, ConstraintSense::Eq, 0.0);
        }
    }
    let service_sum = |e: EdgeId, coef: f64| (0..k_count).flat_map(move |k| (0..2).map(move |d| (s(k, e, d), coef)));
    for e in 0..m {
        b.row(format!("once_{e}"), Family::ServiceOnce, service_sum(e, 1.0), ConstraintSense::Le, 1.0);
    }
    for e in 0..m {
        let terms = std::iter::once((w(e), 1.0)).chain(wm.neighbors(e).iter().flat_map(|&(n, wt)| service_sum(n, -wt)));
        b.row(format!("omega_{e}"), Family::ObservationBound, terms, ConstraintSense::Le, 0.0);
    }
    for (k, robot) in inst.robots().iter().enumerate() {
        let terms = (0..m).flat_map(|e| {
            let edge = inst.edge(e);
            (0..2).flat_map(move |d| [(s(k, e, d), edge.service_cost), (dh(k, e, d), edge.deadhead_cost)])
        });
        b.row(format!("cap_{k}"), Family::Capacity, terms, ConstraintSense::Le, robot.capacity);
    }
    if opts.linearize {
        for e in 0..m {
            b.row(format!("ylin_w_{e}"), Family::LinearObservation, [(y(e), 1.0), (w(e), -1.0)], ConstraintSense::Le, 0.0);
        }
        for e in 0..m {
            let terms = std::iter::once((y(e), 1.0)).chain(service_sum(e, 1.0));
            b.row(format!("ylin_s_{e}"), Family::LinearService, terms, ConstraintSense::Le, 1.0);
        }
    }

    let mut linear = Vec::new();
    let mut quadratic = Vec::new();
    for k in 0..k_count {
        for e in 0..m {
            let edge = inst.edge(e);
            for d in 0..2 {
                let c = lambda * edge.reward - edge.service_cost;
                if c != 0.0 {
                    linear.push((s(k, e, d), c));
                }
            }
        }
    }
    for k in 0..k_count {
        for e in 0..m {
            let c = inst.edge(e).deadhead_cost;
            for d in 0..2 {
                if c != 0.0 {
                    linear.push((dh(k, e, d), -c));
                }
            }
        }
    }
    for e in 0..m {
        let r = inst.edge(e).reward;
        if r == 0.0 {
            continue;
        }
        if opts.linearize {
            linear.push((y(e), lambda * r));
        } else {
            linear.push((w(e), lambda * r));
            for (i, _) in service_sum(e, 1.0) {
                quadratic.push((w(e), i, -lambda * r));
            }
        }
    }

    model.variables = b.vars;
    model.constraints = b.rows;
    model.linear_objective = linear;
    model.quadratic_objective = quadratic;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::parse_lp;
    use crate::instance::from_segments;
    use crate::routing::{initial_route, insert_edge};

    fn triangle() -> (Instance, WeightModel) {
        let inst = from_segments(&[(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)], &[(0, 1), (1, 2), (2, 0)], 0, 10.0).unwrap();
        let wm = WeightModel::from_entries(3, [(0, 1, 0.5), (2, 1, 0.25), (1, 0, 1.0)]).unwrap();
        (inst, wm)
    }

    #[test]
    fn census_matches_formula() {
        let (inst, wm) = triangle();
        for linearize in [false, true] {
            let model = export_miqp(&inst, &wm, ExportOptions { linearize }).unwrap();
            assert_eq!(model.census(), expected_census(3, 3, 1, linearize));
            assert_eq!(model.variables.len(), model.census().total_vars());
        }
    }

    #[test]
    fn lambda_uses_capacity_over_smallest_reward() {
        let (inst, wm) = triangle();
        let model = export_miqp(&inst, &wm, ExportOptions::default()).unwrap();
        assert!((model.lambda - 10.0).abs() < 1e-12);
    }

    #[test]
    fn zero_rewards_are_rejected() {
        let (inst, _) = triangle();
        let mut edges = inst.edges().to_vec();
        edges.iter_mut().for_each(|e| e.reward = 0.0);
        let inst = Instance::new(inst.vertices().to_vec(), edges, vec![0], inst.robots().to_vec()).unwrap();
        assert_eq!(export_miqp(&inst, &WeightModel::empty(3), ExportOptions::default()), Err(ExactError::NoPositiveReward));
    }

    #[test]
    fn lp_text_round_trips() {
        let (inst, wm) = triangle();
        for linearize in [false, true] {
            let model = export_miqp(&inst, &wm, ExportOptions { linearize }).unwrap();
            let parsed = parse_lp(&model.to_lp()).unwrap();
            model.verify_parsed(&parsed).unwrap();
        }
    }

    #[test]
    fn solution_substitution_reproduces_objective() {
        let (inst, wm) = triangle();
        let dist = DistanceTable::new(&inst);
        let r = initial_route(&inst, &dist, 0, 0).unwrap();
        let r = insert_edge(&inst, &dist, &r, 2).unwrap();
        let reward = crate::greedy::reward_of_serviced(&inst, &wm, &[true, false, true]);
        let sol = Solution::new(vec![r], reward);
        for linearize in [false, true] {
            let model = export_miqp(&inst, &wm, ExportOptions { linearize }).unwrap();
            let x = model.assignment_from_solution(&inst, &dist, &wm, &sol);
            let expected = model.lambda * reward - sol.total_cost();
            assert!((model.objective_value(&x) - expected).abs() < 1e-9);
            assert!(model.violated(&x, 1e-9, true).is_empty(), "{:?}", model.violated(&x, 1e-9, true));
            let parsed = parse_lp(&model.to_lp()).unwrap();
            let from_file = parsed.objective_value(&model.named_values(&x)).unwrap();
            assert!((from_file - expected).abs() < 1e-6);
        }
    }

    #[test]
    fn self_loops_and_deadhead_only_edges() {
        let (mut inst, _) = triangle();
        inst.add_point_feature(1, 0.5, 2.0).unwrap();
        inst.add_direct_deadhead_edges(1.0, 1.0).unwrap();
        let m = inst.num_edges();
        let model = export_miqp(&inst, &WeightModel::empty(m), ExportOptions::default()).unwrap();
        assert_eq!(model.census(), expected_census(inst.num_vertices(), m, 1, false));
        let parsed = parse_lp(&model.to_lp()).unwrap();
        model.verify_parsed(&parsed).unwrap();
    }
}
