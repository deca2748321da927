use std::fmt::Write;

use serde::{Deserialize, Serialize};

use crate::geometry::Point;
use crate::instance::{DistanceTable, Instance};
use crate::routing::Solution;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RenderSpec {
    pub width: f64,
    pub height: f64,
    pub margin: f64,
    pub underlay_color: String,
    pub underlay_width: f64,
    pub service_width: f64,
    pub deadhead_width: f64,
    pub dash: String,
    pub depot_size: f64,
    /// Per-robot stroke colors, cycled.
    pub palette: Vec<String>,
}

impl Default for RenderSpec {
    fn default() -> Self {
        Self {
            width: 800.0,
            height: 800.0,
            margin: 20.0,
            underlay_color: "#c8c8c8".into(),
            underlay_width: 1.0,
            service_width: 3.0,
            deadhead_width: 1.5,
            dash: "6 4".into(),
            depot_size: 10.0,
            palette: ["#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"].map(String::from).to_vec(),
        }
    }
}

struct View {
    min: Point,
    scale: f64,
    height: f64,
    margin: f64,
}

impl View {
    fn new(inst: &Instance, spec: &RenderSpec) -> Self {
        let (mut lo, mut hi) = (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
        for v in inst.vertices() {
            lo = Point::new(lo.x.min(v.x), lo.y.min(v.y));
            hi = Point::new(hi.x.max(v.x), hi.y.max(v.y));
        }
        let span = (hi.x - lo.x).max(hi.y - lo.y);
        let inner = (spec.width.min(spec.height) - 2.0 * spec.margin).max(1.0);
        let scale = if span > 0.0 { inner / span } else { 1.0 };
        Self { min: lo, scale, height: spec.height, margin: spec.margin }
    }

    fn map(&self, p: Point) -> (f64, f64) {
        let x = self.margin + (p.x - self.min.x) * self.scale;
        let y = self.height - self.margin - (p.y - self.min.y) * self.scale;
        (x, y)
    }

    fn points(&self, pts: impl IntoIterator<Item = Point>) -> String {
        pts.into_iter()
            .map(|p| {
                let (x, y) = self.map(p);
                format!("{x:.2},{y:.2}")
            })
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// SVG picture of a solution: gray underlay of the serviceable network,
/// solid per-robot strokes for serviced arcs, dashed strokes for the
/// deadhead connectors, and a square at each depot.
pub fn render_svg(inst: &Instance, dist: &DistanceTable, sol: &Solution, spec: &RenderSpec) -> String {
    let view = View::new(inst, spec);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{:.2}" height="{:.2}" viewBox="0 0 {:.2} {:.2}">"#,
        spec.width, spec.height, spec.width, spec.height
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<g stroke="{}" stroke-width="{:.2}" fill="none">"#, spec.underlay_color, spec.underlay_width);
    for e in inst.edges().iter().filter(|e| !e.deadhead_only) {
        let (x1, y1) = view.map(inst.vertex(e.tail).point());
        let (x2, y2) = view.map(inst.vertex(e.head).point());
        let _ = writeln!(svg, r#"<line x1="{x1:.2}" y1="{y1:.2}" x2="{x2:.2}" y2="{y2:.2}"/>"#);
    }
    svg.push_str("</g>\n");

    for (k, route) in sol.routes().iter().enumerate() {
        if route.is_empty() {
            continue;
        }
        let color = spec.palette.get(k % spec.palette.len().max(1)).map_or("black", String::as_str);
        let _ = writeln!(svg, r#"<g stroke="{color}" fill="none" stroke-linecap="round">"#);
        for path in route.connectors(inst, dist).iter().filter(|p| p.len() >= 2) {
            let pts = view.points(path.iter().map(|&v| inst.vertex(v).point()));
            let _ = writeln!(
                svg,
                r#"<polyline points="{pts}" stroke-width="{:.2}" stroke-dasharray="{}"/>"#,
                spec.deadhead_width, spec.dash
            );
        }
        for arc in route.arcs() {
            let pts = view.points([inst.vertex(arc.start(inst)).point(), inst.vertex(arc.end(inst)).point()]);
            let _ = writeln!(svg, r#"<polyline points="{pts}" stroke-width="{:.2}"/>"#, spec.service_width);
        }
        svg.push_str("</g>\n");
    }

    let mut depots: Vec<_> = inst.robots().iter().map(|r| r.depot).collect();
    depots.sort_unstable();
    depots.dedup();
    for d in depots {
        let (x, y) = view.map(inst.vertex(d).point());
        let h = spec.depot_size / 2.0;
        let _ = writeln!(
            svg,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="black"/>"#,
            x - h,
            y - h,
            spec.depot_size,
            spec.depot_size
        );
    }
    svg.push_str("</svg>\n");
    svg
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::from_segments;
    use crate::routing::initial_route;

    fn path() -> (Instance, DistanceTable) {
        let inst = from_segments(&[(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)], &[(0, 1), (1, 2)], 0, 10.0).unwrap();
        let dist = DistanceTable::new(&inst);
        (inst, dist)
    }

    #[test]
    fn empty_solution_draws_only_the_underlay_and_depot() {
        let (inst, dist) = path();
        let svg = render_svg(&inst, &dist, &Solution::empty(&inst), &RenderSpec::default());
        assert_eq!(svg.matches("<line").count(), 2);
        assert_eq!(svg.matches("<polyline").count(), 0);
    }

    #[test]
    fn single_edge_route_structure() {
        let (inst, dist) = path();
        let route = initial_route(&inst, &dist, 0, 0).unwrap();
        let sol = Solution::new(vec![route], 1.0);
        let svg = render_svg(&inst, &dist, &sol, &RenderSpec::default());
        assert_eq!(svg.matches("stroke-dasharray").count(), 1);
        assert_eq!(svg.matches("<polyline").count(), 2);
        // background plus one depot marker
        assert_eq!(svg.matches("<rect").count(), 2);
        assert_eq!(svg, render_svg(&inst, &dist, &sol, &RenderSpec::default()));
    }
}
