//! Shortest deadhead distances.
//!
//! Rows are single-source Dijkstra runs over deadhead costs, filled on first
//! use and cached behind a `OnceLock`, so a shared table can be read from many
//! solver threads at once. Self-loops never shorten a path and are skipped.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::sync::OnceLock;

use rayon::prelude::*;

use super::{EdgeId, Instance, VertexId};

const NONE: usize = usize::MAX;

/// One deadhead traversal on a shortest path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PathStep {
    pub edge: EdgeId,
    pub from: VertexId,
    pub to: VertexId,
}

struct Row {
    dist: Vec<f64>,
    pred_vertex: Vec<VertexId>,
    pred_edge: Vec<EdgeId>,
}

pub struct DistanceTable {
    adjacency: Vec<Vec<(VertexId, f64, EdgeId)>>,
    rows: Vec<OnceLock<Row>>,
}

#[derive(PartialEq)]
struct Item(f64, VertexId);

impl Eq for Item {}

impl Ord for Item {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for Item {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl DistanceTable {
    /// Creates an empty table; rows are computed on demand.
    pub fn new(inst: &Instance) -> Self {
        let n = inst.num_vertices();
        let mut adjacency = vec![Vec::new(); n];
        for e in inst.edges().iter().filter(|e| !e.is_loop()) {
            adjacency[e.tail].push((e.head, e.deadhead_cost, e.id));
            adjacency[e.head].push((e.tail, e.deadhead_cost, e.id));
        }
        Self { adjacency, rows: (0..n).map(|_| OnceLock::new()).collect() }
    }

    /// Creates a table with every row filled, in parallel.
    pub fn precomputed(inst: &Instance) -> Self {
        let table = Self::new(inst);
        table.precompute_all();
        table
    }

    pub fn precompute_all(&self) {
        (0..self.rows.len()).into_par_iter().for_each(|u| {
            self.row(u);
        });
    }

    /// Makes sure the rows for `sources` exist.
    pub fn precompute(&self, sources: &[VertexId]) {
        sources.par_iter().for_each(|&u| {
            self.row(u);
        });
    }

    pub fn num_vertices(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn dist(&self, u: VertexId, v: VertexId) -> f64 {
        if u == v {
            return 0.0;
        }
        // the graph is undirected, so either cached row answers the query
        if let Some(row) = self.rows[u].get() {
            return row.dist[v];
        }
        if let Some(row) = self.rows[v].get() {
            return row.dist[u];
        }
        self.row(u).dist[v]
    }

    /// Edge-level shortest path from `u` to `v`; empty when `u == v`.
    pub fn path(&self, u: VertexId, v: VertexId) -> Vec<PathStep> {
        if u == v {
            return Vec::new();
        }
        let row = self.row(u);
        let mut steps = Vec::new();
        let mut cur = v;
        while cur != u {
            let prev = row.pred_vertex[cur];
            debug_assert_ne!(prev, NONE, "unreachable vertex in a connected graph");
            steps.push(PathStep { edge: row.pred_edge[cur], from: prev, to: cur });
            cur = prev;
        }
        steps.reverse();
        steps
    }

    /// Vertex sequence of the shortest path, both endpoints included.
    pub fn vertex_path(&self, u: VertexId, v: VertexId) -> Vec<VertexId> {
        let mut out = vec![u];
        out.extend(self.path(u, v).iter().map(|s| s.to));
        out
    }

    fn row(&self, source: VertexId) -> &Row {
        self.rows[source].get_or_init(|| self.dijkstra(source))
    }

    fn dijkstra(&self, source: VertexId) -> Row {
        let n = self.adjacency.len();
        let mut dist = vec![f64::INFINITY; n];
        let mut pred_vertex = vec![NONE; n];
        let mut pred_edge = vec![NONE; n];
        let mut done = vec![false; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Item(0.0, source));
        while let Some(Item(d, u)) = heap.pop() {
            if done[u] {
                continue;
            }
            done[u] = true;
            for &(v, w, e) in &self.adjacency[u] {
                let nd = d + w;
                if nd < dist[v] {
                    dist[v] = nd;
                    pred_vertex[v] = u;
                    pred_edge[v] = e;
                    heap.push(Item(nd, v));
                }
            }
        }
        Row { dist, pred_vertex, pred_edge }
    }
}

impl std::fmt::Debug for DistanceTable {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let cached = self.rows.iter().filter(|r| r.get().is_some()).count();
        f.debug_struct("DistanceTable").field("vertices", &self.rows.len()).field("cached_rows", &cached).finish()
    }
}
