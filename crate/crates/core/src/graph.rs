//! Weighted undirected graphs with dense vertex ids, all-pairs distances and
//! the directional cones `N(v,u)`.

use crate::vset::VertexSet;
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::fmt::Write as _;
use std::sync::OnceLock;
use thiserror::Error;

/// Dense vertex id in `0..n`.
pub type Vertex = usize;

/// Absolute tolerance for distance equality in the cone predicate.
///
/// Integer-weighted graphs never get near it; it only matters for real weights.
pub const DIST_TOL: f64 = 1e-9;

#[inline]
pub fn dist_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= DIST_TOL
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GraphError {
    #[error("edge list is empty")]
    Empty,
    #[error("graph is disconnected")]
    DisconnectedGraph,
    #[error("duplicate edge {0} -- {1}")]
    DuplicateEdge(String, String),
    #[error("invalid edge {u} -- {v} (weight {w}): {reason}")]
    InvalidEdge {
        u: String,
        v: String,
        w: f64,
        reason: &'static str,
    },
    #[error("vertex {u} is not adjacent to {v}")]
    NotAdjacent { v: Vertex, u: Vertex },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Immutable, validated graph.
///
/// Adjacency lists are sorted by neighbor id. `edges` keeps a definition order
/// whose first-appearance sequence reproduces the dense ids, which is what
/// makes [`Graph::to_edge_list`] round-trip exactly.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adj: Vec<Vec<(Vertex, f64)>>,
    labels: Vec<String>,
    edges: Vec<(Vertex, Vertex, f64)>,
}

impl Graph {
    /// Builds a graph from labelled edges; ids are assigned in first-appearance order.
    pub fn build<S: AsRef<str>>(edge_list: &[(S, S, f64)]) -> Result<Graph, GraphError> {
        if edge_list.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut ids: HashMap<String, Vertex> = HashMap::new();
        let mut labels = Vec::new();
        let mut intern = |s: &str| -> Vertex {
            if let Some(&id) = ids.get(s) {
                return id;
            }
            let id = labels.len();
            labels.push(s.to_string());
            ids.insert(s.to_string(), id);
            id
        };
        let mut edges = Vec::with_capacity(edge_list.len());
        for (a, b, w) in edge_list {
            let (a, b) = (a.as_ref(), b.as_ref());
            check_edge(a, b, *w)?;
            edges.push((intern(a), intern(b), *w));
        }
        Self::assemble(labels, edges)
    }

    /// Builds a graph on ids `0..n` directly; labels are the decimal ids.
    ///
    /// A single isolated vertex (`n == 1`, no edges) is accepted.
    pub fn from_indexed(n: usize, edge_list: &[(Vertex, Vertex, f64)]) -> Result<Graph, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let labels: Vec<String> = (0..n).map(|v| v.to_string()).collect();
        for &(a, b, w) in edge_list {
            if a >= n || b >= n {
                return Err(GraphError::InvalidEdge {
                    u: a.to_string(),
                    v: b.to_string(),
                    w,
                    reason: "vertex id out of range",
                });
            }
            check_edge(&labels[a], &labels[b], w)?;
        }
        let mut edges = edge_list.to_vec();
        // Reorder so that re-parsing the serialized list assigns the same ids:
        // sorting by (max, min) works whenever every vertex k > 0 has a
        // smaller-id neighbour.
        let canonical = (1..n).all(|k| edges.iter().any(|&(a, b, _)| a.max(b) == k && a.min(b) < k));
        if canonical {
            edges = edges
                .into_iter()
                .map(|(a, b, w)| (a.min(b), a.max(b), w))
                .collect();
            edges.sort_by_key(|&(a, b, _)| (b, a));
        }
        Self::assemble(labels, edges)
    }

    fn assemble(labels: Vec<String>, edges: Vec<(Vertex, Vertex, f64)>) -> Result<Graph, GraphError> {
        let n = labels.len();
        let mut adj: Vec<Vec<(Vertex, f64)>> = vec![Vec::new(); n];
        for &(a, b, w) in &edges {
            if adj[a].iter().any(|&(x, _)| x == b) {
                return Err(GraphError::DuplicateEdge(labels[a].clone(), labels[b].clone()));
            }
            adj[a].push((b, w));
            adj[b].push((a, w));
        }
        for list in adj.iter_mut() {
            list.sort_by_key(|&(x, _)| x);
        }
        let g = Graph { adj, labels, edges };
        if !g.is_connected() {
            return Err(GraphError::DisconnectedGraph);
        }
        Ok(g)
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Neighbours of `v` with edge weights, sorted by id.
    #[inline]
    pub fn neighbors(&self, v: Vertex) -> &[(Vertex, f64)] {
        &self.adj[v]
    }

    #[inline]
    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn weight(&self, v: Vertex, u: Vertex) -> Option<f64> {
        self.adj[v]
            .binary_search_by_key(&u, |&(x, _)| x)
            .ok()
            .map(|i| self.adj[v][i].1)
    }

    pub fn is_adjacent(&self, v: Vertex, u: Vertex) -> bool {
        self.weight(v, u).is_some()
    }

    pub fn label(&self, v: Vertex) -> &str {
        &self.labels[v]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn id_of(&self, label: &str) -> Option<Vertex> {
        self.labels.iter().position(|l| l == label)
    }

    /// Edges in definition order.
    pub fn edges(&self) -> &[(Vertex, Vertex, f64)] {
        &self.edges
    }

    pub fn is_unit_weight(&self) -> bool {
        self.edges.iter().all(|&(_, _, w)| w == 1.0)
    }

    pub fn is_tree(&self) -> bool {
        self.edges.len() + 1 == self.n()
    }

    fn is_connected(&self) -> bool {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = queue.pop_front() {
            for &(u, _) in &self.adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    count += 1;
                    queue.push_back(u);
                }
            }
        }
        count == n
    }

    /// Parses the edge-list text format: `<u> <v> [<w>]` per line, `#` comments.
    pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
        let mut edges: Vec<(String, String, f64)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            let w = match toks.len() {
                2 => 1.0,
                3 => toks[2].parse::<f64>().map_err(|e| GraphError::Parse {
                    line: i + 1,
                    msg: format!("bad weight {:?}: {e}", toks[2]),
                })?,
                k => {
                    return Err(GraphError::Parse {
                        line: i + 1,
                        msg: format!("expected 2 or 3 tokens, found {k}"),
                    })
                }
            };
            edges.push((toks[0].to_string(), toks[1].to_string(), w));
        }
        Self::build(&edges)
    }

    /// Serializes to the edge-list format, unit weights in shorthand.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# n={} m={}\n", self.n(), self.edge_count());
        for &(a, b, w) in &self.edges {
            if w == 1.0 {
                let _ = writeln!(out, "{} {}", self.labels[a], self.labels[b]);
            } else {
                let _ = writeln!(out, "{} {} {}", self.labels[a], self.labels[b], w);
            }
        }
        out
    }
}

fn check_edge(a: &str, b: &str, w: f64) -> Result<(), GraphError> {
    let bad = |reason| GraphError::InvalidEdge {
        u: a.to_string(),
        v: b.to_string(),
        w,
        reason,
    };
    if a == b {
        return Err(bad("self-loop"));
    }
    if !(w > 0.0) || !w.is_finite() {
        return Err(bad("weight must be positive and finite"));
    }
    Ok(())
}

/// Dense `n × n` shortest-path matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceTable {
    n: usize,
    d: Vec<f64>,
}

impl DistanceTable {
    /// Exact all-pairs distances: BFS on unit-weight graphs, Dijkstra otherwise.
    pub fn compute(g: &Graph) -> DistanceTable {
        let n = g.n();
        let mut d = vec![f64::INFINITY; n * n];
        if g.is_unit_weight() {
            let csr = Csr::new(g);
            let mut level = vec![u32::MAX; n];
            let mut queue = Vec::with_capacity(n);
            if n > 0 {
                csr.bfs_row(0, &mut d[..n], &mut level, &mut queue);
            }
            // Batches cost about `diameter · m / 64` word operations per source
            // against `m` random accesses for plain BFS.
            let ecc = d[..n].iter().copied().filter(|x| x.is_finite()).fold(0.0, f64::max);
            if 2.0 * ecc + 1.0 <= 128.0 {
                d.par_chunks_mut(64 * n).enumerate().for_each(|(b, block)| csr.bfs_batch(64 * b, block));
                return DistanceTable { n, d };
            }
            d.par_chunks_mut(n.max(1)).enumerate().for_each_init(
                || (vec![u32::MAX; n], Vec::with_capacity(n)),
                |(level, queue), (s, row)| csr.bfs_row(s, row, level, queue),
            );
        } else {
            d.par_chunks_mut(n.max(1)).enumerate().for_each(|(s, row)| dijkstra_row(g, s, row));
        }
        DistanceTable { n, d }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, v: Vertex, u: Vertex) -> f64 {
        self.d[v * self.n + u]
    }

    pub fn row(&self, v: Vertex) -> &[f64] {
        &self.d[v * self.n..(v + 1) * self.n]
    }

    pub fn max_distance(&self) -> f64 {
        self.d.iter().copied().fold(0.0, f64::max)
    }
}

/// Compressed adjacency for unit-weight BFS.
struct Csr {
    start: Vec<u32>,
    adj: Vec<u32>,
}

impl Csr {
    fn new(g: &Graph) -> Csr {
        let mut start = Vec::with_capacity(g.n() + 1);
        let mut adj = Vec::new();
        start.push(0);
        for v in 0..g.n() {
            adj.extend(g.neighbors(v).iter().map(|&(u, _)| u as u32));
            start.push(adj.len() as u32);
        }
        Csr { start, adj }
    }

    fn bfs_row(&self, s: Vertex, row: &mut [f64], level: &mut [u32], queue: &mut Vec<u32>) {
        level.fill(u32::MAX);
        queue.clear();
        level[s] = 0;
        queue.push(s as u32);
        let mut head = 0;
        while head < queue.len() {
            let v = queue[head] as usize;
            head += 1;
            let next = level[v] + 1;
            for &u in &self.adj[self.start[v] as usize..self.start[v + 1] as usize] {
                let slot = &mut level[u as usize];
                if *slot == u32::MAX {
                    *slot = next;
                    queue.push(u);
                }
            }
        }
        for (x, &l) in row.iter_mut().zip(level.iter()) {
            if l != u32::MAX {
                *x = f64::from(l);
            }
        }
    }

    /// Rows `base..base+64` (as far as they exist) of the distance table at
    /// once, with one bit per source in each vertex's frontier word.
    fn bfs_batch(&self, base: Vertex, block: &mut [f64]) {
        let n = self.start.len() - 1;
        let width = block.len() / n;
        let mut seen = vec![0u64; n];
        for i in 0..width {
            seen[base + i] |= 1 << i;
            block[i * n + base + i] = 0.0;
        }
        let mut next = seen.clone();
        let mut dist = 0.0;
        loop {
            dist += 1.0;
            let mut grew = false;
            for v in 0..n {
                let mut w = seen[v];
                for &u in &self.adj[self.start[v] as usize..self.start[v + 1] as usize] {
                    w |= seen[u as usize];
                }
                let mut fresh = w & !seen[v];
                next[v] = w;
                grew |= fresh != 0;
                while fresh != 0 {
                    let i = fresh.trailing_zeros() as usize;
                    fresh &= fresh - 1;
                    block[i * n + v] = dist;
                }
            }
            if !grew {
                return;
            }
            std::mem::swap(&mut seen, &mut next);
        }
    }
}

#[derive(PartialEq)]
struct HeapItem(f64, Vertex);

impl Eq for HeapItem {}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        other.0.total_cmp(&self.0).then_with(|| other.1.cmp(&self.1))
    }
}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn dijkstra_row(g: &Graph, s: Vertex, row: &mut [f64]) {
    row[s] = 0.0;
    let mut heap = BinaryHeap::from([HeapItem(0.0, s)]);
    while let Some(HeapItem(dv, v)) = heap.pop() {
        if dv > row[v] {
            continue;
        }
        for &(u, w) in g.neighbors(v) {
            let nd = dv + w;
            if nd < row[u] {
                row[u] = nd;
                heap.push(HeapItem(nd, u));
            }
        }
    }
}

/// A graph bundled with its distance table and a lazily-filled cone cache.
///
/// Shared immutably across concurrent searches; cones for a source vertex are
/// materialized on first use.
#[derive(Debug)]
pub struct IndexedGraph {
    graph: Graph,
    dist: DistanceTable,
    cones: Vec<OnceLock<Vec<VertexSet>>>,
}

impl IndexedGraph {
    pub fn new(graph: Graph) -> IndexedGraph {
        let dist = DistanceTable::compute(&graph);
        let cones = (0..graph.n()).map(|_| OnceLock::new()).collect();
        IndexedGraph { graph, dist, cones }
    }

    #[inline]
    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    #[inline]
    pub fn dist(&self) -> &DistanceTable {
        &self.dist
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.graph.n()
    }

    /// Cones of `v`, aligned with `graph().neighbors(v)`.
    pub fn cones_of(&self, v: Vertex) -> &[VertexSet] {
        self.cones[v].get_or_init(|| {
            let n = self.n();
            let dv = self.dist.row(v);
            self.graph
                .neighbors(v)
                .iter()
                .map(|&(u, w)| {
                    let du = self.dist.row(u);
                    let mut words = vec![0u64; n.div_ceil(64)];
                    for (i, (a, b)) in dv.chunks(64).zip(du.chunks(64)).enumerate() {
                        words[i] = a
                            .iter()
                            .zip(b)
                            .enumerate()
                            .fold(0u64, |acc, (j, (&x, &y))| acc | (u64::from(dist_eq(x, w + y)) << j));
                    }
                    VertexSet::from_words(n, words)
                })
                .collect()
        })
    }

    /// `N(v,u) = {x : d(v,x) = w(vu) + d(u,x)}`.
    pub fn cone(&self, v: Vertex, u: Vertex) -> Result<&VertexSet, GraphError> {
        let idx = self
            .graph
            .neighbors(v)
            .binary_search_by_key(&u, |&(x, _)| x)
            .map_err(|_| GraphError::NotAdjacent { v, u })?;
        Ok(&self.cones_of(v)[idx])
    }

    /// `x ∈ N(v,u)` straight from the distance table; `u` must be adjacent.
    #[inline]
    pub fn in_cone(&self, v: Vertex, u: Vertex, w_vu: f64, x: Vertex) -> bool {
        dist_eq(self.dist.get(v, x), w_vu + self.dist.get(u, x))
    }

    /// `E_t(v)`: neighbours of `v` whose edge starts a shortest path to `t`.
    pub fn target_edges(&self, v: Vertex, t: Vertex) -> Vec<Vertex> {
        self.graph
            .neighbors(v)
            .iter()
            .filter(|&&(u, w)| self.in_cone(v, u, w, t))
            .map(|&(u, _)| u)
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn abc() -> Graph {
        Graph::build(&[("a", "b", 1.0), ("b", "c", 1.0)]).unwrap()
    }

    #[test]
    fn build_path_assigns_first_appearance_ids() {
        let g = abc();
        assert_eq!(g.n(), 3);
        assert_eq!(g.id_of("a"), Some(0));
        assert_eq!(g.id_of("c"), Some(2));
        let dt = DistanceTable::compute(&g);
        assert_eq!(dt.get(0, 2), 2.0);
    }

    #[test]
    fn rejects_duplicates_disconnection_and_bad_edges() {
        assert!(matches!(
            Graph::build(&[("a", "b", 1.0), ("a", "b", 2.0)]),
            Err(GraphError::DuplicateEdge(..))
        ));
        assert!(matches!(
            Graph::build(&[("a", "b", 1.0), ("b", "a", 1.0)]),
            Err(GraphError::DuplicateEdge(..))
        ));
        assert_eq!(
            Graph::build(&[("a", "b", 1.0), ("c", "d", 1.0)]),
            Err(GraphError::DisconnectedGraph)
        );
        assert!(matches!(
            Graph::build(&[("a", "a", 1.0)]),
            Err(GraphError::InvalidEdge { reason: "self-loop", .. })
        ));
        assert!(matches!(Graph::build(&[("a", "b", 0.0)]), Err(GraphError::InvalidEdge { .. })));
        assert!(matches!(Graph::build(&[("a", "b", -2.0)]), Err(GraphError::InvalidEdge { .. })));
        assert_eq!(Graph::build::<&str>(&[]), Err(GraphError::Empty));
    }

    #[test]
    fn weighted_triangle_takes_the_two_hop_route() {
        let g = Graph::build(&[("a", "b", 1.0), ("b", "c", 1.0), ("a", "c", 3.0)]).unwrap();
        let dt = DistanceTable::compute(&g);
        assert_eq!(dt.get(0, 2), 2.0);
        let ig = IndexedGraph::new(g);
        // The direct a-c edge is not on any shortest path to c.
        assert_eq!(ig.target_edges(0, 2), vec![1]);
    }

    #[test]
    fn four_cycle_cones_and_antipodes() {
        let g = Graph::from_indexed(4, &[(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0), (3, 0, 1.0)]).unwrap();
        let ig = IndexedGraph::new(g);
        for v in 0..4 {
            assert_eq!(ig.dist().get(v, (v + 2) % 4), 2.0);
        }
        assert_eq!(ig.cone(0, 1).unwrap().iter().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(ig.target_edges(0, 2), vec![1, 3]);
        assert_eq!(ig.cone(0, 2), Err(GraphError::NotAdjacent { v: 0, u: 2 }));
    }

    #[test]
    fn path_cones_and_target_edges() {
        let ig = IndexedGraph::new(abc());
        assert_eq!(ig.cone(1, 2).unwrap().iter().collect::<Vec<_>>(), vec![2]);
        assert_eq!(ig.cone(0, 1).unwrap().iter().collect::<Vec<_>>(), vec![1, 2]);
        assert_eq!(ig.target_edges(0, 2), vec![1]);
        assert!(ig.target_edges(1, 1).is_empty());
    }

    #[test]
    fn parse_handles_comments_and_shorthand() {
        let g = Graph::parse_edge_list("# header\nx y 2.5\ny z # unit\n\n").unwrap();
        assert_eq!(g.n(), 3);
        assert_eq!(g.weight(0, 1), Some(2.5));
        assert_eq!(g.weight(1, 2), Some(1.0));
        assert!(matches!(
            Graph::parse_edge_list("a b c d"),
            Err(GraphError::Parse { line: 1, .. })
        ));
        assert!(matches!(Graph::parse_edge_list("a b zz"), Err(GraphError::Parse { .. })));
    }

    #[test]
    fn edge_list_round_trip_keeps_ids() {
        let g = Graph::from_indexed(5, &[(3, 4, 2.0), (0, 1, 1.0), (1, 2, 1.5), (2, 3, 1.0)]).unwrap();
        let back = Graph::parse_edge_list(&g.to_edge_list()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn singleton_graph() {
        let g = Graph::from_indexed(1, &[]).unwrap();
        let ig = IndexedGraph::new(g);
        assert_eq!(ig.dist().get(0, 0), 0.0);
        assert!(ig.cones_of(0).is_empty());
    }
}
