//! Instance generators.

use super::HarnessError;
use crate::adversaries::{grid_diag_graph, star_paths_graph};
use crate::graph::{Graph, Vertex};
use crate::rng::stream;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    Path,
    Cycle,
    Clique,
    GridDiag,
    StarPaths,
    RandomTree,
    RandomConnected,
    /// Random connected graph with maximum degree capped.
    RandomBounded,
}

impl GraphKind {
    pub const ALL: [GraphKind; 8] = [
        GraphKind::Path,
        GraphKind::Cycle,
        GraphKind::Clique,
        GraphKind::GridDiag,
        GraphKind::StarPaths,
        GraphKind::RandomTree,
        GraphKind::RandomConnected,
        GraphKind::RandomBounded,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GraphKind::Path => "path",
            GraphKind::Cycle => "cycle",
            GraphKind::Clique => "clique",
            GraphKind::GridDiag => "grid-diag",
            GraphKind::StarPaths => "star-paths",
            GraphKind::RandomTree => "random-tree",
            GraphKind::RandomConnected => "random-connected",
            GraphKind::RandomBounded => "random-bounded",
        }
    }

    pub fn is_random(self) -> bool {
        matches!(self, GraphKind::RandomTree | GraphKind::RandomConnected | GraphKind::RandomBounded)
    }
}

/// Generator name plus parameters. `weighted` draws integer weights in
/// `1..=max_weight`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub kind: GraphKind,
    pub n: usize,
    pub weighted: bool,
    /// Extra edges on top of the spanning tree; defaults to `n`.
    pub extra_edges: Option<usize>,
    /// Degree cap for `random-bounded`; defaults to 8.
    pub max_degree: Option<usize>,
    pub max_weight: u32,
}

impl GeneratorSpec {
    pub fn new(kind: GraphKind, n: usize) -> Self {
        GeneratorSpec {
            kind,
            n,
            weighted: false,
            extra_edges: None,
            max_degree: None,
            max_weight: 9,
        }
    }

    pub fn weighted(mut self) -> Self {
        self.weighted = true;
        self
    }

    pub fn with_extra_edges(mut self, m: usize) -> Self {
        self.extra_edges = Some(m);
        self
    }

    pub fn with_max_degree(mut self, d: usize) -> Self {
        self.max_degree = Some(d);
        self
    }

    /// Whether two seeds can give different graphs.
    pub fn is_random(&self) -> bool {
        self.kind.is_random() || self.weighted
    }

    /// Name as accepted by `--kind`, e.g. `weighted-cycle`.
    pub fn name(&self) -> String {
        if self.weighted {
            format!("weighted-{}", self.kind.name())
        } else {
            self.kind.name().to_string()
        }
    }
}

impl fmt::Display for GraphKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GraphKind {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        GraphKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| HarnessError::UnknownName { what: "graph kind", name: s.to_string() })
    }
}

/// Parses `kind` or `weighted-kind`.
pub fn parse_kind(s: &str) -> Result<(GraphKind, bool), HarnessError> {
    match s.strip_prefix("weighted-") {
        Some(rest) => Ok((rest.parse()?, true)),
        None => Ok((s.parse()?, false)),
    }
}

fn invalid(spec: &GeneratorSpec, msg: &str) -> HarnessError {
    HarnessError::InvalidGenerator(format!("{} with n={}: {msg}", spec.name(), spec.n))
}

pub fn generate(spec: &GeneratorSpec, seed: u64) -> Result<Graph, HarnessError> {
    let n = spec.n;
    let mut rng = stream(seed, 0);
    let need = |min: usize| if n < min { Err(invalid(spec, &format!("needs n ≥ {min}"))) } else { Ok(()) };
    let edges: Vec<(Vertex, Vertex)> = match spec.kind {
        GraphKind::Path => {
            need(2)?;
            (0..n - 1).map(|i| (i, i + 1)).collect()
        }
        GraphKind::Cycle => {
            need(3)?;
            (0..n).map(|i| (i, (i + 1) % n)).collect()
        }
        GraphKind::Clique => {
            need(2)?;
            (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect()
        }
        GraphKind::GridDiag => unit_edges(&grid_diag_graph(n).map_err(|e| invalid(spec, &e.to_string()))?),
        GraphKind::StarPaths => unit_edges(&star_paths_graph(n).map_err(|e| invalid(spec, &e.to_string()))?),
        GraphKind::RandomTree => {
            need(2)?;
            bfs_relabel(n, &prufer_tree(n, &mut rng))
        }
        GraphKind::RandomConnected => {
            need(2)?;
            let tree = bfs_relabel(n, &prufer_tree(n, &mut rng));
            let extra = spec.extra_edges.unwrap_or(n);
            add_extra_edges(n, tree, extra, usize::MAX, &mut rng)
        }
        GraphKind::RandomBounded => {
            need(2)?;
            let cap = spec.max_degree.unwrap_or(8);
            if cap < 2 {
                return Err(invalid(spec, "degree cap must be at least 2"));
            }
            let tree = bounded_tree(n, cap, &mut rng);
            let extra = spec.extra_edges.unwrap_or(n);
            add_extra_edges(n, tree, extra, cap, &mut rng)
        }
    };
    let vertices = match spec.kind {
        GraphKind::StarPaths => n + 1,
        _ => n,
    };
    let weighted: Vec<(Vertex, Vertex, f64)> = edges
        .into_iter()
        .map(|(a, b)| {
            let w = if spec.weighted { rng.gen_range(1..=spec.max_weight.max(1)) as f64 } else { 1.0 };
            (a, b, w)
        })
        .collect();
    Graph::from_indexed(vertices, &weighted).map_err(HarnessError::from)
}

fn unit_edges(g: &Graph) -> Vec<(Vertex, Vertex)> {
    g.edges().iter().map(|&(a, b, _)| (a, b)).collect()
}

/// Uniform labelled tree from a random Prüfer sequence.
fn prufer_tree(n: usize, rng: &mut ChaCha8Rng) -> Vec<(Vertex, Vertex)> {
    if n == 2 {
        return vec![(0, 1)];
    }
    let seq: Vec<Vertex> = (0..n - 2).map(|_| rng.gen_range(0..n)).collect();
    let mut degree = vec![1usize; n];
    for &x in &seq {
        degree[x] += 1;
    }
    let mut leaves: std::collections::BinaryHeap<std::cmp::Reverse<Vertex>> =
        (0..n).filter(|&x| degree[x] == 1).map(std::cmp::Reverse).collect();
    let mut edges = Vec::with_capacity(n - 1);
    for &x in &seq {
        let std::cmp::Reverse(leaf) = leaves.pop().expect("a leaf always exists");
        edges.push((leaf, x));
        degree[x] -= 1;
        if degree[x] == 1 {
            leaves.push(std::cmp::Reverse(x));
        }
    }
    let a = leaves.pop().expect("two leaves remain").0;
    let b = leaves.pop().expect("two leaves remain").0;
    edges.push((a, b));
    edges
}

/// Relabels a tree in BFS order from vertex 0.
fn bfs_relabel(n: usize, edges: &[(Vertex, Vertex)]) -> Vec<(Vertex, Vertex)> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    let mut label = vec![usize::MAX; n];
    let mut queue = VecDeque::from([0]);
    label[0] = 0;
    let mut next = 1;
    while let Some(v) = queue.pop_front() {
        for &u in &adj[v] {
            if label[u] == usize::MAX {
                label[u] = next;
                next += 1;
                queue.push_back(u);
            }
        }
    }
    edges.iter().map(|&(a, b)| (label[a], label[b])).collect()
}

/// Random recursive tree where each new vertex attaches to a uniform vertex
/// with spare degree.
fn bounded_tree(n: usize, cap: usize, rng: &mut ChaCha8Rng) -> Vec<(Vertex, Vertex)> {
    let mut degree = vec![0usize; n];
    let mut open: Vec<Vertex> = vec![0];
    let mut edges = Vec::with_capacity(n - 1);
    for v in 1..n {
        let i = rng.gen_range(0..open.len());
        let p = open[i];
        edges.push((p, v));
        degree[p] += 1;
        degree[v] += 1;
        if degree[p] == cap {
            open.swap_remove(i);
        }
        open.push(v);
    }
    edges
}

/// Adds up to `extra` uniform non-duplicate edges with both endpoints below
/// the degree cap; stops early once attempts run out.
fn add_extra_edges(
    n: usize,
    mut edges: Vec<(Vertex, Vertex)>,
    extra: usize,
    cap: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(Vertex, Vertex)> {
    let mut present: HashSet<(Vertex, Vertex)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
    let max_edges = n * (n - 1) / 2;
    let mut degree = vec![0usize; n];
    for &(a, b) in &edges {
        degree[a] += 1;
        degree[b] += 1;
    }
    let target = (edges.len() + extra).min(max_edges);
    let mut attempts = 0usize;
    let limit = 50 * extra.max(1) + 1000;
    while edges.len() < target && attempts < limit {
        attempts += 1;
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        let key = (a.min(b), a.max(b));
        if a == b || degree[a] >= cap || degree[b] >= cap || present.contains(&key) {
            continue;
        }
        present.insert(key);
        degree[a] += 1;
        degree[b] += 1;
        edges.push(key);
    }
    edges
}

/// Distinct uniform vertices.
pub fn sample_distinct(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<Vertex> {
    let mut all: Vec<Vertex> = (0..n).collect();
    let (picked, _) = all.partial_shuffle(rng, k.min(n));
    picked.to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn star_paths_sixteen() {
        let g = generate(&GeneratorSpec::new(GraphKind::StarPaths, 16), 0).unwrap();
        assert_eq!(g.n(), 17);
        assert_eq!((0..17).filter(|&v| g.degree(v) == 4).count(), 1);
    }

    #[test]
    fn grid_diag_eight() {
        let g = generate(&GeneratorSpec::new(GraphKind::GridDiag, 8), 0).unwrap();
        assert_eq!(g.n(), 8);
        // v₂ is the second top vertex, id 2.
        assert_eq!(g.degree(2), 5);
        assert_eq!(g.edge_count(), 4 + 3 * 4);
    }

    #[test]
    fn random_kinds_are_seeded() {
        for kind in [GraphKind::RandomTree, GraphKind::RandomConnected, GraphKind::RandomBounded] {
            let spec = GeneratorSpec::new(kind, 60);
            let a = generate(&spec, 7).unwrap();
            assert_eq!(a.edges(), generate(&spec, 7).unwrap().edges());
            assert_ne!(a.edges(), generate(&spec, 8).unwrap().edges());
        }
    }

    #[test]
    fn tree_and_bounded_shapes() {
        for seed in 0..20 {
            let t = generate(&GeneratorSpec::new(GraphKind::RandomTree, 50), seed).unwrap();
            assert!(t.is_tree());
            let b = generate(&GeneratorSpec::new(GraphKind::RandomBounded, 80).with_max_degree(4), seed).unwrap();
            assert!(b.max_degree() <= 4);
            let c = generate(&GeneratorSpec::new(GraphKind::RandomConnected, 40).with_extra_edges(15), seed).unwrap();
            assert_eq!(c.edge_count(), 39 + 15);
        }
    }

    #[test]
    fn weighted_prefix() {
        assert_eq!(parse_kind("weighted-cycle").unwrap(), (GraphKind::Cycle, true));
        assert_eq!(parse_kind("grid-diag").unwrap(), (GraphKind::GridDiag, false));
        assert!(parse_kind("hypercube").is_err());
        let g = generate(&GeneratorSpec::new(GraphKind::Cycle, 12).weighted(), 3).unwrap();
        assert!(!g.is_unit_weight());
    }
}
