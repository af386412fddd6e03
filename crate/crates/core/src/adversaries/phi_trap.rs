//! Star of `√n` paths of length `√n` around a centre `v₀`, with the target
//! at `v₀` and a scripted `(1+ε)`-Φ-median policy that queries the centre's
//! neighbours one by one.
//!
//! Ids: `v₀ = 0` and `v_{p,j} = 1 + (p−1)·√n + (j−1)` for `p, j ∈ 1..=√n`.

use super::{violated, AdversaryError, AdversaryGame};
use crate::graph::{Graph, Vertex};
use crate::oracles::{DirectionOracle, QueryResponse};
use crate::potentials::{phi_tree_all, ChoiceRule, MedianPolicy, Potential};
use crate::vset::VertexSet;

pub fn star_paths_id(root: usize, p: usize, j: usize) -> Vertex {
    if j == 0 {
        0
    } else {
        1 + (p - 1) * root + (j - 1)
    }
}

fn perfect_root(n: usize) -> Option<usize> {
    let r = (n as f64).sqrt().round() as usize;
    (r * r == n).then_some(r)
}

/// `√n` paths of `√n` edges sharing the endpoint `v₀`; `n+1` vertices.
pub fn star_paths_graph(n: usize) -> Result<Graph, AdversaryError> {
    let root = perfect_root(n)
        .filter(|&r| r >= 2)
        .ok_or_else(|| AdversaryError::InvalidSize(format!("star of paths needs a perfect square n ≥ 4, got {n}")))?;
    let mut edges = Vec::with_capacity(n);
    for p in 1..=root {
        for j in 1..=root {
            edges.push((star_paths_id(root, p, j - 1), star_paths_id(root, p, j), 1.0));
        }
    }
    Ok(Graph::from_indexed(n + 1, &edges).expect("star of paths is valid"))
}

/// `Φ_{V₋ₖ}(v₀) = k + ½(√n−k)(n+√n)`.
pub fn phi_trap_eq1(n: usize, k: usize) -> f64 {
    let r = (n as f64).sqrt();
    k as f64 + 0.5 * (r - k as f64) * (n as f64 + r)
}

/// `Φ_{V₋ₖ}(v_{p,1}) = 2k + ½(n−√n) + 1 + ½(√n−k−1)(n+3√n)` for `p > k`.
pub fn phi_trap_eq2(n: usize, k: usize) -> f64 {
    let r = (n as f64).sqrt();
    let n = n as f64;
    let k = k as f64;
    2.0 * k + 0.5 * (n - r) + 1.0 + 0.5 * (r - k - 1.0) * (n + 3.0 * r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhiTrapReport {
    /// Queries issued before the candidates' set was reduced to `{v₀}`.
    pub forced_queries: usize,
    /// `Φ(v_{k+1,1}) / Φ(v₀)` over `V₋ₖ` at each step.
    pub ratios: Vec<f64>,
    /// Whether both closed forms matched the computed potentials at every step.
    pub closed_forms_match: bool,
    /// Candidates' set after the cone updates of the run.
    pub final_candidates: Vec<Vertex>,
}

/// The scripted run against a Φ-median searcher.
///
/// Step `k` evaluates Φ over `V₋ₖ` (every path `p ≤ k` cut down to its first
/// vertex), asks the scripted policy for `v_{k+1,1}`, and answers toward `v₀`.
#[derive(Debug)]
pub struct PhiTrapGame {
    graph: Graph,
    n: usize,
    root: usize,
    epsilon: f64,
    queries: usize,
    history: Vec<(Vertex, QueryResponse)>,
}

impl PhiTrapGame {
    pub fn new(n: usize, epsilon: f64) -> Result<Self, AdversaryError> {
        let graph = star_paths_graph(n)?;
        Ok(PhiTrapGame {
            graph,
            n,
            root: perfect_root(n).expect("checked"),
            epsilon,
            queries: 0,
            history: Vec::new(),
        })
    }

    pub fn root(&self) -> usize {
        self.root
    }

    /// `v_{1,1}, v_{2,1}, …, v_{√n,1}`.
    pub fn script(&self) -> Vec<Vertex> {
        (1..=self.root).map(|p| star_paths_id(self.root, p, 1)).collect()
    }

    /// `V₋ₖ`.
    pub fn pruned_set(&self, k: usize) -> VertexSet {
        let mut s = VertexSet::full(self.graph.n());
        for p in 1..=k {
            for j in 2..=self.root {
                s.remove(star_paths_id(self.root, p, j));
            }
        }
        s
    }

    /// Cone behind the answer `v₀` at `v_{p,1}`: everything except path `p`.
    fn cone_toward_centre(&self, p: usize) -> VertexSet {
        let mut c = VertexSet::full(self.graph.n());
        for j in 1..=self.root {
            c.remove(star_paths_id(self.root, p, j));
        }
        c
    }

    /// Plays the whole script, validating every pick against the
    /// `(1+ε)`-qualification predicate.
    pub fn run(&mut self) -> Result<PhiTrapReport, AdversaryError> {
        let script = self.script();
        let mut policy = MedianPolicy::new(Potential::Phi, self.epsilon, ChoiceRule::Scripted(script.clone()));
        let mut s_true = VertexSet::full(self.graph.n());
        let mut ratios = Vec::with_capacity(self.root);
        let mut closed_forms_match = true;
        for k in 0..self.root {
            let values = phi_tree_all(&self.graph, &self.pruned_set(k));
            let v = policy.select_from_values(&values)?;
            closed_forms_match &= values[0] == phi_trap_eq1(self.n, k) && values[v] == phi_trap_eq2(self.n, k);
            ratios.push(values[v] / values[0]);
            match self.direction(v) {
                QueryResponse::Direction { to: 0 } => s_true.intersect_with(&self.cone_toward_centre(k + 1)),
                other => return violated(format!("scripted query at {v} answered {other:?}")),
            }
        }
        Ok(PhiTrapReport {
            forced_queries: self.queries,
            ratios,
            closed_forms_match,
            final_candidates: s_true.iter().collect(),
        })
    }
}

impl DirectionOracle for PhiTrapGame {
    /// Truthful toward `v₀`.
    fn direction(&mut self, v: Vertex) -> QueryResponse {
        self.queries += 1;
        let r = if v == 0 {
            QueryResponse::Found { target: 0 }
        } else {
            let j = (v - 1) % self.root + 1;
            QueryResponse::Direction { to: if j == 1 { 0 } else { v - 1 } }
        };
        self.history.push((v, r));
        r
    }
}

impl AdversaryGame for PhiTrapGame {
    fn name(&self) -> &'static str {
        "phi-trap"
    }

    fn graph(&self) -> &Graph {
        &self.graph
    }

    fn lower_bound(&self) -> usize {
        self.root
    }

    fn queries(&self) -> usize {
        self.queries
    }

    fn committed(&self) -> Vec<Vertex> {
        vec![0]
    }

    /// Every answer is a first edge of the unique path to `v₀`.
    fn certify(&self) -> Result<(), AdversaryError> {
        for &(v, r) in &self.history {
            let ok = match r {
                QueryResponse::Found { .. } => v == 0,
                QueryResponse::Direction { to } => {
                    let j = (v - 1) % self.root + 1;
                    v != 0 && to == if j == 1 { 0 } else { v - 1 }
                }
                _ => false,
            };
            if !ok {
                return violated(format!("answer {r:?} at {v} does not lead to v0"));
            }
        }
        Ok(())
    }
}
