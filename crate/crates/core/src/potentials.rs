//! Median potentials over candidate sets.
//!
//! `Φ_S(v)` is the distance sum to the members of `S`; `Γ_S(v)` is the largest
//! number of members of `S` behind a single first edge of `v`. Medians are
//! minimized over all of `V`, with ties going to the smallest id.

use crate::graph::{DistanceTable, Graph, IndexedGraph, Vertex};
use crate::vset::VertexSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::VecDeque;
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Potential {
    Phi,
    Gamma,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PotentialError {
    #[error("scripted vertex {vertex} does not qualify: potential {value} > (1+{epsilon})·{min}")]
    ScriptViolation {
        vertex: Vertex,
        value: f64,
        min: f64,
        epsilon: f64,
    },
    #[error("median script exhausted after {0} picks")]
    ScriptExhausted(usize),
}

pub fn phi(dt: &DistanceTable, s: &VertexSet, v: Vertex) -> f64 {
    let row = dt.row(v);
    s.iter().map(|x| row[x]).sum()
}

pub fn gamma(ig: &IndexedGraph, s: &VertexSet, v: Vertex) -> usize {
    ig.cones_of(v)
        .iter()
        .map(|c| c.intersection_len(s))
        .max()
        .unwrap_or(0)
}

/// Potential of every vertex of `V` with respect to `s`.
pub fn potential_values(ig: &IndexedGraph, potential: Potential, s: &VertexSet) -> Vec<f64> {
    (0..ig.n())
        .map(|v| match potential {
            Potential::Phi => phi(ig.dist(), s, v),
            Potential::Gamma => gamma(ig, s, v) as f64,
        })
        .collect()
}

/// Smallest-id minimizer over `V`.
pub fn argmin(values: &[f64]) -> Vertex {
    let mut best = 0;
    for (v, &x) in values.iter().enumerate() {
        if x < values[best] {
            best = v;
        }
    }
    best
}

pub fn exact_median(ig: &IndexedGraph, potential: Potential, s: &VertexSet) -> Vertex {
    argmin(&potential_values(ig, potential, s))
}

/// `value ≤ (1+ε)·min`, with a relative slack for floating-point sums.
#[inline]
pub fn qualifies(value: f64, min: f64, epsilon: f64) -> bool {
    value <= (1.0 + epsilon) * min + 1e-9 * (1.0 + min.abs())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChoiceRule {
    Best,
    WorstQualifying,
    RandomQualifying { seed: u64 },
    Scripted(Vec<Vertex>),
}

/// `(1+ε)`-approximate median selection.
///
/// Stateful only for the random rule (its RNG) and scripted rule (its cursor).
#[derive(Debug, Clone)]
pub struct MedianPolicy {
    pub potential: Potential,
    pub epsilon: f64,
    pub rule: ChoiceRule,
    rng: Option<ChaCha8Rng>,
    cursor: usize,
}

impl MedianPolicy {
    pub fn new(potential: Potential, epsilon: f64, rule: ChoiceRule) -> Self {
        let rng = match rule {
            ChoiceRule::RandomQualifying { seed } => Some(ChaCha8Rng::seed_from_u64(seed)),
            _ => None,
        };
        MedianPolicy {
            potential,
            epsilon,
            rule,
            rng,
            cursor: 0,
        }
    }

    pub fn exact(potential: Potential) -> Self {
        Self::new(potential, 0.0, ChoiceRule::Best)
    }

    /// Picks a vertex from precomputed potentials of all of `V`.
    pub fn select_from_values(&mut self, values: &[f64]) -> Result<Vertex, PotentialError> {
        let best = argmin(values);
        let min = values[best];
        let eps = self.epsilon;
        match &self.rule {
            ChoiceRule::Best => Ok(best),
            ChoiceRule::WorstQualifying => {
                let mut worst = best;
                for (v, &x) in values.iter().enumerate() {
                    if qualifies(x, min, eps) && x > values[worst] {
                        worst = v;
                    }
                }
                Ok(worst)
            }
            ChoiceRule::RandomQualifying { .. } => {
                let qual: Vec<Vertex> = (0..values.len())
                    .filter(|&v| qualifies(values[v], min, eps))
                    .collect();
                let rng = self.rng.as_mut().expect("random rule carries an rng");
                Ok(qual[rng.gen_range(0..qual.len())])
            }
            ChoiceRule::Scripted(script) => {
                let &vertex = script
                    .get(self.cursor)
                    .ok_or(PotentialError::ScriptExhausted(self.cursor))?;
                if !qualifies(values[vertex], min, eps) {
                    return Err(PotentialError::ScriptViolation {
                        vertex,
                        value: values[vertex],
                        min,
                        epsilon: eps,
                    });
                }
                self.cursor += 1;
                Ok(vertex)
            }
        }
    }

    pub fn select(&mut self, ig: &IndexedGraph, s: &VertexSet) -> Result<Vertex, PotentialError> {
        let values = potential_values(ig, self.potential, s);
        self.select_from_values(&values)
    }
}

pub fn approx_median(
    policy: &mut MedianPolicy,
    ig: &IndexedGraph,
    s: &VertexSet,
) -> Result<Vertex, PotentialError> {
    policy.select(ig, s)
}

/// Weighted `Γ`: heaviest cone of `v` under per-vertex weights.
pub fn weighted_gamma(ig: &IndexedGraph, weights: &[f64], v: Vertex) -> f64 {
    ig.cones_of(v)
        .iter()
        .map(|c| c.iter().map(|x| weights[x]).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn weighted_gamma_median(ig: &IndexedGraph, weights: &[f64]) -> Vertex {
    let values: Vec<f64> = (0..ig.n()).map(|v| weighted_gamma(ig, weights, v)).collect();
    argmin(&values)
}

/// `Φ_S(v)` for every vertex of a tree in linear time (rerooting), without a
/// distance table. Panics if `g` is not a tree.
pub fn phi_tree_all(g: &Graph, s: &VertexSet) -> Vec<f64> {
    assert!(g.is_tree(), "phi_tree_all needs a tree");
    let n = g.n();
    let mut parent = vec![usize::MAX; n];
    let mut pw = vec![0.0; n];
    let mut depth = vec![0.0; n];
    let mut order = Vec::with_capacity(n);
    let mut queue = VecDeque::from([0]);
    parent[0] = 0;
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &(u, w) in g.neighbors(v) {
            if parent[u] == usize::MAX {
                parent[u] = v;
                pw[u] = w;
                depth[u] = depth[v] + w;
                queue.push_back(u);
            }
        }
    }
    let mut below = vec![0usize; n];
    for &v in order.iter().rev() {
        below[v] += s.contains(v) as usize;
        if v != 0 {
            below[parent[v]] += below[v];
        }
    }
    let total = s.len() as f64;
    let mut out = vec![0.0; n];
    out[0] = s.iter().map(|x| depth[x]).sum();
    for &v in order.iter().skip(1) {
        out[v] = out[parent[v]] + pw[v] * (total - 2.0 * below[v] as f64);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> IndexedGraph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        IndexedGraph::new(Graph::from_indexed(n, &edges).unwrap())
    }

    fn star_of_paths(k: usize) -> Graph {
        let mut edges = Vec::new();
        for p in 0..k {
            let first = 1 + p * k;
            edges.push((0, first, 1.0));
            for j in 1..k {
                edges.push((first + j - 1, first + j, 1.0));
            }
        }
        Graph::from_indexed(k * k + 1, &edges).unwrap()
    }

    #[test]
    fn phi_and_gamma_on_three_path() {
        let ig = path(3);
        let all = VertexSet::full(3);
        assert_eq!(phi(ig.dist(), &all, 1), 2.0);
        assert_eq!(gamma(&ig, &all, 1), 1);
        assert_eq!(gamma(&ig, &all, 0), 2);
        let single = VertexSet::singleton(3, 2);
        assert_eq!(phi(ig.dist(), &single, 2), 0.0);
        assert_eq!(gamma(&ig, &single, 2), 0);
    }

    #[test]
    fn star_of_paths_sixteen() {
        let g = star_of_paths(4);
        let ig = IndexedGraph::new(g);
        let all = VertexSet::full(17);
        assert_eq!(phi(ig.dist(), &all, 0), 40.0);
        assert_eq!(phi(ig.dist(), &all, 1), 49.0);
        let values = potential_values(&ig, Potential::Phi, &all);
        let mut at_0225 = MedianPolicy::new(Potential::Phi, 0.225, ChoiceRule::Scripted(vec![1]));
        assert_eq!(at_0225.select_from_values(&values), Ok(1));
        let mut at_022 = MedianPolicy::new(Potential::Phi, 0.22, ChoiceRule::Scripted(vec![1]));
        assert!(matches!(
            at_022.select_from_values(&values),
            Err(PotentialError::ScriptViolation { vertex: 1, .. })
        ));
    }

    #[test]
    fn medians_on_paths_and_stars() {
        let ig = path(7);
        assert_eq!(exact_median(&ig, Potential::Gamma, &VertexSet::full(7)), 3);
        let star = Graph::from_indexed(6, &(1..6).map(|i| (0, i, 1.0)).collect::<Vec<_>>()).unwrap();
        let ig = IndexedGraph::new(star);
        assert_eq!(exact_median(&ig, Potential::Phi, &VertexSet::full(6)), 0);
        // |S| = 1: only the member itself has Γ = 0.
        assert_eq!(exact_median(&ig, Potential::Gamma, &VertexSet::singleton(6, 4)), 4);
        // Φ over {4} is minimized at 4 too.
        assert_eq!(exact_median(&ig, Potential::Phi, &VertexSet::singleton(6, 4)), 4);
    }

    #[test]
    fn epsilon_zero_rules_agree_with_exact() {
        let ig = path(9);
        let s = VertexSet::from_iter(9, [1, 2, 6, 8]);
        let exact = exact_median(&ig, Potential::Gamma, &s);
        for rule in [
            ChoiceRule::Best,
            ChoiceRule::WorstQualifying,
            ChoiceRule::RandomQualifying { seed: 3 },
        ] {
            let mut pol = MedianPolicy::new(Potential::Gamma, 0.0, rule);
            let v = pol.select(&ig, &s).unwrap();
            assert_eq!(gamma(&ig, &s, v), gamma(&ig, &s, exact));
        }
        let mut best = MedianPolicy::exact(Potential::Gamma);
        assert_eq!(best.select(&ig, &s).unwrap(), exact);
    }

    #[test]
    fn worst_qualifying_maximizes_within_slack() {
        let ig = path(16);
        let all = VertexSet::full(16);
        let mut pol = MedianPolicy::new(Potential::Gamma, 0.5, ChoiceRule::WorstQualifying);
        let v = pol.select(&ig, &all).unwrap();
        // Γmin = 8 on a 16-path; the worst admissible value is 12, first reached at vertex 3.
        assert_eq!(gamma(&ig, &all, v), 12);
        assert_eq!(v, 3);
    }

    #[test]
    fn script_exhaustion_is_reported() {
        let mut pol = MedianPolicy::new(Potential::Gamma, 0.0, ChoiceRule::Scripted(vec![]));
        assert_eq!(pol.select_from_values(&[1.0]), Err(PotentialError::ScriptExhausted(0)));
    }

    #[test]
    fn weighted_gamma_uniform_matches_gamma() {
        let ig = path(10);
        let w = vec![2.5; 10];
        let all = VertexSet::full(10);
        assert_eq!(weighted_gamma_median(&ig, &w), exact_median(&ig, Potential::Gamma, &all));
        for v in 0..10 {
            assert_eq!(weighted_gamma(&ig, &w, v), 2.5 * gamma(&ig, &all, v) as f64);
        }
    }

    #[test]
    fn tree_rerooting_matches_table() {
        let g = star_of_paths(5);
        let ig = IndexedGraph::new(g.clone());
        let s = VertexSet::from_iter(g.n(), (0..g.n()).filter(|v| v % 3 != 1));
        let fast = phi_tree_all(&g, &s);
        for v in 0..g.n() {
            assert_eq!(fast[v], phi(ig.dist(), &s, v));
        }
    }
}
