//! First-target finder for biased two-target oracles.
//!
//! A contract-level multiplicative-weights search: keep a positive weight per
//! vertex, query the weighted Γ-median, and discount every vertex outside the
//! returned cone by `(1−p₁)/p₁`. After the round budget the heaviest vertex is
//! verified by repeated queries awaiting its reveal.

use super::{ceil_log2, repetitions, Branch, Recorder, SearchError, SearchParams, SearchResult};
use crate::graph::{IndexedGraph, Vertex};
use crate::oracles::{DirectionOracle, QueryKind, QueryResponse};
use crate::potentials::weighted_gamma_median;
use crate::vset::VertexSet;

const MAX_RESTARTS: usize = 3;

/// Vertices whose weight is within one discount of the maximum.
fn leading_set(weights: &[f64], factor: f64) -> VertexSet {
    let max = weights.iter().copied().fold(0.0, f64::max);
    let cut = max * factor.max(1e-12);
    VertexSet::from_iter(weights.len(), (0..weights.len()).filter(|&x| weights[x] > 0.0 && weights[x] >= cut))
}

fn heaviest(weights: &[f64]) -> Vertex {
    let mut best = 0;
    for (x, &w) in weights.iter().enumerate() {
        if w > weights[best] {
            best = x;
        }
    }
    best
}

/// Finds `t₁` (target index 0, answered with probability `p₁ > ½`).
///
/// Runs `⌈ρ·log₂ n⌉` weighting rounds, then verifies the heaviest vertex
/// with up to `⌈ρ·log₂ n⌉` queries; on failure the vertex is ruled out and
/// the weights restart, at most three times.
pub fn noisy_first_target<O: DirectionOracle>(
    ig: &IndexedGraph,
    oracle: &mut O,
    p1: f64,
    params: &SearchParams,
) -> SearchResult<Vertex> {
    let mut rec = Recorder::new(params);
    if let Err(e) = params.validate() {
        return rec.fail(e);
    }
    if !(p1 > 0.5 && p1 <= 1.0) {
        return rec.fail(SearchError::InvalidParams(format!("p1 = {p1} must lie in (1/2, 1]")));
    }
    let n = ig.n();
    let factor = (1.0 - p1) / p1;
    let rounds = repetitions(params.rho, ceil_log2(n) as f64);
    let mut ruled_out = VertexSet::empty(n);
    for restart in 0..=MAX_RESTARTS {
        let phase = restart as u32;
        let mut weights: Vec<f64> = (0..n).map(|x| if ruled_out.contains(x) { 0.0 } else { 1.0 }).collect();
        for _ in 0..rounds {
            let before = leading_set(&weights, factor).len();
            let v = weighted_gamma_median(ig, &weights);
            if let Err(e) = rec.charge() {
                return rec.fail(e);
            }
            let r = oracle.direction(v);
            rec.log(QueryKind::Direction, &[v], None, r, before);
            match r {
                QueryResponse::Found { target: 0 } => {
                    rec.round(phase, v, before, &VertexSet::singleton(n, v), Branch::Found);
                    return rec.done(v, vec![v]);
                }
                QueryResponse::Found { .. } => {
                    ruled_out.insert(v);
                    weights[v] = 0.0;
                }
                QueryResponse::Direction { to } => {
                    let cone = ig.cone(v, to).expect("answer is a neighbour");
                    for (x, w) in weights.iter_mut().enumerate() {
                        if !cone.contains(x) {
                            *w *= factor;
                        }
                    }
                }
                other => return rec.fail(SearchError::UnexpectedResponse(other)),
            }
            let max = weights.iter().copied().fold(0.0, f64::max);
            if max == 0.0 {
                break;
            }
            for w in weights.iter_mut() {
                *w /= max;
            }
            let lead = leading_set(&weights, factor);
            rec.round(phase, v, before, &lead, Branch::Majority);
        }
        if weights.iter().all(|&w| w == 0.0) {
            continue;
        }
        let cand = heaviest(&weights);
        for _ in 0..rounds {
            if let Err(e) = rec.charge() {
                return rec.fail(e);
            }
            let r = oracle.direction(cand);
            rec.log(QueryKind::Direction, &[cand], None, r, 1);
            match r {
                QueryResponse::Found { target: 0 } => {
                    rec.round(phase, cand, 1, &VertexSet::singleton(n, cand), Branch::Found);
                    return rec.done(cand, vec![cand]);
                }
                QueryResponse::Found { .. } => break,
                _ => {}
            }
        }
        ruled_out.insert(cand);
        let remaining = leading_set(&weights, factor);
        rec.round(phase, cand, 1, &remaining, Branch::Dropped);
    }
    rec.fail(SearchError::FirstTargetNotFound(MAX_RESTARTS))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::oracles::{OracleConfig, TargetOracle, TiePolicy};

    #[test]
    fn degenerate_single_target() {
        let edges: Vec<_> = (0..99).map(|i| (i, i + 1, 1.0)).collect();
        let ig = IndexedGraph::new(Graph::from_indexed(100, &edges).unwrap());
        let mut o = TargetOracle::new(&ig, OracleConfig::single(63, 1)).unwrap();
        let (v, _) = noisy_first_target(&ig, &mut o, 1.0, &SearchParams::default()).unwrap();
        assert_eq!(v, 63);
    }

    #[test]
    fn biased_pair_on_path() {
        let edges: Vec<_> = (0..63).map(|i| (i, i + 1, 1.0)).collect();
        let ig = IndexedGraph::new(Graph::from_indexed(64, &edges).unwrap());
        let mut ok = 0;
        for seed in 0..40 {
            let cfg = OracleConfig::two(10, 50, 0.75, TiePolicy::Equiprobable, seed).unwrap();
            let mut o = TargetOracle::new(&ig, cfg).unwrap();
            let params = SearchParams {
                rho: 4.0,
                ..Default::default()
            };
            if let Ok((v, _)) = noisy_first_target(&ig, &mut o, 0.75, &params) {
                ok += (v == 10) as usize;
            }
        }
        assert!(ok >= 38, "{ok}/40");
    }
}
