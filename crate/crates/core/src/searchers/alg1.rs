//! Second-target detection with vertex-direction queries, given `t₁`.

use super::{restrict, Branch, Recorder, SearchError, SearchParams, SearchResult};
use crate::graph::{IndexedGraph, Vertex};
use crate::oracles::{DirectionOracle, QueryKind, QueryResponse};
use crate::vset::VertexSet;

/// `c = 7(1+p₁)² / (p₁(1−p₁)²)`.
pub fn algorithm1_constant(p1: f64) -> f64 {
    7.0 * (1.0 + p1).powi(2) / (p1 * (1.0 - p1).powi(2))
}

/// Queries per median: `⌈ρ·c·Δ·log₂ n⌉`.
pub fn algorithm1_repetitions(n: usize, max_degree: usize, p1: f64, rho: f64) -> u64 {
    let x = algorithm1_constant(p1) * max_degree as f64 * (n.max(2) as f64).log2();
    ((rho * x).ceil() as u64).max(1)
}

/// Finds `t₂` given `t₁` against an equiprobable two-target oracle.
///
/// Each round queries the Γ-median `v` of `S` a fixed number of times. An
/// answer outside `E_{t₁}(v)` must come from `t₂` and is trusted outright;
/// otherwise the most frequent answer (smallest id on ties) is used. A median
/// at `t₁` that only ever reveals `t₁` is discarded from `S`.
pub fn algorithm1_second_target<O: DirectionOracle>(
    ig: &IndexedGraph,
    t1: Vertex,
    oracle: &mut O,
    p1: f64,
    params: &SearchParams,
) -> SearchResult<Vertex> {
    let mut rec = Recorder::new(params);
    if let Err(e) = params.validate() {
        return rec.fail(e);
    }
    if !(p1 > 0.5 && p1 < 1.0) {
        return rec.fail(SearchError::InvalidParams(format!("p1 = {p1} must lie in (1/2, 1)")));
    }
    let n = ig.n();
    let k = algorithm1_repetitions(n, ig.graph().max_degree(), p1, params.rho);
    let mut policy = params.gamma_policy();
    let mut s = VertexSet::full(n);
    while s.len() > 1 {
        let before = s.len();
        let v = match policy.select(ig, &s) {
            Ok(v) => v,
            Err(e) => return rec.fail(e.into()),
        };
        let nbrs = ig.graph().neighbors(v);
        let e1 = ig.target_edges(v, t1);
        let mut freq = vec![0u64; nbrs.len()];
        let mut outside: Option<Vertex> = None;
        for _ in 0..k {
            if let Err(e) = rec.charge() {
                return rec.fail(e);
            }
            let r = oracle.direction(v);
            rec.log(QueryKind::Direction, &[v], None, r, before);
            match r {
                QueryResponse::Found { .. } if v != t1 => {
                    rec.round(0, v, before, &VertexSet::singleton(n, v), Branch::Found);
                    return rec.done(v, vec![v]);
                }
                QueryResponse::Found { .. } => {}
                QueryResponse::Direction { to } => {
                    let idx = nbrs.binary_search_by_key(&to, |&(x, _)| x).expect("answer is a neighbour");
                    freq[idx] += 1;
                    if outside.is_none() && !e1.contains(&to) {
                        outside = Some(to);
                    }
                }
                other => return rec.fail(SearchError::UnexpectedResponse(other)),
            }
        }
        if let Some(u) = outside {
            restrict(ig, &mut s, v, u);
            rec.round(0, v, before, &s, Branch::Deterministic);
        } else if let Some(best) = (0..nbrs.len()).filter(|&i| freq[i] > 0).max_by_key(|&i| (freq[i], std::cmp::Reverse(i))) {
            restrict(ig, &mut s, v, nbrs[best].0);
            rec.round(0, v, before, &s, Branch::Majority);
        } else {
            s.remove(v);
            rec.round(0, v, before, &s, Branch::Dropped);
        }
        oracle.observe_candidates(&s);
    }
    match s.first() {
        Some(t) => rec.done(t, vec![t]),
        None => rec.fail(SearchError::CandidatesExhausted),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::oracles::{OracleConfig, TargetOracle, TiePolicy};

    #[test]
    fn constant_at_three_quarters() {
        assert!((algorithm1_constant(0.75) - 457.333_333).abs() < 1e-3);
        assert_eq!(algorithm1_repetitions(256, 8, 0.75, 1.0), 29270);
    }

    #[test]
    fn path_with_targets_on_opposite_ends() {
        // Every median lies between the targets, so E₁ and E₂ are disjoint
        // and the deterministic branch always fires.
        let edges: Vec<_> = (0..31).map(|i| (i, i + 1, 1.0)).collect();
        let ig = IndexedGraph::new(Graph::from_indexed(32, &edges).unwrap());
        let cfg = OracleConfig::two(0, 31, 0.75, TiePolicy::Equiprobable, 5).unwrap();
        let mut o = TargetOracle::new(&ig, cfg).unwrap();
        let params = SearchParams {
            rho: 0.01,
            ..Default::default()
        };
        let (t2, tr) = algorithm1_second_target(&ig, 0, &mut o, 0.75, &params).unwrap();
        assert_eq!(t2, 31);
        assert!(tr.rounds.iter().all(|r| matches!(r.branch, Branch::Deterministic | Branch::Found)));
    }
}
