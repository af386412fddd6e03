//! Second-target detection with verification queries, given `t₁`:
//! direction-distance queries, or vertex-direction plus edge-direction queries.

use super::{repetitions, restrict, Branch, Recorder, SearchError, SearchParams, SearchResult};
use crate::graph::{dist_eq, IndexedGraph, Vertex};
use crate::oracles::{DirectionDistanceOracle, DirectionOracle, EdgeOracle, QueryKind, QueryResponse};
use crate::vset::VertexSet;

enum Outcome {
    /// `t₂` revealed at this vertex.
    Found(Vertex),
    /// Neighbour to restrict to, and how it was justified.
    Update(Vertex, Branch),
    /// Every answer revealed `t₁`: the median carries no direction.
    Drop,
    NoneAccepted,
}

/// Shared round loop: median selection, retry-once on rejection, bookkeeping.
fn second_target_loop(
    ig: &IndexedGraph,
    params: &SearchParams,
    mut round: impl FnMut(&mut Recorder, Vertex, usize) -> Result<Outcome, SearchError>,
) -> SearchResult<Vertex> {
    let mut rec = Recorder::new(params);
    if let Err(e) = params.validate() {
        return rec.fail(e);
    }
    let n = ig.n();
    let mut policy = params.gamma_policy();
    let mut s = VertexSet::full(n);
    let mut retried = false;
    while s.len() > 1 {
        let before = s.len();
        let v = match policy.select(ig, &s) {
            Ok(v) => v,
            Err(e) => return rec.fail(e.into()),
        };
        match round(&mut rec, v, before) {
            Err(e) => return rec.fail(e),
            Ok(Outcome::Found(x)) => {
                rec.round(0, x, before, &VertexSet::singleton(n, x), Branch::Found);
                return rec.done(x, vec![x]);
            }
            Ok(Outcome::Update(u, branch)) => {
                restrict(ig, &mut s, v, u);
                rec.round(0, v, before, &s, branch);
                retried = false;
            }
            Ok(Outcome::Drop) => {
                s.remove(v);
                rec.round(0, v, before, &s, Branch::Dropped);
                retried = false;
            }
            Ok(Outcome::NoneAccepted) => {
                rec.round(0, v, before, &s, Branch::Reset);
                if retried {
                    return rec.fail(SearchError::NoBranchAccepted(v));
                }
                retried = true;
            }
        }
    }
    match s.first() {
        Some(t) => rec.done(t, vec![t]),
        None => rec.fail(SearchError::CandidatesExhausted),
    }
}

/// Finds `t₂` given `t₁` with direction-distance queries.
///
/// A median's `⌈ρ·log₂ n⌉` answers are deduplicated; an answer off
/// `E_{t₁}(v)` or with `ℓ ≠ d(v,t₁)` is trusted. Otherwise each candidate
/// `(u,ℓ)` is checked with `⌈ρ·log₂ n⌉` queries at `u`, accepted iff every
/// answer there reports `ℓ − w(vu)`.
pub fn algorithm2_direction_distance<O: DirectionDistanceOracle>(
    ig: &IndexedGraph,
    t1: Vertex,
    oracle: &mut O,
    params: &SearchParams,
) -> SearchResult<Vertex> {
    let k = repetitions(params.rho, (ig.n().max(2) as f64).log2());
    let dt = ig.dist();
    second_target_loop(ig, params, |rec, v, size| {
        let e1 = ig.target_edges(v, t1);
        let d1 = dt.get(v, t1);
        let mut q: Vec<(Vertex, f64)> = Vec::new();
        for _ in 0..k {
            rec.charge()?;
            let r = oracle.direction_distance(v);
            rec.log(QueryKind::DirectionDistance, &[v], None, r, size);
            match r {
                QueryResponse::Found { .. } if v != t1 => return Ok(Outcome::Found(v)),
                QueryResponse::Found { .. } => {}
                QueryResponse::DirectionDistance { to, dist } => {
                    if !q.iter().any(|&(u, l)| u == to && l == dist) {
                        q.push((to, dist));
                    }
                }
                other => return Err(SearchError::UnexpectedResponse(other)),
            }
        }
        q.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.total_cmp(&b.1)));
        if let Some(&(u, _)) = q.iter().find(|&&(u, l)| !e1.contains(&u) || !dist_eq(l, d1)) {
            return Ok(Outcome::Update(u, Branch::Deterministic));
        }
        if q.is_empty() {
            return Ok(Outcome::Drop);
        }
        for &(u, l) in &q {
            let w = ig.graph().weight(v, u).expect("answer is a neighbour");
            let mut ok = true;
            for _ in 0..k {
                rec.charge()?;
                let r = oracle.direction_distance(u);
                rec.log(QueryKind::DirectionDistance, &[u], None, r, size);
                let reported = match r {
                    QueryResponse::Found { .. } if u != t1 => return Ok(Outcome::Found(u)),
                    QueryResponse::Found { .. } => 0.0,
                    QueryResponse::DirectionDistance { dist, .. } => dist,
                    other => return Err(SearchError::UnexpectedResponse(other)),
                };
                if !dist_eq(reported, l - w) {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(Outcome::Update(u, Branch::Verified));
            }
        }
        Ok(Outcome::NoneAccepted)
    })
}

/// Finds `t₂` given `t₁` with vertex-direction and edge-direction queries.
///
/// As the direction-distance variant, but a candidate neighbour `u` is
/// accepted iff `⌈ρ·log₂ n⌉` edge queries at `(v,u)` all answer yes.
pub fn algorithm3_vertex_edge<O: DirectionOracle + EdgeOracle>(
    ig: &IndexedGraph,
    t1: Vertex,
    oracle: &mut O,
    params: &SearchParams,
) -> SearchResult<Vertex> {
    let k = repetitions(params.rho, (ig.n().max(2) as f64).log2());
    second_target_loop(ig, params, |rec, v, size| {
        let e1 = ig.target_edges(v, t1);
        let mut q: Vec<Vertex> = Vec::new();
        for _ in 0..k {
            rec.charge()?;
            let r = oracle.direction(v);
            rec.log(QueryKind::Direction, &[v], None, r, size);
            match r {
                QueryResponse::Found { .. } if v != t1 => return Ok(Outcome::Found(v)),
                QueryResponse::Found { .. } => {}
                QueryResponse::Direction { to } => {
                    if !q.contains(&to) {
                        q.push(to);
                    }
                }
                other => return Err(SearchError::UnexpectedResponse(other)),
            }
        }
        q.sort_unstable();
        if let Some(&u) = q.iter().find(|u| !e1.contains(u)) {
            return Ok(Outcome::Update(u, Branch::Deterministic));
        }
        if q.is_empty() {
            return Ok(Outcome::Drop);
        }
        for &u in &q {
            let mut ok = true;
            for _ in 0..k {
                rec.charge()?;
                let r = oracle.edge_direction(v, u)?;
                rec.log(QueryKind::EdgeDirection, &[v, u], None, r, size);
                if r != (QueryResponse::EdgeAnswer { yes: true }) {
                    ok = false;
                    break;
                }
            }
            if ok {
                return Ok(Outcome::Update(u, Branch::Verified));
            }
        }
        Ok(Outcome::NoneAccepted)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::oracles::{OracleConfig, TargetOracle, TiePolicy};

    fn cycle(n: usize) -> IndexedGraph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        IndexedGraph::new(Graph::from_indexed(n, &edges).unwrap())
    }

    #[test]
    fn c6_equidistant_targets() {
        let ig = cycle(6);
        for seed in 0..30 {
            let cfg = OracleConfig::two(0, 3, 0.75, TiePolicy::Equiprobable, seed).unwrap();
            let mut o = TargetOracle::new(&ig, cfg.clone()).unwrap();
            let params = SearchParams {
                rho: 4.0,
                seed,
                ..Default::default()
            };
            let (t2, tr) = algorithm2_direction_distance(&ig, 0, &mut o, &params).unwrap();
            assert_eq!(t2, 3);
            // Equal ℓ on both branches: answers toward 3 through either side.
            for rec in &tr.records {
                if let QueryResponse::DirectionDistance { dist, .. } = rec.response {
                    let v = rec.query.vertices[0];
                    let d = ig.dist();
                    assert!(dist == d.get(v, 0) || dist == d.get(v, 3));
                }
            }
            let mut o = TargetOracle::new(&ig, cfg).unwrap();
            let (t2, _) = algorithm3_vertex_edge(&ig, 0, &mut o, &params).unwrap();
            assert_eq!(t2, 3);
        }
    }

    #[test]
    fn distance_mismatch_resolves_deterministically() {
        let edges: Vec<_> = (0..15).map(|i| (i, i + 1, 1.0)).collect();
        let ig = IndexedGraph::new(Graph::from_indexed(16, &edges).unwrap());
        let cfg = OracleConfig::two(2, 13, 0.75, TiePolicy::Equiprobable, 8).unwrap();
        let mut o = TargetOracle::new(&ig, cfg).unwrap();
        let params = SearchParams {
            rho: 8.0,
            ..Default::default()
        };
        let (t2, tr) = algorithm2_direction_distance(&ig, 2, &mut o, &params).unwrap();
        assert_eq!(t2, 13);
        assert!(tr.rounds.iter().all(|r| matches!(r.branch, Branch::Deterministic | Branch::Found)));
    }
}
