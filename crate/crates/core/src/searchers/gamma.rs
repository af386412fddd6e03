//! Single-answer Γ-median searches.

use super::{restrict, Branch, Recorder, SearchError, SearchParams, SearchResult};
use crate::graph::{IndexedGraph, Vertex};
use crate::oracles::{DirectionOracle, QueryKind, QueryResponse, RestrictedSetOracle, TwoDirectionOracle};
use crate::potentials::{potential_values, Potential};
use crate::vset::VertexSet;

/// Binary search with `(1+ε)`-approximate Γ-medians against a truthful
/// single-target oracle.
pub fn gamma_binary_search<O: DirectionOracle>(
    ig: &IndexedGraph,
    oracle: &mut O,
    params: &SearchParams,
) -> SearchResult<Vertex> {
    let mut rec = Recorder::new(params);
    if let Err(e) = params.validate() {
        return rec.fail(e);
    }
    let mut policy = params.gamma_policy();
    let mut s = VertexSet::full(ig.n());
    loop {
        let before = s.len();
        let v = match policy.select(ig, &s) {
            Ok(v) => v,
            Err(e) => return rec.fail(e.into()),
        };
        if let Err(e) = rec.charge() {
            return rec.fail(e);
        }
        let r = oracle.direction(v);
        rec.log(QueryKind::Direction, &[v], None, r, before);
        match r {
            QueryResponse::Found { .. } => {
                rec.round(0, v, before, &s, Branch::Found);
                return rec.done(v, vec![v]);
            }
            QueryResponse::Direction { to } => {
                restrict(ig, &mut s, v, to);
                rec.round(0, v, before, &s, Branch::Direct);
                if s.is_empty() {
                    return rec.fail(SearchError::CandidatesExhausted);
                }
                oracle.observe_candidates(&s);
            }
            other => return rec.fail(SearchError::UnexpectedResponse(other)),
        }
    }
}

/// Deterministic Γ-median prober for games where a queried vertex that does
/// not reveal is known not to be a target.
///
/// Queried vertices leave `S` and the median range for good; when `S` empties it restarts from the
/// unqueried vertices (a new phase). Runs until some answer is `Found`.
fn probe_search(
    ig: &IndexedGraph,
    params: &SearchParams,
    kind: QueryKind,
    mut query: impl FnMut(Vertex) -> QueryResponse,
) -> SearchResult<Vertex> {
    let mut rec = Recorder::new(params);
    if let Err(e) = params.validate() {
        return rec.fail(e);
    }
    let n = ig.n();
    let mut policy = params.gamma_policy();
    let mut s = VertexSet::full(n);
    let mut queried = VertexSet::empty(n);
    let mut phase = 0;
    loop {
        if s.is_empty() {
            s = VertexSet::full(n);
            s.difference_with(&queried);
            phase += 1;
            if s.is_empty() {
                return rec.fail(SearchError::CandidatesExhausted);
            }
            rec.round(phase, 0, 0, &s, Branch::Reset);
        }
        let before = s.len();
        // Medians range over unqueried vertices only; a repeat query learns nothing.
        let mut values = potential_values(ig, Potential::Gamma, &s);
        for x in queried.iter() {
            values[x] = f64::INFINITY;
        }
        let v = match policy.select_from_values(&values) {
            Ok(v) => v,
            Err(e) => return rec.fail(e.into()),
        };
        if let Err(e) = rec.charge() {
            return rec.fail(e);
        }
        let r = query(v);
        rec.log(kind, &[v], None, r, before);
        queried.insert(v);
        match r {
            QueryResponse::Found { .. } => {
                rec.round(phase, v, before, &s, Branch::Found);
                return rec.done(v, vec![v]);
            }
            QueryResponse::Direction { to } => restrict(ig, &mut s, v, to),
            QueryResponse::TwoDirections { a, b } => {
                let mut both = ig.cone(v, a).expect("answer is a neighbour").clone();
                both.union_with(ig.cone(v, b).expect("answer is a neighbour"));
                s.intersect_with(&both);
            }
            other => return rec.fail(SearchError::UnexpectedResponse(other)),
        }
        s.difference_with(&queried);
        rec.round(phase, v, before, &s, Branch::Direct);
    }
}

pub fn gamma_probe_search<O: DirectionOracle>(
    ig: &IndexedGraph,
    oracle: &mut O,
    params: &SearchParams,
) -> SearchResult<Vertex> {
    probe_search(ig, params, QueryKind::Direction, |v| oracle.direction(v))
}

pub fn gamma_probe_search_two_direction<O: TwoDirectionOracle>(
    ig: &IndexedGraph,
    oracle: &mut O,
    params: &SearchParams,
) -> SearchResult<Vertex> {
    probe_search(ig, params, QueryKind::TwoDirection, |v| oracle.two_direction(v))
}

/// Finds `target_count` targets with restricted-set queries: one Γ-median
/// binary search per target, each starting from `V` minus the targets found
/// so far and passing the current `S` as the query's set argument.
pub fn restricted_set_search<O: RestrictedSetOracle>(
    ig: &IndexedGraph,
    oracle: &mut O,
    target_count: usize,
    params: &SearchParams,
) -> SearchResult<Vec<Vertex>> {
    let mut rec = Recorder::new(params);
    if let Err(e) = params.validate() {
        return rec.fail(e);
    }
    let n = ig.n();
    let mut policy = params.gamma_policy();
    let mut found: Vec<Vertex> = Vec::with_capacity(target_count);
    for phase in 0..target_count as u32 {
        let mut s = VertexSet::full(n);
        for &t in &found {
            s.remove(t);
        }
        if phase > 0 {
            rec.round(phase, 0, n, &s, Branch::Reset);
        }
        loop {
            if s.is_empty() {
                return rec.fail(SearchError::CandidatesExhausted);
            }
            let before = s.len();
            let v = match policy.select(ig, &s) {
                Ok(v) => v,
                Err(e) => return rec.fail(e.into()),
            };
            if let Err(e) = rec.charge() {
                return rec.fail(e);
            }
            let r = oracle.restricted(v, &s);
            rec.log(QueryKind::RestrictedSet, &[v], Some(before), r, before);
            match r {
                QueryResponse::Found { .. } => {
                    found.push(v);
                    rec.round(phase, v, before, &s, Branch::Found);
                    break;
                }
                QueryResponse::Direction { to } if to != v => {
                    restrict(ig, &mut s, v, to);
                    rec.round(phase, v, before, &s, Branch::Direct);
                }
                other => return rec.fail(SearchError::UnexpectedResponse(other)),
            }
        }
    }
    let all = found.clone();
    rec.done(found, all)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::oracles::{OracleConfig, RestrictedOracle, TargetOracle};
    use crate::potentials::ChoiceRule;

    fn path(n: usize) -> IndexedGraph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        IndexedGraph::new(Graph::from_indexed(n, &edges).unwrap())
    }

    #[test]
    fn path_1024_within_log_n() {
        let ig = path(1024);
        for t in [0, 1, 511, 512, 777, 1023] {
            let mut o = TargetOracle::new(&ig, OracleConfig::single(t, 0)).unwrap();
            let (v, tr) = gamma_binary_search(&ig, &mut o, &SearchParams::default()).unwrap();
            assert_eq!(v, t);
            assert!(tr.total_queries() <= 11, "t={t}: {}", tr.total_queries());
            assert_eq!(tr.total_queries(), o.counts().total());
        }
    }

    #[test]
    fn single_vertex_graph() {
        let ig = IndexedGraph::new(Graph::from_indexed(1, &[]).unwrap());
        let mut o = TargetOracle::new(&ig, OracleConfig::single(0, 0)).unwrap();
        let (v, tr) = gamma_binary_search(&ig, &mut o, &SearchParams::default()).unwrap();
        assert_eq!((v, tr.total_queries()), (0, 1));
    }

    #[test]
    fn worst_qualifying_keeps_shrinkage() {
        let ig = path(300);
        let params = SearchParams {
            epsilon: 0.5,
            rule: ChoiceRule::WorstQualifying,
            ..Default::default()
        };
        let mut o = TargetOracle::new(&ig, OracleConfig::single(17, 0)).unwrap();
        let (v, tr) = gamma_binary_search(&ig, &mut o, &params).unwrap();
        assert_eq!(v, 17);
        for r in tr.rounds.iter().filter(|r| r.branch == Branch::Direct) {
            assert!(r.size_after as f64 <= 0.75 * r.size_before as f64 + 1e-9);
        }
    }

    #[test]
    fn budget_cutoff_reports_partial_transcript() {
        let ig = path(64);
        let params = SearchParams {
            budget: 2,
            ..Default::default()
        };
        let mut o = TargetOracle::new(&ig, OracleConfig::single(5, 0)).unwrap();
        let err = gamma_binary_search(&ig, &mut o, &params).unwrap_err();
        assert_eq!(err.error, SearchError::BudgetExceeded(2));
        assert_eq!(err.transcript.total_queries(), 2);
    }

    #[test]
    fn restricted_set_finds_all_targets() {
        let ig = path(1024);
        let targets = vec![3, 600, 1000];
        let mut o = RestrictedOracle::new(&ig, targets.clone()).unwrap();
        let (mut found, tr) = restricted_set_search(&ig, &mut o, 3, &SearchParams::default()).unwrap();
        found.sort_unstable();
        assert_eq!(found, targets);
        assert!(tr.total_queries() <= 33);
    }
}
