//! Two-phase two-target search on trees.

use super::{next_hop, repetitions, restrict, Branch, Recorder, SearchError, SearchParams, SearchResult};
use crate::graph::{IndexedGraph, Vertex};
use crate::oracles::{DirectionOracle, QueryKind, QueryResponse};
use crate::vset::VertexSet;

/// `α = −1/log₂ p` for the larger of `p₁`, `1−p₁`.
pub fn tree_alpha(p1: f64) -> f64 {
    -1.0 / p1.max(1.0 - p1).log2()
}

/// Queries per median round: `⌈ρ·α·log₂ n⌉`.
pub fn tree_repetitions(n: usize, p1: f64, rho: f64) -> u64 {
    repetitions(rho, tree_alpha(p1) * (n.max(2) as f64).log2())
}

enum Block {
    Found(Vertex),
    Answers(Vec<Vertex>),
}

fn query_block<O: DirectionOracle>(
    oracle: &mut O,
    rec: &mut Recorder,
    v: Vertex,
    k: u64,
    size: usize,
    ignore_found_at: Option<Vertex>,
) -> Result<Block, SearchError> {
    let mut answers = Vec::with_capacity(k as usize);
    for _ in 0..k {
        rec.charge()?;
        let r = oracle.direction(v);
        rec.log(QueryKind::Direction, &[v], None, r, size);
        match r {
            QueryResponse::Found { .. } if ignore_found_at != Some(v) => return Ok(Block::Found(v)),
            QueryResponse::Found { .. } => {}
            QueryResponse::Direction { to } => answers.push(to),
            other => return Err(SearchError::UnexpectedResponse(other)),
        }
    }
    Ok(Block::Answers(answers))
}

fn most_frequent(answers: &[Vertex]) -> Option<Vertex> {
    let mut sorted = answers.to_vec();
    sorted.sort_unstable();
    let mut best: Option<(usize, Vertex)> = None;
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|&&x| x == sorted[i]).count();
        if best.is_none_or(|(c, _)| j > c) {
            best = Some((j, sorted[i]));
        }
        i += j;
    }
    best.map(|(_, u)| u)
}

/// Finds both targets of a biased two-target oracle on a tree.
///
/// Phase 1 starts from `V`, queries the Γ-median `v₁` once, then repeats
/// `⌈ρ·α·log₂ n⌉` queries per median, trusting any answer that leaves the
/// side of `v₁` and otherwise the unanimous answer toward it. Phase 2 repeats
/// from `V` minus the first target, trusting any answer that avoids the first
/// target's side. Returns `(first found, second found)`.
pub fn tree_two_target_search<O: DirectionOracle>(
    ig: &IndexedGraph,
    oracle: &mut O,
    p1: f64,
    params: &SearchParams,
) -> SearchResult<(Vertex, Vertex)> {
    let mut rec = Recorder::new(params);
    if let Err(e) = params.validate() {
        return rec.fail(e);
    }
    if !ig.graph().is_tree() {
        return rec.fail(SearchError::NotATree);
    }
    let n = ig.n();
    if n < 2 {
        return rec.fail(SearchError::InvalidParams("two targets need n ≥ 2".into()));
    }
    let k = tree_repetitions(n, p1, params.rho);
    let mut policy = params.gamma_policy();
    macro_rules! median {
        ($s:expr) => {
            match policy.select(ig, $s) {
                Ok(v) => v,
                Err(e) => return rec.fail(e.into()),
            }
        };
    }
    macro_rules! block {
        ($v:expr, $k:expr, $size:expr, $ign:expr) => {
            match query_block(oracle, &mut rec, $v, $k, $size, $ign) {
                Ok(b) => b,
                Err(e) => return rec.fail(e),
            }
        };
    }

    // Phase 1.
    let mut s = VertexSet::full(n);
    let v1 = median!(&s);
    let mut t0 = None;
    match block!(v1, 1, n, None) {
        Block::Found(v) => {
            rec.round(1, v, n, &VertexSet::singleton(n, v), Branch::Found);
            t0 = Some(v);
        }
        Block::Answers(a) => {
            restrict(ig, &mut s, v1, a[0]);
            rec.round(1, v1, n, &s, Branch::Direct);
        }
    }
    while t0.is_none() {
        if s.is_empty() {
            return rec.fail(SearchError::CandidatesExhausted);
        }
        if s.len() == 1 {
            t0 = s.first();
            break;
        }
        let before = s.len();
        let v = median!(&s);
        let answers = match block!(v, k, before, None) {
            Block::Found(v) => {
                rec.round(1, v, before, &VertexSet::singleton(n, v), Branch::Found);
                t0 = Some(v);
                break;
            }
            Block::Answers(a) => a,
        };
        let toward_v1 = next_hop(ig, v, v1);
        let away = toward_v1.and_then(|h| answers.iter().copied().find(|&u| u != h));
        let (u, branch) = match (away, toward_v1) {
            (Some(u), _) => (u, Branch::Deterministic),
            (None, Some(h)) => (h, Branch::Majority),
            (None, None) => (most_frequent(&answers).expect("no Found means k answers"), Branch::Majority),
        };
        restrict(ig, &mut s, v, u);
        rec.round(1, v, before, &s, branch);
    }
    let t0 = t0.expect("phase 1 ends with a target");

    // Phase 2.
    let mut s = VertexSet::full(n);
    s.remove(t0);
    rec.round(2, t0, n, &s, Branch::Reset);
    loop {
        if s.is_empty() {
            return rec.fail(SearchError::CandidatesExhausted);
        }
        if s.len() == 1 {
            let t = s.first().expect("nonempty");
            return rec.done((t0, t), vec![t0, t]);
        }
        let before = s.len();
        let v = median!(&s);
        let answers = match block!(v, k, before, Some(t0)) {
            Block::Found(v) => {
                rec.round(2, v, before, &VertexSet::singleton(n, v), Branch::Found);
                return rec.done((t0, v), vec![t0, v]);
            }
            Block::Answers(a) => a,
        };
        let choice = match next_hop(ig, v, t0) {
            Some(h) => Some(
                answers
                    .iter()
                    .copied()
                    .find(|&u| u != h)
                    .map_or((h, Branch::Majority), |u| (u, Branch::Deterministic)),
            ),
            // At t0 itself every directional answer points to the other target.
            None => answers.first().map(|&u| (u, Branch::Deterministic)),
        };
        match choice {
            Some((u, branch)) => {
                restrict(ig, &mut s, v, u);
                rec.round(2, v, before, &s, branch);
            }
            None => rec.round(2, v, before, &s, Branch::Dropped),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use crate::oracles::{OracleConfig, TargetOracle, TiePolicy};

    #[test]
    fn alpha_values() {
        assert!((tree_alpha(0.75) - 2.409).abs() < 1e-3);
        assert!((tree_alpha(0.7) - 1.943).abs() < 1e-3);
        assert_eq!(tree_alpha(0.3), tree_alpha(0.7));
        assert_eq!(tree_repetitions(256, 0.7, 1.0), 16);
    }

    #[test]
    fn star_leaves() {
        let star = Graph::from_indexed(9, &(1..9).map(|i| (0, i, 1.0)).collect::<Vec<_>>()).unwrap();
        let ig = IndexedGraph::new(star);
        for seed in 0..20 {
            let cfg = OracleConfig::two(3, 7, 0.7, TiePolicy::Equiprobable, seed).unwrap();
            let mut o = TargetOracle::new(&ig, cfg).unwrap();
            // At n = 9 a block of ⌈α·log₂ 9⌉ = 7 answers is unanimous toward
            // the found target often enough to matter; boost the block.
            let params = SearchParams {
                rho: 3.0,
                ..Default::default()
            };
            let ((a, b), tr) = tree_two_target_search(&ig, &mut o, 0.7, &params).unwrap();
            let mut got = [a, b];
            got.sort_unstable();
            assert_eq!(got, [3, 7]);
            for r in tr.rounds.iter().filter(|r| r.branch != Branch::Reset && r.branch != Branch::Found) {
                assert_eq!(r.median, 0);
            }
        }
    }

    #[test]
    fn rejects_non_trees() {
        let tri = Graph::from_indexed(3, &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        let ig = IndexedGraph::new(tri);
        let cfg = OracleConfig::two(0, 1, 0.7, TiePolicy::Equiprobable, 0).unwrap();
        let mut o = TargetOracle::new(&ig, cfg).unwrap();
        let err = tree_two_target_search(&ig, &mut o, 0.7, &SearchParams::default()).unwrap_err();
        assert_eq!(err.error, SearchError::NotATree);
    }

    #[test]
    fn most_frequent_ties_to_smallest() {
        assert_eq!(most_frequent(&[5, 3, 5, 3, 1]), Some(3));
        assert_eq!(most_frequent(&[]), None);
    }
}
