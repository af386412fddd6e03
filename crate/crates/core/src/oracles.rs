//! Truthful probabilistic query oracles.
//!
//! Each oracle owns its RNG stream. A query at `v` samples target index `i`
//! with probability `p_i`; if `v = t_i` the answer is `Found(i)`, otherwise a
//! neighbour from `E_{t_i}(v)` chosen by the tie policy. Target indices in
//! responses are 0-based positions in the configured target list.

use crate::graph::{GraphError, IndexedGraph, Vertex};
use crate::vset::VertexSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum QueryResponse {
    Found { target: usize },
    Direction { to: Vertex },
    DirectionDistance { to: Vertex, dist: f64 },
    EdgeAnswer { yes: bool },
    TwoDirections { a: Vertex, b: Vertex },
}

impl QueryResponse {
    pub fn two(a: Vertex, b: Vertex) -> Self {
        QueryResponse::TwoDirections {
            a: a.min(b),
            b: a.max(b),
        }
    }

    pub fn is_found(&self) -> bool {
        matches!(self, QueryResponse::Found { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QueryKind {
    Direction,
    DirectionDistance,
    EdgeDirection,
    TwoDirection,
    RestrictedSet,
}

impl QueryKind {
    pub const ALL: [QueryKind; 5] = [
        QueryKind::Direction,
        QueryKind::DirectionDistance,
        QueryKind::EdgeDirection,
        QueryKind::TwoDirection,
        QueryKind::RestrictedSet,
    ];

    pub fn name(self) -> &'static str {
        match self {
            QueryKind::Direction => "direction",
            QueryKind::DirectionDistance => "direction_distance",
            QueryKind::EdgeDirection => "edge_direction",
            QueryKind::TwoDirection => "two_direction",
            QueryKind::RestrictedSet => "restricted_set",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

/// Per-kind query totals.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct QueryCounts([u64; 5]);

impl QueryCounts {
    pub fn bump(&mut self, kind: QueryKind) {
        self.0[kind.index()] += 1;
    }

    pub fn get(&self, kind: QueryKind) -> u64 {
        self.0[kind.index()]
    }

    pub fn total(&self) -> u64 {
        self.0.iter().sum()
    }

    /// Nonzero kinds in declaration order.
    pub fn nonzero(&self) -> impl Iterator<Item = (QueryKind, u64)> + '_ {
        QueryKind::ALL
            .into_iter()
            .map(|k| (k, self.get(k)))
            .filter(|&(_, c)| c > 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TiePolicy {
    Equiprobable,
    AdversarialSmallestId,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("oracle needs at least one target")]
    NoTargets,
    #[error("targets must be distinct")]
    DuplicateTargets,
    #[error("target {0} outside the graph")]
    TargetOutOfRange(Vertex),
    #[error("probabilities must be positive, one per target, and sum to 1: {0:?}")]
    InvalidProbabilities(Vec<f64>),
    #[error("noise parameter p = {0} must lie in (1/2, 1]")]
    InvalidNoise(f64),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    pub targets: Vec<Vertex>,
    pub probs: Vec<f64>,
    pub tie: TiePolicy,
    pub seed: u64,
}

impl OracleConfig {
    pub fn new(
        targets: Vec<Vertex>,
        probs: Vec<f64>,
        tie: TiePolicy,
        seed: u64,
    ) -> Result<Self, OracleError> {
        if targets.is_empty() {
            return Err(OracleError::NoTargets);
        }
        let mut sorted = targets.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != targets.len() {
            return Err(OracleError::DuplicateTargets);
        }
        let sum: f64 = probs.iter().sum();
        if probs.len() != targets.len() || probs.iter().any(|&p| p <= 0.0) || (sum - 1.0).abs() > 1e-9 {
            return Err(OracleError::InvalidProbabilities(probs));
        }
        Ok(OracleConfig {
            targets,
            probs,
            tie,
            seed,
        })
    }

    pub fn single(t: Vertex, seed: u64) -> Self {
        OracleConfig {
            targets: vec![t],
            probs: vec![1.0],
            tie: TiePolicy::AdversarialSmallestId,
            seed,
        }
    }

    /// Two targets with `p₂ = 1 − p₁`.
    pub fn two(t1: Vertex, t2: Vertex, p1: f64, tie: TiePolicy, seed: u64) -> Result<Self, OracleError> {
        Self::new(vec![t1, t2], vec![p1, 1.0 - p1], tie, seed)
    }
}

/// Answers direction queries. Implemented by truthful oracles and by
/// adversary responders alike.
pub trait DirectionOracle {
    fn direction(&mut self, v: Vertex) -> QueryResponse;

    /// Called by searchers after each candidate-set update; adversarial
    /// noise may use it as the belief set.
    fn observe_candidates(&mut self, _s: &VertexSet) {}
}

pub trait DirectionDistanceOracle {
    fn direction_distance(&mut self, v: Vertex) -> QueryResponse;
}

pub trait EdgeOracle {
    fn edge_direction(&mut self, v: Vertex, u: Vertex) -> Result<QueryResponse, OracleError>;
}

pub trait TwoDirectionOracle {
    fn two_direction(&mut self, v: Vertex) -> QueryResponse;
}

pub trait RestrictedSetOracle {
    fn restricted(&mut self, v: Vertex, s: &VertexSet) -> QueryResponse;
}

/// The multi-target probabilistic oracle; serves vertex-direction,
/// direction-distance, edge-direction and two-direction queries.
#[derive(Debug, Clone)]
pub struct TargetOracle<'g> {
    ig: &'g IndexedGraph,
    cfg: OracleConfig,
    rng: ChaCha8Rng,
    last_sampled: Option<usize>,
    counts: QueryCounts,
}

impl<'g> TargetOracle<'g> {
    pub fn new(ig: &'g IndexedGraph, cfg: OracleConfig) -> Result<Self, OracleError> {
        if let Some(&t) = cfg.targets.iter().find(|&&t| t >= ig.n()) {
            return Err(OracleError::TargetOutOfRange(t));
        }
        let cfg = OracleConfig::new(cfg.targets, cfg.probs, cfg.tie, cfg.seed)?;
        Ok(TargetOracle {
            ig,
            rng: ChaCha8Rng::seed_from_u64(cfg.seed),
            cfg,
            last_sampled: None,
            counts: QueryCounts::default(),
        })
    }

    pub fn config(&self) -> &OracleConfig {
        &self.cfg
    }

    pub fn targets(&self) -> &[Vertex] {
        &self.cfg.targets
    }

    /// Target index drawn by the most recent query.
    pub fn last_sampled(&self) -> Option<usize> {
        self.last_sampled
    }

    pub fn counts(&self) -> QueryCounts {
        self.counts
    }

    fn sample_index(&mut self) -> usize {
        let i = if self.cfg.probs.len() == 1 {
            0
        } else {
            let x: f64 = self.rng.gen();
            let mut acc = 0.0;
            let mut pick = self.cfg.probs.len() - 1;
            for (i, &p) in self.cfg.probs.iter().enumerate() {
                acc += p;
                if x < acc {
                    pick = i;
                    break;
                }
            }
            pick
        };
        self.last_sampled = Some(i);
        i
    }

    /// Neighbour from `E_t(v)` per the tie policy; `t ≠ v`.
    fn pick_edge(&mut self, v: Vertex, t: Vertex) -> Vertex {
        let ig = self.ig;
        let mut edges = ig
            .graph()
            .neighbors(v)
            .iter()
            .filter(|&&(u, w)| ig.in_cone(v, u, w, t))
            .map(|&(u, _)| u);
        match self.cfg.tie {
            TiePolicy::AdversarialSmallestId => edges.next().expect("E_t(v) is nonempty for t ≠ v"),
            TiePolicy::Equiprobable => {
                let all: Vec<Vertex> = edges.collect();
                all[self.rng.gen_range(0..all.len())]
            }
        }
    }
}

impl DirectionOracle for TargetOracle<'_> {
    fn direction(&mut self, v: Vertex) -> QueryResponse {
        self.counts.bump(QueryKind::Direction);
        let i = self.sample_index();
        let t = self.cfg.targets[i];
        if v == t {
            QueryResponse::Found { target: i }
        } else {
            QueryResponse::Direction { to: self.pick_edge(v, t) }
        }
    }
}

impl DirectionDistanceOracle for TargetOracle<'_> {
    fn direction_distance(&mut self, v: Vertex) -> QueryResponse {
        self.counts.bump(QueryKind::DirectionDistance);
        let i = self.sample_index();
        let t = self.cfg.targets[i];
        if v == t {
            QueryResponse::Found { target: i }
        } else {
            QueryResponse::DirectionDistance {
                to: self.pick_edge(v, t),
                dist: self.ig.dist().get(v, t),
            }
        }
    }
}

impl EdgeOracle for TargetOracle<'_> {
    fn edge_direction(&mut self, v: Vertex, u: Vertex) -> Result<QueryResponse, OracleError> {
        let w = self
            .ig
            .graph()
            .weight(v, u)
            .ok_or(GraphError::NotAdjacent { v, u })?;
        self.counts.bump(QueryKind::EdgeDirection);
        let i = self.sample_index();
        let t = self.cfg.targets[i];
        Ok(QueryResponse::EdgeAnswer {
            yes: self.ig.in_cone(v, u, w, t),
        })
    }
}

impl TwoDirectionOracle for TargetOracle<'_> {
    /// Reveals deterministically when `v` is a target; with a single target
    /// both components point toward it.
    fn two_direction(&mut self, v: Vertex) -> QueryResponse {
        self.counts.bump(QueryKind::TwoDirection);
        if let Some(i) = self.cfg.targets.iter().position(|&t| t == v) {
            self.last_sampled = Some(i);
            return QueryResponse::Found { target: i };
        }
        self.last_sampled = None;
        let t1 = self.cfg.targets[0];
        let t2 = *self.cfg.targets.get(1).unwrap_or(&t1);
        let a = self.pick_edge(v, t1);
        let b = self.pick_edge(v, t2);
        QueryResponse::two(a, b)
    }
}

/// Single-target oracle answering correctly with probability `p`, and with an
/// adversarially chosen neighbour otherwise.
#[derive(Debug, Clone)]
pub struct NoisyOracle<'g> {
    ig: &'g IndexedGraph,
    target: Vertex,
    p: f64,
    rng: ChaCha8Rng,
    belief: Option<VertexSet>,
    last_truthful: Option<bool>,
    counts: QueryCounts,
}

impl<'g> NoisyOracle<'g> {
    pub fn new(ig: &'g IndexedGraph, target: Vertex, p: f64, seed: u64) -> Result<Self, OracleError> {
        if !(p > 0.5 && p <= 1.0) {
            return Err(OracleError::InvalidNoise(p));
        }
        if target >= ig.n() {
            return Err(OracleError::TargetOutOfRange(target));
        }
        Ok(NoisyOracle {
            ig,
            target,
            p,
            rng: ChaCha8Rng::seed_from_u64(seed),
            belief: None,
            last_truthful: None,
            counts: QueryCounts::default(),
        })
    }

    pub fn register_belief(&mut self, s: Option<VertexSet>) {
        self.belief = s;
    }

    /// Whether the most recent answer came from the truthful branch.
    pub fn last_truthful(&self) -> Option<bool> {
        self.last_truthful
    }

    pub fn counts(&self) -> QueryCounts {
        self.counts
    }

    fn noise_answer(&self, v: Vertex) -> Vertex {
        let ig = self.ig;
        let nbrs = ig.graph().neighbors(v);
        if let Some(belief) = &self.belief {
            let cones = ig.cones_of(v);
            let mut best = 0;
            for k in 1..nbrs.len() {
                if cones[k].intersection_len(belief) > cones[best].intersection_len(belief) {
                    best = k;
                }
            }
            return nbrs[best].0;
        }
        nbrs.iter()
            .find(|&&(u, w)| !ig.in_cone(v, u, w, self.target))
            .unwrap_or(&nbrs[0])
            .0
    }
}

impl DirectionOracle for NoisyOracle<'_> {
    fn direction(&mut self, v: Vertex) -> QueryResponse {
        self.counts.bump(QueryKind::Direction);
        let truthful = self.p >= 1.0 || self.rng.gen::<f64>() < self.p;
        self.last_truthful = Some(truthful);
        if v == self.target && truthful {
            return QueryResponse::Found { target: 0 };
        }
        if self.ig.graph().degree(v) == 0 {
            return QueryResponse::Found { target: 0 };
        }
        let to = if truthful {
            let ig = self.ig;
            ig.graph()
                .neighbors(v)
                .iter()
                .find(|&&(u, w)| ig.in_cone(v, u, w, self.target))
                .expect("E_t(v) is nonempty for t ≠ v")
                .0
        } else {
            self.noise_answer(v)
        };
        QueryResponse::Direction { to }
    }

    fn observe_candidates(&mut self, s: &VertexSet) {
        if self.belief.is_some() {
            self.belief = Some(s.clone());
        }
    }
}

/// Deterministic restricted-set oracle over any number of targets.
///
/// A query `(v, S)` points toward some target of `T ∩ S` (smallest qualifying
/// neighbour id), reveals when `v ∈ T ∩ S`, and answers the smallest-id
/// neighbour when `T ∩ S = ∅`.
#[derive(Debug, Clone)]
pub struct RestrictedOracle<'g> {
    ig: &'g IndexedGraph,
    targets: Vec<Vertex>,
    counts: QueryCounts,
}

impl<'g> RestrictedOracle<'g> {
    pub fn new(ig: &'g IndexedGraph, targets: Vec<Vertex>) -> Result<Self, OracleError> {
        if targets.is_empty() {
            return Err(OracleError::NoTargets);
        }
        if let Some(&t) = targets.iter().find(|&&t| t >= ig.n()) {
            return Err(OracleError::TargetOutOfRange(t));
        }
        let mut sorted = targets.clone();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != targets.len() {
            return Err(OracleError::DuplicateTargets);
        }
        Ok(RestrictedOracle {
            ig,
            targets,
            counts: QueryCounts::default(),
        })
    }

    pub fn targets(&self) -> &[Vertex] {
        &self.targets
    }

    pub fn counts(&self) -> QueryCounts {
        self.counts
    }
}

impl RestrictedSetOracle for RestrictedOracle<'_> {
    fn restricted(&mut self, v: Vertex, s: &VertexSet) -> QueryResponse {
        self.counts.bump(QueryKind::RestrictedSet);
        if let Some(i) = self.targets.iter().position(|&t| t == v && s.contains(t)) {
            return QueryResponse::Found { target: i };
        }
        let inside: Vec<Vertex> = self.targets.iter().copied().filter(|&t| s.contains(t)).collect();
        let ig = self.ig;
        let nbrs = ig.graph().neighbors(v);
        if nbrs.is_empty() {
            // Only reachable on the one-vertex graph, where v is the sole vertex.
            return QueryResponse::Direction { to: v };
        }
        let to = nbrs
            .iter()
            .find(|&&(u, w)| inside.iter().any(|&t| ig.in_cone(v, u, w, t)))
            .unwrap_or(&nbrs[0])
            .0;
        QueryResponse::Direction { to }
    }
}

/// Whether `resp` to a query at `v` is truthful for target `t`.
pub fn response_sound(ig: &IndexedGraph, v: Vertex, t: Vertex, resp: &QueryResponse) -> bool {
    match *resp {
        QueryResponse::Found { .. } => v == t,
        QueryResponse::Direction { to } => ig.cone(v, to).is_ok_and(|c| c.contains(t)),
        QueryResponse::DirectionDistance { to, dist } => {
            ig.cone(v, to).is_ok_and(|c| c.contains(t)) && crate::graph::dist_eq(dist, ig.dist().get(v, t))
        }
        QueryResponse::EdgeAnswer { .. } | QueryResponse::TwoDirections { .. } => true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;

    fn path(n: usize) -> IndexedGraph {
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        IndexedGraph::new(Graph::from_indexed(n, &edges).unwrap())
    }

    fn cycle(n: usize) -> IndexedGraph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
        IndexedGraph::new(Graph::from_indexed(n, &edges).unwrap())
    }

    #[test]
    fn config_validation() {
        assert_eq!(
            OracleConfig::new(vec![], vec![], TiePolicy::Equiprobable, 0),
            Err(OracleError::NoTargets)
        );
        assert_eq!(
            OracleConfig::new(vec![1, 1], vec![0.5, 0.5], TiePolicy::Equiprobable, 0),
            Err(OracleError::DuplicateTargets)
        );
        assert!(OracleConfig::two(0, 1, 1.0, TiePolicy::Equiprobable, 0).is_err());
        assert!(OracleConfig::two(0, 1, 0.7, TiePolicy::Equiprobable, 0).is_ok());
    }

    #[test]
    fn single_target_points_along_path() {
        let ig = path(6);
        let mut o = TargetOracle::new(&ig, OracleConfig::single(4, 1)).unwrap();
        for _ in 0..20 {
            assert_eq!(o.direction(1), QueryResponse::Direction { to: 2 });
        }
        assert_eq!(o.direction(4), QueryResponse::Found { target: 0 });
        assert_eq!(
            o.direction_distance(1),
            QueryResponse::DirectionDistance { to: 2, dist: 3.0 }
        );
        assert_eq!(o.edge_direction(1, 2), Ok(QueryResponse::EdgeAnswer { yes: true }));
        assert!(matches!(o.edge_direction(1, 3), Err(OracleError::Graph(_))));
        assert_eq!(o.counts().total(), 23);
    }

    #[test]
    fn two_direction_on_cycle() {
        let ig = cycle(8);
        let cfg = OracleConfig::two(0, 4, 0.5, TiePolicy::AdversarialSmallestId, 3).unwrap();
        let mut o = TargetOracle::new(&ig, cfg).unwrap();
        assert_eq!(o.two_direction(2), QueryResponse::two(1, 3));
        assert_eq!(o.two_direction(4), QueryResponse::Found { target: 1 });
        // Same side: the pair collapses.
        let cfg = OracleConfig::two(3, 4, 0.5, TiePolicy::AdversarialSmallestId, 3).unwrap();
        let mut o = TargetOracle::new(&ig, cfg).unwrap();
        assert_eq!(o.two_direction(1), QueryResponse::two(2, 2));
    }

    #[test]
    fn noisy_validation_and_totality() {
        let ig = path(5);
        assert_eq!(NoisyOracle::new(&ig, 0, 0.5, 0).unwrap_err(), OracleError::InvalidNoise(0.5));
        assert!(NoisyOracle::new(&ig, 0, 1.1, 0).is_err());
        let mut o = NoisyOracle::new(&ig, 4, 1.0, 0).unwrap();
        assert_eq!(o.direction(2), QueryResponse::Direction { to: 3 });
        // At vertex 0 the only edge is correct, so noise must still return it.
        let mut o = NoisyOracle::new(&ig, 4, 0.51, 9).unwrap();
        for _ in 0..50 {
            assert_eq!(o.direction(0), QueryResponse::Direction { to: 1 });
        }
        // With a registered belief the noise branch heads for the bigger side.
        let mut o = NoisyOracle::new(&ig, 0, 0.6, 2).unwrap();
        o.register_belief(Some(VertexSet::full(5)));
        for _ in 0..200 {
            let r = o.direction(1);
            if o.last_truthful() == Some(false) {
                assert_eq!(r, QueryResponse::Direction { to: 2 });
            }
        }
    }

    #[test]
    fn restricted_set_rules() {
        let ig = path(9);
        let mut o = RestrictedOracle::new(&ig, vec![1, 7]).unwrap();
        let all = VertexSet::full(9);
        assert_eq!(o.restricted(4, &all), QueryResponse::Direction { to: 3 });
        assert_eq!(o.restricted(4, &VertexSet::singleton(9, 7)), QueryResponse::Direction { to: 5 });
        assert_eq!(o.restricted(4, &VertexSet::from_iter(9, [0, 8])), QueryResponse::Direction { to: 3 });
        assert_eq!(o.restricted(7, &all), QueryResponse::Found { target: 1 });
        // A target outside S is not revealed.
        assert_eq!(o.restricted(7, &VertexSet::singleton(9, 1)), QueryResponse::Direction { to: 6 });
    }

    #[test]
    fn identical_seeds_identical_sequences() {
        let ig = cycle(10);
        let cfg = OracleConfig::two(2, 7, 0.75, TiePolicy::Equiprobable, 77).unwrap();
        let run = |cfg: OracleConfig| {
            let mut o = TargetOracle::new(&ig, cfg).unwrap();
            (0..200).map(|k| o.direction(k % 10)).collect::<Vec<_>>()
        };
        assert_eq!(run(cfg.clone()), run(cfg));
    }
}
