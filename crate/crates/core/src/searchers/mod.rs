//! Detection algorithms and their transcripts.
//!
//! Every searcher keeps a candidates' set `S`, queries a Γ-median of `S`, and
//! shrinks `S` to the cone of the trusted answer. Failures carry the partial
//! transcript so callers can still audit query counts.

mod alg1;
mod alg23;
mod gamma;
mod noisy;
mod tree;

pub use alg1::{algorithm1_constant, algorithm1_repetitions, algorithm1_second_target};
pub use alg23::{algorithm2_direction_distance, algorithm3_vertex_edge};
pub use gamma::{
    gamma_binary_search, gamma_probe_search, gamma_probe_search_two_direction, restricted_set_search,
};
pub use noisy::noisy_first_target;
pub use tree::{tree_alpha, tree_repetitions, tree_two_target_search};

use crate::graph::{IndexedGraph, Vertex};
use crate::oracles::{OracleError, QueryCounts, QueryKind, QueryResponse};
use crate::potentials::{ChoiceRule, MedianPolicy, Potential, PotentialError};
use crate::vset::VertexSet;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SearchError {
    #[error("query budget of {0} exhausted")]
    BudgetExceeded(u64),
    #[error("candidate set became empty")]
    CandidatesExhausted,
    #[error("graph is not a tree")]
    NotATree,
    #[error("no branch accepted at median {0} after a retry")]
    NoBranchAccepted(Vertex),
    #[error("first target not verified after {0} restarts")]
    FirstTargetNotFound(usize),
    #[error("invalid search parameters: {0}")]
    InvalidParams(String),
    #[error("unexpected oracle response {0:?}")]
    UnexpectedResponse(QueryResponse),
    #[error(transparent)]
    Median(#[from] PotentialError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchParams {
    /// Approximate-median slack, `0 ≤ ε < 1`.
    pub epsilon: f64,
    /// Multiplier on every `⌈log₂ n⌉` repetition block.
    pub rho: f64,
    pub seed: u64,
    /// Safety cutoff on total queries.
    pub budget: u64,
    pub rule: ChoiceRule,
    /// Keep per-query records; round summaries and counts are always kept.
    pub keep_records: bool,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            epsilon: 0.0,
            rho: 1.0,
            seed: 0,
            budget: 10_000_000,
            rule: ChoiceRule::Best,
            keep_records: true,
        }
    }
}

impl SearchParams {
    pub fn gamma_policy(&self) -> MedianPolicy {
        MedianPolicy::new(Potential::Gamma, self.epsilon, self.rule.clone())
    }

    fn validate(&self) -> Result<(), SearchError> {
        if !(0.0..1.0).contains(&self.epsilon) {
            return Err(SearchError::InvalidParams(format!("epsilon {} outside [0,1)", self.epsilon)));
        }
        if !(self.rho > 0.0) {
            return Err(SearchError::InvalidParams(format!("rho {} must be positive", self.rho)));
        }
        if self.budget == 0 {
            return Err(SearchError::InvalidParams("budget must be positive".into()));
        }
        Ok(())
    }
}

/// `⌈log₂ n⌉`, with `log₂ 1 = 0`.
pub fn ceil_log2(n: usize) -> u64 {
    (n.max(1) as f64).log2().ceil() as u64
}

/// `⌈ρ·x⌉`, at least 1.
pub fn repetitions(rho: f64, x: f64) -> u64 {
    ((rho * x).ceil() as u64).max(1)
}

/// `⌈log₂ n / (1 − log₂(1+ε))⌉`.
pub fn approx_rounds_cap(n: usize, epsilon: f64) -> u64 {
    ((n.max(1) as f64).log2() / (1.0 - (1.0 + epsilon).log2())).ceil() as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QueryDescriptor {
    #[serde(rename = "type")]
    pub kind: QueryKind,
    pub vertices: Vec<Vertex>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub set_size_arg: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub step: u64,
    pub query: QueryDescriptor,
    pub response: QueryResponse,
    /// `|S|` after the update that followed this query, or the unchanged
    /// size for queries inside a repetition block.
    pub candidate_size: usize,
}

/// How a round's candidate-set update was justified.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    /// Single truthful answer (Γ search, restricted-set search).
    Direct,
    /// An answer that cannot come from the known target.
    Deterministic,
    /// Most frequent or unanimous answer.
    Majority,
    /// Edge or distance verification accepted a neighbour.
    Verified,
    /// Median discarded as a non-target with no directional information.
    Dropped,
    Found,
    /// Candidate set reset (restart or new phase) without an update.
    Reset,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundSummary {
    pub phase: u32,
    pub median: Vertex,
    pub size_before: usize,
    pub size_after: usize,
    pub branch: Branch,
    pub queries: u64,
    #[serde(skip)]
    pub candidates: Option<VertexSet>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub records: Vec<TranscriptRecord>,
    pub rounds: Vec<RoundSummary>,
    pub counts: QueryCounts,
    pub found: Vec<Vertex>,
}

impl Transcript {
    pub fn total_queries(&self) -> u64 {
        self.counts.total()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.records).expect("transcript serializes")
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{error}")]
pub struct SearchFailure {
    pub error: SearchError,
    pub transcript: Transcript,
}

pub type SearchResult<T> = Result<(T, Transcript), SearchFailure>;

/// Query bookkeeping shared by all searchers.
struct Recorder {
    keep: bool,
    budget: u64,
    t: Transcript,
    round_start: u64,
}

impl Recorder {
    fn new(params: &SearchParams) -> Self {
        Recorder {
            keep: params.keep_records,
            budget: params.budget,
            t: Transcript::default(),
            round_start: 0,
        }
    }

    fn charge(&self) -> Result<(), SearchError> {
        if self.t.counts.total() >= self.budget {
            Err(SearchError::BudgetExceeded(self.budget))
        } else {
            Ok(())
        }
    }

    fn log(&mut self, kind: QueryKind, vertices: &[Vertex], set_size_arg: Option<usize>, response: QueryResponse, size: usize) {
        self.t.counts.bump(kind);
        if self.keep {
            self.t.records.push(TranscriptRecord {
                step: self.t.counts.total(),
                query: QueryDescriptor {
                    kind,
                    vertices: vertices.to_vec(),
                    set_size_arg,
                },
                response,
                candidate_size: size,
            });
        }
    }

    /// Rewrites the candidate size of the latest record after an update.
    fn settle(&mut self, size: usize) {
        if let Some(r) = self.t.records.last_mut() {
            r.candidate_size = size;
        }
    }

    fn round(&mut self, phase: u32, median: Vertex, before: usize, s: &VertexSet, branch: Branch) {
        let total = self.t.counts.total();
        self.settle(s.len());
        self.t.rounds.push(RoundSummary {
            phase,
            median,
            size_before: before,
            size_after: s.len(),
            branch,
            queries: total - self.round_start,
            candidates: Some(s.clone()),
        });
        self.round_start = total;
    }

    fn fail<T>(self, error: SearchError) -> SearchResult<T> {
        Err(SearchFailure {
            error,
            transcript: self.t,
        })
    }

    fn done<T>(mut self, value: T, found: Vec<Vertex>) -> SearchResult<T> {
        self.t.found = found;
        Ok((value, self.t))
    }
}

/// Neighbour of `v` toward `x` on a shortest path (smallest id when several).
fn next_hop(ig: &IndexedGraph, v: Vertex, x: Vertex) -> Option<Vertex> {
    ig.graph()
        .neighbors(v)
        .iter()
        .find(|&&(u, w)| ig.in_cone(v, u, w, x))
        .map(|&(u, _)| u)
}

fn restrict(ig: &IndexedGraph, s: &mut VertexSet, v: Vertex, u: Vertex) {
    let cone = ig.cone(v, u).expect("oracle answers name neighbours");
    s.intersect_with(cone);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_caps() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(1024), 10);
        assert_eq!(ceil_log2(1000), 10);
        assert_eq!(approx_rounds_cap(512, 0.5), 22);
        assert_eq!(approx_rounds_cap(64, 0.5), 15);
        assert_eq!(approx_rounds_cap(256, 0.0), 8);
        assert_eq!(repetitions(1.0, 15.2), 16);
    }

    #[test]
    fn params_validation() {
        let mut p = SearchParams::default();
        assert!(p.validate().is_ok());
        p.epsilon = 1.0;
        assert!(p.validate().is_err());
        p.epsilon = 0.2;
        p.budget = 0;
        assert!(p.validate().is_err());
    }
}
