//! Lower-bound constructions as stateful responders.
//!
//! Each game owns its graph, answers queries as a scripted adversary, places
//! targets lazily, and can audit itself: [`AdversaryGame::certify`] checks that
//! some target placement still makes every past answer valid.

mod cycle;
mod grid;
mod path;
mod phi_trap;

pub use cycle::{CycleAntipodalGame, CycleTwoDirectionGame};
pub use grid::{grid_diag_graph, grid_ids, window_prober, GridAdditiveGame, MarkingGame, ProbeReport};
pub use path::PathTwoTargetGame;
pub use phi_trap::{phi_trap_eq1, phi_trap_eq2, star_paths_graph, star_paths_id, PhiTrapGame, PhiTrapReport};

use crate::graph::{Graph, Vertex};
use crate::potentials::PotentialError;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AdversaryError {
    #[error("invalid size: {0}")]
    InvalidSize(String),
    #[error(transparent)]
    Script(#[from] PotentialError),
    #[error("certificate violated: {0}")]
    CertificateViolated(String),
}

pub trait AdversaryGame {
    fn name(&self) -> &'static str;
    fn graph(&self) -> &Graph;
    /// Minimum number of queries the construction claims.
    fn lower_bound(&self) -> usize;
    /// Queries answered so far, repeats included.
    fn queries(&self) -> usize;
    /// Targets fixed so far; empty while placement is still lazy.
    fn committed(&self) -> Vec<Vertex>;
    /// Checks the consistency certificate against the current history.
    fn certify(&self) -> Result<(), AdversaryError>;
}

pub const GAME_NAMES: [&str; 6] = [
    "grid-additive",
    "mul-marking",
    "phi-trap",
    "cycle-antipodal",
    "cycle-twodir",
    "path-two-target",
];

fn violated<T>(msg: String) -> Result<T, AdversaryError> {
    Err(AdversaryError::CertificateViolated(msg))
}

fn cycle_graph(n: usize) -> Graph {
    let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n, 1.0)).collect();
    Graph::from_indexed(n, &edges).expect("cycle is valid")
}
