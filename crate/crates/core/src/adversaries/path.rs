//! Two hidden targets on a path, one per half.
//!
//! With `h = ⌊n/2⌋`, the left half is `0..h` and the right half `h..n`. A
//! query at `j < h` answers `j+1` (toward a right target) and otherwise `j−1`
//! (toward a left target); a half's target is fixed only when its last
//! unqueried vertex is queried.

use super::{violated, AdversaryError, AdversaryGame};
use crate::graph::{Graph, IndexedGraph, Vertex};
use crate::oracles::{DirectionOracle, QueryResponse};
use crate::vset::VertexSet;

#[derive(Debug)]
pub struct PathTwoTargetGame {
    ig: IndexedGraph,
    queried: VertexSet,
    /// Fixed targets of the left (index 0) and right (index 1) halves.
    fixed: [Option<Vertex>; 2],
    history: Vec<(Vertex, QueryResponse)>,
}

impl PathTwoTargetGame {
    pub fn new(n: usize) -> Result<Self, AdversaryError> {
        if n < 4 {
            return Err(AdversaryError::InvalidSize(format!("path game needs n ≥ 4, got {n}")));
        }
        let edges: Vec<_> = (0..n - 1).map(|i| (i, i + 1, 1.0)).collect();
        Ok(PathTwoTargetGame {
            ig: IndexedGraph::new(Graph::from_indexed(n, &edges).expect("path is valid")),
            queried: VertexSet::empty(n),
            fixed: [None, None],
            history: Vec::new(),
        })
    }

    fn half_len(&self) -> usize {
        self.ig.n() / 2
    }

    fn side(&self, v: Vertex) -> usize {
        (v >= self.half_len()) as usize
    }

    fn range(&self, side: usize) -> std::ops::Range<Vertex> {
        if side == 0 {
            0..self.half_len()
        } else {
            self.half_len()..self.ig.n()
        }
    }

    /// Placements still open for the given half (`0` left, `1` right).
    pub fn candidates(&self, side: usize) -> Vec<Vertex> {
        match self.fixed[side] {
            Some(t) => vec![t],
            None => self.range(side).filter(|&x| !self.queried.contains(x)).collect(),
        }
    }

    /// Queries needed to reveal one target (`⌊n/2⌋`) and both (`n−2`).
    pub fn floors(&self) -> (usize, usize) {
        (self.half_len(), self.ig.n() - 2)
    }
}

impl DirectionOracle for PathTwoTargetGame {
    fn direction(&mut self, v: Vertex) -> QueryResponse {
        let side = self.side(v);
        let last_open = self.fixed[side].is_none() && self.candidates(side) == [v];
        if last_open {
            self.fixed[side] = Some(v);
        }
        self.queried.insert(v);
        let r = if self.fixed[side] == Some(v) {
            QueryResponse::Found { target: side }
        } else if side == 0 {
            QueryResponse::Direction { to: v + 1 }
        } else {
            QueryResponse::Direction { to: v - 1 }
        };
        self.history.push((v, r));
        r
    }
}

impl AdversaryGame for PathTwoTargetGame {
    fn name(&self) -> &'static str {
        "path-two-target"
    }

    fn graph(&self) -> &Graph {
        self.ig.graph()
    }

    /// `⌊n/2⌋`, the floor for revealing one target.
    fn lower_bound(&self) -> usize {
        self.half_len()
    }

    fn queries(&self) -> usize {
        self.history.len()
    }

    fn committed(&self) -> Vec<Vertex> {
        self.fixed.iter().flatten().copied().collect()
    }

    /// Every open pair `(t₁, t₂)` must explain every answer.
    fn certify(&self) -> Result<(), AdversaryError> {
        let left = self.candidates(0);
        let right = self.candidates(1);
        if left.is_empty() || right.is_empty() {
            return violated("a half has no placement left".into());
        }
        for &t1 in &left {
            for &t2 in &right {
                for &(v, r) in &self.history {
                    let ok = match r {
                        QueryResponse::Found { target } => [t1, t2][target] == v,
                        QueryResponse::Direction { to } => {
                            let c = self.ig.cone(v, to).expect("answer is adjacent");
                            v != t1 && v != t2 && (c.contains(t1) || c.contains(t2))
                        }
                        _ => false,
                    };
                    if !ok {
                        return violated(format!("answer {r:?} at {v} inconsistent with ({t1}, {t2})"));
                    }
                }
            }
        }
        Ok(())
    }
}
