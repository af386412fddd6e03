//! The 2×(n/2) grid with both diagonals in every cell, and its two adversaries.
//!
//! Column `i` (0-based) holds the top vertex `v_i` (id `2i`) and the bottom
//! vertex `u_i` (id `2i+1`).

use super::{violated, AdversaryError, AdversaryGame};
use crate::graph::{Graph, IndexedGraph, Vertex};
use crate::oracles::{DirectionOracle, QueryResponse};
use crate::vset::VertexSet;

/// `(v_i, u_i)` ids of column `i`.
pub fn grid_ids(i: usize) -> (Vertex, Vertex) {
    (2 * i, 2 * i + 1)
}

fn column(x: Vertex) -> usize {
    x / 2
}

fn opposite(x: Vertex) -> Vertex {
    x ^ 1
}

pub fn grid_diag_graph(n: usize) -> Result<Graph, AdversaryError> {
    if n < 4 || n % 2 != 0 {
        return Err(AdversaryError::InvalidSize(format!("grid needs even n ≥ 4, got {n}")));
    }
    let cols = n / 2;
    let mut edges = Vec::new();
    for i in 0..cols {
        let (v, u) = grid_ids(i);
        edges.push((v, u, 1.0));
        if i + 1 < cols {
            let (v2, u2) = grid_ids(i + 1);
            edges.extend([(v, v2, 1.0), (u, u2, 1.0), (v, u2, 1.0), (u, v2, 1.0)]);
        }
    }
    Ok(Graph::from_indexed(n, &edges).expect("grid is valid"))
}

/// Truthful next hop toward `t` (smallest id).
fn toward(ig: &IndexedGraph, v: Vertex, t: Vertex) -> QueryResponse {
    if v == t {
        return QueryResponse::Found { target: 0 };
    }
    let to = ig
        .graph()
        .neighbors(v)
        .iter()
        .find(|&&(u, w)| ig.in_cone(v, u, w, t))
        .expect("connected")
        .0;
    QueryResponse::Direction { to }
}

/// 1-additive adversary: every non-target query answers the opposite-row
/// vertex of the same column, which is within one of a shortest path to any
/// other vertex. The target is fixed only when a single vertex is unqueried.
#[derive(Debug)]
pub struct GridAdditiveGame {
    ig: IndexedGraph,
    queried: VertexSet,
    history: Vec<(Vertex, QueryResponse)>,
    target: Option<Vertex>,
}

impl GridAdditiveGame {
    pub fn new(n: usize) -> Result<Self, AdversaryError> {
        let g = grid_diag_graph(n)?;
        Ok(GridAdditiveGame {
            queried: VertexSet::empty(n),
            ig: IndexedGraph::new(g),
            history: Vec::new(),
            target: None,
        })
    }

    pub fn indexed(&self) -> &IndexedGraph {
        &self.ig
    }

    /// Vertices where the target may still be placed.
    pub fn placements(&self) -> Vec<Vertex> {
        match self.target {
            Some(t) => vec![t],
            None => (0..self.ig.n()).filter(|&x| !self.queried.contains(x)).collect(),
        }
    }

    pub fn history(&self) -> &[(Vertex, QueryResponse)] {
        &self.history
    }
}

impl DirectionOracle for GridAdditiveGame {
    fn direction(&mut self, v: Vertex) -> QueryResponse {
        let r = match self.target {
            Some(t) => toward(&self.ig, v, t),
            None if !self.queried.contains(v) && self.queried.len() + 1 == self.ig.n() => {
                self.target = Some(v);
                QueryResponse::Found { target: 0 }
            }
            None => QueryResponse::Direction { to: opposite(v) },
        };
        self.queried.insert(v);
        self.history.push((v, r));
        r
    }
}

impl AdversaryGame for GridAdditiveGame {
    fn name(&self) -> &'static str {
        "grid-additive"
    }

    fn graph(&self) -> &Graph {
        self.ig.graph()
    }

    fn lower_bound(&self) -> usize {
        self.ig.n() - 1
    }

    fn queries(&self) -> usize {
        self.history.len()
    }

    fn committed(&self) -> Vec<Vertex> {
        self.target.into_iter().collect()
    }

    /// Every past answer must be 1-additive valid for every placement.
    fn certify(&self) -> Result<(), AdversaryError> {
        let places = self.placements();
        if places.is_empty() {
            return violated("no placement left".into());
        }
        let d = self.ig.dist();
        for &(v, r) in &self.history {
            for &t in &places {
                match r {
                    QueryResponse::Found { .. } if v == t => {}
                    QueryResponse::Direction { to } if v != t => {
                        let w = self.ig.graph().weight(v, to).expect("answer is adjacent");
                        if w + d.get(to, t) > d.get(v, t) + 1.0 + 1e-9 {
                            return violated(format!("answer {v}→{to} is not 1-additive for t={t}"));
                        }
                    }
                    _ => return violated(format!("answer {r:?} at {v} inconsistent with t={t}")),
                }
            }
        }
        Ok(())
    }
}

/// `(1+ε)`-multiplicative marking adversary on the same grid.
///
/// A query at column `i` marks every column `j` with `|j−i| < 1/ε` (real
/// inequality). While unmarked vertices remain it answers the opposite-row
/// vertex; the query that marks the last columns fixes the target at one
/// of them, and from then on answers are truthful.
#[derive(Debug)]
pub struct MarkingGame {
    ig: IndexedGraph,
    epsilon: f64,
    marked: Vec<bool>,
    marked_count: usize,
    history: Vec<(Vertex, QueryResponse)>,
    new_columns: Vec<usize>,
    target: Option<Vertex>,
    queries_to_commit: Option<usize>,
}

impl MarkingGame {
    pub fn new(n: usize, epsilon: f64) -> Result<Self, AdversaryError> {
        if !(epsilon > 0.0 && epsilon <= 2.0) {
            return Err(AdversaryError::InvalidSize(format!("epsilon {epsilon} must lie in (0, 2]")));
        }
        let g = grid_diag_graph(n)?;
        Ok(MarkingGame {
            ig: IndexedGraph::new(g),
            epsilon,
            marked: vec![false; n / 2],
            marked_count: 0,
            history: Vec::new(),
            new_columns: Vec::new(),
            target: None,
            queries_to_commit: None,
        })
    }

    pub fn indexed(&self) -> &IndexedGraph {
        &self.ig
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn columns(&self) -> usize {
        self.marked.len()
    }

    pub fn all_marked(&self) -> bool {
        self.marked_count == self.marked.len()
    }

    /// Columns newly marked by each query so far.
    pub fn new_columns(&self) -> &[usize] {
        &self.new_columns
    }

    /// Number of queries up to and including the one that marked everything.
    pub fn queries_to_commit(&self) -> Option<usize> {
        self.queries_to_commit
    }

    /// Columns marked by a query at column `i`.
    pub fn window(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        let r = 1.0 / self.epsilon;
        (0..self.marked.len()).filter(move |&j| ((j as f64) - (i as f64)).abs() < r)
    }

    pub fn is_marked(&self, x: Vertex) -> bool {
        self.marked[column(x)]
    }

    fn unmarked(&self) -> Vec<Vertex> {
        (0..self.ig.n()).filter(|&x| !self.is_marked(x)).collect()
    }
}

impl DirectionOracle for MarkingGame {
    fn direction(&mut self, v: Vertex) -> QueryResponse {
        if let Some(t) = self.target {
            let r = toward(&self.ig, v, t);
            self.history.push((v, r));
            self.new_columns.push(0);
            return r;
        }
        let fresh: Vec<usize> = self.window(column(v)).filter(|&j| !self.marked[j]).collect();
        for &j in &fresh {
            self.marked[j] = true;
        }
        self.marked_count += fresh.len();
        self.new_columns.push(fresh.len());
        let r = if !self.all_marked() {
            QueryResponse::Direction { to: opposite(v) }
        } else {
            // `fresh` is nonempty here: the previous query left something unmarked.
            let last: Vec<Vertex> = fresh
                .iter()
                .flat_map(|&j| {
                    let (a, b) = grid_ids(j);
                    [a, b]
                })
                .collect();
            let t = last.iter().copied().find(|&x| x != v).unwrap_or(last[0]);
            self.target = Some(t);
            self.queries_to_commit = Some(self.history.len() + 1);
            toward(&self.ig, v, t)
        };
        self.history.push((v, r));
        r
    }
}

impl AdversaryGame for MarkingGame {
    fn name(&self) -> &'static str {
        "mul-marking"
    }

    fn graph(&self) -> &Graph {
        self.ig.graph()
    }

    /// `⌈n·ε/4⌉`.
    fn lower_bound(&self) -> usize {
        ((self.ig.n() as f64) * self.epsilon / 4.0).ceil() as usize
    }

    fn queries(&self) -> usize {
        self.history.len()
    }

    fn committed(&self) -> Vec<Vertex> {
        self.target.into_iter().collect()
    }

    /// At most `2/ε` new columns per query, and every answer given before the
    /// commitment is `(1+ε)`-valid for every remaining placement.
    fn certify(&self) -> Result<(), AdversaryError> {
        let cap = 2.0 / self.epsilon;
        if let Some((k, &c)) = self.new_columns.iter().enumerate().find(|&(_, &c)| c as f64 > cap + 1e-9) {
            return violated(format!("query {k} marked {c} new columns > 2/ε = {cap}"));
        }
        let places = match self.target {
            Some(t) => vec![t],
            None => self.unmarked(),
        };
        if places.is_empty() {
            return violated("no placement left".into());
        }
        let d = self.ig.dist();
        let pre = self.queries_to_commit.map_or(self.history.len(), |q| q - 1);
        for &(v, r) in &self.history[..pre] {
            let QueryResponse::Direction { to } = r else {
                return violated(format!("pre-commitment answer {r:?} at {v}"));
            };
            for &t in &places {
                if t == v {
                    return violated(format!("placement {t} was queried"));
                }
                if 1.0 + d.get(to, t) > (1.0 + self.epsilon) * d.get(v, t) + 1e-9 {
                    return violated(format!("answer {v}→{to} is not (1+ε)-valid for t={t}"));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProbeReport {
    /// Queries issued until every vertex was marked.
    pub queries_to_exhaust: usize,
    /// Queries issued until `Found`, following arrows after the commitment.
    pub queries_to_find: usize,
    pub target: Vertex,
}

/// Exhaustive prober: queries the top vertex of columns `r, 3r+1, …` with
/// stride `2r+1`, where `r` is the largest integer below `1/ε`, so windows
/// tile the columns; then follows truthful answers to the target.
pub fn window_prober(game: &mut MarkingGame) -> ProbeReport {
    let inv = 1.0 / game.epsilon();
    let mut r = inv.ceil() as usize;
    if r as f64 >= inv {
        r = r.saturating_sub(1);
    }
    let stride = 2 * r + 1;
    let cols = game.columns();
    let mut col = r.min(cols - 1);
    let mut queries = 0;
    let mut last = QueryResponse::Direction { to: 0 };
    let mut at = 0;
    while !game.all_marked() {
        at = grid_ids(col).0;
        last = game.direction(at);
        queries += 1;
        col = (col + stride).min(cols - 1);
    }
    let exhaust = queries;
    loop {
        match last {
            QueryResponse::Found { .. } => {
                return ProbeReport {
                    queries_to_exhaust: exhaust,
                    queries_to_find: queries,
                    target: at,
                }
            }
            QueryResponse::Direction { to } => {
                at = to;
                last = game.direction(at);
                queries += 1;
            }
            _ => unreachable!("marking game answers directions"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_shape_at_eight() {
        let g = grid_diag_graph(8).unwrap();
        assert_eq!(g.n(), 8);
        // 4 verticals + 3 gaps × 4 edges.
        assert_eq!(g.edge_count(), 16);
        let (v1, _) = grid_ids(1);
        assert_eq!(g.degree(v1), 5);
        assert!(grid_diag_graph(7).is_err());
        assert!(grid_diag_graph(2).is_err());
    }

    #[test]
    fn additive_answers_opposite_row() {
        let mut game = GridAdditiveGame::new(8).unwrap();
        let (v1, u1) = grid_ids(1);
        assert_eq!(game.direction(v1), QueryResponse::Direction { to: u1 });
        assert_eq!(game.direction(u1), QueryResponse::Direction { to: v1 });
        game.certify().unwrap();
    }

    #[test]
    fn additive_forces_every_vertex() {
        let mut game = GridAdditiveGame::new(20).unwrap();
        let mut k = 0;
        for v in 0..20 {
            let r = game.direction(v);
            k += 1;
            assert!(game.placements().len() >= 20 - k);
            game.certify().unwrap();
            if r.is_found() {
                break;
            }
        }
        assert_eq!(k, 20);
        assert_eq!(game.committed(), vec![19]);
    }

    #[test]
    fn marking_windows() {
        let mut game = MarkingGame::new(400, 0.1).unwrap();
        game.direction(grid_ids(100).0);
        assert_eq!(game.new_columns(), &[19]);
        let game = MarkingGame::new(40, 0.5).unwrap();
        assert_eq!(game.lower_bound(), 5);
        assert!(MarkingGame::new(40, 0.0).is_err());
    }

    #[test]
    fn prober_counts() {
        for (eps, expect) in [(0.5, 67), (0.1, 11)] {
            let mut game = MarkingGame::new(400, eps).unwrap();
            let rep = window_prober(&mut game);
            assert_eq!(rep.queries_to_exhaust, expect);
            assert!(rep.queries_to_exhaust >= game.lower_bound());
            assert_eq!(game.committed(), vec![rep.target]);
            game.certify().unwrap();
        }
    }

    #[test]
    fn window_wider_than_two_over_epsilon() {
        // 1/ε = 2.2: columns with |j−i| ≤ 2 give 5 > 4.4 new columns.
        let mut game = MarkingGame::new(40, 1.0 / 2.2).unwrap();
        game.direction(grid_ids(10).0);
        assert_eq!(game.new_columns(), &[5]);
        assert!(game.certify().is_err());
    }
}
