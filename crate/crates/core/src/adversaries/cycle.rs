//! Unbiased cycle adversaries with targets on antipodal pairs.
//!
//! On the unweighted even cycle every antipodal pair `{x, x+n/2}` not
//! containing `v` has one member on each side of `v`, so any left/right
//! answer at `v` is valid for every such pair. The adversary keeps all pairs
//! untouched by queries available and commits only when a query would
//! destroy one of the last `c` free pairs.

use super::{cycle_graph, violated, AdversaryError, AdversaryGame};
use crate::graph::{Graph, IndexedGraph, Vertex};
use crate::oracles::{DirectionOracle, QueryResponse, TwoDirectionOracle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Pair bookkeeping shared by both cycle games.
#[derive(Debug)]
struct Pairs {
    ig: IndexedGraph,
    c: usize,
    /// `free[x]` for pair `{x, x+n/2}`, `x < n/2`.
    free: Vec<bool>,
    free_count: usize,
    committed: Option<Vec<Vertex>>,
    queries: usize,
}

impl Pairs {
    fn new(n: usize, c: usize) -> Result<Self, AdversaryError> {
        if n < 4 || n % 2 != 0 || c == 0 || 2 * c > n / 2 {
            return Err(AdversaryError::InvalidSize(format!(
                "cycle game needs even n ≥ 4 and 1 ≤ c ≤ n/4, got n={n}, c={c}"
            )));
        }
        Ok(Pairs {
            ig: IndexedGraph::new(cycle_graph(n)),
            c,
            free: vec![true; n / 2],
            free_count: n / 2,
            committed: None,
            queries: 0,
        })
    }

    fn half(&self) -> usize {
        self.ig.n() / 2
    }

    fn pair_of(&self, v: Vertex) -> usize {
        v % self.half()
    }

    /// Registers a query at `v`; returns the committed target index if `v`
    /// is (now) a target.
    fn touch(&mut self, v: Vertex) -> Option<usize> {
        self.queries += 1;
        if self.committed.is_none() {
            let p = self.pair_of(v);
            if self.free[p] {
                if self.free_count == self.c {
                    let h = self.half();
                    let targets: Vec<Vertex> = (0..h).filter(|&x| self.free[x]).flat_map(|x| [x, x + h]).collect();
                    self.committed = Some(targets);
                } else {
                    self.free[p] = false;
                    self.free_count -= 1;
                }
            }
        }
        self.committed.as_ref().and_then(|t| t.iter().position(|&x| x == v))
    }

    /// First `c` free pairs as an explicit placement.
    fn witness(&self) -> Vec<Vertex> {
        if let Some(t) = &self.committed {
            return t.clone();
        }
        let h = self.half();
        (0..h).filter(|&x| self.free[x]).take(self.c).flat_map(|x| [x, x + h]).collect()
    }

    fn neighbours(&self, v: Vertex) -> (Vertex, Vertex) {
        let n = self.ig.n();
        ((v + n - 1) % n, (v + 1) % n)
    }

    fn pair_count_ok(&self, name: &str) -> Result<(), AdversaryError> {
        let bound = self.half() - self.c;
        if self.committed.is_none() && self.queries < bound && self.free_count < self.c + 1 {
            return violated(format!("{name}: {} free pairs after {} queries", self.free_count, self.queries));
        }
        if self.witness().len() != 2 * self.c {
            return violated(format!("{name}: fewer than {} free pairs", self.c));
        }
        Ok(())
    }
}

/// Direction-query game: answers `v_{x−1}` or `v_{x+1}` uniformly at random.
#[derive(Debug)]
pub struct CycleAntipodalGame {
    pairs: Pairs,
    rng: ChaCha8Rng,
    history: Vec<(Vertex, QueryResponse)>,
}

impl CycleAntipodalGame {
    pub fn new(n: usize, c: usize, seed: u64) -> Result<Self, AdversaryError> {
        Ok(CycleAntipodalGame {
            pairs: Pairs::new(n, c)?,
            rng: ChaCha8Rng::seed_from_u64(seed),
            history: Vec::new(),
        })
    }

    pub fn indexed(&self) -> &IndexedGraph {
        &self.pairs.ig
    }

    pub fn free_pairs(&self) -> usize {
        self.pairs.free_count
    }

    /// Free pairs `{x, x+n/2}` listed by their smaller member.
    pub fn free_pair_list(&self) -> Vec<Vertex> {
        (0..self.pairs.half()).filter(|&x| self.pairs.free[x]).collect()
    }

    /// Queries answered before the commitment, or all of them if none yet.
    pub fn queries_before_commitment(&self) -> usize {
        match self.pairs.committed {
            Some(_) => self.history.iter().position(|(_, r)| r.is_found()).unwrap_or(self.history.len()),
            None => self.history.len(),
        }
    }

    pub fn history(&self) -> &[(Vertex, QueryResponse)] {
        &self.history
    }
}

impl DirectionOracle for CycleAntipodalGame {
    fn direction(&mut self, v: Vertex) -> QueryResponse {
        let r = match self.pairs.touch(v) {
            Some(i) => QueryResponse::Found { target: i },
            None => {
                let (l, rt) = self.pairs.neighbours(v);
                match self.pairs.committed.clone() {
                    // Truthful after commitment: uniform target, uniform tie.
                    Some(t) => {
                        let x = t[self.rng.gen_range(0..t.len())];
                        let e = self.pairs.ig.target_edges(v, x);
                        QueryResponse::Direction { to: e[self.rng.gen_range(0..e.len())] }
                    }
                    None => QueryResponse::Direction {
                        to: if self.rng.gen::<bool>() { l } else { rt },
                    },
                }
            }
        };
        self.history.push((v, r));
        r
    }
}

impl AdversaryGame for CycleAntipodalGame {
    fn name(&self) -> &'static str {
        "cycle-antipodal"
    }

    fn graph(&self) -> &Graph {
        self.pairs.ig.graph()
    }

    /// `n/2 − c`.
    fn lower_bound(&self) -> usize {
        self.pairs.half() - self.pairs.c
    }

    fn queries(&self) -> usize {
        self.history.len()
    }

    fn committed(&self) -> Vec<Vertex> {
        self.pairs.committed.clone().unwrap_or_default()
    }

    /// Checks the witness placement against every answer: each direction
    /// must start a shortest path to some witness target.
    fn certify(&self) -> Result<(), AdversaryError> {
        self.pairs.pair_count_ok(self.name())?;
        let w = self.pairs.witness();
        let ig = &self.pairs.ig;
        for &(v, r) in &self.history {
            let ok = match r {
                QueryResponse::Found { target } => w.get(target) == Some(&v),
                QueryResponse::Direction { to } => {
                    !w.contains(&v) && w.iter().any(|&t| ig.cone(v, to).is_ok_and(|c| c.contains(t)))
                }
                _ => false,
            };
            if !ok {
                return violated(format!("answer {r:?} at {v} inconsistent with placement {w:?}"));
            }
        }
        Ok(())
    }
}

/// Two-direction game with one antipodal pair: answers `{v_{x−1}, v_{x+1}}`.
#[derive(Debug)]
pub struct CycleTwoDirectionGame {
    pairs: Pairs,
    history: Vec<(Vertex, QueryResponse)>,
}

impl CycleTwoDirectionGame {
    pub fn new(n: usize) -> Result<Self, AdversaryError> {
        Ok(CycleTwoDirectionGame {
            pairs: Pairs::new(n, 1)?,
            history: Vec::new(),
        })
    }

    pub fn indexed(&self) -> &IndexedGraph {
        &self.pairs.ig
    }

    pub fn free_pairs(&self) -> usize {
        self.pairs.free_count
    }

    pub fn queries_before_commitment(&self) -> usize {
        self.history.iter().position(|(_, r)| r.is_found()).unwrap_or(self.history.len())
    }
}

impl TwoDirectionOracle for CycleTwoDirectionGame {
    fn two_direction(&mut self, v: Vertex) -> QueryResponse {
        let r = match self.pairs.touch(v) {
            Some(i) => QueryResponse::Found { target: i },
            None => match self.pairs.committed.clone() {
                Some(t) => {
                    let ig = &self.pairs.ig;
                    let a = ig.target_edges(v, t[0])[0];
                    let b = ig.target_edges(v, t[1])[0];
                    QueryResponse::two(a, b)
                }
                None => {
                    let (l, rt) = self.pairs.neighbours(v);
                    QueryResponse::two(l, rt)
                }
            },
        };
        self.history.push((v, r));
        r
    }
}

impl AdversaryGame for CycleTwoDirectionGame {
    fn name(&self) -> &'static str {
        "cycle-twodir"
    }

    fn graph(&self) -> &Graph {
        self.pairs.ig.graph()
    }

    /// `n/2 − 1`.
    fn lower_bound(&self) -> usize {
        self.pairs.half() - 1
    }

    fn queries(&self) -> usize {
        self.history.len()
    }

    fn committed(&self) -> Vec<Vertex> {
        self.pairs.committed.clone().unwrap_or_default()
    }

    /// The witness pair must explain each answer with one component per
    /// target.
    fn certify(&self) -> Result<(), AdversaryError> {
        self.pairs.pair_count_ok(self.name())?;
        let w = self.pairs.witness();
        let ig = &self.pairs.ig;
        let (t1, t2) = (w[0], w[1]);
        for &(v, r) in &self.history {
            let ok = match r {
                QueryResponse::Found { target } => w.get(target) == Some(&v),
                QueryResponse::TwoDirections { a, b } => {
                    let e1 = ig.target_edges(v, t1);
                    let e2 = ig.target_edges(v, t2);
                    (e1.contains(&a) && e2.contains(&b)) || (e1.contains(&b) && e2.contains(&a))
                }
                _ => false,
            };
            if !ok {
                return violated(format!("answer {r:?} at {v} inconsistent with pair {w:?}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ten_cycle_pairs_remaining() {
        let mut game = CycleAntipodalGame::new(10, 1, 0).unwrap();
        for v in [0, 1, 2] {
            assert!(!game.direction(v).is_found());
        }
        assert_eq!(game.free_pair_list(), vec![3, 4]);
        game.certify().unwrap();
        assert_eq!(game.lower_bound(), 4);
    }

    #[test]
    fn two_direction_answers_both_neighbours() {
        let mut game = CycleTwoDirectionGame::new(8).unwrap();
        assert_eq!(game.two_direction(3), QueryResponse::two(2, 4));
        // n/2 − 2 = 2 queries leave ≥ 2 free pairs.
        game.two_direction(0);
        assert!(game.free_pairs() >= 2);
        game.certify().unwrap();
    }

    #[test]
    fn commitment_at_last_pair() {
        let mut game = CycleTwoDirectionGame::new(8).unwrap();
        for v in [0, 1, 2] {
            game.two_direction(v);
            game.certify().unwrap();
        }
        // Pair {3,7} is the last one: querying 7 commits and reveals.
        assert_eq!(game.two_direction(7), QueryResponse::Found { target: 1 });
        assert_eq!(game.committed(), vec![3, 7]);
        game.certify().unwrap();
        assert_eq!(game.two_direction(3), QueryResponse::Found { target: 0 });
    }

    #[test]
    fn replay_is_deterministic() {
        let run = || {
            let mut g = CycleAntipodalGame::new(40, 2, 9).unwrap();
            (0..30).map(|v| g.direction(v)).collect::<Vec<_>>()
        };
        assert_eq!(run(), run());
        assert!(CycleAntipodalGame::new(7, 1, 0).is_err());
        assert!(CycleAntipodalGame::new(8, 3, 0).is_err());
    }
}
