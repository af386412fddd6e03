//! Seeded Monte-Carlo experiments.

use super::generate::{generate, sample_distinct, GeneratorSpec, GraphKind};
use super::records::{join_counts, join_vertices, ExperimentRecord, OutputFormat};
use super::HarnessError;
use crate::adversaries::{
    window_prober, AdversaryError, AdversaryGame, CycleAntipodalGame, CycleTwoDirectionGame, GridAdditiveGame,
    MarkingGame, PathTwoTargetGame, PhiTrapGame,
};
use crate::graph::{IndexedGraph, Vertex};
use crate::oracles::{
    DirectionOracle, OracleConfig, QueryCounts, QueryKind, QueryResponse, RestrictedOracle, TargetOracle, TiePolicy,
    TwoDirectionOracle,
};
use crate::rng::{derive_seed, stream};
use crate::searchers::{
    algorithm1_repetitions, algorithm1_second_target, algorithm2_direction_distance, algorithm3_vertex_edge,
    approx_rounds_cap, ceil_log2, gamma_binary_search, gamma_probe_search, gamma_probe_search_two_direction,
    noisy_first_target, repetitions, restricted_set_search, tree_alpha, tree_two_target_search, SearchParams,
    SearchResult, Transcript,
};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearcherKind {
    Gamma,
    NoisyFirst,
    TreeTwoTarget,
    Algorithm1,
    Algorithm2,
    Algorithm3,
    RestrictedSet,
    /// Deterministic Γ prober for direction-query games.
    GammaProbe,
    /// Deterministic Γ prober for two-direction games.
    GammaProbeTwoDirection,
    /// The scripted Φ-median policy of the star-of-paths game.
    PhiScripted,
    /// The column-window prober of the marking game.
    WindowProber,
}

impl SearcherKind {
    pub const ALL: [SearcherKind; 11] = [
        SearcherKind::Gamma,
        SearcherKind::NoisyFirst,
        SearcherKind::TreeTwoTarget,
        SearcherKind::Algorithm1,
        SearcherKind::Algorithm2,
        SearcherKind::Algorithm3,
        SearcherKind::RestrictedSet,
        SearcherKind::GammaProbe,
        SearcherKind::GammaProbeTwoDirection,
        SearcherKind::PhiScripted,
        SearcherKind::WindowProber,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SearcherKind::Gamma => "gamma",
            SearcherKind::NoisyFirst => "noisy-first",
            SearcherKind::TreeTwoTarget => "tree-two-target",
            SearcherKind::Algorithm1 => "algorithm1",
            SearcherKind::Algorithm2 => "algorithm2",
            SearcherKind::Algorithm3 => "algorithm3",
            SearcherKind::RestrictedSet => "restricted-set",
            SearcherKind::GammaProbe => "gamma-probe",
            SearcherKind::GammaProbeTwoDirection => "gamma-probe-two-direction",
            SearcherKind::PhiScripted => "phi-scripted",
            SearcherKind::WindowProber => "window-prober",
        }
    }
}

impl fmt::Display for SearcherKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SearcherKind {
    type Err = HarnessError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SearcherKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| HarnessError::UnknownName { what: "searcher", name: s.to_string() })
    }
}

/// Where answers come from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "oracle")]
pub enum OracleSpec {
    /// Truthful single target, uniform per trial.
    Single,
    /// Two distinct uniform targets; `t₁` answered with probability `p1`.
    TwoTarget { p1: f64, tie: TiePolicy },
    /// `targets` distinct uniform targets behind restricted-set queries.
    Restricted { targets: usize },
    /// An adversary game by name; `c` is the antipodal pair count where used.
    Game { game: String, c: usize },
}

impl OracleSpec {
    pub fn p1(&self) -> Option<f64> {
        match self {
            OracleSpec::TwoTarget { p1, .. } => Some(*p1),
            _ => None,
        }
    }

    /// Default oracle for a searcher.
    pub fn default_for(searcher: SearcherKind, p1: f64, targets: usize) -> Option<OracleSpec> {
        use SearcherKind::*;
        Some(match searcher {
            Gamma => OracleSpec::Single,
            NoisyFirst | TreeTwoTarget | Algorithm1 | Algorithm2 | Algorithm3 => {
                OracleSpec::TwoTarget { p1, tie: TiePolicy::Equiprobable }
            }
            RestrictedSet => OracleSpec::Restricted { targets },
            PhiScripted => OracleSpec::Game { game: "phi-trap".into(), c: 1 },
            WindowProber => OracleSpec::Game { game: "mul-marking".into(), c: 1 },
            GammaProbeTwoDirection => OracleSpec::Game { game: "cycle-twodir".into(), c: 1 },
            GammaProbe => return None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub generator: GeneratorSpec,
    pub searcher: SearcherKind,
    pub params: SearchParams,
    pub oracle: OracleSpec,
    pub trials: u64,
    pub master_seed: u64,
    pub format: OutputFormat,
}

impl ExperimentConfig {
    pub fn new(generator: GeneratorSpec, searcher: SearcherKind, oracle: OracleSpec) -> Self {
        ExperimentConfig {
            generator,
            searcher,
            params: SearchParams::default(),
            oracle,
            trials: 1,
            master_seed: 0,
            format: OutputFormat::Csv,
        }
    }

    pub fn trials(mut self, trials: u64) -> Self {
        self.trials = trials;
        self
    }

    pub fn seed(mut self, seed: u64) -> Self {
        self.master_seed = seed;
        self
    }

    pub fn params(mut self, params: SearchParams) -> Self {
        self.params = params;
        self
    }

    /// The capability table: which oracle each searcher can drive.
    pub fn validate(&self) -> Result<(), HarnessError> {
        use SearcherKind::*;
        let bad = |msg: String| Err(HarnessError::IncompatibleConfig(msg));
        let s = self.searcher;
        match (&self.oracle, s) {
            (OracleSpec::Single, Gamma) => {}
            (OracleSpec::TwoTarget { p1, tie }, NoisyFirst | TreeTwoTarget | Algorithm1 | Algorithm2 | Algorithm3) => {
                if !(*p1 > 0.5 && *p1 <= 1.0) {
                    return bad(format!("{s} needs p1 in (1/2, 1], got {p1}"));
                }
                if s == Algorithm1 && *tie != TiePolicy::Equiprobable {
                    return bad("algorithm1 needs equiprobable tie-breaking".into());
                }
                if s == TreeTwoTarget
                    && !matches!(self.generator.kind, GraphKind::Path | GraphKind::RandomTree | GraphKind::StarPaths)
                {
                    return bad(format!("tree-two-target needs a tree generator, got {}", self.generator.name()));
                }
            }
            (OracleSpec::Restricted { targets }, RestrictedSet) => {
                if *targets == 0 || *targets > self.generator.n {
                    return bad(format!("restricted-set needs 1..=n targets, got {targets}"));
                }
            }
            (OracleSpec::Game { game, .. }, GammaProbe)
                if matches!(game.as_str(), "grid-additive" | "cycle-antipodal" | "path-two-target") => {}
            (OracleSpec::Game { game, .. }, GammaProbeTwoDirection) if game == "cycle-twodir" => {}
            (OracleSpec::Game { game, .. }, PhiScripted) if game == "phi-trap" => {}
            (OracleSpec::Game { game, .. }, WindowProber) if game == "mul-marking" => {}
            (o, s) => return bad(format!("searcher {s} cannot drive {o:?}")),
        }
        if self.trials == 0 {
            return bad("trials must be positive".into());
        }
        Ok(())
    }
}

/// Closed-form cap (or floor) for one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialBound {
    pub value: u64,
    pub is_floor: bool,
    /// Extra per-kind caps; all must hold.
    pub per_kind: Vec<(QueryKind, u64)>,
}

impl TrialBound {
    fn cap(value: u64) -> Self {
        TrialBound { value, is_floor: false, per_kind: Vec::new() }
    }

    fn floor(value: u64) -> Self {
        TrialBound { value, is_floor: true, per_kind: Vec::new() }
    }

    pub fn holds(&self, queries: u64, counts: &QueryCounts) -> bool {
        let main = if self.is_floor { queries >= self.value } else { queries <= self.value };
        main && self.per_kind.iter().all(|&(k, c)| counts.get(k) <= c)
    }
}

/// Caps of the searchers driven by random oracles.
pub fn searcher_bound(searcher: SearcherKind, ig: &IndexedGraph, params: &SearchParams, oracle: &OracleSpec) -> TrialBound {
    let n = ig.n();
    let lg = ceil_log2(n);
    let rounds = approx_rounds_cap(n, params.epsilon);
    let r = repetitions(params.rho, (n.max(2) as f64).log2());
    match searcher {
        SearcherKind::Gamma if params.epsilon == 0.0 => TrialBound::cap(lg + 1),
        SearcherKind::Gamma => TrialBound::cap(rounds),
        SearcherKind::NoisyFirst => TrialBound::cap(4 * 2 * repetitions(params.rho, lg as f64)),
        SearcherKind::TreeTwoTarget => {
            let p1 = oracle.p1().unwrap_or(1.0);
            TrialBound::cap((2.0 * params.rho * tree_alpha(p1) * (lg * lg) as f64).floor() as u64)
        }
        SearcherKind::Algorithm1 => {
            let p1 = oracle.p1().unwrap_or(0.75);
            TrialBound::cap(algorithm1_repetitions(n, ig.graph().max_degree(), p1, params.rho) * rounds)
        }
        SearcherKind::Algorithm2 => TrialBound::cap(r * rounds + r * r * rounds),
        SearcherKind::Algorithm3 => TrialBound {
            value: r * rounds + r * r * rounds,
            is_floor: false,
            per_kind: vec![(QueryKind::Direction, r * rounds), (QueryKind::EdgeDirection, r * r * rounds)],
        },
        SearcherKind::RestrictedSet => {
            let k = match oracle {
                OracleSpec::Restricted { targets } => *targets as u64,
                _ => 1,
            };
            TrialBound::cap(k * (lg + 1))
        }
        _ => TrialBound::cap(u64::MAX),
    }
}

/// Wraps a game and certifies it after every answer.
#[derive(Debug)]
pub struct CertifiedGame<G> {
    pub game: G,
    pub checks: usize,
    pub first_violation: Option<(usize, AdversaryError)>,
}

impl<G: AdversaryGame> CertifiedGame<G> {
    pub fn new(game: G) -> Self {
        CertifiedGame { game, checks: 0, first_violation: None }
    }

    fn check(&mut self) {
        self.checks += 1;
        if self.first_violation.is_none() {
            if let Err(e) = self.game.certify() {
                self.first_violation = Some((self.game.queries(), e));
            }
        }
    }

    pub fn is_clean(&self) -> bool {
        self.first_violation.is_none()
    }
}

impl<G: AdversaryGame + DirectionOracle> DirectionOracle for CertifiedGame<G> {
    fn direction(&mut self, v: Vertex) -> QueryResponse {
        let r = self.game.direction(v);
        self.check();
        r
    }
}

impl<G: AdversaryGame + TwoDirectionOracle> TwoDirectionOracle for CertifiedGame<G> {
    fn two_direction(&mut self, v: Vertex) -> QueryResponse {
        let r = self.game.two_direction(v);
        self.check();
        r
    }
}

/// What a trial produced, before it becomes a record.
struct Outcome {
    counts: QueryCounts,
    success: bool,
    found: Vec<Vertex>,
    bound: TrialBound,
    /// Query count compared against the bound, when not the total.
    bound_queries: Option<u64>,
}

fn transcript_of<T>(r: &SearchResult<T>) -> &Transcript {
    match r {
        Ok((_, t)) => t,
        Err(f) => &f.transcript,
    }
}

fn from_search<T>(r: SearchResult<T>, bound: TrialBound, ok: impl FnOnce(&T) -> bool) -> Outcome {
    let t = transcript_of(&r);
    let (counts, found) = (t.counts, t.found.clone());
    Outcome { counts, success: r.as_ref().is_ok_and(|(v, _)| ok(v)), found, bound, bound_queries: None }
}

/// Runs every trial; records come back in trial order.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>, HarnessError> {
    cfg.validate()?;
    let shared = match (&cfg.oracle, cfg.generator.is_random()) {
        (OracleSpec::Game { .. }, _) | (_, true) => None,
        _ => Some(IndexedGraph::new(generate(&cfg.generator, cfg.master_seed)?)),
    };
    (0..cfg.trials).into_par_iter().map(|trial| run_trial(cfg, shared.as_ref(), trial)).collect()
}

pub fn run_trial(cfg: &ExperimentConfig, shared: Option<&IndexedGraph>, trial: u64) -> Result<ExperimentRecord, HarnessError> {
    let seed = derive_seed(cfg.master_seed, trial);
    let start = Instant::now();
    let outcome = match &cfg.oracle {
        OracleSpec::Game { game, c } => run_game(cfg, game, *c, seed)?,
        oracle => {
            let owned;
            let ig = match shared {
                Some(ig) => ig,
                None => {
                    owned = IndexedGraph::new(generate(&cfg.generator, derive_seed(seed, 0))?);
                    &owned
                }
            };
            run_oracle_trial(cfg, ig, oracle, seed)?
        }
    };
    let millis = start.elapsed().as_millis() as u64;
    let total = outcome.counts.total();
    Ok(ExperimentRecord {
        trial,
        seed,
        searcher: cfg.searcher.name().to_string(),
        n: cfg.generator.n,
        p1: cfg.oracle.p1(),
        epsilon: cfg.params.epsilon,
        rho: cfg.params.rho,
        queries_total: total,
        queries_by_type: join_counts(&outcome.counts),
        success: outcome.success,
        found: join_vertices(&outcome.found),
        bound_cap: outcome.bound.value,
        bound_ok: outcome.bound.holds(outcome.bound_queries.unwrap_or(total), &outcome.counts),
        millis,
    })
}

fn trial_params(cfg: &ExperimentConfig, seed: u64) -> SearchParams {
    SearchParams { seed: derive_seed(seed, 3), keep_records: false, ..cfg.params.clone() }
}

fn run_oracle_trial(cfg: &ExperimentConfig, ig: &IndexedGraph, oracle: &OracleSpec, seed: u64) -> Result<Outcome, HarnessError> {
    let n = ig.n();
    let params = trial_params(cfg, seed);
    let oseed = derive_seed(seed, 1);
    let mut rng = stream(seed, 2);
    let bound = searcher_bound(cfg.searcher, ig, &params, oracle);
    Ok(match (oracle, cfg.searcher) {
        (OracleSpec::Single, _) => {
            let t = rng.gen_range(0..n);
            let mut o = TargetOracle::new(ig, OracleConfig::single(t, oseed))?;
            from_search(gamma_binary_search(ig, &mut o, &params), bound, |&v| v == t)
        }
        (OracleSpec::TwoTarget { p1, tie }, s) => {
            if n < 2 {
                return Err(HarnessError::IncompatibleConfig("two targets need n ≥ 2".into()));
            }
            let ts = sample_distinct(n, 2, &mut rng);
            let (t1, t2) = (ts[0], ts[1]);
            let mut o = TargetOracle::new(ig, OracleConfig::two(t1, t2, *p1, *tie, oseed)?)?;
            match s {
                SearcherKind::NoisyFirst => from_search(noisy_first_target(ig, &mut o, *p1, &params), bound, |&v| v == t1),
                SearcherKind::TreeTwoTarget => {
                    from_search(tree_two_target_search(ig, &mut o, *p1, &params), bound, |&(a, b)| {
                        (a == t1 && b == t2) || (a == t2 && b == t1)
                    })
                }
                SearcherKind::Algorithm1 => {
                    from_search(algorithm1_second_target(ig, t1, &mut o, *p1, &params), bound, |&v| v == t2)
                }
                SearcherKind::Algorithm2 => {
                    from_search(algorithm2_direction_distance(ig, t1, &mut o, &params), bound, |&v| v == t2)
                }
                SearcherKind::Algorithm3 => from_search(algorithm3_vertex_edge(ig, t1, &mut o, &params), bound, |&v| v == t2),
                other => unreachable!("validated: {other}"),
            }
        }
        (OracleSpec::Restricted { targets }, _) => {
            let mut ts = sample_distinct(n, *targets, &mut rng);
            let mut o = RestrictedOracle::new(ig, ts.clone())?;
            ts.sort_unstable();
            from_search(restricted_set_search(ig, &mut o, *targets, &params), bound, |found| {
                let mut f = found.clone();
                f.sort_unstable();
                f == ts
            })
        }
        (OracleSpec::Game { .. }, _) => unreachable!("games run separately"),
    })
}

fn probe_outcome<G: AdversaryGame>(cg: &CertifiedGame<G>, r: SearchResult<Vertex>) -> Outcome {
    let committed = cg.game.committed();
    let clean = cg.is_clean() && cg.game.certify().is_ok();
    from_search(r, TrialBound::floor(cg.game.lower_bound() as u64), |v| clean && committed.contains(v))
}

/// Γ prober against a certified direction-query game.
fn probe<G: AdversaryGame + DirectionOracle>(game: G, params: &SearchParams) -> Outcome {
    let ig = IndexedGraph::new(game.graph().clone());
    let mut cg = CertifiedGame::new(game);
    let r = gamma_probe_search(&ig, &mut cg, params);
    probe_outcome(&cg, r)
}

fn probe_two<G: AdversaryGame + TwoDirectionOracle>(game: G, params: &SearchParams) -> Outcome {
    let ig = IndexedGraph::new(game.graph().clone());
    let mut cg = CertifiedGame::new(game);
    let r = gamma_probe_search_two_direction(&ig, &mut cg, params);
    probe_outcome(&cg, r)
}

fn run_game(cfg: &ExperimentConfig, game: &str, c: usize, seed: u64) -> Result<Outcome, HarnessError> {
    let n = cfg.generator.n;
    let params = trial_params(cfg, seed);
    let gseed = derive_seed(seed, 1);
    Ok(match game {
        "cycle-antipodal" => probe(CycleAntipodalGame::new(n, c, gseed)?, &params),
        "cycle-twodir" => probe_two(CycleTwoDirectionGame::new(n)?, &params),
        "path-two-target" => probe(PathTwoTargetGame::new(n)?, &params),
        "grid-additive" => probe(GridAdditiveGame::new(n)?, &params),
        "phi-trap" => {
            let mut g = PhiTrapGame::new(n, cfg.params.epsilon)?;
            let floor = g.lower_bound() as u64;
            let mut counts = QueryCounts::default();
            let (success, forced) = match g.run() {
                Ok(rep) => (rep.closed_forms_match && rep.final_candidates == [0] && g.certify().is_ok(), rep.forced_queries),
                Err(_) => (false, g.queries()),
            };
            for _ in 0..forced {
                counts.bump(QueryKind::Direction);
            }
            Outcome { counts, success, found: vec![0], bound: TrialBound::floor(floor), bound_queries: None }
        }
        "mul-marking" => {
            let mut g = MarkingGame::new(n, cfg.params.epsilon)?;
            let floor = g.lower_bound() as u64;
            let rep = window_prober(&mut g);
            let mut counts = QueryCounts::default();
            for _ in 0..rep.queries_to_find {
                counts.bump(QueryKind::Direction);
            }
            let success = g.certify().is_ok() && g.committed() == [rep.target];
            Outcome {
                counts,
                success,
                found: vec![rep.target],
                bound: TrialBound::floor(floor),
                bound_queries: Some(rep.queries_to_exhaust as u64),
            }
        }
        other => return Err(HarnessError::UnknownName { what: "game", name: other.to_string() }),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(kind: GraphKind, n: usize, s: SearcherKind, o: OracleSpec) -> ExperimentConfig {
        ExperimentConfig::new(GeneratorSpec::new(kind, n), s, o)
    }

    #[test]
    fn reruns_reproduce_records() {
        let c = cfg(GraphKind::RandomConnected, 64, SearcherKind::Gamma, OracleSpec::Single).trials(100).seed(5);
        let a = run_experiment(&c).unwrap();
        let b = run_experiment(&c).unwrap();
        assert_eq!(a.len(), 100);
        assert!(a.iter().zip(&b).all(|(x, y)| x.same_outcome(y)));
        assert!(a.iter().enumerate().all(|(i, r)| r.trial == i as u64));
        assert!(a.windows(2).any(|w| w[0].found != w[1].found));
    }

    #[test]
    fn path_1024_exact_gamma() {
        let c = cfg(GraphKind::Path, 1024, SearcherKind::Gamma, OracleSpec::Single).trials(50);
        for r in run_experiment(&c).unwrap() {
            assert!(r.success && r.bound_ok && r.queries_total <= 11, "{r:?}");
        }
    }

    #[test]
    fn phi_trap_record() {
        let mut c = cfg(
            GraphKind::StarPaths,
            10_000,
            SearcherKind::PhiScripted,
            OracleSpec::Game { game: "phi-trap".into(), c: 1 },
        );
        c.params.epsilon = 0.1;
        let r = &run_experiment(&c).unwrap()[0];
        assert_eq!(r.queries_total, 100);
        assert!(r.success && r.bound_ok);
    }

    #[test]
    fn cycle_floor_and_restricted_cap() {
        let c = cfg(
            GraphKind::Cycle,
            200,
            SearcherKind::GammaProbe,
            OracleSpec::Game { game: "cycle-antipodal".into(), c: 2 },
        )
        .trials(3);
        for r in run_experiment(&c).unwrap() {
            assert!(r.success && r.bound_ok && r.queries_total >= 98, "{r:?}");
        }
        let c = cfg(GraphKind::RandomTree, 128, SearcherKind::RestrictedSet, OracleSpec::Restricted { targets: 3 }).trials(10);
        for r in run_experiment(&c).unwrap() {
            assert!(r.success && r.bound_ok && r.bound_cap == 24, "{r:?}");
        }
    }

    #[test]
    fn capability_table_rejects_mismatches() {
        let bad = [
            cfg(GraphKind::Path, 16, SearcherKind::Gamma, OracleSpec::Restricted { targets: 1 }),
            cfg(
                GraphKind::RandomConnected,
                16,
                SearcherKind::TreeTwoTarget,
                OracleSpec::TwoTarget { p1: 0.7, tie: TiePolicy::Equiprobable },
            ),
            cfg(
                GraphKind::Path,
                16,
                SearcherKind::Algorithm1,
                OracleSpec::TwoTarget { p1: 0.75, tie: TiePolicy::AdversarialSmallestId },
            ),
            cfg(GraphKind::Cycle, 16, SearcherKind::GammaProbe, OracleSpec::Game { game: "cycle-twodir".into(), c: 1 }),
        ];
        for c in bad {
            assert!(matches!(run_experiment(&c), Err(HarnessError::IncompatibleConfig(_))), "{c:?}");
        }
    }
}
