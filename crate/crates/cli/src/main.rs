//! `gsearch` command line: generate graphs, run searches, games and
//! experiments, and check bound reports.

use clap::{Args, Parser, Subcommand};
use gsearch::adversaries::{
    window_prober, AdversaryGame, CycleAntipodalGame, CycleTwoDirectionGame, GridAdditiveGame, MarkingGame,
    PathTwoTargetGame, PhiTrapGame, GAME_NAMES,
};
use gsearch::harness::{
    generate, parse_kind, parse_records, render, run_experiment, verify_bounds, BoundSpec, CertifiedGame, ExperimentConfig,
    GeneratorSpec, GraphKind, HarnessError, OracleSpec, OutputFormat, SearcherKind, VerifySpec,
};
use gsearch::oracles::{DirectionOracle, OracleConfig, RestrictedOracle, TargetOracle, TiePolicy};
use gsearch::potentials::ChoiceRule;
use gsearch::searchers::{
    algorithm1_second_target, algorithm2_direction_distance, algorithm3_vertex_edge, gamma_binary_search,
    gamma_probe_search, gamma_probe_search_two_direction, noisy_first_target, restricted_set_search,
    tree_two_target_search, SearchParams, Transcript,
};
use gsearch::{Graph, IndexedGraph, Vertex};
use std::fmt::Display;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "gsearch", version, about = "Target search on graphs with median queries")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a generated graph as an edge list.
    Gen(GenArgs),
    /// Run one search on a graph file and print its transcript.
    Search(SearchArgs),
    /// Play a lower-bound game against its default prober.
    Adversary(AdversaryArgs),
    /// Run seeded trials and write one record per trial.
    Experiment(ExperimentArgs),
    /// Check an experiment's records against their bounds.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct GeneratorArgs {
    /// Graph kind, optionally prefixed with `weighted-`.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    n: usize,
    /// Extra edges for random-connected and random-bounded.
    #[arg(long)]
    extra: Option<usize>,
    /// Degree cap for random-bounded.
    #[arg(long)]
    max_degree: Option<usize>,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    generator: GeneratorArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SearchOpts {
    #[arg(long, default_value_t = 0.0)]
    epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    rho: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Median choice among qualifying vertices.
    #[arg(long, default_value = "best")]
    rule: String,
    /// Safety cutoff on total queries.
    #[arg(long, default_value_t = 10_000_000)]
    budget: u64,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    graph: PathBuf,
    #[arg(long, default_value = "gamma")]
    searcher: String,
    /// Comma-separated target labels; `t₁` first.
    #[arg(long)]
    targets: String,
    #[arg(long, default_value_t = 0.75)]
    p1: f64,
    /// `equiprobable` or `adversarial`.
    #[arg(long, default_value = "equiprobable")]
    tie: String,
    #[command(flatten)]
    opts: SearchOpts,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AdversaryArgs {
    #[arg(long)]
    game: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    epsilon: f64,
    /// Antipodal target pairs for cycle-antipodal.
    #[arg(long, default_value_t = 1)]
    c: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct ExperimentArgs {
    #[command(flatten)]
    generator: GeneratorArgs,
    #[arg(long)]
    searcher: String,
    /// Adversary game for gamma-probe searchers.
    #[arg(long)]
    game: Option<String>,
    #[arg(long, default_value_t = 1)]
    c: usize,
    #[arg(long, default_value_t = 0.75)]
    p1: f64,
    #[arg(long, default_value = "equiprobable")]
    tie: String,
    /// Number of targets for restricted-set.
    #[arg(long, default_value_t = 1)]
    targets: usize,
    #[arg(long, default_value_t = 100)]
    trials: u64,
    #[command(flatten)]
    opts: SearchOpts,
    #[arg(long, default_value = "csv")]
    format: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Records written by `experiment`, CSV or JSON.
    #[arg(long)]
    input: PathBuf,
    /// Check every trial against this cap instead of the recorded bound.
    #[arg(long, conflicts_with = "min_queries")]
    max_queries: Option<u64>,
    /// Check every trial against this floor instead of the recorded bound.
    #[arg(long)]
    min_queries: Option<u64>,
    #[arg(long)]
    min_success: Option<f64>,
}

enum Failure {
    Usage(String),
    Runtime(String),
    Violation,
}

fn usage(e: impl Display) -> Failure {
    Failure::Usage(e.to_string())
}

fn runtime(e: impl Display) -> Failure {
    Failure::Runtime(e.to_string())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Gen(a) => cmd_gen(a),
        Command::Search(a) => cmd_search(a),
        Command::Adversary(a) => cmd_adversary(a),
        Command::Experiment(a) => cmd_experiment(a),
        Command::Verify(a) => cmd_verify(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Runtime(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
        Err(Failure::Violation) => ExitCode::from(1),
    }
}

fn emit(out: Option<&PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| runtime(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            if !text.ends_with('\n') {
                println!();
            }
            Ok(())
        }
    }
}

fn generator_spec(a: &GeneratorArgs) -> Result<GeneratorSpec, Failure> {
    let kind = a.kind.as_deref().ok_or_else(|| usage("--kind is required"))?;
    let (kind, weighted) = parse_kind(kind).map_err(usage)?;
    let mut spec = GeneratorSpec::new(kind, a.n);
    spec.weighted = weighted;
    spec.extra_edges = a.extra;
    spec.max_degree = a.max_degree;
    Ok(spec)
}

fn cmd_gen(a: GenArgs) -> Result<(), Failure> {
    let g = generate(&generator_spec(&a.generator)?, a.seed).map_err(usage)?;
    emit(a.out.as_ref(), &g.to_edge_list())
}

fn parse_rule(s: &str, seed: u64) -> Result<ChoiceRule, Failure> {
    match s {
        "best" => Ok(ChoiceRule::Best),
        "worst-qualifying" => Ok(ChoiceRule::WorstQualifying),
        "random-qualifying" => Ok(ChoiceRule::RandomQualifying { seed }),
        other => Err(usage(format!("unknown rule `{other}`"))),
    }
}

fn parse_tie(s: &str) -> Result<TiePolicy, Failure> {
    match s {
        "equiprobable" => Ok(TiePolicy::Equiprobable),
        "adversarial" => Ok(TiePolicy::AdversarialSmallestId),
        other => Err(usage(format!("unknown tie policy `{other}`"))),
    }
}

fn search_params(o: &SearchOpts) -> Result<SearchParams, Failure> {
    Ok(SearchParams {
        epsilon: o.epsilon,
        rho: o.rho,
        seed: o.seed,
        budget: o.budget,
        rule: parse_rule(&o.rule, o.seed)?,
        keep_records: true,
    })
}

fn resolve_targets(g: &Graph, list: &str) -> Result<Vec<Vertex>, Failure> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| g.id_of(s).ok_or_else(|| usage(format!("no vertex labelled `{s}`"))))
        .collect()
}

fn cmd_search(a: SearchArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&a.graph).map_err(|e| usage(format!("{}: {e}", a.graph.display())))?;
    let g = Graph::parse_edge_list(&text).map_err(usage)?;
    let targets = resolve_targets(&g, &a.targets)?;
    let searcher: SearcherKind = a.searcher.parse().map_err(usage)?;
    let params = search_params(&a.opts)?;
    let tie = parse_tie(&a.tie)?;
    let ig = IndexedGraph::new(g);
    let need = |k: usize| {
        if targets.len() == k {
            Ok(())
        } else {
            Err(usage(format!("{searcher} needs {k} targets, got {}", targets.len())))
        }
    };
    let two = |seed| -> Result<TargetOracle<'_>, Failure> {
        let cfg = OracleConfig::two(targets[0], targets[1], a.p1, tie, seed).map_err(usage)?;
        TargetOracle::new(&ig, cfg).map_err(usage)
    };
    let oseed = params.seed;
    let result: Result<(String, Transcript), (String, Transcript)> = match searcher {
        SearcherKind::Gamma => {
            need(1)?;
            let mut o = TargetOracle::new(&ig, OracleConfig::single(targets[0], oseed)).map_err(usage)?;
            wrap(gamma_binary_search(&ig, &mut o, &params), |v| label(&ig, &[*v]))
        }
        SearcherKind::NoisyFirst => {
            need(2)?;
            let mut o = two(oseed)?;
            wrap(noisy_first_target(&ig, &mut o, a.p1, &params), |v| label(&ig, &[*v]))
        }
        SearcherKind::TreeTwoTarget => {
            need(2)?;
            let mut o = two(oseed)?;
            wrap(tree_two_target_search(&ig, &mut o, a.p1, &params), |&(x, y)| label(&ig, &[x, y]))
        }
        SearcherKind::Algorithm1 => {
            need(2)?;
            let mut o = two(oseed)?;
            wrap(algorithm1_second_target(&ig, targets[0], &mut o, a.p1, &params), |v| label(&ig, &[*v]))
        }
        SearcherKind::Algorithm2 => {
            need(2)?;
            let mut o = two(oseed)?;
            wrap(algorithm2_direction_distance(&ig, targets[0], &mut o, &params), |v| label(&ig, &[*v]))
        }
        SearcherKind::Algorithm3 => {
            need(2)?;
            let mut o = two(oseed)?;
            wrap(algorithm3_vertex_edge(&ig, targets[0], &mut o, &params), |v| label(&ig, &[*v]))
        }
        SearcherKind::RestrictedSet => {
            let mut o = RestrictedOracle::new(&ig, targets.clone()).map_err(usage)?;
            wrap(restricted_set_search(&ig, &mut o, targets.len(), &params), |vs| label(&ig, vs))
        }
        other => return Err(usage(format!("{other} runs against a game; use `adversary`"))),
    };
    match result {
        Ok((found, t)) => {
            emit(a.out.as_ref(), &t.to_json())?;
            eprintln!("found {found} in {} queries", t.total_queries());
            Ok(())
        }
        Err((err, t)) => {
            emit(a.out.as_ref(), &t.to_json())?;
            Err(runtime(format!("search failed after {} queries: {err}", t.total_queries())))
        }
    }
}

fn label(ig: &IndexedGraph, vs: &[Vertex]) -> String {
    vs.iter().map(|&v| ig.graph().label(v)).collect::<Vec<_>>().join(",")
}

fn wrap<T>(
    r: gsearch::searchers::SearchResult<T>,
    show: impl FnOnce(&T) -> String,
) -> Result<(String, Transcript), (String, Transcript)> {
    match r {
        Ok((v, t)) => Ok((show(&v), t)),
        Err(f) => Err((f.error.to_string(), f.transcript)),
    }
}

fn report<G: AdversaryGame>(cg: &CertifiedGame<G>, found: Option<Vertex>, before: Option<usize>) {
    println!("game: {}", cg.game.name());
    println!("queries: {}", cg.game.queries());
    if let Some(b) = before {
        println!("queries_before_commitment: {b}");
    }
    println!("lower_bound: {}", cg.game.lower_bound());
    println!("committed: {:?}", cg.game.committed());
    if let Some(v) = found {
        println!("found: {v}");
    }
    println!("certified: {}", cg.is_clean() && cg.game.certify().is_ok());
}

fn probe<G: AdversaryGame + DirectionOracle>(game: G) -> (CertifiedGame<G>, Option<Vertex>) {
    let ig = IndexedGraph::new(game.graph().clone());
    let mut cg = CertifiedGame::new(game);
    let found = gamma_probe_search(&ig, &mut cg, &SearchParams::default()).ok().map(|(v, _)| v);
    (cg, found)
}

fn cmd_adversary(a: AdversaryArgs) -> Result<(), Failure> {
    match a.game.as_str() {
        "phi-trap" => {
            let mut g = PhiTrapGame::new(a.n, a.epsilon).map_err(usage)?;
            let rep = g.run().map_err(runtime)?;
            println!("game: phi-trap");
            println!("forced_queries: {}", rep.forced_queries);
            println!("lower_bound: {}", g.lower_bound());
            println!("closed_forms_match: {}", rep.closed_forms_match);
            let worst = rep.ratios.iter().copied().fold(0.0, f64::max);
            println!("max_ratio: {worst:.6}");
            println!("certified: {}", g.certify().is_ok());
        }
        "mul-marking" => {
            let mut g = MarkingGame::new(a.n, a.epsilon).map_err(usage)?;
            let rep = window_prober(&mut g);
            println!("game: mul-marking");
            println!("queries_to_exhaust: {}", rep.queries_to_exhaust);
            println!("queries_to_find: {}", rep.queries_to_find);
            println!("lower_bound: {}", g.lower_bound());
            println!("max_new_columns: {}", g.new_columns().iter().max().unwrap_or(&0));
            println!("target: {}", rep.target);
            println!("certified: {}", g.certify().is_ok());
        }
        "grid-additive" => {
            let (cg, found) = probe(GridAdditiveGame::new(a.n).map_err(usage)?);
            report(&cg, found, None);
        }
        "path-two-target" => {
            let (cg, found) = probe(PathTwoTargetGame::new(a.n).map_err(usage)?);
            report(&cg, found, None);
        }
        "cycle-antipodal" => {
            let (cg, found) = probe(CycleAntipodalGame::new(a.n, a.c, a.seed).map_err(usage)?);
            let before = cg.game.queries_before_commitment();
            report(&cg, found, Some(before));
        }
        "cycle-twodir" => {
            let game = CycleTwoDirectionGame::new(a.n).map_err(usage)?;
            let ig = IndexedGraph::new(game.graph().clone());
            let mut cg = CertifiedGame::new(game);
            let found = gamma_probe_search_two_direction(&ig, &mut cg, &SearchParams::default()).ok().map(|(v, _)| v);
            let before = cg.game.queries_before_commitment();
            report(&cg, found, Some(before));
        }
        other => return Err(usage(format!("unknown game `{other}`; expected one of {}", GAME_NAMES.join(", ")))),
    }
    Ok(())
}

fn cmd_experiment(a: ExperimentArgs) -> Result<(), Failure> {
    let searcher: SearcherKind = a.searcher.parse().map_err(usage)?;
    let tie = parse_tie(&a.tie)?;
    let oracle = match (&a.game, OracleSpec::default_for(searcher, a.p1, a.targets)) {
        (Some(game), _) => OracleSpec::Game { game: game.clone(), c: a.c },
        (None, Some(OracleSpec::TwoTarget { p1, .. })) => OracleSpec::TwoTarget { p1, tie },
        (None, Some(o)) => o,
        (None, None) => return Err(usage(format!("{searcher} needs --game"))),
    };
    let generator = match (&oracle, &a.generator.kind) {
        // Games build their own graph; the kind is informational.
        (OracleSpec::Game { .. }, None) => GeneratorSpec::new(GraphKind::Path, a.generator.n),
        _ => generator_spec(&a.generator)?,
    };
    let format: OutputFormat = a.format.parse().map_err(usage)?;
    let mut params = search_params(&a.opts)?;
    params.keep_records = false;
    let mut cfg = ExperimentConfig::new(generator, searcher, oracle).trials(a.trials).seed(a.opts.seed).params(params);
    cfg.format = format;
    let records = run_experiment(&cfg).map_err(|e| match e {
        HarnessError::Csv(_) | HarnessError::Io(_) => runtime(e),
        _ => usage(e),
    })?;
    emit(a.out.as_ref(), &render(&records, format).map_err(runtime)?)
}

fn cmd_verify(a: VerifyArgs) -> Result<(), Failure> {
    let text = std::fs::read_to_string(&a.input).map_err(|e| usage(format!("{}: {e}", a.input.display())))?;
    let records = parse_records(&text).map_err(usage)?;
    let bound = match (a.max_queries, a.min_queries) {
        (Some(m), _) => BoundSpec::MaxQueries(m),
        (None, Some(m)) => BoundSpec::MinQueries(m),
        (None, None) => BoundSpec::Recorded,
    };
    let rep = verify_bounds(&records, &VerifySpec { bound, min_success_rate: a.min_success });
    println!("{rep}");
    if rep.passed() {
        Ok(())
    } else {
        Err(Failure::Violation)
    }
}
