use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use avgdist::adversary::{AdversaryState, SeparationReport};
use avgdist::approximators::{
    certified_expander, estimate_average, sandwich_check, universal_query_set, NonAdaptive, QuerySet,
    UNIVERSAL_CONSTANT,
};
use avgdist::embeddings::metric_to_3regular;
use avgdist::game::{run_game, StrategyKind};
use avgdist::graphs::{
    extrapolation_checks, normalized_spectrum, poincare_estimate, random_regular, PoincareBudget, PoincareMode,
    RegularGraph, Target,
};
use avgdist::hadamard::inequality_suite;
use avgdist::io::{load_graph, load_metric, load_regular_graph, save_metric, save_regular_graph, write_regular_graph};
use avgdist::metric::average_distance;
use avgdist::zigzag::{stage_report, zigzag_iterate, zigzag_product, IterationConfig};
use avgdist::Error;
use serde::Serialize;
use serde_json::json;

use crate::{GraphKind, ModeArg, StrategyArg};

pub fn print_json(value: &impl Serialize) -> anyhow::Result<()> {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn internal(msg: impl Into<String>) -> anyhow::Error {
    Error::Internal(msg.into()).into()
}

/// `$AVGDIST_CACHE_DIR/<name>` when the variable is set.
fn cache_path(name: &str) -> Option<PathBuf> {
    std::env::var_os("AVGDIST_CACHE_DIR").map(|dir| PathBuf::from(dir).join(name))
}

fn cached_graph(name: &str, build: impl FnOnce() -> avgdist::Result<RegularGraph>) -> anyhow::Result<RegularGraph> {
    let Some(path) = cache_path(name) else {
        return Ok(build()?);
    };
    if path.exists() {
        return load_regular_graph(&path).with_context(|| format!("reading cached {}", path.display()));
    }
    let g = build()?;
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    save_regular_graph(&path, &g)?;
    Ok(g)
}

/// Certified expander with at least `n` vertices, through the cache.
pub fn expander_for(n: usize, seed: u64) -> anyhow::Result<RegularGraph> {
    cached_graph(&format!("expander-{n}-{seed}.txt"), || certified_expander(n, seed).map(|(g, _)| g))
}

pub fn gen_graph(kind: GraphKind, n: usize, d: usize, seed: u64, out: Option<&Path>) -> anyhow::Result<()> {
    let g = match kind {
        GraphKind::RandomRegular => cached_graph(&format!("rr-{n}-{d}-{seed}.txt"), || random_regular(n, d, seed))?,
        GraphKind::Cycle => RegularGraph::cycle(n)?,
        GraphKind::Complete => RegularGraph::complete(n)?,
        GraphKind::CompleteLoops => RegularGraph::complete_with_loops(n)?,
        GraphKind::Expander => expander_for(n, seed)?,
    };
    match out {
        Some(path) => save_regular_graph(path, &g)?,
        None => write_regular_graph(std::io::stdout().lock(), &g)?,
    }
    Ok(())
}

pub fn spectrum(graph: &Path) -> anyhow::Result<()> {
    let g = load_regular_graph(graph)?;
    print_json(&normalized_spectrum(&g)?)
}

pub fn poincare(
    graph: &Path,
    target: Option<&Path>,
    p: f64,
    mode: ModeArg,
    seed: u64,
    extrapolate: Option<f64>,
) -> anyhow::Result<()> {
    let g = load_regular_graph(graph)?;
    let target = match target {
        Some(path) => Target::Finite(load_metric(path)?),
        None => Target::Reals,
    };
    let mode = match mode {
        ModeArg::Gamma => PoincareMode::Gamma,
        ModeArg::GammaPlus => PoincareMode::GammaPlus,
    };
    let budget = PoincareBudget { seed, ..PoincareBudget::default() };
    let estimate = poincare_estimate(&g, &target, p, mode, &budget)?;
    let extrapolation = extrapolate.map(|q| extrapolation_checks(&g, p, q, &budget)).transpose()?;
    print_json(&json!({ "estimate": estimate, "extrapolation": extrapolation }))
}

pub fn zigzag(
    g: &Path,
    h: Option<&Path>,
    m0: usize,
    j_max: usize,
    relaxed: bool,
    out: Option<&Path>,
) -> anyhow::Result<()> {
    let g = load_regular_graph(g)?;
    match h {
        Some(h) => {
            let h = load_regular_graph(h)?;
            let z = zigzag_product(&g, &h)?;
            let (rg, rh, rz) = (stage_report(0, &g), stage_report(0, &h), stage_report(0, &z));
            let bound = rg.gamma2_plus * rh.gamma2_plus * rh.gamma2_plus;
            if let Some(path) = out {
                save_regular_graph(path, &z)?;
            }
            print_json(&json!({
                "vertices": z.n(),
                "degree": z.degree(),
                "gamma2_plus": rz.gamma2_plus,
                "bound": bound,
                "within_bound": rz.gamma2_plus <= bound * (1.0 + 1e-9),
                "factors": [rg, rh],
            }))
        }
        None => {
            let it = zigzag_iterate(&IterationConfig { h: g, m0, j_max, relaxed })?;
            if let (Some(path), Some(last)) = (out, it.stages.last()) {
                save_regular_graph(path, last)?;
            }
            print_json(&json!({ "stages": it.reports, "truncated": it.truncated }))
        }
    }
}

fn parse_points(spec: &str, len: usize) -> anyhow::Result<Vec<usize>> {
    if spec == "all" {
        return Ok((0..len).collect());
    }
    let points = spec
        .split(',')
        .map(|s| s.trim().parse::<usize>().with_context(|| format!("bad point index {s:?}")))
        .collect::<anyhow::Result<Vec<_>>>()?;
    if let Some(&p) = points.iter().find(|&&p| p >= len) {
        bail!(Error::Invalid(format!("point {p} outside a metric on {len} points")));
    }
    Ok(points)
}

pub fn approx(expander: Option<&Path>, metric: &Path, points: &str, seed: u64) -> anyhow::Result<()> {
    let m = load_metric(metric)?;
    let points = parse_points(points, m.len())?;
    let n = points.len();
    let g = match expander {
        Some(path) => load_regular_graph(path)?,
        None => expander_for(n, seed)?,
    };
    let q = universal_query_set(&g, n, UNIVERSAL_CONSTANT)?;
    let estimate = estimate_average(&q, |a, b| m.get(points[a], points[b]));
    let exact = average_distance(&m, &points);
    let sandwich = sandwich_check(&q, &m, &points)?;
    print_json(&json!({
        "estimate": estimate,
        "exact": exact,
        "ratio": estimate / exact,
        "lower_ok": sandwich.lower_ok,
        "upper_ratio": sandwich.upper_ratio,
        "mean_over_pairs": sandwich.mean_over_pairs,
        "pairs": q.len(),
        "dropped_loops": q.dropped_loops,
        "expander_vertices": g.n(),
    }))
}

pub struct AdversaryArgs {
    pub n: usize,
    pub k: usize,
    pub m: usize,
    pub strategy: StrategyArg,
    pub pairs: Option<PathBuf>,
    pub seed: u64,
    pub dump_upper: Option<PathBuf>,
    pub dump_lower: Option<PathBuf>,
}

/// Plays `m` rounds of a strategy against the adaptive adversary.
pub fn play_adversary(
    n: usize,
    k: usize,
    m: usize,
    strategy: StrategyArg,
    pairs: Option<&Path>,
    seed: u64,
) -> anyhow::Result<AdversaryState> {
    let mut state = AdversaryState::for_budget(n, k, m)?;
    let mut chooser: Box<dyn avgdist::game::Strategy> = match strategy {
        StrategyArg::Random => StrategyKind::Random.build(n, seed),
        StrategyArg::Greedy => StrategyKind::Greedy.build(n, seed),
        StrategyArg::Bfs => StrategyKind::Bfs.build(n, seed),
        StrategyArg::File => {
            let path = pairs.ok_or_else(|| Error::Invalid("--strategy file needs --pairs".into()))?;
            let g = load_graph(path)?;
            if g.n != n {
                bail!(Error::Invalid(format!("pair file is on {} points, not {n}", g.n)));
            }
            let pairs: Vec<(usize, usize)> = g.edges.iter().map(|&(a, b, _)| (a, b)).collect();
            if pairs.is_empty() {
                bail!(Error::Invalid("pair file has no pairs".into()));
            }
            let sigma = 1.0 / pairs.len() as f64;
            Box::new(NonAdaptive::new(QuerySet { n, pairs, sigma, correction: 1.0, dropped_loops: 0 }))
        }
    };
    run_game(chooser.as_mut(), &mut state, m)?;
    Ok(state)
}

/// Separation report, failing when the game broke an invariant.
pub fn separation(state: &AdversaryState) -> anyhow::Result<SeparationReport> {
    if !state.is_consistent() {
        return Err(internal("queried graph distances disagree with the answers"));
    }
    let report = state.verify_separation();
    if !report.agreement_on_e {
        return Err(internal("final metrics disagree with the answers"));
    }
    Ok(report)
}

pub fn adversary(args: AdversaryArgs) -> anyhow::Result<()> {
    let state = play_adversary(args.n, args.k, args.m, args.strategy, args.pairs.as_deref(), args.seed)?;
    let report = separation(&state)?;
    if let Some(path) = &args.dump_upper {
        save_metric(path, &state.finalize_upper())?;
    }
    if let Some(path) = &args.dump_lower {
        save_metric(path, &state.finalize_lower())?;
    }
    print_json(&report)
}

pub fn embed(metric: &Path, eps: f64, out: Option<&Path>) -> anyhow::Result<()> {
    let m = load_metric(metric)?;
    let e = metric_to_3regular(&m, eps)?;
    if e.distortion.distortion > 1.0 + eps + 1e-9 {
        return Err(internal(format!("distortion {} exceeds 1 + ε", e.distortion.distortion)));
    }
    if let Some(path) = out {
        save_regular_graph(path, &e.graph)?;
    }
    print_json(&json!({
        "distortion": e.distortion.distortion,
        "expansion": e.distortion.expansion,
        "contraction": e.distortion.contraction,
        "input_points": m.len(),
        "vertices": e.graph.n(),
        "degree": e.graph.degree(),
        "padded": e.padded,
        "map": e.map,
    }))
}

pub fn check(trials: usize, seed: u64) -> anyhow::Result<()> {
    let report = inequality_suite(trials, seed);
    print_json(&report)?;
    if !report.all_ok {
        return Err(internal("inequality suite failed"));
    }
    Ok(())
}
