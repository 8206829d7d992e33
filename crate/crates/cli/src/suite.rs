//! Experiment configs in, one CSV row per (experiment, seed) out.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use anyhow::Context;
use avgdist::adversary::{small_alpha_adversary, small_alpha_bound};
use avgdist::approximators::{estimate_average, sample_baseline, sandwich_check, universal_query_set, UNIVERSAL_CONSTANT};
use avgdist::graphs::random_regular;
use avgdist::metric::{average_distance, shortest_path_metric};
use avgdist::{FiniteMetric, WeightedGraph};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;
use serde_json::{json, Map, Value};

use crate::commands::{expander_for, play_adversary, separation};
use crate::StrategyArg;

#[derive(Debug, Clone, Deserialize)]
pub struct Experiment {
    pub experiment: String,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub seeds: Vec<u64>,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum Config {
    List(Vec<Experiment>),
    Wrapped { experiments: Vec<Experiment> },
    Single(Experiment),
}

pub fn parse_config(text: &str) -> anyhow::Result<Vec<Experiment>> {
    let config: Config = serde_json::from_str(text).context("parsing experiment config")?;
    Ok(match config {
        Config::List(list) | Config::Wrapped { experiments: list } => list,
        Config::Single(e) => vec![e],
    })
}

/// Column names and descriptions, in CSV order.
pub const COLUMNS: [(&str, &str); 16] = [
    ("experiment", "experiment name from the config"),
    ("seed", "seed of this row"),
    ("status", "ok, or error when the row failed"),
    ("n", "number of points"),
    ("k", "adversary depth parameter; empty for approximators"),
    ("m", "query budget (adversary rounds or query-set size)"),
    ("strategy", "adversary query strategy"),
    ("eps", "queried fraction of pairs for small-alpha rows"),
    ("queries", "distinct pairs actually queried"),
    ("avg_upper", "adversary: average of the upper metric; approximators: the estimate"),
    ("avg_lower", "adversary: average of the lower metric; approximators: the exact average"),
    ("ratio", "avg_upper / avg_lower"),
    ("target", "reference value: 2(k+1), the small-alpha formula, or the approximator constant"),
    ("fraction_upper_at_k_plus_1", "share of pairs where the upper metric equals k+1"),
    ("fraction_lower_at_half", "share of pairs where the lower metric equals 1/2"),
    ("message", "error text for failed rows"),
];

pub fn schema() -> Value {
    let columns: Vec<Value> = COLUMNS.iter().map(|(name, doc)| json!({ "name": name, "description": doc })).collect();
    json!({ "format": "csv", "header": true, "columns": columns })
}

#[derive(Debug, Default, Clone)]
struct Row {
    n: Option<usize>,
    k: Option<usize>,
    m: Option<usize>,
    strategy: Option<String>,
    eps: Option<f64>,
    queries: Option<usize>,
    avg_upper: Option<f64>,
    avg_lower: Option<f64>,
    ratio: Option<f64>,
    target: Option<f64>,
    fraction_upper: Option<f64>,
    fraction_lower: Option<f64>,
}

fn param_usize(p: &Map<String, Value>, key: &str) -> anyhow::Result<Option<usize>> {
    match p.get(key) {
        None => Ok(None),
        Some(v) => v
            .as_u64()
            .map(|x| Some(x as usize))
            .ok_or_else(|| anyhow::anyhow!("parameter {key} must be a nonnegative integer")),
    }
}

fn param_f64(p: &Map<String, Value>, key: &str) -> anyhow::Result<Option<f64>> {
    match p.get(key) {
        None => Ok(None),
        Some(v) => v.as_f64().map(Some).ok_or_else(|| anyhow::anyhow!("parameter {key} must be a number")),
    }
}

fn required(p: &Map<String, Value>, key: &str) -> anyhow::Result<usize> {
    param_usize(p, key)?.ok_or_else(|| anyhow::anyhow!("missing parameter {key}"))
}

fn adversary_row(p: &Map<String, Value>, seed: u64) -> anyhow::Result<Row> {
    let n = required(p, "n")?;
    let k = param_usize(p, "k")?.unwrap_or(1);
    let exponent = param_f64(p, "m_exponent")?.unwrap_or(1.0 + 0.4 / k.max(1) as f64);
    let m = match param_usize(p, "m")? {
        Some(m) => m,
        None => (n as f64).powf(exponent).floor() as usize,
    };
    let name = p.get("strategy").and_then(Value::as_str).unwrap_or("random");
    let strategy = match name {
        "random" => StrategyArg::Random,
        "greedy" => StrategyArg::Greedy,
        "bfs" => StrategyArg::Bfs,
        other => anyhow::bail!("unknown strategy {other:?}"),
    };
    let state = play_adversary(n, k, m, strategy, None, seed)?;
    let r = separation(&state)?;
    Ok(Row {
        n: Some(n),
        k: Some(k),
        m: Some(m),
        strategy: Some(name.to_string()),
        queries: Some(r.queries),
        avg_upper: Some(r.avg_upper),
        avg_lower: Some(r.avg_lower),
        ratio: Some(r.ratio),
        target: Some(r.target),
        fraction_upper: Some(r.fraction_upper_at_k_plus_1),
        fraction_lower: Some(r.fraction_lower_at_half),
        ..Row::default()
    })
}

fn small_alpha_row(p: &Map<String, Value>, seed: u64) -> anyhow::Result<Row> {
    let n = required(p, "n")?;
    let eps = param_f64(p, "eps")?.ok_or_else(|| anyhow::anyhow!("missing parameter eps"))?;
    let total = n * n.saturating_sub(1) / 2;
    let m = (eps * total as f64).round() as usize;
    let pairs = sample_baseline(n, m, seed)?.pairs;
    let (_, _, r) = small_alpha_adversary(n, &pairs, eps)?;
    Ok(Row {
        n: Some(n),
        k: Some(1),
        m: Some(m),
        eps: Some(eps),
        queries: Some(r.queries),
        avg_upper: Some(r.avg_upper),
        avg_lower: Some(r.avg_lower),
        ratio: Some(r.ratio),
        target: Some(small_alpha_bound(eps)),
        fraction_upper: Some(r.fraction_upper_at_k_plus_1),
        fraction_lower: Some(r.fraction_lower_at_half),
        ..Row::default()
    })
}

/// Shortest-path metric of a connected random 3-regular graph.
fn host_metric(host_n: usize, seed: u64) -> anyhow::Result<FiniteMetric> {
    for attempt in 0..64 {
        let g = random_regular(host_n, 3, seed.wrapping_mul(64).wrapping_add(attempt))?;
        if g.is_connected() {
            let wg = WeightedGraph::unweighted(host_n, &g.edges())?;
            return Ok(shortest_path_metric(&wg, None)?);
        }
    }
    anyhow::bail!("no connected 3-regular host graph on {host_n} vertices")
}

fn approximator_row(p: &Map<String, Value>, seed: u64) -> anyhow::Result<Row> {
    let n = param_usize(p, "n")?.unwrap_or(64);
    let host_n = param_usize(p, "host_n")?.unwrap_or(512);
    if n > host_n {
        anyhow::bail!("need n ≤ host_n");
    }
    let host = host_metric(host_n, seed)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let points = sample(&mut rng, host_n, n).into_vec();
    let q = universal_query_set(&expander_for(n, seed)?, n, UNIVERSAL_CONSTANT)?;
    let estimate = estimate_average(&q, |a, b| host.get(points[a], points[b]));
    let exact = average_distance(&host, &points);
    let sandwich = sandwich_check(&q, &host, &points)?;
    if !sandwich.lower_ok {
        anyhow::bail!("sandwich lower bound failed");
    }
    Ok(Row {
        n: Some(n),
        m: Some(q.len()),
        queries: Some(q.len()),
        avg_upper: Some(estimate),
        avg_lower: Some(exact),
        ratio: Some(estimate / exact),
        target: Some(UNIVERSAL_CONSTANT),
        ..Row::default()
    })
}

fn baseline_row(p: &Map<String, Value>, seed: u64) -> anyhow::Result<Row> {
    let n = param_usize(p, "n")?.unwrap_or(100);
    let m = param_usize(p, "m")?.unwrap_or(5 * n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let pts: Vec<(f64, f64)> = (0..n).map(|_| (rng.gen(), rng.gen())).collect();
    let metric = FiniteMetric::from_fn(n, |i, j| (pts[i].0 - pts[j].0).hypot(pts[i].1 - pts[j].1));
    let q = sample_baseline(n, m, seed)?;
    let estimate = q.correction * estimate_average(&q, |a, b| metric.get(a, b));
    let all: Vec<usize> = (0..n).collect();
    let exact = average_distance(&metric, &all);
    Ok(Row {
        n: Some(n),
        m: Some(m),
        queries: Some(q.len()),
        avg_upper: Some(estimate),
        avg_lower: Some(exact),
        ratio: Some(estimate / exact),
        ..Row::default()
    })
}

fn run_one(e: &Experiment, seed: u64) -> anyhow::Result<Row> {
    match e.experiment.as_str() {
        "adversary" => adversary_row(&e.params, seed),
        "small-alpha" => small_alpha_row(&e.params, seed),
        "approximator" => approximator_row(&e.params, seed),
        "baseline" => baseline_row(&e.params, seed),
        other => anyhow::bail!("unknown experiment {other:?}"),
    }
}

fn cell<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(T::to_string).unwrap_or_default()
}

/// Runs every (experiment, seed) pair; a failing row is recorded and the
/// rest continue. Returns the CSV text and one log line per row.
pub fn experiment_suite(experiments: &[Experiment]) -> anyhow::Result<(String, Vec<String>)> {
    let jobs: Vec<(&Experiment, u64)> =
        experiments.iter().flat_map(|e| e.seeds.iter().map(move |&s| (e, s))).collect();
    let results: Vec<(anyhow::Result<Row>, u128)> = jobs
        .par_iter()
        .map(|&(e, seed)| {
            let start = Instant::now();
            let row = run_one(e, seed);
            (row, start.elapsed().as_millis())
        })
        .collect();

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(COLUMNS.iter().map(|(name, _)| *name))?;
    let mut log = Vec::new();
    for ((e, seed), (row, millis)) in jobs.iter().zip(results) {
        let (status, message, row) = match row {
            Ok(r) => ("ok".to_string(), String::new(), r),
            Err(err) => ("error".to_string(), format!("{err:#}"), Row::default()),
        };
        w.write_record([
            e.experiment.clone(),
            seed.to_string(),
            status.clone(),
            cell(&row.n),
            cell(&row.k),
            cell(&row.m),
            cell(&row.strategy),
            cell(&row.eps),
            cell(&row.queries),
            cell(&row.avg_upper),
            cell(&row.avg_lower),
            cell(&row.ratio),
            cell(&row.target),
            cell(&row.fraction_upper),
            cell(&row.fraction_lower),
            message,
        ])?;
        log.push(format!("{} seed={seed} status={status} elapsed_ms={millis}", e.experiment));
    }
    let bytes = w.into_inner().map_err(|e| anyhow::anyhow!("flushing CSV: {e}"))?;
    Ok((String::from_utf8(bytes)?, log))
}

/// Writes the results CSV, `<out>.schema.json`, and a timestamped `<out>.log`.
pub fn run_file(config: &Path, out: &Path) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(config).with_context(|| format!("reading {}", config.display()))?;
    let experiments = parse_config(&text).map_err(|e| avgdist::Error::Parse(format!("{e:#}")))?;
    let (csv_text, log) = experiment_suite(&experiments)?;
    std::fs::write(out, csv_text)?;
    std::fs::write(sidecar(out, "schema.json"), serde_json::to_string_pretty(&schema())?)?;
    let now = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let mut text = format!("finished_unix={now}\n");
    for line in log {
        let _ = writeln!(text, "{line}");
    }
    std::fs::write(sidecar(out, "log"), text)?;
    Ok(())
}

fn sidecar(out: &Path, ext: &str) -> std::path::PathBuf {
    let mut name = out.file_name().map(|s| s.to_os_string()).unwrap_or_default();
    name.push(".");
    name.push(ext);
    out.with_file_name(name)
}
