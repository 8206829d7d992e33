//! `avgdist` command-line front end.
//!
//! Exit codes: 0 success, 1 rejected input, 2 internal invariant failure,
//! 64 usage error.

mod chart;
mod commands;
mod suite;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

const EXIT_VALIDATION: u8 = 1;
const EXIT_INTERNAL: u8 = 2;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "avgdist", version, about = "Average-distance approximators, adversaries and metric geometry")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum GraphKind {
    RandomRegular,
    Cycle,
    Complete,
    CompleteLoops,
    /// Smallest certified random 3-regular expander with at least `n` vertices.
    Expander,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum StrategyArg {
    Random,
    Greedy,
    Bfs,
    /// Replay the pairs of `--pairs` in order.
    File,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Gamma,
    GammaPlus,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a regular graph file.
    GenGraph {
        #[arg(long, value_enum, default_value = "random-regular")]
        kind: GraphKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 3)]
        d: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Extreme eigenvalues of a regular graph's normalized adjacency.
    Spectrum {
        #[arg(long)]
        graph: PathBuf,
    },
    /// Poincaré constant of a graph into the reals or a finite metric.
    Poincare {
        #[arg(long)]
        graph: PathBuf,
        /// Metric CSV of the target; the real line when omitted.
        #[arg(long)]
        target: Option<PathBuf>,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, value_enum, default_value = "gamma")]
        mode: ModeArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also run the extrapolation spot checks with this second exponent.
        #[arg(long)]
        extrapolate: Option<f64>,
    },
    /// Zigzag product of two regular graphs, or the iteration from one seed graph.
    Zigzag {
        #[arg(long)]
        g: PathBuf,
        /// Second factor; without it `--g` seeds the iteration.
        #[arg(long)]
        h: Option<PathBuf>,
        #[arg(long, default_value_t = 2)]
        m0: usize,
        #[arg(long, default_value_t = 2)]
        j_max: usize,
        #[arg(long)]
        relaxed: bool,
        /// Where to write the product (or the last stage).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate an average distance from an expander query set.
    Approx {
        /// Expander graph file; a cached certified expander when omitted.
        #[arg(long)]
        expander: Option<PathBuf>,
        #[arg(long)]
        metric: PathBuf,
        /// Comma-separated point indices, or "all".
        #[arg(long, default_value = "all")]
        points: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Play a strategy against the adaptive adversary.
    Adversary {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        m: usize,
        #[arg(long, value_enum, default_value = "random")]
        strategy: StrategyArg,
        /// Pair list in graph-file format, for `--strategy file`.
        #[arg(long)]
        pairs: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        dump_upper: Option<PathBuf>,
        #[arg(long)]
        dump_lower: Option<PathBuf>,
    },
    /// Embed a finite metric into a 3-regular graph.
    Embed {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long)]
        eps: f64,
        /// Graph output file; stdout JSON only when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the inequality suite.
    Check {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Chart of query budget against approximation factor.
    Report {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the experiments of a config file into a results CSV.
    Suite {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the column schema of the results CSV.
    Schema,
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::GenGraph { kind, n, d, seed, out } => commands::gen_graph(kind, n, d, seed, out.as_deref()),
        Command::Spectrum { graph } => commands::spectrum(&graph),
        Command::Poincare { graph, target, p, mode, seed, extrapolate } => {
            commands::poincare(&graph, target.as_deref(), p, mode, seed, extrapolate)
        }
        Command::Zigzag { g, h, m0, j_max, relaxed, out } => {
            commands::zigzag(&g, h.as_deref(), m0, j_max, relaxed, out.as_deref())
        }
        Command::Approx { expander, metric, points, seed } => {
            commands::approx(expander.as_deref(), &metric, &points, seed)
        }
        Command::Adversary { n, k, m, strategy, pairs, seed, dump_upper, dump_lower } => commands::adversary(
            commands::AdversaryArgs { n, k, m, strategy, pairs, seed, dump_upper, dump_lower },
        ),
        Command::Embed { metric, eps, out } => commands::embed(&metric, eps, out.as_deref()),
        Command::Check { trials, seed } => commands::check(trials, seed),
        Command::Report { input, out } => chart::report(&input, &out),
        Command::Suite { config, out } => suite::run_file(&config, &out),
        Command::Schema => commands::print_json(&suite::schema()),
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<avgdist::Error>() {
        Some(e) if e.is_internal() => EXIT_INTERNAL,
        _ => EXIT_VALIDATION,
    }
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
