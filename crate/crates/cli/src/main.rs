//! `treedyn`: analyze periodic-orbit patterns of tree maps, print forcing
//! thresholds, run the exhaustive sweep and synthesize model maps.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use treedyn_core::forcing::SharkovskiiKey;
use treedyn_core::pattern_file::{parse, parse_pattern, write_map};
use treedyn_core::plmap::DEFAULT_BUDGET;
use treedyn_core::report::{self, Report};
use treedyn_core::sweep::{run_sweep, SweepConfig};
use treedyn_core::synthesis::{synth_period_set, synth_prop3, synth_snowflake_map, SynthesisError};
use treedyn_core::tree::Tree;

const EXIT_FAILED: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_PRECONDITION: u8 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "treedyn", version)]
#[command(about = "Periodic orbits, forcing and entropy of tree maps")]
struct Cli {
    /// Report format.
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,

    /// Period cutoff. Each command has its own default.
    #[arg(long, global = true)]
    cutoff: Option<u64>,

    /// Numerical tolerance for the spectral radius.
    #[arg(long, global = true, default_value_t = 1e-9)]
    tol: f64,

    /// Loop-search budget per period.
    #[arg(long, global = true, default_value_t = DEFAULT_BUDGET)]
    budget: u64,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
#[allow(clippy::large_enum_variant)]
enum Command {
    /// Full report on the pattern in FILE (default cutoff 2N).
    Analyze { file: PathBuf },

    /// Forcing numbers for a tree with END endpoints and EDG reduced edges,
    /// listed up to the cutoff (default 40).
    Thresholds {
        #[arg(long)]
        end: u64,
        #[arg(long)]
        edg: u64,
    },

    /// Check every normalized pattern up to the limits (default cutoff 40).
    Sweep {
        #[arg(long, default_value_t = 6)]
        max_period: usize,
        #[arg(long, default_value_t = 3)]
        max_endpoints: usize,
    },

    /// Build a map, re-verify it and optionally dump it.
    Synth {
        #[command(subcommand)]
        kind: SynthKind,

        /// Where to write the map dump.
        #[arg(long, global = true)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Subcommand)]
enum SynthKind {
    /// Zero-entropy extension of the snowflake pattern in FILE (default
    /// cutoff 2N).
    Snowflake { file: PathBuf },

    /// Period set {1} ∪ n·S(key) on an ambient tree.
    PeriodSet {
        #[arg(long)]
        n: usize,
        /// A positive integer, `2^inf` or `empty`.
        #[arg(long, value_parser = parse_key)]
        key: SharkovskiiKey,
        #[command(flatten)]
        ambient: Ambient,
    },

    /// Snowflake orbit of period 2^k·m on m legs (default cutoff 2·2^k·m).
    Prop3 {
        #[arg(long)]
        m: usize,
        #[arg(long)]
        k: u32,
        #[command(flatten)]
        ambient: Ambient,
    },
}

#[derive(Debug, clap::Args)]
#[group(multiple = false)]
struct Ambient {
    /// `interval`, `star:K` or `h`.
    #[arg(long, value_parser = parse_shape)]
    shape: Option<Tree>,
    /// Ambient tree file; any cycle line is ignored.
    #[arg(long)]
    tree: Option<PathBuf>,
}

fn parse_key(s: &str) -> Result<SharkovskiiKey, String> {
    match s {
        "2^inf" => Ok(SharkovskiiKey::TwoInf),
        "empty" => Ok(SharkovskiiKey::Empty),
        _ => match s.parse::<u64>() {
            Ok(k) if k >= 1 => Ok(SharkovskiiKey::Int(k)),
            _ => Err(format!(
                "`{s}` is not a positive integer, `2^inf` or `empty`"
            )),
        },
    }
}

fn parse_shape(s: &str) -> Result<Tree, String> {
    if s == "interval" {
        return Ok(Tree::path(2));
    }
    if s == "h" {
        let nodes = ["a", "b", "c", "d", "u", "v"];
        let edges = [("a", "u"), ("b", "u"), ("u", "v"), ("v", "c"), ("v", "d")];
        return Tree::from_labels(&nodes, &edges).map_err(|e| e.to_string());
    }
    if let Some(k) = s.strip_prefix("star:") {
        return match k.parse::<usize>() {
            Ok(k) if k >= 2 => Ok(Tree::star(k)),
            _ => Err(format!("star needs at least 2 legs, got `{k}`")),
        };
    }
    Err(format!("unknown shape `{s}`"))
}

/// A failure with its exit code; the message goes to stderr.
struct Failure {
    code: u8,
    message: String,
}

fn input(message: impl ToString) -> Failure {
    Failure {
        code: EXIT_INPUT,
        message: message.to_string(),
    }
}

fn synthesis(e: SynthesisError) -> Failure {
    let code = match e {
        SynthesisError::Map(_) | SynthesisError::Tree(_) => EXIT_INPUT,
        _ => EXIT_PRECONDITION,
    };
    Failure {
        code,
        message: e.to_string(),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn ambient_tree(a: &Ambient) -> Result<Tree, Failure> {
    match (&a.shape, &a.tree) {
        (Some(t), None) => Ok(t.clone()),
        (None, Some(path)) => {
            let text = read(path)?;
            parse(&text)
                .map(|f| f.tree)
                .map_err(|e| input(format!("{}: {e}", path.display())))
        }
        _ => Err(input("give one of --shape or --tree")),
    }
}

/// The report plus an exit code decided by the command.
struct Outcome {
    report: Report,
    code: u8,
}

fn run(cli: &Cli) -> Result<Outcome, Failure> {
    if cli.tol.is_nan() || cli.tol <= 0.0 {
        return Err(input("--tol must be positive"));
    }
    match &cli.command {
        Command::Analyze { file } => {
            let text = read(file)?;
            let (pattern, parsed) =
                parse_pattern(&text).map_err(|e| input(format!("{}: {e}", file.display())))?;
            let cutoff = cli.cutoff.unwrap_or(2 * pattern.period() as u64);
            let report = report::analyze(&pattern, &parsed.tree, cutoff, cli.tol, cli.budget)
                .map_err(input)?;
            let code = if report.budget_exceeded {
                EXIT_BUDGET
            } else {
                0
            };
            Ok(Outcome { report, code })
        }
        Command::Thresholds { end, edg } => {
            let report = report::thresholds(*end, *edg, cli.cutoff.unwrap_or(40)).map_err(input)?;
            Ok(Outcome { report, code: 0 })
        }
        Command::Sweep {
            max_period,
            max_endpoints,
        } => {
            let config = SweepConfig {
                max_period: *max_period,
                max_endpoints: *max_endpoints,
                cutoff: cli.cutoff.unwrap_or(40),
                tol: cli.tol,
                budget: cli.budget,
            };
            let r = run_sweep(&config).map_err(input)?;
            let code = if !r.is_clean() {
                EXIT_FAILED
            } else if !r.budget_exceeded.is_empty() {
                EXIT_BUDGET
            } else {
                0
            };
            let report = Report {
                value: serde_json::to_value(&r).expect("sweep reports serialize"),
                budget_exceeded: !r.budget_exceeded.is_empty(),
            };
            Ok(Outcome { report, code })
        }
        Command::Synth { kind, out } => {
            let (name, map, pattern, default_cutoff) = match kind {
                SynthKind::Snowflake { file } => {
                    let text = read(file)?;
                    let (pattern, parsed) = parse_pattern(&text)
                        .map_err(|e| input(format!("{}: {e}", file.display())))?;
                    let map = synth_snowflake_map(&pattern, &parsed.tree).map_err(synthesis)?;
                    let cutoff = 2 * pattern.period() as u64;
                    ("snowflake", map, Some(pattern), cutoff)
                }
                SynthKind::PeriodSet { n, key, ambient } => {
                    let tree = ambient_tree(ambient)?;
                    let map = synth_period_set(&tree, *n, *key).map_err(synthesis)?;
                    let scale = match key {
                        SharkovskiiKey::Int(k) => 2 * (*n as u64).saturating_mul(*k),
                        _ => 0,
                    };
                    ("period-set", map, None, scale.clamp(16, 64))
                }
                SynthKind::Prop3 { m, k, ambient } => {
                    let tree = ambient_tree(ambient)?;
                    let (map, pattern) = synth_prop3(&tree, *m, *k).map_err(synthesis)?;
                    let cutoff = 2 * pattern.period() as u64;
                    ("prop3", map, Some(pattern), cutoff)
                }
            };
            let cutoff = cli.cutoff.unwrap_or(default_cutoff);
            let v = map.verify(cutoff, cli.tol, cli.budget).map_err(input)?;
            if let Some(path) = out {
                fs::write(path, write_map(&map.map, &map.orbit))
                    .map_err(|e| input(format!("{}: {e}", path.display())))?;
            }
            let report = report::synthesized(name, &map, &v, pattern.as_ref());
            let code = if report.budget_exceeded {
                EXIT_BUDGET
            } else if !v.passed() {
                EXIT_FAILED
            } else {
                0
            };
            Ok(Outcome { report, code })
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_INPUT } else { 0 });
        }
    };
    match run(&cli) {
        Ok(outcome) => {
            match cli.format {
                Format::Text => print!("{}", outcome.report.to_text()),
                Format::Json => print!("{}", outcome.report.to_json()),
            }
            ExitCode::from(outcome.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
