//! The `triprof` command-line driver.
//!
//! [`run`] parses arguments, runs one subcommand on a fresh [`Engine`] and
//! writes a JSON report. Large per-vertex and per-center tables go to TSV side
//! files.

mod commands;
mod report;

use std::ffi::OsString;
use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use triprof::Engine;

pub use report::{accuracy_ratio, mean_and_stddev};

#[derive(Debug, Parser)]
#[command(
    name = "triprof",
    version,
    about = "Exact and edge-sampled 3-profiles of undirected graphs"
)]
struct Cli {
    /// Engine worker threads [default: available parallelism]
    #[arg(long, global = true, env = "TRIPROF_THREADS")]
    threads: Option<usize>,

    /// Write the JSON report to this file instead of stdout
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,

    /// Mask timings and worker counts so reports compare byte for byte
    #[arg(long, global = true)]
    no_timing: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Global and per-vertex 3-profiles, exact or from an edge sample
    Profile(ProfileArgs),
    /// Ego 3-profiles for a set of centers
    Ego(EgoArgs),
    /// Brute-force reference counts (small graphs only)
    Oracle(OracleArgs),
    /// Evaluate the sparsifier concentration conditions
    SparsifierCheck(SparsifierArgs),
    /// Evaluate the sampling indicator polynomials on seeded masks
    Polys(PolysArgs),
    /// Time triangle counting against the full 3-profile
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct GraphArgs {
    /// Edge list, one "u w" pair per line; '#' starts a comment line
    graph: PathBuf,

    /// Total number of vertices, for graphs with isolated vertices
    #[arg(long, value_name = "N")]
    vertex_count: Option<usize>,
}

#[derive(Debug, Args)]
struct ProfileArgs {
    #[command(flatten)]
    graph: GraphArgs,

    /// Keep each edge with this probability and report unbiased estimates
    #[arg(long)]
    p: Option<f64>,

    /// Seed of the first sampling run; run i uses seed + i
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Number of sampling runs
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    runs: u32,

    /// Also compute the exact profile and report exact/estimate ratios
    #[arg(long)]
    compare_exact: bool,

    /// Write per-vertex local profiles (exact runs only) as TSV
    #[arg(long, value_name = "PATH")]
    local_out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum EgoMode {
    Serial,
    Parallel,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("selection").required(true).args(["centers", "random", "all"])))]
struct EgoArgs {
    #[command(flatten)]
    graph: GraphArgs,

    /// File with one center label per line
    #[arg(long, value_name = "PATH")]
    centers: Option<PathBuf>,

    /// Pick this many distinct centers uniformly at random
    #[arg(long, value_name = "K")]
    random: Option<usize>,

    /// Use every vertex as a center
    #[arg(long)]
    all: bool,

    /// Seed for --random
    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, value_enum, default_value_t = EgoMode::Parallel)]
    mode: EgoMode,

    /// Write the "center f0 f1 f2 f3" table here instead of inlining it
    #[arg(long, value_name = "PATH")]
    table_out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    graph: GraphArgs,

    /// Write brute-force local profiles as TSV
    #[arg(long, value_name = "PATH")]
    local_out: Option<PathBuf>,

    /// Write brute-force ego profiles of every vertex as TSV
    #[arg(long, value_name = "PATH")]
    ego_out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum LogBaseArg {
    E,
    #[value(name = "2")]
    Two,
}

#[derive(Debug, Args)]
struct SparsifierArgs {
    #[command(flatten)]
    graph: GraphArgs,

    #[arg(long)]
    p: f64,

    #[arg(long)]
    epsilon: f64,

    #[arg(long)]
    gamma: f64,

    #[arg(long, value_enum, default_value_t = LogBaseArg::E)]
    log_base: LogBaseArg,

    /// Evaluate the conditions before the redundant max-terms are dropped
    #[arg(long)]
    prefinal: bool,
}

#[derive(Debug, Args)]
struct PolysArgs {
    #[command(flatten)]
    graph: GraphArgs,

    #[arg(long)]
    p: f64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u32).range(1..))]
    runs: u32,

    /// Refuse graphs with more than this many connected triples to enumerate
    #[arg(long, default_value_t = 50_000_000, value_name = "N")]
    max_enumeration: u128,
}

#[derive(Debug, Args)]
struct BenchArgs {
    #[command(flatten)]
    graph: GraphArgs,

    /// Timed repetitions; the median is reported
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    repeats: u32,
}

/// Failure of a run, split by exit status.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments: exit status 1.
    Usage(String),
    /// Unreadable or malformed input, or a failed consistency check: exit status 2.
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Data(_) => 2,
        }
    }

    fn at(path: &Path, e: triprof::Error) -> Self {
        let shown = path.display();
        match e {
            triprof::Error::Parse { line, message } => {
                CliError::Data(format!("{shown}:{line}: {message}"))
            }
            triprof::Error::Usage(m) => CliError::Usage(format!("{shown}: {m}")),
            triprof::Error::Integrity(m) => CliError::Data(format!("{shown}: integrity: {m}")),
            triprof::Error::Io(e) => CliError::Data(format!("{shown}: {e}")),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Data(format!("{}: {e}", path.display()))
    }
}

impl From<triprof::Error> for CliError {
    fn from(e: triprof::Error) -> Self {
        match e {
            triprof::Error::Usage(m) => CliError::Usage(m),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

impl std::error::Error for CliError {}

/// Runs one command line (program name first) and returns the exit status.
///
/// The report goes to `stdout` unless `--out` is given; diagnostics go to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let text = e.render().to_string();
            let _ = match code {
                0 => stdout.write_all(text.as_bytes()),
                _ => stderr.write_all(text.as_bytes()),
            };
            return code;
        }
    };
    match execute(&cli, &args) {
        Ok(json) => match &cli.out {
            Some(path) => match std::fs::write(path, json) {
                Ok(()) => 0,
                Err(e) => report_error(stderr, &CliError::io(path, e)),
            },
            None => match stdout.write_all(json.as_bytes()) {
                Ok(()) => 0,
                Err(e) => report_error(stderr, &CliError::Data(format!("stdout: {e}"))),
            },
        },
        Err(e) => report_error(stderr, &e),
    }
}

fn report_error(stderr: &mut dyn Write, e: &CliError) -> i32 {
    let kind = match e {
        CliError::Usage(_) => "usage error",
        CliError::Data(_) => "error",
    };
    let _ = writeln!(stderr, "triprof: {kind}: {e}");
    e.exit_code()
}

fn execute(cli: &Cli, args: &[OsString]) -> Result<String, CliError> {
    let workers = match cli.threads {
        Some(0) => return Err(CliError::Usage("--threads must be at least 1".into())),
        Some(n) => n,
        None => std::thread::available_parallelism().map_or(1, |n| n.get()),
    };
    let engine = Engine::new(workers)?;
    let name = match &cli.command {
        Command::Profile(_) => "profile",
        Command::Ego(_) => "ego",
        Command::Oracle(_) => "oracle",
        Command::SparsifierCheck(_) => "sparsifier-check",
        Command::Polys(_) => "polys",
        Command::Bench(_) => "bench",
    };
    let echo = report::echo(name, args, cli.no_timing);
    let mut ctx = commands::Context::new(engine, echo, cli.no_timing);
    let value = match &cli.command {
        Command::Profile(a) => commands::profile(&mut ctx, a)?,
        Command::Ego(a) => commands::ego(&mut ctx, a)?,
        Command::Oracle(a) => commands::oracle(&mut ctx, a)?,
        Command::SparsifierCheck(a) => commands::sparsifier_check(&mut ctx, a)?,
        Command::Polys(a) => commands::polys(&mut ctx, a)?,
        Command::Bench(a) => commands::bench(&mut ctx, a)?,
    };
    let mut json = serde_json::to_string_pretty(&value)
        .map_err(|e| CliError::Data(format!("cannot encode report: {e}")))?;
    json.push('\n');
    Ok(json)
}
