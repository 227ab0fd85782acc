//! `stitchkit` command line.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "stitchkit", version)]
#[command(about = "invariants of stitched Lagrangian torus fibrations")]
pub struct Cli {
    /// Seed for every random sample.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,

    /// Also write the report to this file.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Numerical checks on an example fibration
    Verify(VerifyArgs),
    /// Invariant sequence files
    #[command(subcommand)]
    Seq(SeqCommand),
    /// Build a fibration from an invariant sequence and certify it
    BuildU(BuildArgs),
    /// Monodromy of the period lattice around a loop in the base
    Monodromy(MonodromyArgs),
    /// Amoeba rasters
    #[command(subcommand)]
    Amoeba(AmoebaCommand),
    /// Run the acceptance suite
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// focus_focus, leg or amoeba.
    #[arg(required_unless_present = "list")]
    pub example: Option<String>,

    /// List the examples and exit.
    #[arg(long)]
    pub list: bool,

    #[arg(long, default_value_t = 20)]
    pub points: usize,

    #[arg(long, default_value_t = 1e-7)]
    pub residual_tol: f64,

    #[arg(long, default_value_t = 1e-6)]
    pub match_tol: f64,

    /// Directory for CSV trajectory dumps.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    #[value(name = "ell2s")]
    EllToS,
    #[value(name = "s2ell")]
    SToEll,
}

#[derive(Debug, Subcommand)]
pub enum SeqCommand {
    /// Convert between the invariant sequence and the Taylor sequence
    Convert {
        #[arg(long, value_enum)]
        dir: Direction,
        input: PathBuf,
        /// Defaults to standard output.
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
    /// Closedness, admissibility and integrality of a sequence
    Check { input: PathBuf },
    /// Act on an invariant sequence by a change of germ
    Act {
        #[arg(long)]
        germ: PathBuf,
        input: PathBuf,
        #[arg(long, short)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[arg(long)]
    pub seq: PathBuf,

    #[arg(long, default_value_t = 100)]
    pub points: usize,

    #[arg(long, default_value_t = 1e-7)]
    pub bracket_tol: f64,

    #[arg(long, default_value_t = 1e-5)]
    pub taylor_tol: f64,

    /// CSV table of the certified quantities.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct MonodromyArgs {
    pub example: String,

    /// `circle:<center>:<p>,<q>:<radius>` or `poly:<point>;<point>;...`,
    /// with comma-separated coordinates and 1-based axes. May repeat.
    #[arg(long = "loop")]
    pub loops: Vec<String>,

    #[arg(long, default_value_t = 1e-3)]
    pub snap_tol: f64,

    #[arg(long, default_value_t = 64)]
    pub samples: usize,
}

#[derive(Debug, Subcommand)]
pub enum AmoebaCommand {
    /// Rasterize an amoeba to a binary PPM
    Render(RenderArgs),
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    /// Terms `i:j:re[/im]` separated by commas; the line `1 + v1 + v2` when absent.
    #[arg(long)]
    pub poly: Option<String>,

    /// `s_min,s_max,t_min,t_max`.
    #[arg(long, default_value = "-4,4,-4,4", allow_hyphen_values = true)]
    pub bounds: String,

    #[arg(long, default_value_t = 400)]
    pub res: usize,

    #[arg(long)]
    pub out: PathBuf,

    #[arg(long)]
    pub svg: Option<PathBuf>,

    /// Use the argument-principle test even for the line.
    #[arg(long)]
    pub sampled: bool,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Criterion number or name; all when absent.
    #[arg(long)]
    pub only: Vec<String>,

    /// Append runtimes to the check lines (breaks byte-identity of reports).
    #[arg(long)]
    pub timings: bool,
}

fn configure_threads() -> Result<(), String> {
    let Ok(v) = std::env::var("STITCHKIT_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| format!("STITCHKIT_THREADS must be a positive integer, got '{v}'"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    if let Err(e) = configure_threads() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match commands::run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
