use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use bibo_cli::commands::{cmd_analyze, cmd_classify, cmd_invert, cmd_nyquist, parse_point, Format};
use bibo_cli::manifest::Overrides;
use clap::{Args, Parser, Subcommand};

/// BIBO stability of LTI systems with irrational transfer functions.
///
/// Exit status 0 means the command ran; verdicts are in the output. Any
/// other status means the tool itself failed.
#[derive(Parser)]
#[command(name = "bibo", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Tolerances {
    /// Frequency where the sweep is closed (default: 10x the largest
    /// singular frequency, at least 100).
    #[arg(long)]
    omega_max: Option<f64>,
    /// Half-width of the gaps cut around singular frequencies.
    #[arg(long)]
    puncture_eps: Option<f64>,
    /// Tolerance on the argument comparison, in radians [default: 0.05].
    #[arg(long)]
    tol_rad: Option<f64>,
    /// Decay margin for the large-|s| check [default: 0.1].
    #[arg(long)]
    delta: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Open/closed-loop verdicts, Nyquist test and cross-checks; writes
    /// report.json and report.txt.
    Analyze {
        manifest: PathBuf,
        #[command(flatten)]
        tol: Tolerances,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
        /// What to print on standard output.
        #[arg(long, value_enum, default_value = "txt")]
        format: Format,
    },
    /// Sample F_o(jω) on a grid.
    Nyquist {
        manifest: PathBuf,
        /// lin:a:b:n, log:a:b:n (mirrored to negative ω) or w1,w2,...
        #[arg(long, default_value = "log:1e-3:1e3:301", allow_hyphen_values = true)]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Numerical inverse Laplace transform on a log-spaced time grid.
    Invert {
        manifest: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        tmin: f64,
        #[arg(long, default_value_t = 10.0)]
        tmax: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Estimate the expansion at a point and classify it.
    Classify {
        manifest: PathBuf,
        /// The point, as re or re,im.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, default_value_t = 3)]
        n_terms: usize,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Analyze { manifest, tol, out_dir, format } => {
            let o = Overrides {
                omega_max: tol.omega_max,
                puncture_eps: tol.puncture_eps,
                tol_rad: tol.tol_rad,
                delta: tol.delta,
            };
            print!("{}", cmd_analyze(&manifest, &o, &out_dir, format)?);
        }
        Command::Nyquist { manifest, grid, out, format } => {
            for n in cmd_nyquist(&manifest, &grid, format, out.as_deref())? {
                eprintln!("{}", n);
            }
        }
        Command::Invert { manifest, tmin, tmax, points, out, format } => {
            for n in cmd_invert(&manifest, tmin, tmax, points, format, out.as_deref())? {
                eprintln!("{}", n);
            }
        }
        Command::Classify { manifest, point, n_terms, out, format } => {
            cmd_classify(&manifest, parse_point(&point)?, n_terms, format, out.as_deref())?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::FAILURE
        }
    }
}
