//! Command-line driver for warped product decompositions: build seed files,
//! evaluate and invert the decomposition map, run the validation suite, and
//! sample circle trajectories.
//!
//! Exit codes: 0 success, 2 domain/validation error, 3 parse error.

mod commands;
mod output;
mod seed;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{CircleMode, TrajectoryFormat};

#[derive(Debug)]
pub enum CliError {
    /// Malformed input (JSON, flags): exit 3.
    Parse(String),
    /// Valid syntax but invalid data or out-of-domain request: exit 2.
    Validation(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Validation(m) => write!(f, "validation error: {m}"),
        }
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 3,
            CliError::Validation(_) => 2,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "warpgeo",
    version,
    about = "Warped product decompositions of pseudo-Euclidean space and its hyperquadrics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a decomposition from a seed file and print its summary.
    Build {
        #[arg(long)]
        input: PathBuf,
        /// Write the summary JSON here instead of stdout.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Evaluate the decomposition map at a product point.
    Eval {
        #[arg(long)]
        input: PathBuf,
        /// JSON array of factor components, e.g. "[[5,0],[0.6,0.8]]".
        #[arg(long)]
        point: String,
    },
    /// Invert the decomposition map at an ambient point.
    Invert {
        #[arg(long)]
        input: PathBuf,
        /// JSON array, e.g. "[3,4]".
        #[arg(long = "ambient-point")]
        ambient_point: String,
    },
    /// Run the seeded invariant suite and write a machine-readable report.
    Validate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        /// Global multiplier on every check tolerance.
        #[arg(long, default_value_t = 1.0)]
        tol: f64,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Print the decomposition's family tag.
    Enumerate {
        #[arg(long)]
        input: PathBuf,
    },
    /// Sample a circle trajectory (closed form, RK4, or both).
    Circle {
        /// Ambient space as "n,nu".
        #[arg(long)]
        space: String,
        /// Initial position, comma-separated coordinates.
        #[arg(long)]
        p: String,
        /// Unit velocity.
        #[arg(long = "X")]
        x: String,
        /// Acceleration, orthogonal to the velocity.
        #[arg(long = "Y")]
        y: String,
        #[arg(long = "t-max")]
        t_max: f64,
        #[arg(long, default_value_t = 1e-3)]
        dt: f64,
        /// Emit the closed-form trajectory only.
        #[arg(long = "closed-form", conflicts_with_all = ["integrate", "both"])]
        closed_form: bool,
        /// Emit the RK4 trajectory only.
        #[arg(long, conflicts_with = "both")]
        integrate: bool,
        /// Emit the RK4 trajectory plus the deviation from the closed form
        /// (the default).
        #[arg(long)]
        both: bool,
        /// Output format: json or csv.
        #[arg(long, default_value = "json")]
        format: String,
        /// Write here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Build { input, report } => {
            commands::cmd_build(&input, report.as_deref())?;
            Ok(true)
        }
        Command::Eval { input, point } => {
            commands::cmd_eval(&input, &point)?;
            Ok(true)
        }
        Command::Invert {
            input,
            ambient_point,
        } => {
            commands::cmd_invert(&input, &ambient_point)?;
            Ok(true)
        }
        Command::Validate {
            input,
            samples,
            seed,
            tol,
            report,
        } => commands::cmd_validate(&input, samples, seed, tol, report.as_deref()),
        Command::Enumerate { input } => {
            commands::cmd_enumerate(&input)?;
            Ok(true)
        }
        Command::Circle {
            space,
            p,
            x,
            y,
            t_max,
            dt,
            closed_form,
            integrate,
            both: _,
            format,
            output,
        } => {
            let mode = if closed_form {
                CircleMode::ClosedForm
            } else if integrate {
                CircleMode::Integrate
            } else {
                CircleMode::Both
            };
            let format = match format.as_str() {
                "json" => TrajectoryFormat::Json,
                "csv" => TrajectoryFormat::Csv,
                other => {
                    return Err(CliError::Parse(format!(
                        "--format: expected json or csv, got {other}"
                    )))
                }
            };
            commands::cmd_circle(
                &space,
                &p,
                &x,
                &y,
                t_max,
                dt,
                mode,
                format,
                output.as_deref(),
            )?;
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            // Help and version are not errors.
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            eprint!("{e}");
            return ExitCode::from(3);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
