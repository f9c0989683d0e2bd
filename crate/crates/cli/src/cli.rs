use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::{self, Run};
use crate::dataset::Split;
use crate::error::{CliError, Code, Result};

#[derive(Debug, Parser)]
#[command(name = "sclon", version, about = "Spectral coefficient learning for parametric PDEs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw training and test inputs.
    GenInputs(Common),
    /// Solve the reference trajectories of one split.
    SolveRef {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "test", value_parser = parse_split)]
        split: Split,
    },
    /// Evaluate the residual on stored reference trajectories.
    ResidualCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "test", value_parser = parse_split)]
        split: Split,
        /// Relative bound: total <= tol * (1 + sum of squared coefficients).
        #[arg(long, default_value_t = 1e-16)]
        tol: f64,
    },
    /// Train the segment networks, checkpointing after each segment.
    Train {
        #[command(flatten)]
        common: Common,
        /// Continue from the checkpoints in the output directory.
        #[arg(long)]
        resume: bool,
        /// Stop after training this many segments.
        #[arg(long)]
        max_segments: Option<usize>,
    },
    /// Score the trained networks on the test split.
    Eval(Common),
    /// Convert an ArrayFile to CSV.
    ExportCsv {
        input: PathBuf,
        /// Defaults to the input path with a .csv extension.
        #[arg(long)]
        output: Option<PathBuf>,
    },
}

#[derive(Debug, clap::Args)]
pub struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    pub config: PathBuf,
    /// Output directory; overrides `paths.out_dir`.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_split(s: &str) -> std::result::Result<Split, String> {
    Split::from_name(s).ok_or_else(|| format!("unknown split `{s}` (expected train or test)"))
}

pub fn run(cli: Cli, log: &mut dyn Write) -> Result<()> {
    let open = |c: &Common| Run::open(&c.config, c.out.as_deref());
    match cli.command {
        Command::GenInputs(c) => commands::gen_inputs(&open(&c)?, log),
        Command::SolveRef { common, split } => commands::solve_ref(&open(&common)?, split, log),
        Command::ResidualCheck { common, split, tol } => {
            commands::residual_check_cmd(&open(&common)?, split, tol, log).map(|_| ())
        }
        Command::Train { common, resume, max_segments } => {
            commands::train(&open(&common)?, resume, max_segments, log).map(|_| ())
        }
        Command::Eval(c) => commands::eval(&open(&c)?, log).map(|_| ()),
        Command::ExportCsv { input, output } => {
            let output = output.unwrap_or_else(|| input.with_extension("csv"));
            commands::export_csv(&input, &output)
        }
    }
}

/// Parses `args` and runs; returns the process exit status. Failures print
/// one `error: code=...` line on `err`.
pub fn main_with(args: impl IntoIterator<Item = String>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                write!(out, "{e}").ok();
                return 0;
            }
            let msg = e.to_string();
            let first = msg.lines().next().unwrap_or("").trim_start_matches("error: ").to_string();
            let ce = CliError::new(Code::Usage, first);
            writeln!(err, "{}", ce.line()).ok();
            return Code::Usage.exit_status();
        }
    };
    match run(cli, out) {
        Ok(()) => 0,
        Err(e) => {
            writeln!(err, "{}", e.line()).ok();
            e.code.exit_status()
        }
    }
}
