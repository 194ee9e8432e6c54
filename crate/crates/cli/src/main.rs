mod commands;
mod error;
mod output;
mod svg;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::commands::Outcome;
use crate::error::CliError;
use crate::output::Format;

/// Extremes of skew-normal samples: norming constants, tail functions and
/// the uniform distance of normalised maxima to the Gumbel law.
#[derive(Debug, Parser)]
#[command(name = "snevt", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct OutputArgs {
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Either a single `--n` or a `--n-grid start:stop:ratio`.
#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
struct SampleSizes {
    #[arg(long)]
    n: Option<u64>,
    #[arg(long, value_parser = parse_grid)]
    n_grid: Option<NGrid>,
}

impl SampleSizes {
    fn resolve(self) -> Vec<u64> {
        match (self.n, self.n_grid) {
            (Some(n), _) => vec![n],
            (None, Some(g)) => g.0,
            (None, None) => unreachable!("clap enforces the group"),
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Norming constants a_n, b_n with c_n or d_n.
    Constants {
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[command(flatten)]
        sizes: SampleSizes,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Density, distribution and survival function at the given points.
    Dist {
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        /// Comma-separated evaluation points.
        #[arg(
            long,
            required = true,
            value_delimiter = ',',
            allow_hyphen_values = true
        )]
        x: Vec<f64>,
        /// Also report the tail expansion of this order (0 or 1).
        #[arg(long)]
        expansion: Option<u8>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sup distance between the law of the normalised maximum and Gumbel.
    Maxdist {
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long)]
        n: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sup distances over a geometric n-grid.
    Ratecurve {
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, value_parser = parse_grid, default_value = "1000:1000000000:10")]
        n_grid: NGrid,
        /// Also write an SVG plot of delta_n log n and delta_n / (a_n^2 M).
        #[arg(long)]
        plot: Option<PathBuf>,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Run the inequality battery; exits 2 if any entry fails.
    Verify {
        /// Largest n of the norming-bound and diagnostic grids.
        #[arg(long, default_value_t = 1_000_000_000)]
        n: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Monte Carlo KS distance to Gumbel; exits 2 above the DKW budget.
    Simulate {
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long)]
        n: u64,
        #[arg(long, default_value_t = 100_000)]
        reps: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        output: OutputArgs,
    },
}

/// Strictly increasing sample sizes parsed from `start:stop:ratio`.
#[derive(Debug, Clone, PartialEq)]
struct NGrid(Vec<u64>);

fn parse_grid(text: &str) -> Result<NGrid, String> {
    let parts: Vec<&str> = text.split(':').collect();
    let [start, stop, ratio] = parts[..] else {
        return Err("expected start:stop:ratio".into());
    };
    let start: u64 = start.parse().map_err(|e| format!("start: {e}"))?;
    let stop: u64 = stop.parse().map_err(|e| format!("stop: {e}"))?;
    let ratio: f64 = ratio.parse().map_err(|e| format!("ratio: {e}"))?;
    snevt_core::norming::geometric_grid(start, stop, ratio)
        .map(NGrid)
        .map_err(|e| e.to_string())
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Constants { .. } => "constants",
        Command::Dist { .. } => "dist",
        Command::Maxdist { .. } => "maxdist",
        Command::Ratecurve { .. } => "ratecurve",
        Command::Verify { .. } => "verify",
        Command::Simulate { .. } => "simulate",
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn emit(command: &str, outcome: &Outcome, output: &OutputArgs) -> Result<(), CliError> {
    let text = match output.format {
        Format::Csv => outcome.table.to_csv(),
        Format::Json => outcome.table.to_json(command, &outcome.params),
    };
    match &output.out {
        Some(path) => write_file(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    let name = command_name(&cli.command);
    let (outcome, output) = match cli.command {
        Command::Constants {
            lambda,
            sizes,
            output,
        } => (commands::constants(lambda, &sizes.resolve())?, output),
        Command::Dist {
            lambda,
            x,
            expansion,
            output,
        } => (commands::dist(lambda, &x, expansion)?, output),
        Command::Maxdist { lambda, n, output } => (commands::maxdist(lambda, n)?, output),
        Command::Ratecurve {
            lambda,
            n_grid,
            plot,
            output,
        } => {
            let (outcome, curve) = commands::ratecurve(lambda, &n_grid.0)?;
            if let Some(path) = plot {
                write_file(&path, &commands::rate_plot(&curve))?;
            }
            (outcome, output)
        }
        Command::Verify { n, output } => (commands::verify(n)?, output),
        Command::Simulate {
            lambda,
            n,
            reps,
            seed,
            output,
        } => (commands::simulate(lambda, n, reps, seed)?, output),
    };
    emit(name, &outcome, &output)?;
    Ok(outcome.passed)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("snevt: error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
