mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use commands::{Failure, Overrides};

#[derive(Parser)]
#[command(name = "jdisc", version, about = "Discs for almost complex structures on C² and the operators behind them")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
struct OutArg {
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Solve for a disc with prescribed coefficients or a fitted structure.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutArg,
        /// Directory receiving z.csv, w.csv, u.csv, v.csv and h.csv.
        #[arg(long)]
        fields: Option<PathBuf>,
        /// Grid as RADIALxANGULAR, e.g. 64x256.
        #[arg(long, value_parser = parse_grid)]
        grid: Option<(usize, usize)>,
        #[arg(long)]
        seed: Option<u64>,
        /// Fixed exponent, skipping candidate selection.
        #[arg(long)]
        p: Option<f64>,
        /// Vanishing order of w at the origin.
        #[arg(long)]
        n: Option<u32>,
    },
    /// Check the operator identities on seeded polynomial probes.
    VerifyOps {
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        out: OutArg,
        #[arg(long, value_parser = parse_grid)]
        grid: Option<(usize, usize)>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Certify a structure: blocks, ellipticity, coefficient fit, normalization, Levi samples.
    AnalyzeStructure {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Takagi factorization of a complex symmetric 2×2 matrix.
    Takagi {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Morse normal form, crossing profile and totally real set at a critical point.
    Morse {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutArg,
    },
    /// Text summary of JSON reports written by the other subcommands.
    Report {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_grid(s: &str) -> Result<(usize, usize), String> {
    let (r, a) = s.split_once(['x', 'X']).ok_or_else(|| format!("expected RADIALxANGULAR, got `{s}`"))?;
    let r = r.trim().parse().map_err(|e| format!("radial count `{r}`: {e}"))?;
    let a = a.trim().parse().map_err(|e| format!("angular count `{a}`: {e}"))?;
    Ok((r, a))
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve { config, out, fields, grid, seed, p, n } => {
            let ov = Overrides { grid, seed, p, n };
            commands::solve(&config, &ov, out.out.as_deref(), fields.as_deref())
        }
        Command::VerifyOps { config, out, grid, seed } => {
            let ov = Overrides { grid, seed, ..Overrides::default() };
            commands::verify_ops(config.as_deref(), &ov, out.out.as_deref())
        }
        Command::AnalyzeStructure { config, out } => commands::analyze_structure(&config, out.out.as_deref()),
        Command::Takagi { config, out } => commands::takagi_cmd(&config, out.out.as_deref()),
        Command::Morse { config, out } => commands::morse_cmd(&config, out.out.as_deref()),
        Command::Report { files, out } => commands::report(&files, out.as_deref()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("jdisc: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
