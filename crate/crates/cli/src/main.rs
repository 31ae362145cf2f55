//! `starwall`: runs one verification study and writes plot-ready files.
//!
//! Exit status is 0 when every check holds, 1 on a numerical failure and 2 on
//! a usage error.

mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use starwall::io::DataFormat;
use starwall::startools::EpsilonRule;
use starwall::{exec, Error, PhaseGrid};

use run::{RunConfig, Study};

#[derive(Parser, Debug)]
#[command(name = "starwall", version, about = "Phase-space checks for a particle confined by an infinite wall")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Wigner function of the confined eigenstate.
    Wigner,
    /// Star-genvalue equation without the wall term; expected to fail.
    ResidualNaive,
    /// Star-genvalue equation with the one-sided delta' term, and the wall conditions.
    ResidualDp,
    /// Fourth-order equation and triple star product on the filtered solution.
    ResidualKw,
    /// Physical selection, both formulations and the fitted constant between them.
    Equivalence,
    /// Pure-state criterion, profile log-linearity and the exponent scan.
    Purestate,
    /// Exponential barriers approaching the hard wall; needs --alphas.
    WallLimit,
    /// Transport equation with the wall source.
    Dynamics,
}

#[derive(Args, Debug)]
struct Options {
    /// Energy of the eigenstate.
    #[arg(long = "E", global = true, default_value_t = 1.0, allow_negative_numbers = true)]
    energy: f64,
    /// Grid as nx,np,xmin,xmax,pmin,pmax.
    #[arg(long, global = true, value_parser = parse_grid)]
    grid: Option<PhaseGrid>,
    /// Barrier steepness values, comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    alphas: Vec<f64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "starwall-out")]
    out: PathBuf,
    /// Format of phase-space data and tables; reports are always JSON.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    /// Limit rule for the one-sided wall offset.
    #[arg(long = "epsilon-rule", global = true, value_enum, default_value_t = Rule::Richardson3)]
    epsilon_rule: Rule,
    /// Worker threads; 0 uses every core.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Format {
    Csv,
    Json,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum Rule {
    /// Offset of one grid step.
    Fixed,
    /// Two-level extrapolation from one and two steps.
    Richardson,
    /// Three-level extrapolation from one, two and three steps.
    Richardson3,
}

fn parse_grid(s: &str) -> Result<PhaseGrid, String> {
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 6 {
        return Err(format!("expected nx,np,xmin,xmax,pmin,pmax, got {} fields", parts.len()));
    }
    let count = |t: &str| t.parse::<usize>().map_err(|e| format!("'{t}': {e}"));
    let real = |t: &str| t.parse::<f64>().map_err(|e| format!("'{t}': {e}"));
    PhaseGrid::new(
        count(parts[0])?,
        count(parts[1])?,
        real(parts[2])?,
        real(parts[3])?,
        real(parts[4])?,
        real(parts[5])?,
    )
    .map_err(|e| e.to_string())
}

fn config(cli: &Cli) -> Result<RunConfig, String> {
    let o = &cli.opts;
    if !(o.energy.is_finite() && o.energy > 0.0) {
        return Err(format!("--E must be a positive number, got {}", o.energy));
    }
    let study = match cli.command {
        Command::Wigner => Study::Wigner,
        Command::ResidualNaive => Study::ResidualNaive,
        Command::ResidualDp => Study::ResidualDp,
        Command::ResidualKw => Study::ResidualKw,
        Command::Equivalence => Study::Equivalence,
        Command::Purestate => Study::Purestate,
        Command::WallLimit => Study::WallLimit,
        Command::Dynamics => Study::Dynamics,
    };
    if study == Study::WallLimit && o.alphas.is_empty() {
        return Err("wall-limit needs --alphas a1,a2,...".into());
    }
    if o.out.exists() && !o.out.is_dir() {
        return Err(format!("--out {} is not a directory", o.out.display()));
    }
    let grid = o.grid.unwrap_or_else(PhaseGrid::desk);
    let rule = match o.epsilon_rule {
        Rule::Fixed => EpsilonRule::fixed(&grid),
        Rule::Richardson => EpsilonRule::richardson(&grid),
        Rule::Richardson3 => EpsilonRule::richardson3(&grid),
    };
    Ok(RunConfig {
        study,
        energy: o.energy,
        grid,
        alphas: o.alphas.clone(),
        output_dir: o.out.clone(),
        format: match o.format {
            Format::Csv => DataFormat::Csv,
            Format::Json => DataFormat::Json,
        },
        rule,
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let cfg = match config(&cli) {
        Ok(cfg) => cfg,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(2);
        }
    };
    match exec::with_threads(cli.opts.threads, || run::run(&cfg)) {
        Ok(out) => {
            for c in &out.checks {
                println!("{}", c.line());
            }
            println!("wrote {} file(s) to {}", out.files.len(), cfg.output_dir.display());
            ExitCode::from(if out.ok() { 0 } else { 1 })
        }
        Err(e @ (Error::Io(_) | Error::InvalidGrid(_) | Error::InvalidParameter(_) | Error::GridTooSmall { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("numerical failure: {e}");
            ExitCode::from(1)
        }
    }
}
