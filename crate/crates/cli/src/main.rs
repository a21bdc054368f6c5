//! `mkdv`: direct scattering, time evolution, RH reconstruction and
//! validation for mKdV with asymmetric nonzero boundary conditions.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use config::RunConfig;
use mkdv_nzbc::{Error, Regime};
use output::Writer;

#[derive(Debug)]
pub enum Failure {
    Config(String),
    Numerical(String),
    Validation(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Numerical(_) => 2,
            Failure::Validation(_) => 3,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "configuration error: {m}"),
            Failure::Numerical(m) => write!(f, "numerical failure: {m}"),
            Failure::Validation(m) => write!(f, "validation failure: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Numerical(e.to_string())
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    Focusing,
    Defocusing,
}

#[derive(Subcommand)]
enum Command {
    /// Scattering data of the configured profile, with invariant report.
    Direct,
    /// Scattering data advanced to each t.
    Evolve,
    /// q(x, t) on the x-grid from a scattering data file.
    Reconstruct,
    /// Direct scattering followed by reconstruction, checked against the input.
    Roundtrip,
    /// Runs the invariant suite; exit code 3 on any failure.
    Validate,
}

#[derive(Parser)]
#[command(name = "mkdv", version, about = "Inverse scattering for mKdV with asymmetric nonzero boundaries")]
struct Cli {
    #[command(subcommand)]
    command: Option<Command>,
    /// JSON run configuration; missing fields take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<String>,
    #[arg(long, global = true, value_enum)]
    regime: Option<RegimeArg>,
    /// Comma-separated times, e.g. "0,0.1"; an empty string gives no times.
    #[arg(long, global = true)]
    t: Option<String>,
    /// Gauss nodes per contour segment.
    #[arg(long, global = true)]
    nodes: Option<usize>,
    #[arg(long, global = true)]
    verbose: bool,
    /// Print the default configuration and exit.
    #[arg(long, global = true)]
    print_defaults: bool,
}

fn parse_times(s: &str) -> Result<Vec<f64>, Failure> {
    s.split(',')
        .map(str::trim)
        .filter(|v| !v.is_empty())
        .map(|v| v.parse::<f64>().map_err(|e| Failure::Config(format!("--t: {v}: {e}"))))
        .collect()
}

fn load_config(cli: &Cli) -> Result<RunConfig, Failure> {
    let mut cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| Failure::Config(format!("cannot read {}: {e}", p.display())))?;
            RunConfig::from_json(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    if let Some(r) = cli.regime {
        cfg.regime = match r {
            RegimeArg::Focusing => Regime::Focusing,
            RegimeArg::Defocusing => Regime::Defocusing,
        };
    }
    if let Some(t) = &cli.t {
        cfg.t = parse_times(t)?;
    }
    if let Some(n) = cli.nodes {
        cfg.nodes = n;
    }
    cfg.verbose |= cli.verbose;
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    if cli.print_defaults {
        let text = serde_json::to_string_pretty(&RunConfig::default()).map_err(|e| Failure::Numerical(e.to_string()))?;
        println!("{text}");
        return Ok(());
    }
    let Some(command) = &cli.command else {
        return Err(Failure::Config("no subcommand given; see --help".into()));
    };
    let cfg = load_config(&cli)?;
    let mut w = Writer::new(&cfg.out, cfg.hash(), cfg.verbose);
    w.log(&format!("config hash {}", w.hash));
    let r = match command {
        Command::Direct => commands::direct(&cfg, &mut w),
        Command::Evolve => commands::evolve(&cfg, &mut w),
        Command::Reconstruct => commands::reconstruct(&cfg, &mut w),
        Command::Roundtrip => commands::roundtrip(&cfg, &mut w),
        Command::Validate => commands::validate(&cfg, &mut w),
    };
    for p in &w.written {
        println!("{}", p.display());
    }
    r
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
            eprintln!("error: {f}");
            ExitCode::from(f.code())
        }
    }
}
