//! `amenable`: batch runs of the toolkit from JSON configurations.
//!
//! Exit codes: 0 success, 2 configuration error, 3 failed precondition,
//! 4 resource cap, 1 anything else. Output files are written only after the
//! whole computation succeeded.

mod commands;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use amenable_core::config::RunConfig;
use amenable_core::Error as CoreError;
use anyhow::Context;
use clap::{Parser, Subcommand};

use commands::{Output, Precondition};

#[derive(Parser)]
#[command(
    name = "amenable",
    version,
    about = "Equivariant set maps, additive realization and pressure on subshifts"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Invariance defects of the configured Følner schedule.
    Folner(RunArgs),
    /// Equivariance, variation bounds and asymptotic additivity of a set map.
    Analyze(RunArgs),
    /// Additive realization, optionally relative to a target subspace.
    Realize(RunArgs),
    /// Pressure of a set map or potential on a subshift.
    Pressure(RunArgs),
    /// Variational-principle certificate over a measure family.
    Varprin(RunArgs),
}

#[derive(clap::Args)]
struct RunArgs {
    /// JSON run configuration.
    #[arg(long)]
    config: PathBuf,
    /// Directory for JSON and CSV outputs; JSON goes to stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `options.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `options.tol`.
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Debug)]
struct ConfigFile(String);

impl std::fmt::Display for ConfigFile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigFile {}

fn load(args: &RunArgs) -> anyhow::Result<RunConfig> {
    let text = fs::read_to_string(&args.config)
        .map_err(|e| ConfigFile(format!("cannot read {}: {e}", args.config.display())))?;
    let mut cfg = RunConfig::from_json(&text)?;
    if let Some(s) = args.seed {
        cfg.options.seed = Some(s);
    }
    if let Some(t) = args.tol {
        cfg.options.tol = Some(t);
    }
    cfg.validate()?;
    Ok(cfg)
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<ConfigFile>().is_some() {
        return 2;
    }
    if e.downcast_ref::<Precondition>().is_some() {
        return 3;
    }
    match e.downcast_ref::<CoreError>() {
        Some(CoreError::Config(_) | CoreError::DimensionMismatch { .. } | CoreError::SupportMismatch(_)) => 2,
        Some(
            CoreError::NotAsymptoticallyAdditive { .. }
            | CoreError::CauchyViolation { .. }
            | CoreError::Reducible
            | CoreError::InsufficientData(_),
        ) => 3,
        Some(CoreError::ResourceCap { .. }) => 4,
        _ => 1,
    }
}

fn write(out: &Output, dir: Option<&PathBuf>) -> anyhow::Result<()> {
    let json = serde_json::to_string_pretty(&out.json)? + "\n";
    match dir {
        None => print!("{json}"),
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
            let path = dir.join(format!("{}.json", out.name));
            fs::write(&path, json).with_context(|| format!("cannot write {}", path.display()))?;
            for (name, bytes) in &out.csv {
                let path = dir.join(name);
                fs::write(&path, bytes).with_context(|| format!("cannot write {}", path.display()))?;
            }
            println!("{}", out.summary);
        }
    }
    Ok(())
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let (args, f): (&RunArgs, fn(&RunConfig) -> anyhow::Result<Output>) = match &cli.command {
        Command::Folner(a) => (a, commands::folner),
        Command::Analyze(a) => (a, commands::analyze),
        Command::Realize(a) => (a, commands::realize),
        Command::Pressure(a) => (a, commands::pressure),
        Command::Varprin(a) => (a, commands::varprin),
    };
    let cfg = load(args)?;
    let out = f(&cfg)?;
    write(&out, args.out.as_ref())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if let Some(p) = e.downcast_ref::<Precondition>() {
                println!("{}", serde_json::to_string_pretty(&p.report).unwrap_or_default());
            }
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
