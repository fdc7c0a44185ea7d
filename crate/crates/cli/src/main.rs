use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use rr_cli::{execute, preset, Command, RunConfig, PRESETS};

#[derive(Parser)]
#[command(name = "rr", version, about = "Radiation reaction of electrons in intense laser fields")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true, env = "RR_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Tabulate q and q_scalar over laser intensity and electron energy.
    QfactorScan(RunArgs),
    /// Integrate one electron and audit its energy balance.
    Trajectory(RunArgs),
    /// Evolve a stochastic ensemble and write per-slice statistics.
    Ensemble(RunArgs),
    /// Emission spectrum at one quantum parameter.
    Spectrum(RunArgs),
    /// Run whatever command the configuration names.
    Run(RunArgs),
    /// List the built-in presets.
    Presets,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration.
    #[arg(long, conflicts_with = "preset")]
    config: Option<PathBuf>,
    /// Built-in scenario (see `rr presets`).
    #[arg(long)]
    preset: Option<String>,
    /// Output directory (overrides the configuration).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Master seed (overrides the configuration).
    #[arg(long)]
    seed: Option<u64>,
}

fn run(expected: Option<Command>, args: RunArgs) -> anyhow::Result<bool> {
    let mut cfg = match (&args.config, &args.preset) {
        (Some(path), None) => {
            RunConfig::load(path).with_context(|| format!("reading {}", path.display()))?
        }
        (None, Some(name)) => preset(name)?,
        _ => bail!("give either --config or --preset"),
    };
    if let Some(cmd) = expected {
        if cmd != cfg.command {
            bail!("configuration is for `{}`, not `{}`", cfg.command.name(), cmd.name());
        }
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args
        .out
        .or_else(|| cfg.output.dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("rr-out"));
    let manifest = execute(&cfg, args.preset.as_deref(), &out)?;
    for f in &manifest.outputs {
        println!("wrote {} ({} rows)", out.join(&f.name).display(), f.rows);
    }
    println!("wrote {}", out.join("manifest.json").display());
    for c in &manifest.checks {
        let tag = if c.passed { "pass" } else { "FAIL" };
        println!("{tag} {}: {:e} (limit {:e})", c.name, c.value, c.limit);
    }
    Ok(manifest.passed)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = match cli.command {
        Cmd::Presets => {
            for (name, about) in PRESETS {
                println!("{name:16} {about}");
            }
            return ExitCode::SUCCESS;
        }
        Cmd::QfactorScan(a) => run(Some(Command::QfactorScan), a),
        Cmd::Trajectory(a) => run(Some(Command::Trajectory), a),
        Cmd::Ensemble(a) => run(Some(Command::Ensemble), a),
        Cmd::Spectrum(a) => run(Some(Command::Spectrum), a),
        Cmd::Run(a) => run(None, a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
