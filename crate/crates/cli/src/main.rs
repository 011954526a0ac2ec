use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use nhaah::sweep::boundary_v1c;
use nhaah_cli::commands::{self, Outcome};
use nhaah_cli::config::{self, Overrides};
use nhaah_cli::RunManifest;
use serde::Serialize;

/// Localization, real-complex and topological transitions of the
/// non-Hermitian generalized Aubry–André–Harper chain.
#[derive(Parser, Debug)]
#[command(name = "nhaah", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct RunArgs {
    /// TOML config for the subcommand.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Worker threads (0 = all cores); overrides the config.
    #[arg(long)]
    workers: Option<usize>,
    /// Master seed for the phase-shift samples; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Reuse rows cached by an earlier run of the same sweep.
    #[arg(long)]
    resume: bool,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Eigenvalues, a density profile and optionally eigenvectors of one instance.
    Spectrum(RunArgs),
    /// Observables over a one- or two-axis grid, with the analytic boundary.
    PhaseDiagram(RunArgs),
    /// Winding numbers over a grid, optionally with determinant loops.
    Winding(RunArgs),
    /// Many-body curves for several system sizes, crossings and collapses.
    Mbl(RunArgs),
    /// Spacing histograms against the reference laws, with KS distances.
    Levelstats(RunArgs),
    /// Print the analytic localization boundary V1c.
    Boundary {
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        g: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        h: f64,
        #[arg(long, default_value_t = 0.0)]
        v2: f64,
        #[arg(long, default_value_t = 1.0)]
        t: f64,
    },
}

fn run<C: Serialize + serde::de::DeserializeOwned>(
    name: &str,
    args: &RunArgs,
    resolve: impl FnOnce(&mut C, Overrides),
    body: impl FnOnce(&C, Overrides, &Path, bool) -> Result<Outcome>,
) -> Result<()> {
    let clock = Instant::now();
    let mut cfg: C = config::load(&args.config)?;
    let ov = Overrides {
        workers: args.workers,
        seed: args.seed,
    };
    resolve(&mut cfg, ov);
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let outcome = body(&cfg, ov, &args.out, args.resume)?;
    let manifest = RunManifest {
        subcommand: name.to_string(),
        config: serde_json::to_value(&cfg)?,
        spec_hashes: outcome.spec_hashes,
        outputs: outcome.outputs,
        wall_seconds: clock.elapsed().as_secs_f64(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        details: outcome.details,
    };
    let path = manifest.write(&args.out)?;
    eprintln!("wrote {} files and {}", manifest.outputs.len(), path.display());
    Ok(())
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match &cli.command {
        Command::Spectrum(a) => run("spectrum", a, |_, _| {}, |c, _, out, _| commands::spectrum(c, out)),
        Command::PhaseDiagram(a) => run(
            "phase-diagram",
            a,
            |c: &mut config::PhaseDiagramConfig, ov| ov.apply(&mut c.sweep),
            commands::phase_diagram,
        ),
        Command::Winding(a) => run(
            "winding",
            a,
            |c: &mut config::WindingConfig, ov| ov.apply(&mut c.sweep),
            commands::winding,
        ),
        Command::Mbl(a) => run(
            "mbl",
            a,
            |c: &mut config::MblConfig, ov| ov.apply(&mut c.sweep),
            commands::mbl,
        ),
        Command::Levelstats(a) => run(
            "levelstats",
            a,
            |c: &mut config::LevelstatsConfig, ov| ov.apply(&mut c.sweep),
            commands::levelstats,
        ),
        Command::Boundary { g, h, v2, t } => {
            println!("{}", boundary_v1c(*g, *h, *v2, *t));
            Ok(())
        }
    }
}
