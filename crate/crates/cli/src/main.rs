//! Experiment front end for the backscatter-vs-interferer game simulator.
//!
//! Subcommands:
//! - `equilibrium` — solve and certify the static game, print it as JSON.
//! - `hotboot <out>` — train a warm-start table and write the cache file.
//! - `run` — play one episode per the config; optionally dump the trace CSV.
//! - `sweep` — vary one parameter across values and write the sweep CSV.
//!
//! Exit codes: 0 success; 1 configuration or I/O failure (the message names
//! the offending key); 2 equilibrium reported but not certified.
//!
//! The config path comes from `--config`, then the `SCATTERJAM_CONFIG`
//! environment variable, then built-in defaults.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::error::ErrorKind;
use clap::{Parser, Subcommand};
use serde::Serialize;

use scatterjam_core::learning::{hotboot_train, HotbootCache, LearnerConfig};
use scatterjam_core::sim::{
    self, hotboot_realization_seeds, make_user_training_env, run_episode, sweep, StrategySpec,
    SweepVariable,
};
use scatterjam_core::stackelberg::stackelberg_equilibrium;

use config::{ExperimentConfig, StrategyKind, CONFIG_ENV_VAR};

#[derive(Parser)]
#[command(
    name = "scatterjam",
    version,
    about = "Simulator and solver for a backscatter user facing a smart interferer"
)]
struct Cli {
    /// Config file (TOML); falls back to $SCATTERJAM_CONFIG, then built-in
    /// defaults.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the static game and certify the solution against deviations.
    Equilibrium,
    /// Train a warm-start table over seeded environment realizations.
    Hotboot {
        /// Where to write the cache file (JSON).
        out: PathBuf,
    },
    /// Run one episode and print its result as JSON.
    Run {
        /// Warm-start cache for a hotboot-q user.
        #[arg(long, value_name = "PATH")]
        hotboot: Option<PathBuf>,
        /// Also write the per-slot trace as CSV.
        #[arg(long, value_name = "PATH")]
        trace: Option<PathBuf>,
    },
    /// Run the configured strategies across a parameter range, write CSV.
    Sweep {
        /// Which parameter to vary: d_hap or c_phi.
        #[arg(long, value_name = "PARAM")]
        vary: Option<String>,
        /// Comma-separated parameter values, e.g. 5,10,15,20,25.
        #[arg(long, value_delimiter = ',', value_name = "LIST")]
        values: Vec<f64>,
        /// Where to write the sweep CSV.
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Help and version are not failures; anything else is a usage
            // error, which this tool reports as a configuration failure so
            // that exit code 2 stays reserved for uncertified equilibria.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn load_config(flag: &Option<PathBuf>) -> anyhow::Result<ExperimentConfig> {
    let path = match flag {
        Some(p) => Some(p.clone()),
        None => std::env::var_os(CONFIG_ENV_VAR).map(PathBuf::from),
    };
    match path {
        Some(p) => {
            ExperimentConfig::from_path(&p).with_context(|| format!("config file {}", p.display()))
        }
        None => Ok(ExperimentConfig::built_in()),
    }
}

fn dispatch(cli: Cli) -> anyhow::Result<ExitCode> {
    let cfg = load_config(&cli.config)?;
    match cli.command {
        Command::Equilibrium => cmd_equilibrium(&cfg),
        Command::Hotboot { out } => cmd_hotboot(&cfg, &out),
        Command::Run { hotboot, trace } => cmd_run(&cfg, hotboot.as_deref(), trace.as_deref()),
        Command::Sweep { vary, values, out } => {
            cmd_sweep(&cfg, vary.as_deref(), &values, out.as_deref())
        }
    }
}

// ---------------------------------------------------------------------------
// equilibrium
// ---------------------------------------------------------------------------

fn cmd_equilibrium(cfg: &ExperimentConfig) -> anyhow::Result<ExitCode> {
    let gains = cfg.scenario.gains()?;
    let eq = stackelberg_equilibrium(&gains, &cfg.scenario.game)?;
    println!("{}", serde_json::to_string_pretty(&eq)?);
    Ok(ExitCode::from(if eq.certified { 0 } else { 2 }))
}

// ---------------------------------------------------------------------------
// hotboot
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct HotbootSummary {
    realizations: usize,
    slots_per_realization: usize,
    /// Fraction of state-action cells the training left with a nonzero
    /// value — a visited-coverage proxy.
    coverage: f64,
}

fn cmd_hotboot(cfg: &ExperimentConfig, out: &Path) -> anyhow::Result<ExitCode> {
    let jammer_spec = build_spec(&cfg.jammer_strategy, &cfg.learner, None, "jammer_strategy")?;
    let cache = train_cache(cfg, &jammer_spec)?;

    let touched = cache.q_star.iter().flatten().filter(|q| **q != 0.0).count();
    let total = cache.n_states * cache.n_actions;
    let summary = HotbootSummary {
        realizations: cache.meta.realizations,
        slots_per_realization: cache.meta.slots_per_realization,
        coverage: touched as f64 / total as f64,
    };

    let file =
        fs::File::create(out).with_context(|| format!("creating cache file {}", out.display()))?;
    cache.save(file)?;
    println!("{}", serde_json::to_string_pretty(&summary)?);
    Ok(ExitCode::SUCCESS)
}

fn train_cache(cfg: &ExperimentConfig, jammer_spec: &StrategySpec) -> anyhow::Result<HotbootCache> {
    let seeds = hotboot_realization_seeds(cfg.hotboot.seed, cfg.hotboot.realizations);
    let cache = hotboot_train(
        |seed| make_user_training_env(&cfg.scenario, jammer_spec, cfg.hotboot.perturb, seed),
        &seeds,
        cfg.hotboot.slots,
        &cfg.learner,
        cfg.scenario.fingerprint(),
    )?;
    Ok(cache)
}

// ---------------------------------------------------------------------------
// run
// ---------------------------------------------------------------------------

fn cmd_run(
    cfg: &ExperimentConfig,
    hotboot: Option<&Path>,
    trace: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let cache = match hotboot {
        Some(path) => {
            if !matches!(
                cfg.user_strategy,
                StrategyKind::QLearning | StrategyKind::HotbootQ
            ) {
                bail!(
                    "user_strategy.kind: --hotboot only applies to a learning user \
                     (q-learning or hotboot-q)"
                );
            }
            let file = fs::File::open(path)
                .with_context(|| format!("opening cache file {}", path.display()))?;
            Some(HotbootCache::load(file)?)
        }
        None => None,
    };
    let user_spec = match (&cfg.user_strategy, cache) {
        (StrategyKind::HotbootQ, None) => {
            bail!("user_strategy.kind: hotboot-q needs --hotboot <cache file>")
        }
        (_, Some(cache)) => StrategySpec::HotbootQ {
            learner: cfg.learner.clone(),
            cache,
        },
        (kind, None) => build_spec(kind, &cfg.learner, None, "user_strategy")?,
    };
    let jammer_spec = build_spec(&cfg.jammer_strategy, &cfg.learner, None, "jammer_strategy")?;

    let result = run_episode(
        &cfg.scenario,
        &user_spec,
        &jammer_spec,
        cfg.run.slots,
        cfg.run.seeds[0],
    )?;

    let trace_path = trace
        .map(Path::to_path_buf)
        .or_else(|| cfg.run.trace.as_ref().map(PathBuf::from));
    if let Some(path) = trace_path {
        let file = fs::File::create(&path)
            .with_context(|| format!("creating trace file {}", path.display()))?;
        sim::trace_to_csv(&result, file)?;
    }
    println!("{}", serde_json::to_string_pretty(&result)?);
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

fn cmd_sweep(
    cfg: &ExperimentConfig,
    vary: Option<&str>,
    values: &[f64],
    out: Option<&Path>,
) -> anyhow::Result<ExitCode> {
    let vary = match vary {
        Some("d_hap") => SweepVariable::DHap,
        Some("c_phi") => SweepVariable::CPhi,
        Some(other) => bail!("--vary: unknown parameter \"{other}\" (use d_hap or c_phi)"),
        None => bail!("--vary is required (d_hap or c_phi)"),
    };
    if values.is_empty() {
        bail!("--values: need at least one value");
    }
    let out_path = out
        .map(Path::to_path_buf)
        .or_else(|| cfg.run.out.as_ref().map(PathBuf::from));
    let Some(out_path) = out_path else {
        bail!("--out is required (or set run.out in the config)");
    };

    let mut user_specs = Vec::with_capacity(cfg.sweep.strategies.len());
    for kind in &cfg.sweep.strategies {
        user_specs.push(build_spec(kind, &cfg.learner, None, "sweep.strategies")?);
    }
    let jammer_spec = build_spec(&cfg.jammer_strategy, &cfg.learner, None, "jammer_strategy")?;

    let result = sweep(
        &cfg.scenario,
        vary,
        values,
        &user_specs,
        &jammer_spec,
        cfg.run.slots,
        &cfg.run.seeds,
    )?;

    let file = fs::File::create(&out_path)
        .with_context(|| format!("creating sweep file {}", out_path.display()))?;
    sim::sweep_to_csv(&result, file)?;
    println!("{}", serde_json::to_string_pretty(&result.summary)?);
    Ok(ExitCode::SUCCESS)
}

// ---------------------------------------------------------------------------
// shared
// ---------------------------------------------------------------------------

fn build_spec(
    kind: &StrategyKind,
    learner: &LearnerConfig,
    cache: Option<HotbootCache>,
    section: &str,
) -> anyhow::Result<StrategySpec> {
    Ok(match kind {
        StrategyKind::QLearning => StrategySpec::QLearning(learner.clone()),
        StrategyKind::HotbootQ => match cache {
            Some(cache) => StrategySpec::HotbootQ {
                learner: learner.clone(),
                cache,
            },
            None => bail!("{section}.kind: hotboot-q needs a trained cache"),
        },
        StrategyKind::Random => StrategySpec::Random,
        StrategyKind::Fixed(v) => StrategySpec::Fixed(*v),
        StrategyKind::EquilibriumOracle => StrategySpec::EquilibriumOracle,
        StrategyKind::BestResponseOracle => StrategySpec::BestResponseOracle,
    })
}
