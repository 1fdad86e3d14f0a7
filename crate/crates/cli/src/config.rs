//! Experiment configuration: a strict TOML format with explicit unit tags.
//!
//! Every dimensioned quantity is a quoted string of the form
//! `"<number> <unit>"` — `p_hap = "43 dBm"`, `f = "2.4 GHz"`,
//! `d_hap = "15 m"` — so a watts-versus-dBm mix-up cannot parse silently.
//! Dimensionless values (prices, fractions, reflection coefficients,
//! learning rates) are plain numbers. Unknown keys anywhere are rejected,
//! and every error names the offending key.
//!
//! All keys are optional; omitted ones fall back to the built-in defaults,
//! which describe the reference deployment (43 dBm power source at 15 m,
//! 2.4 GHz, 1 MHz bandwidth, 30 dBm interferer power cap at 20 m, unit
//! prices 0.1, 11-point action grids, 8 SINR levels).

use std::fs;
use std::path::Path;

use serde::Deserialize;

use scatterjam_core::channel::{db_to_linear, dbm_to_watts, PhyConfig, SPEED_OF_LIGHT};
use scatterjam_core::learning::{LearnerConfig, SinrQuantizer};
use scatterjam_core::rng::RNG_ALGORITHM;
use scatterjam_core::sim::Scenario;
use scatterjam_core::stackelberg::GameParams;
use scatterjam_core::{Error, Result};

/// Environment variable consulted for the config path when `--config` is
/// not given.
pub const CONFIG_ENV_VAR: &str = "SCATTERJAM_CONFIG";

// ---------------------------------------------------------------------------
// Unit-tagged quantity parsing
// ---------------------------------------------------------------------------

fn split_quantity(key: &str, raw: &str) -> Result<(f64, String)> {
    let mut parts = raw.split_whitespace();
    let (number, unit) = match (parts.next(), parts.next(), parts.next()) {
        (Some(n), Some(u), None) => (n, u),
        _ => {
            return Err(Error::config(
                key,
                format!("expected \"<number> <unit>\", got \"{raw}\""),
            ))
        }
    };
    let value: f64 = number
        .parse()
        .map_err(|_| Error::config(key, format!("\"{number}\" is not a number")))?;
    if !value.is_finite() {
        return Err(Error::config(key, format!("\"{number}\" is not finite")));
    }
    Ok((value, unit.to_string()))
}

/// Power in watts from `"x W"`, `"x mW"`, `"x dBm"`, or `"x dBW"`.
pub fn parse_power(key: &str, raw: &str) -> Result<f64> {
    let (value, unit) = split_quantity(key, raw)?;
    match unit.as_str() {
        "W" => Ok(value),
        "mW" => Ok(value * 1e-3),
        "dBm" => Ok(dbm_to_watts(value)),
        "dBW" => Ok(10f64.powf(value / 10.0)),
        other => Err(Error::config(
            key,
            format!("unknown power unit \"{other}\" (use W, mW, dBm, or dBW)"),
        )),
    }
}

/// Linear antenna gain from `"x dBi"`, `"x dB"`, or `"x linear"`.
pub fn parse_gain(key: &str, raw: &str) -> Result<f64> {
    let (value, unit) = split_quantity(key, raw)?;
    match unit.as_str() {
        "dBi" | "dB" => Ok(db_to_linear(value)),
        "linear" => Ok(value),
        other => Err(Error::config(
            key,
            format!("unknown gain unit \"{other}\" (use dBi, dB, or linear)"),
        )),
    }
}

fn parse_hertz(key: &str, raw: &str) -> Result<f64> {
    let (value, unit) = split_quantity(key, raw)?;
    let scale = match unit.as_str() {
        "Hz" => 1.0,
        "kHz" => 1e3,
        "MHz" => 1e6,
        "GHz" => 1e9,
        other => {
            return Err(Error::config(
                key,
                format!("unknown frequency unit \"{other}\" (use Hz, kHz, MHz, or GHz)"),
            ))
        }
    };
    Ok(value * scale)
}

/// Carrier wavelength in metres from a frequency string.
pub fn parse_frequency_to_lambda(key: &str, raw: &str) -> Result<f64> {
    let f = parse_hertz(key, raw)?;
    if f <= 0.0 {
        return Err(Error::config(key, "frequency must be positive"));
    }
    Ok(SPEED_OF_LIGHT / f)
}

/// Bandwidth in hertz from a frequency string.
pub fn parse_bandwidth(key: &str, raw: &str) -> Result<f64> {
    parse_hertz(key, raw)
}

/// Distance in metres from `"x m"`, `"x cm"`, or `"x km"`.
pub fn parse_distance(key: &str, raw: &str) -> Result<f64> {
    let (value, unit) = split_quantity(key, raw)?;
    match unit.as_str() {
        "m" => Ok(value),
        "cm" => Ok(value * 1e-2),
        "km" => Ok(value * 1e3),
        other => Err(Error::config(
            key,
            format!("unknown distance unit \"{other}\" (use m, cm, or km)"),
        )),
    }
}

// ---------------------------------------------------------------------------
// Raw (on-disk) sections
// ---------------------------------------------------------------------------

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawConfig {
    phy: RawPhy,
    game: RawGame,
    learner: RawLearner,
    user_strategy: RawStrategy,
    jammer_strategy: RawStrategy,
    run: RawRun,
    hotboot: RawHotboot,
    sweep: RawSweep,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawPhy {
    p_hap: Option<String>,
    delta: Option<f64>,
    g_t: Option<String>,
    g_r: Option<String>,
    g_j: Option<String>,
    f: Option<String>,
    f_j: Option<String>,
    d_hap: Option<String>,
    d_j: Option<String>,
    gamma0: Option<f64>,
    gamma1: Option<f64>,
    n0: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawGame {
    kappa: Option<f64>,
    w: Option<String>,
    c_phi: Option<f64>,
    c_j: Option<f64>,
    p_j_max: Option<String>,
    phi_max: Option<f64>,
    k: Option<usize>,
    m: Option<usize>,
    sinr_levels: Option<usize>,
    sinr_min_db: Option<f64>,
    sinr_max_db: Option<f64>,
    sinr_edges_db: Option<Vec<f64>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawLearner {
    beta: Option<f64>,
    gamma: Option<f64>,
    epsilon: Option<f64>,
    seed: Option<u64>,
    rng: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawStrategy {
    kind: Option<String>,
    value: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawRun {
    slots: Option<usize>,
    seeds: Option<Vec<u64>>,
    trace: Option<String>,
    out: Option<String>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawHotboot {
    realizations: Option<usize>,
    slots: Option<usize>,
    perturb: Option<f64>,
    seed: Option<u64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, default)]
struct RawSweep {
    strategies: Option<Vec<String>>,
    fixed_value: Option<f64>,
}

// ---------------------------------------------------------------------------
// Built experiment configuration
// ---------------------------------------------------------------------------

/// Strategy selection as written in the config: the warm-start cache is a
/// separate file loaded by the `run` command, so at this level `hotboot-q`
/// is just a marker.
#[derive(Debug, Clone, PartialEq)]
pub enum StrategyKind {
    QLearning,
    HotbootQ,
    Random,
    Fixed(f64),
    EquilibriumOracle,
    BestResponseOracle,
}

impl StrategyKind {
    fn parse(section: &str, raw: &RawStrategy, default: StrategyKind) -> Result<Self> {
        let kind_key = format!("{section}.kind");
        let value_key = format!("{section}.value");
        let kind = match &raw.kind {
            None => {
                if raw.value.is_some() {
                    return Err(Error::config(
                        value_key,
                        "value is only meaningful together with kind = \"fixed\"",
                    ));
                }
                return Ok(default);
            }
            Some(k) => k.as_str(),
        };
        let parsed = match kind {
            "q-learning" => StrategyKind::QLearning,
            "hotboot-q" => StrategyKind::HotbootQ,
            "random" => StrategyKind::Random,
            "fixed" => {
                let value = raw
                    .value
                    .ok_or_else(|| Error::config(&value_key, "kind = \"fixed\" needs a value"))?;
                return Ok(StrategyKind::Fixed(value));
            }
            "equilibrium-oracle" => StrategyKind::EquilibriumOracle,
            "best-response-oracle" => StrategyKind::BestResponseOracle,
            other => {
                return Err(Error::config(
                    kind_key,
                    format!(
                        "unknown strategy kind \"{other}\" (use q-learning, hotboot-q, \
                         random, fixed, equilibrium-oracle, or best-response-oracle)"
                    ),
                ))
            }
        };
        if raw.value.is_some() {
            return Err(Error::config(
                value_key,
                "value is only meaningful together with kind = \"fixed\"",
            ));
        }
        Ok(parsed)
    }
}

/// Episode-run section.
#[derive(Debug, Clone)]
pub struct RunSection {
    pub slots: usize,
    pub seeds: Vec<u64>,
    pub trace: Option<String>,
    pub out: Option<String>,
}

/// Warm-start training section.
#[derive(Debug, Clone)]
pub struct HotbootSection {
    pub realizations: usize,
    pub slots: usize,
    pub perturb: f64,
    pub seed: u64,
}

/// Sweep strategy set.
#[derive(Debug, Clone)]
pub struct SweepSection {
    pub strategies: Vec<StrategyKind>,
}

/// A fully validated experiment: environment, learner, strategies, and run
/// plumbing.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub scenario: Scenario,
    pub learner: LearnerConfig,
    pub user_strategy: StrategyKind,
    pub jammer_strategy: StrategyKind,
    pub run: RunSection,
    pub hotboot: HotbootSection,
    pub sweep: SweepSection,
}

impl ExperimentConfig {
    /// The built-in defaults (no file needed).
    pub fn built_in() -> Self {
        RawConfig::default()
            .build()
            .expect("built-in defaults validate")
    }

    /// Parses and validates a TOML config file.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    /// Parses and validates TOML text.
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::config("config", e.to_string()))?;
        raw.build()
    }
}

impl RawConfig {
    fn build(self) -> Result<ExperimentConfig> {
        let defaults = PhyConfig::default();
        let phy = PhyConfig {
            p_hap: opt_quantity(&self.phy.p_hap, "phy.p_hap", defaults.p_hap, parse_power)?,
            delta: self.phy.delta.unwrap_or(defaults.delta),
            g_t: opt_quantity(&self.phy.g_t, "phy.g_t", defaults.g_t, parse_gain)?,
            g_r: opt_quantity(&self.phy.g_r, "phy.g_r", defaults.g_r, parse_gain)?,
            g_j: opt_quantity(&self.phy.g_j, "phy.g_j", defaults.g_j, parse_gain)?,
            lambda_hap: opt_quantity(
                &self.phy.f,
                "phy.f",
                defaults.lambda_hap,
                parse_frequency_to_lambda,
            )?,
            lambda_j: opt_quantity(
                &self.phy.f_j,
                "phy.f_j",
                defaults.lambda_j,
                parse_frequency_to_lambda,
            )?,
            d_hap: opt_quantity(&self.phy.d_hap, "phy.d_hap", defaults.d_hap, parse_distance)?,
            d_j: opt_quantity(&self.phy.d_j, "phy.d_j", defaults.d_j, parse_distance)?,
            gamma0: self.phy.gamma0.unwrap_or(defaults.gamma0),
            gamma1: self.phy.gamma1.unwrap_or(defaults.gamma1),
            n0: opt_quantity(&self.phy.n0, "phy.n0", defaults.n0, parse_power)?,
        };

        let game_defaults = GameParams::default();
        let game = GameParams {
            kappa: self.game.kappa.unwrap_or(game_defaults.kappa),
            w: opt_quantity(&self.game.w, "game.w", game_defaults.w, parse_bandwidth)?,
            c_phi: self.game.c_phi.unwrap_or(game_defaults.c_phi),
            c_j: self.game.c_j.unwrap_or(game_defaults.c_j),
            p_j_max: opt_quantity(
                &self.game.p_j_max,
                "game.p_j_max",
                game_defaults.p_j_max,
                parse_power,
            )?,
            phi_max: self.game.phi_max.unwrap_or(game_defaults.phi_max),
        };

        let quantizer = match &self.game.sinr_edges_db {
            Some(edges) => {
                if self.game.sinr_levels.is_some()
                    || self.game.sinr_min_db.is_some()
                    || self.game.sinr_max_db.is_some()
                {
                    return Err(Error::config(
                        "game.sinr_edges_db",
                        "give either explicit edges or (sinr_levels, sinr_min_db, \
                         sinr_max_db), not both",
                    ));
                }
                SinrQuantizer::from_edges_db(edges.clone())?
            }
            None => {
                let default_q = SinrQuantizer::default();
                let levels = self.game.sinr_levels.unwrap_or(default_q.n_levels());
                let lo = self.game.sinr_min_db.unwrap_or(-10.0);
                let hi = self.game.sinr_max_db.unwrap_or(40.0);
                SinrQuantizer::uniform_db(levels, lo, hi)?
            }
        };

        let scenario = Scenario {
            phy,
            game,
            user_steps: self.game.k.unwrap_or(10),
            jammer_steps: self.game.m.unwrap_or(10),
            quantizer,
        };
        scenario.validate()?;

        let learner_defaults = LearnerConfig::default();
        let learner = LearnerConfig {
            beta: self.learner.beta.unwrap_or(learner_defaults.beta),
            gamma: self.learner.gamma.unwrap_or(learner_defaults.gamma),
            epsilon: self.learner.epsilon.unwrap_or(learner_defaults.epsilon),
            seed: self.learner.seed.unwrap_or(learner_defaults.seed),
        };
        learner.validate()?;
        if let Some(rng) = &self.learner.rng {
            if rng != RNG_ALGORITHM {
                return Err(Error::config(
                    "learner.rng",
                    format!("only \"{RNG_ALGORITHM}\" is supported, got \"{rng}\""),
                ));
            }
        }

        let user_strategy = StrategyKind::parse(
            "user_strategy",
            &self.user_strategy,
            StrategyKind::QLearning,
        )?;
        let jammer_strategy = StrategyKind::parse(
            "jammer_strategy",
            &self.jammer_strategy,
            StrategyKind::BestResponseOracle,
        )?;

        let run = RunSection {
            slots: self.run.slots.unwrap_or(2000),
            seeds: self.run.seeds.unwrap_or_else(|| (1..=10).collect()),
            trace: self.run.trace,
            out: self.run.out,
        };
        if run.slots == 0 {
            return Err(Error::config(
                "run.slots",
                "an episode needs at least one slot",
            ));
        }
        if run.seeds.is_empty() {
            return Err(Error::config("run.seeds", "need at least one seed"));
        }

        let hotboot = HotbootSection {
            realizations: self.hotboot.realizations.unwrap_or(20),
            slots: self.hotboot.slots.unwrap_or(500),
            perturb: self.hotboot.perturb.unwrap_or(0.0),
            seed: self.hotboot.seed.unwrap_or(learner.seed),
        };
        if hotboot.realizations == 0 {
            return Err(Error::config(
                "hotboot.realizations",
                "warm-start training needs at least one realization",
            ));
        }
        if hotboot.slots == 0 {
            return Err(Error::config(
                "hotboot.slots",
                "warm-start training needs at least one slot per realization",
            ));
        }

        let fixed_value = self.sweep.fixed_value.unwrap_or(0.5);
        let strategy_names = self.sweep.strategies.unwrap_or_else(|| {
            vec![
                "q-learning".into(),
                "random".into(),
                "fixed".into(),
                "equilibrium-oracle".into(),
            ]
        });
        let mut strategies = Vec::with_capacity(strategy_names.len());
        for name in &strategy_names {
            let kind = match name.as_str() {
                "q-learning" => StrategyKind::QLearning,
                "random" => StrategyKind::Random,
                "fixed" => StrategyKind::Fixed(fixed_value),
                "equilibrium-oracle" => StrategyKind::EquilibriumOracle,
                "best-response-oracle" => StrategyKind::BestResponseOracle,
                "hotboot-q" => {
                    return Err(Error::config(
                        "sweep.strategies",
                        "hotboot-q is not sweepable: a warm-start cache is tied to one \
                         environment, and a sweep visits many",
                    ))
                }
                other => {
                    return Err(Error::config(
                        "sweep.strategies",
                        format!("unknown strategy \"{other}\""),
                    ))
                }
            };
            strategies.push(kind);
        }
        if strategies.is_empty() {
            return Err(Error::config(
                "sweep.strategies",
                "need at least one strategy",
            ));
        }

        Ok(ExperimentConfig {
            scenario,
            learner,
            user_strategy,
            jammer_strategy,
            run,
            hotboot,
            sweep: SweepSection { strategies },
        })
    }
}

fn opt_quantity(
    raw: &Option<String>,
    key: &str,
    default: f64,
    parse: impl Fn(&str, &str) -> Result<f64>,
) -> Result<f64> {
    match raw {
        None => Ok(default),
        Some(s) => parse(key, s),
    }
}
