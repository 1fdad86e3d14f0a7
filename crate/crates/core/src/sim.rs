//! Slotted dynamic-game engine: binds channel physics, agent policies, and
//! metrics into reproducible episodes and parameter sweeps.
//!
//! One episode is `T` slots. In slot `n` the user picks a time fraction
//! `phi` from her action grid and the interferer picks a jamming power `p_j`
//! from his; physics then yields the slot's SINR and both payoffs. Agents
//! that learn observe the quantized SINR of slot `n - 1` as their state
//! (state 0 before the first slot) and update their tables with their own
//! payoff as the reward.
//!
//! Information structure: every policy acts on information up to slot
//! `n - 1`, with one deliberate exception — the interferer's
//! `best-response-oracle` embodies the within-slot follower of the static
//! game and reacts to the user's *live* `phi`. (The user-side
//! best-response-oracle has nobody to follow — the user moves first — so it
//! responds to the previous slot's jamming power.)
//!
//! Determinism: an episode is a pure function of (scenario, specs, `T`,
//! seed). Each role draws from its own ChaCha8 stream derived from the run
//! seed and a role salt, so two runs that differ only in the user's table
//! initialization share their exploration schedule slot-for-slot — that is
//! what makes warm-start-versus-cold-start comparisons paired rather than
//! noisy.

use serde::Serialize;
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::io::Write;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{self, LinkGains, PhyConfig};
use crate::error::{Error, Result};
use crate::learning::{
    init_learner, ActionGrid, Environment, HotbootCache, LearnerConfig, QTable, SinrQuantizer,
};
use crate::rng::{derive_seed, make_rng};
use crate::stackelberg::{
    jammer_best_response, jammer_utility, stackelberg_equilibrium, user_best_response,
    user_utility, GameParams,
};

// ---------------------------------------------------------------------------
// Scenario
// ---------------------------------------------------------------------------

/// Everything that defines the environment of an episode: physics, game
/// prices, action-grid resolutions, and the SINR quantizer.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scenario {
    pub phy: PhyConfig,
    pub game: GameParams,
    /// User grid steps: `user_steps + 1` time-fraction levels from 0 to
    /// `phi_max`.
    pub user_steps: usize,
    /// Interferer grid steps: `jammer_steps + 1` power levels from 0 to
    /// `p_j_max`.
    pub jammer_steps: usize,
    pub quantizer: SinrQuantizer,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            phy: PhyConfig::default(),
            game: GameParams::default(),
            user_steps: 10,
            jammer_steps: 10,
            quantizer: SinrQuantizer::default(),
        }
    }
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.phy.validate()?;
        self.game.validate()?;
        if self.user_steps == 0 {
            return Err(Error::config("game.k", "user grid needs at least one step"));
        }
        if self.jammer_steps == 0 {
            return Err(Error::config(
                "game.m",
                "interferer grid needs at least one step",
            ));
        }
        Ok(())
    }

    /// Derived link gains (validates the physics section).
    pub fn gains(&self) -> Result<LinkGains> {
        LinkGains::from_phy(&self.phy)
    }

    /// The user's action grid: time fractions `phi_max * k / user_steps`.
    pub fn user_grid(&self) -> Result<ActionGrid> {
        ActionGrid::uniform(self.game.phi_max, self.user_steps)
    }

    /// The interferer's action grid: powers `p_j_max * m / jammer_steps`.
    pub fn jammer_grid(&self) -> Result<ActionGrid> {
        ActionGrid::uniform(self.game.p_j_max, self.jammer_steps)
    }

    /// Content digest of the whole environment (physics, prices, grids,
    /// quantizer): hex SHA-256 of the scenario's canonical JSON form. Warm-
    /// start caches carry this so a table trained on one environment cannot
    /// silently initialize another.
    pub fn fingerprint(&self) -> String {
        let json = serde_json::to_string(self).expect("scenario always serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

// ---------------------------------------------------------------------------
// Strategies
// ---------------------------------------------------------------------------

/// How an agent picks its per-slot strategy value.
#[derive(Debug, Clone, PartialEq)]
pub enum StrategySpec {
    /// Tabular learner started from zeros.
    QLearning(LearnerConfig),
    /// Tabular learner started from a trained warm-start cache
    /// (user side only).
    HotbootQ {
        learner: LearnerConfig,
        cache: HotbootCache,
    },
    /// Uniform draw from the action grid every slot.
    Random,
    /// The same value every slot.
    Fixed(f64),
    /// Plays its component of the certified static-game solution every slot.
    EquilibriumOracle,
    /// Solves its one-dimensional best response every slot (to the live
    /// `phi` for the interferer, to the previous slot's power for the user).
    BestResponseOracle,
}

impl StrategySpec {
    /// Stable name used in CSV output and logs.
    pub fn kind_name(&self) -> &'static str {
        match self {
            StrategySpec::QLearning(_) => "q-learning",
            StrategySpec::HotbootQ { .. } => "hotboot-q",
            StrategySpec::Random => "random",
            StrategySpec::Fixed(_) => "fixed",
            StrategySpec::EquilibriumOracle => "equilibrium-oracle",
            StrategySpec::BestResponseOracle => "best-response-oracle",
        }
    }
}

/// Which side of the game an agent plays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    User,
    Jammer,
}

const USER_STREAM_SALT: u64 = 0x5553_4552_0000_0001;
const JAMMER_STREAM_SALT: u64 = 0x4a41_4d4d_0000_0002;

enum PolicyState {
    Learner { table: QTable, cfg: LearnerConfig },
    Random,
    Stationary(f64),
    BestResponse { memo: HashMap<u64, f64> },
}

struct Agent {
    role: Role,
    grid: ActionGrid,
    rng: ChaCha8Rng,
    policy: PolicyState,
}

impl Agent {
    fn new(
        role: Role,
        spec: &StrategySpec,
        scenario: &Scenario,
        gains: &LinkGains,
        fingerprint: &str,
        run_seed: u64,
    ) -> Result<Self> {
        let (grid, salt, key) = match role {
            Role::User => (scenario.user_grid()?, USER_STREAM_SALT, "user_strategy"),
            Role::Jammer => (
                scenario.jammer_grid()?,
                JAMMER_STREAM_SALT,
                "jammer_strategy",
            ),
        };
        let n_states = scenario.quantizer.n_levels();
        let policy = match spec {
            StrategySpec::QLearning(cfg) => {
                cfg.validate()?;
                PolicyState::Learner {
                    table: init_learner(None, n_states, grid.len(), fingerprint)?,
                    cfg: cfg.clone(),
                }
            }
            StrategySpec::HotbootQ { learner, cache } => {
                if role == Role::Jammer {
                    return Err(Error::config(
                        key,
                        "warm-start caches are produced for the user side only; \
                         the interferer cannot use kind `hotboot-q`",
                    ));
                }
                learner.validate()?;
                PolicyState::Learner {
                    table: init_learner(Some(cache), n_states, grid.len(), fingerprint)?,
                    cfg: learner.clone(),
                }
            }
            StrategySpec::Random => PolicyState::Random,
            StrategySpec::Fixed(value) => {
                let cap = grid.max();
                if !value.is_finite() || !(0.0..=cap).contains(value) {
                    return Err(Error::config(
                        key,
                        format!("fixed value {value} is outside [0, {cap}]"),
                    ));
                }
                PolicyState::Stationary(*value)
            }
            StrategySpec::EquilibriumOracle => {
                let eq = stackelberg_equilibrium(gains, &scenario.game)?;
                PolicyState::Stationary(match role {
                    Role::User => eq.phi_star,
                    Role::Jammer => eq.p_j_star,
                })
            }
            StrategySpec::BestResponseOracle => PolicyState::BestResponse {
                memo: HashMap::new(),
            },
        };
        Ok(Agent {
            role,
            grid,
            rng: make_rng(derive_seed(run_seed, salt)),
            policy,
        })
    }

    /// Picks this slot's strategy value. `observed` is the opponent
    /// information available to a best-response oracle: the live `phi` for
    /// the interferer, the previous slot's power for the user. Returns the
    /// value and, for learners, the chosen action index.
    fn choose(
        &mut self,
        state: usize,
        observed: f64,
        gains: &LinkGains,
        game: &GameParams,
    ) -> Result<(f64, Option<usize>)> {
        match &mut self.policy {
            PolicyState::Learner { table, cfg } => {
                let a = table.select_action(state, cfg, &mut self.rng);
                Ok((self.grid.value(a), Some(a)))
            }
            PolicyState::Random => {
                let a = self.rng.random_range(0..self.grid.len());
                Ok((self.grid.value(a), Some(a)))
            }
            PolicyState::Stationary(value) => Ok((*value, None)),
            PolicyState::BestResponse { memo } => {
                let key = observed.to_bits();
                if let Some(value) = memo.get(&key) {
                    return Ok((*value, None));
                }
                let value = match self.role {
                    Role::User => user_best_response(observed, gains, game)?,
                    Role::Jammer => jammer_best_response(observed, gains, game)?,
                };
                memo.insert(key, value);
                Ok((value, None))
            }
        }
    }

    /// Feeds the slot outcome back into a learning policy; no-op otherwise.
    fn learn(&mut self, s: usize, action: Option<usize>, reward: f64, s_next: usize) {
        if let (PolicyState::Learner { table, cfg }, Some(a)) = (&mut self.policy, action) {
            table.q_update(s, a, reward, s_next, cfg);
        }
    }
}

// ---------------------------------------------------------------------------
// Episode
// ---------------------------------------------------------------------------

/// One slot of an episode trace.
///
/// `state` is the quantized-SINR state the agents acted *from* (derived from
/// the previous slot's SINR); `sinr` is the ratio this slot produced. Slots
/// with `phi` of 0 or 1 carry no backscatter signal, so their measured SINR
/// is recorded as 0 and feeds the underflow state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlotRecord {
    pub slot: usize,
    pub phi: f64,
    pub p_j: f64,
    pub sinr: f64,
    pub state: usize,
    pub u_user: f64,
    pub u_jammer: f64,
}

/// Outcome of one episode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunResult {
    pub trace: Vec<SlotRecord>,
    /// Mean user payoff over the final fifth of the episode.
    pub avg_user_utility_tail: f64,
    /// First slot where the trailing 100-slot mean of the user payoff
    /// reaches 90% of the tail mean; `None` when that never happens (or the
    /// episode is shorter than the window).
    pub convergence_slot: Option<usize>,
    pub seed: u64,
}

/// Moving-average window (slots) behind [`RunResult::convergence_slot`].
pub const CONVERGENCE_WINDOW: usize = 100;
/// Fraction of the tail mean the moving average must reach.
pub const CONVERGENCE_THRESHOLD: f64 = 0.9;

/// Mean user payoff over the final fifth of a trace (at least one slot).
pub fn tail_mean(trace: &[SlotRecord]) -> f64 {
    let tail_len = trace.len().div_ceil(5).max(1);
    let tail = &trace[trace.len() - tail_len..];
    tail.iter().map(|r| r.u_user).sum::<f64>() / tail.len() as f64
}

/// First slot at which the trailing `window`-slot mean of the user payoff
/// reaches `threshold_fraction` of the tail mean; `None` if it never does.
pub fn convergence_slot(
    trace: &[SlotRecord],
    window: usize,
    threshold_fraction: f64,
) -> Result<Option<usize>> {
    if window == 0 {
        return Err(Error::domain(
            "convergence window must be at least one slot",
        ));
    }
    if !(threshold_fraction > 0.0 && threshold_fraction <= 1.0) {
        return Err(Error::domain(format!(
            "threshold fraction must lie in (0, 1], got {threshold_fraction}"
        )));
    }
    if trace.len() < window {
        return Err(Error::domain(format!(
            "trace of {} slots is shorter than the {window}-slot window",
            trace.len()
        )));
    }
    let threshold = threshold_fraction * tail_mean(trace);
    let mut sum: f64 = trace[..window].iter().map(|r| r.u_user).sum();
    if sum / window as f64 >= threshold {
        return Ok(Some(trace[window - 1].slot));
    }
    for i in window..trace.len() {
        sum += trace[i].u_user - trace[i - window].u_user;
        if sum / window as f64 >= threshold {
            return Ok(Some(trace[i].slot));
        }
    }
    Ok(None)
}

/// Runs one episode of `t` slots and returns the full trace plus summary
/// metrics. Deterministic: identical inputs give bit-identical results.
pub fn run_episode(
    scenario: &Scenario,
    user_spec: &StrategySpec,
    jammer_spec: &StrategySpec,
    t: usize,
    seed: u64,
) -> Result<RunResult> {
    if t == 0 {
        return Err(Error::domain("an episode needs at least one slot"));
    }
    scenario.validate()?;
    let gains = scenario.gains()?;
    let fingerprint = scenario.fingerprint();
    let mut user = Agent::new(Role::User, user_spec, scenario, &gains, &fingerprint, seed)?;
    let mut jammer = Agent::new(
        Role::Jammer,
        jammer_spec,
        scenario,
        &gains,
        &fingerprint,
        seed,
    )?;

    let mut trace = Vec::with_capacity(t);
    let mut state = 0usize;
    let mut prev_p_j = 0.0f64;
    for slot in 1..=t {
        let (phi, user_action) = user.choose(state, prev_p_j, &gains, &scenario.game)?;
        let (p_j, jammer_action) = jammer.choose(state, phi, &gains, &scenario.game)?;

        let sinr = if phi == 0.0 || phi == 1.0 {
            0.0
        } else {
            channel::sinr(phi, p_j, &gains, gains.n0)?
        };
        let u_user = user_utility(phi, p_j, &gains, &scenario.game)?;
        let u_jammer = jammer_utility(phi, p_j, &gains, &scenario.game)?;
        let next_state = scenario.quantizer.quantize(sinr);

        user.learn(state, user_action, u_user, next_state);
        jammer.learn(state, jammer_action, u_jammer, next_state);

        trace.push(SlotRecord {
            slot,
            phi,
            p_j,
            sinr,
            state,
            u_user,
            u_jammer,
        });
        state = next_state;
        prev_p_j = p_j;
    }

    let avg_user_utility_tail = tail_mean(&trace);
    let convergence = if trace.len() >= CONVERGENCE_WINDOW {
        convergence_slot(&trace, CONVERGENCE_WINDOW, CONVERGENCE_THRESHOLD)?
    } else {
        None
    };
    Ok(RunResult {
        trace,
        avg_user_utility_tail,
        convergence_slot: convergence,
        seed,
    })
}

// ---------------------------------------------------------------------------
// Warm-start training environment
// ---------------------------------------------------------------------------

const REALIZATION_SALT_BASE: u64 = 0x5245_414c_0000_0000;
const PERTURB_SALT: u64 = 0x5045_5254_0000_0003;

/// Derives the per-realization seeds for warm-start training from one master
/// seed. The trainer is order-invariant over these, so only the set matters.
pub fn hotboot_realization_seeds(master: u64, count: usize) -> Vec<u64> {
    (0..count)
        .map(|i| derive_seed(master, REALIZATION_SALT_BASE.wrapping_add(i as u64)))
        .collect()
}

/// One training realization of the user's environment: the user is the
/// learner, the interferer plays the configured policy (learning interferer
/// specs degrade to `random` here — a warm-start table must not require
/// another learner's history to exist).
pub struct UserTrainingEnv {
    gains: LinkGains,
    game: GameParams,
    user_grid: ActionGrid,
    quantizer: SinrQuantizer,
    jammer: Agent,
    state: usize,
}

/// Builds training realization `realization_seed`.
///
/// `perturb` controls how "similar" the realization is to the nominal
/// scenario: 0 reproduces it exactly (only the random streams differ across
/// realizations); a positive value jitters both link distances
/// multiplicatively by up to `±perturb` (uniform, seeded), modelling
/// training on a neighborhood of the deployment instead of the exact point.
pub fn make_user_training_env(
    scenario: &Scenario,
    jammer_spec: &StrategySpec,
    perturb: f64,
    realization_seed: u64,
) -> Result<UserTrainingEnv> {
    if !(0.0..=0.5).contains(&perturb) {
        return Err(Error::config(
            "hotboot.perturb",
            format!("perturbation must lie in [0, 0.5], got {perturb}"),
        ));
    }
    scenario.validate()?;
    let mut realization = scenario.clone();
    if perturb > 0.0 {
        let mut rng = make_rng(derive_seed(realization_seed, PERTURB_SALT));
        realization.phy.d_hap *= 1.0 + perturb * rng.random_range(-1.0..1.0);
        realization.phy.d_j *= 1.0 + perturb * rng.random_range(-1.0..1.0);
    }
    let gains = realization.gains()?;
    let effective_jammer = match jammer_spec {
        StrategySpec::QLearning(_) | StrategySpec::HotbootQ { .. } => &StrategySpec::Random,
        other => other,
    };
    let fingerprint = realization.fingerprint();
    let jammer = Agent::new(
        Role::Jammer,
        effective_jammer,
        &realization,
        &gains,
        &fingerprint,
        realization_seed,
    )?;
    Ok(UserTrainingEnv {
        gains,
        user_grid: realization.user_grid()?,
        game: realization.game,
        quantizer: realization.quantizer,
        jammer,
        state: 0,
    })
}

impl Environment for UserTrainingEnv {
    fn n_states(&self) -> usize {
        self.quantizer.n_levels()
    }

    fn n_actions(&self) -> usize {
        self.user_grid.len()
    }

    fn reset(&mut self) -> usize {
        self.state = 0;
        self.state
    }

    fn step(&mut self, action: usize) -> (f64, usize) {
        let phi = self.user_grid.value(action);
        let (p_j, _) = self
            .jammer
            .choose(self.state, phi, &self.gains, &self.game)
            .expect("training scenario validated at construction");
        let sinr = if phi == 0.0 || phi == 1.0 {
            0.0
        } else {
            channel::sinr(phi, p_j, &self.gains, self.gains.n0)
                .expect("training scenario validated at construction")
        };
        let reward = user_utility(phi, p_j, &self.gains, &self.game)
            .expect("training scenario validated at construction");
        self.state = self.quantizer.quantize(sinr);
        (reward, self.state)
    }
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

/// Which scenario field a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepVariable {
    /// User-to-receiver distance [m].
    DHap,
    /// Price per unit of backscattering time.
    CPhi,
}

impl SweepVariable {
    pub fn key(&self) -> &'static str {
        match self {
            SweepVariable::DHap => "d_hap",
            SweepVariable::CPhi => "c_phi",
        }
    }

    fn apply(&self, scenario: &mut Scenario, value: f64) {
        match self {
            SweepVariable::DHap => scenario.phy.d_hap = value,
            SweepVariable::CPhi => scenario.game.c_phi = value,
        }
    }
}

/// One episode's row in a sweep table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub varied_value: f64,
    pub strategy: String,
    pub seed: u64,
    pub tail_utility: f64,
    pub convergence_slot: Option<usize>,
}

/// Per-(value, strategy) aggregate over seeds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepSummary {
    pub varied_value: f64,
    pub strategy: String,
    pub mean_tail_utility: f64,
    /// Standard error of the mean across seeds (0 for a single seed).
    pub std_error: f64,
    pub n_seeds: usize,
}

/// Full sweep output: every episode row plus per-cell aggregates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    pub summary: Vec<SweepSummary>,
}

/// Runs the full cross product `values x user_specs x seeds` against the
/// fixed interferer spec, varying one scenario field.
///
/// Validation is all-first: every swept scenario (and every spec against it)
/// is checked before the first episode runs, so an invalid point aborts the
/// whole sweep instead of producing a partial table. The per-episode seed is
/// the seed-list entry itself, independent of value and strategy, so
/// comparisons across cells are paired.
pub fn sweep(
    scenario: &Scenario,
    vary: SweepVariable,
    values: &[f64],
    user_specs: &[StrategySpec],
    jammer_spec: &StrategySpec,
    t: usize,
    seeds: &[u64],
) -> Result<SweepResult> {
    if values.is_empty() {
        return Err(Error::config(vary.key(), "sweep needs at least one value"));
    }
    if user_specs.is_empty() {
        return Err(Error::config(
            "user_strategy",
            "sweep needs at least one strategy",
        ));
    }
    if seeds.is_empty() {
        return Err(Error::config("run.seeds", "sweep needs at least one seed"));
    }
    if t == 0 {
        return Err(Error::config("run.slots", "sweep needs at least one slot"));
    }

    // Validate every point before running anything.
    let mut scenarios = Vec::with_capacity(values.len());
    for &value in values {
        let mut point = scenario.clone();
        vary.apply(&mut point, value);
        point.validate().map_err(|e| {
            Error::config(vary.key(), format!("swept value {value} is invalid: {e}"))
        })?;
        let gains = point.gains()?;
        let fingerprint = point.fingerprint();
        for spec in user_specs {
            Agent::new(Role::User, spec, &point, &gains, &fingerprint, seeds[0])?;
        }
        Agent::new(
            Role::Jammer,
            jammer_spec,
            &point,
            &gains,
            &fingerprint,
            seeds[0],
        )?;
        scenarios.push((value, point));
    }

    let mut rows = Vec::new();
    let mut summary = Vec::new();
    for (value, point) in &scenarios {
        for spec in user_specs {
            let mut tails = Vec::with_capacity(seeds.len());
            for &seed in seeds {
                let result = run_episode(point, spec, jammer_spec, t, seed)?;
                rows.push(SweepRow {
                    varied_value: *value,
                    strategy: spec.kind_name().to_string(),
                    seed,
                    tail_utility: result.avg_user_utility_tail,
                    convergence_slot: result.convergence_slot,
                });
                tails.push(result.avg_user_utility_tail);
            }
            let n = tails.len() as f64;
            let mean = tails.iter().sum::<f64>() / n;
            let std_error = if tails.len() > 1 {
                let var = tails.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
                (var / n).sqrt()
            } else {
                0.0
            };
            summary.push(SweepSummary {
                varied_value: *value,
                strategy: spec.kind_name().to_string(),
                mean_tail_utility: mean,
                std_error,
                n_seeds: tails.len(),
            });
        }
    }
    Ok(SweepResult { rows, summary })
}

// ---------------------------------------------------------------------------
// CSV export
// ---------------------------------------------------------------------------

/// Writes an episode trace as CSV with the header
/// `slot,phi,p_j_watts,sinr,state,u_user,u_jammer`.
pub fn trace_to_csv<W: Write>(result: &RunResult, mut writer: W) -> Result<()> {
    writeln!(writer, "slot,phi,p_j_watts,sinr,state,u_user,u_jammer")?;
    for r in &result.trace {
        writeln!(
            writer,
            "{},{},{},{},{},{},{}",
            r.slot, r.phi, r.p_j, r.sinr, r.state, r.u_user, r.u_jammer
        )?;
    }
    Ok(())
}

/// Writes sweep rows as CSV with the header
/// `varied_value,strategy,seed,tail_utility,convergence_slot` (an empty last
/// field means the episode never converged).
pub fn sweep_to_csv<W: Write>(result: &SweepResult, mut writer: W) -> Result<()> {
    writeln!(
        writer,
        "varied_value,strategy,seed,tail_utility,convergence_slot"
    )?;
    for row in &result.rows {
        let conv = row
            .convergence_slot
            .map(|s| s.to_string())
            .unwrap_or_default();
        writeln!(
            writer,
            "{},{},{},{},{}",
            row.varied_value, row.strategy, row.seed, row.tail_utility, conv
        )?;
    }
    Ok(())
}
