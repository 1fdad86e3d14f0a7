//! Tabular Q-learning with epsilon-greedy exploration and a warm-start path.
//!
//! The learner lives on a finite grid of strategies ([`ActionGrid`]) and a
//! finite set of states obtained by bucketing the previous slot's SINR
//! ([`SinrQuantizer`]). Its knowledge is a [`QTable`] updated by the
//! one-step bootstrap rule
//!
//! ```text
//! q[s, a] <- (1 - beta) * q[s, a] + beta * (reward + gamma * v[s'])
//! v[s]     = max_a q[s, a]
//! ```
//!
//! and its behavior is the epsilon-greedy policy: play the greedy action with
//! probability `1 - epsilon`, otherwise one of the remaining actions
//! uniformly.
//!
//! Cold starts waste early slots exploring; [`hotboot_train`] fixes that by
//! running many short randomized episodes against freshly drawn environment
//! realizations, then freezing the resulting table into a [`HotbootCache`]
//! that [`init_learner`] can load as the starting table of a live run. The
//! cache carries an environment fingerprint so a table trained on one scene
//! cannot silently warm-start a different one.

use rand::Rng;
use serde::{Deserialize, Serialize};
use std::io::{Read, Write};

use crate::error::{Error, Result};
use crate::rng::{derive_seed, make_rng};

// ---------------------------------------------------------------------------
// Action grid
// ---------------------------------------------------------------------------

/// A finite, ordered menu of strategy values: level `k` of a uniform grid is
/// `max * k / steps`, so the grid always starts at 0 and ends at the cap.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ActionGrid {
    levels: Vec<f64>,
}

impl ActionGrid {
    /// Uniform grid of `steps + 1` levels from 0 to `max` inclusive.
    pub fn uniform(max: f64, steps: usize) -> Result<Self> {
        if !(max > 0.0) || !max.is_finite() {
            return Err(Error::domain(format!(
                "action grid needs a positive finite maximum, got {max}"
            )));
        }
        if steps == 0 {
            return Err(Error::domain("action grid needs at least one step"));
        }
        let levels = (0..=steps).map(|k| max * k as f64 / steps as f64).collect();
        Ok(ActionGrid { levels })
    }

    /// Wraps an explicit level list, enforcing the grid invariants: at least
    /// two levels, first exactly 0, strictly increasing.
    pub fn from_levels(levels: Vec<f64>) -> Result<Self> {
        if levels.len() < 2 {
            return Err(Error::domain("action grid needs at least two levels"));
        }
        if levels[0] != 0.0 {
            return Err(Error::domain(format!(
                "action grid must start at 0, got {}",
                levels[0]
            )));
        }
        for pair in levels.windows(2) {
            if !(pair[1] > pair[0]) || !pair[1].is_finite() {
                return Err(Error::domain(format!(
                    "action grid levels must be strictly increasing and finite, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        Ok(ActionGrid { levels })
    }

    /// Number of levels (grid steps + 1).
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    /// Always false: construction guarantees at least two levels.
    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Strategy value of action index `k`.
    pub fn value(&self, k: usize) -> f64 {
        self.levels[k]
    }

    /// All levels in increasing order.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Largest level (the cap the grid was built from).
    pub fn max(&self) -> f64 {
        *self.levels.last().expect("grid is never empty")
    }
}

// ---------------------------------------------------------------------------
// SINR quantizer
// ---------------------------------------------------------------------------

/// Buckets a measured SINR into one of `n_levels` state indices using
/// strictly increasing decibel thresholds; values below the first edge land
/// in state 0, values at or above the last edge in state `n_levels - 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SinrQuantizer {
    n_levels: usize,
    edges_db: Vec<f64>,
}

impl Default for SinrQuantizer {
    /// Eight levels with edges uniform in dB across −10 dB to +40 dB, which
    /// spans the operating range of the default link geometry.
    fn default() -> Self {
        Self::uniform_db(8, -10.0, 40.0).expect("default quantizer parameters are valid")
    }
}

impl SinrQuantizer {
    /// Builds a quantizer from explicit dB thresholds (`n_levels - 1` of
    /// them). An empty list yields the degenerate single-state quantizer.
    pub fn from_edges_db(edges_db: Vec<f64>) -> Result<Self> {
        for pair in edges_db.windows(2) {
            if !(pair[1] > pair[0]) {
                return Err(Error::domain(format!(
                    "quantizer edges must be strictly increasing, got {} then {}",
                    pair[0], pair[1]
                )));
            }
        }
        if edges_db.iter().any(|e| !e.is_finite()) {
            return Err(Error::domain("quantizer edges must be finite"));
        }
        Ok(SinrQuantizer {
            n_levels: edges_db.len() + 1,
            edges_db,
        })
    }

    /// `n_levels - 1` edges evenly spaced in dB over `[lo_db, hi_db]`
    /// inclusive (midpoint when a single edge is requested).
    pub fn uniform_db(n_levels: usize, lo_db: f64, hi_db: f64) -> Result<Self> {
        if n_levels < 2 {
            return Err(Error::domain("uniform quantizer needs at least two levels"));
        }
        if !(lo_db < hi_db) {
            return Err(Error::domain(format!(
                "uniform quantizer needs lo_db < hi_db, got {lo_db} and {hi_db}"
            )));
        }
        let n_edges = n_levels - 1;
        let edges = if n_edges == 1 {
            vec![0.5 * (lo_db + hi_db)]
        } else {
            (0..n_edges)
                .map(|i| lo_db + (hi_db - lo_db) * i as f64 / (n_edges - 1) as f64)
                .collect()
        };
        Self::from_edges_db(edges)
    }

    /// Number of states this quantizer produces.
    pub fn n_levels(&self) -> usize {
        self.n_levels
    }

    /// The dB thresholds.
    pub fn edges_db(&self) -> &[f64] {
        &self.edges_db
    }

    /// Maps a linear SINR ratio to a state index in `[0, n_levels)`.
    /// Total over the whole extended range: zero, negative, and NaN inputs
    /// land in the underflow bucket 0; an infinite ratio lands in the top
    /// bucket. Monotone: a larger ratio never maps to a smaller index.
    pub fn quantize(&self, sinr: f64) -> usize {
        if !(sinr > 0.0) {
            return 0;
        }
        if sinr.is_infinite() {
            return self.n_levels - 1;
        }
        let db = 10.0 * sinr.log10();
        self.edges_db.partition_point(|edge| *edge <= db)
    }
}

// ---------------------------------------------------------------------------
// Learner configuration
// ---------------------------------------------------------------------------

/// Hyper-parameters of the tabular learner.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    /// Learning rate, in (0, 1].
    pub beta: f64,
    /// Discount factor, in [0, 1].
    pub gamma: f64,
    /// Exploration rate, in (0, 1).
    pub epsilon: f64,
    /// Master seed for the learner's exploration stream.
    pub seed: u64,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        LearnerConfig {
            beta: 0.5,
            gamma: 0.8,
            epsilon: 0.05,
            seed: 1,
        }
    }
}

impl LearnerConfig {
    /// Checks every field against its documented range. Errors name the
    /// offending key using the config-file spelling (`learner.<field>`).
    pub fn validate(&self) -> Result<()> {
        let checks = [
            (
                "learner.beta",
                self.beta,
                self.beta > 0.0 && self.beta <= 1.0,
            ),
            (
                "learner.gamma",
                self.gamma,
                (0.0..=1.0).contains(&self.gamma),
            ),
            (
                "learner.epsilon",
                self.epsilon,
                self.epsilon > 0.0 && self.epsilon < 1.0,
            ),
        ];
        for (key, value, ok) in checks {
            if !value.is_finite() || !ok {
                return Err(Error::config(key, format!("value {value} is out of range")));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Q-table
// ---------------------------------------------------------------------------

/// The learner's knowledge: action values `q`, state values `v` (kept equal
/// to the row maxima of `q` as an invariant), and the current mixed policy
/// `pi` (row-stochastic, refreshed by [`QTable::select_action`]).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QTable {
    q: Vec<Vec<f64>>,
    v: Vec<f64>,
    pi: Vec<Vec<f64>>,
}

/// Overwrites one policy row with the epsilon-greedy distribution around
/// `greedy`: probability `1 - epsilon` there, `epsilon / (n - 1)` elsewhere.
fn write_epsilon_greedy_row(row: &mut [f64], greedy: usize, epsilon: f64) {
    let n = row.len();
    if n == 1 {
        row[0] = 1.0;
        return;
    }
    let explore = epsilon / (n - 1) as f64;
    for (a, p) in row.iter_mut().enumerate() {
        *p = if a == greedy { 1.0 - epsilon } else { explore };
    }
}

impl QTable {
    /// Fresh table: all-zero action and state values, uniform policy.
    pub fn new(n_states: usize, n_actions: usize) -> Self {
        assert!(n_states >= 1, "need at least one state");
        assert!(n_actions >= 1, "need at least one action");
        QTable {
            q: vec![vec![0.0; n_actions]; n_states],
            v: vec![0.0; n_states],
            pi: vec![vec![1.0 / n_actions as f64; n_actions]; n_states],
        }
    }

    pub fn n_states(&self) -> usize {
        self.q.len()
    }

    pub fn n_actions(&self) -> usize {
        self.q[0].len()
    }

    /// Action value `q[s, a]`.
    pub fn value(&self, s: usize, a: usize) -> f64 {
        self.q[s][a]
    }

    /// State value `v[s] = max_a q[s, a]`.
    pub fn state_value(&self, s: usize) -> f64 {
        self.v[s]
    }

    /// Current mixed policy at state `s`.
    pub fn policy(&self, s: usize) -> &[f64] {
        &self.pi[s]
    }

    /// Greedy action at `s`; ties break toward the lowest index so that the
    /// whole learner is deterministic given its seed.
    pub fn greedy(&self, s: usize) -> usize {
        let row = &self.q[s];
        let mut best = 0usize;
        for (a, value) in row.iter().enumerate().skip(1) {
            if *value > row[best] {
                best = a;
            }
        }
        best
    }

    /// One bootstrap update:
    /// `q[s, a] <- (1 - beta) * q[s, a] + beta * (reward + gamma * v[s_next])`
    /// using `v[s_next]` as it stood *before* this update, then restores the
    /// invariant `v[s] = max_a q[s, a]`.
    ///
    /// Out-of-range indices are contract violations and panic.
    pub fn q_update(
        &mut self,
        s: usize,
        a: usize,
        reward: f64,
        s_next: usize,
        cfg: &LearnerConfig,
    ) {
        assert!(s < self.n_states(), "state {s} out of range");
        assert!(
            s_next < self.n_states(),
            "successor state {s_next} out of range"
        );
        assert!(a < self.n_actions(), "action {a} out of range");
        let target = reward + cfg.gamma * self.v[s_next];
        self.q[s][a] = (1.0 - cfg.beta) * self.q[s][a] + cfg.beta * target;
        let greedy = self.greedy(s);
        self.v[s] = self.q[s][greedy];
    }

    /// Epsilon-greedy action choice at `s`: the greedy action with
    /// probability exactly `1 - epsilon`, otherwise a uniform draw over the
    /// remaining actions. Also refreshes the stored policy row `pi[s]` to
    /// the distribution just sampled from.
    pub fn select_action(&mut self, s: usize, cfg: &LearnerConfig, rng: &mut impl Rng) -> usize {
        assert!(s < self.n_states(), "state {s} out of range");
        let n = self.n_actions();
        let greedy = self.greedy(s);
        write_epsilon_greedy_row(&mut self.pi[s], greedy, cfg.epsilon);
        if n == 1 {
            return 0;
        }
        if rng.random::<f64>() < 1.0 - cfg.epsilon {
            greedy
        } else {
            let j = rng.random_range(0..n - 1);
            if j < greedy {
                j
            } else {
                j + 1
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Environment abstraction
// ---------------------------------------------------------------------------

/// Minimal episodic environment: finite states, finite actions, scalar
/// rewards. One instance represents one realization; the warm-start trainer
/// constructs a fresh realization per episode via its factory argument.
pub trait Environment {
    fn n_states(&self) -> usize;
    fn n_actions(&self) -> usize;
    /// Rewinds to the start of an episode and returns the initial state
    /// (state 0 by convention across this workspace).
    fn reset(&mut self) -> usize;
    /// Applies the action; returns the reward and the successor state.
    fn step(&mut self, action: usize) -> (f64, usize);
}

// ---------------------------------------------------------------------------
// Warm-start training and cache
// ---------------------------------------------------------------------------

/// Format version written into every cache file.
pub const CACHE_VERSION: u32 = 1;

/// Salt for the action-selection stream inside warm-start training.
const HOTBOOT_ACTION_SALT: u64 = 0x4857_4152_4d55_5031;

/// Provenance of a trained cache.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotbootMeta {
    /// Number of environment realizations trained on.
    pub realizations: usize,
    /// Slots per realization.
    pub slots_per_realization: usize,
    /// Digest of the environment the cache was trained for; loading checks
    /// it against the live environment.
    pub fingerprint: String,
}

/// A trained starting table: the warm-start artifact written by training and
/// consumed by [`init_learner`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HotbootCache {
    pub version: u32,
    pub n_states: usize,
    pub n_actions: usize,
    pub q_star: Vec<Vec<f64>>,
    pub v_star: Vec<f64>,
    pub pi_star: Vec<Vec<f64>>,
    pub meta: HotbootMeta,
}

impl HotbootCache {
    /// Serializes the cache as versioned JSON.
    pub fn save<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }

    /// Reads a cache back, rejecting unknown versions and inconsistent
    /// shapes.
    pub fn load<R: Read>(reader: R) -> Result<Self> {
        let cache: HotbootCache = serde_json::from_reader(reader)?;
        if cache.version != CACHE_VERSION {
            return Err(Error::Serialization(format!(
                "unsupported cache version {} (this build reads version {CACHE_VERSION})",
                cache.version
            )));
        }
        cache.validate_shapes()?;
        Ok(cache)
    }

    fn validate_shapes(&self) -> Result<()> {
        let (s, a) = (self.n_states, self.n_actions);
        if s == 0 || a == 0 {
            return Err(Error::Shape("cache declares an empty table".to_string()));
        }
        let matrix_ok = |m: &Vec<Vec<f64>>| m.len() == s && m.iter().all(|row| row.len() == a);
        if !matrix_ok(&self.q_star) || !matrix_ok(&self.pi_star) || self.v_star.len() != s {
            return Err(Error::Shape(format!(
                "cache matrices do not match the declared {s}x{a} shape"
            )));
        }
        for (i, row) in self.pi_star.iter().enumerate() {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) || (sum - 1.0).abs() > 1e-12 {
                return Err(Error::Shape(format!(
                    "cache policy row {i} is not a probability distribution (sum {sum})"
                )));
            }
        }
        Ok(())
    }
}

/// Trains a warm-start table by running one randomized episode per
/// environment realization.
///
/// `make_env(seed)` must build realization `seed` deterministically. Actions
/// are chosen uniformly at random (exploration is the whole point of the
/// warm-start phase), and every transition feeds the same bootstrap update a
/// live learner would use.
///
/// Realizations are applied in a canonical order — sorted by realization
/// seed — so the returned table is bit-identical under any permutation of
/// `realization_seeds`. This is the sequential-equivalent reduction: training
/// realizations concurrently and merging would have to reproduce exactly
/// this ordering to be admissible.
pub fn hotboot_train<E: Environment>(
    mut make_env: impl FnMut(u64) -> Result<E>,
    realization_seeds: &[u64],
    slots_per_realization: usize,
    cfg: &LearnerConfig,
    fingerprint: String,
) -> Result<HotbootCache> {
    if realization_seeds.is_empty() {
        return Err(Error::domain(
            "warm-start training needs at least one realization",
        ));
    }
    if slots_per_realization == 0 {
        return Err(Error::domain("warm-start training needs at least one slot"));
    }
    cfg.validate()?;

    let mut order = realization_seeds.to_vec();
    order.sort_unstable();

    let mut table: Option<QTable> = None;
    for &seed in &order {
        let mut env = make_env(seed)?;
        let t = table.get_or_insert_with(|| QTable::new(env.n_states(), env.n_actions()));
        if t.n_states() != env.n_states() || t.n_actions() != env.n_actions() {
            return Err(Error::Shape(format!(
                "realization {seed} produced a {}x{} environment, expected {}x{}",
                env.n_states(),
                env.n_actions(),
                t.n_states(),
                t.n_actions()
            )));
        }
        let mut rng = make_rng(derive_seed(seed, HOTBOOT_ACTION_SALT));
        let mut s = env.reset();
        for _ in 0..slots_per_realization {
            let a = rng.random_range(0..t.n_actions());
            let (reward, s_next) = env.step(a);
            t.q_update(s, a, reward, s_next, cfg);
            s = s_next;
        }
    }

    let table = table.expect("at least one realization ran");
    let mut pi_star = vec![vec![0.0; table.n_actions()]; table.n_states()];
    for (s, row) in pi_star.iter_mut().enumerate() {
        write_epsilon_greedy_row(row, table.greedy(s), cfg.epsilon);
    }
    Ok(HotbootCache {
        version: CACHE_VERSION,
        n_states: table.n_states(),
        n_actions: table.n_actions(),
        q_star: table.q,
        v_star: table.v,
        pi_star,
        meta: HotbootMeta {
            realizations: realization_seeds.len(),
            slots_per_realization,
            fingerprint,
        },
    })
}

/// Builds the starting table of a live run: zeros and a uniform policy when
/// no cache is given, the cached `q*`, `v*`, `pi*` (bit-exact) when one is.
///
/// A cache is accepted only if its environment fingerprint matches the live
/// environment and its shape matches the requested table.
pub fn init_learner(
    cache: Option<&HotbootCache>,
    n_states: usize,
    n_actions: usize,
    fingerprint: &str,
) -> Result<QTable> {
    match cache {
        None => Ok(QTable::new(n_states, n_actions)),
        Some(c) => {
            if c.meta.fingerprint != fingerprint {
                return Err(Error::Fingerprint {
                    cache: c.meta.fingerprint.clone(),
                    current: fingerprint.to_string(),
                });
            }
            if c.n_states != n_states || c.n_actions != n_actions {
                return Err(Error::Shape(format!(
                    "cache is {}x{}, live table is {n_states}x{n_actions}",
                    c.n_states, c.n_actions
                )));
            }
            c.validate_shapes()?;
            Ok(QTable {
                q: c.q_star.clone(),
                v: c.v_star.clone(),
                pi: c.pi_star.clone(),
            })
        }
    }
}
