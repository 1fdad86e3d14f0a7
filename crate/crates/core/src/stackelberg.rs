//! Static leader–follower game between the backscatter user and the
//! interferer.
//!
//! The user (leader) picks the backscattering time fraction `phi`; the
//! interferer (follower) observes it and picks a jamming power `p_j`.
//! Per-slot payoffs:
//!
//! ```text
//! u_user(phi, p_j)   = bits(phi, p_j) - c_phi * phi
//! u_jammer(phi, p_j) = -bits(phi, p_j) - c_j * p_j
//! ```
//!
//! with `bits = phi * kappa * w * log2(1 + sinr)` from the channel layer.
//! Both payoffs are strictly concave along their own strategy axis, so each
//! best response is a one-dimensional concave maximization:
//!
//! * the follower's is solved by golden-section search over `[0, p_j_max]`
//!   (a closed-form quadratic root is computed alongside purely as a logged
//!   cross-check — see [`jammer_br_quadratic`]);
//! * the leader's is solved by safeguarded Newton on the analytic first-order
//!   condition [`user_foc`], with boundary candidates compared explicitly.
//!
//! [`stackelberg_equilibrium`] composes the two by backward induction and
//! certifies the result on a deviation grid: no unilateral change of strategy
//! by either player may improve that player's payoff beyond tolerance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::LN_2;

use crate::channel::{backscattered_bits, LinkGains};
use crate::error::{Error, Result};
use crate::solve::{golden_section_max, newton_bisection_root};

// ---------------------------------------------------------------------------
// Domain types
// ---------------------------------------------------------------------------

/// Economic and protocol parameters of the one-slot game.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameParams {
    /// Transmission efficiency multiplier on the bit count, in (0, 1].
    pub kappa: f64,
    /// Bandwidth [Hz].
    pub w: f64,
    /// Price per unit of backscattering time.
    pub c_phi: f64,
    /// Price per watt of jamming power.
    pub c_j: f64,
    /// Jammer power cap [W].
    pub p_j_max: f64,
    /// Largest backscattering fraction the user may choose, in (0, 1].
    pub phi_max: f64,
}

impl Default for GameParams {
    fn default() -> Self {
        GameParams {
            kappa: 1.0,
            w: 1e6,
            c_phi: 0.1,
            c_j: 0.1,
            p_j_max: crate::channel::dbm_to_watts(30.0),
            phi_max: 1.0,
        }
    }
}

impl GameParams {
    /// Checks every field against its documented range. Errors name the
    /// offending key using the config-file spelling (`game.<field>`).
    pub fn validate(&self) -> Result<()> {
        let checks: [(&str, f64, bool); 6] = [
            (
                "game.kappa",
                self.kappa,
                self.kappa > 0.0 && self.kappa <= 1.0,
            ),
            ("game.w", self.w, self.w > 0.0),
            ("game.c_phi", self.c_phi, self.c_phi >= 0.0),
            ("game.c_j", self.c_j, self.c_j > 0.0),
            ("game.p_j_max", self.p_j_max, self.p_j_max > 0.0),
            (
                "game.phi_max",
                self.phi_max,
                self.phi_max > 0.0 && self.phi_max <= 1.0,
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

/// Coefficients of the follower's stationarity condition written as
/// `a * p^2 + b * p + c = 0`.
///
/// These follow a published closed form verbatim; they are used only as a
/// cross-check against the numerical maximizer, never as the authority (see
/// [`jammer_best_response`]).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticCoeffs {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Which player's payoff an analysis routine looks at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Player {
    User,
    Jammer,
}

/// A profitable unilateral deviation found during certification.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviationReport {
    /// Who gains by deviating.
    pub player: Player,
    /// The deviating strategy value (a time fraction for the user, watts for
    /// the jammer).
    pub strategy: f64,
    /// Payoff improvement over the candidate equilibrium.
    pub utility_gain: f64,
}

/// Solution of the leader–follower game plus its certification status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    /// Leader strategy: backscattering time fraction.
    pub phi_star: f64,
    /// Follower strategy: jamming power [W].
    #[serde(rename = "p_j_star_watts")]
    pub p_j_star: f64,
    /// Leader payoff at the solution.
    pub u_user: f64,
    /// Follower payoff at the solution.
    pub u_jammer: f64,
    /// Whether the deviation-grid check passed for both players.
    pub certified: bool,
    /// Best profitable deviation found, present only when `certified` is
    /// false.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub violation: Option<DeviationReport>,
}

/// Result of a randomized concavity audit; see [`concavity_scan`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConcavityReport {
    /// Payoff that was audited.
    pub objective: Player,
    /// Number of random parameter draws examined.
    pub n_draws: usize,
    /// Largest second difference observed anywhere (concavity means this
    /// should not be meaningfully positive).
    pub max_second_derivative: f64,
    /// Index of the draw that produced the maximum.
    pub worst_draw: usize,
}

// ---------------------------------------------------------------------------
// Payoffs
// ---------------------------------------------------------------------------

/// Leader payoff: bits delivered minus the time bill, `bits - c_phi * phi`.
/// Exactly 0 at `phi = 0` and exactly `-c_phi` at `phi = 1`.
pub fn user_utility(phi: f64, p_j: f64, gains: &LinkGains, params: &GameParams) -> Result<f64> {
    let bits = backscattered_bits(phi, p_j, gains, params)?;
    Ok(bits - params.c_phi * phi)
}

/// Follower payoff: suppressed bits minus the power bill,
/// `-bits - c_j * p_j`.
pub fn jammer_utility(phi: f64, p_j: f64, gains: &LinkGains, params: &GameParams) -> Result<f64> {
    let bits = backscattered_bits(phi, p_j, gains, params)?;
    Ok(-bits - params.c_j * p_j)
}

// ---------------------------------------------------------------------------
// Follower best response
// ---------------------------------------------------------------------------

/// Closed-form coefficients of the follower's stationarity quadratic,
/// transcribed verbatim from their published form:
///
/// ```text
/// a = ln2 * phi * c_j * g^2
/// b = 2 ln2 * phi * c_j * n0 * g  +  ln2 * (1 - phi) * g * c_j * h_eff * refl
/// c = ln2 * phi * c_j * n0^2     +  ln2 * (1 - phi) * c_j * h_eff * refl
///                                -  phi * (1 - phi) * g * h_eff * kappa * w * refl
/// ```
///
/// Differentiating the payoff directly yields an extra `n0` factor on the
/// middle term of `c`; the transcription is kept as-is because it serves only
/// as a cross-check (the discrepancy is logged when it matters numerically;
/// see [`jammer_best_response`]).
pub fn jammer_br_quadratic(
    phi: f64,
    gains: &LinkGains,
    params: &GameParams,
) -> Result<QuadraticCoeffs> {
    if !(phi > 0.0 && phi < 1.0) {
        return Err(Error::domain(format!(
            "jammer_br_quadratic requires phi strictly inside (0, 1), got {phi}"
        )));
    }
    let signal = gains.h_eff * gains.refl;
    let kw = params.kappa * params.w;
    let a = LN_2 * phi * params.c_j * gains.g * gains.g;
    let b = 2.0 * LN_2 * phi * params.c_j * gains.n0 * gains.g
        + LN_2 * (1.0 - phi) * gains.g * params.c_j * signal;
    let c = LN_2 * phi * params.c_j * gains.n0 * gains.n0
        + LN_2 * (1.0 - phi) * params.c_j * signal
        - phi * (1.0 - phi) * gains.g * kw * signal;
    Ok(QuadraticCoeffs { a, b, c })
}

/// Follower best response: the jamming power maximizing
/// [`jammer_utility`] over `[0, p_j_max]` at the given `phi`.
///
/// The payoff is strictly concave in `p_j`, so golden-section search to an
/// absolute tolerance of `1e-9 * p_j_max` finds the interior optimum; the
/// interior candidate is then compared against both endpoints by direct
/// payoff evaluation, and an endpoint win returns the exact endpoint value.
/// The positive root of [`jammer_br_quadratic`] is computed alongside and
/// any disagreement beyond `1e-6 * p_j_max` is logged at debug level as a
/// closed-form discrepancy diagnostic.
pub fn jammer_best_response(phi: f64, gains: &LinkGains, params: &GameParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::domain(format!(
            "jammer_best_response requires phi in [0, 1], got {phi}"
        )));
    }
    // Nothing on the air: any jamming power is pure cost.
    if phi == 0.0 || phi == 1.0 || gains.h_eff * gains.refl == 0.0 {
        return Ok(0.0);
    }
    let payoff =
        |p: f64| jammer_utility(phi, p, gains, params).expect("inputs validated before the search");
    let cap = params.p_j_max;
    let (p_int, u_int) = golden_section_max(payoff, 0.0, cap, 1e-9 * cap);

    // Endpoints first so an exact endpoint wins ties and is returned exactly.
    let mut best_p = 0.0;
    let mut best_u = payoff(0.0);
    for (p, u) in [(cap, payoff(cap)), (p_int, u_int)] {
        if u > best_u {
            best_p = p;
            best_u = u;
        }
    }

    if let Ok(q) = jammer_br_quadratic(phi, gains, params) {
        if q.a > 0.0 {
            let disc = q.b * q.b - 4.0 * q.a * q.c;
            let closed = if disc >= 0.0 {
                ((-q.b + disc.sqrt()) / (2.0 * q.a)).clamp(0.0, cap)
            } else {
                0.0
            };
            if (closed - best_p).abs() > 1e-6 * cap {
                log::debug!(
                    "closed-form follower response diverges at phi = {phi}: \
                     quadratic root gives {closed} W, numerical maximizer gives {best_p} W"
                );
            }
        }
    }
    Ok(best_p)
}

// ---------------------------------------------------------------------------
// Leader best response
// ---------------------------------------------------------------------------

/// First-order condition of the leader payoff in `phi`, evaluated
/// analytically. With `c = h_eff * refl` and `d0 = g * p_j + n0`:
///
/// ```text
/// X   = c * (1 - phi) / (d0 * phi)          (the SINR)
/// A   = d0 * phi + c * (1 - phi)
/// FOC = (kappa * w / ln2) * (ln(1 + X) - c / A) - c_phi
/// ```
///
/// Positive means increasing `phi` raises the leader payoff.
pub fn user_foc(phi: f64, p_j: f64, gains: &LinkGains, params: &GameParams) -> Result<f64> {
    if !(phi > 0.0 && phi < 1.0) {
        return Err(Error::domain(format!(
            "user_foc requires phi strictly inside (0, 1), got {phi}"
        )));
    }
    if !(p_j >= 0.0) {
        return Err(Error::domain(format!(
            "user_foc requires p_j >= 0, got {p_j}"
        )));
    }
    let c = gains.h_eff * gains.refl;
    let d0 = gains.g * p_j + gains.n0;
    let x = c * (1.0 - phi) / (d0 * phi);
    let a = d0 * phi + c * (1.0 - phi);
    Ok(params.kappa * params.w / LN_2 * ((1.0 + x).ln() - c / a) - params.c_phi)
}

/// Analytic derivative of [`user_foc`] in `phi`:
/// `-(kappa * w / ln2) * c^2 / (phi * A^2)`. Strictly negative whenever the
/// signal term `c` is positive, which is what makes the leader payoff
/// strictly concave and the Newton iteration safe.
fn user_foc_derivative(phi: f64, p_j: f64, gains: &LinkGains, params: &GameParams) -> f64 {
    let c = gains.h_eff * gains.refl;
    let d0 = gains.g * p_j + gains.n0;
    let a = d0 * phi + c * (1.0 - phi);
    -(params.kappa * params.w / LN_2) * c * c / (phi * a * a)
}

/// Leader best response: the time fraction maximizing [`user_utility`] over
/// `[0, phi_max]` at the given jamming power.
///
/// The interior stationary point is located by safeguarded Newton on
/// [`user_foc`] over the bracket `[1e-9, phi_max - 1e-9]` (step tolerance
/// `1e-10`, residual tolerance `1e-9`), then compared against both endpoint
/// payoffs; an endpoint win returns the exact endpoint value.
pub fn user_best_response(p_j: f64, gains: &LinkGains, params: &GameParams) -> Result<f64> {
    if !(p_j >= 0.0) {
        return Err(Error::domain(format!(
            "user_best_response requires p_j >= 0, got {p_j}"
        )));
    }
    let signal = gains.h_eff * gains.refl;
    let lo = 1e-9;
    let hi = params.phi_max - 1e-9;

    let mut interior: Option<f64> = None;
    if signal > 0.0 && lo < hi {
        let foc = |phi: f64| {
            user_foc(phi, p_j, gains, params).expect("inputs validated before the search")
        };
        // The FOC diverges to +inf as phi -> 0+, so a root exists in the
        // bracket exactly when the FOC has gone negative by the right edge.
        let f_lo = foc(lo);
        let f_hi = foc(hi);
        if f_lo > 0.0 && f_hi < 0.0 {
            let root = newton_bisection_root(
                foc,
                |phi| user_foc_derivative(phi, p_j, gains, params),
                lo,
                hi,
                1e-10,
                1e-9,
            );
            interior = Some(root.x);
        }
        // f_hi >= 0: payoff still rising at the right edge, phi_max wins.
        // f_lo <= 0: payoff falling from the left edge (huge c_phi), 0 wins.
        // Both cases are covered by the endpoint comparison below.
    }

    let payoff = |phi: f64| {
        user_utility(phi, p_j, gains, params).expect("inputs validated before the search")
    };
    let mut best_phi = 0.0;
    let mut best_u = payoff(0.0);
    let consider = |phi: f64, best_phi: &mut f64, best_u: &mut f64| {
        let u = payoff(phi);
        if u > *best_u {
            *best_phi = phi;
            *best_u = u;
        }
    };
    consider(params.phi_max, &mut best_phi, &mut best_u);
    if let Some(phi) = interior {
        consider(phi, &mut best_phi, &mut best_u);
    }
    Ok(best_phi)
}

// ---------------------------------------------------------------------------
// Equilibrium
// ---------------------------------------------------------------------------

fn check_gains(gains: &LinkGains) -> Result<()> {
    let entries = [
        ("h_eff", gains.h_eff, gains.h_eff > 0.0),
        ("g", gains.g, gains.g >= 0.0),
        ("refl", gains.refl, gains.refl >= 0.0),
        ("n0", gains.n0, gains.n0 > 0.0),
    ];
    for (name, value, ok) in entries {
        if !value.is_finite() || !ok {
            return Err(Error::domain(format!(
                "link gain field `{name}` is out of range: {value}"
            )));
        }
    }
    Ok(())
}

/// Number of points on each axis of the certification grid.
const CERT_GRID: usize = 200;
/// Relative tolerance of the certification check.
const CERT_REL_TOL: f64 = 1e-6;
/// Number of points on the leader's coarse search grid.
const LEADER_GRID: usize = 256;

/// Solves the leader–follower game by backward induction and certifies the
/// result.
///
/// The leader objective `phi -> user_utility(phi, jammer_best_response(phi))`
/// is not proven unimodal, so it is first evaluated on a 256-point grid over
/// `[0, phi_max]`; golden-section search then refines within the cells
/// adjacent to the grid argmax.
///
/// Certification sweeps a 200-point grid per player: unilateral deviations in
/// `phi` at fixed `p_j_star`, and in `p_j` at fixed `phi_star`. If any
/// deviation improves the deviating player's payoff by more than
/// `1e-6 * max(1, |payoff|)`, the result is returned with
/// `certified = false` and the most profitable deviation attached — that is a
/// diagnostic, not an error.
pub fn stackelberg_equilibrium(gains: &LinkGains, params: &GameParams) -> Result<Equilibrium> {
    check_gains(gains)?;
    params.validate()?;

    let leader_objective = |phi: f64| {
        let p = jammer_best_response(phi, gains, params).expect("inputs validated");
        user_utility(phi, p, gains, params).expect("inputs validated")
    };

    let grid_phi = |i: usize| params.phi_max * i as f64 / (LEADER_GRID - 1) as f64;
    let mut best_i = 0usize;
    let mut best_coarse = f64::NEG_INFINITY;
    for i in 0..LEADER_GRID {
        let v = leader_objective(grid_phi(i));
        if v > best_coarse {
            best_coarse = v;
            best_i = i;
        }
    }
    let left = grid_phi(best_i.saturating_sub(1));
    let right = grid_phi((best_i + 1).min(LEADER_GRID - 1));
    let (phi_refined, u_refined) = golden_section_max(leader_objective, left, right, 1e-9);

    let phi_star = if u_refined > best_coarse {
        phi_refined
    } else {
        grid_phi(best_i)
    };
    let p_j_star = jammer_best_response(phi_star, gains, params)?;
    let u_user = user_utility(phi_star, p_j_star, gains, params)?;
    let u_jammer = jammer_utility(phi_star, p_j_star, gains, params)?;

    // Certification: no unilateral grid deviation may beat either player's
    // equilibrium payoff beyond tolerance.
    let mut violation: Option<DeviationReport> = None;
    let mut worst_gain = 0.0f64;
    let user_tol = CERT_REL_TOL * u_user.abs().max(1.0);
    for i in 0..CERT_GRID {
        let phi = params.phi_max * i as f64 / (CERT_GRID - 1) as f64;
        let gain = user_utility(phi, p_j_star, gains, params)? - u_user;
        if gain > user_tol && gain > worst_gain {
            worst_gain = gain;
            violation = Some(DeviationReport {
                player: Player::User,
                strategy: phi,
                utility_gain: gain,
            });
        }
    }
    let jammer_tol = CERT_REL_TOL * u_jammer.abs().max(1.0);
    for i in 0..CERT_GRID {
        let p = params.p_j_max * i as f64 / (CERT_GRID - 1) as f64;
        let gain = jammer_utility(phi_star, p, gains, params)? - u_jammer;
        if gain > jammer_tol && gain > worst_gain {
            worst_gain = gain;
            violation = Some(DeviationReport {
                player: Player::Jammer,
                strategy: p,
                utility_gain: gain,
            });
        }
    }

    Ok(Equilibrium {
        phi_star,
        p_j_star,
        u_user,
        u_jammer,
        certified: violation.is_none(),
        violation,
    })
}

// ---------------------------------------------------------------------------
// Concavity audit
// ---------------------------------------------------------------------------

/// Largest centered second difference of `f` over an evenly spaced grid on
/// `[lo, hi]` with `n_interior` interior points:
/// `max_i (f(x_{i+1}) - 2 f(x_i) + f(x_{i-1})) / h^2`.
///
/// For a concave `f` this is non-positive for *any* grid spacing (it equals
/// `f''` at an interior point by the mean value theorem), so positive values
/// can only come from floating-point noise or genuine convexity.
pub fn max_second_difference(
    mut f: impl FnMut(f64) -> f64,
    lo: f64,
    hi: f64,
    n_interior: usize,
) -> f64 {
    assert!(n_interior >= 1, "need at least one interior point");
    assert!(hi > lo, "need a non-degenerate interval");
    let h = (hi - lo) / (n_interior + 1) as f64;
    let values: Vec<f64> = (0..n_interior + 2).map(|i| f(lo + i as f64 * h)).collect();
    let mut worst = f64::NEG_INFINITY;
    for i in 1..=n_interior {
        let dd = (values[i + 1] - 2.0 * values[i] + values[i - 1]) / (h * h);
        if dd > worst {
            worst = dd;
        }
    }
    worst
}

/// Draws a random small-magnitude scene for property audits. Magnitudes are
/// deliberately desk-scale (payoffs of order 1..1e3) so that second
/// differences are dominated by curvature, not by floating-point cancellation.
fn sample_audit_scene(rng: &mut ChaCha8Rng) -> (LinkGains, GameParams) {
    let log_uniform = |rng: &mut ChaCha8Rng, lo: f64, hi: f64| 10f64.powf(rng.random_range(lo..hi));
    let gains = LinkGains {
        h_eff: log_uniform(rng, -4.0, 0.0),
        g: log_uniform(rng, -3.0, 0.0),
        refl: rng.random_range(0.5..4.0),
        n0: log_uniform(rng, -4.0, -1.0),
    };
    let params = GameParams {
        kappa: rng.random_range(0.2..1.0),
        w: rng.random_range(1.0..20.0),
        c_phi: rng.random_range(0.0..1.0),
        c_j: rng.random_range(0.05..1.0),
        p_j_max: rng.random_range(0.5..4.0),
        phi_max: rng.random_range(0.5..1.0),
    };
    (gains, params)
}

/// Number of interior grid points used per draw by [`concavity_scan`].
const SCAN_GRID: usize = 64;

/// Randomized audit of the either player's concavity-in-own-strategy claim.
///
/// For each of `n_draws` seeded random scenes, evaluates the chosen payoff
/// along its own strategy axis on a 64-point interior grid and records the
/// largest centered second difference; the returned maximum should sit at or
/// below roundoff scale (at most `+1e-8` in the payoff units used here) if
/// the payoff really is concave.
pub fn concavity_scan(objective: Player, n_draws: usize, seed: u64) -> ConcavityReport {
    assert!(n_draws >= 1, "need at least one draw");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut max_dd = f64::NEG_INFINITY;
    let mut worst_draw = 0usize;
    for draw in 0..n_draws {
        let (gains, params) = sample_audit_scene(&mut rng);
        let dd = match objective {
            Player::Jammer => {
                let phi = rng.random_range(0.05..0.95) * params.phi_max;
                max_second_difference(
                    |p| jammer_utility(phi, p, &gains, &params).expect("audit scene is valid"),
                    0.0,
                    params.p_j_max,
                    SCAN_GRID,
                )
            }
            Player::User => {
                let p_j = rng.random_range(0.0..params.p_j_max);
                max_second_difference(
                    |phi| user_utility(phi, p_j, &gains, &params).expect("audit scene is valid"),
                    0.0,
                    params.phi_max,
                    SCAN_GRID,
                )
            }
        };
        if dd > max_dd {
            max_dd = dd;
            worst_draw = draw;
        }
    }
    ConcavityReport {
        objective,
        n_draws,
        max_second_derivative: max_dd,
        worst_draw,
    }
}
