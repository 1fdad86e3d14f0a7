//! Free-space link budget and backscatter slot physics.
//!
//! Models one slot of a backscatter link: a powered access point radiates a
//! carrier, a passive tag splits the (normalized) slot into an energy-harvest
//! phase of length `1 - phi` and a backscatter phase of length `phi`, and an
//! interferer injects power into the same receiver. The chain is
//!
//! ```text
//! p_r   = delta * p_hap * friis(g_t, g_r, lambda_hap, d_hap)   rectified carrier power
//! e_h   = (1 - phi) * p_r                                      harvested energy per slot
//! p_t   = e_h / phi                                            tag transmit power
//! sinr  = (1 - phi) * h_eff * refl / (phi * (p_j * g + n0))
//! bits  = phi * kappa * w * log2(1 + sinr)
//! ```
//!
//! All quantities are linear SI units internally (watts, meters, hertz);
//! decibel helpers exist only for config ingestion and reporting.
//!
//! `h_eff` is the effective tag-to-receiver gain with the rectified carrier
//! power folded in (`h_eff = delta * p_hap * friis(...)`), so the SINR and
//! every closed form built on it can be written without a separate received
//! power factor. See [`LinkGains`].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stackelberg::GameParams;

// ---------------------------------------------------------------------------
// Constants
// ---------------------------------------------------------------------------

/// Speed of light in vacuum [m/s].
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Boltzmann constant [J/K].
pub const BOLTZMANN: f64 = 1.380_649e-23;

/// Reference temperature for thermal-noise defaults [K].
pub const NOISE_REFERENCE_KELVIN: f64 = 290.0;

// ---------------------------------------------------------------------------
// Unit conversions
// ---------------------------------------------------------------------------

/// Converts a power level in dBm to watts: `10^((dbm - 30) / 10)`.
pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

/// Converts a power in watts to dBm. Errors on non-positive input.
pub fn watts_to_dbm(watts: f64) -> Result<f64> {
    if !(watts > 0.0) {
        return Err(Error::domain(format!(
            "watts_to_dbm requires a positive power, got {watts}"
        )));
    }
    Ok(30.0 + 10.0 * watts.log10())
}

/// Converts a decibel ratio (dB or dBi) to a linear ratio: `10^(db / 10)`.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Thermal noise floor `k * T * B` at the 290 K reference temperature [W].
pub fn thermal_noise_watts(bandwidth_hz: f64) -> f64 {
    BOLTZMANN * NOISE_REFERENCE_KELVIN * bandwidth_hz
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

/// Physical-layer parameters of the link, all in linear SI units.
///
/// The default value is the reference scenario used throughout the test
/// suite: a 43 dBm access point at 2.4 GHz, 6 dBi antennas on the powered
/// link, a 1.8 dBi interferer antenna, 15 m / 20 m link distances, unit
/// reflection-state separation, and a thermal noise floor over 1 MHz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhyConfig {
    /// Access-point transmit power [W].
    pub p_hap: f64,
    /// Energy-harvesting (rectifier) efficiency, in [0, 1].
    pub delta: f64,
    /// Tag antenna gain, linear.
    pub g_t: f64,
    /// Access-point receive antenna gain, linear.
    pub g_r: f64,
    /// Interferer antenna gain, linear. Zero means "interferer absent".
    pub g_j: f64,
    /// Carrier wavelength on the powered link [m].
    pub lambda_hap: f64,
    /// Carrier wavelength on the interferer link [m].
    pub lambda_j: f64,
    /// Tag-to-access-point distance [m].
    pub d_hap: f64,
    /// Interferer-to-access-point distance [m].
    pub d_j: f64,
    /// Reflection coefficient of the first modulation state.
    pub gamma0: f64,
    /// Reflection coefficient of the second modulation state.
    pub gamma1: f64,
    /// Receiver noise power [W].
    pub n0: f64,
}

impl Default for PhyConfig {
    fn default() -> Self {
        let lambda = SPEED_OF_LIGHT / 2.4e9;
        PhyConfig {
            p_hap: dbm_to_watts(43.0),
            delta: 0.5,
            g_t: db_to_linear(6.0),
            g_r: db_to_linear(6.0),
            g_j: db_to_linear(1.8),
            lambda_hap: lambda,
            lambda_j: lambda,
            d_hap: 15.0,
            d_j: 20.0,
            gamma0: 1.0,
            gamma1: -1.0,
            n0: thermal_noise_watts(1e6),
        }
    }
}

impl PhyConfig {
    /// Checks every field against its documented range. Errors name the
    /// offending key using the config-file spelling (`phy.<field>`).
    pub fn validate(&self) -> Result<()> {
        require_positive_finite("phy.p_hap", self.p_hap)?;
        require_finite("phy.delta", self.delta)?;
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::config(
                "phy.delta",
                format!(
                    "harvesting efficiency must lie in [0, 1], got {}",
                    self.delta
                ),
            ));
        }
        require_positive_finite("phy.g_t", self.g_t)?;
        require_positive_finite("phy.g_r", self.g_r)?;
        require_finite("phy.g_j", self.g_j)?;
        if self.g_j < 0.0 {
            return Err(Error::config(
                "phy.g_j",
                format!("antenna gain must be >= 0, got {}", self.g_j),
            ));
        }
        require_positive_finite("phy.lambda_hap", self.lambda_hap)?;
        require_positive_finite("phy.lambda_j", self.lambda_j)?;
        require_positive_finite("phy.d_hap", self.d_hap)?;
        require_positive_finite("phy.d_j", self.d_j)?;
        require_finite("phy.gamma0", self.gamma0)?;
        require_finite("phy.gamma1", self.gamma1)?;
        if self.gamma0 == self.gamma1 {
            return Err(Error::config(
                "phy.gamma1",
                "reflection coefficients gamma0 and gamma1 must differ",
            ));
        }
        require_positive_finite("phy.n0", self.n0)?;
        Ok(())
    }
}

fn require_finite(key: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be finite, got {value}")))
    }
}

fn require_positive_finite(key: &str, value: f64) -> Result<()> {
    require_finite(key, value)?;
    if value > 0.0 {
        Ok(())
    } else {
        Err(Error::config(key, format!("must be > 0, got {value}")))
    }
}

// ---------------------------------------------------------------------------
// Derived gains
// ---------------------------------------------------------------------------

/// Link gains derived deterministically from [`PhyConfig`].
///
/// `h_eff` absorbs the rectified carrier power (`delta * p_hap`) into the
/// tag-to-receiver path gain so that the SINR reads
/// `(1 - phi) * h_eff * refl / (phi * (p_j * g + n0))` with no separate
/// received-power factor. The noise floor rides along so that one value of
/// this type is everything the game layer needs to know about the radio
/// environment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGains {
    /// Effective tag-to-receiver gain with rectified carrier power folded in.
    pub h_eff: f64,
    /// Interferer-to-receiver path gain (linear; 0 when the interferer is absent).
    pub g: f64,
    /// Squared separation of the two reflection states, `(gamma0 - gamma1)^2`.
    pub refl: f64,
    /// Receiver noise power [W].
    pub n0: f64,
}

impl LinkGains {
    /// Derives the gains from a validated [`PhyConfig`].
    pub fn from_phy(cfg: &PhyConfig) -> Result<Self> {
        cfg.validate()?;
        if cfg.delta <= 0.0 {
            return Err(Error::config(
                "phy.delta",
                "must be > 0 to derive link gains (a tag that harvests nothing cannot transmit)",
            ));
        }
        let h_eff =
            cfg.delta * cfg.p_hap * friis_gain(cfg.g_t, cfg.g_r, cfg.lambda_hap, cfg.d_hap)?;
        let g = if cfg.g_j == 0.0 {
            0.0
        } else {
            friis_gain(cfg.g_j, cfg.g_t, cfg.lambda_j, cfg.d_j)?
        };
        let refl = (cfg.gamma0 - cfg.gamma1).powi(2);
        Ok(LinkGains {
            h_eff,
            g,
            refl,
            n0: cfg.n0,
        })
    }
}

// ---------------------------------------------------------------------------
// Link budget
// ---------------------------------------------------------------------------

/// Free-space path gain between two antennas:
/// `g_tx * g_rx * lambda^2 / (4 * pi * d)^2`.
pub fn friis_gain(g_tx: f64, g_rx: f64, lambda: f64, d: f64) -> Result<f64> {
    for (name, v) in [("g_tx", g_tx), ("g_rx", g_rx), ("lambda", lambda), ("d", d)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::domain(format!(
                "friis_gain requires {name} > 0 and finite, got {v}"
            )));
        }
    }
    let denom = 4.0 * std::f64::consts::PI * d;
    Ok(g_tx * g_rx * lambda * lambda / (denom * denom))
}

/// Rectified carrier power available at the tag:
/// `delta * p_hap * friis_gain(g_t, g_r, lambda_hap, d_hap)` [W].
///
/// Accepts `delta == 0` (a dead rectifier receives nothing) even though a
/// fully valid config requires `delta > 0` downstream.
pub fn received_power(cfg: &PhyConfig) -> Result<f64> {
    cfg.validate()?;
    Ok(cfg.delta * cfg.p_hap * friis_gain(cfg.g_t, cfg.g_r, cfg.lambda_hap, cfg.d_hap)?)
}

/// Energy harvested over one normalized slot: `(1 - phi) * p_r` [J].
pub fn harvested_energy(phi: f64, p_r: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::domain(format!(
            "harvested_energy requires phi in [0, 1], got {phi}"
        )));
    }
    if !(p_r >= 0.0) {
        return Err(Error::domain(format!(
            "harvested_energy requires p_r >= 0, got {p_r}"
        )));
    }
    Ok((1.0 - phi) * p_r)
}

/// Average tag transmit power over the backscatter phase: `e_h / phi` [W].
///
/// `phi == 0` is a hard error: there is no transmit phase to average over,
/// and callers must treat that case as "no transmission" before calling.
pub fn backscatter_tx_power(phi: f64, e_h: f64) -> Result<f64> {
    if !(phi > 0.0) {
        return Err(Error::domain(format!(
            "backscatter_tx_power requires phi > 0 (no transmit phase exists at phi = {phi})"
        )));
    }
    if !(e_h >= 0.0) {
        return Err(Error::domain(format!(
            "backscatter_tx_power requires e_h >= 0, got {e_h}"
        )));
    }
    Ok(e_h / phi)
}

/// Signal-to-interference-plus-noise ratio at the receiver during the
/// backscatter phase: `(1 - phi) * h_eff * refl / (phi * (p_j * g + n0))`.
///
/// The noise power is an explicit argument (most callers pass `gains.n0`,
/// but sensitivity sweeps may override it).
///
/// Boundary conventions: `phi == 1` yields 0 (nothing harvested, nothing
/// radiated); `phi == 0` yields `f64::INFINITY` as an explicit sentinel —
/// callers must treat `phi == 0` as "zero bits" before the ratio matters.
pub fn sinr(phi: f64, p_j: f64, gains: &LinkGains, n0: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::domain(format!(
            "sinr requires phi in [0, 1], got {phi}"
        )));
    }
    if !(p_j >= 0.0) {
        return Err(Error::domain(format!("sinr requires p_j >= 0, got {p_j}")));
    }
    if !(n0 > 0.0) {
        return Err(Error::domain(format!("sinr requires n0 > 0, got {n0}")));
    }
    if phi == 0.0 {
        return Ok(f64::INFINITY);
    }
    if phi == 1.0 {
        return Ok(0.0);
    }
    Ok((1.0 - phi) * gains.h_eff * gains.refl / (phi * (p_j * gains.g + n0)))
}

/// Bits delivered in one slot: `phi * kappa * w * log2(1 + sinr)`, using the
/// noise floor carried in `gains`. Exactly 0 at both `phi = 0` and `phi = 1`.
pub fn backscattered_bits(
    phi: f64,
    p_j: f64,
    gains: &LinkGains,
    params: &GameParams,
) -> Result<f64> {
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::domain(format!(
            "backscattered_bits requires phi in [0, 1], got {phi}"
        )));
    }
    if phi == 0.0 || phi == 1.0 {
        return Ok(0.0);
    }
    let ratio = sinr(phi, p_j, gains, gains.n0)?;
    Ok(phi * params.kappa * params.w * (1.0 + ratio).log2())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(got: f64, want: f64) -> f64 {
        (got - want).abs() / want.abs().max(1.0)
    }

    fn table1_gains() -> LinkGains {
        LinkGains::from_phy(&PhyConfig::default()).expect("default config is valid")
    }

    #[test]
    fn friis_factors_cancel_to_one() {
        let fourpi = 4.0 * std::f64::consts::PI;
        let g = friis_gain(1.0, 1.0, fourpi, 1.0).unwrap();
        assert_eq!(
            g, 1.0,
            "gain with lambda = 4*pi*d must be exactly 1, got {g}"
        );
    }

    #[test]
    fn friis_pinned_literal_case() {
        let got = friis_gain(3.981, 1.514, 0.1249, 15.0).unwrap();
        let want = 2.6463097892184907e-06;
        assert!(
            rel_err(got, want) < 1e-13,
            "friis_gain(3.981, 1.514, 0.1249, 15) = {got}, want {want}"
        );
    }

    #[test]
    fn friis_inverse_square_doubling_is_exact() {
        for d in [0.5, 1.0, 7.0, 15.0, 123.456] {
            let near = friis_gain(2.5, 1.8, 0.125, d).unwrap();
            let far = friis_gain(2.5, 1.8, 0.125, 2.0 * d).unwrap();
            assert_eq!(
                far,
                near / 4.0,
                "doubling d must divide gain by exactly 4 (d = {d})"
            );
        }
    }

    #[test]
    fn friis_rejects_nonpositive_arguments() {
        assert!(friis_gain(0.0, 1.0, 0.1, 1.0).is_err());
        assert!(friis_gain(1.0, -1.0, 0.1, 1.0).is_err());
        assert!(friis_gain(1.0, 1.0, 0.0, 1.0).is_err());
        assert!(friis_gain(1.0, 1.0, 0.1, 0.0).is_err());
        assert!(friis_gain(1.0, 1.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn received_power_unit_factors() {
        let fourpi = 4.0 * std::f64::consts::PI;
        let cfg = PhyConfig {
            p_hap: 1.0,
            delta: 1.0,
            g_t: 1.0,
            g_r: 1.0,
            lambda_hap: fourpi,
            d_hap: 1.0,
            ..PhyConfig::default()
        };
        assert_eq!(received_power(&cfg).unwrap(), 1.0);
    }

    #[test]
    fn received_power_zero_efficiency_receives_nothing() {
        let cfg = PhyConfig {
            delta: 0.0,
            ..PhyConfig::default()
        };
        assert_eq!(received_power(&cfg).unwrap(), 0.0);
    }

    #[test]
    fn received_power_reference_scenario_pinned() {
        let got = received_power(&PhyConfig::default()).unwrap();
        let want = 6.943631754751216e-05; // 43 dBm, delta 0.5, 6/6 dBi, 2.4 GHz, 15 m
        assert!(
            rel_err(got, want) < 1e-13,
            "received_power(default) = {got}, want {want}"
        );
    }

    #[test]
    fn received_power_rejects_invalid_config() {
        let cfg = PhyConfig {
            d_hap: -1.0,
            ..PhyConfig::default()
        };
        let err = received_power(&cfg).unwrap_err();
        assert!(
            err.to_string().contains("phy.d_hap"),
            "error should name the key: {err}"
        );
    }

    #[test]
    fn harvested_energy_split_cases() {
        assert_eq!(harvested_energy(0.0, 5.0).unwrap(), 5.0);
        assert_eq!(harvested_energy(1.0, 5.0).unwrap(), 0.0);
        assert_eq!(harvested_energy(0.25, 2.0).unwrap(), 1.5);
        assert!(harvested_energy(-0.1, 1.0).is_err());
        assert!(harvested_energy(1.1, 1.0).is_err());
    }

    #[test]
    fn backscatter_tx_power_cases() {
        assert_eq!(backscatter_tx_power(0.5, 1.0).unwrap(), 2.0);
        assert_eq!(backscatter_tx_power(1.0, 0.0).unwrap(), 0.0);
        assert!(backscatter_tx_power(0.0, 1.0).is_err());
    }

    #[test]
    fn backscatter_tx_power_blows_up_as_phi_vanishes() {
        // With p_r fixed, p_t = (1 - phi) * p_r / phi grows without bound.
        let e_h = harvested_energy(1e-6, 1.0).unwrap();
        let p_t = backscatter_tx_power(1e-6, e_h).unwrap();
        assert!(
            p_t > 9e5,
            "p_t at phi = 1e-6 should approach 1e6, got {p_t}"
        );
    }

    #[test]
    fn sinr_even_split_reduces_to_signal_over_noise() {
        let gains = table1_gains();
        let n0 = PhyConfig::default().n0;
        let got = sinr(0.5, 0.0, &gains, n0).unwrap();
        let want = gains.h_eff * gains.refl / n0;
        assert_eq!(got, want, "(1-phi)/phi must cancel exactly at phi = 0.5");
    }

    #[test]
    fn sinr_reference_scenario_pinned() {
        let gains = table1_gains();
        let n0 = PhyConfig::default().n0;
        let got = sinr(0.5, 1.0, &gains, n0).unwrap();
        let want = 186.59820758687064;
        assert!(
            rel_err(got, want) < 1e-12,
            "sinr(0.5, 1 W) = {got}, want {want}"
        );
    }

    #[test]
    fn sinr_boundary_conventions() {
        let gains = table1_gains();
        let n0 = PhyConfig::default().n0;
        assert_eq!(sinr(1.0, 0.5, &gains, n0).unwrap(), 0.0);
        assert!(sinr(0.0, 0.5, &gains, n0).unwrap().is_infinite());
        assert!(sinr(0.5, -1.0, &gains, n0).is_err());
        assert!(sinr(-0.1, 0.0, &gains, n0).is_err());
        assert!(sinr(0.5, 0.0, &gains, 0.0).is_err());
    }

    #[test]
    fn sinr_is_scale_invariant_in_powers() {
        let base = table1_gains();
        let n0 = PhyConfig::default().n0;
        let reference = sinr(0.3, 0.7, &base, n0).unwrap();
        for scale in [1e-3, 0.04, 17.5, 1e3] {
            let scaled = LinkGains {
                h_eff: base.h_eff * scale,
                g: base.g * scale,
                refl: base.refl,
                n0: base.n0 * scale,
            };
            let got = sinr(0.3, 0.7, &scaled, n0 * scale).unwrap();
            assert!(
                rel_err(got, reference) < 1e-12,
                "scaling all powers by {scale} changed sinr: {got} vs {reference}"
            );
        }
    }

    #[test]
    fn dbm_round_trip_and_pins() {
        assert_eq!(dbm_to_watts(30.0), 1.0);
        assert!(rel_err(dbm_to_watts(0.0), 0.001) < 1e-15);
        assert!(rel_err(dbm_to_watts(43.0), 19.952623149688797) < 1e-15);
        assert!(watts_to_dbm(0.0).is_err());
        assert!(watts_to_dbm(-1.0).is_err());
        let mut dbm = -100.0;
        while dbm <= 60.0 {
            let back = watts_to_dbm(dbm_to_watts(dbm)).unwrap();
            assert!(
                (back - dbm).abs() <= 1e-12 * dbm.abs().max(1.0),
                "round trip failed at {dbm} dBm: got {back}"
            );
            dbm += 1.0;
        }
    }

    #[test]
    fn thermal_noise_pinned_at_one_megahertz() {
        let got = thermal_noise_watts(1e6);
        assert!(
            rel_err(got, 4.0038821e-15) < 1e-15,
            "kTB over 1 MHz = {got}"
        );
    }

    #[test]
    fn validate_names_the_offending_key() {
        let cases: Vec<(PhyConfig, &str)> = vec![
            (
                PhyConfig {
                    p_hap: 0.0,
                    ..PhyConfig::default()
                },
                "phy.p_hap",
            ),
            (
                PhyConfig {
                    delta: 1.5,
                    ..PhyConfig::default()
                },
                "phy.delta",
            ),
            (
                PhyConfig {
                    g_t: -2.0,
                    ..PhyConfig::default()
                },
                "phy.g_t",
            ),
            (
                PhyConfig {
                    g_j: -0.1,
                    ..PhyConfig::default()
                },
                "phy.g_j",
            ),
            (
                PhyConfig {
                    lambda_j: 0.0,
                    ..PhyConfig::default()
                },
                "phy.lambda_j",
            ),
            (
                PhyConfig {
                    d_j: -3.0,
                    ..PhyConfig::default()
                },
                "phy.d_j",
            ),
            (
                PhyConfig {
                    gamma1: 1.0,
                    ..PhyConfig::default()
                },
                "phy.gamma1",
            ),
            (
                PhyConfig {
                    n0: 0.0,
                    ..PhyConfig::default()
                },
                "phy.n0",
            ),
        ];
        for (cfg, key) in cases {
            let err = cfg.validate().unwrap_err();
            assert!(err.to_string().contains(key), "expected `{key}` in: {err}");
        }
    }

    #[test]
    fn link_gains_interferer_absent_maps_to_zero_gain() {
        let cfg = PhyConfig {
            g_j: 0.0,
            ..PhyConfig::default()
        };
        let gains = LinkGains::from_phy(&cfg).unwrap();
        assert_eq!(gains.g, 0.0);
        assert!(gains.h_eff > 0.0);
    }

    #[test]
    fn link_gains_reject_zero_efficiency() {
        let cfg = PhyConfig {
            delta: 0.0,
            ..PhyConfig::default()
        };
        let err = LinkGains::from_phy(&cfg).unwrap_err();
        assert!(err.to_string().contains("phy.delta"), "got: {err}");
    }

    #[test]
    fn bits_vanish_exactly_at_slot_boundaries() {
        let gains = table1_gains();
        let params = GameParams::default();
        assert_eq!(backscattered_bits(0.0, 0.7, &gains, &params).unwrap(), 0.0);
        assert_eq!(backscattered_bits(1.0, 0.7, &gains, &params).unwrap(), 0.0);
        assert!(backscattered_bits(-0.1, 0.0, &gains, &params).is_err());
        assert!(backscattered_bits(1.1, 0.0, &gains, &params).is_err());
    }

    #[test]
    fn bits_reference_scenario_pinned() {
        let gains = table1_gains();
        let params = GameParams::default();
        let quiet = backscattered_bits(0.5, 0.0, &gains, &params).unwrap();
        assert!(
            rel_err(quiet, 18006785.94745651) < 1e-12,
            "bits(0.5, 0 W) = {quiet}"
        );
        let jammed = backscattered_bits(0.5, 1.0, &gains, &params).unwrap();
        assert!(
            rel_err(jammed, 3775751.116708766) < 1e-12,
            "bits(0.5, 1 W) = {jammed}"
        );
    }

    #[test]
    fn bits_grid_argmax_is_interior_and_pinned() {
        let gains = table1_gains();
        let params = GameParams::default();
        let mut best_i = 0usize;
        let mut best = f64::NEG_INFINITY;
        for i in 1..1000 {
            let phi = i as f64 / 1000.0;
            let b = backscattered_bits(phi, 0.0, &gains, &params).unwrap();
            if b > best {
                best = b;
                best_i = i;
            }
        }
        assert_eq!(best_i, 954, "grid argmax moved");
        assert!(
            rel_err(best, 30183881.12918779) < 1e-12,
            "grid max bits = {best}"
        );
        assert!(best_i > 0 && best_i < 1000, "argmax must be interior");
    }

    #[test]
    fn bits_strictly_decrease_with_jamming_power() {
        let gains = table1_gains();
        let params = GameParams::default();
        for k in 0..25 {
            let phi = 0.02 + 0.96 * (k as f64) / 24.0;
            let mut prev = f64::INFINITY;
            for step in 0..40 {
                let p_j = step as f64 * 0.05;
                let b = backscattered_bits(phi, p_j, &gains, &params).unwrap();
                assert!(
                    b < prev,
                    "bits must strictly decrease in p_j (phi = {phi}, p_j = {p_j})"
                );
                assert!(b > 0.0, "bits must be positive on the open interval");
                prev = b;
            }
        }
    }
}
