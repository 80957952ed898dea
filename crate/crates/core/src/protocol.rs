//! Closed-form quantities of the two-phase cooperative protocol.
//!
//! Phase 1: the source broadcasts at rate `r1 = log2(1 + G(alpha) snr)`, so a
//! node decodes iff its gain from the source exceeds the threshold `G(alpha)`.
//! Phase 2: the `k1` phase-1 decoders retransmit as a distributed array at
//! `r2 = log2(1 + snr (1 - beta))`, each with power `P / (alpha K)`.
//!
//! Rates are in bits per channel use. Gains and thresholds are linear power
//! ratios. Only `snr = P / N0` enters the rate formulas.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Which nodes must decode: a single destination (node K) or all K nodes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CastMode {
    #[serde(rename = "uc")]
    Unicast,
    #[serde(rename = "mc")]
    Multicast,
}

impl CastMode {
    pub const BOTH: [CastMode; 2] = [CastMode::Unicast, CastMode::Multicast];

    pub fn as_str(self) -> &'static str {
        match self {
            CastMode::Unicast => "uc",
            CastMode::Multicast => "mc",
        }
    }
}

impl fmt::Display for CastMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CastMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uc" | "unicast" => Ok(CastMode::Unicast),
            "mc" | "multicast" => Ok(CastMode::Multicast),
            other => domain(format!("unknown mode `{other}` (expected uc or mc)")),
        }
    }
}

/// Design pair `(alpha, beta)` plus the linear SNR `P / N0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProtocolParams {
    alpha: f64,
    beta: f64,
    snr: f64,
}

impl ProtocolParams {
    /// `alpha` in `(0, 1]` is the target fraction of phase-1 decoders,
    /// `beta` in `(0, 1)` the phase-2 back-off, `snr > 0` linear.
    pub fn new(alpha: f64, beta: f64, snr: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return domain(format!("alpha must lie in (0, 1], got {alpha}"));
        }
        if !(beta > 0.0 && beta < 1.0) {
            return domain(format!("beta must lie in (0, 1), got {beta}"));
        }
        if !(snr > 0.0 && snr.is_finite()) {
            return domain(format!("snr must be positive and finite, got {snr}"));
        }
        Ok(Self { alpha, beta, snr })
    }

    /// Builds the parameters from the phase-1 gain threshold `G(alpha)`
    /// instead of `alpha`.
    pub fn from_threshold(threshold: f64, beta: f64, snr: f64) -> Result<Self> {
        if !(threshold >= 0.0 && threshold.is_finite()) {
            return domain(format!("gain threshold must be finite and >= 0, got {threshold}"));
        }
        Self::new((-threshold).exp(), beta, snr)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn snr(&self) -> f64 {
        self.snr
    }

    pub fn with_beta(&self, beta: f64) -> Result<Self> {
        Self::new(self.alpha, beta, self.snr)
    }

    /// Phase-1 decoding threshold `G(alpha) = -ln(alpha)`.
    pub fn threshold(&self) -> f64 {
        -self.alpha.ln()
    }
}

/// Converts decibels to a linear power ratio.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// CDF of a unit-mean exponential gain `|h|^2`.
pub fn exponential_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        -(-x).exp_m1()
    }
}

/// Phase-1 gain threshold `G(alpha) = F^{-1}(1 - alpha) = -ln(alpha)`.
pub fn gain_threshold(alpha: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return domain(format!("alpha must lie in (0, 1], got {alpha}"));
    }
    Ok(-alpha.ln())
}

/// Single-antenna capacity `log2(1 + snr)`, bits per channel use.
pub fn capacity(snr: f64) -> f64 {
    snr.ln_1p() / std::f64::consts::LN_2
}

/// Rates and time split of one protocol configuration, in bits per channel use.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateProfile {
    pub r1: f64,
    pub r2: f64,
    pub r_eff: f64,
    pub phase1_fraction: f64,
    pub phase2_fraction: f64,
    pub capacity: f64,
    pub rate_fraction: f64,
}

/// Phase rates, effective rate `1/r = 1/r1 + 1/r2`, and the fraction of
/// capacity achieved.
///
/// `alpha = 1` is rejected: the threshold is zero, so `r1 = 0` and the
/// effective rate degenerates.
pub fn rate_profile(params: &ProtocolParams) -> Result<RateProfile> {
    let g = params.threshold();
    let r1 = (g * params.snr).ln_1p() / std::f64::consts::LN_2;
    if !(r1 > 0.0) {
        return domain(format!(
            "degenerate phase-1 rate: alpha = {} gives a zero decoding threshold",
            params.alpha
        ));
    }
    let r2 = (params.snr * (1.0 - params.beta)).ln_1p() / std::f64::consts::LN_2;
    let r_eff = r1 * r2 / (r1 + r2);
    let capacity = capacity(params.snr);
    // n1 r1 = n2 r2 with n1 + n2 = n
    let phase1_fraction = r2 / (r1 + r2);
    let phase2_fraction = r1 / (r1 + r2);
    Ok(RateProfile {
        r1,
        r2,
        r_eff,
        phase1_fraction,
        phase2_fraction,
        capacity,
        rate_fraction: r_eff / capacity,
    })
}

/// Per-relay phase-2 power `P / (alpha K)`; with `E[K1] = alpha K` the
/// expected phase-2 sum power equals the budget `P`.
pub fn phase2_power_per_node(params: &ProtocolParams, k: usize, total_power: f64) -> Result<f64> {
    if k == 0 {
        return domain("network size K must be at least 1");
    }
    if !(total_power >= 0.0 && total_power.is_finite()) {
        return domain(format!("power budget must be finite and >= 0, got {total_power}"));
    }
    Ok(total_power / (params.alpha * k as f64))
}

/// K-independent lower bound on MISO outage (hence on unicast and multicast
/// outage of any admissible protocol): `max(0, 1 - C / rate)`.
pub fn converse_outage_floor(rate: f64, snr: f64) -> Result<f64> {
    if !(rate > 0.0 && rate.is_finite()) {
        return domain(format!("rate must be positive, got {rate}"));
    }
    if !(snr > 0.0 && snr.is_finite()) {
        return domain(format!("snr must be positive and finite, got {snr}"));
    }
    Ok(((rate - capacity(snr)) / rate).max(0.0))
}

/// Capacity with `antennas[i]` antennas at node `i`; the last entry is the
/// unicast destination. Multicast is limited by the smallest array.
pub fn capacity_multiantenna(mode: CastMode, antennas: &[u32], snr: f64) -> Result<f64> {
    let Some(&dest) = antennas.last() else {
        return domain("antenna list must be nonempty");
    };
    if antennas.contains(&0) {
        return domain("every node needs at least one antenna");
    }
    let streams = match mode {
        CastMode::Unicast => dest,
        CastMode::Multicast => *antennas.iter().min().unwrap_or(&dest),
    };
    Ok(streams as f64 * capacity(snr))
}

/// The capacity-approaching schedule `alpha = 1/ln K`, `beta = 1/K`.
///
/// Needs `K >= 3` so that `alpha < 1`.
pub fn achievability_schedule(k: usize, snr: f64) -> Result<ProtocolParams> {
    if k < 3 {
        return domain(format!("schedule needs K >= 3, got {k}"));
    }
    let kf = k as f64;
    ProtocolParams::new(1.0 / kf.ln(), 1.0 / kf, snr)
}
