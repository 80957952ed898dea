//! Network scaling exponent: per-node decay rate of outage with network size,
//! `(alpha, beta)` sweeps against the achieved fraction of capacity, and the
//! network size needed for a target outage.
//!
//! Exponents are in nats per node. Unicast and multicast share the exponent;
//! at finite `K` the multicast curve sits `ln K` above the unicast one.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{ln_exact_outage, solve_gamma_star};
use crate::error::{domain, Error, Result};
use crate::protocol::{rate_profile, CastMode, ProtocolParams};

/// Search ceiling for [`required_network_size`].
pub const MAX_NETWORK_SIZE: usize = 1_000_000;

pub const DEFAULT_ENVELOPE_BINS: usize = 100;

/// `-lim (1/K) ln Pr{outage}` for fixed `(alpha, beta)`.
pub fn asymptotic_exponent(params: &ProtocolParams) -> Result<f64> {
    Ok(solve_gamma_star(params.alpha(), params.beta())?.exponent_per_node)
}

/// Per-node exponent guaranteed by the optimized unicast Chernoff bound,
/// `alpha eps*^2 / 4` with `eps*` balancing its two terms. Never larger than
/// [`asymptotic_exponent`].
pub fn chernoff_exponent(params: &ProtocolParams) -> Result<f64> {
    let s = solve_gamma_star(params.alpha(), params.beta())?;
    Ok(params.alpha() * s.chernoff_eps * s.chernoff_eps / 4.0)
}

/// Finite-difference slope `-(ln P(2K) - ln P(K)) / K` of the exact outage.
pub fn empirical_slope(params: &ProtocolParams, k: usize, mode: CastMode) -> Result<f64> {
    let a = ln_exact_outage(params, k, mode)?.ln();
    let b = ln_exact_outage(params, 2 * k, mode)?.ln();
    Ok(-(b - a) / k as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub alpha: f64,
    pub beta: f64,
    pub rate_fraction: f64,
    pub exponent: f64,
}

/// Best exponent among points whose rate fraction is at least `r_bin`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvelopePoint {
    pub r_bin: f64,
    pub envelope_exponent: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExponentSweep {
    pub points: Vec<SweepPoint>,
    /// One entry per bin; `None` when no point reaches the bin.
    pub bins: Vec<Option<f64>>,
}

impl ExponentSweep {
    pub fn bin_width(&self) -> f64 {
        1.0 / self.bins.len() as f64
    }

    /// Envelope value at rate fraction `r`, if any point reaches it.
    pub fn envelope_at(&self, r: f64) -> Option<f64> {
        let i = (r * self.bins.len() as f64).floor();
        if !(0.0..self.bins.len() as f64).contains(&i) {
            return None;
        }
        self.bins[i as usize]
    }

    /// Nonempty bins as `(lower edge, envelope)` rows.
    pub fn envelope(&self) -> Vec<EnvelopePoint> {
        let n = self.bins.len() as f64;
        self.bins
            .iter()
            .enumerate()
            .filter_map(|(i, v)| {
                v.map(|e| EnvelopePoint {
                    r_bin: i as f64 / n,
                    envelope_exponent: e,
                })
            })
            .collect()
    }
}

/// `n` log-spaced values from `lo` to `hi` inclusive.
pub fn log_spaced(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect()
        }
    }
}

/// Exponent and rate fraction for every `(alpha, beta)` cell, plus the upper
/// envelope over `bins` equal-width rate-fraction bins.
///
/// Points come back in row-major order (`alpha` outer) regardless of
/// `workers`.
pub fn sweep_exponent(
    snr: f64,
    alpha_grid: &[f64],
    beta_grid: &[f64],
    bins: usize,
    workers: usize,
) -> Result<ExponentSweep> {
    if alpha_grid.is_empty() || beta_grid.is_empty() {
        return domain("alpha and beta grids must be nonempty");
    }
    if bins == 0 {
        return domain("envelope needs at least one bin");
    }
    if let Some(a) = alpha_grid.iter().find(|&&a| !(a > 0.0 && a < 1.0)) {
        return domain(format!("sweep alpha must lie in (0, 1), got {a}"));
    }
    let cells: Vec<(f64, f64)> = alpha_grid
        .iter()
        .flat_map(|&a| beta_grid.iter().map(move |&b| (a, b)))
        .collect();
    let pool = crate::montecarlo::worker_pool(workers)?;
    let points: Vec<SweepPoint> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(alpha, beta)| {
                let params = ProtocolParams::new(alpha, beta, snr)?;
                Ok(SweepPoint {
                    alpha,
                    beta,
                    rate_fraction: rate_profile(&params)?.rate_fraction,
                    exponent: asymptotic_exponent(&params)?,
                })
            })
            .collect::<Result<Vec<_>>>()
    })?;

    let mut best = vec![None::<f64>; bins];
    for p in &points {
        let i = ((p.rate_fraction * bins as f64).floor() as usize).min(bins - 1);
        best[i] = Some(best[i].map_or(p.exponent, |e: f64| e.max(p.exponent)));
    }
    // suffix maximum: any point reaching a higher rate also reaches this bin
    let mut running = None::<f64>;
    for slot in best.iter_mut().rev() {
        running = match (running, *slot) {
            (Some(r), Some(v)) => Some(r.max(v)),
            (r, v) => r.or(v),
        };
        *slot = running;
    }
    Ok(ExponentSweep { points, bins: best })
}

pub const POINT_SCHEMA: &str = "coop-outage exponent-points v1";
pub const ENVELOPE_SCHEMA: &str = "coop-outage exponent-envelope v1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RequiredSize {
    Attained(usize),
    Unattained { searched_up_to: usize },
}

impl RequiredSize {
    pub fn attained(self) -> Option<usize> {
        match self {
            RequiredSize::Attained(k) => Some(k),
            RequiredSize::Unattained { .. } => None,
        }
    }
}

/// Smallest `K` with exact outage at most `target_eps`, by doubling then
/// bisection. Assumes the exact curve is nonincreasing in `K` past the
/// doubling bracket.
pub fn required_network_size(
    params: &ProtocolParams,
    mode: CastMode,
    target_eps: f64,
) -> Result<RequiredSize> {
    if !(target_eps > 0.0 && target_eps <= 1.0) {
        return domain(format!("target outage must lie in (0, 1], got {target_eps}"));
    }
    let ln_target = target_eps.ln();
    let meets = |k: usize| -> Result<bool> { Ok(ln_exact_outage(params, k, mode)?.ln() <= ln_target) };
    let mut lo = 0usize;
    let mut hi = 1usize;
    loop {
        if meets(hi)? {
            break;
        }
        if hi >= MAX_NETWORK_SIZE {
            return Ok(RequiredSize::Unattained {
                searched_up_to: MAX_NETWORK_SIZE,
            });
        }
        lo = hi;
        hi = (2 * hi).min(MAX_NETWORK_SIZE);
    }
    // invariant: !meets(lo) (or lo == 0), meets(hi)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if meets(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(RequiredSize::Attained(hi))
}

/// Measured multicast-over-unicast network size gap against the prediction
/// `ln(K_uc) / E`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapReport {
    pub target_eps: f64,
    pub k_uc: usize,
    pub k_mc: usize,
    pub exponent: f64,
    pub measured_gap: f64,
    pub predicted_gap: f64,
    pub relative_error: f64,
}

pub fn network_size_gap(params: &ProtocolParams, target_eps: f64) -> Result<GapReport> {
    let unattained = |mode: CastMode| {
        Error::Unattained(format!(
            "{mode} target {target_eps} not reached for K <= {MAX_NETWORK_SIZE}"
        ))
    };
    let k_uc = required_network_size(params, CastMode::Unicast, target_eps)?
        .attained()
        .ok_or_else(|| unattained(CastMode::Unicast))?;
    let k_mc = required_network_size(params, CastMode::Multicast, target_eps)?
        .attained()
        .ok_or_else(|| unattained(CastMode::Multicast))?;
    let exponent = asymptotic_exponent(params)?;
    let measured_gap = k_mc as f64 - k_uc as f64;
    let predicted_gap = (k_uc as f64).ln() / exponent;
    Ok(GapReport {
        target_eps,
        k_uc,
        k_mc,
        exponent,
        measured_gap,
        predicted_gap,
        relative_error: if predicted_gap == 0.0 && measured_gap == 0.0 {
            0.0
        } else {
            (measured_gap - predicted_gap).abs() / predicted_gap.abs()
        },
    })
}
