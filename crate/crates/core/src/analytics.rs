//! Exact outage, Chernoff bounds and the large-K approximation.
//!
//! Conditioned on `K1 = k1` phase-1 decoders, a listener's effective gain is
//! `Gamma(k1, 1) / (alpha K)`, so its outage probability is the Erlang CDF
//! `P(k1, x)` at `x = alpha K (1 - beta)`. Averaging over the binomial `K1`
//! gives the outage exactly:
//!
//! ```text
//! unicast   = (1 - alpha) * sum_{k1=0}^{K-1} Binom(K-1, alpha; k1) P(k1, x)
//! multicast = sum_{k1=0}^{K} Binom(K, alpha; k1) [1 - (1 - P(k1, x))^(K - k1)]
//! ```
//!
//! All sums run in the log domain. Exponents are in nats per node.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::{
    binary_relative_entropy, erlang_tails, ln_any_of, ln_binomial_pmf_raw, log_add_exp, log_sum_exp,
    LogProb,
};
use crate::protocol::{converse_outage_floor, rate_profile, CastMode, ProtocolParams};

/// Terms whose binomial weight is this far (in nats) below the largest term
/// found so far cannot move the sum at double precision.
const PRUNE_NATS: f64 = 60.0;

/// Natural log of a nonnegative quantity that may exceed one (a bound or an
/// approximation of a probability).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogBound(f64);

impl LogBound {
    pub fn new(ln_value: f64) -> Self {
        LogBound(ln_value)
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn value(self) -> f64 {
        self.0.exp()
    }

    /// Value clamped to `[0, 1]` for presentation.
    pub fn prob_clamped(self) -> f64 {
        self.0.min(0.0).exp()
    }
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        return domain("network size K must be at least 1");
    }
    Ok(())
}

/// `ln sum_{k1} exp(ln Binom(n, alpha; k1) + cond(k1))` where `cond <= 0`.
///
/// Walks outward from the binomial mode and stops on each side once the
/// binomial weight alone falls `PRUNE_NATS` below the largest term seen.
fn binomial_mixture<F>(n: u64, alpha: f64, mut cond: F) -> Result<f64>
where
    F: FnMut(u64) -> Result<f64>,
{
    let mode = (((n + 1) as f64 * alpha).floor() as u64).min(n);
    let mut best = f64::NEG_INFINITY;
    let mut terms = Vec::new();
    let mut visit = |k1: u64, best: &mut f64, terms: &mut Vec<f64>| -> Result<bool> {
        let lp = ln_binomial_pmf_raw(n, k1, alpha);
        if lp < *best - PRUNE_NATS {
            return Ok(false);
        }
        if lp == f64::NEG_INFINITY {
            return Ok(true);
        }
        let t = lp + cond(k1)?;
        *best = best.max(t);
        terms.push(t);
        Ok(true)
    };
    for k1 in (0..=mode).rev() {
        if !visit(k1, &mut best, &mut terms)? {
            break;
        }
    }
    for k1 in mode + 1..=n {
        if !visit(k1, &mut best, &mut terms)? {
            break;
        }
    }
    Ok(log_sum_exp(terms))
}

/// Exact outage probability, log domain.
pub fn ln_exact_outage(params: &ProtocolParams, k: usize, mode: CastMode) -> Result<LogProb> {
    check_k(k)?;
    let alpha = params.alpha();
    if alpha == 1.0 {
        // every node decodes in phase 1
        return Ok(LogProb::ZERO);
    }
    let x = alpha * k as f64 * (1.0 - params.beta());
    let k = k as u64;
    let ln = match mode {
        CastMode::Unicast => {
            let mix = binomial_mixture(k - 1, alpha, |k1| Ok(erlang_tails(k1, x)?.ln_lower))?;
            (-alpha).ln_1p() + mix
        }
        CastMode::Multicast => binomial_mixture(k, alpha, |k1| {
            let t = erlang_tails(k1, x)?;
            Ok(ln_any_of(k - k1, t.ln_lower, t.ln_upper))
        })?,
    };
    Ok(LogProb::saturating(ln))
}

/// Exact outage probability.
pub fn exact_outage(params: &ProtocolParams, k: usize, mode: CastMode) -> Result<f64> {
    Ok(ln_exact_outage(params, k, mode)?.prob())
}

/// Conditional outage bound `(x e / k1)^k1 e^{-x}`, `x = alphaK (1 - beta)`,
/// valid for `k1 >= x`.
pub fn chernoff_conditional_bound(alpha_k: f64, beta: f64, k1: u64) -> Result<LogProb> {
    if !(alpha_k > 0.0 && alpha_k.is_finite()) {
        return domain(format!("alpha*K must be positive, got {alpha_k}"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return domain(format!("beta must lie in (0, 1), got {beta}"));
    }
    let x = alpha_k * (1.0 - beta);
    let kf = k1 as f64;
    if kf < x {
        return Err(Error::Precondition(format!(
            "conditional bound needs k1 >= alpha*K*(1-beta) = {x}, got {k1}"
        )));
    }
    Ok(LogProb::saturating(kf * (x.ln() + 1.0 - kf.ln()) - x))
}

/// `gamma(beta, eps) = beta - eps + (1 - eps) ln((1 - beta) / (1 - eps))`,
/// negative for `0 < eps < beta`.
pub fn chernoff_gamma(beta: f64, eps: f64) -> f64 {
    beta - eps + (1.0 - eps) * ((1.0 - beta) / (1.0 - eps)).ln()
}

fn check_eps(beta: f64, eps: f64) -> Result<()> {
    if !(eps > 0.0 && eps < beta) {
        return domain(format!("eps must lie in (0, beta) = (0, {beta}), got {eps}"));
    }
    Ok(())
}

/// Unicast bound `exp(-alphaK eps^2 / 4) + exp(alphaK gamma(beta, eps))`.
pub fn chernoff_unicast_bound(params: &ProtocolParams, k: usize, eps: f64) -> Result<LogBound> {
    check_k(k)?;
    check_eps(params.beta(), eps)?;
    let ak = params.alpha() * k as f64;
    Ok(LogBound(log_add_exp(
        -ak * eps * eps / 4.0,
        ak * chernoff_gamma(params.beta(), eps),
    )))
}

/// Multicast bound: `K` times the unicast bound.
pub fn chernoff_multicast_bound(params: &ProtocolParams, k: usize, eps: f64) -> Result<LogBound> {
    let uc = chernoff_unicast_bound(params, k, eps)?;
    Ok(LogBound((k as f64).ln() + uc.ln()))
}

/// Golden-section minimizer of a unimodal function on `[lo, hi]`.
fn golden_min<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// The `eps` in `(0, beta)` minimizing the unicast bound at size `k`.
pub fn optimal_chernoff_eps(params: &ProtocolParams, k: usize) -> Result<f64> {
    check_k(k)?;
    let beta = params.beta();
    let ak = params.alpha() * k as f64;
    let f = |e: f64| log_add_exp(-ak * e * e / 4.0, ak * chernoff_gamma(beta, e));
    Ok(golden_min(f, beta * 1e-9, beta * (1.0 - 1e-9), beta * 1e-12))
}

/// Solves `eps^2 / 4 = -gamma(beta, eps)`, the eps that balances the two
/// exponents of the unicast bound as `K` grows.
fn balanced_chernoff_eps(beta: f64) -> f64 {
    let h = |e: f64| e * e / 4.0 + chernoff_gamma(beta, e);
    let (mut lo, mut hi) = (0.0, beta);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if h(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Stationary point and exponent of the large-K approximation for one
/// `(alpha, beta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ApproxInternals {
    /// `mu = alpha^2 (1 - beta) / (1 - alpha)`.
    pub mu: f64,
    /// Root of `gamma^2 / (1 - gamma) = mu` in `(alpha (1 - beta), 1)`.
    pub gamma_star: f64,
    /// `(sqrt(1 + 4 mu) - 1) / (2 mu)`, the other closed form one meets for
    /// this quantity. It does not satisfy the stationarity condition and is
    /// only carried for comparison.
    pub gamma_reciprocal_form: f64,
    /// Per-node decay rate of the approximation, nats.
    pub exponent_per_node: f64,
    /// Asymptotically balanced eps of the unicast Chernoff bound.
    pub chernoff_eps: f64,
    /// `gamma(beta, chernoff_eps)`, always negative.
    pub chernoff_gamma: f64,
}

/// Per-node exponent of the largest term at binomial fraction `gamma`:
/// `alpha (1 - beta) + D(gamma || alpha) - gamma ln(alpha (1 - beta) e / gamma)`.
/// The approximation's exponent is the minimum of this over `gamma`.
pub fn term_exponent(alpha: f64, beta: f64, gamma: f64) -> Result<f64> {
    let x = alpha * (1.0 - beta);
    Ok(x + binary_relative_entropy(gamma, alpha)? - gamma * (x / gamma).ln() - gamma)
}

pub fn solve_gamma_star(alpha: f64, beta: f64) -> Result<ApproxInternals> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("alpha must lie in (0, 1), got {alpha}"));
    }
    if !(beta > 0.0 && beta < 1.0) {
        return domain(format!("beta must lie in (0, 1), got {beta}"));
    }
    let mu = alpha * alpha * (1.0 - beta) / (1.0 - alpha);
    // (sqrt(mu^2 + 4 mu) - mu) / 2, rationalized to avoid cancellation
    let gamma_star = 2.0 * mu / ((mu * mu + 4.0 * mu).sqrt() + mu);
    let gamma_reciprocal_form = ((1.0 + 4.0 * mu).sqrt() - 1.0) / (2.0 * mu);
    let exponent_per_node = term_exponent(alpha, beta, gamma_star)?;
    let chernoff_eps = balanced_chernoff_eps(beta);
    Ok(ApproxInternals {
        mu,
        gamma_star,
        gamma_reciprocal_form,
        exponent_per_node,
        chernoff_eps,
        chernoff_gamma: chernoff_gamma(beta, chernoff_eps),
    })
}

/// Large-K approximation `(1/sqrt K) exp(-K E)` for unicast, `K` times that
/// for multicast.
pub fn approx_outage(params: &ProtocolParams, k: usize, mode: CastMode) -> Result<LogBound> {
    check_k(k)?;
    let internals = solve_gamma_star(params.alpha(), params.beta())?;
    let kf = k as f64;
    let uc = -0.5 * kf.ln() - kf * internals.exponent_per_node;
    Ok(LogBound(match mode {
        CastMode::Unicast => uc,
        CastMode::Multicast => uc + kf.ln(),
    }))
}

/// Exact values, bounds and approximations for one `(params, K)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundSet {
    pub k: usize,
    pub exact_uc: LogProb,
    pub exact_mc: LogProb,
    pub chernoff_uc: LogBound,
    pub chernoff_mc: LogBound,
    pub chernoff_eps: f64,
    pub approx_uc: LogBound,
    pub approx_mc: LogBound,
    /// Converse floor at the protocol's effective rate (zero below capacity).
    pub converse_floor: LogProb,
}

pub fn bound_set(params: &ProtocolParams, k: usize) -> Result<BoundSet> {
    let eps = optimal_chernoff_eps(params, k)?;
    let rates = rate_profile(params)?;
    Ok(BoundSet {
        k,
        exact_uc: ln_exact_outage(params, k, CastMode::Unicast)?,
        exact_mc: ln_exact_outage(params, k, CastMode::Multicast)?,
        chernoff_uc: chernoff_unicast_bound(params, k, eps)?,
        chernoff_mc: chernoff_multicast_bound(params, k, eps)?,
        chernoff_eps: eps,
        approx_uc: approx_outage(params, k, CastMode::Unicast)?,
        approx_mc: approx_outage(params, k, CastMode::Multicast)?,
        converse_floor: LogProb::from_prob(converse_outage_floor(rates.r_eff, params.snr())?)?,
    })
}

/// CSV row of a [`BoundSet`] in linear probability units. Bounds are not
/// clamped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    #[serde(rename = "K")]
    pub k: usize,
    pub exact_uc: f64,
    pub exact_mc: f64,
    pub chernoff_uc: f64,
    pub chernoff_mc: f64,
    pub approx_uc: f64,
    pub approx_mc: f64,
}

pub const BOUND_SCHEMA: &str = "coop-outage bounds v1";

impl From<&BoundSet> for BoundRow {
    fn from(b: &BoundSet) -> Self {
        BoundRow {
            k: b.k,
            exact_uc: b.exact_uc.prob(),
            exact_mc: b.exact_mc.prob(),
            chernoff_uc: b.chernoff_uc.value(),
            chernoff_mc: b.chernoff_mc.value(),
            approx_uc: b.approx_uc.value(),
            approx_mc: b.approx_mc.value(),
        }
    }
}
