//! Log-domain special functions shared by the analytic and exponent modules.
//!
//! Probabilities that can fall below `f64::MIN_POSITIVE` at realistic network
//! sizes (outage at K in the thousands decays like `exp(-0.08 K)`) are carried
//! as natural logarithms. Binomial and Poisson masses use Loader's saddle-point
//! form (`stirlerr` + `bd0`) so that their logarithms keep full relative
//! precision even when `n` is in the millions.
//!
//! Units: every logarithm and relative entropy in this module is in nats.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Clamp bound applied to relative-entropy arguments by callers that may
/// touch the edges of the unit interval.
pub const UNIT_CLAMP: f64 = 1e-15;

const LN_2PI: f64 = 1.837_877_066_409_345_5;

/// Natural log of a probability. `-inf` encodes probability zero.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogProb(f64);

impl LogProb {
    pub const ZERO: LogProb = LogProb(f64::NEG_INFINITY);
    pub const ONE: LogProb = LogProb(0.0);

    pub fn new(ln_value: f64) -> Result<Self> {
        if ln_value.is_nan() || ln_value > 0.0 {
            return domain(format!("log-probability must be <= 0, got {ln_value}"));
        }
        Ok(LogProb(ln_value))
    }

    /// Wraps a value already known to be a valid log-probability; tiny positive
    /// rounding excursions are folded to zero.
    pub(crate) fn saturating(ln_value: f64) -> Self {
        debug_assert!(!ln_value.is_nan());
        LogProb(ln_value.min(0.0))
    }

    pub fn from_prob(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return domain(format!("probability must lie in [0, 1], got {p}"));
        }
        Ok(LogProb(p.ln()))
    }

    pub fn ln(self) -> f64 {
        self.0
    }

    pub fn prob(self) -> f64 {
        self.0.exp()
    }
}

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == f64::NEG_INFINITY {
        return hi;
    }
    hi + (lo - hi).exp().ln_1p()
}

/// `ln(sum exp(v))` over an iterator, stable for arbitrarily negative inputs.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max.is_infinite() {
        return max;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

// ln(n!) - [(n + 1/2) ln n - n + ln sqrt(2 pi)] for n = 1..=15.
#[allow(clippy::excessive_precision)]
const STIRLERR_TABLE: [f64; 15] = [
    0.081_061_466_795_327_258,
    0.041_340_695_955_409_294,
    0.027_677_925_684_998_339,
    0.020_790_672_103_765_093,
    0.016_644_691_189_821_192,
    0.013_876_128_823_070_748,
    0.011_896_709_945_891_770,
    0.010_411_265_261_972_096,
    0.009_255_462_182_712_733,
    0.008_330_563_433_362_871,
    0.007_573_675_487_951_841,
    0.006_942_840_107_209_530,
    0.006_408_994_188_004_207,
    0.005_951_370_112_758_848,
    0.005_554_733_551_962_801,
];

/// Error of Stirling's formula for `ln(n!)`, `n >= 1`.
fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    debug_assert!(n >= 1);
    if n <= 15 {
        return STIRLERR_TABLE[(n - 1) as usize];
    }
    let n = n as f64;
    let nn = n * n;
    if n > 500.0 {
        (S0 - S1 / nn) / n
    } else if n > 80.0 {
        (S0 - (S1 - S2 / nn) / nn) / n
    } else if n > 35.0 {
        (S0 - (S1 - (S2 - S3 / nn) / nn) / nn) / n
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / nn) / nn) / nn) / nn) / n
    }
}

/// Deviance term `x ln(x/np) + np - x`, evaluated without cancellation when
/// `x` is close to `np`.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let v = (x - np) / (x + np);
        let v2 = v * v;
        let mut s = (x - np) * v;
        let mut ej = 2.0 * x * v;
        let mut j = 1.0;
        loop {
            ej *= v2;
            let s1 = s + ej / (2.0 * j + 1.0);
            if s1 == s {
                return s1;
            }
            s = s1;
            j += 1.0;
        }
    }
    x * (x / np).ln() + np - x
}

/// `ln Pr{Binomial(n, p) = k}` for `p` in `[0, 1]`; `k > n` gives `-inf`.
pub(crate) fn ln_binomial_pmf_raw(n: u64, k: u64, p: f64) -> f64 {
    let q = 1.0 - p;
    if k > n {
        return f64::NEG_INFINITY;
    }
    if p == 0.0 {
        return if k == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if k == n { 0.0 } else { f64::NEG_INFINITY };
    }
    if n == 0 {
        return 0.0;
    }
    let nf = n as f64;
    if k == 0 {
        return if p < 0.1 {
            -bd0(nf, nf * q) - nf * p
        } else {
            nf * (-p).ln_1p()
        };
    }
    if k == n {
        return if q < 0.1 {
            -bd0(nf, nf * p) - nf * q
        } else {
            nf * p.ln()
        };
    }
    let kf = k as f64;
    let mf = (n - k) as f64;
    let lc = stirlerr(n) - stirlerr(k) - stirlerr(n - k) - bd0(kf, nf * p) - bd0(mf, nf * q);
    let lf = LN_2PI + kf.ln() + (-kf / nf).ln_1p();
    lc - 0.5 * lf
}

/// `ln Pr{Poisson(mean) = k}` for `k >= 1`, `mean > 0`.
fn ln_poisson_pmf(k: u64, mean: f64) -> f64 {
    debug_assert!(k >= 1 && mean > 0.0);
    let kf = k as f64;
    -stirlerr(k) - bd0(kf, mean) - 0.5 * (LN_2PI + kf.ln())
}

/// Log of the binomial mass `C(n, k) p^k (1-p)^(n-k)`.
///
/// Requires `n >= 1`, `k <= n` and `0 < p < 1`.
pub fn log_binomial_pmf(n: u64, k: u64, p: f64) -> Result<LogProb> {
    if n == 0 {
        return domain("binomial trial count must be positive");
    }
    if k > n {
        return domain(format!("success count {k} exceeds trial count {n}"));
    }
    if !(p > 0.0 && p < 1.0) {
        return domain(format!("success probability must lie in (0, 1), got {p}"));
    }
    Ok(LogProb::saturating(ln_binomial_pmf_raw(n, k, p)))
}

/// Lower and upper tails of an Erlang(k) variable at `x`, in log domain.
///
/// `ln_lower = ln Pr{S_k <= x}` and `ln_upper = ln Pr{S_k > x}` where `S_k` is a
/// sum of `k` unit-mean exponentials. Both are computed directly so that
/// neither tail loses precision to `1 - p` cancellation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErlangTails {
    pub ln_lower: f64,
    pub ln_upper: f64,
}

const GAMMA_EPS: f64 = 1e-16;
const FPMIN: f64 = 1e-300;

pub fn erlang_tails(k: u64, x: f64) -> Result<ErlangTails> {
    if !x.is_finite() || x < 0.0 {
        return domain(format!("Erlang CDF argument must be finite and >= 0, got {x}"));
    }
    if k == 0 {
        return Ok(ErlangTails {
            ln_lower: 0.0,
            ln_upper: f64::NEG_INFINITY,
        });
    }
    if x == 0.0 {
        return Ok(ErlangTails {
            ln_lower: f64::NEG_INFINITY,
            ln_upper: 0.0,
        });
    }
    let kf = k as f64;
    let ln_mass = ln_poisson_pmf(k, x);
    // Series terms decay like exp(-n^2 / 2k) near the transition, so the
    // budget grows with sqrt(k).
    let max_iter = 1000 + 50 * (kf.sqrt() as usize);

    if x < kf + 1.0 {
        let mut sum = 1.0;
        let mut term = 1.0;
        let mut n = 1.0;
        let mut iter = 0;
        loop {
            term *= x / (kf + n);
            sum += term;
            if term < sum * GAMMA_EPS {
                break;
            }
            n += 1.0;
            iter += 1;
            if iter > max_iter {
                return Err(Error::Convergence {
                    routine: "incomplete gamma series",
                    iterations: iter,
                });
            }
        }
        let ln_lower = (ln_mass + sum.ln()).min(0.0);
        let ln_upper = (-ln_lower.exp()).ln_1p();
        Ok(ErlangTails { ln_lower, ln_upper })
    } else {
        // Modified Lentz evaluation of the continued fraction for the upper tail.
        let mut b = x + 1.0 - kf;
        let mut c = 1.0 / FPMIN;
        let mut d = 1.0 / b;
        let mut h = d;
        let mut i = 1.0;
        let mut iter = 0;
        loop {
            let an = -i * (i - kf);
            b += 2.0;
            d = an * d + b;
            if d.abs() < FPMIN {
                d = FPMIN;
            }
            c = b + an / c;
            if c.abs() < FPMIN {
                c = FPMIN;
            }
            d = 1.0 / d;
            let del = d * c;
            h *= del;
            if (del - 1.0).abs() < GAMMA_EPS {
                break;
            }
            i += 1.0;
            iter += 1;
            if iter > max_iter {
                return Err(Error::Convergence {
                    routine: "incomplete gamma continued fraction",
                    iterations: iter,
                });
            }
        }
        let ln_upper = (kf.ln() + ln_mass + h.ln()).min(0.0);
        let ln_lower = (-ln_upper.exp()).ln_1p();
        Ok(ErlangTails { ln_lower, ln_upper })
    }
}

/// Regularized lower incomplete gamma `P(k, x)` for integer shape: the
/// probability that a sum of `k` unit-mean exponentials is at most `x`.
///
/// `k = 0` returns 1 (the empty sum is zero).
pub fn regularized_lower_gamma(k: u64, x: f64) -> Result<f64> {
    Ok(erlang_tails(k, x)?.ln_lower.exp())
}

/// `ln(1 - (1 - p)^m)` from the log tails `ln p` and `ln(1 - p)`.
///
/// This is the probability that at least one of `m` independent events of
/// probability `p` occurs.
pub fn ln_any_of(m: u64, ln_p: f64, ln_q: f64) -> f64 {
    if m == 0 || ln_p == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if ln_q == f64::NEG_INFINITY {
        return 0.0;
    }
    let mf = m as f64;
    if ln_p < -30.0 {
        // 1 - (1-p)^m = m p (1 - (m-1) p / 2 + O((m p)^2)), with m p < 1e-6 here.
        let p = ln_p.exp();
        return mf.ln() + ln_p + (-(mf - 1.0) * p / 2.0).ln_1p();
    }
    (-(mf * ln_q).exp_m1()).ln().min(0.0)
}

/// Binary relative entropy `D(p || q)` in nats.
///
/// Arguments must lie strictly inside `(0, 1)`; callers working on grids that
/// touch the boundary clamp with [`clamp_unit`] first.
pub fn binary_relative_entropy(p: f64, q: f64) -> Result<f64> {
    for (name, v) in [("p", p), ("q", q)] {
        if !(v > 0.0 && v < 1.0) {
            return domain(format!("relative entropy argument {name} must lie in (0, 1), got {v}"));
        }
    }
    if p == q {
        return Ok(0.0);
    }
    let d = p * (p / q).ln() + (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln();
    Ok(d.max(0.0))
}

/// Clamp into `[UNIT_CLAMP, 1 - UNIT_CLAMP]`.
pub fn clamp_unit(v: f64) -> f64 {
    v.clamp(UNIT_CLAMP, 1.0 - UNIT_CLAMP)
}
