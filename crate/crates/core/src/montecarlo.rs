//! Parallel Monte Carlo estimation of outage probabilities.
//!
//! Trial `i` under seed `s` always draws from ChaCha8 stream `i` keyed by `s`,
//! so the way trials are split across workers never changes a single draw.
//! Per-chunk tallies are integer counts and merge by addition, which makes the
//! reduction order irrelevant: estimates are bit-identical for any worker
//! count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::protocol::{CastMode, ProtocolParams};
use crate::simcore::{direct_link_trial, run_trial};

/// Trials per work item. Fixed so chunk boundaries never depend on `workers`.
const CHUNK: u64 = 2048;

/// Below this many outages the normal interval is replaced by Clopper-Pearson.
const EXACT_CI_BELOW: u64 = 30;

const Z95: f64 = 1.959_963_984_540_054;

/// Generator for trial `index` under `seed`.
pub fn trial_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Independent child seed for sweep entry `tag` (e.g. the network size).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    splitmix64(seed ^ splitmix64(tag))
}

/// Monte Carlo outage estimate with a 95% confidence interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutageEstimate {
    pub p_hat: f64,
    pub outages: u64,
    pub trials: u64,
    pub std_err: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub seed: u64,
    pub mode: CastMode,
}

impl OutageEstimate {
    pub fn from_counts(outages: u64, trials: u64, seed: u64, mode: CastMode) -> Result<Self> {
        if trials == 0 {
            return domain("trial count must be at least 1");
        }
        if outages > trials {
            return domain(format!("{outages} outages exceed {trials} trials"));
        }
        let n = trials as f64;
        let p_hat = outages as f64 / n;
        let std_err = (p_hat * (1.0 - p_hat) / n).sqrt();
        let (ci95_low, ci95_high) = if outages < EXACT_CI_BELOW {
            clopper_pearson(outages, trials)
        } else {
            (
                (p_hat - Z95 * std_err).max(0.0),
                (p_hat + Z95 * std_err).min(1.0),
            )
        };
        Ok(Self {
            p_hat,
            outages,
            trials,
            std_err,
            ci95_low: ci95_low.min(p_hat),
            ci95_high: ci95_high.max(p_hat),
            seed,
            mode,
        })
    }

    /// `|p_hat - p| <= sigmas * std_err`. With zero observed outages the
    /// binomial standard error vanishes, so the check falls back to the
    /// 95% interval.
    pub fn agrees_with(&self, p: f64, sigmas: f64) -> bool {
        if self.outages == 0 || self.outages == self.trials {
            return p >= self.ci95_low && p <= self.ci95_high;
        }
        (self.p_hat - p).abs() <= sigmas * self.std_err
    }
}

fn clopper_pearson(x: u64, n: u64) -> (f64, f64) {
    use statrs::function::beta::inv_beta_reg;
    let (xf, nf) = (x as f64, n as f64);
    let low = if x == 0 {
        0.0
    } else {
        inv_beta_reg(xf, nf - xf + 1.0, 0.025)
    };
    let high = if x == n {
        1.0
    } else {
        inv_beta_reg(xf + 1.0, nf - xf, 0.975)
    };
    (low, high)
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub mean: f64,
    pub std_err: f64,
}

/// Unicast and multicast estimates from one shared trial stream, plus
/// phase-1/phase-2 bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OutagePair {
    pub k: usize,
    pub unicast: OutageEstimate,
    pub multicast: OutageEstimate,
    /// Mean number of phase-1 decoders.
    pub mean_k1: MeanEstimate,
    /// Phase-2 sum power in units of the budget `P`.
    pub phase2_power: MeanEstimate,
}

impl OutagePair {
    pub fn get(&self, mode: CastMode) -> &OutageEstimate {
        match mode {
            CastMode::Unicast => &self.unicast,
            CastMode::Multicast => &self.multicast,
        }
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Tally {
    uc: u64,
    mc: u64,
    k1_sum: u64,
    k1_sq: u128,
}

impl Tally {
    fn merge(self, o: Tally) -> Tally {
        Tally {
            uc: self.uc + o.uc,
            mc: self.mc + o.mc,
            k1_sum: self.k1_sum + o.k1_sum,
            k1_sq: self.k1_sq + o.k1_sq,
        }
    }
}

pub(crate) fn worker_pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return domain("worker count must be at least 1");
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Domain(format!("cannot start worker pool: {e}")))
}

/// Runs `trials` chunked work items on `workers` threads and sums the tallies.
fn tally_parallel<F>(trials: u64, workers: usize, per_trial: F) -> Result<Tally>
where
    F: Fn(u64) -> Result<Tally> + Sync,
{
    let pool = worker_pool(workers)?;
    let chunks = trials.div_ceil(CHUNK);
    pool.install(|| {
        (0..chunks)
            .into_par_iter()
            .map(|c| {
                let end = ((c + 1) * CHUNK).min(trials);
                (c * CHUNK..end).try_fold(Tally::default(), |acc, i| Ok(acc.merge(per_trial(i)?)))
            })
            .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))
    })
}

fn mean_estimate(sum: u64, sq: u128, n: u64, scale: f64) -> MeanEstimate {
    let nf = n as f64;
    let mean = sum as f64 / nf;
    let var = if n > 1 {
        ((sq as f64 - nf * mean * mean) / (nf - 1.0)).max(0.0)
    } else {
        0.0
    };
    MeanEstimate {
        mean: mean * scale,
        std_err: (var / nf).sqrt() * scale,
    }
}

/// Estimates unicast and multicast outage at network size `k` from the same
/// `trials` realizations.
pub fn estimate_outage(
    params: &ProtocolParams,
    k: usize,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<OutagePair> {
    if trials == 0 {
        return domain("trial count must be at least 1");
    }
    if k == 0 {
        return domain("network size K must be at least 1");
    }
    let t = tally_parallel(trials, workers, |i| {
        let mut rng = trial_rng(seed, i);
        let out = run_trial(params, k, &mut rng)?;
        let k1 = out.k1 as u64;
        Ok(Tally {
            uc: out.unicast_outage as u64,
            mc: out.multicast_outage as u64,
            k1_sum: k1,
            k1_sq: (k1 as u128) * (k1 as u128),
        })
    })?;
    Ok(OutagePair {
        k,
        unicast: OutageEstimate::from_counts(t.uc, trials, seed, CastMode::Unicast)?,
        multicast: OutageEstimate::from_counts(t.mc, trials, seed, CastMode::Multicast)?,
        mean_k1: mean_estimate(t.k1_sum, t.k1_sq, trials, 1.0),
        phase2_power: mean_estimate(t.k1_sum, t.k1_sq, trials, 1.0 / (params.alpha() * k as f64)),
    })
}

/// One [`estimate_outage`] per network size, each under
/// `derive_seed(seed, K)`.
pub fn sweep_outage_vs_k(
    params: &ProtocolParams,
    k_list: &[usize],
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<Vec<OutagePair>> {
    if k_list.is_empty() {
        return domain("K list must be nonempty");
    }
    k_list
        .iter()
        .map(|&k| estimate_outage(params, k, trials, derive_seed(seed, k as u64), workers))
        .collect()
}

/// Outage of the cooperation-free direct link to the destination at rate
/// `rate` (bits per channel use).
pub fn estimate_direct_outage(
    rate: f64,
    snr: f64,
    k: usize,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<OutageEstimate> {
    if trials == 0 {
        return domain("trial count must be at least 1");
    }
    let t = tally_parallel(trials, workers, |i| {
        let mut rng = trial_rng(seed, i);
        let out = direct_link_trial(rate, snr, k, &mut rng)?;
        Ok(Tally {
            uc: out as u64,
            ..Tally::default()
        })
    })?;
    OutageEstimate::from_counts(t.uc, trials, seed, CastMode::Unicast)
}

/// CSV row for one estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateRow {
    #[serde(rename = "K")]
    pub k: usize,
    pub mode: CastMode,
    pub p_hat: f64,
    pub std_err: f64,
    pub ci95_low: f64,
    pub ci95_high: f64,
    pub trials: u64,
    pub seed: u64,
}

pub const ESTIMATE_SCHEMA: &str = "coop-outage estimates v1";

pub fn estimate_rows(pairs: &[OutagePair]) -> Vec<EstimateRow> {
    pairs
        .iter()
        .flat_map(|p| {
            [p.unicast, p.multicast].map(|e| EstimateRow {
                k: p.k,
                mode: e.mode,
                p_hat: e.p_hat,
                std_err: e.std_err,
                ci95_low: e.ci95_low,
                ci95_high: e.ci95_high,
                trials: e.trials,
                seed: e.seed,
            })
        })
        .collect()
}
