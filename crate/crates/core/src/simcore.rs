//! Channel sampling and single-trial outage evaluation.
//!
//! Every gain `|h|^2` is a unit-mean exponential (Rayleigh fading). A trial
//! runs phase 1 against the source gains, then checks each non-decoder's
//! effective phase-2 gain `G_k = (1 / (alpha K)) * sum_{j in S} |h_jk|^2`
//! against `1 - beta`. Node indices are zero-based; the unicast destination is
//! the last node, index `K - 1`.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, Gamma};
use serde::Serialize;

use crate::error::{domain, Result};
use crate::protocol::ProtocolParams;

/// Where a trial gets its channel gains from.
pub trait ChannelSource {
    fn nodes(&self) -> usize;

    /// `|h_0i|^2`, the gain from the source to node `i`.
    fn phase1_gain(&mut self, node: usize) -> Result<f64>;

    /// `sum_{j in relays} |h_{j, listener}|^2`.
    fn phase2_sum(&mut self, relays: &[usize], listener: usize) -> Result<f64>;
}

/// Draws gains straight from an RNG.
///
/// The phase-2 sum over `k1` relays is drawn as one `Gamma(k1, 1)` variate,
/// which has exactly the law of a sum of `k1` independent `Exp(1)` gains.
pub struct FadingSampler<'a, R: Rng + ?Sized> {
    rng: &'a mut R,
    nodes: usize,
}

impl<'a, R: Rng + ?Sized> FadingSampler<'a, R> {
    pub fn new(rng: &'a mut R, nodes: usize) -> Self {
        Self { rng, nodes }
    }
}

impl<R: Rng + ?Sized> ChannelSource for FadingSampler<'_, R> {
    fn nodes(&self) -> usize {
        self.nodes
    }

    fn phase1_gain(&mut self, _node: usize) -> Result<f64> {
        Ok(Exp1.sample(self.rng))
    }

    fn phase2_sum(&mut self, relays: &[usize], _listener: usize) -> Result<f64> {
        match relays.len() {
            0 => Ok(0.0),
            1 => Ok(Exp1.sample(self.rng)),
            n => {
                let gamma = Gamma::new(n as f64, 1.0)
                    .map_err(|e| crate::error::Error::Domain(e.to_string()))?;
                Ok(gamma.sample(self.rng))
            }
        }
    }
}

/// One channel realization with explicit per-pair gains.
///
/// Phase-2 gains are only materialized for the (relay, listener) pairs that a
/// trial inspects. An instance built by [`sample_instance`] draws missing pairs
/// on demand; one built by [`NetworkInstance::from_gains`] treats a missing
/// pair as an error.
#[derive(Debug, Clone)]
pub struct NetworkInstance {
    phase1_gains: Vec<f64>,
    phase2_gains: BTreeMap<(usize, usize), f64>,
    fill: Option<ChaCha8Rng>,
}

impl NetworkInstance {
    /// Gain-injection hook: fixed phase-1 gains and phase-2 gains keyed by
    /// `(relay, listener)`.
    pub fn from_gains(
        phase1_gains: Vec<f64>,
        phase2_gains: impl IntoIterator<Item = ((usize, usize), f64)>,
    ) -> Result<Self> {
        if phase1_gains.is_empty() {
            return domain("network needs at least one node");
        }
        let k = phase1_gains.len();
        if let Some(g) = phase1_gains.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
            return domain(format!("gains must be finite and >= 0, got {g}"));
        }
        let phase2_gains: BTreeMap<_, _> = phase2_gains.into_iter().collect();
        for (&(j, l), &g) in &phase2_gains {
            if j >= k || l >= k || j == l {
                return domain(format!("invalid phase-2 pair ({j}, {l}) for K = {k}"));
            }
            if !(g.is_finite() && g >= 0.0) {
                return domain(format!("gains must be finite and >= 0, got {g}"));
            }
        }
        Ok(Self {
            phase1_gains,
            phase2_gains,
            fill: None,
        })
    }

    pub fn k(&self) -> usize {
        self.phase1_gains.len()
    }

    pub fn phase1_gains(&self) -> &[f64] {
        &self.phase1_gains
    }

    /// Phase-2 pairs materialized so far.
    pub fn sampled_pairs(&self) -> usize {
        self.phase2_gains.len()
    }

    pub fn phase2_gain(&mut self, relay: usize, listener: usize) -> Result<f64> {
        if let Some(&g) = self.phase2_gains.get(&(relay, listener)) {
            return Ok(g);
        }
        match self.fill.as_mut() {
            Some(rng) => {
                let g: f64 = Exp1.sample(rng);
                self.phase2_gains.insert((relay, listener), g);
                Ok(g)
            }
            None => domain(format!("no phase-2 gain injected for pair ({relay}, {listener})")),
        }
    }
}

impl ChannelSource for NetworkInstance {
    fn nodes(&self) -> usize {
        self.k()
    }

    fn phase1_gain(&mut self, node: usize) -> Result<f64> {
        self.phase1_gains
            .get(node)
            .copied()
            .ok_or_else(|| crate::error::Error::Domain(format!("node {node} out of range")))
    }

    fn phase2_sum(&mut self, relays: &[usize], listener: usize) -> Result<f64> {
        let mut sum = 0.0;
        for &j in relays {
            sum += self.phase2_gain(j, listener)?;
        }
        Ok(sum)
    }
}

/// Draws `K` i.i.d. `Exp(1)` phase-1 gains; phase-2 gains come later, lazily,
/// from a generator forked off `rng`.
pub fn sample_instance<R: Rng>(k: usize, rng: &mut R) -> Result<NetworkInstance> {
    if k == 0 {
        return domain("network size K must be at least 1");
    }
    let phase1_gains = (0..k).map(|_| Exp1.sample(rng)).collect();
    let fill = ChaCha8Rng::from_rng(rng);
    Ok(NetworkInstance {
        phase1_gains,
        phase2_gains: BTreeMap::new(),
        fill: Some(fill),
    })
}

/// Result of one protocol trial.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    /// Number of phase-1 decoders.
    pub k1: usize,
    /// The destination (last node) failed to decode.
    pub unicast_outage: bool,
    /// At least one node failed to decode.
    pub multicast_outage: bool,
    /// Phase-2 sum power `k1 * P / (alpha K)` in units of the budget `P`.
    pub phase2_power_used: f64,
}

impl TrialOutcome {
    pub fn outage(&self, mode: crate::protocol::CastMode) -> bool {
        match mode {
            crate::protocol::CastMode::Unicast => self.unicast_outage,
            crate::protocol::CastMode::Multicast => self.multicast_outage,
        }
    }
}

struct PhaseOne {
    relays: Vec<usize>,
    listeners: Vec<usize>,
    dest_decoded: bool,
}

fn phase_one<S: ChannelSource + ?Sized>(params: &ProtocolParams, source: &mut S) -> Result<PhaseOne> {
    let k = source.nodes();
    let threshold = params.threshold();
    let mut relays = Vec::new();
    let mut listeners = Vec::new();
    for i in 0..k {
        if source.phase1_gain(i)? > threshold {
            relays.push(i);
        } else {
            listeners.push(i);
        }
    }
    let dest_decoded = relays.last() == Some(&(k - 1));
    Ok(PhaseOne {
        relays,
        listeners,
        dest_decoded,
    })
}

fn listener_fails<S: ChannelSource + ?Sized>(
    params: &ProtocolParams,
    source: &mut S,
    relays: &[usize],
    listener: usize,
) -> Result<bool> {
    if relays.is_empty() {
        return Ok(true);
    }
    let norm = params.alpha() * source.nodes() as f64;
    let effective = source.phase2_sum(relays, listener)? / norm;
    Ok(effective <= 1.0 - params.beta())
}

/// Runs phase 1 and phase 2 of one trial against an arbitrary gain source.
///
/// The multicast scan reuses the destination's verdict and stops at the first
/// failing listener.
pub fn run_trial_on<S: ChannelSource + ?Sized>(
    params: &ProtocolParams,
    source: &mut S,
) -> Result<TrialOutcome> {
    let k = source.nodes();
    if k == 0 {
        return domain("network size K must be at least 1");
    }
    let p1 = phase_one(params, source)?;
    let dest = k - 1;
    let unicast_outage = !p1.dest_decoded && listener_fails(params, source, &p1.relays, dest)?;
    let mut multicast_outage = unicast_outage;
    if !multicast_outage {
        for &l in p1.listeners.iter().filter(|&&l| l != dest) {
            if listener_fails(params, source, &p1.relays, l)? {
                multicast_outage = true;
                break;
            }
        }
    }
    let k1 = p1.relays.len();
    Ok(TrialOutcome {
        k1,
        unicast_outage,
        multicast_outage,
        phase2_power_used: k1 as f64 / (params.alpha() * k as f64),
    })
}

/// One trial with gains drawn from `rng`.
pub fn run_trial<R: Rng + ?Sized>(params: &ProtocolParams, k: usize, rng: &mut R) -> Result<TrialOutcome> {
    run_trial_on(params, &mut FadingSampler::new(rng, k))
}

/// Failure indicator of every node on one instance, without short-circuiting.
/// Phase-1 decoders never fail.
pub fn node_failures(params: &ProtocolParams, instance: &mut NetworkInstance) -> Result<Vec<bool>> {
    let p1 = phase_one(params, instance)?;
    let mut failed = vec![false; instance.k()];
    for &l in &p1.listeners {
        failed[l] = listener_fails(params, instance, &p1.relays, l)?;
    }
    Ok(failed)
}

/// Cooperation-free baseline: the destination listens to the source alone and
/// is in outage iff `log2(1 + |h_0K|^2 snr) < rate`. All `K` source gains are
/// drawn so the draw pattern matches a cooperative trial of the same size.
pub fn direct_link_trial<R: Rng + ?Sized>(rate: f64, snr: f64, k: usize, rng: &mut R) -> Result<bool> {
    if k == 0 {
        return domain("network size K must be at least 1");
    }
    let mut dest_gain = 0.0;
    for _ in 0..k {
        dest_gain = Exp1.sample(rng);
    }
    Ok((dest_gain * snr).ln_1p() / std::f64::consts::LN_2 < rate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::CastMode;

    fn fig2() -> ProtocolParams {
        ProtocolParams::new(0.606531, 0.5, 1.0).unwrap()
    }

    #[test]
    fn injected_two_node_trace() {
        let mut inst = NetworkInstance::from_gains(vec![2.0, 0.1], [((0, 1), 1.0)]).unwrap();
        let out = run_trial_on(&fig2(), &mut inst).unwrap();
        assert_eq!(out.k1, 1);
        // G_2 = 1.0 / (0.606531 * 2) = 0.824366 > 0.5
        assert!(!out.unicast_outage);
        assert!(!out.multicast_outage);
    }

    #[test]
    fn injected_two_node_below_threshold() {
        // G_2 = 0.5 / 1.213062 = 0.412 <= 0.5
        let mut inst = NetworkInstance::from_gains(vec![2.0, 0.1], [((0, 1), 0.5)]).unwrap();
        let out = run_trial_on(&fig2(), &mut inst).unwrap();
        assert!(out.unicast_outage && out.multicast_outage);
    }

    #[test]
    fn all_decode_in_phase_one() {
        let mut inst = NetworkInstance::from_gains(vec![3.0; 6], []).unwrap();
        let out = run_trial_on(&fig2(), &mut inst).unwrap();
        assert_eq!(out.k1, 6);
        assert!(!out.unicast_outage && !out.multicast_outage);
        assert_eq!(inst.sampled_pairs(), 0);
    }

    #[test]
    fn nobody_decodes_in_phase_one() {
        let mut inst = NetworkInstance::from_gains(vec![0.1; 6], []).unwrap();
        let out = run_trial_on(&fig2(), &mut inst).unwrap();
        assert_eq!(out.k1, 0);
        assert!(out.unicast_outage && out.multicast_outage);
    }

    #[test]
    fn destination_decoded_but_other_node_fails() {
        // node 0 relays, node 1 listens with a weak link, node 2 (dest) decoded
        let mut inst = NetworkInstance::from_gains(vec![2.0, 0.1, 2.0], [((0, 1), 0.01), ((2, 1), 0.01)]).unwrap();
        let out = run_trial_on(&fig2(), &mut inst).unwrap();
        assert!(!out.unicast_outage);
        assert!(out.multicast_outage);
    }

    #[test]
    fn missing_injected_pair_is_an_error() {
        let mut inst = NetworkInstance::from_gains(vec![2.0, 0.1], []).unwrap();
        assert!(run_trial_on(&fig2(), &mut inst).is_err());
        assert!(NetworkInstance::from_gains(vec![], []).is_err());
        assert!(NetworkInstance::from_gains(vec![-1.0], []).is_err());
        assert!(NetworkInstance::from_gains(vec![1.0, 1.0], [((0, 0), 1.0)]).is_err());
    }

    #[test]
    fn single_node_network() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut inst = sample_instance(1, &mut rng).unwrap();
        assert_eq!(inst.k(), 1);
        let out = run_trial_on(&fig2(), &mut inst).unwrap();
        assert_eq!(out.unicast_outage, out.k1 == 0);
        assert_eq!(inst.sampled_pairs(), 0);
        assert!(sample_instance(0, &mut rng).is_err());
    }

    #[test]
    fn lazy_instance_only_samples_inspected_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let params = fig2();
        let mut inst = sample_instance(30, &mut rng).unwrap();
        let out = run_trial_on(&params, &mut inst).unwrap();
        let listeners = 30 - out.k1;
        assert!(inst.sampled_pairs() <= out.k1 * listeners);
    }

    #[test]
    fn multicast_is_or_of_node_failures() {
        let params = ProtocolParams::new(0.3, 0.4, 1.0).unwrap();
        for seed in 0..300 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let k = 2 + (seed as usize % 7);
            let mut inst = sample_instance(k, &mut rng).unwrap();
            let out = run_trial_on(&params, &mut inst).unwrap();
            let failed = node_failures(&params, &mut inst).unwrap();
            assert_eq!(out.multicast_outage, failed.iter().any(|&f| f), "seed {seed}");
            assert_eq!(out.unicast_outage, failed[k - 1], "seed {seed}");
            assert!(!out.unicast_outage || out.outage(CastMode::Multicast));
        }
    }

    #[test]
    fn outage_monotone_in_beta() {
        let betas: Vec<f64> = (1..20).map(|i| i as f64 / 20.0).collect();
        for seed in 0..100 {
            let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
            let mut inst = sample_instance(12, &mut rng).unwrap();
            let mut prev = (true, true);
            for &b in &betas {
                let p = ProtocolParams::new(0.4, b, 1.0).unwrap();
                let out = run_trial_on(&p, &mut inst).unwrap();
                // once out of outage, a larger back-off keeps it that way
                assert!(prev.0 || !out.unicast_outage);
                assert!(prev.1 || !out.multicast_outage);
                prev = (out.unicast_outage, out.multicast_outage);
            }
        }
    }

    #[test]
    fn trials_are_deterministic() {
        let params = fig2();
        let run = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..200).map(|_| run_trial(&params, 25, &mut rng).unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(run(9), run(9));
        assert_ne!(run(9), run(10));
    }

    #[test]
    fn sampled_gain_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 1_000_000;
        let mut inst = sample_instance(n, &mut rng).unwrap();
        let gains = inst.phase1_gains().to_vec();
        let mean = gains.iter().sum::<f64>() / n as f64;
        // Exp(1) has unit variance, so std err = 1/sqrt(n) = 0.001
        assert!((mean - 1.0).abs() < 0.003, "mean {mean}");
        let above = gains.iter().filter(|&&g| g > 0.5f64.recip().ln()).count() as f64 / n as f64;
        assert!((above - 0.5).abs() < 0.0015, "tail {above}");
        let pair = inst.phase2_gain(0, 1).unwrap();
        assert_eq!(pair, inst.phase2_gain(0, 1).unwrap());
    }

    #[test]
    fn gamma_aggregate_matches_exponential_sum_mean() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let mut s = FadingSampler::new(&mut rng, 10);
        let relays: Vec<usize> = (0..7).collect();
        let n = 200_000;
        let mut sum = 0.0;
        for _ in 0..n {
            sum += s.phase2_sum(&relays, 9).unwrap();
        }
        // Gamma(7, 1): mean 7, sd sqrt(7)
        let se = (7.0f64).sqrt() / (n as f64).sqrt();
        assert!((sum / n as f64 - 7.0).abs() < 3.0 * se);
    }
}
