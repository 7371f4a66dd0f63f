//! Seeded Monte Carlo runs of the sampling protocol.
//!
//! Trial `i` of a run with master seed `m` draws all of its randomness from
//! a ChaCha20 stream keyed by [`stream_seed`]`(m, i)`, so any trial can be
//! reproduced on its own and the report does not depend on the thread
//! count.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use num_rational::BigRational;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::adversaries::parse_prover_spec;
use crate::dist::{hex_of, ExplicitDistribution};
use crate::par;
use crate::protocol::{
    derive_params, pick_realization, run_with_coins, Outcome, OutputProb, Prover, ProverFactory,
    ProtocolParams, RandomCoins, RejectReason, Transcript,
};
use crate::rational::{self, to_f64};
use crate::{Error, Result};

const CHUNK: u64 = 1024;

/// Smallest `N` with `2 exp(-2 eps^2 N / range^2) <= alpha`, at least 1.
/// For `alpha >= 1` the bound holds for every `N`.
pub fn required_samples(eps_stat: f64, alpha: f64, range_width: f64) -> Result<u64> {
    if !(eps_stat > 0.0 && eps_stat < 1.0) || !(alpha > 0.0 && alpha <= 1.0) || !(range_width > 0.0) {
        return Err(Error::InvalidParams(
            "need eps_stat in (0,1), alpha in (0,1] and a positive range".into(),
        ));
    }
    if alpha >= 1.0 {
        return Ok(1);
    }
    let n = (range_width * range_width * (2.0 / alpha).ln() / (2.0 * eps_stat * eps_stat)).ceil();
    Ok((n as u64).max(1))
}

/// Deviation `range * sqrt(ln(2/alpha) / (2N))` exceeded with probability
/// at most `alpha`.
pub fn hoeffding_half_width(trials: u64, alpha: f64, range_width: f64) -> f64 {
    range_width * ((2.0 / alpha).ln() / (2.0 * trials as f64)).sqrt()
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// 128-bit stream seed of a trial: two rounds of SplitMix64 over
/// `master` and `trial`, high word first.
pub fn stream_seed(master: u64, trial: u64) -> u128 {
    let hi = splitmix64(master ^ splitmix64(trial));
    let lo = splitmix64(hi ^ trial.rotate_left(32) ^ 0x5851_f42d_4c95_7f2d);
    (hi as u128) << 64 | lo as u128
}

pub fn trial_rng(master: u64, trial: u64) -> ChaCha20Rng {
    let seed = stream_seed(master, trial).to_le_bytes();
    let mut key = [0u8; 32];
    key[..16].copy_from_slice(&seed);
    key[16..].copy_from_slice(&seed);
    key[16..].reverse();
    ChaCha20Rng::from_seed(key)
}

/// A prover factory expanded once for a parameter set.
pub struct Simulation {
    pub params: ProtocolParams,
    pub description: String,
    weights: Vec<BigRational>,
    provers: Vec<Box<dyn Prover>>,
}

impl Simulation {
    pub fn new(params: ProtocolParams, factory: &dyn ProverFactory) -> Self {
        let (weights, provers) = factory.realizations(&params).into_iter().unzip();
        Self {
            description: factory.describe(),
            params,
            weights,
            provers,
        }
    }

    /// One execution. The prover's up-front draw comes first from the trial
    /// stream and is kept in the transcript.
    pub fn trial(&self, master: u64, trial: u64) -> Transcript {
        let mut rng = trial_rng(master, trial);
        let prover_seed = rng.next_u64();
        let prover = &self.provers[pick_realization(&self.weights, prover_seed)];
        run_with_coins(
            &self.params,
            prover.as_ref(),
            &mut RandomCoins::new(&mut rng),
            trial,
            Some(prover_seed),
        )
    }

    /// Re-runs a recorded transcript from its coins alone.
    pub fn replay(&self, transcript: &Transcript) -> Transcript {
        let seed = transcript.coins.prover_seed.unwrap_or(0);
        let prover = &self.provers[pick_realization(&self.weights, seed)];
        crate::protocol::replay(&self.params, prover.as_ref(), transcript)
    }

    pub fn run(&self, trials: u64, master: u64, threads: Option<usize>) -> Vec<Transcript> {
        par::with_threads(threads, || par::map_range(trials, |i| self.trial(master, i)))
    }

    fn tally(&self, trials: u64, master: u64, threads: Option<usize>) -> Tally {
        let chunks = trials.div_ceil(CHUNK);
        let parts = par::with_threads(threads, || {
            par::map_range(chunks, |c| {
                let mut tally = Tally::default();
                for i in c * CHUNK..((c + 1) * CHUNK).min(trials) {
                    tally.add(&self.trial(master, i).outcome);
                }
                tally
            })
        });
        let mut total = Tally::default();
        for part in parts {
            total.merge(part);
        }
        total
    }
}

#[derive(Default)]
struct Tally {
    outputs: BTreeMap<(u64, OutputProb), u64>,
    rejects: BTreeMap<RejectReason, u64>,
}

impl Tally {
    fn add(&mut self, outcome: &Outcome) {
        match outcome {
            Outcome::Output { x, p } => *self.outputs.entry((*x, p.clone())).or_default() += 1,
            Outcome::Reject { reason } => *self.rejects.entry(*reason).or_default() += 1,
        }
    }

    fn merge(&mut self, other: Tally) {
        for (k, v) in other.outputs {
            *self.outputs.entry(k).or_default() += v;
        }
        for (k, v) in other.rejects {
            *self.rejects.entry(k).or_default() += v;
        }
    }
}

/// Reproducibility record of one trial.
#[derive(Clone, Debug, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub stream_seed: String,
    pub digest: String,
    pub outcome: Outcome,
}

impl TrialRecord {
    pub fn new(master: u64, transcript: &Transcript) -> Self {
        let hash = Sha256::digest(transcript.to_jsonl().as_bytes());
        Self {
            trial: transcript.trial,
            stream_seed: format!("{:032x}", stream_seed(master, transcript.trial)),
            digest: hex::encode(&hash[..8]),
            outcome: transcript.outcome.clone(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct BinEstimate {
    pub x: String,
    pub p: String,
    pub p_value: f64,
    pub count: u64,
    pub frequency: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SumEstimate {
    pub x: String,
    /// `(1/N) sum [X = x, p >= p_min] / p`.
    pub estimate: f64,
    /// Frequency of outputs `(x, p)` with `p < p_min`.
    pub tail: f64,
    pub half_width: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct EstimateReport {
    pub prover: String,
    pub params_digest: String,
    pub seed: u64,
    pub trials: u64,
    pub alpha: f64,
    /// Hoeffding half-width for any single frequency.
    pub half_width: f64,
    pub bins: Vec<BinEstimate>,
    pub marginal: BTreeMap<String, f64>,
    pub reject: f64,
    pub reject_by_reason: BTreeMap<String, u64>,
    pub p_min: f64,
    pub soundness: Vec<SumEstimate>,
}

impl EstimateReport {
    pub fn to_json(&self) -> Value {
        serde_json::to_value(self).expect("report serializes")
    }

    /// One row per `(x, p)` bin, then one row for the reject outcome.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,p,p_value,count,frequency\n");
        for b in &self.bins {
            out.push_str(&format!("{},{},{},{},{}\n", b.x, b.p, b.p_value, b.count, b.frequency));
        }
        let rejected: u64 = self.reject_by_reason.values().sum();
        out.push_str(&format!("reject,,,{},{}\n", rejected, self.reject));
        out
    }
}

/// `min_x P(x) / 2^{G eps}`.
pub fn default_p_min(params: &ProtocolParams, dist: &ExplicitDistribution) -> f64 {
    to_f64(&dist.min_prob()) / (params.gap_size as f64 * params.eps).exp2()
}

pub fn estimate_output_distribution(
    sim: &Simulation,
    trials: u64,
    master: u64,
    alpha: f64,
    p_min: f64,
    threads: Option<usize>,
) -> Result<EstimateReport> {
    if trials == 0 {
        return Err(Error::InvalidParams("need at least one trial".into()));
    }
    if !(p_min > 0.0) {
        return Err(Error::InvalidParams("p_min must be positive".into()));
    }
    let tally = sim.tally(trials, master, threads);
    let n = sim.params.n;
    let nf = trials as f64;
    let mut marginal = BTreeMap::new();
    let mut sums: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    let mut bins = vec![];
    for ((x, p), &count) in &tally.outputs {
        let freq = count as f64 / nf;
        *marginal.entry(hex_of(*x, n)).or_insert(0.0) += freq;
        let entry = sums.entry(*x).or_default();
        if p.value() >= p_min {
            entry.0 += freq / p.value();
        } else {
            entry.1 += freq;
        }
        bins.push(BinEstimate {
            x: hex_of(*x, n),
            p: p.bin_key(),
            p_value: p.value(),
            count,
            frequency: freq,
        });
    }
    let rejected: u64 = tally.rejects.values().sum();
    let sum_width = hoeffding_half_width(trials, alpha, 1.0 / p_min);
    Ok(EstimateReport {
        prover: sim.description.clone(),
        params_digest: sim.params.digest(),
        seed: master,
        trials,
        alpha,
        half_width: hoeffding_half_width(trials, alpha, 1.0),
        bins,
        marginal,
        reject: rejected as f64 / nf,
        reject_by_reason: tally
            .rejects
            .iter()
            .map(|(r, c)| (r.code().to_string(), *c))
            .collect(),
        p_min,
        soundness: sums
            .into_iter()
            .map(|(x, (estimate, tail))| SumEstimate {
                x: hex_of(x, n),
                estimate,
                tail,
                half_width: sum_width,
            })
            .collect(),
    })
}

/// `S(x)` for a single `x`, truncated at `p_min`; zero if `x` never occurs.
pub fn estimate_soundness_sum(
    sim: &Simulation,
    x: u64,
    trials: u64,
    master: u64,
    alpha: f64,
    p_min: f64,
    threads: Option<usize>,
) -> Result<SumEstimate> {
    let report = estimate_output_distribution(sim, trials, master, alpha, p_min, threads)?;
    let key = hex_of(x, sim.params.n);
    Ok(report
        .soundness
        .into_iter()
        .find(|s| s.x == key)
        .unwrap_or(SumEstimate {
            x: key,
            estimate: 0.0,
            tail: 0.0,
            half_width: report.half_width / p_min,
        }))
}

/// Parameter section of a run configuration.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ParamsConfig {
    /// Every constant given directly.
    Raw {
        eps: f64,
        delta: f64,
        t: usize,
        gap: usize,
        interval: usize,
        samp_gap: f64,
    },
    /// Closed-form `t`, `G`, `I`, gap from `eps` and `delta` as given.
    Formulas { eps: f64, delta: f64 },
    /// Full derivation from the target accuracy, with fallback.
    Paper { eps: f64, delta: f64 },
    Trivial,
}

impl ParamsConfig {
    pub fn build(&self, n: u32) -> Result<ProtocolParams> {
        match *self {
            Self::Raw {
                eps,
                delta,
                t,
                gap,
                interval,
                samp_gap,
            } => ProtocolParams::raw(n, eps, delta, t, gap, interval, samp_gap),
            Self::Formulas { eps, delta } => ProtocolParams::raw_from_formulas(n, eps, delta),
            Self::Paper { eps, delta } => derive_params(n, eps, delta),
            Self::Trivial => ProtocolParams::trivial(n),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum DistSource {
    Path(PathBuf),
    Inline(Value),
}

/// A run configuration file. Relative paths resolve against the file's
/// directory.
#[derive(Clone, Debug, Deserialize)]
pub struct RunConfig {
    pub distribution: DistSource,
    pub params: ParamsConfig,
    #[serde(default = "default_prover")]
    pub prover: String,
    #[serde(default)]
    pub trials: Option<u64>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub p_min: Option<f64>,
    #[serde(skip)]
    pub base: PathBuf,
}

fn default_prover() -> String {
    "honest".into()
}

impl RunConfig {
    pub fn from_json(value: &Value, base: &Path) -> Result<Self> {
        let mut cfg: Self =
            serde_json::from_value(value.clone()).map_err(|e| Error::Config(e.to_string()))?;
        cfg.base = base.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json(&serde_json::from_str(&text)?, base)
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base.join(path)
        }
    }

    pub fn distribution(&self) -> Result<ExplicitDistribution> {
        match &self.distribution {
            DistSource::Path(p) => ExplicitDistribution::load(&self.resolve(p)),
            DistSource::Inline(v) => ExplicitDistribution::from_json(v),
        }
    }

    pub fn protocol_params(&self, n: u32) -> Result<ProtocolParams> {
        self.params.build(n)
    }

    /// The prover spec with any file argument resolved.
    pub fn prover_spec(&self) -> String {
        match self.prover.split_once(':') {
            Some((kind @ ("mixture" | "scripted"), file)) => {
                format!("{kind}:{}", self.resolve(Path::new(file)).display())
            }
            _ => self.prover.clone(),
        }
    }

    pub fn factory(&self, dist: &ExplicitDistribution) -> Result<Box<dyn ProverFactory>> {
        parse_prover_spec(&self.prover_spec(), dist)
    }
}

/// An exact marginal keyed like [`EstimateReport::marginal`].
pub fn hex_marginal(n: u32, marginal: &BTreeMap<u64, BigRational>) -> BTreeMap<String, String> {
    marginal
        .iter()
        .map(|(x, q)| (hex_of(*x, n), rational::format(q)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::HonestFactory;
    use crate::rational::ratio;

    #[test]
    fn sample_size_examples() {
        // ln(40) / (2 * 10^-4) = 18444.397...
        assert_eq!(required_samples(0.01, 0.05, 1.0).unwrap(), 18445);
        let one = required_samples(0.05, 0.01, 1.0).unwrap();
        let two = required_samples(0.05, 0.01, 2.0).unwrap();
        assert!((two as f64 / one as f64 - 4.0).abs() < 1e-3);
        assert_eq!(required_samples(0.3, 1.0, 1.0).unwrap(), 1);
        assert!(required_samples(0.0, 0.5, 1.0).is_err());
    }

    #[test]
    fn half_width_inverts_sample_size() {
        let n = required_samples(0.02, 0.01, 1.0).unwrap();
        let w = hoeffding_half_width(n, 0.01, 1.0);
        assert!(w <= 0.02 && w > 0.0199);
    }

    #[test]
    fn stream_seeds_differ() {
        let a = stream_seed(7, 0);
        assert_ne!(a, stream_seed(7, 1));
        assert_ne!(a, stream_seed(8, 0));
        assert_eq!(a, stream_seed(7, 0));
    }

    #[test]
    fn thread_count_does_not_change_report() {
        let dist = ExplicitDistribution::from_pairs(2, [(0, ratio(1, 2)), (3, ratio(1, 2))]).unwrap();
        let params = ProtocolParams::raw(2, 1.0, 0.5, 6, 1, 2, -1.0).unwrap();
        let sim = Simulation::new(params, &HonestFactory::new(dist));
        let a = estimate_output_distribution(&sim, 3000, 11, 0.01, 0.01, Some(1)).unwrap();
        let b = estimate_output_distribution(&sim, 3000, 11, 0.01, 0.01, Some(4)).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        let total: f64 = a.bins.iter().map(|b| b.frequency).sum::<f64>() + a.reject;
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn replay_reproduces_trials() {
        let params = ProtocolParams::raw(3, 0.5, 0.5, 10, 2, 4, 0.0).unwrap();
        let sim = Simulation::new(params, &crate::adversaries::MixtureFactory::two_point(3));
        for t in sim.run(50, 5, None) {
            assert_eq!(sim.replay(&t), t);
        }
    }

    #[test]
    fn config_parses() {
        let v = serde_json::json!({
            "distribution": {"n": 2, "mass": {"0": "1/2", "3": "1/2"}},
            "params": {"mode": "raw", "eps": 1.0, "delta": 0.5, "t": 6, "gap": 1, "interval": 2, "samp_gap": 0.0},
            "prover": "mixture:m.json",
            "trials": 10
        });
        let cfg = RunConfig::from_json(&v, Path::new("/tmp/cfg")).unwrap();
        assert_eq!(cfg.prover_spec(), "mixture:/tmp/cfg/m.json");
        let d = cfg.distribution().unwrap();
        assert_eq!(cfg.protocol_params(d.n()).unwrap().t, 6);
        let bad = serde_json::json!({"params": {"mode": "raw"}});
        assert!(RunConfig::from_json(&bad, Path::new(".")).is_err());
    }
}
