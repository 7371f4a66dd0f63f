use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use super::coins::weighted_index;
use super::params::ProtocolParams;
use crate::dist::{build_histogram, bucket_of, ExplicitDistribution};
use crate::hash3::HashFunction;

/// Everything the prover learns from the verifier's challenge.
#[derive(Clone, Debug)]
pub struct ChallengeContext {
    pub s: i64,
    pub k: usize,
    /// `I_k(s)`.
    pub interval: Vec<usize>,
    /// `I'_k = I_k ∩ N`; the sets message must be keyed by exactly these.
    pub keys: Vec<usize>,
    /// `log2(sum_{i in I_k} 2^{i eps} h_i)`.
    pub log_mass: f64,
    pub g: f64,
    pub m: u32,
    pub f: HashFunction,
}

/// A deterministic prover. All randomness a strategy wants has already been
/// drawn when the value is built, so each callback is a pure function of
/// the messages it receives.
pub trait Prover: Send + Sync {
    fn histogram(&self) -> Vec<BigRational>;
    fn sets(&self, ctx: &ChallengeContext) -> BTreeMap<usize, Vec<u64>>;
    fn probability(&self, j: usize, x: u64) -> BigRational;
    /// The message of the exponential-size fallback protocol.
    fn full_list(&self) -> Vec<(u64, BigRational)>;
}

/// A randomized prover, described as a finite mixture of deterministic
/// ones. The weights sum to 1.
pub trait ProverFactory: Send + Sync {
    fn describe(&self) -> String;
    fn realizations(&self, params: &ProtocolParams) -> Vec<(BigRational, Box<dyn Prover>)>;
}

/// Which realization a prover seeded with `seed` runs.
pub fn pick_realization(weights: &[BigRational], seed: u64) -> usize {
    if weights.len() == 1 {
        return 0;
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    weighted_index(weights, &mut rng).expect("realization weights sum to 1")
}

/// `B_0, ..., B_t` as sorted element lists.
pub fn bucket_lists(dist: &ExplicitDistribution, eps: f64, t: usize) -> Vec<Vec<u64>> {
    let mut buckets = vec![Vec::new(); t + 1];
    for (x, p) in dist.mass() {
        if let Some(i) = bucket_of(p, eps, t) {
            buckets[i].push(*x);
        }
    }
    buckets
}

pub struct HonestProver {
    dist: ExplicitDistribution,
    hist: Vec<BigRational>,
    buckets: Vec<Vec<u64>>,
}

impl HonestProver {
    pub fn new(dist: ExplicitDistribution, params: &ProtocolParams) -> Self {
        let hist = build_histogram(&dist, params.eps, params.t).h;
        let buckets = bucket_lists(&dist, params.eps, params.t);
        Self {
            dist,
            hist,
            buckets,
        }
    }

    pub fn dist(&self) -> &ExplicitDistribution {
        &self.dist
    }

    /// `X_i = {x in B_i : f(x) = 0^m}`.
    pub fn filtered_bucket(&self, i: usize, f: &HashFunction) -> Vec<u64> {
        self.buckets
            .get(i)
            .map(|b| b.iter().copied().filter(|&x| f.hits_zero(x)).collect())
            .unwrap_or_default()
    }
}

impl Prover for HonestProver {
    fn histogram(&self) -> Vec<BigRational> {
        self.hist.clone()
    }

    fn sets(&self, ctx: &ChallengeContext) -> BTreeMap<usize, Vec<u64>> {
        ctx.keys
            .iter()
            .map(|&i| (i, self.filtered_bucket(i, &ctx.f)))
            .collect()
    }

    fn probability(&self, _j: usize, x: u64) -> BigRational {
        self.dist.prob(x)
    }

    fn full_list(&self) -> Vec<(u64, BigRational)> {
        self.dist.mass().iter().map(|(x, p)| (*x, p.clone())).collect()
    }
}

pub struct HonestFactory {
    pub dist: ExplicitDistribution,
}

impl HonestFactory {
    pub fn new(dist: ExplicitDistribution) -> Self {
        Self { dist }
    }
}

impl ProverFactory for HonestFactory {
    fn describe(&self) -> String {
        "honest".into()
    }

    fn realizations(&self, params: &ProtocolParams) -> Vec<(BigRational, Box<dyn Prover>)> {
        vec![(
            BigRational::one(),
            Box::new(HonestProver::new(self.dist.clone(), params)),
        )]
    }
}
