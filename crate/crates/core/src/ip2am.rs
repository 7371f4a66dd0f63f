//! Compiling a private-coin interactive proof into a public-coin one.
//!
//! The public-coin verifier never sees the private verifier's coins.
//! Instead, each private message `m_i` is sampled together with its
//! conditional probability `p_i` through the sampling protocol, and the
//! coins themselves are sampled last. The run accepts when the private
//! verdict accepts and the `p_i` multiply to exactly `2^{-l}`.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::Serialize;
use serde_json::Value;

use crate::adversaries::MalformedProver;
use crate::dist::ExplicitDistribution;
use crate::harness::{hoeffding_half_width, stream_seed, trial_rng};
use crate::par;
use crate::protocol::{run_protocol, HonestProver, Outcome, OutputProb, Prover, ProtocolParams, Transcript};
use crate::rational::{self, pow2};
use crate::{Error, Result};

/// Largest coin length the conditional distributions are enumerated for.
pub const MAX_COIN_BITS: u32 = 24;

/// A `k`-round private-coin verifier. Round `i` sends `m_i`, computed from
/// the coins `r` and the earlier answers; the prover replies `a_i`.
pub trait PrivateCoinProtocol: Send + Sync {
    fn rounds(&self) -> usize;
    fn coin_bits(&self) -> u32;
    fn message_bits(&self) -> u32;
    fn answer_bits(&self) -> u32;
    fn next_message(&self, i: usize, r: u64, answers: &[u64]) -> u64;
    /// Decision on a transcript already known to be consistent with `r`.
    fn decide(&self, r: u64, messages: &[u64], answers: &[u64]) -> bool;

    /// Rejects unless every `m_i` is what the verifier would have sent
    /// with coins `r`, then defers to [`Self::decide`].
    fn verdict(&self, r: u64, messages: &[u64], answers: &[u64]) -> bool {
        let k = self.rounds();
        if messages.len() != k || answers.len() != k || r >> self.coin_bits() != 0 {
            return false;
        }
        consistent(self, r, messages, answers) && self.decide(r, messages, answers)
    }
}

fn consistent<P: PrivateCoinProtocol + ?Sized>(proto: &P, r: u64, messages: &[u64], answers: &[u64]) -> bool {
    messages
        .iter()
        .enumerate()
        .all(|(i, &m)| proto.next_message(i, r, &answers[..i]) == m)
}

fn check_coin_budget<P: PrivateCoinProtocol + ?Sized>(proto: &P) -> Result<()> {
    if proto.coin_bits() > MAX_COIN_BITS {
        return Err(Error::InvalidInstance(format!(
            "coin length {} exceeds {MAX_COIN_BITS}",
            proto.coin_bits()
        )));
    }
    Ok(())
}

fn counts_to_dist(n: u32, counts: BTreeMap<u64, u64>) -> Result<ExplicitDistribution> {
    let total: u64 = counts.values().sum();
    if total == 0 {
        return Err(Error::ZeroProbabilityPrefix);
    }
    ExplicitDistribution::from_pairs(
        n,
        counts
            .into_iter()
            .map(|(m, c)| (m, BigRational::new(BigInt::from(c), BigInt::from(total)))),
    )
}

/// `Pr_r[M_i = m | M_0 = m_0, A_0 = a_0, ...]` for `i = messages.len()`.
pub fn conditional_message_distribution<P: PrivateCoinProtocol + ?Sized>(
    proto: &P,
    messages: &[u64],
    answers: &[u64],
) -> Result<ExplicitDistribution> {
    check_coin_budget(proto)?;
    let i = messages.len();
    if answers.len() != i || i >= proto.rounds() {
        return Err(Error::InvalidInstance("prefix length does not match a round".into()));
    }
    let mut counts = BTreeMap::new();
    for r in 0..1u64 << proto.coin_bits() {
        if consistent(proto, r, messages, answers) {
            *counts.entry(proto.next_message(i, r, answers)).or_insert(0) += 1;
        }
    }
    counts_to_dist(proto.message_bits(), counts)
}

/// Uniform distribution over the coins consistent with a full transcript.
pub fn conditional_randomness_distribution<P: PrivateCoinProtocol + ?Sized>(
    proto: &P,
    messages: &[u64],
    answers: &[u64],
) -> Result<ExplicitDistribution> {
    check_coin_budget(proto)?;
    if messages.len() != proto.rounds() || answers.len() != proto.rounds() {
        return Err(Error::InvalidInstance("transcript must cover every round".into()));
    }
    let counts: BTreeMap<u64, u64> = (0..1u64 << proto.coin_bits())
        .filter(|&r| consistent(proto, r, messages, answers))
        .map(|r| (r, 1))
        .collect();
    counts_to_dist(proto.coin_bits(), counts)
}

/// The private prover's strategy: an answer for each round given the
/// messages so far.
pub trait PrivateProver: Send + Sync {
    fn answer(&self, i: usize, messages: &[u64], answers: &[u64]) -> u64;
}

/// `Pr_r[V accepts]` against a fixed private prover, exactly.
pub fn exact_acceptance<P: PrivateCoinProtocol + ?Sized>(proto: &P, prover: &dyn PrivateProver) -> Result<BigRational> {
    check_coin_budget(proto)?;
    let mut accepted = 0u64;
    for r in 0..1u64 << proto.coin_bits() {
        let (mut messages, mut answers) = (vec![], vec![]);
        for i in 0..proto.rounds() {
            messages.push(proto.next_message(i, r, &answers));
            answers.push(prover.answer(i, &messages, &answers));
        }
        if proto.verdict(r, &messages, &answers) {
            accepted += 1;
        }
    }
    Ok(BigRational::new(accepted.into(), BigInt::one() << proto.coin_bits()))
}

/// Largest acceptance probability over all private provers, by
/// backward induction over the rounds.
pub fn optimal_acceptance<P: PrivateCoinProtocol + ?Sized>(proto: &P) -> Result<BigRational> {
    check_coin_budget(proto)?;
    let coins: Vec<u64> = (0..1u64 << proto.coin_bits()).collect();
    let best = best_count(proto, &coins, &mut vec![], &mut vec![]);
    Ok(BigRational::new(best.into(), BigInt::one() << proto.coin_bits()))
}

fn best_count<P: PrivateCoinProtocol + ?Sized>(
    proto: &P,
    coins: &[u64],
    messages: &mut Vec<u64>,
    answers: &mut Vec<u64>,
) -> u64 {
    let i = messages.len();
    if i == proto.rounds() {
        return coins.iter().filter(|&&r| proto.decide(r, messages, answers)).count() as u64;
    }
    let mut groups: BTreeMap<u64, Vec<u64>> = BTreeMap::new();
    for &r in coins {
        groups.entry(proto.next_message(i, r, answers)).or_default().push(r);
    }
    let mut total = 0;
    for (m, group) in groups {
        messages.push(m);
        let mut best = 0;
        for a in 0..1u64 << proto.answer_bits() {
            answers.push(a);
            best = best.max(best_count(proto, &group, messages, answers));
            answers.pop();
        }
        messages.pop();
        total += best;
    }
    total
}

/// Multiset distinctness: the verifier picks a side `b`, sorts `s_b`,
/// scrambles it by a uniformly random automorphism of the complete binary
/// tree over the positions and asks which side it came from.
#[derive(Clone, Debug)]
pub struct ToyMultiset {
    pub s0: Vec<char>,
    pub s1: Vec<char>,
    alphabet: Vec<char>,
    width: u32,
}

impl ToyMultiset {
    /// Strings must have equal length, a power of two of at most 16.
    pub fn new(s0: &str, s1: &str) -> Result<Self> {
        let (s0, s1): (Vec<char>, Vec<char>) = (s0.chars().collect(), s1.chars().collect());
        let len = s0.len();
        if len != s1.len() || !len.is_power_of_two() || len > 16 {
            return Err(Error::InvalidInstance(
                "s0 and s1 need equal length 1, 2, 4, 8 or 16".into(),
            ));
        }
        let alphabet: Vec<char> = s0.iter().chain(&s1).copied().collect::<BTreeSet<_>>().into_iter().collect();
        let width = (usize::BITS - (alphabet.len() - 1).leading_zeros()).max(1);
        if width as usize * len > 64 {
            return Err(Error::InvalidInstance("message does not fit in 64 bits".into()));
        }
        Ok(Self {
            s0,
            s1,
            alphabet,
            width,
        })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let get = |k: &str| {
            value
                .get(k)
                .and_then(Value::as_str)
                .ok_or_else(|| Error::InvalidInstance(format!("missing string field {k:?}")))
        };
        Self::new(get("s0")?, get("s1")?)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&serde_json::from_str(&text)?)
    }

    pub fn len(&self) -> usize {
        self.s0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s0.is_empty()
    }

    /// Whether the instance is in the language: the multisets differ.
    pub fn in_language(&self) -> bool {
        sorted(&self.s0) != sorted(&self.s1)
    }

    fn symbol(&self, c: char) -> u64 {
        self.alphabet.binary_search(&c).expect("symbol of the instance") as u64
    }

    pub fn encode(&self, s: &[char]) -> u64 {
        s.iter().fold(0, |acc, &c| acc << self.width | self.symbol(c))
    }

    pub fn decode(&self, m: u64) -> Vec<char> {
        let mask = (1u64 << self.width) - 1;
        (0..self.len())
            .rev()
            .map(|pos| {
                let idx = (m >> (pos as u32 * self.width) & mask) as usize;
                self.alphabet.get(idx).copied().unwrap_or('?')
            })
            .collect()
    }

    /// Applies the tree automorphism whose swap bits, one per internal node
    /// in heap order, are `bits`.
    fn scramble(&self, s: &mut [char], bits: u64) {
        fn go(s: &mut [char], node: usize, bits: u64) {
            if s.len() <= 1 {
                return;
            }
            let half = s.len() / 2;
            if bits >> (node - 1) & 1 == 1 {
                let (a, b) = s.split_at_mut(half);
                a.swap_with_slice(b);
            }
            let (a, b) = s.split_at_mut(half);
            go(a, 2 * node, bits);
            go(b, 2 * node + 1, bits);
        }
        go(s, 1, bits);
    }
}

fn sorted(s: &[char]) -> Vec<char> {
    let mut v = s.to_vec();
    v.sort_unstable();
    v
}

impl PrivateCoinProtocol for ToyMultiset {
    fn rounds(&self) -> usize {
        1
    }

    /// One bit for the side, `len - 1` swap bits.
    fn coin_bits(&self) -> u32 {
        self.len() as u32
    }

    fn message_bits(&self) -> u32 {
        self.width * self.len() as u32
    }

    fn answer_bits(&self) -> u32 {
        1
    }

    fn next_message(&self, _i: usize, r: u64, _answers: &[u64]) -> u64 {
        let side = if r & 1 == 0 { &self.s0 } else { &self.s1 };
        let mut s = sorted(side);
        self.scramble(&mut s, r >> 1);
        self.encode(&s)
    }

    fn decide(&self, r: u64, _messages: &[u64], answers: &[u64]) -> bool {
        answers[0] == r & 1
    }
}

/// Says 0 exactly when the message is a rearrangement of `s0`.
pub struct ToyHonestProver {
    pub instance: ToyMultiset,
}

impl PrivateProver for ToyHonestProver {
    fn answer(&self, _i: usize, messages: &[u64], _answers: &[u64]) -> u64 {
        let got = sorted(&self.instance.decode(messages[0]));
        u64::from(got != sorted(&self.instance.s0))
    }
}

/// Prover strategy in the compiled protocol.
pub trait TransformProver: Send + Sync {
    fn describe(&self) -> String;
    /// Sampling-protocol prover for round `i`.
    fn message_prover(&self, messages: &[u64], answers: &[u64]) -> Box<dyn Prover>;
    /// Sampling-protocol prover for the final coin sample.
    fn randomness_prover(&self, messages: &[u64], answers: &[u64]) -> Box<dyn Prover>;
    /// Answer `a_i`; `seed` is the prover's private per-run randomness.
    fn answer(&self, i: usize, messages: &[u64], answers: &[u64], seed: u64) -> u64;
}

/// Plays every sampling round honestly for the exact conditionals.
pub struct HonestTransformProver<'a, P: PrivateCoinProtocol> {
    pub proto: &'a P,
    pub private: &'a dyn PrivateProver,
    pub message_params: ProtocolParams,
    pub coin_params: ProtocolParams,
}

fn honest_or_garbage(dist: Result<ExplicitDistribution>, params: &ProtocolParams) -> Box<dyn Prover> {
    match dist {
        Ok(d) => Box::new(HonestProver::new(d, params)),
        Err(_) => Box::new(MalformedProver),
    }
}

impl<P: PrivateCoinProtocol> TransformProver for HonestTransformProver<'_, P> {
    fn describe(&self) -> String {
        "honest".into()
    }

    fn message_prover(&self, messages: &[u64], answers: &[u64]) -> Box<dyn Prover> {
        honest_or_garbage(
            conditional_message_distribution(self.proto, messages, answers),
            &self.message_params,
        )
    }

    fn randomness_prover(&self, messages: &[u64], answers: &[u64]) -> Box<dyn Prover> {
        honest_or_garbage(
            conditional_randomness_distribution(self.proto, messages, answers),
            &self.coin_params,
        )
    }

    fn answer(&self, i: usize, messages: &[u64], answers: &[u64], _seed: u64) -> u64 {
        self.private.answer(i, messages, answers)
    }
}

/// Honest sampling, uniformly random answers.
pub struct RandomAnswerProver<'a, P: PrivateCoinProtocol> {
    pub honest: HonestTransformProver<'a, P>,
}

impl<P: PrivateCoinProtocol> TransformProver for RandomAnswerProver<'_, P> {
    fn describe(&self) -> String {
        "random-answer".into()
    }

    fn message_prover(&self, messages: &[u64], answers: &[u64]) -> Box<dyn Prover> {
        self.honest.message_prover(messages, answers)
    }

    fn randomness_prover(&self, messages: &[u64], answers: &[u64]) -> Box<dyn Prover> {
        self.honest.randomness_prover(messages, answers)
    }

    fn answer(&self, i: usize, _messages: &[u64], _answers: &[u64], seed: u64) -> u64 {
        let bits = self.honest.proto.answer_bits();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        rand::Rng::gen::<u64>(&mut rng) & ((1u64 << bits) - 1)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AmRound {
    pub sampling: Transcript,
    pub message: Option<u64>,
    pub p: Option<OutputProb>,
    pub answer: Option<u64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AmTranscript {
    pub rounds: Vec<AmRound>,
    pub coin_sampling: Option<Transcript>,
    pub r_star: Option<u64>,
    /// Private verdict on the sampled transcript.
    pub check_a: bool,
    /// `prod p_i == 2^{-l}` exactly.
    pub check_b: bool,
    pub accept: bool,
    /// Stage at which a sampling run rejected, if any.
    pub rejected_at: Option<usize>,
}

/// One run of the compiled protocol. Sampling round `i` (the coin sample is
/// round `k`) draws from its own stream `(seed, i)`.
pub fn transform_run<P: PrivateCoinProtocol>(
    proto: &P,
    prover: &dyn TransformProver,
    message_params: &ProtocolParams,
    coin_params: &ProtocolParams,
    seed: u64,
) -> AmTranscript {
    let k = proto.rounds();
    let prover_seed = stream_seed(seed, u64::MAX) as u64;
    let (mut messages, mut answers, mut probs) = (vec![], vec![], vec![]);
    let mut rounds = vec![];
    let rejected = |rounds, coin_sampling, at| AmTranscript {
        rounds,
        coin_sampling,
        r_star: None,
        check_a: false,
        check_b: false,
        accept: false,
        rejected_at: Some(at),
    };
    for i in 0..k {
        let sampler = prover.message_prover(&messages, &answers);
        let sampling = run_protocol(message_params, sampler.as_ref(), &mut trial_rng(seed, i as u64));
        let Outcome::Output { x, p } = sampling.outcome.clone() else {
            rounds.push(AmRound {
                sampling,
                message: None,
                p: None,
                answer: None,
            });
            return rejected(rounds, None, i);
        };
        messages.push(x);
        let a = prover.answer(i, &messages, &answers, prover_seed);
        answers.push(a);
        probs.push(p.clone());
        rounds.push(AmRound {
            sampling,
            message: Some(x),
            p: Some(p),
            answer: Some(a),
        });
    }
    let sampler = prover.randomness_prover(&messages, &answers);
    let sampling = run_protocol(coin_params, sampler.as_ref(), &mut trial_rng(seed, k as u64));
    let Outcome::Output { x: r, p } = sampling.outcome.clone() else {
        return rejected(rounds, Some(sampling), k);
    };
    probs.push(p);
    let check_a = proto.verdict(r, &messages, &answers);
    let check_b = exact_product(&probs).is_some_and(|prod| prod == pow2(-(proto.coin_bits() as i64)));
    AmTranscript {
        rounds,
        coin_sampling: Some(sampling),
        r_star: Some(r),
        check_a,
        check_b,
        accept: check_a && check_b,
        rejected_at: None,
    }
}

fn exact_product(probs: &[OutputProb]) -> Option<BigRational> {
    probs
        .iter()
        .try_fold(BigRational::one(), |acc, p| Some(acc * p.as_exact()?))
}

#[derive(Clone, Debug, Serialize)]
pub struct TransformReport {
    pub prover: String,
    pub in_language: bool,
    pub trials: u64,
    pub accepted: u64,
    pub rate: f64,
    pub half_width: f64,
    pub alpha: f64,
    pub failed_a: u64,
    pub failed_b: u64,
    /// Sampling rejects per stage (`k` is the coin sample).
    pub sampling_rejects: BTreeMap<usize, u64>,
    pub bounds: Bounds,
}

/// Acceptance rate of the compiled protocol over `trials` independent runs.
#[allow(clippy::too_many_arguments)]
pub fn transform_estimate(
    proto: &ToyMultiset,
    prover: &dyn TransformProver,
    message_params: &ProtocolParams,
    coin_params: &ProtocolParams,
    trials: u64,
    master: u64,
    alpha: f64,
    threads: Option<usize>,
) -> Result<TransformReport> {
    if trials == 0 {
        return Err(Error::InvalidParams("need at least one trial".into()));
    }
    let runs = par::with_threads(threads, || {
        par::map_range(trials, |i| {
            let t = transform_run(proto, prover, message_params, coin_params, stream_seed(master, i) as u64);
            (t.accept, t.check_a, t.check_b, t.rejected_at)
        })
    });
    let mut report = TransformReport {
        prover: prover.describe(),
        in_language: proto.in_language(),
        trials,
        accepted: 0,
        rate: 0.0,
        half_width: hoeffding_half_width(trials, alpha, 1.0),
        alpha,
        failed_a: 0,
        failed_b: 0,
        sampling_rejects: BTreeMap::new(),
        bounds: bounds_calculator(1.0, 0.5, proto.rounds(), message_params.eps, message_params.delta),
    };
    for (accept, a, b, at) in runs {
        match at {
            Some(stage) => *report.sampling_rejects.entry(stage).or_insert(0) += 1,
            None => {
                report.accepted += u64::from(accept);
                report.failed_a += u64::from(!a);
                report.failed_b += u64::from(!b);
            }
        }
    }
    report.rate = report.accepted as f64 / trials as f64;
    Ok(report)
}

/// Sampling parameters for messages and coins of `proto`, from the closed
/// forms at accuracy `(eps, delta)`.
pub fn sampling_params<P: PrivateCoinProtocol + ?Sized>(
    proto: &P,
    eps: f64,
    delta: f64,
) -> Result<(ProtocolParams, ProtocolParams)> {
    Ok((
        ProtocolParams::raw_from_formulas(proto.message_bits(), eps, delta)?,
        ProtocolParams::raw_from_formulas(proto.coin_bits(), eps, delta)?,
    ))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bounds {
    pub completeness: f64,
    pub soundness: f64,
}

/// Completeness `c - 2(k+1) eps` and soundness
/// `(1 + eps + delta)^{k+1} s + (k+1) eps` of the compiled protocol.
pub fn bounds_calculator(c: f64, s: f64, k: usize, eps: f64, delta: f64) -> Bounds {
    let r = (k + 1) as f64;
    Bounds {
        completeness: c - 2.0 * r * eps,
        soundness: (1.0 + eps + delta).powi(k as i32 + 1) * s + r * eps,
    }
}

/// Exact rational version of [`bounds_calculator`].
pub fn bounds_exact(
    c: &BigRational,
    s: &BigRational,
    k: usize,
    eps: &BigRational,
    delta: &BigRational,
) -> (BigRational, BigRational) {
    let r = rational::int(k as i64 + 1);
    let base = BigRational::one() + eps + delta;
    let mut pow = BigRational::one();
    for _ in 0..=k {
        pow *= &base;
    }
    (c - rational::int(2) * &r * eps, pow * s + r * eps)
}

/// `(eps, delta) = (gamma / (2(k+1)), 1/2)`.
pub fn corollary_constant_gap(gamma: f64, k: usize) -> (f64, f64) {
    (gamma / (2.0 * (k + 1) as f64), 0.5)
}

/// `(eps, delta) = (gamma / (4(k+1)), nu / (4(k+1)))`.
pub fn corollary_two_thirds(gamma: f64, nu: f64, k: usize) -> (f64, f64) {
    let r = 4.0 * (k + 1) as f64;
    (gamma / r, nu / r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    /// One round; the message is the lowest coin bit and the verifier
    /// accepts when the answer repeats it.
    struct Echo;

    impl PrivateCoinProtocol for Echo {
        fn rounds(&self) -> usize {
            1
        }
        fn coin_bits(&self) -> u32 {
            3
        }
        fn message_bits(&self) -> u32 {
            1
        }
        fn answer_bits(&self) -> u32 {
            1
        }
        fn next_message(&self, _i: usize, r: u64, _a: &[u64]) -> u64 {
            r & 1
        }
        fn decide(&self, r: u64, _m: &[u64], a: &[u64]) -> bool {
            a[0] == r & 1
        }
    }

    #[test]
    fn first_bit_message_is_fair() {
        let d = conditional_message_distribution(&Echo, &[], &[]).unwrap();
        assert_eq!(d.prob(0), ratio(1, 2));
        assert_eq!(d.prob(1), ratio(1, 2));
        let r = conditional_randomness_distribution(&Echo, &[1], &[0]).unwrap();
        assert_eq!(r.support().collect::<Vec<_>>(), vec![1, 3, 5, 7]);
    }

    #[test]
    fn toy_message_distribution_counts_arrangements() {
        let toy = ToyMultiset::new("aabb", "abab").unwrap();
        assert!(!toy.in_language());
        let d = conditional_message_distribution(&toy, &[], &[]).unwrap();
        // Independent count: apply every coin string directly.
        let mut counts: BTreeMap<String, u64> = BTreeMap::new();
        for r in 0..16u64 {
            let mut s = sorted(if r & 1 == 0 { &toy.s0 } else { &toy.s1 });
            toy.scramble(&mut s, r >> 1);
            *counts.entry(s.iter().collect()).or_default() += 1;
        }
        assert_eq!(d.len(), counts.len());
        for (s, c) in counts {
            let chars: Vec<char> = s.chars().collect();
            assert_eq!(d.prob(toy.encode(&chars)), ratio(c as i64, 16));
        }
    }

    #[test]
    fn impossible_prefix_is_an_error() {
        let toy = ToyMultiset::new("ab", "ab").unwrap();
        let bb = toy.encode(&['b', 'b']);
        assert!(matches!(
            conditional_randomness_distribution(&toy, &[bb], &[0]),
            Err(Error::ZeroProbabilityPrefix)
        ));
    }

    #[test]
    fn ground_truth_completeness_and_soundness() {
        for (s0, s1) in [("aabb", "abbb"), ("ab", "aa"), ("abcdabcd", "abcdabce")] {
            let toy = ToyMultiset::new(s0, s1).unwrap();
            let honest = ToyHonestProver { instance: toy.clone() };
            assert_eq!(exact_acceptance(&toy, &honest).unwrap(), BigRational::one());
        }
        for (s0, s1) in [("aabb", "abab"), ("ab", "ba"), ("abcdabcd", "dcbadcba")] {
            let toy = ToyMultiset::new(s0, s1).unwrap();
            assert_eq!(optimal_acceptance(&toy).unwrap(), ratio(1, 2));
        }
    }

    #[test]
    fn verdict_enforces_consistency() {
        let toy = ToyMultiset::new("ab", "aa").unwrap();
        // r = 0: side 0, no swap, message "ab".
        let ab = toy.encode(&['a', 'b']);
        assert!(toy.verdict(0, &[ab], &[0]));
        let ba = toy.encode(&['b', 'a']);
        assert!(!toy.verdict(0, &[ba], &[0]));
        assert!(!toy.verdict(0, &[ab], &[1]));
    }

    #[test]
    fn bounds_examples() {
        assert_eq!(bounds_calculator(1.0, 0.5, 1, 0.0, 0.0), Bounds { completeness: 1.0, soundness: 0.5 });
        let (c, s) = bounds_exact(&ratio(1, 1), &ratio(1, 2), 1, &ratio(1, 100), &ratio(1, 10));
        assert_eq!(c, ratio(96, 100));
        // (111/100)^2 / 2 + 2/100
        assert_eq!(s, ratio(12321, 20000) + ratio(1, 50));
        let b = bounds_calculator(1.0, 0.5, 1, 0.01, 0.1);
        assert!((b.soundness - 0.63605).abs() < 1e-12);
    }

    #[test]
    fn corollary_parameterizations() {
        let (eps, delta) = corollary_constant_gap(0.2, 1);
        let b = bounds_calculator(1.0, 0.5, 1, eps, delta);
        assert!((b.completeness - 0.8).abs() < 1e-12);
        // Completeness 2/3 + gamma maps to at least 2/3.
        let (gamma, nu, k) = (0.1, 0.1, 2);
        let (eps, delta) = corollary_two_thirds(gamma, nu, k);
        let b = bounds_calculator(2.0 / 3.0 + gamma, 1.0 / 3.0 - nu, k, eps, delta);
        assert!(b.completeness >= 2.0 / 3.0);
        assert!(b.soundness <= 1.0 / 3.0);
    }
}
