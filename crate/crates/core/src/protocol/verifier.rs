use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::RngCore;

use super::coins::{CoinKind, CoinSource, RandomCoins, ReplayCoins};
use super::messages::{Coins, ListEntry, Message, Outcome, OutputProb, RejectReason, Transcript};
use super::params::{Mode, ProtocolParams};
use super::prover::{ChallengeContext, Prover};
use crate::dist::{bucket_of, interval_weights, mask, Histogram, IntervalLayout};
use crate::rational;
use crate::TAU;

type Step<T> = std::result::Result<T, RejectReason>;

/// Round-1 check. On success returns `N = {j : h_j >= eps/(2t)}`.
pub fn verifier_round1(h: &[BigRational], params: &ProtocolParams) -> Step<Vec<usize>> {
    if h.len() != params.t + 1 || h.iter().any(Signed::is_negative) {
        return Err(RejectReason::MalformedHistogram);
    }
    let total = rational::sum(h);
    let lower = BigRational::one() - rational::pow2(-(params.n as i64));
    if total < lower || total > BigRational::one() {
        return Err(RejectReason::HistogramMass);
    }
    let thr = params.n_threshold() * (1.0 - TAU);
    Ok(h.iter()
        .enumerate()
        .filter(|(_, hj)| hj.is_positive() && rational::to_f64(hj) >= thr)
        .map(|(j, _)| j)
        .collect())
}

fn as_histogram(h: &[BigRational], params: &ProtocolParams) -> Histogram {
    Histogram {
        eps: params.eps,
        t: params.t,
        h: h.to_vec(),
        dropped: BigRational::zero(),
    }
}

/// `w(s)` for every shift, in the layout's shift order.
pub fn shift_weights(h: &[BigRational], params: &ProtocolParams, layout: &IntervalLayout) -> Vec<(i64, BigRational)> {
    let hist = as_histogram(h, params);
    layout
        .shifts
        .iter()
        .map(|&s| (s, interval_weights(&hist, layout, s).total))
        .collect()
}

/// `log2(sum_{i in I} 2^{i eps} h_i)` via log-sum-exp; `-inf` for an empty
/// or all-zero range.
pub fn log_mass(h: &[BigRational], interval: &[usize], eps: f64) -> f64 {
    let logs: Vec<f64> = interval
        .iter()
        .filter(|&&i| h[i].is_positive())
        .map(|&i| rational::log2(&h[i]) + i as f64 * eps)
        .collect();
    let Some(top) = logs.iter().copied().reduce(f64::max) else {
        return f64::NEG_INFINITY;
    };
    top + logs.iter().map(|l| (l - top).exp2()).sum::<f64>().log2()
}

/// Shapes of the challenge once `(s, k)` are fixed: `I_k`, `I'_k`, `L`,
/// `g` and `m`. `m` may exceed `n`; the caller rejects in that case.
#[derive(Clone, Debug)]
pub struct ChallengeShape {
    pub interval: Vec<usize>,
    pub keys: Vec<usize>,
    pub log_mass: f64,
    pub g: f64,
    pub m: u64,
}

pub fn challenge_shape(
    h: &[BigRational],
    n_set: &[usize],
    params: &ProtocolParams,
    layout: &IntervalLayout,
    s: i64,
    k: usize,
) -> ChallengeShape {
    let interval: Vec<usize> = layout.interval(k, s).map(|r| r.collect()).unwrap_or_default();
    let in_n: BTreeSet<usize> = n_set.iter().copied().collect();
    let keys = interval.iter().copied().filter(|j| in_n.contains(j)).collect();
    let l = log_mass(h, &interval, params.eps);
    let excess = l - params.samp_gap;
    let fl = excess.floor();
    let g = params.samp_gap + (excess - fl);
    let m = if fl > 0.0 { fl as u64 } else { 0 };
    ChallengeShape {
        interval,
        keys,
        log_mass: l,
        g,
        m,
    }
}

/// Draws `s`, `k` and `f`.
pub fn choose_challenge(
    h: &[BigRational],
    n_set: &[usize],
    params: &ProtocolParams,
    layout: &IntervalLayout,
    coins: &mut dyn CoinSource,
    record: &mut Coins,
) -> Step<ChallengeContext> {
    let shifts = shift_weights(h, params, layout);
    let items: Vec<(BigRational, i64)> = shifts.iter().map(|(s, w)| (w.clone(), *s)).collect();
    let s = coins
        .weighted(CoinKind::Shift, &items)
        .ok_or(RejectReason::DegenerateShift)?;
    record.s = Some(s);
    let per = interval_weights(&as_histogram(h, params), layout, s).per_interval;
    let items: Vec<(BigRational, i64)> =
        per.into_iter().enumerate().map(|(i, w)| (w, i as i64)).collect();
    let k = coins
        .weighted(CoinKind::Interval, &items)
        .ok_or(RejectReason::DegenerateInterval)? as usize;
    record.k = Some(k);
    let shape = challenge_shape(h, n_set, params, layout, s, k);
    record.g = Some(shape.g);
    if shape.m > params.n as u64 {
        return Err(RejectReason::HashWidth);
    }
    let m = shape.m as u32;
    record.m = Some(m);
    let f = coins.hash(params.n, m);
    record.f = Some(f);
    Ok(ChallengeContext {
        s,
        k,
        interval: shape.interval,
        keys: shape.keys,
        log_mass: shape.log_mass,
        g: shape.g,
        m,
        f,
    })
}

/// Real bounds on `|X_i|` from check (b), before tolerance widening.
pub fn size_bounds(h_i: &BigRational, i: usize, ctx: &ChallengeContext, eps: f64) -> (f64, f64) {
    let lh = rational::log2(h_i);
    let i = i as f64;
    if ctx.m == 0 {
        ((lh + i * eps).exp2(), (lh + (i + 1.0) * eps).exp2())
    } else {
        let shift = ctx.g - ctx.log_mass;
        (
            (lh + (i - 1.0) * eps + shift).exp2(),
            (lh + (i + 2.0) * eps + shift).exp2(),
        )
    }
}

/// Checks (a) hashing, (b) sizes and (c) disjointness, in that order, after
/// the structural and oversize guards.
pub fn check_sets(
    sets: &BTreeMap<usize, Vec<u64>>,
    h: &[BigRational],
    ctx: &ChallengeContext,
    params: &ProtocolParams,
) -> Step<()> {
    if !sets.keys().copied().eq(ctx.keys.iter().copied()) {
        return Err(RejectReason::MalformedSets);
    }
    let total: usize = sets.values().map(Vec::len).sum();
    if total > params.set_cap {
        return Err(RejectReason::Oversize);
    }
    let limit = mask(params.n);
    if sets.values().flatten().any(|&x| x > limit) {
        return Err(RejectReason::MalformedSets);
    }
    if !sets.values().flatten().all(|&x| ctx.f.hits_zero(x)) {
        return Err(RejectReason::HashCheck);
    }
    for (&i, xs) in sets {
        let (lo, hi) = size_bounds(&h[i], i, ctx, params.eps);
        let size = xs.len() as f64;
        if size < lo * (1.0 - TAU) || size > hi * (1.0 + TAU) {
            return Err(RejectReason::SizeCheck);
        }
    }
    let mut seen = BTreeSet::new();
    if !sets.values().flatten().all(|&x| seen.insert(x)) {
        return Err(RejectReason::Disjointness);
    }
    Ok(())
}

/// Draws `j` proportional to `h` over `I_k`, then `x` uniformly from `X_j`.
pub fn choose_element(
    h: &[BigRational],
    ctx: &ChallengeContext,
    sets: &BTreeMap<usize, Vec<u64>>,
    coins: &mut dyn CoinSource,
    record: &mut Coins,
) -> Step<(usize, u64)> {
    let items: Vec<(BigRational, i64)> = ctx.interval.iter().map(|&i| (h[i].clone(), i as i64)).collect();
    let j = coins
        .weighted(CoinKind::Element, &items)
        .ok_or(RejectReason::DegenerateInterval)? as usize;
    record.j = Some(j);
    let xs = sets.get(&j).ok_or(RejectReason::NotInN)?;
    if xs.is_empty() {
        return Err(RejectReason::EmptySet);
    }
    let idx = coins.uniform(xs.len());
    record.x_index = Some(idx);
    Ok((j, xs[idx]))
}

/// `2^{-j eps}`, exact when `j eps` is an integer.
pub fn bucket_top(j: usize, eps: f64) -> OutputProb {
    let e = j as f64 * eps;
    if (e - e.round()).abs() < 1e-9 {
        OutputProb::Exact(rational::pow2(-(e.round() as i64)))
    } else {
        OutputProb::Real((-e).exp2())
    }
}

/// Keeps `p` if it lies in `A_j`, otherwise substitutes `2^{-j eps}`.
pub fn finalize(j: usize, x: u64, p: &BigRational, params: &ProtocolParams) -> (u64, OutputProb) {
    if bucket_of(p, params.eps, params.t) == Some(j) {
        (x, OutputProb::Exact(p.clone()))
    } else {
        (x, bucket_top(j, params.eps))
    }
}

struct Run {
    coins: Coins,
    messages: Vec<Message>,
}

impl Run {
    fn reject(&mut self, reason: RejectReason) -> Outcome {
        self.messages.push(Message::Reject { reason });
        Outcome::Reject { reason }
    }

    fn output(&mut self, x: u64, p: OutputProb) -> Outcome {
        self.messages.push(Message::Output { x, p: p.clone() });
        Outcome::Output { x, p }
    }
}

fn sampling_rounds(params: &ProtocolParams, prover: &dyn Prover, coins: &mut dyn CoinSource, run: &mut Run) -> Outcome {
    let layout = params.layout();
    let h = prover.histogram();
    run.messages.push(Message::Histogram { h: h.clone() });
    let n_set = match verifier_round1(&h, params) {
        Ok(n) => n,
        Err(r) => return run.reject(r),
    };
    let ctx = match choose_challenge(&h, &n_set, params, &layout, coins, &mut run.coins) {
        Ok(c) => c,
        Err(r) => return run.reject(r),
    };
    run.messages.push(Message::Challenge {
        s: ctx.s,
        k: ctx.k,
        f: ctx.f,
    });
    let sets = prover.sets(&ctx);
    run.messages.push(Message::Sets { sets: sets.clone() });
    if let Err(r) = check_sets(&sets, &h, &ctx, params) {
        return run.reject(r);
    }
    let (j, x) = match choose_element(&h, &ctx, &sets, coins, &mut run.coins) {
        Ok(v) => v,
        Err(r) => return run.reject(r),
    };
    run.messages.push(Message::Element { j, x });
    let p = prover.probability(j, x);
    run.messages.push(Message::Probability { p: p.clone() });
    let (x, p) = finalize(j, x, &p, params);
    run.output(x, p)
}

/// Fallback-protocol check: distinct `n`-bit elements with positive
/// masses summing to exactly 1, within the size cap.
pub fn valid_full_list(list: &[(u64, BigRational)], params: &ProtocolParams) -> bool {
    let limit = mask(params.n);
    let mut seen = BTreeSet::new();
    let well_formed = list
        .iter()
        .all(|(x, p)| *x <= limit && p.is_positive() && seen.insert(*x));
    well_formed
        && list.len() <= params.set_cap
        && rational::sum(list.iter().map(|(_, p)| p)) == BigRational::one()
}

fn fallback_rounds(params: &ProtocolParams, prover: &dyn Prover, coins: &mut dyn CoinSource, run: &mut Run) -> Outcome {
    let list = prover.full_list();
    run.messages.push(Message::FullList {
        list: list.iter().map(|(x, p)| ListEntry { x: *x, p: p.clone() }).collect(),
    });
    if !valid_full_list(&list, params) {
        return run.reject(RejectReason::InvalidList);
    }
    let items: Vec<(BigRational, i64)> =
        list.iter().enumerate().map(|(i, (_, p))| (p.clone(), i as i64)).collect();
    let i = coins
        .weighted(CoinKind::List, &items)
        .expect("positive weights") as usize;
    run.coins.list_index = Some(i);
    let (x, p) = list[i].clone();
    run.output(x, OutputProb::Exact(p))
}

/// One execution driven by an arbitrary coin source.
pub fn run_with_coins(
    params: &ProtocolParams,
    prover: &dyn Prover,
    coins: &mut dyn CoinSource,
    trial: u64,
    prover_seed: Option<u64>,
) -> Transcript {
    let mut run = Run {
        coins: Coins {
            prover_seed,
            ..Default::default()
        },
        messages: vec![],
    };
    let outcome = if params.mode == Mode::TrivialFallback {
        fallback_rounds(params, prover, coins, &mut run)
    } else {
        sampling_rounds(params, prover, coins, &mut run)
    };
    Transcript {
        trial,
        params_digest: params.digest(),
        coins: run.coins,
        messages: run.messages,
        outcome,
    }
}

pub fn run_protocol<R: RngCore + ?Sized>(params: &ProtocolParams, prover: &dyn Prover, rng: &mut R) -> Transcript {
    run_with_coins(params, prover, &mut RandomCoins::new(rng), 0, None)
}

/// The exponential-size protocol: the prover lists every `(x, P(x))` and the
/// verifier outputs one with probability `p`.
pub fn trivial_protocol<R: RngCore + ?Sized>(params: &ProtocolParams, prover: &dyn Prover, rng: &mut R) -> Transcript {
    let mut run = Run {
        coins: Coins::default(),
        messages: vec![],
    };
    let outcome = fallback_rounds(params, prover, &mut RandomCoins::new(rng), &mut run);
    Transcript {
        trial: 0,
        params_digest: params.digest(),
        coins: run.coins,
        messages: run.messages,
        outcome,
    }
}

/// Re-executes a recorded run against the same prover using only the
/// recorded coins.
pub fn replay(params: &ProtocolParams, prover: &dyn Prover, transcript: &Transcript) -> Transcript {
    let mut coins = ReplayCoins::new(transcript.coins.clone());
    run_with_coins(
        params,
        prover,
        &mut coins,
        transcript.trial,
        transcript.coins.prover_seed,
    )
}
