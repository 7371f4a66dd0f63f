use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::{OutputKey, DEFAULT_BUDGET};
use crate::dist::mask;
use crate::hash3::HashFunction;
use crate::par::map_range;
use crate::protocol::{
    challenge_shape, check_sets, finalize, shift_weights, valid_full_list, verifier_round1,
    ChallengeContext, Mode, OutputProb, Prover, ProtocolParams, RejectReason,
};
use crate::dist::{interval_weights, Histogram};
use crate::{Error, Result};

/// Everything the structured enumerator learns about one deterministic
/// prover.
#[derive(Clone, Debug, Default)]
pub struct DeterministicTable {
    /// Joint output masses `Pr[(X, P) = (x, p)]`.
    pub outputs: BTreeMap<OutputKey, BigRational>,
    pub reject: BTreeMap<RejectReason, BigRational>,
    /// `Pr[S = s]`, for shifts with positive weight.
    pub shift_prob: BTreeMap<i64, BigRational>,
    /// `w(s)` for every shift.
    pub w: BTreeMap<i64, BigRational>,
    /// `Pr[(X, P) = (x, p) | S = s]`.
    pub cond: BTreeMap<i64, BTreeMap<OutputKey, BigRational>>,
    /// `Pr[(X, J) = (x, j) | S = s]`, i.e. the mass of outputs with `p in A_j`.
    pub cond_xj: BTreeMap<i64, BTreeMap<(u64, usize), BigRational>>,
    /// Nonzero `r_s(x, j)`.
    pub r: BTreeMap<i64, BTreeMap<(u64, usize), BigRational>>,
    /// `I_k(s)` for every enumerated `(s, k)`.
    pub intervals: BTreeMap<(i64, usize), Vec<usize>>,
    pub branches: u128,
}

impl DeterministicTable {
    pub fn reject_total(&self) -> BigRational {
        crate::rational::sum(self.reject.values())
    }

    fn add_reject(&mut self, reason: RejectReason, mass: BigRational) {
        if mass.is_zero() {
            return;
        }
        *self.reject.entry(reason).or_insert_with(BigRational::zero) += mass;
    }
}

fn add(map: &mut BTreeMap<OutputKey, BigRational>, key: OutputKey, mass: &BigRational) {
    *map.entry(key).or_insert_with(BigRational::zero) += mass;
}

struct FBranch {
    /// Reject masses conditioned on this hash.
    rejects: Vec<(RejectReason, BigRational)>,
    /// `(x, p, j, Pr[j, x | f])`.
    outputs: Vec<(u64, OutputProb, usize, BigRational)>,
    /// `(x, j)` with every check passing and `x in X_j`.
    members: Vec<(u64, usize)>,
    branches: u64,
}

fn family_size(n: u32) -> Result<u64> {
    if 3 * n > 36 {
        return Err(Error::BudgetExceeded {
            needed: 1u128 << (3 * n).min(120),
            budget: DEFAULT_BUDGET,
        });
    }
    Ok(1u64 << (3 * n))
}

/// `#{f in H(n, m) : f(x) = 0^m}` for every `x`, by direct count.
fn zero_counts(n: u32, m: u32) -> Vec<u64> {
    let size = 1u64 << (3 * n);
    let mut counts = vec![0u64; 1usize << n];
    for idx in 0..size {
        let f = HashFunction::from_index(n, m, idx);
        for (x, c) in counts.iter_mut().enumerate() {
            if f.hits_zero(x as u64) {
                *c += 1;
            }
        }
    }
    counts
}

fn one_hash(
    prover: &dyn Prover,
    params: &ProtocolParams,
    h: &[BigRational],
    base: &ChallengeContext,
    w_k: &BigRational,
    f: HashFunction,
) -> FBranch {
    let ctx = ChallengeContext { f, ..base.clone() };
    let sets = prover.sets(&ctx);
    let mut out = FBranch {
        rejects: vec![],
        outputs: vec![],
        members: vec![],
        branches: 1,
    };
    if let Err(r) = check_sets(&sets, h, &ctx, params) {
        out.rejects.push((r, BigRational::one()));
        return out;
    }
    for (&j, xs) in &sets {
        out.members.extend(xs.iter().map(|&x| (x, j)));
    }
    for &j in &ctx.interval {
        if !h[j].is_positive() {
            continue;
        }
        let pj = &h[j] / w_k;
        let xs = match sets.get(&j) {
            Some(xs) if !xs.is_empty() => xs,
            Some(_) => {
                out.rejects.push((RejectReason::EmptySet, pj));
                continue;
            }
            None => {
                out.rejects.push((RejectReason::NotInN, pj));
                continue;
            }
        };
        let each = &pj / BigRational::from_integer(BigInt::from(xs.len()));
        for &x in xs {
            out.branches += 1;
            let (x, p) = finalize(j, x, &prover.probability(j, x), params);
            out.outputs.push((x, p, j, each.clone()));
        }
    }
    out
}

/// Exhaustive enumeration of every verifier coin for one deterministic
/// prover.
pub fn enumerate_deterministic(
    params: &ProtocolParams,
    prover: &dyn Prover,
    budget: u128,
) -> Result<DeterministicTable> {
    let mut table = DeterministicTable::default();
    if params.mode == Mode::TrivialFallback {
        let list = prover.full_list();
        if valid_full_list(&list, params) {
            for (x, p) in list {
                add(&mut table.outputs, (x, OutputProb::Exact(p.clone())), &p);
            }
        } else {
            table.add_reject(RejectReason::InvalidList, BigRational::one());
        }
        table.branches = 1;
        return Ok(table);
    }

    let layout = params.layout();
    let fam = family_size(params.n)?;
    let lower = layout.shifts.len() as u128 * (layout.k_max as u128 + 1) * fam as u128;
    if lower > budget {
        return Err(Error::BudgetExceeded {
            needed: lower,
            budget,
        });
    }
    let h = prover.histogram();
    let n_set = match verifier_round1(&h, params) {
        Ok(n) => n,
        Err(r) => {
            table.add_reject(r, BigRational::one());
            table.branches = 1;
            return Ok(table);
        }
    };
    let hist = Histogram {
        eps: params.eps,
        t: params.t,
        h: h.clone(),
        dropped: BigRational::zero(),
    };
    let shifts = shift_weights(&h, params, &layout);
    let total_w = crate::rational::sum(shifts.iter().map(|(_, w)| w));
    for (s, w) in &shifts {
        table.w.insert(*s, w.clone());
    }
    if total_w.is_zero() {
        table.add_reject(RejectReason::DegenerateShift, BigRational::one());
        return Ok(table);
    }
    let fam_r = BigRational::from_integer(BigInt::from(fam));
    let mut zero_cache: BTreeMap<u32, Vec<u64>> = BTreeMap::new();

    for (s, w_s) in shifts {
        if !w_s.is_positive() {
            continue;
        }
        let p_s = &w_s / &total_w;
        table.shift_prob.insert(s, p_s.clone());
        let per = interval_weights(&hist, &layout, s).per_interval;
        let mut cond: BTreeMap<OutputKey, BigRational> = BTreeMap::new();
        let mut cond_xj: BTreeMap<(u64, usize), BigRational> = BTreeMap::new();
        let mut r_s: BTreeMap<(u64, usize), BigRational> = BTreeMap::new();
        let mut cond_reject: BTreeMap<RejectReason, BigRational> = BTreeMap::new();
        for (k, w_k) in per.iter().enumerate() {
            if !w_k.is_positive() {
                continue;
            }
            let p_k = w_k / &w_s;
            let shape = challenge_shape(&h, &n_set, params, &layout, s, k);
            table.intervals.insert((s, k), shape.interval.clone());
            if shape.m > params.n as u64 {
                *cond_reject.entry(RejectReason::HashWidth).or_insert_with(BigRational::zero) += &p_k;
                continue;
            }
            let m = shape.m as u32;
            let base = ChallengeContext {
                s,
                k,
                interval: shape.interval.clone(),
                keys: shape.keys.clone(),
                log_mass: shape.log_mass,
                g: shape.g,
                m,
                f: HashFunction::from_index(params.n, m, 0),
            };
            let branches = map_range(fam, |idx| {
                one_hash(prover, params, &h, &base, w_k, HashFunction::from_index(params.n, m, idx))
            });
            let weight = &p_k / &fam_r;
            let mut member_counts: BTreeMap<(u64, usize), u64> = BTreeMap::new();
            for b in &branches {
                table.branches += b.branches as u128;
                for (x, p, j, mass) in &b.outputs {
                    let mass = mass * &weight;
                    add(&mut cond, (*x, p.clone()), &mass);
                    *cond_xj.entry((*x, *j)).or_insert_with(BigRational::zero) += &mass;
                }
                for (reason, mass) in &b.rejects {
                    *cond_reject.entry(*reason).or_insert_with(BigRational::zero) += mass * &weight;
                }
                for key in &b.members {
                    *member_counts.entry(*key).or_insert(0) += 1;
                }
            }
            let zeros = zero_cache
                .entry(m)
                .or_insert_with(|| zero_counts(params.n, m));
            for ((x, j), count) in member_counts {
                if x > mask(params.n) {
                    continue;
                }
                r_s.insert(
                    (x, j),
                    BigRational::new(BigInt::from(count), BigInt::from(zeros[x as usize])),
                );
            }
            if table.branches > budget {
                return Err(Error::BudgetExceeded {
                    needed: table.branches,
                    budget,
                });
            }
        }
        for (key, mass) in &cond {
            add(&mut table.outputs, key.clone(), &(mass * &p_s));
        }
        for (reason, mass) in cond_reject {
            table.add_reject(reason, mass * &p_s);
        }
        table.cond.insert(s, cond);
        table.cond_xj.insert(s, cond_xj);
        table.r.insert(s, r_s);
    }
    Ok(table)
}
