use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use super::{enumerate_deterministic, realization_tables, OutputKey};
use crate::dist::{hex_of, ExplicitDistribution};
use crate::hash3::HashFunction;
use crate::protocol::{
    bucket_lists, challenge_shape, check_sets, verifier_round1, ChallengeContext, HonestProver,
    OutputProb, Prover, ProverFactory, ProtocolParams,
};
use crate::rational::{self, to_f64};
use crate::{Result, TAU};

/// Relative slack covering the float evaluation of the `2^{c eps}` factors.
const FLOAT_SLACK: f64 = 1e-13;

/// `r_s(x, j)` computed on its own: the fraction of hashes with
/// `f(x) = 0^m` under which every set check passes and `x` lands in `X_j`,
/// for the interval `k_s(j)` containing `j`.
pub fn compute_r(params: &ProtocolParams, prover: &dyn Prover, s: i64, x: u64, j: usize) -> BigRational {
    let h = prover.histogram();
    let Ok(n_set) = verifier_round1(&h, params) else {
        return BigRational::zero();
    };
    let layout = params.layout();
    let Some(k) = layout.interval_of(s, j) else {
        return BigRational::zero();
    };
    if !n_set.contains(&j) {
        return BigRational::zero();
    }
    let shape = challenge_shape(&h, &n_set, params, &layout, s, k);
    if shape.m > params.n as u64 {
        return BigRational::zero();
    }
    let m = shape.m as u32;
    let (mut given, mut hit) = (0u64, 0u64);
    for idx in 0..1u64 << (3 * params.n) {
        let f = HashFunction::from_index(params.n, m, idx);
        if !f.hits_zero(x) {
            continue;
        }
        given += 1;
        let ctx = ChallengeContext {
            s,
            k,
            interval: shape.interval.clone(),
            keys: shape.keys.clone(),
            log_mass: shape.log_mass,
            g: shape.g,
            m,
            f,
        };
        let sets = prover.sets(&ctx);
        if check_sets(&sets, &h, &ctx, params).is_ok() && sets.get(&j).is_some_and(|xs| xs.contains(&x)) {
            hit += 1;
        }
    }
    BigRational::new(BigInt::from(hit), BigInt::from(given))
}

#[derive(Clone, Debug, Serialize)]
pub struct QvsrViolation {
    pub realization: usize,
    pub s: i64,
    pub x: u64,
    pub j: usize,
    pub mass: f64,
    pub lower: f64,
    pub upper: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct QvsrReport {
    pub checked: usize,
    pub violations: Vec<QvsrViolation>,
    /// Largest `mass / upper` seen, a measure of how tight the upper bound is.
    pub max_upper_ratio: f64,
}

impl QvsrReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks `2^{-2eps} r/(w 2^{j eps}) <= Pr[X=x, J=j | S=s] <= 2^{eps} r/(w 2^{j eps})`
/// for every `(s, x, j)` of every realization. The bounds are widened by
/// the verifier's tolerance, since the size check accepts sets that far off.
pub fn verify_qvsr(params: &ProtocolParams, factory: &dyn ProverFactory, budget: u128) -> Result<QvsrReport> {
    let eps = params.eps;
    let mut report = QvsrReport {
        checked: 0,
        violations: vec![],
        max_upper_ratio: 0.0,
    };
    for (idx, (_, table)) in realization_tables(params, factory, budget)?.into_iter().enumerate() {
        for s in table.shift_prob.keys() {
            let w = &table.w[s];
            let empty = BTreeMap::new();
            let masses = table.cond_xj.get(s).unwrap_or(&empty);
            let rs = table.r.get(s).unwrap_or(&empty);
            let keys: BTreeSet<(u64, usize)> = masses.keys().chain(rs.keys()).copied().collect();
            for (x, j) in keys {
                report.checked += 1;
                let zero = BigRational::zero();
                let mass = masses.get(&(x, j)).unwrap_or(&zero);
                let r = rs.get(&(x, j)).unwrap_or(&zero);
                let base = to_f64(&(r / w)) * (-(j as f64) * eps).exp2();
                let lower = base * (-2.0 * eps).exp2();
                let upper = base * eps.exp2();
                let m = to_f64(mass);
                if upper > 0.0 {
                    report.max_upper_ratio = report.max_upper_ratio.max(m / upper);
                }
                let lo_ok = m >= lower * (1.0 - TAU - FLOAT_SLACK);
                let hi_ok = m <= upper * (1.0 + TAU + FLOAT_SLACK);
                if !(lo_ok && hi_ok) {
                    report.violations.push(QvsrViolation {
                        realization: idx,
                        s: *s,
                        x,
                        j,
                        mass: m,
                        lower,
                        upper,
                    });
                }
            }
        }
    }
    Ok(report)
}

#[derive(Clone, Debug, Serialize)]
pub struct RsumReport {
    pub checked: usize,
    /// `(realization, s, k, x, sum)` with sum above 1.
    pub violations: Vec<(usize, i64, usize, u64, String)>,
    pub max_sum: String,
}

impl RsumReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `sum_{j in I_k(s)} r_s(x, j) <= 1` for every `(s, k, x)`, exactly.
pub fn verify_rsum(params: &ProtocolParams, factory: &dyn ProverFactory, budget: u128) -> Result<RsumReport> {
    let mut checked = 0;
    let mut violations = vec![];
    let mut max = BigRational::zero();
    let universe = 1u64 << params.n;
    for (idx, (_, table)) in realization_tables(params, factory, budget)?.into_iter().enumerate() {
        for ((s, k), interval) in &table.intervals {
            let Some(rs) = table.r.get(s) else { continue };
            for x in 0..universe {
                checked += 1;
                let sum = rational::sum(interval.iter().filter_map(|j| rs.get(&(x, *j))));
                if sum > max {
                    max = sum.clone();
                }
                if sum > BigRational::one() {
                    violations.push((idx, *s, *k, x, rational::format(&sum)));
                }
            }
        }
    }
    Ok(RsumReport {
        checked,
        violations,
        max_sum: rational::format(&max),
    })
}

/// `sum_p q(x, p) / p` for every `x` in an output table, in floating point.
pub fn soundness_sums(outputs: &BTreeMap<OutputKey, BigRational>) -> BTreeMap<u64, f64> {
    let mut out = BTreeMap::new();
    for ((x, p), q) in outputs {
        *out.entry(*x).or_insert(0.0) += to_f64(q) / p.value();
    }
    out
}

/// As [`soundness_sums`] but exact; `None` if any output probability is
/// irrational.
pub fn exact_soundness_sums(outputs: &BTreeMap<OutputKey, BigRational>) -> Option<BTreeMap<u64, BigRational>> {
    let mut out = BTreeMap::new();
    for ((x, p), q) in outputs {
        let p = p.as_exact()?;
        *out.entry(*x).or_insert_with(BigRational::zero) += q / p;
    }
    Some(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct XSoundness {
    pub x: u64,
    pub px_given_s: f64,
    /// `f_s(x)`, the top of the small band.
    pub f_s: f64,
    /// Bottom of the large band.
    pub large_from: f64,
    /// `sum_{p > f_s(x)} q(x, p | s) / p`.
    pub sum_above: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ShiftSoundness {
    pub s: i64,
    pub w: f64,
    pub pr_s: f64,
    pub pr_bad: f64,
    pub bad_bound: f64,
    pub sum_bound: f64,
    pub bad_ok: bool,
    pub sums_ok: bool,
    pub per_x: Vec<XSoundness>,
}

#[derive(Clone, Debug, Serialize)]
pub struct SoundnessDiagnostics {
    pub realization: usize,
    pub weight: String,
    pub shifts: Vec<ShiftSoundness>,
    pub pr_bad: f64,
    /// `sum_p Pr[(X, P) = (x, p) | not Bad] / p`.
    pub conditional_sums: BTreeMap<u64, f64>,
    pub theorem_bound: f64,
    pub theorem_ok: bool,
}

/// Per-shift soundness quantities for each realization of the prover. The
/// flags compare against the lemma constants; they are only guaranteed
/// under the paper's parameter assumptions.
pub fn soundness_diagnostics(
    params: &ProtocolParams,
    factory: &dyn ProverFactory,
    budget: u128,
) -> Result<Vec<SoundnessDiagnostics>> {
    let eps = params.eps;
    let band = ((params.gap_size as f64 / 2.0 - 1.0) * eps).exp2();
    let mut out = vec![];
    for (idx, (q, table)) in realization_tables(params, factory, budget)?.into_iter().enumerate() {
        let mut shifts = vec![];
        let mut pr_bad = 0.0;
        let mut good: BTreeMap<u64, f64> = BTreeMap::new();
        for (s, pr_s) in &table.shift_prob {
            let w = to_f64(&table.w[s]);
            let cond = &table.cond[s];
            let mut px: BTreeMap<u64, f64> = BTreeMap::new();
            for ((x, _), m) in cond {
                *px.entry(*x).or_insert(0.0) += to_f64(m);
            }
            let mut bad = 0.0;
            let mut sums: BTreeMap<u64, f64> = BTreeMap::new();
            for ((x, p), m) in cond {
                let fs = px[x] / band;
                let m = to_f64(m);
                if p.value() <= fs {
                    bad += m;
                } else {
                    *sums.entry(*x).or_insert(0.0) += m / p.value();
                    *good.entry(*x).or_insert(0.0) += to_f64(pr_s) * m / p.value();
                }
            }
            pr_bad += to_f64(pr_s) * bad;
            let bad_bound = 16.0 * eps / w;
            let sum_bound = (1.0 + 6.0 * eps) / w;
            let per_x: Vec<XSoundness> = px
                .iter()
                .map(|(&x, &p)| XSoundness {
                    x,
                    px_given_s: p,
                    f_s: p / band,
                    large_from: p * band,
                    sum_above: sums.get(&x).copied().unwrap_or(0.0),
                })
                .collect();
            shifts.push(ShiftSoundness {
                s: *s,
                w,
                pr_s: to_f64(pr_s),
                pr_bad: bad,
                bad_bound,
                sum_bound,
                bad_ok: bad <= bad_bound * (1.0 + FLOAT_SLACK),
                sums_ok: per_x.iter().all(|e| e.sum_above <= sum_bound * (1.0 + FLOAT_SLACK)),
                per_x,
            });
        }
        let not_bad = 1.0 - pr_bad;
        let conditional_sums: BTreeMap<u64, f64> = good
            .into_iter()
            .map(|(x, v)| (x, if not_bad > 0.0 { v / not_bad } else { 0.0 }))
            .collect();
        let theorem_bound = 1.0 + params.eps_prime + params.delta_prime;
        out.push(SoundnessDiagnostics {
            realization: idx,
            weight: rational::format(&q),
            theorem_ok: conditional_sums.values().all(|&v| v <= theorem_bound),
            shifts,
            pr_bad,
            conditional_sums,
            theorem_bound,
        });
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct ShiftCompleteness {
    pub s: i64,
    pub w: String,
    /// `x -> Pr[(X, P) = (x, P(x)) | S = s] * w(s) / P(x)` for `x` in
    /// `M ∩ M_s`.
    pub factors: BTreeMap<u64, String>,
    pub max_deviation: f64,
    /// Outputs the lemma says must have mass zero but do not.
    pub stray: Vec<(u64, String)>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompletenessDiagnostics {
    pub m_set: Vec<u64>,
    pub m_s: BTreeMap<i64, Vec<u64>>,
    pub partition_ok: bool,
    pub reject: String,
    pub reject_bound: f64,
    pub deviation_bound: f64,
    pub shifts: Vec<ShiftCompleteness>,
}

impl CompletenessDiagnostics {
    pub fn deviations_ok(&self) -> bool {
        self.shifts
            .iter()
            .all(|s| s.max_deviation <= self.deviation_bound && s.stray.is_empty())
    }
}

/// Conditional output masses of the honest prover against `P(x)/w(s)`.
pub fn completeness_diagnostics(
    params: &ProtocolParams,
    dist: &ExplicitDistribution,
    budget: u128,
) -> Result<CompletenessDiagnostics> {
    let prover = HonestProver::new(dist.clone(), params);
    let table = enumerate_deterministic(params, &prover, budget)?;
    let h = prover.histogram();
    let n_set: BTreeSet<usize> = verifier_round1(&h, params).unwrap_or_default().into_iter().collect();
    let buckets = bucket_lists(dist, params.eps, params.t);
    let layout = params.layout();
    let m_set: BTreeSet<u64> = n_set.iter().flat_map(|&i| buckets[i].iter().copied()).collect();
    let mut m_s = BTreeMap::new();
    for &s in &layout.shifts {
        let members: BTreeSet<u64> = (0..=params.t)
            .filter(|&i| layout.covered(s, i))
            .flat_map(|i| buckets[i].iter().copied())
            .collect();
        m_s.insert(s, members);
    }
    let partition_ok = m_set.iter().all(|x| {
        m_s.values().filter(|members| !members.contains(x)).count() == 1
    });
    let mut shifts = vec![];
    for s in table.shift_prob.keys() {
        let w = &table.w[s];
        let cond = &table.cond[s];
        let inside = &m_s[s];
        let mut factors = BTreeMap::new();
        let mut max_dev: f64 = 0.0;
        let mut stray = vec![];
        for ((x, p), mass) in cond {
            let px = dist.prob(*x);
            let exact = matches!(p, OutputProb::Exact(v) if *v == px);
            if exact && m_set.contains(x) && inside.contains(x) {
                let factor = mass * w / &px;
                max_dev = max_dev.max((to_f64(&factor) - 1.0).abs());
                factors.insert(*x, rational::format(&factor));
            } else if mass.is_positive() {
                stray.push((*x, rational::format(mass)));
            }
        }
        for x in m_set.intersection(inside) {
            if !factors.contains_key(x) {
                factors.insert(*x, "0/1".into());
                max_dev = max_dev.max(1.0);
            }
        }
        shifts.push(ShiftCompleteness {
            s: *s,
            w: rational::format(w),
            factors,
            max_deviation: max_dev,
            stray,
        });
    }
    Ok(CompletenessDiagnostics {
        m_set: m_set.into_iter().collect(),
        m_s: m_s.into_iter().map(|(s, v)| (s, v.into_iter().collect())).collect(),
        partition_ok,
        reject: rational::format(&table.reject_total()),
        reject_bound: 25.0 * params.eps,
        deviation_bound: 132.0 * params.eps,
        shifts,
    })
}

impl SoundnessDiagnostics {
    pub fn to_json(&self, n: u32) -> Value {
        let mut v = serde_json::to_value(self).expect("serializable");
        v["conditional_sums"] = self
            .conditional_sums
            .iter()
            .map(|(x, s)| (hex_of(*x, n), json!(s)))
            .collect::<serde_json::Map<_, _>>()
            .into();
        v
    }
}
