use std::collections::{BTreeMap, BTreeSet};

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::OutputKey;
use crate::dist::ExplicitDistribution;
use crate::protocol::OutputProb;
use crate::rational::ratio;

const X1: u64 = 0;
const X2: u64 = 1;

/// Output table over `{x1, x2} = {0, 1}` whose per-element sums
/// `sum_p q(x, p) / p` are both exactly 1, yet which no mixture of honest
/// samplers produces.
pub fn sum_one_table() -> BTreeMap<OutputKey, BigRational> {
    [
        ((X1, ratio(1, 2)), ratio(1, 4)),
        ((X1, ratio(1, 4)), ratio(1, 8)),
        ((X2, ratio(3, 4)), ratio(1, 2)),
        ((X2, ratio(3, 8)), ratio(1, 8)),
    ]
    .into_iter()
    .map(|((x, p), q)| ((x, OutputProb::Exact(p)), q))
    .collect()
}

/// Distributions on `{x1, x2}` whose masses are drawn from the probabilities
/// occurring in the table together with 0 and 1.
pub fn sum_one_candidates() -> Vec<ExplicitDistribution> {
    let mut values: BTreeSet<BigRational> = sum_one_table()
        .keys()
        .filter_map(|(_, p)| p.as_exact().cloned())
        .collect();
    values.insert(BigRational::zero());
    values.insert(BigRational::one());
    values
        .iter()
        .filter(|a| values.contains(&(BigRational::one() - *a)))
        .map(|a| {
            let b = BigRational::one() - a;
            let pairs = [(X1, a.clone()), (X2, b)].into_iter().filter(|(_, p)| p.is_positive());
            ExplicitDistribution::from_pairs(1, pairs).expect("sums to one")
        })
        .collect()
}

/// Outcome of the exhaustive mixture search.
#[derive(Clone, Debug)]
pub struct MixtureSearch {
    pub candidates: usize,
    pub subsets_checked: usize,
    /// `(candidate index, weight)` of a realizing mixture, if one exists.
    pub solution: Option<Vec<(usize, BigRational)>>,
}

/// Output table of a sampler that draws `x ~ P` and reports `(x, P(x))`.
fn honest_table(d: &ExplicitDistribution) -> BTreeMap<OutputKey, BigRational> {
    d.mass()
        .iter()
        .map(|(x, p)| ((*x, OutputProb::Exact(p.clone())), p.clone()))
        .collect()
}

/// Solves `A q = b` exactly for a full-column-rank `A`; `None` if the
/// columns are dependent or the system is inconsistent.
fn solve(mut a: Vec<Vec<BigRational>>, mut b: Vec<BigRational>) -> Option<Vec<BigRational>> {
    let cols = a.first().map_or(0, Vec::len);
    let mut row = 0;
    for col in 0..cols {
        let pivot = (row..a.len()).find(|&r| !a[r][col].is_zero())?;
        a.swap(row, pivot);
        b.swap(row, pivot);
        let inv = BigRational::one() / &a[row][col];
        for c in 0..cols {
            a[row][c] = &a[row][c] * &inv;
        }
        b[row] = &b[row] * &inv;
        for r in 0..a.len() {
            if r != row && !a[r][col].is_zero() {
                let factor = a[r][col].clone();
                for c in 0..cols {
                    let v = &factor * &a[row][c];
                    a[r][c] -= v;
                }
                let v = &factor * &b[row];
                b[r] -= v;
            }
        }
        row += 1;
    }
    if b[row..].iter().any(|v| !v.is_zero()) {
        return None;
    }
    Some(b[..cols].to_vec())
}

/// Searches for nonnegative weights `q_i` with `sum_i q_i H_i = target`,
/// `H_i` the honest table of candidate `i`. Every subset of candidates is
/// tried; a nonnegative solution, if any exists, is reached by a subset
/// with independent columns.
pub fn mixture_realizable(
    target: &BTreeMap<OutputKey, BigRational>,
    candidates: &[ExplicitDistribution],
) -> MixtureSearch {
    let tables: Vec<_> = candidates.iter().map(honest_table).collect();
    let keys: BTreeSet<OutputKey> = target
        .keys()
        .chain(tables.iter().flat_map(|t| t.keys()))
        .cloned()
        .collect();
    let zero = BigRational::zero();
    let rhs: Vec<BigRational> = keys.iter().map(|k| target.get(k).unwrap_or(&zero).clone()).collect();
    let mut checked = 0;
    for subset in 1u64..1 << candidates.len() {
        let members: Vec<usize> = (0..candidates.len()).filter(|i| subset >> i & 1 == 1).collect();
        checked += 1;
        let a: Vec<Vec<BigRational>> = keys
            .iter()
            .map(|k| members.iter().map(|&i| tables[i].get(k).unwrap_or(&zero).clone()).collect())
            .collect();
        if let Some(q) = solve(a, rhs.clone()) {
            if q.iter().all(|v| !v.is_negative()) {
                return MixtureSearch {
                    candidates: candidates.len(),
                    subsets_checked: checked,
                    solution: Some(members.into_iter().zip(q).collect()),
                };
            }
        }
    }
    MixtureSearch {
        candidates: candidates.len(),
        subsets_checked: checked,
        solution: None,
    }
}
