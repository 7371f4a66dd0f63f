use num_bigint::RandBigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use rand::{Rng, RngCore};

use super::messages::Coins;
use crate::hash3::{sample_hash, HashFunction};
use crate::rational;

/// Which verifier draw is being made.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoinKind {
    Shift,
    Interval,
    Element,
    List,
}

/// Source of verifier randomness. Weighted draws return the label of the
/// chosen item; `None` means every weight is zero.
pub trait CoinSource {
    fn weighted(&mut self, kind: CoinKind, items: &[(BigRational, i64)]) -> Option<i64>;
    fn uniform(&mut self, len: usize) -> usize;
    fn hash(&mut self, n: u32, m: u32) -> HashFunction;
}

/// Index drawn with probability `w_i / sum(w)`, exactly: the weights are
/// scaled to integers over a common denominator and a uniform integer below
/// their sum picks the slot. `None` when all weights are zero.
pub fn weighted_index<R: RngCore + ?Sized>(weights: &[BigRational], rng: &mut R) -> Option<usize> {
    assert!(weights.iter().all(|w| !w.is_negative()), "negative weight");
    let nums = rational::common_numerators(weights);
    let total = nums.iter().fold(num_bigint::BigUint::zero(), |a, b| a + b);
    if total.is_zero() {
        return None;
    }
    let mut u = rng.gen_biguint_below(&total);
    for (i, w) in nums.iter().enumerate() {
        if &u < w {
            return Some(i);
        }
        u -= w;
    }
    unreachable!("u below total")
}

/// `W({(w_i, v_i)})`: a value drawn with probability proportional to its
/// weight.
pub fn weighted_choice<'a, T, R: RngCore + ?Sized>(
    items: &'a [(BigRational, T)],
    rng: &mut R,
) -> Option<&'a T> {
    let weights: Vec<BigRational> = items.iter().map(|(w, _)| w.clone()).collect();
    weighted_index(&weights, rng).map(|i| &items[i].1)
}

pub struct RandomCoins<'a, R: RngCore + ?Sized> {
    rng: &'a mut R,
}

impl<'a, R: RngCore + ?Sized> RandomCoins<'a, R> {
    pub fn new(rng: &'a mut R) -> Self {
        Self { rng }
    }
}

impl<R: RngCore + ?Sized> CoinSource for RandomCoins<'_, R> {
    fn weighted(&mut self, _kind: CoinKind, items: &[(BigRational, i64)]) -> Option<i64> {
        weighted_choice(items, self.rng).copied()
    }

    fn uniform(&mut self, len: usize) -> usize {
        self.rng.gen_range(0..len)
    }

    fn hash(&mut self, n: u32, m: u32) -> HashFunction {
        sample_hash(n, m, self.rng).expect("verifier checks m <= n first")
    }
}

/// Plays back the draws stored in a transcript.
pub struct ReplayCoins {
    coins: Coins,
}

impl ReplayCoins {
    pub fn new(coins: Coins) -> Self {
        Self { coins }
    }
}

impl CoinSource for ReplayCoins {
    fn weighted(&mut self, kind: CoinKind, items: &[(BigRational, i64)]) -> Option<i64> {
        let recorded = match kind {
            CoinKind::Shift => self.coins.s,
            CoinKind::Interval => self.coins.k.map(|k| k as i64),
            CoinKind::Element => self.coins.j.map(|j| j as i64),
            CoinKind::List => self.coins.list_index.map(|i| i as i64),
        };
        let v = recorded?;
        items
            .iter()
            .any(|(w, label)| *label == v && w.is_positive())
            .then_some(v)
    }

    fn uniform(&mut self, len: usize) -> usize {
        let i = self.coins.x_index.expect("recorded element index");
        assert!(i < len, "recorded index out of range");
        i
    }

    fn hash(&mut self, n: u32, m: u32) -> HashFunction {
        let f = self.coins.f.expect("recorded hash function");
        assert_eq!((f.n, f.m), (n, m), "recorded hash has other widths");
        f
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn weighted_choice_frequencies() {
        let items = vec![(int(2), 'a'), (int(1), 'b'), (int(1), 'c')];
        let mut rng = ChaCha20Rng::seed_from_u64(11);
        let trials = 40_000;
        let mut counts = [0usize; 3];
        for _ in 0..trials {
            match weighted_choice(&items, &mut rng).unwrap() {
                'a' => counts[0] += 1,
                'b' => counts[1] += 1,
                _ => counts[2] += 1,
            }
        }
        // Hoeffding band at alpha = 1e-6.
        let band = ((2.0f64 / 1e-6).ln() / (2.0 * trials as f64)).sqrt();
        let f = |c: usize| c as f64 / trials as f64;
        assert!((f(counts[0]) - 0.5).abs() < band);
        assert!((f(counts[1]) - 0.25).abs() < band);
        assert!((f(counts[2]) - 0.25).abs() < band);
    }

    #[test]
    fn degenerate_and_single() {
        let mut rng = ChaCha20Rng::seed_from_u64(0);
        assert_eq!(weighted_choice(&[(int(0), 1), (int(0), 2)], &mut rng), None);
        assert_eq!(weighted_choice(&[(ratio(1, 7), 9)], &mut rng), Some(&9));
        assert_eq!(weighted_choice(&[(int(0), 1), (ratio(1, 3), 2)], &mut rng), Some(&2));
    }

    #[test]
    fn deterministic_given_seed() {
        let items: Vec<_> = (0..20).map(|i| (ratio(i + 1, 37), i)).collect();
        let a: Vec<_> = {
            let mut rng = ChaCha20Rng::seed_from_u64(5);
            (0..50).map(|_| *weighted_choice(&items, &mut rng).unwrap()).collect()
        };
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let b: Vec<_> = (0..50).map(|_| *weighted_choice(&items, &mut rng).unwrap()).collect();
        assert_eq!(a, b);
    }
}
