//! The family `H(n, m)` of functions `x -> low_m(a x^2 + b x + c)` over
//! `GF(2^n)`. Any three distinct inputs map to independent uniform outputs.

mod field;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::dist::{hex_of, mask, parse_hex};
use crate::{Error, Result};

pub use field::{gf2n_inv, gf2n_mul, gf2n_pow, reduction_low, IRREDUCIBLE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct HashFunction {
    pub n: u32,
    pub m: u32,
    pub a: u64,
    pub b: u64,
    pub c: u64,
}

impl HashFunction {
    pub fn new(n: u32, m: u32, a: u64, b: u64, c: u64) -> Result<Self> {
        if n == 0 || n > 64 || m > n {
            return Err(Error::Width { n, m });
        }
        let k = mask(n);
        if a > k || b > k || c > k {
            return Err(Error::InvalidParams(format!(
                "hash coefficients do not fit in {n} bits"
            )));
        }
        Ok(Self { n, m, a, b, c })
    }

    /// Member number `index` of the family, `index < 2^{3n}`, with `a` in the
    /// high bits. Used by exhaustive enumeration.
    pub fn from_index(n: u32, m: u32, index: u64) -> Self {
        debug_assert!(3 * n < 64);
        let k = mask(n);
        Self {
            n,
            m,
            a: (index >> (2 * n)) & k,
            b: (index >> n) & k,
            c: index & k,
        }
    }

    pub fn eval(&self, x: u64) -> u64 {
        if self.m == 0 {
            return 0;
        }
        let n = self.n;
        let y = gf2n_mul(gf2n_mul(self.a, x, n) ^ self.b, x, n) ^ self.c;
        y & mask(self.m)
    }

    pub fn hits_zero(&self, x: u64) -> bool {
        self.eval(x) == 0
    }
}

#[derive(Serialize, Deserialize)]
struct HashJson {
    n: u32,
    m: u32,
    a: String,
    b: String,
    c: String,
}

impl Serialize for HashFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        HashJson {
            n: self.n,
            m: self.m,
            a: hex_of(self.a, self.n),
            b: hex_of(self.b, self.n),
            c: hex_of(self.c, self.n),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HashFunction {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let raw = HashJson::deserialize(d)?;
        let coef = |s: &str| parse_hex(s).map_err(D::Error::custom);
        HashFunction::new(raw.n, raw.m, coef(&raw.a)?, coef(&raw.b)?, coef(&raw.c)?)
            .map_err(D::Error::custom)
    }
}

/// Draws `a`, `b`, `c` independently and uniformly from `GF(2^n)`.
pub fn sample_hash<R: RngCore + ?Sized>(n: u32, m: u32, rng: &mut R) -> Result<HashFunction> {
    if n == 0 || n > 64 || m > n {
        return Err(Error::Width { n, m });
    }
    let k = mask(n);
    let a = rng.next_u64() & k;
    let b = rng.next_u64() & k;
    let c = rng.next_u64() & k;
    HashFunction::new(n, m, a, b, c)
}

#[derive(Clone, Debug, Serialize)]
pub struct KwiseFailure {
    pub inputs: Vec<u64>,
    pub outputs: Vec<u64>,
    pub count: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct KwiseReport {
    pub n: u32,
    pub m: u32,
    pub k: usize,
    pub family_size: u64,
    pub expected: u64,
    pub tuples_checked: u64,
    pub failures: Vec<KwiseFailure>,
}

impl KwiseReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn distinct_tuples(universe: u64, k: usize) -> Vec<Vec<u64>> {
    fn rec(start: u64, universe: u64, k: usize, cur: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for x in start..universe {
            cur.push(x);
            rec(x + 1, universe, k, cur, out);
            cur.pop();
        }
    }
    let mut out = vec![];
    rec(0, universe, k, &mut vec![], &mut out);
    out
}

/// Counts, for every set of `k` distinct inputs and every output tuple, how
/// many members of `H(n, m)` produce it, and reports each count that differs
/// from `2^{3n} / 2^{km}`.
///
/// Only unordered input sets are visited; the count for any ordering is the
/// count for the matching permutation of outputs.
pub fn verify_kwise_exhaustive(n: u32, m: u32, k: usize) -> Result<KwiseReport> {
    if m > n || n == 0 {
        return Err(Error::Width { n, m });
    }
    if n > 5 || k == 0 || k as u64 > (1u64 << n) {
        return Err(Error::InvalidParams(format!(
            "exhaustive check needs n <= 5 and 1 <= k <= 2^n (got n={n}, k={k})"
        )));
    }
    let family_size = 1u64 << (3 * n);
    let cells = 1usize << (k as u32 * m);
    let expected = family_size >> (k as u32 * m);
    let tuples = distinct_tuples(1u64 << n, k);
    let mut failures = vec![];
    for inputs in &tuples {
        let mut counts = vec![0u64; cells];
        for idx in 0..family_size {
            let h = HashFunction::from_index(n, m, idx);
            let cell = inputs
                .iter()
                .fold(0usize, |acc, &x| (acc << m) | h.eval(x) as usize);
            counts[cell] += 1;
        }
        for (cell, &count) in counts.iter().enumerate() {
            if count != expected {
                let outputs = (0..k)
                    .rev()
                    .map(|p| ((cell >> (p as u32 * m)) & ((1usize << m) - 1)) as u64)
                    .collect();
                failures.push(KwiseFailure {
                    inputs: inputs.clone(),
                    outputs,
                    count,
                });
            }
        }
    }
    Ok(KwiseReport {
        n,
        m,
        k,
        family_size,
        expected,
        tuples_checked: tuples.len() as u64,
        failures,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MixingReport {
    pub set_size: usize,
    pub m: u32,
    pub gamma: f64,
    pub trials: u64,
    pub deviations: u64,
    pub frequency: f64,
    /// `2^m / (gamma^2 |B|)` (with `|B| - 1` for a pivot inside `B`).
    pub bound: f64,
    pub pivot: Option<u64>,
    /// Hash draws discarded while conditioning on `h(pivot) = 0^m`.
    pub rejected_draws: u64,
}

/// Fraction of sampled `h` for which `|{y in B : h(y) = 0^m}|` leaves
/// `(1 +- gamma) |B| / 2^m`. With a pivot `x`, `h` is drawn conditioned on
/// `h(x) = 0^m` by rejection; when `x` is in `B` the target becomes
/// `1 + (1 +- gamma)(|B| - 1) / 2^m`.
pub fn mixing_experiment<R: RngCore + ?Sized>(
    set: &[u64],
    n: u32,
    m: u32,
    gamma: f64,
    trials: u64,
    pivot: Option<u64>,
    rng: &mut R,
) -> Result<MixingReport> {
    if set.is_empty() || trials == 0 {
        return Err(Error::InvalidParams("need a nonempty set and trials >= 1".into()));
    }
    let pivot_inside = pivot.is_some_and(|x| set.contains(&x));
    let (base, rest) = if pivot_inside {
        (1.0, (set.len() - 1) as f64)
    } else {
        (0.0, set.len() as f64)
    };
    let scale = (m as f64).exp2();
    let mean = rest / scale;
    let (lo, hi) = (base + (1.0 - gamma) * mean, base + (1.0 + gamma) * mean);
    let mut deviations = 0;
    let mut rejected_draws = 0;
    for _ in 0..trials {
        let h = loop {
            let h = sample_hash(n, m, rng)?;
            match pivot {
                Some(x) if !h.hits_zero(x) => rejected_draws += 1,
                _ => break h,
            }
        };
        let count = set.iter().filter(|&&y| h.hits_zero(y)).count() as f64;
        if count < lo || count > hi {
            deviations += 1;
        }
    }
    let bound = if rest > 0.0 {
        scale / (gamma * gamma * rest)
    } else {
        0.0
    };
    Ok(MixingReport {
        set_size: set.len(),
        m,
        gamma,
        trials,
        deviations,
        frequency: deviations as f64 / trials as f64,
        bound,
        pivot,
        rejected_draws,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    #[test]
    fn eval_examples() {
        let zero = HashFunction::new(4, 4, 0, 0, 0).unwrap();
        assert!((0..16).all(|x| zero.eval(x) == 0));
        let id = HashFunction::new(4, 4, 0, 1, 0).unwrap();
        assert!((0..16).all(|x| id.eval(x) == x));
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        let h = sample_hash(4, 0, &mut rng).unwrap();
        assert!((0..16).all(|x| h.eval(x) == 0));
    }

    #[test]
    fn sampling_is_deterministic_and_width_checked() {
        let a = sample_hash(40, 7, &mut ChaCha20Rng::seed_from_u64(9)).unwrap();
        let b = sample_hash(40, 7, &mut ChaCha20Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            sample_hash(3, 4, &mut ChaCha20Rng::seed_from_u64(9)),
            Err(Error::Width { n: 3, m: 4 })
        ));
    }

    #[test]
    fn json_round_trip() {
        let h = HashFunction::new(12, 5, 0xabc, 0x001, 0x7f0).unwrap();
        let v = serde_json::to_value(h).unwrap();
        assert_eq!(v["a"], "abc");
        assert_eq!(v["b"], "001");
        let back: HashFunction = serde_json::from_value(v).unwrap();
        assert_eq!(back, h);
    }

    #[test]
    fn three_wise_counts() {
        let r = verify_kwise_exhaustive(2, 1, 3).unwrap();
        assert!(r.passed());
        assert_eq!(r.expected, 8);
        let r = verify_kwise_exhaustive(3, 1, 3).unwrap();
        assert!(r.passed());
        assert_eq!(r.expected, 64);
        let r = verify_kwise_exhaustive(3, 2, 1).unwrap();
        assert!(r.passed());
        assert_eq!(r.expected, 512 / 4);
    }

    #[test]
    fn four_wise_fails() {
        // Degree-2 polynomials cannot be 4-wise independent.
        let r = verify_kwise_exhaustive(2, 2, 4).unwrap();
        assert!(!r.passed());
    }

    #[test]
    fn independent_count_for_one_triple() {
        // Direct count without the packing logic above.
        let (x, y, z) = (1u64, 5, 6);
        for targets in 0..8u64 {
            let (tx, ty, tz) = (targets & 1, (targets >> 1) & 1, (targets >> 2) & 1);
            let mut hits = 0;
            for a in 0..8 {
                for b in 0..8 {
                    for c in 0..8 {
                        let h = HashFunction::new(3, 1, a, b, c).unwrap();
                        if h.eval(x) == tx && h.eval(y) == ty && h.eval(z) == tz {
                            hits += 1;
                        }
                    }
                }
            }
            assert_eq!(hits, 64);
        }
    }

    #[test]
    fn mixing_trivial_cases() {
        let set: Vec<u64> = (0..100).collect();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        let r = mixing_experiment(&set, 8, 0, 0.5, 50, None, &mut rng).unwrap();
        assert_eq!(r.deviations, 0);
        let r = mixing_experiment(&set, 8, 2, 0.5, 200, Some(200), &mut rng).unwrap();
        assert!(r.rejected_draws > 0);
        assert!(r.frequency <= r.bound + 0.1);
    }
}
