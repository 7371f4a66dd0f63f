use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::OutputKey;
use crate::hash3::HashFunction;
use crate::protocol::{run_with_coins, CoinKind, CoinSource, Outcome, Prover, ProtocolParams};
use crate::rational;
use crate::{Error, Result};

/// Walks the tree of verifier coin draws depth first. Each call to the
/// protocol follows `path` and extends it with zeros; `advance` moves to the
/// next leaf like an odometer.
struct TreeCoins {
    path: Vec<usize>,
    arity: Vec<usize>,
    depth: usize,
    weight: BigRational,
}

impl TreeCoins {
    fn new() -> Self {
        Self {
            path: vec![],
            arity: vec![],
            depth: 0,
            weight: BigRational::one(),
        }
    }

    fn take(&mut self, arity: usize) -> usize {
        if self.depth == self.path.len() {
            self.path.push(0);
            self.arity.push(arity);
        }
        debug_assert_eq!(self.arity[self.depth], arity);
        let c = self.path[self.depth];
        self.depth += 1;
        c
    }

    fn advance(&mut self) -> bool {
        self.path.truncate(self.depth);
        self.arity.truncate(self.depth);
        while let Some(last) = self.path.last_mut() {
            *last += 1;
            if *last < *self.arity.last().unwrap() {
                self.depth = 0;
                self.weight = BigRational::one();
                return true;
            }
            self.path.pop();
            self.arity.pop();
        }
        false
    }
}

impl CoinSource for TreeCoins {
    fn weighted(&mut self, _kind: CoinKind, items: &[(BigRational, i64)]) -> Option<i64> {
        let support: Vec<&(BigRational, i64)> = items.iter().filter(|(w, _)| w.is_positive()).collect();
        if support.is_empty() {
            return None;
        }
        let total = rational::sum(support.iter().map(|(w, _)| w));
        let (w, label) = support[self.take(support.len())];
        self.weight *= w / total;
        Some(*label)
    }

    fn uniform(&mut self, len: usize) -> usize {
        let c = self.take(len);
        self.weight /= BigRational::from_integer(BigInt::from(len));
        c
    }

    fn hash(&mut self, n: u32, m: u32) -> HashFunction {
        let size = 1usize << (3 * n);
        let c = self.take(size);
        self.weight /= BigRational::from_integer(BigInt::from(size));
        HashFunction::from_index(n, m, c as u64)
    }
}

/// Output masses and total reject mass, found by running the full protocol
/// once per leaf of the coin tree.
pub fn naive_output_distribution(
    params: &ProtocolParams,
    prover: &dyn Prover,
    budget: u128,
) -> Result<(BTreeMap<OutputKey, BigRational>, BigRational)> {
    if 3 * params.n > 36 {
        return Err(Error::BudgetExceeded {
            needed: 1u128 << (3 * params.n),
            budget,
        });
    }
    let mut coins = TreeCoins::new();
    let mut outputs = BTreeMap::new();
    let mut reject = BigRational::zero();
    let mut leaves: u128 = 0;
    loop {
        let t = run_with_coins(params, prover, &mut coins, 0, None);
        match t.outcome {
            Outcome::Output { x, p } => {
                *outputs.entry((x, p)).or_insert_with(BigRational::zero) += &coins.weight;
            }
            Outcome::Reject { .. } => reject += &coins.weight,
        }
        leaves += 1;
        if leaves > budget {
            return Err(Error::BudgetExceeded {
                needed: leaves,
                budget,
            });
        }
        if !coins.advance() {
            break;
        }
    }
    Ok((outputs, reject))
}
