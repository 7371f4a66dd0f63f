//! Exact verifier output distributions for tiny configurations, computed by
//! enumerating every verifier coin including the whole hash family, and
//! the structural quantities derived from them.

mod diagnostics;
mod naive;
mod sum_one;
mod structured;

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::Zero;
use serde_json::{json, Value};

use crate::dist::hex_of;
use crate::protocol::{OutputProb, ProtocolParams, ProverFactory, RejectReason};
use crate::rational;
use crate::Result;

pub use diagnostics::{
    compute_r, completeness_diagnostics, soundness_diagnostics, exact_soundness_sums, soundness_sums, verify_qvsr,
    verify_rsum, CompletenessDiagnostics, QvsrReport, QvsrViolation, RsumReport, ShiftCompleteness,
    ShiftSoundness, SoundnessDiagnostics,
};
pub use naive::naive_output_distribution;
pub use sum_one::{mixture_realizable, sum_one_candidates, sum_one_table, MixtureSearch};
pub use structured::{enumerate_deterministic, DeterministicTable};

/// `(x, p)` output key.
pub type OutputKey = (u64, OutputProb);

/// Guard on the number of enumerated branches.
pub const DEFAULT_BUDGET: u128 = 1_000_000_000;

#[derive(Clone, Debug)]
pub struct ExactReport {
    pub n: u32,
    pub outputs: BTreeMap<OutputKey, BigRational>,
    pub reject: BTreeMap<RejectReason, BigRational>,
    pub branches: u128,
}

impl ExactReport {
    pub fn reject_total(&self) -> BigRational {
        rational::sum(self.reject.values())
    }

    pub fn total(&self) -> BigRational {
        rational::sum(self.outputs.values()) + self.reject_total()
    }

    /// `Pr[X = x]`.
    pub fn marginal(&self) -> BTreeMap<u64, BigRational> {
        let mut out = BTreeMap::new();
        for ((x, _), q) in &self.outputs {
            *out.entry(*x).or_insert_with(BigRational::zero) += q;
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let outputs: Vec<Value> = self
            .outputs
            .iter()
            .map(|((x, p), q)| {
                json!({
                    "x": hex_of(*x, self.n),
                    "p": p,
                    "mass": rational::format(q),
                })
            })
            .collect();
        let reject: serde_json::Map<String, Value> = self
            .reject
            .iter()
            .map(|(r, q)| (r.code().to_string(), Value::String(rational::format(q))))
            .collect();
        json!({
            "outputs": outputs,
            "reject": rational::format(&self.reject_total()),
            "reject_by_reason": reject,
            "branches": self.branches.to_string(),
        })
    }
}

/// Per-realization tables of a prover, each with its mixing weight.
pub fn realization_tables(
    params: &ProtocolParams,
    factory: &dyn ProverFactory,
    budget: u128,
) -> Result<Vec<(BigRational, DeterministicTable)>> {
    factory
        .realizations(params)
        .into_iter()
        .map(|(q, prover)| Ok((q, enumerate_deterministic(params, prover.as_ref(), budget)?)))
        .collect()
}

/// `Pr[(X, P) = (x, p)]` and the reject mass, exactly.
pub fn exact_output_distribution(
    params: &ProtocolParams,
    factory: &dyn ProverFactory,
    budget: u128,
) -> Result<ExactReport> {
    let mut report = ExactReport {
        n: params.n,
        outputs: BTreeMap::new(),
        reject: BTreeMap::new(),
        branches: 0,
    };
    for (q, table) in realization_tables(params, factory, budget)? {
        for (key, mass) in table.outputs {
            *report.outputs.entry(key).or_insert_with(BigRational::zero) += mass * &q;
        }
        for (reason, mass) in table.reject {
            *report.reject.entry(reason).or_insert_with(BigRational::zero) += mass * &q;
        }
        report.branches += table.branches;
    }
    Ok(report)
}
