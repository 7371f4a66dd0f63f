use std::collections::BTreeMap;

use coinpress::adversaries::{InflatingFactory, MixtureFactory, OverlapFactory, RejectingFactory};
use coinpress::dist::ExplicitDistribution;
use coinpress::oracle::{
    compute_r, completeness_diagnostics, enumerate_deterministic, exact_output_distribution,
    exact_soundness_sums, naive_output_distribution, soundness_diagnostics, verify_qvsr, verify_rsum,
    DEFAULT_BUDGET,
};
use coinpress::protocol::{HonestFactory, HonestProver, OutputProb, ProtocolParams, ProverFactory};
use coinpress::rational::{int, ratio};
use num_rational::BigRational;
use num_traits::{One, Zero};

fn abc3() -> ExplicitDistribution {
    ExplicitDistribution::from_pairs(3, [(1, ratio(1, 2)), (2, ratio(1, 4)), (5, ratio(1, 4))]).unwrap()
}

fn skewed2() -> ExplicitDistribution {
    ExplicitDistribution::from_pairs(2, [(0, ratio(1, 2)), (1, ratio(1, 3)), (3, ratio(1, 6))]).unwrap()
}

fn uniform3() -> ExplicitDistribution {
    ExplicitDistribution::uniform(3, &[0, 1, 2, 3, 4, 5, 6, 7]).unwrap()
}

/// Small configurations, some with a negative sampling gap so the hash
/// width is positive.
fn configs() -> Vec<(ProtocolParams, ExplicitDistribution)> {
    vec![
        (ProtocolParams::raw(3, 1.0, 0.5, 6, 1, 2, -1.0).unwrap(), abc3()),
        (ProtocolParams::raw(3, 1.0, 0.5, 6, 1, 2, 0.0).unwrap(), uniform3()),
        (ProtocolParams::raw(2, 0.5, 0.5, 8, 1, 2, -1.5).unwrap(), skewed2()),
        (ProtocolParams::raw(3, 0.5, 0.5, 10, 2, 4, 0.0).unwrap(), abc3()),
    ]
}

fn provers(dist: &ExplicitDistribution) -> Vec<Box<dyn ProverFactory>> {
    vec![
        Box::new(HonestFactory::new(dist.clone())),
        Box::new(MixtureFactory::new(vec![(ratio(1, 2), dist.clone()), (ratio(1, 2), uniform_like(dist))]).unwrap()),
        Box::new(RejectingFactory::new(dist.clone(), ratio(1, 3)).unwrap()),
        Box::new(InflatingFactory { dist: dist.clone(), shift: 1 }),
        Box::new(OverlapFactory { dist: dist.clone() }),
    ]
}

fn uniform_like(dist: &ExplicitDistribution) -> ExplicitDistribution {
    let n = dist.n();
    ExplicitDistribution::uniform(n, &(0..1u64 << n).collect::<Vec<_>>()).unwrap()
}

#[test]
fn structured_agrees_with_naive() {
    for (params, dist) in configs() {
        for factory in provers(&dist) {
            for (_, prover) in factory.realizations(&params) {
                let table = enumerate_deterministic(&params, prover.as_ref(), DEFAULT_BUDGET).unwrap();
                let (outputs, reject) = naive_output_distribution(&params, prover.as_ref(), DEFAULT_BUDGET).unwrap();
                assert_eq!(table.outputs, outputs, "{} outputs", factory.describe());
                assert_eq!(table.reject_total(), reject, "{} reject", factory.describe());
            }
        }
    }
}

#[test]
fn total_mass_is_one() {
    for (params, dist) in configs() {
        for factory in provers(&dist) {
            let report = exact_output_distribution(&params, factory.as_ref(), DEFAULT_BUDGET).unwrap();
            assert_eq!(report.total(), BigRational::one(), "{}", factory.describe());
        }
    }
}

#[test]
fn honest_outputs_carry_true_probability() {
    for (params, dist) in configs() {
        let report = exact_output_distribution(&params, &HonestFactory::new(dist.clone()), DEFAULT_BUDGET).unwrap();
        for (x, p) in report.outputs.keys() {
            assert_eq!(p, &OutputProb::Exact(dist.prob(*x)));
        }
    }
}

#[test]
fn trivial_fallback_reproduces_distribution() {
    let params = ProtocolParams::trivial(3).unwrap();
    let dist = abc3();
    let report = exact_output_distribution(&params, &HonestFactory::new(dist.clone()), DEFAULT_BUDGET).unwrap();
    assert!(report.reject_total().is_zero());
    let expect: BTreeMap<u64, BigRational> = dist.mass().clone();
    assert_eq!(report.marginal(), expect);
}

#[test]
fn point_mass_has_single_output_and_no_bad_event() {
    let params = ProtocolParams::raw(3, 1.0, 0.5, 6, 1, 2, -1.0).unwrap();
    let dist = ExplicitDistribution::point_mass(3, 6).unwrap();
    let factory = HonestFactory::new(dist);
    let report = exact_output_distribution(&params, &factory, DEFAULT_BUDGET).unwrap();
    for (x, p) in report.outputs.keys() {
        assert_eq!((*x, p.clone()), (6, OutputProb::Exact(int(1))));
    }
    let diag = soundness_diagnostics(&params, &factory, DEFAULT_BUDGET).unwrap();
    assert_eq!(diag[0].pr_bad, 0.0);
}

#[test]
fn qvsr_and_rsum_hold_for_every_prover() {
    for (params, dist) in configs() {
        for factory in provers(&dist) {
            let q = verify_qvsr(&params, factory.as_ref(), DEFAULT_BUDGET).unwrap();
            assert!(q.passed(), "{}: {:?}", factory.describe(), &q.violations[..q.violations.len().min(3)]);
            if factory.describe() == "honest" {
                assert!(q.checked > 0);
            }
            let r = verify_rsum(&params, factory.as_ref(), DEFAULT_BUDGET).unwrap();
            assert!(r.passed(), "{}: {:?}", factory.describe(), r.violations);
        }
    }
}

#[test]
fn standalone_r_matches_table() {
    for (params, dist) in configs().into_iter().take(2) {
        let prover = HonestProver::new(dist.clone(), &params);
        let table = enumerate_deterministic(&params, &prover, DEFAULT_BUDGET).unwrap();
        for (s, rs) in &table.r {
            for ((x, j), r) in rs {
                assert_eq!(&compute_r(&params, &prover, *s, *x, *j), r);
            }
        }
    }
}

#[test]
fn mixture_sums_bounded_by_one() {
    for (params, dist) in configs() {
        let factory = MixtureFactory::new(vec![(ratio(1, 3), dist.clone()), (ratio(2, 3), uniform_like(&dist))]).unwrap();
        let report = exact_output_distribution(&params, &factory, DEFAULT_BUDGET).unwrap();
        let sums = exact_soundness_sums(&report.outputs).unwrap();
        for v in sums.values() {
            assert!(*v <= BigRational::one());
        }
    }
}

#[test]
fn completeness_partition_and_zero_outside() {
    for (params, dist) in configs() {
        let diag = completeness_diagnostics(&params, &dist, DEFAULT_BUDGET).unwrap();
        assert!(diag.partition_ok);
        for s in &diag.shifts {
            assert!(s.stray.is_empty(), "shift {}: {:?}", s.s, s.stray);
        }
    }
}

