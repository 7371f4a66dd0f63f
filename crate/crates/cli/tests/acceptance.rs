//! One line per acceptance criterion, then a single assertion over all of
//! them so a failing criterion does not hide the others.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::Command;
use std::time::Instant;

use coinpress::adversaries::{InflatingFactory, MixtureFactory, OverlapFactory};
use coinpress::dist::{hex_of, ExplicitDistribution};
use coinpress::harness::{estimate_output_distribution, hoeffding_half_width, Simulation};
use coinpress::hash3::{mixing_experiment, verify_kwise_exhaustive};
use coinpress::ip2am::{
    bounds_calculator, sampling_params, transform_estimate, HonestTransformProver, RandomAnswerProver,
    ToyHonestProver, ToyMultiset, TransformProver,
};
use coinpress::oracle::{
    exact_output_distribution, exact_soundness_sums, mixture_realizable, sum_one_candidates, sum_one_table,
    verify_qvsr, verify_rsum, DEFAULT_BUDGET,
};
use coinpress::protocol::{HonestFactory, Outcome, OutputProb, ProtocolParams, ProverFactory};
use coinpress::rational::{ratio, to_f64};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

type Check = fn() -> Result<String, String>;

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn abc3() -> ExplicitDistribution {
    ExplicitDistribution::from_pairs(3, [(1, ratio(1, 2)), (2, ratio(1, 4)), (5, ratio(1, 4))]).unwrap()
}

fn skewed2() -> ExplicitDistribution {
    ExplicitDistribution::from_pairs(2, [(0, ratio(1, 2)), (1, ratio(1, 3)), (3, ratio(1, 6))]).unwrap()
}

fn uniform(n: u32) -> ExplicitDistribution {
    ExplicitDistribution::uniform(n, &(0..1u64 << n).collect::<Vec<_>>()).unwrap()
}

fn tiny_configs() -> Vec<(ProtocolParams, ExplicitDistribution)> {
    vec![
        (ProtocolParams::raw(3, 1.0, 0.5, 6, 1, 2, -1.0).unwrap(), abc3()),
        (ProtocolParams::raw(3, 1.0, 0.5, 6, 1, 2, 0.0).unwrap(), uniform(3)),
        (ProtocolParams::raw(2, 0.5, 0.5, 8, 1, 2, -1.5).unwrap(), skewed2()),
        (ProtocolParams::raw(3, 0.5, 0.5, 10, 2, 4, 0.0).unwrap(), abc3()),
    ]
}

fn kwise() -> Result<String, String> {
    let mut checked = 0;
    for n in 2..=4 {
        for m in 1..=2 {
            let r = verify_kwise_exhaustive(n, m, 3).map_err(|e| e.to_string())?;
            ensure(r.passed(), format!("n={n} m={m}: {} failing cells", r.failures.len()))?;
            checked += r.tuples_checked;
        }
    }
    Ok(format!("{checked} input triples, every output triple hit |F|/2^(3m) times"))
}

fn mixing() -> Result<String, String> {
    let set: Vec<u64> = (0..1u64 << 12).map(|i| i * 7 + 3).collect();
    let mut rng = ChaCha20Rng::seed_from_u64(2024);
    let trials = 10_000u64;
    let r = mixing_experiment(&set, 16, 6, 0.5, trials, None, &mut rng).map_err(|e| e.to_string())?;
    let bound = 1.0 / 16.0;
    let slack = 3.0 * (bound * (1.0 - bound) / trials as f64).sqrt();
    ensure((r.bound - bound).abs() < 1e-15, "bound is not 1/16")?;
    ensure(
        r.frequency <= bound + slack,
        format!("deviation frequency {} > {}", r.frequency, bound + slack),
    )?;
    Ok(format!("deviation frequency {:.4} <= {:.4}", r.frequency, bound + slack))
}

fn structural() -> Result<String, String> {
    let mut checked = 0;
    for (params, dist) in tiny_configs() {
        let provers: Vec<Box<dyn ProverFactory>> = vec![
            Box::new(HonestFactory::new(dist.clone())),
            Box::new(MixtureFactory::new(vec![(ratio(1, 2), dist.clone()), (ratio(1, 2), uniform(dist.n()))]).unwrap()),
            Box::new(InflatingFactory { dist: dist.clone(), shift: 1 }),
            Box::new(OverlapFactory { dist: dist.clone() }),
        ];
        for f in provers {
            let q = verify_qvsr(&params, f.as_ref(), DEFAULT_BUDGET).map_err(|e| e.to_string())?;
            ensure(q.passed(), format!("{}: {} qvsr violations", f.describe(), q.violations.len()))?;
            let r = verify_rsum(&params, f.as_ref(), DEFAULT_BUDGET).map_err(|e| e.to_string())?;
            ensure(r.passed(), format!("{}: {} rsum violations", f.describe(), r.violations.len()))?;
            checked += q.checked + r.checked;
        }
    }
    Ok(format!("4 configs x 4 provers, {checked} inequalities, zero violations"))
}

fn honest_exactness() -> Result<String, String> {
    let mut outputs = 0u64;
    let configs = [
        (ProtocolParams::raw(3, 0.5, 0.5, 10, 2, 4, 0.0).unwrap(), abc3()),
        (ProtocolParams::raw(2, 0.5, 0.5, 8, 1, 2, -1.5).unwrap(), skewed2()),
        (ProtocolParams::raw(4, 0.25, 0.5, 24, 2, 4, 0.5).unwrap(), uniform(4)),
    ];
    for (params, dist) in configs {
        let sim = Simulation::new(params, &HonestFactory::new(dist.clone()));
        for t in sim.run(100_000, 17, None) {
            if let Outcome::Output { x, p } = t.outcome {
                ensure(p == OutputProb::Exact(dist.prob(x)), format!("trial {}: {x} with {p:?}", t.trial))?;
                outputs += 1;
            }
        }
    }
    ensure(outputs > 0, "no outputs at all")?;
    Ok(format!("3 x 10^5 trials, {outputs} outputs, all with p = P(x) exactly"))
}

fn oracle_vs_mc() -> Result<String, String> {
    let alpha = 1e-3;
    let trials = 1000;
    let mut worst = 100;
    for (ci, (params, dist)) in tiny_configs().into_iter().enumerate() {
        let factory = HonestFactory::new(dist);
        let exact = exact_output_distribution(&params, &factory, DEFAULT_BUDGET).map_err(|e| e.to_string())?;
        let n = params.n;
        let mut expect: BTreeMap<String, f64> = exact
            .outputs
            .iter()
            .map(|((x, p), q)| (format!("{}:{}", hex_of(*x, n), p.bin_key()), to_f64(q)))
            .collect();
        expect.insert("reject".into(), to_f64(&exact.reject_total()));
        let sim = Simulation::new(params, &factory);
        let band = hoeffding_half_width(trials, alpha, 1.0);
        let mut passes = 0;
        for rep in 0..100u64 {
            let r = estimate_output_distribution(&sim, trials, 1000 + rep, alpha, 1e-6, None).map_err(|e| e.to_string())?;
            let mut got: BTreeMap<String, f64> =
                r.bins.iter().map(|b| (format!("{}:{}", b.x, b.p), b.frequency)).collect();
            got.insert("reject".into(), r.reject);
            let keys: std::collections::BTreeSet<&String> = expect.keys().chain(got.keys()).collect();
            let ok = keys.iter().all(|k| {
                let e = expect.get(*k).copied().unwrap_or(0.0);
                let g = got.get(*k).copied().unwrap_or(0.0);
                (e - g).abs() <= band
            });
            passes += u32::from(ok);
        }
        ensure(passes >= 99, format!("config {ci}: {passes}/100 runs inside the band"))?;
        worst = worst.min(passes);
    }
    Ok(format!("4 configs x 100 runs of 10^3 trials, worst pass rate {worst}/100"))
}

fn two_point() -> Result<String, String> {
    let params = ProtocolParams::raw(3, 0.5, 0.5, 10, 2, 4, 2.0).unwrap();
    let sim = Simulation::new(params, &MixtureFactory::two_point(3));
    let r = estimate_output_distribution(&sim, 100_000, 3, 1e-3, 0.25, None).map_err(|e| e.to_string())?;
    let px = r.marginal.get("0").copied().unwrap_or(0.0);
    let s = r.soundness.iter().find(|s| s.x == "0").map(|s| s.estimate).unwrap_or(0.0);
    ensure((px - 0.75).abs() <= 0.02, format!("P_X(0^n) = {px}"))?;
    ensure((s - 1.0).abs() <= 0.05, format!("soundness sum at 0^n = {s}"))?;
    Ok(format!("P_X(0^n) = {px:.4}, sum_p q/p at 0^n = {s:.4}"))
}

fn sum_one() -> Result<String, String> {
    let sums = exact_soundness_sums(&sum_one_table()).ok_or("irrational entry")?;
    ensure(sums.values().all(|v| *v == BigRational::one()), "sums differ from 1")?;
    let search = mixture_realizable(&sum_one_table(), &sum_one_candidates());
    ensure(search.solution.is_none(), "found a realizing mixture")?;
    Ok(format!(
        "sums exactly 1 for both elements; {} candidate subsets over {} distributions, none realizes",
        search.subsets_checked, search.candidates
    ))
}

fn trivial_fallback() -> Result<String, String> {
    for dist in [abc3(), skewed2(), uniform(4)] {
        let params = ProtocolParams::trivial(dist.n()).unwrap();
        let r = exact_output_distribution(&params, &HonestFactory::new(dist.clone()), DEFAULT_BUDGET)
            .map_err(|e| e.to_string())?;
        ensure(r.reject_total().is_zero(), "fallback rejected")?;
        ensure(&r.marginal() == dist.mass(), "marginal differs from P")?;
        for (x, p) in r.outputs.keys() {
            ensure(*p == OutputProb::Exact(dist.prob(*x)), "output probability differs")?;
        }
    }
    Ok("3 distributions reproduced exactly".into())
}

fn transform() -> Result<String, String> {
    let trials = 10_000;
    let mut lines = vec![];
    for (s0, s1) in [("aabb", "abbb"), ("aabb", "abab")] {
        let toy = ToyMultiset::new(s0, s1).map_err(|e| e.to_string())?;
        let private = ToyHonestProver { instance: toy.clone() };
        let (mp, cp) = sampling_params(&toy, 0.02, 0.25).map_err(|e| e.to_string())?;
        let honest = HonestTransformProver {
            proto: &toy,
            private: &private,
            message_params: mp.clone(),
            coin_params: cp.clone(),
        };
        let random = RandomAnswerProver {
            honest: HonestTransformProver {
                proto: &toy,
                private: &private,
                message_params: mp.clone(),
                coin_params: cp.clone(),
            },
        };
        let provers: [&dyn TransformProver; 2] = [&honest, &random];
        for p in provers {
            let r = transform_estimate(&toy, p, &mp, &cp, trials, 5, 1e-3, None).map_err(|e| e.to_string())?;
            if toy.in_language() {
                if p.describe() == "honest" {
                    let lo = 1.0 - 2.0 * 2.0 * 0.02 - r.half_width;
                    ensure(r.rate >= lo, format!("x in L: rate {} < {lo}", r.rate))?;
                    lines.push(format!("x in L {:.4}", r.rate));
                }
            } else {
                let hi = 1.27f64.powi(2) * 0.5 + 0.04 + r.half_width;
                ensure(r.rate <= hi, format!("x not in L, {}: rate {} > {hi}", p.describe(), r.rate))?;
                lines.push(format!("x not in L ({}) {:.4}", p.describe(), r.rate));
            }
        }
    }
    Ok(lines.join(", "))
}

/// `f64` to the exact rational it denotes.
fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite")
}

fn bounds_grid() -> Result<String, String> {
    let mut worst: f64 = 0.0;
    let mut points = 0;
    for (i, k) in [0usize, 1, 2, 3, 5].into_iter().enumerate() {
        for (j, (eps, delta)) in [(0.01, 0.1), (0.02, 0.25), (0.001, 0.5), (0.05, 0.05)].into_iter().enumerate() {
            let (c, s) = (1.0 - 0.01 * i as f64, 0.5 - 0.02 * j as f64);
            let b = bounds_calculator(c, s, k, eps, delta);
            let r = exact((k + 1) as f64);
            let base = BigRational::one() + exact(eps) + exact(delta);
            let mut pow = BigRational::one();
            for _ in 0..=k {
                pow *= &base;
            }
            let c_hp = exact(c) - BigRational::from_integer(BigInt::from(2)) * &r * exact(eps);
            let s_hp = pow * exact(s) + r * exact(eps);
            for (got, want) in [(b.completeness, c_hp), (b.soundness, s_hp)] {
                let want = want.to_f64().unwrap();
                let rel = ((got - want) / want).abs();
                worst = worst.max(rel);
                ensure(rel < 1e-12, format!("k={k} eps={eps} delta={delta}: {got} vs {want}"))?;
            }
            points += 1;
        }
    }
    ensure(points == 20, "grid size")?;
    Ok(format!("{points} points, worst relative error {worst:.1e}"))
}

fn data(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "..", "data", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn determinism() -> Result<String, String> {
    let dir = std::env::temp_dir().join(format!("coinpress-accept-{}", std::process::id()));
    std::fs::create_dir_all(&dir).map_err(|e| e.to_string())?;
    let tiny = data("tiny.json");
    let two_point = data("two-point.json");
    let toy = data("toy-no.json");
    let invocations: Vec<Vec<&str>> = vec![
        vec!["sample", "--config", &tiny, "--seed", "7", "--trials", "50", "--transcript"],
        vec!["estimate", "--config", &tiny, "--seed", "7", "--trials", "5000"],
        vec!["estimate", "--config", &two_point, "--seed", "7", "--trials", "5000", "--format", "csv"],
        vec!["soundness-sum", "--config", &two_point, "--x", "0", "--seed", "7", "--trials", "5000"],
        vec!["oracle", "--config", &tiny, "--diagnostics"],
        vec!["hash-check", "-n", "4", "-m", "2", "--set-size", "12", "--seed", "7", "--trials", "500"],
        vec!["params", "-n", "64", "--eps", "0.9", "--delta", "0.9"],
        vec!["transform", "--instance", &toy, "--rounds-trials", "300", "--seed", "7"],
    ];
    for (i, args) in invocations.iter().enumerate() {
        let mut outs = vec![];
        for rep in 0..2 {
            let path = dir.join(format!("{i}-{rep}.out"));
            let status = Command::new(env!("CARGO_BIN_EXE_coinpress"))
                .args(args)
                .arg("--out")
                .arg(&path)
                .status()
                .map_err(|e| e.to_string())?;
            ensure(status.success(), format!("{} failed", args[0]))?;
            outs.push(std::fs::read(&path).map_err(|e| e.to_string())?);
        }
        ensure(!outs[0].is_empty() && outs[0] == outs[1], format!("{} differs between runs", args[0]))?;
    }
    Ok(format!("{} invocations byte-identical across repeats", invocations.len()))
}

#[test]
fn acceptance() {
    let checks: [(&str, Check); 11] = [
        ("exhaustive 3-wise independence", kwise),
        ("hash mixing frequency", mixing),
        ("oracle structural lemmas", structural),
        ("honest-prover exactness", honest_exactness),
        ("oracle vs Monte Carlo", oracle_vs_mc),
        ("two-point mixture numbers", two_point),
        ("non-realizable sum-one table", sum_one),
        ("trivial fallback", trivial_fallback),
        ("transformation end-to-end", transform),
        ("bounds calculator grid", bounds_grid),
        ("CLI determinism", determinism),
    ];
    let mut failed = vec![];
    for (name, check) in checks {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(detail) => println!("PASS  {name} ({secs:.1}s): {detail}"),
            Err(why) => {
                println!("FAIL  {name} ({secs:.1}s): {why}");
                failed.push(name);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
