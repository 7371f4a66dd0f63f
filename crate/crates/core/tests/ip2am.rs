use coinpress::ip2am::{
    sampling_params, transform_estimate, transform_run, HonestTransformProver, RandomAnswerProver,
    ToyHonestProver, ToyMultiset,
};
use coinpress::protocol::OutputProb;
use coinpress::rational::pow2;
use num_rational::BigRational;
use num_traits::One;

fn honest<'a>(toy: &'a ToyMultiset, private: &'a ToyHonestProver, eps: f64, delta: f64) -> HonestTransformProver<'a, ToyMultiset> {
    let (message_params, coin_params) = sampling_params(toy, eps, delta).unwrap();
    HonestTransformProver {
        proto: toy,
        private,
        message_params,
        coin_params,
    }
}

#[test]
fn honest_products_telescope() {
    let toy = ToyMultiset::new("aabb", "abbb").unwrap();
    let private = ToyHonestProver { instance: toy.clone() };
    let prover = honest(&toy, &private, 0.02, 0.25);
    for seed in 0..40 {
        let t = transform_run(&toy, &prover, &prover.message_params, &prover.coin_params, seed);
        if t.rejected_at.is_some() {
            continue;
        }
        let mut prod = BigRational::one();
        for r in &t.rounds {
            prod *= r.p.as_ref().and_then(OutputProb::as_exact).unwrap();
        }
        let last = t.coin_sampling.as_ref().unwrap();
        if let coinpress::protocol::Outcome::Output { p, .. } = &last.outcome {
            prod *= p.as_exact().unwrap();
        }
        assert_eq!(prod, pow2(-4));
        assert!(t.check_b && t.check_a && t.accept);
    }
}

#[test]
fn replay_under_fixed_seed() {
    let toy = ToyMultiset::new("ab", "aa").unwrap();
    let private = ToyHonestProver { instance: toy.clone() };
    let prover = honest(&toy, &private, 0.02, 0.25);
    let a = transform_run(&toy, &prover, &prover.message_params, &prover.coin_params, 9);
    let b = transform_run(&toy, &prover, &prover.message_params, &prover.coin_params, 9);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
}

#[test]
fn random_answers_respect_soundness() {
    let toy = ToyMultiset::new("aabb", "abab").unwrap();
    let private = ToyHonestProver { instance: toy.clone() };
    let prover = RandomAnswerProver { honest: honest(&toy, &private, 0.02, 0.25) };
    let (mp, cp) = (prover.honest.message_params.clone(), prover.honest.coin_params.clone());
    let report = transform_estimate(&toy, &prover, &mp, &cp, 2000, 3, 1e-3, None).unwrap();
    assert!(report.rate <= report.bounds.soundness + report.half_width, "{report:?}");
}
