//! Browser bindings. Every export takes and returns JSON text so the page
//! needs no generated glue beyond `wasm-bindgen`'s.

use std::path::Path;

use coinpress::harness::{default_p_min, estimate_output_distribution, hex_marginal, RunConfig, Simulation};
use coinpress::ip2am::{
    sampling_params, transform_estimate, HonestTransformProver, RandomAnswerProver, ToyHonestProver,
    ToyMultiset, TransformProver,
};
use coinpress::oracle::{exact_output_distribution, soundness_sums, DEFAULT_BUDGET};
use coinpress::dist::hex_of;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

/// Largest trial count a single call will run.
pub const MAX_TRIALS: u64 = 2_000_000;

fn config(text: &str) -> Result<RunConfig, String> {
    let v: Value = serde_json::from_str(text).map_err(|e| e.to_string())?;
    let cfg = RunConfig::from_json(&v, Path::new(".")).map_err(|e| e.to_string())?;
    if cfg.prover.contains(':') && (cfg.prover.starts_with("mixture") || cfg.prover.starts_with("scripted")) {
        return Err("file-based provers are not available in the browser".into());
    }
    Ok(cfg)
}

pub fn exact_report(config_json: &str) -> Result<String, String> {
    let cfg = config(config_json)?;
    let dist = cfg.distribution().map_err(|e| e.to_string())?;
    let params = cfg.protocol_params(dist.n()).map_err(|e| e.to_string())?;
    let factory = cfg.factory(&dist).map_err(|e| e.to_string())?;
    let report = exact_output_distribution(&params, factory.as_ref(), DEFAULT_BUDGET / 100).map_err(|e| e.to_string())?;
    let mut v = report.to_json();
    v["marginal"] = json!(hex_marginal(params.n, &report.marginal()));
    v["soundness_sums"] = soundness_sums(&report.outputs)
        .into_iter()
        .map(|(x, s)| (hex_of(x, params.n), json!(s)))
        .collect::<serde_json::Map<_, _>>()
        .into();
    Ok(v.to_string())
}

pub fn estimate_report(config_json: &str, trials: u64, seed: u64) -> Result<String, String> {
    if trials == 0 || trials > MAX_TRIALS {
        return Err(format!("trials must lie in 1..={MAX_TRIALS}"));
    }
    let cfg = config(config_json)?;
    let dist = cfg.distribution().map_err(|e| e.to_string())?;
    let params = cfg.protocol_params(dist.n()).map_err(|e| e.to_string())?;
    let factory = cfg.factory(&dist).map_err(|e| e.to_string())?;
    let p_min = cfg.p_min.unwrap_or_else(|| default_p_min(&params, &dist));
    let sim = Simulation::new(params, factory.as_ref());
    let report = estimate_output_distribution(&sim, trials, seed, cfg.alpha.unwrap_or(1e-3), p_min, None)
        .map_err(|e| e.to_string())?;
    Ok(report.to_json().to_string())
}

pub fn transform_report(s0: &str, s1: &str, prover: &str, trials: u64, eps: f64, delta: f64, seed: u64) -> Result<String, String> {
    if trials == 0 || trials > MAX_TRIALS {
        return Err(format!("trials must lie in 1..={MAX_TRIALS}"));
    }
    let toy = ToyMultiset::new(s0, s1).map_err(|e| e.to_string())?;
    let private = ToyHonestProver { instance: toy.clone() };
    let (mp, cp) = sampling_params(&toy, eps, delta).map_err(|e| e.to_string())?;
    let honest = HonestTransformProver {
        proto: &toy,
        private: &private,
        message_params: mp.clone(),
        coin_params: cp.clone(),
    };
    let random;
    let chosen: &dyn TransformProver = match prover {
        "honest" => &honest,
        "random-answer" => {
            random = RandomAnswerProver { honest };
            &random
        }
        other => return Err(format!("unknown prover {other:?}")),
    };
    let report = transform_estimate(&toy, chosen, &mp, &cp, trials, seed, 1e-3, None).map_err(|e| e.to_string())?;
    Ok(serde_json::to_string(&report).expect("report serializes"))
}

#[wasm_bindgen]
pub fn exact_distribution(config_json: &str) -> Result<String, JsValue> {
    exact_report(config_json).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn estimate(config_json: &str, trials: u32, seed: u32) -> Result<String, JsValue> {
    estimate_report(config_json, trials as u64, seed as u64).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn transform(s0: &str, s1: &str, prover: &str, trials: u32, eps: f64, delta: f64, seed: u32) -> Result<String, JsValue> {
    transform_report(s0, s1, prover, trials as u64, eps, delta, seed as u64).map_err(|e| JsValue::from_str(&e))
}
