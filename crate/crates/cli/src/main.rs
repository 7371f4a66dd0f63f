use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use coinpress::dist::{parse_hex, ExplicitDistribution};
use coinpress::harness::{
    default_p_min, estimate_output_distribution, estimate_soundness_sum, DistSource, ParamsConfig,
    RunConfig, Simulation, TrialRecord,
};
use coinpress::hash3::{mixing_experiment, verify_kwise_exhaustive};
use coinpress::ip2am::{
    sampling_params, transform_estimate, HonestTransformProver, RandomAnswerProver, ToyHonestProver,
    ToyMultiset, TransformProver,
};
use coinpress::oracle::{
    completeness_diagnostics, exact_output_distribution, soundness_diagnostics, soundness_sums,
    verify_qvsr, verify_rsum, DEFAULT_BUDGET,
};
use coinpress::protocol::{derive_params, Outcome, ProtocolParams};
use coinpress::{Error, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "coinpress", version, about = "Public-coin sampling protocol simulator")]
struct Cli {
    /// Master seed.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of trials; accepts `1000`, `1e6` or `10^6`.
    #[arg(long, global = true, value_parser = parse_count)]
    trials: Option<u64>,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Raw,
    Formulas,
    Paper,
    Trivial,
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Distribution file; overrides the config.
    #[arg(long)]
    dist: Option<PathBuf>,
    /// honest | mixture:<file> | rejecting:<p> | inflating:<k> | scripted:<file> | overlap
    #[arg(long)]
    prover: Option<String>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long = "t")]
    t: Option<usize>,
    #[arg(long)]
    gap: Option<usize>,
    #[arg(long)]
    interval: Option<usize>,
    #[arg(long)]
    samp_gap: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run the protocol and print each outcome (or full transcript).
    Sample {
        #[command(flatten)]
        run: RunArgs,
        /// Print full transcripts as JSON lines.
        #[arg(long)]
        transcript: bool,
    },
    /// Empirical output distribution with Hoeffding bands.
    Estimate {
        #[command(flatten)]
        run: RunArgs,
        #[arg(long, default_value_t = 1e-3)]
        alpha: f64,
        #[arg(long)]
        p_min: Option<f64>,
    },
    /// Truncated soundness sum for one element.
    SoundnessSum {
        #[command(flatten)]
        run: RunArgs,
        /// Element as hex.
        #[arg(long)]
        x: String,
        #[arg(long, default_value_t = 1e-3)]
        alpha: f64,
        #[arg(long)]
        p_min: Option<f64>,
    },
    /// Exact output distribution by exhaustive enumeration.
    Oracle {
        #[command(flatten)]
        run: RunArgs,
        /// Also report the lemma-level diagnostics.
        #[arg(long)]
        diagnostics: bool,
        #[arg(long)]
        budget: Option<u128>,
    },
    /// k-wise independence and mixing experiments for the hash family.
    HashCheck {
        #[arg(short = 'n', long)]
        n: u32,
        #[arg(short = 'm', long)]
        m: u32,
        #[arg(short = 'k', long, default_value_t = 3)]
        k: usize,
        /// Size of the set for the mixing experiment.
        #[arg(long)]
        set_size: Option<usize>,
        #[arg(long, default_value_t = 0.5)]
        gamma: f64,
        /// Condition on this element (hex) hashing to zero.
        #[arg(long)]
        pivot: Option<String>,
    },
    /// Derive protocol parameters, including the fallback decision.
    Params {
        #[arg(short = 'n', long)]
        n: u32,
        #[arg(long)]
        eps: f64,
        #[arg(long)]
        delta: f64,
        /// Use the closed forms at (eps, delta) directly.
        #[arg(long)]
        formulas: bool,
    },
    /// Run the private-to-public-coin compiler on a toy instance.
    Transform {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long, value_parser = parse_count, default_value = "1000")]
        rounds_trials: u64,
        #[arg(long, default_value_t = 0.02)]
        sampling_eps: f64,
        #[arg(long, default_value_t = 0.25)]
        sampling_delta: f64,
        /// honest | random-answer
        #[arg(long, default_value = "honest")]
        prover: String,
        #[arg(long, default_value_t = 1e-3)]
        alpha: f64,
    },
}

fn parse_count(s: &str) -> std::result::Result<u64, String> {
    let bad = || format!("not a trial count: {s:?}");
    if let Some((b, e)) = s.split_once('^') {
        let b: u64 = b.parse().map_err(|_| bad())?;
        let e: u32 = e.parse().map_err(|_| bad())?;
        return b.checked_pow(e).ok_or_else(bad);
    }
    if let Ok(v) = s.parse::<u64>() {
        return Ok(v);
    }
    let v: f64 = s.parse().map_err(|_| bad())?;
    if v >= 0.0 && v.fract() == 0.0 && v < 1.8e19 {
        Ok(v as u64)
    } else {
        Err(bad())
    }
}

struct Setup {
    cfg: RunConfig,
    dist: ExplicitDistribution,
    params: ProtocolParams,
}

impl Setup {
    fn new(cli: &Cli, run: &RunArgs) -> Result<Self> {
        let mut cfg = match &cli.config {
            Some(path) => RunConfig::load(path)?,
            None => {
                let dist = run
                    .dist
                    .clone()
                    .ok_or_else(|| Error::Config("need --config or --dist".into()))?;
                let params = params_from_flags(run)?
                    .ok_or_else(|| Error::Config("need --config or --mode".into()))?;
                RunConfig {
                    distribution: DistSource::Path(dist),
                    params,
                    prover: "honest".into(),
                    trials: None,
                    seed: None,
                    alpha: None,
                    p_min: None,
                    base: PathBuf::from("."),
                }
            }
        };
        if cli.config.is_some() {
            if let Some(d) = &run.dist {
                cfg.distribution = DistSource::Path(std::env::current_dir()?.join(d));
            }
            if let Some(p) = params_from_flags(run)? {
                cfg.params = p;
            }
        }
        if let Some(p) = &run.prover {
            cfg.prover = p.clone();
            cfg.base = PathBuf::from(".");
        }
        let dist = cfg.distribution()?;
        let params = cfg.protocol_params(dist.n())?;
        Ok(Self { cfg, dist, params })
    }

    fn simulation(&self) -> Result<Simulation> {
        let factory = self.cfg.factory(&self.dist)?;
        Ok(Simulation::new(self.params.clone(), factory.as_ref()))
    }

    fn seed(&self, cli: &Cli) -> u64 {
        if cli.seed != 0 {
            cli.seed
        } else {
            self.cfg.seed.unwrap_or(0)
        }
    }

    fn trials(&self, cli: &Cli, default: u64) -> u64 {
        cli.trials.or(self.cfg.trials).unwrap_or(default)
    }

    fn p_min(&self, flag: Option<f64>) -> f64 {
        flag.or(self.cfg.p_min)
            .unwrap_or_else(|| default_p_min(&self.params, &self.dist))
    }
}

fn params_from_flags(run: &RunArgs) -> Result<Option<ParamsConfig>> {
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| Error::Config(format!("--mode needs --{name}")));
    let needu = |v: Option<usize>, name: &str| v.ok_or_else(|| Error::Config(format!("--mode raw needs --{name}")));
    Ok(match run.mode {
        None => None,
        Some(ModeArg::Trivial) => Some(ParamsConfig::Trivial),
        Some(ModeArg::Formulas) => Some(ParamsConfig::Formulas {
            eps: need(run.eps, "eps")?,
            delta: need(run.delta, "delta")?,
        }),
        Some(ModeArg::Paper) => Some(ParamsConfig::Paper {
            eps: need(run.eps, "eps")?,
            delta: need(run.delta, "delta")?,
        }),
        Some(ModeArg::Raw) => Some(ParamsConfig::Raw {
            eps: need(run.eps, "eps")?,
            delta: need(run.delta, "delta")?,
            t: needu(run.t, "t")?,
            gap: needu(run.gap, "gap")?,
            interval: needu(run.interval, "interval")?,
            samp_gap: need(run.samp_gap, "samp-gap")?,
        }),
    })
}

fn emit(cli: &Cli, text: &str) -> Result<()> {
    match &cli.out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json");
    s.push('\n');
    s
}

fn csv_row(fields: &[String]) -> String {
    let mut s = fields.join(",");
    s.push('\n');
    s
}

fn outcome_fields(n: u32, o: &Outcome) -> [String; 3] {
    match o {
        Outcome::Output { x, p } => ["output".into(), coinpress::dist::hex_of(*x, n), p.bin_key()],
        Outcome::Reject { reason } => ["reject".into(), reason.code().into(), String::new()],
    }
}

fn run(cli: &Cli) -> Result<String> {
    Ok(match &cli.command {
        Command::Sample { run, transcript } => {
            let setup = Setup::new(cli, run)?;
            let sim = setup.simulation()?;
            let seed = setup.seed(cli);
            let runs = sim.run(setup.trials(cli, 1), seed, None);
            let n = setup.params.n;
            let mut out = String::new();
            if cli.format == Format::Csv {
                out.push_str("trial,stream_seed,digest,outcome,x_or_reason,p\n");
                for t in &runs {
                    let r = TrialRecord::new(seed, t);
                    let [kind, a, b] = outcome_fields(n, &r.outcome);
                    out.push_str(&csv_row(&[r.trial.to_string(), r.stream_seed, r.digest, kind, a, b]));
                }
            } else {
                for t in &runs {
                    let line = if *transcript {
                        t.to_jsonl()
                    } else {
                        serde_json::to_string(&TrialRecord::new(seed, t))?
                    };
                    out.push_str(&line);
                    out.push('\n');
                }
            }
            out
        }
        Command::Estimate { run, alpha, p_min } => {
            let setup = Setup::new(cli, run)?;
            let alpha = setup.cfg.alpha.unwrap_or(*alpha);
            let report = estimate_output_distribution(
                &setup.simulation()?,
                setup.trials(cli, 10_000),
                setup.seed(cli),
                alpha,
                setup.p_min(*p_min),
                None,
            )?;
            match cli.format {
                Format::Json => pretty(&report.to_json()),
                Format::Csv => report.to_csv(),
            }
        }
        Command::SoundnessSum { run, x, alpha, p_min } => {
            let setup = Setup::new(cli, run)?;
            let est = estimate_soundness_sum(
                &setup.simulation()?,
                parse_hex(x)?,
                setup.trials(cli, 10_000),
                setup.seed(cli),
                *alpha,
                setup.p_min(*p_min),
                None,
            )?;
            match cli.format {
                Format::Json => pretty(&serde_json::to_value(&est)?),
                Format::Csv => {
                    "x,estimate,tail,half_width\n".to_string()
                        + &csv_row(&[est.x, est.estimate.to_string(), est.tail.to_string(), est.half_width.to_string()])
                }
            }
        }
        Command::Oracle { run, diagnostics, budget } => {
            let setup = Setup::new(cli, run)?;
            let budget = budget.unwrap_or(DEFAULT_BUDGET);
            let factory = setup.cfg.factory(&setup.dist)?;
            let report = exact_output_distribution(&setup.params, factory.as_ref(), budget)?;
            if cli.format == Format::Csv {
                let mut out = String::from("x,p,mass\n");
                for ((x, p), q) in &report.outputs {
                    out.push_str(&csv_row(&[
                        coinpress::dist::hex_of(*x, setup.params.n),
                        p.bin_key(),
                        coinpress::rational::format(q),
                    ]));
                }
                out.push_str(&csv_row(&["reject".into(), String::new(), coinpress::rational::format(&report.reject_total())]));
                return Ok(out);
            }
            let mut v = report.to_json();
            v["prover"] = json!(factory.describe());
            v["params"] = serde_json::to_value(&setup.params)?;
            v["marginal"] = json!(coinpress::harness::hex_marginal(setup.params.n, &report.marginal()));
            v["soundness_sums"] = soundness_sums(&report.outputs)
                .into_iter()
                .map(|(x, s)| (coinpress::dist::hex_of(x, setup.params.n), json!(s)))
                .collect::<serde_json::Map<_, _>>()
                .into();
            if *diagnostics {
                let n = setup.params.n;
                v["qvsr"] = serde_json::to_value(verify_qvsr(&setup.params, factory.as_ref(), budget)?)?;
                v["rsum"] = serde_json::to_value(verify_rsum(&setup.params, factory.as_ref(), budget)?)?;
                v["soundness"] = soundness_diagnostics(&setup.params, factory.as_ref(), budget)?
                    .iter()
                    .map(|d| d.to_json(n))
                    .collect();
                if setup.cfg.prover_spec() == "honest" {
                    let c = completeness_diagnostics(&setup.params, &setup.dist, budget)?;
                    v["completeness"] = serde_json::to_value(&c)?;
                    v["completeness"]["deviations_ok"] = json!(c.deviations_ok());
                }
            }
            pretty(&v)
        }
        Command::HashCheck { n, m, k, set_size, gamma, pivot } => {
            let mut v = json!({ "n": n, "m": m });
            if *n <= 5 {
                v["kwise"] = serde_json::to_value(verify_kwise_exhaustive(*n, *m, *k)?)?;
            }
            if let Some(size) = set_size {
                if *size as u128 > 1u128 << n {
                    return Err(Error::InvalidParams("set larger than the domain".into()));
                }
                let set: Vec<u64> = (0..*size as u64).collect();
                let pivot = pivot.as_deref().map(parse_hex).transpose()?;
                let mut rng = ChaCha20Rng::seed_from_u64(cli.seed);
                let trials = cli.trials.unwrap_or(1000);
                v["mixing"] = serde_json::to_value(mixing_experiment(&set, *n, *m, *gamma, trials, pivot, &mut rng)?)?;
            }
            pretty(&v)
        }
        Command::Params { n, eps, delta, formulas } => {
            let p = if *formulas {
                ProtocolParams::raw_from_formulas(*n, *eps, *delta)?
            } else {
                derive_params(*n, *eps, *delta)?
            };
            let mut v = serde_json::to_value(&p)?;
            v["intervals"] = json!(p.num_intervals());
            v["digest"] = json!(p.digest());
            if cli.format == Format::Csv {
                let obj = v.as_object().expect("object");
                let keys: Vec<String> = obj.keys().cloned().collect();
                let vals: Vec<String> = obj
                    .values()
                    .map(|x| x.as_str().map(str::to_string).unwrap_or_else(|| x.to_string()))
                    .collect();
                return Ok(csv_row(&keys) + &csv_row(&vals));
            }
            pretty(&v)
        }
        Command::Transform {
            instance,
            rounds_trials,
            sampling_eps,
            sampling_delta,
            prover,
            alpha,
        } => {
            let toy = ToyMultiset::load(instance)?;
            let private = ToyHonestProver { instance: toy.clone() };
            let (message_params, coin_params) = sampling_params(&toy, *sampling_eps, *sampling_delta)?;
            let honest = HonestTransformProver {
                proto: &toy,
                private: &private,
                message_params: message_params.clone(),
                coin_params: coin_params.clone(),
            };
            let random;
            let chosen: &dyn TransformProver = match prover.as_str() {
                "honest" => &honest,
                "random-answer" => {
                    random = RandomAnswerProver { honest };
                    &random
                }
                other => return Err(Error::Config(format!("unknown transform prover {other:?}"))),
            };
            let trials = cli.trials.unwrap_or(*rounds_trials);
            let report = transform_estimate(&toy, chosen, &message_params, &coin_params, trials, cli.seed, *alpha, None)?;
            match cli.format {
                Format::Json => pretty(&serde_json::to_value(&report)?),
                Format::Csv => {
                    "prover,in_language,trials,accepted,rate,half_width,completeness_bound,soundness_bound\n".to_string()
                        + &csv_row(&[
                            report.prover.clone(),
                            report.in_language.to_string(),
                            report.trials.to_string(),
                            report.accepted.to_string(),
                            report.rate.to_string(),
                            report.half_width.to_string(),
                            report.bounds.completeness.to_string(),
                            report.bounds.soundness.to_string(),
                        ])
                }
            }
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli).and_then(|text| emit(&cli, &text)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("coinpress: {e}");
            ExitCode::FAILURE
        }
    }
}
