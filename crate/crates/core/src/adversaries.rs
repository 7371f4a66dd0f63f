//! Cheating provers. Each one is a [`ProverFactory`] whose realizations are
//! deterministic, so the exact oracle can enumerate them.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::Value;

use crate::dist::{hex_of, mask, parse_hex, ExplicitDistribution};
use crate::protocol::{
    size_bounds, ChallengeContext, HonestFactory, HonestProver, Prover, ProverFactory,
    ProtocolParams,
};
use crate::rational;
use crate::{Error, Result, TAU};

/// Sends an empty histogram and an empty list, so the verifier rejects in
/// the first round.
pub struct MalformedProver;

impl Prover for MalformedProver {
    fn histogram(&self) -> Vec<BigRational> {
        vec![]
    }

    fn sets(&self, _ctx: &ChallengeContext) -> BTreeMap<usize, Vec<u64>> {
        BTreeMap::new()
    }

    fn probability(&self, _j: usize, _x: u64) -> BigRational {
        BigRational::zero()
    }

    fn full_list(&self) -> Vec<(u64, BigRational)> {
        vec![]
    }
}

/// Picks component `i` with probability `q_i` and then plays honestly for
/// `P_i`. Leftover mass `1 - sum(q)` sends a malformed histogram.
pub struct MixtureFactory {
    pub components: Vec<(BigRational, ExplicitDistribution)>,
}

impl MixtureFactory {
    pub fn new(components: Vec<(BigRational, ExplicitDistribution)>) -> Result<Self> {
        let total = rational::sum(components.iter().map(|(q, _)| q));
        if components.iter().any(|(q, _)| q.is_negative()) || total > BigRational::one() {
            return Err(Error::InvalidParams(
                "mixture weights must be nonnegative and sum to at most 1".into(),
            ));
        }
        Ok(Self { components })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Config(m.to_string());
        let items = value
            .get("components")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("mixture needs a \"components\" array"))?;
        let mut components = vec![];
        for item in items {
            let q = item
                .get("q")
                .and_then(Value::as_str)
                .ok_or_else(|| bad("component needs a \"q\" string"))?;
            let dist = item
                .get("dist")
                .ok_or_else(|| bad("component needs a \"dist\" object"))?;
            components.push((rational::parse(q)?, ExplicitDistribution::from_json(dist)?));
        }
        Self::new(components)
    }

    /// Mixture of the uniform distribution on `{0^n, 1^n}` and the point
    /// mass on `0^n`, half each.
    pub fn two_point(n: u32) -> Self {
        let ones = mask(n);
        let half = rational::ratio(1, 2);
        let uniform = ExplicitDistribution::uniform(n, &[0, ones]).expect("valid");
        let point = ExplicitDistribution::point_mass(n, 0).expect("valid");
        Self::new(vec![(half.clone(), uniform), (half, point)]).expect("valid")
    }
}

fn residual(weights: &[BigRational]) -> BigRational {
    BigRational::one() - rational::sum(weights)
}

impl ProverFactory for MixtureFactory {
    fn describe(&self) -> String {
        format!("mixture({} components)", self.components.len())
    }

    fn realizations(&self, params: &ProtocolParams) -> Vec<(BigRational, Box<dyn Prover>)> {
        let mut out: Vec<(BigRational, Box<dyn Prover>)> = self
            .components
            .iter()
            .filter(|(q, _)| q.is_positive())
            .map(|(q, d)| {
                (q.clone(), Box::new(HonestProver::new(d.clone(), params)) as Box<dyn Prover>)
            })
            .collect();
        let weights: Vec<_> = self.components.iter().map(|(q, _)| q.clone()).collect();
        let rest = residual(&weights);
        if rest.is_positive() {
            out.push((rest, Box::new(MalformedProver)));
        }
        out
    }
}

/// With probability `reject_prob` forces a first-round reject, otherwise
/// honest.
pub struct RejectingFactory {
    pub dist: ExplicitDistribution,
    pub reject_prob: BigRational,
}

impl RejectingFactory {
    pub fn new(dist: ExplicitDistribution, reject_prob: BigRational) -> Result<Self> {
        if reject_prob.is_negative() || reject_prob > BigRational::one() {
            return Err(Error::InvalidParams("reject probability outside [0,1]".into()));
        }
        Ok(Self { dist, reject_prob })
    }
}

impl ProverFactory for RejectingFactory {
    fn describe(&self) -> String {
        format!("rejecting({})", rational::format(&self.reject_prob))
    }

    fn realizations(&self, params: &ProtocolParams) -> Vec<(BigRational, Box<dyn Prover>)> {
        let mut out: Vec<(BigRational, Box<dyn Prover>)> = vec![];
        if self.reject_prob.is_positive() {
            out.push((self.reject_prob.clone(), Box::new(MalformedProver)));
        }
        let keep = BigRational::one() - &self.reject_prob;
        if keep.is_positive() {
            out.push((keep, Box::new(HonestProver::new(self.dist.clone(), params))));
        }
        out
    }
}

/// Reports every bucket `shift` places deeper than it is (claiming smaller
/// probabilities) and pads the sets with unused hash-zero elements until
/// the size check's lower bound is met.
pub struct InflatingProver {
    honest: HonestProver,
    hist: Vec<BigRational>,
    shift: usize,
    eps: f64,
    n: u32,
}

impl InflatingProver {
    pub fn new(dist: ExplicitDistribution, params: &ProtocolParams, shift: usize) -> Self {
        let honest = HonestProver::new(dist, params);
        let base = honest.histogram();
        let mut hist = vec![BigRational::zero(); base.len()];
        for (i, hi) in base.into_iter().enumerate() {
            if i + shift < hist.len() {
                hist[i + shift] = hi;
            }
        }
        Self {
            honest,
            hist,
            shift,
            eps: params.eps,
            n: params.n,
        }
    }
}

impl Prover for InflatingProver {
    fn histogram(&self) -> Vec<BigRational> {
        self.hist.clone()
    }

    fn sets(&self, ctx: &ChallengeContext) -> BTreeMap<usize, Vec<u64>> {
        let mut out = BTreeMap::new();
        let mut used = BTreeSet::new();
        for &i in &ctx.keys {
            let mut xs = if i >= self.shift {
                self.honest.filtered_bucket(i - self.shift, &ctx.f)
            } else {
                vec![]
            };
            used.extend(xs.iter().copied());
            out.insert(i, std::mem::take(&mut xs));
        }
        let universe = mask(self.n);
        for &i in &ctx.keys {
            let (lo, _) = size_bounds(&self.hist[i], i, ctx, self.eps);
            let need = (lo * (1.0 - TAU)).ceil().max(0.0) as usize;
            let xs = out.get_mut(&i).expect("inserted above");
            let mut candidate = 0u64;
            while xs.len() < need && candidate <= universe {
                if ctx.f.hits_zero(candidate) && used.insert(candidate) {
                    xs.push(candidate);
                }
                if candidate == universe {
                    break;
                }
                candidate += 1;
            }
        }
        out
    }

    fn probability(&self, _j: usize, x: u64) -> BigRational {
        self.honest.dist().prob(x)
    }

    fn full_list(&self) -> Vec<(u64, BigRational)> {
        self.honest.full_list()
    }
}

pub struct InflatingFactory {
    pub dist: ExplicitDistribution,
    pub shift: usize,
}

impl ProverFactory for InflatingFactory {
    fn describe(&self) -> String {
        format!("inflating({})", self.shift)
    }

    fn realizations(&self, params: &ProtocolParams) -> Vec<(BigRational, Box<dyn Prover>)> {
        vec![(
            BigRational::one(),
            Box::new(InflatingProver::new(self.dist.clone(), params, self.shift)),
        )]
    }
}

/// Honest, except that whenever the hash's constant term is odd the first
/// element of the first nonempty set is copied into every later set.
pub struct OverlapProver {
    honest: HonestProver,
}

impl Prover for OverlapProver {
    fn histogram(&self) -> Vec<BigRational> {
        self.honest.histogram()
    }

    fn sets(&self, ctx: &ChallengeContext) -> BTreeMap<usize, Vec<u64>> {
        let mut sets = self.honest.sets(ctx);
        if ctx.f.c & 1 == 1 {
            let first = sets
                .iter()
                .find(|(_, xs)| !xs.is_empty())
                .map(|(&i, xs)| (i, xs[0]));
            if let Some((owner, x)) = first {
                for (&i, xs) in sets.iter_mut() {
                    if i > owner {
                        xs.push(x);
                    }
                }
            }
        }
        sets
    }

    fn probability(&self, j: usize, x: u64) -> BigRational {
        self.honest.probability(j, x)
    }

    fn full_list(&self) -> Vec<(u64, BigRational)> {
        self.honest.full_list()
    }
}

pub struct OverlapFactory {
    pub dist: ExplicitDistribution,
}

impl ProverFactory for OverlapFactory {
    fn describe(&self) -> String {
        "scripted-overlap".into()
    }

    fn realizations(&self, params: &ProtocolParams) -> Vec<(BigRational, Box<dyn Prover>)> {
        vec![(
            BigRational::one(),
            Box::new(OverlapProver {
                honest: HonestProver::new(self.dist.clone(), params),
            }),
        )]
    }
}

/// Replies from a fixed script. Sets are looked up by the challenge digest
/// `"s:k:m"` and probabilities by `"j:x"` with `x` in hex. Missing entries
/// produce a response the verifier rejects (sets keyed by nothing) or a
/// zero probability.
#[derive(Clone, Debug, Default)]
pub struct ScriptedProver {
    pub n: u32,
    pub histogram: Vec<BigRational>,
    pub sets: BTreeMap<String, BTreeMap<usize, Vec<u64>>>,
    pub probabilities: BTreeMap<String, BigRational>,
    pub full_list: Vec<(u64, BigRational)>,
}

impl ScriptedProver {
    pub fn challenge_digest(s: i64, k: usize, m: u32) -> String {
        format!("{s}:{k}:{m}")
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Config(m.to_string());
        let n = value
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("script needs integer \"n\""))? as u32;
        let rat = |v: &Value| -> Result<BigRational> {
            rational::parse(v.as_str().ok_or_else(|| bad("rationals must be strings"))?)
        };
        let histogram = match value.get("histogram").and_then(Value::as_array) {
            Some(items) => items.iter().map(rat).collect::<Result<_>>()?,
            None => vec![],
        };
        let mut sets = BTreeMap::new();
        if let Some(obj) = value.get("sets").and_then(Value::as_object) {
            for (digest, per) in obj {
                let per = per.as_object().ok_or_else(|| bad("sets entries must be objects"))?;
                let mut map = BTreeMap::new();
                for (i, xs) in per {
                    let i: usize = i.parse().map_err(|_| bad("set keys must be indices"))?;
                    let xs = xs
                        .as_array()
                        .ok_or_else(|| bad("sets must be arrays"))?
                        .iter()
                        .map(|x| parse_hex(x.as_str().unwrap_or("")))
                        .collect::<Result<Vec<_>>>()?;
                    map.insert(i, xs);
                }
                sets.insert(digest.clone(), map);
            }
        }
        let mut probabilities = BTreeMap::new();
        if let Some(obj) = value.get("probabilities").and_then(Value::as_object) {
            for (key, p) in obj {
                let (j, x) = key.split_once(':').ok_or_else(|| bad("probability keys are \"j:x\""))?;
                let j: usize = j.parse().map_err(|_| bad("bad element index"))?;
                probabilities.insert(format!("{j}:{}", hex_of(parse_hex(x)?, n)), rat(p)?);
            }
        }
        let mut full_list = vec![];
        if let Some(obj) = value.get("full_list").and_then(Value::as_object) {
            for (x, p) in obj {
                full_list.push((parse_hex(x)?, rat(p)?));
            }
        }
        Ok(Self {
            n,
            histogram,
            sets,
            probabilities,
            full_list,
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&serde_json::from_str(&text)?)
    }
}

impl Prover for ScriptedProver {
    fn histogram(&self) -> Vec<BigRational> {
        self.histogram.clone()
    }

    fn sets(&self, ctx: &ChallengeContext) -> BTreeMap<usize, Vec<u64>> {
        self.sets
            .get(&Self::challenge_digest(ctx.s, ctx.k, ctx.m))
            .cloned()
            .unwrap_or_else(|| [(usize::MAX, vec![])].into_iter().collect())
    }

    fn probability(&self, j: usize, x: u64) -> BigRational {
        self.probabilities
            .get(&format!("{j}:{}", hex_of(x, self.n)))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    fn full_list(&self) -> Vec<(u64, BigRational)> {
        self.full_list.clone()
    }
}

impl ProverFactory for ScriptedProver {
    fn describe(&self) -> String {
        "scripted".into()
    }

    fn realizations(&self, _params: &ProtocolParams) -> Vec<(BigRational, Box<dyn Prover>)> {
        vec![(BigRational::one(), Box::new(self.clone()))]
    }
}

/// Parses `honest | mixture:<file> | rejecting:<p> | inflating:<k> |
/// scripted:<file> | overlap`. `dist` is the distribution the honest-based
/// strategies play.
pub fn parse_prover_spec(spec: &str, dist: &ExplicitDistribution) -> Result<Box<dyn ProverFactory>> {
    let (kind, arg) = match spec.split_once(':') {
        Some((k, a)) => (k, Some(a)),
        None => (spec, None),
    };
    let need = |what: &str| Error::Config(format!("prover {kind:?} needs {what}"));
    Ok(match kind {
        "honest" => Box::new(HonestFactory::new(dist.clone())),
        "overlap" | "scripted-overlap" => Box::new(OverlapFactory { dist: dist.clone() }),
        "mixture" => {
            let path = arg.ok_or_else(|| need("a file"))?;
            let text = std::fs::read_to_string(path)?;
            Box::new(MixtureFactory::from_json(&serde_json::from_str(&text)?)?)
        }
        "rejecting" => {
            let p = arg.ok_or_else(|| need("a probability"))?;
            Box::new(RejectingFactory::new(dist.clone(), rational::parse(p)?)?)
        }
        "inflating" => {
            let k = arg.ok_or_else(|| need("a shift"))?;
            let shift = k.parse().map_err(|_| Error::Config(format!("bad shift {k:?}")))?;
            Box::new(InflatingFactory {
                dist: dist.clone(),
                shift,
            })
        }
        "scripted" => {
            let path = arg.ok_or_else(|| need("a file"))?;
            Box::new(ScriptedProver::load(Path::new(path))?)
        }
        other => return Err(Error::Config(format!("unknown prover {other:?}"))),
    })
}
