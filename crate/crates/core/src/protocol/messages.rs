use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::hash3::HashFunction;
use crate::rational::{self, serde_rat, serde_rat_vec};

/// Probability attached to an output: either the prover's exact rational or
/// the verifier's substitute `2^{-j eps}`, which is irrational unless
/// `j eps` is an integer.
#[derive(Clone, Debug)]
pub enum OutputProb {
    Exact(BigRational),
    Real(f64),
}

impl OutputProb {
    pub fn value(&self) -> f64 {
        match self {
            Self::Exact(r) => rational::to_f64(r),
            Self::Real(v) => *v,
        }
    }

    pub fn as_exact(&self) -> Option<&BigRational> {
        match self {
            Self::Exact(r) => Some(r),
            Self::Real(_) => None,
        }
    }

    /// Canonical text for aggregation: `"num/den"` for rationals, a
    /// 12-significant-digit scientific decimal otherwise.
    pub fn bin_key(&self) -> String {
        match self {
            Self::Exact(r) => rational::format(r),
            Self::Real(v) => format!("{v:.11e}"),
        }
    }
}

impl PartialEq for OutputProb {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OutputProb {}

impl PartialOrd for OutputProb {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OutputProb {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Self::Exact(a), Self::Exact(b)) => a.cmp(b),
            (Self::Real(a), Self::Real(b)) => a.total_cmp(b),
            (Self::Exact(_), Self::Real(_)) => Ordering::Less,
            (Self::Real(_), Self::Exact(_)) => Ordering::Greater,
        }
    }
}

impl Serialize for OutputProb {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Self::Exact(r) => s.serialize_str(&rational::format(r)),
            Self::Real(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for OutputProb {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        use serde::de::Error as _;
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Text(String),
            Num(f64),
        }
        Ok(match Raw::deserialize(d)? {
            Raw::Text(t) => Self::Exact(rational::parse(&t).map_err(D::Error::custom)?),
            Raw::Num(v) => Self::Real(v),
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    /// Wrong length or negative entry.
    MalformedHistogram,
    /// Histogram mass outside `[1 - 2^{-n}, 1]`.
    HistogramMass,
    DegenerateShift,
    DegenerateInterval,
    /// The challenge would need more hash output bits than input bits.
    HashWidth,
    /// Sets not keyed by `I'_k`, or elements wider than `n` bits.
    MalformedSets,
    Oversize,
    HashCheck,
    SizeCheck,
    Disjointness,
    NotInN,
    EmptySet,
    InvalidList,
}

impl RejectReason {
    pub fn code(&self) -> &'static str {
        match self {
            Self::MalformedHistogram => "malformed_histogram",
            Self::HistogramMass => "histogram_mass",
            Self::DegenerateShift => "degenerate_shift",
            Self::DegenerateInterval => "degenerate_interval",
            Self::HashWidth => "hash_width",
            Self::MalformedSets => "malformed_sets",
            Self::Oversize => "oversize",
            Self::HashCheck => "hash_check",
            Self::SizeCheck => "size_check",
            Self::Disjointness => "disjointness",
            Self::NotInN => "not_in_n",
            Self::EmptySet => "empty_set",
            Self::InvalidList => "invalid_list",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Message {
    Histogram {
        #[serde(with = "serde_rat_vec")]
        h: Vec<BigRational>,
    },
    Challenge {
        s: i64,
        k: usize,
        f: HashFunction,
    },
    Sets {
        #[serde(with = "serde_sets")]
        sets: BTreeMap<usize, Vec<u64>>,
    },
    Element {
        j: usize,
        x: u64,
    },
    Probability {
        #[serde(with = "serde_rat")]
        p: BigRational,
    },
    FullList {
        list: Vec<ListEntry>,
    },
    Output {
        x: u64,
        p: OutputProb,
    },
    Reject {
        reason: RejectReason,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ListEntry {
    pub x: u64,
    #[serde(with = "serde_rat")]
    pub p: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Outcome {
    Output { x: u64, p: OutputProb },
    Reject { reason: RejectReason },
}

impl Outcome {
    pub fn is_reject(&self) -> bool {
        matches!(self, Self::Reject { .. })
    }
}

/// Every verifier coin drawn in one run, plus the seed the prover used for
/// its own up-front randomness.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Coins {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prover_seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<i64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub g: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub f: Option<HashFunction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_index: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub list_index: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub trial: u64,
    pub params_digest: String,
    pub coins: Coins,
    pub messages: Vec<Message>,
    pub outcome: Outcome,
}

impl Transcript {
    pub fn to_jsonl(&self) -> String {
        serde_json::to_string(self).expect("transcript serializes")
    }

    pub fn from_jsonl(line: &str) -> crate::Result<Self> {
        Ok(serde_json::from_str(line)?)
    }
}

/// Integer map keys do not survive the buffering an internally tagged enum
/// does, so keys go through strings explicitly.
mod serde_sets {
    use std::collections::BTreeMap;

    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(sets: &BTreeMap<usize, Vec<u64>>, s: S) -> Result<S::Ok, S::Error> {
        let keyed: BTreeMap<String, &Vec<u64>> = sets.iter().map(|(k, v)| (k.to_string(), v)).collect();
        keyed.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<usize, Vec<u64>>, D::Error> {
        BTreeMap::<String, Vec<u64>>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| k.parse().map(|k| (k, v)).map_err(D::Error::custom))
            .collect()
    }
}
