use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::dist::IntervalLayout;
use crate::{Error, Result};

/// Default cap on the total number of elements a prover may send in one
/// sets message.
pub const DEFAULT_SET_CAP: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    PaperCalibrated,
    Raw,
    TrivialFallback,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolParams {
    pub n: u32,
    pub eps_prime: f64,
    pub delta_prime: f64,
    pub eps: f64,
    pub delta: f64,
    pub t: usize,
    pub gap_size_raw: f64,
    pub interval_size_raw: f64,
    pub gap_size: usize,
    pub interval_size: usize,
    pub samp_gap: f64,
    pub mode: Mode,
    #[serde(default = "default_cap")]
    pub set_cap: usize,
}

fn default_cap() -> usize {
    DEFAULT_SET_CAP
}

fn check_unit(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParams(format!("{name} must lie in (0,1), got {v}")))
    }
}

/// `log2(t * I' * 2^{2 I' eps} / eps^4)`, evaluated in the log domain.
pub fn samp_gap_formula(t: usize, interval_raw: f64, eps: f64) -> f64 {
    (t as f64).log2() + interval_raw.log2() + 2.0 * interval_raw * eps - 4.0 * eps.log2()
}

/// Whether the large-`n` assumption `(9000/eps')^{16/delta'} <= 2^{n/50}`
/// fails, compared in the log domain.
pub fn needs_fallback(n: u64, eps_prime: f64, delta_prime: f64) -> bool {
    (16.0 / delta_prime) * (9000.0 / eps_prime).log2() > n as f64 / 50.0
}

/// Closed forms shared by paper and raw construction.
fn from_formulas(n: u64, eps: f64, delta: f64) -> (usize, f64, f64, usize, usize, f64) {
    let t = (2.0 * n as f64 / eps).ceil() as usize;
    let gap_raw = (2.0 / eps) * (1.0 / eps).log2();
    let interval_raw = gap_raw / delta;
    let gap = (gap_raw.ceil() as usize).max(1);
    let interval = (interval_raw / gap as f64).ceil().max(1.0) as usize * gap;
    let samp_gap = samp_gap_formula(t, interval_raw, eps);
    (t, gap_raw, interval_raw, gap, interval, samp_gap)
}

/// The paper-calibrated quantities for any `n`, ignoring the fallback rule
/// and the 64-bit cap. Only useful for inspecting the formulas; `n` is
/// truncated to `u32::MAX`.
pub fn paper_formulas(n: u64, eps_prime: f64, delta_prime: f64) -> Result<ProtocolParams> {
    check_unit("eps'", eps_prime)?;
    check_unit("delta'", delta_prime)?;
    let eps = eps_prime / 9000.0;
    let delta = delta_prime / 16.0;
    let (t, gap_raw, interval_raw, gap, interval, samp_gap) = from_formulas(n, eps, delta);
    Ok(ProtocolParams {
        n: n.min(u32::MAX as u64) as u32,
        eps_prime,
        delta_prime,
        eps,
        delta,
        t,
        gap_size_raw: gap_raw,
        interval_size_raw: interval_raw,
        gap_size: gap,
        interval_size: interval,
        samp_gap,
        mode: if needs_fallback(n, eps_prime, delta_prime) {
            Mode::TrivialFallback
        } else {
            Mode::PaperCalibrated
        },
        set_cap: DEFAULT_SET_CAP,
    })
}

/// Parameters the verifier runs with on input `(n, eps', delta')`.
pub fn derive_params(n: u32, eps_prime: f64, delta_prime: f64) -> Result<ProtocolParams> {
    if n == 0 || n > 64 {
        return Err(Error::InvalidParams(format!("n must lie in 1..=64, got {n}")));
    }
    let p = paper_formulas(n as u64, eps_prime, delta_prime)?;
    if p.mode == Mode::PaperCalibrated {
        p.check_paper_claims()?;
    }
    Ok(p)
}

impl ProtocolParams {
    /// Raw mode with every constant supplied directly. Only structural
    /// invariants are checked.
    pub fn raw(
        n: u32,
        eps: f64,
        delta: f64,
        t: usize,
        gap: usize,
        interval: usize,
        samp_gap: f64,
    ) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::InvalidParams(format!("n must lie in 1..=64, got {n}")));
        }
        if !(eps > 0.0 && eps.is_finite()) || !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParams("eps and delta must be positive".into()));
        }
        if t == 0 || !samp_gap.is_finite() {
            return Err(Error::InvalidParams("need t >= 1 and a finite samp_gap".into()));
        }
        IntervalLayout::new(t, gap, interval)?;
        Ok(Self {
            n,
            eps_prime: eps,
            delta_prime: delta,
            eps,
            delta,
            t,
            gap_size_raw: gap as f64,
            interval_size_raw: interval as f64,
            gap_size: gap,
            interval_size: interval,
            samp_gap,
            mode: Mode::Raw,
            set_cap: DEFAULT_SET_CAP,
        })
    }

    /// Raw mode using the closed forms for `t`, `G`, `I` and the sampling gap
    /// but with `eps` and `delta` taken as given (no rescaling, no
    /// large-`n` assumption).
    pub fn raw_from_formulas(n: u32, eps: f64, delta: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta <= 1.0) {
            return Err(Error::InvalidParams(
                "raw formulas need eps in (0,1) and delta in (0,1]".into(),
            ));
        }
        let (t, gap_raw, interval_raw, gap, interval, samp_gap) =
            from_formulas(n as u64, eps, delta);
        let mut p = Self::raw(n, eps, delta, t, gap, interval, samp_gap)?;
        p.gap_size_raw = gap_raw;
        p.interval_size_raw = interval_raw;
        Ok(p)
    }

    /// Trivial-fallback parameters; only `n` matters.
    pub fn trivial(n: u32) -> Result<Self> {
        let mut p = Self::raw(n, 0.5, 0.5, 1, 1, 1, 0.0)?;
        p.mode = Mode::TrivialFallback;
        Ok(p)
    }

    pub fn with_set_cap(mut self, cap: usize) -> Self {
        self.set_cap = cap;
        self
    }

    pub fn layout(&self) -> IntervalLayout {
        IntervalLayout::new(self.t, self.gap_size, self.interval_size)
            .expect("validated at construction")
    }

    /// Threshold `eps / (2t)` defining `N`.
    pub fn n_threshold(&self) -> f64 {
        self.eps / (2.0 * self.t as f64)
    }

    pub fn num_intervals(&self) -> usize {
        self.layout().k_max + 1
    }

    /// Structural properties the paper-calibrated constants must satisfy.
    pub fn check_paper_claims(&self) -> Result<()> {
        let (g, i) = (self.gap_size, self.interval_size);
        let bad = |m: &str| Err(Error::InvalidParams(m.to_string()));
        if g == 0 || i == 0 || i % g != 0 {
            return bad("I, G and I/G must be positive integers");
        }
        let ir = self.interval_size_raw;
        if !(ir <= i as f64 && i as f64 <= 2.0 * ir) {
            return bad("I must lie in [I', 2I']");
        }
        if self.num_intervals() < 25 {
            return bad("fewer than 25 intervals");
        }
        Ok(())
    }

    /// Short stable digest of the parameter set for transcript logs.
    pub fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("params serialize");
        let hash = Sha256::digest(canonical.as_bytes());
        hex::encode(&hash[..8])
    }
}
