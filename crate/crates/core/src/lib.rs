//! Simulator for a constant-round public-coin protocol that samples an
//! element `x` together with its probability `p` from a distribution known
//! only to the prover.
//!
//! The crate is organised bottom-up:
//!
//! * [`dist`]: exact rational distributions, `(eps, t)`-histograms and the
//!   interval/gap layout the verifier samples over.
//! * [`hash3`]: a 3-wise independent hash family over `GF(2^n)`.
//! * [`protocol`]: parameters, messages, the verifier state machine, the
//!   honest prover and the exponential-size fallback protocol.
//! * [`adversaries`]: cheating provers (mixtures, rejecting, inflating,
//!   scripted).
//! * [`oracle`]: exact enumeration of the verifier's output distribution and
//!   the structural quantities used to reason about it.
//! * [`harness`]: seeded Monte Carlo estimation and Hoeffding sample sizing.
//! * [`ip2am`]: compiling a private-coin protocol into a public-coin one on
//!   top of the sampling protocol.

pub mod adversaries;
pub mod dist;
pub mod error;
pub mod harness;
pub mod hash3;
pub mod ip2am;
pub mod oracle;
pub mod par;
pub mod protocol;
pub mod rational;

pub use error::{Error, Result};

/// Global tolerance for real-valued verifier comparisons.
pub const TAU: f64 = 1e-12;
