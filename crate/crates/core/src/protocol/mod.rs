//! The sampling protocol: parameters, messages, verifier and honest prover.

mod coins;
mod messages;
mod params;
mod prover;
mod verifier;

pub use coins::{weighted_choice, weighted_index, CoinKind, CoinSource, RandomCoins, ReplayCoins};
pub use messages::{Coins, ListEntry, Message, Outcome, OutputProb, RejectReason, Transcript};
pub use params::{
    derive_params, needs_fallback, paper_formulas, samp_gap_formula, Mode, ProtocolParams,
    DEFAULT_SET_CAP,
};
pub use prover::{
    bucket_lists, pick_realization, ChallengeContext, HonestFactory, HonestProver, Prover,
    ProverFactory,
};
pub use verifier::{
    bucket_top, challenge_shape, check_sets, choose_challenge, choose_element, finalize, log_mass,
    replay, run_protocol, run_with_coins, shift_weights, size_bounds, trivial_protocol,
    valid_full_list, verifier_round1, ChallengeShape,
};
