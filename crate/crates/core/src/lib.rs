//! Streaming winner determination for proportional multiwinner elections.
//!
//! Chamberlin–Courant and Monroe committees under approval, Borda and general
//! positional scoring. A single pass over a vote stream keeps a sample whose
//! size depends on `(eps, k, m)` only; the sample is solved exactly by
//! committee enumeration. Exact solvers, balanced assignment via min-cost
//! flow, and adversarial gadget generators are provided for verification.

pub mod assignment;
pub mod election;
pub mod error;
mod flow;
pub mod format;
pub mod generators;
pub mod streaming;
pub mod winner;

pub use assignment::{brute_force_monroe_oracle, cc_assign, monroe_assign, Assignment};
pub use election::{
    BallotType, Committee, Election, RuleFamily, RuleSpec, ScoreVector, Scoring, Vote,
};
pub use error::{Error, Result};
pub use format::{StreamHeader, VoteReader};
pub use streaming::{
    sample_size, streaming_winner, SampleParams, SamplerChoice, StreamConfig, StreamOutcome,
    StreamStats,
};
pub use winner::{
    committee_score, epsilon_gap_check, exact_epsilon_winning_oracle, exact_winner, GapReport,
    WinnerResult,
};
