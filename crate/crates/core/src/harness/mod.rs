//! Verification harness: exact type-class probabilities, Monte Carlo decay
//! rates, exponential equivalence of the discretized empirical measure,
//! entropy minimization over BL balls, and the union-bound chains that
//! compare discretized and undiscretized rates.

mod ball;
mod chain;
mod mc;
mod types;

pub use ball::{ball_inf_entropy, BallInf};
pub use chain::{proposition_chain_check, supinf_ladder, ChainReport, ChainSide, SupInfLadder};
pub use mc::{
    draw_replicate, exp_equivalence_check, mc_rate, replicate_stream, wilson_interval, BallSet, ExpEquivalenceReport, RateReport, RateRow,
    CERTIFY_BELOW, EXACT_SPOT_CHECKS, WILSON_Z,
};
pub use types::{
    half_space_inf_entropy, type_count, types_events, types_events_by_counts, types_probability, types_probability_by_counts, TypesProbability,
    TYPES_GUARD,
};
