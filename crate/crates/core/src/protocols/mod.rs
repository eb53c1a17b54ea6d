//! One-way protocols: correlation sampling, the sample-and-learn protocols,
//! and an exhaustive optimal deterministic protocol for small inputs.

mod learning;
mod optimal;
mod runner;
mod sampler;

pub use learning::{sample_size_boolean, sample_size_nonboolean};
pub use optimal::{optimal_oneway, optimal_oneway_with_limit, OptimalProtocol, DEFAULT_MAX_OPTIMAL_ROWS};
pub use runner::{
    calibrate_m, run_boolean_protocol, run_nonboolean_protocol, OutputKind, ProtocolParams,
    ProtocolSetup, SamplingMode, StatsAccumulator, TranscriptStats, TrialOutcome,
    DEFAULT_JOINT_LIMIT, DEFAULT_MAX_M,
};
pub use sampler::{decode_index, encode_index, index_code_length, GreedyRejectionSampler, Proposal};
