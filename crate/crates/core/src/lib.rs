//! Fixed-length almost-lossless compression at finite blocklength.
//!
//! The crate computes the exact minimal rate of one-to-one codes for a
//! memoryless source, the ladder of closed-form approximations to it, the
//! tilted-distribution calculus those approximations rest on, type-class
//! census counts, and two working one-to-one codes (known-source and
//! universal).
//!
//! All rates and entropies are in bits; moments of log-probabilities are
//! in nats.

pub mod approximations;
pub mod codecs;
pub mod distributions;
pub mod error;
pub mod exponents;
pub mod limits;
pub mod numeric;
pub mod report;
pub mod types;

pub use approximations::{
    achievability_bound, achievability_constant, blahut_rate, converse_constants,
    delta_from_epsilon, ladder_row, pragmatic_rate, shannon_rate, strassen_rate,
    universal_rate_bound, CodeMode, ConverseConstants, RateLadder, UniversalRateBound,
};
pub use codecs::{decode, encode, CodeOrdering, Codeword, OrderingMode, UniversalThreshold};
pub use distributions::{tilt, tilted_derivatives, SourcePmf, TiltedDerivatives, TiltedPoint};
pub use error::{Error, Result};
pub use exponents::{
    delta_range, error_exponent, moment_envelope, solve_alpha_star, AlphaStarSolution, DeltaRange,
    MomentEnvelope,
};
pub use limits::{
    length_distribution, optimal_rate, LengthDistribution, OptimalRate, RationalPmf, TailPoint,
};
pub use types::{low_entropy_count, CensusReport, NType};
