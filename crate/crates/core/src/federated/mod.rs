//! The simulated federation: client sampling, secure aggregation, and
//! communication accounting.

mod ledger;
mod sampling;
mod secagg;

pub use ledger::{ceil_log2, CommLedger, Direction, Payload, RoundEntry};
pub use sampling::{sample_clients, SamplingDraw};
pub use secagg::{
    aggregate_mean, aggregate_sum, quantize, Aggregator, FixedPoint, MaskedVector, MaskingSession,
};
