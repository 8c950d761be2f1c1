//! Conditional-inference resampling for spike trains.
//!
//! The crate covers the full pipeline: synthetic point-process generators
//! ([`synth`]), surrogate engines that resample data under explicit null
//! hypotheses ([`resample`]), test statistics ([`stats`]), Monte Carlo and exact
//! inference ([`infer`]), and extremal densities for tilted jitter ([`tilt`]).

pub mod error;
pub mod experiment;
pub mod infer;
pub mod intervals;
pub mod io;
pub mod pattern;
pub mod pipeline;
pub mod resample;
pub mod rng;
pub mod stats;
pub mod synth;
pub mod tilt;
pub mod train;
pub mod window;

pub use error::{JitterError, Result};
pub use intervals::IntervalSet;
pub use pattern::{pattern_decompose, pattern_encode, pattern_spans, PatternEncoding, PatternRow};
pub use resample::{Method, Resampler, SurrogateSpec};
pub use rng::RngStream;
pub use train::{SpikeTrain, TrialSet};
pub use window::{interval_counts, IntervalCounts, Slot, WindowPartition};
