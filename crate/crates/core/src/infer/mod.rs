//! Monte Carlo and exact inference on surrogate ensembles.

mod bands;
mod ensemble;
mod exact;
mod pvalue;

pub use bands::{
    band_indices, corrected_curve, pointwise_bands, simultaneous_bands, simultaneous_bands_log, BandSet, Corrected,
    PointwiseBands, SimultaneousBands, MIN_BAND_SURROGATES, TIE_TOLERANCE,
};
pub use ensemble::SurrogateEnsemble;
pub use exact::{
    exact_sync_test, exact_sync_test_tilted, exact_sync_test_trials, poisson_binomial_pmf, poisson_binomial_tail,
    ExactTest,
};
pub use pvalue::{mc_pvalue, mc_pvalue_ensemble};
