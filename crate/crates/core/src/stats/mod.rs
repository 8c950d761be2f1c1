//! Test statistics for original and surrogate datasets.

mod cch;
mod psth;
mod sync;
mod triplets;
mod tuning;

pub use cch::{cch, cch_trains, CchCurve, CCH_HALF_WIDTH, CCH_MAX_INDEX, CCH_STEP};
pub use psth::{psth, Psth, PSTH_GRID, PSTH_WIDTH};
pub use sync::{sync_pairs, sync_pairs_trains, sync_participation, sync_participation_trials};
pub use triplets::{repeating_triplets, TripletHistogram, TRIPLET_MAX_MS};
pub use tuning::{
    event_process, lr_tuning_curve, movement_directions, wrapped_kde, Kinematics, TuningCurve, KDE_CUTOFF,
    TUNING_DENSITY_FLOOR,
};
