//! Decay fitting, optimal working points, `df/dB` extrema and field sweeps.

mod fit;
pub mod lm;
mod owp;
pub mod roots;
mod sweep;

pub use fit::{
    divergence_bound, fit_curve, fit_decay, DecayFit, DIVERGENCE_LEVEL, MIN_POINTS, NOISE_FLOOR, SETTLED_DRIFT,
};
pub use owp::{
    find_df_db_extrema, find_owp, DfDbExtremum, ExtremumKind, OwpReport, ALLOWED_SX, SCAN_STEPS, SEARCH_RANGE,
};
pub use sweep::{entry_seed, monotonicity_violations, tsd_sweep, SweepEntry, SweepOptions, SweepResult};
