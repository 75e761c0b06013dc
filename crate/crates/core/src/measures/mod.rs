//! Surface-area and cone-volume measures, the log-Minkowski functional,
//! Gaussian and radial log-concave measures, and Prékopa-Leindler checks.

mod atoms;
mod montecarlo;
mod prekopa;

pub use atoms::{
    cone_volume_measure, log_minkowski_gap, log_minkowski_sides, surface_area_measure, AtomComparison,
    LogMinkowskiSides, SphericalAtomMeasure,
};
pub use montecarlo::{
    gaussian_measure, gaussian_measures, radial_logconcave_measure, McEstimate, RadialProfile, SamplerSpec, BATCH,
    DEFAULT_SAMPLES, DEFAULT_SEED, PROFILE_GRID,
};
pub use prekopa::{prekopa_leindler_check, rational_lambda, GridFunction, PrekopaLeindlerReport, MAX_DENOMINATOR};
