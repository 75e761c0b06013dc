//! Linear and orthogonal reflections, finite group closure, chamber cones
//! and the unconditionalization pipeline.

mod chamber;
mod group;
mod pipeline;
mod reflection;

pub use chamber::{chamber_cone, cone_map_phi, positivity_check, tiling_reps, ChamberCone, CHAMBER_SEED, COVERAGE_SAMPLES};
pub use group::{fix_space, generate_group, ReflectionGroup, Subspace, GROUP_CAP, MATRIX_TOL};
pub use pipeline::{
    cone_section, is_invariant, normal_cone_check, orthogonalize, symmetrize, unconditionalize, NormalConeReport,
    Orthogonalized, Symmetrization, INVARIANCE_TOL, ORTHOGONALITY_TOL,
};
pub use reflection::LinearReflection;
