//! Wulff-shape machinery: L0 combinations with certified two-sided volume
//! bounds, coordinatewise products, the derivative check and λ-profiles.

mod derivative;
mod grid;
mod product;
mod wulff;

pub use derivative::{
    alexandrov_derivative, lambda_profile, uniform_lambdas, volume_matched_cross, AlexandrovReport, ConcavityCheck,
    LambdaProfile, ProfilePoint, DEFAULT_T_STEPS, MATCH_RTOL, ROUNDING_FLOOR,
};
pub use grid::{direction_grid, DirectionGrid, GridSpec, MESH_SAFETY};
pub use product::{coordinatewise_product_inner, is_unconditional, PRODUCT_BUDGET};
pub use wulff::{
    combined_support, fan_rays, l0_combination, l0_combination_with, lipschitz_constant, minkowski_combination,
    mixed_support, volume_bounds, Certification, WulffApprox, WulffOptions,
};
