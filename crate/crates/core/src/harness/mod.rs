//! Body specs, named fixtures, verification commands and reports.

pub mod commands;
pub mod detect;
pub mod report;
pub mod spec;

pub use commands::{
    detect_sum, equality_suite, exit_code_for, gaussian_suite, symmetrize_pipeline, uniqueness, verify_logbm,
    verify_logm, EqualityBuilder, Options, DEFAULT_LAMBDAS,
};
pub use detect::{blocks_from_normals, detect_direct_sum, Partition};
pub use report::{BoundKind, Format, Quantity, Relation, Report, Row, Status};
pub use spec::{emit_body_spec, parse_body_spec, parse_spec, BodySpec, ConstraintSpec, HalfspaceSpec, ReflectionSpec};
