//! Polytopes, quadric and oracle bodies, volumes, normals and the Löwner
//! ellipsoid.

mod body;
mod ellipsoid;
pub(crate) mod hull;
mod polytope;
mod quadric;

pub use body::{unit_ball_volume, Body, ConvexBody, OracleBody};
pub use ellipsoid::{loewner_ellipsoid, loewner_ellipsoid_with_gap, Ellipsoid, LOEWNER_GAP};
pub use polytope::{
    affine_dimension, enumerate_facets, enumerate_vertices, hrep_from_vrep, minkowski_sum, vrep_from_hrep,
    vrep_from_hrep_with_interior, Facet, HPolytope, Halfspace, VPolytope, Volume, GEOM_TOL,
};

pub use quadric::{BoundaryNormal, QuadricBody, QuadricConstraint, QuadricSupportConfig};
