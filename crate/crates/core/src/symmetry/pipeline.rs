//! Invariance tests, orthogonalization and the unconditionalization pipeline.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::Exp1;

use super::chamber::{chamber_cone, cone_map_phi, positivity_check, tiling_reps, ChamberCone};
use super::group::{generate_group, ReflectionGroup, GROUP_CAP};
use super::reflection::LinearReflection;
use crate::error::{Error, Result};
use crate::geometry::{loewner_ellipsoid, vrep_from_hrep_with_interior, Body, ConvexBody, HPolytope, Halfspace, VPolytope};
use crate::linalg::{sphere_sample, stream_rng, sym_sqrt, LinearMap, Vector};

/// Default tolerance of [`is_invariant`].
pub const INVARIANCE_TOL: f64 = 1e-8;
/// Largest accepted `|A^T A - I|` after orthogonalization.
pub const ORTHOGONALITY_TOL: f64 = 1e-7;
const INVARIANCE_DIRECTIONS: usize = 1000;

/// Whether `A K = K`: vertex-set equality for polytopes, otherwise
/// `h(A^T u) = h(u)` on a fixed grid of directions. `tol` is relative to the
/// circumradius.
pub fn is_invariant(body: &Body, a: &LinearMap, tol: f64) -> bool {
    let n = body.dim();
    if a.nrows() != n || a.ncols() != n {
        return false;
    }
    let scale = body.circumradius().max(1e-300);
    match body {
        Body::Polytope(p) => {
            let Ok(c) = p.canonical() else { return false };
            let vs = c.vertices();
            vs.iter().all(|v| {
                let w = a * v;
                vs.iter().any(|x| (x - &w).amax() <= tol * scale)
            })
        }
        _ => {
            let at = a.transpose();
            sphere_sample(n, INVARIANCE_DIRECTIONS, 0x1417).iter().all(|u| {
                match (body.support(&(&at * u)), body.support(u)) {
                    (Ok(x), Ok(y)) => (x - y).abs() <= tol * scale,
                    _ => false,
                }
            })
        }
    }
}

/// Orthogonal reflection through the hyperplane with unit normal `x`.
fn wall_reflection(x: &Vector) -> LinearMap {
    let n = x.len();
    DMatrix::identity(n, n) - x * x.transpose() * (2.0 / x.norm_squared())
}

/// `K ∩ C` for a polytope with the origin in its interior.
pub fn cone_section(k: &VPolytope, c: &ChamberCone) -> Result<VPolytope> {
    let r = k.inradius()?;
    if !(r > 0.0) {
        return Err(Error::OriginOutside("body must contain the origin in its interior".into()));
    }
    let h = k.to_hpolytope()?;
    let mut halfspaces: Vec<Halfspace> = h.halfspaces().to_vec();
    for x in c.normals() {
        halfspaces.push(Halfspace::new(x.clone(), 0.0)?);
    }
    let dir = c.interior_point().normalize();
    let z = dir * (0.5 * r);
    vrep_from_hrep_with_interior(&HPolytope::new(halfspaces)?, &z)
}

/// Maps `K ∩ C` by `phi` into the positive orthant and reflects it through
/// all coordinate sign patterns. Fails if the union is not convex.
pub fn unconditionalize(k: &VPolytope, c: &ChamberCone, phi: &LinearMap) -> Result<VPolytope> {
    let body = Body::Polytope(k.clone());
    for (i, x) in c.normals().iter().enumerate() {
        if !is_invariant(&body, &wall_reflection(x), INVARIANCE_TOL) {
            return Err(Error::Precondition(format!(
                "body is not invariant under the reflection through wall {}",
                i + 1
            )));
        }
    }
    if !positivity_check(c) {
        return Err(Error::Precondition("chamber has an obtuse pair of generators".into()));
    }
    let piece = cone_section(k, c)?.transform(phi)?.canonical()?;
    let scale = piece.circumradius().max(1.0);
    if piece.vertices().iter().any(|v| v.min() < -1e-9 * scale) {
        return Err(Error::Internal("mapped chamber piece leaves the positive orthant".into()));
    }
    let n = k.dim();
    let mut points = Vec::with_capacity(piece.vertices().len() << n);
    for mask in 0..(1usize << n) {
        for v in piece.vertices() {
            let mut w = v.clone();
            for i in 0..n {
                if mask >> i & 1 == 1 {
                    w[i] = -w[i];
                }
            }
            points.push(w);
        }
    }
    let hull = VPolytope::new(points)?.canonical()?;
    let union = piece.volume().value * (1usize << n) as f64;
    let v = hull.volume().value;
    let dev = (v - union).abs() / union.max(1e-300);
    if dev > 1e-8 {
        return Err(Error::Tolerance {
            what: "convexity of the reflected chamber piece".into(),
            deviation: dev,
            tolerance: 1e-8,
        });
    }
    Ok(hull)
}

/// Facets of `K` whose relative interior meets `int C`, and those among them
/// whose normal lies outside `C`.
#[derive(Debug, Clone, Default)]
pub struct NormalConeReport {
    pub facets_meeting: usize,
    pub violations: Vec<(Vector, f64)>,
}

pub fn normal_cone_check(k: &VPolytope, c: &ChamberCone, samples: usize, seed: u64) -> Result<NormalConeReport> {
    let facets = k.facets()?;
    let canon = k.canonical()?;
    let scale = canon.circumradius().max(1.0);
    let mut rng = stream_rng(seed, 7);
    let mut report = NormalConeReport::default();
    for f in &facets {
        let verts: Vec<&Vector> = canon
            .vertices()
            .iter()
            .filter(|v| (f.normal.dot(v) - f.offset).abs() <= 1e-9 * scale)
            .collect();
        let meets = (0..samples).any(|_| {
            let w: Vec<f64> = verts.iter().map(|_| rng.sample::<f64, _>(Exp1)).collect();
            let total: f64 = w.iter().sum();
            let z = verts
                .iter()
                .zip(&w)
                .fold(Vector::zeros(k.dim()), |a, (v, t)| a + *v * (*t / total));
            c.contains_interior(&z, 1e-9)
        });
        if meets {
            report.facets_meeting += 1;
            let excess = c.normals().iter().map(|x| x.dot(&f.normal)).fold(f64::NEG_INFINITY, f64::max);
            if excess > 1e-9 {
                report.violations.push((f.normal.clone(), excess));
            }
        }
    }
    Ok(report)
}

/// Result of conjugating a symmetric body into one with orthogonal
/// symmetries.
#[derive(Debug, Clone)]
pub struct Orthogonalized {
    /// Whitening map of the Löwner ellipsoid.
    pub phi: LinearMap,
    pub body: VPolytope,
    pub reflections: Vec<LinearReflection>,
    /// Largest `|B^T B - I|` over the conjugated reflections.
    pub deviation: f64,
}

/// Conjugates by the square root of the (group-averaged) Löwner shape matrix
/// so that the given reflections become orthogonal.
pub fn orthogonalize(k: &VPolytope, refs: &[LinearReflection]) -> Result<Orthogonalized> {
    let body = Body::Polytope(k.clone());
    for (i, r) in refs.iter().enumerate() {
        if !is_invariant(&body, r.map(), INVARIANCE_TOL) {
            return Err(Error::Precondition(format!("reflection {} is not a symmetry of the body", i + 1)));
        }
    }
    let group = generate_group(refs, GROUP_CAP)?;
    if !group.fix_space().is_trivial() {
        return Err(Error::Precondition("reflections fix a nonzero subspace".into()));
    }
    // The Löwner ellipsoid is centered once Fix = {0}; fitting it to K ∪ -K
    // keeps it group-invariant even if K itself is not symmetric.
    let mut sym: Vec<Vector> = k.vertices().to_vec();
    sym.extend(k.vertices().iter().map(|v| -v));
    let e = loewner_ellipsoid(&VPolytope::new(sym)?.canonical()?)?;
    let n = k.dim();
    let mut avg = DMatrix::zeros(n, n);
    for g in group.elements() {
        avg += g.transpose() * e.shape() * g;
    }
    avg /= group.order() as f64;
    let phi = sym_sqrt(&avg);
    let reflections = refs.iter().map(|r| r.conjugate(&phi)).collect::<Result<Vec<_>>>()?;
    let deviation = reflections.iter().map(|r| r.orthogonality_defect()).fold(0.0, f64::max);
    if deviation > ORTHOGONALITY_TOL {
        return Err(Error::Tolerance {
            what: "orthogonality of conjugated reflections".into(),
            deviation,
            tolerance: ORTHOGONALITY_TOL,
        });
    }
    Ok(Orthogonalized {
        body: k.transform(&phi)?,
        phi,
        reflections,
        deviation,
    })
}

/// Every intermediate object of the symmetrization chain.
#[derive(Debug, Clone)]
pub struct Symmetrization {
    pub orthogonalized: Option<Orthogonalized>,
    pub group: ReflectionGroup,
    pub chamber: ChamberCone,
    pub reps: Vec<LinearMap>,
    pub phi: LinearMap,
    pub cone_piece: VPolytope,
    pub unconditional: VPolytope,
    pub volume: f64,
    pub piece_volume: f64,
    pub unconditional_volume: f64,
}

impl Symmetrization {
    pub fn chamber_count(&self) -> usize {
        self.reps.len()
    }

    /// Relative error of `V(K) = l V(K ∩ C)`.
    pub fn tiling_defect(&self) -> f64 {
        let l = self.reps.len() as f64;
        (self.volume - l * self.piece_volume).abs() / self.volume
    }

    /// Relative error of `V(K̄) = 2^n |det Phi| V(K ∩ C)`.
    pub fn unconditional_defect(&self) -> f64 {
        let n = self.phi.nrows();
        let want = (1u64 << n) as f64 * self.phi.determinant().abs() * self.piece_volume;
        (self.unconditional_volume - want).abs() / want
    }
}

/// Runs orthogonalization (when some reflection is not orthogonal), group
/// generation, chamber construction, tiling, the cone map and
/// unconditionalization. Errors carry the name of the failing stage.
pub fn symmetrize(k: &VPolytope, refs: &[LinearReflection]) -> Result<Symmetrization> {
    if refs.is_empty() {
        return Err(Error::argument("no reflections given"));
    }
    let orthogonalized = if refs.iter().all(|r| r.is_orthogonal(1e-12)) {
        None
    } else {
        Some(orthogonalize(k, refs).map_err(|e| e.at_stage("orthogonalize"))?)
    };
    let (body, refs) = match &orthogonalized {
        Some(o) => (o.body.clone(), o.reflections.clone()),
        None => (k.clone(), refs.to_vec()),
    };
    let as_body = Body::Polytope(body.clone());
    for (i, r) in refs.iter().enumerate() {
        if !is_invariant(&as_body, r.map(), INVARIANCE_TOL) {
            return Err(Error::Precondition(format!("reflection {} is not a symmetry of the body", i + 1))
                .at_stage("invariance"));
        }
    }
    let group = generate_group(&refs, GROUP_CAP).map_err(|e| e.at_stage("generate_group"))?;
    let chamber = chamber_cone(&group).map_err(|e| e.at_stage("chamber_cone"))?;
    let reps = tiling_reps(&group, &chamber).map_err(|e| e.at_stage("tiling_reps"))?;
    let phi = cone_map_phi(&chamber).map_err(|e| e.at_stage("cone_map_phi"))?;
    let cone_piece = cone_section(&body, &chamber).map_err(|e| e.at_stage("cone_section"))?;
    let unconditional = unconditionalize(&body, &chamber, &phi).map_err(|e| e.at_stage("unconditionalize"))?;
    Ok(Symmetrization {
        volume: body.volume().value,
        piece_volume: cone_piece.volume().value,
        unconditional_volume: unconditional.volume().value,
        orthogonalized,
        group,
        chamber,
        reps,
        phi,
        cone_piece,
        unconditional,
    })
}
