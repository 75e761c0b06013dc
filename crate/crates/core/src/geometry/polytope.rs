//! Vertex- and halfspace-represented polytopes.
//!
//! Conversions go through the quickhull in [`super::hull`]; the literal
//! subset-enumeration routines ([`enumerate_vertices`], [`enumerate_facets`])
//! are kept for small inputs, for polytopes whose interior misses the origin,
//! and as an independent cross-check in tests.

use std::sync::{Arc, OnceLock};

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};

use super::hull::{convex_hull, Hull};
use crate::error::{Error, Result};
use crate::linalg::{dedup_points, lex_cmp, rank, LinearMap, Vector, MAX_DIM};

/// Geometric tolerance for O(1) coordinates.
pub const GEOM_TOL: f64 = 1e-9;

/// Largest number of index subsets the enumeration routines will visit.
const ENUMERATION_BUDGET: usize = 5_000_000;

/// Closed halfspace `<normal, x> <= offset` with a unit normal.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: Vector,
    pub offset: f64,
}

impl Halfspace {
    /// Normalizes `normal` to unit length, scaling the offset along with it.
    pub fn new(normal: Vector, offset: f64) -> Result<Self> {
        let len = normal.norm();
        if !(len > 0.0) || !offset.is_finite() || normal.iter().any(|x| !x.is_finite()) {
            return Err(Error::argument("halfspace needs a finite nonzero normal"));
        }
        Ok(Halfspace {
            normal: normal / len,
            offset: offset / len,
        })
    }
}

/// Facet data of a full-dimensional polytope.
#[derive(Debug, Clone)]
pub struct Facet {
    pub normal: Vector,
    pub offset: f64,
    /// (n-1)-dimensional Hausdorff measure of the facet.
    pub area: f64,
}

/// Volume together with a flag for lower-dimensional input (value 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Volume {
    pub value: f64,
    pub degenerate: bool,
}

#[derive(Debug, Clone)]
pub struct HPolytope {
    dim: usize,
    halfspaces: Vec<Halfspace>,
}

impl HPolytope {
    /// Builds a bounded H-polytope. Normals are normalized and exact
    /// duplicates (within 1e-12) are dropped.
    pub fn new(halfspaces: Vec<Halfspace>) -> Result<Self> {
        let p = Self::new_unchecked(halfspaces)?;
        p.check_bounded()?;
        Ok(p)
    }

    pub(crate) fn new_unchecked(halfspaces: Vec<Halfspace>) -> Result<Self> {
        let dim = halfspaces.first().map(|h| h.normal.len()).ok_or_else(|| Error::argument("no halfspaces"))?;
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::argument(format!("unsupported dimension {dim}")));
        }
        if let Some(h) = halfspaces.iter().find(|h| h.normal.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: h.normal.len(),
            });
        }
        let mut kept: Vec<Halfspace> = Vec::with_capacity(halfspaces.len());
        let keys: Vec<Vector> = halfspaces
            .iter()
            .map(|h| DVector::from_iterator(dim + 1, h.normal.iter().copied().chain([h.offset])))
            .collect();
        let unique = dedup_points(&keys, 1e-12);
        for k in unique {
            kept.push(Halfspace {
                normal: k.rows(0, dim).into_owned(),
                offset: k[dim],
            });
        }
        Ok(HPolytope { dim, halfspaces: kept })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn halfspaces(&self) -> &[Halfspace] {
        &self.halfspaces
    }

    /// Errors with a recession direction when the polytope is unbounded.
    pub fn check_bounded(&self) -> Result<()> {
        let n = self.dim;
        let mut pts: Vec<Vector> = self.halfspaces.iter().map(|h| h.normal.clone()).collect();
        pts.push(DVector::zeros(n));
        match convex_hull(&pts, GEOM_TOL) {
            Ok(h) => {
                if let Some(f) = h.faces.iter().find(|f| f.offset <= h.eps) {
                    return Err(Error::Unbounded {
                        direction: f.normal.iter().copied().collect(),
                    });
                }
                Ok(())
            }
            Err(Error::LowerDimensional { .. }) => {
                let m = DMatrix::from_fn(self.halfspaces.len(), n, |r, c| self.halfspaces[r].normal[c]);
                let ns = crate::linalg::null_space(&m, 1e-9);
                let dir = ns.first().cloned().unwrap_or_else(|| DVector::zeros(n));
                Err(Error::Unbounded {
                    direction: dir.iter().copied().collect(),
                })
            }
            Err(e) => Err(e),
        }
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.halfspaces.iter().all(|h| h.normal.dot(x) <= h.offset + tol)
    }

    /// Support value, solved through the vertex set.
    pub fn support(&self, u: &Vector) -> Result<f64> {
        self.to_vpolytope()?.support(u)
    }

    /// Vertex set. Uses the polar hull when the origin is strictly inside,
    /// otherwise enumerates n-subsets of constraints.
    pub fn to_vpolytope(&self) -> Result<VPolytope> {
        vrep_from_hrep(self)
    }

    /// The image `phi(P)`.
    pub fn transform(&self, phi: &LinearMap) -> Result<HPolytope> {
        let inv_t = phi
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::argument("transform is singular"))?
            .transpose();
        let hs = self
            .halfspaces
            .iter()
            .map(|h| Halfspace::new(&inv_t * &h.normal, h.offset))
            .collect::<Result<Vec<_>>>()?;
        HPolytope::new_unchecked(hs)
    }

    /// Translate so that `z` becomes the origin.
    fn translated(&self, z: &Vector) -> HPolytope {
        HPolytope {
            dim: self.dim,
            halfspaces: self
                .halfspaces
                .iter()
                .map(|h| Halfspace {
                    normal: h.normal.clone(),
                    offset: h.offset - h.normal.dot(z),
                })
                .collect(),
        }
    }
}

/// Vertex enumeration of a bounded H-polytope.
pub fn vrep_from_hrep(h: &HPolytope) -> Result<VPolytope> {
    let min_offset = h.halfspaces.iter().map(|s| s.offset).fold(f64::INFINITY, f64::min);
    let max_offset = h.halfspaces.iter().map(|s| s.offset.abs()).fold(0.0, f64::max);
    if min_offset > GEOM_TOL * max_offset.max(1.0) {
        return polar_vertices(h);
    }
    enumerate_vertices(h, GEOM_TOL)
}

/// Vertex enumeration when an interior point `z` is known.
pub fn vrep_from_hrep_with_interior(h: &HPolytope, z: &Vector) -> Result<VPolytope> {
    let moved = h.translated(z);
    let v = vrep_from_hrep(&moved)?;
    VPolytope::new(v.vertices.iter().map(|p| p + z).collect())
}

fn polar_vertices(h: &HPolytope) -> Result<VPolytope> {
    let dual: Vec<Vector> = h.halfspaces.iter().map(|s| &s.normal / s.offset).collect();
    let hull = match convex_hull(&dual, GEOM_TOL) {
        Ok(hull) => hull,
        Err(Error::LowerDimensional { .. }) => {
            h.check_bounded()?;
            return Err(Error::Internal("polar hull is flat for a bounded polytope".into()));
        }
        Err(e) => return Err(e),
    };
    let mut verts = Vec::with_capacity(hull.faces.len());
    for f in &hull.faces {
        if f.offset <= hull.eps {
            return Err(Error::Unbounded {
                direction: f.normal.iter().copied().collect(),
            });
        }
        verts.push(&f.normal / f.offset);
    }
    let scale = verts.iter().map(|v| v.amax()).fold(0.0, f64::max).max(1.0);
    VPolytope::new(dedup_points(&verts, GEOM_TOL * scale))
}

fn binomial(m: usize, k: usize) -> usize {
    if k > m {
        return 0;
    }
    let mut r: u128 = 1;
    for i in 0..k {
        r = r * (m - i) as u128 / (i + 1) as u128;
        if r > usize::MAX as u128 {
            return usize::MAX;
        }
    }
    r as usize
}

/// Solves every n-subset of constraints with a nonsingular normal matrix and
/// keeps the feasible solutions (within `tol`), merging duplicates.
pub fn enumerate_vertices(h: &HPolytope, tol: f64) -> Result<VPolytope> {
    let n = h.dim;
    let m = h.halfspaces.len();
    if binomial(m, n) > ENUMERATION_BUDGET {
        return Err(Error::argument(format!(
            "{m} halfspaces in R^{n} need a known interior point; translate the origin inside"
        )));
    }
    h.check_bounded()?;
    let mut out = Vec::new();
    for combo in (0..m).combinations(n) {
        let a = DMatrix::from_fn(n, n, |r, c| h.halfspaces[combo[r]].normal[c]);
        let b = DVector::from_fn(n, |r, _| h.halfspaces[combo[r]].offset);
        let lu = a.lu();
        if lu.determinant().abs() < 1e-12 {
            continue;
        }
        let Some(x) = lu.solve(&b) else { continue };
        if h.contains(&x, tol) {
            out.push(x);
        }
    }
    let verts = dedup_points(&out, tol);
    if verts.is_empty() {
        return Err(Error::LowerDimensional { dim: -1 });
    }
    let d = affine_dimension(&verts);
    if d < n as isize {
        return Err(Error::LowerDimensional { dim: d });
    }
    VPolytope::new(verts)
}

/// Affine hull dimension of a nonempty point set.
pub fn affine_dimension(points: &[Vector]) -> isize {
    if points.is_empty() {
        return -1;
    }
    let diffs: Vec<Vector> = points[1..].iter().map(|p| p - &points[0]).collect();
    if diffs.is_empty() {
        return 0;
    }
    rank(&diffs, GEOM_TOL) as isize
}

/// Every n-subset of vertices spanning a hyperplane that supports all the
/// vertices (within `tol`) contributes a facet; coplanar duplicates merge.
pub fn enumerate_facets(v: &VPolytope, tol: f64) -> Result<HPolytope> {
    let n = v.dim;
    let pts = &v.vertices;
    let d = affine_dimension(pts);
    if d < n as isize {
        return Err(Error::LowerDimensional { dim: d });
    }
    if binomial(pts.len(), n) > ENUMERATION_BUDGET {
        return Err(Error::argument("too many vertices for subset enumeration"));
    }
    let centroid = pts.iter().fold(DVector::zeros(n), |a, p| a + p) / pts.len() as f64;
    let mut found: Vec<Halfspace> = Vec::new();
    for combo in (0..pts.len()).combinations(n) {
        let base = &pts[combo[0]];
        let mut rows = Vec::with_capacity((n - 1) * n);
        for &i in &combo[1..] {
            rows.extend((&pts[i] - base).iter());
        }
        let nv = crate::linalg::cofactor_normal(&rows, n);
        let len = crate::linalg::norm(&nv);
        if len < 1e-12 {
            continue;
        }
        let mut normal = DVector::from_vec(nv) / len;
        let mut off = normal.dot(base);
        if normal.dot(&centroid) > off {
            normal = -normal;
            off = -off;
        }
        if pts.iter().all(|p| normal.dot(p) <= off + tol)
            && !found
                .iter()
                .any(|f| (&f.normal - &normal).amax() <= tol && (f.offset - off).abs() <= tol)
        {
            found.push(Halfspace { normal, offset: off });
        }
    }
    HPolytope::new_unchecked(found)
}

/// A polytope given by points whose convex hull it is.
#[derive(Debug, Clone)]
pub struct VPolytope {
    dim: usize,
    vertices: Vec<Vector>,
    hull: OnceLock<std::result::Result<Arc<Hull>, Error>>,
}

impl VPolytope {
    pub fn new(vertices: Vec<Vector>) -> Result<Self> {
        let dim = vertices.first().map(|v| v.len()).ok_or_else(|| Error::argument("empty vertex list"))?;
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::argument(format!("unsupported dimension {dim}")));
        }
        if let Some(v) = vertices.iter().find(|v| v.len() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: v.len(),
            });
        }
        if vertices.iter().any(|v| v.iter().any(|x| !x.is_finite())) {
            return Err(Error::argument("non-finite vertex coordinate"));
        }
        Ok(VPolytope {
            dim,
            vertices,
            hull: OnceLock::new(),
        })
    }

    pub fn from_coords(rows: &[&[f64]]) -> Result<Self> {
        Self::new(rows.iter().map(|r| DVector::from_column_slice(r)).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    pub(crate) fn hull(&self) -> Result<&Hull> {
        self.hull
            .get_or_init(|| convex_hull(&self.vertices, GEOM_TOL).map(Arc::new))
            .as_ref()
            .map(|h| h.as_ref())
            .map_err(Clone::clone)
    }

    pub fn is_full_dimensional(&self) -> bool {
        self.hull().is_ok()
    }

    /// Extreme points only, deduplicated and sorted lexicographically.
    /// Lower-dimensional inputs are deduplicated and sorted but not reduced.
    pub fn canonical(&self) -> Result<VPolytope> {
        let mut pts = match self.hull() {
            Ok(h) => h.extreme.iter().map(|&i| self.vertices[i].clone()).collect(),
            Err(Error::LowerDimensional { .. }) => dedup_points(&self.vertices, GEOM_TOL),
            Err(e) => return Err(e),
        };
        pts = dedup_points(&pts, GEOM_TOL);
        pts.sort_by(lex_cmp);
        VPolytope::new(pts)
    }

    pub fn support(&self, u: &Vector) -> Result<f64> {
        check_direction(u, self.dim)?;
        Ok(self.vertices.iter().map(|v| v.dot(u)).fold(f64::NEG_INFINITY, f64::max))
    }

    /// A vertex attaining the support value in direction `u`.
    pub fn support_point(&self, u: &Vector) -> &Vector {
        self.vertices
            .iter()
            .max_by(|a, b| a.dot(u).total_cmp(&b.dot(u)))
            .expect("nonempty")
    }

    /// Exact volume, fanned from the vertex centroid over the triangulated
    /// boundary. Lower-dimensional input yields 0 with `degenerate` set.
    pub fn volume(&self) -> Volume {
        match self.hull() {
            Ok(h) => {
                let centroid = h.extreme.iter().fold(DVector::zeros(self.dim), |a, &i| a + &self.vertices[i])
                    / h.extreme.len() as f64;
                Volume {
                    value: h.volume_from(&centroid).max(0.0),
                    degenerate: false,
                }
            }
            Err(_) => Volume {
                value: 0.0,
                degenerate: true,
            },
        }
    }

    /// One entry per facet: unit outer normal, support value, facet area.
    pub fn facets(&self) -> Result<Vec<Facet>> {
        let h = self.hull()?;
        let mut out: Vec<Facet> = h
            .faces
            .iter()
            .map(|f| Facet {
                normal: f.normal.clone(),
                offset: f.vertices.iter().map(|&v| f.normal.dot(&self.vertices[v])).fold(f64::NEG_INFINITY, f64::max),
                area: f.area,
            })
            .collect();
        out.sort_by(|a, b| lex_cmp(&a.normal, &b.normal));
        Ok(out)
    }

    pub fn to_hpolytope(&self) -> Result<HPolytope> {
        hrep_from_vrep(self)
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        match self.hull() {
            Ok(h) => h.contains(x, tol),
            Err(_) => false,
        }
    }

    pub fn transform(&self, phi: &LinearMap) -> Result<VPolytope> {
        if phi.nrows() != self.dim || phi.ncols() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: phi.nrows(),
            });
        }
        VPolytope::new(self.vertices.iter().map(|v| phi * v).collect())
    }

    pub fn scaled(&self, c: f64) -> VPolytope {
        VPolytope::new(self.vertices.iter().map(|v| v * c).collect()).expect("scaling keeps validity")
    }

    /// Largest vertex norm.
    pub fn circumradius(&self) -> f64 {
        self.vertices.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// Radius of the largest origin-centered ball inside (0 if the origin is
    /// not interior).
    pub fn inradius(&self) -> Result<f64> {
        let h = self.hull()?;
        Ok(h.faces.iter().map(|f| f.offset).fold(f64::INFINITY, f64::min).max(0.0))
    }

    pub fn is_origin_symmetric(&self, tol: f64) -> bool {
        self.vertices
            .iter()
            .all(|v| self.vertices.iter().any(|w| (v + w).amax() <= tol))
    }
}

/// Facet description of a full-dimensional V-polytope, one halfspace per
/// facet with unit outward normal.
pub fn hrep_from_vrep(v: &VPolytope) -> Result<HPolytope> {
    let facets = v.facets()?;
    HPolytope::new_unchecked(
        facets
            .into_iter()
            .map(|f| Halfspace {
                normal: f.normal,
                offset: f.offset,
            })
            .collect(),
    )
}

/// Convex hull of pairwise vertex sums, canonicalized.
pub fn minkowski_sum(a: &VPolytope, b: &VPolytope) -> Result<VPolytope> {
    if a.dim != b.dim {
        return Err(Error::DimensionMismatch {
            expected: a.dim,
            got: b.dim,
        });
    }
    let ca = a.canonical()?;
    let cb = b.canonical()?;
    let sums: Vec<Vector> = ca
        .vertices
        .iter()
        .flat_map(|p| cb.vertices.iter().map(move |q| p + q))
        .collect();
    VPolytope::new(sums)?.canonical()
}

pub(crate) fn check_direction(u: &Vector, dim: usize) -> Result<()> {
    if u.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: u.len(),
        });
    }
    if !(u.norm() > 0.0) {
        return Err(Error::argument("zero direction"));
    }
    Ok(())
}
