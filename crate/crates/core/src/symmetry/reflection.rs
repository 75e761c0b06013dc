//! Linear reflections: involutions fixing a hyperplane pointwise.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::linalg::{max_abs_diff, LinearMap, Vector};

/// `A x = x - 2 (<x, n> / <u, n>) u`, fixing `n^perp` and flipping `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearReflection {
    map: LinearMap,
    normal: Vector,
    flipped: Vector,
}

impl LinearReflection {
    pub fn new(nvec: &Vector, u: &Vector) -> Result<Self> {
        if nvec.len() != u.len() {
            return Err(Error::DimensionMismatch {
                expected: nvec.len(),
                got: u.len(),
            });
        }
        let (nn, un) = (nvec.norm(), u.norm());
        if !(nn > 0.0) || !(un > 0.0) {
            return Err(Error::argument("reflection needs nonzero mirror normal and flipped vector"));
        }
        let normal = nvec / nn;
        let mut flipped = u / un;
        let c = flipped.dot(&normal);
        if c.abs() < 1e-10 {
            return Err(Error::argument("flipped vector lies in the mirror"));
        }
        let n = normal.len();
        let map = DMatrix::identity(n, n) - &flipped * normal.transpose() * (2.0 / c);
        if c < 0.0 {
            flipped = -flipped;
        }
        Ok(LinearReflection { map, normal, flipped })
    }

    /// Orthogonal reflection through `nvec^perp`.
    pub fn orthogonal(nvec: &Vector) -> Result<Self> {
        Self::new(nvec, nvec)
    }

    /// Recovers the mirror and flipped direction of a matrix that is a linear
    /// reflection (within 1e-8), keeping the matrix itself.
    pub fn from_map(map: LinearMap) -> Result<Self> {
        let n = map.nrows();
        if map.ncols() != n {
            return Err(Error::argument("reflection matrix must be square"));
        }
        let id = DMatrix::identity(n, n);
        if !is_reflection_matrix(&map, 1e-8) {
            return Err(Error::argument("matrix is not a linear reflection"));
        }
        let d = &map - &id;
        let row = (0..n)
            .map(|i| d.row(i).transpose())
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("n >= 1");
        let col = (0..n)
            .map(|j| d.column(j).into_owned())
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .expect("n >= 1");
        let normal = canonical_sign(row.normalize());
        let mut flipped = col.normalize();
        if flipped.dot(&normal) < 0.0 {
            flipped = -flipped;
        }
        Ok(LinearReflection { map, normal, flipped })
    }

    pub fn map(&self) -> &LinearMap {
        &self.map
    }

    /// Unit normal of the mirror hyperplane.
    pub fn normal(&self) -> &Vector {
        &self.normal
    }

    /// Unit vector with `A u = -u`.
    pub fn flipped(&self) -> &Vector {
        &self.flipped
    }

    pub fn dim(&self) -> usize {
        self.normal.len()
    }

    pub fn apply(&self, x: &Vector) -> Vector {
        &self.map * x
    }

    /// Largest entry of `A^T A - I`.
    pub fn orthogonality_defect(&self) -> f64 {
        let n = self.dim();
        max_abs_diff(&(self.map.transpose() * &self.map), &DMatrix::identity(n, n))
    }

    pub fn is_orthogonal(&self, tol: f64) -> bool {
        self.orthogonality_defect() <= tol
    }

    /// Checks `A^2 = Id`, `det A = -1` and that `A` fixes a basis of the mirror.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let n = self.dim();
        let sq = max_abs_diff(&(&self.map * &self.map), &DMatrix::identity(n, n));
        if sq > tol {
            return Err(Error::Tolerance {
                what: "A^2 = Id".into(),
                deviation: sq,
                tolerance: tol,
            });
        }
        let det = (self.map.determinant() + 1.0).abs();
        if det > tol {
            return Err(Error::Tolerance {
                what: "det A = -1".into(),
                deviation: det,
                tolerance: tol,
            });
        }
        let basis = crate::linalg::null_space(&DMatrix::from_row_slice(1, n, self.normal.as_slice()), 1e-12);
        for b in basis {
            let dev = (&self.map * &b - &b).amax();
            if dev > tol {
                return Err(Error::Tolerance {
                    what: "A fixes its mirror".into(),
                    deviation: dev,
                    tolerance: tol,
                });
            }
        }
        Ok(())
    }

    /// `phi A phi^{-1}`.
    pub fn conjugate(&self, phi: &LinearMap) -> Result<Self> {
        let inv = phi.clone().try_inverse().ok_or_else(|| Error::argument("conjugating map is singular"))?;
        Self::from_map(phi * &self.map * inv)
    }
}

/// `A^2 = Id`, `det A = -1` and `rank(A - Id) = 1`, all within `tol`.
pub(crate) fn is_reflection_matrix(a: &LinearMap, tol: f64) -> bool {
    let n = a.nrows();
    let id = DMatrix::identity(n, n);
    if max_abs_diff(&(a * a), &id) > tol || (a.determinant() + 1.0).abs() > tol {
        return false;
    }
    let sv = (a - &id).singular_values();
    sv.iter().filter(|&&s| s > tol.sqrt()).count() == 1
}

/// Flips `v` so its first coordinate that is not ~0 is positive.
pub(crate) fn canonical_sign(v: Vector) -> Vector {
    match v.iter().find(|x| x.abs() > 1e-9) {
        Some(&x) if x < 0.0 => -v,
        _ => v,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{unit, vector};

    #[test]
    fn orthogonal_reflection_is_a_coordinate_flip() {
        let r = LinearReflection::orthogonal(&unit(3, 0)).unwrap();
        assert_eq!(r.map(), &DMatrix::from_diagonal(&vector(&[-1.0, 1.0, 1.0])));
        r.validate(1e-10).unwrap();
        assert!(r.is_orthogonal(1e-12));
    }

    #[test]
    fn oblique_reflection() {
        let u = vector(&[1.0, 1.0]) / 2f64.sqrt();
        let r = LinearReflection::new(&unit(2, 0), &u).unwrap();
        let want = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, -2.0, 1.0]);
        assert!(max_abs_diff(r.map(), &want) < 1e-12);
        assert!((r.apply(&vector(&[1.0, 1.0])) + vector(&[1.0, 1.0])).amax() < 1e-12);
        assert!((r.apply(&unit(2, 1)) - unit(2, 1)).amax() < 1e-12);
        assert!(max_abs_diff(&(r.map() * r.map()), &DMatrix::identity(2, 2)) < 1e-12);
        r.validate(1e-10).unwrap();
        assert!(!r.is_orthogonal(1e-3));
    }

    #[test]
    fn flipped_vector_in_mirror_is_rejected() {
        assert!(LinearReflection::new(&unit(2, 0), &unit(2, 1)).is_err());
    }

    #[test]
    fn from_map_recovers_data() {
        let r = LinearReflection::new(&vector(&[1.0, 2.0, -1.0]), &vector(&[0.5, 1.0, 1.0])).unwrap();
        let s = LinearReflection::from_map(r.map().clone()).unwrap();
        assert!((s.normal() - canonical_sign(r.normal().clone())).amax() < 1e-12);
        assert!((s.apply(s.flipped()) + s.flipped()).amax() < 1e-12);
        assert!(LinearReflection::from_map(DMatrix::identity(3, 3)).is_err());
    }
}
