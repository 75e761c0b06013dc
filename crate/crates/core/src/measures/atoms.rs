//! Surface-area and cone-volume measures of polytopes and the
//! log-Minkowski functional.

use crate::error::{Error, Result};
use crate::geometry::{Body, ConvexBody, VPolytope};
use crate::linalg::{lex_cmp, max_norm_dist, Vector};

/// Finitely many weighted directions on the unit sphere.
#[derive(Debug, Clone, PartialEq)]
pub struct SphericalAtomMeasure {
    atoms: Vec<(Vector, f64)>,
}

/// Result of comparing two atom measures.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomComparison {
    pub equal: bool,
    /// Largest weight difference over matched or unmatched atoms.
    pub max_discrepancy: f64,
    /// Directions where the measures differ beyond the tolerance, with the
    /// weights on each side (0 for a missing atom).
    pub discrepant: Vec<(Vector, f64, f64)>,
}

impl SphericalAtomMeasure {
    /// Atoms are sorted lexicographically by direction. Directions must be
    /// unit (within 1e-9) and pairwise distinct; weights nonnegative.
    pub fn new(mut atoms: Vec<(Vector, f64)>) -> Result<Self> {
        for (u, w) in &atoms {
            if (u.norm() - 1.0).abs() > 1e-9 {
                return Err(Error::argument("atom direction is not a unit vector"));
            }
            if !(*w >= 0.0) || !w.is_finite() {
                return Err(Error::argument("atom weight must be finite and nonnegative"));
            }
        }
        atoms.sort_by(|a, b| lex_cmp(&a.0, &b.0));
        if let Some(i) = (0..atoms.len()).find(|&i| {
            atoms[i + 1..].iter().any(|b| max_norm_dist(&atoms[i].0, &b.0) <= 1e-9)
        }) {
            return Err(Error::argument(format!("duplicate atom direction at index {i}")));
        }
        Ok(SphericalAtomMeasure { atoms })
    }

    pub fn atoms(&self) -> &[(Vector, f64)] {
        &self.atoms
    }

    pub fn total(&self) -> f64 {
        self.atoms.iter().map(|a| a.1).sum()
    }

    /// `sum_j w_j f(u_j)`.
    pub fn integrate(&self, mut f: impl FnMut(&Vector) -> Result<f64>) -> Result<f64> {
        let mut s = 0.0;
        for (u, w) in &self.atoms {
            s += w * f(u)?;
        }
        Ok(s)
    }

    /// Matches atoms whose directions agree within `tol` and compares their
    /// weights within `tol`.
    pub fn compare(&self, other: &SphericalAtomMeasure, tol: f64) -> AtomComparison {
        let mut used = vec![false; other.atoms.len()];
        let mut discrepant = Vec::new();
        let mut max_discrepancy: f64 = 0.0;
        for (u, w) in &self.atoms {
            let m = other
                .atoms
                .iter()
                .enumerate()
                .find(|(j, (v, _))| !used[*j] && max_norm_dist(u, v) <= tol);
            let w2 = match m {
                Some((j, (_, w2))) => {
                    used[j] = true;
                    *w2
                }
                None => 0.0,
            };
            let d = (w - w2).abs();
            max_discrepancy = max_discrepancy.max(d);
            if d > tol || m.is_none() {
                discrepant.push((u.clone(), *w, w2));
            }
        }
        for (j, (v, w2)) in other.atoms.iter().enumerate() {
            if !used[j] {
                max_discrepancy = max_discrepancy.max(*w2);
                discrepant.push((v.clone(), 0.0, *w2));
            }
        }
        discrepant.sort_by(|a, b| (b.1 - b.2).abs().total_cmp(&(a.1 - a.2).abs()).then(lex_cmp(&a.0, &b.0)));
        AtomComparison {
            equal: discrepant.is_empty(),
            max_discrepancy,
            discrepant,
        }
    }
}

/// Atoms at the facet normals weighted by facet areas.
pub fn surface_area_measure(p: &VPolytope) -> Result<SphericalAtomMeasure> {
    let facets = p.facets()?;
    SphericalAtomMeasure::new(facets.into_iter().map(|f| (f.normal, f.area)).collect())
}

/// Atoms at the facet normals weighted by `h * area / n`.
pub fn cone_volume_measure(p: &VPolytope) -> Result<SphericalAtomMeasure> {
    let facets = p.facets()?;
    let n = p.dim() as f64;
    let scale = p.circumradius().max(1e-300);
    if let Some(f) = facets.iter().find(|f| f.offset <= 1e-12 * scale) {
        return Err(Error::OriginOutside(format!(
            "facet with normal {:?} has support value {:e}",
            f.normal.as_slice(),
            f.offset
        )));
    }
    SphericalAtomMeasure::new(facets.into_iter().map(|f| (f.normal, f.offset * f.area / n)).collect())
}

/// Both sides of the log-Minkowski inequality for `(K, L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogMinkowskiSides {
    /// `∫ log(h_L / h_K) dV_K`
    pub lhs: f64,
    /// `V(K)/n · log(V(L)/V(K))`
    pub rhs: f64,
}

impl LogMinkowskiSides {
    pub fn gap(&self) -> f64 {
        self.lhs - self.rhs
    }
}

/// `∫ log(h_L/h_K) dV_K − V(K)/n · log(V(L)/V(K))`. `volume_l` overrides the
/// volume of `L` (required when `L` carries none).
pub fn log_minkowski_gap(k: &VPolytope, l: &Body, volume_l: Option<f64>) -> Result<f64> {
    Ok(log_minkowski_sides(k, l, volume_l)?.gap())
}

pub fn log_minkowski_sides(k: &VPolytope, l: &Body, volume_l: Option<f64>) -> Result<LogMinkowskiSides> {
    if k.dim() != l.dim() {
        return Err(Error::DimensionMismatch {
            expected: k.dim(),
            got: l.dim(),
        });
    }
    let vk_measure = cone_volume_measure(k)?;
    let lhs = vk_measure.integrate(|u| {
        let hk = k.support(u)?;
        let hl = l.support(u)?;
        if !(hk > 0.0) || !(hl > 0.0) {
            return Err(Error::OriginOutside(format!("nonpositive support value in direction {:?}", u.as_slice())));
        }
        Ok((hl / hk).ln())
    })?;
    let vk = k.volume().value;
    let vl = volume_l
        .or_else(|| l.volume())
        .ok_or_else(|| Error::argument("volume of L is required"))?;
    if !(vl > 0.0) || !(vk > 0.0) {
        return Err(Error::argument("volumes must be positive"));
    }
    let n = k.dim() as f64;
    Ok(LogMinkowskiSides {
        lhs,
        rhs: vk / n * (vl / vk).ln(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::vector;

    fn cube(a: f64) -> VPolytope {
        let v = (0..8)
            .map(|m| vector(&[0, 1, 2].map(|i| if m >> i & 1 == 1 { a } else { -a })))
            .collect();
        VPolytope::new(v).unwrap()
    }

    fn cross() -> VPolytope {
        let mut v = Vec::new();
        for i in 0..3 {
            for s in [-1.0, 1.0] {
                let mut e = Vector::zeros(3);
                e[i] = s;
                v.push(e);
            }
        }
        VPolytope::new(v).unwrap()
    }

    #[test]
    fn cube_measures() {
        let s = surface_area_measure(&cube(1.0)).unwrap();
        assert_eq!(s.atoms().len(), 6);
        assert!(s.atoms().iter().all(|a| (a.1 - 4.0).abs() < 1e-12));
        let v = cone_volume_measure(&cube(1.0)).unwrap();
        assert!(v.atoms().iter().all(|a| (a.1 - 4.0 / 3.0).abs() < 1e-12));
        assert!((v.total() - 8.0).abs() < 1e-10);
        let v2 = cone_volume_measure(&cube(2.0)).unwrap();
        for (a, b) in v.atoms().iter().zip(v2.atoms()) {
            assert!((b.1 - 8.0 * a.1).abs() < 1e-10);
        }
    }

    #[test]
    fn cross_polytope_surface_measure() {
        let s = surface_area_measure(&cross()).unwrap();
        assert_eq!(s.atoms().len(), 8);
        for (u, w) in s.atoms() {
            assert!((w - 3f64.sqrt() / 2.0).abs() < 1e-12);
            assert!(u.iter().all(|x| (x.abs() - 1.0 / 3f64.sqrt()).abs() < 1e-12));
        }
    }

    #[test]
    fn degenerate_and_boundary_origin_inputs() {
        let seg = VPolytope::from_coords(&[&[1.0, 0.0], &[-1.0, 0.0]]).unwrap();
        assert!(matches!(surface_area_measure(&seg), Err(Error::LowerDimensional { .. })));
        let tri = VPolytope::from_coords(&[&[0.0, 0.0], &[1.0, 0.0], &[0.0, 1.0]]).unwrap();
        assert!(matches!(cone_volume_measure(&tri), Err(Error::OriginOutside(_))));
    }

    #[test]
    fn dilation_and_identity_gaps() {
        let k = cube(1.0);
        assert!(log_minkowski_gap(&k, &Body::Polytope(k.clone()), None).unwrap().abs() < 1e-12);
        for c in [0.5, 2.0, 3.0] {
            let g = log_minkowski_gap(&k, &Body::Polytope(k.scaled(c)), None).unwrap();
            assert!(g.abs() < 1e-10, "{g}");
        }
    }

    #[test]
    fn comparison_names_discrepant_atoms() {
        let a = cone_volume_measure(&cube(1.0)).unwrap();
        let b = cone_volume_measure(&cross()).unwrap();
        let c = a.compare(&b, 1e-8);
        assert!(!c.equal);
        assert_eq!(c.discrepant.len(), 14);
        assert!(a.compare(&a.clone(), 1e-8).equal);
    }
}
