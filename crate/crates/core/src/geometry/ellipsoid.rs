//! Centered minimum-volume enclosing (Löwner) ellipsoids.

use nalgebra::{DMatrix, SymmetricEigen};

use super::polytope::{affine_dimension, VPolytope, GEOM_TOL};
use crate::error::{Error, Result};
use crate::linalg::{sym_sqrt, LinearMap, Vector};

/// Default relative optimality gap for the weight ascent.
pub const LOEWNER_GAP: f64 = 1e-6;

/// `{x : x^T M x <= 1}` with `M` symmetric positive definite.
#[derive(Debug, Clone, PartialEq)]
pub struct Ellipsoid {
    shape: DMatrix<f64>,
}

impl Ellipsoid {
    pub fn new(shape: DMatrix<f64>) -> Result<Self> {
        if !shape.is_square() {
            return Err(Error::argument("shape matrix must be square"));
        }
        let asym = (&shape - shape.transpose()).amax();
        if asym > 1e-12 * shape.amax().max(1.0) {
            return Err(Error::argument(format!("shape matrix not symmetric (deviation {asym:e})")));
        }
        let eig = SymmetricEigen::new(shape.clone());
        if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
            return Err(Error::argument("shape matrix not positive definite"));
        }
        Ok(Ellipsoid { shape })
    }

    pub fn shape(&self) -> &DMatrix<f64> {
        &self.shape
    }

    pub fn dim(&self) -> usize {
        self.shape.nrows()
    }

    pub fn gauge_sq(&self, x: &Vector) -> f64 {
        x.dot(&(&self.shape * x))
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        self.gauge_sq(x) <= 1.0 + tol
    }

    /// `M^{1/2}`, which maps the ellipsoid onto the unit ball.
    pub fn whitening(&self) -> LinearMap {
        sym_sqrt(&self.shape)
    }

    pub fn volume(&self) -> f64 {
        let n = self.dim() as f64;
        let ball = std::f64::consts::PI.powf(n / 2.0) / libm_gamma(n / 2.0 + 1.0);
        ball / self.shape.determinant().sqrt()
    }

    /// Shrinks the shortest semi-axis (the eigendirection of `M` with the
    /// largest eigenvalue) by `factor > 1`, so that eigenvalue grows by
    /// `factor²`, and reports whether some point then falls outside. `true`
    /// means the ellipsoid had no slack along that axis.
    pub fn optimality_probe(&self, points: &[Vector], factor: f64) -> bool {
        let eig = SymmetricEigen::new(self.shape.clone());
        let (k, _) = eig
            .eigenvalues
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .expect("nonempty");
        let e = eig.eigenvectors.column(k).into_owned();
        let lambda = eig.eigenvalues[k];
        let bumped = &self.shape + &e * e.transpose() * (lambda * (factor * factor - 1.0));
        points.iter().any(|p| p.dot(&(&bumped * p)) > 1.0)
    }
}

fn libm_gamma(x: f64) -> f64 {
    // x is a positive half-integer here
    if (x - x.round()).abs() < 1e-12 {
        (1..x.round() as u64).map(|k| k as f64).product()
    } else {
        let mut g = std::f64::consts::PI.sqrt();
        let mut t = 0.5;
        while t < x - 1e-12 {
            g *= t;
            t += 1.0;
        }
        g
    }
}

/// Minimum-volume origin-centered ellipsoid containing the vertices of an
/// origin-symmetric polytope.
///
/// Khachiyan's barycentric coordinate ascent with Todd-Yildirim away steps
/// on the symmetrized point set. The returned shape is rescaled so that the
/// worst point lies exactly on the boundary.
pub fn loewner_ellipsoid(v: &VPolytope) -> Result<Ellipsoid> {
    loewner_ellipsoid_with_gap(v, LOEWNER_GAP)
}

pub fn loewner_ellipsoid_with_gap(v: &VPolytope, gap: f64) -> Result<Ellipsoid> {
    let scale = v.circumradius().max(1e-300);
    if !v.is_origin_symmetric(GEOM_TOL * scale.max(1.0)) {
        return Err(Error::NonSymmetric);
    }
    let n = v.dim();
    let mut pts: Vec<Vector> = Vec::with_capacity(2 * v.vertices().len());
    for p in v.vertices() {
        pts.push(p.clone());
        pts.push(-p);
    }
    let d = affine_dimension(&pts);
    if d < n as isize {
        return Err(Error::LowerDimensional { dim: d });
    }
    let m = pts.len();
    let nf = n as f64;
    let mut u = vec![1.0 / m as f64; m];
    let mut kappa = vec![0.0; m];
    for _ in 0..200_000 {
        let mut x = DMatrix::zeros(n, n);
        for (p, &w) in pts.iter().zip(&u) {
            if w > 0.0 {
                x += p * p.transpose() * w;
            }
        }
        let xinv = x.try_inverse().ok_or(Error::LowerDimensional { dim: n as isize - 1 })?;
        for (k, p) in pts.iter().enumerate() {
            kappa[k] = p.dot(&(&xinv * p));
        }
        let (j, &kmax) = kappa.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).expect("nonempty");
        let (a, &kmin) = kappa
            .iter()
            .enumerate()
            .filter(|(i, _)| u[*i] > 0.0)
            .min_by(|a, b| a.1.total_cmp(b.1))
            .expect("some positive weight");
        if kmax / nf - 1.0 <= gap {
            let shape = xinv / kmax;
            return Ellipsoid::new((&shape + shape.transpose()) * 0.5);
        }
        if kmax - nf >= nf - kmin {
            let beta = (kmax - nf) / (nf * (kmax - 1.0));
            u.iter_mut().for_each(|w| *w *= 1.0 - beta);
            u[j] += beta;
        } else {
            let mut beta = (kmin - nf) / (nf * (kmin - 1.0));
            let limit = -u[a] / (1.0 - u[a]);
            let drop = beta <= limit;
            if drop {
                beta = limit;
            }
            u.iter_mut().for_each(|w| *w *= 1.0 - beta);
            u[a] += beta;
            if drop {
                u[a] = 0.0;
            }
        }
    }
    Err(Error::Convergence("Löwner ellipsoid ascent did not reach the gap".into()))
}
