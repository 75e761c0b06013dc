//! Chambers of a reflection arrangement and the tiling by their images.

use itertools::Itertools;
use nalgebra::DMatrix;
use rand::Rng;

use super::group::{ReflectionGroup, MATRIX_TOL};
use crate::error::{Error, Result};
use crate::linalg::{dedup_points, lex_cmp, max_norm_dist, null_space, rank, sphere_sample, stream_rng, LinearMap, Vector};

/// Seed of the generic-point draw.
pub const CHAMBER_SEED: u64 = 0x5EED;
const GENERIC_MARGIN: f64 = 1e-6;

/// `C = pos{u_1..u_n} = {x : <x_i, x> <= 0 for all i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChamberCone {
    generators: Vec<Vector>,
    normals: Vec<Vector>,
}

impl ChamberCone {
    /// Validates `<x_i, u_j> = 0` for `i != j`, `<x_i, u_i> < 0` and linear
    /// independence of the generators.
    pub fn new(generators: Vec<Vector>, normals: Vec<Vector>) -> Result<Self> {
        let n = generators.len();
        if n == 0 || normals.len() != n || generators.iter().chain(&normals).any(|v| v.len() != n) {
            return Err(Error::argument("a chamber in R^n needs n generators and n normals of length n"));
        }
        if rank(&generators, 1e-10) < n {
            return Err(Error::argument("chamber generators are linearly dependent"));
        }
        let normals: Vec<Vector> = normals.into_iter().map(|x| x.normalize()).collect();
        for (i, x) in normals.iter().enumerate() {
            for (j, u) in generators.iter().enumerate() {
                let d = x.dot(u);
                if i != j && d.abs() > 1e-9 * u.norm() {
                    return Err(Error::Tolerance {
                        what: format!("<x_{}, u_{}> = 0", i + 1, j + 1),
                        deviation: d.abs(),
                        tolerance: 1e-9,
                    });
                }
                if i == j && d >= 0.0 {
                    return Err(Error::argument(format!("<x_{0}, u_{0}> must be negative", i + 1)));
                }
            }
        }
        Ok(ChamberCone { generators, normals })
    }

    pub fn dim(&self) -> usize {
        self.generators.len()
    }

    /// Rays `u_i`.
    pub fn generators(&self) -> &[Vector] {
        &self.generators
    }

    /// Outer wall normals `x_i`; `x_i` is orthogonal to every `u_j`, `j != i`.
    pub fn normals(&self) -> &[Vector] {
        &self.normals
    }

    pub fn contains(&self, x: &Vector, tol: f64) -> bool {
        let s = x.norm().max(1e-300);
        self.normals.iter().all(|w| w.dot(x) <= tol * s)
    }

    /// Strict interior membership with margin `tol`.
    pub fn contains_interior(&self, x: &Vector, tol: f64) -> bool {
        let s = x.norm().max(1e-300);
        self.normals.iter().all(|w| w.dot(x) < -tol * s)
    }

    /// A point well inside the cone: the sum of the unit rays.
    pub fn interior_point(&self) -> Vector {
        self.generators.iter().fold(Vector::zeros(self.dim()), |a, u| a + u.normalize())
    }

    /// Matrix with the generators as columns.
    pub fn generator_matrix(&self) -> LinearMap {
        DMatrix::from_columns(&self.generators)
    }
}

/// Builds a chamber of the mirror arrangement of `group`, chosen by a seeded
/// generic point.
pub fn chamber_cone(group: &ReflectionGroup) -> Result<ChamberCone> {
    let n = group.dim();
    let fix = group.fix_space();
    if !fix.is_trivial() {
        return Err(Error::Precondition(format!(
            "group fixes a subspace of dimension {}",
            fix.dim()
        )));
    }
    let mirrors = group.mirror_normals();
    let mut rng = stream_rng(CHAMBER_SEED, 3);
    let p = loop {
        let p = crate::linalg::random_unit(n, &mut rng);
        if mirrors.iter().all(|m| m.dot(&p).abs() >= GENERIC_MARGIN) {
            break p;
        }
    };
    let oriented: Vec<Vector> = mirrors
        .iter()
        .map(|m| if m.dot(&p) > 0.0 { m.clone() } else { -m })
        .collect();
    let feasible = |r: &Vector| oriented.iter().all(|m| m.dot(r) >= -1e-9);
    let mut rays: Vec<Vector> = Vec::new();
    for subset in (0..oriented.len()).combinations(n - 1) {
        let r = if n == 1 {
            Vector::from_element(1, 1.0)
        } else {
            let m = DMatrix::from_fn(n - 1, n, |i, j| oriented[subset[i]][j]);
            let ns = null_space(&m, 1e-6);
            if ns.len() != 1 {
                continue;
            }
            ns[0].clone()
        };
        if feasible(&r) {
            rays.push(r);
        } else if feasible(&-&r) {
            rays.push(-r);
        }
    }
    let rays = dedup_points(&rays, MATRIX_TOL);
    let walls: Vec<&Vector> = oriented
        .iter()
        .filter(|m| {
            let on: Vec<Vector> = rays.iter().filter(|r| m.dot(r).abs() <= 1e-9).cloned().collect();
            rank(&on, 1e-9) == n - 1
        })
        .collect();
    if rays.len() != n || walls.len() != n {
        return Err(Error::NonSimplicial {
            rays: rays.len(),
            walls: walls.len(),
        });
    }
    let mut rays = rays;
    rays.sort_by(lex_cmp);
    let mut normals = Vec::with_capacity(n);
    for u in &rays {
        let opposite: Vec<&&Vector> = walls.iter().filter(|m| m.dot(u).abs() > 1e-9).collect();
        if opposite.len() != 1 {
            return Err(Error::NonSimplicial {
                rays: rays.len(),
                walls: walls.len(),
            });
        }
        normals.push(-(*opposite[0]).clone());
    }
    ChamberCone::new(rays, normals)
}

/// True iff every pair of generators has nonnegative inner product.
pub fn positivity_check(c: &ChamberCone) -> bool {
    let g = c.generators();
    g.iter().all(|a| g.iter().all(|b| a.dot(b) >= -1e-10))
}

/// `Phi` with `Phi u_i = e_i`.
pub fn cone_map_phi(c: &ChamberCone) -> Result<LinearMap> {
    c.generator_matrix()
        .try_inverse()
        .ok_or_else(|| Error::argument("chamber generators are singular"))
}

/// Number of sphere samples used by the coverage check.
pub const COVERAGE_SAMPLES: usize = 10_000;

/// Representatives `g_1..g_l` with pairwise distinct images `g_i C`, checked
/// to cover the sphere and to have disjoint interiors.
pub fn tiling_reps(group: &ReflectionGroup, c: &ChamberCone) -> Result<Vec<LinearMap>> {
    let mut reps: Vec<LinearMap> = Vec::new();
    let mut images: Vec<Vec<Vector>> = Vec::new();
    for g in group.elements() {
        let mut img: Vec<Vector> = c.generators().iter().map(|u| (g * u).normalize()).collect();
        img.sort_by(lex_cmp);
        let seen = images
            .iter()
            .any(|other| other.iter().zip(&img).all(|(a, b)| max_norm_dist(a, b) < MATRIX_TOL));
        if !seen {
            images.push(img);
            reps.push(g.clone());
        }
    }
    let inverses: Vec<LinearMap> = reps
        .iter()
        .map(|g| g.clone().try_inverse().ok_or_else(|| Error::Internal("singular group element".into())))
        .collect::<Result<_>>()?;
    let n = c.dim();
    for (k, x) in sphere_sample(n, COVERAGE_SAMPLES, CHAMBER_SEED).iter().enumerate() {
        if !inverses.iter().any(|gi| c.contains(&(gi * x), 1e-9)) {
            return Err(Error::Internal(format!("sphere sample {k} lies in no chamber image")));
        }
    }
    // interior points of each image must avoid the interiors of the others
    let mut rng = stream_rng(CHAMBER_SEED, 5);
    for (i, g) in reps.iter().enumerate() {
        for _ in 0..8 {
            let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
            let z = c
                .generators()
                .iter()
                .zip(&w)
                .fold(Vector::zeros(n), |a, (u, t)| a + u.normalize() * *t);
            let gz = g * z;
            for (j, gi) in inverses.iter().enumerate() {
                if j != i && c.contains_interior(&(gi * &gz), 1e-9) {
                    return Err(Error::Internal(format!("chamber images {i} and {j} overlap")));
                }
            }
        }
    }
    Ok(reps)
}
