//! Intersections of coordinate cylinders `sum_{i in I} x_i^2 <= rho^2`.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{max_norm_dist, random_unit, spread_directions, stream_rng, Vector};

/// Activity tolerance for boundary classification.
const ACTIVE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadricConstraint {
    /// Zero-based coordinate indices.
    pub indices: Vec<usize>,
    pub radius: f64,
}

/// Settings for the restarted barrier support solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadricSupportConfig {
    pub restarts: usize,
    /// The two best restarts must agree within this absolute tolerance.
    pub agreement: f64,
    pub max_iterations: usize,
}

impl Default for QuadricSupportConfig {
    fn default() -> Self {
        QuadricSupportConfig {
            restarts: 200,
            agreement: 1e-8,
            max_iterations: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadricBody {
    dim: usize,
    constraints: Vec<QuadricConstraint>,
    config: QuadricSupportConfig,
    cache: SupportCache,
}

/// Memoized support points keyed by the bits of the unit direction. Clones
/// share the table; it takes no part in equality.
#[derive(Clone, Default)]
struct SupportCache(Arc<Mutex<HashMap<Vec<u64>, Vector>>>);

const CACHE_LIMIT: usize = 1 << 18;

impl SupportCache {
    fn get(&self, key: &[u64]) -> Option<Vector> {
        self.0.lock().ok()?.get(key).cloned()
    }

    fn insert(&self, key: Vec<u64>, x: Vector) {
        if let Ok(mut m) = self.0.lock() {
            if m.len() >= CACHE_LIMIT {
                m.clear();
            }
            m.insert(key, x);
        }
    }
}

impl PartialEq for SupportCache {
    fn eq(&self, _: &Self) -> bool {
        true
    }
}

impl std::fmt::Debug for SupportCache {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SupportCache")
    }
}

/// Outer unit normal at a boundary point, when it is unique.
#[derive(Debug, Clone, PartialEq)]
pub enum BoundaryNormal {
    Smooth(Vector),
    /// Two or more constraints are active.
    NonSmooth,
}

impl QuadricBody {
    pub fn new(dim: usize, constraints: Vec<QuadricConstraint>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::argument("dimension must be positive"));
        }
        let mut covered = vec![false; dim];
        for c in &constraints {
            if c.indices.is_empty() {
                return Err(Error::argument("constraint with empty index set"));
            }
            if !(c.radius > 0.0 && c.radius.is_finite()) {
                return Err(Error::argument(format!("radius must be positive, got {}", c.radius)));
            }
            for &i in &c.indices {
                if i >= dim {
                    return Err(Error::argument(format!("index {} out of range for R^{dim}", i + 1)));
                }
                covered[i] = true;
            }
        }
        if let Some(free) = covered.iter().position(|c| !c) {
            let mut direction = vec![0.0; dim];
            direction[free] = 1.0;
            return Err(Error::Unbounded { direction });
        }
        Ok(QuadricBody {
            dim,
            constraints,
            config: QuadricSupportConfig::default(),
            cache: SupportCache::default(),
        })
    }

    /// `{x : x_1^2 + ... + x_{n-1}^2 <= 1, x_2^2 + ... + x_n^2 <= 1}`, n >= 3.
    pub fn two_cylinders(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::argument("two-cylinder body needs n >= 3"));
        }
        QuadricBody::new(
            n,
            vec![
                QuadricConstraint {
                    indices: (0..n - 1).collect(),
                    radius: 1.0,
                },
                QuadricConstraint {
                    indices: (1..n).collect(),
                    radius: 1.0,
                },
            ],
        )
    }

    pub fn with_config(mut self, config: QuadricSupportConfig) -> Self {
        self.config = config;
        self.cache = SupportCache::default();
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn constraints(&self) -> &[QuadricConstraint] {
        &self.constraints
    }

    fn load(&self, k: usize, x: &Vector) -> f64 {
        let c = &self.constraints[k];
        c.indices.iter().map(|&i| x[i] * x[i]).sum::<f64>() / (c.radius * c.radius)
    }

    /// Largest normalized constraint value; the body is `gauge <= 1`.
    fn gauge_sq(&self, x: &Vector) -> f64 {
        (0..self.constraints.len()).map(|k| self.load(k, x)).fold(0.0, f64::max)
    }

    pub fn contains(&self, x: &Vector) -> bool {
        self.gauge_sq(x) <= 1.0 + 1e-12
    }

    pub fn inradius(&self) -> f64 {
        self.constraints.iter().map(|c| c.radius).fold(f64::INFINITY, f64::min)
    }

    /// An upper bound on the largest norm in the body.
    pub fn circumradius(&self) -> f64 {
        (0..self.dim)
            .map(|i| {
                let r = self
                    .constraints
                    .iter()
                    .filter(|c| c.indices.contains(&i))
                    .map(|c| c.radius)
                    .fold(f64::INFINITY, f64::min);
                r * r
            })
            .sum::<f64>()
            .sqrt()
    }

    fn slack(&self, x: &Vector, k: usize) -> f64 {
        let c = &self.constraints[k];
        c.radius * c.radius - c.indices.iter().map(|&i| x[i] * x[i]).sum::<f64>()
    }

    fn barrier(&self, u: &Vector, x: &Vector, t: f64) -> f64 {
        let mut v = t * u.dot(x);
        for k in 0..self.constraints.len() {
            let s = self.slack(x, k);
            if s <= 0.0 {
                return f64::NEG_INFINITY;
            }
            v += s.ln();
        }
        v
    }

    /// Damped Newton ascent on `t <u, x> + sum_k log(rho_k^2 - |x_{I_k}|^2)`
    /// from a strictly interior point. Returns the iterate and the number of
    /// Newton steps taken.
    fn center(&self, u: &Vector, mut x: Vector, t: f64, budget: usize) -> (Vector, usize) {
        let n = self.dim;
        let mut steps = 0;
        while steps < budget.min(50) {
            steps += 1;
            let mut grad = u * t;
            let mut hess = nalgebra::DMatrix::<f64>::zeros(n, n);
            for (k, c) in self.constraints.iter().enumerate() {
                let s = self.slack(&x, k);
                for &i in &c.indices {
                    grad[i] -= 2.0 * x[i] / s;
                    hess[(i, i)] -= 2.0 / s;
                    for &j in &c.indices {
                        hess[(i, j)] -= 4.0 * x[i] * x[j] / (s * s);
                    }
                }
            }
            // hess is negative definite since every coordinate is covered
            let Some(chol) = (-&hess).cholesky() else { break };
            let d = chol.solve(&grad);
            let decrement = grad.dot(&d);
            // the second test catches the rounding floor of the decrement
            if decrement < 1e-20 || d.amax() <= 1e-15 * x.amax().max(1.0) {
                break;
            }
            // close to the center the function values no longer resolve the
            // Armijo test, so take the pure Newton step
            if decrement < 1e-8 {
                let y = &x + &d;
                if self.barrier(u, &y, t).is_finite() {
                    x = y;
                    continue;
                }
            }
            let f0 = self.barrier(u, &x, t);
            let mut a = 1.0;
            loop {
                let y = &x + &d * a;
                if self.barrier(u, &y, t) >= f0 + 0.25 * a * decrement {
                    x = y;
                    break;
                }
                a *= 0.5;
                if a < 1e-12 {
                    break;
                }
            }
            if a < 1e-12 {
                break;
            }
        }
        (x, steps)
    }

    /// Follows the central path from a point centered at `t`, multiplying
    /// `t` by 10 until the duality gap `m / t` is below `1e-15 R`. The
    /// returned point is feasible.
    fn follow(&self, u: &Vector, mut x: Vector, mut t: f64, mut budget: usize) -> Vector {
        let m = self.constraints.len() as f64;
        let r = self.circumradius();
        while m / t > 1e-15 * r && budget > 0 {
            t *= 10.0;
            let (y, steps) = self.center(u, x, t, budget);
            x = y;
            budget = budget.saturating_sub(steps);
        }
        x
    }

    /// Maximizer of `<u, .>` over the body, solved from restart points spread
    /// over a sphere inside the body.
    ///
    /// The centering problem at the first barrier weight is strictly concave,
    /// so restarts that reach the same centered point share the rest of the
    /// path; it is followed once per distinct centered point.
    pub fn support_point(&self, u: &Vector) -> Result<Vector> {
        crate::geometry::polytope::check_direction(u, self.dim)?;
        let dir = u / u.norm();
        let key: Vec<u64> = dir.iter().map(|x| x.to_bits()).collect();
        if let Some(x) = self.cache.get(&key) {
            return Ok(x);
        }
        let starts = spread_directions(self.dim, self.config.restarts.max(2));
        let r = self.circumradius();
        let r_in = 0.5 * self.inradius();
        let t0 = 1.0 / r;
        let mut paths: Vec<(Vector, usize, Option<Vector>)> = Vec::new();
        let mut owner = Vec::with_capacity(starts.len());
        for s in &starts {
            let (c, steps) = self.center(&dir, s * r_in, t0, self.config.max_iterations);
            let j = match paths.iter().position(|p| max_norm_dist(&p.0, &c) <= 1e-10 * r) {
                Some(j) => j,
                None => {
                    paths.push((c, steps, None));
                    paths.len() - 1
                }
            };
            owner.push(j);
        }
        for p in &mut paths {
            let budget = self.config.max_iterations.saturating_sub(p.1);
            p.2 = Some(self.follow(&dir, p.0.clone(), t0, budget));
        }
        let mut best: Vec<(f64, &Vector)> = owner
            .iter()
            .map(|&j| {
                let x = paths[j].2.as_ref().expect("followed");
                (dir.dot(x), x)
            })
            .collect();
        best.sort_by(|a, b| b.0.total_cmp(&a.0));
        if best[0].0 - best[1].0 > self.config.agreement {
            return Err(Error::Convergence(format!(
                "support restarts disagree: {} vs {}",
                best[0].0, best[1].0
            )));
        }
        let x = best[0].1.clone();
        self.cache.insert(key, x.clone());
        Ok(x)
    }

    pub fn support(&self, u: &Vector) -> Result<f64> {
        let x = self.support_point(u)?;
        Ok(u.dot(&x))
    }

    /// Classifies a boundary point: the normalized restriction of `x` to the
    /// active index set when exactly one constraint is active.
    pub fn boundary_normal(&self, x: &Vector) -> Result<BoundaryNormal> {
        if x.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        let loads: Vec<f64> = (0..self.constraints.len()).map(|k| self.load(k, x)).collect();
        let top = loads.iter().cloned().fold(0.0, f64::max);
        if (top - 1.0).abs() > ACTIVE_TOL {
            return Err(Error::argument(if top < 1.0 {
                "point is interior"
            } else {
                "point is exterior"
            }));
        }
        let active: Vec<usize> = (0..loads.len()).filter(|&k| (loads[k] - 1.0).abs() <= ACTIVE_TOL).collect();
        if active.len() >= 2 {
            return Ok(BoundaryNormal::NonSmooth);
        }
        let mut g = Vector::zeros(self.dim);
        for &i in &self.constraints[active[0]].indices {
            g[i] = x[i];
        }
        Ok(BoundaryNormal::Smooth(g.normalize()))
    }

    /// The boundary point on the ray through `dir`.
    pub fn radial_boundary_point(&self, dir: &Vector) -> Vector {
        let g = self.gauge_sq(dir).sqrt();
        dir / g
    }

    /// Boundary points with their outer normals, sampled along seeded random
    /// rays; points where two constraints are active are skipped.
    pub fn sample_smooth_normals(&self, count: usize, seed: u64) -> Vec<(Vector, Vector)> {
        let mut rng = stream_rng(seed, 11);
        let mut out = Vec::with_capacity(count);
        let mut attempts = 0usize;
        while out.len() < count && attempts < 100 * count.max(1) {
            attempts += 1;
            let d = random_unit(self.dim, &mut rng);
            // occasional axis-heavy rays exercise the faces of each cylinder
            let d = if rng.random_bool(0.1) { d.map(|x| x * x * x) } else { d };
            if d.norm() == 0.0 {
                continue;
            }
            let x = self.radial_boundary_point(&d);
            if let Ok(BoundaryNormal::Smooth(nrm)) = self.boundary_normal(&x) {
                out.push((x, nrm));
            }
        }
        out
    }
}
