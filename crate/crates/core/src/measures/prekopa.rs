//! Discrete Prékopa-Leindler checks on aligned regular grids.

use crate::error::{Error, Result};

/// Values of a nonnegative function at the nodes of a regular grid, stored
/// row-major with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    lo: Vec<f64>,
    step: Vec<f64>,
    shape: Vec<usize>,
    values: Vec<f64>,
}

impl GridFunction {
    pub fn new(lo: Vec<f64>, step: Vec<f64>, shape: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        let d = lo.len();
        if d == 0 || step.len() != d || shape.len() != d {
            return Err(Error::argument("grid description has inconsistent dimensions"));
        }
        if step.iter().any(|s| !(*s > 0.0)) || shape.iter().any(|&s| s < 2) {
            return Err(Error::argument("grid needs positive steps and at least two nodes per axis"));
        }
        if values.len() != shape.iter().product::<usize>() {
            return Err(Error::argument("grid value count does not match its shape"));
        }
        if values.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return Err(Error::argument("grid values must be finite and nonnegative"));
        }
        Ok(GridFunction { lo, step, shape, values })
    }

    /// Samples `f` at the nodes `lo + i * step`.
    pub fn sample(lo: Vec<f64>, step: Vec<f64>, shape: Vec<usize>, f: impl Fn(&[f64]) -> f64) -> Result<Self> {
        let total: usize = shape.iter().product();
        let mut values = Vec::with_capacity(total);
        let mut x = vec![0.0; lo.len()];
        for flat in 0..total {
            let idx = unflatten(flat, &shape);
            for (k, i) in idx.iter().enumerate() {
                x[k] = lo[k] + *i as f64 * step[k];
            }
            values.push(f(&x));
        }
        Self::new(lo, step, shape, values)
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    fn cell_volume(&self) -> f64 {
        self.step.iter().product()
    }

    /// Trapezoidal rule.
    pub fn integral(&self) -> f64 {
        let mut s = 0.0;
        for (flat, v) in self.values.iter().enumerate() {
            let idx = unflatten(flat, &self.shape);
            let w: f64 = idx
                .iter()
                .zip(&self.shape)
                .map(|(&i, &n)| if i == 0 || i == n - 1 { 0.5 } else { 1.0 })
                .product();
            s += w * v;
        }
        s * self.cell_volume()
    }

    /// `sum over cells of cell volume × (max − min over the cell's corners)`,
    /// a bound on the quadrature error for functions monotone along each
    /// cell edge.
    pub fn oscillation_bound(&self) -> f64 {
        let d = self.dim();
        let cells: Vec<usize> = self.shape.iter().map(|n| n - 1).collect();
        let total: usize = cells.iter().product();
        let mut s = 0.0;
        for flat in 0..total {
            let base = unflatten(flat, &cells);
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for corner in 0..(1usize << d) {
                let idx: Vec<usize> = base.iter().enumerate().map(|(k, b)| b + (corner >> k & 1)).collect();
                let v = self.values[flatten(&idx, &self.shape)];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            s += hi - lo;
        }
        s * self.cell_volume()
    }

    fn aligned_with(&self, other: &GridFunction) -> bool {
        self.shape == other.shape
            && self.lo.iter().zip(&other.lo).all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs()))
            && self.step.iter().zip(&other.step).all(|(a, b)| (a - b).abs() <= 1e-12 * a)
    }
}

fn unflatten(mut flat: usize, shape: &[usize]) -> Vec<usize> {
    let mut idx = vec![0; shape.len()];
    for k in (0..shape.len()).rev() {
        idx[k] = flat % shape[k];
        flat /= shape[k];
    }
    idx
}

fn flatten(idx: &[usize], shape: &[usize]) -> usize {
    idx.iter().zip(shape).fold(0, |a, (&i, &n)| a * n + i)
}

/// Largest denominator accepted for `λ`.
pub const MAX_DENOMINATOR: u64 = 16;

/// `(p, q)` with `λ = p/q`, `0 < p < q <= 16`.
pub fn rational_lambda(lambda: f64) -> Result<(u64, u64)> {
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::argument("lambda must lie in (0, 1)"));
    }
    for q in 2..=MAX_DENOMINATOR {
        let p = (lambda * q as f64).round();
        if (lambda - p / q as f64).abs() <= 1e-12 && p >= 1.0 {
            return Ok((p as u64, q));
        }
    }
    Err(Error::argument(format!(
        "lambda = {lambda} is not p/q with q <= {MAX_DENOMINATOR}; grid convex combinations would miss the nodes, refine the grid or choose such a lambda"
    )))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrekopaLeindlerReport {
    pub lambda: (u64, u64),
    /// Node pairs `(x, y)` whose combination is a node and where both
    /// `f(x)` and `g(y)` are positive.
    pub pairs_checked: usize,
    pub hypothesis_violations: usize,
    /// Largest `f(x)^{1-λ} g(y)^λ − h((1-λ)x + λy)` seen (≤ 0 when it holds).
    pub worst_violation: f64,
    pub integral_f: f64,
    pub integral_g: f64,
    pub integral_h: f64,
    /// `∫h − (∫f)^{1−λ} (∫g)^λ`.
    pub gap: f64,
    /// Propagated quadrature error of the gap.
    pub grid_error: f64,
}

impl PrekopaLeindlerReport {
    pub fn hypothesis_holds(&self) -> bool {
        self.hypothesis_violations == 0
    }

    /// The integral inequality fails by more than the grid error.
    pub fn integral_violated(&self) -> bool {
        self.gap < -self.grid_error
    }
}

pub fn prekopa_leindler_check(f: &GridFunction, g: &GridFunction, h: &GridFunction, lambda: f64) -> Result<PrekopaLeindlerReport> {
    if !f.aligned_with(g) || !f.aligned_with(h) {
        return Err(Error::argument("grid functions are not on a common grid"));
    }
    let (p, q) = rational_lambda(lambda)?;
    let lam = p as f64 / q as f64;
    let shape = &f.shape;
    let total = f.values.len();
    let idx: Vec<Vec<usize>> = (0..total).map(|i| unflatten(i, shape)).collect();
    let mut pairs = 0usize;
    let mut violations = 0usize;
    let mut worst = f64::NEG_INFINITY;
    let mut target = vec![0usize; shape.len()];
    for (i, fi) in f.values.iter().enumerate() {
        if *fi == 0.0 {
            continue;
        }
        'pairs: for (j, gj) in g.values.iter().enumerate() {
            if *gj == 0.0 {
                continue;
            }
            for k in 0..shape.len() {
                let num = (q - p) * idx[i][k] as u64 + p * idx[j][k] as u64;
                if num % q != 0 {
                    continue 'pairs;
                }
                target[k] = (num / q) as usize;
            }
            pairs += 1;
            let rhs = fi.powf(1.0 - lam) * gj.powf(lam);
            let hv = h.values[flatten(&target, shape)];
            let excess = rhs - hv;
            worst = worst.max(excess);
            if excess > 1e-12 * rhs {
                violations += 1;
            }
        }
    }
    let (jf, jg, jh) = (f.integral(), g.integral(), h.integral());
    let rhs = jf.powf(1.0 - lam) * jg.powf(lam);
    let mut grid_error = h.oscillation_bound();
    if jf > 0.0 {
        grid_error += (1.0 - lam) * rhs / jf * f.oscillation_bound();
    }
    if jg > 0.0 {
        grid_error += lam * rhs / jg * g.oscillation_bound();
    }
    Ok(PrekopaLeindlerReport {
        lambda: (p, q),
        pairs_checked: pairs,
        hypothesis_violations: violations,
        worst_violation: worst,
        integral_f: jf,
        integral_g: jg,
        integral_h: jh,
        gap: jh - rhs,
        grid_error,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(f: impl Fn(f64) -> f64) -> GridFunction {
        GridFunction::sample(vec![-1.0], vec![0.01], vec![401], |x| f(x[0])).unwrap()
    }

    fn indicator(a: f64, b: f64) -> impl Fn(f64) -> f64 {
        move |x| if x >= a - 1e-9 && x <= b + 1e-9 { 1.0 } else { 0.0 }
    }

    #[test]
    fn gaussian_bumps() {
        let f = GridFunction::sample(vec![-6.0], vec![0.05], vec![241], |x| (-x[0] * x[0]).exp()).unwrap();
        let r = prekopa_leindler_check(&f, &f, &f, 0.5).unwrap();
        assert!(r.hypothesis_holds());
        assert!(r.pairs_checked > 0);
        assert!(!r.integral_violated());
        assert!((r.integral_f - std::f64::consts::PI.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn intervals() {
        let r = prekopa_leindler_check(&line(indicator(0.0, 1.0)), &line(indicator(0.0, 2.0)), &line(indicator(0.0, 1.5)), 0.5).unwrap();
        assert!(r.hypothesis_holds());
        assert!(r.gap > 0.0 && !r.integral_violated());
        assert!((r.integral_h - 1.5).abs() < 0.02);
    }

    #[test]
    fn too_small_h_is_flagged() {
        let r = prekopa_leindler_check(&line(indicator(0.0, 1.0)), &line(indicator(0.0, 2.0)), &line(indicator(0.0, 1.0)), 0.5).unwrap();
        assert!(!r.hypothesis_holds());
        assert!(r.integral_violated());
    }

    #[test]
    fn lambda_must_be_a_small_fraction() {
        assert_eq!(rational_lambda(0.25).unwrap(), (1, 4));
        assert_eq!(rational_lambda(2.0 / 3.0).unwrap(), (2, 3));
        assert!(rational_lambda(0.3183).is_err());
        assert!(rational_lambda(1.0).is_err());
    }

    #[test]
    fn two_dimensional_grid() {
        let g = |x: &[f64]| (-(x[0] * x[0] + 2.0 * x[1] * x[1])).exp();
        let f = GridFunction::sample(vec![-3.0, -3.0], vec![0.1, 0.1], vec![61, 61], g).unwrap();
        let r = prekopa_leindler_check(&f, &f, &f, 0.25).unwrap();
        assert!(r.hypothesis_holds() && !r.integral_violated());
    }
}
