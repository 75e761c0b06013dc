//! Derivative of `t ↦ V(W_t)` at `0` and volume profiles along `λ`.

use rayon::prelude::*;

use super::grid::DirectionGrid;
use super::wulff::{l0_combination, volume_bounds};
use crate::error::{Error, Result};
use crate::geometry::{Body, ConvexBody, VPolytope};
use crate::measures::surface_area_measure;

pub const DEFAULT_T_STEPS: [f64; 3] = [1e-2, 5e-3, 2.5e-3];

#[derive(Debug, Clone)]
pub struct AlexandrovReport {
    pub t_steps: Vec<f64>,
    /// `(m(t) - m(0)) / t` per step, with `m` the bracket midpoint.
    pub slopes: Vec<f64>,
    pub extrapolated: f64,
    /// Bracket half-widths divided by `t` plus the last Richardson correction.
    pub slope_error: f64,
    /// `∫ h_K log(h_L / h_K) dS_K`.
    pub i1: f64,
    /// `i1 / n`.
    pub i2: f64,
    pub matches_i1: bool,
    pub matches_i2: bool,
    /// `S_K` was taken from the outer polytope of `W_0` rather than `K`.
    pub approximate_measure: bool,
}

impl AlexandrovReport {
    pub fn resolution(&self) -> &'static str {
        match (self.matches_i1, self.matches_i2) {
            (true, false) => "factor-free",
            (false, true) => "1/n-scaled",
            (true, true) => "both",
            (false, false) => "neither",
        }
    }
}

/// Relative tolerance added to the propagated error when matching slopes.
pub const MATCH_RTOL: f64 = 1e-3;

fn midpoint(k: &Body, l: &Body, t: f64, grid: &DirectionGrid) -> Result<(f64, f64)> {
    let (lo, hi) = volume_bounds(&l0_combination(k, l, t, grid)?);
    Ok((0.5 * (lo + hi), 0.5 * (hi - lo)))
}

/// Finite-difference slopes of the volume of `h_K^{1-t} h_L^t` at the given
/// halving steps, extrapolated by repeated Richardson elimination, compared
/// with the integral `I₁` and with `I₁ / n`.
pub fn alexandrov_derivative(k: &Body, l: &Body, t_steps: &[f64], grid: &DirectionGrid) -> Result<AlexandrovReport> {
    if t_steps.is_empty() || t_steps.iter().any(|&t| !(t > 0.0 && t <= 1.0)) {
        return Err(Error::argument("steps must lie in (0, 1]"));
    }
    for w in t_steps.windows(2) {
        if (w[1] * 2.0 - w[0]).abs() > 1e-12 * w[0] {
            return Err(Error::argument("steps must halve successively"));
        }
    }
    let n = k.dim();
    let (m0, e0) = midpoint(k, l, 0.0, grid)?;
    let evals: Vec<(f64, f64)> = t_steps.par_iter().map(|&t| midpoint(k, l, t, grid)).collect::<Result<_>>()?;
    let slopes: Vec<f64> = t_steps.iter().zip(&evals).map(|(t, (m, _))| (m - m0) / t).collect();
    let bracket_err = t_steps
        .iter()
        .zip(&evals)
        .map(|(t, (_, e))| (e + e0) / t)
        .fold(0.0, f64::max);
    // each table column cancels one more power of t
    let mut column = slopes.clone();
    let mut correction = 0.0;
    let mut gain = 3.0; // norm of the combination weights, 2+1, then (4+1)/3...
    let mut amplification = 1.0;
    for order in 1..t_steps.len() {
        let p = 2f64.powi(order as i32);
        let next: Vec<f64> = column.windows(2).map(|w| (p * w[1] - w[0]) / (p - 1.0)).collect();
        correction = (next[next.len() - 1] - column[column.len() - 1]).abs();
        amplification *= gain;
        gain = (p * 2.0 + 1.0) / (p * 2.0 - 1.0);
        column = next;
    }
    let extrapolated = column[column.len() - 1];
    let slope_error = bracket_err * amplification + correction;

    let (measure, approximate_measure) = match k {
        Body::Polytope(p) => (surface_area_measure(p)?, false),
        _ => {
            let w0 = l0_combination(k, l, 0.0, grid)?;
            (surface_area_measure(&w0.outer_vertices)?, true)
        }
    };
    let i1 = measure.integrate(|u| {
        let hk = k.support(u)?;
        let hl = l.support(u)?;
        if !(hk > 0.0 && hl > 0.0) {
            return Err(Error::OriginOutside("nonpositive support value".into()));
        }
        Ok(hk * (hl / hk).ln())
    })?;
    let i2 = i1 / n as f64;
    let matches = |target: f64| (extrapolated - target).abs() <= slope_error + MATCH_RTOL * target.abs();
    Ok(AlexandrovReport {
        t_steps: t_steps.to_vec(),
        slopes,
        extrapolated,
        slope_error,
        i1,
        i2,
        matches_i1: matches(i1),
        matches_i2: matches(i2),
        approximate_measure,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfilePoint {
    pub lambda: f64,
    pub lower: f64,
    pub upper: f64,
}

impl ProfilePoint {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    /// `log(upper / lower)`.
    pub fn log_width(&self) -> f64 {
        (self.upper / self.lower).ln()
    }
}

/// Absolute slack for rounding in the logs of exactly computed volumes.
pub const ROUNDING_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct ConcavityCheck {
    pub lambda: f64,
    /// `log m_i - (log m_{i-1} + log m_{i+1}) / 2`.
    pub defect: f64,
    /// Propagated bracket width `w_i + (w_{i-1} + w_{i+1}) / 2`.
    pub epsilon: f64,
}

impl ConcavityCheck {
    pub fn holds(&self) -> bool {
        self.defect >= -(self.epsilon + ROUNDING_FLOOR)
    }
}

#[derive(Debug, Clone)]
pub struct LambdaProfile {
    pub points: Vec<ProfilePoint>,
    /// Interior points only; empty unless the λ values are uniformly spaced.
    pub concavity: Vec<ConcavityCheck>,
}

impl LambdaProfile {
    pub fn log_concave(&self) -> bool {
        self.concavity.iter().all(ConcavityCheck::holds)
    }

    pub fn max_log_width(&self) -> f64 {
        self.points.iter().map(ProfilePoint::log_width).fold(0.0, f64::max)
    }
}

pub fn lambda_profile(k: &Body, l: &Body, lambdas: &[f64], grid: &DirectionGrid) -> Result<LambdaProfile> {
    let points: Vec<ProfilePoint> = lambdas
        .par_iter()
        .map(|&lambda| {
            let (lower, upper) = volume_bounds(&l0_combination(k, l, lambda, grid)?);
            Ok(ProfilePoint { lambda, lower, upper })
        })
        .collect::<Result<_>>()?;
    let uniform = lambdas.len() >= 3 && {
        let h = lambdas[1] - lambdas[0];
        h > 0.0 && lambdas.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h.abs().max(1.0))
    };
    let concavity = if uniform {
        points
            .windows(3)
            .map(|w| ConcavityCheck {
                lambda: w[1].lambda,
                defect: w[1].midpoint().ln() - 0.5 * (w[0].midpoint().ln() + w[2].midpoint().ln()),
                epsilon: w[1].log_width() + 0.5 * (w[0].log_width() + w[2].log_width()),
            })
            .collect()
    } else {
        Vec::new()
    };
    Ok(LambdaProfile { points, concavity })
}

/// `λ = 0, 1/(count-1), ..., 1`.
pub fn uniform_lambdas(count: usize) -> Vec<f64> {
    (0..count).map(|i| i as f64 / (count - 1).max(1) as f64).collect()
}

/// Cross-polytope scaled to the volume of `k`, convenient for profile runs.
pub fn volume_matched_cross(k: &VPolytope) -> Result<VPolytope> {
    let n = k.dim();
    let mut pts = Vec::with_capacity(2 * n);
    for i in 0..n {
        pts.push(crate::linalg::unit(n, i));
        pts.push(-crate::linalg::unit(n, i));
    }
    let cross = VPolytope::new(pts)?;
    let c = (k.volume().value / cross.volume().value).powf(1.0 / n as f64);
    Ok(cross.scaled(c))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::l0::{direction_grid, GridSpec};

    fn cube(a: f64) -> Body {
        let mut pts = Vec::new();
        for s in 0..8u32 {
            pts.push(crate::linalg::vector(&[
                if s & 1 == 0 { a } else { -a },
                if s & 2 == 0 { a } else { -a },
                if s & 4 == 0 { a } else { -a },
            ]));
        }
        VPolytope::new(pts).unwrap().into()
    }

    #[test]
    fn dilation_slope_is_factor_free() {
        let grid = direction_grid(3, GridSpec::Icosahedral(1), None).unwrap();
        let r = alexandrov_derivative(&cube(1.0), &cube(2.0), &DEFAULT_T_STEPS, &grid).unwrap();
        let want = 24.0 * 2f64.ln();
        assert!((r.i1 - want).abs() < 1e-12);
        assert!((r.extrapolated - want).abs() < 1e-3 * want, "{}", r.extrapolated);
        assert!(r.matches_i1 && !r.matches_i2);
        assert_eq!(r.resolution(), "factor-free");
    }

    #[test]
    fn equal_bodies_have_zero_slope() {
        let grid = direction_grid(3, GridSpec::Icosahedral(1), None).unwrap();
        let r = alexandrov_derivative(&cube(1.0), &cube(1.0), &DEFAULT_T_STEPS, &grid).unwrap();
        assert!(r.extrapolated.abs() < 1e-9 && r.i1 == 0.0);
    }

    #[test]
    fn steps_must_halve() {
        let grid = direction_grid(3, GridSpec::Icosahedral(1), None).unwrap();
        assert!(alexandrov_derivative(&cube(1.0), &cube(2.0), &[0.01, 0.004], &grid).is_err());
    }

    #[test]
    fn dilation_profile_is_log_linear() {
        let grid = direction_grid(3, GridSpec::Icosahedral(1), None).unwrap();
        let p = lambda_profile(&cube(1.0), &cube(3.0), &uniform_lambdas(5), &grid).unwrap();
        for pt in &p.points {
            let want = 8f64.ln() + 3.0 * pt.lambda * 3f64.ln();
            assert!((pt.midpoint().ln() - want).abs() < 1e-12);
        }
        assert_eq!(p.concavity.len(), 3);
        assert!(p.log_concave());
    }

    #[test]
    fn cube_cross_profile_is_log_concave() {
        let k = cube(1.0);
        let l: Body = volume_matched_cross(k.as_polytope().unwrap()).unwrap().into();
        let grid = direction_grid(3, GridSpec::Icosahedral(2), None).unwrap();
        let p = lambda_profile(&k, &l, &uniform_lambdas(11), &grid).unwrap();
        assert!(p.log_concave(), "{:?}", p.concavity);
        // equal volumes: the inequality makes the interior strictly larger
        assert!(p.points[5].lower > 8.0);
    }
}
