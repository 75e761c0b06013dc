//! Seeded Monte-Carlo estimates of Gaussian and radial log-concave measures.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::ConvexBody;
use crate::linalg::{stream_rng, Vector};

/// Samples per independent RNG stream.
pub const BATCH: usize = 10_000;
pub const DEFAULT_SAMPLES: usize = 1_000_000;
pub const DEFAULT_SEED: u64 = 0x5EED;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerSpec {
    pub samples: usize,
    pub seed: u64,
}

impl Default for SamplerSpec {
    fn default() -> Self {
        SamplerSpec {
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub estimate: f64,
    /// Sample standard deviation over `sqrt(N)`.
    pub stderr: f64,
}

/// Evaluates every integrand on the same stream of samples. Batch `b` draws
/// from stream `b` of the seed, so results do not depend on thread count.
fn sample_means<S, F>(spec: SamplerSpec, draw: S, integrands: &[F]) -> Result<Vec<McEstimate>>
where
    S: Fn(&mut rand_chacha::ChaCha8Rng) -> Vector + Sync,
    F: Fn(&Vector) -> f64 + Sync,
{
    if spec.samples < 2 {
        return Err(Error::argument("need at least two Monte-Carlo samples"));
    }
    let m = integrands.len();
    let batches = spec.samples.div_ceil(BATCH);
    let partial: Vec<Vec<(f64, f64)>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let count = BATCH.min(spec.samples - b * BATCH);
            let mut rng = stream_rng(spec.seed, b as u64);
            let mut acc = vec![(0.0, 0.0); m];
            for _ in 0..count {
                let x = draw(&mut rng);
                for (a, f) in acc.iter_mut().zip(integrands) {
                    let v = f(&x);
                    a.0 += v;
                    a.1 += v * v;
                }
            }
            acc
        })
        .collect();
    let nf = spec.samples as f64;
    Ok((0..m)
        .map(|k| {
            let (s, s2) = partial.iter().fold((0.0, 0.0), |a, p| (a.0 + p[k].0, a.1 + p[k].1));
            let mean = s / nf;
            let var = ((s2 - nf * mean * mean) / (nf - 1.0)).max(0.0);
            McEstimate {
                estimate: mean,
                stderr: (var / nf).sqrt(),
            }
        })
        .collect())
}

fn gaussian_point(n: usize) -> impl Fn(&mut rand_chacha::ChaCha8Rng) -> Vector + Sync {
    move |rng| Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal))
}

/// Standard Gaussian measure (density `(2π)^{-n/2} e^{-|x|²/2}`) of several
/// sets given by membership tests, all on common samples.
pub fn gaussian_measures<F>(n: usize, members: &[F], spec: SamplerSpec) -> Result<Vec<McEstimate>>
where
    F: Fn(&Vector) -> bool + Sync,
{
    let indicators: Vec<_> = members
        .iter()
        .map(|f| move |x: &Vector| if f(x) { 1.0 } else { 0.0 })
        .collect();
    sample_means(spec, gaussian_point(n), &indicators)
}

pub fn gaussian_measure(body: &dyn ConvexBody, spec: SamplerSpec) -> Result<McEstimate> {
    let member = |x: &Vector| body.contains(x);
    Ok(gaussian_measures(body.dim(), &[member], spec)?[0])
}

type Profile = dyn Fn(f64) -> f64 + Send + Sync;

/// A convex function `ψ` on `[0, ∞)` with values in `(-∞, ∞]`, defining the
/// density `e^{-ψ(|x|)}`.
#[derive(Clone)]
pub struct RadialProfile {
    psi: Arc<Profile>,
    name: String,
}

impl std::fmt::Debug for RadialProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialProfile").field("name", &self.name).finish()
    }
}

/// Points in the convexity check grid.
pub const PROFILE_GRID: usize = 1000;

impl RadialProfile {
    /// Checks the midpoint inequality on `PROFILE_GRID` points of `[0, t_max]`.
    pub fn new(name: impl Into<String>, t_max: f64, psi: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Result<Self> {
        let name = name.into();
        if !(t_max > 0.0) {
            return Err(Error::argument("profile grid needs a positive extent"));
        }
        let h = t_max / (PROFILE_GRID - 1) as f64;
        let vals: Vec<f64> = (0..PROFILE_GRID).map(|i| psi(i as f64 * h)).collect();
        if vals.iter().any(|v| v.is_nan() || *v == f64::NEG_INFINITY) {
            return Err(Error::argument(format!("profile {name} takes invalid values")));
        }
        for i in 1..PROFILE_GRID - 1 {
            let (a, m, b) = (vals[i - 1], vals[i], vals[i + 1]);
            if a.is_finite() && b.is_finite() {
                let scale = 1.0 + a.abs().max(b.abs());
                if !(m <= 0.5 * (a + b) + 1e-10 * scale) {
                    return Err(Error::argument(format!(
                        "profile {name} is not convex near t = {}",
                        i as f64 * h
                    )));
                }
            }
        }
        Ok(RadialProfile {
            psi: Arc::new(psi),
            name,
        })
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.psi)(t)
    }

    pub fn name(&self) -> &str {
        &self.name
    }
}

/// `∫_K e^{-ψ(|x|)} dx` by uniform sampling of the box `[-R, R]^n` with `R`
/// the circumradius of the body.
pub fn radial_logconcave_measure(body: &dyn ConvexBody, psi: &RadialProfile, spec: SamplerSpec) -> Result<McEstimate> {
    let n = body.dim();
    let r = body.circumradius();
    let box_volume = (2.0 * r).powi(n as i32);
    let draw = move |rng: &mut rand_chacha::ChaCha8Rng| Vector::from_fn(n, |_, _| rng.random_range(-r..=r));
    let f = |x: &Vector| {
        if body.contains(x) {
            box_volume * (-psi.eval(x.norm())).exp()
        } else {
            0.0
        }
    };
    Ok(sample_means(spec, draw, &[f])?[0])
}
