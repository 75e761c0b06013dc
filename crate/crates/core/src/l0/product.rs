//! Inner hull of the coordinatewise product `K^{1-λ} · L^λ` of two
//! unconditional bodies.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::geometry::{Body, ConvexBody, HPolytope, VPolytope};
use crate::linalg::{LinearMap, Vector};
use crate::symmetry::{is_invariant, INVARIANCE_TOL};

/// Default number of product points before sign reflection.
pub const PRODUCT_BUDGET: usize = 40_000;

fn sign_flip(n: usize, i: usize) -> LinearMap {
    let mut m = LinearMap::identity(n, n);
    m[(i, i)] = -1.0;
    m
}

pub fn is_unconditional(body: &Body) -> bool {
    let n = body.dim();
    (0..n).all(|i| is_invariant(body, &sign_flip(n, i), INVARIANCE_TOL))
}

/// Nonnegative integer vectors of length `n` summing to `r`, normalized.
fn orthant_directions(n: usize, r: usize) -> Vec<Vector> {
    fn rec(n: usize, left: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vector>) {
        if prefix.len() == n - 1 {
            prefix.push(left);
            let v = Vector::from_iterator(n, prefix.iter().map(|&k| k as f64));
            out.push(v.normalize());
            prefix.pop();
            return;
        }
        for k in 0..=left {
            prefix.push(k);
            rec(n, left - k, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(n, r, &mut Vec::new(), &mut out);
    out
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

enum Radial<'a> {
    Facets(HPolytope),
    Quadric(&'a crate::geometry::QuadricBody),
    Bisect(&'a Body),
}

impl Radial<'_> {
    fn boundary(&self, d: &Vector) -> Vector {
        match self {
            Radial::Facets(h) => {
                let t = h
                    .halfspaces()
                    .iter()
                    .filter_map(|hs| {
                        let a = hs.normal.dot(d);
                        (a > 0.0).then(|| hs.offset / a)
                    })
                    .fold(f64::INFINITY, f64::min);
                d * t
            }
            Radial::Quadric(q) => q.radial_boundary_point(d),
            Radial::Bisect(b) => {
                let (mut lo, mut hi) = (0.0, 1.01 * b.circumradius() / d.norm());
                for _ in 0..80 {
                    let mid = 0.5 * (lo + hi);
                    if b.contains(&(d * mid)) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                d * lo
            }
        }
    }
}

/// Points of `body ∩ R^n_+`: absolute vertices for polytopes plus radial
/// boundary points on a lattice of positive-orthant directions.
fn orthant_points(body: &Body, count: usize) -> Result<Vec<Vector>> {
    let n = body.dim();
    let mut pts: Vec<Vector> = match body {
        Body::Polytope(p) => p.canonical()?.vertices().iter().map(|v| v.abs()).collect(),
        _ => Vec::new(),
    };
    let radial = match body {
        Body::Polytope(p) => Radial::Facets(p.to_hpolytope()?),
        Body::Quadric(q) => Radial::Quadric(q),
        Body::Oracle(_) => Radial::Bisect(body),
    };
    let room = count.saturating_sub(pts.len()).max(n);
    let mut level = 1;
    while binomial(level + 1 + n - 1, n - 1) <= room {
        level += 1;
    }
    pts.extend(orthant_directions(n, level).iter().map(|d| radial.boundary(d)));
    Ok(crate::linalg::dedup_points(&pts, 1e-12))
}

/// Convex hull of all sign reflections of `z_i = x_i^{1-λ} y_i^λ` over
/// sampled pairs `x ∈ K ∩ R^n_+`, `y ∈ L ∩ R^n_+`. Every such `z` lies in the
/// product, which is convex, so the hull is inside it.
pub fn coordinatewise_product_inner(k: &Body, l: &Body, lambda: f64, budget: usize) -> Result<VPolytope> {
    let n = k.dim();
    if l.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: l.dim() });
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::argument("lambda must lie in [0, 1]"));
    }
    for (name, b) in [("K", k), ("L", l)] {
        if !is_unconditional(b) {
            return Err(Error::Precondition(format!("{name} is not unconditional")));
        }
    }
    let per_body = ((budget as f64).sqrt() as usize).max(2 * n);
    let xs = orthant_points(k, per_body)?;
    let ys = orthant_points(l, per_body)?;
    let mut products = Vec::with_capacity(xs.len() * ys.len());
    for x in &xs {
        for y in &ys {
            products.push(x.zip_map(y, |a, b| a.powf(1.0 - lambda) * b.powf(lambda)));
        }
    }
    // the hull of the first orthant's extreme points suffices before reflecting
    let mut cloud = products.clone();
    cloud.push(Vector::zeros(n));
    let seeds = prune_orthant(cloud, n);
    let reflected: Vec<Vector> = seeds
        .iter()
        .flat_map(|z| {
            (0..n)
                .map(|_| [1.0, -1.0])
                .multi_cartesian_product()
                .map(move |s| z.zip_map(&Vector::from_vec(s), |a, b| a * b))
        })
        .collect();
    VPolytope::new(reflected)?.canonical()
}

/// Drops points dominated coordinatewise by another point; such points never
/// become extreme after reflection.
fn prune_orthant(points: Vec<Vector>, n: usize) -> Vec<Vector> {
    let mut sorted = points;
    sorted.sort_by(|a, b| b.sum().total_cmp(&a.sum()));
    let mut kept: Vec<Vector> = Vec::new();
    for p in sorted {
        if !kept.iter().any(|q| (0..n).all(|i| q[i] >= p[i])) {
            kept.push(p);
        }
    }
    kept
}
