//! Wulff shapes of `f = h_K^{1-λ} h_L^λ` with certified two-sided volumes.

use rayon::prelude::*;

use super::grid::DirectionGrid;
use crate::error::{Error, Result};
use crate::geometry::{minkowski_sum, Body, ConvexBody, HPolytope, Halfspace, VPolytope};
use crate::linalg::Vector;

/// How the inner factor was certified.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Certification {
    /// Both bodies are polytopes and the grid contains every facet normal of
    /// `K + L`; the factor comes from checking the outer vertices against
    /// those halfspaces.
    NormalFan,
    /// Global Lipschitz bound of `f` on the sphere and the grid mesh.
    Lipschitz,
}

/// Options for [`l0_combination_with`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WulffOptions {
    /// Add the facet normals of `K + L` to the grid when both are polytopes.
    pub fan_rays: bool,
}

impl Default for WulffOptions {
    fn default() -> Self {
        WulffOptions { fan_rays: true }
    }
}

/// `inner_factor · outer ⊆ W ⊆ outer` for the Wulff shape `W` of `f`.
#[derive(Debug, Clone)]
pub struct WulffApprox {
    pub outer: HPolytope,
    pub outer_vertices: VPolytope,
    pub inner_factor: f64,
    /// Constant `c` with `<y, u> <= f(u) + c δ` for `y` in the outer polytope.
    pub lipschitz_bound: f64,
    pub certification: Certification,
    /// Mesh of the grid actually used.
    pub mesh: f64,
    pub lambda: f64,
}

impl WulffApprox {
    pub fn dim(&self) -> usize {
        self.outer.dim()
    }

    pub fn contains_outer(&self, x: &Vector) -> bool {
        self.outer.contains(x, 1e-12)
    }

    pub fn contains_inner(&self, x: &Vector) -> bool {
        self.inner_factor > 0.0 && self.outer.contains(&(x / self.inner_factor), 0.0)
    }
}

/// `f(u) = h_K(u)^{1-λ} h_L(u)^λ`, failing on nonpositive support values.
pub fn combined_support(k: &Body, l: &Body, lambda: f64, u: &Vector) -> Result<f64> {
    let hk = k.support(u)?;
    let hl = l.support(u)?;
    if !(hk > 0.0) || !(hl > 0.0) {
        return Err(Error::OriginOutside(format!(
            "nonpositive support value in direction {:?}",
            u.as_slice()
        )));
    }
    Ok(hk.powf(1.0 - lambda) * hl.powf(lambda))
}

/// Lipschitz constant of `f` along great circles:
/// `f_max · ((1-λ) R_K / r_K + λ R_L / r_L)` with `f_max = R_K^{1-λ} R_L^λ`.
///
/// Wherever `h_K`, `h_L` are differentiable, `∇f = f ((1-λ) ∇h_K / h_K + λ ∇h_L / h_L)`,
/// `|∇h| <= R` and `h >= r` on the sphere; both supports are Lipschitz, so the
/// bound extends to all arcs.
pub fn lipschitz_constant(k: &Body, l: &Body, lambda: f64) -> Result<f64> {
    let (rk, rl) = (k.inradius()?, l.inradius()?);
    if !(rk > 0.0) || !(rl > 0.0) {
        return Err(Error::OriginOutside("origin must be interior to both bodies".into()));
    }
    let (big_k, big_l) = (k.circumradius(), l.circumradius());
    let f_max = big_k.powf(1.0 - lambda) * big_l.powf(lambda);
    Ok(f_max * ((1.0 - lambda) * big_k / rk + lambda * big_l / rl))
}

/// Facet normals of `K + L`: the rays of the common refinement of the two
/// normal fans.
pub fn fan_rays(k: &VPolytope, l: &VPolytope) -> Result<Vec<Vector>> {
    Ok(minkowski_sum(k, l)?.facets()?.into_iter().map(|f| f.normal).collect())
}

pub fn l0_combination(k: &Body, l: &Body, lambda: f64, grid: &DirectionGrid) -> Result<WulffApprox> {
    l0_combination_with(k, l, lambda, grid, WulffOptions::default())
}

pub fn l0_combination_with(
    k: &Body,
    l: &Body,
    lambda: f64,
    grid: &DirectionGrid,
    options: WulffOptions,
) -> Result<WulffApprox> {
    check_inputs(k, l, lambda, grid)?;
    let lf = lipschitz_constant(k, l, lambda)?;
    wulff_shape(k, l, lambda, grid, options, &|u| combined_support(k, l, lambda, u), lf)
}

/// `f(u) = (1-λ) h_K(u) + λ h_L(u)`, the support function of `(1-λ)K + λL`.
pub fn mixed_support(k: &Body, l: &Body, lambda: f64, u: &Vector) -> Result<f64> {
    let h = (1.0 - lambda) * k.support(u)? + lambda * l.support(u)?;
    if !(h > 0.0) {
        return Err(Error::OriginOutside(format!(
            "nonpositive support value in direction {:?}",
            u.as_slice()
        )));
    }
    Ok(h)
}

/// Certified bracket of the Minkowski combination `(1-λ)K + λL`, which is
/// the Wulff shape of [`mixed_support`]. A support function is
/// `R`-Lipschitz on the sphere, so `(1-λ) R_K + λ R_L` bounds the slope.
pub fn minkowski_combination(k: &Body, l: &Body, lambda: f64, grid: &DirectionGrid) -> Result<WulffApprox> {
    check_inputs(k, l, lambda, grid)?;
    let lf = (1.0 - lambda) * k.circumradius() + lambda * l.circumradius();
    let f = |u: &Vector| mixed_support(k, l, lambda, u);
    wulff_shape(k, l, lambda, grid, WulffOptions::default(), &f, lf)
}

fn check_inputs(k: &Body, l: &Body, lambda: f64, grid: &DirectionGrid) -> Result<()> {
    let n = k.dim();
    if l.dim() != n || grid.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: if l.dim() != n { l.dim() } else { grid.dim() },
        });
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::argument("lambda must lie in [0, 1]"));
    }
    Ok(())
}

/// Outer polytope of the Wulff shape of `f` on the grid (plus the fan rays
/// of a polytope pair), with the inner factor certified by the fan or by the
/// slope bound `lf`.
fn wulff_shape(
    k: &Body,
    l: &Body,
    lambda: f64,
    grid: &DirectionGrid,
    options: WulffOptions,
    f: &(dyn Fn(&Vector) -> Result<f64> + Sync),
    lf: f64,
) -> Result<WulffApprox> {
    let rays = match (k, l, options.fan_rays) {
        (Body::Polytope(pk), Body::Polytope(pl), true) => Some(fan_rays(pk, pl)?),
        _ => None,
    };
    let augmented;
    let grid = match &rays {
        Some(r) => {
            augmented = grid.clone().with_directions(r)?;
            &augmented
        }
        None => grid,
    };
    let values: Vec<f64> = grid
        .directions()
        .par_iter()
        .map(|u| f(u))
        .collect::<Result<_>>()?;
    let halfspaces: Vec<Halfspace> = grid
        .directions()
        .iter()
        .zip(&values)
        .map(|(u, &f)| Halfspace {
            normal: u.clone(),
            offset: f,
        })
        .collect();
    let outer = HPolytope::new(halfspaces)?;
    let outer_vertices = outer.to_vpolytope()?;
    let r_out = outer_vertices.circumradius();
    let c = lf + r_out;
    let delta = grid.mesh();
    let (inner_factor, certification) = match &rays {
        Some(r) => {
            let mut s: f64 = 1.0;
            for ray in r {
                let fr = f(ray)?;
                for y in outer_vertices.vertices() {
                    let p = y.dot(ray);
                    if p > 0.0 {
                        s = s.min(fr / p);
                    }
                }
            }
            (s, Certification::NormalFan)
        }
        None => {
            let f_min = values.iter().cloned().fold(f64::INFINITY, f64::min) - lf * delta;
            let s = if f_min > 0.0 { 1.0 - c * delta / f_min } else { 0.0 };
            if s <= 0.0 {
                // need c δ < f_min; f_min itself shrinks with δ
                let grid_min = f_min + lf * delta;
                return Err(Error::GridTooCoarse {
                    mesh: delta,
                    required: grid_min / (c + lf),
                });
            }
            (s, Certification::Lipschitz)
        }
    };
    Ok(WulffApprox {
        outer,
        outer_vertices,
        inner_factor,
        lipschitz_bound: c,
        certification,
        mesh: delta,
        lambda,
    })
}

/// `(inner_factor^n · V(outer), V(outer))`.
pub fn volume_bounds(w: &WulffApprox) -> (f64, f64) {
    let upper = w.outer_vertices.volume().value;
    (w.inner_factor.powi(w.dim() as i32) * upper, upper)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::OracleBody;
    use crate::l0::{direction_grid, GridSpec};
    use crate::linalg::{sphere_sample, vector};

    fn square(a: f64) -> Body {
        VPolytope::from_coords(&[&[a, a], &[-a, a], &[a, -a], &[-a, -a]]).unwrap().into()
    }

    fn diamond() -> Body {
        VPolytope::from_coords(&[&[1.0, 0.0], &[-1.0, 0.0], &[0.0, 1.0], &[0.0, -1.0]]).unwrap().into()
    }

    #[test]
    fn same_body_gives_itself() {
        let grid = direction_grid(2, GridSpec::Circle(64), None).unwrap();
        let w = l0_combination(&square(1.0), &square(1.0), 0.3, &grid).unwrap();
        let (lo, hi) = volume_bounds(&w);
        assert_eq!(w.certification, Certification::NormalFan);
        assert!((hi - 4.0).abs() < 1e-12 && (lo - 4.0).abs() < 1e-12);
    }

    #[test]
    fn dilates_scale_geometrically() {
        let grid = direction_grid(2, GridSpec::Circle(64), None).unwrap();
        for c in [0.5, 2.0, 3.0] {
            let w = l0_combination(&square(1.0), &square(c), 0.25, &grid).unwrap();
            let (lo, hi) = volume_bounds(&w);
            let want = 4.0 * c.powf(2.0 * 0.25);
            assert!(lo <= want * (1.0 + 1e-12) && hi >= want * (1.0 - 1e-12));
            assert!((hi / lo).ln() < 1e-12);
        }
    }

    #[test]
    fn lipschitz_route_brackets_and_tightens() {
        let disk: Body = OracleBody::ball(2, 1.0).unwrap().into();
        let big: Body = OracleBody::ball(2, 2.0).unwrap().into();
        let mut last = f64::INFINITY;
        for count in [180, 360, 720, 1440] {
            let grid = direction_grid(2, GridSpec::Circle(count), None).unwrap();
            let w = l0_combination(&disk, &big, 0.5, &grid).unwrap();
            assert_eq!(w.certification, Certification::Lipschitz);
            let (lo, hi) = volume_bounds(&w);
            let want = std::f64::consts::PI * 2.0;
            assert!(lo <= want && want <= hi, "{lo} {want} {hi}");
            assert!(hi - lo < last);
            last = hi - lo;
        }
    }

    #[test]
    fn coarse_grid_is_reported() {
        let k: Body = OracleBody::ball(2, 1.0).unwrap().into();
        let l = k.transform(&crate::linalg::LinearMap::from_row_slice(2, 2, &[20.0, 0.0, 0.0, 0.05])).unwrap();
        let grid = direction_grid(2, GridSpec::Circle(8), None).unwrap();
        assert!(matches!(l0_combination(&k, &l, 0.5, &grid), Err(Error::GridTooCoarse { .. })));
    }

    #[test]
    fn lipschitz_constant_dominates_finite_differences() {
        let (k, l) = (square(1.0), diamond());
        for lambda in [0.0, 0.3, 0.5, 1.0] {
            let lf = lipschitz_constant(&k, &l, lambda).unwrap();
            let pts = sphere_sample(2, 400, 9);
            for u in &pts {
                let t: f64 = 1e-3;
                let rot = vector(&[u[0] * t.cos() - u[1] * t.sin(), u[0] * t.sin() + u[1] * t.cos()]);
                let d = (combined_support(&k, &l, lambda, &rot).unwrap() - combined_support(&k, &l, lambda, u).unwrap()).abs();
                assert!(d <= lf * t * (1.0 + 1e-9));
            }
        }
    }

    #[test]
    fn square_and_diamond_is_exact_on_fan_rays() {
        let coarse = direction_grid(2, GridSpec::Circle(8), None).unwrap();
        let fine = direction_grid(2, GridSpec::Circle(7200), None).unwrap();
        let a = l0_combination(&square(1.0), &diamond(), 0.5, &coarse).unwrap();
        let b = l0_combination_with(&square(1.0), &diamond(), 0.5, &fine, WulffOptions { fan_rays: false }).unwrap();
        let (alo, ahi) = volume_bounds(&a);
        let (blo, bhi) = volume_bounds(&b);
        assert!((ahi - alo) < 1e-12 * ahi);
        // the exact value sits inside the fine Lipschitz bracket
        assert!(blo <= alo && ahi <= bhi * (1.0 + 1e-12));
    }

    #[test]
    fn minkowski_combination_brackets_steiner_volume() {
        let disk: Body = OracleBody::ball(2, 1.0).unwrap().into();
        let grid = direction_grid(2, GridSpec::Circle(2000), None).unwrap();
        for lambda in [0.2, 0.5, 0.9] {
            let (lo, hi) = volume_bounds(&minkowski_combination(&square(1.0), &disk, lambda, &grid).unwrap());
            let a = 1.0 - lambda;
            let want = 4.0 * a * a + 8.0 * a * lambda + std::f64::consts::PI * lambda * lambda;
            assert!(lo <= want && want <= hi, "{lo} {want} {hi}");
            assert!((hi / lo).ln() < 0.05);
        }
        let w = minkowski_combination(&square(1.0), &diamond(), 0.5, &grid).unwrap();
        assert_eq!(w.certification, Certification::NormalFan);
        let (lo, hi) = volume_bounds(&w);
        // square of side 1 plus diamond of half-diagonal 1/2: the square,
        // the diamond and four 1 x 1/2 strips give 1 + 1/2 + 2
        assert!((lo - hi).abs() < 1e-12 && (hi - 3.5).abs() < 1e-12, "{lo} {hi}");
    }
}
