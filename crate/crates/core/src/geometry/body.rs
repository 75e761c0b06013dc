//! A common interface over polytopes, quadric bodies and bare oracles.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use super::polytope::{check_direction, VPolytope, GEOM_TOL};
use super::quadric::QuadricBody;
use crate::error::{Error, Result};
use crate::linalg::{random_unit, stream_rng, LinearMap, Vector, MAX_DIM};

/// What the L0 and measure code needs from a convex body containing the
/// origin in its interior.
pub trait ConvexBody: Send + Sync {
    fn dim(&self) -> usize;
    fn support(&self, u: &Vector) -> Result<f64>;
    fn contains(&self, x: &Vector) -> bool;
    /// Radius of some origin-centered ball inside the body.
    fn inradius(&self) -> Result<f64>;
    /// Radius of some origin-centered ball containing the body.
    fn circumradius(&self) -> f64;
}

type SupportFn = dyn Fn(&Vector) -> f64 + Send + Sync;
type MemberFn = dyn Fn(&Vector) -> bool + Send + Sync;

/// A body known only through its support function and membership test.
#[derive(Clone)]
pub struct OracleBody {
    dim: usize,
    name: String,
    support: Arc<SupportFn>,
    membership: Arc<MemberFn>,
    inradius: f64,
    circumradius: f64,
    volume: Option<f64>,
}

impl fmt::Debug for OracleBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OracleBody")
            .field("dim", &self.dim)
            .field("name", &self.name)
            .field("inradius", &self.inradius)
            .field("circumradius", &self.circumradius)
            .finish()
    }
}

impl OracleBody {
    pub fn new(
        dim: usize,
        name: impl Into<String>,
        support: impl Fn(&Vector) -> f64 + Send + Sync + 'static,
        membership: impl Fn(&Vector) -> bool + Send + Sync + 'static,
        inradius: f64,
        circumradius: f64,
    ) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::argument(format!("unsupported dimension {dim}")));
        }
        if !(inradius > 0.0) || !(circumradius >= inradius) || !circumradius.is_finite() {
            return Err(Error::argument(format!(
                "oracle radii must satisfy 0 < r <= R < inf (got r={inradius}, R={circumradius})"
            )));
        }
        Ok(OracleBody {
            dim,
            name: name.into(),
            support: Arc::new(support),
            membership: Arc::new(membership),
            inradius,
            circumradius,
            volume: None,
        })
    }

    /// Euclidean ball of the given radius about the origin.
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        let mut b = OracleBody::new(
            dim,
            format!("ball({radius})"),
            move |u| radius * u.norm(),
            move |x| x.norm() <= radius * (1.0 + 1e-12),
            radius,
            radius,
        )?;
        b.volume = Some(unit_ball_volume(dim) * radius.powi(dim as i32));
        Ok(b)
    }

    pub fn with_volume(mut self, volume: f64) -> Self {
        self.volume = Some(volume);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn volume(&self) -> Option<f64> {
        self.volume
    }

    /// Spot checks of the oracle contract: homogeneity and subadditivity of
    /// the support on sampled triples, `rB` inside and `RB` enclosing via
    /// membership, and agreement between support and membership.
    pub fn validate(&self, samples: usize, seed: u64) -> Result<()> {
        let mut rng = stream_rng(seed, 0);
        let n = self.dim;
        let tol = 1e-8 * self.circumradius.max(1.0);
        for _ in 0..samples {
            let u = random_unit(n, &mut rng);
            let v = random_unit(n, &mut rng);
            let hu = (self.support)(&u);
            let hv = (self.support)(&v);
            let h3 = (self.support)(&(&u * 3.0));
            if (h3 - 3.0 * hu).abs() > 3.0 * tol {
                return Err(Error::Precondition(format!("{}: support not positively homogeneous", self.name)));
            }
            if (self.support)(&(&u + &v)) > hu + hv + tol {
                return Err(Error::Precondition(format!("{}: support not subadditive", self.name)));
            }
            if hu < self.inradius - tol || hu > self.circumradius + tol {
                return Err(Error::Precondition(format!("{}: support outside [r, R]", self.name)));
            }
            if !(self.membership)(&(&u * (self.inradius * (1.0 - 1e-6)))) {
                return Err(Error::Precondition(format!("{}: inner ball not contained", self.name)));
            }
            if (self.membership)(&(&u * (self.circumradius * (1.0 + 1e-6) + 1e-9))) {
                return Err(Error::Precondition(format!("{}: body leaves the outer ball", self.name)));
            }
            // A point beyond the supporting hyperplane cannot be a member.
            if (self.membership)(&(&u * (hu + tol.max(1e-6)))) {
                return Err(Error::Precondition(format!("{}: support and membership disagree", self.name)));
            }
        }
        Ok(())
    }
}

impl ConvexBody for OracleBody {
    fn dim(&self) -> usize {
        self.dim
    }

    fn support(&self, u: &Vector) -> Result<f64> {
        check_direction(u, self.dim)?;
        Ok((self.support)(u))
    }

    fn contains(&self, x: &Vector) -> bool {
        (self.membership)(x)
    }

    fn inradius(&self) -> Result<f64> {
        Ok(self.inradius)
    }

    fn circumradius(&self) -> f64 {
        self.circumradius
    }
}

pub fn unit_ball_volume(n: usize) -> f64 {
    // V_n = 2 pi / n * V_{n-2}
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Any of the supported body representations.
#[derive(Debug, Clone)]
pub enum Body {
    Polytope(VPolytope),
    Quadric(QuadricBody),
    Oracle(OracleBody),
}

impl Body {
    pub fn as_polytope(&self) -> Option<&VPolytope> {
        match self {
            Body::Polytope(p) => Some(p),
            _ => None,
        }
    }

    /// Exact volume for polytopes and oracles that carry one.
    pub fn volume(&self) -> Option<f64> {
        match self {
            Body::Polytope(p) => {
                let v = p.volume();
                (!v.degenerate).then_some(v.value)
            }
            Body::Quadric(_) => None,
            Body::Oracle(o) => o.volume,
        }
    }

    /// Image under an invertible linear map.
    pub fn transform(&self, phi: &LinearMap) -> Result<Body> {
        let n = self.dim();
        if phi.nrows() != n || phi.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: phi.nrows(),
            });
        }
        let det = phi.determinant();
        let svd = phi.clone().svd(false, false);
        let smax = svd.singular_values.max();
        let smin = svd.singular_values.min();
        if !(smin > 1e-12 * smax.max(1.0)) {
            return Err(Error::argument("transform matrix is not invertible"));
        }
        match self {
            Body::Polytope(p) => Ok(Body::Polytope(p.transform(phi)?)),
            _ => {
                let inv = phi.clone().try_inverse().ok_or_else(|| Error::argument("transform matrix is not invertible"))?;
                let inner = self.clone();
                let inner2 = self.clone();
                let phit = phi.transpose();
                let r = self.inradius()? * smin;
                let big_r = self.circumradius() * smax;
                let mut o = OracleBody::new(
                    n,
                    "transform",
                    move |u| inner.support(&(&phit * u)).unwrap_or(f64::NAN),
                    move |x| inner2.contains(&(&inv * x)),
                    r,
                    big_r,
                )?;
                o.volume = self.volume().map(|v| v * det.abs());
                Ok(Body::Oracle(o))
            }
        }
    }

    /// Cartesian product `K_1 x ... x K_m` in complementary coordinate blocks.
    pub fn direct_sum(parts: &[Body]) -> Result<Body> {
        if parts.is_empty() {
            return Err(Error::argument("direct sum needs at least one summand"));
        }
        let n: usize = parts.iter().map(|b| b.dim()).sum();
        if n > MAX_DIM {
            return Err(Error::argument(format!("direct sum has dimension {n} > {MAX_DIM}")));
        }
        if let Some(polys) = parts.iter().map(|b| b.as_polytope()).collect::<Option<Vec<_>>>() {
            let mut verts: Vec<Vector> = vec![DVector::zeros(0)];
            for p in polys {
                let vs = p.canonical()?.vertices().to_vec();
                verts = verts
                    .iter()
                    .flat_map(|a| vs.iter().map(move |b| DVector::from_iterator(a.len() + b.len(), a.iter().chain(b.iter()).copied())))
                    .collect();
            }
            return Ok(Body::Polytope(VPolytope::new(verts)?));
        }
        let blocks: Vec<(usize, usize)> = parts
            .iter()
            .scan(0, |start, b| {
                let s = *start;
                *start += b.dim();
                Some((s, b.dim()))
            })
            .collect();
        let mut r = f64::INFINITY;
        let mut r2 = 0.0;
        for b in parts {
            r = r.min(b.inradius()?);
            r2 += b.circumradius().powi(2);
        }
        let volume = parts.iter().map(|b| b.volume()).product::<Option<f64>>();
        let (p1, b1) = (parts.to_vec(), blocks.clone());
        let (p2, b2) = (parts.to_vec(), blocks);
        let mut o = OracleBody::new(
            n,
            "direct-sum",
            move |u| {
                p1.iter()
                    .zip(&b1)
                    .map(|(b, &(s, d))| {
                        let part = u.rows(s, d).into_owned();
                        if part.iter().all(|&x| x == 0.0) {
                            0.0
                        } else {
                            b.support(&part).unwrap_or(f64::NAN)
                        }
                    })
                    .sum()
            },
            move |x| p2.iter().zip(&b2).all(|(b, &(s, d))| b.contains(&x.rows(s, d).into_owned())),
            r,
            r2.sqrt(),
        )?;
        o.volume = volume;
        Ok(Body::Oracle(o))
    }
}

impl ConvexBody for Body {
    fn dim(&self) -> usize {
        match self {
            Body::Polytope(p) => p.dim(),
            Body::Quadric(q) => q.dim(),
            Body::Oracle(o) => o.dim,
        }
    }

    fn support(&self, u: &Vector) -> Result<f64> {
        match self {
            Body::Polytope(p) => p.support(u),
            Body::Quadric(q) => q.support(u),
            Body::Oracle(o) => ConvexBody::support(o, u),
        }
    }

    fn contains(&self, x: &Vector) -> bool {
        match self {
            Body::Polytope(p) => p.contains(x, GEOM_TOL),
            Body::Quadric(q) => q.contains(x),
            Body::Oracle(o) => (o.membership)(x),
        }
    }

    fn inradius(&self) -> Result<f64> {
        match self {
            Body::Polytope(p) => p.inradius(),
            Body::Quadric(q) => Ok(q.inradius()),
            Body::Oracle(o) => Ok(o.inradius),
        }
    }

    fn circumradius(&self) -> f64 {
        match self {
            Body::Polytope(p) => p.circumradius(),
            Body::Quadric(q) => q.circumradius(),
            Body::Oracle(o) => o.circumradius,
        }
    }
}

impl From<VPolytope> for Body {
    fn from(p: VPolytope) -> Self {
        Body::Polytope(p)
    }
}

impl From<QuadricBody> for Body {
    fn from(q: QuadricBody) -> Self {
        Body::Quadric(q)
    }
}

impl From<OracleBody> for Body {
    fn from(o: OracleBody) -> Self {
        Body::Oracle(o)
    }
}
