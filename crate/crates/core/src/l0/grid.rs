//! Direction grids on the unit sphere with a certified covering radius.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{dedup_points, vector, LinearMap, Vector};
use crate::symmetry::ReflectionGroup;

/// Safety factor applied to the largest neighbor gap.
pub const MESH_SAFETY: f64 = 1.2;

/// Named grid constructions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridSpec {
    /// `N` equally spaced angles on the circle.
    Circle(usize),
    /// Icosahedron subdivided `k` times: `10 * 4^k + 2` points on `S^2`.
    Icosahedral(u32),
    /// Normalized points of the lattice `{-r..r}^4 / r` on the cube surface.
    Lattice(usize),
    /// The default level for the dimension.
    Auto,
}

impl GridSpec {
    /// The default construction in dimension `n`.
    pub fn resolve(self, n: usize) -> Result<GridSpec> {
        let spec = match (self, n) {
            (GridSpec::Auto, 2) => GridSpec::Circle(720),
            (GridSpec::Auto, 3) => GridSpec::Icosahedral(5),
            (GridSpec::Auto, 4) => GridSpec::Lattice(8),
            (GridSpec::Circle(_), 2) | (GridSpec::Icosahedral(_), 3) | (GridSpec::Lattice(_), 4) => self,
            (GridSpec::Auto, _) => {
                return Err(Error::argument(format!("no built-in direction grid in dimension {n} (need 2..=4)")))
            }
            _ => return Err(Error::argument(format!("grid {self} does not live in dimension {n}"))),
        };
        Ok(spec)
    }

    /// The next finer grid; it contains this one.
    pub fn refine(self) -> GridSpec {
        match self {
            GridSpec::Circle(n) => GridSpec::Circle(2 * n),
            GridSpec::Icosahedral(k) => GridSpec::Icosahedral(k + 1),
            GridSpec::Lattice(r) => GridSpec::Lattice(2 * r),
            GridSpec::Auto => GridSpec::Auto,
        }
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GridSpec::Circle(n) => write!(f, "circle-{n}"),
            GridSpec::Icosahedral(k) => write!(f, "icosahedral-{k}"),
            GridSpec::Lattice(r) => write!(f, "lattice-{r}"),
            GridSpec::Auto => write!(f, "auto"),
        }
    }
}

impl FromStr for GridSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "auto" {
            return Ok(GridSpec::Auto);
        }
        let bad = || Error::argument(format!("unknown grid level {s:?} (expected circle-N, icosahedral-K, lattice-R or auto)"));
        let (kind, level) = s.rsplit_once('-').ok_or_else(bad)?;
        match kind {
            "circle" => Ok(GridSpec::Circle(level.parse().map_err(|_| bad())?)),
            "icosahedral" => Ok(GridSpec::Icosahedral(level.parse().map_err(|_| bad())?)),
            "lattice" => Ok(GridSpec::Lattice(level.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }
}

/// Unit directions with a bound `mesh` on the geodesic distance from any
/// point of the sphere to the grid.
#[derive(Debug, Clone)]
pub struct DirectionGrid {
    dim: usize,
    spec: GridSpec,
    directions: Vec<Vector>,
    mesh: f64,
    group_order: Option<usize>,
}

/// Largest icosahedral level accepted.
const MAX_ICOSAHEDRAL_LEVEL: u32 = 8;

pub fn direction_grid(n: usize, spec: GridSpec, group: Option<&ReflectionGroup>) -> Result<DirectionGrid> {
    let spec = spec.resolve(n)?;
    let (directions, mesh) = match spec {
        GridSpec::Circle(count) => circle(count)?,
        GridSpec::Icosahedral(k) => icosahedral(k)?,
        GridSpec::Lattice(r) => lattice(r)?,
        GridSpec::Auto => unreachable!("resolved above"),
    };
    let mut grid = DirectionGrid {
        dim: n,
        spec,
        directions,
        mesh: mesh * MESH_SAFETY,
        group_order: None,
    };
    if let Some(g) = group {
        grid = grid.orbit_closure(g)?;
    }
    Ok(grid)
}

fn circle(count: usize) -> Result<(Vec<Vector>, f64)> {
    if count < 8 {
        return Err(Error::argument("circle grids need at least 8 directions"));
    }
    let step = 2.0 * std::f64::consts::PI / count as f64;
    let dirs = (0..count)
        .map(|k| {
            let t = k as f64 * step;
            vector(&[t.cos(), t.sin()])
        })
        .collect();
    Ok((dirs, step))
}

fn geodesic(a: &Vector, b: &Vector) -> f64 {
    // atan2 form stays accurate for nearly parallel vectors
    let cross = (a * b.norm() - b * a.norm()).norm();
    let sum = (a * b.norm() + b * a.norm()).norm();
    2.0 * cross.atan2(sum)
}

fn icosahedral(level: u32) -> Result<(Vec<Vector>, f64)> {
    if level > MAX_ICOSAHEDRAL_LEVEL {
        return Err(Error::argument(format!("icosahedral level above {MAX_ICOSAHEDRAL_LEVEL}")));
    }
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let raw = [
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let mut pts: Vec<Vector> = raw.iter().map(|p| vector(p).normalize()).collect();
    let mut faces: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..level {
        let mut midpoint: HashMap<(usize, usize), usize> = HashMap::new();
        let mut next = Vec::with_capacity(faces.len() * 4);
        for f in &faces {
            let mut mid = [0usize; 3];
            for e in 0..3 {
                let (a, b) = (f[e], f[(e + 1) % 3]);
                let key = (a.min(b), a.max(b));
                mid[e] = *midpoint.entry(key).or_insert_with(|| {
                    pts.push((&pts[a] + &pts[b]).normalize());
                    pts.len() - 1
                });
            }
            next.push([f[0], mid[0], mid[2]]);
            next.push([f[1], mid[1], mid[0]]);
            next.push([f[2], mid[2], mid[1]]);
            next.push([mid[0], mid[1], mid[2]]);
        }
        faces = next;
    }
    // the covering radius of a spherical triangle is below its longest edge
    let mesh = faces
        .iter()
        .flat_map(|f| (0..3).map(move |e| (f[e], f[(e + 1) % 3])))
        .map(|(a, b)| geodesic(&pts[a], &pts[b]))
        .fold(0.0, f64::max);
    Ok((pts, mesh))
}

fn lattice(r: usize) -> Result<(Vec<Vector>, f64)> {
    if r == 0 || r > 32 {
        return Err(Error::argument("lattice resolution must be in 1..=32"));
    }
    let ri = r as i64;
    let mut dirs = Vec::new();
    let side = 2 * ri + 1;
    for flat in 0..side.pow(4) {
        let c: Vec<i64> = (0..4).map(|k| (flat / side.pow(3 - k)) % side - ri).collect();
        if c.iter().any(|x| x.abs() == ri) {
            dirs.push(Vector::from_iterator(4, c.iter().map(|&x| x as f64)).normalize());
        }
    }
    // on a cube facet every point is within sqrt(3)/(2r) of a lattice point,
    // and radial projection from outside the unit ball does not expand
    // distances; convert the chord to a geodesic
    let chord = (3f64.sqrt() / (2.0 * r as f64)).min(2.0);
    Ok((dirs, 2.0 * (chord / 2.0).asin()))
}

impl DirectionGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn spec(&self) -> GridSpec {
        self.spec
    }

    pub fn directions(&self) -> &[Vector] {
        &self.directions
    }

    pub fn len(&self) -> usize {
        self.directions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.directions.is_empty()
    }

    /// Upper bound on the geodesic distance from any unit vector to the grid.
    pub fn mesh(&self) -> f64 {
        self.mesh
    }

    /// Order of the group under which the grid was closed, if any.
    pub fn group_order(&self) -> Option<usize> {
        self.group_order
    }

    /// Adds the images `g^T u / |g^T u|` of every direction under every group
    /// element. The mesh bound is kept.
    pub fn orbit_closure(mut self, group: &ReflectionGroup) -> Result<DirectionGrid> {
        if group.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: group.dim(),
            });
        }
        let mut all = Vec::with_capacity(self.directions.len() * group.order());
        for u in &self.directions {
            for g in group.elements() {
                all.push((g.transpose() * u).normalize());
            }
        }
        self.directions = dedup_points(&all, 1e-9);
        self.group_order = Some(group.order());
        Ok(self)
    }

    /// Adds directions (normalized, deduplicated). The mesh bound is kept.
    pub fn with_directions(mut self, extra: &[Vector]) -> Result<DirectionGrid> {
        let mut all = self.directions;
        for u in extra {
            if u.len() != self.dim || !(u.norm() > 0.0) {
                return Err(Error::argument("extra grid direction must be a nonzero vector of the grid dimension"));
            }
            all.push(u.normalize());
        }
        self.directions = dedup_points(&all, 1e-9);
        Ok(self)
    }

    /// Directions `phi^{-T} u / |phi^{-T} u|`; the mesh grows by the
    /// condition number of `phi`.
    pub fn transformed(&self, phi: &LinearMap) -> Result<DirectionGrid> {
        let inv_t = phi
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::argument("grid transform is singular"))?
            .transpose();
        let sv = phi.clone().svd(false, false).singular_values;
        let kappa = sv.max() / sv.min();
        Ok(DirectionGrid {
            dim: self.dim,
            spec: self.spec,
            directions: self.directions.iter().map(|u| (&inv_t * u).normalize()).collect(),
            mesh: (self.mesh * kappa).min(std::f64::consts::PI),
            group_order: self.group_order,
        })
    }

    /// Largest geodesic distance from the sampled points to their nearest
    /// grid direction, by brute force.
    pub fn covering_gap(&self, samples: &[Vector]) -> f64 {
        samples
            .iter()
            .map(|s| {
                let best = self.directions.iter().map(|u| u.dot(s)).fold(f64::NEG_INFINITY, f64::max);
                best.clamp(-1.0, 1.0).acos()
            })
            .fold(0.0, f64::max)
    }
}
