//! Body-spec files: one body per file, json5 text with a `kind` tag.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Body, ConvexBody, HPolytope, Halfspace, OracleBody, QuadricBody, QuadricConstraint, VPolytope};
use crate::linalg::{unit, LinearMap, Vector, MAX_DIM};
use crate::symmetry::LinearReflection;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BodySpec {
    Vrep {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        vertices: Vec<Vec<f64>>,
    },
    Hrep {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        halfspaces: Vec<HalfspaceSpec>,
    },
    Quadric {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        constraints: Vec<ConstraintSpec>,
    },
    Named {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        n: Option<usize>,
        /// Number of sides for `regular-polygon`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        sides: Option<usize>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        scale: Option<f64>,
        /// Rescale to this volume after `scale`.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        volume: Option<f64>,
    },
    Transform {
        matrix: Vec<Vec<f64>>,
        child: Box<BodySpec>,
    },
    DirectSum {
        children: Vec<BodySpec>,
    },
}

/// `{<u, x> <= h}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HalfspaceSpec {
    pub u: Vec<f64>,
    pub h: f64,
}

/// `|x_I| <= rho` with 1-based indices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstraintSpec {
    #[serde(rename = "I")]
    pub indices: Vec<usize>,
    pub rho: f64,
}

pub const FIXTURE_NAMES: [&str; 10] = [
    "ball",
    "cross-polytope",
    "cube",
    "hexagon",
    "regular-polygon",
    "segment",
    "simplex",
    "square",
    "two-cylinders",
    "sheared-cube",
];

fn json5_error(e: json5::Error) -> Error {
    let (line, column) = e.position().map(|p| (p.line + 1, p.column + 1)).unwrap_or((0, 0));
    let message = match e.position() {
        // drop the trailing "at line .. column .." that Display appends
        Some(_) => e.to_string().rsplit_once(" at line ").map(|(m, _)| m.to_string()).unwrap_or(e.to_string()),
        None => e.to_string(),
    };
    Error::Parse { line, column, message }
}

/// Parses spec text without building the body.
pub fn parse_spec(text: &str) -> Result<BodySpec> {
    json5::from_str(text).map_err(json5_error)
}

/// Canonical text of a spec; [`parse_spec`] inverts it.
pub fn emit_body_spec(spec: &BodySpec) -> String {
    serde_json::to_string_pretty(spec).expect("specs serialize")
}

pub fn parse_body_spec(text: &str) -> Result<Body> {
    parse_spec(text)?.build()
}

fn check_dim(n: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM {
        return Err(Error::argument(format!("dimension {n} outside 1..={MAX_DIM}")));
    }
    Ok(())
}

fn expect_dim(declared: Option<usize>, found: usize) -> Result<()> {
    match declared {
        Some(n) if n != found => Err(Error::DimensionMismatch { expected: n, got: found }),
        _ => Ok(()),
    }
}

fn sign_patterns(n: usize) -> Vec<Vector> {
    (0..1usize << n)
        .map(|m| Vector::from_iterator(n, (0..n).map(|i| if m >> i & 1 == 1 { -1.0 } else { 1.0 })))
        .collect()
}

fn polygon(m: usize) -> Result<VPolytope> {
    if m < 3 {
        return Err(Error::argument("a polygon needs at least 3 sides"));
    }
    VPolytope::new(
        (0..m)
            .map(|k| {
                let t = 2.0 * std::f64::consts::PI * k as f64 / m as f64;
                Vector::from_vec(vec![t.cos(), t.sin()])
            })
            .collect(),
    )
}

fn fixture(name: &str, n: Option<usize>, sides: Option<usize>) -> Result<Body> {
    let dim = |default: usize| -> Result<usize> {
        let d = n.unwrap_or(default);
        check_dim(d)?;
        Ok(d)
    };
    let fixed = |want: usize| -> Result<usize> {
        expect_dim(n, want)?;
        Ok(want)
    };
    let body: Body = match name {
        "cube" => VPolytope::new(sign_patterns(dim(3)?))?.into(),
        "square" => VPolytope::new(sign_patterns(fixed(2)?))?.into(),
        "segment" => VPolytope::new(sign_patterns(fixed(1)?))?.into(),
        "cross-polytope" => {
            let d = dim(3)?;
            VPolytope::new((0..2 * d).map(|k| unit(d, k / 2) * if k % 2 == 0 { 1.0 } else { -1.0 }).collect())?.into()
        }
        "hexagon" => {
            fixed(2)?;
            polygon(6)?.into()
        }
        "regular-polygon" => {
            fixed(2)?;
            polygon(sides.ok_or_else(|| Error::argument("regular-polygon needs `sides`"))?)?.into()
        }
        "simplex" => {
            let d = dim(3)?;
            let mut vs: Vec<Vector> = (0..d).map(|i| unit(d, i)).collect();
            vs.push(Vector::from_element(d, -1.0));
            VPolytope::new(vs)?.into()
        }
        "ball" => OracleBody::ball(dim(3)?, 1.0)?.into(),
        "two-cylinders" => QuadricBody::two_cylinders(dim(3)?)?.into(),
        // cube under an oblique shear; invariant under conjugated coordinate reflections
        "sheared-cube" => {
            let d = fixed(3)?;
            VPolytope::new(sign_patterns(d))?.transform(&shear(d))?.into()
        }
        _ => {
            return Err(Error::argument(format!(
                "unknown fixture {name:?}; known: {}",
                FIXTURE_NAMES.join(", ")
            )))
        }
    };
    if sides.is_some() && name != "regular-polygon" {
        return Err(Error::argument("`sides` only applies to regular-polygon"));
    }
    Ok(body)
}

/// Upper unitriangular shear used by the sheared fixtures.
pub fn shear(n: usize) -> LinearMap {
    let mut m = LinearMap::identity(n, n);
    for i in 0..n {
        for j in i + 1..n {
            m[(i, j)] = 0.5 / (j - i) as f64;
        }
    }
    m
}

fn matrix(rows: &[Vec<f64>]) -> Result<LinearMap> {
    let n = rows.len();
    check_dim(n)?;
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::argument("transform matrix must be square"));
    }
    Ok(LinearMap::from_fn(n, n, |i, j| rows[i][j]))
}

fn scale_body(body: Body, c: f64) -> Result<Body> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(Error::argument("scale must be positive"));
    }
    match body {
        Body::Polytope(p) => Ok(p.scaled(c).into()),
        other => {
            let n = other.dim();
            other.transform(&(LinearMap::identity(n, n) * c))
        }
    }
}

impl BodySpec {
    pub fn dim(&self) -> Result<usize> {
        Ok(self.build()?.dim())
    }

    pub fn build(&self) -> Result<Body> {
        match self {
            BodySpec::Vrep { n, vertices } => {
                let p = VPolytope::new(vertices.iter().map(|v| Vector::from_column_slice(v)).collect())?;
                expect_dim(*n, p.dim())?;
                if !p.is_full_dimensional() {
                    return Err(Error::LowerDimensional {
                        dim: crate::geometry::affine_dimension(p.vertices()),
                    });
                }
                Ok(p.into())
            }
            BodySpec::Hrep { n, halfspaces } => {
                let hs = halfspaces
                    .iter()
                    .map(|h| Halfspace::new(Vector::from_column_slice(&h.u), h.h))
                    .collect::<Result<Vec<_>>>()?;
                let h = HPolytope::new(hs)?;
                expect_dim(*n, h.dim())?;
                h.check_bounded()?;
                Ok(h.to_vpolytope()?.into())
            }
            BodySpec::Quadric { n, constraints } => {
                let found = constraints.iter().flat_map(|c| c.indices.iter().copied()).max().unwrap_or(0);
                let d = n.unwrap_or(found);
                check_dim(d)?;
                let cs = constraints
                    .iter()
                    .map(|c| {
                        if c.indices.iter().any(|&i| i == 0 || i > d) {
                            return Err(Error::argument(format!("constraint index out of 1..={d}")));
                        }
                        Ok(QuadricConstraint {
                            indices: c.indices.iter().map(|i| i - 1).collect(),
                            radius: c.rho,
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok(QuadricBody::new(d, cs)?.into())
            }
            BodySpec::Named {
                name,
                n,
                sides,
                scale,
                volume,
            } => {
                let mut body = fixture(name, *n, *sides)?;
                if let Some(c) = scale {
                    body = scale_body(body, *c)?;
                }
                if let Some(v) = volume {
                    let cur = body
                        .volume()
                        .ok_or_else(|| Error::argument(format!("fixture {name:?} has no closed-form volume")))?;
                    if !(*v > 0.0) {
                        return Err(Error::argument("volume must be positive"));
                    }
                    let d = body.dim() as f64;
                    body = scale_body(body, (v / cur).powf(1.0 / d))?;
                }
                Ok(body)
            }
            BodySpec::Transform { matrix: rows, child } => {
                let child = child.build()?;
                let m = matrix(rows)?;
                if m.nrows() != child.dim() {
                    return Err(Error::DimensionMismatch {
                        expected: child.dim(),
                        got: m.nrows(),
                    });
                }
                child.transform(&m)
            }
            BodySpec::DirectSum { children } => {
                let parts = children.iter().map(BodySpec::build).collect::<Result<Vec<_>>>()?;
                Body::direct_sum(&parts)
            }
        }
    }

    pub fn named(name: &str, n: Option<usize>) -> BodySpec {
        BodySpec::Named {
            name: name.into(),
            n,
            sides: None,
            scale: None,
            volume: None,
        }
    }

    /// The same spec dilated by `c`.
    pub fn dilated(&self, c: f64) -> BodySpec {
        match self {
            BodySpec::Named {
                name,
                n,
                sides,
                scale,
                volume: None,
            } => BodySpec::Named {
                name: name.clone(),
                n: *n,
                sides: *sides,
                scale: Some(scale.unwrap_or(1.0) * c),
                volume: None,
            },
            _ => {
                let d = self.dim().unwrap_or(0);
                BodySpec::Transform {
                    matrix: (0..d).map(|i| (0..d).map(|j| if i == j { c } else { 0.0 }).collect()).collect(),
                    child: Box::new(self.clone()),
                }
            }
        }
    }
}

/// A list of linear reflections: `coordinate`, `dihedral-M`,
/// `hyperoctahedral`, `sheared-coordinate`, or explicit
/// `[{normal: [..], flipped: [..]}, ..]` (flipped defaults to the normal).
#[derive(Debug, Clone, PartialEq)]
pub enum ReflectionSpec {
    Coordinate,
    Dihedral(usize),
    Hyperoctahedral,
    ShearedCoordinate,
    Explicit(Vec<ReflectionEntry>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReflectionEntry {
    pub normal: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub flipped: Option<Vec<f64>>,
}

impl std::fmt::Display for ReflectionSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ReflectionSpec::Coordinate => write!(f, "coordinate"),
            ReflectionSpec::Dihedral(m) => write!(f, "dihedral-{m}"),
            ReflectionSpec::Hyperoctahedral => write!(f, "hyperoctahedral"),
            ReflectionSpec::ShearedCoordinate => write!(f, "sheared-coordinate"),
            ReflectionSpec::Explicit(e) => write!(f, "{}", serde_json::to_string(e).expect("serializes")),
        }
    }
}

impl ReflectionSpec {
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        match t {
            "coordinate" => return Ok(ReflectionSpec::Coordinate),
            "hyperoctahedral" | "b" => return Ok(ReflectionSpec::Hyperoctahedral),
            "sheared-coordinate" => return Ok(ReflectionSpec::ShearedCoordinate),
            _ => {}
        }
        if let Some(m) = t.strip_prefix("dihedral-") {
            let m: usize = m.parse().map_err(|_| Error::argument(format!("bad dihedral order {m:?}")))?;
            if m < 2 {
                return Err(Error::argument("dihedral order must be at least 2"));
            }
            return Ok(ReflectionSpec::Dihedral(m));
        }
        if t.starts_with('[') {
            return Ok(ReflectionSpec::Explicit(json5::from_str(t).map_err(json5_error)?));
        }
        Err(Error::argument(format!(
            "unknown reflection list {t:?} (coordinate, dihedral-M, hyperoctahedral, sheared-coordinate or a JSON list)"
        )))
    }

    pub fn build(&self, n: usize) -> Result<Vec<LinearReflection>> {
        let coordinate = || (0..n).map(|i| LinearReflection::orthogonal(&unit(n, i))).collect::<Result<Vec<_>>>();
        match self {
            ReflectionSpec::Coordinate => coordinate(),
            ReflectionSpec::Dihedral(m) => {
                if n != 2 {
                    return Err(Error::argument("dihedral reflections live in the plane"));
                }
                // mirrors at angles 0 and π/m generate the group of order 2m
                let t = std::f64::consts::PI / *m as f64;
                Ok(vec![
                    LinearReflection::orthogonal(&Vector::from_vec(vec![0.0, 1.0]))?,
                    LinearReflection::orthogonal(&Vector::from_vec(vec![-t.sin(), t.cos()]))?,
                ])
            }
            ReflectionSpec::Hyperoctahedral => {
                let mut refs = coordinate()?;
                for i in 0..n.saturating_sub(1) {
                    refs.push(LinearReflection::orthogonal(&(unit(n, i) - unit(n, i + 1)))?);
                }
                Ok(refs)
            }
            ReflectionSpec::ShearedCoordinate => {
                let s = shear(n);
                let inv = s.clone().try_inverse().expect("unitriangular");
                (0..n)
                    .map(|i| LinearReflection::new(&(inv.transpose() * unit(n, i)), &(&s * unit(n, i))))
                    .collect()
            }
            ReflectionSpec::Explicit(entries) => entries
                .iter()
                .map(|e| {
                    let nv = Vector::from_column_slice(&e.normal);
                    if nv.len() != n {
                        return Err(Error::DimensionMismatch { expected: n, got: nv.len() });
                    }
                    match &e.flipped {
                        Some(u) => LinearReflection::new(&nv, &Vector::from_column_slice(u)),
                        None => LinearReflection::orthogonal(&nv),
                    }
                })
                .collect(),
        }
    }
}
