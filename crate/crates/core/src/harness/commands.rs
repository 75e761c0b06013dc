//! Verification commands. Each returns an ordered [`Report`].

use serde::{Deserialize, Serialize};

use super::detect::{detect_direct_sum, Partition};
use super::report::{digest, Quantity, Relation, Report, Row};
use super::spec::{emit_body_spec, BodySpec, ReflectionSpec};
use crate::error::{Error, Result};
use crate::geometry::{minkowski_sum, Body, ConvexBody, HPolytope, VPolytope};
use crate::l0::{
    direction_grid, is_unconditional, l0_combination_with, minkowski_combination, volume_bounds, DirectionGrid, GridSpec, WulffApprox,
    WulffOptions, ROUNDING_FLOOR,
};
use crate::linalg::{LinearMap, Vector};
use crate::measures::{cone_volume_measure, gaussian_measures, log_minkowski_sides, McEstimate, SamplerSpec};
use crate::symmetry::{generate_group, is_invariant, symmetrize, LinearReflection, ReflectionGroup, GROUP_CAP, INVARIANCE_TOL};

pub const DEFAULT_LAMBDAS: [f64; 3] = [0.25, 0.5, 0.75];
/// Relative slack for quantities computed in closed form.
pub const EXACT_RTOL: f64 = 1e-10;
/// Atom matching tolerance for the uniqueness comparison.
pub const ATOM_TOL: f64 = 1e-8;
/// Tolerance of the symmetrization bookkeeping identities.
pub const BOOKKEEPING_TOL: f64 = 1e-8;
/// Log volume width of the inner/outer brackets the Gaussian suite refines toward.
pub const GAUSS_LOG_WIDTH: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq)]
pub struct Options {
    pub lambdas: Vec<f64>,
    pub grid: GridSpec,
    pub seed: u64,
    pub mc_samples: usize,
    /// Coordinate reflections when absent.
    pub reflections: Option<ReflectionSpec>,
    pub fan_rays: bool,
    /// Extra refinements allowed when a certified margin is not yet positive.
    pub max_refinements: usize,
}

impl Default for Options {
    fn default() -> Self {
        Options {
            lambdas: DEFAULT_LAMBDAS.to_vec(),
            grid: GridSpec::Auto,
            seed: crate::measures::DEFAULT_SEED,
            mc_samples: crate::measures::DEFAULT_SAMPLES,
            reflections: None,
            fan_rays: true,
            max_refinements: 2,
        }
    }
}

impl Options {
    fn fingerprint(&self) -> String {
        format!(
            "lambdas={:?};grid={};seed={};mc={};reflections={};fan={};refine={}",
            self.lambdas,
            self.grid,
            self.seed,
            self.mc_samples,
            self.reflections.as_ref().map(|r| r.to_string()).unwrap_or_else(|| "coordinate".into()),
            self.fan_rays,
            self.max_refinements
        )
    }

    fn reflection_spec(&self) -> ReflectionSpec {
        self.reflections.clone().unwrap_or(ReflectionSpec::Coordinate)
    }

    fn check_lambdas(&self) -> Result<()> {
        if self.lambdas.is_empty() || self.lambdas.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(Error::argument("lambda values must lie in [0, 1]"));
        }
        Ok(())
    }
}

/// Exit status for a command that failed before producing a report.
pub fn exit_code_for(err: &Error) -> i32 {
    match err {
        Error::Stage { source, .. } => exit_code_for(source),
        Error::GridTooCoarse { .. } => 2,
        Error::Tolerance { .. } | Error::Convergence(_) => 1,
        _ => 3,
    }
}

fn new_report(command: &str, specs: &[&BodySpec], opts: &Options, grid: String) -> Report {
    let texts: Vec<String> = specs.iter().map(|s| emit_body_spec(s)).collect();
    let fp = opts.fingerprint();
    let mut parts: Vec<&str> = vec![command, &fp];
    parts.extend(texts.iter().map(String::as_str));
    Report::new(command, digest(&parts), opts.seed, grid)
}

fn lambda_tag(check: &str, lambda: f64) -> String {
    format!("{check}[lambda={lambda}]")
}

fn exact_volume(name: &str, b: &Body) -> Result<f64> {
    b.volume()
        .ok_or_else(|| Error::Precondition(format!("volume of {name} is not available in closed form")))
}

fn require_polytope<'a>(name: &str, b: &'a Body) -> Result<&'a VPolytope> {
    b.as_polytope()
        .ok_or_else(|| Error::Precondition(format!("{name} must be a polytope")))
}

/// Checks that every body is invariant under the reflections and that the
/// reflections fix only the origin; returns the generated group.
fn check_symmetry(bodies: &[(&str, &Body)], refs: &[LinearReflection]) -> Result<ReflectionGroup> {
    for (name, b) in bodies {
        for (i, r) in refs.iter().enumerate() {
            if !is_invariant(b, r.map(), INVARIANCE_TOL) {
                return Err(Error::Precondition(format!("{name} is not invariant under reflection {}", i + 1)));
            }
        }
    }
    let group = generate_group(refs, GROUP_CAP)?;
    if !group.fix_space().is_trivial() {
        return Err(Error::Precondition("the reflections fix a nonzero subspace".into()));
    }
    Ok(group)
}

/// Grids of increasing resolution for one dimension, built on demand.
struct GridLadder {
    n: usize,
    base: GridSpec,
    group: Option<ReflectionGroup>,
    built: Vec<DirectionGrid>,
}

impl GridLadder {
    fn new(n: usize, spec: GridSpec, group: Option<ReflectionGroup>) -> Result<Self> {
        Ok(GridLadder {
            n,
            base: spec.resolve(n)?,
            group,
            built: Vec::new(),
        })
    }

    fn level(&mut self, k: usize) -> Result<&DirectionGrid> {
        while self.built.len() <= k {
            let mut spec = self.base;
            for _ in 0..self.built.len() {
                spec = spec.refine();
            }
            self.built.push(direction_grid(self.n, spec, self.group.as_ref())?);
        }
        Ok(&self.built[k])
    }
}

struct Bracket {
    approx: WulffApprox,
    lower: f64,
    upper: f64,
    grid: GridSpec,
}

impl Bracket {
    fn log_lower(&self) -> Quantity {
        if self.approx.inner_factor == 1.0 {
            Quantity::exact(self.lower.ln())
        } else {
            Quantity::lower(self.lower.ln())
        }
    }

    fn log_width(&self) -> f64 {
        (self.upper / self.lower).ln()
    }
}

/// Volume bracket of `Q_λ`, refining the grid while `good` rejects it.
fn bracket(
    k: &Body,
    l: &Body,
    lambda: f64,
    ladder: &mut GridLadder,
    opts: &Options,
    good: impl Fn(f64, f64) -> bool,
) -> Result<Bracket> {
    let wo = WulffOptions { fan_rays: opts.fan_rays };
    bracket_with(ladder, opts, good, |grid| l0_combination_with(k, l, lambda, grid, wo))
}

fn bracket_with(
    ladder: &mut GridLadder,
    opts: &Options,
    good: impl Fn(f64, f64) -> bool,
    combine: impl Fn(&DirectionGrid) -> Result<WulffApprox>,
) -> Result<Bracket> {
    let mut last_err = None;
    let mut best = None;
    for level in 0..=opts.max_refinements {
        let grid = ladder.level(level)?;
        match combine(grid) {
            Ok(approx) => {
                let (lower, upper) = volume_bounds(&approx);
                let done = good(lower, upper);
                best = Some(Bracket {
                    approx,
                    lower,
                    upper,
                    grid: grid.spec(),
                });
                if done {
                    break;
                }
            }
            Err(e @ Error::GridTooCoarse { .. }) => last_err = Some(e),
            Err(e) => return Err(e),
        }
    }
    best.ok_or_else(|| last_err.expect("at least one level ran"))
}

fn log_bm_rhs(vk: f64, vl: f64, lambda: f64) -> f64 {
    (1.0 - lambda) * vk.ln() + lambda * vl.ln()
}

fn rounding(x: f64) -> f64 {
    ROUNDING_FLOOR * x.abs().max(1.0)
}

/// `log V(Q_λ) >= (1-λ) log V(K) + λ log V(L)` with the certified lower
/// bound on the left.
pub fn verify_logbm(k_spec: &BodySpec, l_spec: &BodySpec, opts: &Options) -> Result<Report> {
    opts.check_lambdas()?;
    let (k, l) = (k_spec.build()?, l_spec.build()?);
    let n = k.dim();
    if l.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: l.dim() });
    }
    let refs = opts.reflection_spec().build(n)?;
    let group = check_symmetry(&[("K", &k), ("L", &l)], &refs)?;
    let (vk, vl) = (exact_volume("K", &k)?, exact_volume("L", &l)?);
    let mut ladder = GridLadder::new(n, opts.grid, Some(group))?;
    let mut rep = new_report("verify-logbm", &[k_spec, l_spec], opts, ladder.base.to_string());
    for &lambda in &opts.lambdas {
        let rhs = log_bm_rhs(vk, vl, lambda);
        let b = bracket(&k, &l, lambda, &mut ladder, opts, |lo, _| lo.ln() >= rhs)?;
        rep.push(Row::new(
            lambda_tag("logbm", lambda),
            b.log_lower(),
            Quantity::exact(rhs),
            Relation::AtLeast,
            b.log_width() + rounding(rhs),
        ));
        rep.push(Row::new(lambda_tag("log-upper", lambda), Quantity::upper(b.upper.ln()), Quantity::exact(0.0), Relation::Info, 0.0));
        rep.push(Row::info(lambda_tag("inner-factor", lambda), b.approx.inner_factor));
        rep.note(lambda_tag("grid", lambda), format!("{} ({:?})", b.grid, b.approx.certification));
    }
    Ok(rep)
}

/// `∫ log(h_L/h_K) dV_K >= V(K)/n log(V(L)/V(K))`, both orders when both
/// bodies are polytopes.
pub fn verify_logm(k_spec: &BodySpec, l_spec: &BodySpec, opts: &Options) -> Result<Report> {
    let (k, l) = (k_spec.build()?, l_spec.build()?);
    let n = k.dim();
    if l.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: l.dim() });
    }
    let refs = opts.reflection_spec().build(n)?;
    check_symmetry(&[("K", &k), ("L", &l)], &refs)?;
    let mut rep = new_report("verify-logm", &[k_spec, l_spec], opts, "none".into());
    let mut run = |name: &str, a: &Body, b: &Body| -> Result<()> {
        let pa = require_polytope(name, a)?;
        let vb = exact_volume("second body", b)?;
        let sides = log_minkowski_sides(pa, b, Some(vb))?;
        let scale = sides.lhs.abs().max(sides.rhs.abs()).max(pa.volume().value);
        rep.push(Row::new(
            format!("logm({name})"),
            Quantity::exact(sides.lhs),
            Quantity::exact(sides.rhs),
            Relation::AtLeast,
            EXACT_RTOL * scale,
        ));
        Ok(())
    };
    run("K,L", &k, &l)?;
    if l.as_polytope().is_some() {
        run("L,K", &l, &k)?;
    } else {
        rep.note("logm(L,K)", "skipped: L is not a polytope");
    }
    Ok(rep)
}

/// Input of the equality suite: either a dilation family built from
/// components, or an explicit pair expected to be strict.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum EqualityBuilder {
    Dilates { components: Vec<BodySpec>, factors: Vec<f64> },
    Pair { k: BodySpec, l: BodySpec },
}

impl EqualityBuilder {
    pub fn parse(text: &str) -> Result<Self> {
        json5::from_str(text).map_err(|e| {
            let (line, column) = e.position().map(|p| (p.line + 1, p.column + 1)).unwrap_or((0, 0));
            Error::Parse {
                line,
                column,
                message: e.to_string(),
            }
        })
    }

    /// `(K, L)` specs.
    pub fn bodies(&self) -> Result<(BodySpec, BodySpec)> {
        match self {
            EqualityBuilder::Dilates { components, factors } => {
                if components.is_empty() || components.len() != factors.len() {
                    return Err(Error::argument("need one dilation factor per component"));
                }
                if factors.iter().any(|c| !(*c > 0.0)) {
                    return Err(Error::argument("dilation factors must be positive"));
                }
                let dilated: Vec<BodySpec> = components.iter().zip(factors).map(|(s, c)| s.dilated(*c)).collect();
                if components.len() == 1 {
                    Ok((components[0].clone(), dilated[0].clone()))
                } else {
                    Ok((
                        BodySpec::DirectSum {
                            children: components.clone(),
                        },
                        BodySpec::DirectSum { children: dilated },
                    ))
                }
            }
            EqualityBuilder::Pair { k, l } => Ok((k.clone(), l.clone())),
        }
    }
}

fn expected_blocks(components: &[BodySpec], seed: u64) -> Result<Vec<Vec<usize>>> {
    let mut out = Vec::new();
    let mut offset = 0;
    for c in components {
        let b = c.build()?;
        for block in detect_direct_sum(&b, seed)?.blocks {
            out.push(block.iter().map(|i| i + offset).collect());
        }
        offset += b.dim();
    }
    Ok(out)
}

fn partition_row(name: &str, found: &Partition, want: &[Vec<usize>]) -> Row {
    let ok = found.blocks == want;
    Row::new(
        format!("blocks({name})"),
        Quantity::exact(if ok { 1.0 } else { 0.0 }),
        Quantity::exact(1.0),
        Relation::Equal,
        0.0,
    )
}

/// Equality `|margin| <= ε_grid` for direct sums of dilates, or strict
/// positivity for an explicit pair.
pub fn equality_suite(builder: &EqualityBuilder, opts: &Options) -> Result<Report> {
    opts.check_lambdas()?;
    let (k_spec, l_spec) = builder.bodies()?;
    let (k, l) = (k_spec.build()?, l_spec.build()?);
    let n = k.dim();
    if l.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: l.dim() });
    }
    let refs = opts.reflection_spec().build(n)?;
    let group = check_symmetry(&[("K", &k), ("L", &l)], &refs)?;
    let (vk, vl) = (exact_volume("K", &k)?, exact_volume("L", &l)?);
    let mut ladder = GridLadder::new(n, opts.grid, Some(group))?;
    let mut rep = new_report("equality-suite", &[&k_spec, &l_spec], opts, ladder.base.to_string());
    let strict = matches!(builder, EqualityBuilder::Pair { .. });
    for &lambda in &opts.lambdas {
        let rhs = log_bm_rhs(vk, vl, lambda);
        let b = if strict {
            bracket(&k, &l, lambda, &mut ladder, opts, |lo, up| lo.ln() - rhs > rounding(rhs) || up.ln() - rhs <= rounding(rhs))?
        } else {
            bracket(&k, &l, lambda, &mut ladder, opts, |_, _| true)?
        };
        let tol = b.log_width() + rounding(rhs);
        if strict {
            let slack = rounding(rhs);
            // an upper bound at the geometric mean refutes strictness
            let lhs = if b.log_lower().value - rhs <= slack && b.upper.ln() - rhs <= slack {
                Quantity::upper(b.upper.ln())
            } else {
                b.log_lower()
            };
            rep.push(Row::new(lambda_tag("strict", lambda), lhs, Quantity::exact(rhs), Relation::Exceeds, slack));
        } else {
            rep.push(Row::new(lambda_tag("equality", lambda), b.log_lower(), Quantity::exact(rhs), Relation::Equal, tol));
        }
        rep.push(Row::new(lambda_tag("log-upper", lambda), Quantity::upper(b.upper.ln()), Quantity::exact(0.0), Relation::Info, 0.0));
    }
    let pk = detect_direct_sum(&k, opts.seed)?;
    let pl = detect_direct_sum(&l, opts.seed)?;
    match builder {
        EqualityBuilder::Dilates { components, .. } => {
            let want = expected_blocks(components, opts.seed)?;
            rep.push(partition_row("K", &pk, &want));
            rep.push(partition_row("L", &pl, &want));
        }
        EqualityBuilder::Pair { .. } => {}
    }
    rep.note("partition(K)", pk.describe());
    rep.note("partition(L)", pl.describe());
    Ok(rep)
}

/// Coordinate blocks of a polytope or quadric body.
pub fn detect_sum(spec: &BodySpec, opts: &Options) -> Result<Report> {
    let body = spec.build()?;
    let p = detect_direct_sum(&body, opts.seed)?;
    let mut rep = new_report("detect-sum", &[spec], opts, "none".into());
    rep.push(Row::info("blocks", p.blocks.len() as f64));
    rep.push(Row::info("normals", p.normals_used as f64));
    if let Some(c) = p.cross_product {
        rep.push(Row::new(
            "cross-block-normal-product",
            Quantity::exact(c),
            Quantity::exact(super::detect::SUPPORT_TOL),
            Relation::AtMost,
            0.0,
        ));
    }
    if let Body::Polytope(_) = body {
        if !is_unconditional(&body) {
            rep.note("warning", "body is not unconditional; blocks describe facet normals only");
        }
    }
    rep.note("partition", p.describe());
    Ok(rep)
}

fn matrix_text(m: &LinearMap) -> String {
    let rows: Vec<Vec<f64>> = (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect();
    serde_json::to_string(&rows).expect("serializes")
}

fn points_text(ps: &[Vector]) -> String {
    let rows: Vec<Vec<f64>> = ps.iter().map(|p| p.iter().copied().collect()).collect();
    serde_json::to_string(&rows).expect("serializes")
}

/// The chain orthogonalize → group → chamber → tiling → Φ →
/// unconditionalization, with its volume identities.
pub fn symmetrize_pipeline(spec: &BodySpec, opts: &Options) -> Result<Report> {
    let body = spec.build()?;
    let k = require_polytope("K", &body)?;
    let refs = opts.reflection_spec().build(k.dim())?;
    let s = symmetrize(k, &refs)?;
    let mut rep = new_report("symmetrize", &[spec], opts, "none".into());
    let order = s.group.order() as f64;
    rep.push(Row::info("group-order", order));
    rep.push(Row::new(
        "chamber-count",
        Quantity::exact(s.chamber_count() as f64),
        Quantity::exact(order),
        Relation::Equal,
        0.0,
    ));
    rep.push(Row::new(
        "tiling-identity",
        Quantity::exact(s.tiling_defect()),
        Quantity::exact(BOOKKEEPING_TOL),
        Relation::AtMost,
        0.0,
    ));
    rep.push(Row::new(
        "unconditional-identity",
        Quantity::exact(s.unconditional_defect()),
        Quantity::exact(BOOKKEEPING_TOL),
        Relation::AtMost,
        0.0,
    ));
    let unconditional: Body = s.unconditional.clone().into();
    rep.push(Row::new(
        "unconditional",
        Quantity::exact(if is_unconditional(&unconditional) { 1.0 } else { 0.0 }),
        Quantity::exact(1.0),
        Relation::Equal,
        0.0,
    ));
    if let Some(o) = &s.orthogonalized {
        rep.push(Row::new(
            "orthogonality-deviation",
            Quantity::exact(o.deviation),
            Quantity::exact(crate::symmetry::ORTHOGONALITY_TOL),
            Relation::AtMost,
            0.0,
        ));
        rep.note("orthogonalizing-map", matrix_text(&o.phi));
    }
    rep.push(Row::info("volume", s.volume));
    rep.push(Row::info("piece-volume", s.piece_volume));
    rep.push(Row::info("unconditional-volume", s.unconditional_volume));
    rep.push(Row::info("det-phi", s.phi.determinant()));
    rep.note("chamber-generators", points_text(s.chamber.generators()));
    rep.note("chamber-normals", points_text(s.chamber.normals()));
    rep.note("phi", matrix_text(&s.phi));
    rep.note("cone-piece", points_text(s.cone_piece.vertices()));
    rep.note(
        "unconditional-body",
        serde_json::to_string(&BodySpec::Vrep {
            n: None,
            vertices: s.unconditional.vertices().iter().map(|v| v.iter().copied().collect()).collect(),
        })
        .expect("serializes"),
    );
    Ok(rep)
}

/// Nonredundant outer polytope and inner factor of a bracket; the grid
/// halfspaces are mostly slack.
fn inner_outer(b: &Bracket) -> Result<(PolytopeMember, f64)> {
    Ok((PolytopeMember::new(b.approx.outer_vertices.to_hpolytope()?)?, b.approx.inner_factor))
}

/// Membership in a polytope containing the origin, for millions of queries
/// against thousands of facets. Points inside the inradius or outside the
/// circumradius are settled at once; planar polygons use a wedge search.
#[derive(Clone)]
struct PolytopeMember {
    poly: HPolytope,
    r_in: f64,
    r_out: f64,
    // planar vertices sorted by angle
    ring: Vec<(f64, [f64; 2])>,
}

impl PolytopeMember {
    fn new(poly: HPolytope) -> Result<Self> {
        let r_in = poly.halfspaces().iter().map(|h| h.offset).fold(f64::INFINITY, f64::min).max(0.0);
        let verts = poly.to_vpolytope()?;
        let r_out = verts.circumradius();
        let mut ring = Vec::new();
        if poly.dim() == 2 && r_in > 0.0 {
            ring = verts.vertices().iter().map(|v| (v[1].atan2(v[0]), [v[0], v[1]])).collect();
            ring.sort_by(|a, b| a.0.total_cmp(&b.0));
        }
        Ok(PolytopeMember { poly, r_in, r_out, ring })
    }

    fn contains(&self, x: &Vector) -> bool {
        let r = x.norm();
        // margins keep the shortcuts clear of rounding at the boundary
        if r <= self.r_in * (1.0 - 1e-12) {
            return true;
        }
        if r > self.r_out * (1.0 + 1e-12) {
            return false;
        }
        if self.ring.len() >= 3 {
            let t = x[1].atan2(x[0]);
            let i = self.ring.partition_point(|v| v.0 <= t);
            let a = self.ring[(i + self.ring.len() - 1) % self.ring.len()].1;
            let b = self.ring[i % self.ring.len()].1;
            // x is in the wedge spanned by a and b; test against edge ab
            let cross = (b[0] - a[0]) * (x[1] - a[1]) - (b[1] - a[1]) * (x[0] - a[0]);
            return cross >= 0.0;
        }
        self.poly.contains(x, 0.0)
    }
}

/// `3 σ` of `sum_i c_i X_i` bounded by `sum_i |c_i| σ_i`.
fn three_sigma(terms: &[(f64, McEstimate)]) -> f64 {
    3.0 * terms.iter().map(|(c, e)| c.abs() * e.stderr).sum::<f64>()
}

type Member = Box<dyn Fn(&Vector) -> bool + Send + Sync>;

/// Monte-Carlo Gaussian measures for the log and the classical
/// Brunn-Minkowski inequalities on common samples.
pub fn gaussian_suite(k_spec: &BodySpec, l_spec: &BodySpec, opts: &Options) -> Result<Report> {
    opts.check_lambdas()?;
    let (k, l) = (k_spec.build()?, l_spec.build()?);
    let n = k.dim();
    if l.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: l.dim() });
    }
    let refs = opts.reflection_spec().build(n)?;
    if refs.iter().any(|r| !r.is_orthogonal(1e-12)) {
        return Err(Error::Precondition("the Gaussian suite needs orthogonal reflections".into()));
    }
    let group = check_symmetry(&[("K", &k), ("L", &l)], &refs)?;
    let mut ladder = GridLadder::new(n, opts.grid, Some(group))?;
    let mut rep = new_report("gaussian-suite", &[k_spec, l_spec], opts, ladder.base.to_string());
    let both_polytopes = k.as_polytope().is_some() && l.as_polytope().is_some();

    let mut members: Vec<Member> = Vec::new();
    {
        let (k2, l2) = (k.clone(), l.clone());
        members.push(Box::new(move |x| k2.contains(x)));
        members.push(Box::new(move |x| l2.contains(x)));
    }
    let fine = |lo: f64, up: f64| (up / lo).ln() <= GAUSS_LOG_WIDTH;
    for &lambda in &opts.lambdas {
        let b = bracket(&k, &l, lambda, &mut ladder, opts, fine)?;
        let (outer, s) = inner_outer(&b)?;
        let o2 = outer.clone();
        members.push(Box::new(move |x| outer.contains(x)));
        members.push(Box::new(move |x| o2.contains(&(x / s))));
        rep.note(lambda_tag("grid", lambda), format!("{} ({:?})", b.grid, b.approx.certification));
        if lambda <= 0.0 || lambda >= 1.0 {
            let end = if lambda <= 0.0 { k.clone() } else { l.clone() };
            members.push(Box::new(move |x| end.contains(x)));
        } else if both_polytopes {
            let pk = k.as_polytope().expect("checked");
            let pl = l.as_polytope().expect("checked");
            let m = minkowski_sum(&pk.scaled(1.0 - lambda), &pl.scaled(lambda))?;
            members.push(Box::new(move |x| m.contains(x, 0.0)));
        } else {
            // certified inner body of the Minkowski combination
            let mb = bracket_with(&mut ladder, opts, fine, |g| minkowski_combination(&k, &l, lambda, g))?;
            let (outer, s) = inner_outer(&mb)?;
            members.push(Box::new(move |x| outer.contains(&(x / s))));
            rep.note(lambda_tag("minkowski-grid", lambda), mb.grid.to_string());
        }
    }
    let est = gaussian_measures(
        n,
        &members,
        SamplerSpec {
            samples: opts.mc_samples,
            seed: opts.seed,
        },
    )?;
    let (gk, gl) = (est[0], est[1]);
    rep.push(Row::new("gamma(K)", Quantity::estimate(gk.estimate), Quantity::exact(0.0), Relation::Info, 3.0 * gk.stderr));
    rep.push(Row::new("gamma(L)", Quantity::estimate(gl.estimate), Quantity::exact(0.0), Relation::Info, 3.0 * gl.stderr));
    let nf = n as f64;
    for (i, &lambda) in opts.lambdas.iter().enumerate() {
        let (g_outer, g_inner, g_mink) = (est[2 + 3 * i], est[3 + 3 * i], est[4 + 3 * i]);
        let rhs = gk.estimate.powf(1.0 - lambda) * gl.estimate.powf(lambda);
        // d rhs = rhs ((1-λ) dγ_K/γ_K + λ dγ_L/γ_L)
        let rhs_terms = [
            (rhs * (1.0 - lambda) / gk.estimate, gk),
            (rhs * lambda / gl.estimate, gl),
        ];
        for (tag, g, q) in [
            ("gauss-l0-inner", g_inner, Quantity::lower_estimate as fn(f64) -> Quantity),
            ("gauss-l0-outer", g_outer, Quantity::upper_estimate),
        ] {
            let mut terms = vec![(1.0, g)];
            terms.extend(rhs_terms);
            rep.push(Row::new(
                lambda_tag(tag, lambda),
                q(g.estimate),
                Quantity::estimate(rhs),
                Relation::AtLeast,
                three_sigma(&terms),
            ));
        }
        let root = |g: McEstimate| g.estimate.powf(1.0 / nf);
        let droot = |g: McEstimate| g.estimate.powf(1.0 / nf - 1.0) / nf;
        let lhs = root(g_mink);
        let rhs_bm = (1.0 - lambda) * root(gk) + lambda * root(gl);
        let terms = [
            (droot(g_mink), g_mink),
            ((1.0 - lambda) * droot(gk), gk),
            (lambda * droot(gl), gl),
        ];
        let mink = if both_polytopes || lambda <= 0.0 || lambda >= 1.0 {
            Quantity::estimate(lhs)
        } else {
            Quantity::lower_estimate(lhs)
        };
        rep.push(Row::new(
            lambda_tag("gauss-bm", lambda),
            mink,
            Quantity::estimate(rhs_bm),
            Relation::AtLeast,
            three_sigma(&terms),
        ));
    }
    Ok(rep)
}

/// Compares cone-volume measures; equal measures must come with a flat
/// profile at `λ = 1/2`.
pub fn uniqueness(k_spec: &BodySpec, l_spec: &BodySpec, opts: &Options) -> Result<Report> {
    let (k, l) = (k_spec.build()?, l_spec.build()?);
    let n = k.dim();
    if l.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, got: l.dim() });
    }
    let (pk, pl) = (require_polytope("K", &k)?, require_polytope("L", &l)?);
    let refs = opts.reflection_spec().build(n)?;
    let group = check_symmetry(&[("K", &k), ("L", &l)], &refs)?;
    let cmp = cone_volume_measure(pk)?.compare(&cone_volume_measure(pl)?, ATOM_TOL);
    let mut ladder = GridLadder::new(n, opts.grid, Some(group))?;
    let mut rep = new_report("uniqueness", &[k_spec, l_spec], opts, ladder.base.to_string());
    rep.push(Row::info("max-atom-discrepancy", cmp.max_discrepancy));
    rep.push(Row::info("measures-equal", if cmp.equal { 1.0 } else { 0.0 }));
    if cmp.equal {
        let (vk, vl) = (pk.volume().value, pl.volume().value);
        let rhs = log_bm_rhs(vk, vl, 0.5);
        let b = bracket(&k, &l, 0.5, &mut ladder, opts, |_, _| true)?;
        rep.push(Row::new(
            "flat-profile[lambda=0.5]",
            b.log_lower(),
            Quantity::exact(rhs),
            Relation::Equal,
            b.log_width() + rounding(rhs),
        ));
        rep.note("cone-volume-measures", "equal");
    } else {
        let listed: Vec<String> = cmp
            .discrepant
            .iter()
            .take(8)
            .map(|(u, a, b)| format!("{}: {} vs {}", points_text(&[u.map(|x| x + 0.0)]), fmt_short(*a), fmt_short(*b)))
            .collect();
        rep.note("cone-volume-measures", "differ");
        rep.note("discrepant-atoms", format!("{} total; {}", cmp.discrepant.len(), listed.join("; ")));
    }
    Ok(rep)
}

fn fmt_short(x: f64) -> String {
    format!("{x:.6e}")
}
