//! End-to-end acceptance checks. Each criterion prints one PASS/FAIL line;
//! the test fails if any criterion does.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use logbm_core::geometry::{loewner_ellipsoid, Body, ConvexBody, QuadricBody, VPolytope};
use logbm_core::harness::{
    detect_direct_sum, detect_sum, equality_suite, gaussian_suite, symmetrize_pipeline, uniqueness, verify_logbm,
    BodySpec, BoundKind, EqualityBuilder, Format, Options, ReflectionSpec, Report, Status,
};
use logbm_core::l0::{
    alexandrov_derivative, coordinatewise_product_inner, direction_grid, l0_combination, lambda_profile,
    uniform_lambdas, volume_bounds, GridSpec, DEFAULT_T_STEPS, PRODUCT_BUDGET,
};
use logbm_core::linalg::{stream_rng, unit, LinearMap, Vector};
use logbm_core::measures::{cone_volume_measure, gaussian_measure, log_minkowski_gap, SamplerSpec};
use logbm_core::symmetry::{chamber_cone, generate_group, symmetrize, tiling_reps, LinearReflection, GROUP_CAP};
use rand::Rng;

const LAMBDAS: [f64; 3] = [0.25, 0.5, 0.75];

fn named(name: &str, n: usize) -> BodySpec {
    BodySpec::named(name, Some(n))
}

fn build(spec: &BodySpec) -> Body {
    spec.build().unwrap()
}

fn polytope(spec: &BodySpec) -> VPolytope {
    build(spec).as_polytope().expect("polytope fixture").clone()
}

fn polygon(sides: usize) -> BodySpec {
    BodySpec::Named {
        name: "regular-polygon".into(),
        n: None,
        sides: Some(sides),
        scale: None,
        volume: None,
    }
}

fn fine_grid(n: usize) -> GridSpec {
    if n == 2 {
        GridSpec::Circle(720)
    } else {
        GridSpec::Icosahedral(5)
    }
}

fn polytope_fixtures() -> Vec<(String, VPolytope)> {
    let mut out = Vec::new();
    for (name, n) in [
        ("cube", 2),
        ("cube", 3),
        ("cube", 4),
        ("square", 2),
        ("segment", 1),
        ("cross-polytope", 2),
        ("cross-polytope", 3),
        ("cross-polytope", 4),
        ("hexagon", 2),
        ("simplex", 2),
        ("simplex", 3),
        ("sheared-cube", 3),
    ] {
        out.push((format!("{name}-{n}"), polytope(&named(name, n))));
    }
    for s in [5, 7, 12] {
        out.push((format!("polygon-{s}"), polytope(&polygon(s))));
    }
    out
}

/// Origin-symmetric hull of a few random points, with a small cross to keep
/// it full-dimensional.
fn random_symmetric(n: usize, seed: u64) -> VPolytope {
    let mut rng = stream_rng(seed, 0);
    let m = rng.random_range(3..7);
    let mut vs = Vec::new();
    for _ in 0..m {
        let p = Vector::from_fn(n, |_, _| rng.random_range(-1.5..1.5));
        vs.push(-&p);
        vs.push(p);
    }
    for i in 0..n {
        vs.push(unit(n, i) * 0.3);
        vs.push(unit(n, i) * -0.3);
    }
    VPolytope::new(vs).unwrap().canonical().unwrap()
}

fn passes(r: &Report) {
    assert_eq!(r.status(), Status::Pass, "{}", r.to_text());
}

// 1
fn dilate_equality() -> String {
    let mut worst_eps: f64 = 0.0;
    let mut slowest = Duration::ZERO;
    for i in 0..10 {
        let n = 2 + i % 2;
        let k = random_symmetric(n, 1000 + i as u64);
        let grid = direction_grid(n, fine_grid(n), None).unwrap();
        let vk = k.volume().value;
        let kb = Body::Polytope(k.clone());
        for c in [0.5, 2.0, 3.0] {
            let start = Instant::now();
            let lb = Body::Polytope(k.scaled(c));
            for lambda in LAMBDAS {
                let (lo, hi) = volume_bounds(&l0_combination(&kb, &lb, lambda, &grid).unwrap());
                let rhs = (1.0 - lambda) * vk.ln() + lambda * (vk * c.powi(n as i32)).ln();
                let eps = (hi / lo).ln() + 1e-12 * rhs.abs().max(1.0);
                assert!(eps <= 5e-3, "pair {i}: eps {eps}");
                assert!((lo.ln() - rhs).abs() <= eps, "pair {i} c={c} λ={lambda}: {} vs {rhs}", lo.ln());
                worst_eps = worst_eps.max(eps);
            }
            slowest = slowest.max(start.elapsed());
            assert!(start.elapsed() <= Duration::from_secs(30));
        }
    }
    format!("10 pairs x 3 dilates, max eps {worst_eps:.1e}, slowest pair {:.2}s", slowest.as_secs_f64())
}

// 2
fn direct_sum_equality() -> String {
    let opts = Options {
        grid: GridSpec::Icosahedral(5),
        ..Options::default()
    };
    let mut worst: f64 = 0.0;
    // the square itself splits into two segments
    for (first, want) in [("square", "{1}{2}{3}"), ("hexagon", "{1,2}{3}")] {
        for factors in [[2.0, 0.5], [0.5, 3.0], [3.0, 1.0]] {
            let b = EqualityBuilder::Dilates {
                components: vec![named(first, 2), named("segment", 1)],
                factors: factors.to_vec(),
            };
            let r = equality_suite(&b, &opts).unwrap();
            passes(&r);
            for row in r.rows.iter().filter(|r| r.check.starts_with("equality")) {
                assert!(row.tolerance <= 5e-3);
                worst = worst.max(row.margin().abs());
            }
            for key in ["partition(K)", "partition(L)"] {
                let note = r.notes.iter().find(|n| n.0 == key).unwrap();
                assert_eq!(note.1, want, "{first} {factors:?}");
            }
        }
    }
    format!("6 families x 3 lambdas, max |margin| {worst:.1e}, partitions {{1}}{{2}}{{3}} and {{1,2}}{{3}}")
}

// 3
fn strict_cube_cross() -> String {
    let start = Instant::now();
    let volume_one = |name: &str| BodySpec::Named {
        name: name.into(),
        n: Some(3),
        sides: None,
        scale: None,
        volume: Some(1.0),
    };
    let opts = Options {
        lambdas: vec![0.5],
        max_refinements: 2,
        ..Options::default()
    };
    let r = verify_logbm(&volume_one("cube"), &volume_one("cross-polytope"), &opts).unwrap();
    passes(&r);
    let row = &r.rows[0];
    assert!(matches!(row.lhs.kind, BoundKind::Lower | BoundKind::Exact));
    assert!(row.margin() > 0.0);
    assert!(start.elapsed() <= Duration::from_secs(120));
    format!(
        "certified margin {:.4e} on {} in {:.2}s",
        row.margin(),
        r.notes[0].1,
        start.elapsed().as_secs_f64()
    )
}

// 4
fn sandwich() -> String {
    let rect = BodySpec::Transform {
        matrix: vec![vec![1.0, 0.0], vec![0.0, 2.0]],
        child: Box::new(named("square", 2)),
    };
    let pairs = [
        (named("cube", 3), named("cross-polytope", 3), GridSpec::Icosahedral(4)),
        (named("square", 2), named("ball", 2), GridSpec::Circle(720)),
        (rect, named("cross-polytope", 2), GridSpec::Circle(360)),
        (named("hexagon", 2), named("square", 2), GridSpec::Circle(360)),
        (named("cube", 3), named("two-cylinders", 3), GridSpec::Icosahedral(4)),
    ];
    let mut checked = 0;
    for (ks, ls, spec) in &pairs {
        let (k, l) = (build(ks), build(ls));
        let grid = direction_grid(k.dim(), *spec, None).unwrap();
        for lambda in LAMBDAS {
            let w = l0_combination(&k, &l, lambda, &grid).unwrap();
            let p = coordinatewise_product_inner(&k, &l, lambda, PRODUCT_BUDGET).unwrap();
            for v in p.vertices() {
                assert!(w.contains_outer(v), "{ks:?} / {ls:?} at λ={lambda}: {v}");
                checked += 1;
            }
        }
    }
    format!("5 pairs x 3 lambdas, {checked} product vertices inside the outer polytope")
}

fn orth(v: &[f64]) -> LinearReflection {
    LinearReflection::orthogonal(&Vector::from_column_slice(v)).unwrap()
}

// 5
fn reflection_groups() -> String {
    let mut cases: Vec<(String, Vec<LinearReflection>, usize)> =
        vec![("klein".into(), vec![orth(&[1.0, 0.0]), orth(&[0.0, 1.0])], 4)];
    for m in 3..=8 {
        let t = std::f64::consts::PI / m as f64;
        cases.push((format!("dihedral-{m}"), vec![orth(&[0.0, 1.0]), orth(&[-t.sin(), t.cos()])], 2 * m));
    }
    cases.push(("b3".into(), ReflectionSpec::Hyperoctahedral.build(3).unwrap(), 48));
    for (name, refs, order) in &cases {
        let g = generate_group(refs, GROUP_CAP).unwrap();
        assert_eq!(g.order(), *order, "{name}");
        let c = chamber_cone(&g).unwrap();
        // tiling_reps checks coverage on 10^4 sphere samples
        let reps = tiling_reps(&g, &c).unwrap();
        assert_eq!(reps.len(), *order, "{name}");
    }
    format!("{} groups: orders, chamber counts and 10^4-sample coverage", cases.len())
}

// 6
fn pipeline_bookkeeping() -> String {
    let hex = symmetrize(&polytope(&named("hexagon", 2)), &ReflectionSpec::Dihedral(6).build(2).unwrap()).unwrap();
    let b3 = symmetrize(&polytope(&named("cube", 3)), &ReflectionSpec::Hyperoctahedral.build(3).unwrap()).unwrap();
    let mut worst: f64 = 0.0;
    for s in [&hex, &b3] {
        assert_eq!(s.chamber_count(), s.group.order());
        worst = worst.max(s.tiling_defect()).max(s.unconditional_defect());
    }
    assert!(worst <= 1e-8, "{worst}");
    let sheared = symmetrize(
        &polytope(&named("sheared-cube", 3)),
        &ReflectionSpec::ShearedCoordinate.build(3).unwrap(),
    )
    .unwrap();
    let dev = sheared.orthogonalized.as_ref().expect("non-orthogonal input").deviation;
    assert!(dev <= 1e-7, "{dev}");
    assert!(sheared.tiling_defect() <= 1e-8 && sheared.unconditional_defect() <= 1e-8);
    // pipeline report agrees
    passes(&symmetrize_pipeline(&named("cube", 3), &Options {
        reflections: Some(ReflectionSpec::Hyperoctahedral),
        ..Options::default()
    })
    .unwrap());
    format!(
        "hexagon l={}, B3 l={}, max defect {worst:.1e}, sheared deviation {dev:.1e}",
        hex.chamber_count(),
        b3.chamber_count()
    )
}

// 7
fn mass_identity() -> String {
    let fixtures = polytope_fixtures();
    let mut worst_mass: f64 = 0.0;
    let mut worst_gap: f64 = 0.0;
    for (name, p) in &fixtures {
        let v = p.volume().value;
        let mass = cone_volume_measure(p).unwrap().total();
        worst_mass = worst_mass.max((mass - v).abs() / v);
        assert!((mass - v).abs() <= 1e-10 * v, "{name}: {mass} vs {v}");
        for c in [0.5, 2.0, 3.0] {
            let g = log_minkowski_gap(p, &Body::Polytope(p.scaled(c)), None).unwrap();
            worst_gap = worst_gap.max(g.abs());
            assert!(g.abs() <= 1e-10, "{name} c={c}: {g}");
        }
    }
    format!("{} fixtures, max mass error {worst_mass:.1e}, max dilate gap {worst_gap:.1e}", fixtures.len())
}

// 8
fn alexandrov() -> String {
    let mut parts = Vec::new();
    for (spec, n) in [(named("cube", 3), 3), (named("square", 2), 2), (named("hexagon", 2), 2)] {
        let k = build(&spec);
        let l = k.transform(&LinearMap::identity(n, n).scale(2.0)).unwrap();
        let grid = direction_grid(n, fine_grid(n), None).unwrap();
        let r = alexandrov_derivative(&k, &l, &DEFAULT_T_STEPS, &grid).unwrap();
        let want = n as f64 * k.volume().unwrap() * 2f64.ln();
        let rel = (r.extrapolated - want).abs() / want;
        assert!(rel <= 1e-3, "{spec:?}: {} vs {want}", r.extrapolated);
        assert_eq!(r.resolution(), "factor-free");
        assert!(!r.matches_i2);
        parts.push(format!("n={n} rel {rel:.1e}"));
    }
    format!("{}; resolution factor-free", parts.join(", "))
}

// 9
fn profiles() -> String {
    let pairs = [
        (named("cube", 3), named("cross-polytope", 3), GridSpec::Icosahedral(4)),
        (named("square", 2), named("cross-polytope", 2), GridSpec::Circle(720)),
        (named("hexagon", 2), named("square", 2), GridSpec::Circle(720)),
        (named("square", 2), named("ball", 2), GridSpec::Circle(720)),
        (named("cube", 3), named("two-cylinders", 3), GridSpec::Icosahedral(4)),
    ];
    let lambdas = uniform_lambdas(11);
    let mut widest: f64 = 0.0;
    for (ks, ls, spec) in &pairs {
        let (k, l) = (build(ks), build(ls));
        let grid = direction_grid(k.dim(), *spec, None).unwrap();
        let p = lambda_profile(&k, &l, &lambdas, &grid).unwrap();
        assert!(p.log_concave(), "{ks:?} / {ls:?}: {:?}", p.concavity);
        widest = widest.max(p.max_log_width());
    }
    format!("5 pairs x 11 lambdas log-concave, widest bracket {widest:.1e}")
}

// 10
fn gaussian() -> String {
    let opts = Options {
        mc_samples: 1_000_000,
        ..Options::default()
    };
    for (k, l) in [
        (named("cube", 3), named("cross-polytope", 3)),
        (named("square", 2), named("ball", 2)),
        (named("hexagon", 2), named("square", 2)),
    ] {
        passes(&gaussian_suite(&k, &l, &opts).unwrap());
    }
    let mut worst: f64 = 0.0;
    for a in [0.5, 1.0, 2.0] {
        let seg = build(&named("segment", 1).dilated(a));
        let e = gaussian_measure(&seg, SamplerSpec { samples: 1_000_000, seed: 9 }).unwrap();
        let want = statrs::function::erf::erf(a / 2f64.sqrt());
        let z = (e.estimate - want).abs() / e.stderr;
        assert!(z <= 3.0, "a={a}: {} vs {want}", e.estimate);
        worst = worst.max(z);
    }
    format!("3 suites at N=10^6 pass; interval vs erf within {worst:.2} stderr")
}

// 11
fn two_cylinders() -> String {
    let q = QuadricBody::two_cylinders(3).unwrap();
    let normals = q.sample_smooth_normals(1000, 17);
    assert_eq!(normals.len(), 1000);
    let worst = normals.iter().map(|(_, u)| (u[0] * u[2]).abs()).fold(0.0, f64::max);
    assert!(worst <= 1e-8, "{worst}");
    let p = detect_direct_sum(&Body::Quadric(q), 17).unwrap();
    assert_eq!(p.describe(), "irreducible");
    format!("1000 normals, max |u1 u3| {worst:.1e}; detector irreducible")
}

// 12
fn loewner() -> String {
    let mut worst: f64 = 0.0;
    for n in 2..=5 {
        let e = loewner_ellipsoid(&polytope(&named("cross-polytope", n))).unwrap();
        let d = (e.shape() - nalgebra::DMatrix::identity(n, n)).amax();
        assert!(d <= 1e-6, "n={n}: {d}");
        worst = worst.max(d);
    }
    let mut count = 0;
    for (name, p) in polytope_fixtures() {
        if !p.is_origin_symmetric(1e-12) {
            continue;
        }
        let e = loewner_ellipsoid(&p).unwrap();
        assert!(p.vertices().iter().all(|v| e.contains(v, 1e-9)), "{name}");
        assert!(e.optimality_probe(p.vertices(), 1.0 + 1e-5), "{name}");
        count += 1;
    }
    format!("cross-polytope shape error {worst:.1e}; containment and probe on {count} symmetric fixtures")
}

// 13
fn determinism() -> String {
    let opts = Options {
        mc_samples: 100_000,
        seed: 0xabc,
        ..Options::default()
    };
    let hex = Options {
        reflections: Some(ReflectionSpec::Dihedral(6)),
        ..opts.clone()
    };
    let runs: Vec<Box<dyn Fn() -> Report>> = vec![
        Box::new(|| verify_logbm(&named("cube", 3), &named("cross-polytope", 3), &opts).unwrap()),
        Box::new(|| gaussian_suite(&named("square", 2), &named("ball", 2), &opts).unwrap()),
        Box::new(|| symmetrize_pipeline(&named("hexagon", 2), &hex).unwrap()),
        Box::new(|| detect_sum(&named("two-cylinders", 3), &opts).unwrap()),
        Box::new(|| uniqueness(&named("cube", 3), &named("cross-polytope", 3), &opts).unwrap()),
    ];
    for run in &runs {
        let (a, b) = (run(), run());
        assert_eq!(a.render(Format::Csv), b.render(Format::Csv));
        assert_eq!(a.render(Format::Text), b.render(Format::Text));
    }
    format!("{} commands rerun byte-identical in csv and text", runs.len())
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> String); 13] = [
        ("dilate equality", dilate_equality),
        ("direct-sum equality", direct_sum_equality),
        ("strict cube vs cross", strict_cube_cross),
        ("sandwich inclusion", sandwich),
        ("reflection groups", reflection_groups),
        ("pipeline bookkeeping", pipeline_bookkeeping),
        ("cone-volume mass", mass_identity),
        ("alexandrov check", alexandrov),
        ("profile log-concavity", profiles),
        ("gaussian suites", gaussian),
        ("two-cylinder normals", two_cylinders),
        ("loewner ellipsoid", loewner),
        ("determinism", determinism),
    ];
    let mut failed = Vec::new();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name} ({secs:.1}s): {detail}", i + 1),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                println!("FAIL {:>2} {name} ({secs:.1}s): {msg}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
