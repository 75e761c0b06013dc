use logbm_core::geometry::{hrep_from_vrep, loewner_ellipsoid, minkowski_sum, ConvexBody, OracleBody, QuadricBody, VPolytope};
use logbm_core::linalg::{sphere_sample, LinearMap, Vector};
use proptest::prelude::*;

fn sym_polytope(points: &[Vec<f64>]) -> VPolytope {
    let mut vs: Vec<Vector> = points.iter().map(|p| Vector::from_column_slice(p)).collect();
    vs.extend(points.iter().map(|p| -Vector::from_column_slice(p)));
    // keep the origin well inside
    let n = points[0].len();
    for i in 0..n {
        let mut e = Vector::zeros(n);
        e[i] = 0.3;
        vs.push(e.clone());
        vs.push(-e);
    }
    VPolytope::new(vs).unwrap().canonical().unwrap()
}

fn coords(n: usize, k: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(prop::collection::vec(-2.0f64..2.0, n), k)
}

fn near_identity(n: usize) -> impl Strategy<Value = LinearMap> {
    prop::collection::vec(-0.4f64..0.4, n * n)
        .prop_map(move |v| LinearMap::identity(n, n) + LinearMap::from_vec(n, n, v))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn volume_scales_by_determinant(pts in coords(3, 6), phi in near_identity(3)) {
        let p = sym_polytope(&pts);
        let q = p.transform(&phi).unwrap();
        let want = p.volume().value * phi.determinant().abs();
        prop_assert!((q.volume().value - want).abs() <= 1e-9 * want);
    }

    #[test]
    fn symmetric_bodies_have_even_support(pts in coords(2, 5)) {
        let p = sym_polytope(&pts);
        for u in sphere_sample(2, 50, 1) {
            let (a, b) = (p.support(&u).unwrap(), p.support(&-&u).unwrap());
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0));
        }
    }

    #[test]
    fn facet_round_trip(pts in coords(3, 7)) {
        let p = sym_polytope(&pts);
        let back = hrep_from_vrep(&p).unwrap().to_vpolytope().unwrap().canonical().unwrap();
        prop_assert_eq!(back.vertices().len(), p.vertices().len());
        for (a, b) in back.vertices().iter().zip(p.vertices()) {
            prop_assert!((a - b).amax() <= 1e-8);
        }
    }

    #[test]
    fn minkowski_support_adds(a in coords(3, 4), b in coords(3, 4)) {
        let (p, q) = (sym_polytope(&a), sym_polytope(&b));
        let s = minkowski_sum(&p, &q).unwrap();
        for u in sphere_sample(3, 40, 2) {
            let want = p.support(&u).unwrap() + q.support(&u).unwrap();
            prop_assert!((s.support(&u).unwrap() - want).abs() <= 1e-9 * want);
        }
    }

    #[test]
    fn loewner_contains_and_is_tight(pts in coords(3, 5)) {
        let p = sym_polytope(&pts);
        let e = loewner_ellipsoid(&p).unwrap();
        prop_assert!(p.vertices().iter().all(|v| e.contains(v, 1e-9)));
        prop_assert!(e.optimality_probe(p.vertices(), 1.0 + 1e-5));
        prop_assert!(e.volume() >= p.volume().value);
    }
}

#[test]
fn loewner_of_cross_polytope_is_the_unit_ball() {
    for n in 2..=4 {
        let mut vs = Vec::new();
        for i in 0..n {
            let mut e = Vector::zeros(n);
            e[i] = 1.0;
            vs.push(e.clone());
            vs.push(-e);
        }
        let e = loewner_ellipsoid(&VPolytope::new(vs).unwrap()).unwrap();
        assert!((e.shape() - LinearMap::identity(n, n)).amax() < 1e-6);
    }
}

#[test]
fn two_cylinder_support_matches_dense_boundary_sampling() {
    let q = QuadricBody::two_cylinders(3).unwrap();
    // boundary points: x2 = cos t, x1 = ± sin t, x3 = ± sin t
    let boundary: Vec<Vector> = (0..4000)
        .flat_map(|k| {
            let t = 2.0 * std::f64::consts::PI * k as f64 / 4000.0;
            let (s, c) = (t.sin(), t.cos());
            [1.0, -1.0].into_iter().map(move |sign| Vector::from_vec(vec![s, c, sign * s]))
        })
        .collect();
    for u in sphere_sample(3, 30, 5) {
        let dense = boundary.iter().map(|x| x.dot(&u)).fold(f64::NEG_INFINITY, f64::max);
        let h = q.support(&u).unwrap();
        assert!(h >= dense - 1e-12 && h <= dense + 1e-5, "{h} vs {dense}");
    }
}

#[test]
fn ball_oracle_validates() {
    let b = OracleBody::ball(3, 1.5).unwrap();
    b.validate(200, 3).unwrap();
    assert!((b.support(&Vector::from_vec(vec![0.0, 0.6, 0.8])).unwrap() - 1.5).abs() < 1e-15);
}
