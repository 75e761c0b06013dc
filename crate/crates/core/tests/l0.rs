use logbm_core::geometry::{Body, OracleBody, VPolytope};
use logbm_core::l0::{
    combined_support, direction_grid, l0_combination, l0_combination_with, lambda_profile, uniform_lambdas,
    volume_bounds, GridSpec, WulffOptions,
};
use logbm_core::linalg::{stream_rng, LinearMap, Vector};
use proptest::prelude::*;
use rand::Rng;

fn square() -> Body {
    VPolytope::from_coords(&[&[1.0, 1.0], &[-1.0, 1.0], &[1.0, -1.0], &[-1.0, -1.0]]).unwrap().into()
}

fn diamond(c: f64) -> Body {
    VPolytope::from_coords(&[&[c, 0.0], &[-c, 0.0], &[0.0, c], &[0.0, -c]]).unwrap().into()
}

fn ellipse(a: f64, b: f64) -> Body {
    OracleBody::ball(2, 1.0)
        .unwrap()
        .into_body()
        .transform(&LinearMap::from_row_slice(2, 2, &[a, 0.0, 0.0, b]))
        .unwrap()
}

trait IntoBody {
    fn into_body(self) -> Body;
}
impl IntoBody for OracleBody {
    fn into_body(self) -> Body {
        Body::Oracle(self)
    }
}

/// `x` is in the Wulff shape as seen through the fine grid.
fn fine_member(k: &Body, l: &Body, lambda: f64, fine: &[Vector], x: &Vector) -> bool {
    fine.iter().all(|u| x.dot(u) <= combined_support(k, l, lambda, u).unwrap())
}

fn bracket_is_two_sided(k: &Body, l: &Body, coarse: usize, options: WulffOptions) {
    let lambda = 0.5;
    let grid = direction_grid(2, GridSpec::Circle(coarse), None).unwrap();
    let fine = direction_grid(2, GridSpec::Circle(10 * coarse), None).unwrap();
    let w = l0_combination_with(k, l, lambda, &grid, options).unwrap();
    let r = w.outer_vertices.circumradius() * 1.05;
    let mut rng = stream_rng(77, 0);
    let (mut inner, mut outside) = (0, 0);
    for _ in 0..1000 {
        let x = Vector::from_fn(2, |_, _| rng.random_range(-r..r));
        if w.contains_inner(&x) {
            inner += 1;
            assert!(fine_member(k, l, lambda, fine.directions(), &x));
        }
        if !w.contains_outer(&x) {
            outside += 1;
            assert!(!fine_member(k, l, lambda, fine.directions(), &x));
        }
    }
    assert!(inner > 100 && outside > 100);
}

#[test]
fn bracket_against_finer_grid_lipschitz() {
    bracket_is_two_sided(&square(), &ellipse(1.5, 0.8), 360, WulffOptions::default());
}

#[test]
fn bracket_against_finer_grid_polytopes() {
    bracket_is_two_sided(&square(), &diamond(1.3), 36, WulffOptions::default());
    bracket_is_two_sided(&square(), &diamond(1.3), 360, WulffOptions { fan_rays: false });
}

#[test]
fn square_diamond_bracket_matches_refined_value() {
    let coarse = direction_grid(2, GridSpec::Circle(72), None).unwrap();
    let fine = direction_grid(2, GridSpec::Circle(720), None).unwrap();
    let plain = WulffOptions { fan_rays: false };
    let (lo, hi) = volume_bounds(&l0_combination_with(&square(), &diamond(1.0), 0.5, &coarse, plain).unwrap());
    let (flo, fhi) = volume_bounds(&l0_combination_with(&square(), &diamond(1.0), 0.5, &fine, plain).unwrap());
    let (elo, ehi) = volume_bounds(&l0_combination(&square(), &diamond(1.0), 0.5, &coarse).unwrap());
    assert!(lo <= flo && fhi <= hi);
    assert!(flo <= elo && ehi <= fhi * (1.0 + 1e-12));
}

#[test]
fn refinement_is_monotone() {
    let (k, l) = (square(), ellipse(1.4, 0.7));
    let mut last = (0.0, f64::INFINITY);
    for count in [90, 180, 360, 720, 1440] {
        let grid = direction_grid(2, GridSpec::Circle(count), None).unwrap();
        let (lo, hi) = volume_bounds(&l0_combination(&k, &l, 0.4, &grid).unwrap());
        assert!(hi <= last.1 * (1.0 + 1e-14), "upper grew at {count}");
        assert!(lo >= last.0, "lower shrank at {count}: {lo} < {}", last.0);
        last = (lo, hi);
    }
}

fn sym_poly(pts: &[Vec<f64>]) -> Body {
    let mut vs: Vec<Vector> = pts.iter().map(|p| Vector::from_column_slice(p)).collect();
    vs.extend(pts.iter().map(|p| -Vector::from_column_slice(p)));
    vs.extend([Vector::from_vec(vec![0.4, 0.0]), Vector::from_vec(vec![-0.4, 0.0]), Vector::from_vec(vec![0.0, 0.4]), Vector::from_vec(vec![0.0, -0.4])]);
    VPolytope::new(vs).unwrap().canonical().unwrap().into()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linear_invariance(
        a in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 2), 3),
        b in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 2), 3),
        m in prop::collection::vec(-0.3f64..0.3, 4),
        lambda in 0.0f64..1.0,
    ) {
        let phi = LinearMap::identity(2, 2) + LinearMap::from_vec(2, 2, m);
        let (k, l) = (sym_poly(&a), sym_poly(&b));
        let (pk, pl) = (k.transform(&phi).unwrap(), l.transform(&phi).unwrap());
        // the Lipschitz route needs a fine mesh on both the grid and its image
        let grid = direction_grid(2, GridSpec::Circle(6000), None).unwrap();
        let moved = grid.transformed(&phi).unwrap();
        let det = phi.determinant().abs();
        let plain = WulffOptions { fan_rays: false };
        let w = l0_combination_with(&k, &l, lambda, &grid, plain).unwrap();
        let v = l0_combination_with(&pk, &pl, lambda, &moved, plain).unwrap();
        // halfspace-by-halfspace correspondence
        prop_assert!((volume_bounds(&v).1 - det * volume_bounds(&w).1).abs() <= 1e-9 * volume_bounds(&v).1);
        // with the normal fan both bounds carry over
        let w = l0_combination(&k, &l, lambda, &grid).unwrap();
        let v = l0_combination(&pk, &pl, lambda, &moved).unwrap();
        let (wl, wu) = volume_bounds(&w);
        let (vl, vu) = volume_bounds(&v);
        prop_assert!((vu - det * wu).abs() <= 1e-9 * vu);
        prop_assert!((vl - det * wl).abs() <= 1e-9 * vu);
    }

    #[test]
    fn profile_is_log_concave(
        a in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 2), 3),
        b in prop::collection::vec(prop::collection::vec(-2.0f64..2.0, 2), 3),
    ) {
        let grid = direction_grid(2, GridSpec::Circle(72), None).unwrap();
        let p = lambda_profile(&sym_poly(&a), &sym_poly(&b), &uniform_lambdas(11), &grid).unwrap();
        prop_assert!(p.log_concave());
    }
}

#[test]
fn direct_sum_of_dilates_is_an_equality_case() {
    let seg = || -> Body { VPolytope::from_coords(&[&[1.0], &[-1.0]]).unwrap().into() };
    let k = Body::direct_sum(&[square(), seg()]).unwrap();
    let l = Body::direct_sum(&[
        square().transform(&LinearMap::identity(2, 2).scale(2.0)).unwrap(),
        seg().transform(&LinearMap::identity(1, 1).scale(3.0)).unwrap(),
    ])
    .unwrap();
    let grid = direction_grid(3, GridSpec::Icosahedral(3), None).unwrap();
    let (vk, vl) = (k.volume().unwrap(), l.volume().unwrap());
    for lambda in [0.25, 0.5, 0.75] {
        let (lo, hi) = volume_bounds(&l0_combination(&k, &l, lambda, &grid).unwrap());
        let want = (1.0 - lambda) * vk.ln() + lambda * vl.ln();
        let eps = (hi / lo).ln() + 1e-12;
        assert!((lo.ln() - want).abs() <= eps && (hi.ln() - want).abs() <= eps);
    }
}
