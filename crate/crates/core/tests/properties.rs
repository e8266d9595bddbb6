use monosplit::convex::{vector, AffineMap, AffineSubspace, ConvexSet, LinearMap, Vector};
use monosplit::displacement::{affine_shifted_iterate_identity_check, v_affine_closed_form};
use monosplit::operators::MonotoneOp;
use monosplit::product_space::{average, lift, project_diagonal};
use monosplit::scenarios::{oracles, run_scenario};
use monosplit::splitting::{iterate, FixedPointMap, IterateOptions, SplitProblem};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    -20.0..20.0f64
}

fn vec_n(n: usize) -> impl Strategy<Value = Vector> {
    prop::collection::vec(coord(), n).prop_map(Vector::from_vec)
}

fn nonzero_vec(n: usize) -> impl Strategy<Value = Vector> {
    vec_n(n).prop_filter("nonzero", |v| v.norm() > 1e-3)
}

fn set3() -> impl Strategy<Value = ConvexSet> {
    prop_oneof![
        (vec_n(3), 0.1..10.0f64).prop_map(|(c, r)| ConvexSet::ball(c, r).unwrap()),
        (vec_n(3), vec_n(3)).prop_map(|(a, b)| ConvexSet::boxed(a.inf(&b), a.sup(&b)).unwrap()),
        (nonzero_vec(3), coord()).prop_map(|(n, r)| ConvexSet::halfspace(n, r).unwrap()),
        (vec_n(3), nonzero_vec(3)).prop_map(|(p, d)| ConvexSet::subspace(AffineSubspace::line(p, d).unwrap())),
        nonzero_vec(3).prop_map(|d| ConvexSet::Ray { direction: d }),
        vec_n(3).prop_map(|s| ConvexSet::translate(ConvexSet::nonneg_orthant(3), s).unwrap()),
    ]
}

/// `S + K` with `S` positive semidefinite and `K` skew: monotone.
fn monotone_affine(n: usize) -> impl Strategy<Value = MonotoneOp> {
    (prop::collection::vec(-2.0..2.0f64, n * n), prop::collection::vec(-2.0..2.0f64, n * n), vec_n(n)).prop_map(
        move |(a, k, b)| {
            let a = DMatrix::from_vec(n, n, a);
            let k = DMatrix::from_vec(n, n, k);
            let m = a.transpose() * &a + (&k - k.transpose());
            MonotoneOp::affine(LinearMap::new(m).unwrap(), b).unwrap()
        },
    )
}

fn fne_violation(tx: &Vector, ty: &Vector, x: &Vector, y: &Vector) -> f64 {
    let d = tx - ty;
    (d.norm_squared() - (x - y).dot(&d)) / (1.0 + (x - y).norm_squared())
}

proptest! {
    #[test]
    fn projection_is_idempotent_and_firm(set in set3(), x in vec_n(3), y in vec_n(3)) {
        let px = set.project(&x).unwrap();
        let py = set.project(&y).unwrap();
        prop_assert!((set.project(&px).unwrap() - &px).norm() <= 1e-9 * (1.0 + px.norm()));
        prop_assert!(set.contains(&px, 1e-9 * (1.0 + px.norm())).unwrap());
        prop_assert!(fne_violation(&px, &py, &x, &y) <= 1e-9);
    }

    #[test]
    fn hyperbola_projection_matches_grid_search(a in -5.0..5.0f64, b in -5.0..5.0f64) {
        let p = ConvexSet::HyperbolaEpigraph.project(&vector(&[a, b])).unwrap();
        let inside = a > 0.0 && a * b >= 1.0;
        if inside {
            prop_assert_eq!(p, vector(&[a, b]));
        } else {
            let (t, s) = oracles::hyperbola_nearest(a, b);
            prop_assert!((p - vector(&[t, s])).norm() <= 1e-6);
        }
    }

    #[test]
    fn resolvents_are_firmly_nonexpansive(op in monotone_affine(3), lambda in 0.05..5.0f64, x in vec_n(3), y in vec_n(3)) {
        let jx = op.resolvent_scaled(lambda, &x).unwrap();
        let jy = op.resolvent_scaled(lambda, &y).unwrap();
        prop_assert!(fne_violation(&jx, &jy, &x, &y) <= 1e-9);
        // J(x) + λ A J(x) = x
        let back = &jx + op.apply(&jx).unwrap() * lambda;
        prop_assert!((back - &x).norm() <= 1e-8 * (1.0 + x.norm()));
    }

    #[test]
    fn inverse_resolvent_identity(op in monotone_affine(2), x in vec_n(2)) {
        // J_A + J_{A⁻¹} = Id
        let sum = op.resolvent(&x).unwrap() + op.clone().inverse().resolvent(&x).unwrap();
        prop_assert!((sum - &x).norm() <= 1e-9 * (1.0 + x.norm()));
    }

    #[test]
    fn distance_gradient_is_residual(set in set3(), x in vec_n(3)) {
        let g = set.grad_half_dist_sq(&x).unwrap();
        prop_assert!((&g - (&x - set.project(&x).unwrap())).norm() <= 1e-12 * (1.0 + x.norm()));
        prop_assert!((g.norm() - set.distance(&x).unwrap()).abs() <= 1e-9 * (1.0 + x.norm()));
    }

    #[test]
    fn shifted_pair_adds_the_shift(c in vec_n(2), r in 0.1..5.0f64, w in vec_n(2), x in vec_n(2)) {
        let p = SplitProblem::new(
            MonotoneOp::grad_half_dist_sq(ConvexSet::ball(c.clone(), r).unwrap()),
            MonotoneOp::normal_cone(ConvexSet::halfspace(vector(&[1.0, 1.0]), 0.0).unwrap()),
        ).unwrap();
        let moved = p.shifted(&w).unwrap().t_fb(&x).unwrap();
        prop_assert!((moved - (&w + p.t_fb(&x).unwrap())).norm() <= 1e-9 * (1.0 + x.norm() + w.norm()));
    }

    #[test]
    fn translated_line_powers(angle in 0.2..1.4f64, w in vec_n(2), x in vec_n(2)) {
        let d = |t: f64| vector(&[t.cos(), t.sin()]);
        let line = |p: &Vector, t: f64| ConvexSet::subspace(AffineSubspace::line(p.clone(), d(t)).unwrap());
        let base = FixedPointMap::alternating_projections(line(&Vector::zeros(2), 0.0), line(&Vector::zeros(2), angle)).unwrap();
        let moved = FixedPointMap::alternating_projections(line(&w, 0.0), line(&w, angle)).unwrap();
        let (mut a, mut c) = (x.clone(), &x - &w);
        for _ in 0..20 {
            a = moved.apply(&a).unwrap();
            c = base.apply(&c).unwrap();
            prop_assert!((&a - (&c + &w)).norm() <= 1e-9 * (1.0 + x.norm() + w.norm()));
        }
    }

    #[test]
    fn shifted_affine_iterates(op in monotone_affine(3), x in vec_n(3)) {
        // T = Id - A scaled to be nonexpansive: x ↦ x - (A x)/(1 + ‖L‖)
        let MonotoneOp::Affine(a) = op else { unreachable!() };
        let m = a.map();
        let s = 1.0 / (1.0 + m.linear().operator_norm());
        let l = DMatrix::identity(3, 3) - m.linear().matrix() * s;
        let t = AffineMap::new(LinearMap::new(l).unwrap(), -(m.offset() * s)).unwrap();
        let v = v_affine_closed_form(&t);
        prop_assert!(affine_shifted_iterate_identity_check(&t, &x, &v, 30).unwrap() <= 1e-8 * (1.0 + x.norm() + 30.0 * v.norm()));
    }

    #[test]
    fn diagonal_projection(xs in prop::collection::vec(coord(), 6)) {
        let xx = Vector::from_vec(xs);
        let p = project_diagonal(&xx, 3).unwrap();
        prop_assert!((project_diagonal(&p, 3).unwrap() - &p).norm() <= 1e-12 * (1.0 + p.norm()));
        prop_assert!(((&xx - &p).dot(&p)).abs() <= 1e-9 * (1.0 + xx.norm_squared()));
        prop_assert_eq!(lift(&average(&p, 3).unwrap(), 3), p);
    }

    #[test]
    fn set_json_round_trip(set in set3()) {
        let text = serde_json::to_string(&set).unwrap();
        let back: ConvexSet = serde_json::from_str(&text).unwrap();
        let x = vector(&[1.0, -2.0, 3.0]);
        prop_assert!((back.project(&x).unwrap() - set.project(&x).unwrap()).norm() <= 1e-12);
    }
}

#[test]
fn trace_csv_is_stable() {
    let map = FixedPointMap::alternating_projections(
        ConvexSet::ball(Vector::zeros(2), 1.0).unwrap(),
        ConvexSet::halfspace(vector(&[-1.0, 0.0]), -0.5).unwrap(),
    )
    .unwrap();
    let opts = IterateOptions {
        max_iter: 50,
        displacement: Some(Vector::zeros(2)),
        ..IterateOptions::default()
    };
    let a = iterate(&map, &vector(&[3.0, 4.0]), &opts).unwrap().to_csv();
    let b = iterate(&map, &vector(&[3.0, 4.0]), &opts).unwrap().to_csv();
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(lines.next(), Some("n,step_norm,displacement_residual,x_0,x_1"));
    for line in lines {
        for cell in line.split(',').skip(1).filter(|c| !c.is_empty()) {
            let value: f64 = cell.parse().unwrap();
            // 17 significant digits round-trip exactly
            assert_eq!(format!("{value:.16e}"), cell);
        }
    }
}

#[test]
fn scenarios_are_deterministic() {
    for id in ["orthant-shift", "map-affine-shift", "affine-normal-solve"] {
        let a = serde_json::to_string(&run_scenario(id).unwrap()).unwrap();
        let b = serde_json::to_string(&run_scenario(id).unwrap()).unwrap();
        assert_eq!(a, b, "{id}");
    }
}
