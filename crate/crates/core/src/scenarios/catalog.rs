use nalgebra::{DMatrix, SymmetricEigen};

use crate::convex::{vector, AffineSubspace, ConvexSet, Vector};
use crate::displacement::{
    accelerated_estimate, accelerated_terms, affine_shifted_iterate_identity_check, estimate_v_iterative,
    knopp_tail_check, normal_solve, rate_fit, summability_check, v_affine_closed_form, v_fb_vs_v_dr, NormalStatus,
};
use crate::error::{Error, Result};
use crate::operators::{sample_pairs, MonotoneOp};
use crate::product_space::{average, parallel_fb_solve, project_diagonal};
use crate::splitting::{iterate, FixedPointMap, IterateOptions, SplitProblem};

use super::instances as inst;
use super::oracles;
use super::{Check, Provenance as P, Recorder};

const EXACT: f64 = 1e-10;
const LIMIT: f64 = 1e-6;

fn points(dim: usize, n: usize, seed: u64) -> Vec<Vector> {
    sample_pairs(dim, n, seed).into_iter().map(|(x, _)| x).collect()
}

fn to_vec(x: &Vector) -> Vec<f64> {
    x.iter().copied().collect()
}

fn max_over<F: FnMut(&Vector) -> Result<f64>>(xs: &[Vector], mut f: F) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for x in xs {
        worst = worst.max(f(x)?);
    }
    Ok(worst)
}

fn diameter(xs: &[Vector]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, a) in xs.iter().enumerate() {
        for b in &xs[i + 1..] {
            d = d.max((a - b).norm());
        }
    }
    d
}

fn run_for(map: &FixedPointMap, x0: &Vector, max_iter: usize, tol: f64) -> Result<crate::splitting::IterationTrace> {
    iterate(
        map,
        x0,
        &IterateOptions {
            max_iter,
            tol,
            ..IterateOptions::default()
        },
    )
}

/// Orthonormal basis of `{x : rows · x = 0}` from the eigenvectors of `CᵀC`.
fn null_basis(rows: &[Vec<f64>], n: usize) -> Vec<Vector> {
    let c = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    let eig = SymmetricEigen::new(c.transpose() * &c);
    (0..n)
        .filter(|&k| eig.eigenvalues[k].abs() <= 1e-12)
        .map(|k| eig.eigenvectors.column(k).into_owned())
        .collect()
}

fn project_on(basis: &[Vector], x: &Vector) -> Vector {
    basis.iter().fold(Vector::zeros(x.len()), |acc, q| acc + q * q.dot(x))
}

pub(super) fn orthant_shift(r: &mut Recorder) -> Result<()> {
    let t = inst::orthant_shift()?;
    let p = inst::orthant_shift_p();
    let x0 = vector(&[5.0, -3.0]);
    let est = estimate_v_iterative(&t, &x0, 10, 1000)?;
    r.push(Check::at_most("v estimate equals -p", (&est.v + &p).norm(), LIMIT, P::Worked));
    r.push(Check::at_most("iterations for the estimate", est.iterations as f64, 1e4, P::Worked));

    let n = 10_000;
    let s = summability_check(&t, &x0, &est.v, n)?;
    r.push(Check::at_most("squared sum tail increase", s.squared_tail_increase, 1e-8, P::Worked));
    r.push(Check::at_most("absolute sum tail increase", s.absolute_tail_increase, 1e-8, P::Worked));
    let k = knopp_tail_check(&s.squared_terms, n)?;
    r.push(Check::holds("n a_n tail decays", k.decaying(), P::Immediate));

    let moved = t.power(&x0, n)? + &est.v * n as f64;
    let quadrant = ConvexSet::nonneg_orthant(2);
    r.push(Check::at_most("T^n x + n v in the quadrant", quadrant.distance(&moved)?, LIMIT, P::Worked));

    let shifted = t.clone().shifted(est.v.clone())?;
    let ident = (t.power(&x0, 50)? + &est.v * 50.0 - shifted.power(&x0, 50)?).norm();
    r.push(Check::at_most("T^n x + n v = (v+T)^n x at n = 50", ident, EXACT, P::Immediate));
    let trace = iterate(
        &shifted,
        &x0,
        &IterateOptions {
            max_iter: 1000,
            tol: 1e-12,
            displacement: Some(est.v.clone()),
            ..IterateOptions::default()
        },
    )?;
    r.trace("shifted", trace);
    Ok(())
}

pub(super) fn constants(r: &mut Recorder) -> Result<()> {
    let prob = inst::constants()?;
    let fb = FixedPointMap::ForwardBackward(prob.clone());
    let x0 = vector(&[0.5, -0.25]);
    let target = vector(&[1.0, 1.0]);
    let est = estimate_v_iterative(&fb, &x0, 10, 100)?;
    r.push(Check::at_most("v estimate equals (1,1)", (&est.v - &target).norm(), 1e-12, P::Worked));
    let rep = fb.affine_representation()?;
    let closed = v_affine_closed_form(&rep);
    r.push(Check::at_most("closed-form v equals (1,1)", (&closed - &target).norm(), 1e-12, P::oracle("closed form")));

    let xs = points(2, 5, 0xc0);
    let worst = max_over(&xs, |x| prob.perturbed_residual(&est.v, x))?;
    r.push(Check::at_most("every sampled x solves the normal problem", worst, 1e-12, P::Worked));

    let mut acc_dev: f64 = 0.0;
    for n in [1, 5, 20] {
        acc_dev = acc_dev.max((accelerated_estimate(&fb, &x0, n)? - &x0).norm());
    }
    r.push(Check::at_most("accelerated estimate returns x", acc_dev, 1e-12, P::Worked));

    let report = normal_solve(&prob, &x0, 1e-10, 1000)?;
    r.push(Check::holds(
        "normal solve finds a solution",
        report.status == NormalStatus::NormalSolutionFound,
        P::Worked,
    ));
    let z_dev = report.z.as_ref().map_or(f64::INFINITY, |z| (z - &x0).norm());
    r.push(Check::at_most("normal solution is the start point", z_dev, 1e-12, P::Immediate));

    let ident = affine_shifted_iterate_identity_check(&rep, &x0, &est.v, 50)?;
    r.push(Check::at_most("T^n x + n v = (v+T)^n x up to n = 50", ident, EXACT, P::Immediate));
    let s = summability_check(&fb, &x0, &est.v, 1000)?;
    r.push(Check::at_most("displacement sums vanish", s.squared + s.absolute, 1e-12, P::Immediate));

    let primal = prob.solve_primal(&x0, 1e-8, 1000);
    r.push(Check::holds(
        "primal iteration does not converge",
        matches!(primal, Err(Error::NotConverged { .. })),
        P::Worked,
    ));
    if let Err(Error::NotConverged { trace }) = primal {
        r.trace("primal", *trace);
    }
    Ok(())
}

pub(super) fn hyperbola_infeasible(r: &mut Recorder) -> Result<()> {
    let prob = inst::hyperbola_infeasible()?;
    let fb = FixedPointMap::ForwardBackward(prob.clone());
    let x0 = vector(&[0.0, 0.0]);
    let w = vector(&[-1.0, 0.0]);

    for q in [vector(&[0.0, 0.0]), vector(&[3.0, -1.0]), vector(&[-2.0, 4.0])] {
        let got = ConvexSet::HyperbolaEpigraph.project(&q)?;
        let (t, s) = oracles::hyperbola_nearest(q[0], q[1]);
        r.push(Check::at_most(
            &format!("projection of ({}, {}) matches grid search", q[0], q[1]),
            (got - vector(&[t, s])).norm(),
            1e-6,
            P::oracle("hyperbola_nearest"),
        ));
    }

    let est = estimate_v_iterative(&fb, &x0, 10, 10_000)?;
    r.push(Check::at_most("v estimate equals (-1,0)", (&est.v - &w).norm(), 1e-3, P::Worked));

    let report = normal_solve(&prob, &x0, 1e-8, 100_000)?;
    r.push(Check::holds(
        "normal solve reports divergence",
        report.status == NormalStatus::Divergent,
        P::Worked,
    ));
    r.push(Check::at_least(
        "final iterate norm of v + T_FB",
        report.trace.final_iterate().norm(),
        crate::tolerance::DIVERGENCE_THRESHOLD,
        P::Worked,
    ));

    let xs = points(2, 200, 0x4b);
    let mut least = f64::INFINITY;
    for x in &xs {
        least = least.min(prob.perturbed_residual(&w, x)?);
    }
    r.push(Check::at_least("no sampled point solves the normal problem", least, 1e-6, P::Immediate));
    r.trace("normal_solve", report.trace);
    Ok(())
}

pub(super) fn a_identity_ranges(r: &mut Recorder) -> Result<()> {
    let prob = inst::identity_forward()?;
    let jb0 = inst::identity_forward_ball()?.project(&Vector::zeros(2))?;
    let xs = points(2, 100, 0x1d);
    let fb: Vec<Vector> = xs.iter().map(|x| prob.t_fb(x)).collect::<Result<_>>()?;
    let dr: Vec<Vector> = xs.iter().map(|x| prob.t_dr(x)).collect::<Result<_>>()?;
    let fb_dev = fb.iter().map(|y| (y - &jb0).norm()).fold(0.0, f64::max);
    let dr_dev = xs
        .iter()
        .zip(&dr)
        .map(|(x, y)| (y - (x * 0.5 + &jb0)).norm())
        .fold(0.0, f64::max);
    r.push(Check::at_most("T_FB is constant J_B(0)", fb_dev, EXACT, P::Worked));
    r.push(Check::at_most("T_DR = Id/2 + J_B(0)", dr_dev, EXACT, P::Worked));
    r.push(Check::at_most("diameter of T_FB image", diameter(&fb), EXACT, P::Worked));
    r.push(Check::at_least("diameter of T_DR image", diameter(&dr), 1.0, P::Worked));
    Ok(())
}

pub(super) fn not_self_dual(r: &mut Recorder) -> Result<()> {
    let prob = inst::not_self_dual()?;
    let u = inst::not_self_dual_u();
    let dual = prob.dual()?;
    let v = AffineSubspace::line(Vector::zeros(2), vector(&[1.0, 0.0]))?;
    let explicit = SplitProblem::new(
        prob.a().affine_inverse()?,
        MonotoneOp::normal_cone(ConvexSet::subspace(v.orthogonal_complement())),
    )?;
    let xs = points(2, 100, 0x5d);
    let primal = max_over(&xs, |x| Ok((prob.t_fb(x)? - &u).norm()))?;
    let via_dual = max_over(&xs, |x| Ok(dual.t_fb(x)?.norm()))?;
    let via_explicit = max_over(&xs, |x| Ok(explicit.t_fb(x)?.norm()))?;
    r.push(Check::at_most("T_FB(A, B) = u", primal, 1e-12, P::Worked));
    r.push(Check::at_most("T_FB of the dual pair = 0", via_dual, 1e-12, P::Worked));
    r.push(Check::at_most(
        "dual pair built from explicit inverses gives 0",
        via_explicit,
        1e-12,
        P::oracle("explicit inverse"),
    ));
    Ok(())
}

pub(super) fn map_feasible(r: &mut Recorder) -> Result<()> {
    let (u, v) = inst::feasible_pair()?;
    let prob = inst::distance_and_cone(u.clone(), v.clone())?;
    let fb = FixedPointMap::ForwardBackward(prob.clone());
    let map = FixedPointMap::alternating_projections(u.clone(), v.clone())?;
    let xs = points(2, 100, 0x3a);
    let dev = max_over(&xs, |x| Ok((fb.apply(x)? - map.apply(x)?).norm()))?;
    r.push(Check::at_most("T_FB = P_V P_U", dev, 1e-12, P::Worked));

    let x0 = vector(&[6.0, -4.0]);
    let x2000 = fb.power(&x0, 2000)?;
    r.push(Check::at_most(
        "step norm at n = 2000",
        (&x2000 - fb.apply(&x2000)?).norm(),
        1e-6,
        P::Worked,
    ));
    let trace = run_for(&fb, &x0, 100_000, 1e-12)?;
    let z = trace.final_iterate().clone();
    r.push(Check::at_most("limit lies in U", u.distance(&z)?, LIMIT, P::Worked));
    r.push(Check::at_most("limit lies in V", v.distance(&z)?, LIMIT, P::Worked));
    r.trace("fb", trace);

    let mut duals = Vec::new();
    for s in [vector(&[6.0, -4.0]), vector(&[-7.0, 0.5]), vector(&[0.3, 9.0])] {
        duals.push(prob.solve_primal(&s, 1e-12, 100_000)?.dual_point);
    }
    r.push(Check::at_most("A z agrees across starts", diameter(&duals), LIMIT, P::Worked));
    Ok(())
}

pub(super) fn map_affine_shift(r: &mut Recorder) -> Result<()> {
    let angle = 30f64.to_radians();
    let sample = points(2, 2, 0x30);
    let (w, x) = (&sample[0], &sample[1]);
    let (u0, v0) = inst::lines_through(&Vector::zeros(2), angle)?;
    let (uw, vw) = inst::lines_through(w, angle)?;
    let fb = FixedPointMap::ForwardBackward(inst::distance_and_cone(uw.clone(), vw.clone())?);
    let map_w = FixedPointMap::alternating_projections(uw, vw)?;
    let base = FixedPointMap::alternating_projections(u0, v0)?;

    let (mut a, mut b, mut c) = (x.clone(), x.clone(), x - w);
    let (mut dev_map, mut dev_shift): (f64, f64) = (0.0, 0.0);
    for _ in 0..50 {
        a = fb.apply(&a)?;
        b = map_w.apply(&b)?;
        c = base.apply(&c)?;
        dev_map = dev_map.max((&a - &b).norm());
        dev_shift = dev_shift.max((&a - (&c + w)).norm());
    }
    r.push(Check::at_most("T_FB^n = (P_{w+V} P_{w+U})^n", dev_map, EXACT, P::Worked));
    r.push(Check::at_most("(P_{w+V} P_{w+U})^n x = (P_V P_U)^n (x - w) + w", dev_shift, EXACT, P::Worked));

    let (du, dv) = inst::line_directions(angle);
    let (mu_true, _) = oracles::eigenvalues_2x2(oracles::line_projector_product([du[0], du[1]], [dv[0], dv[1]]));
    let plain = rate_fit(&run_for(&base, &(x - w), 200, f64::MIN_POSITIVE)?, &Vector::zeros(2))?;
    let trace = run_for(&fb, x, 200, f64::MIN_POSITIVE)?;
    let moved = rate_fit(&trace, w)?;
    r.push(Check::at_most("rate of P_V P_U", (plain.mu - mu_true).abs(), 1e-4, P::oracle("eigenvalues_2x2")));
    r.push(Check::at_most("rate of the translated map", (moved.mu - mu_true).abs(), 1e-4, P::oracle("eigenvalues_2x2")));
    r.trace("fb", trace);
    Ok(())
}

pub(super) fn affine_normal_solve(r: &mut Recorder) -> Result<()> {
    let an = inst::affine_normal()?;
    let fb = FixedPointMap::ForwardBackward(an.problem.clone());
    let n = an.x0.len();
    let b = vector(&an.data.b);

    // P_{∥U ∩ ker L} b
    let mut stacked = an.data.l.clone();
    stacked.extend(an.data.normals.iter().cloned());
    let v_formula = project_on(&null_basis(&stacked, n), &b);
    let closed = v_affine_closed_form(&fb.affine_representation()?);
    r.push(Check::at_most("closed-form v = P_{par U ∩ ker L} b", (&closed - &v_formula).norm(), EXACT, P::Worked));

    let est = estimate_v_iterative(&fb, &an.x0, 10, 10_000)?;
    r.push(Check::at_most("iterative v matches closed form", (&est.v - &closed).norm(), LIMIT, P::oracle("closed form")));
    r.push(Check::holds("displacement gaps nonincreasing", est.monotone_ok == Some(true), P::Worked));

    // ran L + (∥U)⊥ + b, tested through its orthogonal complement ker Lᵀ ∩ ∥U
    let mut transposed: Vec<Vec<f64>> = (0..n).map(|j| (0..n).map(|i| an.data.l[i][j]).collect()).collect();
    transposed.extend(an.data.normals.iter().cloned());
    let off = project_on(&null_basis(&transposed, n), &(&est.v - &b)).norm();
    r.push(Check::at_most("v in ran L + (par U)^perp + b", off, LIMIT, P::Worked));

    let target = vector(&an.data.nearest_perturbed_solution(&to_vec(&closed), &to_vec(&an.x0)));
    let (rows, rhs) = an.data.perturbed_constraints(&to_vec(&closed));
    r.push(Check::at_most(
        "oracle point satisfies the Z_v description",
        oracles::constraint_residual(&rows, &rhs, &to_vec(&target)),
        EXACT,
        P::oracle("nearest_solution"),
    ));
    r.push(Check::at_most(
        "oracle point solves the normal problem",
        an.problem.perturbed_residual(&closed, &target)?,
        EXACT,
        P::oracle("nearest_solution"),
    ));

    let shifted = fb.clone().shifted(closed.clone())?;
    let xn = shifted.power(&an.x0, 10_000)?;
    r.push(Check::at_most(
        "(v+T)^n x = P_{Z_v} x at n = 10^4",
        (&xn - &target).norm(),
        1e-8,
        P::oracle("nearest_solution"),
    ));

    let trace = run_for(&shifted, &an.x0, 200, f64::MIN_POSITIVE)?;
    let fit = rate_fit(&trace, &target)?;
    r.push(Check::at_least("rate fit r^2", fit.r_squared, 0.99, P::Worked));
    r.push(Check::at_most("rate fit mu", fit.mu, 1.0 - 1e-4, P::Worked));
    r.push(Check::at_most(
        "mu equals 1 - rho cos theta",
        (fit.mu - (1.0 - an.rho * an.theta.cos())).abs(),
        1e-3,
        P::Immediate,
    ));
    r.trace("shifted", trace);

    let report = normal_solve(&an.problem, &an.x0, 1e-10, 100_000)?;
    r.push(Check::holds(
        "normal solve finds a solution",
        report.status == NormalStatus::NormalSolutionFound,
        P::Worked,
    ));
    Ok(())
}

pub(super) fn accel_vs_shifted(r: &mut Recorder) -> Result<()> {
    let sf = inst::skew_flats()?;
    let fb = FixedPointMap::ForwardBackward(sf.problem.clone());
    let v = v_affine_closed_form(&fb.affine_representation()?);
    let est = estimate_v_iterative(&fb, &sf.x, 10, 1000)?;
    r.push(Check::at_most("iterative v matches closed form", (&est.v - &v).norm(), LIMIT, P::oracle("closed form")));

    let target = vector(&sf.data.nearest_perturbed_solution(&to_vec(&v), &to_vec(&sf.x)));
    let shifted = fb.clone().shifted(v.clone())?;
    r.push(Check::at_most(
        "oracle point is fixed by v + T",
        (shifted.apply(&target)? - &target).norm(),
        EXACT,
        P::oracle("nearest_solution"),
    ));

    let ns = [3usize, 5, 10, 20];
    let mut errors = Vec::new();
    let mut ident: f64 = 0.0;
    for &n in &ns {
        let acc = accelerated_estimate(&fb, &sf.x, n)?;
        errors.push((&acc - &target).norm());
        let (_, diff) = accelerated_terms(&fb, &sf.x, n)?;
        let lhs = (&acc - shifted.power(&sf.x, n)?).norm();
        ident = ident.max((lhs - n as f64 * (diff - &v).norm()).abs());
    }
    r.push(Check::holds(
        "accelerated error decreases over n = 3, 5, 10, 20",
        errors.windows(2).all(|e| e[1] < e[0]),
        P::Worked,
    ));
    r.push(Check::at_most("accelerated error at n = 20", errors[3], 1e-4, P::Worked));
    r.push(Check::at_most(
        "|x_n - (v+T)^n x| = n |T^{n^2}x - T^{n^2+1}x - v|",
        ident,
        EXACT,
        P::Immediate,
    ));

    // same estimator where v is nonzero
    let an = inst::affine_normal()?;
    let fb2 = FixedPointMap::ForwardBackward(an.problem.clone());
    let v2 = v_affine_closed_form(&fb2.affine_representation()?);
    let target2 = vector(&an.data.nearest_perturbed_solution(&to_vec(&v2), &to_vec(&an.x0)));
    let errs2 = ns
        .iter()
        .map(|&n| Ok((accelerated_estimate(&fb2, &an.x0, n)? - &target2).norm()))
        .collect::<Result<Vec<f64>>>()?;
    r.push(Check::holds(
        "accelerated error decreases with v nonzero",
        errs2.windows(2).all(|e| e[1] < e[0]),
        P::oracle("nearest_solution"),
    ));
    Ok(())
}

pub(super) fn vfb_vdr_agree(r: &mut Recorder) -> Result<()> {
    let (bu, bv) = inst::disjoint_balls()?;
    let cases = [
        ("constants", inst::constants()?, vector(&[0.5, -0.25])),
        ("orthant", inst::orthant_as_fb()?, vector(&[5.0, -3.0])),
        ("balls", inst::distance_and_cone(bu.clone(), bv.clone())?, vector(&[-4.0, 2.0])),
    ];
    let mut fb_estimates = Vec::new();
    for (name, prob, x0) in &cases {
        let fb = estimate_v_iterative(&FixedPointMap::ForwardBackward(prob.clone()), x0, 10, 10_000)?;
        let dr = estimate_v_iterative(&FixedPointMap::DouglasRachford(prob.clone()), x0, 10, 10_000)?;
        let gap = (&fb.v - &dr.v).norm();
        r.push(Check::at_most(&format!("{name}: |v_FB - v_DR|"), gap, 1e-4, P::Worked));
        r.push(Check::at_most(
            &format!("{name}: gap within stage residuals"),
            gap,
            10.0 * (fb.last_residual + dr.last_residual) + 1e-12,
            P::Worked,
        ));
        let (_, _, small) = v_fb_vs_v_dr(prob, x0, 1000)?;
        let (_, _, large) = v_fb_vs_v_dr(prob, x0, 100_000)?;
        r.push(Check::at_most(&format!("{name}: gap does not grow with budget"), large, small + 1e-12, P::Worked));
        fb_estimates.push(fb.v);
    }
    r.push(Check::at_most(
        "constants: v in ran A + ran B",
        (&fb_estimates[0] - vector(&[1.0, 1.0])).norm(),
        LIMIT,
        P::Worked,
    ));
    // ran A + ran B = -p + nonpositive quadrant
    let p = inst::orthant_shift_p();
    let cone = ConvexSet::translate(ConvexSet::nonpos_orthant(2), -&p)?;
    r.push(Check::at_most("orthant: v in ran A + ran B", cone.distance(&fb_estimates[1])?, LIMIT, P::Worked));

    let (_, near_v) = oracles::ball_gap_points(&[0.0, 0.0], 1.0, &[3.0, 0.0], 1.0);
    let near_v = vector(&near_v);
    let t = FixedPointMap::ForwardBackward(cases[2].1.clone());
    r.push(Check::at_most(
        "balls: nearest point of V is fixed",
        (t.apply(&near_v)? - &near_v).norm(),
        EXACT,
        P::oracle("ball_gap_points"),
    ));
    r.push(Check::at_most("balls: v estimate is zero", fb_estimates[2].norm(), 1e-4, P::oracle("ball_gap_points")));
    Ok(())
}

pub(super) fn fb_dr_displacement_range(r: &mut Recorder) -> Result<()> {
    let prob = inst::ball_and_halfspace()?;
    let xbar = vector(&[4.0, 1.0]);
    let w = &xbar - prob.t_fb(&xbar)?;
    let sfb = FixedPointMap::ForwardBackward(prob.clone()).shifted(w.clone())?;
    let sdr = FixedPointMap::DouglasRachford(prob.clone()).shifted(w.clone())?;
    let pair = prob.shifted(&w)?;

    let xs = points(2, 20, 0xfb);
    let dev = max_over(&xs, |x| Ok((pair.t_fb(x)? - sfb.apply(x)?).norm()))?;
    r.push(Check::at_most("shifted pair has T_FB = w + T_FB", dev, 1e-12, P::Worked));

    let x0 = vector(&[-2.0, 5.0]);
    let tf = run_for(&sfb, &x0, 100_000, 1e-12)?;
    let td = run_for(&sdr, &x0, 100_000, 1e-12)?;
    r.push(Check::holds("w + T_FB iteration converges", tf.stopped_by() == Some(crate::splitting::StopReason::Tolerance), P::Worked));
    r.push(Check::holds("w + T_DR iteration converges", td.stopped_by() == Some(crate::splitting::StopReason::Tolerance), P::Worked));
    let z = tf.final_iterate();
    let y = td.final_iterate();
    r.push(Check::at_most("FB limit solves the w-problem", prob.perturbed_residual(&w, z)?, 1e-8, P::Immediate));
    r.push(Check::at_most("DR limit is fixed by w + T_DR", (sdr.apply(y)? - y).norm(), 1e-8, P::Immediate));
    r.trace("shifted_fb", tf);
    r.trace("shifted_dr", td);
    Ok(())
}

pub(super) fn parallel_feasible(r: &mut Recorder) -> Result<()> {
    let p = inst::parallel_feasible()?;
    let x0 = vector(&[4.0, -3.0]);
    let report = parallel_fb_solve(&p, &x0, 1e-10, 100_000)?;
    r.push(Check::at_most("|v| of the lifted map", report.lifted.v.norm(), LIMIT, P::Worked));
    r.push(Check::at_most(
        "|sum alpha A_i(z)|",
        report.sum_residual.unwrap_or(f64::INFINITY),
        LIMIT,
        P::Worked,
    ));
    if let Some(z) = &report.z {
        let worst = p
            .ops()
            .iter()
            .map(|op| op.apply(z).map(|g| g.norm()))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0, f64::max);
        r.push(Check::at_most("z lies in every ball", worst, LIMIT, P::Immediate));
    } else {
        r.push(Check::holds("z lies in every ball", false, P::Immediate));
    }

    // lifted forward-backward is averaged projections
    let lifted = FixedPointMap::ForwardBackward(p.build_lifted_problem()?);
    let sets = [
        ConvexSet::ball(vector(&[0.0, 0.0]), 1.0)?,
        ConvexSet::ball(vector(&[1.5, 0.5]), 1.0)?,
    ];
    let xs = points(4, 20, 0x9a);
    let dev = max_over(&xs, |xx| {
        let a = sets[0].project(&xx.rows(0, 2).into_owned())?;
        let b = sets[1].project(&xx.rows(2, 2).into_owned())?;
        let mean = (a + b) * 0.5;
        let expected = vector(&[mean[0], mean[1], mean[0], mean[1]]);
        Ok((lifted.apply(xx)? - expected).norm())
    })?;
    r.push(Check::at_most("lifted map averages the projections", dev, 1e-12, P::Immediate));
    r.trace("lifted", report.lifted.trace);
    Ok(())
}

pub(super) fn parallel_constants(r: &mut Recorder) -> Result<()> {
    let p = inst::parallel_constants()?;
    let m = p.blocks();
    let x0 = vector(&[1.0, 2.0]);
    let lifted = FixedPointMap::ForwardBackward(p.build_lifted_problem()?);
    let closed = v_affine_closed_form(&lifted.affine_representation()?);
    let est = estimate_v_iterative(&lifted, &p.lift(&x0)?, 10, 10_000)?;
    r.push(Check::at_most(
        "v estimate matches the lifted closed form",
        (&est.v - &closed).norm(),
        LIMIT,
        P::oracle("closed form of the lifted map"),
    ));
    let sum = inst::parallel_constant_values().iter().fold(Vector::zeros(2), |s, a| s + a);
    let by_hand = p.lift(&(sum * (p.alpha() / m as f64)))?;
    r.push(Check::at_most("closed form = lift(alpha * mean a_i)", (&closed - &by_hand).norm(), EXACT, P::Immediate));
    r.push(Check::at_most("|v| = 1", (closed.norm() - 1.0).abs(), EXACT, P::Immediate));

    let report = parallel_fb_solve(&p, &x0, 1e-10, 100_000)?;
    match &report.lifted.z {
        Some(zz) => {
            let v = &report.lifted.v;
            let shifted = zz - v;
            let on_diag = (&shifted - project_diagonal(&shifted, m)?).norm();
            let az = p.build_lifted_problem()?.a().apply(zz)? - v;
            let off_diag = average(&az, m)?.norm();
            r.push(Check::at_most("z - v on the diagonal", on_diag, 1e-8, P::Worked));
            r.push(Check::at_most("A(z) - v orthogonal to the diagonal", off_diag, 1e-8, P::Worked));
        }
        None => r.push(Check::holds("normal solve finds a solution", false, P::Worked)),
    }
    r.trace("lifted", report.lifted.trace);
    Ok(())
}

pub(super) fn dual_uniqueness(r: &mut Recorder) -> Result<()> {
    let prob = inst::parallel_segments()?;
    let mut zs = Vec::new();
    let mut duals = Vec::new();
    for x0 in inst::parallel_segment_starts() {
        let sol = prob.solve_primal(&x0, 1e-12, 100_000)?;
        zs.push(sol.z);
        duals.push(sol.dual_point);
    }
    let mut closest = f64::INFINITY;
    for (i, a) in zs.iter().enumerate() {
        for b in &zs[i + 1..] {
            closest = closest.min((a - b).norm());
        }
    }
    r.push(Check::at_least("primal solutions are distinct", closest, 0.1, P::Immediate));
    r.push(Check::at_most("A z agrees across solutions", diameter(&duals), LIMIT, P::Worked));
    r.push(Check::at_most(
        "A z is the gap vector (0,1)",
        (&duals[0] - vector(&[0.0, 1.0])).norm(),
        LIMIT,
        P::Immediate,
    ));
    Ok(())
}
