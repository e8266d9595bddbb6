//! Acceptance checks, one line per criterion.
//!
//! Runs without the libtest harness so the summary always prints; exits
//! nonzero if any criterion fails.

use std::time::{Duration, Instant};

use monosplit::convex::{vector, AffineMap, AffineSubspace, ConvexSet, LinearMap, Vector};
use monosplit::displacement::{
    accelerated_estimate, displacement_gaps, estimate_v_iterative, normal_solve, rate_fit, summability_check,
    v_affine_closed_form, v_fb_vs_v_dr, NormalStatus,
};
use monosplit::operators::{check_firmly_nonexpansive, sample_pairs, MonotoneOp};
use monosplit::product_space::parallel_fb_solve;
use monosplit::scenarios::instances as inst;
use monosplit::splitting::{iterate, FixedPointMap, IterateOptions};
use monosplit::Result;
use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { passed, detail })
}

fn randoms(dim: usize, n: usize, seed: u64) -> Vec<Vector> {
    sample_pairs(dim, n, seed).into_iter().map(|p| p.0).collect()
}

fn to_vec(x: &Vector) -> Vec<f64> {
    x.iter().copied().collect()
}

fn criterion_1() -> Result<Outcome> {
    let start = Instant::now();
    let t = inst::orthant_shift()?;
    let x0 = vector(&[5.0, -3.0]);
    let est = estimate_v_iterative(&t, &x0, 10, 1000)?;
    let v_err = (&est.v - vector(&[-1.0, -1.0])).norm();
    let n = 10_000;
    let s = summability_check(&t, &x0, &est.v, n)?;
    let limit = t.power(&x0, n)? + &est.v * n as f64;
    let dist = ConvexSet::nonneg_orthant(2).distance(&limit)?;
    let elapsed = start.elapsed();
    outcome(
        v_err <= 1e-6
            && est.iterations <= 10_000
            && s.squared_plateaus()
            && s.absolute_plateaus()
            && dist <= 1e-6
            && elapsed < Duration::from_secs(1),
        format!(
            "|v-(-1,-1)|={v_err:.1e} after {} its, tails {:.1e}/{:.1e}, dist to quadrant {dist:.1e}, {elapsed:.2?}",
            est.iterations, s.squared_tail_increase, s.absolute_tail_increase
        ),
    )
}

fn criterion_2() -> Result<Outcome> {
    let prob = inst::constants()?;
    let fb = FixedPointMap::ForwardBackward(prob.clone());
    let x0 = vector(&[0.5, -0.25]);
    let est = estimate_v_iterative(&fb, &x0, 10, 100)?;
    let v_err = (&est.v - vector(&[1.0, 1.0])).norm();
    let mut residual: f64 = 0.0;
    for x in randoms(2, 5, 2) {
        residual = residual.max(prob.perturbed_residual(&est.v, &x)?);
    }
    let mut accel: f64 = 0.0;
    for n in [1, 5, 20] {
        accel = accel.max((accelerated_estimate(&fb, &x0, n)? - &x0).norm());
    }
    outcome(
        v_err <= 1e-12 && residual <= 1e-12 && accel <= 1e-12,
        format!("|v-(1,1)|={v_err:.1e}, max residual {residual:.1e}, accelerated deviation {accel:.1e}"),
    )
}

fn criterion_3() -> Result<Outcome> {
    let start = Instant::now();
    let prob = inst::hyperbola_infeasible()?;
    let x0 = vector(&[0.0, 0.0]);
    let est = estimate_v_iterative(&FixedPointMap::ForwardBackward(prob.clone()), &x0, 10, 10_000)?;
    let v_err = (&est.v - vector(&[-1.0, 0.0])).norm();
    let report = normal_solve(&prob, &x0, 1e-8, 100_000)?;
    let elapsed = start.elapsed();
    outcome(
        v_err <= 1e-3 && report.status == NormalStatus::Divergent && elapsed < Duration::from_secs(5),
        format!(
            "|v-(-1,0)|={v_err:.1e}, status {:?} with final |x|={:.3e} after {} its, {elapsed:.2?}",
            report.status,
            report.trace.final_iterate().norm(),
            report.iterations
        ),
    )
}

fn criterion_4() -> Result<Outcome> {
    let (u, v) = inst::disjoint_balls()?;
    let cases = [
        ("constants", inst::constants()?, vector(&[0.5, -0.25])),
        ("orthant", inst::orthant_as_fb()?, vector(&[5.0, -3.0])),
        ("balls", inst::distance_and_cone(u, v)?, vector(&[-4.0, 2.0])),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (name, prob, x0) in &cases {
        let (_, _, gap) = v_fb_vs_v_dr(prob, x0, 100_000)?;
        ok &= gap <= 1e-4;
        parts.push(format!("{name} {gap:.1e}"));
    }
    outcome(ok, format!("|v_FB - v_DR|: {}", parts.join(", ")))
}

fn criterion_5() -> Result<Outcome> {
    let prob = inst::not_self_dual()?;
    let dual = prob.dual()?;
    let u = inst::not_self_dual_u();
    let (mut primal, mut dual_dev): (f64, f64) = (0.0, 0.0);
    for x in randoms(2, 100, 5) {
        primal = primal.max((prob.t_fb(&x)? - &u).norm());
        dual_dev = dual_dev.max(dual.t_fb(&x)?.norm());
    }
    outcome(
        primal <= 1e-12 && dual_dev <= 1e-12,
        format!("max |T_FB x - u| {primal:.1e}, max |dual T_FB x| {dual_dev:.1e}"),
    )
}

fn criterion_6() -> Result<Outcome> {
    let an = inst::affine_normal()?;
    let fb = FixedPointMap::ForwardBackward(an.problem.clone());
    let v = v_affine_closed_form(&fb.affine_representation()?);
    let target = vector(&an.data.nearest_perturbed_solution(&to_vec(&v), &to_vec(&an.x0)));
    let shifted = fb.shifted(v)?;
    let err = (shifted.power(&an.x0, 10_000)? - &target).norm();
    let trace = iterate(
        &shifted,
        &an.x0,
        &IterateOptions {
            max_iter: 200,
            tol: f64::MIN_POSITIVE,
            ..IterateOptions::default()
        },
    )?;
    let fit = rate_fit(&trace, &target)?;
    outcome(
        err <= 1e-8 && fit.r_squared >= 0.99 && fit.mu < 1.0 - 1e-4,
        format!("|(v+T)^n x - P x| = {err:.1e}, mu = {:.4}, r^2 = {:.6}", fit.mu, fit.r_squared),
    )
}

fn criterion_7() -> Result<Outcome> {
    let angle = 30f64.to_radians();
    let (u0, v0) = inst::lines_through(&Vector::zeros(2), angle)?;
    let base = FixedPointMap::alternating_projections(u0, v0)?;
    let mut worst: f64 = 0.0;
    for seed in 0..10u64 {
        let pts = randoms(2, 2, 700 + seed);
        let (w, x) = (&pts[0], &pts[1]);
        let (uw, vw) = inst::lines_through(w, angle)?;
        let moved = FixedPointMap::alternating_projections(uw, vw)?;
        let (mut a, mut c) = (x.clone(), x - w);
        for _ in 0..50 {
            a = moved.apply(&a)?;
            c = base.apply(&c)?;
            worst = worst.max((&a - (&c + w)).norm());
        }
    }
    outcome(worst <= 1e-10, format!("max deviation over 10 shifts, n <= 50: {worst:.1e}"))
}

fn criterion_8() -> Result<Outcome> {
    let start = Instant::now();
    let sf = inst::skew_flats()?;
    let fb = FixedPointMap::ForwardBackward(sf.problem.clone());
    let v = v_affine_closed_form(&fb.affine_representation()?);
    let target = vector(&sf.data.nearest_perturbed_solution(&to_vec(&v), &to_vec(&sf.x)));
    let mut errors = Vec::new();
    for n in [3, 5, 10, 20] {
        errors.push((accelerated_estimate(&fb, &sf.x, n)? - &target).norm());
    }
    let elapsed = start.elapsed();
    let decreasing = errors.windows(2).all(|e| e[1] < e[0]);
    outcome(
        decreasing && errors[3] <= 1e-4 && elapsed < Duration::from_secs(10),
        format!(
            "errors {} at n = 3, 5, 10, 20, {elapsed:.2?}",
            errors.iter().map(|e| format!("{e:.1e}")).collect::<Vec<_>>().join(" ")
        ),
    )
}

fn criterion_9() -> Result<Outcome> {
    let feasible = parallel_fb_solve(&inst::parallel_feasible()?, &vector(&[4.0, -3.0]), 1e-10, 100_000)?;
    let v_norm = feasible.lifted.v.norm();
    let sum = feasible.sum_residual.unwrap_or(f64::INFINITY);

    let p = inst::parallel_constants()?;
    let lifted = FixedPointMap::ForwardBackward(p.build_lifted_problem()?);
    let oracle = v_affine_closed_form(&lifted.affine_representation()?);
    let est = estimate_v_iterative(&lifted, &p.lift(&vector(&[1.0, 2.0]))?, 10, 10_000)?;
    let gap = (&est.v - &oracle).norm();
    outcome(
        v_norm <= 1e-6 && sum <= 1e-6 && gap <= 1e-6,
        format!("common zero: |v| {v_norm:.1e}, |sum| {sum:.1e}; translated: |v - oracle| {gap:.1e}"),
    )
}

fn criterion_10() -> Result<Outcome> {
    let prob = inst::parallel_segments()?;
    let mut zs = Vec::new();
    let mut duals = Vec::new();
    for x0 in inst::parallel_segment_starts() {
        let s = prob.solve_primal(&x0, 1e-12, 100_000)?;
        zs.push(s.z);
        duals.push(s.dual_point);
    }
    let mut spread: f64 = 0.0;
    let mut closest = f64::INFINITY;
    for i in 0..3 {
        for j in i + 1..3 {
            spread = spread.max((&duals[i] - &duals[j]).norm());
            closest = closest.min((&zs[i] - &zs[j]).norm());
        }
    }
    outcome(
        spread <= 1e-6 && closest > 1e-3,
        format!("closest pair of z {closest:.2}, spread of A z {spread:.1e}"),
    )
}

fn catalog_sets() -> Result<Vec<ConvexSet>> {
    Ok(vec![
        ConvexSet::nonneg_orthant(3),
        ConvexSet::boxed(vector(&[-1.0, 0.0, 2.0]), vector(&[1.0, 3.0, 2.5]))?,
        ConvexSet::subspace(AffineSubspace::line(vector(&[1.0, 2.0, 3.0]), vector(&[1.0, -1.0, 0.5]))?),
        ConvexSet::halfspace(vector(&[1.0, 2.0, -1.0]), 0.5)?,
        ConvexSet::ball(vector(&[0.5, -1.0, 2.0]), 3.0)?,
        ConvexSet::Ray {
            direction: vector(&[0.0, 1.0, 1.0]),
        },
        ConvexSet::Diagonal { blocks: 3, block_dim: 1 },
        ConvexSet::translate(ConvexSet::nonpos_orthant(3), vector(&[1.0, 1.0, -2.0]))?,
        ConvexSet::Product {
            parts: vec![ConvexSet::HyperbolaEpigraph, ConvexSet::nonneg_orthant(1)],
        },
    ])
}

fn catalog_ops() -> Result<Vec<MonotoneOp>> {
    let skew = LinearMap::from_rows(&[vec![1.0, -2.0, 0.0], vec![2.0, 0.5, 0.0], vec![0.0, 0.0, 0.0]])?;
    let affine = MonotoneOp::affine(skew, vector(&[1.0, 0.0, -1.0]))?;
    let ball = ConvexSet::ball(Vector::zeros(3), 1.0)?;
    Ok(vec![
        affine.clone(),
        MonotoneOp::constant(vector(&[3.0, -1.0, 0.5])),
        MonotoneOp::grad_half_dist_sq(ball.clone()),
        MonotoneOp::normal_cone(ball.clone()).scaled(2.5)?,
        MonotoneOp::normal_cone(ConvexSet::nonneg_orthant(3)).inner_shift(vector(&[1.0, 2.0, 3.0])),
        affine.clone().outer_shift(vector(&[0.5, 0.5, 0.5])),
        affine.clone().inverse(),
        MonotoneOp::normal_cone(ball).dual_inverse(),
        MonotoneOp::Blockwise {
            parts: vec![
                MonotoneOp::grad_half_dist_sq(ConvexSet::HyperbolaEpigraph),
                MonotoneOp::identity(1),
            ],
        },
    ])
}

/// Finite-difference gradient of `½ d_C²`.
fn fd_gradient(set: &ConvexSet, x: &Vector) -> Result<Vector> {
    let h = 1e-5 * (1.0 + x.norm());
    let f = |y: &Vector| set.distance(y).map(|d| 0.5 * d * d);
    let mut g = Vector::zeros(x.len());
    for i in 0..x.len() {
        let mut up = x.clone();
        let mut down = x.clone();
        up[i] += h;
        down[i] -= h;
        g[i] = (f(&up)? - f(&down)?) / (2.0 * h);
    }
    Ok(g)
}

fn random_averaged_affine(rng: &mut ChaCha8Rng, dim: usize) -> Result<FixedPointMap> {
    let z: f64 = StandardNormal.sample(&mut *rng);
    let lambda = 0.3 + 0.4 * z.abs().min(1.0);
    let mut gauss = |r: usize, c: usize| DMatrix::from_fn(r, c, |_, _| StandardNormal.sample(&mut *rng));
    let q = gauss(dim, dim).qr().q();
    let b = gauss(dim, 1).column(0).into_owned();
    // N = Q diag(1, R_phi, -1) Qᵀ: an isometry with a fixed direction
    let phi: f64 = 1.1;
    let mut core = DMatrix::zeros(dim, dim);
    core[(0, 0)] = 1.0;
    core[(1, 1)] = phi.cos();
    core[(1, 2)] = -phi.sin();
    core[(2, 1)] = phi.sin();
    core[(2, 2)] = phi.cos();
    core[(3, 3)] = -1.0;
    let n = &q * core * q.transpose();
    let l = DMatrix::identity(dim, dim) * (1.0 - lambda) + n * lambda;
    FixedPointMap::affine(AffineMap::new(LinearMap::new(l)?, b)?)
}

fn criterion_11() -> Result<Outcome> {
    let mut fne: f64 = f64::NEG_INFINITY;
    for (k, set) in catalog_sets()?.iter().enumerate() {
        let w = check_firmly_nonexpansive(|x| set.project(x), set.dim(), 1000, 1100 + k as u64)?;
        fne = fne.max(w.max_violation);
    }
    for (k, op) in catalog_ops()?.iter().enumerate() {
        for lambda in [1.0, 0.3] {
            let w = check_firmly_nonexpansive(|x| op.resolvent_scaled(lambda, x), op.dim(), 1000, 1200 + k as u64)?;
            fne = fne.max(w.max_violation);
        }
    }

    let an = inst::affine_normal()?;
    let problems = [
        inst::constants()?,
        inst::hyperbola_infeasible()?,
        inst::ball_and_halfspace()?,
        inst::parallel_segments()?,
        inst::identity_forward()?,
        an.problem,
        inst::parallel_feasible()?.build_lifted_problem()?,
    ];
    let mut defect: f64 = f64::NEG_INFINITY;
    for (k, p) in problems.iter().enumerate() {
        defect = defect.max(p.averagedness_defect(1000, 1300 + k as u64)?);
    }

    let mut grad_err: f64 = 0.0;
    let mut sets = catalog_sets()?;
    sets.retain(|s| s.dim() == 3);
    sets.push(ConvexSet::ball(Vector::zeros(3), 0.5)?);
    for (k, set) in sets.iter().enumerate() {
        for x in randoms(3, 50, 1400 + k as u64) {
            let g = set.grad_half_dist_sq(&x)?;
            if g.norm() < 1e-3 {
                continue;
            }
            grad_err = grad_err.max((fd_gradient(set, &x)? - &g).norm() / g.norm());
        }
    }
    for x in randoms(2, 50, 1499) {
        let g = ConvexSet::HyperbolaEpigraph.grad_half_dist_sq(&x)?;
        if g.norm() >= 1e-3 {
            grad_err = grad_err.max((fd_gradient(&ConvexSet::HyperbolaEpigraph, &x)? - &g).norm() / g.norm());
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1500);
    let mut increase = f64::NEG_INFINITY;
    for _ in 0..10 {
        let t = random_averaged_affine(&mut rng, 4)?;
        let v = v_affine_closed_form(&t.affine_representation()?);
        let x = Vector::from_fn(4, |_, _| StandardNormal.sample(&mut rng));
        let gaps = displacement_gaps(&t, &x, &v, 100)?;
        for w in gaps.windows(2) {
            increase = increase.max(w[1] - w[0]);
        }
    }

    outcome(
        fne <= 1e-9 && defect <= 1e-9 && grad_err <= 1e-4 && increase <= 1e-12,
        format!(
            "firm nonexpansiveness {fne:.1e}, 2/3-averagedness {defect:.1e}, gradient rel. error {grad_err:.1e}, largest gap increase {increase:.1e}"
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Result<Outcome>); 11] = [
        ("orthant example", criterion_1),
        ("constants example", criterion_2),
        ("hyperbola example", criterion_3),
        ("v_FB = v_DR", criterion_4),
        ("self-duality failure", criterion_5),
        ("affine strong convergence and rate", criterion_6),
        ("alternating projections shift identity", criterion_7),
        ("accelerated estimator", criterion_8),
        ("parallel splitting", criterion_9),
        ("dual uniqueness", criterion_10),
        ("property suites", criterion_11),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let (passed, detail) = match run() {
            Ok(o) => (o.passed, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        println!("criterion {:>2} [{}] {name}: {detail}", i + 1, if passed { "PASS" } else { "FAIL" });
        if !passed {
            failed.push(i + 1);
        }
    }
    if failed.is_empty() {
        println!("all {} criteria pass", criteria.len());
    } else {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
