//! Problem instances used by the scenarios, exposed for reuse in tests.

use std::f64::consts::FRAC_PI_4;

use crate::convex::{vector, AffineSubspace, ConvexSet, LinearMap, Vector};
use crate::error::Result;
use crate::operators::MonotoneOp;
use crate::product_space::ProductProblem;
use crate::splitting::{FixedPointMap, SplitProblem};

use super::oracles::AffineNormalData;

pub fn orthant_shift_p() -> Vector {
    vector(&[1.0, 1.0])
}

/// `x ↦ p + P_{R²₊} x`, built as a shifted forward-backward map with `A = 0`.
pub fn orthant_shift() -> Result<FixedPointMap> {
    let fb = SplitProblem::new(MonotoneOp::zero(2), MonotoneOp::normal_cone(ConvexSet::nonneg_orthant(2)))?;
    FixedPointMap::ForwardBackward(fb).shifted(orthant_shift_p())
}

/// `A = -p`, `B = N_{p + R²₊}`: its forward-backward map is `p + P_{R²₊}`.
pub fn orthant_as_fb() -> Result<SplitProblem> {
    let p = orthant_shift_p();
    SplitProblem::new(
        MonotoneOp::constant(-&p),
        MonotoneOp::normal_cone(ConvexSet::translate(ConvexSet::nonneg_orthant(2), p)?),
    )
}

pub fn constants() -> Result<SplitProblem> {
    SplitProblem::new(
        MonotoneOp::constant(vector(&[1.0, 0.0])),
        MonotoneOp::constant(vector(&[0.0, 1.0])),
    )
}

/// The horizontal axis `R × {0}`.
pub fn axis() -> Result<ConvexSet> {
    Ok(ConvexSet::subspace(AffineSubspace::line(
        vector(&[0.0, 0.0]),
        vector(&[1.0, 0.0]),
    )?))
}

/// `A = Id - P_U` with `U = {(t, s) : t > 0, ts ≥ 1}`, `B = (-1, 0) + N_V`.
pub fn hyperbola_infeasible() -> Result<SplitProblem> {
    SplitProblem::new(
        MonotoneOp::grad_half_dist_sq(ConvexSet::HyperbolaEpigraph),
        MonotoneOp::normal_cone(axis()?).outer_shift(vector(&[1.0, 0.0])),
    )
}

pub fn identity_forward_ball() -> Result<ConvexSet> {
    ConvexSet::ball(vector(&[2.0, 1.0]), 0.5)
}

/// `A = Id`, `B = N_C` for a ball `C` away from the origin.
pub fn identity_forward() -> Result<SplitProblem> {
    SplitProblem::new(MonotoneOp::identity(2), MonotoneOp::normal_cone(identity_forward_ball()?))
}

pub fn not_self_dual_u() -> Vector {
    vector(&[1.0, 0.0])
}

/// `A = Id - u`, `B = N_V` with `V = R × {0}`.
pub fn not_self_dual() -> Result<SplitProblem> {
    SplitProblem::new(
        MonotoneOp::affine(LinearMap::identity(2), -not_self_dual_u())?,
        MonotoneOp::normal_cone(axis()?),
    )
}

/// A ball of radius 2 at the origin and the line `x₂ = 1`.
pub fn feasible_pair() -> Result<(ConvexSet, ConvexSet)> {
    Ok((
        ConvexSet::ball(Vector::zeros(2), 2.0)?,
        ConvexSet::subspace(AffineSubspace::line(vector(&[0.0, 1.0]), vector(&[1.0, 0.0]))?),
    ))
}

/// `A = Id - P_U`, `B = N_V`.
pub fn distance_and_cone(u: ConvexSet, v: ConvexSet) -> Result<SplitProblem> {
    SplitProblem::new(MonotoneOp::grad_half_dist_sq(u), MonotoneOp::normal_cone(v))
}

pub fn line_directions(angle: f64) -> (Vector, Vector) {
    (vector(&[1.0, 0.0]), vector(&[angle.cos(), angle.sin()]))
}

/// Lines through `w` with the directions of [`line_directions`].
pub fn lines_through(w: &Vector, angle: f64) -> Result<(ConvexSet, ConvexSet)> {
    let (du, dv) = line_directions(angle);
    Ok((
        ConvexSet::subspace(AffineSubspace::line(w.clone(), du)?),
        ConvexSet::subspace(AffineSubspace::line(w.clone(), dv)?),
    ))
}

/// Disjoint unit balls centred at `(0,0)` and `(3,0)`.
pub fn disjoint_balls() -> Result<(ConvexSet, ConvexSet)> {
    Ok((
        ConvexSet::ball(vector(&[0.0, 0.0]), 1.0)?,
        ConvexSet::ball(vector(&[3.0, 0.0]), 1.0)?,
    ))
}

pub struct AffineNormal {
    pub problem: SplitProblem,
    pub data: AffineNormalData,
    pub rho: f64,
    pub theta: f64,
    pub x0: Vector,
}

/// `L = 0 ⊕ ρR_θ` on `R × R²`, `b = (0.7, -0.4, 0.3)`, `U = {x₃ = 2}`.
/// `L` is firmly nonexpansive because `ρ ≤ cos θ`.
pub fn affine_normal() -> Result<AffineNormal> {
    let (rho, theta) = (0.5, FRAC_PI_4);
    let (c, s) = (rho * theta.cos(), rho * theta.sin());
    let l = vec![vec![0.0, 0.0, 0.0], vec![0.0, c, -s], vec![0.0, s, c]];
    let b = vec![0.7, -0.4, 0.3];
    let c0 = 2.0;
    let plane = AffineSubspace::new(
        vector(&[0.0, 0.0, c0]),
        &[vector(&[1.0, 0.0, 0.0]), vector(&[0.0, 1.0, 0.0])],
    )?;
    let problem = SplitProblem::new(
        MonotoneOp::affine(LinearMap::from_rows(&l)?, vector(&b))?,
        MonotoneOp::normal_cone(ConvexSet::subspace(plane)),
    )?;
    Ok(AffineNormal {
        problem,
        data: AffineNormalData {
            l,
            b,
            normals: vec![vec![0.0, 0.0, 1.0]],
            offsets: vec![c0],
            directions: vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0]],
        },
        rho,
        theta,
        x0: vector(&[1.0, 5.0, -3.0]),
    })
}

pub struct SkewFlats {
    pub problem: SplitProblem,
    pub data: AffineNormalData,
    pub x: Vector,
}

/// `U = span(e₁, e₂)` and `V = e₄ + span(e₁, cos 60° e₂ + sin 60° e₃)` in
/// R⁴: disjoint flats whose nearest points form the line `e₄ + R e₁`.
pub fn skew_flats() -> Result<SkewFlats> {
    let (c, s) = (60f64.to_radians().cos(), 60f64.to_radians().sin());
    let e = |i: usize| Vector::from_fn(4, |k, _| if k == i { 1.0 } else { 0.0 });
    let u = AffineSubspace::new(Vector::zeros(4), &[e(0), e(1)])?;
    let d = vector(&[0.0, c, s, 0.0]);
    let v = AffineSubspace::new(e(3), &[e(0), d.clone()])?;
    let problem = distance_and_cone(ConvexSet::subspace(u), ConvexSet::subspace(v))?;
    // Id - P_U as a matrix, and V as {x : e₄·x = 1, (0,-s,c,0)·x = 0}
    let mut l = vec![vec![0.0; 4]; 4];
    l[2][2] = 1.0;
    l[3][3] = 1.0;
    Ok(SkewFlats {
        problem,
        data: AffineNormalData {
            l,
            b: vec![0.0; 4],
            normals: vec![vec![0.0, 0.0, 0.0, 1.0], vec![0.0, -s, c, 0.0]],
            offsets: vec![1.0, 0.0],
            directions: vec![vec![1.0, 0.0, 0.0, 0.0], d.iter().copied().collect()],
        },
        x: vector(&[1.0, 2.0, -1.0, 3.0]),
    })
}

/// `A = Id - P_U` for the unit ball, `B = N_H` with `H = {x₁ ≥ 3}`.
pub fn ball_and_halfspace() -> Result<SplitProblem> {
    distance_and_cone(
        ConvexSet::ball(Vector::zeros(2), 1.0)?,
        ConvexSet::halfspace(vector(&[-1.0, 0.0]), -3.0)?,
    )
}

/// `∇½d²` of two overlapping balls, each 1-cocoercive.
pub fn parallel_feasible() -> Result<ProductProblem> {
    ProductProblem::new(
        vec![
            MonotoneOp::grad_half_dist_sq(ConvexSet::ball(vector(&[0.0, 0.0]), 1.0)?),
            MonotoneOp::grad_half_dist_sq(ConvexSet::ball(vector(&[1.5, 0.5]), 1.0)?),
        ],
        vec![1.0, 1.0],
    )
}

pub fn parallel_constant_values() -> Vec<Vector> {
    vec![vector(&[0.5, -1.0]), vector(&[0.5, 2.0])]
}

/// Two constant operators summing to `(1, 1)`.
pub fn parallel_constants() -> Result<ProductProblem> {
    ProductProblem::new(
        parallel_constant_values().into_iter().map(MonotoneOp::constant).collect(),
        vec![1.0, 1.0],
    )
}

/// `A = Id - P_U`, `B = N_V` for the segments `[0,2] × {0}` and `[1,3] × {1}`.
pub fn parallel_segments() -> Result<SplitProblem> {
    distance_and_cone(
        ConvexSet::boxed(vector(&[0.0, 0.0]), vector(&[2.0, 0.0]))?,
        ConvexSet::boxed(vector(&[1.0, 1.0]), vector(&[3.0, 1.0]))?,
    )
}

pub fn parallel_segment_starts() -> Vec<Vector> {
    vec![vector(&[-5.0, 3.0]), vector(&[1.5, -2.0]), vector(&[9.0, 4.0])]
}
