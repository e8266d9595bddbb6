//! Minimal displacement vectors and the perturbed problem they define.
//!
//! For a nonexpansive `T` the vector `v` of least norm in the closure of
//! `ran(Id - T)` measures how far the problem is from having a fixed point.
//! For averaged maps the differences `Tⁿx - Tⁿ⁺¹x` converge to it, which is
//! what the staged estimator below relies on.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::convex::{all_finite, complement_basis, range_basis, AffineMap, AffineSubspace, Vector};
use crate::error::{ensure_dim, Error, Result};
use crate::splitting::{iterate, FixedPointMap, IterateOptions, IterationTrace, SplitProblem, StopReason};
use crate::tolerance::{DIVERGENCE_THRESHOLD, RANK_CUTOFF, STAGE_ACCEPT_TOL};

/// Absolute part of the slack allowed when checking that
/// `n ↦ ‖Tⁿx - Tⁿ⁺¹x - v‖` does not increase.
pub const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DisplacementEstimate {
    #[serde(with = "crate::serde_util::vector")]
    pub v: Vector,
    /// Map applications used to reach the estimate.
    pub iterations: usize,
    /// Distance between the last two stage estimates.
    pub last_residual: f64,
    /// Whether successive stage estimates settled within the acceptance tolerance.
    pub accepted: bool,
    /// For affine maps: whether `‖Tⁿx - Tⁿ⁺¹x - v‖` was nonincreasing over the
    /// run. `None` when the map is not affine.
    pub monotone_ok: Option<bool>,
}

/// Estimates `v` as `Tᴺx - Tᴺ⁺¹x`, checking every `stage_len` steps whether
/// the estimate has stopped moving.
pub fn estimate_v_iterative(
    map: &FixedPointMap,
    x0: &Vector,
    n_stages: usize,
    stage_len: usize,
) -> Result<DisplacementEstimate> {
    ensure_dim(map.dim(), x0.len())?;
    if n_stages == 0 || stage_len == 0 {
        return Err(Error::InvalidArgument("need at least one stage of positive length".into()));
    }
    let mut x = x0.clone();
    let mut prev: Option<Vector> = None;
    let mut last_residual = f64::INFINITY;
    let mut accepted = false;
    let mut n = 0;
    let mut v = Vector::zeros(map.dim());
    for _stage in 0..n_stages {
        for _ in 0..stage_len {
            x = advance(map, &x, n, &prev)?;
            n += 1;
        }
        let tx = advance(map, &x, n, &prev)?;
        v = &x - &tx;
        if let Some(p) = &prev {
            last_residual = (&v - p).norm();
            if last_residual <= STAGE_ACCEPT_TOL {
                accepted = true;
                break;
            }
        }
        prev = Some(v.clone());
    }
    let monotone_ok = if map.is_affine() {
        let (gaps, scale) = gaps_with_scale(map, x0, &v, n)?;
        Some(is_nonincreasing(&gaps, scale))
    } else {
        None
    };
    Ok(DisplacementEstimate {
        v,
        iterations: n,
        last_residual,
        accepted,
        monotone_ok,
    })
}

fn slack(scale: f64) -> f64 {
    MONOTONE_SLACK + 16.0 * f64::EPSILON * (1.0 + scale)
}

fn advance(map: &FixedPointMap, x: &Vector, n: usize, estimate: &Option<Vector>) -> Result<Vector> {
    let y = map.apply(x)?;
    if !all_finite(&y) {
        return Err(Error::Overflow {
            iterations: n,
            partial: estimate.clone(),
        });
    }
    Ok(y)
}

/// `‖Tᵏx - Tᵏ⁺¹x - v‖` for `k = 0..n`.
pub fn displacement_gaps(map: &FixedPointMap, x: &Vector, v: &Vector, n: usize) -> Result<Vec<f64>> {
    Ok(gaps_with_scale(map, x, v, n)?.0)
}

/// The gaps together with the largest iterate norm met along the way.
fn gaps_with_scale(map: &FixedPointMap, x: &Vector, v: &Vector, n: usize) -> Result<(Vec<f64>, f64)> {
    ensure_dim(map.dim(), v.len())?;
    let mut out = Vec::with_capacity(n);
    let mut cur = x.clone();
    let mut scale = cur.norm();
    for k in 0..n {
        let next = advance(map, &cur, k, &None)?;
        out.push((&cur - &next - v).norm());
        scale = scale.max(next.norm());
        cur = next;
    }
    Ok((out, scale))
}

/// Whether `gaps` is nonincreasing up to rounding, given the size of the
/// iterates that produced it.
pub fn is_nonincreasing(gaps: &[f64], iterate_scale: f64) -> bool {
    gaps.windows(2).all(|w| w[1] <= w[0] + slack(iterate_scale))
}

/// Minimal displacement vector of `x ↦ Lx + b`: `P_{ran(I-L)} b - b`.
pub fn v_affine_closed_form(t: &AffineMap) -> Vector {
    let n = t.dim();
    let m = DMatrix::identity(n, n) - t.linear().matrix();
    let basis = range_basis(&m);
    let b = t.offset();
    crate::convex::project_onto_span(&basis, b) - b
}

/// `Fix(v + T)` for affine `T = L· + b`, as `{x : (I - L)x = b + v}`.
/// Fails when that system has no solution.
pub fn affine_fixed_set(t: &AffineMap, v: &Vector) -> Result<AffineSubspace> {
    ensure_dim(t.dim(), v.len())?;
    let n = t.dim();
    let m = DMatrix::identity(n, n) - t.linear().matrix();
    let rhs = t.offset() + v;
    let svd = m.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let particular = if smax == 0.0 {
        Vector::zeros(n)
    } else {
        svd.solve(&rhs, RANK_CUTOFF * smax).map_err(|e| Error::InvalidArgument(e.to_string()))?
    };
    let residual = (&m * &particular - &rhs).norm();
    if residual > 1e-8 * (1.0 + rhs.norm()) {
        return Err(Error::InvalidArgument(format!(
            "shift is not in the range of Id - T (residual {residual:e})"
        )));
    }
    let kernel = complement_basis(&range_basis(&m.transpose()));
    AffineSubspace::from_columns(particular, &kernel)
}

/// `(v̂_FB, v̂_DR, ‖v̂_FB - v̂_DR‖)` with `budget` iterations for each map.
pub fn v_fb_vs_v_dr(problem: &SplitProblem, x0: &Vector, budget: usize) -> Result<(Vector, Vector, f64)> {
    let stages = 10;
    let len = (budget / stages).max(1);
    let fb = estimate_v_iterative(&FixedPointMap::ForwardBackward(problem.clone()), x0, stages, len)?;
    let dr = estimate_v_iterative(&FixedPointMap::DouglasRachford(problem.clone()), x0, stages, len)?;
    let gap = (&fb.v - &dr.v).norm();
    Ok((fb.v, dr.v, gap))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalStatus {
    NormalSolutionFound,
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NormalSolveReport {
    #[serde(with = "crate::serde_util::vector")]
    pub v: Vector,
    #[serde(with = "crate::serde_util::option_vector")]
    pub z: Option<Vector>,
    pub status: NormalStatus,
    pub perturbed_residual: Option<f64>,
    pub iterations: usize,
    /// Where the trace was written, if it was exported.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub trace_path: Option<String>,
    #[serde(skip)]
    pub trace: IterationTrace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NormalSolveOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub divergence_threshold: f64,
    /// Stages used to estimate `v`; the stage length is `max_iter / v_stages`.
    pub v_stages: usize,
}

impl Default for NormalSolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 100_000,
            divergence_threshold: DIVERGENCE_THRESHOLD,
            v_stages: 10,
        }
    }
}

pub fn normal_solve(problem: &SplitProblem, x0: &Vector, tol: f64, max_iter: usize) -> Result<NormalSolveReport> {
    normal_solve_with(
        problem,
        x0,
        &NormalSolveOptions {
            tol,
            max_iter,
            ..NormalSolveOptions::default()
        },
    )
}

/// Estimates `v` for `T_FB`, then iterates `v + T_FB` from `x0`.
pub fn normal_solve_with(problem: &SplitProblem, x0: &Vector, opts: &NormalSolveOptions) -> Result<NormalSolveReport> {
    let fb = FixedPointMap::ForwardBackward(problem.clone());
    let stages = opts.v_stages.max(1);
    let estimate = estimate_v_iterative(&fb, x0, stages, (opts.max_iter / stages).max(1))?;
    normal_solve_given(problem, x0, estimate.v, opts)
}

/// Iterates `v + T_FB` from `x0` for a given `v`.
pub fn normal_solve_given(
    problem: &SplitProblem,
    x0: &Vector,
    v: Vector,
    opts: &NormalSolveOptions,
) -> Result<NormalSolveReport> {
    let shifted = FixedPointMap::ForwardBackward(problem.clone()).shifted(v.clone())?;
    let trace = iterate(
        &shifted,
        x0,
        &IterateOptions {
            max_iter: opts.max_iter,
            tol: opts.tol,
            divergence_threshold: opts.divergence_threshold,
            displacement: None,
        },
    )?;
    let (status, z, perturbed_residual) = match trace.stop_reason {
        Some(StopReason::Tolerance) => {
            let z = trace.final_iterate().clone();
            let r = problem.perturbed_residual(&v, &z)?;
            if r <= opts.tol {
                (NormalStatus::NormalSolutionFound, Some(z), Some(r))
            } else {
                (NormalStatus::Inconclusive, Some(z), Some(r))
            }
        }
        Some(StopReason::Divergence) => (NormalStatus::Divergent, None, None),
        _ => {
            let z = trace.final_iterate();
            let r = problem.perturbed_residual(&v, z)?;
            (NormalStatus::Inconclusive, None, Some(r))
        }
    };
    Ok(NormalSolveReport {
        v,
        z,
        status,
        perturbed_residual,
        iterations: trace.iterations,
        trace_path: None,
        trace,
    })
}

/// `(Tⁿx, T^{n²}x - T^{n²+1}x)` from a single pass of `n² + 1` applications.
pub fn accelerated_terms(map: &FixedPointMap, x: &Vector, n: usize) -> Result<(Vector, Vector)> {
    ensure_dim(map.dim(), x.len())?;
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let last = n * n;
    let mut cur = x.clone();
    let mut checkpoint = None;
    for k in 0..last {
        if k == n {
            checkpoint = Some(cur.clone());
        }
        cur = advance(map, &cur, k, &None)?;
    }
    let base = checkpoint.unwrap_or_else(|| cur.clone());
    let next = advance(map, &cur, last, &None)?;
    Ok((base, &cur - next))
}

/// `Tⁿx + n(T^{n²}x - T^{n²+1}x)` for an affine map. Costs `n² + 1`
/// applications of `T`.
pub fn accelerated_estimate(map: &FixedPointMap, x: &Vector, n: usize) -> Result<Vector> {
    if !map.is_affine() {
        return Err(Error::NotAffine);
    }
    let (base, diff) = accelerated_terms(map, x, n)?;
    Ok(base + diff * n as f64)
}

/// Largest `‖Tᵏx + kv - (v + T)ᵏx‖` over `k ≤ n`.
pub fn affine_shifted_iterate_identity_check(t: &AffineMap, x: &Vector, v: &Vector, n: usize) -> Result<f64> {
    ensure_dim(t.dim(), x.len())?;
    ensure_dim(t.dim(), v.len())?;
    let shifted = t.shifted(v)?;
    let (mut plain, mut moved) = (x.clone(), x.clone());
    let mut worst: f64 = 0.0;
    for k in 1..=n {
        plain = t.apply(&plain)?;
        moved = shifted.apply(&moved)?;
        worst = worst.max((&plain + v * k as f64 - &moved).norm());
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub mu: f64,
    pub r_squared: f64,
    /// Iteration indices spanned by the fitted points.
    pub window: (usize, usize),
    pub note: Option<String>,
}

/// Least-squares fit of `log ‖x_n - limit‖ ≈ c + n log μ`.
///
/// Errors at rounding level are excluded, then the first 20% of the remaining
/// points are dropped as transient.
pub fn rate_fit(trace: &IterationTrace, limit: &Vector) -> Result<RateFit> {
    let floor = 1e-13 * (1.0 + limit.norm());
    let mut errors = Vec::with_capacity(trace.iterates.len());
    for p in &trace.iterates {
        ensure_dim(limit.len(), p.x.len())?;
        errors.push((p.n, (&p.x - limit).norm()));
    }
    if !errors.is_empty() && errors.iter().all(|(_, e)| *e == 0.0) {
        let span = (errors[0].0, errors[errors.len() - 1].0);
        return Ok(RateFit {
            mu: 0.0,
            r_squared: 1.0,
            window: span,
            note: Some("iterates coincide with the limit; no rate to fit".into()),
        });
    }
    let usable: Vec<(usize, f64)> = errors.into_iter().filter(|(_, e)| *e > floor).collect();
    if usable.len() < 10 {
        return Err(Error::InvalidArgument(format!(
            "rate fit needs at least 10 iterates with error above {floor:e}, got {}",
            usable.len()
        )));
    }
    let tail = &usable[usable.len() / 5..];
    let pts: Vec<(f64, f64)> = tail.iter().map(|(n, e)| (*n as f64, e.ln())).collect();
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(RateFit {
        mu: slope.exp(),
        r_squared,
        window: (tail[0].0, tail[tail.len() - 1].0),
        note: None,
    })
}

/// Partial sums of `‖Tⁿx - Tⁿ⁺¹x - v‖²` and `‖Tⁿx - Tⁿ⁺¹x - v‖`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summability {
    pub squared: f64,
    pub absolute: f64,
    /// Growth of each sum over the last tenth of the terms.
    pub squared_tail_increase: f64,
    pub absolute_tail_increase: f64,
    /// The squared terms, in order.
    pub squared_terms: Vec<f64>,
}

/// Largest tail increase still counted as a plateau.
pub const PLATEAU_TOL: f64 = 1e-8;

impl Summability {
    pub fn squared_plateaus(&self) -> bool {
        self.squared_tail_increase <= PLATEAU_TOL
    }

    pub fn absolute_plateaus(&self) -> bool {
        self.absolute_tail_increase <= PLATEAU_TOL
    }
}

pub fn summability_check(map: &FixedPointMap, x0: &Vector, v: &Vector, n: usize) -> Result<Summability> {
    let gaps = displacement_gaps(map, x0, v, n)?;
    let head = n - n / 10;
    let squared_terms: Vec<f64> = gaps.iter().map(|g| g * g).collect();
    let squared: f64 = squared_terms.iter().sum();
    let absolute: f64 = gaps.iter().sum();
    Ok(Summability {
        squared,
        absolute,
        squared_tail_increase: squared_terms[head..].iter().sum(),
        absolute_tail_increase: gaps[head..].iter().sum(),
        squared_terms,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnoppTail {
    /// `max n·a_n` over the last tenth of the indices.
    pub tail_max: f64,
    /// `max n·a_n` over indices in `[N/20, N/10)`, for comparison.
    pub early_max: f64,
    pub nonincreasing: bool,
}

impl KnoppTail {
    /// Whether `n·a_n` has at least halved between the early window and the tail.
    pub fn decaying(&self) -> bool {
        self.tail_max <= 0.5 * self.early_max
    }
}

/// `n·a_n` tail diagnostic. `a[k]` is the term with index `k + 1`; only the
/// first `n` terms are used.
pub fn knopp_tail_check(a: &[f64], n: usize) -> Result<KnoppTail> {
    let n = n.min(a.len());
    if n < 20 {
        return Err(Error::InvalidArgument("need at least 20 terms".into()));
    }
    let a = &a[..n];
    let weighted = |range: std::ops::Range<usize>| {
        range
            .map(|k| (k + 1) as f64 * a[k])
            .fold(0.0f64, f64::max)
    };
    Ok(KnoppTail {
        tail_max: weighted(n - n / 10..n),
        early_max: weighted(n / 20..n / 10),
        nonincreasing: a.windows(2).all(|w| w[1] <= w[0]),
    })
}
