//! Fixed-point maps built from an operator pair and the iteration engine.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::convex::{all_finite, AffineMap, ConvexSet, LinearMap, Vector};
use crate::error::{ensure_dim, Error, Result};
use crate::operators::{check_cocoercive, sample_pairs, MonotoneOp};
use crate::tolerance::{DIVERGENCE_CONFIRMATIONS, DIVERGENCE_THRESHOLD, INVARIANT_TOL, TRACE_CAP};

/// Sample pairs used when validating that `A` is firmly nonexpansive.
const FNE_SAMPLES: usize = 256;
const FNE_SEED: u64 = 0x5eed;

/// An ordered pair `(A, B)` for the inclusion `0 ∈ Ax + Bx`, with `A`
/// single-valued and firmly nonexpansive.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitProblem {
    a: MonotoneOp,
    b: MonotoneOp,
}

impl SplitProblem {
    pub fn new(a: MonotoneOp, b: MonotoneOp) -> Result<Self> {
        a.validate()?;
        b.validate()?;
        ensure_dim(a.dim(), b.dim())?;
        if !a.is_single_valued() {
            return Err(Error::NotSingleValued);
        }
        let w = check_cocoercive(&a, 1.0, FNE_SAMPLES, FNE_SEED)?;
        if !w.passed() {
            return Err(Error::NotFirmlyNonexpansive {
                max_violation: w.max_violation,
                samples: w.samples_checked,
            });
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> &MonotoneOp {
        &self.a
    }

    pub fn b(&self) -> &MonotoneOp {
        &self.b
    }

    pub fn dim(&self) -> usize {
        self.a.dim()
    }

    /// `J_B(x - Ax)`
    pub fn t_fb(&self, x: &Vector) -> Result<Vector> {
        let forward = x - self.a.apply(x)?;
        self.b.resolvent(&forward)
    }

    /// `x - J_A x + J_B(R_A x)`
    pub fn t_dr(&self, x: &Vector) -> Result<Vector> {
        let ja = self.a.resolvent(x)?;
        let reflected = &ja * 2.0 - x;
        Ok(x - ja + self.b.resolvent(&reflected)?)
    }

    /// `‖x - w - T_FB x‖`; zero exactly when `w ∈ Ax + B(x - w)`.
    pub fn perturbed_residual(&self, w: &Vector, x: &Vector) -> Result<f64> {
        ensure_dim(self.dim(), w.len())?;
        Ok((x - w - self.t_fb(x)?).norm())
    }

    /// The pair `(-w + A, B(· - w))`, whose forward-backward map is `w + T_FB`.
    pub fn shifted(&self, w: &Vector) -> Result<Self> {
        ensure_dim(self.dim(), w.len())?;
        Self::new(
            self.a.clone().outer_shift(w.clone()),
            self.b.clone().inner_shift(w.clone()),
        )
    }

    /// The dual pair `(A⁻¹, -B⁻¹(-·))`. Requires `A⁻¹` to be single-valued
    /// and firmly nonexpansive.
    pub fn dual(&self) -> Result<Self> {
        Self::new(self.a.clone().inverse(), self.b.clone().dual_inverse())
    }

    /// Largest violation of the 2/3-averagedness inequality of `T_FB` over
    /// sampled pairs.
    pub fn averagedness_defect(&self, samples: usize, seed: u64) -> Result<f64> {
        averagedness_defect(&FixedPointMap::ForwardBackward(self.clone()), 2.0 / 3.0, samples, seed)
    }

    /// Iterates `T_FB` from `x0` until the step drops below `tol`.
    pub fn solve_primal(&self, x0: &Vector, tol: f64, max_iter: usize) -> Result<Solution> {
        let map = FixedPointMap::ForwardBackward(self.clone());
        let trace = iterate(
            &map,
            x0,
            &IterateOptions {
                max_iter,
                tol,
                ..IterateOptions::default()
            },
        )?;
        if trace.stop_reason != Some(StopReason::Tolerance) {
            return Err(Error::NotConverged { trace: Box::new(trace) });
        }
        let z = trace.final_iterate().clone();
        let primal_residual = (&z - self.t_fb(&z)?).norm();
        let dual_point = self.a.apply(&z)?;
        Ok(Solution {
            z,
            primal_residual,
            dual_point,
            trace,
        })
    }
}

/// A primal solution `z` and the corresponding dual point `Az`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Solution {
    #[serde(with = "crate::serde_util::vector")]
    pub z: Vector,
    pub primal_residual: f64,
    #[serde(with = "crate::serde_util::vector")]
    pub dual_point: Vector,
    #[serde(skip)]
    pub trace: IterationTrace,
}

/// Nonexpansive self-maps of R^n whose orbits the toolkit studies.
#[derive(Debug, Clone, PartialEq)]
pub enum FixedPointMap {
    ForwardBackward(SplitProblem),
    DouglasRachford(SplitProblem),
    /// `P_second ∘ P_first`
    AlternatingProjections { first: ConvexSet, second: ConvexSet },
    /// `x ↦ shift + inner(x)`
    Shifted { inner: Box<FixedPointMap>, shift: Vector },
    /// An explicit affine map with nonexpansive linear part.
    Affine(AffineMap),
}

impl FixedPointMap {
    pub fn alternating_projections(first: ConvexSet, second: ConvexSet) -> Result<Self> {
        first.validate()?;
        second.validate()?;
        ensure_dim(first.dim(), second.dim())?;
        Ok(FixedPointMap::AlternatingProjections { first, second })
    }

    pub fn affine(map: AffineMap) -> Result<Self> {
        if !map.linear().is_nonexpansive() {
            return Err(Error::InvalidArgument(format!(
                "affine map has operator norm {} > 1",
                map.linear().operator_norm()
            )));
        }
        Ok(FixedPointMap::Affine(map))
    }

    pub fn shifted(self, shift: Vector) -> Result<Self> {
        ensure_dim(self.dim(), shift.len())?;
        if !all_finite(&shift) {
            return Err(Error::NonFinite("map shift"));
        }
        Ok(FixedPointMap::Shifted {
            inner: Box::new(self),
            shift,
        })
    }

    pub fn dim(&self) -> usize {
        match self {
            FixedPointMap::ForwardBackward(p) | FixedPointMap::DouglasRachford(p) => p.dim(),
            FixedPointMap::AlternatingProjections { first, .. } => first.dim(),
            FixedPointMap::Shifted { inner, .. } => inner.dim(),
            FixedPointMap::Affine(m) => m.dim(),
        }
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        ensure_dim(self.dim(), x.len())?;
        match self {
            FixedPointMap::ForwardBackward(p) => p.t_fb(x),
            FixedPointMap::DouglasRachford(p) => p.t_dr(x),
            FixedPointMap::AlternatingProjections { first, second } => second.project(&first.project(x)?),
            FixedPointMap::Shifted { inner, shift } => Ok(shift + inner.apply(x)?),
            FixedPointMap::Affine(m) => m.apply(x),
        }
    }

    /// Whether the map is affine by construction.
    pub fn is_affine(&self) -> bool {
        match self {
            FixedPointMap::ForwardBackward(p) => p.a().is_affine() && p.b().has_affine_resolvent(),
            FixedPointMap::DouglasRachford(p) => p.a().has_affine_resolvent() && p.b().has_affine_resolvent(),
            FixedPointMap::AlternatingProjections { first, second } => first.is_affine() && second.is_affine(),
            FixedPointMap::Shifted { inner, .. } => inner.is_affine(),
            FixedPointMap::Affine(_) => true,
        }
    }

    /// The map as `x ↦ Lx + b`, read off from its values at `0` and the unit
    /// vectors.
    pub fn affine_representation(&self) -> Result<AffineMap> {
        if let FixedPointMap::Affine(m) = self {
            return Ok(m.clone());
        }
        if !self.is_affine() {
            return Err(Error::NotAffine);
        }
        let n = self.dim();
        let offset = self.apply(&Vector::zeros(n))?;
        let mut l = DMatrix::zeros(n, n);
        for j in 0..n {
            let col = self.apply(&Vector::from_fn(n, |i, _| if i == j { 1.0 } else { 0.0 }))? - &offset;
            l.set_column(j, &col);
        }
        AffineMap::new(LinearMap::new(l)?, offset)
    }

    /// `x, Tx, T²x, ...`
    pub fn orbit(&self, x0: &Vector) -> Orbit<'_> {
        Orbit {
            map: self,
            next: Some(Ok(x0.clone())),
        }
    }

    /// `Tⁿx`
    pub fn power(&self, x: &Vector, n: usize) -> Result<Vector> {
        let mut y = x.clone();
        for _ in 0..n {
            y = self.apply(&y)?;
        }
        Ok(y)
    }
}

/// Iterator over the orbit of a point; stops after the first error.
pub struct Orbit<'a> {
    map: &'a FixedPointMap,
    next: Option<Result<Vector>>,
}

impl Iterator for Orbit<'_> {
    type Item = Result<Vector>;

    fn next(&mut self) -> Option<Self::Item> {
        let current = self.next.take()?;
        if let Ok(x) = &current {
            self.next = Some(self.map.apply(x));
        }
        Some(current)
    }
}

/// Largest value of `‖Tx-Ty‖² + ((1-α)/α)‖(x-Tx)-(y-Ty)‖² - ‖x-y‖²` over
/// sampled pairs. Nonpositive (up to rounding) iff `T` looks α-averaged.
pub fn averagedness_defect(map: &FixedPointMap, alpha: f64, samples: usize, seed: u64) -> Result<f64> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("averagedness constant must lie in (0, 1), got {alpha}")));
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample pair".into()));
    }
    let mut worst = f64::NEG_INFINITY;
    for (x, y) in sample_pairs(map.dim(), samples, seed) {
        let tx = map.apply(&x)?;
        let ty = map.apply(&y)?;
        let moved = (&x - &tx) - (&y - &ty);
        let defect = (&tx - &ty).norm_squared() + (1.0 - alpha) / alpha * moved.norm_squared() - (&x - &y).norm_squared();
        worst = worst.max(defect);
    }
    Ok(worst)
}

/// Whether an averagedness defect counts as satisfied.
pub fn defect_ok(defect: f64) -> bool {
    defect <= INVARIANT_TOL
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Tolerance,
    MaxIter,
    Divergence,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterateOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub divergence_threshold: f64,
    /// When set, the trace also records `‖x_n - x_{n+1} - v‖`.
    pub displacement: Option<Vector>,
}

impl Default for IterateOptions {
    fn default() -> Self {
        Self {
            max_iter: 100_000,
            tol: 1e-8,
            divergence_threshold: DIVERGENCE_THRESHOLD,
            displacement: None,
        }
    }
}

/// Stored iterates of a run. Every stored iterate except the last carries the
/// step norm `‖x_n - x_{n+1}‖` taken from it. Past [`TRACE_CAP`] stored points
/// every other point is dropped and the sampling stride doubles.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    pub iterates: Vec<TracePoint>,
    pub step_norms: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub displacement_residuals: Option<Vec<f64>>,
    pub stop_reason: Option<StopReason>,
    /// Number of map applications performed.
    pub iterations: usize,
    stride: usize,
    last_step: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub n: usize,
    #[serde(with = "crate::serde_util::vector")]
    pub x: Vector,
}

impl IterationTrace {
    fn new(track_displacement: bool) -> Self {
        Self {
            displacement_residuals: track_displacement.then(Vec::new),
            stride: 1,
            ..Self::default()
        }
    }

    fn record(&mut self, n: usize, x: &Vector, step: f64, disp: Option<f64>) {
        self.last_step = Some(step);
        if n % self.stride != 0 {
            return;
        }
        if self.iterates.len() >= TRACE_CAP {
            self.thin();
            if n % self.stride != 0 {
                return;
            }
        }
        self.iterates.push(TracePoint { n, x: x.clone() });
        self.step_norms.push(step);
        if let (Some(r), Some(d)) = (self.displacement_residuals.as_mut(), disp) {
            r.push(d);
        }
    }

    fn thin(&mut self) {
        fn keep_even<T>(v: &mut Vec<T>) {
            let mut i = 0;
            v.retain(|_| {
                i += 1;
                (i - 1) % 2 == 0
            });
        }
        keep_even(&mut self.iterates);
        keep_even(&mut self.step_norms);
        if let Some(r) = self.displacement_residuals.as_mut() {
            keep_even(r);
        }
        self.stride *= 2;
    }

    fn finish(&mut self, n: usize, x: Vector, reason: StopReason) {
        self.iterates.push(TracePoint { n, x });
        self.iterations = n;
        self.stop_reason = Some(reason);
    }

    /// Step norm of the last map application (even if it was not stored).
    pub fn last_step_norm(&self) -> Option<f64> {
        self.last_step
    }

    pub fn final_iterate(&self) -> &Vector {
        &self.iterates.last().expect("a finished trace holds its final iterate").x
    }

    /// `stop_reason` of a finished trace.
    pub fn stopped_by(&self) -> Option<StopReason> {
        self.stop_reason
    }

    /// CSV rendering: header `n,step_norm,displacement_residual,x_0,...`,
    /// numbers with 17 significant digits, empty cells where a value does not
    /// exist.
    pub fn to_csv(&self) -> String {
        let dim = self.iterates.first().map_or(0, |p| p.x.len());
        let mut out = String::from("n,step_norm,displacement_residual");
        for i in 0..dim {
            let _ = write!(out, ",x_{i}");
        }
        out.push('\n');
        for (k, p) in self.iterates.iter().enumerate() {
            let _ = write!(out, "{}", p.n);
            match self.step_norms.get(k) {
                Some(s) => {
                    let _ = write!(out, ",{s:.16e}");
                }
                None => out.push(','),
            }
            match self.displacement_residuals.as_ref().and_then(|r| r.get(k)) {
                Some(d) => {
                    let _ = write!(out, ",{d:.16e}");
                }
                None => out.push(','),
            }
            for c in p.x.iter() {
                let _ = write!(out, ",{c:.16e}");
            }
            out.push('\n');
        }
        out
    }
}

pub fn iterate(map: &FixedPointMap, x0: &Vector, opts: &IterateOptions) -> Result<IterationTrace> {
    ensure_dim(map.dim(), x0.len())?;
    if opts.max_iter == 0 {
        return Err(Error::InvalidArgument("max_iter must be at least 1".into()));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidArgument("tol must be positive".into()));
    }
    if let Some(v) = &opts.displacement {
        ensure_dim(map.dim(), v.len())?;
    }
    let mut trace = IterationTrace::new(opts.displacement.is_some());
    let mut x = x0.clone();
    let mut far = 0;
    for n in 0.. {
        if n == opts.max_iter {
            trace.finish(n, x, StopReason::MaxIter);
            break;
        }
        let y = match map.apply(&x) {
            Ok(y) => y,
            Err(source) => {
                trace.finish(n, x, StopReason::MaxIter);
                return Err(Error::Aborted {
                    source: Box::new(source),
                    trace: Box::new(trace),
                });
            }
        };
        if !all_finite(&y) {
            return Err(Error::Overflow {
                iterations: n,
                partial: Some(x),
            });
        }
        let diff = &x - &y;
        let step = diff.norm();
        let disp = opts.displacement.as_ref().map(|v| (&diff - v).norm());
        trace.record(n, &x, step, disp);
        x = y;
        if step <= opts.tol {
            trace.finish(n + 1, x, StopReason::Tolerance);
            break;
        }
        if x.norm() >= opts.divergence_threshold {
            far += 1;
            if far >= DIVERGENCE_CONFIRMATIONS {
                trace.finish(n + 1, x, StopReason::Divergence);
                break;
            }
        } else {
            far = 0;
        }
    }
    Ok(trace)
}
