//! Maximally monotone operators with computable resolvents.
//!
//! Set-valued operators (normal cones, inverses of non-invertible maps) only
//! answer resolvent queries; calling [`MonotoneOp::apply`] on them is an error.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::convex::{all_finite, AffineMap, ConvexSet, LinearMap, Vector};
use crate::error::{ensure_dim, Error, Result};
use crate::tolerance::INVARIANT_TOL;

/// Standard deviation of the Gaussian used to sample test points.
pub const SAMPLE_SCALE: f64 = 10.0;

/// `x ↦ Lx + b` with monotone linear part (`L + Lᵀ` positive semidefinite).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AffineMap", into = "AffineMap")]
pub struct AffineOp(AffineMap);

/// Smallest allowed eigenvalue of the symmetric part of an affine operator.
const MONOTONE_SLACK: f64 = 1e-10;

impl AffineOp {
    pub fn new(map: AffineMap) -> Result<Self> {
        let min_eigenvalue = map.linear().min_symmetric_eigenvalue();
        if min_eigenvalue < -MONOTONE_SLACK {
            return Err(Error::NotMonotone { min_eigenvalue });
        }
        Ok(Self(map))
    }

    pub fn map(&self) -> &AffineMap {
        &self.0
    }
}

impl TryFrom<AffineMap> for AffineOp {
    type Error = Error;

    fn try_from(map: AffineMap) -> Result<Self> {
        Self::new(map)
    }
}

impl From<AffineOp> for AffineMap {
    fn from(op: AffineOp) -> Self {
        op.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MonotoneOp {
    Affine(AffineOp),
    Const {
        #[serde(with = "crate::serde_util::vector")]
        value: Vector,
    },
    NormalCone {
        set: ConvexSet,
    },
    /// `x ↦ x - P x`
    GradHalfDistSq {
        set: ConvexSet,
    },
    Scaled {
        alpha: f64,
        inner: Box<MonotoneOp>,
    },
    /// `x ↦ inner(x - shift)`
    InnerShift {
        #[serde(with = "crate::serde_util::vector")]
        shift: Vector,
        inner: Box<MonotoneOp>,
    },
    /// `x ↦ -shift + inner(x)`
    OuterShift {
        #[serde(with = "crate::serde_util::vector")]
        shift: Vector,
        inner: Box<MonotoneOp>,
    },
    /// Acts independently on consecutive coordinate blocks.
    Blockwise {
        parts: Vec<MonotoneOp>,
    },
    /// The inverse relation.
    Inverse {
        inner: Box<MonotoneOp>,
    },
    /// `x ↦ -inner⁻¹(-x)`, the operator paired with `inner` in the dual inclusion.
    DualInverse {
        inner: Box<MonotoneOp>,
    },
}

impl MonotoneOp {
    pub fn affine(linear: LinearMap, offset: Vector) -> Result<Self> {
        Ok(MonotoneOp::Affine(AffineOp::new(AffineMap::new(linear, offset)?)?))
    }

    pub fn constant(value: Vector) -> Self {
        MonotoneOp::Const { value }
    }

    pub fn zero(dim: usize) -> Self {
        MonotoneOp::Const {
            value: Vector::zeros(dim),
        }
    }

    pub fn identity(dim: usize) -> Self {
        MonotoneOp::Affine(AffineOp(AffineMap::new(LinearMap::identity(dim), Vector::zeros(dim)).expect("identity")))
    }

    pub fn normal_cone(set: ConvexSet) -> Self {
        MonotoneOp::NormalCone { set }
    }

    pub fn grad_half_dist_sq(set: ConvexSet) -> Self {
        MonotoneOp::GradHalfDistSq { set }
    }

    pub fn scaled(self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidArgument(format!("scale must be positive and finite, got {alpha}")));
        }
        Ok(MonotoneOp::Scaled {
            alpha,
            inner: Box::new(self),
        })
    }

    pub fn inner_shift(self, shift: Vector) -> Self {
        MonotoneOp::InnerShift {
            shift,
            inner: Box::new(self),
        }
    }

    pub fn outer_shift(self, shift: Vector) -> Self {
        MonotoneOp::OuterShift {
            shift,
            inner: Box::new(self),
        }
    }

    pub fn inverse(self) -> Self {
        MonotoneOp::Inverse { inner: Box::new(self) }
    }

    pub fn dual_inverse(self) -> Self {
        MonotoneOp::DualInverse { inner: Box::new(self) }
    }

    /// For an affine operator with invertible linear part, the inverse as an
    /// explicit affine operator `y ↦ L⁻¹(y - b)`.
    pub fn affine_inverse(&self) -> Result<Self> {
        let MonotoneOp::Affine(op) = self else {
            return Err(Error::Unsupported("explicit inverse of a non-affine operator".into()));
        };
        let l = op.map().linear().matrix();
        let inv = l.clone().try_inverse().ok_or_else(|| Error::Singular {
            condition: condition_estimate(l),
        })?;
        let offset = -(&inv * op.map().offset());
        MonotoneOp::affine(LinearMap::new(inv)?, offset)
    }

    pub fn dim(&self) -> usize {
        match self {
            MonotoneOp::Affine(op) => op.map().dim(),
            MonotoneOp::Const { value } => value.len(),
            MonotoneOp::NormalCone { set } | MonotoneOp::GradHalfDistSq { set } => set.dim(),
            MonotoneOp::Scaled { inner, .. }
            | MonotoneOp::Inverse { inner }
            | MonotoneOp::DualInverse { inner } => inner.dim(),
            MonotoneOp::InnerShift { shift, .. } | MonotoneOp::OuterShift { shift, .. } => shift.len(),
            MonotoneOp::Blockwise { parts } => parts.iter().map(MonotoneOp::dim).sum(),
        }
    }

    /// Structural checks on the whole expression tree.
    pub fn validate(&self) -> Result<()> {
        match self {
            MonotoneOp::Affine(_) => Ok(()),
            MonotoneOp::Const { value } => {
                if value.is_empty() {
                    return Err(Error::InvalidArgument("constant operator needs dimension >= 1".into()));
                }
                if !all_finite(value) {
                    return Err(Error::NonFinite("constant operator"));
                }
                Ok(())
            }
            MonotoneOp::NormalCone { set } | MonotoneOp::GradHalfDistSq { set } => set.validate(),
            MonotoneOp::Scaled { alpha, inner } => {
                if !(*alpha > 0.0 && alpha.is_finite()) {
                    return Err(Error::InvalidArgument(format!("scale must be positive and finite, got {alpha}")));
                }
                inner.validate()
            }
            MonotoneOp::InnerShift { shift, inner } | MonotoneOp::OuterShift { shift, inner } => {
                inner.validate()?;
                ensure_dim(inner.dim(), shift.len())?;
                if !all_finite(shift) {
                    return Err(Error::NonFinite("operator shift"));
                }
                Ok(())
            }
            MonotoneOp::Blockwise { parts } => {
                if parts.is_empty() {
                    return Err(Error::InvalidArgument("blockwise operator needs at least one part".into()));
                }
                parts.iter().try_for_each(MonotoneOp::validate)
            }
            MonotoneOp::Inverse { inner } | MonotoneOp::DualInverse { inner } => inner.validate(),
        }
    }

    /// Whether [`MonotoneOp::apply`] is available.
    pub fn is_single_valued(&self) -> bool {
        match self {
            MonotoneOp::Affine(_) | MonotoneOp::Const { .. } | MonotoneOp::GradHalfDistSq { .. } => true,
            MonotoneOp::NormalCone { .. } => false,
            MonotoneOp::Scaled { inner, .. }
            | MonotoneOp::InnerShift { inner, .. }
            | MonotoneOp::OuterShift { inner, .. } => inner.is_single_valued(),
            MonotoneOp::Blockwise { parts } => parts.iter().all(MonotoneOp::is_single_valued),
            MonotoneOp::Inverse { inner } | MonotoneOp::DualInverse { inner } => {
                matches!(inner.as_ref(), MonotoneOp::Affine(op) if op.map().linear().matrix().clone().try_inverse().is_some())
            }
        }
    }

    /// Whether the operator is single-valued and affine.
    pub fn is_affine(&self) -> bool {
        match self {
            MonotoneOp::Affine(_) | MonotoneOp::Const { .. } => true,
            MonotoneOp::GradHalfDistSq { set } => set.is_affine(),
            MonotoneOp::NormalCone { .. } => false,
            MonotoneOp::Scaled { inner, .. }
            | MonotoneOp::InnerShift { inner, .. }
            | MonotoneOp::OuterShift { inner, .. } => inner.is_affine(),
            MonotoneOp::Blockwise { parts } => parts.iter().all(MonotoneOp::is_affine),
            MonotoneOp::Inverse { .. } | MonotoneOp::DualInverse { .. } => self.is_single_valued(),
        }
    }

    /// Whether the resolvent is an affine map.
    pub fn has_affine_resolvent(&self) -> bool {
        match self {
            MonotoneOp::Affine(_) | MonotoneOp::Const { .. } => true,
            MonotoneOp::NormalCone { set } | MonotoneOp::GradHalfDistSq { set } => set.is_affine(),
            MonotoneOp::Scaled { inner, .. }
            | MonotoneOp::InnerShift { inner, .. }
            | MonotoneOp::OuterShift { inner, .. }
            | MonotoneOp::Inverse { inner }
            | MonotoneOp::DualInverse { inner } => inner.has_affine_resolvent(),
            MonotoneOp::Blockwise { parts } => parts.iter().all(MonotoneOp::has_affine_resolvent),
        }
    }

    pub fn apply(&self, x: &Vector) -> Result<Vector> {
        ensure_dim(self.dim(), x.len())?;
        match self {
            MonotoneOp::Affine(op) => op.map().apply(x),
            MonotoneOp::Const { value } => Ok(value.clone()),
            MonotoneOp::NormalCone { .. } => Err(Error::NotSingleValued),
            MonotoneOp::GradHalfDistSq { set } => set.grad_half_dist_sq(x),
            MonotoneOp::Scaled { alpha, inner } => Ok(inner.apply(x)? * *alpha),
            MonotoneOp::InnerShift { shift, inner } => inner.apply(&(x - shift)),
            MonotoneOp::OuterShift { shift, inner } => Ok(inner.apply(x)? - shift),
            MonotoneOp::Blockwise { parts } => blockwise(parts, x, |p, b| p.apply(b)),
            MonotoneOp::Inverse { inner } => match inner.as_ref() {
                MonotoneOp::Affine(op) => solve_linear(op.map().linear().matrix(), &(x - op.map().offset())),
                _ => Err(Error::NotSingleValued),
            },
            MonotoneOp::DualInverse { inner } => match inner.as_ref() {
                MonotoneOp::Affine(op) => solve_linear(op.map().linear().matrix(), &(x + op.map().offset())),
                _ => Err(Error::NotSingleValued),
            },
        }
    }

    /// `(Id + A)⁻¹ x`
    pub fn resolvent(&self, x: &Vector) -> Result<Vector> {
        ensure_dim(self.dim(), x.len())?;
        self.resolvent_scaled(1.0, x)
    }

    /// `(Id + λA)⁻¹ x` for `λ > 0`.
    pub fn resolvent_scaled(&self, lambda: f64, x: &Vector) -> Result<Vector> {
        match self {
            MonotoneOp::Affine(op) => {
                let m = op.map();
                let n = m.dim();
                let lhs = DMatrix::identity(n, n) + m.linear().matrix() * lambda;
                solve_linear(&lhs, &(x - m.offset() * lambda))
            }
            MonotoneOp::Const { value } => Ok(x - value * lambda),
            MonotoneOp::NormalCone { set } => set.project(x),
            MonotoneOp::GradHalfDistSq { set } => {
                let p = set.project(x)?;
                Ok(x + (p - x) * (lambda / (1.0 + lambda)))
            }
            MonotoneOp::Scaled { alpha, inner } => inner.resolvent_scaled(lambda * alpha, x),
            MonotoneOp::InnerShift { shift, inner } => Ok(shift + inner.resolvent_scaled(lambda, &(x - shift))?),
            MonotoneOp::OuterShift { shift, inner } => inner.resolvent_scaled(lambda, &(x + shift * lambda)),
            MonotoneOp::Blockwise { parts } => blockwise(parts, x, |p, b| p.resolvent_scaled(lambda, b)),
            MonotoneOp::Inverse { inner } => {
                let j = inner.resolvent_scaled(1.0 / lambda, &(x / lambda))?;
                Ok(x - j * lambda)
            }
            MonotoneOp::DualInverse { inner } => {
                let j = inner.resolvent_scaled(1.0 / lambda, &(-x / lambda))?;
                Ok(x + j * lambda)
            }
        }
    }

    /// `2 J_A x - x`
    pub fn reflected_resolvent(&self, x: &Vector) -> Result<Vector> {
        Ok(self.resolvent(x)? * 2.0 - x)
    }

    /// `x - J_A x`, which is the resolvent of the inverse relation.
    pub fn inverse_resolvent_complement(&self, x: &Vector) -> Result<Vector> {
        Ok(x - self.resolvent(x)?)
    }

    /// Resolvent of the dual partner `-A⁻¹(-·)`, computed as `x + J_A(-x)`.
    pub fn dual_resolvent(&self, x: &Vector) -> Result<Vector> {
        Ok(x + self.resolvent(&-x)?)
    }
}

impl ConvexSet {
    /// Whether the set is an affine subspace (so its projector is affine).
    pub fn is_affine(&self) -> bool {
        match self {
            ConvexSet::AffineSubspace(_) | ConvexSet::Diagonal { .. } => true,
            ConvexSet::Translate { inner, .. } => inner.is_affine(),
            ConvexSet::Product { parts } => parts.iter().all(ConvexSet::is_affine),
            _ => false,
        }
    }
}

fn blockwise(
    parts: &[MonotoneOp],
    x: &Vector,
    mut f: impl FnMut(&MonotoneOp, &Vector) -> Result<Vector>,
) -> Result<Vector> {
    let mut out = Vector::zeros(x.len());
    let mut start = 0;
    for p in parts {
        let d = p.dim();
        let y = f(p, &x.rows(start, d).into_owned())?;
        out.rows_mut(start, d).copy_from(&y);
        start += d;
    }
    Ok(out)
}

fn condition_estimate(m: &DMatrix<f64>) -> f64 {
    let s = m.clone().svd(false, false).singular_values;
    let min = s.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        s.max() / min
    }
}

pub(crate) fn solve_linear(m: &DMatrix<f64>, rhs: &Vector) -> Result<Vector> {
    let singular = || Error::Singular {
        condition: condition_estimate(m),
    };
    let y = m.clone().lu().solve(rhs).ok_or_else(singular)?;
    if !all_finite(&y) {
        return Err(singular());
    }
    Ok(y)
}

/// Outcome of a sampled cocoercivity test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CocoercivityWitness {
    pub alpha: f64,
    pub samples_checked: usize,
    /// Largest value of `‖Tx - Ty‖² - ⟨x - y, Tx - Ty⟩` seen, with `T = αA`.
    pub max_violation: f64,
}

impl CocoercivityWitness {
    pub fn passed(&self) -> bool {
        self.max_violation <= INVARIANT_TOL
    }
}

/// Pairs of points drawn from an isotropic Gaussian with standard deviation
/// [`SAMPLE_SCALE`], reproducible from `seed`.
pub fn sample_pairs(dim: usize, n: usize, seed: u64) -> Vec<(Vector, Vector)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, SAMPLE_SCALE).expect("valid normal");
    let mut draw = || Vector::from_fn(dim, |_, _| normal.sample(&mut rng));
    (0..n).map(|_| (draw(), draw())).collect()
}

/// Tests `‖Tx - Ty‖² ≤ ⟨x - y, Tx - Ty⟩` on `n_samples` random pairs.
pub fn check_firmly_nonexpansive<F>(map: F, dim: usize, n_samples: usize, seed: u64) -> Result<CocoercivityWitness>
where
    F: Fn(&Vector) -> Result<Vector>,
{
    if n_samples == 0 {
        return Err(Error::InvalidArgument("need at least one sample pair".into()));
    }
    let mut max_violation = f64::NEG_INFINITY;
    for (x, y) in sample_pairs(dim, n_samples, seed) {
        let d = map(&x)? - map(&y)?;
        let violation = d.norm_squared() - (&x - &y).dot(&d);
        max_violation = max_violation.max(violation);
    }
    Ok(CocoercivityWitness {
        alpha: 1.0,
        samples_checked: n_samples,
        max_violation,
    })
}

/// Tests whether `alpha * op` is firmly nonexpansive.
pub fn check_cocoercive(op: &MonotoneOp, alpha: f64, n_samples: usize, seed: u64) -> Result<CocoercivityWitness> {
    let w = check_firmly_nonexpansive(|x| Ok(op.apply(x)? * alpha), op.dim(), n_samples, seed)?;
    Ok(CocoercivityWitness { alpha, ..w })
}

/// `(αA, αB)`: same zeros of the sum, rescaled so that a cocoercive `A`
/// becomes firmly nonexpansive.
pub fn cocoercive_rescale(a: MonotoneOp, b: MonotoneOp, alpha: f64) -> Result<(MonotoneOp, MonotoneOp)> {
    Ok((a.scaled(alpha)?, b.scaled(alpha)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convex::{vector, AffineSubspace};

    fn close(a: &Vector, b: &Vector, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    fn x_axis() -> ConvexSet {
        ConvexSet::AffineSubspace(AffineSubspace::line(vector(&[0.0, 0.0]), vector(&[1.0, 0.0])).unwrap())
    }

    #[test]
    fn apply_examples() {
        let a = vector(&[1.0, -2.0]);
        let x = vector(&[3.0, 4.0]);
        assert_eq!(MonotoneOp::constant(a.clone()).apply(&x).unwrap(), a);
        assert_eq!(MonotoneOp::identity(2).apply(&x).unwrap(), x);
        let g = MonotoneOp::grad_half_dist_sq(ConvexSet::HyperbolaEpigraph);
        assert!(close(&g.apply(&vector(&[0.0, 0.0])).unwrap(), &vector(&[-1.0, -1.0]), 1e-12));
        assert!(matches!(
            MonotoneOp::normal_cone(x_axis()).apply(&x),
            Err(Error::NotSingleValued)
        ));
    }

    #[test]
    fn shift_and_scale_compose() {
        let w = vector(&[0.5, 1.0]);
        let x = vector(&[3.0, 4.0]);
        let base = MonotoneOp::grad_half_dist_sq(ConvexSet::nonneg_orthant(2));
        let inner = base.clone().inner_shift(w.clone());
        assert_eq!(inner.apply(&x).unwrap(), base.apply(&(&x - &w)).unwrap());
        let outer = base.clone().outer_shift(w.clone());
        assert_eq!(outer.apply(&x).unwrap(), base.apply(&x).unwrap() - &w);
        let two = MonotoneOp::affine(LinearMap::scaled_identity(2, 2.0), Vector::zeros(2)).unwrap();
        let (half, _) = cocoercive_rescale(two, MonotoneOp::zero(2), 0.5).unwrap();
        assert!(close(&half.apply(&x).unwrap(), &x, 1e-15));
        assert!(cocoercive_rescale(MonotoneOp::zero(2), MonotoneOp::zero(2), 0.0).is_err());
    }

    #[test]
    fn resolvent_examples() {
        let x = vector(&[3.0, -4.0]);
        let nc = MonotoneOp::normal_cone(ConvexSet::nonneg_orthant(2));
        assert_eq!(nc.resolvent(&x).unwrap(), vector(&[3.0, 0.0]));
        let b = vector(&[0.0, 1.0]);
        let c = MonotoneOp::constant(b.clone());
        assert_eq!(c.resolvent(&x).unwrap(), &x - &b);
        let id = MonotoneOp::identity(2);
        assert!(close(&id.resolvent(&x).unwrap(), &(&x / 2.0), 1e-15));
    }

    #[test]
    fn reflected_resolvent_examples() {
        let x = vector(&[3.0, -4.0]);
        assert!(MonotoneOp::identity(2).reflected_resolvent(&x).unwrap().norm() < 1e-15);
        let v = MonotoneOp::normal_cone(x_axis());
        assert!(close(&v.reflected_resolvent(&x).unwrap(), &vector(&[3.0, 4.0]), 1e-14));
        let b = vector(&[1.0, 1.0]);
        let c = MonotoneOp::constant(b.clone());
        assert_eq!(c.reflected_resolvent(&x).unwrap(), &x - &b * 2.0);
    }

    #[test]
    fn inverse_and_dual_resolvents() {
        let x = vector(&[3.0, -4.0]);
        let nc = MonotoneOp::normal_cone(ConvexSet::nonneg_orthant(2));
        assert_eq!(nc.inverse_resolvent_complement(&x).unwrap(), vector(&[0.0, -4.0]));
        let id = MonotoneOp::identity(2);
        assert!(close(&id.inverse_resolvent_complement(&x).unwrap(), &(&x / 2.0), 1e-15));
        let b = vector(&[1.0, 2.0]);
        assert_eq!(MonotoneOp::constant(b.clone()).inverse_resolvent_complement(&x).unwrap(), b);

        let v = MonotoneOp::normal_cone(x_axis());
        assert!(close(&v.dual_resolvent(&x).unwrap(), &vector(&[0.0, -4.0]), 1e-14));
        assert!(MonotoneOp::zero(2).dual_resolvent(&x).unwrap().norm() < 1e-15);
        assert!(close(&id.dual_resolvent(&x).unwrap(), &(&x / 2.0), 1e-15));

        // the catalog variants agree with the direct formulas
        assert_eq!(v.clone().dual_inverse().resolvent(&x).unwrap(), v.dual_resolvent(&x).unwrap());
        assert_eq!(nc.clone().inverse().resolvent(&x).unwrap(), nc.inverse_resolvent_complement(&x).unwrap());
    }

    #[test]
    fn affine_inverse_matches_complement() {
        let l = LinearMap::from_rows(&[vec![2.0, 1.0], vec![-1.0, 1.0]]).unwrap();
        let a = MonotoneOp::affine(l, vector(&[1.0, -1.0])).unwrap();
        let inv = a.affine_inverse().unwrap();
        let x = vector(&[0.3, 7.0]);
        assert!(close(&inv.resolvent(&x).unwrap(), &a.inverse_resolvent_complement(&x).unwrap(), 1e-12));
        // apply of the symbolic inverse agrees with the explicit one
        let sym = a.clone().inverse();
        assert!(close(&sym.apply(&x).unwrap(), &inv.apply(&x).unwrap(), 1e-12));
        assert!(close(&a.apply(&inv.apply(&x).unwrap()).unwrap(), &x, 1e-12));
    }

    #[test]
    fn scaled_resolvents_of_transforms() {
        // (Id + λA)⁻¹ checked by plugging back in for single-valued A
        let l = LinearMap::from_rows(&[vec![1.0, 2.0], vec![-2.0, 0.5]]).unwrap();
        let a = MonotoneOp::affine(l, vector(&[1.0, 0.0])).unwrap();
        let ops = vec![
            a.clone(),
            a.clone().scaled(3.0).unwrap(),
            a.clone().inner_shift(vector(&[1.0, 2.0])),
            a.clone().outer_shift(vector(&[-1.0, 2.0])),
            a.clone().inverse(),
            a.clone().dual_inverse(),
            MonotoneOp::grad_half_dist_sq(ConvexSet::HyperbolaEpigraph).scaled(0.7).unwrap(),
        ];
        let x = vector(&[2.0, -5.0]);
        for op in &ops {
            for &lambda in &[0.25, 1.0, 4.0] {
                let y = op.resolvent_scaled(lambda, &x).unwrap();
                let back = &y + op.apply(&y).unwrap() * lambda;
                assert!(close(&back, &x, 1e-9), "{op:?} λ={lambda}");
            }
        }
    }

    #[test]
    fn affine_monotonicity_checked() {
        let l = LinearMap::from_rows(&[vec![-1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert!(matches!(
            MonotoneOp::affine(l, Vector::zeros(2)),
            Err(Error::NotMonotone { .. })
        ));
        let json = r#"{"kind":"affine","matrix":[[-1.0,0.0],[0.0,1.0]],"offset":[0.0,0.0]}"#;
        assert!(serde_json::from_str::<MonotoneOp>(json).is_err());
    }

    #[test]
    fn firm_nonexpansiveness_diagnostic() {
        let orth = ConvexSet::nonneg_orthant(3);
        let w = check_firmly_nonexpansive(|x| orth.project(x), 3, 200, 1).unwrap();
        assert!(w.passed());
        let g = MonotoneOp::grad_half_dist_sq(ConvexSet::HyperbolaEpigraph);
        assert!(check_cocoercive(&g, 1.0, 200, 2).unwrap().passed());
        let w = check_firmly_nonexpansive(|x| Ok(x * 2.0), 2, 10, 3).unwrap();
        assert!(!w.passed() && w.max_violation > 0.0);
        assert!(check_firmly_nonexpansive(|x| Ok(x.clone()), 2, 0, 3).is_err());
    }

    #[test]
    fn sampling_is_deterministic() {
        assert_eq!(sample_pairs(3, 4, 9), sample_pairs(3, 4, 9));
        assert_ne!(sample_pairs(3, 4, 9), sample_pairs(3, 4, 10));
    }

    #[test]
    fn json_shape() {
        let op: MonotoneOp = serde_json::from_str(
            r#"{"kind":"outer_shift","shift":[-1,0],"inner":{"kind":"normal_cone","set":{"kind":"affine_subspace","offset":[0,0],"directions":[[1,0]]}}}"#,
        )
        .unwrap();
        op.validate().unwrap();
        assert_eq!(op.dim(), 2);
        let x = vector(&[2.0, 3.0]);
        assert!(close(&op.resolvent(&x).unwrap(), &vector(&[1.0, 0.0]), 1e-14));
        let again: MonotoneOp = serde_json::from_str(&serde_json::to_string(&op).unwrap()).unwrap();
        assert_eq!(again, op);
    }
}
