use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::linear::{all_finite, complement_basis, project_onto_span, range_basis, Vector};
use crate::error::{ensure_dim, Error, Result};
use crate::tolerance::PROJECTION_TOL;

/// Orientation of one axis of an orthant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    #[serde(rename = "+")]
    Plus,
    #[serde(rename = "-")]
    Minus,
}

impl Sign {
    fn flip(self) -> Self {
        match self {
            Sign::Plus => Sign::Minus,
            Sign::Minus => Sign::Plus,
        }
    }
}

/// `offset + span(basis)`, with the basis stored as orthonormal columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AffineSubspaceRepr", into = "AffineSubspaceRepr")]
pub struct AffineSubspace {
    offset: Vector,
    basis: DMatrix<f64>,
}

#[derive(Serialize, Deserialize)]
struct AffineSubspaceRepr {
    #[serde(with = "crate::serde_util::vector")]
    offset: Vector,
    #[serde(default, with = "crate::serde_util::vectors")]
    directions: Vec<Vector>,
}

impl TryFrom<AffineSubspaceRepr> for AffineSubspace {
    type Error = Error;

    fn try_from(r: AffineSubspaceRepr) -> Result<Self> {
        Self::new(r.offset, &r.directions)
    }
}

impl From<AffineSubspace> for AffineSubspaceRepr {
    fn from(s: AffineSubspace) -> Self {
        let directions = (0..s.basis.ncols()).map(|j| s.basis.column(j).into_owned()).collect();
        Self {
            offset: s.offset,
            directions,
        }
    }
}

impl AffineSubspace {
    /// `offset + span(directions)`; the directions need not be independent.
    pub fn new(offset: Vector, directions: &[Vector]) -> Result<Self> {
        let n = offset.len();
        if n == 0 {
            return Err(Error::InvalidArgument("affine subspace needs dimension >= 1".into()));
        }
        if !all_finite(&offset) {
            return Err(Error::NonFinite("affine subspace offset"));
        }
        for d in directions {
            ensure_dim(n, d.len())?;
            if !all_finite(d) {
                return Err(Error::NonFinite("affine subspace direction"));
            }
        }
        let m = DMatrix::from_fn(n, directions.len(), |i, j| directions[j][i]);
        Ok(Self {
            offset,
            basis: range_basis(&m),
        })
    }

    /// `offset + span(columns of m)`.
    pub fn from_columns(offset: Vector, m: &DMatrix<f64>) -> Result<Self> {
        let dirs: Vec<Vector> = (0..m.ncols()).map(|j| m.column(j).into_owned()).collect();
        Self::new(offset, &dirs)
    }

    pub fn whole_space(dim: usize) -> Self {
        Self {
            offset: Vector::zeros(dim),
            basis: DMatrix::identity(dim, dim),
        }
    }

    pub fn point(p: Vector) -> Self {
        let n = p.len();
        Self {
            offset: p,
            basis: DMatrix::zeros(n, 0),
        }
    }

    pub fn line(through: Vector, direction: Vector) -> Result<Self> {
        Self::new(through, &[direction])
    }

    pub fn offset(&self) -> &Vector {
        &self.offset
    }

    /// Orthonormal basis of the parallel linear subspace, as columns.
    pub fn basis(&self) -> &DMatrix<f64> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn project(&self, x: &Vector) -> Vector {
        let rel = x - &self.offset;
        &self.offset + project_onto_span(&self.basis, &rel)
    }

    /// The orthogonal complement of the parallel subspace, through the origin.
    pub fn orthogonal_complement(&self) -> Self {
        Self {
            offset: Vector::zeros(self.dim()),
            basis: complement_basis(&self.basis),
        }
    }
}

/// Catalog of nonempty closed convex subsets of R^n.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ConvexSet {
    Orthant {
        signs: Vec<Sign>,
    },
    Box {
        #[serde(with = "crate::serde_util::vector")]
        lo: Vector,
        #[serde(with = "crate::serde_util::vector")]
        hi: Vector,
    },
    AffineSubspace(AffineSubspace),
    /// `{x : <normal, x> <= rhs}`
    Halfspace {
        #[serde(with = "crate::serde_util::vector")]
        normal: Vector,
        rhs: f64,
    },
    Ball {
        #[serde(with = "crate::serde_util::vector")]
        center: Vector,
        radius: f64,
    },
    /// `{(s, t) : s > 0, t >= 1/s}` in R^2.
    HyperbolaEpigraph,
    /// `{s * direction : s >= 0}`
    Ray {
        #[serde(with = "crate::serde_util::vector")]
        direction: Vector,
    },
    /// `{(x, ..., x)}` in (R^block_dim)^blocks.
    Diagonal {
        blocks: usize,
        block_dim: usize,
    },
    Translate {
        inner: Box<ConvexSet>,
        #[serde(with = "crate::serde_util::vector")]
        shift: Vector,
    },
    Product {
        parts: Vec<ConvexSet>,
    },
}

impl ConvexSet {
    pub fn nonneg_orthant(dim: usize) -> Self {
        ConvexSet::Orthant {
            signs: vec![Sign::Plus; dim],
        }
    }

    pub fn nonpos_orthant(dim: usize) -> Self {
        ConvexSet::Orthant {
            signs: vec![Sign::Minus; dim],
        }
    }

    pub fn ball(center: Vector, radius: f64) -> Result<Self> {
        let s = ConvexSet::Ball { center, radius };
        s.validate()?;
        Ok(s)
    }

    pub fn boxed(lo: Vector, hi: Vector) -> Result<Self> {
        let s = ConvexSet::Box { lo, hi };
        s.validate()?;
        Ok(s)
    }

    pub fn halfspace(normal: Vector, rhs: f64) -> Result<Self> {
        let s = ConvexSet::Halfspace { normal, rhs };
        s.validate()?;
        Ok(s)
    }

    pub fn translate(inner: ConvexSet, shift: Vector) -> Result<Self> {
        let s = ConvexSet::Translate {
            inner: Box::new(inner),
            shift,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn subspace(s: AffineSubspace) -> Self {
        ConvexSet::AffineSubspace(s)
    }

    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Orthant { signs } => signs.len(),
            ConvexSet::Box { lo, .. } => lo.len(),
            ConvexSet::AffineSubspace(s) => s.dim(),
            ConvexSet::Halfspace { normal, .. } => normal.len(),
            ConvexSet::Ball { center, .. } => center.len(),
            ConvexSet::HyperbolaEpigraph => 2,
            ConvexSet::Ray { direction } => direction.len(),
            ConvexSet::Diagonal { blocks, block_dim } => blocks * block_dim,
            ConvexSet::Translate { shift, .. } => shift.len(),
            ConvexSet::Product { parts } => parts.iter().map(ConvexSet::dim).sum(),
        }
    }

    /// Checks the structural invariants of the variant (recursively).
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        match self {
            ConvexSet::Orthant { signs } if signs.is_empty() => bad("orthant needs dimension >= 1"),
            ConvexSet::Orthant { .. } | ConvexSet::HyperbolaEpigraph => Ok(()),
            ConvexSet::Box { lo, hi } => {
                ensure_dim(lo.len(), hi.len())?;
                if !all_finite(lo) || !all_finite(hi) {
                    return Err(Error::NonFinite("box bounds"));
                }
                if lo.iter().zip(hi.iter()).any(|(l, h)| l > h) {
                    return bad("box requires lo <= hi componentwise");
                }
                Ok(())
            }
            ConvexSet::AffineSubspace(_) => Ok(()),
            ConvexSet::Halfspace { normal, rhs } => {
                if !all_finite(normal) || !rhs.is_finite() {
                    return Err(Error::NonFinite("halfspace"));
                }
                if normal.norm() == 0.0 {
                    return bad("halfspace normal must be nonzero");
                }
                Ok(())
            }
            ConvexSet::Ball { center, radius } => {
                if !all_finite(center) || !radius.is_finite() {
                    return Err(Error::NonFinite("ball"));
                }
                if *radius <= 0.0 {
                    return bad("ball radius must be positive");
                }
                Ok(())
            }
            ConvexSet::Ray { direction } => {
                if !all_finite(direction) {
                    return Err(Error::NonFinite("ray direction"));
                }
                if direction.norm() == 0.0 {
                    return bad("ray direction must be nonzero");
                }
                Ok(())
            }
            ConvexSet::Diagonal { blocks, block_dim } => {
                if *blocks < 1 || *block_dim < 1 {
                    return bad("diagonal needs at least one block of dimension >= 1");
                }
                Ok(())
            }
            ConvexSet::Translate { inner, shift } => {
                inner.validate()?;
                ensure_dim(inner.dim(), shift.len())?;
                if !all_finite(shift) {
                    return Err(Error::NonFinite("translation"));
                }
                Ok(())
            }
            ConvexSet::Product { parts } => {
                if parts.is_empty() {
                    return bad("product needs at least one factor");
                }
                parts.iter().try_for_each(ConvexSet::validate)
            }
        }
    }

    /// Nearest point of the set to `x`.
    pub fn project(&self, x: &Vector) -> Result<Vector> {
        ensure_dim(self.dim(), x.len())?;
        Ok(match self {
            ConvexSet::Orthant { signs } => Vector::from_iterator(
                x.len(),
                x.iter().zip(signs).map(|(xi, s)| match s {
                    Sign::Plus => xi.max(0.0),
                    Sign::Minus => xi.min(0.0),
                }),
            ),
            ConvexSet::Box { lo, hi } => Vector::from_iterator(
                x.len(),
                x.iter().zip(lo.iter().zip(hi.iter())).map(|(xi, (l, h))| xi.clamp(*l, *h)),
            ),
            ConvexSet::AffineSubspace(s) => s.project(x),
            ConvexSet::Halfspace { normal, rhs } => {
                let excess = normal.dot(x) - rhs;
                if excess <= 0.0 {
                    x.clone()
                } else {
                    x - normal * (excess / normal.norm_squared())
                }
            }
            ConvexSet::Ball { center, radius } => {
                let rel = x - center;
                let r = rel.norm();
                if r <= *radius {
                    x.clone()
                } else {
                    center + rel * (radius / r)
                }
            }
            ConvexSet::HyperbolaEpigraph => {
                let (s, t) = project_hyperbola_epigraph(x[0], x[1], PROJECTION_TOL)?;
                Vector::from_vec(vec![s, t])
            }
            ConvexSet::Ray { direction } => {
                let s = direction.dot(x) / direction.norm_squared();
                direction * s.max(0.0)
            }
            ConvexSet::Diagonal { blocks, block_dim } => {
                let mean = block_mean(x, *blocks, *block_dim);
                lift_blocks(&mean, *blocks)
            }
            ConvexSet::Translate { inner, shift } => shift + inner.project(&(x - shift))?,
            ConvexSet::Product { parts } => {
                let mut out = Vec::with_capacity(x.len());
                let mut start = 0;
                for p in parts {
                    let d = p.dim();
                    let block = x.rows(start, d).into_owned();
                    out.extend(p.project(&block)?.iter());
                    start += d;
                }
                Vector::from_vec(out)
            }
        })
    }

    pub fn distance(&self, x: &Vector) -> Result<f64> {
        Ok((x - self.project(x)?).norm())
    }

    /// Gradient of x ↦ ½ d(x)², i.e. `x - P x`.
    pub fn grad_half_dist_sq(&self, x: &Vector) -> Result<Vector> {
        Ok(x - self.project(x)?)
    }

    /// Membership test up to `tol`.
    pub fn contains(&self, x: &Vector, tol: f64) -> Result<bool> {
        Ok(self.distance(x)? <= tol)
    }

    /// Polar cone of the recession cone, as a catalog set.
    pub fn polar_recession_cone(&self) -> Result<ConvexSet> {
        let n = self.dim();
        match self {
            ConvexSet::Orthant { signs } => Ok(ConvexSet::Orthant {
                signs: signs.iter().map(|s| s.flip()).collect(),
            }),
            // bounded sets recede nowhere
            ConvexSet::Box { .. } | ConvexSet::Ball { .. } => {
                Ok(ConvexSet::AffineSubspace(AffineSubspace::whole_space(n)))
            }
            ConvexSet::AffineSubspace(s) => Ok(ConvexSet::AffineSubspace(s.orthogonal_complement())),
            ConvexSet::Halfspace { normal, .. } => Ok(ConvexSet::Ray {
                direction: normal.clone(),
            }),
            ConvexSet::HyperbolaEpigraph => Ok(ConvexSet::nonpos_orthant(2)),
            ConvexSet::Ray { direction } => Ok(ConvexSet::Halfspace {
                normal: direction.clone(),
                rhs: 0.0,
            }),
            ConvexSet::Diagonal { blocks, block_dim } => {
                let d = *block_dim;
                let m = DMatrix::from_fn(n, d, |i, j| if i % d == j { 1.0 } else { 0.0 });
                let diag = AffineSubspace::from_columns(Vector::zeros(n), &m)?;
                debug_assert_eq!(diag.basis().ncols(), d.min(n));
                let _ = blocks;
                Ok(ConvexSet::AffineSubspace(diag.orthogonal_complement()))
            }
            ConvexSet::Translate { inner, .. } => inner.polar_recession_cone(),
            ConvexSet::Product { .. } => Err(Error::Unsupported(
                "polar recession cone of a product set".into(),
            )),
        }
    }

    /// Draws a point of the set without going through its projector.
    pub fn sample_member<R: Rng + ?Sized>(&self, rng: &mut R, scale: f64) -> Vector {
        let n = self.dim();
        let gauss = |rng: &mut R| -> f64 { scale * rng.sample::<f64, _>(StandardNormal) };
        match self {
            ConvexSet::Orthant { signs } => Vector::from_iterator(
                n,
                signs.iter().map(|s| {
                    let g = gauss(rng).abs();
                    match s {
                        Sign::Plus => g,
                        Sign::Minus => -g,
                    }
                }),
            ),
            ConvexSet::Box { lo, hi } => Vector::from_iterator(
                n,
                lo.iter().zip(hi.iter()).map(|(l, h)| l + (h - l) * rng.random::<f64>()),
            ),
            ConvexSet::AffineSubspace(s) => {
                let k = s.basis().ncols();
                let coeffs = Vector::from_iterator(k, (0..k).map(|_| gauss(rng)));
                s.offset() + s.basis() * coeffs
            }
            ConvexSet::Halfspace { normal, rhs } => {
                let x = Vector::from_iterator(n, (0..n).map(|_| gauss(rng)));
                let excess = normal.dot(&x) - rhs;
                let back = excess.max(0.0) + gauss(rng).abs();
                x - normal * (back / normal.norm_squared())
            }
            ConvexSet::Ball { center, radius } => {
                let dir = Vector::from_iterator(n, (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)));
                let u: f64 = rng.random();
                let len = dir.norm().max(f64::MIN_POSITIVE);
                center + dir * (radius * u.powf(1.0 / n as f64) / len)
            }
            ConvexSet::HyperbolaEpigraph => {
                let s = (rng.sample::<f64, _>(StandardNormal)).exp();
                Vector::from_vec(vec![s, 1.0 / s + gauss(rng).abs()])
            }
            ConvexSet::Ray { direction } => direction * gauss(rng).abs(),
            ConvexSet::Diagonal { blocks, block_dim } => {
                let x = Vector::from_iterator(*block_dim, (0..*block_dim).map(|_| gauss(rng)));
                lift_blocks(&x, *blocks)
            }
            ConvexSet::Translate { inner, shift } => shift + inner.sample_member(rng, scale),
            ConvexSet::Product { parts } => {
                let mut out = Vec::with_capacity(n);
                for p in parts {
                    out.extend(p.sample_member(rng, scale).iter());
                }
                Vector::from_vec(out)
            }
        }
    }
}

pub(crate) fn block_mean(x: &Vector, blocks: usize, block_dim: usize) -> Vector {
    let mut mean = Vector::zeros(block_dim);
    for b in 0..blocks {
        mean += x.rows(b * block_dim, block_dim);
    }
    mean / blocks as f64
}

pub(crate) fn lift_blocks(x: &Vector, blocks: usize) -> Vector {
    let d = x.len();
    Vector::from_fn(d * blocks, |i, _| x[i % d])
}

const HYPERBOLA_MAX_ITER: usize = 200;

/// Projects `(a, b)` onto `{(s, t) : s > 0, t >= 1/s}`.
///
/// Outside the set the nearest point is `(t, 1/t)` where `t > 0` is the unique
/// positive root of `t^4 - a t^3 + b t - 1`. The root is bracketed in
/// `(0, 1 + |a| + |b|]` and found by Newton steps that fall back to bisection
/// whenever they leave the bracket.
pub fn project_hyperbola_epigraph(a: f64, b: f64, tol: f64) -> Result<(f64, f64)> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::NonFinite("hyperbola projection input"));
    }
    if a > 0.0 && a * b >= 1.0 {
        return Ok((a, b));
    }
    let g = |t: f64| ((t - a) * t * t + b) * t - 1.0;
    let dg = |t: f64| (4.0 * t - 3.0 * a) * t * t + b;
    let scale = |t: f64| 1.0f64.max(t.powi(4)).max((a * t.powi(3)).abs()).max((b * t).abs());

    let mut lo = 0.0f64;
    let mut hi = 1.0 + a.abs() + b.abs();
    let mut t = if a > 0.0 { a.max(1.0).min(hi) } else { 1.0f64.min(hi) };
    let mut residual = f64::INFINITY;
    for _ in 0..HYPERBOLA_MAX_ITER {
        let gt = g(t);
        residual = gt.abs() / scale(t);
        if residual <= tol {
            return Ok((t, 1.0 / t));
        }
        if gt < 0.0 {
            lo = t;
        } else {
            hi = t;
        }
        if hi - lo <= f64::EPSILON * hi {
            return Ok((t, 1.0 / t));
        }
        let d = dg(t);
        let newton = t - gt / d;
        t = if d > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(Error::RootFinding {
        iterations: HYPERBOLA_MAX_ITER,
        residual,
    })
}
