//! Parallel splitting for `0 ∈ A_1 x + ... + A_m x` with cocoercive `A_i`.
//!
//! The sum is lifted to `(R^d)^m`: the lifted forward operator acts on each
//! block with `α A_i`, and the backward step is the projector onto the
//! diagonal `{(x, ..., x)}`.

use serde::{Deserialize, Serialize};

use crate::convex::{block_mean, lift_blocks, ConvexSet, Vector};
use crate::displacement::{normal_solve_with, NormalSolveOptions, NormalSolveReport, NormalStatus};
use crate::error::{Error, Result};
use crate::operators::{check_cocoercive, MonotoneOp};
use crate::splitting::SplitProblem;

const COCO_SAMPLES: usize = 256;
const COCO_SEED: u64 = 0xc0c0;

/// `v̂` counts as zero below this norm when certifying a zero of the sum.
pub const ZERO_DISPLACEMENT_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProductProblemRepr", into = "ProductProblemRepr")]
pub struct ProductProblem {
    ops: Vec<MonotoneOp>,
    alphas: Vec<f64>,
    alpha: f64,
}

#[derive(Serialize, Deserialize)]
struct ProductProblemRepr {
    ops: Vec<MonotoneOp>,
    alphas: Vec<f64>,
}

impl TryFrom<ProductProblemRepr> for ProductProblem {
    type Error = Error;

    fn try_from(r: ProductProblemRepr) -> Result<Self> {
        Self::new(r.ops, r.alphas)
    }
}

impl From<ProductProblem> for ProductProblemRepr {
    fn from(p: ProductProblem) -> Self {
        Self {
            ops: p.ops,
            alphas: p.alphas,
        }
    }
}

impl ProductProblem {
    /// `alphas[i]` is a cocoercivity constant of `ops[i]`; each one is
    /// checked by sampling.
    pub fn new(ops: Vec<MonotoneOp>, alphas: Vec<f64>) -> Result<Self> {
        if ops.len() < 2 {
            return Err(Error::InvalidArgument("parallel splitting needs at least two operators".into()));
        }
        if ops.len() != alphas.len() {
            return Err(Error::InvalidArgument(format!(
                "{} operators but {} cocoercivity constants",
                ops.len(),
                alphas.len()
            )));
        }
        let d = ops[0].dim();
        for (op, &a) in ops.iter().zip(&alphas) {
            op.validate()?;
            crate::error::ensure_dim(d, op.dim())?;
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::InvalidArgument(format!("cocoercivity constant must be positive, got {a}")));
            }
            if !op.is_single_valued() {
                return Err(Error::NotSingleValued);
            }
            let w = check_cocoercive(op, a, COCO_SAMPLES, COCO_SEED)?;
            if !w.passed() {
                return Err(Error::NotFirmlyNonexpansive {
                    max_violation: w.max_violation,
                    samples: w.samples_checked,
                });
            }
        }
        let alpha = alphas.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self { ops, alphas, alpha })
    }

    pub fn ops(&self) -> &[MonotoneOp] {
        &self.ops
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// The common step `min α_i`.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn blocks(&self) -> usize {
        self.ops.len()
    }

    pub fn block_dim(&self) -> usize {
        self.ops[0].dim()
    }

    pub fn lift(&self, x: &Vector) -> Result<Vector> {
        crate::error::ensure_dim(self.block_dim(), x.len())?;
        Ok(lift(x, self.blocks()))
    }

    /// The lifted pair: blockwise `α A_i` and the normal cone of the diagonal.
    pub fn build_lifted_problem(&self) -> Result<SplitProblem> {
        let parts = self
            .ops
            .iter()
            .map(|op| op.clone().scaled(self.alpha))
            .collect::<Result<Vec<_>>>()?;
        SplitProblem::new(
            MonotoneOp::Blockwise { parts },
            MonotoneOp::normal_cone(ConvexSet::Diagonal {
                blocks: self.blocks(),
                block_dim: self.block_dim(),
            }),
        )
    }

    /// `Σ α A_i(z)`
    pub fn scaled_sum(&self, z: &Vector) -> Result<Vector> {
        let mut sum = Vector::zeros(self.block_dim());
        for op in &self.ops {
            sum += op.apply(z)? * self.alpha;
        }
        Ok(sum)
    }
}

/// `x ↦ (x, ..., x)` with `m` copies.
pub fn lift(x: &Vector, m: usize) -> Vector {
    lift_blocks(x, m)
}

/// Blockwise mean of a point of `(R^d)^m`.
pub fn average(xx: &Vector, m: usize) -> Result<Vector> {
    if m == 0 || xx.len() % m != 0 || xx.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "length {} is not a positive multiple of {m} blocks",
            xx.len()
        )));
    }
    Ok(block_mean(xx, m, xx.len() / m))
}

/// Projector onto the diagonal, `lift ∘ average`.
pub fn project_diagonal(xx: &Vector, m: usize) -> Result<Vector> {
    Ok(lift(&average(xx, m)?, m))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProductSolveReport {
    /// Report for the lifted problem.
    pub lifted: NormalSolveReport,
    /// Average of the lifted solution.
    #[serde(with = "crate::serde_util::option_vector")]
    pub z: Option<Vector>,
    /// `‖Σ α A_i(z)‖`, filled in when `v̂` is numerically zero.
    pub sum_residual: Option<f64>,
}

pub fn parallel_fb_solve(p: &ProductProblem, x0: &Vector, tol: f64, budget: usize) -> Result<ProductSolveReport> {
    let lifted = p.build_lifted_problem()?;
    let report = normal_solve_with(
        &lifted,
        &p.lift(x0)?,
        &NormalSolveOptions {
            tol,
            max_iter: budget,
            ..NormalSolveOptions::default()
        },
    )?;
    let z = match (&report.status, &report.z) {
        (NormalStatus::NormalSolutionFound, Some(zz)) => Some(average(zz, p.blocks())?),
        _ => None,
    };
    let sum_residual = match &z {
        Some(z) if report.v.norm() <= ZERO_DISPLACEMENT_TOL => Some(p.scaled_sum(z)?.norm()),
        _ => None,
    };
    Ok(ProductSolveReport {
        lifted: report,
        z,
        sum_residual,
    })
}
