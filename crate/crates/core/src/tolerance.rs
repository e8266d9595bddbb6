//! Numerical tolerances shared across the crate.

/// Tolerances used by projections and by the diagnostic checks.
///
/// Every operation that needs one takes the defaults from here; callers who
/// want something different pass their own value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ToleranceConfig {
    /// Residual target for iterative projectors (hyperbola root finding).
    pub projection: f64,
    /// Slack for invariant checks (firm nonexpansiveness, variational inequalities).
    pub invariant: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        Self {
            projection: 1e-12,
            invariant: 1e-9,
        }
    }
}

pub const PROJECTION_TOL: f64 = 1e-12;
pub const INVARIANT_TOL: f64 = 1e-9;
/// Relative cutoff on singular values when deciding numerical rank.
pub const RANK_CUTOFF: f64 = 1e-10;
/// Acceptance threshold between successive staged displacement estimates.
pub const STAGE_ACCEPT_TOL: f64 = 1e-8;
/// Default norm beyond which an orbit is considered divergent.
pub const DIVERGENCE_THRESHOLD: f64 = 1e8;
/// Consecutive iterates that must exceed the divergence threshold.
pub const DIVERGENCE_CONFIRMATIONS: usize = 10;
/// Stored trace points before thinning kicks in.
pub const TRACE_CAP: usize = 10_000;
