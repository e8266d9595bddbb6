//! Executable worked examples with asserted outcomes.
//!
//! Each scenario builds a problem, runs the relevant pipeline and records a
//! list of [`Check`]s. Expected values that are not given in closed form come
//! from the naive routines in [`oracles`], computed at run time.

mod catalog;
pub mod instances;
pub mod oracles;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::splitting::IterationTrace;

/// Where an expected value comes from.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Stated outright for the worked example.
    Worked,
    /// Follows by direct substitution or a one-line identity.
    Immediate,
    /// Computed by the named routine in [`oracles`] or a second code path.
    Oracle(String),
}

impl Provenance {
    pub fn oracle(name: &str) -> Self {
        Self::Oracle(name.to_string())
    }

    pub fn label(&self) -> String {
        match self {
            Self::Worked => "worked".into(),
            Self::Immediate => "immediate".into(),
            Self::Oracle(n) => format!("oracle:{n}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Passes when `measured ≤ bound`.
    AtMost,
    /// Passes when `measured ≥ bound`.
    AtLeast,
    /// Boolean outcome; `measured` is 1 or 0.
    Holds,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub comparison: Comparison,
    pub passed: bool,
    pub provenance: Provenance,
}

impl Check {
    pub fn at_most(name: &str, measured: f64, bound: f64, provenance: Provenance) -> Self {
        Self {
            name: name.into(),
            measured,
            bound,
            comparison: Comparison::AtMost,
            passed: measured <= bound,
            provenance,
        }
    }

    pub fn at_least(name: &str, measured: f64, bound: f64, provenance: Provenance) -> Self {
        Self {
            name: name.into(),
            measured,
            bound,
            comparison: Comparison::AtLeast,
            passed: measured >= bound,
            provenance,
        }
    }

    pub fn holds(name: &str, ok: bool, provenance: Provenance) -> Self {
        Self {
            name: name.into(),
            measured: if ok { 1.0 } else { 0.0 },
            bound: 1.0,
            comparison: Comparison::Holds,
            passed: ok,
            provenance,
        }
    }

    fn describe_bound(&self) -> String {
        match self.comparison {
            Comparison::AtMost => format!("<= {:.3e}", self.bound),
            Comparison::AtLeast => format!(">= {:.3e}", self.bound),
            Comparison::Holds => "holds".into(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioReport {
    pub id: String,
    pub description: String,
    pub anchor: String,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub traces: Vec<(String, IterationTrace)>,
}

impl ScenarioReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// One line per check.
    pub fn to_table(&self) -> String {
        let mut out = format!("== {} ({})\n", self.id, self.anchor);
        for c in &self.checks {
            out.push_str(&format!(
                "  [{}] {:<44} {:>12.4e} {:<14} {}\n",
                if c.passed { "pass" } else { "FAIL" },
                c.name,
                c.measured,
                c.describe_bound(),
                c.provenance.label()
            ));
        }
        out
    }
}

/// Collects checks and traces while a scenario runs.
#[derive(Default)]
pub struct Recorder {
    checks: Vec<Check>,
    traces: Vec<(String, IterationTrace)>,
}

impl Recorder {
    pub fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    pub fn trace(&mut self, name: &str, t: IterationTrace) {
        self.traces.push((name.into(), t));
    }
}

pub struct ScenarioInfo {
    pub id: &'static str,
    pub description: &'static str,
    pub anchor: &'static str,
    run: fn(&mut Recorder) -> Result<()>,
}

const REGISTRY: &[ScenarioInfo] = &[
    ScenarioInfo {
        id: "orthant-shift",
        description: "T = p + P onto the nonnegative quadrant, p = (1,1): v = -p, Fix(v+T) is the quadrant",
        anchor: "translated orthant projector",
        run: catalog::orthant_shift,
    },
    ScenarioInfo {
        id: "constants",
        description: "A = (1,0), B = (0,1) constant: no zeros, every point solves the normal problem",
        anchor: "constant operators",
        run: catalog::constants,
    },
    ScenarioInfo {
        id: "hyperbola-infeasible",
        description: "A = Id - P_U with U the hyperbola epigraph, B = (-1,0) + N_V: v not attained",
        anchor: "hyperbola epigraph against a shifted axis",
        run: catalog::hyperbola_infeasible,
    },
    ScenarioInfo {
        id: "a-identity-ranges",
        description: "A = Id: T_FB is constant while T_DR = Id/2 + J_B(0) has full range",
        anchor: "ranges of T_FB and T_DR differ",
        run: catalog::a_identity_ranges,
    },
    ScenarioInfo {
        id: "not-self-dual",
        description: "A = Id - u, B = N_V: T_FB = u but the dual pair gives T_FB = 0",
        anchor: "forward-backward is not self-dual",
        run: catalog::not_self_dual,
    },
    ScenarioInfo {
        id: "map-feasible",
        description: "A = Id - P_U, B = N_V for intersecting U, V: T_FB = P_V P_U, limit in U and V",
        anchor: "forward-backward as alternating projections",
        run: catalog::map_feasible,
    },
    ScenarioInfo {
        id: "map-affine-shift",
        description: "lines at 30 degrees translated by w: powers of T_FB are conjugated by the translation",
        anchor: "alternating projections on translated subspaces",
        run: catalog::map_affine_shift,
    },
    ScenarioInfo {
        id: "affine-normal-solve",
        description: "A = Lx + b with L rotation-scaled, B = N_U for a plane U: closed-form v and Z_v",
        anchor: "affine operator against an affine subspace",
        run: catalog::affine_normal_solve,
    },
    ScenarioInfo {
        id: "accel-vs-shifted",
        description: "accelerated estimate on alternating projections between disjoint flats in R^4",
        anchor: "accelerated estimate for affine maps",
        run: catalog::accel_vs_shifted,
    },
    ScenarioInfo {
        id: "vfb-vdr-agree",
        description: "v estimated from T_FB and T_DR agree on three problems",
        anchor: "equal displacement vectors of T_FB and T_DR",
        run: catalog::vfb_vdr_agree,
    },
    ScenarioInfo {
        id: "fb-dr-displacement-range",
        description: "w = x - T_FB x: shifted FB and shifted DR iterations both converge",
        anchor: "equivalent characterisations of ran(Id - T_FB)",
        run: catalog::fb_dr_displacement_range,
    },
    ScenarioInfo {
        id: "parallel-feasible",
        description: "sum of two ball distance gradients with a common zero, solved in the product space",
        anchor: "parallel splitting, consistent case",
        run: catalog::parallel_feasible,
    },
    ScenarioInfo {
        id: "parallel-constants",
        description: "sum of constants adding up to (1,1), solved in the product space",
        anchor: "parallel splitting, translated case",
        run: catalog::parallel_constants,
    },
    ScenarioInfo {
        id: "dual-uniqueness",
        description: "parallel overlapping segments: many zeros, one dual point A z",
        anchor: "uniqueness of the dual solution",
        run: catalog::dual_uniqueness,
    },
];

/// `(id, description, anchor)` for every registered scenario, in a fixed order.
pub fn list_scenarios() -> Vec<(&'static str, &'static str, &'static str)> {
    REGISTRY.iter().map(|s| (s.id, s.description, s.anchor)).collect()
}

/// Runs one scenario. A pipeline error inside the scenario is reported as a
/// failed `pipeline` check rather than returned.
pub fn run_scenario(id: &str) -> Result<ScenarioReport> {
    let info = REGISTRY
        .iter()
        .find(|s| s.id == id)
        .ok_or_else(|| Error::UnknownScenario {
            id: id.to_string(),
            available: REGISTRY.iter().map(|s| s.id.to_string()).collect(),
        })?;
    let mut rec = Recorder::default();
    if let Err(e) = (info.run)(&mut rec) {
        rec.push(Check::holds(&format!("pipeline: {e}"), false, Provenance::Immediate));
    }
    Ok(ScenarioReport {
        id: info.id.into(),
        description: info.description.into(),
        anchor: info.anchor.into(),
        checks: rec.checks,
        traces: rec.traces,
    })
}

/// Runs every scenario, one thread each.
pub fn run_all() -> Vec<ScenarioReport> {
    std::thread::scope(|s| {
        let handles: Vec<_> = REGISTRY
            .iter()
            .map(|info| s.spawn(move || run_scenario(info.id).expect("registered id")))
            .collect();
        handles.into_iter().map(|h| h.join().expect("scenario thread panicked")).collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_shape() {
        let list = list_scenarios();
        assert!(list.len() >= 12);
        let mut ids: Vec<_> = list.iter().map(|e| e.0).collect();
        ids.sort();
        ids.dedup();
        assert_eq!(ids.len(), list.len());
        assert!(list.iter().all(|e| !e.2.is_empty()));
    }

    #[test]
    fn unknown_id_lists_available() {
        match run_scenario("nope") {
            Err(Error::UnknownScenario { available, .. }) => assert!(available.contains(&"constants".to_string())),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn check_comparisons() {
        assert!(Check::at_most("a", 1.0, 1.0, Provenance::Worked).passed);
        assert!(!Check::at_most("a", f64::NAN, 1.0, Provenance::Worked).passed);
        assert!(!Check::at_least("a", 0.5, 1.0, Provenance::Worked).passed);
        assert!(Check::holds("a", true, Provenance::oracle("x")).passed);
    }
}
