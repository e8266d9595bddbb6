//! Config-driven command-line front end.
//!
//! Exit codes: `0` success, `1` bad config or usage, `2` no primal solution,
//! `3` overflow while estimating `v`, `4` normal problem divergent,
//! `5` normal problem inconclusive.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde::{Deserialize, Serialize};

use crate::convex::{ConvexSet, Vector};
use crate::displacement::{
    estimate_v_iterative, normal_solve_with, v_affine_closed_form, DisplacementEstimate, NormalSolveOptions,
    NormalSolveReport, NormalStatus,
};
use crate::error::{Error, Result};
use crate::operators::{sample_pairs, MonotoneOp};
use crate::product_space::{average, ProductProblem};
use crate::scenarios::{list_scenarios, run_all, run_scenario, ScenarioReport};
use crate::splitting::{FixedPointMap, IterationTrace, Solution, SplitProblem};
use crate::tolerance::DIVERGENCE_THRESHOLD;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;
pub const EXIT_OVERFLOW: i32 = 3;
pub const EXIT_DIVERGENT: i32 = 4;
pub const EXIT_INCONCLUSIVE: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "monosplit", version, about = "Splitting methods and displacement diagnostics for monotone inclusions")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Run configuration (JSON).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Use the closed form of v for affine problems.
    #[arg(long, global = true)]
    pub closed_form: bool,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    #[arg(long, global = true)]
    pub tol: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Iterate T_FB to a zero of A + B.
    Solve,
    /// Estimate the minimal displacement vector of T_FB.
    EstimateV,
    /// Solve the v-perturbed problem.
    NormalSolve,
    /// Run one bundled scenario, or all of them.
    Scenarios { id: Option<String> },
    /// List bundled scenarios.
    ListScenarios,
}

fn default_tol() -> f64 {
    1e-8
}

fn default_max_iter() -> usize {
    100_000
}

fn default_divergence() -> f64 {
    DIVERGENCE_THRESHOLD
}

fn default_seed() -> u64 {
    42
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dim: usize,
    pub problem: ProblemSpec,
    /// Replaces `T_FB` by `shift + T_FB`.
    #[serde(default, with = "crate::serde_util::option_vector")]
    pub shift: Option<Vector>,
    /// Starting point; drawn from the seed when absent.
    #[serde(default, with = "crate::serde_util::option_vector")]
    pub x0: Option<Vector>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_divergence")]
    pub divergence_threshold: f64,
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Output directory used when `--out` is not given.
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemSpec {
    /// `0 ∈ Ax + Bx`
    Split { a: MonotoneOp, b: MonotoneOp },
    /// `A = Id - P_U`, `B = N_V`: forward-backward is `P_V P_U`.
    Map { u: ConvexSet, v: ConvexSet },
    /// `0 ∈ Σ A_i x`, solved in the product space.
    Product { ops: Vec<MonotoneOp>, alphas: Vec<f64> },
}

#[derive(Clone, Copy)]
enum Shape {
    Problem,
    Op,
    Set,
}

impl Shape {
    fn child(self, key: &str) -> Option<Shape> {
        match (self, key) {
            (Shape::Problem, "a" | "b" | "ops") | (Shape::Op, "inner" | "parts") => Some(Shape::Op),
            (Shape::Problem, "u" | "v") | (Shape::Op, "set") | (Shape::Set, "inner" | "parts") => Some(Shape::Set),
            _ => None,
        }
    }

    fn check(self, v: &serde_json::Value) -> std::result::Result<(), String> {
        let r = match self {
            Shape::Problem => ProblemSpec::deserialize(v).map(drop),
            Shape::Op => MonotoneOp::deserialize(v).map(drop),
            Shape::Set => ConvexSet::deserialize(v).map(drop),
        };
        r.map_err(|e| e.to_string())
    }
}

/// Deepest field of a failing tagged object that explains the failure.
fn locate(value: &serde_json::Value, shape: Shape, path: &str) -> Option<(String, String)> {
    let message = shape.check(value).err()?;
    let obj = value.as_object()?;
    for (key, child) in obj.iter().filter(|(k, _)| *k != "kind") {
        let here = format!("{path}.{key}");
        match shape.child(key) {
            Some(sub) => {
                let items: Vec<(String, &serde_json::Value)> = match child.as_array() {
                    Some(xs) => xs.iter().enumerate().map(|(i, x)| (format!("{here}[{i}]"), x)).collect(),
                    None => vec![(here, child)],
                };
                for (p, item) in items {
                    if sub.check(item).is_err() {
                        return locate(item, sub, &p);
                    }
                }
            }
            None => {
                // Dropping the culprit leaves only its own absence to complain about.
                let mut rest = obj.clone();
                rest.remove(key);
                match shape.check(&serde_json::Value::Object(rest)) {
                    Ok(()) => return Some((here, message)),
                    Err(m) if m.starts_with(&format!("missing field `{key}`")) => return Some((here, message)),
                    Err(_) => {}
                }
            }
        }
    }
    Some((path.to_string(), message))
}

/// A config resolved into a problem on the space the iteration runs in.
pub struct Prepared {
    pub problem: SplitProblem,
    /// Present for product problems.
    pub product: Option<ProductProblem>,
    pub x0: Vector,
    pub config: RunConfig,
}

impl RunConfig {
    /// Parses JSON, reporting the field path and position of the first error.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let mut path = e.path().to_string();
            let inner = e.into_inner();
            let mut message = inner.to_string();
            // Tagged objects are buffered before dispatch, so the reported path
            // stops at `problem`; walk into it to find the offending field.
            if path == "problem" {
                let located = serde_json::from_str::<serde_json::Value>(text)
                    .ok()
                    .and_then(|v| locate(v.get("problem")?, Shape::Problem, "problem"));
                if let Some((p, m)) = located {
                    path = p;
                    message = m;
                }
            }
            Error::InvalidArgument(format!(
                "config field `{path}` (line {}, column {}): {message}",
                inner.line(),
                inner.column()
            ))
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| Error::InvalidArgument(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn prepare(self) -> Result<Prepared> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidArgument(format!("tol must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidArgument("max_iter must be positive".into()));
        }
        let x0 = match &self.x0 {
            Some(x) => x.clone(),
            None => sample_pairs(self.dim, 1, self.seed).remove(0).0,
        };
        if x0.len() != self.dim {
            return Err(Error::InvalidArgument(format!("x0 has {} coordinates but dim is {}", x0.len(), self.dim)));
        }
        let (problem, product, x0) = match &self.problem {
            ProblemSpec::Split { a, b } => (SplitProblem::new(a.clone(), b.clone())?, None, x0),
            ProblemSpec::Map { u, v } => (
                SplitProblem::new(MonotoneOp::grad_half_dist_sq(u.clone()), MonotoneOp::normal_cone(v.clone()))?,
                None,
                x0,
            ),
            ProblemSpec::Product { ops, alphas } => {
                let p = ProductProblem::new(ops.clone(), alphas.clone())?;
                let lifted = p.build_lifted_problem()?;
                let xx = p.lift(&x0)?;
                (lifted, Some(p), xx)
            }
        };
        let block_dim = product.as_ref().map_or(problem.dim(), |p| p.block_dim());
        if block_dim != self.dim {
            return Err(Error::InvalidArgument(format!(
                "operators act on R^{block_dim} but dim is {}",
                self.dim
            )));
        }
        let problem = match &self.shift {
            Some(w) if product.is_none() => problem.shifted(w)?,
            Some(w) => problem.shifted(&crate::product_space::lift(w, product.as_ref().map_or(1, |p| p.blocks())))?,
            None => problem,
        };
        Ok(Prepared {
            problem,
            product,
            x0,
            config: self,
        })
    }
}

#[derive(Serialize)]
struct SolveOutput<'a> {
    #[serde(flatten)]
    solution: &'a Solution,
    /// Block average of `z` for product problems.
    #[serde(skip_serializing_if = "Option::is_none", with = "crate::serde_util::option_vector")]
    z_average: Option<Vector>,
}

#[derive(Serialize)]
struct EstimateOutput {
    method: &'static str,
    #[serde(with = "crate::serde_util::vector")]
    v: Vector,
    #[serde(skip_serializing_if = "Option::is_none")]
    estimate: Option<DisplacementEstimate>,
}

#[derive(Serialize)]
struct NormalOutput<'a> {
    #[serde(flatten)]
    report: &'a NormalSolveReport,
    #[serde(skip_serializing_if = "Option::is_none", with = "crate::serde_util::option_vector")]
    z_average: Option<Vector>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sum_residual: Option<f64>,
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli),
        Err(e) => {
            let _ = e.print();
            if e.use_stderr() {
                EXIT_CONFIG
            } else {
                EXIT_OK
            }
        }
    }
}

pub fn run(cli: &Cli) -> i32 {
    match &cli.command {
        Command::ListScenarios => {
            for (id, description, anchor) in list_scenarios() {
                println!("{id:<26} {anchor:<48} {description}");
            }
            EXIT_OK
        }
        Command::Scenarios { id } => cmd_scenarios(id.as_deref(), cli.out.as_deref()),
        cmd => {
            let prepared = match load(cli) {
                Ok(p) => p,
                Err(e) => {
                    eprintln!("error: {e}");
                    return EXIT_CONFIG;
                }
            };
            let out = cli
                .out
                .clone()
                .or_else(|| prepared.config.out_dir.clone())
                .unwrap_or_else(|| PathBuf::from("."));
            if let Err(e) = fs::create_dir_all(&out) {
                eprintln!("error: cannot create {}: {e}", out.display());
                return EXIT_CONFIG;
            }
            let result = match cmd {
                Command::Solve => cmd_solve(&prepared, &out),
                Command::EstimateV => cmd_estimate_v(&prepared, &out, cli.closed_form),
                Command::NormalSolve => cmd_normal_solve(&prepared, &out),
                _ => unreachable!(),
            };
            result.unwrap_or_else(|e| {
                eprintln!("error: {e}");
                EXIT_CONFIG
            })
        }
    }
}

fn load(cli: &Cli) -> Result<Prepared> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("--config is required".into()))?;
    let mut config = RunConfig::load(path)?;
    if let Some(s) = cli.seed {
        config.seed = s;
    }
    if let Some(m) = cli.max_iter {
        config.max_iter = m;
    }
    if let Some(t) = cli.tol {
        config.tol = t;
    }
    config.prepare()
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::InvalidArgument(format!("cannot write {}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::InvalidArgument(e.to_string()))?;
    write(path, &text)
}

fn write_trace(out: &Path, trace: &IterationTrace) -> Result<PathBuf> {
    let path = out.join("trace.csv");
    write(&path, &trace.to_csv())?;
    Ok(path)
}

fn block_average(p: &Prepared, z: &Vector) -> Result<Option<Vector>> {
    p.product.as_ref().map(|pp| average(z, pp.blocks())).transpose()
}

/// Writes `solution.json` and `trace.csv`.
pub fn cmd_solve(p: &Prepared, out: &Path) -> Result<i32> {
    match p.problem.solve_primal(&p.x0, p.config.tol, p.config.max_iter) {
        Ok(solution) => {
            write_trace(out, &solution.trace)?;
            let z_average = block_average(p, &solution.z)?;
            write_json(
                &out.join("solution.json"),
                &SolveOutput {
                    solution: &solution,
                    z_average,
                },
            )?;
            println!("converged in {} iterations", solution.trace.iterations);
            Ok(EXIT_OK)
        }
        Err(Error::NotConverged { trace }) | Err(Error::Aborted { trace, .. }) => {
            write_trace(out, &trace)?;
            println!("no convergence after {} iterations", trace.iterations);
            Ok(EXIT_NOT_CONVERGED)
        }
        Err(Error::Overflow { iterations, .. }) => {
            println!("iterates overflowed after {iterations} iterations");
            Ok(EXIT_NOT_CONVERGED)
        }
        Err(e) => Err(e),
    }
}

/// Writes `displacement.json`.
pub fn cmd_estimate_v(p: &Prepared, out: &Path, closed_form: bool) -> Result<i32> {
    let map = FixedPointMap::ForwardBackward(p.problem.clone());
    let output = if closed_form {
        let rep = map.affine_representation().map_err(|e| match e {
            Error::NotAffine => Error::InvalidArgument("--closed-form needs an affine problem".into()),
            e => e,
        })?;
        EstimateOutput {
            method: "closed_form",
            v: v_affine_closed_form(&rep),
            estimate: None,
        }
    } else {
        let stages = 10;
        match estimate_v_iterative(&map, &p.x0, stages, (p.config.max_iter / stages).max(1)) {
            Ok(est) => EstimateOutput {
                method: "iterative",
                v: est.v.clone(),
                estimate: Some(est),
            },
            Err(Error::Overflow { iterations, .. }) => {
                eprintln!("iterates overflowed after {iterations} iterations");
                return Ok(EXIT_OVERFLOW);
            }
            Err(e) => return Err(e),
        }
    };
    write_json(&out.join("displacement.json"), &output)?;
    println!("v = {:?}", output.v.iter().collect::<Vec<_>>());
    Ok(EXIT_OK)
}

/// Writes `normal_solve.json` and `trace.csv`.
pub fn cmd_normal_solve(p: &Prepared, out: &Path) -> Result<i32> {
    let opts = NormalSolveOptions {
        tol: p.config.tol,
        max_iter: p.config.max_iter,
        divergence_threshold: p.config.divergence_threshold,
        ..NormalSolveOptions::default()
    };
    let mut report = match normal_solve_with(&p.problem, &p.x0, &opts) {
        Ok(r) => r,
        Err(Error::Overflow { iterations, .. }) => {
            eprintln!("iterates overflowed after {iterations} iterations");
            return Ok(EXIT_DIVERGENT);
        }
        Err(e) => return Err(e),
    };
    report.trace_path = Some(write_trace(out, &report.trace)?.display().to_string());
    let z_average = match &report.z {
        Some(z) => block_average(p, z)?,
        None => None,
    };
    let sum_residual = match (&p.product, &z_average) {
        (Some(pp), Some(z)) => Some(pp.scaled_sum(z)?.norm()),
        _ => None,
    };
    write_json(
        &out.join("normal_solve.json"),
        &NormalOutput {
            report: &report,
            z_average,
            sum_residual,
        },
    )?;
    println!("status: {:?}", report.status);
    Ok(match report.status {
        NormalStatus::NormalSolutionFound => EXIT_OK,
        NormalStatus::Divergent => EXIT_DIVERGENT,
        NormalStatus::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

/// Prints a table per scenario; with `out`, also writes `<id>/report.json`
/// and one CSV per recorded trace.
pub fn cmd_scenarios(id: Option<&str>, out: Option<&Path>) -> i32 {
    let reports: Vec<ScenarioReport> = match id {
        Some(id) => match run_scenario(id) {
            Ok(r) => vec![r],
            Err(e) => {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
        },
        None => run_all(),
    };
    let mut all_passed = true;
    for r in &reports {
        print!("{}", r.to_table());
        all_passed &= r.passed();
        if let Some(dir) = out {
            if let Err(e) = export_scenario(dir, r) {
                eprintln!("error: {e}");
                return EXIT_CONFIG;
            }
        }
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    println!("{} scenarios, {} failed", reports.len(), failed);
    if all_passed {
        EXIT_OK
    } else {
        EXIT_CONFIG
    }
}

fn export_scenario(dir: &Path, r: &ScenarioReport) -> Result<()> {
    let sub = dir.join(&r.id);
    fs::create_dir_all(&sub).map_err(|e| Error::InvalidArgument(format!("cannot create {}: {e}", sub.display())))?;
    write_json(&sub.join("report.json"), r)?;
    for (name, trace) in &r.traces {
        write(&sub.join(format!("{name}.csv")), &trace.to_csv())?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"{
        "dim": 2,
        "problem": {"kind": "split",
                    "a": {"kind": "const", "value": [1, 0]},
                    "b": {"kind": "const", "value": [0, 1]}},
        "x0": [0, 0]
    }"#;

    #[test]
    fn defaults_applied() {
        let c = RunConfig::from_json(MINIMAL).unwrap();
        assert_eq!(c.tol, 1e-8);
        assert_eq!(c.max_iter, 100_000);
        assert_eq!(c.divergence_threshold, 1e8);
        assert_eq!(c.seed, 42);
    }

    #[test]
    fn round_trip() {
        let c = RunConfig::from_json(MINIMAL).unwrap();
        let again = RunConfig::from_json(&serde_json::to_string(&c).unwrap()).unwrap();
        assert_eq!(c, again);
    }

    #[test]
    fn missing_dim_names_the_field() {
        let text = MINIMAL.replace("\"dim\": 2,", "");
        let err = RunConfig::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("dim"), "{err}");
    }

    #[test]
    fn bad_field_path_is_reported() {
        let text = MINIMAL.replace("[1, 0]", "\"oops\"");
        let err = RunConfig::from_json(&text).unwrap_err().to_string();
        assert!(err.contains("problem.a.value"), "{err}");
    }

    #[test]
    fn nested_field_path_is_reported() {
        let text = r#"{"dim": 2, "problem": {"kind": "product", "alphas": [1, 1], "ops": [
            {"kind": "const", "value": [1, 0]},
            {"kind": "scaled", "alpha": 2, "inner": {"kind": "normal_cone", "set": {"kind": "ball", "center": [0, 0], "radius": "x"}}}
        ]}}"#;
        let err = RunConfig::from_json(text).unwrap_err().to_string();
        assert!(err.contains("`problem.ops[1].inner.set.radius`"), "{err}");
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let text = MINIMAL.replace("\"dim\": 2", "\"dim\": 3");
        assert!(RunConfig::from_json(&text).unwrap().prepare().is_err());
    }

    #[test]
    fn seeded_start_is_reproducible() {
        let text = MINIMAL.replace(",\n        \"x0\": [0, 0]", "");
        let a = RunConfig::from_json(&text).unwrap().prepare().unwrap().x0;
        let b = RunConfig::from_json(&text).unwrap().prepare().unwrap().x0;
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
    }
}
