//! Machine-checkable property suites: every invariant of the numerics,
//! geometry, laplacian, flow and soliton modules, evaluated with pinned
//! tolerances and reported as pass/fail records.
//!
//! The same records back the `verify` CLI subcommand and the acceptance
//! test suite.

mod cy_soliton;
mod flow_checks;
mod geometry_checks;
mod laplacian_checks;
mod nk_soliton;
mod numerics_checks;
pub mod sampling;

use serde::Serialize;
use std::time::Instant;

/// Outcome of one named check.
#[derive(Debug, Clone, Serialize)]
pub struct CheckReport {
    pub suite: &'static str,
    pub name: &'static str,
    pub passed: bool,
    /// the quantity the check measured (worst error, ratio, ...)
    pub measured: f64,
    /// the bound it was held against
    pub tolerance: f64,
    pub elapsed_s: f64,
    pub detail: String,
}

pub(crate) struct Check {
    pub suite: &'static str,
    pub name: &'static str,
    pub run: fn() -> CheckOutcome,
}

pub(crate) struct CheckOutcome {
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

impl CheckOutcome {
    /// Pass when `measured <= tolerance`.
    pub fn bounded(measured: f64, tolerance: f64, detail: impl Into<String>) -> Self {
        CheckOutcome {
            passed: measured <= tolerance,
            measured,
            tolerance,
            detail: detail.into(),
        }
    }

    pub fn flag(passed: bool, detail: impl Into<String>) -> Self {
        CheckOutcome {
            passed,
            measured: if passed { 1.0 } else { 0.0 },
            tolerance: 1.0,
            detail: detail.into(),
        }
    }
}

pub const SUITES: &[&str] = &[
    "numerics",
    "geometry",
    "laplacian",
    "flow",
    "cy-soliton",
    "nk-soliton",
];

fn all_checks() -> Vec<Check> {
    let mut checks = Vec::new();
    checks.extend(numerics_checks::checks());
    checks.extend(geometry_checks::checks());
    checks.extend(laplacian_checks::checks());
    checks.extend(flow_checks::checks());
    checks.extend(cy_soliton::checks());
    checks.extend(nk_soliton::checks());
    checks
}

/// Run one suite (or `"all"`). Returns `None` for an unknown suite name.
pub fn run_suite(suite: &str) -> Option<Vec<CheckReport>> {
    if suite != "all" && !SUITES.contains(&suite) {
        return None;
    }
    let reports = all_checks()
        .into_iter()
        .filter(|c| suite == "all" || c.suite == suite)
        .map(|c| {
            let start = Instant::now();
            let outcome = (c.run)();
            CheckReport {
                suite: c.suite,
                name: c.name,
                passed: outcome.passed,
                measured: outcome.measured,
                tolerance: outcome.tolerance,
                elapsed_s: start.elapsed().as_secs_f64(),
                detail: outcome.detail,
            }
        })
        .collect();
    Some(reports)
}

/// Convenience accessor used by the acceptance suite: run a single named
/// check from any suite.
pub fn run_check(suite: &str, name: &str) -> Option<CheckReport> {
    run_suite(suite)?.into_iter().find(|r| r.name == name)
}
