//! Scenario-driven batch runner: resolves a JSON scenario, runs the requested
//! suites in a work pool and assembles an exact report.

pub mod checks;
mod samples;
pub mod scenario;

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
pub use checks::{info, CheckInfo, CHECKS};
pub use scenario::{load_scenario, parse_scenario, Resolved, Scenario};

pub const SUITES: &[&str] = &["weyl", "fedosov", "poisson", "hochschild", "star", "dgla", "index"];

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CheckReport {
    pub id: String,
    pub paper_anchor: String,
    /// `pass`, `fail` or `error`.
    pub status: String,
    pub residual: String,
    pub millis: u64,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct SuiteReport {
    pub name: String,
    pub checks: Vec<CheckReport>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Environment {
    pub scenario: String,
    pub kind: String,
    pub dim: usize,
    pub base_cutoff: u32,
    pub fiber_max: u32,
    pub hbar_max: u32,
    pub t_max: u32,
    pub matrix_size: usize,
    pub seed: u64,
    pub samples: usize,
    pub homotopy: bool,
    pub suites: Vec<String>,
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Report {
    pub environment: Environment,
    pub suites: Vec<SuiteReport>,
}

impl Report {
    /// Every residual is the zero series.
    pub fn passed(&self) -> bool {
        self.suites.iter().flat_map(|s| &s.checks).all(|c| c.status == "pass")
    }

    pub fn check(&self, id: &str) -> Option<&CheckReport> {
        self.suites.iter().flat_map(|s| &s.checks).find(|c| c.id == id)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Overrides the scenario's suite list when nonempty.
    pub suites: Vec<String>,
    pub seed: Option<u64>,
    /// Record wall-clock time per check; off gives byte-identical reports.
    pub timings: bool,
}

pub fn run(scenario: &Scenario, opts: &RunOptions) -> Result<Report> {
    let mut sc = scenario.clone();
    if !opts.suites.is_empty() {
        sc.suites = opts.suites.clone();
    }
    if let Some(seed) = opts.seed {
        sc.seed = seed;
    }
    let resolved = sc.resolve()?;
    let m = resolved.model;
    let environment = Environment {
        scenario: sc.name.clone(),
        kind: if m.is_torus() { "torus" } else { "plane" }.into(),
        dim: m.dim,
        base_cutoff: m.base_cutoff,
        fiber_max: m.fiber_max,
        hbar_max: m.hbar_max,
        t_max: m.t_max,
        matrix_size: m.matrix_size,
        seed: sc.seed,
        samples: sc.samples,
        homotopy: sc.homotopy,
        suites: sc.suites.clone(),
    };

    let mut suite_names: Vec<&str> = Vec::new();
    for s in &sc.suites {
        if !suite_names.contains(&s.as_str()) {
            suite_names.push(s);
        }
    }
    let jobs: Vec<checks::Job> = suite_names.iter().flat_map(|s| checks::jobs(&resolved, s)).collect();
    let done: Vec<(&'static str, Vec<CheckReport>)> = jobs
        .par_iter()
        .map(|job| {
            let start = Instant::now();
            let outcomes = (job.run)();
            let millis = if opts.timings { start.elapsed().as_millis() as u64 } else { 0 };
            let reports = outcomes
                .into_iter()
                .map(|o| {
                    let (status, residual) = match o.result {
                        Ok(r) if r.zero => ("pass", r.text),
                        Ok(r) => ("fail", r.text),
                        Err(e) => ("error", e.to_string()),
                    };
                    CheckReport {
                        paper_anchor: info(&o.id).map(|i| i.anchor).unwrap_or("").into(),
                        id: o.id,
                        status: status.into(),
                        residual,
                        millis,
                    }
                })
                .collect();
            (job.suite, reports)
        })
        .collect();

    let suites = suite_names
        .iter()
        .map(|name| {
            let mut checks: Vec<CheckReport> = done
                .iter()
                .filter(|(s, _)| s == name)
                .flat_map(|(_, c)| c.iter().cloned())
                .collect();
            checks.sort_by(|a, b| a.id.cmp(&b.id));
            SuiteReport {
                name: name.to_string(),
                checks,
            }
        })
        .collect();
    Ok(Report { environment, suites })
}

/// The identity a check realizes, with its suite.
pub fn explain(id: &str) -> Result<String> {
    let i = info(id).ok_or_else(|| Error::Unknown {
        kind: "check",
        name: id.into(),
    })?;
    Ok(format!("{} ({} suite): {}", i.id, i.suite, i.anchor))
}

pub fn list_suites() -> String {
    let mut out = String::new();
    for s in SUITES {
        let ids: Vec<&str> = CHECKS.iter().filter(|c| c.suite == *s).map(|c| c.id).collect();
        out.push_str(&format!("{s}: {}\n", ids.join(", ")));
    }
    out
}
