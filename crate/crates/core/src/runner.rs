//! Dispatch of named checks with order-stable, optionally parallel execution.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

use rayon::prelude::*;

use crate::expr::{eval::is_zero, Expr, JetSpace, Limits};
use crate::model::ModelFile;
use crate::ode_anchor::{
    anchor_apply, check_anchor, check_characteristic, check_symmetry, deform, proper_symmetry_conditions,
    schouten_square, twist_invariance_check, vertical_differential, Check, OdeSystem,
};
use crate::report::{CheckRecord, ModelReport, Status};

/// What a single check produced: a status and optional residual text.
pub type Outcome = Result<(Status, Option<String>), String>;

pub struct Job<'a> {
    pub name: String,
    pub run: Box<dyn Fn() -> Outcome + Send + Sync + 'a>,
}

impl<'a> Job<'a> {
    pub fn new(name: impl Into<String>, run: impl Fn() -> Outcome + Send + Sync + 'a) -> Self {
        Job {
            name: name.into(),
            run: Box::new(run),
        }
    }
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    /// Exact check names or families (`characteristic` selects every
    /// `characteristic[k]`).
    pub only: Option<Vec<String>>,
    pub timings: bool,
    pub limits: Limits,
    pub sequential: bool,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RunError {
    #[error("unknown check `{0}`; available: {1}")]
    UnknownCheck(String, String),
}

fn family(name: &str) -> &str {
    name.split('[').next().unwrap_or(name)
}

/// Keeps the jobs named in `only`; every entry must match something.
pub fn select<'a>(jobs: Vec<Job<'a>>, only: Option<&[String]>) -> Result<Vec<Job<'a>>, RunError> {
    let Some(only) = only else { return Ok(jobs) };
    for want in only {
        if !jobs.iter().any(|j| j.name == *want || family(&j.name) == want) {
            let mut names: Vec<&str> = jobs.iter().map(|j| j.name.as_str()).collect();
            names.sort_unstable();
            return Err(RunError::UnknownCheck(want.clone(), names.join(", ")));
        }
    }
    Ok(jobs
        .into_iter()
        .filter(|j| only.iter().any(|w| j.name == *w || family(&j.name) == w))
        .collect())
}

fn run_one(job: &Job, timings: bool) -> CheckRecord {
    let start = Instant::now();
    let out = catch_unwind(AssertUnwindSafe(|| (job.run)())).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_else(|| "panic".to_string());
        Err(format!("internal error: {}", msg))
    });
    let (status, residual) = out.unwrap_or_else(|e| (Status::Error, Some(e)));
    let mut rec = CheckRecord::new(job.name.clone(), status, residual);
    if timings {
        rec.ms = Some(start.elapsed().as_millis() as u64);
    }
    rec
}

pub fn execute(model: &str, jobs: Vec<Job>, opts: &RunOptions, seed: Option<u64>) -> Result<ModelReport, RunError> {
    let jobs = select(jobs, opts.only.as_deref())?;
    let records: Vec<CheckRecord> = if opts.sequential {
        jobs.iter().map(|j| run_one(j, opts.timings)).collect()
    } else {
        jobs.par_iter().map(|j| run_one(j, opts.timings)).collect()
    };
    Ok(ModelReport::new(model, records, seed))
}

/// Residual text of the nonvanishing entries, or ERROR past the node cap.
pub fn residual_outcome(holds: bool, residuals: &[Expr], js: &JetSpace, limits: Limits) -> Outcome {
    if holds {
        return Ok((Status::Pass, None));
    }
    let mut parts = Vec::new();
    for (k, r) in residuals.iter().enumerate() {
        if r.node_count() > limits.max_nodes {
            return Err(format!(
                "resource limit exceeded: residual has {} nodes, cap is {}",
                r.node_count(),
                limits.max_nodes
            ));
        }
        if !is_zero(r).map_err(|e| e.to_string())? {
            parts.push(format!("[{}] {}", k, r.to_text(js)));
        }
    }
    Ok((Status::Fail, Some(parts.join("; "))))
}

fn check_outcome(c: Check, js: &JetSpace, limits: Limits) -> Outcome {
    residual_outcome(c.holds, &c.residuals, js, limits)
}

fn skip(msg: &str) -> Outcome {
    Ok((Status::Skip, Some(msg.to_string())))
}

const NO_ANCHOR: &str = "no [anchor] section";

/// Every check applicable to an ODE model file, unsorted.
pub fn ode_jobs(m: &ModelFile, limits: Limits) -> Vec<Job<'_>> {
    let js = m.space();
    let sys = &m.system;
    let mut jobs = Vec::new();
    {
        let js = js.clone();
        jobs.push(Job::new("anchor", move || match &m.alpha {
            None => skip(NO_ANCHOR),
            Some(a) => check_outcome(check_anchor(sys, a).map_err(|e| e.to_string())?, &js, limits),
        }));
    }
    {
        let js = js.clone();
        jobs.push(Job::new("schouten", move || match &m.alpha {
            None => skip(NO_ANCHOR),
            Some(a) => {
                let s = schouten_square(a);
                let holds = s.is_zero().map_err(|e| e.to_string())?;
                let res: Vec<Expr> = s.components().map(|(_, e)| e.clone()).collect();
                residual_outcome(holds, &res, &js, limits)
            }
        }));
    }
    for (k, f) in m.characteristics.iter().enumerate() {
        let js1 = js.clone();
        jobs.push(Job::new(format!("characteristic[{}]", k), move || {
            check_outcome(check_characteristic(sys, f).map_err(|e| e.to_string())?, &js1, limits)
        }));
        let js2 = js.clone();
        jobs.push(Job::new(format!("anchor_apply[{}]", k), move || match &m.alpha {
            None => skip(NO_ANCHOR),
            Some(a) => {
                let w = anchor_apply(a, f);
                check_outcome(check_symmetry(sys, &w).map_err(|e| e.to_string())?, &js2, limits)
            }
        }));
        let js3 = js.clone();
        jobs.push(Job::new(format!("proper_symmetry[{}]", k), move || match &m.alpha {
            None => skip(NO_ANCHOR),
            Some(a) => {
                let psi = vertical_differential(f, sys.n());
                check_outcome(
                    proper_symmetry_conditions(sys, a, &psi).map_err(|e| e.to_string())?,
                    &js3,
                    limits,
                )
            }
        }));
    }
    for (k, w) in m.symmetries.iter().enumerate() {
        let js = js.clone();
        jobs.push(Job::new(format!("symmetry[{}]", k), move || {
            check_outcome(check_symmetry(sys, w).map_err(|e| e.to_string())?, &js, limits)
        }));
    }
    if let Some(h) = &m.hamiltonian {
        let js1 = js.clone();
        jobs.push(Job::new("twist", move || match &m.alpha {
            None => skip(NO_ANCHOR),
            Some(a) => {
                // the system must be the free system deformed by H
                let d = deform(&OdeSystem::free(sys.n()), a, h).map_err(|e| e.to_string())?;
                let res: Vec<Expr> = d.v().iter().zip(sys.v()).map(|(x, y)| x - y).collect();
                let mut holds = true;
                for r in &res {
                    holds &= is_zero(r).map_err(|e| e.to_string())?;
                }
                residual_outcome(holds, &res, &js1, limits)
            }
        }));
        for (k, f) in m.characteristics.iter().enumerate() {
            jobs.push(Job::new(format!("twist[{}]", k), move || match &m.alpha {
                None => skip(NO_ANCHOR),
                Some(a) => {
                    let v = twist_invariance_check(&OdeSystem::free(sys.n()), a, f, h).map_err(|e| e.to_string())?;
                    match (v.holds, v.diagnostic) {
                        (true, _) => Ok((Status::Pass, None)),
                        (false, Some(d)) if d.starts_with("not applicable") => skip(&d),
                        (false, d) => Ok((Status::Fail, d)),
                    }
                }
            }));
        }
    }
    jobs
}

pub fn run_checks(m: &ModelFile, name: &str, opts: &RunOptions) -> Result<ModelReport, RunError> {
    execute(name, ode_jobs(m, opts.limits), opts, None)
}
