//! Check records and their JSON / column renderings.

use serde::Serialize;

pub const REPORT_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Status {
    Pass,
    Fail,
    Skip,
    Error,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "SKIP",
            Status::Error => "ERROR",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub status: Status,
    /// Residual text for FAIL, message for ERROR and SKIP.
    pub residual: Option<String>,
    /// Wall time; only filled when timings are requested so reports stay
    /// reproducible by default.
    pub ms: Option<u64>,
}

impl CheckRecord {
    pub fn new(name: impl Into<String>, status: Status, residual: Option<String>) -> Self {
        CheckRecord {
            name: name.into(),
            status,
            residual,
            ms: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ModelReport {
    pub version: String,
    pub model: String,
    pub checks: Vec<CheckRecord>,
    pub seed: Option<u64>,
}

impl ModelReport {
    pub fn new(model: impl Into<String>, mut checks: Vec<CheckRecord>, seed: Option<u64>) -> Self {
        checks.sort_by(|a, b| a.name.cmp(&b.name));
        ModelReport {
            version: REPORT_VERSION.to_string(),
            model: model.into(),
            checks,
            seed,
        }
    }

    pub fn get(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// 0 if everything passed or was skipped, 1 on any FAIL, 2 on any ERROR.
    pub fn exit_code(&self) -> i32 {
        if self.checks.iter().any(|c| c.status == Status::Error) {
            2
        } else if self.checks.iter().any(|c| c.status == Status::Fail) {
            1
        } else {
            0
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn to_human(&self) -> String {
        let w = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0).max(5);
        let mut out = format!("model: {}\n", self.model);
        if let Some(seed) = self.seed {
            out.push_str(&format!("seed: {}\n", seed));
        }
        out.push_str(&format!("{:<w$}  {:<6}{}\n", "check", "status", "  residual", w = w));
        for c in &self.checks {
            let mut line = format!("{:<w$}  {:<6}", c.name, c.status.as_str(), w = w);
            if let Some(ms) = c.ms {
                line.push_str(&format!("  {:>6}ms", ms));
            }
            if let Some(r) = &c.residual {
                line.push_str("  ");
                line.push_str(r);
            }
            out.push_str(line.trim_end());
            out.push('\n');
        }
        let count = |s| self.checks.iter().filter(|c| c.status == s).count();
        out.push_str(&format!(
            "{} passed, {} failed, {} skipped, {} errors\n",
            count(Status::Pass),
            count(Status::Fail),
            count(Status::Skip),
            count(Status::Error)
        ));
        out
    }
}
