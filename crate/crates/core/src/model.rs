//! Model definition files for ODE systems.
//!
//! ```text
//! # harmonic oscillator
//! [ode]
//! n = 2
//! v = [-x2, x1]
//!
//! [anchor]
//! alpha_12 = 1
//!
//! [characteristic]
//! f = 1/2*x1^2 + 1/2*x2^2
//!
//! [symmetry]
//! w = [x2, -x1]
//!
//! [hamiltonian]
//! H = 1/2*x1^2 + 1/2*x2^2
//! ```
//!
//! `f` and `w` may repeat. Lines starting with `#` are comments.

use std::fmt::Write as _;
use std::path::Path;

use crate::expr::parse::parse_with;
use crate::expr::{Expr, ExprError, JetSpace, Limits};
use crate::ode_anchor::{Bivector, OdeError, OdeSystem};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelFileError {
    #[error("{line}:{col}: {msg}")]
    Syntax { line: usize, col: usize, msg: String },
    #[error("missing [ode] section")]
    MissingOde,
    #[error("{line}: dimension mismatch: {msg}")]
    Dimension { line: usize, msg: String },
    #[error("{line}: unknown section [{name}]")]
    UnknownSection { line: usize, name: String },
    #[error("cannot read {0}: {1}")]
    Io(String, String),
    #[error(transparent)]
    Model(#[from] OdeError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModelFile {
    pub system: OdeSystem,
    pub alpha: Option<Bivector>,
    pub characteristics: Vec<Expr>,
    pub symmetries: Vec<Vec<Expr>>,
    pub hamiltonian: Option<Expr>,
}

const SECTIONS: [&str; 5] = ["ode", "anchor", "characteristic", "symmetry", "hamiltonian"];

struct Entry<'a> {
    line: usize,
    key: &'a str,
    value: &'a str,
    /// Column of the first character of `value`.
    col: usize,
}

fn syntax(line: usize, col: usize, msg: impl Into<String>) -> ModelFileError {
    ModelFileError::Syntax { line, col, msg: msg.into() }
}

fn lift(e: ExprError, line: usize) -> ModelFileError {
    match e {
        ExprError::Parse { line, col, msg } => ModelFileError::Syntax { line, col, msg },
        other => ModelFileError::Syntax { line, col: 1, msg: other.to_string() },
    }
}

/// Splits `[a, b, c]` at top-level commas; yields each item with its column.
fn split_list(value: &str, line: usize, col: usize) -> Result<Vec<(&str, usize)>, ModelFileError> {
    let inner = value
        .strip_prefix('[')
        .and_then(|v| v.strip_suffix(']'))
        .ok_or_else(|| syntax(line, col, "expected a list `[expr, ...]`"))?;
    let mut items = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, ch) in inner.char_indices() {
        match ch {
            '(' => depth += 1,
            ')' => depth -= 1,
            ',' if depth == 0 => {
                items.push((&inner[start..i], col + 1 + inner[..start].chars().count()));
                start = i + 1;
            }
            _ => {}
        }
    }
    items.push((&inner[start..], col + 1 + inner[..start].chars().count()));
    if items.len() == 1 && items[0].0.trim().is_empty() {
        return Ok(Vec::new());
    }
    Ok(items)
}

fn expr_at(src: &str, col: usize, line: usize, space: &JetSpace, limits: Limits) -> Result<Expr, ModelFileError> {
    parse_with(src, space, limits, line, col).map_err(|e| lift(e, line))
}

fn list_at(e: &Entry, space: &JetSpace, limits: Limits) -> Result<Vec<Expr>, ModelFileError> {
    split_list(e.value, e.line, e.col)?
        .into_iter()
        .map(|(s, c)| expr_at(s, c, e.line, space, limits))
        .collect()
}

pub fn parse_model(src: &str) -> Result<ModelFile, ModelFileError> {
    parse_model_with(src, Limits::from_env())
}

pub fn parse_model_with(src: &str, limits: Limits) -> Result<ModelFile, ModelFileError> {
    let mut sections: Vec<(String, usize, Vec<Entry>)> = Vec::new();
    for (k, raw) in src.lines().enumerate() {
        let line = k + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let indent = raw.len() - raw.trim_start().len();
        if let Some(name) = trimmed.strip_prefix('[').and_then(|t| t.strip_suffix(']')) {
            let name = name.trim();
            if !SECTIONS.contains(&name) {
                return Err(ModelFileError::UnknownSection { line, name: name.to_string() });
            }
            if sections.iter().any(|(n, _, _)| n == name) {
                return Err(syntax(line, indent + 1, format!("duplicate section [{}]", name)));
            }
            sections.push((name.to_string(), line, Vec::new()));
            continue;
        }
        let Some(eq) = raw.find('=') else {
            return Err(syntax(line, indent + 1, "expected `key = value`"));
        };
        let Some(sec) = sections.last_mut() else {
            return Err(syntax(line, indent + 1, "entry outside of a section"));
        };
        let key = raw[..eq].trim();
        let after = &raw[eq + 1..];
        let lead = after.len() - after.trim_start().len();
        let col = raw[..eq + 1 + lead].chars().count() + 1;
        sec.2.push(Entry { line, key, value: after.trim(), col });
    }
    let Some(pos) = sections.iter().position(|(n, _, _)| n == "ode") else {
        return Err(ModelFileError::MissingOde);
    };
    let (_, ode_line, ode) = &sections[pos];
    let mut n = None;
    let mut v_entry = None;
    for e in ode {
        match e.key {
            "n" => {
                let k: usize = e
                    .value
                    .parse()
                    .map_err(|_| syntax(e.line, e.col, "n must be a positive integer"))?;
                if k == 0 {
                    return Err(syntax(e.line, e.col, "n must be a positive integer"));
                }
                n = Some(k);
            }
            "v" => v_entry = Some(e),
            other => return Err(syntax(e.line, 1, format!("unknown key `{}` in [ode]", other))),
        }
    }
    let n = n.ok_or_else(|| syntax(*ode_line, 1, "[ode] needs `n = <int>`"))?;
    let v_entry = v_entry.ok_or_else(|| syntax(*ode_line, 1, "[ode] needs `v = [...]`"))?;
    let space = JetSpace::ode(n);
    let v = list_at(v_entry, &space, limits)?;
    if v.len() != n {
        return Err(ModelFileError::Dimension {
            line: v_entry.line,
            msg: format!("v has {} components, n = {}", v.len(), n),
        });
    }
    let mut model = ModelFile {
        system: OdeSystem::new(v)?,
        alpha: None,
        characteristics: Vec::new(),
        symmetries: Vec::new(),
        hamiltonian: None,
    };
    for (name, _, entries) in &sections {
        for e in entries {
            match (name.as_str(), e.key) {
                ("ode", _) => {}
                ("anchor", key) => {
                    let (i, j) = anchor_key(key, n).ok_or_else(|| {
                        syntax(e.line, 1, format!("expected alpha_ij with 1 <= i < j <= {}, got `{}`", n, key))
                    })?;
                    let a = model.alpha.get_or_insert_with(|| Bivector::zero(n));
                    a.set(i, j, expr_at(e.value, e.col, e.line, &space, limits)?);
                }
                ("characteristic", "f") => model
                    .characteristics
                    .push(expr_at(e.value, e.col, e.line, &space, limits)?),
                ("symmetry", "w") => {
                    let w = list_at(e, &space, limits)?;
                    if w.len() != n {
                        return Err(ModelFileError::Dimension {
                            line: e.line,
                            msg: format!("w has {} components, n = {}", w.len(), n),
                        });
                    }
                    model.symmetries.push(w);
                }
                ("hamiltonian", "H") => model.hamiltonian = Some(expr_at(e.value, e.col, e.line, &space, limits)?),
                (sec, key) => return Err(syntax(e.line, 1, format!("unknown key `{}` in [{}]", key, sec))),
            }
        }
    }
    if let Some(a) = &model.alpha {
        a.validate()?;
    }
    Ok(model)
}

fn anchor_key(key: &str, n: usize) -> Option<(usize, usize)> {
    let digits = key.strip_prefix("alpha_")?;
    // single digits when n < 10, otherwise `i,j`
    let (i, j) = match digits.split_once(',') {
        Some((a, b)) => (a.parse::<usize>().ok()?, b.parse::<usize>().ok()?),
        None if digits.len() == 2 => (digits[..1].parse().ok()?, digits[1..].parse().ok()?),
        None => return None,
    };
    (1 <= i && i < j && j <= n).then_some((i - 1, j - 1))
}

pub fn read_model(path: &Path) -> Result<ModelFile, ModelFileError> {
    let src = std::fs::read_to_string(path).map_err(|e| ModelFileError::Io(path.display().to_string(), e.to_string()))?;
    parse_model(&src)
}

impl ModelFile {
    pub fn n(&self) -> usize {
        self.system.n()
    }

    pub fn space(&self) -> JetSpace {
        self.system.space()
    }

    /// Canonical text; `parse_model(print())` reproduces the model.
    pub fn print(&self) -> String {
        let js = self.space();
        let list = |es: &[Expr]| {
            format!("[{}]", es.iter().map(|e| e.to_text(&js)).collect::<Vec<_>>().join(", "))
        };
        let mut out = String::new();
        writeln!(out, "[ode]\nn = {}\nv = {}", self.n(), list(self.system.v())).unwrap();
        if let Some(a) = &self.alpha {
            out.push_str("\n[anchor]\n");
            for ((i, j), e) in a.upper() {
                let key = if self.n() < 10 {
                    format!("{}{}", i + 1, j + 1)
                } else {
                    format!("{},{}", i + 1, j + 1)
                };
                writeln!(out, "alpha_{} = {}", key, e.to_text(&js)).unwrap();
            }
        }
        if !self.characteristics.is_empty() {
            out.push_str("\n[characteristic]\n");
            for f in &self.characteristics {
                writeln!(out, "f = {}", f.to_text(&js)).unwrap();
            }
        }
        if !self.symmetries.is_empty() {
            out.push_str("\n[symmetry]\n");
            for w in &self.symmetries {
                writeln!(out, "w = {}", list(w)).unwrap();
            }
        }
        if let Some(h) = &self.hamiltonian {
            writeln!(out, "\n[hamiltonian]\nH = {}", h.to_text(&js)).unwrap();
        }
        out
    }
}
