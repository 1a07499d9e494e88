//! Built-in field models addressed by name and flags.

use std::fmt;
use std::str::FromStr;

use crate::expr::{parse, Expr, Symbol};
use crate::field_models::chiral::{chiral_verify, symbolic_epsilon};
use crate::field_models::pform::{
    energy_momentum_extract, killing_current, noether_identity_check, pform_anchor_verify, pform_proper_symmetry,
    pform_residuals, triviality_witness,
};
use crate::field_models::selfdual::{selfdual_verify, Certificate};
use crate::field_models::{ChiralModel, LieAlgebra, PFormModel, SelfDualModel};
use crate::forms::{conformal_killing_check, FlatSpace, KillingKind, SpacetimeVector};
use crate::report::{ModelReport, Status};
use crate::runner::{execute, residual_outcome, Job, Outcome, RunError, RunOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CatalogModel {
    Pform,
    Selfdual,
    Chiral,
}

impl FromStr for CatalogModel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "pform" => Ok(CatalogModel::Pform),
            "selfdual" => Ok(CatalogModel::Selfdual),
            "chiral" => Ok(CatalogModel::Chiral),
            _ => Err(format!("unknown model `{}`; expected pform, selfdual or chiral", s)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum XiSelector {
    Translation(usize),
    Rotation(usize, usize),
    Dilation,
}

impl FromStr for XiSelector {
    type Err = String;
    /// `translation:μ`, `rotation:μν` (or `rotation:μ,ν`), `dilation`.
    fn from_str(s: &str) -> Result<Self, String> {
        let bad = || format!("bad vector field `{}`; expected translation:MU, rotation:MUNU or dilation", s);
        if s == "dilation" {
            return Ok(XiSelector::Dilation);
        }
        let (kind, arg) = s.split_once(':').ok_or_else(bad)?;
        match kind {
            "translation" => Ok(XiSelector::Translation(arg.parse().map_err(|_| bad())?)),
            "rotation" => {
                let (m, n) = match arg.split_once(',') {
                    Some((m, n)) => (m.parse().map_err(|_| bad())?, n.parse().map_err(|_| bad())?),
                    None if arg.len() == 2 => (arg[..1].parse().map_err(|_| bad())?, arg[1..].parse().map_err(|_| bad())?),
                    None => return Err(bad()),
                };
                if m >= n {
                    return Err(format!("rotation indices must be increasing, got `{}`", s));
                }
                Ok(XiSelector::Rotation(m, n))
            }
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for XiSelector {
    fn fmt(&self, f: &mut fmt::Formatter) -> fmt::Result {
        match self {
            XiSelector::Translation(m) => write!(f, "translation:{}", m),
            XiSelector::Rotation(m, n) => write!(f, "rotation:{}{}", m, n),
            XiSelector::Dilation => write!(f, "dilation"),
        }
    }
}

impl XiSelector {
    pub fn vector(&self, space: &FlatSpace) -> Result<SpacetimeVector, String> {
        let n = space.n();
        let check = |m: usize| {
            if m < n {
                Ok(())
            } else {
                Err(format!("index {} out of range for n = {}", m, n))
            }
        };
        match *self {
            XiSelector::Translation(m) => {
                check(m)?;
                Ok(SpacetimeVector::translation(n, m))
            }
            XiSelector::Rotation(m, k) => {
                check(k)?;
                Ok(SpacetimeVector::rotation(space, m, k))
            }
            XiSelector::Dilation => Ok(SpacetimeVector::dilation(space)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CatalogSpec {
    pub model: CatalogModel,
    pub n: Option<usize>,
    pub p: Option<usize>,
    pub a: String,
    pub b: String,
    pub g: String,
    pub xi: Vec<XiSelector>,
    pub algebra: String,
    pub signature: String,
}

impl CatalogSpec {
    pub fn new(model: CatalogModel) -> Self {
        CatalogSpec {
            model,
            n: None,
            p: None,
            a: "1".into(),
            b: "0".into(),
            g: "g".into(),
            xi: Vec::new(),
            algebra: "su2".into(),
            signature: "lorentzian".into(),
        }
    }
}

/// Constant coefficient from a flag: rationals and named parameters only.
pub fn constant_flag(name: &str, src: &str) -> Result<Expr, String> {
    let e = parse(src, &FlatSpace::euclidean(16).jet_space(Vec::new())).map_err(|e| format!("--{}: {}", name, e))?;
    if e.symbols().iter().any(|s| !matches!(s, Symbol::Param(_))) {
        return Err(format!("--{} must be constant, got `{}`", name, src));
    }
    Ok(e)
}

pub fn algebra(id: &str) -> Result<LieAlgebra, String> {
    if id == "su2" {
        return Ok(LieAlgebra::su2());
    }
    if let Some(k) = id.strip_prefix("abelian") {
        if let Ok(k) = k.parse::<usize>() {
            if k > 0 {
                return Ok(LieAlgebra::abelian(k));
            }
        }
    }
    Err(format!("unknown algebra `{}`; expected su2 or abelianN", id))
}

fn flat_space(signature: &str, n: usize) -> Result<FlatSpace, String> {
    match signature {
        "lorentzian" => Ok(FlatSpace::lorentzian(n)),
        "euclidean" => Ok(FlatSpace::euclidean(n)),
        _ => Err(format!("unknown signature `{}`; expected lorentzian or euclidean", signature)),
    }
}

fn certificate(c: &Certificate, js: &crate::expr::JetSpace) -> Outcome {
    if c.holds {
        Ok((Status::Pass, None))
    } else {
        Ok((Status::Fail, Some(c.residual.to_text(js))))
    }
}

fn verdict(holds: bool, residual: impl FnOnce() -> String) -> Outcome {
    if holds {
        Ok((Status::Pass, None))
    } else {
        Ok((Status::Fail, Some(residual())))
    }
}

fn all_killing(space: &FlatSpace) -> Vec<XiSelector> {
    let n = space.n();
    let mut out: Vec<XiSelector> = (0..n).map(XiSelector::Translation).collect();
    for m in 0..n {
        for k in m + 1..n {
            out.push(XiSelector::Rotation(m, k));
        }
    }
    out
}

/// A built model plus the text used as its report name.
pub enum Built {
    Pform(PFormModel),
    Selfdual(SelfDualModel),
    Chiral(ChiralModel),
}

pub fn build(spec: &CatalogSpec) -> Result<(Built, String), String> {
    match spec.model {
        CatalogModel::Pform => {
            let n = spec.n.unwrap_or(4);
            let p = spec.p.unwrap_or(2);
            let a = constant_flag("a", &spec.a)?;
            let b = constant_flag("b", &spec.b)?;
            let space = flat_space(&spec.signature, n)?;
            let m = PFormModel::new(space, p, a, b).map_err(|e| e.to_string())?;
            let name = format!("pform n={} p={} a={} b={} signature={}", n, p, spec.a, spec.b, spec.signature);
            Ok((Built::Pform(m), name))
        }
        CatalogModel::Selfdual => {
            let n = spec.n.unwrap_or(2);
            let m = SelfDualModel::new(flat_space(&spec.signature, n)?).map_err(|e| e.to_string())?;
            Ok((Built::Selfdual(m), format!("selfdual n={}", n)))
        }
        CatalogModel::Chiral => {
            if spec.n.is_some_and(|n| n != 2) {
                return Err("chiral bosons live in n = 2".into());
            }
            if spec.signature != "lorentzian" {
                return Err("chiral bosons need lorentzian signature".into());
            }
            let alg = algebra(&spec.algebra)?;
            let g = constant_flag("g", &spec.g)?;
            let name = format!("chiral algebra={} g={}", spec.algebra, spec.g);
            Ok((Built::Chiral(ChiralModel::new(alg, g)), name))
        }
    }
}

pub fn catalog_jobs<'a>(built: &'a Built, xi: &[XiSelector]) -> Result<Vec<Job<'a>>, String> {
    let mut jobs = Vec::new();
    match built {
        Built::Pform(m) => {
            let js = m.jet_space();
            let space = m.space();
            let xis = if xi.is_empty() {
                let mut v = all_killing(space);
                if m.n() == 2 * m.p() {
                    v.push(XiSelector::Dilation);
                }
                v
            } else {
                xi.to_vec()
            };
            jobs.push(Job::new("noether", move || {
                let (t1, t2) = pform_residuals(m).map_err(|e| e.to_string())?;
                verdict(noether_identity_check(&t1, &t2).map_err(|e| e.to_string())?, || {
                    "dT1 or dT2 does not vanish".into()
                })
            }));
            {
                let js = js.clone();
                jobs.push(Job::new("anchor", move || {
                    let (holds, diff) = pform_anchor_verify(m).map_err(|e| e.to_string())?;
                    verdict(holds, || {
                        diff.entries()
                            .map(|((r, c, _), e)| format!("[{},{}] {}", r, c, e.to_text(&js)))
                            .collect::<Vec<_>>()
                            .join("; ")
                    })
                }));
            }
            jobs.push(Job::new("triviality", move || {
                let w = triviality_witness(m).map_err(|e| e.to_string())?;
                Ok((
                    Status::Pass,
                    Some(match w {
                        Some(_) => "trivial: V* = J o (a Id)".into(),
                        None => "nontrivial".into(),
                    }),
                ))
            }));
            {
                let js = js.clone();
                jobs.push(Job::new("energy_momentum.symmetric", move || {
                    match energy_momentum_extract(m) {
                        Ok(_) => Ok((Status::Pass, None)),
                        Err(crate::field_models::ModelError::Asymmetric(a, b, r)) => {
                            Ok((Status::Fail, Some(format!("T[{}][{}] - T[{}][{}] = {}", a, b, b, a, r))))
                        }
                        Err(e) => Err(e.to_string()),
                    }
                }));
                jobs.push(Job::new("energy_momentum.traceless", move || {
                    if m.n() != 2 * m.p() {
                        return Ok((Status::Skip, Some("traceless only expected for n = 2p".into())));
                    }
                    let t = energy_momentum_extract(m).map_err(|e| e.to_string())?;
                    verdict(t.traceless, || t.trace.to_text(&js))
                }));
            }
            for s in xis {
                let v = s.vector(space)?;
                let kind = conformal_killing_check(&v, space).map_err(|e| e.to_string())?;
                match kind {
                    KillingKind::Neither => return Err(format!("{} is not a conformal Killing vector", s)),
                    KillingKind::Conformal if m.n() != 2 * m.p() => {
                        return Err(format!("{} is only conformal; needs n = 2p", s))
                    }
                    _ => {}
                }
                let (js1, js2, v2) = (js.clone(), js.clone(), v.clone());
                jobs.push(Job::new(format!("current[{}]", s), move || {
                    let c = killing_current(m, &v).map_err(|e| e.to_string())?;
                    verdict(c.certificate, || c.residual.to_text(&js1))
                }));
                jobs.push(Job::new(format!("proper_symmetry[{}]", s), move || {
                    let r = pform_proper_symmetry(m, &v2).map_err(|e| e.to_string())?;
                    verdict(r.holds, || r.residual.to_text(&js2))
                }));
            }
        }
        Built::Selfdual(sd) => {
            let space = sd.space();
            let xis = if xi.is_empty() {
                let mut v = all_killing(space);
                v.push(XiSelector::Dilation);
                v
            } else {
                xi.to_vec()
            };
            for s in xis {
                let v = s.vector(space)?;
                // one verification per vector field, shared by its three records
                let report = std::sync::Arc::new(std::sync::OnceLock::new());
                for part in ["current", "isotropy", "variation"] {
                    let (v, report) = (v.clone(), report.clone());
                    let js = sd.jet_space();
                    jobs.push(Job::new(format!("{}[{}]", part, s), move || {
                        let r = report
                            .get_or_init(|| selfdual_verify(sd, &v).map_err(|e| e.to_string()))
                            .clone()?;
                        let c = match part {
                            "current" => &r.current,
                            "isotropy" => &r.isotropy,
                            _ => &r.variation,
                        };
                        certificate(c, &js)
                    }));
                }
            }
        }
        Built::Chiral(m) => {
            if !xi.is_empty() {
                return Err("--xi does not apply to the chiral model".into());
            }
            let report = std::sync::Arc::new(std::sync::OnceLock::new());
            for part in ["current", "variation", "symmetry", "jacobi"] {
                let report = report.clone();
                let js = m.jet_space();
                jobs.push(Job::new(part, move || {
                    let r = report
                        .get_or_init(|| chiral_verify(m, &symbolic_epsilon(m.n_fields())).map_err(|e| e.to_string()))
                        .clone()?;
                    match part {
                        "current" => certificate(&r.current, &js),
                        "variation" => certificate(&r.variation, &js),
                        "symmetry" => certificate(&r.symmetry, &js),
                        _ => residual_outcome(r.jacobi.is_empty(), &r.jacobi, &js, Default::default()),
                    }
                }));
            }
        }
    }
    Ok(jobs)
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CatalogError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Run(#[from] RunError),
}

pub fn run_catalog(spec: &CatalogSpec, opts: &RunOptions) -> Result<ModelReport, CatalogError> {
    let (built, name) = build(spec).map_err(CatalogError::Usage)?;
    let jobs = catalog_jobs(&built, &spec.xi).map_err(CatalogError::Usage)?;
    Ok(execute(&name, jobs, opts, None)?)
}
