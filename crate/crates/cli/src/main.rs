use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use anchorcheck::catalog::{run_catalog, CatalogError, CatalogModel, CatalogSpec, XiSelector};
use anchorcheck::expr::Limits;
use anchorcheck::model::{read_model, ModelFile};
use anchorcheck::ode_anchor::{check_characteristic, search_characteristics};
use anchorcheck::oracle::{numeric_oracle, DEFAULT_STEP, DEFAULT_TOLERANCE, DEFAULT_T_END};
use anchorcheck::report::{CheckRecord, ModelReport, Status};
use anchorcheck::runner::{run_checks, RunOptions};

const CONVENTIONS: &str = include_str!("../../../docs/conventions.md");

#[derive(Parser)]
#[command(name = "anchorcheck", version, about = "Exact checks of Lagrange anchors, characteristics and symmetries")]
struct Cli {
    /// Print the sign and Hodge convention sheet and exit.
    #[arg(long, global = true)]
    convention: bool,
    #[command(subcommand)]
    cmd: Option<Cmd>,
}

#[derive(Args, Clone)]
struct Output {
    /// Emit the JSON report instead of aligned columns.
    #[arg(long)]
    json: bool,
    /// Record wall time per check (makes reports non-reproducible).
    #[arg(long)]
    timings: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run the check suite of a model file.
    Check {
        model: PathBuf,
        /// Comma-separated check names or families.
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
        #[command(flatten)]
        out: Output,
    },
    /// Run the checks of a built-in field model.
    Catalog {
        /// pform, selfdual or chiral.
        model: CatalogModel,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<usize>,
        #[arg(long, default_value = "1", allow_hyphen_values = true)]
        a: String,
        #[arg(long, default_value = "0", allow_hyphen_values = true)]
        b: String,
        #[arg(long, default_value = "g", allow_hyphen_values = true)]
        g: String,
        /// translation:MU, rotation:MUNU or dilation; repeatable.
        #[arg(long)]
        xi: Vec<XiSelector>,
        /// su2 or abelianN.
        #[arg(long, default_value = "su2")]
        algebra: String,
        /// lorentzian or euclidean.
        #[arg(long, default_value = "lorentzian")]
        signature: String,
        #[arg(long, value_delimiter = ',')]
        only: Option<Vec<String>>,
        #[command(flatten)]
        out: Output,
    },
    /// Integrate the model numerically and report drift of each characteristic.
    Oracle {
        model: PathBuf,
        #[arg(long, default_value_t = DEFAULT_T_END)]
        t_end: f64,
        #[arg(long, default_value_t = DEFAULT_STEP)]
        step: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tolerance: f64,
        #[arg(long)]
        json: bool,
    },
    /// Search for polynomial characteristics up to a degree.
    Search {
        model: PathBuf,
        #[arg(long)]
        degree: u32,
        #[arg(long)]
        json: bool,
    },
}

fn usage(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("error: {}", msg);
    ExitCode::from(2)
}

fn model_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn load(path: &Path) -> Result<ModelFile, ExitCode> {
    read_model(path).map_err(|e| usage(format!("{}: {}", path.display(), e)))
}

fn emit(report: &ModelReport, json: bool) -> ExitCode {
    if json {
        print!("{}", report.to_json());
    } else {
        print!("{}", report.to_human());
    }
    ExitCode::from(report.exit_code() as u8)
}

fn run_oracle(path: &Path, t_end: f64, step: f64, seed: u64, tolerance: f64, json: bool) -> ExitCode {
    let m = match load(path) {
        Ok(m) => m,
        Err(c) => return c,
    };
    if m.characteristics.is_empty() {
        return usage("the oracle needs at least one [characteristic] entry");
    }
    if !(step > 0.0 && t_end > 0.0) {
        return usage("--step and --t-end must be positive");
    }
    let r = numeric_oracle(&m.system, &m.characteristics, t_end, step, seed);
    let blowup = r.trajectories.iter().find_map(|t| t.blowup_at);
    let mut records = Vec::new();
    for (k, (f, drift)) in m.characteristics.iter().zip(&r.max_drift).enumerate() {
        let text = format!("max drift {:e}", drift);
        let symbolic = check_characteristic(&m.system, f).map(|c| c.holds);
        let (status, residual) = match (blowup, symbolic) {
            (_, Err(e)) => (Status::Error, e.to_string()),
            (Some(t), _) => (Status::Error, format!("trajectory blow-up at t = {:e}; partial {}", t, text)),
            // advisory only: a non-characteristic is expected to drift
            (None, Ok(false)) => (Status::Skip, format!("not a characteristic; {}", text)),
            (None, Ok(true)) if *drift < tolerance => (Status::Pass, text),
            (None, Ok(true)) => (Status::Fail, format!("{} exceeds tolerance {:e}", text, tolerance)),
        };
        records.push(CheckRecord::new(format!("drift[{}]", k), status, Some(residual)));
    }
    emit(&ModelReport::new(model_name(path), records, Some(seed)), json)
}

fn run_search(path: &Path, degree: u32, json: bool) -> ExitCode {
    let m = match load(path) {
        Ok(m) => m,
        Err(c) => return c,
    };
    let r = match search_characteristics(&m.system, degree) {
        Ok(r) => r,
        Err(e) => return usage(e),
    };
    let js = m.space();
    let basis: Vec<String> = r.basis.iter().map(|f| f.to_text(&js)).collect();
    if json {
        let doc = serde_json::json!({
            "version": anchorcheck::report::REPORT_VERSION,
            "model": model_name(path),
            "degree": degree,
            "basis": basis,
            "diagnostic": r.diagnostic,
        });
        println!("{}", serde_json::to_string_pretty(&doc).expect("json"));
    } else {
        println!("model: {}\ndegree: {}", model_name(path), degree);
        for (k, f) in basis.iter().enumerate() {
            println!("f[{}] = {}", k, f);
        }
        if let Some(d) = &r.diagnostic {
            println!("note: {}", d);
        }
    }
    ExitCode::SUCCESS
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.convention {
        print!("{}", CONVENTIONS);
        return ExitCode::SUCCESS;
    }
    let Some(cmd) = cli.cmd else {
        return usage("no command given; try --help");
    };
    let limits = Limits::from_env();
    match cmd {
        Cmd::Check { model, only, out } => {
            let m = match load(&model) {
                Ok(m) => m,
                Err(c) => return c,
            };
            let opts = RunOptions {
                only,
                timings: out.timings,
                limits,
                ..Default::default()
            };
            match run_checks(&m, &model_name(&model), &opts) {
                Ok(r) => emit(&r, out.json),
                Err(e) => usage(e),
            }
        }
        Cmd::Catalog {
            model,
            n,
            p,
            a,
            b,
            g,
            xi,
            algebra,
            signature,
            only,
            out,
        } => {
            let spec = CatalogSpec {
                model,
                n,
                p,
                a,
                b,
                g,
                xi,
                algebra,
                signature,
            };
            let opts = RunOptions {
                only,
                timings: out.timings,
                limits,
                ..Default::default()
            };
            match run_catalog(&spec, &opts) {
                Ok(r) => emit(&r, out.json),
                Err(CatalogError::Usage(e)) => usage(e),
                Err(CatalogError::Run(e)) => usage(e),
            }
        }
        Cmd::Oracle {
            model,
            t_end,
            step,
            seed,
            tolerance,
            json,
        } => run_oracle(&model, t_end, step, seed, tolerance, json),
        Cmd::Search { model, degree, json } => run_search(&model, degree, json),
    }
}
