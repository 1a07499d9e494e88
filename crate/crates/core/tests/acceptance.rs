//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

mod common;

use std::path::PathBuf;
use std::time::{Duration, Instant};

use anchorcheck::catalog::{run_catalog, CatalogModel, CatalogSpec};
use anchorcheck::expr::eval::is_zero;
use anchorcheck::expr::{euler_derivative, rat, total_derivative, Expr, Symbol};
use anchorcheck::field_models::chiral::{chiral_verify, symbolic_epsilon};
use anchorcheck::field_models::pform::{
    energy_momentum_extract, killing_current, noether_identity_check, pform_anchor_verify, pform_proper_symmetry,
    pform_residuals, triviality_witness,
};
use anchorcheck::field_models::selfdual::selfdual_verify;
use anchorcheck::field_models::{ChiralModel, LieAlgebra, PFormModel, SelfDualModel};
use anchorcheck::forms::SpacetimeVector;
use anchorcheck::linop::LinDiffOp;
use anchorcheck::model::{read_model, ModelFile};
use anchorcheck::ode_anchor::{
    anchor_apply, calibrate_homomorphism_sign, check_anchor, check_characteristic, check_symmetry, deform,
    poisson_bracket, proper_symmetry_conditions, schouten_square, vector_commutator, vertical_differential, x,
    Bivector, OdeSystem, HOMOMORPHISM_SIGN,
};
use anchorcheck::oracle::{numeric_oracle, DEFAULT_STEP, DEFAULT_TOLERANCE, DEFAULT_T_END};
use anchorcheck::runner::{run_checks, RunOptions};

const SEED: u64 = 20240917;

type Verdict = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../cli/tests/fixtures").join(name)
}

fn oscillator() -> Result<ModelFile, String> {
    read_model(&fixture("oscillator.model")).map_err(|e| e.to_string())
}

fn euler_annihilation() -> Verdict {
    let start = Instant::now();
    for k in 0..100 {
        let (e, dim) = common::density(SEED + k);
        for mu in 0..dim {
            let d = total_derivative(&e, mu);
            for f in 0..3 {
                let r = euler_derivative(&d, f);
                ensure(r.is_zero(), || format!("density {} field {}: E(D e) = {:?}", k, f, r))?;
            }
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(30), || format!("took {:?}", t))?;
    Ok(format!("100 densities in {:.2}s", t.as_secs_f64()))
}

fn oscillator_pipeline() -> Verdict {
    let m = oscillator()?;
    let alpha = m.alpha.clone().ok_or("fixture has no anchor")?;
    let sys = &m.system;
    let js = m.space();
    ensure(sys.v() == [-Expr::symbol(x(1)), Expr::symbol(x(0))], || "unexpected v".into())?;
    let err = |e: anchorcheck::ode_anchor::OdeError| e.to_string();
    ensure(check_anchor(sys, &alpha).map_err(err)?.holds, || "check_anchor".into())?;
    let f = &m.characteristics[0];
    ensure(check_characteristic(sys, f).map_err(err)?.holds, || "check_characteristic".into())?;
    let w = anchor_apply(&alpha, f);
    ensure(w == [Expr::symbol(x(1)), -Expr::symbol(x(0))], || {
        format!("anchor_apply gave {:?}", w.iter().map(|e| e.to_text(&js)).collect::<Vec<_>>())
    })?;
    ensure(check_symmetry(sys, &w).map_err(err)?.holds, || "anchor_apply -> check_symmetry".into())?;
    let psi = vertical_differential(f, 2);
    ensure(proper_symmetry_conditions(sys, &alpha, &psi).map_err(err)?.holds, || "proper symmetry".into())?;
    let r = numeric_oracle(sys, &m.characteristics, DEFAULT_T_END, DEFAULT_STEP, SEED);
    ensure(!r.blowup && r.max_drift[0] < DEFAULT_TOLERANCE, || format!("drift {:e}", r.max_drift[0]))?;
    Ok(format!("max drift {:.1e}", r.max_drift[0]))
}

fn twist_reproduction() -> Verdict {
    let alpha = Bivector::canonical(2);
    let free = OdeSystem::free(2);
    let vars = [x(0), x(1)];
    for k in 0..10 {
        let mut r = common::rng(SEED ^ (k << 8));
        let h = common::poly(&mut r, &vars, 5, 4);
        let twisted = deform(&free, &alpha, &h).map_err(|e| e.to_string())?;
        // Hamilton: q' = dH/dp, p' = -dH/dq with (q, p) = (x1, x2) and x' = -v
        let hamilton = [-h.partial(&x(1)), h.partial(&x(0))];
        ensure(twisted.v() == hamilton, || format!("H #{}: deformed system differs", k))?;
        let c = check_characteristic(&twisted, &h).map_err(|e| e.to_string())?;
        ensure(c.holds, || format!("H #{} is not conserved", k))?;
    }
    Ok("10 random H of degree <= 4".into())
}

fn homomorphism() -> Verdict {
    let alpha = Bivector::so3();
    ensure(schouten_square(&alpha).is_zero().map_err(|e| e.to_string())?, || "[alpha, alpha] != 0".into())?;
    let sigma = calibrate_homomorphism_sign().map_err(|e| e.to_string())?;
    ensure(sigma == HOMOMORPHISM_SIGN, || format!("calibrated sign {} disagrees", sigma))?;
    let vars = [x(0), x(1), x(2)];
    for k in 0..20 {
        let mut r = common::rng(SEED.wrapping_mul(31) + k);
        let f = common::poly(&mut r, &vars, 4, 3);
        let g = common::poly(&mut r, &vars, 4, 3);
        let lhs = vector_commutator(&anchor_apply(&alpha, &f), &anchor_apply(&alpha, &g));
        let rhs: Vec<Expr> = anchor_apply(&alpha, &poisson_bracket(&alpha, &f, &g))
            .iter()
            .map(|e| e.scale(&rat(sigma)))
            .collect();
        ensure(lhs == rhs, || format!("pair #{} breaks the homomorphism", k))?;
    }
    Ok(format!("20 pairs, sign {}", sigma))
}

fn killing_vectors(m: &PFormModel) -> Vec<(String, SpacetimeVector)> {
    let mut out = Vec::new();
    for mu in 0..4 {
        out.push((format!("translation {}", mu), SpacetimeVector::translation(4, mu)));
    }
    for mu in 0..4 {
        for nu in mu + 1..4 {
            out.push((format!("rotation {}{}", mu, nu), SpacetimeVector::rotation(m.space(), mu, nu)));
        }
    }
    out
}

fn maxwell() -> Verdict {
    let start = Instant::now();
    let e = |e: anchorcheck::field_models::ModelError| e.to_string();
    let m = PFormModel::maxwell(Expr::param("a"), Expr::param("b"));
    let (t1, t2) = pform_residuals(&m).map_err(e)?;
    ensure(noether_identity_check(&t1, &t2).map_err(e)?, || "Noether identity".into())?;
    let kv = killing_vectors(&m);
    ensure(kv.len() == 10, || "expected 10 Killing vectors".into())?;
    for (name, xi) in &kv {
        let c = killing_current(&m, xi).map_err(e)?;
        ensure(c.certificate, || format!("current certificate for {}", name))?;
    }
    let t = energy_momentum_extract(&m).map_err(e)?;
    ensure(t.traceless, || "energy-momentum trace".into())?;
    let (holds, _) = pform_anchor_verify(&m).map_err(e)?;
    ensure(holds, || "J V = V* J* fails".into())?;
    let m10 = m.with_params(Expr::int(1), Expr::int(0));
    for (name, xi) in &kv {
        let r = pform_proper_symmetry(&m10, xi).map_err(e)?;
        ensure(r.holds, || format!("proper symmetry residual for {}", name))?;
    }
    for a in -2..=2 {
        for b in -2..=2 {
            let fires = triviality_witness(&m.with_params(Expr::int(a), Expr::int(b))).map_err(e)?.is_some();
            ensure(fires == (a == b), || format!("triviality at (a, b) = ({}, {}): {}", a, b, fires))?;
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(300), || format!("took {:?}", t))?;
    Ok(format!("10 currents, 25 grid points, {:.2}s", t.as_secs_f64()))
}

fn selfdual() -> Verdict {
    let sd = SelfDualModel::chiral_boson();
    let fields = [
        ("translation 0", SpacetimeVector::translation(2, 0)),
        ("translation 1", SpacetimeVector::translation(2, 1)),
        ("dilation", SpacetimeVector::dilation(sd.space())),
    ];
    for (name, xi) in &fields {
        let r = selfdual_verify(&sd, xi).map_err(|e| e.to_string())?;
        ensure(r.current.holds, || format!("current certificate for {}", name))?;
        ensure(r.variation.holds, || format!("symmetry certificate for {}", name))?;
    }
    Ok("2 translations and the dilation".into())
}

fn chiral() -> Verdict {
    let m = ChiralModel::new(LieAlgebra::su2(), Expr::param("g"));
    let r = chiral_verify(&m, &symbolic_epsilon(3)).map_err(|e| e.to_string())?;
    ensure(r.current.holds, || "current".into())?;
    ensure(r.variation.holds, || "variation".into())?;
    ensure(r.symmetry.holds, || "symmetry".into())?;
    ensure(r.jacobi.is_empty(), || "Jacobi".into())?;
    let mut spec = CatalogSpec::new(CatalogModel::Chiral);
    spec.g = "0".into();
    let opts = RunOptions::default();
    let su2 = run_catalog(&spec, &opts).map_err(|e| e.to_string())?;
    spec.algebra = "abelian3".into();
    let ab = run_catalog(&spec, &opts).map_err(|e| e.to_string())?;
    let bytes = |r: &anchorcheck::report::ModelReport| serde_json::to_string(&r.checks).unwrap();
    ensure(bytes(&su2) == bytes(&ab), || "g = 0 records differ from the abelian ones".into())?;
    let zero = ChiralModel::new(LieAlgebra::su2(), Expr::zero());
    let abelian = ChiralModel::new(LieAlgebra::abelian(3), Expr::param("g"));
    ensure(zero.anchor().map_err(|e| e.to_string())? == abelian.anchor().map_err(|e| e.to_string())?, || {
        "g = 0 anchor differs from the abelian one".into()
    })?;
    Ok("4 certificates, g = 0 records identical".into())
}

fn adjoints() -> Verdict {
    for k in 0..20 {
        let dim = 1 + (k % 2) as usize;
        let a = common::operator(SEED + 1000 + k, dim, 7);
        ensure(a.formal_adjoint().formal_adjoint() == a, || format!("operator #{}: A** != A", k))?;
        let u: Vec<Expr> = (0..a.cols()).map(|i| Expr::symbol(Symbol::field(i as u16, dim))).collect();
        let w: Vec<Expr> = (0..a.rows())
            .map(|j| Expr::symbol(Symbol::field((a.cols() + j) as u16, dim)))
            .collect();
        let au = a.apply(&u).map_err(|e| e.to_string())?;
        let aw = LinDiffOp::formal_adjoint(&a).apply(&w).map_err(|e| e.to_string())?;
        let defect: Expr = w.iter().zip(&au).map(|(p, q)| p * q).sum::<Expr>()
            - u.iter().zip(&aw).map(|(p, q)| p * q).sum::<Expr>();
        for f in (0..(a.rows() + a.cols()) as u16).chain([7]) {
            let r = euler_derivative(&defect, f);
            ensure(is_zero(&r).map_err(|e| e.to_string())?, || format!("operator #{}: pairing is not a divergence", k))?;
        }
    }
    Ok("20 operators".into())
}

/// Every report the suite can produce, concatenated.
fn full_report(seed: u64) -> Result<String, String> {
    let mut out = String::new();
    let opts = RunOptions::default();
    for name in ["oscillator.model", "oscillator_bad.model", "rigid_body.model"] {
        let m = read_model(&fixture(name)).map_err(|e| e.to_string())?;
        out += &run_checks(&m, name, &opts).map_err(|e| e.to_string())?.to_json();
        let r = numeric_oracle(&m.system, &m.characteristics, 10.0, DEFAULT_STEP, seed);
        out += &serde_json::to_string(&r).map_err(|e| e.to_string())?;
    }
    for model in [CatalogModel::Pform, CatalogModel::Selfdual, CatalogModel::Chiral] {
        out += &run_catalog(&CatalogSpec::new(model), &opts).map_err(|e| e.to_string())?.to_json();
    }
    Ok(out)
}

fn determinism() -> Verdict {
    let a = full_report(SEED)?;
    let b = full_report(SEED)?;
    ensure(a == b, || "reports differ between runs".into())?;
    ensure(a != full_report(SEED + 1)?, || "seed has no effect on the oracle".into())?;
    Ok(format!("{} bytes identical", a.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Verdict); 9] = [
        ("euler annihilation", euler_annihilation),
        ("oscillator pipeline", oscillator_pipeline),
        ("twist reproduction", twist_reproduction),
        ("so(3) homomorphism", homomorphism),
        ("maxwell model", maxwell),
        ("self-dual n = 2", selfdual),
        ("chiral su(2)", chiral),
        ("adjoint involution and pairing", adjoints),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        match outcome {
            Ok(note) => println!("PASS {} {}: {}", k + 1, name, note),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {}: {}", k + 1, name, why);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
