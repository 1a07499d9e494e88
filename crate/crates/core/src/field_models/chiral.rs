//! `N` chiral bosons `dH_a = 0` in two dimensions with the anchor
//! `⟨V(W), P⟩ = Σ_a (W_a, dP_a + g [P, H]_a)`, `[P, H]_c = f^{ab}_c P_a ∧ H_b`.

use crate::expr::eval::is_zero;
use crate::expr::{Expr, JetSpace};
use crate::forms::{exterior_d, hodge, wedge, FlatSpace, Form};
use crate::linop::LinDiffOp;

use super::lie::LieAlgebra;
use super::selfdual::{Certificate, Multiplet};
use super::{reduce_form, ModelError};

#[derive(Clone, Debug, PartialEq)]
pub struct ChiralModel {
    multiplet: Multiplet,
    algebra: LieAlgebra,
    g: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChiralReport {
    /// `d(ε^a H_a) = ε^a T_a`.
    pub current: Certificate,
    /// `V(Ψ) + g [ε, H] ≈ 0` for `Ψ_a = −* κ_{ab} ε^b`.
    pub variation: Certificate,
    /// `d(δH_a) ≈ 0`.
    pub symmetry: Certificate,
    /// Jacobi for `[e_a, e_b] = −g f^{ab}_c e_c`; nonvanishing cyclic sums.
    pub jacobi: Vec<Expr>,
}

impl ChiralReport {
    pub fn all_hold(&self) -> bool {
        self.current.holds && self.variation.holds && self.symmetry.holds && self.jacobi.is_empty()
    }
}

impl ChiralModel {
    pub fn new(algebra: LieAlgebra, g: Expr) -> Self {
        let multiplet = Multiplet::new(FlatSpace::lorentzian(2), algebra.dim()).expect("n = 2 is admissible");
        ChiralModel { multiplet, algebra, g }
    }

    pub fn n_fields(&self) -> usize {
        self.algebra.dim()
    }

    pub fn algebra(&self) -> &LieAlgebra {
        &self.algebra
    }

    pub fn g(&self) -> &Expr {
        &self.g
    }

    pub fn space(&self) -> &FlatSpace {
        self.multiplet.space()
    }

    pub fn hs(&self) -> Vec<Form> {
        self.multiplet.hs()
    }

    pub fn field_names(&self) -> Vec<String> {
        self.multiplet.field_names("h")
    }

    pub fn jet_space(&self) -> JetSpace {
        self.space().jet_space(self.field_names())
    }

    /// `[X, H]_c = f^{ab}_c X_a ∧ H_b`.
    pub fn bracket(&self, x: &[Form], h: &[Form]) -> Result<Vec<Form>, ModelError> {
        let n = self.n_fields();
        let grade = x[0].grade() + h[0].grade();
        let mut out = vec![Form::zero(2, grade); n];
        for a in 0..n {
            for b in 0..n {
                let w = wedge(&x[a], &h[b])?;
                for (c, o) in out.iter_mut().enumerate() {
                    let f = self.algebra.f(a, b, c);
                    if !num_traits::Zero::is_zero(f) {
                        *o = &*o + &w.scale(&Expr::constant(f.clone()));
                    }
                }
            }
        }
        Ok(out)
    }

    /// `V` on form components; field-dependent through `H` when `g ≠ 0`.
    pub fn anchor(&self) -> Result<LinDiffOp, ModelError> {
        let hs = self.hs();
        self.multiplet.anchor(&|c, ps| {
            let br = self.bracket(ps, &hs)?;
            Ok(br[c].scale(&self.g))
        })
    }
}

/// The four certificates for a rigid algebra element `ε` (constants or
/// parameters).
pub fn chiral_verify(m: &ChiralModel, eps: &[Expr]) -> Result<ChiralReport, ModelError> {
    let n = m.n_fields();
    if eps.len() != n {
        return Err(ModelError::Precondition(format!("epsilon has {} entries, algebra has dimension {}", eps.len(), n)));
    }
    if eps.iter().any(|e| e.symbols().iter().any(|s| !matches!(s, crate::expr::Symbol::Param(_)))) {
        return Err(ModelError::Precondition("epsilon must be constant".into()));
    }
    let space = m.space();
    let hs = m.hs();
    let ts = m.multiplet.residuals()?;
    let shell = m.multiplet.shell("h")?;

    let mut j = Form::zero(2, 1);
    let mut et = Form::zero(2, 2);
    for a in 0..n {
        j = &j + &hs[a].scale(&eps[a]);
        et = &et + &ts[a].scale(&eps[a]);
    }
    let current = vanishing(&(&exterior_d(&j)? - &et))?;

    let psi: Vec<Form> = (0..n)
        .map(|a| {
            let lowered: Expr = (0..n).map(|b| eps[b].scale(m.algebra.kappa(a, b))).sum();
            hodge(space, &Form::scalar(2, lowered)).map(|f| -f)
        })
        .collect::<Result<_, _>>()?;
    let delta = m.multiplet.variation(&m.anchor()?, &psi)?;
    let eps_forms: Vec<Form> = eps.iter().map(|e| Form::scalar(2, e.clone())).collect();
    let target = m.bracket(&eps_forms, &hs)?;
    let mut var_res = Form::zero(2, 1);
    let mut sym_res = Form::zero(2, 2);
    for a in 0..n {
        // tagged per field so residuals of different fields cannot cancel
        let r = reduce_form(&(&delta[a] + &target[a].scale(&m.g)), &shell)?;
        var_res = &var_res + &tagged(&r, a);
        let s = reduce_form(&exterior_d(&delta[a])?, &shell)?;
        sym_res = &sym_res + &tagged(&s, a);
    }
    Ok(ChiralReport {
        current: Certificate::of(current),
        variation: Certificate::of(var_res),
        symmetry: Certificate::of(sym_res),
        jacobi: m.algebra.jacobi_residuals(&-&m.g),
    })
}

/// Marks the residual of field `a` with a parameter `field<a>` so that
/// residuals of different fields cannot cancel when collected.
fn tagged(f: &Form, a: usize) -> Form {
    if f.is_zero() {
        return f.clone();
    }
    f.scale(&Expr::param(&format!("field{}", a + 1)))
}

fn vanishing(f: &Form) -> Result<Form, ModelError> {
    f.try_map(|e| Ok::<_, ModelError>(if is_zero(e)? { Expr::zero() } else { e.clone() }))
}

/// Symbolic rigid parameters `e1..eN`.
pub fn symbolic_epsilon(n: usize) -> Vec<Expr> {
    (1..=n).map(|i| Expr::param(&format!("e{}", i))).collect()
}
