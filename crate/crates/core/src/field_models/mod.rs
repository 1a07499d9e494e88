//! Free field models on flat space: p-form fields with a two-parameter
//! anchor family, self-dual fields and chiral bosons with a non-abelian
//! anchor.

use crate::expr::{Expr, ExprError, JetSpace};
use crate::forms::{basis, FlatSpace, Form, FormError};
use crate::linop::{op_equal_mod_shell, LinDiffOp, LinOpError, ShellRules};

pub mod chiral;
pub mod lie;
pub mod pform;
pub mod selfdual;

pub use chiral::ChiralModel;
pub use lie::LieAlgebra;
pub use pform::PFormModel;
pub use selfdual::SelfDualModel;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ModelError {
    #[error("precondition: {0}")]
    Precondition(String),
    #[error("invalid Lie algebra: {0}")]
    Algebra(String),
    #[error("energy-momentum tensor is not symmetric: T[{0}][{1}] - T[{1}][{0}] = {2}")]
    Asymmetric(usize, usize, String),
    #[error(transparent)]
    Form(#[from] FormError),
    #[error(transparent)]
    LinOp(#[from] LinOpError),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

/// Pairing weights `η^{II}` of the grade-`k` basis: `A ∧ *B = Σ η^{II} A_I B_I vol`.
pub fn pairing_weights(space: &FlatSpace, k: usize) -> Vec<Expr> {
    basis(space.n(), k)
        .iter()
        .map(|i| Expr::int(i.iter().map(|&m| space.eta(m)).product()))
        .collect()
}

/// Concatenated component vectors.
pub fn stack(forms: &[&Form]) -> Vec<Expr> {
    forms.iter().flat_map(|f| f.to_vector()).collect()
}

/// Splits a concatenated vector back into forms of the given grades.
pub fn unstack(n: usize, grades: &[usize], v: &[Expr]) -> Vec<Form> {
    let mut out = Vec::new();
    let mut at = 0;
    for &g in grades {
        let len = basis(n, g).len();
        out.push(Form::from_vector(n, g, &v[at..at + len]));
        at += len;
    }
    out
}

/// Anchor condition `J ∘ V ≈ V^* ∘ J^*`, with `V` acting on dual
/// components (the pairing weights are already absorbed).
pub fn verify_anchor(j: &LinDiffOp, v: &LinDiffOp, shell: &ShellRules) -> Result<(bool, LinDiffOp), ModelError> {
    let lhs = j.compose(v)?;
    let rhs = v.formal_adjoint().compose(&j.formal_adjoint())?;
    Ok(op_equal_mod_shell(&lhs, &rhs, shell)?)
}

/// Reduces every component on shell and keeps those that do not vanish.
pub fn reduce_form(f: &Form, shell: &ShellRules) -> Result<Form, ModelError> {
    let reduced = f.try_map(|e| shell.reduce(e))?;
    let mut out = Form::zero(f.n(), f.grade());
    for (i, e) in reduced.components() {
        if !crate::expr::eval::is_zero(e)? {
            out = &out + &Form::basis_form(f.n(), i.clone(), e.clone());
        }
    }
    Ok(out)
}

pub fn form_text(f: &Form, js: &JetSpace) -> String {
    f.to_text(js)
}
