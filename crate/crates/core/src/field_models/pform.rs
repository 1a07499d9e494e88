//! Free p-form field `dF = 0`, `d*F = 0` with the anchor family
//! `⟨V(W), P⟩ = a (W1, dP) + b (W2, d*P)`.

use crate::expr::eval::is_zero;
use crate::expr::{rat, ratio, Expr};
use crate::forms::{
    basis, conformal_killing_check, exterior_d, hodge, interior, lie_derivative, pairing_density, wedge, FlatSpace,
    Form, KillingKind, SpacetimeVector,
};
use crate::linop::{LinDiffOp, ShellRules};

use super::{pairing_weights, reduce_form, stack, verify_anchor, ModelError};

#[derive(Clone, Debug, PartialEq)]
pub struct PFormModel {
    space: FlatSpace,
    p: usize,
    a: Expr,
    b: Expr,
}

fn sign(k: usize) -> i64 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

impl PFormModel {
    pub fn new(space: FlatSpace, p: usize, a: Expr, b: Expr) -> Result<Self, ModelError> {
        if p == 0 || p >= space.n() {
            return Err(ModelError::Precondition(format!(
                "grade {} outside 1..={}",
                p,
                space.n().saturating_sub(1)
            )));
        }
        Ok(PFormModel { space, p, a, b })
    }

    /// Maxwell theory: `n = 4`, `p = 2`, Lorentzian.
    pub fn maxwell(a: Expr, b: Expr) -> Self {
        PFormModel {
            space: FlatSpace::lorentzian(4),
            p: 2,
            a,
            b,
        }
    }

    pub fn space(&self) -> &FlatSpace {
        &self.space
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn a(&self) -> &Expr {
        &self.a
    }

    pub fn b(&self) -> &Expr {
        &self.b
    }

    pub fn with_params(&self, a: Expr, b: Expr) -> Self {
        PFormModel { a, b, ..self.clone() }
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    /// `F` with component `F_I` stored as field number `k` for the `k`-th
    /// basis tuple.
    pub fn field(&self) -> Form {
        Form::field(self.n(), self.p, 0)
    }

    pub fn field_ids(&self) -> Vec<u16> {
        (0..basis(self.n(), self.p).len() as u16).collect()
    }

    /// Names `F01`, `F02`, … over coordinates `x0..`.
    pub fn field_names(&self) -> Vec<String> {
        basis(self.n(), self.p)
            .iter()
            .map(|i| format!("F{}", i.iter().map(|m| m.to_string()).collect::<String>()))
            .collect()
    }

    pub fn jet_space(&self) -> crate::expr::JetSpace {
        self.space.jet_space(self.field_names())
    }

    fn w_grades(&self) -> [usize; 2] {
        [self.p + 1, self.n() - self.p + 1]
    }
}

/// `(dF, d*F)`.
pub fn pform_residuals(m: &PFormModel) -> Result<(Form, Form), ModelError> {
    residuals_of(m, &m.field())
}

fn residuals_of(m: &PFormModel, f: &Form) -> Result<(Form, Form), ModelError> {
    Ok((exterior_d(f)?, exterior_d(&hodge(&m.space, f)?)?))
}

/// `d` of a residual form vanishes identically; top-degree forms are closed.
pub fn is_closed(t: &Form) -> Result<bool, ModelError> {
    if t.grade() == t.n() {
        return Ok(true);
    }
    Ok(exterior_d(t)?.vanishes()?)
}

/// Noether identities `dT1 = 0`, `dT2 = 0`.
pub fn noether_identity_check(t1: &Form, t2: &Form) -> Result<bool, ModelError> {
    Ok(is_closed(t1)? && is_closed(t2)?)
}

fn admissible(m: &PFormModel, xi: &SpacetimeVector) -> Result<(), ModelError> {
    match conformal_killing_check(xi, &m.space)? {
        KillingKind::Killing => Ok(()),
        KillingKind::Conformal if m.n() == 2 * m.p => Ok(()),
        kind => Err(ModelError::Precondition(format!(
            "vector field is {:?}; need Killing, or conformal with n = 2p",
            kind
        ))),
    }
}

/// `Ψ1 = s (−1)^{(n−p)(p−1)} * i_ξ * F`, `Ψ2 = s (−1)^{p−1} * i_ξ F` with
/// `s = det η`, the sign that keeps `(Ψ, T) = dj` in any signature.
pub fn killing_characteristic(m: &PFormModel, xi: &SpacetimeVector) -> Result<(Form, Form), ModelError> {
    admissible(m, xi)?;
    characteristic_of(m, xi, &m.field())
}

fn characteristic_of(m: &PFormModel, xi: &SpacetimeVector, f: &Form) -> Result<(Form, Form), ModelError> {
    let (n, p) = (m.n(), m.p);
    let s = &m.space;
    let det = s.det_sign();
    let psi1 = hodge(s, &interior(xi, &hodge(s, f)?)?)?.scale_rat(det * sign((n - p) * (p - 1)));
    let psi2 = hodge(s, &interior(xi, f)?)?.scale_rat(det * sign(p - 1));
    Ok((psi1, psi2))
}

#[derive(Clone, Debug, PartialEq)]
pub struct KillingCurrent {
    pub j: Form,
    /// `(Ψ1, T1) + (Ψ2, T2) − dj`, reduced to its nonvanishing components.
    pub residual: Form,
    pub certificate: bool,
}

/// `j = ½((i_ξF) ∧ *F + (−1)^{p−1} F ∧ (i_ξ *F))` and the off-shell identity
/// `(Ψ1, T1) + (Ψ2, T2) = dj`.
pub fn killing_current(m: &PFormModel, xi: &SpacetimeVector) -> Result<KillingCurrent, ModelError> {
    let (psi1, psi2) = killing_characteristic(m, xi)?;
    let s = &m.space;
    let f = m.field();
    let sf = hodge(s, &f)?;
    let j = (&wedge(&interior(xi, &f)?, &sf)? + &wedge(&f, &interior(xi, &sf)?)?.scale_rat(sign(m.p - 1)))
        .scale(&Expr::constant(ratio(1, 2)));
    let (t1, t2) = pform_residuals(m)?;
    let lhs = &pairing_density(s, &psi1, &t1)? + &pairing_density(s, &psi2, &t2)?;
    let diff = &lhs - &exterior_d(&j)?;
    let mut residual = Form::zero(m.n(), m.n());
    for (i, e) in diff.components() {
        if !is_zero(e)? {
            residual = &residual + &Form::basis_form(m.n(), i.clone(), e.clone());
        }
    }
    Ok(KillingCurrent {
        certificate: residual.is_zero(),
        j,
        residual,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EnergyMomentum {
    /// `T[μ][ν]` with `*j(∂_μ) = T_{μν} dx^ν`.
    pub t: Vec<Vec<Expr>>,
    pub trace: Expr,
    /// Whether the trace vanishes; only asserted when `n = 2p`.
    pub traceless: bool,
}

/// Reads `T_{μν}` off the translation currents and checks symmetry.
pub fn energy_momentum_extract(m: &PFormModel) -> Result<EnergyMomentum, ModelError> {
    let n = m.n();
    let mut t = Vec::with_capacity(n);
    for mu in 0..n {
        let cur = killing_current(m, &SpacetimeVector::translation(n, mu))?;
        let sj = hodge(&m.space, &cur.j)?;
        t.push((0..n).map(|nu| sj.get(&[nu])).collect::<Vec<Expr>>());
    }
    for mu in 0..n {
        for nu in mu + 1..n {
            let d = &t[mu][nu] - &t[nu][mu];
            if !is_zero(&d)? {
                return Err(ModelError::Asymmetric(mu, nu, d.to_text(&m.jet_space())));
            }
        }
    }
    let trace: Expr = (0..n).map(|mu| t[mu][mu].scale(&rat(m.space.eta(mu)))).sum();
    let traceless = is_zero(&trace)?;
    Ok(EnergyMomentum { t, trace, traceless })
}

/// `V*(P) = (a dP, b d*P)` and `V = g⁻¹ (V*)^* h` with `g`, `h` the
/// pairing weights, so that `⟨V(W), P⟩ ≐ a (W1, dP) + b (W2, d*P)`.
/// Both operators act on form components.
pub fn pform_anchor_op(m: &PFormModel) -> Result<(LinDiffOp, LinDiffOp), ModelError> {
    let (t1, t2) = pform_residuals(m)?;
    let vs = stack(&[&t1.scale(&m.a), &t2.scale(&m.b)]);
    let vstar = LinDiffOp::linearize(&vs, &m.field_ids(), m.n());
    let v = vstar.weighted_adjoint(&pairing_weights(&m.space, m.p), &w_weights(m))?;
    Ok((v, vstar))
}

fn w_weights(m: &PFormModel) -> Vec<Expr> {
    m.w_grades()
        .iter()
        .flat_map(|&g| pairing_weights(&m.space, g))
        .collect()
}

/// `J = linearize(T1, T2)`.
pub fn pform_linearization(m: &PFormModel) -> Result<LinDiffOp, ModelError> {
    let (t1, t2) = pform_residuals(m)?;
    Ok(LinDiffOp::linearize(&stack(&[&t1, &t2]), &m.field_ids(), m.n()))
}

/// Shell rules from `T1 = 0`, `T2 = 0` and their first prolongations.
pub fn pform_shell(m: &PFormModel) -> Result<ShellRules, ModelError> {
    let (t1, t2) = pform_residuals(m)?;
    Ok(ShellRules::linear(&stack(&[&t1, &t2]), m.n(), 1, m.field_names())?)
}

/// `V` composed with the pairing weights, i.e. acting on dual components.
pub fn anchor_on_duals(m: &PFormModel, v: &LinDiffOp) -> Result<LinDiffOp, ModelError> {
    Ok(v.compose(&LinDiffOp::diag(&w_weights(m), m.n()))?)
}

/// `J ∘ V = V^* ∘ J^*` for the model's anchor.
pub fn pform_anchor_verify(m: &PFormModel) -> Result<(bool, LinDiffOp), ModelError> {
    let (v, _) = pform_anchor_op(m)?;
    verify_with(m, &v)
}

/// Anchor condition for an arbitrary operator `V` on form components.
pub fn verify_with(m: &PFormModel, v: &LinDiffOp) -> Result<(bool, LinDiffOp), ModelError> {
    let j = pform_linearization(m)?;
    verify_anchor(&j, &anchor_on_duals(m, v)?, &pform_shell(m)?)
}

/// When `V* = J ∘ G` for `G = a·Id`, returns `G`.
pub fn triviality_witness(m: &PFormModel) -> Result<Option<LinDiffOp>, ModelError> {
    let (_, vstar) = pform_anchor_op(m)?;
    let j = pform_linearization(m)?;
    let g = LinDiffOp::scalar(&m.a, m.field_ids().len(), m.n());
    let diff = vstar.sub(&j.compose(&g)?)?;
    for (_, e) in diff.entries() {
        if !is_zero(e)? {
            return Ok(None);
        }
    }
    Ok(Some(g))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProperSymmetry {
    pub delta: Form,
    /// `δF − (a − b) L_ξ F` after on-shell reduction.
    pub residual: Form,
    pub holds: bool,
}

/// `δF = V(Ψ1, Ψ2) ≈ (a − b) L_ξ F`.
pub fn pform_proper_symmetry(m: &PFormModel, xi: &SpacetimeVector) -> Result<ProperSymmetry, ModelError> {
    let (psi1, psi2) = killing_characteristic(m, xi)?;
    let (v, _) = pform_anchor_op(m)?;
    let delta = Form::from_vector(m.n(), m.p, &v.apply(&stack(&[&psi1, &psi2]))?);
    let target = lie_derivative(xi, &m.field())?.scale(&(&m.a - &m.b));
    let residual = reduce_form(&(&delta - &target), &pform_shell(m)?)?;
    Ok(ProperSymmetry {
        holds: residual.is_zero(),
        delta,
        residual,
    })
}

/// Kernel equations of `V*` divided by `a` and `b`, and whether they
/// coincide with the field equations applied to `P`. Needs `ab ≠ 0`.
pub fn kernel_equations(m: &PFormModel) -> Result<(Vec<Expr>, bool), ModelError> {
    if m.a.is_zero() || m.b.is_zero() {
        return Err(ModelError::Precondition("kernel equations need a*b != 0".into()));
    }
    let (_, vstar) = pform_anchor_op(m)?;
    let p = m.field();
    let out = vstar.apply(&p.to_vector())?;
    let n1 = basis(m.n(), m.p + 1).len();
    let eqs: Vec<Expr> = out
        .iter()
        .enumerate()
        .map(|(k, e)| if k < n1 { e.div_ref(&m.a) } else { e.div_ref(&m.b) })
        .collect();
    let (t1, t2) = residuals_of(m, &p)?;
    let want = stack(&[&t1, &t2]);
    let mut same = eqs.len() == want.len();
    for (x, y) in eqs.iter().zip(&want) {
        same &= is_zero(&(x - y))?;
    }
    Ok((eqs, same))
}
