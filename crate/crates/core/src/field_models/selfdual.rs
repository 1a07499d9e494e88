//! Self-dual middle forms `H = *H` in Lorentzian dimension `n = 4k + 2`
//! with the anchor `⟨V(W), P⟩ = (W, dP)`.

use crate::expr::{ratio, Expr};
use crate::forms::{
    basis, conformal_killing_check, exterior_d, hodge, interior, lie_derivative, pairing_density, selfdual_project,
    wedge, FlatSpace, Form, KillingKind, SpacetimeVector,
};
use crate::linop::{LinDiffOp, ShellRules};

use super::{pairing_weights, reduce_form, stack, unstack, ModelError};

/// `copies` self-dual middle forms `H_c = Σ_a φ_{c,a} e_a` over the basis
/// `e_a = dx^I + *dx^I` for increasing `I ∋ 0`, followed by `copies` full
/// middle forms `P_c` used as anchor arguments.
#[derive(Clone, Debug, PartialEq)]
pub struct Multiplet {
    space: FlatSpace,
    copies: usize,
}

impl Multiplet {
    pub fn new(space: FlatSpace, copies: usize) -> Result<Self, ModelError> {
        let n = space.n();
        if n % 4 != 2 || !space.is_lorentzian() {
            return Err(ModelError::Precondition(format!(
                "self-dual fields need Lorentzian n = 2 mod 4, got n = {} with signature {:?}",
                n,
                space.signature()
            )));
        }
        Ok(Multiplet { space, copies })
    }

    pub fn space(&self) -> &FlatSpace {
        &self.space
    }

    pub fn n(&self) -> usize {
        self.space.n()
    }

    pub fn grade(&self) -> usize {
        self.n() / 2
    }

    fn sd_basis(&self) -> Vec<Form> {
        let n = self.n();
        basis(n, self.grade())
            .into_iter()
            .filter(|i| i.first() == Some(&0))
            .map(|i| {
                let e = Form::basis_form(n, i, Expr::one());
                &e + &hodge(&self.space, &e).expect("same dimension")
            })
            .collect()
    }

    /// Components per self-dual form.
    pub fn sd_dim(&self) -> usize {
        self.sd_basis().len()
    }

    fn full_dim(&self) -> usize {
        basis(self.n(), self.grade()).len()
    }

    /// `H_c`; asserted self-dual.
    pub fn h(&self, c: usize) -> Form {
        let n = self.n();
        let m = self.sd_dim();
        let mut h = Form::zero(n, self.grade());
        for (a, e) in self.sd_basis().iter().enumerate() {
            let phi = Expr::symbol(crate::expr::Symbol::field((c * m + a) as u16, n));
            h = &h + &e.scale(&phi);
        }
        debug_assert_eq!(selfdual_project(&self.space, &h).map(|(p, _)| p), Ok(h.clone()));
        h
    }

    pub fn hs(&self) -> Vec<Form> {
        (0..self.copies).map(|c| self.h(c)).collect()
    }

    fn p_first(&self) -> usize {
        self.copies * self.sd_dim()
    }

    /// Anchor argument `P_c`, a full middle form.
    pub fn p(&self, c: usize) -> Form {
        Form::field(self.n(), self.grade(), (self.p_first() + c * self.full_dim()) as u16)
    }

    pub fn p_ids(&self) -> Vec<u16> {
        let first = self.p_first();
        (first..first + self.copies * self.full_dim()).map(|i| i as u16).collect()
    }

    pub fn field_names(&self, stem: &str) -> Vec<String> {
        let m = self.sd_dim();
        let mut names = Vec::new();
        for c in 0..self.copies {
            for a in 0..m {
                names.push(match (self.copies, m) {
                    (1, 1) => stem.to_string(),
                    (_, 1) => format!("{}{}", stem, c + 1),
                    (1, _) => format!("{}{}", stem, a + 1),
                    _ => format!("{}{}v{}", stem, c + 1, a + 1),
                });
            }
        }
        for c in 0..self.copies {
            for i in basis(self.n(), self.grade()) {
                names.push(format!("P{}v{}", c + 1, i.iter().map(|m| m.to_string()).collect::<String>()));
            }
        }
        names
    }

    /// `T_c = dH_c`.
    pub fn residuals(&self) -> Result<Vec<Form>, ModelError> {
        Ok(self.hs().iter().map(exterior_d).collect::<Result<_, _>>()?)
    }

    pub fn shell(&self, stem: &str) -> Result<ShellRules, ModelError> {
        let t = self.residuals()?;
        let refs: Vec<&Form> = t.iter().collect();
        Ok(ShellRules::linear(&stack(&refs), self.n(), 1, self.field_names(stem))?)
    }

    /// `V` from `V*(P)_c = dP_c + extra_c(P)` through the weighted adjoint.
    pub fn anchor(&self, extra: &dyn Fn(usize, &[Form]) -> Result<Form, ModelError>) -> Result<LinDiffOp, ModelError> {
        let ps: Vec<Form> = (0..self.copies).map(|c| self.p(c)).collect();
        let mut vs = Vec::new();
        for c in 0..self.copies {
            vs.push(&exterior_d(&ps[c])? + &extra(c, &ps)?);
        }
        let refs: Vec<&Form> = vs.iter().collect();
        let vstar = LinDiffOp::linearize(&stack(&refs), &self.p_ids(), self.n());
        let g: Vec<Expr> = (0..self.copies)
            .flat_map(|_| pairing_weights(&self.space, self.grade()))
            .collect();
        let h: Vec<Expr> = (0..self.copies)
            .flat_map(|_| pairing_weights(&self.space, self.grade() + 1))
            .collect();
        Ok(vstar.weighted_adjoint(&g, &h)?)
    }

    /// `V(Ψ)` projected to the self-dual subspace, per copy.
    pub fn variation(&self, v: &LinDiffOp, psi: &[Form]) -> Result<Vec<Form>, ModelError> {
        let refs: Vec<&Form> = psi.iter().collect();
        let out = v.apply(&stack(&refs))?;
        let grades = vec![self.grade(); self.copies];
        unstack(self.n(), &grades, &out)
            .iter()
            .map(|f| Ok(selfdual_project(&self.space, f)?.0))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelfDualModel {
    multiplet: Multiplet,
}

/// An identity together with what is left of it.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub holds: bool,
    pub residual: Form,
}

impl Certificate {
    pub fn of(residual: Form) -> Self {
        Certificate {
            holds: residual.is_zero(),
            residual,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SelfDualReport {
    /// `(Ψ, dH) = dj` with `Ψ = −* i_ξ H`, `j = ½ i_ξ H ∧ H`.
    pub current: Certificate,
    /// `H ∧ L_ξ H = 0`.
    pub isotropy: Certificate,
    /// `V(Ψ) ≈ L_ξ H`.
    pub variation: Certificate,
}

impl SelfDualModel {
    pub fn new(space: FlatSpace) -> Result<Self, ModelError> {
        Ok(SelfDualModel {
            multiplet: Multiplet::new(space, 1)?,
        })
    }

    /// The chiral boson, `n = 2`.
    pub fn chiral_boson() -> Self {
        Self::new(FlatSpace::lorentzian(2)).expect("n = 2 is admissible")
    }

    pub fn multiplet(&self) -> &Multiplet {
        &self.multiplet
    }

    pub fn space(&self) -> &FlatSpace {
        self.multiplet.space()
    }

    pub fn h(&self) -> Form {
        self.multiplet.h(0)
    }

    pub fn field_names(&self) -> Vec<String> {
        self.multiplet.field_names("h")
    }

    pub fn jet_space(&self) -> crate::expr::JetSpace {
        self.space().jet_space(self.field_names())
    }

    pub fn residual(&self) -> Result<Form, ModelError> {
        Ok(exterior_d(&self.h())?)
    }

    pub fn anchor(&self) -> Result<LinDiffOp, ModelError> {
        let n = self.multiplet.n();
        let g = self.multiplet.grade();
        self.multiplet.anchor(&|_, _| Ok(Form::zero(n, g + 1)))
    }
}

pub fn selfdual_verify(sd: &SelfDualModel, xi: &SpacetimeVector) -> Result<SelfDualReport, ModelError> {
    let space = sd.space();
    if conformal_killing_check(xi, space)? == KillingKind::Neither {
        return Err(ModelError::Precondition("vector field is not conformal Killing".into()));
    }
    let h = sd.h();
    let t = sd.residual()?;
    let ih = interior(xi, &h)?;
    let psi = -hodge(space, &ih)?;
    let j = wedge(&ih, &h)?.scale(&Expr::constant(ratio(1, 2)));
    let current = (&pairing_density(space, &psi, &t)? - &exterior_d(&j)?).try_map(|e| {
        Ok::<_, ModelError>(if crate::expr::eval::is_zero(e)? { Expr::zero() } else { e.clone() })
    })?;
    let lh = lie_derivative(xi, &h)?;
    let isotropy = wedge(&h, &lh)?;
    let v = sd.anchor()?;
    let delta = sd.multiplet.variation(&v, &[psi])?.remove(0);
    let shell = sd.multiplet.shell("h")?;
    let variation = reduce_form(&(&delta - &lh), &shell)?;
    Ok(SelfDualReport {
        current: Certificate::of(current),
        isotropy: Certificate::of(isotropy),
        variation: Certificate::of(variation),
    })
}
