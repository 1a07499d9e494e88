use std::collections::BTreeSet;

use super::poly::{rat, ratio, Atom, Expr, Func, Monomial};
use super::symbol::{MultiIndex, Symbol};
use super::ExprError;

impl Expr {
    /// Apply the derivation that sends each symbol `s` to `ds(s)`, extended
    /// to products and function atoms by the chain rule.
    pub fn derive(&self, ds: &dyn Fn(&Symbol) -> Expr) -> Expr {
        let mut acc = Expr::zero();
        for (m, c) in self.terms() {
            for (pos, (a, k)) in m.factors().iter().enumerate() {
                let da = atom_derivative(a, ds);
                if da.is_zero() {
                    continue;
                }
                // d(a^k) = k a^(k-1) da
                let rest = m.bump(pos, -1);
                acc += da.mul_monomial(&rest, &(c * rat(*k as i64)));
            }
        }
        acc
    }

    /// Partial derivative with respect to one symbol, all others held fixed.
    pub fn partial(&self, sym: &Symbol) -> Expr {
        self.derive(&|s| if s == sym { Expr::one() } else { Expr::zero() })
    }
}

fn atom_derivative(a: &Atom, ds: &dyn Fn(&Symbol) -> Expr) -> Expr {
    match a {
        Atom::Sym(s) => ds(s),
        Atom::Func(f, arg) => {
            let inner = arg.derive(ds);
            if inner.is_zero() {
                return Expr::zero();
            }
            let outer = match f {
                Func::Sin => Expr::cos((**arg).clone()),
                Func::Cos => -Expr::sin((**arg).clone()),
                Func::Exp => Expr::exp((**arg).clone()),
                Func::Log => arg.recip(),
            };
            outer * inner
        }
        Atom::Recip(p) => {
            let inner = p.derive(ds);
            if inner.is_zero() {
                return Expr::zero();
            }
            // a = 1/p, so da = -a^2 dp
            Expr::from_monomial(Monomial::atom(a.clone(), 2), rat(-1)) * inner
        }
    }
}

/// Total derivative `D_d` on the jet space: jets are raised in direction
/// `d`, the independent variable `d` differentiates to one.
pub fn total_derivative(e: &Expr, d: usize) -> Expr {
    e.derive(&|s| match s {
        Symbol::Indep(i) if *i as usize == d => Expr::one(),
        Symbol::Jet { field, index } if d < index.dim() => Expr::symbol(Symbol::jet(*field, index.raised(d))),
        _ => Expr::zero(),
    })
}

/// `D^α e`, applying one total derivative per unit of `α`.
pub fn total_derivative_multi(e: &Expr, alpha: &MultiIndex) -> Expr {
    let mut out = e.clone();
    for (d, &c) in alpha.counts().iter().enumerate() {
        for _ in 0..c {
            if out.is_zero() {
                return out;
            }
            out = total_derivative(&out, d);
        }
    }
    out
}

/// Jet symbols of `field` occurring in `e`.
pub fn jets_of(e: &Expr, field: u16) -> BTreeSet<MultiIndex> {
    e.symbols()
        .into_iter()
        .filter_map(|s| match s {
            Symbol::Jet { field: f, index } if f == field => Some(index),
            _ => None,
        })
        .collect()
}

/// Field ids with at least one jet in `e`.
pub fn fields_of(e: &Expr) -> BTreeSet<u16> {
    e.symbols()
        .into_iter()
        .filter_map(|s| match s {
            Symbol::Jet { field, .. } => Some(field),
            _ => None,
        })
        .collect()
}

/// Variational derivative `Σ_α (−1)^|α| D^α ∂e/∂u^field_α`.
pub fn euler_derivative(density: &Expr, field: u16) -> Expr {
    let mut acc = Expr::zero();
    for alpha in jets_of(density, field) {
        let p = density.partial(&Symbol::jet(field, alpha.clone()));
        let t = total_derivative_multi(&p, &alpha);
        if alpha.order() % 2 == 0 {
            acc += t;
        } else {
            acc -= &t;
        }
    }
    acc
}

/// Jet symbol membership test used to classify jet degree.
fn is_jet(s: &Symbol) -> bool {
    matches!(s, Symbol::Jet { .. })
}

/// Antiderivative `j` with `D_t j = density` for one independent variable,
/// or `None` when the density is not a total derivative.
///
/// The density must be polynomial in every jet variable; coefficients may
/// depend on `t` and parameters in any way. Inputs outside this class are
/// rejected, never answered wrongly.
pub fn divergence_split(density: &Expr) -> Result<Option<Expr>, ExprError> {
    for s in density.symbols() {
        if let Symbol::Jet { index, .. } = &s {
            if index.dim() != 1 {
                return Err(ExprError::Unsupported(
                    "divergence_split handles a single independent variable only".into(),
                ));
            }
        }
    }
    for (m, _) in density.terms() {
        for (a, k) in m.factors() {
            match a {
                Atom::Sym(s) if is_jet(s) && *k < 0 => {
                    return Err(ExprError::Unsupported("negative power of a jet variable".into()))
                }
                Atom::Func(_, inner) | Atom::Recip(inner) if inner.contains_symbol(&is_jet) => {
                    return Err(ExprError::Unsupported(
                        "density is not polynomial in the jet variables".into(),
                    ))
                }
                _ => {}
            }
        }
    }
    let fields = fields_of(density);
    for &f in &fields {
        if !super::eval::is_zero(&euler_derivative(density, f))? {
            return Ok(None);
        }
    }
    let mut j = Expr::zero();
    for (q, part) in density.split_by_degree(&is_jet) {
        if q == 0 {
            j += integrate_in_t(&part)?;
            continue;
        }
        // homotopy formula on the degree-q homogeneous part
        let mut acc = Expr::zero();
        for &f in &fields {
            for alpha in jets_of(&part, f) {
                let k = alpha.order() as usize;
                if k == 0 {
                    continue;
                }
                let mut p = part.partial(&Symbol::jet(f, alpha.clone()));
                // p runs through (−D)^(k−1−m) ∂L/∂u_k for m = k−1 down to 0
                for m in (0..k).rev() {
                    let u = Expr::symbol(Symbol::jet(f, MultiIndex::from_counts(vec![m as u8])));
                    acc += u * &p;
                    p = -total_derivative(&p, 0);
                }
            }
        }
        j += acc.scale(&ratio(1, q));
    }
    if !super::eval::is_zero(&(total_derivative(&j, 0) - density))? {
        return Err(ExprError::Unsupported(
            "antiderivative failed verification; density outside the supported class".into(),
        ));
    }
    Ok(Some(j))
}

/// Antiderivative in `t` of an expression free of jets. Supports powers of
/// `t` with coefficients that do not depend on `t`.
pub fn integrate_in_t(e: &Expr) -> Result<Expr, ExprError> {
    let t = Symbol::Indep(0);
    let t_atom = Atom::Sym(t.clone());
    let mut out = Expr::zero();
    for (m, c) in e.terms() {
        let k = m.exponent_of(&t_atom);
        let rest: Vec<_> = m.factors().iter().filter(|(a, _)| a != &t_atom).cloned().collect();
        let mut rest_m = Monomial::one();
        for (a, e) in &rest {
            if let Atom::Func(_, inner) | Atom::Recip(inner) = a {
                if inner.symbols().contains(&t) {
                    return Err(ExprError::Unsupported(
                        "cannot integrate a non-polynomial function of t".into(),
                    ));
                }
            }
            rest_m = rest_m.mul(&Monomial::atom(a.clone(), *e));
        }
        let coeff = Expr::from_monomial(rest_m, c.clone());
        let tt = Expr::symbol(t.clone());
        if k == -1 {
            out += coeff * Expr::log(tt);
        } else {
            out += coeff * tt.pow(k as i64 + 1).scale(&ratio(1, k as i64 + 1));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse::parse;
    use crate::expr::symbol::JetSpace;

    fn p(s: &str) -> Expr {
        parse(s, &JetSpace::ode(2)).unwrap()
    }

    #[test]
    fn total_derivative_rules() {
        assert_eq!(total_derivative(&p("x1"), 0), p("x1_t"));
        assert_eq!(total_derivative(&p("t*x1"), 0), p("x1 + t*x1_t"));
        assert_eq!(total_derivative(&p("x1^2"), 0), p("2*x1*x1_t"));
        assert_eq!(total_derivative(&p("a*x1"), 0), p("a*x1_t"));
        assert_eq!(total_derivative(&p("sin(t*x1)"), 0), p("cos(t*x1)*(x1 + t*x1_t)"));
        assert_eq!(total_derivative(&p("1/(1+x1^2)"), 0), p("-2*x1*x1_t*(1+x1^2)^-2"));
        assert_eq!(total_derivative(&p("log(x1)"), 0), p("x1_t/x1"));
    }

    #[test]
    fn euler_examples() {
        assert_eq!(euler_derivative(&p("x1_t^2/2"), 0), p("-x1_tt"));
        assert_eq!(euler_derivative(&p("x1*x2_t - x2*x1_t"), 0), p("2*x2_t"));
        assert_eq!(euler_derivative(&p("x1*x2_t - x2*x1_t"), 1), p("-2*x1_t"));
    }

    #[test]
    fn divergence_examples() {
        assert_eq!(divergence_split(&p("x1_t")).unwrap(), Some(p("x1")));
        assert_eq!(divergence_split(&p("2*x1*x1_t")).unwrap(), Some(p("x1^2")));
        assert_eq!(divergence_split(&p("x1*x1_t^2")).unwrap(), None);
        assert_eq!(divergence_split(&p("3*t^2 + 1/t")).unwrap(), Some(p("t^3 + log(t)")));
        let d = p("sin(t)*x1_t + cos(t)*x1");
        assert_eq!(divergence_split(&d).unwrap(), Some(p("sin(t)*x1")));
        assert!(matches!(divergence_split(&p("sin(x1)*x1_t")), Err(ExprError::Unsupported(_))));
    }
}
