use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::symbol::Symbol;

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// Elementary function kernels. They are opaque: no trigonometric or
/// logarithmic rewriting is ever attempted.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
            Func::Log => "log",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        match name {
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            "log" => Some(Func::Log),
            _ => None,
        }
    }
}

/// Indivisible factor of a monomial.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Atom {
    Sym(Symbol),
    Func(Func, Arc<Expr>),
    /// Reciprocal of a polynomial with at least two terms, normalized to a
    /// unit leading coefficient and no common monomial factor.
    Recip(Arc<Expr>),
}

/// Product of atoms with non-zero integer exponents, sorted by atom.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Default)]
pub struct Monomial(Vec<(Atom, i32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn atom(atom: Atom, exp: i32) -> Self {
        if exp == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(atom, exp)])
        }
    }

    pub fn factors(&self) -> &[(Atom, i32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> i64 {
        self.0.iter().map(|(_, e)| *e as i64).sum()
    }

    pub fn exponent_of(&self, atom: &Atom) -> i32 {
        self.0
            .binary_search_by(|(a, _)| a.cmp(atom))
            .map(|i| self.0[i].1)
            .unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let e = self.0[i].1 + other.0[j].1;
                    if e != 0 {
                        out.push((self.0[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    pub fn pow(&self, k: i32) -> Monomial {
        if k == 0 {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|(a, e)| (a.clone(), e * k)).collect())
    }

    /// Same monomial with the exponent of the factor at `pos` changed by `delta`.
    pub(crate) fn bump(&self, pos: usize, delta: i32) -> Monomial {
        let mut v = self.0.clone();
        v[pos].1 += delta;
        if v[pos].1 == 0 {
            v.remove(pos);
        }
        Monomial(v)
    }

    /// Componentwise minimum exponent over atoms present in both.
    fn common_factor(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::new();
        for (a, e) in &self.0 {
            let f = other.exponent_of(a);
            if f != 0 && (e.signum() == f.signum()) {
                let m = if *e > 0 { (*e).min(f) } else { (*e).max(f) };
                out.push((a.clone(), m));
            }
        }
        Monomial(out)
    }
}

/// Graded lexicographic: total degree first, then the first atom (in atom
/// order) whose exponents differ decides, larger exponent being greater.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        let (a, b) = (&self.0, &other.0);
        let (mut i, mut j) = (0, 0);
        loop {
            match (a.get(i), b.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some((_, e)), None) => return e.cmp(&0),
                (None, Some((_, f))) => return 0.cmp(f),
                (Some((x, e)), Some((y, f))) => match x.cmp(y) {
                    Ordering::Equal => {
                        if e != f {
                            return e.cmp(f);
                        }
                        i += 1;
                        j += 1;
                    }
                    Ordering::Less => return e.cmp(&0),
                    Ordering::Greater => return 0.cmp(f),
                },
            }
        }
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Canonical expression: a finite sum of monomials with non-zero rational
/// coefficients. Every constructor and operation keeps this form, so
/// structural equality is equality of canonical forms.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Expr {
    terms: BTreeMap<Monomial, Rational>,
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn one() -> Self {
        Expr::constant(rat(1))
    }

    pub fn int(n: i64) -> Self {
        Expr::constant(rat(n))
    }

    pub fn frac(n: i64, d: i64) -> Self {
        Expr::constant(ratio(n, d))
    }

    pub fn constant(c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(Monomial::one(), c);
        }
        Expr { terms }
    }

    pub fn symbol(s: Symbol) -> Self {
        Expr::from_monomial(Monomial::atom(Atom::Sym(s), 1), rat(1))
    }

    pub fn param(name: &str) -> Self {
        Expr::symbol(Symbol::param(name))
    }

    pub fn from_monomial(m: Monomial, c: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Expr { terms }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(rat(0)),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn as_integer(&self) -> Option<i64> {
        let c = self.as_constant()?;
        if c.is_integer() {
            i64::try_from(c.to_integer()).ok()
        } else {
            None
        }
    }

    pub fn as_monomial(&self) -> Option<(&Monomial, &Rational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    /// Coefficient of the highest monomial in the graded order.
    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn scale(&self, c: &Rational) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        Expr {
            terms: self
                .terms
                .iter()
                .map(|(m, k)| (m.clone(), k * c))
                .collect(),
        }
    }

    fn add_term(terms: &mut BTreeMap<Monomial, Rational>, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_ref(&self, other: &Expr) -> Expr {
        let mut terms = self.terms.clone();
        for (m, c) in &other.terms {
            Expr::add_term(&mut terms, m.clone(), c.clone());
        }
        Expr { terms }
    }

    pub fn mul_ref(&self, other: &Expr) -> Expr {
        if self.is_zero() || other.is_zero() {
            return Expr::zero();
        }
        let mut terms = BTreeMap::new();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                Expr::add_term(&mut terms, m1.mul(m2), c1 * c2);
            }
        }
        Expr { terms }
    }

    pub fn mul_monomial(&self, m: &Monomial, c: &Rational) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        let mut terms = BTreeMap::new();
        for (m1, c1) in &self.terms {
            Expr::add_term(&mut terms, m1.mul(m), c1 * c);
        }
        Expr { terms }
    }

    /// Integer power. Negative powers of a single term invert it exactly;
    /// negative powers of a sum go through a reciprocal atom.
    pub fn pow(&self, k: i64) -> Expr {
        if k == 0 {
            return Expr::one();
        }
        if k < 0 {
            return self.recip().pow(-k);
        }
        if let Some((m, c)) = self.as_monomial() {
            let k32 = k as i32;
            return Expr::from_monomial(m.pow(k32), c.pow(k32));
        }
        let mut base = self.clone();
        let mut acc = Expr::one();
        let mut e = k as u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_ref(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_ref(&base);
            }
        }
        acc
    }

    /// Multiplicative inverse. Panics on the zero expression.
    pub fn recip(&self) -> Expr {
        assert!(!self.is_zero(), "reciprocal of zero expression");
        if let Some((m, c)) = self.as_monomial() {
            return Expr::from_monomial(m.pow(-1), c.recip());
        }
        // pull out the common monomial factor and the leading coefficient
        let mut iter = self.terms.keys();
        let mut common = iter.next().unwrap().clone();
        for m in iter {
            common = common.common_factor(m);
        }
        let (_, lead) = self.leading().unwrap();
        let lead = lead.clone();
        let inv_common = common.pow(-1);
        let normalized = self.mul_monomial(&inv_common, &lead.recip());
        Expr::from_monomial(
            inv_common.mul(&Monomial::atom(Atom::Recip(Arc::new(normalized)), 1)),
            lead.recip(),
        )
    }

    pub fn div_ref(&self, other: &Expr) -> Expr {
        self.mul_ref(&other.recip())
    }

    pub fn apply(f: Func, arg: Expr) -> Expr {
        if let Some(c) = arg.as_constant() {
            match f {
                Func::Sin if c.is_zero() => return Expr::zero(),
                Func::Cos | Func::Exp if c.is_zero() => return Expr::one(),
                Func::Log if c.is_one() => return Expr::zero(),
                _ => {}
            }
        }
        Expr::from_monomial(Monomial::atom(Atom::Func(f, Arc::new(arg)), 1), rat(1))
    }

    pub fn sin(arg: Expr) -> Expr {
        Expr::apply(Func::Sin, arg)
    }
    pub fn cos(arg: Expr) -> Expr {
        Expr::apply(Func::Cos, arg)
    }
    pub fn exp(arg: Expr) -> Expr {
        Expr::apply(Func::Exp, arg)
    }
    pub fn log(arg: Expr) -> Expr {
        Expr::apply(Func::Log, arg)
    }

    /// Rebuild the expression with every symbol mapped through `f`
    /// (symbols mapped to `None` are kept). Substitutes inside function
    /// arguments and reciprocals too.
    pub fn substitute(&self, f: &dyn Fn(&Symbol) -> Option<Expr>) -> Expr {
        let mut acc = Expr::zero();
        for (m, c) in &self.terms {
            let mut term = Expr::constant(c.clone());
            let mut kept = Monomial::one();
            for (atom, e) in m.factors() {
                match atom.substitute(f) {
                    None => kept = kept.mul(&Monomial::atom(atom.clone(), *e)),
                    Some(replacement) => term = term.mul_ref(&replacement.pow(*e as i64)),
                }
            }
            acc += term.mul_monomial(&kept, &rat(1));
        }
        acc
    }

    pub fn subs(&self, sym: &Symbol, value: &Expr) -> Expr {
        self.substitute(&|s| (s == sym).then(|| value.clone()))
    }

    /// Every symbol occurring anywhere, including inside atoms.
    pub fn symbols(&self) -> BTreeSet<Symbol> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols(&self, out: &mut BTreeSet<Symbol>) {
        for m in self.terms.keys() {
            for (a, _) in m.factors() {
                match a {
                    Atom::Sym(s) => {
                        out.insert(s.clone());
                    }
                    Atom::Func(_, e) | Atom::Recip(e) => e.collect_symbols(out),
                }
            }
        }
    }

    pub fn contains_symbol(&self, pred: &dyn Fn(&Symbol) -> bool) -> bool {
        self.symbols().iter().any(pred)
    }

    /// True when no function or reciprocal atoms occur; on this class the
    /// canonical form decides equality exactly.
    pub fn is_polynomial(&self) -> bool {
        self.terms
            .keys()
            .all(|m| m.factors().iter().all(|(a, e)| matches!(a, Atom::Sym(_)) && *e > 0))
    }

    pub fn has_opaque_atoms(&self) -> bool {
        self.terms
            .keys()
            .any(|m| m.factors().iter().any(|(a, _)| !matches!(a, Atom::Sym(_))))
    }

    pub fn max_jet_order(&self) -> Option<u32> {
        self.symbols().iter().filter_map(|s| s.jet_order()).max()
    }

    /// Rough size measure: one node per term, factor, and nested node.
    pub fn node_count(&self) -> usize {
        self.terms
            .keys()
            .map(|m| {
                1 + m
                    .factors()
                    .iter()
                    .map(|(a, _)| match a {
                        Atom::Sym(_) => 1,
                        Atom::Func(_, e) | Atom::Recip(e) => 1 + e.node_count(),
                    })
                    .sum::<usize>()
            })
            .sum()
    }

    /// Split into homogeneous parts by total degree in the symbols selected
    /// by `pred`. Atoms other than plain symbols count as degree zero.
    pub fn split_by_degree(&self, pred: &dyn Fn(&Symbol) -> bool) -> BTreeMap<i64, Expr> {
        let mut out: BTreeMap<i64, BTreeMap<Monomial, Rational>> = BTreeMap::new();
        for (m, c) in &self.terms {
            let deg: i64 = m
                .factors()
                .iter()
                .filter(|(a, _)| matches!(a, Atom::Sym(s) if pred(s)))
                .map(|(_, e)| *e as i64)
                .sum();
            out.entry(deg).or_default().insert(m.clone(), c.clone());
        }
        out.into_iter().map(|(d, t)| (d, Expr { terms: t })).collect()
    }

    /// Coefficients with respect to the plain symbols selected by `pred`:
    /// maps each monomial in those symbols to its cofactor expression.
    pub fn coefficients_in(&self, pred: &dyn Fn(&Symbol) -> bool) -> BTreeMap<Monomial, Expr> {
        let mut out: BTreeMap<Monomial, Expr> = BTreeMap::new();
        for (m, c) in &self.terms {
            let mut sel = Vec::new();
            let mut rest = Vec::new();
            for (a, e) in m.factors() {
                match a {
                    Atom::Sym(s) if pred(s) => sel.push((a.clone(), *e)),
                    _ => rest.push((a.clone(), *e)),
                }
            }
            let entry = out.entry(Monomial(sel)).or_default();
            *entry += Expr::from_monomial(Monomial(rest), c.clone());
        }
        out.retain(|_, e| !e.is_zero());
        out
    }

    /// Largest absolute coefficient, for diagnostics.
    pub fn max_abs_coefficient(&self) -> Rational {
        self.terms
            .values()
            .map(|c| c.abs())
            .max()
            .unwrap_or_else(|| rat(0))
    }
}

impl Atom {
    /// Replacement for this atom, or `None` when nothing inside changed.
    fn substitute(&self, f: &dyn Fn(&Symbol) -> Option<Expr>) -> Option<Expr> {
        match self {
            Atom::Sym(s) => f(s),
            Atom::Func(k, arg) => {
                let new = arg.substitute(f);
                (new != **arg).then(|| Expr::apply(*k, new))
            }
            Atom::Recip(p) => {
                let new = p.substitute(f);
                (new != **p).then(|| new.recip())
            }
        }
    }
}

impl From<Symbol> for Expr {
    fn from(s: Symbol) -> Self {
        Expr::symbol(s)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Rational> for Expr {
    fn from(c: Rational) -> Self {
        Expr::constant(c)
    }
}

macro_rules! binop {
    ($tr:ident, $method:ident, $imp:ident) => {
        impl $tr<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $imp(self, rhs)
            }
        }
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $imp(&self, &rhs)
            }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                $imp(&self, rhs)
            }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                $imp(self, &rhs)
            }
        }
    };
}

fn add_impl(a: &Expr, b: &Expr) -> Expr {
    a.add_ref(b)
}
fn sub_impl(a: &Expr, b: &Expr) -> Expr {
    a.add_ref(&-b)
}
fn mul_impl(a: &Expr, b: &Expr) -> Expr {
    a.mul_ref(b)
}

binop!(Add, add, add_impl);
binop!(Sub, sub, sub_impl);
binop!(Mul, mul, mul_impl);

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl AddAssign<Expr> for Expr {
    fn add_assign(&mut self, rhs: Expr) {
        for (m, c) in rhs.terms {
            Expr::add_term(&mut self.terms, m, c);
        }
    }
}

impl AddAssign<&Expr> for Expr {
    fn add_assign(&mut self, rhs: &Expr) {
        for (m, c) in &rhs.terms {
            Expr::add_term(&mut self.terms, m.clone(), c.clone());
        }
    }
}

impl SubAssign<&Expr> for Expr {
    fn sub_assign(&mut self, rhs: &Expr) {
        for (m, c) in &rhs.terms {
            Expr::add_term(&mut self.terms, m.clone(), -c);
        }
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        let mut acc = Expr::zero();
        for e in iter {
            acc += e;
        }
        acc
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x(i: u16) -> Expr {
        Expr::symbol(Symbol::field(i, 1))
    }

    #[test]
    fn ring_identity_cancels() {
        let e = (x(0) + x(1)) - (x(1) + x(0));
        assert!(e.is_zero());
    }

    #[test]
    fn square_expands() {
        let e = (x(0) + x(1)).pow(2);
        let expect = x(0).pow(2) + Expr::int(2) * x(0) * x(1) + x(1).pow(2);
        assert_eq!(e, expect);
    }

    #[test]
    fn reciprocal_normalizes_content() {
        let p = Expr::int(2) * x(0) * x(0) + Expr::int(4) * x(0);
        let r = p.recip();
        // 1/(2x^2+4x) = (1/2) x^-1 (x+2)^-1
        let alt = (x(0) + Expr::int(2)).recip() * x(0).recip() * Expr::frac(1, 2);
        assert_eq!(r, alt);
        assert_eq!(x(0).recip() * x(0), Expr::one());
    }

    #[test]
    fn function_constant_folding() {
        assert!(Expr::sin(Expr::zero()).is_zero());
        assert_eq!(Expr::exp(Expr::zero()), Expr::one());
        assert!(Expr::log(Expr::one()).is_zero());
    }

    #[test]
    fn substitution_inside_atoms() {
        let e = Expr::sin(x(0) * x(1));
        let s = e.subs(&Symbol::field(1, 1), &Expr::int(2));
        assert_eq!(s, Expr::sin(Expr::int(2) * x(0)));
    }

    #[test]
    fn graded_order_leading_term() {
        let e = x(0) + x(1).pow(2) + Expr::int(3);
        let (m, _) = e.leading().unwrap();
        assert_eq!(m.degree(), 2);
    }
}
