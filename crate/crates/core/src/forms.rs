//! Exterior calculus on flat ℝⁿ with a constant diagonal metric. Form
//! coefficients are expressions over the coordinates `x0..x{n-1}` (the
//! independent variables) and jets of field components.
//!
//! Hodge convention: `ε_{01…n−1} = +1` and `*(dx^I) = η^{II} ε_{IJ} dx^J`
//! with `J` the increasing complement of `I`. Then
//! `** = (−1)^{k(n−k)} det(η)` on `k`-forms.

use std::collections::BTreeMap;
use std::ops::{Add, Neg, Sub};

use crate::expr::eval::is_zero;
use crate::expr::{rat, ratio, total_derivative, Expr, ExprError, JetSpace, Symbol};

/// Strictly increasing index tuple.
pub type Idx = Vec<usize>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormError {
    #[error("grade overflow: {0} + {1} exceeds dimension {2}")]
    GradeOverflow(usize, usize, usize),
    #[error("exterior derivative of a top-degree form")]
    TopDegree,
    #[error("interior product of a 0-form")]
    InteriorOfScalar,
    #[error("grade mismatch: {0} vs {1}")]
    GradeMismatch(usize, usize),
    #[error("dimension mismatch: {0} vs {1}")]
    Dimension(usize, usize),
    #[error("self-dual split needs Lorentzian n = 2 mod 4 and grade n/2: {0}")]
    SelfDualSetting(String),
    #[error("signature entries must be +1 or -1")]
    Signature,
    #[error(transparent)]
    Expr(#[from] ExprError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlatSpace {
    signature: Vec<i8>,
}

impl FlatSpace {
    pub fn new(signature: Vec<i8>) -> Result<Self, FormError> {
        if signature.iter().any(|&s| s != 1 && s != -1) {
            return Err(FormError::Signature);
        }
        Ok(FlatSpace { signature })
    }

    pub fn euclidean(n: usize) -> Self {
        FlatSpace { signature: vec![1; n] }
    }

    /// `η = diag(−1, 1, …, 1)`.
    pub fn lorentzian(n: usize) -> Self {
        let mut signature = vec![1; n];
        if n > 0 {
            signature[0] = -1;
        }
        FlatSpace { signature }
    }

    pub fn n(&self) -> usize {
        self.signature.len()
    }

    pub fn signature(&self) -> &[i8] {
        &self.signature
    }

    pub fn eta(&self, mu: usize) -> i64 {
        self.signature[mu] as i64
    }

    pub fn det_sign(&self) -> i64 {
        self.signature.iter().map(|&s| s as i64).product()
    }

    pub fn is_lorentzian(&self) -> bool {
        self.signature.iter().filter(|&&s| s < 0).count() == 1 && self.signature[0] < 0
    }

    /// The coordinate `x^μ`.
    pub fn coordinate(&self, mu: usize) -> Expr {
        Expr::symbol(Symbol::Indep(mu as u16))
    }

    /// Jet space with coordinates `x0..` and the given field names.
    pub fn jet_space(&self, fields: Vec<String>) -> JetSpace {
        JetSpace::new((0..self.n()).map(|m| format!("x{}", m)).collect(), fields)
    }

    /// Increasing tuples of length `grade`, lexicographically.
    pub fn basis(&self, grade: usize) -> Vec<Idx> {
        basis(self.n(), grade)
    }

    /// Sign `s` with `** = s` on `k`-forms.
    pub fn double_star_sign(&self, k: usize) -> i64 {
        let n = self.n();
        let p = if (k * (n - k)) % 2 == 0 { 1 } else { -1 };
        p * self.det_sign()
    }

    pub fn volume(&self) -> Form {
        Form::basis_form(self.n(), (0..self.n()).collect(), Expr::one())
    }
}

pub fn basis(n: usize, grade: usize) -> Vec<Idx> {
    fn go(start: usize, n: usize, left: usize, cur: &mut Idx, out: &mut Vec<Idx>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(i + 1, n, left - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if grade <= n {
        go(0, n, grade, &mut Vec::new(), &mut out);
    }
    out
}

/// Sort `idx` and return the permutation sign, or `None` on a repeat.
fn sort_sign(mut idx: Vec<usize>) -> Option<(Idx, i64)> {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
        if j > 0 && idx[j - 1] == idx[j] {
            return None;
        }
    }
    Some((idx, sign))
}

fn concat(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().chain(b).copied().collect()
}

fn complement(n: usize, idx: &[usize]) -> Idx {
    (0..n).filter(|m| !idx.contains(m)).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Form {
    n: usize,
    grade: usize,
    comps: BTreeMap<Idx, Expr>,
}

impl Form {
    pub fn zero(n: usize, grade: usize) -> Self {
        assert!(grade <= n, "grade {} exceeds dimension {}", grade, n);
        Form { n, grade, comps: BTreeMap::new() }
    }

    pub fn scalar(n: usize, e: Expr) -> Self {
        let mut f = Self::zero(n, 0);
        f.add_to(vec![], e);
        f
    }

    /// `c · dx^{i1} ∧ … ∧ dx^{ik}`; indices in any order.
    pub fn basis_form(n: usize, idx: Vec<usize>, c: Expr) -> Self {
        let mut f = Self::zero(n, idx.len());
        assert!(idx.iter().all(|&i| i < n), "index out of range");
        if let Some((sorted, sign)) = sort_sign(idx) {
            f.add_to(sorted, c.scale(&rat(sign)));
        }
        f
    }

    /// `dx^μ`.
    pub fn dx(n: usize, mu: usize) -> Self {
        Self::basis_form(n, vec![mu], Expr::one())
    }

    /// Form whose component on the `k`-th basis tuple is the field
    /// `first_field + k`.
    pub fn field(n: usize, grade: usize, first_field: u16) -> Self {
        let comps = basis(n, grade)
            .into_iter()
            .enumerate()
            .map(|(k, i)| (i, Expr::symbol(Symbol::field(first_field + k as u16, n))))
            .collect();
        Form { n, grade, comps }
    }

    /// Components listed in basis order.
    pub fn from_vector(n: usize, grade: usize, v: &[Expr]) -> Self {
        let b = basis(n, grade);
        assert_eq!(b.len(), v.len(), "component count");
        let mut f = Self::zero(n, grade);
        for (i, e) in b.into_iter().zip(v) {
            f.add_to(i, e.clone());
        }
        f
    }

    pub fn to_vector(&self) -> Vec<Expr> {
        basis(self.n, self.grade).iter().map(|i| self.get(i)).collect()
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn grade(&self) -> usize {
        self.grade
    }

    pub fn get(&self, idx: &[usize]) -> Expr {
        self.comps.get(idx).cloned().unwrap_or_default()
    }

    pub fn components(&self) -> impl Iterator<Item = (&Idx, &Expr)> {
        self.comps.iter()
    }

    /// Structurally zero.
    pub fn is_zero(&self) -> bool {
        self.comps.is_empty()
    }

    /// Zero as a function of all symbols (exact on polynomials).
    pub fn vanishes(&self) -> Result<bool, ExprError> {
        for e in self.comps.values() {
            if !is_zero(e)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn add_to(&mut self, idx: Idx, e: Expr) {
        if e.is_zero() {
            return;
        }
        let slot = self.comps.entry(idx).or_default();
        *slot += e;
        if slot.is_zero() {
            self.comps.retain(|_, v| !v.is_zero());
        }
    }

    fn check_same(&self, other: &Form) {
        assert!(
            self.n == other.n && self.grade == other.grade,
            "adding forms of shapes ({}, {}) and ({}, {})",
            self.n,
            self.grade,
            other.n,
            other.grade
        );
    }

    pub fn scale(&self, c: &Expr) -> Form {
        self.map(|e| e * c)
    }

    pub fn scale_rat(&self, c: i64) -> Form {
        self.map(|e| e.scale(&rat(c)))
    }

    pub fn map(&self, mut f: impl FnMut(&Expr) -> Expr) -> Form {
        let mut out = Form::zero(self.n, self.grade);
        for (i, e) in &self.comps {
            out.add_to(i.clone(), f(e));
        }
        out
    }

    pub fn try_map<E>(&self, mut f: impl FnMut(&Expr) -> Result<Expr, E>) -> Result<Form, E> {
        let mut out = Form::zero(self.n, self.grade);
        for (i, e) in &self.comps {
            out.add_to(i.clone(), f(e)?);
        }
        Ok(out)
    }

    /// The single coefficient of a top-degree form.
    pub fn top_coefficient(&self) -> Expr {
        assert_eq!(self.grade, self.n, "not a top-degree form");
        self.get(&(0..self.n).collect::<Vec<_>>())
    }

    /// Human-readable `c*dx0^dx1 + …`.
    pub fn to_text(&self, space: &JetSpace) -> String {
        if self.comps.is_empty() {
            return "0".into();
        }
        self.comps
            .iter()
            .map(|(i, e)| {
                let dx: Vec<String> = i.iter().map(|m| format!("dx{}", m)).collect();
                if dx.is_empty() {
                    e.to_text(space)
                } else {
                    format!("({})*{}", e.to_text(space), dx.join("^"))
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

impl Add<&Form> for &Form {
    type Output = Form;
    /// Panics when shapes differ.
    fn add(self, rhs: &Form) -> Form {
        self.check_same(rhs);
        let mut out = self.clone();
        for (i, e) in &rhs.comps {
            out.add_to(i.clone(), e.clone());
        }
        out
    }
}

impl Sub<&Form> for &Form {
    type Output = Form;
    fn sub(self, rhs: &Form) -> Form {
        self + &(-rhs)
    }
}

impl Add for Form {
    type Output = Form;
    fn add(self, rhs: Form) -> Form {
        &self + &rhs
    }
}

impl Sub for Form {
    type Output = Form;
    fn sub(self, rhs: Form) -> Form {
        &self - &rhs
    }
}

impl Neg for &Form {
    type Output = Form;
    fn neg(self) -> Form {
        self.map(|e| -e)
    }
}

impl Neg for Form {
    type Output = Form;
    fn neg(self) -> Form {
        -&self
    }
}

/// Vector field `ξ^μ ∂_μ` with coefficients over the coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SpacetimeVector {
    pub comps: Vec<Expr>,
}

impl SpacetimeVector {
    pub fn new(comps: Vec<Expr>) -> Self {
        SpacetimeVector { comps }
    }

    pub fn zero(n: usize) -> Self {
        SpacetimeVector { comps: vec![Expr::zero(); n] }
    }

    /// `∂_μ`.
    pub fn translation(n: usize, mu: usize) -> Self {
        let mut v = Self::zero(n);
        v.comps[mu] = Expr::one();
        v
    }

    /// `x_μ ∂_ν − x_ν ∂_μ` with `x_μ = η_{μμ} x^μ`.
    pub fn rotation(space: &FlatSpace, mu: usize, nu: usize) -> Self {
        let mut v = Self::zero(space.n());
        v.comps[nu] = space.coordinate(mu).scale(&rat(space.eta(mu)));
        v.comps[mu] = space.coordinate(nu).scale(&rat(-space.eta(nu)));
        v
    }

    /// `x^μ ∂_μ`.
    pub fn dilation(space: &FlatSpace) -> Self {
        SpacetimeVector {
            comps: (0..space.n()).map(|m| space.coordinate(m)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.comps.len()
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Expr::is_zero)
    }

    pub fn divergence(&self) -> Expr {
        (0..self.n())
            .map(|m| self.comps[m].partial(&Symbol::Indep(m as u16)))
            .sum()
    }
}

impl Add<&SpacetimeVector> for &SpacetimeVector {
    type Output = SpacetimeVector;
    fn add(self, rhs: &SpacetimeVector) -> SpacetimeVector {
        SpacetimeVector {
            comps: self.comps.iter().zip(&rhs.comps).map(|(a, b)| a + b).collect(),
        }
    }
}

pub fn wedge(a: &Form, b: &Form) -> Result<Form, FormError> {
    if a.n != b.n {
        return Err(FormError::Dimension(a.n, b.n));
    }
    if a.grade + b.grade > a.n {
        return Err(FormError::GradeOverflow(a.grade, b.grade, a.n));
    }
    let mut out = Form::zero(a.n, a.grade + b.grade);
    for (i, x) in &a.comps {
        for (j, y) in &b.comps {
            if let Some((k, sign)) = sort_sign(concat(i, j)) {
                out.add_to(k, (x * y).scale(&rat(sign)));
            }
        }
    }
    Ok(out)
}

/// `da = Σ dx^μ ∧ D_μ a_I dx^I`, with jets raised by total derivatives.
pub fn exterior_d(a: &Form) -> Result<Form, FormError> {
    if a.grade >= a.n {
        return Err(FormError::TopDegree);
    }
    let mut out = Form::zero(a.n, a.grade + 1);
    for (i, e) in &a.comps {
        for mu in 0..a.n {
            if i.contains(&mu) {
                continue;
            }
            let de = total_derivative(e, mu);
            if de.is_zero() {
                continue;
            }
            let (k, sign) = sort_sign(concat(&[mu], i)).unwrap();
            out.add_to(k, de.scale(&rat(sign)));
        }
    }
    Ok(out)
}

pub fn hodge(space: &FlatSpace, a: &Form) -> Result<Form, FormError> {
    let n = space.n();
    if a.n != n {
        return Err(FormError::Dimension(a.n, n));
    }
    let mut out = Form::zero(n, n - a.grade);
    for (i, e) in &a.comps {
        let j = complement(n, i);
        let eta: i64 = i.iter().map(|&m| space.eta(m)).product();
        let (_, eps) = sort_sign(concat(i, &j)).unwrap();
        out.add_to(j, e.scale(&rat(eta * eps)));
    }
    Ok(out)
}

/// Contraction into the first slot.
pub fn interior(xi: &SpacetimeVector, a: &Form) -> Result<Form, FormError> {
    if a.grade == 0 {
        return Err(FormError::InteriorOfScalar);
    }
    if xi.n() != a.n {
        return Err(FormError::Dimension(xi.n(), a.n));
    }
    let mut out = Form::zero(a.n, a.grade - 1);
    for (i, e) in &a.comps {
        for (r, &mu) in i.iter().enumerate() {
            if xi.comps[mu].is_zero() {
                continue;
            }
            let mut rest = i.clone();
            rest.remove(r);
            let sign = if r % 2 == 0 { 1 } else { -1 };
            out.add_to(rest, (&xi.comps[mu] * e).scale(&rat(sign)));
        }
    }
    Ok(out)
}

/// Cartan's formula `L_ξ = i_ξ d + d i_ξ`.
pub fn lie_derivative(xi: &SpacetimeVector, a: &Form) -> Result<Form, FormError> {
    let mut out = Form::zero(a.n, a.grade);
    if a.grade < a.n {
        out = &out + &interior(xi, &exterior_d(a)?)?;
    }
    if a.grade > 0 {
        out = &out + &exterior_d(&interior(xi, a)?)?;
    }
    Ok(out)
}

/// `((a + *a)/2, (a − *a)/2)`.
pub fn selfdual_project(space: &FlatSpace, a: &Form) -> Result<(Form, Form), FormError> {
    let n = space.n();
    if n % 4 != 2 || !space.is_lorentzian() || a.grade != n / 2 {
        return Err(FormError::SelfDualSetting(format!(
            "n = {}, signature {:?}, grade {}",
            n,
            space.signature(),
            a.grade
        )));
    }
    let s = hodge(space, a)?;
    let half = Expr::constant(ratio(1, 2));
    Ok(((a + &s).scale(&half), (a - &s).scale(&half)))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum KillingKind {
    Killing,
    Conformal,
    Neither,
}

/// Classifies `ξ` via `K_{μν} = ∂_μ ξ_ν + ∂_ν ξ_μ`.
pub fn conformal_killing_check(xi: &SpacetimeVector, space: &FlatSpace) -> Result<KillingKind, FormError> {
    let n = space.n();
    if xi.n() != n {
        return Err(FormError::Dimension(xi.n(), n));
    }
    let lower: Vec<Expr> = (0..n).map(|m| xi.comps[m].scale(&rat(space.eta(m)))).collect();
    let d = |e: &Expr, m: usize| e.partial(&Symbol::Indep(m as u16));
    let mut k = Vec::new();
    for mu in 0..n {
        for nu in mu..n {
            k.push((mu, nu, d(&lower[nu], mu) + d(&lower[mu], nu)));
        }
    }
    if k.iter().try_fold(true, |acc, (_, _, e)| Ok::<_, ExprError>(acc && is_zero(e)?))? {
        return Ok(KillingKind::Killing);
    }
    let div = xi.divergence().scale(&ratio(2, n as i64));
    for (mu, nu, e) in &k {
        let target = if mu == nu { div.scale(&rat(space.eta(*mu))) } else { Expr::zero() };
        if !is_zero(&(e - &target))? {
            return Ok(KillingKind::Neither);
        }
    }
    Ok(KillingKind::Conformal)
}

/// `a ∧ *b`.
pub fn pairing_density(space: &FlatSpace, a: &Form, b: &Form) -> Result<Form, FormError> {
    if a.grade != b.grade {
        return Err(FormError::GradeMismatch(a.grade, b.grade));
    }
    wedge(a, &hodge(space, b)?)
}
