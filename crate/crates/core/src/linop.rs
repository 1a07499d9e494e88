//! Matrix linear differential operators and on-shell reduction.

use std::cmp::Reverse;
use std::collections::{BTreeMap, BTreeSet};

use num_traits::{One, Zero};

use crate::expr::calculus::{jets_of, total_derivative, total_derivative_multi};
use crate::expr::{eval, rat, Expr, ExprError, MultiIndex, Rational, Symbol};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LinOpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("shell rules do not cover `{0}`; prolong to a higher jet order")]
    Uncovered(String),
    #[error("shell equations must be linear in jets with constant coefficients: {0}")]
    NonlinearShell(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
}

type Key = (usize, usize, MultiIndex);

/// `rows × cols` matrix whose entries are sums `Σ_α c_α D^α`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinDiffOp {
    rows: usize,
    cols: usize,
    dim: usize,
    entries: BTreeMap<Key, Expr>,
}

impl LinDiffOp {
    pub fn zero(rows: usize, cols: usize, dim: usize) -> Self {
        LinDiffOp {
            rows,
            cols,
            dim,
            entries: BTreeMap::new(),
        }
    }

    pub fn identity(n: usize, dim: usize) -> Self {
        Self::diag(&vec![Expr::one(); n], dim)
    }

    pub fn diag(coeffs: &[Expr], dim: usize) -> Self {
        let mut op = Self::zero(coeffs.len(), coeffs.len(), dim);
        for (i, c) in coeffs.iter().enumerate() {
            op.add_entry(i, i, MultiIndex::zero(dim), c.clone());
        }
        op
    }

    /// `c · Id` on `n` components.
    pub fn scalar(c: &Expr, n: usize, dim: usize) -> Self {
        Self::diag(&vec![c.clone(); n], dim)
    }

    /// 1×1 operator `D_d`.
    pub fn derivative(d: usize, dim: usize) -> Self {
        let mut op = Self::zero(1, 1, dim);
        op.add_entry(0, 0, MultiIndex::unit(dim, d), Expr::one());
        op
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> impl Iterator<Item = (&Key, &Expr)> {
        self.entries.iter()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn order(&self) -> u32 {
        self.entries.keys().map(|(_, _, a)| a.order()).max().unwrap_or(0)
    }

    pub fn get(&self, r: usize, c: usize, alpha: &MultiIndex) -> Expr {
        self.entries
            .get(&(r, c, alpha.clone()))
            .cloned()
            .unwrap_or_default()
    }

    pub fn add_entry(&mut self, r: usize, c: usize, alpha: MultiIndex, coeff: Expr) {
        assert!(r < self.rows && c < self.cols, "entry ({}, {}) out of range", r, c);
        assert_eq!(alpha.dim(), self.dim, "multi-index dimension");
        if coeff.is_zero() {
            return;
        }
        let key = (r, c, alpha);
        let sum = match self.entries.remove(&key) {
            Some(old) => old + coeff,
            None => coeff,
        };
        if !sum.is_zero() {
            self.entries.insert(key, sum);
        }
    }

    /// Entry `(r, c)` as a list of `(α, coefficient)`.
    pub fn entry(&self, r: usize, c: usize) -> Vec<(MultiIndex, Expr)> {
        self.entries
            .range((r, c, MultiIndex::zero(0))..)
            .take_while(|((rr, cc, _), _)| *rr == r && *cc == c)
            .map(|((_, _, a), e)| (a.clone(), e.clone()))
            .collect()
    }

    pub fn map_coefficients(&self, f: &mut dyn FnMut(&Expr) -> Result<Expr, LinOpError>) -> Result<Self, LinOpError> {
        let mut out = Self::zero(self.rows, self.cols, self.dim);
        for ((r, c, a), e) in &self.entries {
            out.add_entry(*r, *c, a.clone(), f(e)?);
        }
        Ok(out)
    }

    fn same_shape(&self, other: &Self) -> Result<(), LinOpError> {
        if self.rows != other.rows || self.cols != other.cols || self.dim != other.dim {
            return Err(LinOpError::Dimension(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self, LinOpError> {
        self.same_shape(other)?;
        let mut out = self.clone();
        for ((r, c, a), e) in &other.entries {
            out.add_entry(*r, *c, a.clone(), e.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, LinOpError> {
        self.add(&other.scale(&Expr::int(-1)))
    }

    /// Left multiplication of every coefficient by `c`.
    pub fn scale(&self, c: &Expr) -> Self {
        let mut out = Self::zero(self.rows, self.cols, self.dim);
        for ((r, cc, a), e) in &self.entries {
            out.add_entry(*r, *cc, a.clone(), c * e);
        }
        out
    }

    /// Rows of `self` followed by rows of `other`.
    pub fn vstack(&self, other: &Self) -> Result<Self, LinOpError> {
        if self.cols != other.cols || self.dim != other.dim {
            return Err(LinOpError::Dimension("vstack needs equal column counts".into()));
        }
        let mut out = Self::zero(self.rows + other.rows, self.cols, self.dim);
        for ((r, c, a), e) in &self.entries {
            out.add_entry(*r, *c, a.clone(), e.clone());
        }
        for ((r, c, a), e) in &other.entries {
            out.add_entry(r + self.rows, *c, a.clone(), e.clone());
        }
        Ok(out)
    }

    pub fn block_diag(&self, other: &Self) -> Result<Self, LinOpError> {
        if self.dim != other.dim {
            return Err(LinOpError::Dimension("block_diag needs equal base dimension".into()));
        }
        let mut out = Self::zero(self.rows + other.rows, self.cols + other.cols, self.dim);
        for ((r, c, a), e) in &self.entries {
            out.add_entry(*r, *c, a.clone(), e.clone());
        }
        for ((r, c, a), e) in &other.entries {
            out.add_entry(r + self.rows, c + self.cols, a.clone(), e.clone());
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[Expr]) -> Result<Vec<Expr>, LinOpError> {
        if v.len() != self.cols {
            return Err(LinOpError::Dimension(format!(
                "operator has {} columns, vector has {} entries",
                self.cols,
                v.len()
            )));
        }
        let mut out = vec![Expr::zero(); self.rows];
        let mut cache: BTreeMap<(usize, MultiIndex), Expr> = BTreeMap::new();
        for ((r, c, a), e) in &self.entries {
            let d = cache
                .entry((*c, a.clone()))
                .or_insert_with(|| total_derivative_multi(&v[*c], a));
            out[*r] += e * &*d;
        }
        Ok(out)
    }

    /// `self ∘ other`, Leibniz-expanded.
    pub fn compose(&self, other: &Self) -> Result<Self, LinOpError> {
        if self.cols != other.rows || self.dim != other.dim {
            return Err(LinOpError::Dimension(format!(
                "cannot compose {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zero(self.rows, other.cols, self.dim);
        // a D^α (b D^β) = Σ_{γ≤α} C(α,γ) a D^γ(b) D^{α−γ+β}
        for ((r, k, alpha), a) in &self.entries {
            for ((kk, c, beta), b) in other.entries.range((*k, 0, MultiIndex::zero(0))..) {
                if kk != k {
                    break;
                }
                for gamma in alpha.sub_indices() {
                    let db = total_derivative_multi(b, &gamma);
                    if db.is_zero() {
                        continue;
                    }
                    let coeff = rat(alpha.binomial(&gamma) as i64);
                    let idx = alpha.checked_sub(&gamma).unwrap().add(beta);
                    out.add_entry(*r, *c, idx, (a * &db).scale(&coeff));
                }
            }
        }
        Ok(out)
    }

    /// Formal adjoint: `(a D^α)^* = (−1)^|α| D^α ∘ a`, transposed.
    pub fn formal_adjoint(&self) -> Self {
        let mut out = Self::zero(self.cols, self.rows, self.dim);
        for ((r, c, alpha), a) in &self.entries {
            let sign = if alpha.order() % 2 == 0 { 1 } else { -1 };
            for gamma in alpha.sub_indices() {
                let da = total_derivative_multi(a, &gamma);
                if da.is_zero() {
                    continue;
                }
                let coeff = rat(sign * alpha.binomial(&gamma) as i64);
                out.add_entry(*c, *r, alpha.checked_sub(&gamma).unwrap(), da.scale(&coeff));
            }
        }
        out
    }

    /// Adjoint with respect to weighted pairings: with `⟨u, w⟩ = Σ u_i g_i w_i`
    /// on the domain and `Σ y_j h_j z_j` on the codomain, returns the
    /// operator `B` with `⟨A u, z⟩_h ≐ ⟨u, B z⟩_g`, i.e. `g⁻¹ A^* h`.
    pub fn weighted_adjoint(&self, domain_weights: &[Expr], codomain_weights: &[Expr]) -> Result<Self, LinOpError> {
        if domain_weights.len() != self.cols || codomain_weights.len() != self.rows {
            return Err(LinOpError::Dimension("weight vector lengths".into()));
        }
        let inv: Vec<Expr> = domain_weights.iter().map(|g| g.recip()).collect();
        let h = Self::diag(codomain_weights, self.dim);
        let g_inv = Self::diag(&inv, self.dim);
        g_inv.compose(&self.formal_adjoint().compose(&h)?)
    }

    /// Universal linearization of `t` with respect to the listed fields:
    /// entry `(a, i)` is `Σ_α ∂t_a/∂u^{fields[i]}_α D^α`.
    pub fn linearize(t: &[Expr], fields: &[u16], dim: usize) -> Self {
        let mut out = Self::zero(t.len(), fields.len(), dim);
        for (a, ta) in t.iter().enumerate() {
            for (i, &f) in fields.iter().enumerate() {
                for alpha in jets_of(ta, f) {
                    let p = ta.partial(&Symbol::jet(f, alpha.clone()));
                    out.add_entry(a, i, alpha, p);
                }
            }
        }
        out
    }
}

/// Substitution rules realizing the equations of motion: each leading jet
/// symbol is replaced by an expression free of leading symbols.
#[derive(Clone, Debug)]
pub struct ShellRules {
    rules: BTreeMap<Symbol, Expr>,
    /// Highest jet order covered by the rules, per field.
    covered: BTreeMap<u16, u32>,
    names: Vec<String>,
}

impl ShellRules {
    /// Rules for `ẋ^i = −v^i(t, x)`, prolonged up to `max_order`.
    pub fn ode(v: &[Expr], max_order: u32) -> Self {
        let n = v.len();
        let mut rules = BTreeMap::new();
        let mut current: Vec<Expr> = v.iter().map(|e| -e).collect();
        for k in 1..=max_order {
            for i in 0..n {
                rules.insert(Symbol::jet(i as u16, MultiIndex::from_counts(vec![k as u8])), current[i].clone());
            }
            if k < max_order {
                // next order: D_t of the current rule, reduced with the rules so far
                let snapshot = ShellRules {
                    rules: rules.clone(),
                    covered: (0..n as u16).map(|f| (f, k)).collect(),
                    names: Vec::new(),
                };
                current = current
                    .iter()
                    .map(|e| snapshot.substitute(&total_derivative(e, 0)))
                    .collect();
            }
        }
        ShellRules {
            rules,
            covered: (0..n as u16).map(|f| (f, max_order)).collect(),
            names: (1..=n).map(|i| format!("x{}", i)).collect(),
        }
    }

    /// Rules from homogeneous or inhomogeneous equations linear in jets with
    /// rational coefficients. Each equation is prolonged by all total
    /// derivatives up to `prolong` and the system is row-reduced, highest
    /// jet order first.
    pub fn linear(equations: &[Expr], dim: usize, prolong: u32, field_names: Vec<String>) -> Result<Self, LinOpError> {
        let mut eqs: Vec<Expr> = Vec::new();
        for e in equations {
            for k in 0..=prolong {
                for beta in MultiIndex::all_of_order(dim, k) {
                    let d = total_derivative_multi(e, &beta);
                    if !d.is_zero() {
                        eqs.push(d);
                    }
                }
            }
        }
        // split each equation into a rational jet part and a jet-free rest
        let mut rows: Vec<(BTreeMap<Symbol, Rational>, Expr)> = Vec::new();
        let mut covered: BTreeMap<u16, u32> = BTreeMap::new();
        for e in &eqs {
            let mut lin = BTreeMap::new();
            let mut rest = Expr::zero();
            for (m, c) in e.terms() {
                let jets: Vec<_> = m
                    .factors()
                    .iter()
                    .filter(|(a, _)| matches!(a, crate::expr::Atom::Sym(Symbol::Jet { .. })))
                    .collect();
                match jets.as_slice() {
                    [] => rest += Expr::from_monomial(m.clone(), c.clone()),
                    [(crate::expr::Atom::Sym(s), 1)] if m.factors().len() == 1 => {
                        lin.insert(s.clone(), c.clone());
                        if let Symbol::Jet { field, index } = s {
                            let o = covered.entry(*field).or_insert(0);
                            *o = (*o).max(index.order());
                        }
                    }
                    _ => return Err(LinOpError::NonlinearShell(format!("{:?}", m))),
                }
            }
            rows.push((lin, rest));
        }
        let mut columns: BTreeSet<(Reverse<u32>, Symbol)> = BTreeSet::new();
        for (lin, _) in &rows {
            for s in lin.keys() {
                columns.insert((Reverse(s.jet_order().unwrap_or(0)), s.clone()));
            }
        }
        let mut rules = BTreeMap::new();
        let mut pivots: Vec<(Symbol, usize)> = Vec::new();
        let mut used = vec![false; rows.len()];
        for (_, col) in &columns {
            let Some(p) = (0..rows.len()).find(|&i| !used[i] && rows[i].0.contains_key(col)) else {
                continue;
            };
            used[p] = true;
            let pc = rows[p].0[col].clone();
            let inv = pc.recip();
            let (lin, rest) = &mut rows[p];
            for v in lin.values_mut() {
                *v *= &inv;
            }
            *rest = rest.scale(&inv);
            let prow = rows[p].clone();
            for i in 0..rows.len() {
                if i == p {
                    continue;
                }
                let Some(f) = rows[i].0.get(col).cloned() else { continue };
                let (lin, rest) = &mut rows[i];
                for (s, c) in &prow.0 {
                    let entry = lin.entry(s.clone()).or_insert_with(Rational::zero);
                    *entry -= &f * c;
                    if entry.is_zero() {
                        lin.remove(s);
                    }
                }
                *rest -= &prow.1.scale(&f);
            }
            pivots.push((col.clone(), p));
        }
        for (sym, p) in pivots {
            let (lin, rest) = &rows[p];
            debug_assert!(lin[&sym].is_one());
            let mut rhs = -rest;
            for (s, c) in lin {
                if s != &sym {
                    rhs -= &Expr::symbol(s.clone()).scale(c);
                }
            }
            rules.insert(sym, rhs);
        }
        Ok(ShellRules {
            rules,
            covered,
            names: field_names,
        })
    }

    pub fn rules(&self) -> impl Iterator<Item = (&Symbol, &Expr)> {
        self.rules.iter()
    }

    pub fn is_leading(&self, s: &Symbol) -> bool {
        self.rules.contains_key(s)
    }

    fn substitute(&self, e: &Expr) -> Expr {
        e.substitute(&|s| self.rules.get(s).cloned())
    }

    fn symbol_name(&self, s: &Symbol) -> String {
        match s {
            Symbol::Jet { field, index } => {
                let base = self
                    .names
                    .get(*field as usize)
                    .cloned()
                    .unwrap_or_else(|| format!("u{}", field));
                format!("{}{}", base, index)
            }
            other => format!("{:?}", other),
        }
    }

    /// Replace every leading symbol until none remains.
    pub fn reduce(&self, e: &Expr) -> Result<Expr, LinOpError> {
        for s in e.symbols() {
            if let Symbol::Jet { field, index } = &s {
                if let Some(&max) = self.covered.get(field) {
                    if index.order() > max {
                        return Err(LinOpError::Uncovered(self.symbol_name(&s)));
                    }
                }
            }
        }
        let mut cur = e.clone();
        // right-hand sides are already reduced, so this settles in one or
        // two passes; the bound only guards against malformed rule sets
        for _ in 0..8 {
            if !cur.symbols().iter().any(|s| self.is_leading(s)) {
                return Ok(cur);
            }
            cur = self.substitute(&cur);
        }
        Err(LinOpError::NonlinearShell("rule set is not confluent".into()))
    }

    pub fn reduce_op(&self, op: &LinDiffOp) -> Result<LinDiffOp, LinOpError> {
        op.map_coefficients(&mut |e| self.reduce(e))
    }
}

/// `A ≈ B`: every entry of `A − B` vanishes after on-shell reduction.
/// Returns the reduced residual operator alongside the verdict.
pub fn op_equal_mod_shell(a: &LinDiffOp, b: &LinDiffOp, shell: &ShellRules) -> Result<(bool, LinDiffOp), LinOpError> {
    let diff = shell.reduce_op(&a.sub(b)?)?;
    let mut residual = LinDiffOp::zero(diff.rows, diff.cols, diff.dim);
    for ((r, c, al), e) in diff.entries() {
        if !eval::is_zero(e)? {
            residual.add_entry(*r, *c, al.clone(), e.clone());
        }
    }
    Ok((residual.is_zero(), residual))
}
