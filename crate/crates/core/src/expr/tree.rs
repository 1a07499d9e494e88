use num_traits::Zero;

use super::poly::{rat, Atom, Expr, Func, Rational};
use super::symbol::Symbol;
use super::ExprError;

/// Un-normalized expression tree, as produced by the parser or built by
/// hand. `canonicalize` turns it into an [`Expr`].
#[derive(Clone, Debug, PartialEq)]
pub enum Tree {
    Num(Rational),
    Sym(Symbol),
    Add(Vec<Tree>),
    Mul(Vec<Tree>),
    Pow(Box<Tree>, i64),
    Call(Func, Box<Tree>),
}

/// Resource caps for canonicalization.
#[derive(Clone, Copy, Debug)]
pub struct Limits {
    pub max_nodes: usize,
    pub max_depth: usize,
}

pub const DEFAULT_MAX_NODES: usize = 1_000_000;

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_nodes: DEFAULT_MAX_NODES,
            max_depth: 512,
        }
    }
}

impl Limits {
    /// Node cap from `ANCHORCHECK_MAX_NODES` if set and valid.
    pub fn from_env() -> Self {
        let mut l = Limits::default();
        if let Some(n) = std::env::var("ANCHORCHECK_MAX_NODES")
            .ok()
            .and_then(|s| s.trim().parse().ok())
        {
            l.max_nodes = n;
        }
        l
    }
}

impl Tree {
    pub fn num(n: i64) -> Tree {
        Tree::Num(rat(n))
    }

    pub fn node_count(&self) -> usize {
        match self {
            Tree::Num(_) | Tree::Sym(_) => 1,
            Tree::Add(v) | Tree::Mul(v) => 1 + v.iter().map(Tree::node_count).sum::<usize>(),
            Tree::Pow(b, _) | Tree::Call(_, b) => 1 + b.node_count(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Tree::Num(_) | Tree::Sym(_) => 1,
            Tree::Add(v) | Tree::Mul(v) => 1 + v.iter().map(Tree::depth).max().unwrap_or(0),
            Tree::Pow(b, _) | Tree::Call(_, b) => 1 + b.depth(),
        }
    }
}

struct Budget {
    limits: Limits,
}

impl Budget {
    fn check(&self, e: &Expr) -> Result<(), ExprError> {
        let n = e.node_count();
        if n > self.limits.max_nodes {
            return Err(ExprError::Resource(format!(
                "expression grew to {} nodes (cap {})",
                n, self.limits.max_nodes
            )));
        }
        Ok(())
    }

    fn go(&self, t: &Tree, depth: usize) -> Result<Expr, ExprError> {
        if depth > self.limits.max_depth {
            return Err(ExprError::Resource(format!(
                "expression nesting exceeds depth cap {}",
                self.limits.max_depth
            )));
        }
        let out = match t {
            Tree::Num(c) => Expr::constant(c.clone()),
            Tree::Sym(s) => Expr::symbol(s.clone()),
            Tree::Add(v) => {
                let mut acc = Expr::zero();
                for c in v {
                    acc += self.go(c, depth + 1)?;
                    self.check(&acc)?;
                }
                acc
            }
            Tree::Mul(v) => {
                let mut acc = Expr::one();
                for c in v {
                    let f = self.go(c, depth + 1)?;
                    // predicted product size, to fail before allocating it
                    let predicted = acc.num_terms().saturating_mul(f.num_terms());
                    if predicted > self.limits.max_nodes {
                        return Err(ExprError::Resource(format!(
                            "product would exceed {} terms (cap {})",
                            predicted, self.limits.max_nodes
                        )));
                    }
                    acc = acc * f;
                    self.check(&acc)?;
                }
                acc
            }
            Tree::Pow(b, k) => {
                let base = self.go(b, depth + 1)?;
                if *k < 0 && base.is_zero() {
                    return Err(ExprError::DivisionByZero);
                }
                if base.num_terms() > 1 && k.unsigned_abs() > 1 {
                    // multinomial growth bound: terms^k is an upper bound
                    let est = (base.num_terms() as f64).powf(k.unsigned_abs() as f64);
                    if est > self.limits.max_nodes as f64 * 16.0 {
                        let exact = multinomial_terms(base.num_terms(), k.unsigned_abs());
                        if exact > self.limits.max_nodes as f64 {
                            return Err(ExprError::Resource(format!(
                                "power expansion needs about {:.0} terms (cap {})",
                                exact, self.limits.max_nodes
                            )));
                        }
                    }
                }
                base.pow(*k)
            }
            Tree::Call(f, arg) => {
                let a = self.go(arg, depth + 1)?;
                if *f == Func::Log && a.is_zero() {
                    return Err(ExprError::Domain("log(0)".into()));
                }
                Expr::apply(*f, a)
            }
        };
        self.check(&out)?;
        Ok(out)
    }
}

/// Number of monomials of degree `k` in `m` variables, as a float.
fn multinomial_terms(m: usize, k: u64) -> f64 {
    // C(m + k - 1, k)
    let mut acc = 1.0f64;
    for i in 0..k {
        acc *= (m as f64 - 1.0 + (i + 1) as f64) / (i + 1) as f64;
    }
    acc
}

/// Expand and normalize a tree into canonical form.
pub fn canonicalize(t: &Tree, limits: Limits) -> Result<Expr, ExprError> {
    if t.node_count() > limits.max_nodes {
        return Err(ExprError::Resource(format!(
            "input has {} nodes (cap {})",
            t.node_count(),
            limits.max_nodes
        )));
    }
    Budget { limits }.go(t, 0)
}

impl Expr {
    /// Tree view of a canonical expression; canonicalizing it gives back
    /// the same expression.
    pub fn to_tree(&self) -> Tree {
        let mut terms = Vec::new();
        for (m, c) in self.terms() {
            let mut factors = Vec::new();
            if !(c == &rat(1) && !m.is_one()) {
                factors.push(Tree::Num(c.clone()));
            }
            for (a, e) in m.factors() {
                let base = match a {
                    Atom::Sym(s) => Tree::Sym(s.clone()),
                    Atom::Func(f, arg) => Tree::Call(*f, Box::new(arg.to_tree())),
                    Atom::Recip(p) => Tree::Pow(Box::new(p.to_tree()), -1),
                };
                factors.push(if *e == 1 {
                    base
                } else {
                    Tree::Pow(Box::new(base), *e as i64)
                });
            }
            terms.push(if factors.len() == 1 {
                factors.pop().unwrap()
            } else {
                Tree::Mul(factors)
            });
        }
        match terms.len() {
            0 => Tree::Num(Rational::zero()),
            1 => terms.pop().unwrap(),
            _ => Tree::Add(terms),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(i: u16) -> Tree {
        Tree::Sym(Symbol::field(i, 1))
    }

    #[test]
    fn canonical_zero_from_commuted_sum() {
        let t = Tree::Add(vec![
            Tree::Add(vec![s(0), s(1)]),
            Tree::Mul(vec![Tree::num(-1), Tree::Add(vec![s(1), s(0)])]),
        ]);
        assert!(canonicalize(&t, Limits::default()).unwrap().is_zero());
    }

    #[test]
    fn atoms_commute() {
        let a = Tree::Call(Func::Sin, Box::new(Tree::Sym(Symbol::Indep(0))));
        let b = Tree::Call(Func::Exp, Box::new(s(0)));
        let t = Tree::Add(vec![
            Tree::Mul(vec![a.clone(), b.clone()]),
            Tree::Mul(vec![Tree::num(-1), b, a]),
        ]);
        assert!(canonicalize(&t, Limits::default()).unwrap().is_zero());
    }

    #[test]
    fn node_cap_is_enforced() {
        let big = Tree::Pow(
            Box::new(Tree::Add((0..10).map(s).collect())),
            12,
        );
        let limits = Limits {
            max_nodes: 10_000,
            max_depth: 64,
        };
        match canonicalize(&big, limits) {
            Err(ExprError::Resource(_)) => {}
            other => panic!("expected resource error, got {:?}", other.map(|e| e.num_terms())),
        }
    }

    #[test]
    fn depth_cap_is_enforced() {
        let mut t = s(0);
        for _ in 0..40 {
            t = Tree::Call(Func::Sin, Box::new(t));
        }
        let limits = Limits {
            max_nodes: 1000,
            max_depth: 16,
        };
        assert!(matches!(canonicalize(&t, limits), Err(ExprError::Resource(_))));
    }

    #[test]
    fn tree_round_trip() {
        let e = (Expr::symbol(Symbol::field(0, 1)) + Expr::frac(1, 3)).pow(3)
            * Expr::symbol(Symbol::field(1, 1)).recip()
            + Expr::cos(Expr::symbol(Symbol::Indep(0)));
        assert_eq!(canonicalize(&e.to_tree(), Limits::default()).unwrap(), e);
    }
}
