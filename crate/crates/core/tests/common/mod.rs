//! Seeded generators shared by the property and acceptance tests.
#![allow(dead_code)]

use anchorcheck::expr::{rat, ratio, Expr, MultiIndex, Symbol};
use anchorcheck::forms::{basis, Form, SpacetimeVector};
use anchorcheck::linop::LinDiffOp;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn small_rational(r: &mut ChaCha8Rng) -> Expr {
    let mut n = r.gen_range(-5i64..=5);
    if n == 0 {
        n = 1;
    }
    Expr::constant(ratio(n, r.gen_range(1i64..=3)))
}

/// Random polynomial with up to `terms` monomials of total degree <= `degree`
/// in `vars`.
pub fn poly(r: &mut ChaCha8Rng, vars: &[Symbol], terms: usize, degree: u32) -> Expr {
    let mut e = Expr::zero();
    for _ in 0..r.gen_range(1..=terms) {
        let mut m = small_rational(r);
        for _ in 0..r.gen_range(0..=degree) {
            if vars.is_empty() {
                break;
            }
            let s = vars[r.gen_range(0..vars.len())].clone();
            m = m * Expr::symbol(s);
        }
        e += m;
    }
    e
}

/// Jet symbols of order <= `order` for `fields` fields over `dim` variables.
pub fn jet_vars(fields: u16, dim: usize, order: u32) -> Vec<Symbol> {
    let mut out = Vec::new();
    for f in 0..fields {
        for k in 0..=order {
            for a in MultiIndex::all_of_order(dim, k) {
                out.push(Symbol::jet(f, a));
            }
        }
    }
    out
}

pub fn indep_vars(dim: usize) -> Vec<Symbol> {
    (0..dim as u16).map(Symbol::Indep).collect()
}

/// A density of jet order <= 2 in 1..=3 fields over one or two variables.
pub fn density(seed: u64) -> (Expr, usize) {
    let mut r = rng(seed);
    let dim = r.gen_range(1..=2);
    let fields = r.gen_range(1..=3);
    let mut vars = jet_vars(fields, dim, 2);
    vars.extend(indep_vars(dim));
    (poly(&mut r, &vars, 5, 3), dim)
}

/// A `rows x cols` operator of order <= 2 whose coefficients depend on the
/// variables and on field `extra`.
pub fn operator(seed: u64, dim: usize, extra: u16) -> LinDiffOp {
    let mut r = rng(seed);
    let rows = r.gen_range(1..=3);
    let cols = r.gen_range(1..=3);
    operator_shaped(seed ^ 0x5eed, rows, cols, dim, extra)
}

pub fn operator_shaped(seed: u64, rows: usize, cols: usize, dim: usize, extra: u16) -> LinDiffOp {
    let mut r = rng(seed);
    let mut coeff_vars = indep_vars(dim);
    coeff_vars.push(Symbol::field(extra, dim));
    coeff_vars.push(Symbol::jet(extra, MultiIndex::unit(dim, 0)));
    let mut op = LinDiffOp::zero(rows, cols, dim);
    for _ in 0..r.gen_range(1..=5) {
        let k = r.gen_range(0..=2);
        let alphas = MultiIndex::all_of_order(dim, k);
        let alpha = alphas[r.gen_range(0..alphas.len())].clone();
        let c = poly(&mut r, &coeff_vars, 2, 2);
        op.add_entry(r.gen_range(0..rows), r.gen_range(0..cols), alpha, c);
    }
    op
}

/// A grade-`grade` form whose components are polynomials in the
/// coordinates and in one field with its first jets.
pub fn form(r: &mut ChaCha8Rng, n: usize, grade: usize) -> Form {
    let mut vars = indep_vars(n);
    vars.extend(jet_vars(1, n, 1));
    let comps: Vec<Expr> = basis(n, grade)
        .iter()
        .map(|_| if r.gen_bool(0.3) { Expr::zero() } else { poly(r, &vars, 2, 2) })
        .collect();
    Form::from_vector(n, grade, &comps)
}

pub fn vector(r: &mut ChaCha8Rng, n: usize) -> SpacetimeVector {
    let vars = indep_vars(n);
    SpacetimeVector::new((0..n).map(|_| poly(r, &vars, 2, 2)).collect())
}

pub fn unit() -> Expr {
    Expr::constant(rat(1))
}
