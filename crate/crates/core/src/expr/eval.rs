//! Point evaluation: exact rational arithmetic for the polynomial part,
//! 256-bit floating point for function kernels, and the seeded
//! randomized zero test built on top of it.

use std::collections::HashMap;

use astro_float::{BigFloat, Consts, Radix, RoundingMode, Sign};
use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::poly::{rat, Atom, Expr, Func, Rational};
use super::symbol::Symbol;
use super::ExprError;

/// Working precision of function kernels, in bits.
pub const PRECISION_BITS: usize = 256;
/// Number of seeds used by the randomized zero test.
pub const ORACLE_SEEDS: u64 = 32;
/// Sample box: numerators in `[-SAMPLE_BOUND, SAMPLE_BOUND]`, denominators in `[1, SAMPLE_BOUND]`.
pub const SAMPLE_BOUND: i64 = 1000;
/// Relative mismatch threshold of the randomized zero test.
pub const ZERO_THRESHOLD_EXP10: i32 = -40;
const MAX_RESAMPLES: u64 = 8;
const EXP_ARG_LIMIT: f64 = 1e4;

#[derive(Debug)]
enum Fail {
    Domain(String),
    Unbound(Symbol),
}

fn to_bigfloat(q: &Rational, cc: &mut Consts) -> BigFloat {
    let p = PRECISION_BITS + 64;
    let n = BigFloat::parse(&q.numer().to_string(), Radix::Dec, p, RoundingMode::ToEven, cc);
    let d = BigFloat::parse(&q.denom().to_string(), Radix::Dec, p, RoundingMode::ToEven, cc);
    n.div(&d, p, RoundingMode::ToEven)
}

/// Exact dyadic rational equal to the given finite float.
fn from_bigfloat(x: &BigFloat) -> Option<Rational> {
    if x.is_zero() {
        return Some(rat(0));
    }
    let (words, _, sign, e, _) = x.as_raw_parts()?;
    let mut bytes = Vec::with_capacity(words.len() * 8);
    for w in words {
        bytes.extend_from_slice(&(*w).to_le_bytes());
    }
    let mant = BigInt::from(BigUint::from_bytes_le(&bytes));
    let shift = e as i64 - 64 * words.len() as i64;
    let two = BigInt::from(2);
    let mut v = if shift >= 0 {
        BigRational::from_integer(mant * num_traits::pow(two, shift as usize))
    } else {
        BigRational::new(mant, num_traits::pow(two, (-shift) as usize))
    };
    if sign == Sign::Neg {
        v = -v;
    }
    Some(v)
}

fn apply_func(f: Func, x: &Rational, cc: &mut Consts) -> Result<Rational, Fail> {
    let p = PRECISION_BITS;
    let rm = RoundingMode::ToEven;
    match f {
        Func::Log if !x.is_positive() => return Err(Fail::Domain(format!("log of non-positive value {}", x))),
        Func::Exp if x.to_f64().is_none_or(|v| v > EXP_ARG_LIMIT) => {
            return Err(Fail::Domain("exp argument too large".into()))
        }
        _ => {}
    }
    if x.is_zero() {
        return Ok(match f {
            Func::Sin => rat(0),
            Func::Cos | Func::Exp => rat(1),
            Func::Log => unreachable!(),
        });
    }
    let b = to_bigfloat(x, cc);
    let y = match f {
        Func::Sin => b.sin(p, rm, cc),
        Func::Cos => b.cos(p, rm, cc),
        Func::Exp => b.exp(p, rm, cc),
        Func::Log => b.ln(p, rm, cc),
    };
    from_bigfloat(&y).ok_or_else(|| Fail::Domain(format!("{} evaluation failed", f.name())))
}

/// Evaluates expressions under a fixed symbol valuation, caching atoms.
struct Evaluator<'a> {
    value: &'a dyn Fn(&Symbol) -> Option<Rational>,
    cache: HashMap<Atom, Rational>,
    cc: Consts,
}

impl<'a> Evaluator<'a> {
    fn new(value: &'a dyn Fn(&Symbol) -> Option<Rational>) -> Self {
        Evaluator {
            value,
            cache: HashMap::new(),
            cc: Consts::new().expect("astro-float constants cache"),
        }
    }

    fn atom(&mut self, a: &Atom) -> Result<Rational, Fail> {
        if let Atom::Sym(s) = a {
            return (self.value)(s).ok_or_else(|| Fail::Unbound(s.clone()));
        }
        if let Some(v) = self.cache.get(a) {
            return Ok(v.clone());
        }
        let v = match a {
            Atom::Sym(_) => unreachable!(),
            Atom::Func(f, arg) => {
                let x = self.expr(arg)?.0;
                apply_func(*f, &x, &mut self.cc)?
            }
            Atom::Recip(p) => {
                let x = self.expr(p)?.0;
                if x.is_zero() {
                    return Err(Fail::Domain("reciprocal of zero".into()));
                }
                x.recip()
            }
        };
        self.cache.insert(a.clone(), v.clone());
        Ok(v)
    }

    /// Value and the sum of absolute term values.
    fn expr(&mut self, e: &Expr) -> Result<(Rational, Rational), Fail> {
        let mut total = rat(0);
        let mut mass = rat(0);
        for (m, c) in e.terms() {
            let mut t = c.clone();
            for (a, k) in m.factors() {
                let v = self.atom(a)?;
                if v.is_zero() && *k < 0 {
                    return Err(Fail::Domain("negative power of zero".into()));
                }
                t *= v.pow(*k);
            }
            mass += t.abs();
            total += t;
        }
        Ok((total, mass))
    }
}

/// Evaluate at a point given as exact values per symbol. Every symbol must
/// be bound; function kernels are evaluated at 256-bit precision.
pub fn eval_at(e: &Expr, value: &dyn Fn(&Symbol) -> Option<Rational>) -> Result<Rational, ExprError> {
    let mut ev = Evaluator::new(value);
    ev.expr(e).map(|(v, _)| v).map_err(|f| match f {
        Fail::Domain(m) => ExprError::Domain(m),
        Fail::Unbound(s) => ExprError::Eval(format!("no value for symbol {:?}", s)),
    })
}

/// Double-precision evaluation, used by the numeric trajectory oracle.
pub fn eval_f64(e: &Expr, value: &dyn Fn(&Symbol) -> f64) -> f64 {
    fn atom(a: &Atom, value: &dyn Fn(&Symbol) -> f64) -> f64 {
        match a {
            Atom::Sym(s) => value(s),
            Atom::Func(f, arg) => {
                let x = eval_f64(arg, value);
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Exp => x.exp(),
                    Func::Log => x.ln(),
                }
            }
            Atom::Recip(p) => 1.0 / eval_f64(p, value),
        }
    }
    e.terms()
        .map(|(m, c)| {
            let mut t = c.to_f64().unwrap_or(f64::NAN);
            for (a, k) in m.factors() {
                t *= atom(a, value).powi(*k);
            }
            t
        })
        .sum()
}

/// Expression lowered to plain `f64` data for repeated fast evaluation.
/// Symbols are looked up by slot in the value slice passed to [`F64Program::eval`].
#[derive(Clone, Debug)]
pub struct F64Program {
    terms: Vec<(f64, Vec<(F64Atom, i32)>)>,
}

#[derive(Clone, Debug)]
enum F64Atom {
    Slot(usize),
    Func(Func, Box<F64Program>),
    Recip(Box<F64Program>),
}

impl F64Program {
    /// `slot` maps each symbol to its index in the value slice.
    pub fn compile(e: &Expr, slot: &dyn Fn(&Symbol) -> Option<usize>) -> Result<Self, ExprError> {
        let mut terms = Vec::new();
        for (m, c) in e.terms() {
            let mut fs = Vec::new();
            for (a, k) in m.factors() {
                let atom = match a {
                    Atom::Sym(s) => F64Atom::Slot(
                        slot(s).ok_or_else(|| ExprError::Eval(format!("no slot for symbol {:?}", s)))?,
                    ),
                    Atom::Func(f, arg) => F64Atom::Func(*f, Box::new(F64Program::compile(arg, slot)?)),
                    Atom::Recip(p) => F64Atom::Recip(Box::new(F64Program::compile(p, slot)?)),
                };
                fs.push((atom, *k));
            }
            terms.push((c.to_f64().unwrap_or(f64::NAN), fs));
        }
        Ok(F64Program { terms })
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (c, fs) in &self.terms {
            let mut t = *c;
            for (a, k) in fs {
                let v = match a {
                    F64Atom::Slot(i) => values[*i],
                    F64Atom::Func(f, arg) => {
                        let x = arg.eval(values);
                        match f {
                            Func::Sin => x.sin(),
                            Func::Cos => x.cos(),
                            Func::Exp => x.exp(),
                            Func::Log => x.ln(),
                        }
                    }
                    F64Atom::Recip(p) => 1.0 / p.eval(values),
                };
                t *= if *k == 1 { v } else { v.powi(*k) };
            }
            acc += t;
        }
        acc
    }
}

fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    for b in bytes {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// Deterministic sample for `sym` under `seed`; independent of the other
/// symbols present, so sub-expressions see consistent values.
pub fn sample_value(sym: &Symbol, seed: u64) -> Rational {
    let mut key = seed.to_le_bytes().to_vec();
    key.extend_from_slice(sym.stable_key().as_bytes());
    let mut rng = ChaCha8Rng::seed_from_u64(fnv1a(&key));
    let n: i64 = rng.gen_range(-SAMPLE_BOUND..=SAMPLE_BOUND);
    let d: i64 = rng.gen_range(1..=SAMPLE_BOUND);
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

fn attempt_seed(seed: u64, attempt: u64) -> u64 {
    if attempt == 0 {
        seed
    } else {
        fnv1a(&[seed.to_le_bytes(), attempt.to_le_bytes()].concat())
    }
}

fn rand_eval_full(e: &Expr, seed: u64) -> Result<(Rational, Rational), ExprError> {
    let mut last = String::new();
    for attempt in 0..MAX_RESAMPLES {
        let s = attempt_seed(seed, attempt);
        let value = move |sym: &Symbol| Some(sample_value(sym, s));
        let mut ev = Evaluator::new(&value);
        match ev.expr(e) {
            Ok(v) => return Ok(v),
            Err(Fail::Domain(m)) => last = m,
            Err(Fail::Unbound(_)) => unreachable!("every symbol is sampled"),
        }
    }
    Err(ExprError::Eval(format!(
        "domain violation persisted after {} resamples: {}",
        MAX_RESAMPLES, last
    )))
}

/// Value of `e` at the random point selected by `seed`.
pub fn rand_eval(e: &Expr, seed: u64) -> Result<Rational, ExprError> {
    rand_eval_full(e, seed).map(|(v, _)| v)
}

fn negligible(v: &Rational, mass: &Rational) -> bool {
    if v.is_zero() {
        return true;
    }
    let scale = if mass > &rat(1) { mass.clone() } else { rat(1) };
    let tol = BigRational::new(BigInt::one(), num_traits::pow(BigInt::from(10), (-ZERO_THRESHOLD_EXP10) as usize));
    v.abs() <= tol * scale
}

/// Zero test. Exact on the polynomial class; for expressions with function
/// or reciprocal atoms a nonzero canonical form is passed to the
/// randomized oracle, which declares zero if all seeds agree.
pub fn is_zero(e: &Expr) -> Result<bool, ExprError> {
    if e.is_zero() {
        return Ok(true);
    }
    if !e.has_opaque_atoms() {
        return Ok(false);
    }
    for seed in 0..ORACLE_SEEDS {
        let (v, mass) = rand_eval_full(e, seed)?;
        if !negligible(&v, &mass) {
            return Ok(false);
        }
    }
    Ok(true)
}

pub fn equal(a: &Expr, b: &Expr) -> Result<bool, ExprError> {
    is_zero(&(a - b))
}
