use std::fmt;

use num_traits::{One, Signed};

use super::poly::{Atom, Expr, Monomial, Rational};
use super::symbol::JetSpace;

/// Expression paired with the names needed to print it. The output parses
/// back to the same canonical expression.
pub struct Shown<'a> {
    expr: &'a Expr,
    space: &'a JetSpace,
}

impl Expr {
    pub fn show<'a>(&'a self, space: &'a JetSpace) -> Shown<'a> {
        Shown { expr: self, space }
    }

    pub fn to_text(&self, space: &JetSpace) -> String {
        self.show(space).to_string()
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, c: &Rational) -> fmt::Result {
    if c.is_integer() {
        write!(f, "{}", c.numer())
    } else {
        write!(f, "{}/{}", c.numer(), c.denom())
    }
}

fn write_monomial(f: &mut fmt::Formatter<'_>, m: &Monomial, space: &JetSpace) -> fmt::Result {
    for (i, (a, e)) in m.factors().iter().enumerate() {
        if i > 0 {
            f.write_str("*")?;
        }
        match a {
            Atom::Sym(s) => f.write_str(&space.symbol_name(s))?,
            Atom::Func(k, arg) => write!(f, "{}({})", k.name(), arg.show(space))?,
            Atom::Recip(p) => write!(f, "({})^-1", p.show(space))?,
        }
        if *e != 1 {
            write!(f, "^{}", e)?;
        }
    }
    Ok(())
}

impl fmt::Display for Shown<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.expr.is_zero() {
            return f.write_str("0");
        }
        // highest term first
        for (i, (m, c)) in self.expr.terms().rev().enumerate() {
            let neg = c.is_negative();
            if i == 0 {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            let a = c.abs();
            if m.is_one() {
                write_rational(f, &a)?;
            } else {
                if !a.is_one() {
                    write_rational(f, &a)?;
                    f.write_str("*")?;
                }
                write_monomial(f, m, self.space)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use crate::expr::parse::parse;
    use crate::expr::symbol::JetSpace;

    #[test]
    fn printed_text_parses_back() {
        let js = JetSpace::ode(2);
        for src in [
            "x1^2/2 - x2",
            "-1/3*t*x1_t + sin(x1 - t)^2",
            "1/(x1^2 + 1) + exp(-x2)/x1",
            "log(2 + t)*(x1 + x2)^3 - a*b",
            "0",
            "-7",
        ] {
            let e = parse(src, &js).unwrap();
            let text = e.to_text(&js);
            assert_eq!(parse(&text, &js).unwrap(), e, "{} -> {}", src, text);
        }
    }

    #[test]
    fn leading_term_printed_first() {
        let js = JetSpace::ode(2);
        let e = parse("1 + x1 + x1^2/2", &js).unwrap();
        assert_eq!(e.to_text(&js), "1/2*x1^2 + x1 + 1");
    }
}
