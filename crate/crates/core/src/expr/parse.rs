//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! sum     := product (('+' | '-') product)*
//! product := unary (('*' | '/') unary)*
//! unary   := '-' unary | '+' unary | power
//! power   := atom ('^' exponent)?          (right associative)
//! atom    := number | ident | func '(' sum ')' | '(' sum ')'
//! ```

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::poly::{Expr, Func};
use super::symbol::JetSpace;
use super::tree::{canonicalize, Limits, Tree};
use super::ExprError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(src: &str, line0: usize, col0: usize) -> Result<Vec<Token>, ExprError> {
    let mut out = Vec::new();
    let chars: Vec<char> = src.chars().collect();
    let (mut line, mut col) = (line0, col0);
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let (tl, tc) = (line, col);
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && chars[i].is_ascii_digit() {
                i += 1;
            }
            let int_part: String = chars[start..i].iter().collect();
            let mut value = BigRational::from_integer(
                if int_part.is_empty() { BigInt::zero() } else { int_part.parse().unwrap() },
            );
            if i < chars.len() && chars[i] == '.' {
                i += 1;
                let fs = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let frac: String = chars[fs..i].iter().collect();
                if !frac.is_empty() {
                    let num: BigInt = frac.parse().unwrap();
                    let den = num_traits::pow(BigInt::from(10), frac.len());
                    value += BigRational::new(num, den);
                }
            }
            col += i - start;
            out.push(Token { tok: Tok::Num(value), line: tl, col: tc });
            continue;
        }
        if c.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            col += i - start;
            out.push(Token {
                tok: Tok::Ident(chars[start..i].iter().collect()),
                line: tl,
                col: tc,
            });
            continue;
        }
        let tok = match c {
            '+' | '-' | '*' | '/' | '^' => Tok::Op(c),
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            _ => {
                return Err(ExprError::Parse {
                    line: tl,
                    col: tc,
                    msg: format!("unexpected character `{}`", c),
                })
            }
        };
        out.push(Token { tok, line: tl, col: tc });
        i += 1;
        col += 1;
    }
    out.push(Token { tok: Tok::End, line, col });
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<Token>,
    pos: usize,
    space: &'a JetSpace,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err_at(&self, t: &Token, msg: impl Into<String>) -> ExprError {
        ExprError::Parse {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        }
    }

    fn describe(t: &Tok) -> String {
        match t {
            Tok::Num(n) => format!("number `{}`", n),
            Tok::Ident(s) => format!("identifier `{}`", s),
            Tok::Op(c) => format!("`{}`", c),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::End => "end of input".into(),
        }
    }

    fn sum(&mut self) -> Result<Tree, ExprError> {
        let mut terms = vec![self.product()?];
        loop {
            match self.peek().tok {
                Tok::Op('+') => {
                    self.bump();
                    terms.push(self.product()?);
                }
                Tok::Op('-') => {
                    self.bump();
                    let t = self.product()?;
                    terms.push(Tree::Mul(vec![Tree::num(-1), t]));
                }
                _ => break,
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { Tree::Add(terms) })
    }

    fn product(&mut self) -> Result<Tree, ExprError> {
        let mut factors = vec![self.unary()?];
        loop {
            match self.peek().tok {
                Tok::Op('*') => {
                    self.bump();
                    factors.push(self.unary()?);
                }
                Tok::Op('/') => {
                    self.bump();
                    let d = self.unary()?;
                    factors.push(Tree::Pow(Box::new(d), -1));
                }
                _ => break,
            }
        }
        Ok(if factors.len() == 1 { factors.pop().unwrap() } else { Tree::Mul(factors) })
    }

    fn unary(&mut self) -> Result<Tree, ExprError> {
        match self.peek().tok {
            Tok::Op('-') => {
                self.bump();
                let inner = self.unary()?;
                Ok(match inner {
                    Tree::Num(n) => Tree::Num(-n),
                    other => Tree::Mul(vec![Tree::num(-1), other]),
                })
            }
            Tok::Op('+') => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Tree, ExprError> {
        let base = self.atom()?;
        if self.peek().tok == Tok::Op('^') {
            self.bump();
            let at = self.peek().clone();
            // exponent binds tighter than the operators around it but may be
            // signed and may itself be a power: 2^-1, x^2^2
            let exp_tree = self.unary()?;
            let e = canonicalize(&exp_tree, Limits::default())
                .map_err(|_| self.err_at(&at, "exponent must be an integer constant"))?;
            let k = e
                .as_integer()
                .ok_or_else(|| self.err_at(&at, "exponent must be an integer constant"))?;
            return Ok(Tree::Pow(Box::new(base), k));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Tree, ExprError> {
        let t = self.bump();
        match t.tok.clone() {
            Tok::Num(n) => Ok(Tree::Num(n)),
            Tok::LParen => {
                let inner = self.sum()?;
                let close = self.bump();
                if close.tok != Tok::RParen {
                    return Err(self.err_at(
                        &close,
                        format!("expected `)`, found {}", Self::describe(&close.tok)),
                    ));
                }
                Ok(inner)
            }
            Tok::Ident(name) => {
                if let Some(f) = Func::from_name(&name) {
                    if self.peek().tok == Tok::LParen {
                        self.bump();
                        let arg = self.sum()?;
                        let close = self.bump();
                        if close.tok != Tok::RParen {
                            return Err(self.err_at(
                                &close,
                                format!("expected `)` after argument of {}, found {}", name, Self::describe(&close.tok)),
                            ));
                        }
                        return Ok(Tree::Call(f, Box::new(arg)));
                    }
                    return Err(self.err_at(&t, format!("`{}` must be called with parentheses", name)));
                }
                let sym = self.space.resolve(&name).map_err(|m| self.err_at(&t, m))?;
                Ok(Tree::Sym(sym))
            }
            other => Err(self.err_at(&t, format!("expected an expression, found {}", Self::describe(&other)))),
        }
    }
}

/// Parse `src` into a tree. `line`/`col` give the position of the first
/// character, for diagnostics when the text is embedded in a larger file.
pub fn parse_tree_at(src: &str, space: &JetSpace, line: usize, col: usize) -> Result<Tree, ExprError> {
    let toks = lex(src, line, col)?;
    let mut p = Parser { toks, pos: 0, space };
    if p.peek().tok == Tok::End {
        let t = p.peek().clone();
        return Err(p.err_at(&t, "empty expression"));
    }
    let tree = p.sum()?;
    let t = p.peek().clone();
    if t.tok != Tok::End {
        return Err(p.err_at(&t, format!("unexpected {}", Parser::describe(&t.tok))));
    }
    Ok(tree)
}

pub fn parse_tree(src: &str, space: &JetSpace) -> Result<Tree, ExprError> {
    parse_tree_at(src, space, 1, 1)
}

/// Parse and canonicalize with the given limits.
pub fn parse_with(src: &str, space: &JetSpace, limits: Limits, line: usize, col: usize) -> Result<Expr, ExprError> {
    let tree = parse_tree_at(src, space, line, col)?;
    canonicalize(&tree, limits).map_err(|e| match e {
        ExprError::DivisionByZero => ExprError::Parse {
            line,
            col,
            msg: "division by zero".into(),
        },
        other => other,
    })
}

pub fn parse(src: &str, space: &JetSpace) -> Result<Expr, ExprError> {
    parse_with(src, space, Limits::default(), 1, 1)
}
