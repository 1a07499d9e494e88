//! Exact symbolic kernel over jet symbols.

pub mod calculus;
pub mod display;
pub mod eval;
pub mod parse;
pub mod poly;
pub mod symbol;
pub mod tree;

pub use calculus::{divergence_split, euler_derivative, total_derivative, total_derivative_multi};
pub use eval::{rand_eval, sample_value};
pub use parse::parse;
pub use poly::{rat, ratio, Atom, Expr, Func, Monomial, Rational};
pub use symbol::{JetSpace, MultiIndex, Symbol};
pub use tree::{canonicalize, Limits, Tree};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ExprError {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("domain error: {0}")]
    Domain(String),
    #[error("evaluation error: {0}")]
    Eval(String),
    #[error("unsupported input: {0}")]
    Unsupported(String),
}
