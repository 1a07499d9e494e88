use num_traits::{One, Zero};

use crate::expr::{Expr, Rational};

use super::ModelError;

/// Finite-dimensional Lie algebra by structure constants
/// `[t^a, t^b] = f^{ab}_c t^c` and an invariant metric `kappa`.
#[derive(Clone, Debug, PartialEq)]
pub struct LieAlgebra {
    name: String,
    /// `f[a][b][c] = f^{ab}_c`.
    f: Vec<Vec<Vec<Rational>>>,
    kappa: Vec<Vec<Rational>>,
}

impl LieAlgebra {
    /// Validates antisymmetry, the Jacobi identity and that `kappa` is
    /// symmetric and invertible.
    pub fn new(name: &str, f: Vec<Vec<Vec<Rational>>>, kappa: Vec<Vec<Rational>>) -> Result<Self, ModelError> {
        let n = f.len();
        let shape_ok = f.iter().all(|r| r.len() == n && r.iter().all(|c| c.len() == n))
            && kappa.len() == n
            && kappa.iter().all(|r| r.len() == n);
        if !shape_ok {
            return Err(ModelError::Algebra("structure constants must be N x N x N, kappa N x N".into()));
        }
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if f[a][b][c] != -f[b][a][c].clone() {
                        return Err(ModelError::Algebra(format!("f^{{{}{}}}_{} is not antisymmetric", a, b, c)));
                    }
                }
                if kappa[a][b] != kappa[b][a] {
                    return Err(ModelError::Algebra("kappa is not symmetric".into()));
                }
            }
        }
        if let Some((a, b, c, e)) = jacobi_violation(&f) {
            return Err(ModelError::Algebra(format!("Jacobi fails at ({}, {}, {}) component {}", a, b, c, e)));
        }
        if rank(kappa.clone()) < n {
            return Err(ModelError::Algebra("kappa is singular".into()));
        }
        Ok(LieAlgebra { name: name.to_string(), f, kappa })
    }

    /// `su(2)`: `f^{ab}_c = ε_{abc}`, `kappa = δ`.
    pub fn su2() -> Self {
        let mut f = vec![vec![vec![Rational::zero(); 3]; 3]; 3];
        for (a, b, c) in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] {
            f[a][b][c] = Rational::one();
            f[b][a][c] = -Rational::one();
        }
        Self::new("su2", f, identity(3)).expect("su(2) is a Lie algebra")
    }

    pub fn abelian(n: usize) -> Self {
        Self::new(
            &format!("abelian{}", n),
            vec![vec![vec![Rational::zero(); n]; n]; n],
            identity(n),
        )
        .expect("abelian algebra")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.f.len()
    }

    pub fn f(&self, a: usize, b: usize, c: usize) -> &Rational {
        &self.f[a][b][c]
    }

    pub fn kappa(&self, a: usize, b: usize) -> &Rational {
        &self.kappa[a][b]
    }

    pub fn is_abelian(&self) -> bool {
        self.f.iter().flatten().flatten().all(Zero::is_zero)
    }

    /// Jacobi for the rescaled bracket `[e_a, e_b] = scale · f^{ab}_c e_c`,
    /// checked as an identity in any parameters of `scale`. Returns the
    /// nonvanishing cyclic sums.
    pub fn jacobi_residuals(&self, scale: &Expr) -> Vec<Expr> {
        let n = self.dim();
        let c = |a: usize, b: usize, d: usize| scale.scale(&self.f[a][b][d]);
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                for cc in 0..n {
                    for e in 0..n {
                        let mut s = Expr::zero();
                        for d in 0..n {
                            s += c(a, b, d) * c(d, cc, e) + c(b, cc, d) * c(d, a, e) + c(cc, a, d) * c(d, b, e);
                        }
                        if !s.is_zero() {
                            out.push(s);
                        }
                    }
                }
            }
        }
        out
    }
}

fn identity(n: usize) -> Vec<Vec<Rational>> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }).collect())
        .collect()
}

fn jacobi_violation(f: &[Vec<Vec<Rational>>]) -> Option<(usize, usize, usize, usize)> {
    let n = f.len();
    for a in 0..n {
        for b in 0..n {
            for c in 0..n {
                for e in 0..n {
                    let mut s = Rational::zero();
                    for d in 0..n {
                        s += &f[a][b][d] * &f[d][c][e] + &f[b][c][d] * &f[d][a][e] + &f[c][a][d] * &f[d][b][e];
                    }
                    if !s.is_zero() {
                        return Some((a, b, c, e));
                    }
                }
            }
        }
    }
    None
}

fn rank(mut rows: Vec<Vec<Rational>>) -> usize {
    let cols = rows.first().map_or(0, Vec::len);
    let mut r = 0;
    for c in 0..cols {
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        for i in r + 1..rows.len() {
            let k = &rows[i][c] / &rows[r][c];
            for j in c..cols {
                let d = &k * &rows[r][j];
                rows[i][j] -= d;
            }
        }
        r += 1;
    }
    r
}
