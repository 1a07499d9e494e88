//! Numeric trajectory oracle: classical RK4 on `ẋ = −v(t, x)` and the drift
//! of candidate conserved quantities along the trajectory.

use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::expr::eval::F64Program;
use crate::expr::{Expr, Symbol};
use crate::ode_anchor::OdeSystem;

pub const DEFAULT_STEP: f64 = 1e-3;
pub const DEFAULT_T_END: f64 = 100.0;
pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_POINTS: usize = 3;
pub const BLOWUP_NORM: f64 = 1e12;

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct Trajectory {
    pub initial: Vec<f64>,
    /// Max `|f(t, x(t)) − f(0, x(0))|` per quantity.
    pub drift: Vec<f64>,
    /// Time at which the state norm exceeded the blow-up bound, if it did.
    pub blowup_at: Option<f64>,
}

/// Slot layout: `x1..xn`, then `t`, then a NaN slot for anything else
/// (unbound parameters show up as NaN drift).
fn slot(n: usize) -> impl Fn(&Symbol) -> Option<usize> {
    move |s| match s {
        Symbol::Indep(0) => Some(n),
        Symbol::Jet { field, index } if index.is_zero() && (*field as usize) < n => Some(*field as usize),
        _ => Some(n + 1),
    }
}

fn compile(e: &Expr, n: usize) -> F64Program {
    F64Program::compile(e, &slot(n)).expect("every symbol has a slot")
}

fn rhs(v: &[F64Program], state: &[f64], out: &mut [f64]) {
    for (o, p) in out.iter_mut().zip(v) {
        *o = -p.eval(state);
    }
}

/// Integrate from `x0` and track the drift of each quantity in `fs`.
pub fn integrate(sys: &OdeSystem, fs: &[Expr], x0: &[f64], step: f64, t_end: f64) -> Trajectory {
    let n = sys.n();
    let v: Vec<F64Program> = sys.v().iter().map(|e| compile(e, n)).collect();
    let progs: Vec<F64Program> = fs.iter().map(|e| compile(e, n)).collect();
    // state = (x, t)
    let mut x: Vec<f64> = x0.to_vec();
    x.push(0.0);
    x.push(f64::NAN);
    let f0: Vec<f64> = progs.iter().map(|p| p.eval(&x)).collect();
    let mut drift = vec![0.0f64; fs.len()];
    let steps = (t_end / step).round() as u64;
    let mut blowup_at = None;
    let h = step;
    let (mut k1, mut k2, mut k3, mut k4) = (vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut tmp = x.clone();
    for k in 0..steps {
        let t = x[n];
        rhs(&v, &x, &mut k1);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k1[i];
        }
        tmp[n] = t + 0.5 * h;
        rhs(&v, &tmp, &mut k2);
        for i in 0..n {
            tmp[i] = x[i] + 0.5 * h * k2[i];
        }
        rhs(&v, &tmp, &mut k3);
        for i in 0..n {
            tmp[i] = x[i] + h * k3[i];
        }
        tmp[n] = t + h;
        rhs(&v, &tmp, &mut k4);
        for i in 0..n {
            x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        x[n] = (k + 1) as f64 * h;
        let norm = x[..n].iter().map(|c| c * c).sum::<f64>().sqrt();
        if !norm.is_finite() || norm > BLOWUP_NORM {
            blowup_at = Some(x[n]);
            break;
        }
        for (j, p) in progs.iter().enumerate() {
            let d = (p.eval(&x) - f0[j]).abs();
            if d > drift[j] || d.is_nan() {
                drift[j] = d;
            }
        }
    }
    Trajectory {
        initial: x0.to_vec(),
        drift,
        blowup_at,
    }
}

/// Seeded initial points with rational coordinates in `[-1, 1]`.
pub fn initial_points(n: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            (0..n)
                .map(|_| {
                    let num: i64 = rng.gen_range(-1000..=1000);
                    num_rational::Ratio::new(num, 1000).to_f64().unwrap()
                })
                .collect()
        })
        .collect()
}

#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct OracleReport {
    pub seed: u64,
    pub step: f64,
    pub t_end: f64,
    pub trajectories: Vec<Trajectory>,
    /// Max drift per quantity over all trajectories.
    pub max_drift: Vec<f64>,
    pub blowup: bool,
}

pub fn numeric_oracle(sys: &OdeSystem, fs: &[Expr], t_end: f64, step: f64, seed: u64) -> OracleReport {
    let trajectories: Vec<Trajectory> = initial_points(sys.n(), DEFAULT_POINTS, seed)
        .iter()
        .map(|x0| integrate(sys, fs, x0, step, t_end))
        .collect();
    let mut max_drift = vec![0.0f64; fs.len()];
    for tr in &trajectories {
        for (m, d) in max_drift.iter_mut().zip(&tr.drift) {
            if *d > *m || d.is_nan() {
                *m = *d;
            }
        }
    }
    let blowup = trajectories.iter().any(|t| t.blowup_at.is_some());
    OracleReport {
        seed,
        step,
        t_end,
        trajectories,
        max_drift,
        blowup,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{parse, JetSpace};

    fn sys(v: &[&str]) -> OdeSystem {
        let js = JetSpace::ode(v.len());
        OdeSystem::new(v.iter().map(|s| parse(s, &js).unwrap()).collect()).unwrap()
    }

    #[test]
    fn zero_field_has_no_drift() {
        let s = sys(&["0", "0"]);
        let f = parse("x1^3 - x2", &JetSpace::ode(2)).unwrap();
        let r = numeric_oracle(&s, &[f], 1.0, 1e-2, 5);
        assert_eq!(r.max_drift, vec![0.0]);
    }

    #[test]
    fn blowup_is_flagged() {
        let s = sys(&["-x1^2"]);
        let f = parse("x1", &JetSpace::ode(1)).unwrap();
        let tr = integrate(&s, &[f], &[1.0], 1e-3, 5.0);
        assert!(tr.blowup_at.is_some());
    }

    #[test]
    fn oracle_is_deterministic() {
        let s = sys(&["-x2", "x1"]);
        let f = parse("x1", &JetSpace::ode(2)).unwrap();
        let a = numeric_oracle(&s, &[f.clone()], 2.0, 1e-2, 9);
        let b = numeric_oracle(&s, &[f], 2.0, 1e-2, 9);
        assert_eq!(a, b);
    }
}
