mod common;

use anchorcheck::expr::calculus::fields_of;
use anchorcheck::expr::eval::{is_zero, rand_eval};
use anchorcheck::expr::{divergence_split, euler_derivative, parse, total_derivative, Expr, JetSpace, MultiIndex, Symbol};
use proptest::prelude::*;

fn space(dim: usize) -> JetSpace {
    if dim == 1 {
        JetSpace::ode(3)
    } else {
        JetSpace::new(vec!["x0".into(), "x1".into()], vec!["u".into(), "v".into(), "w".into()])
    }
}

fn euler_all(e: &Expr, fields: u16) -> Vec<Expr> {
    (0..fields).map(|f| euler_derivative(e, f)).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn printing_then_parsing_is_identity(seed in any::<u64>()) {
        let (e, dim) = common::density(seed);
        let js = space(dim);
        let back = parse(&e.to_text(&js), &js).unwrap();
        prop_assert_eq!(&back, &e);
        prop_assert_eq!(back.to_text(&js), e.to_text(&js));
    }

    #[test]
    fn euler_kills_total_derivatives(seed in any::<u64>()) {
        let (e, dim) = common::density(seed);
        for mu in 0..dim {
            for r in euler_all(&total_derivative(&e, mu), 3) {
                prop_assert!(r.is_zero());
            }
        }
    }

    #[test]
    fn euler_is_linear(a in any::<u64>(), b in any::<u64>(), k in -4i64..=4) {
        let (ea, _) = common::density(a);
        let (eb, _) = common::density(b.wrapping_mul(3));
        // mixing dimensions is fine: symbols of different arity are distinct
        let combo = &ea + &eb.scale(&anchorcheck::expr::rat(k));
        for f in 0..3u16 {
            let lhs = euler_derivative(&combo, f);
            let rhs = euler_derivative(&ea, f) + euler_derivative(&eb, f).scale(&anchorcheck::expr::rat(k));
            prop_assert!((lhs - rhs).is_zero());
        }
    }

    #[test]
    fn divergence_split_inverts_total_derivative(seed in any::<u64>()) {
        let mut r = common::rng(seed);
        let mut vars = common::jet_vars(2, 1, 2);
        vars.push(Symbol::Indep(0));
        let j = common::poly(&mut r, &vars, 4, 3);
        let d = total_derivative(&j, 0);
        let back = divergence_split(&d).unwrap().expect("a total derivative splits");
        // the antiderivative is fixed up to a constant
        let diff = &back - &j;
        prop_assert!(total_derivative(&diff, 0).is_zero());
        prop_assert!(diff.symbols().is_empty());
    }

    #[test]
    fn non_divergences_are_rejected(seed in any::<u64>()) {
        // u * u_tt is not a total derivative: E(u u_tt) = 2 u_tt
        let mut r = common::rng(seed);
        let vars = vec![Symbol::Indep(0)];
        let c = common::poly(&mut r, &vars, 1, 0);
        let u = Expr::symbol(Symbol::field(0, 1));
        let utt = Expr::symbol(Symbol::jet(0, MultiIndex::from_counts(vec![2])));
        let d = c * u * utt;
        prop_assert_eq!(divergence_split(&d).unwrap(), None);
    }

    #[test]
    fn zero_oracle_agrees_with_evaluation(seed in any::<u64>()) {
        let (e, _) = common::density(seed);
        // polynomials: canonical zero iff the value vanishes at random points
        let values: Vec<_> = (0..3).map(|s| rand_eval(&e, s).unwrap()).collect();
        let all_zero = values.iter().all(num_traits::Zero::is_zero);
        prop_assert_eq!(is_zero(&e).unwrap(), all_zero);
        prop_assert!(is_zero(&(&e - &e)).unwrap());
    }

    #[test]
    fn transcendental_identities_are_zero(seed in any::<u64>()) {
        let (e, _) = common::density(seed);
        let s = Expr::sin(e.clone());
        let c = Expr::cos(e.clone());
        let id = s.pow(2) + c.pow(2) - Expr::one();
        prop_assert!(is_zero(&id).unwrap());
        prop_assert!(!is_zero(&(s.pow(2) - c.pow(2))).unwrap() || e.is_zero());
    }
}

#[test]
fn fields_are_reported() {
    let js = space(1);
    let e = parse("x1*x3_tt + t", &js).unwrap();
    assert_eq!(fields_of(&e).into_iter().collect::<Vec<_>>(), vec![0, 2]);
}
