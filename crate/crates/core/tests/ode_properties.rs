mod common;

use anchorcheck::expr::{rat, Expr};
use anchorcheck::ode_anchor::{
    check_characteristic, deform, poisson_bracket, search_characteristics, x, Bivector, OdeSystem,
};
use anchorcheck::oracle::{numeric_oracle, DEFAULT_STEP};
use proptest::prelude::*;

fn xe(i: usize) -> Expr {
    Expr::symbol(x(i))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn bracket_is_antisymmetric_and_jacobi(s in any::<u64>()) {
        let alpha = Bivector::so3();
        let vars = [x(0), x(1), x(2)];
        let mut r = common::rng(s);
        let f = common::poly(&mut r, &vars, 3, 2);
        let g = common::poly(&mut r, &vars, 3, 2);
        let h = common::poly(&mut r, &vars, 3, 2);
        let b = |a: &Expr, c: &Expr| poisson_bracket(&alpha, a, c);
        prop_assert!((b(&f, &g) + b(&g, &f)).is_zero());
        let jac = b(&f, &b(&g, &h)) + b(&g, &b(&h, &f)) + b(&h, &b(&f, &g));
        prop_assert!(jac.is_zero());
    }

    #[test]
    fn conserved_quadratics_do_not_drift(a in 1i64..5, b in 1i64..5, c in -3i64..=3, seed in any::<u64>()) {
        // positive definite H keeps orbits bounded
        prop_assume!(c * c < 4 * a * b);
        let h = xe(0).pow(2).scale(&rat(a)) + xe(1).pow(2).scale(&rat(b)) + (xe(0) * xe(1)).scale(&rat(c));
        let sys = deform(&OdeSystem::free(2), &Bivector::canonical(2), &h).unwrap();
        prop_assert!(check_characteristic(&sys, &h).unwrap().holds);
        let r = numeric_oracle(&sys, &[h], 5.0, DEFAULT_STEP, seed);
        prop_assert!(!r.blowup);
        prop_assert!(r.max_drift[0] < 1e-4, "drift {}", r.max_drift[0]);
    }
}

#[test]
fn searched_characteristics_pass_both_oracles() {
    // the free rigid body
    let v = vec![
        (xe(1) * xe(2)).scale(&anchorcheck::expr::ratio(-1, 6)),
        (xe(0) * xe(2)).scale(&anchorcheck::expr::ratio(2, 3)),
        (xe(0) * xe(1)).scale(&anchorcheck::expr::ratio(-1, 2)),
    ];
    let sys = OdeSystem::new(v).unwrap();
    let found = search_characteristics(&sys, 2).unwrap();
    assert_eq!(found.basis.len(), 2);
    for f in &found.basis {
        assert!(check_characteristic(&sys, f).unwrap().holds);
    }
    let r = numeric_oracle(&sys, &found.basis, 20.0, DEFAULT_STEP, 3);
    assert!(r.max_drift.iter().all(|d| *d < 1e-6), "{:?}", r.max_drift);
}
