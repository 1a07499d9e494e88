mod common;

use anchorcheck::expr::eval::is_zero;
use anchorcheck::expr::{total_derivative, Expr};
use anchorcheck::forms::{
    exterior_d, hodge, interior, lie_derivative, selfdual_project, wedge, FlatSpace, Form,
};
use proptest::prelude::*;

fn vanishes(f: &Form) -> bool {
    f.components().all(|(_, e)| is_zero(e).unwrap())
}

fn same(a: &Form, b: &Form) -> bool {
    vanishes(&(a - b))
}

fn sign(k: usize) -> i64 {
    if k % 2 == 0 {
        1
    } else {
        -1
    }
}

fn check_grade(n: usize, k: usize, seed: u64) -> Result<(), TestCaseError> {
    let mut r = common::rng(seed);
    let a = common::form(&mut r, n, k);
    let xi = common::vector(&mut r, n);
    if k + 2 <= n {
        prop_assert!(vanishes(&exterior_d(&exterior_d(&a).unwrap()).unwrap()), "d^2");
    }
    if k >= 2 {
        prop_assert!(vanishes(&interior(&xi, &interior(&xi, &a).unwrap()).unwrap()), "i^2");
    }
    if k < n {
        let lhs = lie_derivative(&xi, &exterior_d(&a).unwrap()).unwrap();
        let rhs = exterior_d(&lie_derivative(&xi, &a).unwrap()).unwrap();
        prop_assert!(same(&lhs, &rhs), "[L, d]");
    }
    for space in [FlatSpace::euclidean(n), FlatSpace::lorentzian(n)] {
        let ss = hodge(&space, &hodge(&space, &a).unwrap()).unwrap();
        let expected = a.scale_rat(sign(k * (n - k)) * space.det_sign());
        prop_assert!(same(&ss, &expected), "double Hodge");
    }
    Ok(())
}

fn check_wedge(n: usize, seed: u64) -> Result<(), TestCaseError> {
    let mut r = common::rng(seed);
    let p = (seed % 3) as usize;
    let q = ((seed / 3) % 2) as usize;
    let s = ((seed / 6) % 2) as usize;
    if p + q + s > n {
        return Ok(());
    }
    let a = common::form(&mut r, n, p);
    let b = common::form(&mut r, n, q);
    let c = common::form(&mut r, n, s);
    let ab = wedge(&a, &b).unwrap();
    prop_assert!(same(&ab, &wedge(&b, &a).unwrap().scale_rat(sign(p * q))), "graded commutativity");
    let l = wedge(&ab, &c).unwrap();
    let rr = wedge(&a, &wedge(&b, &c).unwrap()).unwrap();
    prop_assert!(same(&l, &rr), "associativity");
    if p + q < n {
        // Leibniz
        let lhs = exterior_d(&ab).unwrap();
        let mut rhs = Form::zero(n, p + q + 1);
        if p < n {
            rhs = &rhs + &wedge(&exterior_d(&a).unwrap(), &b).unwrap();
        }
        if q < n {
            rhs = &rhs + &wedge(&a, &exterior_d(&b).unwrap()).unwrap().scale_rat(sign(p));
        }
        prop_assert!(same(&lhs, &rhs), "Leibniz");
    }
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn identities_in_two_dimensions(seed in any::<u64>()) {
        for k in 0..=2 {
            check_grade(2, k, seed.wrapping_add(k as u64))?;
        }
    }

    #[test]
    fn identities_in_four_dimensions(seed in any::<u64>()) {
        for k in 0..=4 {
            check_grade(4, k, seed.wrapping_add(k as u64))?;
        }
    }

    #[test]
    fn wedge_algebra(seed in any::<u64>()) {
        check_wedge(2, seed)?;
        check_wedge(4, seed)?;
    }

    #[test]
    fn selfdual_projectors(seed in any::<u64>()) {
        let space = FlatSpace::lorentzian(2);
        let mut r = common::rng(seed);
        let a = common::form(&mut r, 2, 1);
        let (p, m) = selfdual_project(&space, &a).unwrap();
        prop_assert!(same(&(&p + &m), &a));
        prop_assert!(same(&hodge(&space, &p).unwrap(), &p));
        prop_assert!(same(&hodge(&space, &m).unwrap(), &-&m));
        prop_assert!(same(&selfdual_project(&space, &p).unwrap().0, &p));
        prop_assert!(vanishes(&selfdual_project(&space, &m).unwrap().0));
    }

    #[test]
    fn lie_derivative_matches_coordinate_formula(seed in any::<u64>()) {
        // on 1-forms: (L A)_v = xi^m D_m A_v + A_m D_v xi^m
        let n = 2 + 2 * (seed % 2) as usize;
        let mut r = common::rng(seed);
        let a = common::form(&mut r, n, 1);
        let xi = common::vector(&mut r, n);
        let l = lie_derivative(&xi, &a).unwrap();
        for v in 0..n {
            let mut want = Expr::zero();
            for m in 0..n {
                want += &xi.comps[m] * total_derivative(&a.get(&[v]), m);
                want += a.get(&[m]) * total_derivative(&xi.comps[m], v);
            }
            prop_assert!(is_zero(&(l.get(&[v]) - want)).unwrap());
        }
        // and on scalars: L f = xi^m D_m f
        let f = common::form(&mut r, n, 0);
        let lf = lie_derivative(&xi, &f).unwrap();
        let want: Expr = (0..n).map(|m| &xi.comps[m] * total_derivative(&f.get(&[]), m)).sum();
        prop_assert!(is_zero(&(lf.get(&[]) - want)).unwrap());
    }
}

#[test]
fn two_dimensional_lorentzian_hodge() {
    let s = FlatSpace::lorentzian(2);
    let dx0 = Form::dx(2, 0);
    let dx1 = Form::dx(2, 1);
    assert_eq!(hodge(&s, &dx0).unwrap(), -&dx1);
    assert_eq!(hodge(&s, &dx1).unwrap(), -&dx0);
    assert_eq!(s.volume(), wedge(&dx0, &dx1).unwrap());
}
