use std::sync::Arc;

use num::complex::Complex64;
use proptest::prelude::*;

use casimir_core::expr::{is_zero, parse, Env, Expr, SampleBox};
use casimir_core::models::bianchi2::Bianchi2Model;
use casimir_core::models::so3::So3Model;
use casimir_core::tensor::{check_lie_commutator, lie_bracket, random_polynomial, random_tensor, Chart, VectorField};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn plane_box() -> SampleBox {
    SampleBox::new(vec![("x".into(), 0.2, 1.5), ("y".into(), 0.2, 1.5)])
}

fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        Just(Expr::sym("x")),
        Just(Expr::sym("y")),
        (-3i64..=3).prop_map(Expr::int),
        (1i64..=3, 2i64..=4).prop_map(|(n, d)| Expr::ratio(n, d)),
    ]
}

/// Expressions over x, y that stay finite on the positive sample box.
fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(3, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a + b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| a - b),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| &a * &b),
            inner.clone().prop_map(Expr::sin),
            inner.clone().prop_map(Expr::cos),
            leaf().prop_map(|a| Expr::exp(a)),
            inner.clone().prop_map(|a| Expr::sqrt(Expr::int(2) + &a * &a)),
            inner.prop_map(|a| (Expr::int(3) + &a * &a).powi(-1)),
        ]
    })
}

fn env(x: f64, y: f64) -> Env {
    [("x".to_string(), Complex64::new(x, 0.0)), ("y".to_string(), Complex64::new(y, 0.0))].into_iter().collect()
}

fn close(a: Complex64, b: Complex64, tol: f64) -> bool {
    (a - b).norm() <= tol * (1.0 + a.norm().max(b.norm()))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn simplify_is_idempotent(e in expr()) {
        let once = e.simplify();
        prop_assert_eq!(once.simplify(), once);
    }

    #[test]
    fn printed_form_parses_back(e in expr(), x in 0.2f64..1.5, y in 0.2f64..1.5) {
        let back = parse(&e.to_string(), &["x", "y"]).unwrap();
        let p = env(x, y);
        prop_assert!(close(back.eval(&p).unwrap(), e.eval(&p).unwrap(), 1e-10), "{}", e);
    }

    #[test]
    fn derivative_matches_finite_difference(e in expr(), x in 0.3f64..1.4, y in 0.3f64..1.4) {
        let h = 1e-5;
        let fd = (e.eval(&env(x + h, y)).unwrap() - e.eval(&env(x - h, y)).unwrap()) / (2.0 * h);
        let d = e.diff("x").eval(&env(x, y)).unwrap();
        prop_assert!(close(d, fd, 1e-5), "{}: {} vs {}", e, d, fd);
    }

    #[test]
    fn mixed_partials_commute(e in expr()) {
        let r = e.diff("x").diff("y") - e.diff("y").diff("x");
        prop_assert!(is_zero(&r, &plane_box()).unwrap().is_zero(), "{}", e);
    }

    #[test]
    fn leibniz_rule(f in expr(), g in expr()) {
        let r = (&f * &g).diff("x") - &f.diff("x") * &g - &f * &g.diff("x");
        prop_assert!(is_zero(&r, &plane_box()).unwrap().is_zero());
    }

    #[test]
    fn jacobi_for_brackets(seed in any::<u64>()) {
        let c = Arc::new(Chart::new("r3", &["x", "y", "z"], &[(-1.0, 1.0); 3]));
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut field = || VectorField::new(c.clone(), (0..3).map(|_| random_polynomial(&c, &mut rng)).collect()).unwrap();
        let (x, y, z) = (field(), field(), field());
        let b = |a: &VectorField, b: &VectorField| lie_bracket(a, b).unwrap();
        let j = b(&b(&x, &y), &z).add(&b(&b(&y, &z), &x)).add(&b(&b(&z, &x), &y));
        prop_assert!(j.is_zero());
    }

    #[test]
    fn lie_commutator_on_random_tensors(seed in any::<u64>(), ty in 0usize..5, i in 0usize..3, j in 0usize..3) {
        let (p, q) = [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1)][ty];
        let so3 = So3Model::new();
        let b2 = Bianchi2Model::new();
        for (xi, chart) in [(so3.xi(&so3.sphere), so3.sphere.clone()), (b2.xi(), b2.chart.clone())] {
            let t = random_tensor(chart.clone(), p, q, seed);
            let v = check_lie_commutator(&xi[i], &xi[j], &t, &chart.sample_box(seed % 7)).unwrap();
            prop_assert!(v.is_zero(), "{} ({p},{q}) {i} {j}: {:?}", chart.name, v);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn casimir_commutes_with_generators(seed in any::<u64>(), j in 0usize..3, ty in 0usize..3) {
        let (p, q) = [(0, 0), (1, 0), (0, 1)][ty];
        let so3 = So3Model::new();
        let op = so3.casimir(&so3.sphere).unwrap();
        let t = random_tensor(so3.sphere.clone(), p, q, seed);
        prop_assert!(op.check_g_commutes(j, &t, &so3.sphere.sample_box(0)).unwrap().is_zero());
        let b2 = Bianchi2Model::new();
        let op = b2.casimir().unwrap();
        let t = random_tensor(b2.chart.clone(), p, q, seed);
        prop_assert!(op.check_g_commutes(j, &t, &b2.chart.sample_box(0)).unwrap().is_zero());
    }
}
