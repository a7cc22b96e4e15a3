mod common;

use chern_core::calculus::{extract, seed, Jet, JetSpace};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn random_polynomials_match_symbolic_partials() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for k in 0..200 {
        let nvars = 1 + k % 6;
        let err = common::polynomial_partials_error(&mut rng, nvars);
        assert!(err <= 1e-12, "polynomial {k}: {err:e}");
    }
}

fn jet_from(space: &std::sync::Arc<JetSpace>, c: &[f64]) -> Jet {
    Jet::from_coeffs(space, c.to_vec())
}

fn coeffs(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, len)
}

fn close(a: &Jet, b: &Jet, tol: f64) -> bool {
    let scale = a.max_abs().max(b.max_abs()).max(1.0);
    a.coeffs().iter().zip(b.coeffs()).all(|(p, q)| (p - q).abs() <= tol * scale)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn add_and_mul_laws(a in coeffs(15), b in coeffs(15), c in coeffs(15)) {
        // two variables, order 4: 15 coefficients
        let space = JetSpace::get(2, 4);
        let (a, b, c) = (jet_from(&space, &a), jet_from(&space, &b), jet_from(&space, &c));
        prop_assert!(close(&(&a + &b), &(&b + &a), 0.0));
        prop_assert!(close(&(&a * &b), &(&b * &a), 1e-13));
        prop_assert!(close(&(&(&a + &b) + &c), &(&a + &(&b + &c)), 1e-13));
        prop_assert!(close(&(&(&a * &b) * &c), &(&a * &(&b * &c)), 1e-13));
        prop_assert!(close(&(&a * &(&b + &c)), &(&(&a * &b) + &(&a * &c)), 1e-13));
    }

    #[test]
    fn division_inverts_multiplication(a in coeffs(10), b0 in 0.5f64..3.0, b in coeffs(9)) {
        let space = JetSpace::get(3, 2);
        let mut bc = vec![b0];
        bc.extend(b);
        let (a, b) = (jet_from(&space, &a), jet_from(&space, &bc));
        let q = a.checked_div(&b).unwrap();
        prop_assert!(close(&(&q * &b), &a, 1e-12));
    }

    #[test]
    fn chain_rule_on_scalar_compositions(t in -1.0f64..1.0) {
        let j = &seed(&[t], 4).unwrap()[0];
        // sin(exp t)
        let f = j.exp().sin();
        let e = t.exp();
        prop_assert!((extract(&f, &[1]).unwrap() - e * e.cos()).abs() <= 1e-13);
        prop_assert!((extract(&f, &[2]).unwrap() - (e * e.cos() - e * e * e.sin())).abs() <= 1e-12);
        // sqrt(1 + t²)
        let g = (&(j * j) + 1.0).sqrt();
        let r = (1.0 + t * t).sqrt();
        prop_assert!((extract(&g, &[1]).unwrap() - t / r).abs() <= 1e-13);
        prop_assert!((extract(&g, &[2]).unwrap() - 1.0 / (r * r * r)).abs() <= 1e-12);
        // log(2 + sin t)
        let h = (&j.sin() + 2.0).ln();
        let s = 2.0 + t.sin();
        prop_assert!((extract(&h, &[1]).unwrap() - t.cos() / s).abs() <= 1e-13);
        prop_assert!(
            (extract(&h, &[2]).unwrap() - (-t.sin() / s - t.cos().powi(2) / (s * s))).abs() <= 1e-12
        );
    }
}

#[test]
fn powers_agree_with_repeated_products() {
    let j = &seed(&[1.7, -0.4], 4).unwrap();
    let x = &j[0] + &j[1];
    let cube = &(&x * &x) * &x;
    assert!(close(&x.powi(3), &cube, 1e-14));
    assert!(close(&x.powf(3.0), &cube, 1e-13));
    assert!(close(&x.powf(0.5), &x.sqrt(), 1e-14));
    assert!(close(&x.powi(-2), &(&x * &x).recip(), 1e-13));
}
