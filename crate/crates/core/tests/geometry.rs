mod common;

use chern_core::geometry::{cartan_tensor, fundamental_tensor, tensor_partials, TensorBlock};
use chern_core::{Error, MetricField, TangentSample};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn bilinear(g: &TensorBlock, a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            acc += g.get(&[i, j]) * a[i] * b[j];
        }
    }
    acc
}

#[test]
fn euler_contraction_and_homogeneity() {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for (m, x_box) in common::builtins(3) {
        for _ in 0..100 {
            let s = common::random_sample(&mut rng, &m, x_box, 1e8);
            let f = fundamental_tensor(&m, &s).unwrap();
            let l = m.eval_sample(&s).unwrap();
            assert!((bilinear(&f.g, &s.v, &s.v) - l).abs() <= 1e-10 * l.abs(), "{}", m.name());
            assert_eq!(f.g.symmetry_defect(), 0.0);

            let c = cartan_tensor(&m, &s).unwrap();
            assert!(c.symmetry_defect() <= 1e-12, "{}", m.name());
            // C(v, ·, ·) relative to |C| |v|
            let scale = c.max_abs().max(1e-300) * common::max_abs(&s.v);
            for j in 0..3 {
                for k in 0..3 {
                    let cv: f64 = (0..3).map(|i| s.v[i] * c.get(&[i, j, k])).sum();
                    assert!(cv.abs() <= 1e-10 * scale.max(1e-14), "{} {cv:e}", m.name());
                }
            }

            for lambda in [0.5, 3.0] {
                let fl = fundamental_tensor(&m, &s.scaled(lambda)).unwrap();
                let d = common::diff_norm(fl.g.data(), f.g.data());
                assert!(d <= 1e-10 * f.g.max_abs(), "{} {d:e}", m.name());
            }
        }
    }
}

#[test]
fn quartic_against_finite_differences() {
    let m = MetricField::minkowski_quartic(2);
    let s = TangentSample::new(vec![0.0, 0.0], vec![1.0, 1.0]);
    let g = fundamental_tensor(&m, &s).unwrap();
    let l = |x: &[f64], y: &[f64]| m.eval(x, y).unwrap();
    let fd = common::fd_fundamental(&l, &s.x, &s.v);
    for i in 0..2 {
        for j in 0..2 {
            assert!((g.g.get(&[i, j]) - fd[(i, j)]).abs() <= 1e-6);
        }
    }
    // C is homogeneous of degree −1
    let c1 = cartan_tensor(&m, &s).unwrap();
    let c2 = cartan_tensor(&m, &s.scaled(2.0)).unwrap();
    for idx in c1.indices() {
        assert!((c2.get(&idx) - 0.5 * c1.get(&idx)).abs() <= 1e-14);
    }
}

#[test]
fn riemannian_partials_are_closed_form() {
    let p = common::SinProfile { eps: 0.1, n: 3 };
    let m = MetricField::riemannian_perturbed(3, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let s = common::random_sample(&mut rng, &m, 1.0, 1e10);
        let g = fundamental_tensor(&m, &s).unwrap();
        let a = p.a(&s.x);
        for i in 0..3 {
            for j in 0..3 {
                assert!((g.g.get(&[i, j]) - a[(i, j)]).abs() <= 1e-15);
            }
        }
        assert!(cartan_tensor(&m, &s).unwrap().max_abs() == 0.0);
        let tp = tensor_partials(&m, &s).unwrap();
        assert_eq!(tp.dg_dy.max_abs(), 0.0);
        for i in 0..3 {
            for j in 0..3 {
                for k in 0..3 {
                    let kron = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                    let expect = 0.1 * (s.x[i] + s.x[j]).cos() * (kron(i, k) + kron(j, k));
                    assert!((tp.dg_dx.get(&[i, j, k]) - expect).abs() <= 1e-14);
                }
            }
        }
    }
}

#[test]
fn y_partials_are_twice_cartan() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for (m, x_box) in common::builtins(3) {
        for _ in 0..20 {
            let s = common::random_sample(&mut rng, &m, x_box, 1e8);
            let tp = tensor_partials(&m, &s).unwrap();
            let c = cartan_tensor(&m, &s).unwrap();
            let scale = c.max_abs().max(1e-14);
            for idx in c.indices() {
                let (i, j, l) = (idx[0], idx[1], idx[2]);
                let d = tp.dg_dy.get(&[i, j, l]) - 2.0 * c.get(&[l, i, j]);
                assert!(d.abs() <= 1e-10 * 2.0 * scale, "{} {d:e}", m.name());
            }
        }
    }
}

#[test]
fn euclidean_partials_vanish() {
    let s = TangentSample::new(vec![0.4, -0.1], vec![0.2, 1.0]);
    let tp = tensor_partials(&MetricField::euclidean(2), &s).unwrap();
    assert_eq!(tp.dg_dx.max_abs(), 0.0);
    assert_eq!(tp.dg_dy.max_abs(), 0.0);
}

#[test]
fn raise_lower_round_trip() {
    let m = MetricField::funk(3, 1.0);
    let s = TangentSample::new(vec![0.2, -0.3, 0.1], vec![0.5, 1.0, -0.7]);
    let g = fundamental_tensor(&m, &s).unwrap().g;
    let c = cartan_tensor(&m, &s).unwrap();
    let back = c.raise(0, &g).unwrap().lower(0, &g).unwrap();
    let d = common::diff_norm(back.data(), c.data());
    assert!(d <= 1e-10 * c.max_abs());
}

#[test]
fn near_axis_quartic_is_degenerate() {
    let m = MetricField::minkowski_quartic(2);
    let s = TangentSample::new(vec![0.0, 0.0], vec![1.0, 1e-6]);
    assert!(matches!(fundamental_tensor(&m, &s), Err(Error::Degenerate { .. })));
    let outside = TangentSample::new(vec![2.0, 0.0], vec![1.0, 0.0]);
    assert!(fundamental_tensor(&MetricField::funk(2, 1.0), &outside).is_err());
}
