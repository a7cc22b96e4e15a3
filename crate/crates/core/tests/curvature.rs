mod common;

use chern_core::connection::VectorField;
use chern_core::curvature::{
    b_tensor, curvature_field, curvature_field_nested, extension_curvature, flag_curvature,
    flag_curvature_predecessor, h_tensor, hh_apply, hh_curvature, nabla_cartan, r_along_curve, r_along_curve_direct,
    AdaptedExtension, AffineChern,
};
use chern_core::curves::{geodesic_shoot, CurvePath};
use chern_core::geometry::fundamental_tensor;
use chern_core::{MetricField, TangentSample};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn g_of(m: &MetricField, s: &TangentSample, a: &[f64], b: &[f64]) -> f64 {
    let g = fundamental_tensor(m, s).unwrap().g;
    let n = a.len();
    (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| g.get(&[i, j]) * a[i] * b[j])
        .sum()
}

fn rel(a: &[f64], b: &[f64]) -> f64 {
    common::diff_norm(a, b) / common::max_abs(a).max(common::max_abs(b)).max(1e-300)
}

fn random_fields(rng: &mut ChaCha8Rng, s: &TangentSample) -> (VectorField, [VectorField; 4]) {
    let v = common::random_field(rng, &s.x, Some(&s.v), 0.1);
    let f = std::array::from_fn(|_| common::random_field(rng, &s.x, None, 0.5));
    (v, f)
}

/// A cubic through `s` with a random bend, so not a geodesic.
fn bent_curve(rng: &mut ChaCha8Rng, s: &TangentSample, bend: f64) -> CurvePath {
    let n = s.dim();
    let c2 = common::uniform(rng, n, bend);
    let c3 = common::uniform(rng, n, bend);
    CurvePath::polynomial(0.0, &[s.x.clone(), s.v.clone(), c2, c3], -0.2, 0.2).unwrap()
}

#[test]
fn euclidean_is_flat() {
    let m = MetricField::euclidean(3);
    let mut rng = ChaCha8Rng::seed_from_u64(40);
    let s = common::random_sample(&mut rng, &m, 1.0, 1e10);
    let (v, [x, y, z, _]) = random_fields(&mut rng, &s);
    assert_eq!(curvature_field(&m, &v, &x, &y, &z, &s.x).unwrap().value, vec![0.0; 3]);
    assert_eq!(hh_curvature(&m, &s).unwrap().max_abs(), 0.0);
    let u = common::uniform(&mut rng, 3, 1.0);
    assert_eq!(flag_curvature(&m, &s, &u).unwrap(), 0.0);
    assert_eq!(flag_curvature_predecessor(&m, &s, &u, &[0.3, -0.2, 0.9]).unwrap(), 0.0);
    let line = CurvePath::line(&s.x, &s.v, -1.0, 1.0).unwrap();
    assert_eq!(r_along_curve(&m, &line, 0.5, &u, &u).unwrap().value, vec![0.0; 3]);
}

#[test]
fn riemannian_curvature_is_the_closed_form() {
    let p = common::SinProfile { eps: 0.1, n: 3 };
    let m = MetricField::riemannian_perturbed(3, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..20 {
        let s = common::random_sample(&mut rng, &m, 1.0, 1e10);
        let (v, [x, y, z, _]) = random_fields(&mut rng, &s);
        let (xv, yv, zv) = (x.value_at(&s.x).unwrap(), y.value_at(&s.x).unwrap(), z.value_at(&s.x).unwrap());
        let want = p.riemann_apply(&s.x, &xv, &yv, &zv);
        let got = curvature_field(&m, &v, &x, &y, &z, &s.x).unwrap().value;
        assert!(rel(&got, &want) <= 1e-10, "{:e}", rel(&got, &want));
        let nested = curvature_field_nested(&m, &v, &x, &y, &z, &s.x).unwrap();
        assert!(rel(&nested, &want) <= 1e-9);
        let hh = hh_apply(&hh_curvature(&m, &s).unwrap(), &xv, &yv, &zv);
        assert!(rel(&hh, &want) <= 1e-10, "{:e}", rel(&hh, &want));
        // pair symmetry of the classical tensor
        let w = common::uniform(&mut rng, 3, 1.0);
        let r1 = p.g(&s.x, &got, &w);
        let r2 = p.g(&s.x, &curvature_field(&m, &v, &z, &VectorField::constant(&w), &x, &s.x).unwrap().value, &yv);
        assert!((r1 - r2).abs() <= 1e-9 * r1.abs().max(r2.abs()));
    }
}

#[test]
fn curvature_is_antisymmetric_as_computed() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for (m, x_box) in common::builtins(3) {
        let s = common::random_sample(&mut rng, &m, x_box, 1e5);
        let (v, [x, y, z, _]) = random_fields(&mut rng, &s);
        let a = curvature_field(&m, &v, &x, &y, &z, &s.x).unwrap().value;
        let b = curvature_field(&m, &v, &y, &x, &z, &s.x).unwrap().value;
        for k in 0..3 {
            assert!((a[k] + b[k]).abs() <= 1e-15 * common::max_abs(&a).max(1e-300), "{}", m.name());
        }
        let hh = hh_curvature(&m, &s).unwrap();
        for idx in hh.indices() {
            assert_eq!(hh.get(&idx), -hh.get(&[idx[0], idx[1], idx[3], idx[2]]));
        }
    }
}

#[test]
fn cartan_derivative_identities() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    let rm = MetricField::riemannian_perturbed(3, 0.1);
    let s = common::random_sample(&mut rng, &rm, 1.0, 1e10);
    let (v, [x, y, z, w]) = random_fields(&mut rng, &s);
    assert_eq!(nabla_cartan(&rm, &v, [&x, &y, &z, &w], &s.x).unwrap(), 0.0);
    assert_eq!(b_tensor(&rm, &v, [&x, &y, &z, &w], &s.x).unwrap(), 0.0);

    for (m, x_box) in common::builtins(3) {
        if m.is_riemannian() {
            continue;
        }
        for _ in 0..5 {
            let s = common::random_sample(&mut rng, &m, x_box, 1e5);
            let (v, [x, y, z, w]) = random_fields(&mut rng, &s);
            let ac = AffineChern::new(&m, &v, &s.x).unwrap();
            let vals: Vec<Vec<f64>> = [&x, &y, &z, &w].iter().map(|f| f.value_at(&s.x).unwrap()).collect();
            let (xv, yv, zv, wv) = (&vals[0], &vals[1], &vals[2], &vals[3]);

            // ∇_X C(V, Z, W) + C(∇_X V, Z, W) = 0
            let a = nabla_cartan(&m, &v, [&x, &v, &z, &w], &s.x).unwrap();
            let b = ac.cartan(&ac.nabla_reference(xv), zv, wv);
            assert!((a + b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-14), "{} {:e}", m.name(), a + b);

            // symmetric in the last three slots, and the formula agrees with the tensor
            let c = nabla_cartan(&m, &v, [&x, &y, &z, &w], &s.x).unwrap();
            let scale = c.abs().max(1e-14);
            for perm in [[&z, &y, &w], [&w, &z, &y], [&y, &w, &z]] {
                let d = nabla_cartan(&m, &v, [&x, perm[0], perm[1], perm[2]], &s.x).unwrap();
                assert!((c - d).abs() <= 1e-10 * scale, "{}", m.name());
            }
            assert!((c - ac.nabla_cartan(xv, yv, zv, wv)).abs() <= 1e-10 * scale);

            // B: antisymmetric in the first pair, symmetric in the last
            let b0 = b_tensor(&m, &v, [&x, &y, &z, &w], &s.x).unwrap();
            let b1 = b_tensor(&m, &v, [&y, &x, &z, &w], &s.x).unwrap();
            let b2 = b_tensor(&m, &v, [&x, &y, &w, &z], &s.x).unwrap();
            let terms = ac.b_terms(xv, yv, zv, wv);
            let scale = terms.iter().fold(0.0f64, |a, t| a.max(t.abs())).max(1e-14);
            assert!((b0 + b1).abs() <= 1e-10 * scale, "{} {:e}", m.name(), (b0 + b1) / scale);
            assert!((b0 - b2).abs() <= 1e-10 * scale, "{} {:e}", m.name(), (b0 - b2) / scale);
        }
    }
}

#[test]
fn h_tensor_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(44);
    for (m, x_box) in common::builtins(3) {
        let s = common::random_sample(&mut rng, &m, 0.5 * x_box, 1e4);
        let (u, w) = (common::uniform(&mut rng, 3, 1.0), common::uniform(&mut rng, 3, 1.0));
        let bent = bent_curve(&mut rng, &s, 1.0);
        let a = h_tensor(&m, &bent, 0.1, &u, &w).unwrap();
        assert_eq!(a, h_tensor(&m, &bent, 0.1, &w, &u).unwrap(), "{}", m.name());
        // Γ does not depend on y for Riemannian metrics and vanishes for Minkowski ones
        if m.is_riemannian() || m.name() == "minkowski_quartic" {
            assert_eq!(common::max_abs(&a), 0.0, "{}", m.name());
            continue;
        }
        assert!(common::max_abs(&a) > 1e-6, "{}", m.name());
        // along a geodesic the acceleration vanishes to integration accuracy
        let geo = geodesic_shoot(&m, &s.x, &s.v, 0.3, 1e-12).unwrap();
        let h = h_tensor(&m, &geo, 0.17, &u, &w).unwrap();
        assert!(common::max_abs(&h) <= 1e-8 * common::max_abs(&a), "{} {:e}", m.name(), common::max_abs(&h));
    }
}

#[test]
fn curvature_along_curves() {
    let mut rng = ChaCha8Rng::seed_from_u64(45);
    // round sphere: R(v, u)u = g(u, u)v − g(v, u)u
    let sphere = MetricField::sphere_round(3);
    for _ in 0..10 {
        let s = common::random_sample(&mut rng, &sphere, 1.0, 1e6);
        let geo = geodesic_shoot(&sphere, &s.x, &s.v, 0.5, 1e-12).unwrap();
        let u = common::uniform(&mut rng, 3, 1.0);
        let st = geo.tangent_sample(0.25).unwrap();
        let got = r_along_curve(&sphere, &geo, 0.25, &u, &u).unwrap().value;
        let (guu, gvu) = (g_of(&sphere, &st, &u, &u), g_of(&sphere, &st, &st.v, &u));
        let want: Vec<f64> = (0..3).map(|k| guu * st.v[k] - gvu * u[k]).collect();
        assert!(rel(&got, &want) <= 1e-8, "{:e}", rel(&got, &want));
    }

    // the formula against the direct variation on bent curves
    for m in [MetricField::minkowski_quartic(3), MetricField::funk(3, 1.0)] {
        let x_box = if m.name() == "funk" { 0.55 } else { 1.0 };
        for _ in 0..10 {
            let s = common::random_sample(&mut rng, &m, x_box, 100.0);
            let c = bent_curve(&mut rng, &s, 0.5);
            let (u, w) = (common::uniform(&mut rng, 3, 1.0), common::uniform(&mut rng, 3, 1.0));
            let f = r_along_curve(&m, &c, 0.0, &u, &w).unwrap().value;
            let d = r_along_curve_direct(&m, &c, 0.0, &u, &w).unwrap();
            assert!(rel(&f, &d) <= 1e-8, "{} {:e}", m.name(), rel(&f, &d));
        }
    }
}

fn random_extension(rng: &mut ChaCha8Rng, v: &[f64]) -> AdaptedExtension {
    let n = v.len();
    // the coordinate directions with the one most aligned to v dropped
    let drop = (0..n).max_by(|&a, &b| v[a].abs().total_cmp(&v[b].abs())).unwrap();
    let frame = (0..n)
        .filter(|&i| i != drop)
        .map(|i| {
            let mut e = common::uniform(rng, n, 0.2);
            e[i] += 1.0;
            e
        })
        .collect();
    let frame_rate = (0..n - 1).map(|_| common::uniform(rng, n, 0.5)).collect();
    let mut bend = vec![vec![vec![0.0; n]; n - 1]; n - 1];
    for a in 0..n - 1 {
        for b in a..n - 1 {
            let c = common::uniform(rng, n, 0.5);
            bend[a][b] = c.clone();
            bend[b][a] = c;
        }
    }
    AdaptedExtension { frame, frame_rate, bend }
}

#[test]
fn extensions_in_the_riemannian_case() {
    let mut rng = ChaCha8Rng::seed_from_u64(46);
    let m = MetricField::riemannian_perturbed(3, 0.1);
    for _ in 0..5 {
        let s = common::random_sample(&mut rng, &m, 1.0, 1e6);
        let c = bent_curve(&mut rng, &s, 0.5);
        let (u, w) = (common::uniform(&mut rng, 3, 1.0), common::uniform(&mut rng, 3, 1.0));
        let a = extension_curvature(&m, &c, 0.0, &u, &w, &random_extension(&mut rng, &s.v)).unwrap();
        let b = extension_curvature(&m, &c, 0.0, &u, &w, &random_extension(&mut rng, &s.v)).unwrap();
        let f = r_along_curve(&m, &c, 0.0, &u, &w).unwrap().value;
        assert!(rel(&a, &b) <= 1e-8, "{:e}", rel(&a, &b));
        assert!(rel(&a, &f) <= 1e-8, "{:e}", rel(&a, &f));
    }
}

#[test]
fn finsler_extension_dependence_is_orthogonal_to_the_flagpole() {
    // for the Funk metric R^V(V, U)W moves with the extension; the change is
    // g_v-orthogonal to v, so flag curvatures do not see it
    let mut rng = ChaCha8Rng::seed_from_u64(47);
    let m = MetricField::funk(3, 1.0);
    let mut largest: f64 = 0.0;
    for _ in 0..5 {
        let s = common::random_sample(&mut rng, &m, 0.55, 100.0);
        let c = bent_curve(&mut rng, &s, 0.5);
        let (u, w) = (common::uniform(&mut rng, 3, 1.0), common::uniform(&mut rng, 3, 1.0));
        let a = extension_curvature(&m, &c, 0.0, &u, &w, &random_extension(&mut rng, &s.v)).unwrap();
        let b = extension_curvature(&m, &c, 0.0, &u, &w, &random_extension(&mut rng, &s.v)).unwrap();
        largest = largest.max(rel(&a, &b));
        let d: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p - q).collect();
        let scale = common::max_abs(&a).max(common::max_abs(&b)) * common::max_abs(&s.v);
        let (gd, gg) = (g_of(&m, &s, &d, &s.v), fundamental_tensor(&m, &s).unwrap().g.max_abs());
        assert!(gd.abs() <= 1e-8 * scale * gg, "{:e}", gd / (scale * gg));
    }
    assert!(largest > 1e-3);
}

#[test]
fn riemannian_flag_curvature_is_sectional() {
    let p = common::SinProfile { eps: 0.1, n: 3 };
    let m = MetricField::riemannian_perturbed(3, 0.1);
    let mut rng = ChaCha8Rng::seed_from_u64(48);
    for _ in 0..50 {
        let s = common::random_sample(&mut rng, &m, 1.0, 1e10);
        let u = common::uniform(&mut rng, 3, 1.0);
        let k = flag_curvature(&m, &s, &u).unwrap();
        let want = p.sectional(&s.x, &s.v, &u);
        assert!((k - want).abs() <= 1e-7, "{k} vs {want}");
    }
}

#[test]
fn constant_curvature_builtins() {
    let mut rng = ChaCha8Rng::seed_from_u64(49);
    for (m, x_box) in [
        (MetricField::sphere_round(3), 1.0),
        (MetricField::hyperbolic(3), 0.55),
        (MetricField::funk(3, 1.0), 0.55),
        (MetricField::sphere_round(2), 2.0),
        (MetricField::funk(2, 2.0), 1.2),
    ] {
        let want = m.constant_flag_curvature().unwrap();
        let tol = if m.name() == "funk" { 1e-4 } else { 1e-6 };
        for _ in 0..20 {
            let s = common::random_sample(&mut rng, &m, x_box, 1e6);
            let u = common::uniform(&mut rng, m.dim(), 1.0);
            let k = flag_curvature(&m, &s, &u).unwrap();
            assert!((k - want).abs() <= tol, "{} {k}", m.name());
            assert_eq!(flag_curvature_predecessor(&m, &s, &u, &u).unwrap(), k);
            if m.is_riemannian() {
                let w = common::uniform(&mut rng, m.dim(), 1.0);
                let kp = flag_curvature_predecessor(&m, &s, &u, &w).unwrap();
                assert!((kp - want).abs() <= 1e-6, "{} {kp}", m.name());
            }
        }
    }
}

#[test]
fn degenerate_flags_are_rejected() {
    let m = MetricField::sphere_round(3);
    let s = TangentSample::new(vec![0.1, 0.2, 0.0], vec![1.0, 0.5, 0.0]);
    assert!(flag_curvature(&m, &s, &[2.0, 1.0, 0.0]).is_err());
}

// The Funk value −1/4 is checked against an oracle sharing no code with the
// library: closed-form L and spray, finite-difference Riemann curvature.

#[test]
fn oracle_reproduces_the_sphere() {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    for _ in 0..5 {
        let (x, y, u) = (common::uniform(&mut rng, 3, 1.0), common::uniform(&mut rng, 3, 1.0), common::uniform(&mut rng, 3, 1.0));
        let sp = common::fd_spray(&common::sphere_lagrangian, &x, &y);
        let closed = common::sphere_spray(&x, &y);
        assert!(rel(&sp, &closed) <= 1e-6);
        let k = common::fd_flag_curvature(&common::sphere_lagrangian, &common::sphere_spray, &x, &y, &u);
        assert!((k - 1.0).abs() <= 1e-5, "{k}");
    }
}

#[test]
fn funk_flag_curvature_against_the_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(51);
    let m = MetricField::funk(3, 1.0);
    let (l, g) = (common::funk_lagrangian(1.0), common::funk_spray(1.0));
    for _ in 0..20 {
        let s = common::random_sample(&mut rng, &m, 0.55, 1e4);
        let u = common::uniform(&mut rng, 3, 1.0);
        // the closed-form spray solves the geodesic equation of L
        let sp = common::fd_spray(&l, &s.x, &s.v);
        assert!(rel(&sp, &g(&s.x, &s.v)) <= 1e-6, "{:e}", rel(&sp, &g(&s.x, &s.v)));
        let oracle = common::fd_flag_curvature(&l, &g, &s.x, &s.v, &u);
        assert!((oracle + 0.25).abs() <= 1e-4, "{oracle}");
        let k = flag_curvature(&m, &s, &u).unwrap();
        assert!((k - oracle).abs() <= 1e-4, "{k} vs {oracle}");
    }
}
