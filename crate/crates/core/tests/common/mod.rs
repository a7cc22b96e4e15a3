//! Oracles shared by the integration tests. Nothing here calls into the
//! crate's differentiation code: derivatives are either written out by hand
//! or taken by finite differences of plain `f64` functions.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use chern_core::metrics::expr::{Bindings, Expr, Var};

pub fn uniform(rng: &mut ChaCha8Rng, n: usize, half: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-half..half)).collect()
}

pub fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, c| m.max(c.abs()))
}

pub fn diff_norm(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0f64, |m, (p, q)| m.max((p - q).abs()))
}

fn delta(i: usize, j: usize) -> f64 {
    if i == j {
        1.0
    } else {
        0.0
    }
}

/// `A_ij(x) = δ_ij + ε sin(x_i + x_j)` with its Levi-Civita connection and
/// Riemann tensor written out from the first and second derivatives of `A`.
pub struct SinProfile {
    pub eps: f64,
    pub n: usize,
}

impl SinProfile {
    pub fn a(&self, x: &[f64]) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| delta(i, j) + self.eps * (x[i] + x[j]).sin())
    }

    fn da(&self, x: &[f64], k: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            self.eps * (x[i] + x[j]).cos() * (delta(i, k) + delta(j, k))
        })
    }

    fn dda(&self, x: &[f64], k: usize, l: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            -self.eps * (x[i] + x[j]).sin() * (delta(i, k) + delta(j, k)) * (delta(i, l) + delta(j, l))
        })
    }

    /// `Γ_{l,ij}` at `[l][i][j]`.
    fn first_kind(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let d: Vec<_> = (0..n).map(|k| self.da(x, k)).collect();
        let mut out = vec![0.0; n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    out[(l * n + i) * n + j] = 0.5 * (d[i][(l, j)] + d[j][(l, i)] - d[l][(i, j)]);
                }
            }
        }
        out
    }

    /// `∂_a Γ_{l,ij}`.
    fn first_kind_d(&self, x: &[f64], a: usize) -> Vec<f64> {
        let n = self.n;
        let d: Vec<_> = (0..n).map(|k| self.dda(x, k, a)).collect();
        let mut out = vec![0.0; n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in 0..n {
                    out[(l * n + i) * n + j] = 0.5 * (d[i][(l, j)] + d[j][(l, i)] - d[l][(i, j)]);
                }
            }
        }
        out
    }

    /// `Γ^k_ij` at `[k][i][j]`.
    pub fn christoffel(&self, x: &[f64]) -> Vec<f64> {
        let n = self.n;
        let inv = self.a(x).try_inverse().unwrap();
        let f = self.first_kind(x);
        let mut out = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    out[(k * n + i) * n + j] = (0..n).map(|l| inv[(k, l)] * f[(l * n + i) * n + j]).sum();
                }
            }
        }
        out
    }

    /// `∂_a Γ^k_ij`, using `∂A⁻¹ = −A⁻¹ (∂A) A⁻¹`.
    fn christoffel_d(&self, x: &[f64], a: usize) -> Vec<f64> {
        let n = self.n;
        let inv = self.a(x).try_inverse().unwrap();
        let dinv = -(&inv * self.da(x, a) * &inv);
        let (f, df) = (self.first_kind(x), self.first_kind_d(x, a));
        let mut out = vec![0.0; n * n * n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let idx = |l: usize| (l * n + i) * n + j;
                    out[(k * n + i) * n + j] = (0..n)
                        .map(|l| dinv[(k, l)] * f[idx(l)] + inv[(k, l)] * df[idx(l)])
                        .sum();
                }
            }
        }
        out
    }

    /// `R(X, Y)Z = ∇_X∇_Y Z − ∇_Y∇_X Z − ∇_{[X,Y]}Z` for constant-coefficient
    /// `X, Y, Z`.
    pub fn riemann_apply(&self, x: &[f64], xv: &[f64], yv: &[f64], zv: &[f64]) -> Vec<f64> {
        let n = self.n;
        let g = self.christoffel(x);
        let dg: Vec<_> = (0..n).map(|a| self.christoffel_d(x, a)).collect();
        let gam = |k: usize, i: usize, j: usize| g[(k * n + i) * n + j];
        let mut out = vec![0.0; n];
        for k in 0..n {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        let mut r = dg[a][(k * n + b) * n + c] - dg[b][(k * n + a) * n + c];
                        for m in 0..n {
                            r += gam(k, a, m) * gam(m, b, c) - gam(k, b, m) * gam(m, a, c);
                        }
                        out[k] += r * xv[a] * yv[b] * zv[c];
                    }
                }
            }
        }
        out
    }

    pub fn g(&self, x: &[f64], a: &[f64], b: &[f64]) -> f64 {
        let m = self.a(x);
        (DVector::from_column_slice(a).transpose() * m * DVector::from_column_slice(b))[(0, 0)]
    }

    /// Sectional curvature of `span{v, u}`.
    pub fn sectional(&self, x: &[f64], v: &[f64], u: &[f64]) -> f64 {
        let r = self.riemann_apply(x, v, u, u);
        let den = self.g(x, v, v) * self.g(x, u, u) - self.g(x, v, u).powi(2);
        self.g(x, &r, v) / den
    }
}

/// `L = F²` for the Funk metric of the ball of radius `r`.
pub fn funk_lagrangian(r: f64) -> impl Fn(&[f64], &[f64]) -> f64 {
    move |x, y| {
        let gap = r * r - dot(x, x);
        let xy = dot(x, y);
        let f = (((gap * dot(y, y)) + xy * xy).sqrt() + xy) / gap;
        f * f
    }
}

pub fn sphere_lagrangian(x: &[f64], y: &[f64]) -> f64 {
    4.0 * dot(y, y) / (1.0 + dot(x, x)).powi(2)
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(p, q)| p * q).sum()
}

fn shifted(p: &[f64], i: usize, h: f64) -> Vec<f64> {
    let mut q = p.to_vec();
    q[i] += h;
    q
}

/// `∂²f/∂pᵢ∂qⱼ` by central differences, `f` a function of two vectors.
fn mixed<F: Fn(&[f64], &[f64]) -> f64>(f: &F, p: &[f64], q: &[f64], i: usize, j: usize, h: f64) -> f64 {
    (f(&shifted(p, i, h), &shifted(q, j, h)) - f(&shifted(p, i, h), &shifted(q, j, -h))
        - f(&shifted(p, i, -h), &shifted(q, j, h))
        + f(&shifted(p, i, -h), &shifted(q, j, -h)))
        / (4.0 * h * h)
}

/// `∂²f/∂qᵢ∂qⱼ` by central differences.
fn hessian<F: Fn(&[f64]) -> f64>(f: &F, q: &[f64], i: usize, j: usize, h: f64) -> f64 {
    let at = |a: f64, b: f64| {
        let mut r = q.to_vec();
        r[i] += a;
        r[j] += b;
        f(&r)
    };
    (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (4.0 * h * h)
}

/// `g_ij = ½ ∂²L/∂yⁱ∂yʲ` by central differences.
pub fn fd_fundamental<L: Fn(&[f64], &[f64]) -> f64>(l: &L, x: &[f64], y: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let h = 1e-4 * max_abs(y).max(1e-3);
    DMatrix::from_fn(n, n, |i, j| 0.5 * hessian(&|q: &[f64]| l(x, q), y, i, j, h))
}

/// `Gⁱ = ¼ g^{il}(∂²L/∂xᵏ∂yˡ yᵏ − ∂L/∂xˡ)`, every derivative of `L` by
/// central differences.
pub fn fd_spray<L: Fn(&[f64], &[f64]) -> f64>(l: &L, x: &[f64], y: &[f64]) -> Vec<f64> {
    let n = x.len();
    let h = 1e-4;
    let g = fd_fundamental(l, x, y);
    let rhs = DVector::from_fn(n, |lidx, _| {
        let cross: f64 = (0..n).map(|k| mixed(&|p: &[f64], q: &[f64]| l(p, q), x, y, k, lidx, h) * y[k]).sum();
        let dx = (l(&shifted(x, lidx, h), y) - l(&shifted(x, lidx, -h), y)) / (2.0 * h);
        cross - dx
    });
    let sol = g.lu().solve(&rhs).unwrap();
    sol.iter().map(|c| 0.25 * c).collect()
}

/// `Rⁱ_k = 2∂_{xᵏ}Gⁱ − yʲ∂_{xʲ}∂_{yᵏ}Gⁱ + 2Gʲ∂_{yʲ}∂_{yᵏ}Gⁱ − ∂_{yʲ}Gⁱ ∂_{yᵏ}Gʲ`
/// from a spray given in closed form, derivatives by central differences.
pub fn fd_riemann_curvature<G: Fn(&[f64], &[f64]) -> Vec<f64>>(spray: &G, x: &[f64], y: &[f64]) -> DMatrix<f64> {
    let n = x.len();
    let h = 1e-4;
    let g0 = spray(x, y);
    let comp = |i: usize| move |p: &[f64], q: &[f64]| spray(p, q)[i];
    let d_dx = |i: usize, k: usize| (spray(&shifted(x, k, h), y)[i] - spray(&shifted(x, k, -h), y)[i]) / (2.0 * h);
    let d_dy = |i: usize, k: usize| (spray(x, &shifted(y, k, h))[i] - spray(x, &shifted(y, k, -h))[i]) / (2.0 * h);
    DMatrix::from_fn(n, n, |i, k| {
        let f = comp(i);
        let mut r = 2.0 * d_dx(i, k);
        for j in 0..n {
            r -= y[j] * mixed(&f, x, y, j, k, h);
            r += 2.0 * g0[j] * hessian(&|q: &[f64]| f(x, q), y, j, k, h);
            r -= d_dy(i, j) * d_dy(j, k);
        }
        r
    })
}

/// Flag curvature from the FD Riemann curvature and FD fundamental tensor.
pub fn fd_flag_curvature<L: Fn(&[f64], &[f64]) -> f64, G: Fn(&[f64], &[f64]) -> Vec<f64>>(
    l: &L,
    spray: &G,
    x: &[f64],
    y: &[f64],
    u: &[f64],
) -> f64 {
    let r = fd_riemann_curvature(spray, x, y);
    let g = fd_fundamental(l, x, y);
    let (yv, uv) = (DVector::from_column_slice(y), DVector::from_column_slice(u));
    let ru = &r * &uv;
    let gg = |a: &DVector<f64>, b: &DVector<f64>| (a.transpose() * &g * b)[(0, 0)];
    gg(&ru, &uv) / (gg(&yv, &yv) * gg(&uv, &uv) - gg(&yv, &uv).powi(2))
}

/// The Funk spray `G = ½ F y`.
pub fn funk_spray(r: f64) -> impl Fn(&[f64], &[f64]) -> Vec<f64> {
    let l = funk_lagrangian(r);
    move |x, y| {
        let f = l(x, y).sqrt();
        y.iter().map(|c| 0.5 * f * c).collect()
    }
}

/// The spray of `4|y|²/(1 + |x|²)²`: `Gⁱ = ½Γⁱ_jk yʲyᵏ` with
/// `Γⁱ_jk = δᵢⱼφₖ + δᵢₖφⱼ − δⱼₖφᵢ`, `φ = log 2 − log(1 + |x|²)`.
pub fn sphere_spray(x: &[f64], y: &[f64]) -> Vec<f64> {
    let s = 1.0 + dot(x, x);
    let phi: Vec<f64> = x.iter().map(|c| -2.0 * c / s).collect();
    let (py, yy) = (dot(&phi, y), dot(y, y));
    (0..x.len()).map(|i| 0.5 * (2.0 * y[i] * py - yy * phi[i])).collect()
}

/// A random polynomial in `nvars` variables as a sum of products of random
/// affine factors, total degree at most `max_degree`. Also returns the same
/// tree with every coefficient replaced by its absolute value, whose
/// derivatives at `|x|` bound the terms of the original's.
pub fn random_polynomial(rng: &mut ChaCha8Rng, nvars: usize, max_degree: usize) -> (Expr, Expr) {
    let terms = rng.gen_range(1..=4);
    let mut e = Expr::num(0.0);
    let mut a = Expr::num(0.0);
    for _ in 0..terms {
        let degree = rng.gen_range(0..=max_degree);
        let c = rng.gen_range(-2.0..2.0);
        let (mut p, mut q) = (Expr::num(c), Expr::num(f64::abs(c)));
        let mut left = degree;
        while left > 0 {
            let (fp, fq) = random_affine(rng, nvars);
            if left >= 2 && rng.gen_bool(0.25) {
                p = p * fp.pow(Expr::num(2.0));
                q = q * fq.pow(Expr::num(2.0));
                left -= 2;
            } else {
                p = p * fp;
                q = q * fq;
                left -= 1;
            }
        }
        e = e + p;
        a = a + q;
    }
    (e, a)
}

fn random_affine(rng: &mut ChaCha8Rng, nvars: usize) -> (Expr, Expr) {
    let c0 = rng.gen_range(-1.0..1.0);
    let (mut p, mut q) = (Expr::num(c0), Expr::num(f64::abs(c0)));
    for i in 0..nvars {
        if rng.gen_bool(0.5) {
            let c = rng.gen_range(-1.0..1.0);
            p = p + Expr::num(c) * Expr::var(Var::X(i));
            q = q + Expr::num(f64::abs(c)) * Expr::var(Var::X(i));
        }
    }
    (p, q)
}

/// Total degree of the trees built by [`random_polynomial`].
pub fn degree(e: &Expr) -> usize {
    match e {
        Expr::Num(_) => 0,
        Expr::Var(_) => 1,
        Expr::Neg(a) => degree(a),
        Expr::Add(a, b) | Expr::Sub(a, b) => degree(a).max(degree(b)),
        Expr::Mul(a, b) => degree(a) + degree(b),
        Expr::Pow(a, b) => degree(a) * b.constant_value().unwrap() as usize,
        _ => panic!("not a polynomial"),
    }
}

pub fn eval_point(e: &Expr, x: &[f64]) -> f64 {
    e.eval(&Bindings::point(x)).unwrap()
}

/// Multi-indices over `n` variables of total degree `1..=order`.
pub fn multi_indices(n: usize, order: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut cur = vec![0u8; n];
    fn rec(i: usize, left: usize, cur: &mut Vec<u8>, out: &mut Vec<Vec<u8>>) {
        if i == cur.len() {
            if cur.iter().any(|&c| c > 0) {
                out.push(cur.clone());
            }
            return;
        }
        for k in 0..=left {
            cur[i] = k as u8;
            rec(i + 1, left - k, cur, out);
        }
        cur[i] = 0;
    }
    rec(0, order, &mut cur, &mut out);
    out
}

/// Largest relative error over all partials of order `1..=4` of one random
/// polynomial in `nvars ≤ 6` variables: jets against symbolic
/// differentiation, relative to the term bound.
pub fn polynomial_partials_error(rng: &mut ChaCha8Rng, nvars: usize) -> f64 {
    use chern_core::calculus::{extract, seed};
    let (e, bound) = random_polynomial(rng, nvars, 4);
    assert!(degree(&e) <= 4);
    let x = uniform(rng, nvars, 1.5);
    let ax: Vec<f64> = x.iter().map(|c| c.abs()).collect();
    let jets = seed(&x, 4).unwrap();
    let j = e.eval(&Bindings::point(&jets)).unwrap();
    let mut worst = 0.0f64;
    for alpha in multi_indices(nvars, 4) {
        let (mut d, mut db) = (e.clone(), bound.clone());
        for (i, &k) in alpha.iter().enumerate() {
            for _ in 0..k {
                d = d.derivative(Var::X(i));
                db = db.derivative(Var::X(i));
            }
        }
        let exact = eval_point(&d, &x);
        let scale = eval_point(&db, &ax).max(1e-300);
        let got = extract(&j, &alpha).unwrap();
        worst = worst.max((got - exact).abs() / scale);
    }
    worst
}

/// Every builtin in dimension `n`, with the box `x` is drawn from.
pub fn builtins(n: usize) -> Vec<(chern_core::MetricField, f64)> {
    use chern_core::MetricField;
    vec![
        (MetricField::euclidean(n), 1.0),
        (MetricField::riemannian_perturbed(n, 0.1), 1.0),
        (MetricField::minkowski_quartic(n), 1.0),
        (MetricField::sphere_round(n), 1.0),
        (MetricField::hyperbolic(n), 0.55),
        (MetricField::funk(n, 1.0), 0.55),
    ]
}

/// A random `(x, v)` in the domain with `cond(g) ≤ max_condition`.
pub fn random_sample(
    rng: &mut ChaCha8Rng,
    m: &chern_core::MetricField,
    x_box: f64,
    max_condition: f64,
) -> chern_core::TangentSample {
    use chern_core::geometry::fundamental_tensor;
    use chern_core::TangentSample;
    loop {
        let s = TangentSample::new(uniform(rng, m.dim(), x_box), uniform(rng, m.dim(), 1.0));
        if m.in_domain(&s.x, &s.v) {
            if let Ok(f) = fundamental_tensor(m, &s) {
                if f.condition <= max_condition {
                    return s;
                }
            }
        }
    }
}

/// A random vector field with polynomial components of degree ≤ 3 around
/// `x0`, offset so that its value at `x0` is `at` when given.
pub fn random_field(rng: &mut ChaCha8Rng, x0: &[f64], at: Option<&[f64]>, amp: f64) -> chern_core::connection::VectorField {
    let n = x0.len();
    let comps: Vec<String> = (0..n)
        .map(|k| {
            let base = match at {
                Some(v) => v[k],
                None => rng.gen_range(-1.0..1.0),
            };
            let mut text = format!("{base}");
            for _ in 0..4 {
                let c = amp * rng.gen_range(-1.0..1.0);
                let deg = rng.gen_range(1..=3);
                let mut mono = format!("{c}");
                for _ in 0..deg {
                    let i = rng.gen_range(0..n);
                    mono.push_str(&format!(" * (x{} - {})", i + 1, x0[i]));
                }
                text.push_str(" + ");
                text.push_str(&mono);
            }
            text
        })
        .collect();
    let refs: Vec<&str> = comps.iter().map(String::as_str).collect();
    chern_core::connection::VectorField::parse(&refs, n).unwrap()
}

/// `d/dt φ(x + t d)` at `t = 0`, fourth-order central differences.
pub fn directional<F: Fn(&[f64]) -> f64>(phi: F, x: &[f64], d: &[f64], h: f64) -> f64 {
    let at = |t: f64| {
        let p: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + t * b).collect();
        phi(&p)
    };
    (at(-2.0 * h) - 8.0 * at(-h) + 8.0 * at(h) - at(2.0 * h)) / (12.0 * h)
}

/// `[X, Y] = DY·X − DX·Y` by finite differences.
pub fn fd_bracket(
    xf: &chern_core::connection::VectorField,
    yf: &chern_core::connection::VectorField,
    p: &[f64],
) -> Vec<f64> {
    let (xv, yv) = (xf.value_at(p).unwrap(), yf.value_at(p).unwrap());
    (0..p.len())
        .map(|k| {
            directional(|q| yf.value_at(q).unwrap()[k], p, &xv, 1e-3)
                - directional(|q| xf.value_at(q).unwrap()[k], p, &yv, 1e-3)
        })
        .collect()
}
