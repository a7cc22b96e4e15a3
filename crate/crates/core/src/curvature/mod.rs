//! Curvature of `∇^V`, the covariant derivative of the Cartan tensor, the
//! `B^V` tensor, the hh-curvature of the Chern connection, the tensor `H_γ`,
//! the curvature `R^γ` along curves and the flag curvature.
//!
//! Contraction convention for the hh-curvature: with
//! `R_j^i_kl` stored at `[i][j][k][l]`,
//! `R_v(X, Y)Z = X^k Y^l Z^j R_j^i_kl ∂_i`, which makes it agree with
//! `R^V(X, Y)Z` for the curvature of `∇^V` and with `R^γ` on geodesics.

mod extension;

pub use extension::{extension_curvature, extension_curvature_bounded, AdaptedExtension};

use crate::calculus::{Jet, JetSpace};
use crate::connection::{spray, ChernJets, ReferenceConnection, VectorField};
use crate::curves::CurvePath;
use crate::error::{Error, Result};
use crate::geometry::{ix2, ix3, TensorBlock, Variance};
use crate::metrics::{MetricField, TangentSample};

/// Step of the finite differences used for `∇R`.
pub const BIANCHI_STEP: f64 = 1e-3;

#[derive(Debug, Clone)]
pub enum CurvatureContext {
    /// `R^V` for this reference field.
    Field(VectorField),
    /// `R^γ` at this curve parameter.
    Curve { t: f64 },
}

/// A curvature value `R(·, ·)·` applied to given arguments.
#[derive(Debug, Clone)]
pub struct CurvatureEval {
    pub sample: TangentSample,
    pub context: CurvatureContext,
    pub value: Vec<f64>,
}

fn ix4(n: usize, a: usize, b: usize, c: usize, d: usize) -> usize {
    ((a * n + b) * n + c) * n + d
}

fn rank4(n: usize, upper_first: bool) -> TensorBlock {
    let first = if upper_first {
        Variance::Contravariant
    } else {
        Variance::Covariant
    };
    TensorBlock::zeros(n, vec![first, Variance::Covariant, Variance::Covariant, Variance::Covariant])
}

/// Contract `T^k_cab` (stored `[k][c][a][b]`) as `T(X, Y)Z = X^a Y^b Z^c`.
fn apply_riemann(r: &TensorBlock, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
    let n = r.dim();
    let d = r.data();
    (0..n)
        .map(|k| {
            let mut acc = 0.0;
            for c in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        acc += d[ix4(n, k, c, a, b)] * x[a] * y[b] * z[c];
                    }
                }
            }
            acc
        })
        .collect()
}

/// Everything about `∇^V` at one point: connection jets, `R^V` and `∇^V C_V`.
#[derive(Debug, Clone)]
pub struct AffineChern {
    pub conn: ReferenceConnection,
    /// `R^k_cab`, `R(∂_a, ∂_b)∂_c = R^k_cab ∂_k`.
    pub riemann: TensorBlock,
    /// `(∇_e C)_abc` at `[e][a][b][c]`.
    pub nabla_c: TensorBlock,
    /// Largest single term of each component of `riemann`.
    pub riemann_bound: TensorBlock,
}

impl AffineChern {
    pub fn new(m: &MetricField, v: &VectorField, x: &[f64]) -> Result<Self> {
        Ok(Self::from_connection(ReferenceConnection::new(m, v, x)?))
    }

    pub fn from_connection(conn: ReferenceConnection) -> Self {
        let riemann = conn.curvature_tensor();
        let nabla_c = conn.nabla_cartan_tensor();
        let riemann_bound = conn.curvature_term_bound();
        AffineChern {
            conn,
            riemann,
            nabla_c,
            riemann_bound,
        }
    }

    pub fn dim(&self) -> usize {
        self.conn.dim()
    }

    /// `R^V(X, Y)Z`.
    pub fn curvature(&self, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
        apply_riemann(&self.riemann, x, y, z)
    }

    /// Largest single term entering `R^V(X, Y)Z`.
    pub fn curvature_bound(&self, x: &[f64], y: &[f64], z: &[f64]) -> f64 {
        let n = self.dim();
        let d = self.riemann_bound.data();
        let mut out = 0.0f64;
        for k in 0..n {
            for c in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        out = out.max(d[ix4(n, k, c, a, b)] * (x[a] * y[b] * z[c]).abs());
                    }
                }
            }
        }
        out
    }

    pub fn g(&self, a: &[f64], b: &[f64]) -> f64 {
        self.conn.g_value(a, b)
    }

    pub fn cartan(&self, a: &[f64], b: &[f64], c: &[f64]) -> f64 {
        self.conn.cartan_value(a, b, c)
    }

    /// `∇^V_E C_V(A, B, C)`.
    pub fn nabla_cartan(&self, e: &[f64], a: &[f64], b: &[f64], c: &[f64]) -> f64 {
        let n = self.dim();
        let d = self.nabla_c.data();
        let mut acc = 0.0;
        for p in 0..n {
            for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        acc += d[ix4(n, p, i, j, k)] * e[p] * a[i] * b[j] * c[k];
                    }
                }
            }
        }
        acc
    }

    /// `∇^V_X V`.
    pub fn nabla_reference(&self, x: &[f64]) -> Vec<f64> {
        self.conn.nabla_reference(x)
    }

    /// `B^V(X, Y, Z, W)`.
    pub fn b(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> f64 {
        let [p, q, r] = self.b_terms(x, y, z, w);
        p - q + r
    }

    /// The three terms of `B^V(X, Y, Z, W)`:
    /// `∇_Y C(∇_X V, Z, W)`, `∇_X C(∇_Y V, Z, W)`, `C(R(Y, X)V, Z, W)`.
    pub fn b_terms(&self, x: &[f64], y: &[f64], z: &[f64], w: &[f64]) -> [f64; 3] {
        let v = self.conn.reference_value();
        let nxv = self.nabla_reference(x);
        let nyv = self.nabla_reference(y);
        let ryx_v = self.curvature(y, x, &v);
        [
            self.nabla_cartan(y, &nxv, z, w),
            self.nabla_cartan(x, &nyv, z, w),
            self.cartan(&ryx_v, z, w),
        ]
    }
}

/// `R^V(X, Y)Z` at `x`, by differentiating `Γ̃(p) = Γ(p, V(p))`.
pub fn curvature_field(
    m: &MetricField,
    v: &VectorField,
    x_field: &VectorField,
    y_field: &VectorField,
    z_field: &VectorField,
    x: &[f64],
) -> Result<CurvatureEval> {
    let ac = AffineChern::new(m, v, x)?;
    let value = ac.curvature(&x_field.value_at(x)?, &y_field.value_at(x)?, &z_field.value_at(x)?);
    Ok(CurvatureEval {
        sample: TangentSample::new(x.to_vec(), ac.conn.reference_value()),
        context: CurvatureContext::Field(v.clone()),
        value,
    })
}

/// `∇_X∇_Y Z − ∇_Y∇_X Z − ∇_{[X,Y]}Z` evaluated literally, as a cross-check
/// of [`curvature_field`].
pub fn curvature_field_nested(
    m: &MetricField,
    v: &VectorField,
    x_field: &VectorField,
    y_field: &VectorField,
    z_field: &VectorField,
    x: &[f64],
) -> Result<Vec<f64>> {
    let [a, b, c] = curvature_field_nested_terms(m, v, x_field, y_field, z_field, x)?;
    Ok((0..x.len()).map(|k| a[k] - b[k] - c[k]).collect())
}

/// The three terms `∇_X∇_Y Z`, `∇_Y∇_X Z`, `∇_{[X,Y]}Z` of
/// [`curvature_field_nested`].
pub fn curvature_field_nested_terms(
    m: &MetricField,
    v: &VectorField,
    x_field: &VectorField,
    y_field: &VectorField,
    z_field: &VectorField,
    x: &[f64],
) -> Result<[Vec<f64>; 3]> {
    let conn = ReferenceConnection::new(m, v, x)?;
    let (xj, yj, zj) = (x_field.jets_at(x, 2)?, y_field.jets_at(x, 2)?, z_field.jets_at(x, 2)?);
    let val = |j: &[Jet]| j.iter().map(Jet::value).collect::<Vec<_>>();
    let nyz = conn.nabla_field(&yj, &zj);
    let nxz = conn.nabla_field(&xj, &zj);
    let a = conn.nabla(&val(&xj), &nyz);
    let b = conn.nabla(&val(&yj), &nxz);
    let br = crate::connection::lie_bracket(&xj, &yj);
    let c = conn.nabla(&br, &zj);
    Ok([a, b, c])
}

/// `∇^V_X C_V(Y, Z, W)` from its defining formula: the derivative of the
/// scalar `C_V(Y, Z, W)` along `X` minus the three connection terms.
pub fn nabla_cartan(
    m: &MetricField,
    v: &VectorField,
    fields: [&VectorField; 4],
    x: &[f64],
) -> Result<f64> {
    let conn = ReferenceConnection::new(m, v, x)?;
    let n = x.len();
    let [xf, yf, zf, wf] = fields;
    let xv = xf.value_at(x)?;
    let (yj, zj, wj) = (yf.jets_at(x, 1)?, zf.jets_at(x, 1)?, wf.jets_at(x, 1)?);
    let mut scalar = Jet::zero(yj[0].space());
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                scalar += &(&(&conn.cartan[ix3(n, i, j, k)] * &yj[i]) * &(&zj[j] * &wj[k]));
            }
        }
    }
    let deriv: f64 = (0..n).map(|e| xv[e] * scalar.gradient(e)).sum();
    let val = |j: &[Jet]| j.iter().map(Jet::value).collect::<Vec<_>>();
    let (y0, z0, w0) = (val(&yj), val(&zj), val(&wj));
    let ny = conn.nabla(&xv, &yj);
    let nz = conn.nabla(&xv, &zj);
    let nw = conn.nabla(&xv, &wj);
    Ok(deriv - conn.cartan_value(&ny, &z0, &w0) - conn.cartan_value(&y0, &nz, &w0) - conn.cartan_value(&y0, &z0, &nw))
}

/// `B^V(X, Y, Z, W)` at `x`.
pub fn b_tensor(m: &MetricField, v: &VectorField, fields: [&VectorField; 4], x: &[f64]) -> Result<f64> {
    let ac = AffineChern::new(m, v, x)?;
    let vals = fields
        .iter()
        .map(|f| f.value_at(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(ac.b(&vals[0], &vals[1], &vals[2], &vals[3]))
}

/// `(∇_e R)^k_cab` at `[e][k][c][a][b]` flattened, from fourth-order central
/// differences of `R^V` (second derivatives of `Γ̃` are beyond the jet order
/// budget).
pub fn nabla_curvature(m: &MetricField, v: &VectorField, x: &[f64], h: f64) -> Result<Vec<f64>> {
    nabla_curvature_bounded(m, v, x, h).map(|(d, _)| d)
}

/// [`nabla_curvature`] together with the largest single term of each
/// component (same layout).
pub fn nabla_curvature_bounded(m: &MetricField, v: &VectorField, x: &[f64], h: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = x.len();
    let center = AffineChern::new(m, v, x)?;
    let n4 = n.pow(4);
    let mut out = vec![0.0; n * n4];
    let mut bound = vec![0.0f64; n * n4];
    let at = |e: usize, k: f64| -> Result<TensorBlock> {
        let mut p = x.to_vec();
        p[e] += k * h;
        Ok(ReferenceConnection::new(m, v, &p)?.curvature_tensor())
    };
    let gam = |k: usize, i: usize, j: usize| center.conn.gamma_value(k, i, j);
    let r = center.riemann.data();
    for e in 0..n {
        let (m2, m1, p1, p2) = (at(e, -2.0)?, at(e, -1.0)?, at(e, 1.0)?, at(e, 2.0)?);
        for idx in 0..n4 {
            let d = (m2.data()[idx] - 8.0 * m1.data()[idx] + 8.0 * p1.data()[idx] - p2.data()[idx]) / (12.0 * h);
            out[e * n4 + idx] = d;
            bound[e * n4 + idx] = d.abs();
        }
        for k in 0..n {
            for c in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let mut acc = 0.0;
                        let mut big = 0.0f64;
                        for q in 0..n {
                            let terms = [
                                gam(k, e, q) * r[ix4(n, q, c, a, b)],
                                -gam(q, e, c) * r[ix4(n, k, q, a, b)],
                                -gam(q, e, a) * r[ix4(n, k, c, q, b)],
                                -gam(q, e, b) * r[ix4(n, k, c, a, q)],
                            ];
                            for t in terms {
                                acc += t;
                                big = big.max(t.abs());
                            }
                        }
                        let idx = e * n4 + ix4(n, k, c, a, b);
                        out[idx] += acc;
                        bound[idx] = bound[idx].max(big);
                    }
                }
            }
        }
    }
    Ok((out, bound))
}

/// `(∇_E R)(X, Y)Z` from the output of [`nabla_curvature`].
pub fn apply_nabla_curvature(nr: &[f64], n: usize, e: &[f64], x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
    let n4 = n.pow(4);
    let mut out = vec![0.0; n];
    for (p, ep) in e.iter().enumerate() {
        if *ep == 0.0 {
            continue;
        }
        let block = TensorBlock::new(n, vec![Variance::Contravariant, Variance::Covariant, Variance::Covariant, Variance::Covariant], nr[p * n4..(p + 1) * n4].to_vec());
        for (o, c) in out.iter_mut().zip(apply_riemann(&block, x, y, z)) {
            *o += ep * c;
        }
    }
    out
}

/// Largest single term entering `(∇_E R)(X, Y)Z`, from the bound of
/// [`nabla_curvature_bounded`].
pub fn nabla_curvature_bound(bound: &[f64], n: usize, e: &[f64], x: &[f64], y: &[f64], z: &[f64]) -> f64 {
    let n4 = n.pow(4);
    let mut out = 0.0f64;
    for p in 0..n {
        for k in 0..n {
            for c in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let w = (e[p] * x[a] * y[b] * z[c]).abs();
                        out = out.max(bound[p * n4 + ix4(n, k, c, a, b)] * w);
                    }
                }
            }
        }
    }
    out
}

/// hh-curvature `R_j^i_kl` from order-1 Chern jets, stored at `[i][j][k][l]`.
pub fn hh_from_jets(chern: &ChernJets) -> TensorBlock {
    let n = chern.dim();
    let mut out = rank4(n, true);
    let gam = |k: usize, i: usize, j: usize| chern.gamma(k, i, j);
    let dx = |k: usize, i: usize, j: usize, p: usize| chern.gamma_dx(k, i, j, p);
    let dy = |k: usize, i: usize, j: usize, p: usize| chern.gamma_dy(k, i, j, p);
    let nl = |s: usize, j: usize| chern.nonlinear[ix2(n, s, j)].value();
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                for l in 0..n {
                    let mut r = dx(i, j, l, k) - dx(i, j, k, l);
                    for p in 0..n {
                        r += -nl(p, k) * dy(i, j, l, p) + nl(p, l) * dy(i, j, k, p);
                    }
                    for h in 0..n {
                        r += gam(i, h, k) * gam(h, j, l) - gam(i, h, l) * gam(h, j, k);
                    }
                    out.set(&[i, j, k, l], r);
                }
            }
        }
    }
    out
}

/// hh-curvature of the Chern connection at `(x, v)`.
pub fn hh_curvature(m: &MetricField, s: &TangentSample) -> Result<TensorBlock> {
    Ok(hh_from_jets(&ChernJets::compute(m, s, 1)?))
}

/// `R_v(X, Y)Z = X^k Y^l Z^j R_j^i_kl ∂_i`.
pub fn hh_apply(r: &TensorBlock, x: &[f64], y: &[f64], z: &[f64]) -> Vec<f64> {
    let n = r.dim();
    let d = r.data();
    (0..n)
        .map(|i| {
            let mut acc = 0.0;
            for j in 0..n {
                for k in 0..n {
                    for l in 0..n {
                        acc += d[ix4(n, i, j, k, l)] * x[k] * y[l] * z[j];
                    }
                }
            }
            acc
        })
        .collect()
}

/// `D^{γ̇}_γ γ̇` at `t`.
pub fn curve_acceleration(m: &MetricField, curve: &CurvePath, t: f64) -> Result<Vec<f64>> {
    let s = curve.tangent_sample(t)?;
    let a = curve.acceleration(t)?;
    let sp = spray(m, &s.x, &s.v)?;
    Ok(a.iter().zip(&sp).map(|(p, q)| p + q).collect())
}

pub(crate) fn h_from_jets(chern: &ChernJets, acc: &[f64], u: &[f64], w: &[f64]) -> Vec<f64> {
    let n = chern.dim();
    (0..n)
        .map(|k| {
            // symmetrized coefficients keep H(u, w) = H(w, u) bit for bit
            let mut s = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let c = 0.5 * (u[i] * w[j] + u[j] * w[i]);
                    for p in 0..n {
                        s += c * acc[p] * chern.gamma_dy(k, i.min(j), i.max(j), p);
                    }
                }
            }
            s
        })
        .collect()
}

/// `H_γ(u, w) = uⁱ wʲ (D^{γ̇}_γ γ̇)^p ∂Γᵏᵢⱼ/∂y^p(γ̇) ∂_k`.
pub fn h_tensor(m: &MetricField, curve: &CurvePath, t: f64, u: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    let s = curve.tangent_sample(t)?;
    let chern = ChernJets::compute(m, &s, 1)?;
    let acc = curve_acceleration(m, curve, t)?;
    Ok(h_from_jets(&chern, &acc, u, w))
}

/// `R^γ(γ̇, u)w = R_{γ̇}(γ̇, u)w + H_γ(u, w)`.
pub fn r_along_curve(m: &MetricField, curve: &CurvePath, t: f64, u: &[f64], w: &[f64]) -> Result<CurvatureEval> {
    let s = curve.tangent_sample(t)?;
    let chern = ChernJets::compute(m, &s, 1)?;
    let acc = curve_acceleration(m, curve, t)?;
    let hh = hh_apply(&hh_from_jets(&chern), &s.v, u, w);
    let h = h_from_jets(&chern, &acc, u, w);
    Ok(CurvatureEval {
        sample: s,
        context: CurvatureContext::Curve { t },
        value: hh.iter().zip(&h).map(|(a, b)| a + b).collect(),
    })
}

/// `R^γ(γ̇, u)w` directly as `D_{γ_s} D_{β_t} W − D_{β_t} D_{γ_s} W` for the
/// variation `Λ(τ, s) = γ(τ) + s U(τ)` with `U` parallel along `γ` to first
/// order, `U(t) = u`, and `W ≡ w`; every covariant derivative uses `Λ_t` as
/// reference.
pub fn r_along_curve_direct(m: &MetricField, curve: &CurvePath, t: f64, u: &[f64], w: &[f64]) -> Result<Vec<f64>> {
    let s = curve.tangent_sample(t)?;
    let chern = ChernJets::compute(m, &s, 1)?;
    let n = s.dim();
    // U' = −Γ(u, γ̇)
    let du: Vec<f64> = chern.contract(u, &s.v).into_iter().map(|c| -c).collect();
    variation_curvature(&chern, curve, t, &|tau: &Jet| {
        (0..n).map(|k| &(&(tau - t) * du[k]) + u[k]).collect()
    }, w)
}

/// Curvature of the variation `Λ(τ, s) = γ(τ) + s U(τ)` applied to `W ≡ w`,
/// for a transverse field `U` given as jets in `τ`.
pub fn variation_curvature(
    chern: &ChernJets,
    curve: &CurvePath,
    t: f64,
    transverse: &dyn Fn(&Jet) -> Vec<Jet>,
    w: &[f64],
) -> Result<Vec<f64>> {
    let n = chern.dim();
    let space = JetSpace::get(2, 2);
    let tau = Jet::variable(&space, 0, t);
    let sigma = Jet::variable(&space, 1, 0.0);
    let pos = curve.eval_jets(&tau)?;
    let ut = transverse(&tau);
    let lam: Vec<Jet> = (0..n).map(|k| &pos[k] + &(&sigma * &ut[k])).collect();
    let lt: Vec<Jet> = lam.iter().map(|c| c.differentiate(0)).collect();
    let ls: Vec<Jet> = lam.iter().map(|c| c.differentiate(1)).collect();
    let mut inner: Vec<Jet> = lam.iter().map(|c| c.truncate(1)).collect();
    inner.extend(lt.iter().cloned());
    let gamma: Vec<Jet> = chern.christoffel.iter().map(|g| g.compose(&inner)).collect();
    let one = lt[0].space().clone();
    let contract = |a: &[Jet], b: &[Jet]| -> Vec<Jet> {
        (0..n)
            .map(|k| {
                let mut acc = Jet::zero(&one);
                for i in 0..n {
                    for j in 0..n {
                        acc += &(&a[i] * &b[j]) * &gamma[ix3(n, k, i, j)];
                    }
                }
                acc
            })
            .collect()
    };
    let wj: Vec<Jet> = w.iter().map(|&c| Jet::constant(&one, c)).collect();
    // D_{β_t} W and D_{γ_s} W (W constant)
    let a = contract(&wj, &ls);
    let b = contract(&wj, &lt);
    let val = |j: &[Jet]| j.iter().map(Jet::value).collect::<Vec<_>>();
    let (lt0, ls0, a0, b0) = (val(&lt), val(&ls), val(&a), val(&b));
    let g0 = |k: usize, i: usize, j: usize| gamma[ix3(n, k, i, j)].value();
    Ok((0..n)
        .map(|k| {
            let mut ds_a = a[k].gradient(0);
            let mut db_b = b[k].gradient(1);
            for i in 0..n {
                for j in 0..n {
                    ds_a += a0[i] * lt0[j] * g0(k, i, j);
                    db_b += b0[i] * ls0[j] * g0(k, i, j);
                }
            }
            ds_a - db_b
        })
        .collect())
}

/// The geodesic through `(x, v)` to second order, `x + tv − t²/2 Γ(v, v)`,
/// on `[-1, 1]`; it has zero acceleration at `t = 0`.
pub(crate) fn local_geodesic(m: &MetricField, s: &TangentSample) -> Result<CurvePath> {
    let sp = spray(m, &s.x, &s.v)?;
    let half: Vec<f64> = sp.iter().map(|c| -0.5 * c).collect();
    CurvePath::polynomial(0.0, &[s.x.clone(), s.v.clone(), half], -1.0, 1.0)
}

fn flag_ratio(m: &MetricField, s: &TangentSample, u: &[f64], w: &[f64]) -> Result<f64> {
    m.check_domain(&s.x, &s.v)?;
    let fund = crate::geometry::fundamental_tensor(m, s)?;
    let g = |a: &[f64], b: &[f64]| {
        let n = a.len();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += fund.g.get(&[i, j]) * a[i] * b[j];
            }
        }
        acc
    };
    let l = g(&s.v, &s.v);
    let (a, b) = (l * g(u, w), g(&s.v, u) * g(&s.v, w));
    let den = a - b;
    let threshold = 1e-10 * (a.abs() + b.abs());
    if !(den.abs() > threshold) {
        return Err(Error::DegenerateFlag {
            denominator: den,
            threshold,
        });
    }
    let geo = local_geodesic(m, s)?;
    let r = r_along_curve(m, &geo, 0.0, u, w)?;
    Ok(g(&r.value, &s.v) / den)
}

/// Flag curvature `K_v(u)` of the flag `span{v, u}` with flagpole `v`.
pub fn flag_curvature(m: &MetricField, s: &TangentSample, u: &[f64]) -> Result<f64> {
    flag_ratio(m, s, u, u)
}

/// Predecessor of the flag curvature `K_v(u, w)`.
pub fn flag_curvature_predecessor(m: &MetricField, s: &TangentSample, u: &[f64], w: &[f64]) -> Result<f64> {
    flag_ratio(m, s, u, w)
}
