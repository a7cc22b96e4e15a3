//! Christoffel symbols of the Chern connection and the affine connections
//! `∇^V` they induce on the chart.
//!
//! [`ChernJets`] evaluates, at a bundle point `(x, y)`, the Levi-Civita-like
//! symbols `γ_kji`, the nonlinear connection `N^s_j` and the Christoffel
//! symbols `Γ^s_ji` from their explicit formulas in terms of `g`, `∂g/∂x`
//! and the Cartan tensor. Carried as order-1 jets they also give
//! `∂Γ/∂x` and `∂Γ/∂y`.
//!
//! [`ReferenceConnection`] composes those jets with a chart field `V`,
//! giving the symbols `Γ̃(p) = Γ(p, V(p))` of `∇^V` together with their
//! first partials around a point.

mod field;

pub use field::VectorField;

use serde::Serialize;

use crate::calculus::{Jet, JetSpace};
use crate::error::{Error, Result};
use crate::geometry::{ix2, ix3, jet_inverse, MetricJets, TensorBlock, Variance};
use crate::metrics::{MetricField, TangentSample};

/// Connection data as jets over the bundle coordinates `(x, y)`.
#[derive(Debug, Clone)]
pub struct ChernJets {
    pub metric: MetricJets,
    /// `g^ij`.
    pub g_inv: Vec<Jet>,
    /// `γ_kji` at `[ix3(k, j, i)]`, first index lowered.
    pub gamma_lower: Vec<Jet>,
    /// `N^s_j` at `[ix2(s, j)]`.
    pub nonlinear: Vec<Jet>,
    /// `Γ^s_ji` at `[ix3(s, j, i)]`.
    pub christoffel: Vec<Jet>,
}

impl ChernJets {
    pub fn compute(m: &MetricField, s: &TangentSample, order: usize) -> Result<Self> {
        let metric = MetricJets::compute(m, s, order)?;
        let n = metric.dim();
        let space = metric.g[0].space().clone();
        let zero = Jet::zero(&space);
        let g_inv = jet_inverse(n, &metric.g)?;
        let dgx = &metric.dg_dx;
        let c = &metric.cartan;

        let mut gamma_lower = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let t = &(&dgx[ix3(n, k, j, i)] - &dgx[ix3(n, j, i, k)]) + &dgx[ix3(n, i, k, j)];
                    gamma_lower.push(t * 0.5);
                }
            }
        }
        let raise = |lower: &[Jet]| -> Vec<Jet> {
            let mut out = Vec::with_capacity(n * n * n);
            for s in 0..n {
                for j in 0..n {
                    for i in 0..n {
                        let mut acc = zero.clone();
                        for k in 0..n {
                            acc += &g_inv[ix2(n, s, k)] * &lower[ix3(n, k, j, i)];
                        }
                        out.push(acc);
                    }
                }
            }
            out
        };
        let gamma_up = raise(&gamma_lower);

        let y = metric.tangent_coordinates();
        // G^p = y^l y^i γ^p_li
        let spray: Vec<Jet> = (0..n)
            .map(|p| {
                let mut acc = zero.clone();
                for l in 0..n {
                    for i in 0..n {
                        acc += &(&y[l] * &y[i]) * &gamma_up[ix3(n, p, l, i)];
                    }
                }
                acc
            })
            .collect();
        // h_j^s = g^{ks} C_pjk G^p
        let mut nonlinear = Vec::with_capacity(n * n);
        for s in 0..n {
            for j in 0..n {
                let mut acc = zero.clone();
                for i in 0..n {
                    acc += &y[i] * &gamma_up[ix3(n, s, j, i)];
                }
                for k in 0..n {
                    let mut inner = zero.clone();
                    for p in 0..n {
                        inner += &spray[p] * &c[ix3(n, p, j, k)];
                    }
                    acc -= &(&g_inv[ix2(n, k, s)] * &inner);
                }
                nonlinear.push(acc);
            }
        }

        // T_kji = −N^p_i C_pjk − N^p_j C_pki + N^p_k C_pij
        let mut t_lower = Vec::with_capacity(n * n * n);
        for k in 0..n {
            for j in 0..n {
                for i in 0..n {
                    let mut acc = zero.clone();
                    for p in 0..n {
                        acc -= &(&nonlinear[ix2(n, p, i)] * &c[ix3(n, p, j, k)]);
                        acc -= &(&nonlinear[ix2(n, p, j)] * &c[ix3(n, p, k, i)]);
                        acc += &(&nonlinear[ix2(n, p, k)] * &c[ix3(n, p, i, j)]);
                    }
                    t_lower.push(acc);
                }
            }
        }
        let correction = raise(&t_lower);
        let christoffel: Vec<Jet> = gamma_up
            .iter()
            .zip(&correction)
            .map(|(a, b)| a + b)
            .collect();

        Ok(ChernJets {
            metric,
            g_inv,
            gamma_lower,
            nonlinear,
            christoffel,
        })
    }

    pub fn dim(&self) -> usize {
        self.metric.dim()
    }

    pub fn order(&self) -> usize {
        self.metric.order
    }

    /// `Γ^k_ij` at the base point.
    pub fn gamma(&self, k: usize, i: usize, j: usize) -> f64 {
        self.christoffel[ix3(self.dim(), k, i, j)].value()
    }

    /// `∂Γ^k_ij/∂x^p`; needs order 1.
    pub fn gamma_dx(&self, k: usize, i: usize, j: usize, p: usize) -> f64 {
        assert!(self.order() >= 1);
        self.christoffel[ix3(self.dim(), k, i, j)].gradient(p)
    }

    /// `∂Γ^k_ij/∂y^p`; needs order 1.
    pub fn gamma_dy(&self, k: usize, i: usize, j: usize, p: usize) -> f64 {
        assert!(self.order() >= 1);
        let n = self.dim();
        self.christoffel[ix3(n, k, i, j)].gradient(n + p)
    }

    /// `N^s_j` at the base point.
    pub fn nonlinear_value(&self, s: usize, j: usize) -> f64 {
        self.nonlinear[ix2(self.dim(), s, j)].value()
    }

    /// `Γ(a, b)^k = Γ^k_ij a^i b^j` at the base point.
    pub fn contract(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|k| {
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        acc += self.gamma(k, i, j) * a[i] * b[j];
                    }
                }
                acc
            })
            .collect()
    }

    /// The Christoffel symbols with every other piece, as values.
    pub fn evaluate(&self) -> Result<ChristoffelEval> {
        let n = self.dim();
        let vals = |v: &[Jet]| v.iter().map(Jet::value).collect::<Vec<_>>();
        let gamma = TensorBlock::new(
            n,
            vec![Variance::Contravariant, Variance::Covariant, Variance::Covariant],
            vals(&self.christoffel),
        )
        .with_symmetry(vec![1, 2]);
        // Symmetry in the lower indices is a consequence of the formulas, not imposed.
        let defect = gamma.symmetry_defect();
        if defect > 1e-8 {
            return Err(Error::Invalid(format!(
                "Christoffel symbols not symmetric in the lower indices (defect {defect:e})"
            )));
        }
        Ok(ChristoffelEval {
            sample: self.metric.sample.clone(),
            gamma_lc: TensorBlock::covariant(n, 3, vals(&self.gamma_lower)).with_symmetry(vec![1, 2]),
            nonlinear: TensorBlock::new(
                n,
                vec![Variance::Contravariant, Variance::Covariant],
                vals(&self.nonlinear),
            ),
            gamma,
        })
    }
}

/// Christoffel symbols of the Chern connection at a tangent sample.
#[derive(Debug, Clone, Serialize)]
pub struct ChristoffelEval {
    pub sample: TangentSample,
    /// `γ_kji`, first index lowered.
    pub gamma_lc: TensorBlock,
    /// `N^s_j`.
    pub nonlinear: TensorBlock,
    /// `Γ^s_ji`.
    pub gamma: TensorBlock,
}

/// Christoffel symbols, nonlinear connection and `γ_kji` at `(x, v)`.
pub fn christoffel(m: &MetricField, s: &TangentSample) -> Result<ChristoffelEval> {
    ChernJets::compute(m, s, 0)?.evaluate()
}

/// `Γ^k_ij(x, v) vⁱ vʲ`, which equals `γ^k_ij vⁱ vʲ` and so needs no Cartan
/// terms. The geodesic equation is `ẍ = −spray(x, ẋ)`.
pub fn spray(m: &MetricField, x: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let mj = MetricJets::compute(m, &TangentSample::new(x.to_vec(), v.to_vec()), 0)?;
    let n = x.len();
    let g: Vec<f64> = mj.g.iter().map(Jet::value).collect();
    // γ_l(v, v) = ∂_i g_lj vⁱvʲ − ½ ∂_l g_ij vⁱvʲ
    let rhs: Vec<f64> = (0..n)
        .map(|l| {
            let mut acc = 0.0;
            for i in 0..n {
                for j in 0..n {
                    let d = mj.dg_dx[ix3(n, l, j, i)].value() - 0.5 * mj.dg_dx[ix3(n, i, j, l)].value();
                    acc += d * v[i] * v[j];
                }
            }
            acc
        })
        .collect();
    let gm = nalgebra::DMatrix::from_row_slice(n, n, &g);
    let sol = gm
        .lu()
        .solve(&nalgebra::DVector::from_vec(rhs))
        .ok_or(Error::Degenerate { condition: f64::INFINITY })?;
    Ok(sol.iter().copied().collect())
}

/// `(∇^V_X Y)(x) = Xⁱ ∂ᵢYᵏ + XⁱYʲ Γᵏᵢⱼ(x, V(x))`.
pub fn nabla(
    m: &MetricField,
    v: &VectorField,
    x_field: &VectorField,
    y_field: &VectorField,
    x: &[f64],
) -> Result<Vec<f64>> {
    let vx = v.value_at(x)?;
    let chern = ChernJets::compute(m, &TangentSample::new(x.to_vec(), vx), 0)?;
    let xv = x_field.value_at(x)?;
    let yj = y_field.jets_at(x, 1)?;
    let yv: Vec<f64> = yj.iter().map(Jet::value).collect();
    let mut out = chern.contract(&xv, &yv);
    for (k, comp) in yj.iter().enumerate() {
        for (i, xi) in xv.iter().enumerate() {
            out[k] += xi * comp.gradient(i);
        }
    }
    Ok(out)
}

/// The affine connection `∇^V` around a point, as jets of `Γ̃(p) = Γ(p, V(p))`
/// (and of `g̃`, `C̃`) in the chart offsets `ξ = p − x0`.
#[derive(Debug, Clone)]
pub struct ReferenceConnection {
    pub point: Vec<f64>,
    /// `V(x0 + ξ)`, order 2.
    pub reference: Vec<Jet>,
    /// `Γ̃^k_ij` at `[ix3(k, i, j)]`, order 1.
    pub gamma: Vec<Jet>,
    /// `g̃_ij`, order 1.
    pub g: Vec<Jet>,
    /// `C̃_ijk`, order 1.
    pub cartan: Vec<Jet>,
    /// The bundle jets at `(x0, V(x0))` the above were composed from.
    pub chern: ChernJets,
}

impl ReferenceConnection {
    pub fn new(m: &MetricField, v: &VectorField, x: &[f64]) -> Result<Self> {
        let reference = v.jets_at(x, 2)?;
        Self::from_reference_jets(m, x, reference)
    }

    /// Build from jets of the reference field over `n` chart offsets.
    pub fn from_reference_jets(m: &MetricField, x: &[f64], reference: Vec<Jet>) -> Result<Self> {
        let n = x.len();
        let v0: Vec<f64> = reference.iter().map(Jet::value).collect();
        let chern = ChernJets::compute(m, &TangentSample::new(x.to_vec(), v0), 1)?;
        let space = reference[0].space().clone();
        let mut inner: Vec<Jet> = (0..n).map(|i| Jet::variable(&space, i, x[i])).collect();
        inner.extend(reference.iter().cloned());
        let compose = |v: &[Jet]| v.iter().map(|j| j.compose(&inner)).collect::<Vec<_>>();
        Ok(ReferenceConnection {
            point: x.to_vec(),
            gamma: compose(&chern.christoffel),
            g: compose(&chern.metric.g),
            cartan: compose(&chern.metric.cartan),
            reference,
            chern,
        })
    }

    pub fn dim(&self) -> usize {
        self.point.len()
    }

    pub fn space(&self) -> &std::sync::Arc<JetSpace> {
        self.reference[0].space()
    }

    pub fn reference_value(&self) -> Vec<f64> {
        self.reference.iter().map(Jet::value).collect()
    }

    pub fn gamma_value(&self, k: usize, i: usize, j: usize) -> f64 {
        self.gamma[ix3(self.dim(), k, i, j)].value()
    }

    /// `∂Γ̃^k_ij/∂x^p`, the total derivative through `V`.
    pub fn gamma_partial(&self, k: usize, i: usize, j: usize, p: usize) -> f64 {
        self.gamma[ix3(self.dim(), k, i, j)].gradient(p)
    }

    pub fn g_value(&self, a: &[f64], b: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                acc += self.g[ix2(n, i, j)].value() * a[i] * b[j];
            }
        }
        acc
    }

    pub fn cartan_value(&self, a: &[f64], b: &[f64], c: &[f64]) -> f64 {
        let n = self.dim();
        let mut acc = 0.0;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    acc += self.cartan[ix3(n, i, j, k)].value() * a[i] * b[j] * c[k];
                }
            }
        }
        acc
    }

    /// `Γ̃(a, b)^k = Γ̃^k_ij aⁱ bʲ` at the point.
    pub fn gamma_contract(&self, a: &[f64], b: &[f64]) -> Vec<f64> {
        let n = self.dim();
        (0..n)
            .map(|k| {
                let mut acc = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        acc += self.gamma_value(k, i, j) * a[i] * b[j];
                    }
                }
                acc
            })
            .collect()
    }

    /// `∇_X Y` at the point, for a vector `X` and field jets `Y` of order ≥ 1.
    pub fn nabla(&self, x: &[f64], y: &[Jet]) -> Vec<f64> {
        let n = self.dim();
        let yv: Vec<f64> = y.iter().map(Jet::value).collect();
        let mut out = self.gamma_contract(x, &yv);
        for k in 0..n {
            for i in 0..n {
                out[k] += x[i] * y[k].gradient(i);
            }
        }
        out
    }

    /// `∇_X V` at the point.
    pub fn nabla_reference(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        let v0 = self.reference_value();
        let mut out = self.gamma_contract(x, &v0);
        for k in 0..n {
            for i in 0..n {
                out[k] += x[i] * self.reference[k].gradient(i);
            }
        }
        out
    }

    /// `∇_X Y` as a field around the point. The result has one order less
    /// than the lower of the inputs (and at most order 1).
    pub fn nabla_field(&self, x: &[Jet], y: &[Jet]) -> Vec<Jet> {
        let n = self.dim();
        let order = x[0].order().min(y[0].order() - 1).min(1);
        let x: Vec<Jet> = x.iter().map(|j| j.truncate(order)).collect();
        let gamma: Vec<Jet> = self.gamma.iter().map(|j| j.truncate(order)).collect();
        let dy: Vec<Vec<Jet>> = y
            .iter()
            .map(|c| (0..n).map(|i| c.differentiate(i).truncate(order)).collect())
            .collect();
        let yt: Vec<Jet> = y.iter().map(|j| j.truncate(order)).collect();
        (0..n)
            .map(|k| {
                let mut acc = Jet::zero(x[0].space());
                for i in 0..n {
                    acc += &x[i] * &dy[k][i];
                    for j in 0..n {
                        acc += &(&x[i] * &yt[j]) * &gamma[ix3(n, k, i, j)];
                    }
                }
                acc
            })
            .collect()
    }

    /// `R^k_cab` with `R(∂_a, ∂_b)∂_c = R^k_cab ∂_k`, stored at
    /// `[((k n + c) n + a) n + b]`.
    pub fn curvature_tensor(&self) -> TensorBlock {
        let n = self.dim();
        let mut out = TensorBlock::zeros(
            n,
            vec![
                Variance::Contravariant,
                Variance::Covariant,
                Variance::Covariant,
                Variance::Covariant,
            ],
        );
        for k in 0..n {
            for c in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let mut r = self.gamma_partial(k, b, c, a) - self.gamma_partial(k, a, c, b);
                        for m in 0..n {
                            r += self.gamma_value(m, b, c) * self.gamma_value(k, a, m)
                                - self.gamma_value(m, a, c) * self.gamma_value(k, b, m);
                        }
                        out.set(&[k, c, a, b], r);
                    }
                }
            }
        }
        out
    }

    /// Largest single term of each component of [`Self::curvature_tensor`],
    /// in absolute value; the scale against which its roundoff is judged.
    pub fn curvature_term_bound(&self) -> TensorBlock {
        let n = self.dim();
        let mut out = TensorBlock::zeros(
            n,
            vec![
                Variance::Contravariant,
                Variance::Covariant,
                Variance::Covariant,
                Variance::Covariant,
            ],
        );
        for k in 0..n {
            for c in 0..n {
                for a in 0..n {
                    for b in 0..n {
                        let mut r = self.gamma_partial(k, b, c, a).abs().max(self.gamma_partial(k, a, c, b).abs());
                        for m in 0..n {
                            r = r
                                .max((self.gamma_value(m, b, c) * self.gamma_value(k, a, m)).abs())
                                .max((self.gamma_value(m, a, c) * self.gamma_value(k, b, m)).abs());
                        }
                        out.set(&[k, c, a, b], r);
                    }
                }
            }
        }
        out
    }

    /// `(∇_e C)_abc` at `[((e n + a) n + b) n + c]`.
    pub fn nabla_cartan_tensor(&self) -> TensorBlock {
        let n = self.dim();
        let mut out = TensorBlock::covariant(n, 4, vec![0.0; n.pow(4)]);
        let c = |a: usize, b: usize, d: usize| self.cartan[ix3(n, a, b, d)].value();
        for e in 0..n {
            for a in 0..n {
                for b in 0..n {
                    for d in 0..n {
                        let mut v = self.cartan[ix3(n, a, b, d)].gradient(e);
                        for m in 0..n {
                            v -= self.gamma_value(m, e, a) * c(m, b, d)
                                + self.gamma_value(m, e, b) * c(a, m, d)
                                + self.gamma_value(m, e, d) * c(a, b, m);
                        }
                        out.set(&[e, a, b, d], v);
                    }
                }
            }
        }
        out
    }
}

/// `[X, Y]` at the point from field jets of order ≥ 1.
pub fn lie_bracket(x: &[Jet], y: &[Jet]) -> Vec<f64> {
    let n = x.len();
    (0..n)
        .map(|k| {
            let mut acc = 0.0;
            for i in 0..n {
                acc += x[i].value() * y[k].gradient(i) - y[i].value() * x[k].gradient(i);
            }
            acc
        })
        .collect()
}
