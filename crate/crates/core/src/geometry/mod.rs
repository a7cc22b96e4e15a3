//! Fundamental tensor, Cartan tensor and their partials at a tangent sample.
//!
//! The sample-level operations ([`fundamental_tensor`], [`cartan_tensor`],
//! [`tensor_partials`]) each run their own jet evaluation of `L`, seeded in
//! exactly the variables they need. [`MetricJets`] bundles the same objects
//! as jets over all `2n` coordinates `(x, y)` of the tangent bundle, which is
//! what the connection and curvature code differentiate further.

mod tensor;

pub use tensor::{TensorBlock, Variance};

use nalgebra::{DMatrix, SymmetricEigen};

use crate::calculus::{Jet, JetSpace};
use crate::error::{Error, Result};
use crate::metrics::{MetricField, TangentSample};

/// Condition number of `g` above which a sample counts as degenerate.
pub const MAX_CONDITION: f64 = 1e10;

#[inline]
pub(crate) fn ix2(n: usize, a: usize, b: usize) -> usize {
    a * n + b
}

#[inline]
pub(crate) fn ix3(n: usize, a: usize, b: usize, c: usize) -> usize {
    (a * n + b) * n + c
}

/// `g_v` with its determinant and condition number.
#[derive(Debug, Clone)]
pub struct FundamentalTensor {
    pub g: TensorBlock,
    pub det: f64,
    pub condition: f64,
}

/// Ratio of the largest to the smallest eigenvalue magnitude of a symmetric
/// matrix given row-major.
pub fn condition_number(n: usize, entries: &[f64]) -> f64 {
    let m = DMatrix::from_row_slice(n, n, entries);
    let eig = SymmetricEigen::new(m);
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), l| (lo.min(l.abs()), hi.max(l.abs())));
    if lo == 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

fn tangent_seeds(s: &TangentSample, order: usize) -> (Vec<Jet>, Vec<Jet>) {
    let n = s.dim();
    let space = JetSpace::get(n, order);
    let x = s.x.iter().map(|&c| Jet::constant(&space, c)).collect();
    let v = s
        .v
        .iter()
        .enumerate()
        .map(|(i, &c)| Jet::variable(&space, i, c))
        .collect();
    (x, v)
}

fn bundle_seeds(s: &TangentSample, order: usize) -> (Vec<Jet>, Vec<Jet>) {
    let n = s.dim();
    let space = JetSpace::get(2 * n, order);
    let x = (0..n).map(|i| Jet::variable(&space, i, s.x[i])).collect();
    let v = (0..n).map(|i| Jet::variable(&space, n + i, s.v[i])).collect();
    (x, v)
}

/// `g_ij = ½ ∂²L/∂vⁱ∂vʲ`, rejected when its condition number exceeds
/// [`MAX_CONDITION`].
pub fn fundamental_tensor(m: &MetricField, s: &TangentSample) -> Result<FundamentalTensor> {
    m.check_domain(&s.x, &s.v)?;
    let n = s.dim();
    let (x, v) = tangent_seeds(s, 2);
    let l = m.eval_jet(&x, &v)?;
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mut mi = vec![0u8; n];
            mi[i] += 1;
            mi[j] += 1;
            data[ix2(n, i, j)] = 0.5 * l.derivative_value(&mi)?;
        }
    }
    let condition = condition_number(n, &data);
    if !(condition <= MAX_CONDITION) {
        return Err(Error::Degenerate { condition });
    }
    let det = DMatrix::from_row_slice(n, n, &data).determinant();
    Ok(FundamentalTensor {
        g: TensorBlock::covariant(n, 2, data).with_symmetry(vec![0, 1]),
        det,
        condition,
    })
}

/// `C_ijk = ¼ ∂³L/∂vⁱ∂vʲ∂vᵏ`, from one order-3 jet seeded in all of `v`.
pub fn cartan_tensor(m: &MetricField, s: &TangentSample) -> Result<TensorBlock> {
    m.check_domain(&s.x, &s.v)?;
    let n = s.dim();
    let (x, v) = tangent_seeds(s, 3);
    let l = m.eval_jet(&x, &v)?;
    let mut data = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut mi = vec![0u8; n];
                mi[i] += 1;
                mi[j] += 1;
                mi[k] += 1;
                data[ix3(n, i, j, k)] = 0.25 * l.derivative_value(&mi)?;
            }
        }
    }
    Ok(TensorBlock::covariant(n, 3, data).with_symmetry(vec![0, 1, 2]))
}

/// `∂g_ij/∂x^k` and `∂g_ij/∂y^l`.
#[derive(Debug, Clone)]
pub struct TensorPartials {
    /// Axes `(i, j, k)`.
    pub dg_dx: TensorBlock,
    /// Axes `(i, j, l)`.
    pub dg_dy: TensorBlock,
}

/// Partials of the fundamental tensor from an order-3 jet over `(x, y)`.
pub fn tensor_partials(m: &MetricField, s: &TangentSample) -> Result<TensorPartials> {
    m.check_domain(&s.x, &s.v)?;
    let n = s.dim();
    let (x, v) = bundle_seeds(s, 3);
    let l = m.eval_jet(&x, &v)?;
    let mut dx = vec![0.0; n * n * n];
    let mut dy = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                let mut mi = vec![0u8; 2 * n];
                mi[n + i] += 1;
                mi[n + j] += 1;
                mi[k] += 1;
                dx[ix3(n, i, j, k)] = 0.5 * l.derivative_value(&mi)?;
                mi[k] -= 1;
                mi[n + k] += 1;
                dy[ix3(n, i, j, k)] = 0.5 * l.derivative_value(&mi)?;
            }
        }
    }
    Ok(TensorPartials {
        dg_dx: TensorBlock::covariant(n, 3, dx).with_symmetry(vec![0, 1]),
        dg_dy: TensorBlock::covariant(n, 3, dy).with_symmetry(vec![0, 1, 2]),
    })
}

/// Metric data as jets over the bundle coordinates `(x¹..xⁿ, y¹..yⁿ)` around
/// a sample, truncated at `order` (0 for values, 1 to carry first partials).
#[derive(Debug, Clone)]
pub struct MetricJets {
    pub sample: TangentSample,
    pub order: usize,
    pub lagrangian: Jet,
    /// `g_ij`, row-major.
    pub g: Vec<Jet>,
    /// `∂g_ij/∂x^k` at `[ix3(i, j, k)]`.
    pub dg_dx: Vec<Jet>,
    /// `C_ijk`.
    pub cartan: Vec<Jet>,
}

impl MetricJets {
    pub fn compute(m: &MetricField, s: &TangentSample, order: usize) -> Result<Self> {
        assert!(order <= 1, "metric jets carry at most one extra derivative");
        m.check_domain(&s.x, &s.v)?;
        let n = s.dim();
        let (x, v) = bundle_seeds(s, order + 3);
        let l = m.eval_jet(&x, &v)?;
        let ly: Vec<Jet> = (0..n).map(|i| l.differentiate(n + i)).collect();
        let mut lyy = vec![None; n * n];
        for i in 0..n {
            for j in i..n {
                let d = ly[i].differentiate(n + j);
                lyy[ix2(n, i, j)] = Some(d.clone());
                lyy[ix2(n, j, i)] = Some(d);
            }
        }
        let lyy: Vec<Jet> = lyy.into_iter().map(|j| j.expect("filled")).collect();
        let g: Vec<Jet> = lyy.iter().map(|j| (j * 0.5).truncate(order)).collect();

        let check = g.iter().map(Jet::value).collect::<Vec<_>>();
        let condition = condition_number(n, &check);
        if !(condition <= MAX_CONDITION) {
            return Err(Error::Degenerate { condition });
        }

        let mut dg_dx = Vec::with_capacity(n * n * n);
        let mut cartan = vec![None; n * n * n];
        for i in 0..n {
            for j in 0..n {
                let base = &lyy[ix2(n, i, j)];
                for k in 0..n {
                    dg_dx.push(base.differentiate(k) * 0.5);
                }
            }
        }
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let c = lyy[ix2(n, i, j)].differentiate(n + k) * 0.25;
                    for (a, b, d) in [(i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)] {
                        cartan[ix3(n, a, b, d)] = Some(c.clone());
                    }
                }
            }
        }
        Ok(MetricJets {
            sample: s.clone(),
            order,
            lagrangian: l.truncate(order),
            g,
            dg_dx,
            cartan: cartan.into_iter().map(|c| c.expect("filled")).collect(),
        })
    }

    pub fn dim(&self) -> usize {
        self.sample.dim()
    }

    /// Jets of the tangent coordinates `y^i` in the same space.
    pub fn tangent_coordinates(&self) -> Vec<Jet> {
        let n = self.dim();
        let space = self.g[0].space().clone();
        (0..n)
            .map(|i| Jet::variable(&space, n + i, self.sample.v[i]))
            .collect()
    }
}

/// Inverse of a row-major jet matrix by Gauss–Jordan elimination with
/// partial pivoting on the constant terms.
pub fn jet_inverse(n: usize, a: &[Jet]) -> Result<Vec<Jet>> {
    let space = a[0].space().clone();
    let mut m: Vec<Jet> = a.to_vec();
    let mut inv: Vec<Jet> = (0..n * n)
        .map(|k| Jet::constant(&space, if k / n == k % n { 1.0 } else { 0.0 }))
        .collect();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| {
                m[ix2(n, p, col)]
                    .value()
                    .abs()
                    .total_cmp(&m[ix2(n, q, col)].value().abs())
            })
            .expect("non-empty");
        if m[ix2(n, pivot, col)].value() == 0.0 {
            return Err(Error::Degenerate {
                condition: f64::INFINITY,
            });
        }
        if pivot != col {
            for c in 0..n {
                m.swap(ix2(n, pivot, c), ix2(n, col, c));
                inv.swap(ix2(n, pivot, c), ix2(n, col, c));
            }
        }
        let r = m[ix2(n, col, col)].recip();
        for c in 0..n {
            m[ix2(n, col, c)] = &m[ix2(n, col, c)] * &r;
            inv[ix2(n, col, c)] = &inv[ix2(n, col, c)] * &r;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let f = m[ix2(n, row, col)].clone();
            if f.max_abs() == 0.0 {
                continue;
            }
            for c in 0..n {
                let dm = &f * &m[ix2(n, col, c)];
                m[ix2(n, row, c)] -= &dm;
                let di = &f * &inv[ix2(n, col, c)];
                inv[ix2(n, row, c)] -= &di;
            }
        }
    }
    Ok(inv)
}
