//! `R^V(V, U)W` along a curve for extensions built in coordinates adapted to
//! `V`: a chart `ξ ↦ Φ(ξ)` with `Φ(ξ¹, 0) = γ(t + ξ¹)`, in which `V = ∂_ξ¹`
//! and `U`, `W` have constant coefficients.

use nalgebra::{DMatrix, DVector};

use super::AffineChern;
use crate::connection::VectorField;
use crate::curves::CurvePath;
use crate::error::{Error, Result};
use crate::metrics::expr::{Expr, Var};
use crate::metrics::MetricField;

/// `Φ(ξ) = γ(t + ξ¹) + Σ_a ξ^{a+1} (frame_a + ξ¹ frame_rate_a)
/// + ½ Σ_{a,b} ξ^{a+1} ξ^{b+1} bend_ab`, for `a, b` over the `n − 1`
/// transverse directions.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedExtension {
    pub frame: Vec<Vec<f64>>,
    pub frame_rate: Vec<Vec<f64>>,
    /// Symmetric in the two outer indices.
    pub bend: Vec<Vec<Vec<f64>>>,
}

impl AdaptedExtension {
    /// The chart map over `x1..xn` (the adapted coordinates).
    pub fn chart_map(&self, curve: &CurvePath, t: f64) -> Result<Vec<Expr>> {
        let path = curve
            .exprs()
            .ok_or_else(|| Error::Invalid("adapted extensions need a closed-form curve".into()))?;
        let n = path.len();
        if self.frame.len() + 1 != n || self.frame_rate.len() + 1 != n || self.bend.len() + 1 != n {
            return Err(Error::DimMismatch {
                expected: n - 1,
                found: self.frame.len(),
            });
        }
        let xi = |i: usize| Expr::var(Var::X(i));
        Ok((0..n)
            .map(|k| {
                let shifted = path[k].substitute(&|v| match v {
                    Var::T => Some(Expr::num(t) + xi(0)),
                    _ => None,
                });
                let mut e = shifted;
                for a in 0..n - 1 {
                    let col = Expr::num(self.frame[a][k]) + Expr::num(self.frame_rate[a][k]) * xi(0);
                    e = e + xi(a + 1) * col;
                    for b in 0..n - 1 {
                        e = e + Expr::num(0.5 * self.bend[a][b][k]) * xi(a + 1) * xi(b + 1);
                    }
                }
                e
            })
            .collect())
    }
}

/// `R^V(V, U)W` at `γ(t)` in the original chart, for the extension of
/// `γ̇`, `u`, `w` defined by `ext`.
pub fn extension_curvature(
    m: &MetricField,
    curve: &CurvePath,
    t: f64,
    u: &[f64],
    w: &[f64],
    ext: &AdaptedExtension,
) -> Result<Vec<f64>> {
    extension_curvature_bounded(m, curve, t, u, w, ext).map(|(r, _)| r)
}

/// [`extension_curvature`] with the largest single term entering it, the
/// natural scale for comparing two extensions whose values may vanish.
pub fn extension_curvature_bounded(
    m: &MetricField,
    curve: &CurvePath,
    t: f64,
    u: &[f64],
    w: &[f64],
    ext: &AdaptedExtension,
) -> Result<(Vec<f64>, f64)> {
    let n = u.len();
    let map = ext.chart_map(curve, t)?;
    let pulled = MetricField::pullback(m, map)?;
    let vel = curve.velocity(t)?;
    let j = DMatrix::from_fn(n, n, |r, c| if c == 0 { vel[r] } else { ext.frame[c - 1][r] });
    let lu = j.clone().lu();
    let solve = |rhs: &[f64]| -> Result<Vec<f64>> {
        lu.solve(&DVector::from_column_slice(rhs))
            .map(|s| s.iter().copied().collect())
            .ok_or(Error::Degenerate { condition: f64::INFINITY })
    };
    let (a, b) = (solve(u)?, solve(w)?);
    let mut e1 = vec![0.0; n];
    e1[0] = 1.0;
    let origin = vec![0.0; n];
    let ac = AffineChern::new(&pulled, &VectorField::constant(&e1), &origin)?;
    let r = ac.curvature(&e1, &a, &b);
    let bound = ac.curvature_bound(&e1, &a, &b) * j.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let pushed = &j * DVector::from_vec(r);
    Ok((pushed.iter().copied().collect(), bound))
}
