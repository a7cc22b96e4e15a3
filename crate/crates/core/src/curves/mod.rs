//! Curves, fields along curves and two-parameter maps; covariant
//! derivatives along curves with a reference field, parallel transport and
//! geodesics.

mod hermite;
mod ode;

use crate::calculus::{Jet, JetSpace};
use crate::connection::{spray, ChernJets, VectorField};
use crate::error::{Error, Result};
use crate::metrics::expr::{Bindings, Expr, Var, VarScope};
use crate::metrics::{MetricField, TangentSample};
use hermite::HermiteTrack;

/// Default tolerance of [`parallel_transport`].
pub const TRANSPORT_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
enum Repr {
    Exprs(Vec<Expr>),
    Sampled(HermiteTrack),
}

impl Repr {
    fn dim(&self) -> usize {
        match self {
            Repr::Exprs(e) => e.len(),
            Repr::Sampled(h) => h.dim(),
        }
    }

    fn eval(&self, t: &Jet) -> Result<Vec<Jet>> {
        match self {
            Repr::Exprs(components) => {
                let b = Bindings {
                    x: &[],
                    v: &[],
                    t: Some(t),
                    s: None,
                };
                components.iter().map(|c| c.eval(&b).map_err(Error::from)).collect()
            }
            Repr::Sampled(h) => h.eval(t),
        }
    }
}

fn parse_in_t(components: &[&str]) -> Result<Vec<Expr>> {
    components
        .iter()
        .enumerate()
        .map(|(i, text)| {
            Expr::parse(text, VarScope::curve()).map_err(|source| Error::Parse {
                field: format!("component {}", i + 1),
                source,
            })
        })
        .collect()
}

fn check_interval(a: f64, b: f64) -> Result<()> {
    if a < b && a.is_finite() && b.is_finite() {
        Ok(())
    } else {
        Err(Error::Invalid(format!("bad parameter interval [{a}, {b}]")))
    }
}

fn t_jet(t: f64, order: usize) -> Jet {
    Jet::variable(&JetSpace::get(1, order), 0, t)
}

fn values(j: &[Jet]) -> Vec<f64> {
    j.iter().map(Jet::value).collect()
}

/// A smooth curve `t ↦ x(t)` on `[a, b]`: closed-form in `t` or the dense
/// output of the geodesic integrator (piecewise quintic, so velocity and
/// acceleration are exact derivatives of the position).
#[derive(Debug, Clone, PartialEq)]
pub struct CurvePath {
    interval: (f64, f64),
    repr: Repr,
}

impl CurvePath {
    pub fn from_exprs(components: Vec<Expr>, a: f64, b: f64) -> Result<Self> {
        check_interval(a, b)?;
        Ok(CurvePath {
            interval: (a, b),
            repr: Repr::Exprs(components),
        })
    }

    pub fn parse(components: &[&str], a: f64, b: f64) -> Result<Self> {
        Self::from_exprs(parse_in_t(components)?, a, b)
    }

    /// `x0 + t v`.
    pub fn line(x0: &[f64], v: &[f64], a: f64, b: f64) -> Result<Self> {
        let t = || Expr::var(Var::T);
        let comps = x0.iter().zip(v).map(|(&p, &q)| Expr::num(p) + Expr::num(q) * t()).collect();
        Self::from_exprs(comps, a, b)
    }

    /// `Σ_m c_m (t − t0)^m` with `coeffs[m]` the vector coefficient of degree `m`.
    pub fn polynomial(t0: f64, coeffs: &[Vec<f64>], a: f64, b: f64) -> Result<Self> {
        let n = coeffs[0].len();
        let comps = (0..n)
            .map(|k| {
                let mut e = Expr::num(coeffs[0][k]);
                for (m, c) in coeffs.iter().enumerate().skip(1) {
                    let dt = Expr::var(Var::T) - Expr::num(t0);
                    e = e + Expr::num(c[k]) * dt.pow(Expr::num(m as f64));
                }
                e
            })
            .collect();
        Self::from_exprs(comps, a, b)
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn dim(&self) -> usize {
        self.repr.dim()
    }

    /// Closed-form components, when the curve has them.
    pub fn exprs(&self) -> Option<&[Expr]> {
        match &self.repr {
            Repr::Exprs(e) => Some(e),
            Repr::Sampled(_) => None,
        }
    }

    /// Knot times of a sampled curve.
    pub fn knots(&self) -> Option<&[f64]> {
        match &self.repr {
            Repr::Sampled(h) => Some(h.knots()),
            Repr::Exprs(_) => None,
        }
    }

    fn check_t(&self, t: f64) -> Result<()> {
        let (a, b) = self.interval;
        let slack = 1e-12 * (b - a).max(1.0);
        if t >= a - slack && t <= b + slack {
            Ok(())
        } else {
            Err(Error::Domain(format!("t = {t} outside [{a}, {b}]")))
        }
    }

    /// Position as jets in any jet space whose first argument is `t`.
    pub fn eval_jets(&self, t: &Jet) -> Result<Vec<Jet>> {
        self.check_t(t.value())?;
        self.repr.eval(t)
    }

    /// Position as univariate jets in `t` of the given order.
    pub fn jets(&self, t: f64, order: usize) -> Result<Vec<Jet>> {
        self.eval_jets(&t_jet(t, order))
    }

    pub fn position(&self, t: f64) -> Result<Vec<f64>> {
        Ok(values(&self.jets(t, 0)?))
    }

    pub fn velocity(&self, t: f64) -> Result<Vec<f64>> {
        Ok(self.jets(t, 1)?.iter().map(|j| j.gradient(0)).collect())
    }

    pub fn acceleration(&self, t: f64) -> Result<Vec<f64>> {
        self.jets(t, 2)?
            .iter()
            .map(|j| j.derivative_value(&[2]).map_err(Error::from))
            .collect()
    }

    /// `(γ(t), γ̇(t))`.
    pub fn tangent_sample(&self, t: f64) -> Result<TangentSample> {
        let j = self.jets(t, 1)?;
        Ok(TangentSample::new(values(&j), j.iter().map(|c| c.gradient(0)).collect()))
    }

    /// Check `(γ(t), W(t)) ∈ A` (`W = γ̇` when absent) on `samples + 1`
    /// equispaced times.
    pub fn check_admissible(&self, m: &MetricField, w: Option<&FieldAlongCurve>, samples: usize) -> Result<()> {
        let (a, b) = self.interval;
        let samples = samples.max(1);
        for i in 0..=samples {
            let t = a + (b - a) * i as f64 / samples as f64;
            let x = self.position(t)?;
            let v = match w {
                Some(w) => w.value(t)?,
                None => self.velocity(t)?,
            };
            if !m.in_domain(&x, &v) {
                return Err(Error::Domain(format!("curve leaves the domain at t = {t}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
enum FieldRepr {
    Own(Repr),
    Velocity(Box<CurvePath>),
}

/// A vector field along a curve, `t ↦ X(t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldAlongCurve {
    interval: (f64, f64),
    repr: FieldRepr,
}

impl FieldAlongCurve {
    pub fn from_exprs(components: Vec<Expr>, a: f64, b: f64) -> Result<Self> {
        check_interval(a, b)?;
        Ok(FieldAlongCurve {
            interval: (a, b),
            repr: FieldRepr::Own(Repr::Exprs(components)),
        })
    }

    pub fn parse(components: &[&str], a: f64, b: f64) -> Result<Self> {
        Self::from_exprs(parse_in_t(components)?, a, b)
    }

    pub fn constant(values: &[f64], a: f64, b: f64) -> Result<Self> {
        Self::from_exprs(values.iter().map(|&c| Expr::num(c)).collect(), a, b)
    }

    /// `γ̇` as a field along `γ`.
    pub fn velocity_of(curve: &CurvePath) -> Self {
        FieldAlongCurve {
            interval: curve.interval,
            repr: FieldRepr::Velocity(Box::new(curve.clone())),
        }
    }

    /// `X ∘ γ` for a chart field `X` and a closed-form curve.
    pub fn restrict(field: &VectorField, curve: &CurvePath) -> Result<Self> {
        let path = curve
            .exprs()
            .ok_or_else(|| Error::Invalid("restriction needs a closed-form curve".into()))?;
        let comps = field
            .components()
            .iter()
            .map(|c| {
                c.substitute(&|v| match v {
                    Var::X(i) => Some(path[i].clone()),
                    _ => None,
                })
            })
            .collect();
        let (a, b) = curve.interval;
        Self::from_exprs(comps, a, b)
    }

    /// `h(t) X(t)` for a scalar expression `h` in `t`.
    pub fn scaled(&self, h: &Expr) -> Result<Self> {
        match &self.repr {
            FieldRepr::Own(Repr::Exprs(c)) => {
                let (a, b) = self.interval;
                Self::from_exprs(c.iter().map(|e| h.clone() * e.clone()).collect(), a, b)
            }
            _ => Err(Error::Invalid("only closed-form fields can be rescaled".into())),
        }
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn eval_jets(&self, t: &Jet) -> Result<Vec<Jet>> {
        let (a, b) = self.interval;
        let t0 = t.value();
        let slack = 1e-12 * (b - a).max(1.0);
        if !(t0 >= a - slack && t0 <= b + slack) {
            return Err(Error::Domain(format!("t = {t0} outside [{a}, {b}]")));
        }
        match &self.repr {
            FieldRepr::Own(r) => r.eval(t),
            FieldRepr::Velocity(c) => {
                let lifted = t_jet(t0, t.order() + 1);
                let pos = c.eval_jets(&lifted)?;
                let dv: Vec<Jet> = pos.iter().map(|p| p.differentiate(0)).collect();
                // re-express in the caller's space
                Ok(dv.iter().map(|d| d.compose(std::slice::from_ref(t))).collect())
            }
        }
    }

    pub fn jets(&self, t: f64, order: usize) -> Result<Vec<Jet>> {
        self.eval_jets(&t_jet(t, order))
    }

    pub fn value(&self, t: f64) -> Result<Vec<f64>> {
        Ok(values(&self.jets(t, 0)?))
    }

    pub fn derivative(&self, t: f64) -> Result<Vec<f64>> {
        Ok(self.jets(t, 1)?.iter().map(|j| j.gradient(0)).collect())
    }
}

/// A smooth map `(t, s) ↦ Λ(t, s)` on a rectangle, closed-form in `t` and
/// `s`. Also used for fields along such a map.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoParamMap {
    t_range: (f64, f64),
    s_range: (f64, f64),
    components: Vec<Expr>,
}

impl TwoParamMap {
    pub fn from_exprs(components: Vec<Expr>, t_range: (f64, f64), s_range: (f64, f64)) -> Result<Self> {
        check_interval(t_range.0, t_range.1)?;
        check_interval(s_range.0, s_range.1)?;
        Ok(TwoParamMap {
            t_range,
            s_range,
            components,
        })
    }

    pub fn parse(components: &[&str], t_range: (f64, f64), s_range: (f64, f64)) -> Result<Self> {
        let comps = components
            .iter()
            .enumerate()
            .map(|(i, text)| {
                Expr::parse(text, VarScope::surface()).map_err(|source| Error::Parse {
                    field: format!("component {}", i + 1),
                    source,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_exprs(comps, t_range, s_range)
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    /// The map with the roles of `t` and `s` exchanged.
    pub fn swapped(&self) -> Self {
        let comps = self
            .components
            .iter()
            .map(|c| {
                c.substitute(&|v| match v {
                    Var::T => Some(Expr::var(Var::S)),
                    Var::S => Some(Expr::var(Var::T)),
                    _ => None,
                })
            })
            .collect();
        TwoParamMap {
            t_range: self.s_range,
            s_range: self.t_range,
            components: comps,
        }
    }

    /// Jets in `(t, s)` (variables 0 and 1).
    pub fn jets(&self, t: f64, s: f64, order: usize) -> Result<Vec<Jet>> {
        let inside = |r: (f64, f64), v: f64| v >= r.0 && v <= r.1;
        if !inside(self.t_range, t) || !inside(self.s_range, s) {
            return Err(Error::Domain(format!("(t, s) = ({t}, {s}) outside the rectangle")));
        }
        let space = JetSpace::get(2, order);
        let (tj, sj) = (Jet::variable(&space, 0, t), Jet::variable(&space, 1, s));
        let b = Bindings {
            x: &[],
            v: &[],
            t: Some(&tj),
            s: Some(&sj),
        };
        self.components.iter().map(|c| c.eval(&b).map_err(Error::from)).collect()
    }
}

/// `(D^W_γ X)^k = dXᵏ/dt + Xⁱ γ̇ʲ Γᵏᵢⱼ(γ(t), W(t))`.
pub fn cov_deriv_along(
    m: &MetricField,
    curve: &CurvePath,
    w: &FieldAlongCurve,
    x: &FieldAlongCurve,
    t: f64,
) -> Result<Vec<f64>> {
    let pos = curve.position(t)?;
    let vel = curve.velocity(t)?;
    let wv = w.value(t)?;
    let chern = ChernJets::compute(m, &TangentSample::new(pos, wv), 0)?;
    let xj = x.jets(t, 1)?;
    let xv = values(&xj);
    let mut out = chern.contract(&xv, &vel);
    for (o, c) in out.iter_mut().zip(&xj) {
        *o += c.gradient(0);
    }
    Ok(out)
}

/// Solve `D^W_γ X = 0` with `X(t0) = x0` up to `t1`; the result is a
/// piecewise-cubic field on the integration nodes.
pub fn parallel_transport(
    m: &MetricField,
    curve: &CurvePath,
    w: &FieldAlongCurve,
    x0: &[f64],
    t0: f64,
    t1: f64,
) -> Result<FieldAlongCurve> {
    parallel_transport_tol(m, curve, w, x0, t0, t1, TRANSPORT_TOL)
}

pub fn parallel_transport_tol(
    m: &MetricField,
    curve: &CurvePath,
    w: &FieldAlongCurve,
    x0: &[f64],
    t0: f64,
    t1: f64,
    tol: f64,
) -> Result<FieldAlongCurve> {
    if x0.len() != curve.dim() {
        return Err(Error::DimMismatch {
            expected: curve.dim(),
            found: x0.len(),
        });
    }
    let rhs = |t: f64, x: &[f64]| -> Result<Vec<f64>> {
        let pos = curve.position(t)?;
        let vel = curve.velocity(t)?;
        let chern = ChernJets::compute(m, &TangentSample::new(pos, w.value(t)?), 0)?;
        Ok(chern.contract(x, &vel).into_iter().map(|c| -c).collect())
    };
    let admissible = |t: f64, _: &[f64]| match (curve.position(t), w.value(t)) {
        (Ok(p), Ok(v)) => m.in_domain(&p, &v),
        _ => false,
    };
    let nodes = ode::integrate(rhs, t0, t1, x0, tol, admissible)?;
    if nodes.len() < 2 {
        return FieldAlongCurve::constant(x0, t0, t0 + 1e-12);
    }
    let knots = nodes.iter().map(|n| n.t).collect();
    let data = nodes.into_iter().map(|n| vec![n.y, n.dy]).collect();
    let track = HermiteTrack::new(knots, data);
    Ok(FieldAlongCurve {
        interval: track.interval(),
        repr: FieldRepr::Own(Repr::Sampled(track)),
    })
}

/// Integrate `ẍ = −Γ(x, ẋ)(ẋ, ẋ)` from `(x0, v0)` over `[0, T]` (or
/// `[T, 0]` for negative `T`).
pub fn geodesic_shoot(m: &MetricField, x0: &[f64], v0: &[f64], t_end: f64, tol: f64) -> Result<CurvePath> {
    if v0.iter().all(|&c| c == 0.0) {
        return Err(Error::Invalid("geodesic needs a nonzero initial velocity".into()));
    }
    if t_end == 0.0 || !t_end.is_finite() {
        return Err(Error::Invalid(format!("bad geodesic time {t_end}")));
    }
    m.check_domain(x0, v0)?;
    let n = x0.len();
    let rhs = |_: f64, y: &[f64]| -> Result<Vec<f64>> {
        let (x, v) = y.split_at(n);
        let acc = spray(m, x, v)?;
        let mut out = v.to_vec();
        out.extend(acc.into_iter().map(|c| -c));
        Ok(out)
    };
    let y0: Vec<f64> = x0.iter().chain(v0).copied().collect();
    // velocity errors relative to the speed: charts may shrink it by orders
    // of magnitude near the edge of the domain
    let scale = |y: &[f64]| -> Vec<f64> {
        let speed = y[n..].iter().fold(0.0f64, |a, c| a.max(c.abs())).max(f64::MIN_POSITIVE);
        y[..n].iter().map(|c| c.abs().max(1.0)).chain(std::iter::repeat(speed).take(n)).collect()
    };
    let nodes = ode::integrate_scaled(rhs, 0.0, t_end, &y0, tol, |_, y| m.in_domain(&y[..n], &y[n..]), scale)?;
    let knots = nodes.iter().map(|nd| nd.t).collect();
    let data = nodes
        .into_iter()
        .map(|nd| vec![nd.y[..n].to_vec(), nd.y[n..].to_vec(), nd.dy[n..].to_vec()])
        .collect();
    let track = HermiteTrack::new(knots, data);
    Ok(CurvePath {
        interval: track.interval(),
        repr: Repr::Sampled(track),
    })
}

/// `|D^V_{γ_s} β̇_t − D^V_{β_t} γ̇_s|` at `(t, s)`, relative to the larger
/// side; `γ_s = Λ(·, s)`, `β_t = Λ(t, ·)`, and `reference` gives `V(t, s)`.
pub fn mixed_derivative_commutation(
    m: &MetricField,
    map: &TwoParamMap,
    reference: &TwoParamMap,
    t: f64,
    s: f64,
) -> Result<f64> {
    let n = map.dim();
    let lam = map.jets(t, s, 2)?;
    let v = values(&reference.jets(t, s, 0)?);
    let x = values(&lam);
    let chern = ChernJets::compute(m, &TangentSample::new(x, v), 0)?;
    let lt: Vec<f64> = lam.iter().map(|c| c.gradient(0)).collect();
    let ls: Vec<f64> = lam.iter().map(|c| c.gradient(1)).collect();
    let mixed: Vec<f64> = lam
        .iter()
        .map(|c| c.derivative_value(&[1, 1]).map_err(Error::from))
        .collect::<Result<_>>()?;
    // along γ_s the derivative is in t, along β_t in s
    let a = chern.contract(&ls, &lt);
    let b = chern.contract(&lt, &ls);
    let mut diff: f64 = 0.0;
    let mut scale: f64 = 1e-14;
    for k in 0..n {
        let left = mixed[k] + a[k];
        let right = mixed[k] + b[k];
        diff = diff.max((left - right).abs());
        scale = scale.max(left.abs()).max(right.abs()).max(mixed[k].abs()).max(a[k].abs());
    }
    Ok(diff / scale)
}
