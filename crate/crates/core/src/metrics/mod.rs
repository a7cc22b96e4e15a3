//! Pseudo-Finsler metrics `L(x, v)` on a conic domain of a single chart.
//!
//! A metric is a closed-form expression, either one of the shipped
//! builtins or a user expression loaded from a metric spec file (see
//! [`spec_file`]). Evaluation is generic over [`Scalar`], so the same code
//! path yields plain values and Taylor jets.

pub mod expr;
pub mod spec_file;
mod symbolic;

use serde::{Deserialize, Serialize};

use crate::calculus::{Jet, Scalar};
use crate::error::{Error, Result};
use expr::{Bindings, Expr, VarScope};

pub use spec_file::load_metric_spec;

/// Names accepted by [`MetricField::builtin`].
pub const BUILTINS: &[&str] = &[
    "euclidean",
    "riemannian",
    "minkowski_quartic",
    "sphere_round",
    "hyperbolic",
    "funk",
];

/// Parameters of the builtin metrics. Unused fields are ignored by builtins
/// that do not take them.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuiltinParams {
    /// Radius of the ball for `funk`.
    pub radius: Option<f64>,
    /// Row-major matrix field `A(x)` for `riemannian`, one expression per
    /// entry over `x1..xn`.
    pub matrix: Option<Vec<Vec<String>>>,
    /// Amplitude `ε` of the default `riemannian` field
    /// `A_ij(x) = δ_ij + ε sin(x_i + x_j)`.
    pub perturbation: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
enum Kind {
    Euclidean,
    /// `vᵀA(x)v` with `A` given entrywise.
    Quadratic(Vec<Expr>),
    /// `vᵀ(I + ε S(x))v`, `S_ij = sin(x_i + x_j)`.
    SinPerturbed(f64),
    MinkowskiQuartic,
    /// Stereographic chart of the unit sphere.
    Sphere,
    /// Poincaré ball model, curvature −1.
    Hyperbolic,
    /// Squared Funk metric of the ball of the given radius.
    Funk(f64),
    /// `base` read through a chart map `Φ`; `jacobian[a n + b] = ∂Φ^a/∂ξ^b`.
    Pullback {
        base: Box<MetricField>,
        map: Vec<Expr>,
        jacobian: Vec<Expr>,
    },
    Expression(Expr),
}

/// A pseudo-Finsler metric together with its conic domain.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    name: String,
    dim: usize,
    kind: Kind,
    /// Extra domain conditions, each required to be strictly positive.
    domain: Vec<Expr>,
}

/// A base point `x` with a tangent vector `v`, both in chart coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TangentSample {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

impl TangentSample {
    pub fn new(x: Vec<f64>, v: Vec<f64>) -> Self {
        TangentSample { x, v }
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        TangentSample {
            x: self.x.clone(),
            v: self.v.iter().map(|c| c * lambda).collect(),
        }
    }
}

fn norm2<S: Scalar>(v: &[S]) -> S {
    let mut acc = v[0].konst(0.0);
    for c in v {
        acc = acc + c.clone() * c.clone();
    }
    acc
}

fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    let mut acc = a[0].konst(0.0);
    for (p, q) in a.iter().zip(b) {
        acc = acc + p.clone() * q.clone();
    }
    acc
}

impl Kind {
    fn eval<S: Scalar>(&self, x: &[S], v: &[S]) -> std::result::Result<S, crate::calculus::JetError> {
        let n = x.len();
        Ok(match self {
            Kind::Euclidean => norm2(v),
            Kind::Quadratic(entries) => {
                let bind = Bindings::point(x);
                let mut acc = v[0].konst(0.0);
                for i in 0..n {
                    for j in 0..n {
                        let a = entries[i * n + j].eval(&bind)?;
                        acc = acc + a * v[i].clone() * v[j].clone();
                    }
                }
                acc
            }
            Kind::SinPerturbed(eps) => {
                let mut acc = norm2(v);
                for i in 0..n {
                    for j in 0..n {
                        let s = (x[i].clone() + x[j].clone()).sin() * *eps;
                        acc = acc + s * v[i].clone() * v[j].clone();
                    }
                }
                acc
            }
            Kind::MinkowskiQuartic => {
                let mut acc = v[0].konst(0.0);
                for c in v {
                    acc = acc + c.powi(4);
                }
                acc.checked_sqrt()?
            }
            Kind::Sphere => {
                let conf = norm2(x) + 1.0;
                (norm2(v) * 4.0).checked_div(&conf.powi(2))?
            }
            Kind::Hyperbolic => {
                let conf = -norm2(x) + 1.0;
                (norm2(v) * 4.0).checked_div(&conf.powi(2))?
            }
            Kind::Funk(r) => {
                let gap = -norm2(x) + r * r;
                let xv = dot(x, v);
                let root = (gap.clone() * norm2(v) + xv.clone() * xv.clone()).checked_sqrt()?;
                let f = (root + xv).checked_div(&gap)?;
                f.clone() * f
            }
            Kind::Expression(e) => e.eval(&Bindings::tangent(x, v))?,
            Kind::Pullback { base, map, jacobian } => {
                let bind = Bindings::point(x);
                let y = map.iter().map(|e| e.eval(&bind)).collect::<std::result::Result<Vec<_>, _>>()?;
                let m = map.len();
                let mut w = Vec::with_capacity(m);
                for a in 0..m {
                    let mut acc = v[0].konst(0.0);
                    for (b, vb) in v.iter().enumerate() {
                        acc = acc + jacobian[a * n + b].eval(&bind)? * vb.clone();
                    }
                    w.push(acc);
                }
                base.kind.eval(&y, &w)?
            }
        })
    }
}

impl MetricField {
    pub fn euclidean(dim: usize) -> Self {
        Self::from_kind("euclidean", dim, Kind::Euclidean)
    }

    /// `A_ij(x) = δ_ij + ε sin(x_i + x_j)`; positive definite for `ε·dim < 1`.
    pub fn riemannian_perturbed(dim: usize, eps: f64) -> Self {
        Self::from_kind("riemannian", dim, Kind::SinPerturbed(eps))
    }

    pub fn minkowski_quartic(dim: usize) -> Self {
        Self::from_kind("minkowski_quartic", dim, Kind::MinkowskiQuartic)
    }

    pub fn sphere_round(dim: usize) -> Self {
        Self::from_kind("sphere_round", dim, Kind::Sphere)
    }

    pub fn hyperbolic(dim: usize) -> Self {
        Self::from_kind("hyperbolic", dim, Kind::Hyperbolic)
    }

    pub fn funk(dim: usize, radius: f64) -> Self {
        Self::from_kind("funk", dim, Kind::Funk(radius))
    }

    fn from_kind(name: &str, dim: usize, kind: Kind) -> Self {
        MetricField {
            name: name.to_string(),
            dim,
            kind,
            domain: Vec::new(),
        }
    }

    /// Look up a builtin metric by name.
    pub fn builtin(name: &str, dim: usize, params: &BuiltinParams) -> Result<Self> {
        if dim == 0 || dim > 8 {
            return Err(Error::Config(format!("dimension {dim} outside 1..=8")));
        }
        Ok(match name {
            "euclidean" => Self::euclidean(dim),
            "minkowski_quartic" => Self::minkowski_quartic(dim),
            "sphere_round" => Self::sphere_round(dim),
            "hyperbolic" => Self::hyperbolic(dim),
            "funk" => {
                let r = params.radius.unwrap_or(1.0);
                if !(r > 0.0 && r.is_finite()) {
                    return Err(Error::Config(format!("funk radius must be positive, got {r}")));
                }
                Self::funk(dim, r)
            }
            "riemannian" => match (&params.matrix, params.perturbation) {
                (Some(_), Some(_)) => {
                    return Err(Error::Config(
                        "riemannian takes either `matrix` or `perturbation`, not both".into(),
                    ))
                }
                (Some(rows), None) => Self::quadratic(dim, rows)?,
                (None, eps) => Self::riemannian_perturbed(dim, eps.unwrap_or(0.1)),
            },
            other => return Err(Error::UnknownMetric(other.to_string())),
        })
    }

    /// `vᵀA(x)v` from entry expressions; rejects non-symmetric matrices.
    pub fn quadratic(dim: usize, rows: &[Vec<String>]) -> Result<Self> {
        if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimMismatch {
                expected: dim,
                found: rows.len(),
            });
        }
        let mut entries = Vec::with_capacity(dim * dim);
        for (i, row) in rows.iter().enumerate() {
            for (j, text) in row.iter().enumerate() {
                let e = Expr::parse(text, VarScope::chart(dim)).map_err(|source| Error::Parse {
                    field: format!("matrix[{i}][{j}]"),
                    source,
                })?;
                entries.push(e);
            }
        }
        check_symmetric(dim, &entries)?;
        Ok(Self::from_kind("riemannian", dim, Kind::Quadratic(entries)))
    }

    /// A user Lagrangian over `x1..xn, v1..vn`.
    pub fn expression(name: &str, dim: usize, lagrangian: Expr) -> Self {
        Self::from_kind(name, dim, Kind::Expression(lagrangian))
    }

    /// The metric `L(Φ(ξ), DΦ(ξ)η)` in the coordinates `ξ` of a chart map
    /// `Φ` given by one expression over `x1..xn` per base coordinate.
    pub fn pullback(base: &MetricField, map: Vec<Expr>) -> Result<Self> {
        if map.len() != base.dim {
            return Err(Error::DimMismatch {
                expected: base.dim,
                found: map.len(),
            });
        }
        let n = base.dim;
        let jacobian = map
            .iter()
            .flat_map(|e| (0..n).map(move |b| e.derivative(expr::Var::X(b))))
            .collect();
        let name = format!("{}-pullback", base.name);
        Ok(Self::from_kind(
            &name,
            n,
            Kind::Pullback {
                base: Box::new(base.clone()),
                map,
                jacobian,
            },
        ))
    }

    /// Intersect the domain with `{expr > 0}`.
    pub fn with_domain(mut self, condition: Expr) -> Self {
        self.domain.push(condition);
        self
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// True when `L` is quadratic in `v` by construction.
    pub fn is_riemannian(&self) -> bool {
        if let Kind::Pullback { base, .. } = &self.kind {
            return base.is_riemannian();
        }
        matches!(
            self.kind,
            Kind::Euclidean
                | Kind::Quadratic(_)
                | Kind::SinPerturbed(_)
                | Kind::Sphere
                | Kind::Hyperbolic
        )
    }

    /// Known constant flag curvature, when the builtin has one.
    pub fn constant_flag_curvature(&self) -> Option<f64> {
        match self.kind {
            Kind::Euclidean | Kind::MinkowskiQuartic => Some(0.0),
            Kind::Sphere => Some(1.0),
            Kind::Hyperbolic => Some(-1.0),
            Kind::Funk(_) => Some(-0.25),
            _ => None,
        }
    }

    /// Membership in the open conic domain. Strict inequalities throughout.
    pub fn in_domain(&self, x: &[f64], v: &[f64]) -> bool {
        if x.len() != self.dim || v.len() != self.dim {
            return false;
        }
        if !x.iter().chain(v).all(|c| c.is_finite()) || v.iter().all(|&c| c == 0.0) {
            return false;
        }
        let inside = match &self.kind {
            Kind::Hyperbolic => norm2(x) < 1.0,
            Kind::Funk(r) => norm2(x) < r * r,
            Kind::Pullback { base, map, jacobian } => {
                let bind = Bindings::point(x);
                let y: Option<Vec<f64>> = map.iter().map(|e| e.eval(&bind).ok()).collect();
                let w: Option<Vec<f64>> = (0..self.dim)
                    .map(|a| {
                        (0..self.dim)
                            .map(|b| jacobian[a * self.dim + b].eval(&bind).ok().map(|j| j * v[b]))
                            .sum()
                    })
                    .collect();
                match (y, w) {
                    (Some(y), Some(w)) => base.in_domain(&y, &w),
                    _ => false,
                }
            }
            _ => true,
        };
        inside
            && self.domain.iter().all(|cond| {
                cond.eval(&Bindings::tangent(x, v))
                    .map(|c| c > 0.0)
                    .unwrap_or(false)
            })
    }

    pub fn check_domain(&self, x: &[f64], v: &[f64]) -> Result<()> {
        if x.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                found: x.len(),
            });
        }
        if v.len() != self.dim {
            return Err(Error::DimMismatch {
                expected: self.dim,
                found: v.len(),
            });
        }
        if self.in_domain(x, v) {
            Ok(())
        } else {
            Err(Error::Domain(format!("(x, v) = ({x:?}, {v:?})")))
        }
    }

    /// `L(x, v)`.
    pub fn eval(&self, x: &[f64], v: &[f64]) -> Result<f64> {
        self.check_domain(x, v)?;
        let l = self.kind.eval(x, v)?;
        if !l.is_finite() {
            return Err(Error::Domain(format!("(x, v) = ({x:?}, {v:?})")));
        }
        Ok(l)
    }

    pub fn eval_sample(&self, s: &TangentSample) -> Result<f64> {
        self.eval(&s.x, &s.v)
    }

    /// `L` over jets; the domain is checked at the base point.
    pub fn eval_jet(&self, x: &[Jet], v: &[Jet]) -> Result<Jet> {
        let x0: Vec<f64> = x.iter().map(Jet::value).collect();
        let v0: Vec<f64> = v.iter().map(Jet::value).collect();
        self.check_domain(&x0, &v0)?;
        let l = self.kind.eval(x, v)?;
        if !l.is_finite() {
            return Err(Error::Domain(format!("(x, v) = ({x0:?}, {v0:?})")));
        }
        Ok(l)
    }
}

fn check_symmetric(dim: usize, entries: &[Expr]) -> Result<()> {
    // Deterministic probe points in [-1, 1]^n.
    let probes: Vec<Vec<f64>> = (0..5)
        .map(|k| {
            (0..dim)
                .map(|i| (((k * 7 + i * 3) % 11) as f64 / 5.0 - 1.0) * 0.9)
                .collect()
        })
        .collect();
    for i in 0..dim {
        for j in (i + 1)..dim {
            let (a, b) = (&entries[i * dim + j], &entries[j * dim + i]);
            if a == b {
                continue;
            }
            for p in &probes {
                let bind = Bindings::point(p.as_slice());
                if let (Ok(va), Ok(vb)) = (a.eval(&bind), b.eval(&bind)) {
                    if (va - vb).abs() > 1e-12 * (1.0 + va.abs()) {
                        return Err(Error::NonSymmetric(i, j));
                    }
                }
            }
        }
    }
    Ok(())
}

/// Result of [`check_homogeneity`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneityReport {
    pub max_residual: f64,
    pub worst_lambda: f64,
}

/// Largest relative deviation of `L(x, λv)` from `λ²L(x, v)` over `lambdas`.
pub fn check_homogeneity(
    m: &MetricField,
    s: &TangentSample,
    lambdas: &[f64],
) -> Result<HomogeneityReport> {
    let base = m.eval_sample(s)?;
    let mut report = HomogeneityReport {
        max_residual: 0.0,
        worst_lambda: lambdas.first().copied().unwrap_or(1.0),
    };
    for &lambda in lambdas {
        if !(lambda > 0.0) {
            return Err(Error::Invalid(format!("scaling factor {lambda} must be positive")));
        }
        let scaled = m.eval_sample(&s.scaled(lambda))?;
        let expect = lambda * lambda * base;
        let residual = if expect == 0.0 {
            scaled.abs()
        } else {
            (scaled - expect).abs() / expect.abs()
        };
        if residual > report.max_residual {
            report.max_residual = residual;
            report.worst_lambda = lambda;
        }
    }
    Ok(report)
}
