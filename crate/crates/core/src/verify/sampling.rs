//! Random samples: a tangent vector in the domain plus the random fields,
//! curves and maps the identities are evaluated on. Everything is drawn
//! sequentially from one generator so the plan and seed fix the draw.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::plan::FieldSpec;
use crate::connection::VectorField;
use crate::curvature::AdaptedExtension;
use crate::curves::{CurvePath, FieldAlongCurve, TwoParamMap};
use crate::error::{Error, Result};
use crate::geometry::{condition_number, fundamental_tensor};
use crate::metrics::expr::{Expr, Var};
use crate::metrics::{MetricField, TangentSample};

pub const MAX_RETRIES: usize = 1000;
/// Curves and fields along curves live on `[-CURVE_HALF, CURVE_HALF]`.
pub const CURVE_HALF: f64 = 0.2;
/// Parameter at which curve identities are evaluated off the base point.
pub const CURVE_T: f64 = 0.05;

#[derive(Debug, Clone)]
pub struct Sample {
    pub x: Vec<f64>,
    pub v: Vec<f64>,
    /// `X, Y, Z, W`.
    pub fields: [VectorField; 4],
    /// `V`, with `V(x) = v`.
    pub reference: VectorField,
    /// Another extension of `v`, agreeing with `V` only at `x`.
    pub reference_alt: VectorField,
    pub u: Vec<f64>,
    pub w: Vec<f64>,
    pub coeffs: (f64, f64),
    /// `γ(t) = x + tv + t²c₂ + t³c₃`.
    pub curve: CurvePath,
    pub along: [Vec<Expr>; 2],
    /// Reference along the curve, `W(t) = v + t r`.
    pub along_reference: FieldAlongCurve,
    pub surface: TwoParamMap,
    pub surface_reference: TwoParamMap,
    pub extensions: [AdaptedExtension; 2],
}

impl Sample {
    pub fn tangent(&self) -> TangentSample {
        TangentSample::new(self.x.clone(), self.v.clone())
    }
}

fn uniform(rng: &mut ChaCha8Rng, n: usize, half: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-half..half)).collect()
}

/// Multi-indices over `n` variables with total degree in `lo..=hi`.
fn multi_indices(n: usize, lo: usize, hi: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fn rec(i: usize, left: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>, lo: usize) {
        if i == cur.len() {
            let d: u32 = cur.iter().sum();
            if d as usize >= lo {
                out.push(cur.clone());
            }
            return;
        }
        for k in 0..=left {
            cur[i] = k as u32;
            rec(i + 1, left - k, cur, out, lo);
        }
        cur[i] = 0;
    }
    rec(0, hi, &mut cur, &mut out, lo);
    out
}

fn monomial(alpha: &[u32], center: &[f64], var: impl Fn(usize) -> Var) -> Expr {
    let mut e = Expr::num(1.0);
    for (i, &a) in alpha.iter().enumerate() {
        if a > 0 {
            let base = Expr::var(var(i)) - Expr::num(center[i]);
            e = e * if a == 1 { base } else { base.pow(Expr::num(a as f64)) };
        }
    }
    e
}

/// `Σ c_α (x − center)^α` over `lo ≤ |α| ≤ hi`, coefficients in `[-scale, scale]`.
fn random_poly(rng: &mut ChaCha8Rng, center: &[f64], lo: usize, hi: usize, scale: f64, var: impl Fn(usize) -> Var + Copy) -> Expr {
    let mut e = Expr::num(0.0);
    for alpha in multi_indices(center.len(), lo, hi) {
        let c = rng.gen_range(-scale..scale);
        e = e + Expr::num(c) * monomial(&alpha, center, var);
    }
    e
}

fn random_field(rng: &mut ChaCha8Rng, x: &[f64], spec: &FieldSpec) -> VectorField {
    VectorField::new(
        (0..x.len())
            .map(|_| random_poly(rng, x, 0, spec.max_degree, spec.scale, Var::X))
            .collect(),
    )
}

/// `v + Σ_{|α| ≥ 1} c_α (x − x0)^α`, scaled to stay near `v`.
fn random_extension(rng: &mut ChaCha8Rng, x: &[f64], v: &[f64], spec: &FieldSpec) -> VectorField {
    let size = v.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let amp = 0.3 * size;
    VectorField::new(
        v.iter()
            .map(|&c| Expr::num(c) + Expr::num(amp) * random_poly(rng, x, 1, spec.max_degree.max(1), 1.0, Var::X))
            .collect(),
    )
}

fn t_poly(coeffs: &[Vec<f64>], k: usize) -> Expr {
    let mut e = Expr::num(coeffs[0][k]);
    for (m, c) in coeffs.iter().enumerate().skip(1) {
        let t = Expr::var(Var::T);
        e = e + Expr::num(c[k]) * if m == 1 { t } else { t.pow(Expr::num(m as f64)) };
    }
    e
}

fn random_adapted(rng: &mut ChaCha8Rng, v: &[f64]) -> AdaptedExtension {
    let n = v.len();
    loop {
        let frame: Vec<Vec<f64>> = (1..n).map(|_| uniform(rng, n, 1.0)).collect();
        let frame_rate: Vec<Vec<f64>> = (1..n).map(|_| uniform(rng, n, 0.5)).collect();
        let mut bend = vec![vec![vec![0.0; n]; n - 1]; n - 1];
        for a in 0..n - 1 {
            for b in a..n - 1 {
                let col = uniform(rng, n, 0.5);
                bend[a][b] = col.clone();
                bend[b][a] = col;
            }
        }
        // [v | frame] must be well conditioned
        let mut j = vec![0.0; n * n];
        for r in 0..n {
            j[r * n] = v[r];
            for c in 1..n {
                j[r * n + c] = frame[c - 1][r];
            }
        }
        let jt_j: Vec<f64> = (0..n * n)
            .map(|idx| (0..n).map(|r| j[r * n + idx / n] * j[r * n + idx % n]).sum())
            .collect();
        if condition_number(n, &jt_j) < 1e4 {
            return AdaptedExtension {
                frame,
                frame_rate,
                bend,
            };
        }
    }
}

/// Draw `(x, v)` uniformly in the boxes and the rest of the sample around
/// it, until `(x, v)` has a well-conditioned fundamental tensor and the
/// curves and surfaces of the sample stay in the domain.
#[allow(clippy::too_many_arguments)]
pub fn draw_sample(
    rng: &mut ChaCha8Rng,
    m: &MetricField,
    center: &[f64],
    x_box: f64,
    v_box: f64,
    spec: &FieldSpec,
    max_condition: f64,
    rejected: &mut usize,
) -> Result<Sample> {
    let n = m.dim();
    for _ in 0..MAX_RETRIES {
        let x: Vec<f64> = uniform(rng, n, x_box).iter().zip(center).map(|(a, c)| a + c).collect();
        let v = uniform(rng, n, v_box);
        let usable = m.in_domain(&x, &v)
            && fundamental_tensor(m, &TangentSample::new(x.clone(), v.clone()))
                .map_or(false, |f| f.condition <= max_condition);
        if usable {
            let sample = draw_rest(rng, &x, &v, spec)?;
            if stays_in_domain(m, &sample)? {
                return Ok(sample);
            }
        }
        *rejected += 1;
    }
    Err(Error::Sampling {
        metric: m.name().to_string(),
        attempts: MAX_RETRIES,
    })
}

/// Whether the curve, surface and their references stay in the domain.
fn stays_in_domain(m: &MetricField, s: &Sample) -> Result<bool> {
    const STEPS: usize = 4;
    let grid = |k: usize| -CURVE_HALF + 2.0 * CURVE_HALF * k as f64 / STEPS as f64;
    for i in 0..=STEPS {
        let t = grid(i);
        if !m.in_domain(&s.curve.position(t)?, &s.curve.velocity(t)?)
            || !m.in_domain(&s.curve.position(t)?, &s.along_reference.value(t)?)
        {
            return Ok(false);
        }
        for j in 0..=STEPS {
            let value = |map: &TwoParamMap| -> Result<Vec<f64>> {
                Ok(map.jets(t, grid(j), 0)?.iter().map(|c| c.value()).collect())
            };
            if !m.in_domain(&value(&s.surface)?, &value(&s.surface_reference)?) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn draw_rest(rng: &mut ChaCha8Rng, x: &[f64], v: &[f64], spec: &FieldSpec) -> Result<Sample> {
    let (x, v) = (x.to_vec(), v.to_vec());
    let n = x.len();
    let fields = [
        random_field(rng, &x, spec),
        random_field(rng, &x, spec),
        random_field(rng, &x, spec),
        random_field(rng, &x, spec),
    ];
    let reference = random_extension(rng, &x, &v, spec);
    let reference_alt = random_extension(rng, &x, &v, spec);
    let u = uniform(rng, n, 1.0);
    let w = uniform(rng, n, 1.0);
    let coeffs = (rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0));

    let c2 = uniform(rng, n, 1.0);
    let c3 = uniform(rng, n, 1.0);
    let curve = CurvePath::polynomial(0.0, &[x.clone(), v.clone(), c2, c3], -CURVE_HALF, CURVE_HALF)?;
    let mut along_poly = || -> Vec<Expr> {
        let cs: Vec<Vec<f64>> = (0..4).map(|_| uniform(rng, n, 1.0)).collect();
        (0..n).map(|k| t_poly(&cs, k)).collect()
    };
    let along = [along_poly(), along_poly()];
    let size = v.iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let r = uniform(rng, n, size);
    let along_reference = FieldAlongCurve::from_exprs(
        (0..n).map(|k| t_poly(&[v.clone(), r.clone()], k)).collect(),
        -CURVE_HALF,
        CURVE_HALF,
    )?;

    let st = |k: usize, c: &[Vec<f64>; 6]| {
        let (t, s) = (Expr::var(Var::T), Expr::var(Var::S));
        Expr::num(c[0][k])
            + Expr::num(c[1][k]) * t.clone()
            + Expr::num(c[2][k]) * s.clone()
            + Expr::num(c[3][k]) * t.clone() * t.clone()
            + Expr::num(c[4][k]) * t * s.clone()
            + Expr::num(c[5][k]) * s.clone() * s
    };
    let mut lam: [Vec<f64>; 6] = std::array::from_fn(|_| uniform(rng, n, 1.0));
    lam[0] = x.clone();
    let mut refc: [Vec<f64>; 6] = std::array::from_fn(|_| uniform(rng, n, 0.3 * size));
    refc[0] = v.clone();
    let rect = (-CURVE_HALF, CURVE_HALF);
    let surface = TwoParamMap::from_exprs((0..n).map(|k| st(k, &lam)).collect(), rect, rect)?;
    let surface_reference = TwoParamMap::from_exprs((0..n).map(|k| st(k, &refc)).collect(), rect, rect)?;

    let extensions = [random_adapted(rng, &v), random_adapted(rng, &v)];
    Ok(Sample {
        x,
        v,
        fields,
        reference,
        reference_alt,
        u,
        w,
        coeffs,
        curve,
        along,
        along_reference,
        surface,
        surface_reference,
        extensions,
    })
}
