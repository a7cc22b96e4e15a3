//! Adaptive Dormand–Prince 5(4) integration with first-same-as-last stages.

use crate::error::{Error, Result};

const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

/// Continuous-extension weights; the extension minus the cubic Hermite
/// through the step ends is `θ²(1−θ)² h Σ dᵢkᵢ`.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

/// Accepted state with its derivative.
#[derive(Debug, Clone)]
pub(crate) struct Node {
    pub t: f64,
    pub y: Vec<f64>,
    pub dy: Vec<f64>,
}

fn axpy(y: &[f64], h: f64, terms: &[(f64, &Vec<f64>)]) -> Vec<f64> {
    let mut out = y.to_vec();
    for (c, k) in terms {
        if *c != 0.0 {
            for (o, ki) in out.iter_mut().zip(k.iter()) {
                *o += h * c * ki;
            }
        }
    }
    out
}

fn cubic_midpoint(a: &Node, b: &Node) -> Vec<f64> {
    let h = b.t - a.t;
    (0..a.y.len())
        .map(|i| 0.5 * (a.y[i] + b.y[i]) + h / 8.0 * (a.dy[i] - b.dy[i]))
        .collect()
}

/// Integrate `y' = f(t, y)` from `t0` to `t1` with per-step error
/// `tol / |t1 − t0|` (scaled by `max(1, |y|)`). `admissible` is checked at
/// every accepted node and at step midpoints; the cubic Hermite interpolant
/// through the nodes is held to the same per-step error; a failing check or a failing
/// right-hand side rejects the step.
pub(crate) fn integrate<F, P>(f: F, t0: f64, t1: f64, y0: &[f64], tol: f64, admissible: P) -> Result<Vec<Node>>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
    P: Fn(f64, &[f64]) -> bool,
{
    integrate_scaled(f, t0, t1, y0, tol, admissible, |y: &[f64]| y.iter().map(|c| c.abs().max(1.0)).collect())
}

/// [`integrate`] with errors measured against `scale(y)` componentwise
/// (the larger of the scales at the two ends of the step).
pub(crate) fn integrate_scaled<F, P, S>(
    f: F,
    t0: f64,
    t1: f64,
    y0: &[f64],
    tol: f64,
    admissible: P,
    scale: S,
) -> Result<Vec<Node>>
where
    F: Fn(f64, &[f64]) -> Result<Vec<f64>>,
    P: Fn(f64, &[f64]) -> bool,
    S: Fn(&[f64]) -> Vec<f64>,
{
    let span = (t1 - t0).abs();
    if !(tol > 0.0) || !span.is_finite() {
        return Err(Error::Invalid(format!("bad integration request: tol {tol}, span {span}")));
    }
    let first = Node {
        t: t0,
        y: y0.to_vec(),
        dy: f(t0, y0)?,
    };
    let mut nodes = vec![first];
    if span == 0.0 {
        return Ok(nodes);
    }
    let dir = (t1 - t0).signum();
    let eps = tol / span;
    let min_step = 1e-14 * span.max(1.0);
    let mut h = span / 64.0;
    let mut last_domain_failure = false;

    loop {
        let cur = nodes.last().unwrap().clone();
        let remaining = (t1 - cur.t).abs();
        if remaining <= 1e-15 * span.max(1.0) {
            break;
        }
        h = h.min(remaining);
        if h < min_step {
            return Err(if last_domain_failure {
                Error::DomainExit { t: cur.t }
            } else {
                Error::StepUnderflow { t: cur.t, h }
            });
        }
        let hs = dir * h;

        let mut k: Vec<Vec<f64>> = vec![cur.dy.clone()];
        let mut failed = false;
        for s in 1..7 {
            let terms: Vec<(f64, &Vec<f64>)> = (0..s).map(|j| (A[s][j], &k[j])).collect();
            let ys = axpy(&cur.y, hs, &terms);
            match f(cur.t + C[s] * hs, &ys) {
                Ok(v) if v.iter().all(|c| c.is_finite()) => k.push(v),
                _ => {
                    failed = true;
                    break;
                }
            }
        }
        if failed {
            last_domain_failure = true;
            h *= 0.25;
            continue;
        }
        let terms: Vec<(f64, &Vec<f64>)> = (0..7).map(|j| (B5[j], &k[j])).collect();
        let y_new = axpy(&cur.y, hs, &terms);
        let sc: Vec<f64> = scale(&cur.y).into_iter().zip(scale(&y_new)).map(|(a, b)| a.max(b)).collect();
        let err = (0..y_new.len())
            .map(|i| {
                let e: f64 = (0..7).map(|j| (B5[j] - B4[j]) * k[j][i]).sum::<f64>() * hs;
                e.abs() / sc[i]
            })
            .fold(0.0, f64::max);
        // the cubic Hermite through the nodes must be as good as the step
        let dense = (0..y_new.len())
            .map(|i| {
                let e: f64 = (0..7).map(|j| D[j] * k[j][i]).sum::<f64>() * hs / 16.0;
                e.abs() / sc[i]
            })
            .fold(0.0, f64::max);
        let err = err.max(dense);
        let factor = if err == 0.0 {
            5.0
        } else {
            (0.9 * (eps / err).powf(0.2)).clamp(0.2, 5.0)
        };
        if err > eps {
            last_domain_failure = false;
            h *= factor.min(0.9);
            continue;
        }
        let next = Node {
            t: if remaining - h <= 1e-15 * span.max(1.0) { t1 } else { cur.t + hs },
            y: y_new,
            dy: k[6].clone(),
        };
        let mid = cubic_midpoint(&cur, &next);
        if !admissible(next.t, &next.y) || !admissible(cur.t + 0.5 * hs, &mid) {
            last_domain_failure = true;
            h *= 0.25;
            continue;
        }
        last_domain_failure = false;
        nodes.push(next);
        h *= factor;
    }
    Ok(nodes)
}
