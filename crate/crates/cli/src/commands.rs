use std::error::Error;
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde_json::{json, Value};

use chern_core::connection::christoffel;
use chern_core::curvature::{flag_curvature, flag_curvature_predecessor, hh_apply, hh_curvature};
use chern_core::curves::geodesic_shoot;
use chern_core::geometry::{cartan_tensor, fundamental_tensor};
use chern_core::metrics::spec_file::load_metric_file;
use chern_core::verify::{run_verification, VerificationPlan, IDENTITIES};
use chern_core::{MetricField, TangentSample};

use crate::{CurvatureArgs, Format, GeodesicArgs, TableArgs, VerifyArgs};

type Res<T> = Result<T, Box<dyn Error>>;

const GEODESIC_TOL: f64 = 1e-10;
const DEFAULT_SEED: u64 = 0;

fn load(path: &Path) -> Res<MetricField> {
    Ok(load_metric_file(path)?)
}

fn check_dim(m: &MetricField, name: &str, v: &[f64]) -> Res<()> {
    if v.len() != m.dim() {
        return Err(format!("--{name} has {} entries, metric dimension is {}", v.len(), m.dim()).into());
    }
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> Res<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("{}: {e}", p.display()).into()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Shortest round-trip text for a CSV cell, in exponent form when plain
/// notation would be long.
fn num(c: f64) -> String {
    if c == 0.0 || (1e-5..1e16).contains(&c.abs()) {
        format!("{c}")
    } else {
        format!("{c:e}")
    }
}

/// Row-major data of a rank-`rank` tensor as nested arrays.
fn nest(data: &[f64], n: usize, rank: usize) -> Value {
    if rank == 1 {
        return json!(data);
    }
    let step = data.len() / n;
    Value::Array(data.chunks(step).map(|c| nest(c, n, rank - 1)).collect())
}

pub fn curvature(a: &CurvatureArgs) -> Res<bool> {
    let m = load(&a.metric)?;
    let w = a.w.as_ref().unwrap_or(&a.u).0.clone();
    for (name, v) in [("x", &a.x.0), ("v", &a.v.0), ("u", &a.u.0), ("w", &w)] {
        check_dim(&m, name, v)?;
    }
    let n = m.dim();
    let s = TangentSample::new(a.x.0.clone(), a.v.0.clone());
    let l = m.eval_sample(&s)?;
    let g = fundamental_tensor(&m, &s)?;
    let c = cartan_tensor(&m, &s)?;
    let ch = christoffel(&m, &s)?;
    let r = hh_apply(&hh_curvature(&m, &s)?, &s.v, &a.u.0, &w);
    let k = flag_curvature(&m, &s, &a.u.0)?;
    let mut doc = json!({
        "metric": m.name(),
        "dim": n,
        "x": a.x.0,
        "v": a.v.0,
        "u": a.u.0,
        "w": w,
        "L": l,
        "g": nest(g.g.data(), n, 2),
        "condition": g.condition,
        "C": nest(c.data(), n, 3),
        "Gamma": nest(ch.gamma.data(), n, 3),
        "N": nest(ch.nonlinear.data(), n, 2),
        "R": r,
        "K": k,
    });
    if a.w.is_some() {
        doc["K_uw"] = json!(flag_curvature_predecessor(&m, &s, &a.u.0, &w)?);
    }
    emit(a.out.as_deref(), &format!("{}\n", serde_json::to_string_pretty(&doc)?))?;
    Ok(true)
}

pub fn geodesic(a: &GeodesicArgs, tol: Option<f64>) -> Res<bool> {
    let m = load(&a.metric)?;
    check_dim(&m, "x0", &a.x0.0)?;
    check_dim(&m, "v0", &a.v0.0)?;
    let tol = tol.unwrap_or(GEODESIC_TOL);
    if !(tol > 0.0) {
        return Err(format!("--tol must be positive, got {tol}").into());
    }
    let path = geodesic_shoot(&m, &a.x0.0, &a.v0.0, a.t_end, tol)?;
    let n = m.dim();
    let mut text = String::from("t");
    for i in 1..=n {
        write!(text, ",x{i}")?;
    }
    for i in 1..=n {
        write!(text, ",v{i}")?;
    }
    text.push_str(",L\n");
    let mut knots = path.knots().unwrap_or_default().to_vec();
    if a.t_end < 0.0 {
        knots.reverse();
    }
    for t in knots {
        let s = path.tangent_sample(t)?;
        write!(text, "{}", num(t))?;
        for c in s.x.iter().chain(&s.v) {
            write!(text, ",{}", num(*c))?;
        }
        writeln!(text, ",{}", num(m.eval_sample(&s)?))?;
    }
    emit(a.out.as_deref(), &text)?;
    Ok(true)
}

pub fn verify(a: &VerifyArgs, tol: Option<f64>) -> Res<bool> {
    let mut plan = if a.plan == "default" {
        VerificationPlan::default_plan(a.seed.unwrap_or(DEFAULT_SEED))
    } else {
        VerificationPlan::load(Path::new(&a.plan))?
    };
    if let Some(seed) = a.seed {
        plan.seed = seed;
    }
    if let Some(t) = tol {
        for id in IDENTITIES {
            plan.tolerances.insert(id.name.to_string(), t);
        }
    }
    let report = run_verification(&plan)?;
    emit(a.out.as_deref(), &format!("{}\n", report.to_json()))?;
    let failures = report.failures();
    for (metric, r) in &failures {
        match (&r.max_residual, &r.first_error) {
            (_, Some(e)) if r.errors > 0 => eprintln!("FAIL {metric}/{}: {} errors, first: {e}", r.name, r.errors),
            (Some(res), _) => eprintln!("FAIL {metric}/{}: residual {res:e} > {:e}", r.name, r.tolerance),
            _ => eprintln!("FAIL {metric}/{}", r.name),
        }
    }
    let checks: usize = report.metrics.iter().map(|m| m.identities.len()).sum();
    eprintln!(
        "verify: {} ({} of {checks} checks failed, seed {})",
        if report.passed { "PASS" } else { "FAIL" },
        failures.len(),
        report.seed
    );
    Ok(report.passed)
}

struct Row {
    i: usize,
    j: usize,
    x: Vec<f64>,
    v: Vec<f64>,
    u: Vec<f64>,
    k: Result<f64, String>,
}

pub fn table(a: &TableArgs) -> Res<bool> {
    let m = load(&a.metric)?;
    let n = m.dim();
    if n < 2 {
        return Err("table needs a metric of dimension at least 2".into());
    }
    let center = a.center.as_ref().map_or_else(|| vec![0.0; n], |c| c.0.clone());
    check_dim(&m, "center", &center)?;
    if !(a.half >= 0.0 && a.half.is_finite()) {
        return Err(format!("--box must be a finite non-negative number, got {}", a.half).into());
    }
    let grid = a.grid as usize;
    let cells: Vec<(usize, usize)> = (0..grid).flat_map(|i| (0..grid).map(move |j| (i, j))).collect();
    let rows: Vec<Row> = cells
        .par_iter()
        .map(|&(i, j)| {
            // base points along the first axis, flagpoles turning in the first plane;
            // the quarter offset keeps the flagpole off the coordinate axes
            let offset = if grid == 1 { 0.0 } else { -a.half + 2.0 * a.half * i as f64 / (grid - 1) as f64 };
            let mut x = center.clone();
            x[0] += offset;
            let theta = (j as f64 + 0.25) * PI / grid as f64;
            let (mut v, mut u) = (vec![0.0; n], vec![0.0; n]);
            (v[0], v[1]) = (theta.cos(), theta.sin());
            (u[0], u[1]) = (-theta.sin(), theta.cos());
            let k = flag_curvature(&m, &TangentSample::new(x.clone(), v.clone()), &u).map_err(|e| e.to_string());
            Row { i, j, x, v, u, k }
        })
        .collect();

    let text = match a.format {
        Format::Csv => {
            let mut t = String::from("i,j");
            for p in ["x", "v", "u"] {
                for c in 1..=n {
                    write!(t, ",{p}{c}")?;
                }
            }
            t.push_str(",K,status\n");
            for r in &rows {
                write!(t, "{},{}", r.i, r.j)?;
                for c in r.x.iter().chain(&r.v).chain(&r.u) {
                    write!(t, ",{}", num(*c))?;
                }
                match &r.k {
                    Ok(k) => writeln!(t, ",{},ok", num(*k))?,
                    Err(e) => writeln!(t, ",,\"{}\"", e.replace('"', "'"))?,
                }
            }
            t
        }
        Format::Json => {
            let arr: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "i": r.i,
                        "j": r.j,
                        "x": r.x,
                        "v": r.v,
                        "u": r.u,
                        "K": r.k.as_ref().ok(),
                        "status": r.k.as_ref().err().map_or("ok", String::as_str),
                    })
                })
                .collect();
            format!("{}\n", serde_json::to_string_pretty(&json!({ "metric": m.name(), "rows": arr }))?)
        }
    };
    emit(a.out.as_deref(), &text)?;
    Ok(true)
}
