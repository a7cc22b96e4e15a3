//! Randomized verification of the identities.
//!
//! A [`VerificationPlan`] lists metrics and sample counts. For every metric,
//! samples are drawn up front from a seeded ChaCha8 stream (one stream per
//! metric entry), the identities of [`IDENTITIES`] are evaluated on all
//! samples in parallel, and the per-identity maxima are assembled in sample
//! order, so the report depends only on the plan and the seed.

mod identities;
mod plan;
mod sampling;

pub use identities::{Identity, FLOOR, IDENTITIES};
pub use plan::{
    FieldSpec, IdentityResult, MetricReport, PlanMetric, VerificationPlan, VerificationReport, WorstSample,
    DEFAULT_SAMPLES, MAX_FIELD_DEGREE,
};
pub use sampling::MAX_RETRIES;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::MAX_CONDITION;

pub fn run_verification(plan: &VerificationPlan) -> Result<VerificationReport> {
    plan.validate()?;
    let mut metrics = Vec::with_capacity(plan.metrics.len());
    for (idx, entry) in plan.metrics.iter().enumerate() {
        let m = plan.load_metric(entry)?;
        let n = m.dim();
        let center = entry.center.clone().unwrap_or_else(|| vec![0.0; n]);
        if center.len() != n {
            return Err(Error::DimMismatch {
                expected: n,
                found: center.len(),
            });
        }
        let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
        rng.set_stream(idx as u64);
        let count = entry.samples.unwrap_or(plan.samples);
        let mut rejected = 0;
        let samples = (0..count)
            .map(|_| {
                sampling::draw_sample(
                    &mut rng,
                    &m,
                    &center,
                    entry.x_box.unwrap_or(1.0),
                    entry.velocity_box.unwrap_or(1.0),
                    &plan.fields,
                    entry.max_condition.unwrap_or(MAX_CONDITION),
                    &mut rejected,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        let outcomes: Vec<identities::Outcome> = samples.par_iter().map(|s| identities::evaluate(&m, s)).collect();

        let mut results = Vec::new();
        for id in IDENTITIES {
            let tolerance = plan.tolerance(id.name);
            let mut res = IdentityResult {
                name: id.name.to_string(),
                tolerance,
                max_residual: None,
                worst: None,
                evaluated: 0,
                errors: 0,
                first_error: None,
                passed: true,
            };
            for (i, outcome) in outcomes.iter().enumerate() {
                for (name, r) in outcome {
                    if *name != id.name {
                        continue;
                    }
                    match r {
                        Ok(value) => {
                            res.evaluated += 1;
                            if res.max_residual.map_or(true, |best| *value > best) {
                                res.max_residual = Some(*value);
                                res.worst = Some(WorstSample {
                                    index: i,
                                    x: samples[i].x.clone(),
                                    v: samples[i].v.clone(),
                                });
                            }
                        }
                        Err(e) => {
                            res.errors += 1;
                            if res.first_error.is_none() {
                                res.first_error = Some(format!("sample {i}: {e}"));
                            }
                        }
                    }
                }
            }
            if res.evaluated == 0 && res.errors == 0 {
                continue;
            }
            res.passed = res.errors == 0 && res.max_residual.map_or(false, |r| r <= tolerance);
            results.push(res);
        }
        let passed = results.iter().all(|r| r.passed);
        metrics.push(MetricReport {
            metric: m.name().to_string(),
            dim: n,
            samples: count,
            rejected,
            identities: results,
            passed,
        });
    }
    let passed = metrics.iter().all(|m| m.passed);
    Ok(VerificationReport {
        seed: plan.seed,
        metrics,
        passed,
    })
}
