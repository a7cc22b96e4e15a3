//! Verification plans (TOML) and reports (JSON).
//!
//! ```toml
//! seed = 7
//! samples = 50
//!
//! [fields]
//! max_degree = 3
//! scale = 1.0
//!
//! [tolerances]
//! second_bianchi = 1e-7
//!
//! [[metrics]]
//! builtin = "funk"
//! dim = 3
//! box = 0.6
//! params = { radius = 1.0 }
//!
//! [[metrics]]
//! spec = "metrics/warped.spec"   # relative to the plan file
//! samples = 20
//! max_condition = 100.0
//! ```

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::identities::IDENTITIES;
use crate::error::{Error, Result};
use crate::geometry::MAX_CONDITION;
use crate::metrics::spec_file::load_metric_file;
use crate::metrics::{BuiltinParams, MetricField};

pub const DEFAULT_SAMPLES: usize = 50;
pub const MAX_FIELD_DEGREE: usize = 3;

/// Random polynomial field generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSpec {
    /// Highest total degree of the random polynomial fields, at most 3.
    #[serde(default = "default_degree")]
    pub max_degree: usize,
    /// Coefficients are uniform in `[-scale, scale]`.
    #[serde(default = "default_scale")]
    pub scale: f64,
}

fn default_degree() -> usize {
    MAX_FIELD_DEGREE
}

fn default_scale() -> f64 {
    1.0
}

fn default_samples() -> usize {
    DEFAULT_SAMPLES
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec {
            max_degree: default_degree(),
            scale: default_scale(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanMetric {
    pub builtin: Option<String>,
    pub dim: Option<usize>,
    pub params: Option<BuiltinParams>,
    /// Path to a metric spec file.
    pub spec: Option<PathBuf>,
    /// Overrides the plan-wide sample count.
    pub samples: Option<usize>,
    /// Half-width of the box `x` is drawn from.
    #[serde(rename = "box")]
    pub x_box: Option<f64>,
    /// Half-width of the box `v` is drawn from.
    pub velocity_box: Option<f64>,
    /// Center of the `x` box (the origin by default).
    pub center: Option<Vec<f64>>,
    /// Samples whose fundamental tensor has a larger condition number are
    /// redrawn. Defaults to the library-wide limit.
    pub max_condition: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationPlan {
    pub seed: u64,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub fields: FieldSpec,
    /// Overrides of the builtin tolerance table, by identity name.
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    pub metrics: Vec<PlanMetric>,
    /// Directory spec paths are resolved against.
    #[serde(skip)]
    pub base_dir: Option<PathBuf>,
}

fn builtin_entry(name: &str, x_box: f64) -> PlanMetric {
    PlanMetric {
        builtin: Some(name.to_string()),
        dim: Some(3),
        params: None,
        spec: None,
        samples: None,
        x_box: Some(x_box),
        velocity_box: None,
        center: None,
        max_condition: None,
    }
}

impl VerificationPlan {
    /// The builtin plan: every builtin metric in dimension 3, 50 samples each.
    pub fn default_plan(seed: u64) -> Self {
        let metrics = vec![
            builtin_entry("euclidean", 1.0),
            PlanMetric {
                params: Some(BuiltinParams {
                    perturbation: Some(0.1),
                    ..BuiltinParams::default()
                }),
                ..builtin_entry("riemannian", 1.0)
            },
            // g degenerates where a velocity component vanishes
            PlanMetric {
                max_condition: Some(100.0),
                ..builtin_entry("minkowski_quartic", 1.0)
            },
            builtin_entry("funk", 0.6),
            builtin_entry("sphere_round", 1.0),
            builtin_entry("hyperbolic", 0.6),
        ];
        VerificationPlan {
            seed,
            samples: DEFAULT_SAMPLES,
            fields: FieldSpec::default(),
            tolerances: BTreeMap::new(),
            metrics,
            base_dir: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let plan: VerificationPlan = toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))?;
        plan.validate()?;
        Ok(plan)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        let mut plan = Self::from_toml(&text)?;
        plan.base_dir = path.parent().map(Path::to_path_buf);
        Ok(plan)
    }

    pub fn validate(&self) -> Result<()> {
        if self.metrics.is_empty() {
            return Err(Error::Config("plan lists no metrics".into()));
        }
        if self.fields.max_degree > MAX_FIELD_DEGREE {
            return Err(Error::Config(format!(
                "fields.max_degree {} exceeds {MAX_FIELD_DEGREE}",
                self.fields.max_degree
            )));
        }
        if !(self.fields.scale > 0.0 && self.fields.scale.is_finite()) {
            return Err(Error::Config("fields.scale must be positive".into()));
        }
        for (name, tol) in &self.tolerances {
            if !IDENTITIES.iter().any(|i| i.name == name) {
                return Err(Error::Config(format!("unknown identity {name:?} in tolerances")));
            }
            if !(*tol >= 0.0) {
                return Err(Error::Config(format!("tolerance for {name} must be non-negative")));
            }
        }
        for m in &self.metrics {
            match (&m.builtin, &m.spec) {
                (Some(_), None) if m.dim.is_some() => {}
                (Some(b), None) => return Err(Error::Config(format!("builtin {b:?} needs a dim"))),
                (None, Some(_)) if m.dim.is_none() && m.params.is_none() => {}
                (None, Some(p)) => {
                    return Err(Error::Config(format!(
                        "{}: dim and params belong in the spec file",
                        p.display()
                    )))
                }
                _ => return Err(Error::Config("each metric needs exactly one of builtin, spec".into())),
            }
            if let Some(c) = m.max_condition {
                if !(c >= 1.0 && c <= MAX_CONDITION) {
                    return Err(Error::Config(format!("max_condition must lie in [1, {MAX_CONDITION:e}]")));
                }
            }
            for (what, val) in [("box", m.x_box), ("velocity_box", m.velocity_box)] {
                if let Some(b) = val {
                    if !(b > 0.0 && b.is_finite()) {
                        return Err(Error::Config(format!("{what} must be positive")));
                    }
                }
            }
            if m.samples == Some(0) {
                return Err(Error::Config("samples must be positive".into()));
            }
        }
        if self.samples == 0 {
            return Err(Error::Config("samples must be positive".into()));
        }
        Ok(())
    }

    /// Tolerance of an identity after overrides.
    pub fn tolerance(&self, name: &str) -> f64 {
        self.tolerances.get(name).copied().unwrap_or_else(|| {
            IDENTITIES
                .iter()
                .find(|i| i.name == name)
                .map(|i| i.tolerance)
                .unwrap_or(0.0)
        })
    }

    pub(crate) fn load_metric(&self, entry: &PlanMetric) -> Result<MetricField> {
        match (&entry.builtin, &entry.spec) {
            (Some(name), None) => MetricField::builtin(
                name,
                entry.dim.unwrap_or(0),
                &entry.params.clone().unwrap_or_default(),
            ),
            (None, Some(path)) => {
                let full = match &self.base_dir {
                    Some(dir) if path.is_relative() => dir.join(path),
                    _ => path.clone(),
                };
                load_metric_file(&full)
            }
            _ => Err(Error::Config("each metric needs exactly one of builtin, spec".into())),
        }
    }
}

/// The worst sample of an identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WorstSample {
    pub index: usize,
    pub x: Vec<f64>,
    pub v: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IdentityResult {
    pub name: String,
    pub tolerance: f64,
    /// Largest residual over the samples; `null` if every evaluation failed.
    pub max_residual: Option<f64>,
    pub worst: Option<WorstSample>,
    pub evaluated: usize,
    pub errors: usize,
    pub first_error: Option<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricReport {
    pub metric: String,
    pub dim: usize,
    pub samples: usize,
    /// Draws rejected while sampling the domain.
    pub rejected: usize,
    pub identities: Vec<IdentityResult>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub seed: u64,
    pub metrics: Vec<MetricReport>,
    pub passed: bool,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// `(metric, identity)` pairs that failed.
    pub fn failures(&self) -> Vec<(&str, &IdentityResult)> {
        self.metrics
            .iter()
            .flat_map(|m| {
                m.identities
                    .iter()
                    .filter(|i| !i.passed)
                    .map(move |i| (m.metric.as_str(), i))
            })
            .collect()
    }

    pub fn identity(&self, metric: &str, name: &str) -> Option<&IdentityResult> {
        self.metrics
            .iter()
            .find(|m| m.metric == metric)?
            .identities
            .iter()
            .find(|i| i.name == name)
    }
}
