//! Metric spec files.
//!
//! A metric spec is a small TOML document. Either a builtin:
//!
//! ```toml
//! dim = 2
//! builtin = "funk"
//! [params]
//! radius = 1.0
//! ```
//!
//! or an explicit Lagrangian over `x1..xn, v1..vn`:
//!
//! ```toml
//! dim = 2
//! name = "warped"
//! lagrangian = "v1^2 + (1 + x1^2) * v2^2"
//! domain = ["1 - x1^2 - x2^2"]   # optional; each entry must be > 0
//! ```
//!
//! The expression grammar is documented in [`super::expr`].

use serde::Deserialize;

use super::expr::{Expr, VarScope};
use super::{BuiltinParams, MetricField};
use crate::error::{Error, Result};

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricDoc {
    dim: usize,
    name: Option<String>,
    builtin: Option<String>,
    params: Option<BuiltinParams>,
    lagrangian: Option<String>,
    #[serde(default)]
    domain: Vec<String>,
}

/// Parse a metric spec document.
pub fn load_metric_spec(text: &str) -> Result<MetricField> {
    let doc: MetricDoc = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    if doc.dim == 0 || doc.dim > 8 {
        return Err(Error::Config(format!("dim = {} outside 1..=8", doc.dim)));
    }
    let mut metric = match (&doc.builtin, &doc.lagrangian) {
        (Some(name), None) => {
            MetricField::builtin(name, doc.dim, &doc.params.clone().unwrap_or_default())?
        }
        (None, Some(text)) => {
            if doc.params.is_some() {
                return Err(Error::Config("`params` only applies to builtins".into()));
            }
            let e = Expr::parse(text, VarScope::metric(doc.dim)).map_err(|source| Error::Parse {
                field: "lagrangian".into(),
                source,
            })?;
            MetricField::expression("expression", doc.dim, e)
        }
        (Some(_), Some(_)) => {
            return Err(Error::Config("give either `builtin` or `lagrangian`, not both".into()))
        }
        (None, None) => return Err(Error::Config("missing `builtin` or `lagrangian`".into())),
    };
    for (i, cond) in doc.domain.iter().enumerate() {
        let e = Expr::parse(cond, VarScope::metric(doc.dim)).map_err(|source| Error::Parse {
            field: format!("domain[{i}]"),
            source,
        })?;
        metric = metric.with_domain(e);
    }
    if let Some(name) = &doc.name {
        metric = metric.with_name(name);
    }
    Ok(metric)
}

/// Read and parse a metric spec file.
pub fn load_metric_file(path: &std::path::Path) -> Result<MetricField> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    load_metric_spec(&text)
}
