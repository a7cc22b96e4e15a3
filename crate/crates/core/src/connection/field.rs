use crate::calculus::{Jet, JetSpace};
use crate::error::{Error, Result};
use crate::metrics::expr::{Bindings, Expr, VarScope};
use crate::metrics::MetricField;

/// A smooth vector field on the chart, one expression over `x1..xn` per
/// component, optionally restricted to `{cond > 0}` for each condition.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<Expr>,
    domain: Vec<Expr>,
}

impl VectorField {
    pub fn new(components: Vec<Expr>) -> Self {
        VectorField {
            components,
            domain: Vec::new(),
        }
    }

    pub fn parse(components: &[&str], dim: usize) -> Result<Self> {
        if components.len() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                found: components.len(),
            });
        }
        let components = components
            .iter()
            .enumerate()
            .map(|(i, text)| {
                Expr::parse(text, VarScope::chart(dim)).map_err(|source| Error::Parse {
                    field: format!("component {}", i + 1),
                    source,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::new(components))
    }

    /// The constant field with the given components.
    pub fn constant(values: &[f64]) -> Self {
        Self::new(values.iter().map(|&c| Expr::num(c)).collect())
    }

    pub fn with_domain(mut self, condition: Expr) -> Self {
        self.domain.push(condition);
        self
    }

    pub fn dim(&self) -> usize {
        self.components.len()
    }

    pub fn components(&self) -> &[Expr] {
        &self.components
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        self.domain.iter().all(|c| {
            c.eval(&Bindings::point(x))
                .map(|v| v > 0.0)
                .unwrap_or(false)
        })
    }

    fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimMismatch {
                expected: self.dim(),
                found: x.len(),
            });
        }
        if !self.contains(x) {
            return Err(Error::Domain(format!("point {x:?} of the vector field")));
        }
        Ok(())
    }

    pub fn value_at(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check(x)?;
        let b = Bindings::point(x);
        self.components
            .iter()
            .map(|c| c.eval(&b).map_err(Error::from))
            .collect()
    }

    /// Components as jets in the chart offsets around `x`.
    pub fn jets_at(&self, x: &[f64], order: usize) -> Result<Vec<Jet>> {
        self.check(x)?;
        let space = JetSpace::get(x.len(), order);
        let seeds: Vec<Jet> = x
            .iter()
            .enumerate()
            .map(|(i, &c)| Jet::variable(&space, i, c))
            .collect();
        self.eval_jets(&seeds)
    }

    /// Components evaluated on arbitrary coordinate jets.
    pub fn eval_jets(&self, x: &[Jet]) -> Result<Vec<Jet>> {
        let b = Bindings::point(x);
        self.components
            .iter()
            .map(|c| c.eval(&b).map_err(Error::from))
            .collect()
    }

    /// `V(x) ∈ A`.
    pub fn is_admissible(&self, m: &MetricField, x: &[f64]) -> bool {
        self.value_at(x).map(|v| m.in_domain(x, &v)).unwrap_or(false)
    }
}
