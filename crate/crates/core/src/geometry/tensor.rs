use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variance {
    Covariant,
    Contravariant,
}

/// Dense rank-k array over an n-dimensional chart, row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TensorBlock {
    dim: usize,
    variance: Vec<Variance>,
    /// Groups of axes the tensor is declared symmetric in.
    symmetry: Vec<Vec<usize>>,
    data: Vec<f64>,
}

impl TensorBlock {
    pub fn new(dim: usize, variance: Vec<Variance>, data: Vec<f64>) -> Self {
        assert!(variance.len() <= 4, "rank above 4");
        assert_eq!(data.len(), dim.pow(variance.len() as u32), "entry count mismatch");
        TensorBlock {
            dim,
            variance,
            symmetry: Vec::new(),
            data,
        }
    }

    pub fn zeros(dim: usize, variance: Vec<Variance>) -> Self {
        let len = dim.pow(variance.len() as u32);
        Self::new(dim, variance, vec![0.0; len])
    }

    pub fn covariant(dim: usize, rank: usize, data: Vec<f64>) -> Self {
        Self::new(dim, vec![Variance::Covariant; rank], data)
    }

    pub fn with_symmetry(mut self, group: Vec<usize>) -> Self {
        assert!(group.iter().all(|&a| a < self.rank()), "symmetry axis out of range");
        self.symmetry.push(group);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.variance.len()
    }

    pub fn variance(&self) -> &[Variance] {
        &self.variance
    }

    pub fn symmetry(&self) -> &[Vec<usize>] {
        &self.symmetry
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    fn offset(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.rank());
        index.iter().fold(0, |acc, &i| {
            debug_assert!(i < self.dim);
            acc * self.dim + i
        })
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.offset(index)]
    }

    pub fn set(&mut self, index: &[usize], value: f64) {
        let o = self.offset(index);
        self.data[o] = value;
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    /// All multi-indices in storage order.
    pub fn indices(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        let (dim, rank) = (self.dim, self.rank());
        (0..self.data.len()).map(move |mut flat| {
            let mut idx = vec![0; rank];
            for slot in idx.iter_mut().rev() {
                *slot = flat % dim;
                flat /= dim;
            }
            idx
        })
    }

    /// Largest deviation from the declared symmetries, relative to the
    /// largest entry (absolute when the tensor vanishes).
    pub fn symmetry_defect(&self) -> f64 {
        let scale = self.max_abs().max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for group in &self.symmetry {
            for idx in self.indices() {
                for a in 0..group.len() {
                    for b in (a + 1)..group.len() {
                        let mut swapped = idx.clone();
                        swapped.swap(group[a], group[b]);
                        let d = (self.get(&idx) - self.get(&swapped)).abs();
                        worst = worst.max(d);
                    }
                }
            }
        }
        if self.max_abs() == 0.0 {
            worst
        } else {
            worst / scale
        }
    }

    /// Contract `axis` with the covariant metric `g` (lowering an index).
    pub fn lower(&self, axis: usize, g: &TensorBlock) -> Result<TensorBlock> {
        if self.variance[axis] != Variance::Contravariant {
            return Err(Error::Invalid(format!("axis {axis} is already covariant")));
        }
        let mut out = self.contract_matrix(axis, g.data());
        out.variance[axis] = Variance::Covariant;
        Ok(out)
    }

    /// Contract `axis` with the inverse of `g` (raising an index).
    pub fn raise(&self, axis: usize, g: &TensorBlock) -> Result<TensorBlock> {
        if self.variance[axis] != Variance::Covariant {
            return Err(Error::Invalid(format!("axis {axis} is already contravariant")));
        }
        let n = self.dim;
        let gm = nalgebra::DMatrix::from_row_slice(n, n, g.data());
        let inv = gm
            .lu()
            .try_inverse()
            .ok_or(Error::Degenerate { condition: f64::INFINITY })?;
        let inv_rows: Vec<f64> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| inv[(i, j)])
            .collect();
        let mut out = self.contract_matrix(axis, &inv_rows);
        out.variance[axis] = Variance::Contravariant;
        Ok(out)
    }

    /// `out[..a..] = Σ_b m[a][b] self[..b..]` along `axis`.
    fn contract_matrix(&self, axis: usize, m: &[f64]) -> TensorBlock {
        let n = self.dim;
        let mut out = TensorBlock {
            dim: n,
            variance: self.variance.clone(),
            symmetry: self.symmetry.clone(),
            data: vec![0.0; self.data.len()],
        };
        for idx in self.indices() {
            let mut acc = 0.0;
            let mut src = idx.clone();
            for b in 0..n {
                src[axis] = b;
                acc += m[idx[axis] * n + b] * self.get(&src);
            }
            out.set(&idx, acc);
        }
        out
    }
}
