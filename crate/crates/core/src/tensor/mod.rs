//! Sparse m-mode tensors in coordinate form.
//!
//! Entries are kept sorted by the tuple `(i_2, ..., i_m, i_1)`, so every
//! tensor column (all indices but the first fixed) is a contiguous run.
//! Weights are strictly positive; explicit zeros are dropped and duplicate
//! tuples are summed when a tensor is built.

mod io;
mod select;
mod symmetry;

pub use io::{load_coordinate, write_coordinate, IndexBase};
pub use select::{remove_empty_indices, subtensor, IndexMap};
pub use symmetry::{embed_rectangular, symmetrize_square, ModeClassMap};

use std::cmp::Ordering;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::matrix::CscMatrix;

#[derive(Debug, Clone, PartialEq)]
pub struct SparseTensor {
    dims: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
    symmetric: bool,
}

/// Accumulates entries before they are sorted and merged into a tensor.
#[derive(Debug, Clone)]
pub struct TensorBuilder {
    dims: Vec<usize>,
    indices: Vec<u32>,
    values: Vec<f64>,
}

impl TensorBuilder {
    pub fn new(dims: Vec<usize>) -> Self {
        Self {
            dims,
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn with_capacity(dims: Vec<usize>, entries: usize) -> Self {
        let order = dims.len();
        Self {
            dims,
            indices: Vec::with_capacity(entries * order),
            values: Vec::with_capacity(entries),
        }
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Adds `weight` at `index`. Zero weights are skipped.
    pub fn push(&mut self, index: &[usize], weight: f64) -> Result<()> {
        if index.len() != self.dims.len() {
            return Err(Error::InvalidEntry(format!(
                "index tuple has {} modes, tensor has {}",
                index.len(),
                self.dims.len()
            )));
        }
        if !weight.is_finite() || weight < 0.0 {
            return Err(Error::InvalidEntry(format!("weight {weight} is not a non-negative number")));
        }
        for (mode, (&i, &d)) in index.iter().zip(&self.dims).enumerate() {
            if i >= d {
                return Err(Error::InvalidEntry(format!(
                    "index {i} out of range for mode {mode} (dimension {d})"
                )));
            }
        }
        if weight == 0.0 {
            return Ok(());
        }
        self.indices.extend(index.iter().map(|&i| i as u32));
        self.values.push(weight);
        Ok(())
    }

    pub(crate) fn push_unchecked(&mut self, index: &[u32], weight: f64) {
        debug_assert_eq!(index.len(), self.dims.len());
        self.indices.extend_from_slice(index);
        self.values.push(weight);
    }

    pub fn build(self) -> SparseTensor {
        SparseTensor::from_parts(self.dims, self.indices, self.values, false)
    }
}

/// Column-major key: modes 2..m first, then mode 1.
fn cmp_tuples(a: &[u32], b: &[u32]) -> Ordering {
    a[1..].cmp(&b[1..]).then(a[0].cmp(&b[0]))
}

impl SparseTensor {
    /// Sorts and merges raw entries. Duplicate tuples are summed and zero
    /// sums dropped.
    pub(crate) fn from_parts(dims: Vec<usize>, indices: Vec<u32>, values: Vec<f64>, symmetric: bool) -> Self {
        let order = dims.len();
        let nnz = values.len();
        debug_assert_eq!(indices.len(), nnz * order);

        let sorted = order < 2
            || (1..nnz).all(|e| {
                cmp_tuples(&indices[(e - 1) * order..e * order], &indices[e * order..(e + 1) * order])
                    == Ordering::Less
            });
        if sorted && values.iter().all(|&v| v > 0.0) {
            return Self {
                dims,
                indices,
                values,
                symmetric,
            };
        }

        let mut perm: Vec<usize> = (0..nnz).collect();
        perm.sort_unstable_by(|&a, &b| {
            cmp_tuples(&indices[a * order..(a + 1) * order], &indices[b * order..(b + 1) * order])
        });

        let mut out_idx = Vec::with_capacity(indices.len());
        let mut out_val = Vec::with_capacity(nnz);
        let mut k = 0;
        while k < nnz {
            let head = &indices[perm[k] * order..(perm[k] + 1) * order];
            let mut sum = 0.0;
            while k < nnz && &indices[perm[k] * order..(perm[k] + 1) * order] == head {
                sum += values[perm[k]];
                k += 1;
            }
            if sum > 0.0 {
                out_idx.extend_from_slice(head);
                out_val.push(sum);
            }
        }
        Self {
            dims,
            indices: out_idx,
            values: out_val,
            symmetric,
        }
    }

    /// Builds a tensor from `(index tuple, weight)` pairs.
    pub fn from_entries<I>(dims: Vec<usize>, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, f64)>,
    {
        let mut builder = TensorBuilder::new(dims);
        for (index, weight) in entries {
            builder.push(&index, weight)?;
        }
        Ok(builder.build())
    }

    pub fn empty(dims: Vec<usize>) -> Self {
        Self {
            dims,
            indices: Vec::new(),
            values: Vec::new(),
            symmetric: false,
        }
    }

    pub fn order(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_square(&self) -> bool {
        self.dims.windows(2).all(|w| w[0] == w[1])
    }

    /// Dimension of a square tensor.
    pub fn dim(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.dims.first().copied().unwrap_or(0))
        } else {
            Err(Error::NotSquare(self.dims.clone()))
        }
    }

    /// Whether the tensor was built by symmetrization.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn entry(&self, e: usize) -> (&[u32], f64) {
        let m = self.order();
        (&self.indices[e * m..(e + 1) * m], self.values[e])
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = (&[u32], f64)> + '_ {
        (0..self.nnz()).map(move |e| self.entry(e))
    }

    /// Weight stored at `index`, or zero.
    pub fn get(&self, index: &[usize]) -> f64 {
        if index.len() != self.order() || index.iter().zip(&self.dims).any(|(&i, &d)| i >= d) {
            return 0.0;
        }
        let key: Vec<u32> = index.iter().map(|&i| i as u32).collect();
        let m = self.order();
        let (mut lo, mut hi) = (0, self.nnz());
        while lo < hi {
            let mid = (lo + hi) / 2;
            match cmp_tuples(&self.indices[mid * m..(mid + 1) * m], &key) {
                Ordering::Less => lo = mid + 1,
                Ordering::Greater => hi = mid,
                Ordering::Equal => return self.values[mid],
            }
        }
        0.0
    }

    /// Entry ranges of the non-empty columns, in storage order.
    pub fn column_ranges(&self) -> Vec<Range<usize>> {
        let m = self.order();
        let mut out = Vec::new();
        let mut start = 0;
        for e in 1..=self.nnz() {
            if e == self.nnz() || self.indices[e * m + 1..(e + 1) * m] != self.indices[start * m + 1..(start + 1) * m] {
                out.push(start..e);
                start = e;
            }
        }
        out
    }

    /// True when every stored tuple's distinct permutations are all stored
    /// with the same weight.
    pub fn is_permutation_closed(&self) -> bool {
        if !self.is_square() {
            return false;
        }
        let mut perm = Vec::new();
        self.iter().all(|(idx, w)| {
            let mut ok = true;
            symmetry::for_each_permutation(idx, &mut perm, |p| {
                let p: Vec<usize> = p.iter().map(|&i| i as usize).collect();
                if self.get(&p) != w {
                    ok = false;
                }
            });
            ok
        })
    }

    pub(crate) fn with_symmetric(mut self, symmetric: bool) -> Self {
        self.symmetric = symmetric;
        self
    }

    fn check_vector(&self, x: &[f64]) -> Result<()> {
        if self.order() < 2 {
            return Err(Error::TooFewModes {
                needed: 2,
                actual: self.order(),
            });
        }
        for &d in &self.dims[1..] {
            if d != x.len() {
                return Err(Error::LengthMismatch {
                    expected: d,
                    actual: x.len(),
                });
            }
        }
        Ok(())
    }

    /// `y_i = Σ T(i, i_2, ..., i_m) · x_{i_2} ⋯ x_{i_m}`: the vector product
    /// over all modes but the first.
    pub fn apply_squared(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_vector(x)?;
        let m = self.order();
        let mut y = vec![0.0; self.dims[0]];
        let mut last: Option<&[u32]> = None;
        let mut weight = 0.0;
        for (idx, v) in self.iter() {
            // Column tuples repeat in runs; reuse the product across a run.
            if last != Some(&idx[1..]) {
                weight = idx[1..m].iter().map(|&k| x[k as usize]).product();
                last = Some(&idx[1..]);
            }
            y[idx[0] as usize] += v * weight;
        }
        Ok(y)
    }

    /// `A_ij = Σ T(i, j, i_3, ..., i_m) · x_{i_3} ⋯ x_{i_m}`: contraction of
    /// modes 3..m. For a two-mode tensor this is the matrix itself.
    pub fn contract_to_matrix(&self, x: &[f64]) -> Result<CscMatrix> {
        self.check_vector(x)?;
        let triplets: Vec<_> = self
            .iter()
            .map(|(idx, v)| {
                let w: f64 = idx[2..].iter().map(|&k| x[k as usize]).product();
                (idx[0] as usize, idx[1] as usize, v * w)
            })
            .filter(|t| t.2 != 0.0)
            .collect();
        Ok(CscMatrix::from_triplets(self.dims[0], self.dims[1], &triplets))
    }

    /// `M_ij = Σ T(i, j, ...)`: sums out every mode past the second.
    pub fn flatten(&self) -> Result<CscMatrix> {
        if self.order() < 3 {
            return Err(Error::TooFewModes {
                needed: 3,
                actual: self.order(),
            });
        }
        let triplets: Vec<_> = self.iter().map(|(idx, v)| (idx[0] as usize, idx[1] as usize, v)).collect();
        Ok(CscMatrix::from_triplets(self.dims[0], self.dims[1], &triplets))
    }
}
