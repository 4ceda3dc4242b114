//! Higher-order transition tensors and the stationary distribution of the
//! super-spacey random surfer.
//!
//! The surfer follows a defined tensor column when one exists, jumps to a
//! state drawn from its own history when the column is empty, and teleports
//! with probability `1 - alpha`. Its stationary vector solves
//!
//! ```text
//! x = α P x^{m-1} + α (1 - ‖P x^{m-1}‖₁) x + (1 - α) v
//! ```
//!
//! which is computed here by fixed-point iteration.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::SparseTensor;

/// Column-normalized tensor. Only non-empty ("feasible") columns carry
/// entries; each of them sums to one.
#[derive(Debug, Clone)]
pub struct TransitionTensor {
    tensor: SparseTensor,
    columns: Vec<Range<usize>>,
    n: usize,
}

impl TransitionTensor {
    pub fn tensor(&self) -> &SparseTensor {
        &self.tensor
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.tensor.order()
    }

    pub fn num_feasible(&self) -> usize {
        self.columns.len()
    }

    /// The trailing index tuple `(i_2, ..., i_m)` of every feasible column.
    pub fn feasible_columns(&self) -> impl Iterator<Item = &[u32]> + '_ {
        self.columns.iter().map(|r| &self.tensor.entry(r.start).0[1..])
    }

    /// Entry range of the column with trailing tuple `key`, if feasible.
    pub fn find_column(&self, key: &[u32]) -> Option<Range<usize>> {
        self.columns
            .binary_search_by(|r| self.tensor.entry(r.start).0[1..].cmp(key))
            .ok()
            .map(|c| self.columns[c].clone())
    }

    pub fn column_ranges(&self) -> &[Range<usize>] {
        &self.columns
    }
}

/// Divides every non-empty column of `t` by its sum.
pub fn normalize(t: &SparseTensor) -> Result<TransitionTensor> {
    let n = t.dim()?;
    let columns = t.column_ranges();
    let mut values = t.values().to_vec();
    for r in &columns {
        let sum: f64 = values[r.clone()].iter().sum();
        for v in &mut values[r.clone()] {
            *v /= sum;
        }
    }
    let mut indices = Vec::with_capacity(t.nnz() * t.order());
    for (idx, _) in t.iter() {
        indices.extend_from_slice(idx);
    }
    let tensor = SparseTensor::from_parts(t.dims().to_vec(), indices, values, t.is_symmetric());
    debug_assert_eq!(tensor.nnz(), t.nnz());
    Ok(TransitionTensor { tensor, columns, n })
}

#[derive(Debug, Clone)]
pub struct StationaryOptions {
    pub alpha: f64,
    /// Teleportation vector; uniform when `None`.
    pub v: Option<Vec<f64>>,
    pub tol: f64,
    pub max_iter: usize,
    /// Starting iterate; `v` when `None`.
    pub x0: Option<Vec<f64>>,
}

impl Default for StationaryOptions {
    fn default() -> Self {
        Self {
            alpha: 0.8,
            v: None,
            tol: 1e-10,
            max_iter: 10_000,
            x0: None,
        }
    }
}

impl StationaryOptions {
    pub fn with_alpha(alpha: f64) -> Self {
        Self {
            alpha,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StationaryDistribution {
    pub x: Vec<f64>,
    /// `‖α P x² + α (1 - ‖P x²‖₁) x + (1 - α) v - x‖₁` at the returned `x`.
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub alpha: f64,
    pub v: Vec<f64>,
}

pub(crate) fn check_probability(name: &str, p: &[f64], n: usize) -> Result<()> {
    if p.len() != n {
        return Err(Error::InvalidProbability(format!("{name} has length {}, expected {n}", p.len())));
    }
    if let Some(bad) = p.iter().find(|&&x| !(x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidProbability(format!("{name} has entry {bad}")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidProbability(format!("{name} sums to {sum}")));
    }
    Ok(())
}

/// One application of the fixed-point map. Returns the new iterate.
fn step(p: &TransitionTensor, alpha: f64, v: &[f64], x: &[f64]) -> Vec<f64> {
    let y = p.tensor.apply_squared(x).expect("dimensions checked by caller");
    let mass: f64 = y.iter().sum();
    let keep = alpha * (1.0 - mass);
    y.iter()
        .zip(x)
        .zip(v)
        .map(|((&yi, &xi), &vi)| alpha * yi + keep * xi + (1.0 - alpha) * vi)
        .collect()
}

fn l1_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// `‖α P x² + α (1 - ‖P x²‖₁) x + (1 - α) v - x‖₁`
pub fn stationary_residual(p: &TransitionTensor, alpha: f64, v: &[f64], x: &[f64]) -> Result<f64> {
    if x.len() != p.n || v.len() != p.n {
        return Err(Error::LengthMismatch {
            expected: p.n,
            actual: if x.len() != p.n { x.len() } else { v.len() },
        });
    }
    Ok(l1_distance(&step(p, alpha, v, x), x))
}

pub fn solve_stationary(p: &TransitionTensor, opts: &StationaryOptions) -> Result<StationaryDistribution> {
    solve_stationary_observed(p, opts, |_, _| {})
}

/// Same as [`solve_stationary`], calling `observe(k, x_k)` on every new
/// iterate (`k` starts at 1).
pub fn solve_stationary_observed<F>(
    p: &TransitionTensor,
    opts: &StationaryOptions,
    mut observe: F,
) -> Result<StationaryDistribution>
where
    F: FnMut(usize, &[f64]),
{
    let n = p.n;
    if n == 0 {
        return Err(Error::InvalidParameter("stationary distribution of an empty tensor".into()));
    }
    if !(opts.alpha > 0.0 && opts.alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {}", opts.alpha)));
    }
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {}", opts.tol)));
    }
    let v = match &opts.v {
        Some(v) => {
            check_probability("teleportation vector", v, n)?;
            v.clone()
        }
        None => vec![1.0 / n as f64; n],
    };
    let mut x = match &opts.x0 {
        Some(x0) => {
            check_probability("starting vector", x0, n)?;
            x0.clone()
        }
        None => v.clone(),
    };

    let alpha = opts.alpha;
    let mut iterations = 0;
    let mut converged = false;
    while iterations < opts.max_iter {
        let next = step(p, alpha, &v, &x);
        iterations += 1;
        let diff = l1_distance(&next, &x);
        x = next;
        observe(iterations, &x);
        if diff <= opts.tol {
            converged = true;
            break;
        }
    }
    if !converged {
        log::warn!(
            "stationary iteration stopped after {iterations} steps without reaching tol {:e}",
            opts.tol
        );
    }
    let residual = l1_distance(&step(p, alpha, &v, &x), &x);
    Ok(StationaryDistribution {
        x,
        residual,
        iterations,
        converged,
        alpha,
        v,
    })
}
