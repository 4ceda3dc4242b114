use crate::error::{Error, Result};
use crate::matrix::CscMatrix;
use crate::stochastic::check_probability;

/// Stationary vector of `α colnorm(M) + (1 - α) v eᵀ`, with dangling
/// columns of `M` replaced by `v`. Power iteration until the ℓ1 change
/// falls below `tol`; the map is an `α`-contraction, so the residual of the
/// returned vector is below `tol` as well.
pub fn pagerank(m: &CscMatrix, alpha: f64, v: Option<&[f64]>, tol: f64) -> Result<Vec<f64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(Error::InvalidParameter(format!(
            "pagerank needs a square matrix, got {}x{}",
            n,
            m.ncols()
        )));
    }
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha must lie in [0, 1), got {alpha}")));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be positive, got {tol}")));
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let v: Vec<f64> = match v {
        Some(v) => {
            check_probability("teleportation vector", v, n)?;
            v.to_vec()
        }
        None => vec![1.0 / n as f64; n],
    };
    if m.triplets().any(|(_, _, w)| w < 0.0) {
        return Err(Error::InvalidParameter("pagerank needs a non-negative matrix".into()));
    }

    let sums = m.col_sums();
    let mut x = v.clone();
    // α^k ≤ tol bounds the iterations needed.
    let max_iter = ((tol.ln() / alpha.max(1e-300).ln()).ceil() as usize).saturating_add(10).max(10);
    for _ in 0..max_iter {
        let mut next = vec![0.0; n];
        let mut dangling = 0.0;
        for j in 0..n {
            if sums[j] > 0.0 {
                let (rows, vals) = m.col(j);
                let share = x[j] / sums[j];
                for (&i, &w) in rows.iter().zip(vals) {
                    next[i] += alpha * w * share;
                }
            } else {
                dangling += x[j];
            }
        }
        let spread = alpha * dangling + (1.0 - alpha);
        for (xi, vi) in next.iter_mut().zip(&v) {
            *xi += spread * vi;
        }
        let diff: f64 = next.iter().zip(&x).map(|(a, b)| (a - b).abs()).sum();
        x = next;
        if diff <= tol {
            break;
        }
    }
    Ok(x)
}
