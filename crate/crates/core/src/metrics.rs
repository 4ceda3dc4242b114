//! Agreement between two flat clusterings.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Co-occurrence counts of predicted (rows) and true (columns) labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContingencyTable {
    pub counts: Vec<Vec<u64>>,
    pub row_sums: Vec<u64>,
    pub col_sums: Vec<u64>,
    pub n: u64,
}

fn compact(labels: &[usize]) -> (Vec<usize>, usize) {
    let mut ids = HashMap::new();
    let out = labels
        .iter()
        .map(|l| {
            let next = ids.len();
            *ids.entry(*l).or_insert(next)
        })
        .collect();
    (out, ids.len())
}

impl ContingencyTable {
    pub fn new(pred: &[usize], truth: &[usize]) -> Result<Self> {
        if pred.len() != truth.len() {
            return Err(Error::LengthMismatch {
                expected: truth.len(),
                actual: pred.len(),
            });
        }
        let (p, kp) = compact(pred);
        let (t, kt) = compact(truth);
        let mut counts = vec![vec![0u64; kt]; kp];
        for (&a, &b) in p.iter().zip(&t) {
            counts[a][b] += 1;
        }
        let row_sums = counts.iter().map(|r| r.iter().sum()).collect();
        let col_sums = (0..kt).map(|b| counts.iter().map(|r| r[b]).sum()).collect();
        Ok(Self {
            counts,
            row_sums,
            col_sums,
            n: pred.len() as u64,
        })
    }
}

fn pairs(k: u64) -> f64 {
    (k as f64) * (k as f64 - 1.0) / 2.0
}

/// Same-cluster pair counts: (both, predicted, true, total).
fn pair_counts(t: &ContingencyTable) -> (f64, f64, f64, f64) {
    let both = t.counts.iter().flatten().map(|&c| pairs(c)).sum();
    let pred = t.row_sums.iter().map(|&c| pairs(c)).sum();
    let truth = t.col_sums.iter().map(|&c| pairs(c)).sum();
    (both, pred, truth, pairs(t.n))
}

fn check_len(pred: &[usize]) -> Result<()> {
    if pred.len() < 2 {
        return Err(Error::InvalidParameter(format!("need at least two labels, got {}", pred.len())));
    }
    Ok(())
}

/// Adjusted Rand index. Returns 1 when both labelings are trivial in the
/// same way, since the index is undefined there.
pub fn ari(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(pred, truth)?;
    check_len(pred)?;
    let (both, p, q, total) = pair_counts(&t);
    let expected = p * q / total;
    let max = (p + q) / 2.0;
    if max == expected {
        return Ok(if both == expected && p == q { 1.0 } else { 0.0 });
    }
    Ok((both - expected) / (max - expected))
}

fn entropy(sums: &[u64], n: f64) -> f64 {
    sums.iter()
        .filter(|&&c| c > 0)
        .map(|&c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Mutual information normalized by the mean of the two entropies.
pub fn nmi(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(pred, truth)?;
    check_len(pred)?;
    let n = t.n as f64;
    let hp = entropy(&t.row_sums, n);
    let ht = entropy(&t.col_sums, n);
    if hp + ht == 0.0 {
        return Ok(1.0);
    }
    let mut mi = 0.0;
    for (a, row) in t.counts.iter().enumerate() {
        for (b, &c) in row.iter().enumerate() {
            if c > 0 {
                let c = c as f64;
                mi += c / n * (c * n / (t.row_sums[a] as f64 * t.col_sums[b] as f64)).ln();
            }
        }
    }
    Ok((2.0 * mi / (hp + ht)).clamp(0.0, 1.0))
}

/// F1 of same-cluster pairs. Two all-singleton labelings score 1.
pub fn f1_pairs(pred: &[usize], truth: &[usize]) -> Result<f64> {
    let t = ContingencyTable::new(pred, truth)?;
    check_len(pred)?;
    let (both, p, q, _) = pair_counts(&t);
    if p + q == 0.0 {
        return Ok(1.0);
    }
    Ok(2.0 * both / (p + q))
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Scores {
    pub ari: f64,
    pub nmi: f64,
    pub f1: f64,
}

pub fn scores(pred: &[usize], truth: &[usize]) -> Result<Scores> {
    Ok(Scores {
        ari: ari(pred, truth)?,
        nmi: nmi(pred, truth)?,
        f1: f1_pairs(pred, truth)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_labelings() {
        let a = [0, 0, 1, 1, 2, 5];
        let b = [7, 7, 3, 3, 1, 0];
        assert!((ari(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        assert!((nmi(&a, &b).unwrap() - 1.0).abs() < 1e-12);
        assert!((f1_pairs(&a, &b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_cluster_against_singletons() {
        let one = [0; 6];
        let single: Vec<usize> = (0..6).collect();
        assert_eq!(ari(&one, &single).unwrap(), 0.0);
        assert_eq!(f1_pairs(&one, &single).unwrap(), 0.0);
        assert_eq!(nmi(&one, &single).unwrap(), 0.0);
        assert_eq!(f1_pairs(&single, &single).unwrap(), 1.0);
    }

    #[test]
    fn length_mismatch() {
        assert!(ari(&[0, 1], &[0]).is_err());
        assert!(nmi(&[0], &[0]).is_err());
    }
}
