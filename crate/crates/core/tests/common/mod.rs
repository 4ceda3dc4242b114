#![allow(dead_code)]

use std::collections::HashMap;

use gtsc_core::{ImplicitChain, SparseTensor};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random non-negative tensor with about `nnz` entries.
pub fn random_tensor(rng: &mut ChaCha8Rng, n: usize, order: usize, nnz: usize) -> SparseTensor {
    let entries: Vec<(Vec<usize>, f64)> = (0..nnz)
        .map(|_| {
            let idx = (0..order).map(|_| rng.random_range(0..n)).collect();
            (idx, rng.random_range(0.1..2.0))
        })
        .collect();
    SparseTensor::from_entries(vec![n; order], entries).unwrap()
}

pub fn random_probability(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

pub fn as_map(t: &SparseTensor) -> HashMap<Vec<usize>, f64> {
    t.iter()
        .map(|(idx, w)| (idx.iter().map(|&i| i as usize).collect(), w))
        .collect()
}

/// Every index tuple of length `order` over `0..n`.
pub fn all_tuples(n: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..order {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |i| {
                    let mut u = t.clone();
                    u.push(i);
                    u
                })
            })
            .collect();
    }
    out
}

/// Column-normalized tensor as a dense map, by brute force.
pub fn dense_transition(t: &SparseTensor) -> HashMap<Vec<usize>, f64> {
    let n = t.dims()[0];
    let order = t.order();
    let m = as_map(t);
    let mut out = HashMap::new();
    for col in all_tuples(n, order - 1) {
        let key = |i: usize| {
            let mut k = vec![i];
            k.extend(&col);
            k
        };
        let s: f64 = (0..n).map(|i| m.get(&key(i)).copied().unwrap_or(0.0)).sum();
        if s > 0.0 {
            for i in 0..n {
                if let Some(&w) = m.get(&key(i)) {
                    out.insert(key(i), w / s);
                }
            }
        }
    }
    out
}

/// `y_i = Σ T[i, j, k, ...] x_j x_k ...` by a full loop.
pub fn dense_apply(t: &HashMap<Vec<usize>, f64>, n: usize, order: usize, x: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; n];
    for idx in all_tuples(n, order) {
        if let Some(&w) = t.get(&idx) {
            y[idx[0]] += w * idx[1..].iter().map(|&j| x[j]).product::<f64>();
        }
    }
    y
}

/// `P[x]` for a 3-mode transition tensor: `sum_k P[i, j, k] x_k`.
pub fn dense_px(p: &HashMap<Vec<usize>, f64>, n: usize, x: &[f64]) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                if let Some(&w) = p.get(&vec![i, j, k]) {
                    out[i][j] += w * x[k];
                }
            }
        }
    }
    out
}

/// `P[x] + x (e^T - e^T P[x])` written out.
pub fn dense_chain(px: &[Vec<f64>], x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let c: Vec<f64> = (0..n).map(|j| (0..n).map(|i| px[i][j]).sum()).collect();
    (0..n)
        .map(|i| (0..n).map(|j| px[i][j] + x[i] * (1.0 - c[j])).collect())
        .collect()
}

pub fn matvec(a: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    a.iter().map(|row| row.iter().zip(y).map(|(a, b)| a * b).sum()).collect()
}

pub fn tr_matvec(a: &[Vec<f64>], y: &[f64]) -> Vec<f64> {
    let n = a[0].len();
    (0..n).map(|j| a.iter().zip(y).map(|(row, yi)| row[j] * yi).sum()).collect()
}

/// `max(exit(S), exit(S̄))` straight from the dense chain.
pub fn dense_biased_conductance(chain: &[Vec<f64>], set: &[usize], p: &[f64]) -> f64 {
    let n = p.len();
    let mut inside = vec![false; n];
    for &i in set {
        inside[i] = true;
    }
    let exit = |side: bool| {
        let (mut num, mut den) = (0.0, 0.0);
        for j in (0..n).filter(|&j| inside[j] == side) {
            den += p[j];
            num += p[j] * (0..n).filter(|&i| inside[i] != side).map(|i| chain[i][j]).sum::<f64>();
        }
        if den == 0.0 {
            1.0
        } else {
            num / den
        }
    };
    exit(true).max(exit(false))
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

pub fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

pub fn chain_dense(chain: &ImplicitChain) -> Vec<Vec<f64>> {
    chain.to_dense()
}
