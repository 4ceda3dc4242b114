//! Biased conductance and the sweep cut over an eigenvector ordering.
//!
//! For a chain started from a fixed distribution `p`, the biased
//! conductance of `S` is the larger of the one-step exit probabilities
//! `Pr(X₁ ∉ S | X₀ ∈ S)` and `Pr(X₁ ∈ S | X₀ ∉ S)`. The rank-one part of
//! `P̃` is handled in closed form, so no dense column is ever formed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::ImplicitChain;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    /// The chosen prefix of the sorted order, sorted by index.
    pub set: Vec<usize>,
    pub phi: f64,
    /// Prefix length `k` of the chosen set in the sorted order.
    pub split: usize,
    /// The ordering vector was constant, so the cut is arbitrary.
    pub degenerate: bool,
}

/// Running sums that determine both exit probabilities.
#[derive(Debug, Default, Clone, Copy)]
struct CutState {
    /// `Σ_{j∈S, i∉S} p_j Px_ij`
    out_mass: f64,
    /// `Σ_{j∉S, i∈S} p_j Px_ij`
    in_mass: f64,
    p_in: f64,
    /// `Σ_{j∈S} p_j (1 - c_j)`
    defect_in: f64,
    x_in: f64,
}

struct Totals {
    p: f64,
    defect: f64,
    x: f64,
}

impl CutState {
    fn phi(&self, t: &Totals) -> f64 {
        let p_out = t.p - self.p_in;
        if self.p_in <= 0.0 || p_out <= 0.0 {
            return 1.0;
        }
        let x_out = t.x - self.x_in;
        let exit_s = (self.out_mass + self.defect_in * x_out) / self.p_in;
        let exit_rest = (self.in_mass + (t.defect - self.defect_in) * self.x_in) / p_out;
        exit_s.max(exit_rest)
    }
}

fn totals(chain: &ImplicitChain, p: &[f64]) -> Totals {
    Totals {
        p: p.iter().sum(),
        defect: p.iter().zip(chain.column_sums()).map(|(pj, cj)| pj * (1.0 - cj)).sum(),
        x: chain.x().iter().sum(),
    }
}

fn check_bias(chain: &ImplicitChain, p: &[f64]) -> Result<()> {
    if p.len() != chain.dim() {
        return Err(Error::LengthMismatch {
            expected: chain.dim(),
            actual: p.len(),
        });
    }
    crate::stochastic::check_probability("bias vector", p, chain.dim())
}

/// `φ_p(S)` evaluated from scratch. Sides carrying no `p` mass score 1.
pub fn biased_conductance(chain: &ImplicitChain, set: &[usize], p: &[f64]) -> Result<f64> {
    check_bias(chain, p)?;
    let n = chain.dim();
    let mut inside = vec![false; n];
    for &i in set {
        if i >= n {
            return Err(Error::InvalidParameter(format!("index {i} outside a chain of {n} states")));
        }
        inside[i] = true;
    }
    let size = inside.iter().filter(|&&b| b).count();
    if size == 0 || size == n {
        return Err(Error::InvalidParameter("cut set must be a non-empty proper subset".into()));
    }

    let c = chain.column_sums();
    let x = chain.x();
    let mut s = CutState::default();
    for j in 0..n {
        let (rows, vals) = chain.px().col(j);
        let crossing: f64 = rows
            .iter()
            .zip(vals)
            .filter(|(&i, _)| inside[i] != inside[j])
            .map(|(_, &v)| v)
            .sum();
        if inside[j] {
            s.out_mass += p[j] * crossing;
            s.p_in += p[j];
            s.defect_in += p[j] * (1.0 - c[j]);
            s.x_in += x[j];
        } else {
            s.in_mass += p[j] * crossing;
        }
    }
    Ok(s.phi(&totals(chain, p)))
}

/// Sort order of `z` (ascending, ties by index) and `φ_p` of every prefix
/// `S_k`, `k = 1..n-1`, updated incrementally.
pub fn sweep_profile(chain: &ImplicitChain, z: &[f64], p: &[f64]) -> Result<(Vec<usize>, Vec<f64>)> {
    check_bias(chain, p)?;
    let n = chain.dim();
    if z.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: z.len(),
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]).then(a.cmp(&b)));

    let t = totals(chain, p);
    let c = chain.column_sums();
    let x = chain.x();
    let rows_of = chain.px_transpose();
    let mut inside = vec![false; n];
    let mut s = CutState::default();
    let mut phis = Vec::with_capacity(n.saturating_sub(1));

    for &v in order.iter().take(n.saturating_sub(1)) {
        // Column v: transitions out of v.
        let (rows, vals) = chain.px().col(v);
        for (&i, &w) in rows.iter().zip(vals) {
            if i == v {
                continue;
            }
            if inside[i] {
                s.in_mass -= p[v] * w;
            } else {
                s.out_mass += p[v] * w;
            }
        }
        // Row v: transitions into v.
        let (cols, vals) = rows_of.col(v);
        for (&j, &w) in cols.iter().zip(vals) {
            if j == v {
                continue;
            }
            if inside[j] {
                s.out_mass -= p[j] * w;
            } else {
                s.in_mass += p[j] * w;
            }
        }
        inside[v] = true;
        s.p_in += p[v];
        s.defect_in += p[v] * (1.0 - c[v]);
        s.x_in += x[v];
        phis.push(s.phi(&t));
    }
    Ok((order, phis))
}

/// Picks the prefix of the `z` ordering with the smallest biased
/// conductance. Near-ties (within `1e-12`) go to the more balanced split.
pub fn sweep_cut(chain: &ImplicitChain, z: &[f64], p: &[f64]) -> Result<SweepResult> {
    let n = chain.dim();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("sweep needs at least two states, got {n}")));
    }
    let (order, phis) = sweep_profile(chain, z, p)?;

    let (lo, hi) = z.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    let degenerate = !(hi - lo > 1e-14 * hi.abs().max(lo.abs()).max(1e-300)) || !lo.is_finite() || !hi.is_finite();

    let imbalance = |k: usize| (2 * k).abs_diff(n);
    let mut best = 0;
    for k in 1..phis.len() {
        let (a, b) = (phis[k], phis[best]);
        if a < b - 1e-12 || ((a - b).abs() <= 1e-12 && imbalance(k + 1) < imbalance(best + 1)) {
            best = k;
        }
    }
    let split = best + 1;
    let mut set = order[..split].to_vec();
    set.sort_unstable();
    Ok(SweepResult {
        set,
        phi: phis[best],
        split,
        degenerate,
    })
}
