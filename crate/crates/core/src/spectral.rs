//! The first-order chain `P̃ = P[x] + x (eᵀ - eᵀ P[x])` and its second left
//! eigenvector.
//!
//! `P̃` is dense, so it is never formed: both products cost one pass over
//! the non-zeros of `P[x]` plus `O(n)` for the rank-one part.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::CscMatrix;
use crate::stochastic::{check_probability, TransitionTensor};

#[derive(Debug, Clone)]
pub struct ImplicitChain {
    px: CscMatrix,
    px_t: CscMatrix,
    x: Vec<f64>,
    c: Vec<f64>,
}

/// Builds the chain from a transition tensor and its stationary vector.
pub fn build_chain(p: &TransitionTensor, x: &[f64]) -> Result<ImplicitChain> {
    check_probability("stationary vector", x, p.dim())?;
    let px = p.tensor().contract_to_matrix(x)?;
    ImplicitChain::new(px, x.to_vec())
}

impl ImplicitChain {
    /// `px` must be square with column sums in `[0, 1]`; `x` a probability
    /// vector of matching length.
    pub fn new(px: CscMatrix, x: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if px.nrows() != n || px.ncols() != n {
            return Err(Error::LengthMismatch {
                expected: px.nrows(),
                actual: n,
            });
        }
        check_probability("stationary vector", &x, n)?;
        let c = px.col_sums();
        if let Some((j, &cj)) = c.iter().enumerate().find(|(_, &cj)| !(-1e-12..=1.0 + 1e-12).contains(&cj)) {
            return Err(Error::InvalidParameter(format!("column {j} of P[x] sums to {cj}")));
        }
        let px_t = px.transpose();
        Ok(Self { px, px_t, x, c })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// The sparse part `P[x]`.
    pub fn px(&self) -> &CscMatrix {
        &self.px
    }

    /// `P[x]ᵀ`, giving row access to `P[x]`.
    pub fn px_transpose(&self) -> &CscMatrix {
        &self.px_t
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    /// Column sums of `P[x]`.
    pub fn column_sums(&self) -> &[f64] {
        &self.c
    }

    /// `P̃ y = P[x] y + x (Σ y - c·y)`
    pub fn apply(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.dim());
        let mut out = self.px.mul_vec(y);
        let scale: f64 = y.iter().zip(&self.c).map(|(yi, ci)| yi * (1.0 - ci)).sum();
        for (o, xi) in out.iter_mut().zip(&self.x) {
            *o += xi * scale;
        }
        out
    }

    /// `P̃ᵀ y = P[x]ᵀ y + (xᵀ y)(e - c)`
    pub fn apply_transpose(&self, y: &[f64]) -> Vec<f64> {
        assert_eq!(y.len(), self.dim());
        let mut out = self.px.tr_mul_vec(y);
        let xy: f64 = self.x.iter().zip(y).map(|(a, b)| a * b).sum();
        for (o, ci) in out.iter_mut().zip(&self.c) {
            *o += xy * (1.0 - ci);
        }
        out
    }

    /// Dense `P̃`, for tests and small diagnostics.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut d = self.px.to_dense();
        for (i, row) in d.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v += self.x[i] * (1.0 - self.c[j]);
            }
        }
        d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EigenStatus {
    Converged,
    /// Iteration budget exhausted; the vector is a best effort.
    MaxIterations,
    /// The dominant deflated pair is complex; the vector is the real part
    /// of its Ritz vector.
    ComplexPair,
}

#[derive(Debug, Clone)]
pub struct EigenOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            tol: 1e-8,
            max_iter: 2_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EigenResult {
    /// Unit-norm left eigenvector; its largest-magnitude entry is positive.
    pub z: Vec<f64>,
    pub lambda: f64,
    /// `‖zᵀ P̃ - λ zᵀ‖₂ / ‖z‖₂`
    pub residual: f64,
    pub iterations: usize,
    pub status: EigenStatus,
    /// Right eigenvector of `P̃` for eigenvalue one, used for deflation.
    pub right_stationary: Vec<f64>,
}

impl EigenResult {
    pub fn converged(&self) -> bool {
        self.status == EigenStatus::Converged
    }
}

// Power steps use (Bᵀ + s I) / (1 + s): negative eigenvalues shrink so the
// largest real eigenvalue dominates instead of the largest modulus.
const SHIFT: f64 = 1.0;
const OSCILLATION_WINDOW: usize = 50;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn scale(a: &mut [f64], s: f64) {
    a.iter_mut().for_each(|v| *v *= s);
}

/// Stationary vector of `P̃` by lazy power iteration started at `x`.
pub fn chain_stationary(chain: &ImplicitChain, tol: f64, max_iter: usize) -> (Vec<f64>, usize) {
    let mut y = chain.x.clone();
    for it in 1..=max_iter {
        let py = chain.apply(&y);
        let mut next: Vec<f64> = py.iter().zip(&y).map(|(a, b)| 0.5 * (a + b)).collect();
        let sum: f64 = next.iter().sum();
        scale(&mut next, 1.0 / sum);
        let diff: f64 = next.iter().zip(&y).map(|(a, b)| (a - b).abs()).sum();
        y = next;
        if diff <= tol {
            return (y, it);
        }
    }
    (y, max_iter)
}

/// Left action of the deflated operator `B = P̃ - y eᵀ`: `Bᵀ u = P̃ᵀ u - e (yᵀ u)`.
fn deflated_transpose(chain: &ImplicitChain, y: &[f64], u: &[f64]) -> Vec<f64> {
    let mut w = chain.apply_transpose(u);
    let yu = dot(y, u);
    w.iter_mut().for_each(|v| *v -= yu);
    w
}

struct Estimate {
    u: Vec<f64>,
    lambda: f64,
    /// `‖Bᵀ u - λ u‖₂` for unit `u`.
    residual: f64,
}

/// Maps an eigenvector of `B` back to one of `P̃`. The two differ by a
/// multiple of `e` unless `y` is exact.
fn undeflate(u: &[f64], lambda: f64, y: &[f64]) -> Vec<f64> {
    let gap = lambda - 1.0;
    let shift = if gap.abs() > 1e-8 { dot(u, y) / gap } else { 0.0 };
    u.iter().map(|v| v + shift).collect()
}

fn finish(chain: &ImplicitChain, est: Estimate, y: Vec<f64>, iterations: usize, status: EigenStatus, tol: f64) -> EigenResult {
    let mut z = undeflate(&est.u, est.lambda, &y);
    let nz = norm2(&z);
    scale(&mut z, 1.0 / nz);
    let pz = chain.apply_transpose(&z);
    let residual = norm2(&pz.iter().zip(&z).map(|(a, b)| a - est.lambda * b).collect::<Vec<_>>());
    let imax = z
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .map_or(0, |(i, _)| i);
    if z[imax] < 0.0 {
        scale(&mut z, -1.0);
    }
    let status = match status {
        EigenStatus::Converged if residual > tol => EigenStatus::MaxIterations,
        s => s,
    };
    EigenResult {
        z,
        lambda: est.lambda,
        residual,
        iterations,
        status,
        right_stationary: y,
    }
}

/// Left eigenvector of `P̃` for its second-largest real eigenvalue.
///
/// Power iteration on the Wielandt-deflated operator `P̃ - y eᵀ`, where `y`
/// is the stationary vector of `P̃`. If the Rayleigh estimates oscillate
/// without the residual decaying, the dominant deflated pair is taken to be
/// complex and a two-dimensional subspace iteration picks out a real
/// eigenvalue when one is available.
pub fn second_left_eigenvector(chain: &ImplicitChain, opts: &EigenOptions) -> Result<EigenResult> {
    let n = chain.dim();
    if n < 2 {
        return Err(Error::InvalidParameter(format!("need at least two states, got {n}")));
    }
    let (y, _) = chain_stationary(chain, opts.tol.min(1e-10), opts.max_iter);

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    let nu = norm2(&u);
    scale(&mut u, 1.0 / nu);

    let mut lambdas = Vec::with_capacity(opts.max_iter);
    let mut residuals = Vec::with_capacity(opts.max_iter);
    let mut est = Estimate {
        u: u.clone(),
        lambda: 0.0,
        residual: f64::INFINITY,
    };
    for it in 1..=opts.max_iter {
        let w = deflated_transpose(chain, &y, &u);
        let lambda = dot(&u, &w);
        let r: Vec<f64> = w.iter().zip(&u).map(|(a, b)| a - lambda * b).collect();
        let residual = norm2(&r);
        est = Estimate {
            u: u.clone(),
            lambda,
            residual,
        };
        lambdas.push(lambda);
        residuals.push(residual);

        // Compare against the residual of the undeflated vector, which is
        // the same numerator over a different norm.
        let z_norm = norm2(&undeflate(&u, lambda, &y));
        if residual <= opts.tol * z_norm {
            return Ok(finish(chain, est, y, it, EigenStatus::Converged, opts.tol));
        }

        if it % OSCILLATION_WINDOW == 0 && it >= 2 * OSCILLATION_WINDOW && oscillating(&lambdas, &residuals) {
            log::debug!("Rayleigh estimates oscillate after {it} steps; switching to subspace iteration");
            let (sub, extra, status) = subspace_iteration(chain, &y, &u, opts, &mut rng);
            return Ok(finish(chain, sub, y, it + extra, status, opts.tol));
        }

        let mut next: Vec<f64> = w.iter().zip(&u).map(|(a, b)| (a + SHIFT * b) / (1.0 + SHIFT)).collect();
        let nn = norm2(&next);
        if nn == 0.0 {
            // u lies in the null space of B: the deflated spectrum is zero.
            return Ok(finish(chain, est, y, it, EigenStatus::Converged, opts.tol));
        }
        scale(&mut next, 1.0 / nn);
        u = next;
    }
    log::warn!(
        "second eigenvector not converged after {} steps (residual {:e})",
        opts.max_iter,
        est.residual
    );
    Ok(finish(chain, est, y, opts.max_iter, EigenStatus::MaxIterations, opts.tol))
}

/// The last window shows frequent sign changes in the Rayleigh increments
/// while the residual fails to halve.
fn oscillating(lambdas: &[f64], residuals: &[f64]) -> bool {
    let k = lambdas.len();
    let w = OSCILLATION_WINDOW;
    let recent = &lambdas[k - w..];
    let flips = recent
        .windows(3)
        .filter(|t| (t[1] - t[0]) * (t[2] - t[1]) < 0.0)
        .count();
    flips >= w / 4 && residuals[k - 1] > 0.5 * residuals[k - w]
}

fn orthonormalize(a: &mut [f64], b: &mut [f64], rng: &mut ChaCha8Rng) {
    let na = norm2(a);
    scale(a, 1.0 / na);
    for _ in 0..2 {
        let proj = dot(a, b);
        b.iter_mut().zip(a.iter()).for_each(|(bi, ai)| *bi -= proj * ai);
        let nb = norm2(b);
        if nb > 1e-12 {
            scale(b, 1.0 / nb);
            return;
        }
        b.iter_mut().for_each(|bi| *bi = rng.random_range(-1.0..1.0));
    }
}

/// Two-vector subspace iteration on the shifted deflated operator.
fn subspace_iteration(
    chain: &ImplicitChain,
    y: &[f64],
    start: &[f64],
    opts: &EigenOptions,
    rng: &mut ChaCha8Rng,
) -> (Estimate, usize, EigenStatus) {
    let n = start.len();
    let mut q1 = start.to_vec();
    let mut q2: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    orthonormalize(&mut q1, &mut q2, rng);

    let mut best = Estimate {
        u: q1.clone(),
        lambda: 0.0,
        residual: f64::INFINITY,
    };
    let mut status = EigenStatus::MaxIterations;
    for it in 1..=opts.max_iter {
        let w1 = deflated_transpose(chain, y, &q1);
        let w2 = deflated_transpose(chain, y, &q2);
        // Projected 2x2 operator H = Qᵀ Bᵀ Q.
        let h = [[dot(&q1, &w1), dot(&q1, &w2)], [dot(&q2, &w1), dot(&q2, &w2)]];
        let tr = h[0][0] + h[1][1];
        let det = h[0][0] * h[1][1] - h[0][1] * h[1][0];
        let disc = tr * tr / 4.0 - det;

        let (est, complex) = if disc >= 0.0 {
            let lambda = tr / 2.0 + disc.sqrt();
            // Null vector of H - λ I.
            let (a, b) = if (h[0][1]).abs() + (lambda - h[0][0]).abs() > (h[1][0]).abs() + (lambda - h[1][1]).abs() {
                (h[0][1], lambda - h[0][0])
            } else {
                (lambda - h[1][1], h[1][0])
            };
            let mut u: Vec<f64> = q1.iter().zip(&q2).map(|(p, q)| a * p + b * q).collect();
            let nu = norm2(&u);
            if nu > 0.0 {
                scale(&mut u, 1.0 / nu);
            } else {
                u = q1.clone();
            }
            let bu = deflated_transpose(chain, y, &u);
            let r = norm2(&bu.iter().zip(&u).map(|(p, q)| p - lambda * q).collect::<Vec<_>>());
            (Estimate { u, lambda, residual: r }, false)
        } else {
            // Complex pair: report the real part of the Ritz vector and the
            // residual of the invariant subspace.
            let re = tr / 2.0;
            let im = (-disc).sqrt();
            let (a, b) = (h[0][1], re - h[0][0]);
            let mut u: Vec<f64> = q1.iter().zip(&q2).map(|(p, q)| a * p + b * q).collect();
            let nu = norm2(&u);
            if nu > 0.0 {
                scale(&mut u, 1.0 / nu);
            } else {
                u = q1.clone();
            }
            let r1: f64 = w1
                .iter()
                .zip(q1.iter().zip(&q2))
                .map(|(w, (p, q))| (w - h[0][0] * p - h[1][0] * q).powi(2))
                .sum();
            let r2: f64 = w2
                .iter()
                .zip(q1.iter().zip(&q2))
                .map(|(w, (p, q))| (w - h[0][1] * p - h[1][1] * q).powi(2))
                .sum();
            log::trace!("complex Ritz pair {re} ± {im}i");
            (
                Estimate {
                    u,
                    lambda: re,
                    residual: (r1 + r2).sqrt(),
                },
                true,
            )
        };

        let done = est.residual <= opts.tol;
        best = est;
        if done {
            status = if complex { EigenStatus::ComplexPair } else { EigenStatus::Converged };
            return (best, it, status);
        }
        if complex {
            status = EigenStatus::ComplexPair;
        } else {
            status = EigenStatus::MaxIterations;
        }

        let mut n1: Vec<f64> = w1.iter().zip(&q1).map(|(a, b)| (a + SHIFT * b) / (1.0 + SHIFT)).collect();
        let mut n2: Vec<f64> = w2.iter().zip(&q2).map(|(a, b)| (a + SHIFT * b) / (1.0 + SHIFT)).collect();
        if norm2(&n1) == 0.0 {
            break;
        }
        orthonormalize(&mut n1, &mut n2, rng);
        q1 = n1;
        q2 = n2;
    }
    (best, opts.max_iter, status)
}
