//! Trajectory simulation of the super-spacey random surfer.
//!
//! Only used to cross-check [`solve_stationary`](crate::stochastic::solve_stationary)
//! against the process it describes.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::stochastic::{check_probability, TransitionTensor};

struct History {
    visits: Vec<usize>,
    counts: Vec<u64>,
}

impl History {
    /// Draws state `j` with probability `(1 + visits(j)) / (t + n)`.
    fn draw(&self, rng: &mut impl Rng) -> usize {
        let n = self.counts.len();
        let t = self.visits.len();
        let k = rng.random_range(0..t + n);
        if k < n {
            k
        } else {
            self.visits[k - n]
        }
    }

    fn record(&mut self, state: usize) {
        self.visits.push(state);
        self.counts[state] += 1;
    }
}

/// Runs the surfer for `steps` transitions and returns its smoothed
/// occupation vector `(1 + visits(i)) / (t + n)`.
pub fn simulate_super_spacey(
    p: &TransitionTensor,
    alpha: f64,
    v: &[f64],
    steps: usize,
    seed: u64,
) -> Result<Vec<f64>> {
    let n = p.dim();
    if n == 0 {
        return Err(Error::InvalidParameter("cannot simulate on an empty tensor".into()));
    }
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidParameter(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    check_probability("teleportation vector", v, n)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let teleport = WeightedIndex::new(v).map_err(|e| Error::InvalidProbability(e.to_string()))?;
    let order = p.order();
    let tensor = p.tensor();

    let mut history = History {
        visits: Vec::with_capacity(steps + 1),
        counts: vec![0; n],
    };
    let mut current = teleport.sample(&mut rng);
    history.record(current);
    let mut key = vec![0u32; order - 1];

    for _ in 0..steps {
        let next = if rng.random::<f64>() >= alpha {
            teleport.sample(&mut rng)
        } else {
            key[0] = current as u32;
            for slot in key.iter_mut().skip(1) {
                *slot = history.draw(&mut rng) as u32;
            }
            match p.find_column(&key) {
                Some(range) => {
                    let u: f64 = rng.random();
                    let mut acc = 0.0;
                    let mut pick = tensor.entry(range.end - 1).0[0] as usize;
                    for e in range {
                        let (idx, w) = tensor.entry(e);
                        acc += w;
                        if u < acc {
                            pick = idx[0] as usize;
                            break;
                        }
                    }
                    pick
                }
                None => history.draw(&mut rng),
            }
        };
        history.record(next);
        current = next;
    }

    let denom = (history.visits.len() + n) as f64;
    Ok(history.counts.iter().map(|&c| (1 + c) as f64 / denom).collect())
}
