//! Planted-group tensors for benchmarking.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tensor::{SparseTensor, TensorBuilder};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_groups: usize,
    pub size_mean: f64,
    /// Variance of the group-size distribution.
    pub size_var: f64,
    pub size_min: usize,
    pub sigma: f64,
    pub t_within: usize,
    pub t_across: usize,
    pub seed: u64,
    pub rectangular: bool,
}

impl SynthSpec {
    pub fn square(sigma: f64, seed: u64) -> Self {
        Self {
            n_groups: 20,
            size_mean: 20.0,
            size_var: 5.0,
            size_min: 4,
            sigma,
            t_within: 10_000,
            t_across: 1_000,
            seed,
            rectangular: false,
        }
    }

    pub fn rectangular(sigma: f64, seed: u64) -> Self {
        Self {
            t_across: 3_000,
            rectangular: true,
            ..Self::square(sigma, seed)
        }
    }

    fn validate(&self) -> Result<()> {
        if self.n_groups == 0 || self.size_min == 0 {
            return Err(Error::InvalidParameter("n_groups and size_min must be positive".into()));
        }
        if !(self.sigma > 0.0) || !(self.size_var >= 0.0) || !self.size_mean.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "need sigma > 0 and size_var >= 0, got {} and {}",
                self.sigma, self.size_var
            )));
        }
        if self.t_across > 0 && self.n_groups < 2 {
            return Err(Error::InvalidParameter("across-group triples need two groups".into()));
        }
        Ok(())
    }

    /// `w_g` for `g = 1..=n_groups`, centred between the two middle groups.
    pub fn group_weights(&self) -> Vec<f64> {
        let centre = (self.n_groups as f64 + 1.0) / 2.0;
        let norm = 1.0 / (self.sigma * (2.0 * std::f64::consts::PI).sqrt());
        (1..=self.n_groups)
            .map(|g| {
                let d = g as f64 - centre;
                norm * (-d * d / (2.0 * self.sigma * self.sigma)).exp()
            })
            .collect()
    }
}

/// A generated tensor with its ground-truth groups.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedTensor {
    pub tensor: SparseTensor,
    /// Group of every index, one vector per mode for rectangular tensors
    /// and a single vector otherwise.
    pub labels: Vec<Vec<usize>>,
    pub group_weights: Vec<f64>,
}

impl PlantedTensor {
    /// Labels of all modes concatenated, matching the index layout of the
    /// embedding with one class per mode.
    pub fn combined_labels(&self) -> Vec<usize> {
        self.labels.concat()
    }
}

/// Indices grouped consecutively, with each group's member range.
struct Layout {
    group_of: Vec<usize>,
    starts: Vec<usize>,
}

impl Layout {
    fn draw(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Self {
        let normal = Normal::new(spec.size_mean, spec.size_var.sqrt()).expect("finite parameters");
        let mut group_of = Vec::new();
        let mut starts = Vec::with_capacity(spec.n_groups + 1);
        for g in 0..spec.n_groups {
            let size = (normal.sample(rng).round().max(0.0) as usize).max(spec.size_min);
            starts.push(group_of.len());
            group_of.extend(std::iter::repeat_n(g, size));
        }
        starts.push(group_of.len());
        Self { group_of, starts }
    }

    fn len(&self) -> usize {
        self.group_of.len()
    }

    fn member(&self, g: usize, rng: &mut ChaCha8Rng) -> usize {
        rng.random_range(self.starts[g]..self.starts[g + 1])
    }

    /// Index-level sampler with each index weighted by its group's weight.
    fn weighted(&self, w: &[f64]) -> WeightedIndex<f64> {
        WeightedIndex::new(self.group_of.iter().map(|&g| w[g])).expect("positive weights")
    }

    /// Uniform index outside group `g`.
    fn outside(&self, g: usize, rng: &mut ChaCha8Rng) -> usize {
        let size = self.starts[g + 1] - self.starts[g];
        let r = rng.random_range(0..self.len() - size);
        if r < self.starts[g] {
            r
        } else {
            r + size
        }
    }
}

/// Square 3-mode tensor with `t_within` within-group and `t_across`
/// across-group triples. Repeated triples accumulate.
pub fn gen_square(spec: &SynthSpec) -> Result<PlantedTensor> {
    spec.validate()?;
    if spec.rectangular {
        return Err(Error::InvalidParameter("gen_square called with a rectangular spec".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let w = spec.group_weights();
    let layout = Layout::draw(spec, &mut rng);
    let n = layout.len();
    let mut b = TensorBuilder::with_capacity(vec![n; 3], spec.t_within + spec.t_across);

    for _ in 0..spec.t_within {
        let g = rng.random_range(0..spec.n_groups);
        let idx = [layout.member(g, &mut rng), layout.member(g, &mut rng), layout.member(g, &mut rng)];
        b.push(&idx, w[g])?;
    }
    if spec.t_across > 0 {
        let anchor = layout.weighted(&w);
        for _ in 0..spec.t_across {
            let i = anchor.sample(&mut rng);
            let gi = layout.group_of[i];
            let j = layout.outside(gi, &mut rng);
            let k = layout.outside(gi, &mut rng);
            let value = (w[gi] + w[layout.group_of[j]] + w[layout.group_of[k]]) / 3.0;
            b.push(&[i, j, k], value)?;
        }
    }
    Ok(PlantedTensor {
        tensor: b.build(),
        labels: vec![layout.group_of],
        group_weights: w,
    })
}

/// Rectangular 3-mode tensor whose groups have an independently sized
/// subgroup in every mode.
pub fn gen_rectangular(spec: &SynthSpec) -> Result<PlantedTensor> {
    spec.validate()?;
    if !spec.rectangular {
        return Err(Error::InvalidParameter("gen_rectangular called with a square spec".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let w = spec.group_weights();
    let layouts: Vec<Layout> = (0..3).map(|_| Layout::draw(spec, &mut rng)).collect();
    let dims: Vec<usize> = layouts.iter().map(Layout::len).collect();
    let mut b = TensorBuilder::with_capacity(dims, spec.t_within + spec.t_across);

    for _ in 0..spec.t_within {
        let g = rng.random_range(0..spec.n_groups);
        let idx = [
            layouts[0].member(g, &mut rng),
            layouts[1].member(g, &mut rng),
            layouts[2].member(g, &mut rng),
        ];
        b.push(&idx, w[g])?;
    }
    if spec.t_across > 0 {
        let anchors: Vec<_> = layouts.iter().map(|l| l.weighted(&w)).collect();
        let mut idx = [0usize; 3];
        for _ in 0..spec.t_across {
            let mode = rng.random_range(0..3);
            idx[mode] = anchors[mode].sample(&mut rng);
            let g = layouts[mode].group_of[idx[mode]];
            let mut value = w[g];
            for other in (0..3).filter(|&o| o != mode) {
                idx[other] = layouts[other].outside(g, &mut rng);
                value += w[layouts[other].group_of[idx[other]]];
            }
            b.push(&idx, value / 3.0)?;
        }
    }
    Ok(PlantedTensor {
        tensor: b.build(),
        labels: layouts.into_iter().map(|l| l.group_of).collect(),
        group_weights: w,
    })
}

/// Dispatches on `spec.rectangular`.
pub fn generate(spec: &SynthSpec) -> Result<PlantedTensor> {
    if spec.rectangular {
        gen_rectangular(spec)
    } else {
        gen_square(spec)
    }
}
