//! Fixtures shared by the benchmarks.

use gtsc_core::{generate, symmetrize_square, SparseTensor, SynthSpec};

/// Symmetric planted tensor with `groups` groups of about 20 indices.
pub fn planted(groups: usize, t_within: usize, seed: u64) -> SparseTensor {
    let spec = SynthSpec {
        n_groups: groups,
        t_within,
        t_across: t_within / 10,
        ..SynthSpec::square(4.0, seed)
    };
    let t = generate(&spec).expect("valid generator parameters").tensor;
    symmetrize_square(&t).expect("square tensor")
}

/// Uniform starting vector of length `n`.
pub fn uniform(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}
