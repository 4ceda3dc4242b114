//! Spectral co-clustering of sparse non-negative tensors.
//!
//! The pipeline symmetrizes the input, solves for the stationary vector of
//! a super-spacey random surfer, builds the first-order chain it induces,
//! and bisects the indices with a sweep over that chain's second left
//! eigenvector. [`gtsc`] applies this recursively.

pub mod cocluster;
pub mod error;
pub mod labels;
pub mod matrix;
pub mod metrics;
pub mod pagerank;
#[cfg(feature = "validation")]
pub mod simulate;
pub mod spectral;
pub mod stochastic;
pub mod sweep;
pub mod synth;
pub mod tensor;

pub use cocluster::{
    analyze_node, gtsc, interaction_matrix, popularity_from_labels, popularity_scores, rank_clusters, ClusterNode,
    ClusterTree, GtscParams, NodeAnalysis, NodeCut, TREE_FORMAT_VERSION,
};
pub use error::{Error, Result};
pub use matrix::CscMatrix;
pub use metrics::{ari, f1_pairs, nmi, scores, ContingencyTable, Scores};
pub use pagerank::pagerank;
#[cfg(feature = "validation")]
pub use simulate::simulate_super_spacey;
pub use spectral::{
    build_chain, second_left_eigenvector, EigenOptions, EigenResult, EigenStatus, ImplicitChain,
};
pub use stochastic::{
    normalize, solve_stationary, solve_stationary_observed, stationary_residual, StationaryDistribution,
    StationaryOptions, TransitionTensor,
};
pub use sweep::{biased_conductance, sweep_cut, sweep_profile, SweepResult};
pub use synth::{gen_rectangular, gen_square, generate, PlantedTensor, SynthSpec};
pub use tensor::{
    embed_rectangular, load_coordinate, remove_empty_indices, subtensor, symmetrize_square, write_coordinate,
    IndexBase, IndexMap, ModeClassMap, SparseTensor, TensorBuilder,
};
