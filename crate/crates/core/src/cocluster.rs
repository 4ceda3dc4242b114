//! Recursive bisection of a symmetric tensor.
//!
//! Each node normalizes its sub-tensor, solves for the super-spacey
//! stationary vector, takes the second left eigenvector of the induced
//! first-order chain and sweeps it for the lowest biased conductance. A node
//! is split when it is at least `max_size` or when the best cut scores at
//! most `phi_star`; nodes of `min_size` or fewer are never split.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matrix::CscMatrix;
use crate::pagerank::pagerank;
use crate::spectral::{build_chain, second_left_eigenvector, EigenOptions, EigenResult, EigenStatus, ImplicitChain};
use crate::stochastic::{normalize, solve_stationary, StationaryDistribution, StationaryOptions, TransitionTensor};
use crate::sweep::{sweep_cut, SweepResult};
use crate::tensor::{remove_empty_indices, subtensor, SparseTensor};

pub const TREE_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GtscParams {
    pub alpha: f64,
    pub phi_star: f64,
    pub max_size: usize,
    pub min_size: usize,
    pub tol_stationary: f64,
    pub max_iter_stationary: usize,
    pub tol_eig: f64,
    pub max_iter_eig: usize,
    pub seed: u64,
    /// Process sibling subtrees on the rayon pool.
    pub parallel: bool,
}

impl Default for GtscParams {
    fn default() -> Self {
        Self {
            alpha: 0.8,
            phi_star: 0.4,
            max_size: 100,
            min_size: 5,
            tol_stationary: 1e-10,
            max_iter_stationary: 10_000,
            tol_eig: 1e-8,
            max_iter_eig: 2_000,
            seed: 0,
            parallel: false,
        }
    }
}

impl GtscParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0, 1), got {}", self.alpha));
        }
        if !(self.phi_star > 0.0 && self.phi_star < 1.0) {
            return bad(format!("phi_star must lie in (0, 1), got {}", self.phi_star));
        }
        if self.min_size >= self.max_size {
            return bad(format!(
                "min_size ({}) must be below max_size ({})",
                self.min_size, self.max_size
            ));
        }
        if !(self.tol_stationary > 0.0 && self.tol_eig > 0.0) {
            return bad("tolerances must be positive".into());
        }
        Ok(())
    }

    fn stationary_options(&self) -> StationaryOptions {
        StationaryOptions {
            alpha: self.alpha,
            v: None,
            tol: self.tol_stationary,
            max_iter: self.max_iter_stationary,
            x0: None,
        }
    }
}

/// Everything computed while cutting one node.
#[derive(Debug, Clone)]
pub struct NodeAnalysis {
    pub transition: TransitionTensor,
    pub stationary: StationaryDistribution,
    pub chain: ImplicitChain,
    pub eigen: EigenResult,
    pub sweep: SweepResult,
}

/// Runs one level of the method on a square tensor with no empty indices.
pub fn analyze_node(t: &SparseTensor, params: &GtscParams, seed: u64) -> Result<NodeAnalysis> {
    let transition = normalize(t)?;
    let stationary = solve_stationary(&transition, &params.stationary_options())?;
    let chain = build_chain(&transition, &stationary.x)?;
    let eigen = second_left_eigenvector(
        &chain,
        &EigenOptions {
            tol: params.tol_eig,
            max_iter: params.max_iter_eig,
            seed,
        },
    )?;
    let sweep = sweep_cut(&chain, &eigen.z, &stationary.x)?;
    Ok(NodeAnalysis {
        transition,
        stationary,
        chain,
        eigen,
        sweep,
    })
}

/// Diagnostics of the cut computed at a node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeCut {
    pub phi: f64,
    /// Size of the `S` side.
    pub split_size: usize,
    pub accepted: bool,
    /// Accepted only because the node reached `max_size`.
    pub forced: bool,
    pub degenerate: bool,
    pub stationary_iterations: usize,
    pub stationary_converged: bool,
    pub stationary_residual: f64,
    pub eigen_iterations: usize,
    pub eigen_status: EigenStatus,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterNode {
    /// Original indices handed to this node, sorted.
    pub indices: Vec<usize>,
    /// Indices with no entries inside this node's sub-tensor; they go to the
    /// outlier cluster.
    pub removed: Vec<usize>,
    pub depth: usize,
    pub cut: Option<NodeCut>,
    /// `[S side, complement]`.
    pub children: Option<[usize; 2]>,
    /// Cluster id, for non-empty leaves.
    pub cluster: Option<usize>,
}

impl ClusterNode {
    /// Indices that stayed in this node after empty ones were removed.
    pub fn active(&self) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.indices.len() - self.removed.len());
        let mut r = self.removed.iter().peekable();
        for &i in &self.indices {
            if r.peek() == Some(&&i) {
                r.next();
            } else {
                out.push(i);
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTree {
    pub nodes: Vec<ClusterNode>,
    pub root: usize,
    /// Cluster id of every input index.
    pub labels: Vec<usize>,
    /// Members of each cluster, sorted.
    pub clusters: Vec<Vec<usize>>,
    /// Cluster holding indices that had no entries when they were reached.
    pub outlier_cluster: Option<usize>,
}

impl ClusterTree {
    pub fn num_clusters(&self) -> usize {
        self.clusters.len()
    }

    /// Leaves in depth-first order, `S` side first.
    pub fn leaves(&self) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![self.root];
        while let Some(id) = stack.pop() {
            match self.nodes[id].children {
                Some([s, rest]) => {
                    stack.push(rest);
                    stack.push(s);
                }
                None => out.push(id),
            }
        }
        out
    }

    /// The tree as a JSON document.
    pub fn to_json(&self) -> Value {
        fn node(tree: &ClusterTree, id: usize) -> Value {
            let n = &tree.nodes[id];
            let children: Vec<Value> = n
                .children
                .map(|c| c.iter().map(|&k| node(tree, k)).collect())
                .unwrap_or_default();
            json!({
                "size": n.indices.len(),
                "removed": n.removed.len(),
                "depth": n.depth,
                "phi": n.cut.as_ref().map(|c| c.phi),
                "accepted": n.cut.as_ref().map(|c| c.accepted),
                "forced": n.cut.as_ref().map(|c| c.forced),
                "stationary_iterations": n.cut.as_ref().map(|c| c.stationary_iterations),
                "eigen_iterations": n.cut.as_ref().map(|c| c.eigen_iterations),
                "cluster": n.cluster,
                "children": children,
            })
        }
        json!({
            "format_version": TREE_FORMAT_VERSION,
            "num_indices": self.labels.len(),
            "num_clusters": self.clusters.len(),
            "outlier_cluster": self.outlier_cluster,
            "root": node(self, self.root),
        })
    }
}

struct Pending {
    id: usize,
    tensor: SparseTensor,
    /// Local index → original index.
    global: Vec<usize>,
    depth: usize,
    key: u64,
}

struct Outcome {
    id: usize,
    removed: Vec<usize>,
    cut: Option<NodeCut>,
    children: Option<[(SparseTensor, Vec<usize>); 2]>,
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn process(p: Pending, params: &GtscParams) -> Outcome {
    let (t, map) = remove_empty_indices(&p.tensor);
    let removed: Vec<usize> = map
        .old_to_new
        .iter()
        .zip(&p.global)
        .filter(|(m, _)| m.is_none())
        .map(|(_, &g)| g)
        .collect();
    let global: Vec<usize> = map.new_to_old.iter().map(|&i| p.global[i]).collect();
    let n = global.len();
    let leaf = |cut| Outcome {
        id: p.id,
        removed: removed.clone(),
        cut,
        children: None,
    };
    if n <= params.min_size || n < 2 {
        return leaf(None);
    }

    let analysis = match analyze_node(&t, params, params.seed ^ splitmix(p.key)) {
        Ok(a) => a,
        Err(e) => {
            log::warn!("node at depth {} with {n} indices left unsplit: {e}", p.depth);
            return leaf(None);
        }
    };
    let sweep = &analysis.sweep;
    let forced = n >= params.max_size;
    let accepted = !sweep.degenerate && (forced || sweep.phi <= params.phi_star);
    log::info!(
        "depth {} n {} nnz {}: phi {:.4} split {}/{} ({}), stationary {} iters, eigen {} iters ({:?})",
        p.depth,
        n,
        t.nnz(),
        sweep.phi,
        sweep.split,
        n,
        if accepted { "cut" } else { "leaf" },
        analysis.stationary.iterations,
        analysis.eigen.iterations,
        analysis.eigen.status,
    );
    let cut = NodeCut {
        phi: sweep.phi,
        split_size: sweep.split,
        accepted,
        forced: accepted && forced && sweep.phi > params.phi_star,
        degenerate: sweep.degenerate,
        stationary_iterations: analysis.stationary.iterations,
        stationary_converged: analysis.stationary.converged,
        stationary_residual: analysis.stationary.residual,
        eigen_iterations: analysis.eigen.iterations,
        eigen_status: analysis.eigen.status,
        lambda: analysis.eigen.lambda,
    };
    if !accepted {
        return leaf(Some(cut));
    }

    let mut in_s = vec![false; n];
    for &i in &sweep.set {
        in_s[i] = true;
    }
    let rest: Vec<usize> = (0..n).filter(|&i| !in_s[i]).collect();
    let side = |set: &[usize]| (subtensor(&t, set), set.iter().map(|&i| global[i]).collect::<Vec<_>>());
    Outcome {
        id: p.id,
        removed,
        cut: Some(cut),
        children: Some([side(&sweep.set), side(&rest)]),
    }
}

/// Clusters the indices of a square symmetric tensor.
///
/// Callers symmetrize or embed rectangular data first. Indices with no
/// entries, at the root or inside any sub-tensor, are pooled into one
/// outlier cluster so that the labels cover every input index.
pub fn gtsc(t: &SparseTensor, params: &GtscParams) -> Result<ClusterTree> {
    params.validate()?;
    let n = t.dim()?;

    let mut nodes = vec![ClusterNode {
        indices: (0..n).collect(),
        removed: Vec::new(),
        depth: 0,
        cut: None,
        children: None,
        cluster: None,
    }];
    let mut frontier = vec![Pending {
        id: 0,
        tensor: t.clone(),
        global: (0..n).collect(),
        depth: 0,
        key: 1,
    }];

    // Level by level: nodes on one level are independent, so the parallel
    // and sequential paths produce the same tree.
    while !frontier.is_empty() {
        let keys: Vec<(u64, usize)> = frontier.iter().map(|p| (p.key, p.depth)).collect();
        let outcomes: Vec<Outcome> = if params.parallel {
            frontier.into_par_iter().map(|p| process(p, params)).collect()
        } else {
            frontier.into_iter().map(|p| process(p, params)).collect()
        };
        let mut next = Vec::new();
        for (outcome, (key, depth)) in outcomes.into_iter().zip(keys) {
            let id = outcome.id;
            nodes[id].removed = outcome.removed;
            nodes[id].cut = outcome.cut;
            if let Some(children) = outcome.children {
                let mut ids = [0; 2];
                for (side, (tensor, global)) in children.into_iter().enumerate() {
                    let child = nodes.len();
                    ids[side] = child;
                    let mut indices = global.clone();
                    indices.sort_unstable();
                    nodes.push(ClusterNode {
                        indices,
                        removed: Vec::new(),
                        depth: depth + 1,
                        cut: None,
                        children: None,
                        cluster: None,
                    });
                    next.push(Pending {
                        id: child,
                        tensor,
                        global,
                        depth: depth + 1,
                        key: splitmix(key.wrapping_mul(2).wrapping_add(side as u64)),
                    });
                }
                nodes[id].children = Some(ids);
            }
        }
        frontier = next;
    }

    for node in &mut nodes {
        node.removed.sort_unstable();
    }
    let mut tree = ClusterTree {
        nodes,
        root: 0,
        labels: vec![usize::MAX; n],
        clusters: Vec::new(),
        outlier_cluster: None,
    };
    for leaf in tree.leaves() {
        let members = tree.nodes[leaf].active();
        if members.is_empty() {
            continue;
        }
        let id = tree.clusters.len();
        for &i in &members {
            tree.labels[i] = id;
        }
        tree.nodes[leaf].cluster = Some(id);
        tree.clusters.push(members);
    }
    let mut outliers: Vec<usize> = tree.nodes.iter().flat_map(|n| n.removed.iter().copied()).collect();
    outliers.sort_unstable();
    if !outliers.is_empty() {
        let id = tree.clusters.len();
        for &i in &outliers {
            tree.labels[i] = id;
        }
        tree.outlier_cluster = Some(id);
        tree.clusters.push(outliers);
    }
    debug_assert!(tree.labels.iter().all(|&l| l != usize::MAX));
    Ok(tree)
}

/// `M_ab`: total weight of entries whose first index lies in cluster `a`
/// and second index in cluster `b`, remaining modes summed out.
pub fn interaction_matrix(t: &SparseTensor, labels: &[usize], k: usize) -> Result<CscMatrix> {
    let n = t.dim()?;
    if labels.len() != n {
        return Err(Error::LengthMismatch {
            expected: n,
            actual: labels.len(),
        });
    }
    if let Some(&bad) = labels.iter().find(|&&l| l >= k) {
        return Err(Error::InvalidParameter(format!("label {bad} outside {k} clusters")));
    }
    let triplets: Vec<_> = t
        .iter()
        .map(|(idx, w)| (labels[idx[0] as usize], labels[idx[1] as usize], w))
        .collect();
    Ok(CscMatrix::from_triplets(k, k, &triplets))
}

/// PageRank of each cluster in the cluster interaction graph, self-loops
/// excluded. Clusters with no interaction with any other cluster score
/// zero; the rest share a PageRank vector with uniform teleportation.
pub fn popularity_scores(t: &SparseTensor, tree: &ClusterTree, pr_alpha: f64) -> Result<Vec<f64>> {
    popularity_from_labels(t, &tree.labels, tree.num_clusters(), pr_alpha)
}

pub fn popularity_from_labels(t: &SparseTensor, labels: &[usize], k: usize, pr_alpha: f64) -> Result<Vec<f64>> {
    if k == 1 {
        return Ok(vec![1.0]);
    }
    let m = interaction_matrix(t, labels, k)?;
    let mut linked = vec![false; k];
    for (a, b, _) in m.triplets() {
        if a != b {
            linked[a] = true;
            linked[b] = true;
        }
    }
    let active: Vec<usize> = (0..k).filter(|&a| linked[a]).collect();
    let mut scores = vec![0.0; k];
    if active.is_empty() {
        return Ok(scores);
    }
    let mut local = vec![usize::MAX; k];
    for (i, &a) in active.iter().enumerate() {
        local[a] = i;
    }
    let sub: Vec<_> = m
        .triplets()
        .filter(|&(a, b, _)| a != b && linked[a] && linked[b])
        .map(|(a, b, w)| (local[a], local[b], w))
        .collect();
    let sub = CscMatrix::from_triplets(active.len(), active.len(), &sub);
    let pr = pagerank(&sub, pr_alpha, None, 1e-12)?;
    for (&a, s) in active.iter().zip(pr) {
        scores[a] = s;
    }
    Ok(scores)
}

/// Cluster ids ordered by decreasing score, ties by id.
pub fn rank_clusters(scores: &[f64]) -> Vec<usize> {
    let mut ids: Vec<usize> = (0..scores.len()).collect();
    ids.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]).then(a.cmp(&b)));
    ids
}
