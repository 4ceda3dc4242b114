//! The clustering pipeline behind `gtsc cluster`, reusable from tests and
//! the scaling harness.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use gtsc_core::labels::{write_class_labels, write_labels};
use gtsc_core::{
    embed_rectangular, gtsc, load_coordinate, popularity_scores, rank_clusters, symmetrize_square, ClusterTree,
    GtscParams, IndexBase, ModeClassMap, SparseTensor,
};

pub fn read_tensor(path: &Path, base: IndexBase) -> Result<SparseTensor> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    load_coordinate(BufReader::new(file), base).with_context(|| format!("cannot read tensor {}", path.display()))
}

/// How the input tensor is turned into a square symmetric one.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape {
    Square,
    /// Mode-class list such as `a,b,b,c`.
    Rectangular(String),
}

/// `(class name, size)` per mode class of an embedded tensor.
pub type Classes = Vec<(String, usize)>;

/// Result of one pipeline run.
#[derive(Debug, Clone)]
pub struct Clustering {
    /// The square symmetric tensor that was clustered.
    pub tensor: SparseTensor,
    pub tree: ClusterTree,
    pub popularity: Vec<f64>,
    /// `(class name, size)` per class when the input was embedded.
    pub classes: Option<Classes>,
}

/// Square input is symmetrized unless it already is; rectangular input is
/// embedded by mode class.
pub fn prepare(t: &SparseTensor, shape: &Shape) -> Result<(SparseTensor, Option<Classes>)> {
    match shape {
        Shape::Square => {
            if !t.is_square() {
                anyhow::bail!(
                    "tensor of shape {:?} is not square; pass --rectangular with a mode-class list",
                    t.dims()
                );
            }
            if t.is_permutation_closed() {
                Ok((t.clone(), None))
            } else {
                Ok((symmetrize_square(t)?, None))
            }
        }
        Shape::Rectangular(spec) => {
            let map = ModeClassMap::parse(spec, t.dims()).context("bad mode-class list")?;
            let classes = map
                .class_names()
                .iter()
                .cloned()
                .zip(map.class_sizes().iter().copied())
                .collect();
            Ok((embed_rectangular(t, &map)?, Some(classes)))
        }
    }
}

/// Runs the recursion, on a dedicated pool when `threads > 1`.
pub fn run_gtsc(t: &SparseTensor, params: &GtscParams, threads: usize) -> Result<ClusterTree> {
    if threads > 1 {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build()?;
        let params = GtscParams {
            parallel: true,
            ..params.clone()
        };
        Ok(pool.install(|| gtsc(t, &params))?)
    } else {
        Ok(gtsc(t, params)?)
    }
}

pub fn cluster(t: &SparseTensor, shape: &Shape, params: &GtscParams, threads: usize, pr_alpha: f64) -> Result<Clustering> {
    let (tensor, classes) = prepare(t, shape)?;
    log::info!("clustering {} indices, {} non-zeros", tensor.dims()[0], tensor.nnz());
    let tree = run_gtsc(&tensor, params, threads)?;
    let popularity = popularity_scores(&tensor, &tree, pr_alpha)?;
    log::info!("{} clusters", tree.num_clusters());
    Ok(Clustering {
        tensor,
        tree,
        popularity,
        classes,
    })
}

/// Paths of the three files written for an output prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OutputPaths {
    pub labels: PathBuf,
    pub tree: PathBuf,
    pub popularity: PathBuf,
}

impl OutputPaths {
    pub fn new(prefix: &Path) -> Self {
        let with = |suffix: &str| {
            let mut s = prefix.as_os_str().to_owned();
            s.push(suffix);
            PathBuf::from(s)
        };
        Self {
            labels: with(".labels.tsv"),
            tree: with(".tree.json"),
            popularity: with(".popularity.csv"),
        }
    }
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
    ))
}

pub fn write_outputs(c: &Clustering, paths: &OutputPaths) -> Result<()> {
    let mut w = create(&paths.labels)?;
    match &c.classes {
        Some(classes) => write_class_labels(&mut w, classes, &c.tree.labels)?,
        None => write_labels(&mut w, &c.tree.labels)?,
    }
    w.flush()?;

    let mut w = create(&paths.tree)?;
    serde_json::to_writer_pretty(&mut w, &c.tree.to_json())?;
    writeln!(w)?;
    w.flush()?;

    let mut w = create(&paths.popularity)?;
    writeln!(w, "rank,cluster,size,score")?;
    for (rank, id) in rank_clusters(&c.popularity).into_iter().enumerate() {
        writeln!(w, "{},{},{},{}", rank + 1, id, c.tree.clusters[id].len(), c.popularity[id])?;
    }
    w.flush()?;
    Ok(())
}
