//! Command-line interface for tensor spectral co-clustering.

pub mod pipeline;
pub mod scaling;

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use gtsc_core::labels::{read_labels, write_class_labels, write_labels};
use gtsc_core::{generate, scores, write_coordinate, GtscParams, IndexBase, SynthSpec};

use pipeline::{cluster, read_tensor, write_outputs, OutputPaths, Shape};

#[derive(Debug, Parser)]
#[command(name = "gtsc", version, about = "Spectral co-clustering of sparse tensors")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Cluster a tensor in coordinate format.
    Cluster(ClusterArgs),
    /// Write a planted-group tensor and its labels.
    Gen(GenArgs),
    /// Compare two label files.
    Eval(EvalArgs),
    /// Time the pipeline on random subsamples of a tensor.
    Scaling(ScalingArgs),
}

#[derive(Debug, Clone, Args)]
pub struct InputArgs {
    /// Tensor file: a header `m d1 .. dm`, then one `i1 .. im value` line
    /// per non-zero.
    pub input: PathBuf,
    /// Read indices as one-based.
    #[arg(long)]
    pub one_based: bool,
    /// Mode classes for rectangular tensors, e.g. `a,b,b,c`.
    #[arg(long, value_name = "CLASSES")]
    pub rectangular: Option<String>,
}

impl InputArgs {
    fn base(&self) -> IndexBase {
        if self.one_based {
            IndexBase::One
        } else {
            IndexBase::Zero
        }
    }

    fn shape(&self) -> Shape {
        match &self.rectangular {
            Some(s) => Shape::Rectangular(s.clone()),
            None => Shape::Square,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ParamArgs {
    #[arg(long, default_value_t = 0.8)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.4)]
    pub phi_star: f64,
    #[arg(long, default_value_t = 100)]
    pub max_size: usize,
    #[arg(long, default_value_t = 5)]
    pub min_size: usize,
    /// Stopping tolerance of the stationary iteration.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads for the recursion; 1 runs sequentially.
    #[arg(long, default_value_t = 1)]
    pub threads: usize,
}

impl ParamArgs {
    pub fn params(&self) -> GtscParams {
        GtscParams {
            alpha: self.alpha,
            phi_star: self.phi_star,
            max_size: self.max_size,
            min_size: self.min_size,
            tol_stationary: self.tol,
            seed: self.seed,
            ..GtscParams::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct ClusterArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Prefix for `.labels.tsv`, `.tree.json` and `.popularity.csv`.
    #[arg(short, long, default_value = "gtsc")]
    pub output: PathBuf,
    /// Damping of the cluster popularity PageRank.
    #[arg(long, default_value_t = 0.99)]
    pub pr_alpha: f64,
}

#[derive(Debug, Clone, Args)]
pub struct GenArgs {
    #[arg(long, default_value_t = 4.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Generate a rectangular 3-mode tensor.
    #[arg(long)]
    pub rectangular: bool,
    #[arg(long)]
    pub t_within: Option<usize>,
    #[arg(long)]
    pub t_across: Option<usize>,
    #[arg(long, default_value_t = 20)]
    pub groups: usize,
    /// Mean group size.
    #[arg(long, default_value_t = 20.0)]
    pub size_mean: f64,
    /// Writes `<prefix>.tns` and `<prefix>.labels.tsv`.
    #[arg(short, long, default_value = "synthetic")]
    pub output: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct EvalArgs {
    pub predicted: PathBuf,
    pub truth: PathBuf,
}

#[derive(Debug, Clone, Args)]
pub struct ScalingArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[command(flatten)]
    pub params: ParamArgs,
    /// Fractions of the non-zeros to keep, one run each.
    #[arg(long, value_delimiter = ',', default_value = "1.0")]
    pub fractions: Vec<f64>,
    /// CSV destination; standard output when absent.
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

fn with_suffix(prefix: &std::path::Path, suffix: &str) -> PathBuf {
    let mut s = prefix.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

pub fn cmd_cluster(args: &ClusterArgs) -> Result<()> {
    let t = read_tensor(&args.input.input, args.input.base())?;
    let c = cluster(
        &t,
        &args.input.shape(),
        &args.params.params(),
        args.params.threads,
        args.pr_alpha,
    )?;
    let paths = OutputPaths::new(&args.output);
    write_outputs(&c, &paths)?;
    println!(
        "{} clusters; wrote {}, {}, {}",
        c.tree.num_clusters(),
        paths.labels.display(),
        paths.tree.display(),
        paths.popularity.display()
    );
    Ok(())
}

pub fn cmd_gen(args: &GenArgs) -> Result<()> {
    let mut spec = if args.rectangular {
        SynthSpec::rectangular(args.sigma, args.seed)
    } else {
        SynthSpec::square(args.sigma, args.seed)
    };
    spec.n_groups = args.groups;
    spec.size_mean = args.size_mean;
    spec.t_within = args.t_within.unwrap_or(spec.t_within);
    spec.t_across = args.t_across.unwrap_or(spec.t_across);
    let planted = generate(&spec)?;

    let tensor_path = with_suffix(&args.output, ".tns");
    let mut w = BufWriter::new(File::create(&tensor_path).with_context(|| format!("cannot create {}", tensor_path.display()))?);
    write_coordinate(&planted.tensor, &mut w)?;
    w.flush()?;

    let labels_path = with_suffix(&args.output, ".labels.tsv");
    let mut w = BufWriter::new(File::create(&labels_path).with_context(|| format!("cannot create {}", labels_path.display()))?);
    if args.rectangular {
        let classes: Vec<(String, usize)> = ["x", "y", "z"]
            .iter()
            .zip(&planted.labels)
            .map(|(name, l)| (name.to_string(), l.len()))
            .collect();
        write_class_labels(&mut w, &classes, &planted.combined_labels())?;
    } else {
        write_labels(&mut w, &planted.labels[0])?;
    }
    w.flush()?;
    println!(
        "wrote {} ({} non-zeros, dims {:?}) and {}",
        tensor_path.display(),
        planted.tensor.nnz(),
        planted.tensor.dims(),
        labels_path.display()
    );
    Ok(())
}

fn read_label_file(path: &std::path::Path) -> Result<Vec<usize>> {
    let file = File::open(path).with_context(|| format!("cannot open {}", path.display()))?;
    read_labels(BufReader::new(file)).with_context(|| format!("cannot read labels {}", path.display()))
}

pub fn cmd_eval(args: &EvalArgs) -> Result<()> {
    let pred = read_label_file(&args.predicted)?;
    let truth = read_label_file(&args.truth)?;
    let s = scores(&pred, &truth)?;
    println!("ari\t{:.6}", s.ari);
    println!("nmi\t{:.6}", s.nmi);
    println!("f1\t{:.6}", s.f1);
    Ok(())
}

pub fn cmd_scaling(args: &ScalingArgs) -> Result<()> {
    let t = read_tensor(&args.input.input, args.input.base())?;
    let rows = scaling::run_scaling(
        &t,
        &args.input.shape(),
        &args.fractions,
        &args.params.params(),
        args.params.threads,
        args.params.seed,
    )?;
    match &args.output {
        Some(path) => {
            let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
            scaling::write_csv(BufWriter::new(file), &rows)?;
        }
        None => scaling::write_csv(std::io::stdout().lock(), &rows)?,
    }
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (r.nnz as f64, r.seconds)).collect();
    if let Some(slope) = scaling::loglog_slope(&pts) {
        eprintln!("log-log slope of seconds against non-zeros: {slope:.3}");
    }
    Ok(())
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Cluster(a) => cmd_cluster(&a),
        Command::Gen(a) => cmd_gen(&a),
        Command::Eval(a) => cmd_eval(&a),
        Command::Scaling(a) => cmd_scaling(&a),
    }
}
