//! Runtime against tensor size, by uniform subsampling of non-zeros.

use std::io::Write;
use std::time::Instant;

use anyhow::Result;
use gtsc_core::{GtscParams, SparseTensor, TensorBuilder};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::pipeline::{cluster, Shape};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingRow {
    pub fraction: f64,
    /// Non-zeros kept from the input.
    pub sampled_nnz: usize,
    /// Non-zeros of the symmetric tensor that was clustered.
    pub nnz: usize,
    pub seconds: f64,
    pub clusters: usize,
}

/// Keeps `round(fraction * nnz)` entries chosen uniformly without
/// replacement.
pub fn subsample(t: &SparseTensor, fraction: f64, rng: &mut ChaCha8Rng) -> SparseTensor {
    let keep = ((fraction.clamp(0.0, 1.0) * t.nnz() as f64).round() as usize).min(t.nnz());
    let mut chosen = rand::seq::index::sample(rng, t.nnz(), keep).into_vec();
    chosen.sort_unstable();
    let mut b = TensorBuilder::with_capacity(t.dims().to_vec(), keep);
    let mut idx = Vec::with_capacity(t.order());
    for e in chosen {
        let (tuple, w) = t.entry(e);
        idx.clear();
        idx.extend(tuple.iter().map(|&i| i as usize));
        b.push(&idx, w).expect("entries of a valid tensor");
    }
    b.build()
}

/// Times the full pipeline, symmetrization included, on one subsample per
/// fraction.
pub fn run_scaling(
    t: &SparseTensor,
    shape: &Shape,
    fractions: &[f64],
    params: &GtscParams,
    threads: usize,
    seed: u64,
) -> Result<Vec<ScalingRow>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(fractions.len());
    for &fraction in fractions {
        let sample = subsample(t, fraction, &mut rng);
        let start = Instant::now();
        let c = cluster(&sample, shape, params, threads, 0.99)?;
        let seconds = start.elapsed().as_secs_f64();
        log::info!("fraction {fraction}: {} non-zeros in {seconds:.3} s", c.tensor.nnz());
        rows.push(ScalingRow {
            fraction,
            sampled_nnz: sample.nnz(),
            nnz: c.tensor.nnz(),
            seconds,
            clusters: c.tree.num_clusters(),
        });
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(mut w: W, rows: &[ScalingRow]) -> Result<()> {
    writeln!(w, "fraction,sampled_nnz,nnz,seconds,clusters")?;
    for r in rows {
        writeln!(w, "{},{},{},{:.6},{}", r.fraction, r.sampled_nnz, r.nnz, r.seconds, r.clusters)?;
    }
    Ok(())
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}
