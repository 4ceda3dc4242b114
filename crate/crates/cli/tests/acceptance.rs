//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! The process exits successfully even when a criterion fails so that the
//! report is always produced; set `GTSC_ACCEPTANCE_STRICT=1` to turn any
//! failure into a non-zero exit status.

use std::collections::HashMap;
use std::time::Instant;

use gtsc_cli::pipeline::Shape;
use gtsc_cli::scaling::{loglog_slope, run_scaling};
use gtsc_core::{
    analyze_node, biased_conductance, build_chain, embed_rectangular, generate, gtsc, normalize, scores,
    simulate_super_spacey, solve_stationary, solve_stationary_observed, stationary_residual, sweep_profile,
    symmetrize_square, ClusterTree, GtscParams, ModeClassMap, SparseTensor, StationaryOptions, SynthSpec,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: String) -> Self {
        Self { pass, detail }
    }
}

/// Residuals of converged stationary solves, gathered across criteria.
#[derive(Default)]
struct Residuals {
    worst: f64,
    count: usize,
}

impl Residuals {
    fn record(&mut self, converged: bool, residual: f64) {
        if converged {
            self.worst = self.worst.max(residual);
            self.count += 1;
        }
    }

    fn record_tree(&mut self, tree: &ClusterTree) {
        for cut in tree.nodes.iter().filter_map(|n| n.cut.as_ref()) {
            self.record(cut.stationary_converged, cut.stationary_residual);
        }
    }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_tensor(r: &mut ChaCha8Rng, n: usize, order: usize, nnz: usize) -> SparseTensor {
    let entries: Vec<(Vec<usize>, f64)> = (0..nnz)
        .map(|_| ((0..order).map(|_| r.random_range(0..n)).collect(), r.random_range(0.1..2.0)))
        .collect();
    SparseTensor::from_entries(vec![n; order], entries).unwrap()
}

fn random_probability(r: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| r.random_range(0.05..1.0)).collect();
    let s: f64 = raw.iter().sum();
    raw.into_iter().map(|v| v / s).collect()
}

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn tuples(n: usize, order: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..order {
        out = out
            .into_iter()
            .flat_map(|t: Vec<usize>| {
                (0..n).map(move |i| {
                    let mut u = t.clone();
                    u.push(i);
                    u
                })
            })
            .collect();
    }
    out
}

fn as_map(t: &SparseTensor) -> HashMap<Vec<usize>, f64> {
    t.iter().map(|(idx, w)| (idx.iter().map(|&i| i as usize).collect(), w)).collect()
}

/// Dense `P[x]` of any order: `Σ P[i, j, k, ...] x_k ⋯`, over every tuple.
fn dense_px(t: &SparseTensor, x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let m = as_map(t);
    let mut out = vec![vec![0.0; n]; n];
    for idx in tuples(n, t.order()) {
        if let Some(&w) = m.get(&idx) {
            out[idx[0]][idx[1]] += w * idx[2..].iter().map(|&k| x[k]).product::<f64>();
        }
    }
    out
}

fn dense_chain(px: &[Vec<f64>], x: &[f64]) -> Vec<Vec<f64>> {
    let n = x.len();
    let c: Vec<f64> = (0..n).map(|j| (0..n).map(|i| px[i][j]).sum()).collect();
    (0..n).map(|i| (0..n).map(|j| px[i][j] + x[i] * (1.0 - c[j])).collect()).collect()
}

fn dense_exit_max(chain: &[Vec<f64>], inside: &[bool], p: &[f64]) -> f64 {
    let n = p.len();
    let exit = |side: bool| {
        let (mut num, mut den) = (0.0, 0.0);
        for j in (0..n).filter(|&j| inside[j] == side) {
            den += p[j];
            num += p[j] * (0..n).filter(|&i| inside[i] != side).map(|i| chain[i][j]).sum::<f64>();
        }
        if den == 0.0 {
            1.0
        } else {
            num / den
        }
    };
    exit(true).max(exit(false))
}

/// Mean scores of the method over five generator seeds.
fn planted_runs(sigma: f64, rectangular: bool, res: &mut Residuals) -> (f64, f64, f64, f64) {
    let params = GtscParams {
        phi_star: 0.35,
        ..GtscParams::default()
    };
    let start = Instant::now();
    let (mut ari, mut nmi, mut f1) = (0.0, 0.0, 0.0);
    for seed in 0..5 {
        let spec = if rectangular {
            SynthSpec::rectangular(sigma, seed)
        } else {
            SynthSpec::square(sigma, seed)
        };
        let planted = generate(&spec).unwrap();
        let (t, truth) = if rectangular {
            let map = ModeClassMap::distinct(planted.tensor.dims());
            (embed_rectangular(&planted.tensor, &map).unwrap(), planted.combined_labels())
        } else {
            (symmetrize_square(&planted.tensor).unwrap(), planted.labels[0].clone())
        };
        let tree = gtsc(&t, &params).unwrap();
        res.record_tree(&tree);
        let s = scores(&tree.labels, &truth).unwrap();
        ari += s.ari;
        nmi += s.nmi;
        f1 += s.f1;
    }
    (ari / 5.0, nmi / 5.0, f1 / 5.0, start.elapsed().as_secs_f64())
}

fn criterion_1(res: &mut Residuals) -> Outcome {
    let (ari, nmi, f1, secs) = planted_runs(4.0, false, res);
    Outcome::new(
        ari >= 0.9 && nmi >= 0.9 && f1 >= 0.9 && secs < 60.0,
        format!("square sigma=4: ARI {ari:.3}, NMI {nmi:.3}, F1 {f1:.3} (need 0.90 each), {secs:.1} s (need < 60)"),
    )
}

fn criterion_2(res: &mut Residuals) -> Outcome {
    let (ari, nmi, f1, _) = planted_runs(2.0, false, res);
    Outcome::new(ari >= 0.55, format!("square sigma=2: ARI {ari:.3} (need 0.55), NMI {nmi:.3}, F1 {f1:.3}"))
}

fn criterion_3(res: &mut Residuals) -> Outcome {
    let (ari, nmi, f1, _) = planted_runs(4.0, true, res);
    Outcome::new(
        ari >= 0.8,
        format!("rectangular sigma=4: ARI {ari:.3} (need 0.80), NMI {nmi:.3}, F1 {f1:.3}"),
    )
}

const SMALL_ALPHA: f64 = 0.15;

fn small_alpha_instances() -> Vec<SparseTensor> {
    let mut r = rng(4);
    (0..20).map(|_| random_tensor(&mut r, 20, 3, 600)).collect()
}

fn criterion_4(instances: &[SparseTensor], res: &mut Residuals) -> Outcome {
    let mut r = rng(40);
    let mut worst: f64 = 0.0;
    let mut all_converged = true;
    for t in instances {
        let p = normalize(t).unwrap();
        let sols: Vec<Vec<f64>> = (0..10)
            .map(|_| {
                let opts = StationaryOptions {
                    x0: Some(random_probability(&mut r, 20)),
                    ..StationaryOptions::with_alpha(SMALL_ALPHA)
                };
                let s = solve_stationary(&p, &opts).unwrap();
                res.record(s.converged, stationary_residual(&p, s.alpha, &s.v, &s.x).unwrap());
                all_converged &= s.converged;
                s.x
            })
            .collect();
        for a in 0..sols.len() {
            for b in a + 1..sols.len() {
                worst = worst.max(l1(&sols[a], &sols[b]));
            }
        }
    }
    Outcome::new(
        all_converged && worst <= 1e-8,
        format!("20 instances x 10 starts at alpha=0.15: max pairwise l1 {worst:.2e} (need 1e-8)"),
    )
}

fn criterion_5(instances: &[SparseTensor]) -> Outcome {
    let mut r = rng(50);
    let mut worst_ratio: f64 = 0.0;
    let mut checked = 0;
    let mut violations = 0;
    for t in instances {
        let p = normalize(t).unwrap();
        let star = solve_stationary(
            &p,
            &StationaryOptions {
                tol: 1e-15,
                ..StationaryOptions::with_alpha(SMALL_ALPHA)
            },
        )
        .unwrap()
        .x;
        let mut iterates = vec![random_probability(&mut r, 20)];
        let opts = StationaryOptions {
            x0: Some(iterates[0].clone()),
            ..StationaryOptions::with_alpha(SMALL_ALPHA)
        };
        solve_stationary_observed(&p, &opts, |_, x| iterates.push(x.to_vec())).unwrap();
        for k in 1..iterates.len() - 1 {
            let before = l1(&iterates[k], &star);
            // x* itself is only accurate to rounding.
            if before < 1e-12 {
                break;
            }
            let ratio = l1(&iterates[k + 1], &star) / before;
            worst_ratio = worst_ratio.max(ratio);
            checked += 1;
            if ratio > 5.0 * SMALL_ALPHA {
                violations += 1;
            }
        }
    }
    Outcome::new(
        violations == 0 && checked > 0,
        format!(
            "{checked} steps checked: worst ratio {worst_ratio:.3} against bound {:.2}, {violations} violations",
            5.0 * SMALL_ALPHA
        ),
    )
}

fn criterion_6(res: &Residuals) -> Outcome {
    Outcome::new(
        res.count > 0 && res.worst <= 1e-9,
        format!("{} converged solves: worst residual {:.2e} (need 1e-9)", res.count, res.worst),
    )
}

fn criterion_7() -> Outcome {
    let mut r = rng(7);
    let (mut chain_err, mut sweep_err, mut apply_err, mut cond_err): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    let mut cases = 0;
    for (order, n, nnz) in [(3, 30, 900), (3, 12, 200), (4, 12, 1500), (4, 8, 300)] {
        for _ in 0..5 {
            let t = symmetrize_square(&random_tensor(&mut r, n, order, nnz)).unwrap();
            cases += 1;

            let x = random_probability(&mut r, n);
            let y = t.apply_squared(&x).unwrap();
            let px_raw = dense_px(&t, &x);
            let dense_y: Vec<f64> = (0..n).map(|i| (0..n).map(|j| px_raw[i][j] * x[j]).sum()).collect();
            apply_err = apply_err.max(max_abs_diff(&y, &dense_y));

            let p = normalize(&t).unwrap();
            let s = solve_stationary(&p, &StationaryOptions::default()).unwrap();
            let chain = build_chain(&p, &s.x).unwrap();
            let dense = dense_chain(&dense_px(p.tensor(), &s.x), &s.x);
            let v: Vec<f64> = (0..n).map(|_| r.random_range(-1.0..1.0)).collect();
            let dense_apply: Vec<f64> = (0..n).map(|i| (0..n).map(|j| dense[i][j] * v[j]).sum()).collect();
            let dense_tr: Vec<f64> = (0..n).map(|j| (0..n).map(|i| dense[i][j] * v[i]).sum()).collect();
            chain_err = chain_err
                .max(max_abs_diff(&chain.apply(&v), &dense_apply))
                .max(max_abs_diff(&chain.apply_transpose(&v), &dense_tr));

            let (sorted, phis) = sweep_profile(&chain, &v, &s.x).unwrap();
            for k in 1..n {
                let mut set = sorted[..k].to_vec();
                set.sort_unstable();
                let mut inside = vec![false; n];
                for &i in &set {
                    inside[i] = true;
                }
                let scratch = biased_conductance(&chain, &set, &s.x).unwrap();
                let oracle = dense_exit_max(&dense, &inside, &s.x);
                sweep_err = sweep_err.max((phis[k - 1] - scratch).abs());
                cond_err = cond_err.max((scratch - oracle).abs());
            }
        }
    }
    let worst = chain_err.max(sweep_err).max(apply_err).max(cond_err);
    Outcome::new(
        worst <= 1e-10,
        format!(
            "{cases} instances (orders 3 and 4): chain {chain_err:.1e}, sweep {sweep_err:.1e}, \
             apply_squared {apply_err:.1e}, conductance {cond_err:.1e} (need 1e-10)"
        ),
    )
}

/// Two noisy communities joined by a path.
fn planted_graph(r: &mut ChaCha8Rng, n: usize) -> SparseTensor {
    let half = n / 2;
    let mut entries = Vec::new();
    for i in 0..n {
        if i + 1 < n {
            entries.push((vec![i, i + 1], 1.0));
            entries.push((vec![i + 1, i], 1.0));
        }
        for j in i + 1..n {
            let same = (i < half) == (j < half);
            if r.random_bool(if same { 0.5 } else { 0.05 }) {
                let w = r.random_range(0.5..2.0);
                entries.push((vec![i, j], w));
                entries.push((vec![j, i], w));
            }
        }
    }
    SparseTensor::from_entries(vec![n; 2], entries).unwrap()
}

/// Fiedler sweep cut: second eigenvector of `D^{-1/2} A D^{-1/2}` from a
/// dense symmetric solver, scaled by `D^{-1/2}`, swept by conductance.
fn fiedler_cut(adj: &[Vec<f64>]) -> Vec<bool> {
    let n = adj.len();
    let deg: Vec<f64> = (0..n).map(|i| adj[i].iter().sum()).collect();
    let vol: f64 = deg.iter().sum();
    let a = DMatrix::from_fn(n, n, |i, j| adj[i][j] / (deg[i] * deg[j]).sqrt());
    let eig = a.symmetric_eigen();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let v = eig.eigenvectors.column(idx[1]);
    let z: Vec<f64> = (0..n).map(|i| v[i] / deg[i].sqrt()).collect();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| z[a].total_cmp(&z[b]));
    let mut best = (f64::INFINITY, 0);
    for k in 1..n {
        let mut inside = vec![false; n];
        for &i in &order[..k] {
            inside[i] = true;
        }
        let cut: f64 = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| inside[i] && !inside[j])
            .map(|(i, j)| adj[i][j])
            .sum();
        let vs: f64 = (0..n).filter(|&i| inside[i]).map(|i| deg[i]).sum();
        let phi = cut / vs.min(vol - vs);
        if phi < best.0 {
            best = (phi, k);
        }
    }
    let mut inside = vec![false; n];
    for &i in &order[..best.1] {
        inside[i] = true;
    }
    inside
}

fn criterion_8() -> Outcome {
    let mut r = rng(8);
    let params = GtscParams {
        alpha: 1.0 - 1e-9,
        ..GtscParams::default()
    };
    let mut agree = 0;
    for g in 0..10 {
        let n = 12 + 2 * g;
        let t = planted_graph(&mut r, n);
        let adj = t.contract_to_matrix(&vec![1.0; n]).unwrap().to_dense();
        let a = analyze_node(&t, &params, 0).unwrap();
        let mut ours = vec![false; n];
        for &i in &a.sweep.set {
            ours[i] = true;
        }
        let oracle = fiedler_cut(&adj);
        let flipped: Vec<bool> = oracle.iter().map(|b| !b).collect();
        if ours == oracle || ours == flipped {
            agree += 1;
        }
    }
    Outcome::new(agree == 10, format!("{agree}/10 graphs give the Fiedler sweep partition"))
}

fn criterion_9(res: &mut Residuals) -> Outcome {
    let mut r = rng(9);
    let mut worst: f64 = 0.0;
    for k in 0..5 {
        let n = 10;
        let p = normalize(&random_tensor(&mut r, n, 3, 150)).unwrap();
        let s = solve_stationary(&p, &StationaryOptions::default()).unwrap();
        res.record(s.converged, stationary_residual(&p, s.alpha, &s.v, &s.x).unwrap());
        let v = vec![1.0 / n as f64; n];
        let occ = simulate_super_spacey(&p, s.alpha, &v, 1_000_000, 90 + k).unwrap();
        worst = worst.max(0.5 * l1(&occ, &s.x));
    }
    Outcome::new(worst <= 0.05, format!("5 instances, 10^6 steps: worst total variation {worst:.4} (need 0.05)"))
}

fn criterion_10() -> Outcome {
    let spec = SynthSpec {
        n_groups: 100,
        size_mean: 100.0,
        t_within: 200_000,
        t_across: 20_000,
        ..SynthSpec::square(4.0, 1)
    };
    let t = generate(&spec).unwrap().tensor;
    let full = symmetrize_square(&t).unwrap().nnz() as f64;
    let fractions: Vec<f64> = (0..7).map(|k| (1e3 * 10f64.powf(k as f64 / 2.0) / full).min(1.0)).collect();
    let params = GtscParams {
        phi_star: 0.35,
        ..GtscParams::default()
    };
    let start = Instant::now();
    let rows = run_scaling(&t, &Shape::Square, &fractions, &params, 1, 10).unwrap();
    let total = start.elapsed().as_secs_f64();
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.nnz as f64, r.seconds)).collect();
    let slope = loglog_slope(&points).unwrap_or(f64::NAN);
    let (lo, hi) = (rows[0].nnz, rows[rows.len() - 1].nnz);
    Outcome::new(
        (0.8..=1.3).contains(&slope) && total < 600.0,
        format!("{lo} to {hi} non-zeros: slope {slope:.3} (need 0.8 to 1.3), {total:.1} s (need < 600)"),
    )
}

fn main() {
    let mut res = Residuals::default();
    let instances = small_alpha_instances();
    let mut outcomes = vec![
        (1, criterion_1(&mut res)),
        (2, criterion_2(&mut res)),
        (3, criterion_3(&mut res)),
        (4, criterion_4(&instances, &mut res)),
        (5, criterion_5(&instances)),
        (9, criterion_9(&mut res)),
    ];
    // Criterion 6 covers every solve made above.
    outcomes.push((6, criterion_6(&res)));
    outcomes.push((7, criterion_7()));
    outcomes.push((8, criterion_8()));
    outcomes.push((10, criterion_10()));
    outcomes.sort_by_key(|(k, _)| *k);

    for (k, o) in &outcomes {
        println!("criterion {k} {} {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    let passed = outcomes.iter().filter(|(_, o)| o.pass).count();
    println!("{passed}/{} criteria passed", outcomes.len());
    let strict = std::env::var("GTSC_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    if strict && passed < outcomes.len() {
        std::process::exit(1);
    }
}
