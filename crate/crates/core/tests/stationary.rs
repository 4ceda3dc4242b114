//! Fixed-point behaviour of the stationary solver.

mod common;

use common::*;
use gtsc_core::{normalize, simulate_super_spacey, solve_stationary, solve_stationary_observed, SparseTensor, StationaryOptions};

fn options(alpha: f64, x0: Option<Vec<f64>>) -> StationaryOptions {
    StationaryOptions {
        x0,
        ..StationaryOptions::with_alpha(alpha)
    }
}

#[test]
fn empty_feasible_set_returns_teleport() {
    let p = normalize(&SparseTensor::empty(vec![5; 3])).unwrap();
    let v = vec![0.1, 0.2, 0.3, 0.2, 0.2];
    let s = solve_stationary(&p, &StationaryOptions { v: Some(v.clone()), ..StationaryOptions::default() }).unwrap();
    assert!(max_abs_diff(&s.x, &v) < 1e-15);
}

#[test]
fn small_alpha_has_a_unique_solution() {
    let mut r = rng(10);
    for _ in 0..5 {
        let n = 20;
        let p = normalize(&random_tensor(&mut r, n, 3, 600)).unwrap();
        let reference = solve_stationary(&p, &options(0.15, None)).unwrap();
        for _ in 0..10 {
            let x0 = random_probability(&mut r, n);
            let s = solve_stationary(&p, &options(0.15, Some(x0))).unwrap();
            assert!(s.converged);
            assert!(l1(&s.x, &reference.x) < 1e-8);
        }
    }
}

#[test]
fn iterates_stay_on_the_simplex() {
    let mut r = rng(11);
    let p = normalize(&random_tensor(&mut r, 15, 3, 200)).unwrap();
    let mut checked = 0;
    solve_stationary_observed(&p, &options(0.9, Some(random_probability(&mut r, 15))), |_, x| {
        assert!(x.iter().all(|&v| v >= 0.0));
        assert!((x.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        checked += 1;
    })
    .unwrap();
    assert!(checked > 1);
}

#[test]
fn contraction_rate_holds_for_small_alpha() {
    let mut r = rng(12);
    let alpha = 0.15;
    for _ in 0..5 {
        let n = 20;
        let p = normalize(&random_tensor(&mut r, n, 3, 500)).unwrap();
        let star = solve_stationary(&p, &StationaryOptions { tol: 1e-15, ..options(alpha, None) }).unwrap().x;
        let mut iterates = vec![random_probability(&mut r, n)];
        solve_stationary_observed(&p, &options(alpha, Some(iterates[0].clone())), |_, x| iterates.push(x.to_vec())).unwrap();
        for k in 1..iterates.len() - 1 {
            let before = l1(&iterates[k], &star);
            // Below this the distance is rounding noise in x*.
            if before < 1e-12 {
                break;
            }
            assert!(l1(&iterates[k + 1], &star) <= 5.0 * alpha * before);
        }
    }
}

#[test]
fn fully_feasible_tensor_solves_multilinear_pagerank() {
    let mut r = rng(13);
    let n = 6;
    let entries = all_tuples(n, 3).into_iter().map(|t| {
        let w = 0.5 + ((t[0] * 7 + t[1] * 3 + t[2]) % 5) as f64;
        (t, w)
    });
    let t = SparseTensor::from_entries(vec![n; 3], entries).unwrap();
    let p = normalize(&t).unwrap();
    let v = random_probability(&mut r, n);
    let s = solve_stationary(&p, &StationaryOptions { v: Some(v.clone()), ..StationaryOptions::default() }).unwrap();
    let px2 = p.tensor().apply_squared(&s.x).unwrap();
    let resid: f64 = (0..n).map(|i| (0.8 * px2[i] + 0.2 * v[i] - s.x[i]).abs()).sum();
    assert!(resid <= 1e-9);
}

#[test]
fn column_rescaling_does_not_change_the_solution() {
    let mut r = rng(14);
    let t = random_tensor(&mut r, 10, 3, 150);
    let (j, k) = {
        let (idx, _) = t.entry(0);
        (idx[1] as usize, idx[2] as usize)
    };
    let scaled: Vec<(Vec<usize>, f64)> = t
        .iter()
        .map(|(idx, w)| {
            let idx: Vec<usize> = idx.iter().map(|&i| i as usize).collect();
            let w = if idx[1] == j && idx[2] == k { w * 37.5 } else { w };
            (idx, w)
        })
        .collect();
    let u = SparseTensor::from_entries(vec![10; 3], scaled).unwrap();
    let a = solve_stationary(&normalize(&t).unwrap(), &StationaryOptions::default()).unwrap();
    let b = solve_stationary(&normalize(&u).unwrap(), &StationaryOptions::default()).unwrap();
    assert!(max_abs_diff(&a.x, &b.x) < 1e-10);
}

#[test]
fn simulator_agrees_with_solver() {
    let mut r = rng(15);
    let n = 8;
    let p = normalize(&random_tensor(&mut r, n, 3, 120)).unwrap();
    let s = solve_stationary(&p, &StationaryOptions::with_alpha(0.8)).unwrap();
    let v = vec![1.0 / n as f64; n];
    let occ = simulate_super_spacey(&p, 0.8, &v, 200_000, 3).unwrap();
    assert!(0.5 * l1(&occ, &s.x) < 0.05);
}
