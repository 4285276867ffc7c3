mod common;

use std::collections::BTreeSet;

use gnc_lasso::graph::SpectralBasis;
use gnc_lasso::sim::{rates, roc_from_supports, sample_data, simulate_means, simulate_precision};
use gnc_lasso::Network;
use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;

fn all_pairs(p: usize) -> Vec<(usize, usize)> {
    (0..p).flat_map(|a| ((a + 1)..p).map(move |b| (a, b))).collect()
}

#[test]
fn rates_match_naive_recount() {
    let mut rng = common::rng(1);
    let p = 10;
    for _ in 0..50 {
        let mut truth = Vec::new();
        let mut estimate = Vec::new();
        for (a, b) in all_pairs(p) {
            let in_truth = rng.random_bool(0.3);
            if in_truth {
                truth.push((a, b));
            }
            // half right, half coin flip
            let guess = if rng.random_bool(0.5) { in_truth } else { rng.random_bool(0.5) };
            if guess {
                estimate.push(if rng.random_bool(0.5) { (a, b) } else { (b, a) });
            }
        }
        let truth_set: BTreeSet<_> = truth.iter().copied().collect();
        let (fpr, tpr): (f64, f64) = rates(&estimate, &truth_set, p).unwrap();

        let mut tp = 0.0;
        let mut fp = 0.0;
        let mut pos = 0.0;
        let mut neg = 0.0;
        for a in 0..p {
            for b in (a + 1)..p {
                let t = truth.contains(&(a, b));
                let e = estimate.contains(&(a, b)) || estimate.contains(&(b, a));
                match (t, e) {
                    (true, true) => tp += 1.0,
                    (false, true) => fp += 1.0,
                    _ => {}
                }
                if t {
                    pos += 1.0;
                } else {
                    neg += 1.0;
                }
            }
        }
        assert_eq!(tpr, tp / pos);
        assert_eq!(fpr, fp / neg);
    }
}

/// Nested supports adding pairs in `order`, every `step` pairs.
fn nested_path(order: &[(usize, usize)], step: usize) -> Vec<(f64, Vec<(usize, usize)>)> {
    (0..=order.len())
        .step_by(step)
        .map(|k| (1.0 / (k as f64 + 1.0), order[..k].to_vec()))
        .collect()
}

#[test]
fn truth_first_path_has_unit_auc() {
    let p = 15;
    let pairs = all_pairs(p);
    let truth: Vec<_> = pairs.iter().copied().filter(|&(a, b)| (a + 2 * b) % 7 == 0).collect();
    let mut order = truth.clone();
    order.extend(pairs.iter().filter(|e| !truth.contains(e)));
    let curve = roc_from_supports(&nested_path(&order, 1), &truth, p).unwrap();
    assert!((curve.auc - 1.0).abs() < 1e-12);
    for pt in &curve.points {
        assert!((0.0..=1.0).contains(&pt.fpr) && (0.0..=1.0).contains(&pt.tpr));
    }
}

#[test]
fn shuffled_path_has_chance_auc() {
    let p = 30;
    let pairs = all_pairs(p);
    let mut aucs = Vec::new();
    for seed in 0..20 {
        let mut rng = common::rng(1000 + seed);
        let truth: Vec<_> = pairs.iter().copied().filter(|_| rng.random_bool(0.1)).collect();
        let mut order = pairs.clone();
        order.shuffle(&mut rng);
        let curve = roc_from_supports(&nested_path(&order, 5), &truth, p).unwrap();
        assert!((curve.auc - 0.5).abs() <= 0.15, "seed {seed}: {}", curve.auc);
        aucs.push(curve.auc);
    }
    let mean = aucs.iter().sum::<f64>() / aucs.len() as f64;
    assert!((mean - 0.5).abs() <= 0.05);
}

#[test]
fn simulated_precision_invariants() {
    for (seed, prob) in [(1, 0.01), (2, 0.05), (3, 0.2), (4, 0.5)] {
        let sp = simulate_precision::<f64>(40, prob, seed).unwrap();
        for j in 0..40 {
            assert!((sp.sigma[(j, j)] - 1.0).abs() <= 1e-10);
        }
        assert!(common::max_abs(&(&sp.theta - sp.theta.transpose())) <= 1e-12);
        assert!(sp.theta.clone().cholesky().is_some());
        assert!(common::max_abs(&(&sp.theta * &sp.sigma - DMatrix::identity(40, 40))) <= 1e-9);
        // support is exactly the off-diagonal nonzeros of theta
        let nonzero: Vec<_> = all_pairs(40)
            .into_iter()
            .filter(|&(a, b)| sp.theta[(a, b)].abs() > 1e-8)
            .collect();
        assert_eq!(nonzero, sp.support);
    }
}

#[test]
fn sampled_data_has_right_moments() {
    let sp = simulate_precision::<f64>(5, 0.4, 9).unwrap();
    let n = 2000;
    let x = sample_data(&DMatrix::zeros(n, 5), &sp.sigma, 10).unwrap();
    for j in 0..5 {
        assert!(x.column(j).mean().abs() <= 5.0 / (n as f64).sqrt());
    }
    let mut cov = DMatrix::zeros(5, 5);
    for i in 0..n {
        let r = x.row(i);
        cov += r.transpose() * r;
    }
    cov /= n as f64;
    assert!(common::max_abs(&(cov - &sp.sigma)) <= 0.1);

    let again = sample_data(&DMatrix::zeros(n, 5), &sp.sigma, 10).unwrap();
    assert_eq!(x, again);
}

#[test]
fn generated_means_are_cohesive_with_low_frequency_pool() {
    // On a 40 x 40 lattice the two eigenvectors just above the constant
    // clear the delta = 0.1 bound whatever weight they carry.
    let basis = SpectralBasis::<f64>::from_network(&Network::lattice(40).unwrap()).unwrap();
    let sp = simulate_precision::<f64>(12, 0.1, 5).unwrap();
    for t in [0.1, 0.5, 1.0] {
        let m = simulate_means(&basis, 12, 2, t, 1.6, &sp.sigma, 3).unwrap();
        for j in 0..12 {
            let col = m.column(j).into_owned();
            assert!(basis.cohesion_check(&col, 0.1).unwrap().cohesive, "t {t} col {j}");
        }
    }
}

#[test]
fn generated_mean_ratios_match_direct_expansion() {
    let side = 10;
    let n = side * side;
    let basis = SpectralBasis::<f64>::from_network(&Network::lattice(side).unwrap()).unwrap();
    let sp = simulate_precision::<f64>(6, 0.2, 1).unwrap();
    let m = simulate_means(&basis, 6, 6, 0.5, 1.6, &sp.sigma, 2).unwrap();
    let bound = (n as f64).powf(-2.0 * 1.1 / 3.0 - 1.0);
    for j in 0..6 {
        let col = m.column(j).into_owned();
        let beta = basis.u.transpose() * &col;
        // only the constant and one pool eigenvector carry weight
        let used: Vec<usize> = (0..n).filter(|&i| beta[i].abs() > 1e-9 * beta.norm()).collect();
        assert_eq!(used.len(), 2, "col {j}");
        assert_eq!(used[1], n - 1);
        assert!(used[0] >= n - 7 && used[0] <= n - 2);
        let worst = basis.tau[used[0]].powi(2) * beta[used[0]].powi(2) / beta.norm_squared();
        let report = basis.cohesion_check(&col, 0.1).unwrap();
        assert!((report.margin() - (bound - worst)).abs() <= 1e-12 * bound.max(worst));
    }
}

#[test]
fn no_network_signal_gives_constant_means() {
    let basis = SpectralBasis::<f64>::from_network(&Network::lattice(6).unwrap()).unwrap();
    let sp = simulate_precision::<f64>(4, 0.3, 1).unwrap();
    let m = simulate_means(&basis, 4, 6, 0.0, 1.6, &sp.sigma, 2).unwrap();
    for j in 0..4 {
        let c = m.column(j);
        assert!(c.iter().all(|&v| (v - c[0]).abs() <= 1e-12));
    }
}
