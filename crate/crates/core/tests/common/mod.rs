#![allow(dead_code)]

use gnc_lasso::Network;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random spanning tree plus extra edges, so always connected.
pub fn random_connected(n: usize, extra: usize, rng: &mut ChaCha8Rng) -> Network {
    let mut edges = Vec::new();
    for i in 1..n {
        edges.push((rng.random_range(0..i), i));
    }
    for _ in 0..extra {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a != b {
            edges.push((a, b));
        }
    }
    Network::from_edges(n, &edges).unwrap()
}

pub fn random_matrix(rows: usize, cols: usize, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// `A A^T / k + shift I`, symmetric positive definite.
pub fn random_spd(p: usize, shift: f64, rng: &mut ChaCha8Rng) -> DMatrix<f64> {
    let a = random_matrix(p, p + 3, rng);
    let mut s = &a * a.transpose() / (p + 3) as f64;
    for j in 0..p {
        s[(j, j)] += shift;
    }
    (&s + s.transpose()) * 0.5
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |a, v| a.max(v.abs()))
}

/// Dense Laplacian `(D - A) / mean degree` assembled straight from the edges.
pub fn dense_laplacian(net: &Network) -> DMatrix<f64> {
    let n = net.n();
    let mut l = DMatrix::zeros(n, n);
    for &(a, b) in net.edges() {
        l[(a, b)] -= 1.0;
        l[(b, a)] -= 1.0;
        l[(a, a)] += 1.0;
        l[(b, b)] += 1.0;
    }
    let dbar = 2.0 * net.edges().len() as f64 / n as f64;
    l / dbar
}
