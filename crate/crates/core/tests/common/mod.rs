#![allow(dead_code)]

use lossless_core::swing::{Bus, BusKind, Line, PowerNetwork, SwingModel, Tier};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator-only network with a random spanning tree plus a few chords,
/// log-uniform inertias in [1e-3, 1e1] and susceptances in [0.5, 2].
pub fn random_generator_network(rng: &mut ChaCha8Rng, n: usize) -> PowerNetwork {
    let buses = (0..n)
        .map(|id| Bus {
            id,
            kind: BusKind::Conventional,
            power: 0.0,
            inertia: Some(10f64.powf(rng.random_range(-3.0..=1.0))),
            position: [0.0, 0.0],
            cluster: 0,
        })
        .collect();
    let mut lines = Vec::new();
    let edge = |i: usize, j: usize, rng: &mut ChaCha8Rng| Line {
        i,
        j,
        susceptance: rng.random_range(0.5..2.0),
        load_angle: rng.random_range(-0.5..0.5),
        tier: Tier::Transmission,
    };
    for j in 1..n {
        let i = rng.random_range(0..j);
        lines.push(edge(i, j, rng));
    }
    for _ in 0..n / 2 {
        let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
        if i != j && !lines.iter().any(|l: &Line| (l.i == i && l.j == j) || (l.i == j && l.j == i)) {
            lines.push(edge(i.min(j), i.max(j), rng));
        }
    }
    PowerNetwork { buses, lines }
}

pub fn random_swing(rng: &mut ChaCha8Rng, n: usize) -> SwingModel<f64> {
    SwingModel::from_network(&random_generator_network(rng, n)).expect("random swing model")
}

pub fn random_matrix(rng: &mut ChaCha8Rng, r: usize, c: usize) -> DMatrix<f64> {
    DMatrix::from_fn(r, c, |_, _| rng.random_range(-1.0..1.0))
}

/// `S A S^-1` for a block-diagonal skew `A` with a random invertible `S`,
/// so that the result is lossless with certificate `S^-T S^-1`.
pub fn random_lossless(
    rng: &mut ChaCha8Rng,
    n_pairs: usize,
    m: usize,
) -> (DMatrix<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>) {
    let n = 2 * n_pairs;
    let mut a0 = DMatrix::zeros(n, n);
    for k in 0..n_pairs {
        let w = rng.random_range(0.3..3.0);
        a0[(2 * k, 2 * k + 1)] = w;
        a0[(2 * k + 1, 2 * k)] = -w;
    }
    let b0 = random_matrix(rng, n, m);
    let c0 = b0.transpose();
    let s = random_matrix(rng, n, n) + DMatrix::identity(n, n) * 3.0;
    let s_inv = s.clone().try_inverse().unwrap();
    let a = &s * a0 * &s_inv;
    let b = &s * b0;
    let c = c0 * &s_inv;
    let p = s_inv.transpose() * &s_inv;
    (a, b, c, p)
}
