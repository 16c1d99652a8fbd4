mod common;

use approx::assert_relative_eq;
use lossless_core::analysis::jensen_report;
use lossless_core::swing::{
    build_laplacian, factor_reduced, harmonic_report, h2_limit_swing, kron_reduce, lump, Bus, BusKind, Line,
    PowerNetwork, SwingModel, Tier, DEFAULT_SWING_TOL,
};
use nalgebra::DMatrix;
use rand::Rng;

#[test]
fn two_generator_limit_is_one() {
    assert_eq!(h2_limit_swing(&[6.0f64, 3.0]).unwrap(), 1.0);
    let r = harmonic_report(&[6.0f64, 3.0]).unwrap();
    assert_relative_eq!(r.harmonic_mean, 4.0, max_relative = 1e-15);
    assert_relative_eq!(r.contributions.iter().sum::<f64>(), 1.0, max_relative = 1e-15);
}

#[test]
fn limit_over_n_is_twice_inverse_harmonic_mean() {
    let mut rng = common::rng(31);
    for _ in 0..100 {
        let n = rng.random_range(1..40);
        let m: Vec<f64> = (0..n).map(|_| 10f64.powf(rng.random_range(-3.0..1.0))).collect();
        let r = harmonic_report(&m).unwrap();
        assert_relative_eq!(r.gamma_sq_over_n, 2.0 / r.harmonic_mean, max_relative = 1e-12);
        assert_relative_eq!(r.gamma_h2 * r.gamma_h2, r.contributions.iter().sum::<f64>(), max_relative = 1e-12);
    }
}

#[test]
fn uniform_inertia_minimizes_the_sum_of_inverses() {
    let mut rng = common::rng(32);
    let (n, total) = (7usize, 21.0);
    let uniform = jensen_report(&vec![total / n as f64; n]).unwrap();
    assert!(uniform.gap <= 1e-12);
    for _ in 0..1000 {
        let raw: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
        let s: f64 = raw.iter().sum();
        let m: Vec<f64> = raw.iter().map(|x| x * total / s).collect();
        let r = jensen_report(&m).unwrap();
        let ratio = m.iter().copied().fold(0.0, f64::max) / m.iter().copied().fold(f64::INFINITY, f64::min);
        assert!(r.lhs > uniform.lhs);
        assert_eq!(r.gap <= 1e-12, (ratio - 1.0).abs() <= 1e-12);
    }
}

fn bus(id: usize, kind: BusKind, inertia: Option<f64>, cluster: usize) -> Bus {
    Bus { id, kind, power: 0.0, inertia, position: [id as f64, 0.0], cluster }
}

fn line(i: usize, j: usize, b: f64, tier: Tier) -> Line {
    Line { i, j, susceptance: b, load_angle: 0.0, tier }
}

#[test]
fn kron_reduction_of_a_star_is_complete() {
    // Three generators tied through one internal bus with unit susceptances:
    // eliminating the hub leaves a triangle with weights 1/3.
    let net = PowerNetwork {
        buses: vec![
            bus(0, BusKind::Conventional, Some(1.0), 0),
            bus(1, BusKind::Hydro, Some(2.0), 0),
            bus(2, BusKind::WindSolar, Some(0.5), 0),
            bus(3, BusKind::Load, None, 0),
        ],
        lines: (0..3).map(|g| line(g, 3, 1.0, Tier::Subtransmission)).collect(),
    };
    let lap = build_laplacian::<f64>(&net).unwrap();
    let k_red = kron_reduce(&lap.k_a, &lap.k_b, &lap.k_c).unwrap();
    let expected = DMatrix::from_fn(3, 3, |i, j| if i == j { 2.0 / 3.0 } else { -1.0 / 3.0 });
    assert_relative_eq!(k_red, expected, epsilon = 1e-14);
    let l = factor_reduced(&k_red, DEFAULT_SWING_TOL).unwrap();
    assert_relative_eq!(&l * l.transpose(), expected, epsilon = 1e-12);
}

#[test]
fn lumping_sums_inertia_and_keeps_transmission_lines() {
    let net = PowerNetwork {
        buses: vec![
            bus(0, BusKind::Conventional, Some(2.0), 0),
            bus(1, BusKind::Conventional, Some(4.0), 0),
            bus(2, BusKind::WindSolar, Some(0.01), 1),
            bus(3, BusKind::Load, None, 1),
            bus(4, BusKind::Load, None, 2),
        ],
        lines: vec![
            line(0, 1, 1.0, Tier::Subtransmission),
            line(2, 3, 1.0, Tier::Subtransmission),
            line(1, 3, 2.0, Tier::Transmission),
            line(3, 4, 2.0, Tier::Transmission),
            line(1, 4, 2.0, Tier::Transmission),
        ],
    };
    let lumped = lump(&net).unwrap();
    assert_eq!(lumped.buses.len(), 3);
    assert_eq!(lumped.lines.len(), 3);
    assert_eq!(lumped.buses[0].inertia, Some(6.0));
    assert_eq!(lumped.buses[2].kind, BusKind::Load);
    let full = SwingModel::<f64>::from_network(&net).unwrap();
    let small = SwingModel::<f64>::from_network(&lumped).unwrap();
    assert_eq!((full.n(), small.n()), (3, 2));
    assert_relative_eq!(small.plant().h2_limit().unwrap(), h2_limit_swing(&[6.0, 0.01]).unwrap(), max_relative = 1e-12);
}

#[test]
fn random_swing_models_carry_their_certificate() {
    let mut rng = common::rng(33);
    for n in 1..=10 {
        let model = common::random_swing(&mut rng, n);
        let sys = model.sys();
        let p = model.plant().p();
        assert!((p * sys.a() + sys.a().transpose() * p).amax() < 1e-10);
        assert!((p * sys.b() - sys.c().transpose()).amax() < 1e-12);
        assert_relative_eq!(
            model.plant().h2_limit().unwrap(),
            h2_limit_swing(model.m.as_slice()).unwrap(),
            max_relative = 1e-12
        );
    }
}
