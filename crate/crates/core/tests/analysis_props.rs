mod common;

use approx::assert_relative_eq;
use lossless_core::analysis::{
    compare_lumped, ensemble_average, network_gains, paired_controller, subblock_gains, Metric,
};
use lossless_core::netgen::{generate_network, EnsembleConfig};
use lossless_core::numlin::{h2_norm, hinf_norm};
use lossless_core::swing::{PowerNetwork, SwingModel};
use lossless_core::synth::{build_generalized_plant, close_loop};

fn small_net(seed: u64) -> PowerNetwork {
    generate_network(&EnsembleConfig { seed, ..EnsembleConfig::with_size(4, 16) }).unwrap()
}

#[test]
fn squared_h2_gains_add_up_to_the_closed_loop_norm() {
    for seed in 0..3 {
        let net = small_net(seed);
        let model = SwingModel::<f64>::from_network(&net).unwrap();
        let k = paired_controller(model.plant(), Metric::H2).unwrap();
        let g = subblock_gains(model.sys(), &k, Metric::H2).unwrap();
        let cl = close_loop(&build_generalized_plant(model.sys()), &k).unwrap();
        let total: f64 = g.values.iter().map(|v| v * v).sum();
        assert_relative_eq!(total, h2_norm(&cl).unwrap().powi(2), max_relative = 1e-8);
        assert!(g.values.iter().all(|&v| v > 0.0));
    }
}

#[test]
fn hinf_gains_have_sqrt2_diagonal_and_stay_below_the_full_norm() {
    let net = small_net(5);
    let model = SwingModel::<f64>::from_network(&net).unwrap();
    let k = paired_controller(model.plant(), Metric::Hinf).unwrap();
    let g = subblock_gains(model.sys(), &k, Metric::Hinf).unwrap();
    let full = hinf_norm(&close_loop(&build_generalized_plant(model.sys()), &k).unwrap(), 1e-8).unwrap();
    for i in 0..g.n() {
        assert!((g.values[(i, i)] - 2f64.sqrt()).abs() < 1e-3);
    }
    assert!(g.values.iter().all(|&v| v <= full * (1.0 + 1e-6)));
}

#[test]
fn hinf_gains_of_random_swing_models() {
    let mut rng = common::rng(41);
    for n in [2, 5] {
        let model = common::random_swing(&mut rng, n);
        let k = paired_controller(model.plant(), Metric::Hinf).unwrap();
        let g = subblock_gains(model.sys(), &k, Metric::Hinf).unwrap();
        for i in 0..n {
            assert!((g.values[(i, i)] - 2f64.sqrt()).abs() < 1e-3);
        }
    }
}

#[test]
fn lumped_model_comparison() {
    let net = generate_network(&EnsembleConfig { seed: 2, ..EnsembleConfig::with_size(6, 24) }).unwrap();
    let cmp = compare_lumped(&net, Metric::Hinf).unwrap();
    assert!(cmp.limit_lumped <= cmp.limit_full);
    let g = &cmp.lumped_gains;
    assert_eq!(g.n(), 5);
    for i in 0..g.n() {
        assert!((g.values[(i, i)] - 2f64.sqrt()).abs() < 1e-3);
        for k in 0..g.n() {
            assert!((g.values[(i, k)] - g.values[(k, i)]).abs() < 1e-6);
        }
    }
    let h2 = compare_lumped(&net, Metric::H2).unwrap();
    assert_eq!(h2.full_gains.n(), 5);
    assert!(h2.lumped_gains.values.iter().sum::<f64>() < h2.full_gains.values.iter().sum::<f64>());
}

#[test]
fn ensemble_of_one_is_the_single_run() {
    let cfg = EnsembleConfig { seed: 7, ..EnsembleConfig::fixed_sizes() };
    let avg = ensemble_average(&cfg, 1, Metric::H2).unwrap();
    let single = network_gains(&generate_network(&cfg).unwrap(), Metric::H2).unwrap();
    assert_eq!(avg.seeds, vec![7]);
    assert_eq!(avg.mean.values, single.values);
    assert!(ensemble_average(&EnsembleConfig::default(), 1, Metric::H2).is_err());
}

#[test]
fn scaling_inertia_scales_the_h2_norm() {
    let net = small_net(8);
    let alpha: f64 = 4.0;
    let mut scaled = net.clone();
    for b in scaled.buses.iter_mut() {
        b.inertia = b.inertia.map(|m| m * alpha);
    }
    let g = network_gains(&net, Metric::H2).unwrap();
    let gs = network_gains(&scaled, Metric::H2).unwrap();
    let norm = |m: &nalgebra::DMatrix<f64>| m.iter().map(|v| v * v).sum::<f64>().sqrt();
    assert_relative_eq!(norm(&gs.values), norm(&g.values) / alpha.sqrt(), max_relative = 1e-8);
}
