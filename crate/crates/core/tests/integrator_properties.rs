use std::f64::consts::{PI, TAU};

use proptest::prelude::*;
use ringswarm::integrator::{init_random, integrate, unwrap_increment, IntegrationConfig};
use ringswarm::model::{CouplingDistribution, ModelParams, SwarmState};
use ringswarm::scalar::angle_diff;
use ringswarm::stability::{polarized_fixed_point, sync_fixed_point};

fn pair_params() -> ModelParams<f64> {
    ModelParams::new(CouplingDistribution::DoubleDelta { p: 0.5, k_p: 0.8, k_n: -0.4 }, 2, 0)
        .unwrap()
        .with_frequencies(0.3, -0.2)
}

fn endpoint(dt: f64) -> SwarmState<f64> {
    let s0 = SwarmState::new(vec![0.1, 2.0], vec![0.4, -1.0], 0.0).unwrap();
    integrate(&s0, &pair_params(), &IntegrationConfig::new(dt, 4.0)).unwrap().last().clone()
}

fn err(a: &SwarmState<f64>, b: &SwarmState<f64>) -> f64 {
    a.x.iter().zip(&b.x).chain(a.theta.iter().zip(&b.theta)).map(|(u, v)| angle_diff(*u, *v).abs()).fold(0.0, f64::max)
}

#[test]
fn rk4_converges_at_fourth_order() {
    let reference = endpoint(0.2 / 64.0);
    let e1 = err(&endpoint(0.2), &reference);
    let e2 = err(&endpoint(0.1), &reference);
    let order = (e1 / e2).log2();
    assert!(order >= 3.5, "observed order {order} ({e1:e} -> {e2:e})");
}

#[test]
fn fixed_points_stay_put() {
    let cfg = IntegrationConfig::new(0.1, 20.0);
    let pol = ModelParams::double_delta(0.8, 0.5, -0.5, 40).unwrap();
    let s = polarized_fixed_point(&pol).unwrap();
    let tr = integrate(&s, &pol, &cfg).unwrap();
    assert!(err(tr.last(), &s) <= 1e-12);

    let sync = ModelParams::double_delta(1.0, 0.5, -0.5, 40).unwrap();
    let s = sync_fixed_point(&sync);
    let tr = integrate(&s, &sync, &cfg).unwrap();
    assert!(err(tr.last(), &s) <= 1e-12);
}

#[test]
fn uniform_drift_unwraps_to_straight_lines() {
    let params = ModelParams::<f64>::double_delta(1.0, 0.0, 0.0, 3).unwrap().with_j(0.0).with_frequencies(1.0, -0.5);
    let s0 = SwarmState::new(vec![0.0, 1.0, 2.0], vec![0.0, 0.5, 1.0], 0.0).unwrap();
    let tr = integrate(&s0, &params, &IntegrationConfig::new(0.1, 20.0)).unwrap();
    let last = tr.x_unwrapped.last().unwrap();
    let last_th = tr.theta_unwrapped.last().unwrap();
    for i in 0..3 {
        assert!((last[i] - s0.x[i] - 20.0).abs() < 1e-9);
        assert!((last_th[i] - s0.theta[i] + 10.0).abs() < 1e-9);
    }
    assert_eq!(tr.aliasing_steps, 0);
}

#[test]
fn wrapped_and_unwrapped_agree() {
    let params = ModelParams::<f64>::double_delta(0.6, 1.0, -0.5, 50).unwrap();
    let s0 = init_random(&params, 3);
    let tr = integrate(&s0, &params, &IntegrationConfig::new(0.25, 100.0).with_sample_every(4)).unwrap();
    for (s, (xl, tl)) in tr.states.iter().zip(tr.x_unwrapped.iter().zip(&tr.theta_unwrapped)) {
        for i in 0..s.n() {
            assert!(angle_diff(s.x[i], xl[i]).abs() < 1e-9);
            assert!(angle_diff(s.theta[i], tl[i]).abs() < 1e-9);
        }
    }
}

#[test]
fn repeated_runs_are_bit_identical() {
    let params = ModelParams::new(CouplingDistribution::SingleGaussian { mu: 0.2, sigma: 0.7 }, 64, 11).unwrap();
    let cfg = IntegrationConfig::new(0.1, 30.0);
    let a = integrate(&init_random(&params, 11), &params, &cfg).unwrap();
    let b = integrate(&init_random(&params, 11), &params, &cfg).unwrap();
    assert_eq!(a.states, b.states);
    assert_eq!(a.x_unwrapped, b.x_unwrapped);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn integration_commutes_with_shifts(c in -PI..PI, d in -PI..PI, seed in any::<u64>()) {
        let params = ModelParams::double_delta(0.7, 0.9, -0.6, 16).unwrap();
        let s0 = init_random(&params, seed);
        let cfg = IntegrationConfig::new(0.1, 5.0);
        let a = integrate(&s0, &params, &cfg).unwrap().last().shifted(c, d);
        let b = integrate(&s0.shifted(c, d), &params, &cfg).unwrap().last().clone();
        prop_assert!(err(&a, &b) <= 1e-9);
    }

    #[test]
    fn unwrap_recovers_small_steps(prev in 0.0..TAU, delta in -3.0..3.0f64) {
        let next = ringswarm::wrap_angle(prev + delta);
        let inc = unwrap_increment(prev, next);
        prop_assert!((inc.delta - delta).abs() <= 1e-12);
        prop_assert!(!inc.aliased);
    }
}
