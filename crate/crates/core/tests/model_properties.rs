use std::f64::consts::PI;

use proptest::prelude::*;
use ringswarm::model::{
    from_xi_eta, rhs_direct, rhs_meanfield, to_xi_eta, CouplingDistribution, ModelParams, SwarmState,
};
use ringswarm::scalar::angle_diff;

fn arb_state(n: usize) -> impl Strategy<Value = SwarmState<f64>> {
    (prop::collection::vec(-10.0..10.0f64, n), prop::collection::vec(-10.0..10.0f64, n))
        .prop_map(|(x, th)| SwarmState::new(x, th, 0.0).unwrap())
}

fn arb_params(n: usize) -> impl Strategy<Value = ModelParams<f64>> {
    (0.0..1.0f64, -3.0..3.0f64, -3.0..3.0f64, -2.0..2.0f64, -1.0..1.0f64, -1.0..1.0f64, any::<u64>()).prop_map(
        move |(p, k_p, k_n, j, nu, omega, seed)| {
            ModelParams::new(CouplingDistribution::DoubleDelta { p, k_p, k_n }, n, seed)
                .unwrap()
                .with_j(j)
                .with_frequencies(nu, omega)
        },
    )
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn meanfield_matches_direct((s, p) in (2usize..60).prop_flat_map(|n| (arb_state(n), arb_params(n)))) {
        let a = rhs_direct(&s, &p).unwrap();
        let b = rhs_meanfield(&s, &p).unwrap();
        prop_assert!(max_diff(&a.dx, &b.dx) <= 1e-12);
        prop_assert!(max_diff(&a.dtheta, &b.dtheta) <= 1e-12);
    }

    #[test]
    fn rates_are_translation_invariant(
        (s, p) in (2usize..40).prop_flat_map(|n| (arb_state(n), arb_params(n))),
        c in -7.0..7.0f64,
        d in -7.0..7.0f64,
    ) {
        let a = rhs_direct(&s, &p).unwrap();
        let b = rhs_direct(&s.shifted(c, d), &p).unwrap();
        prop_assert!(max_diff(&a.dx, &b.dx) <= 1e-12);
        prop_assert!(max_diff(&a.dtheta, &b.dtheta) <= 1e-12);
    }

    #[test]
    fn position_rates_sum_to_n_nu((s, p) in (2usize..80).prop_flat_map(|n| (arb_state(n), arb_params(n)))) {
        let r = rhs_meanfield(&s, &p).unwrap();
        let total: f64 = r.dx.iter().sum();
        prop_assert!((total - p.nu * p.n as f64).abs() <= 1e-12 * p.n as f64);
    }

    #[test]
    fn xi_eta_round_trip(s in (2usize..40).prop_flat_map(arb_state)) {
        let (xi, eta) = to_xi_eta(&s);
        let back = from_xi_eta(&xi, &eta, s.t).unwrap();
        let (xi2, eta2) = to_xi_eta(&back);
        for i in 0..s.n() {
            prop_assert!(angle_diff(xi2[i], xi[i]).abs() <= 1e-12);
            prop_assert!(angle_diff(eta2[i], eta[i]).abs() <= 1e-12);
            // halving recovers the original up to a common shift of π
            let dx = angle_diff(back.x[i], s.x[i]);
            let dt = angle_diff(back.theta[i], s.theta[i]);
            prop_assert!(dx.abs() <= 1e-12 || (dx.abs() - PI).abs() <= 1e-12);
            prop_assert!((dx.abs() - dt.abs()).abs() <= 1e-12);
        }
    }

    #[test]
    fn couplings_are_deterministic(n in 2usize..200, seed in any::<u64>(), sigma in 0.01..2.0f64) {
        let dist = CouplingDistribution::MixedGaussian { p: 0.3, k_p: 1.0, k_n: -1.0, sigma };
        let a = ModelParams::new(dist, n, seed).unwrap();
        let b = ModelParams::new(dist, n, seed).unwrap();
        prop_assert_eq!(a.k, b.k);
    }

    #[test]
    fn double_delta_counts(n in 2usize..500, p in 0.0..=1.0f64) {
        let params = ModelParams::double_delta(p, 1.0, -1.0, n).unwrap();
        let n_p = params.k.iter().filter(|&&k| k == 1.0).count();
        prop_assert_eq!(n_p, params.conformists().unwrap());
        prop_assert!(params.k[..n_p].iter().all(|&k| k == 1.0));
        prop_assert!(n_p as f64 >= p * n as f64 - 1e-9);
        prop_assert!((n_p as f64) < p * n as f64 + 1.0);
    }
}
