use nalgebra::DMatrix;
use num_complex::Complex;
use proptest::prelude::*;
use ringswarm::model::ModelParams;
use ringswarm::stability::jacobian::{block_a, block_b, fd_jacobian_xi_eta, FD_STEP};
use ringswarm::stability::{
    build_jacobian_analytic, max_mismatch, numeric_jacobian_spectrum, polarized_eigenvalues, polarized_fixed_point,
    polarized_stability, stability_report, sync_eigenvalues, sync_fixed_point, StateKind,
};

#[test]
fn polarized_spectrum_matches_numeric() {
    for n in [8, 16, 40] {
        for &(k_p, k_n, p) in &[(0.5, -0.5, 0.8), (1.0, -0.7, 0.6), (0.2, -0.9, 0.75), (0.8, -0.3, 0.7)] {
            let params = ModelParams::double_delta(p, k_p, k_n, n).unwrap();
            let a = polarized_eigenvalues(1.0, k_p, k_n, p, n).unwrap();
            let b = numeric_jacobian_spectrum(&params, StateKind::Polarized).unwrap();
            let m = max_mismatch(&a, &b).unwrap();
            assert!(m <= 1e-6, "N={n} ({k_p},{k_n},{p}): mismatch {m:e}");
        }
    }
}

#[test]
fn sync_spectrum_matches_numeric_at_mixed_p() {
    for n in [8, 13, 30] {
        for &(k_p, k_n, p) in &[(0.5, -0.5, 0.7), (1.5, 0.3, 0.4), (0.5, -0.5, 1.0)] {
            let params = ModelParams::double_delta(p, k_p, k_n, n).unwrap();
            let a = sync_eigenvalues(1.0, k_p, k_n, p, n).unwrap();
            let b = numeric_jacobian_spectrum(&params, StateKind::Sync).unwrap();
            let m = max_mismatch(&a, &b).unwrap();
            assert!(m <= 1e-6, "N={n} ({k_p},{k_n},{p}): mismatch {m:e}");
        }
    }
}

#[test]
fn sync_at_full_conformity_has_expected_multiplicities() {
    let params = ModelParams::double_delta(1.0, 0.5, -0.5, 8).unwrap();
    let s = numeric_jacobian_spectrum(&params, StateKind::Sync).unwrap();
    assert_eq!(s.multiplicity_of(Complex::new(-1.0, 0.0), 1e-6), 7);
    assert_eq!(s.multiplicity_of(Complex::new(0.0, 0.0), 1e-6), 2);
}

#[test]
fn analytic_block_jacobians_match_finite_differences() {
    for &(n, k_p, k_n, p) in &[(8, 0.5, -0.5, 0.75), (12, 1.2, -0.3, 0.5), (10, 0.4, -2.0, 0.3)] {
        let params = ModelParams::double_delta(p, k_p, k_n, n).unwrap();
        let pol = polarized_fixed_point(&params).unwrap().mirrored();
        let fd = fd_jacobian_xi_eta(&params, &pol, FD_STEP);
        let an = build_jacobian_analytic(&params, StateKind::Polarized).unwrap();
        assert!((fd - an).amax() <= 1e-6, "polarized N={n}");

        let sync = sync_fixed_point(&params);
        let fd = fd_jacobian_xi_eta(&params, &sync, FD_STEP);
        let an = build_jacobian_analytic(&params, StateKind::Sync).unwrap();
        assert!((fd - an).amax() <= 1e-6, "sync N={n}");
    }
}

#[test]
fn determinant_of_sync_blocks_factorises() {
    // [[P, Q], [Q, P]] has the spectrum of P + Q and P - Q
    let (j, k_p, k_n, n, n_p) = (1.0f64, 0.7, -0.4, 9, 5);
    let p_blk = block_a(j, k_p, k_n, n, n_p);
    let q_blk = block_a(j, -k_p, -k_n, n, n_p);
    let mut full = DMatrix::zeros(2 * n, 2 * n);
    full.view_mut((0, 0), (n, n)).copy_from(&p_blk);
    full.view_mut((0, n), (n, n)).copy_from(&q_blk);
    full.view_mut((n, 0), (n, n)).copy_from(&q_blk);
    full.view_mut((n, n), (n, n)).copy_from(&p_blk);
    let lhs = full.determinant();
    let rhs = (&p_blk + &q_blk).determinant() * (&p_blk - &q_blk).determinant();
    assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    assert!(block_b(j, k_p, k_n, n, n_p).column_sum().amax() < 1e-14);
}

#[test]
fn every_spectrum_has_a_double_zero() {
    for (kind, p) in [(StateKind::Polarized, 0.8), (StateKind::Sync, 0.6)] {
        let r = stability_report(1.0, 0.5, -0.5, p, 20, kind, true).unwrap();
        let s = r.numeric_spectrum.unwrap();
        assert!(s.multiplicity_of(Complex::new(0.0, 0.0), 1e-6) >= 2);
        assert!(r.max_mismatch.unwrap() <= 1e-6);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn verdict_agrees_with_analytic_spectrum(
        k_p in 0.05..1.5f64,
        k_n in -2.0..0.0f64,
        p in 0.52..0.95f64,
    ) {
        let n = 40;
        let params = ModelParams::double_delta(p, k_p, k_n, n).unwrap();
        let p_real = params.conformists().unwrap() as f64 / n as f64;
        prop_assume!(params.conformists().unwrap() < n);
        let spectrum = polarized_eigenvalues(1.0, k_p, k_n, p, n).unwrap();
        let verdict = polarized_stability(1.0, k_p, k_n, p_real);
        // stable iff no eigenvalue has positive real part (margins kept away from zero)
        let max_re = spectrum.expanded().iter().map(|c| c.re).fold(f64::MIN, f64::max);
        let margin = verdict.conditions.iter().map(|c| c.margin.abs()).fold(f64::MAX, f64::min);
        prop_assume!(margin > 1e-3);
        if verdict.condition("conformist_majority").unwrap().satisfied {
            prop_assert_eq!(verdict.stable, max_re <= 1e-12);
        }
    }
}
