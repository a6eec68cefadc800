//! Block Jacobians in `(xi, eta)` coordinates and the finite-difference oracle.

use nalgebra::DMatrix;
use num_complex::Complex;

use super::spectrum::{EigenSpectrum, SpectrumSource};
use super::{fixed_point, StateKind};
use crate::error::{Error, Result};
use crate::model::{conformist_count, rhs_direct_into, CouplingDistribution, ModelParams, SwarmState};
use crate::scalar::Scalar;

/// Largest N accepted by [`numeric_jacobian_spectrum`].
pub const MAX_NUMERIC_N: usize = 400;

/// Central-difference step.
pub const FD_STEP: f64 = 1e-6;

/// Default tolerance for merging numeric eigenvalues into multiplicities.
pub const MERGE_TOL: f64 = 1e-7;

/// Diagonal-coupling block `A(x, y)`.
///
/// Row `i` carries `J + x` for conformists (`i < n_p`) and `J + y` for
/// contrarians; off-diagonal entries are that coefficient over `2N`, the
/// diagonal is `-(N-1)/(2N)` times it.
pub fn block_a<T: Scalar + nalgebra::Scalar>(j: T, x: T, y: T, n: usize, n_p: usize) -> DMatrix<T> {
    let two_n = T::lit(2.0) * T::count(n);
    DMatrix::from_fn(n, n, |r, c| {
        let coef = j + if r < n_p { x } else { y };
        if r == c {
            -T::count(n - 1) / two_n * coef
        } else {
            coef / two_n
        }
    })
}

/// Cross-population block `B(x, y)`.
///
/// Off-diagonal entries are `±(J + x|y)/(2N)`, positive within a population
/// and negative across. Diagonals are `(N - 2n_p + 1)/(2N)(J + x)` on
/// conformist rows and `-(N - 2n_p - 1)/(2N)(J + y)` on contrarian rows,
/// i.e. minus the row's off-diagonal sum.
pub fn block_b<T: Scalar + nalgebra::Scalar>(j: T, x: T, y: T, n: usize, n_p: usize) -> DMatrix<T> {
    let two_n = T::lit(2.0) * T::count(n);
    let (nf, npf, one) = (T::count(n), T::count(n_p), T::one());
    let two = T::lit(2.0);
    DMatrix::from_fn(n, n, |r, c| {
        let conf_r = r < n_p;
        let coef = j + if conf_r { x } else { y };
        if r == c {
            if conf_r {
                (nf - two * npf + one) / two_n * coef
            } else {
                -(nf - two * npf - one) / two_n * coef
            }
        } else if conf_r == (c < n_p) {
            coef / two_n
        } else {
            -coef / two_n
        }
    })
}

fn double_delta_parts<T: Scalar>(params: &ModelParams<T>) -> Result<(T, T, usize)> {
    match params.distribution {
        CouplingDistribution::DoubleDelta { p, k_p, k_n } => Ok((k_p, k_n, conformist_count(p, params.n))),
        other => Err(Error::UnsupportedDistribution(format!(
            "block Jacobian needs a double-delta distribution, got {other:?}"
        ))),
    }
}

fn assemble<T: Scalar + nalgebra::Scalar>(blocks: [[DMatrix<T>; 2]; 2]) -> DMatrix<T> {
    let n = blocks[0][0].nrows();
    let mut m = DMatrix::from_element(2 * n, 2 * n, T::zero());
    for (bi, row) in blocks.iter().enumerate() {
        for (bj, blk) in row.iter().enumerate() {
            m.view_mut((bi * n, bj * n), (n, n)).copy_from(blk);
        }
    }
    m
}

/// Analytic Jacobian of `(dxi/dt, deta/dt)` with respect to `(xi, eta)`.
///
/// Polarized: `[[A(K_p,K_n), B(-K_p,-K_n)], [A(-K_p,-K_n), B(K_p,K_n)]]`,
/// evaluated in the gauge where every `xi` coincides (the mirror image of
/// [`super::polarized_fixed_point`]). Sync:
/// `[[A(K_p,K_n), A(-K_p,-K_n)], [A(-K_p,-K_n), A(K_p,K_n)]]`.
pub fn build_jacobian_analytic<T: Scalar + nalgebra::Scalar>(
    params: &ModelParams<T>,
    kind: StateKind,
) -> Result<DMatrix<T>> {
    let (k_p, k_n, n_p) = double_delta_parts(params)?;
    let (j, n) = (params.j, params.n);
    let a = |x, y| block_a(j, x, y, n, n_p);
    let b = |x, y| block_b(j, x, y, n, n_p);
    Ok(match kind {
        StateKind::Polarized => assemble([[a(k_p, k_n), b(-k_p, -k_n)], [a(-k_p, -k_n), b(k_p, k_n)]]),
        StateKind::Sync => assemble([[a(k_p, k_n), a(-k_p, -k_n)], [a(-k_p, -k_n), a(k_p, k_n)]]),
    })
}

fn central_difference<F>(z0: &[f64], h: f64, mut f: F) -> DMatrix<f64>
where
    F: FnMut(&[f64], &mut [f64]),
{
    let m = z0.len();
    let mut jac = DMatrix::zeros(m, m);
    let mut z = z0.to_vec();
    let mut fp = vec![0.0; m];
    let mut fm = vec![0.0; m];
    for col in 0..m {
        z[col] = z0[col] + h;
        f(&z, &mut fp);
        z[col] = z0[col] - h;
        f(&z, &mut fm);
        z[col] = z0[col];
        for row in 0..m {
            jac[(row, col)] = (fp[row] - fm[row]) / (2.0 * h);
        }
    }
    jac
}

/// Central-difference Jacobian of the direct RHS in `(x, theta)` order.
pub fn fd_jacobian_x_theta(params: &ModelParams<f64>, state: &SwarmState<f64>, h: f64) -> DMatrix<f64> {
    let n = state.n();
    let z0: Vec<f64> = state.x.iter().chain(&state.theta).copied().collect();
    central_difference(&z0, h, |z, out| {
        let (dx, dt) = out.split_at_mut(n);
        rhs_direct_into(&z[..n], &z[n..], params, dx, dt);
    })
}

/// Central-difference Jacobian of the direct RHS rewritten in `(xi, eta)`.
pub fn fd_jacobian_xi_eta(params: &ModelParams<f64>, state: &SwarmState<f64>, h: f64) -> DMatrix<f64> {
    let n = state.n();
    // raw sums, so that (xi ± eta)/2 reproduces x and theta exactly
    let z0: Vec<f64> =
        (0..n).map(|i| state.x[i] + state.theta[i]).chain((0..n).map(|i| state.x[i] - state.theta[i])).collect();
    let mut x = vec![0.0; n];
    let mut th = vec![0.0; n];
    let mut dx = vec![0.0; n];
    let mut dt = vec![0.0; n];
    central_difference(&z0, h, |z, out| {
        for i in 0..n {
            x[i] = 0.5 * (z[i] + z[n + i]);
            th[i] = 0.5 * (z[i] - z[n + i]);
        }
        rhs_direct_into(&x, &th, params, &mut dx, &mut dt);
        for i in 0..n {
            out[i] = dx[i] + dt[i];
            out[n + i] = dx[i] - dt[i];
        }
    })
}

/// Eigenvalues of a dense real matrix via a real Schur decomposition.
///
/// Highly degenerate spectra can stall deflation at machine precision, so the
/// tolerance is relaxed in steps before giving up.
pub fn dense_eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    let scale = m.amax().max(1.0);
    for tol in [f64::EPSILON, 1e-14, 1e-13, 1e-12] {
        if let Some(schur) = nalgebra::linalg::Schur::try_new(m.clone(), tol * scale, 10_000) {
            return Ok(schur.complex_eigenvalues().iter().map(|c| Complex::new(c.re, c.im)).collect());
        }
    }
    Err(Error::Numeric {
        message: format!("Schur iteration did not converge for a {0}x{0} matrix", m.nrows()),
        matrix: Some(format!("{m:.17e}")),
    })
}

/// Spectrum of the finite-difference Jacobian at the constructed fixed point.
pub fn numeric_jacobian_spectrum(params: &ModelParams<f64>, kind: StateKind) -> Result<EigenSpectrum<f64>> {
    numeric_jacobian_spectrum_with(params, kind, MERGE_TOL)
}

pub fn numeric_jacobian_spectrum_with(
    params: &ModelParams<f64>,
    kind: StateKind,
    merge_tol: f64,
) -> Result<EigenSpectrum<f64>> {
    if params.n > MAX_NUMERIC_N {
        return Err(Error::InvalidConfig(format!(
            "numeric spectrum limited to N <= {MAX_NUMERIC_N}, got {}",
            params.n
        )));
    }
    let state = fixed_point(params, kind)?;
    let jac = fd_jacobian_x_theta(params, &state, FD_STEP);
    let values = dense_eigenvalues(&jac)?;
    Ok(EigenSpectrum::from_values(&values, merge_tol, SpectrumSource::Numeric))
}
