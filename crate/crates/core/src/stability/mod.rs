//! Linear stability of the static states.
//!
//! Closed-form spectra live in [`analytic`]; [`jacobian`] holds the block
//! Jacobians and the finite-difference oracle that checks them.

pub mod analytic;
pub mod jacobian;
pub mod spectrum;

use std::f64::consts::{FRAC_PI_2, PI};

use serde::{Deserialize, Serialize};

pub use analytic::{
    async_threshold, critical_curves, critical_fraction, polarized_eigenvalues, polarized_stability, saddle_curve,
    sync_eigenvalues, sync_stability, AsyncThreshold, Condition, CriticalCurves, StabilityVerdict,
};
pub use jacobian::{build_jacobian_analytic, numeric_jacobian_spectrum};
pub use spectrum::{max_mismatch, EigenSpectrum, SpectrumSource};

use crate::error::{Error, Result};
use crate::model::{conformist_count, CouplingDistribution, ModelParams, SwarmState};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StateKind {
    Polarized,
    Sync,
}

impl std::str::FromStr for StateKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "polarized" => Ok(StateKind::Polarized),
            "sync" => Ok(StateKind::Sync),
            other => Err(Error::InvalidConfig(format!("unsupported state kind `{other}`"))),
        }
    }
}

/// Splits `count` members into two clumps, remainder to the first.
fn split(count: usize) -> (usize, usize) {
    let first = count.div_ceil(2);
    (first, count - first)
}

fn clumped_state<T: Scalar>(offsets: Vec<f64>) -> SwarmState<T> {
    let v: Vec<T> = offsets.into_iter().map(T::lit).collect();
    SwarmState::new(v.clone(), v, T::zero()).expect("clump layout has N >= 2")
}

/// Four-clump polarized configuration with `x = theta` on every clump.
///
/// Conformists sit at offsets 0 and π, contrarians at π/2 and 3π/2.
pub fn polarized_fixed_point<T: Scalar>(params: &ModelParams<T>) -> Result<SwarmState<T>> {
    let p = match params.distribution {
        CouplingDistribution::DoubleDelta { p, .. } => p,
        other => {
            return Err(Error::UnsupportedDistribution(format!(
                "polarized fixed point needs a double-delta distribution, got {other:?}"
            )))
        }
    };
    let n_p = conformist_count(p, params.n);
    let (c0, c1) = split(n_p);
    let (d0, d1) = split(params.n - n_p);
    let offsets = std::iter::repeat_n(0.0, c0)
        .chain(std::iter::repeat_n(PI, c1))
        .chain(std::iter::repeat_n(FRAC_PI_2, d0))
        .chain(std::iter::repeat_n(3.0 * FRAC_PI_2, d1))
        .collect();
    Ok(clumped_state(offsets))
}

/// Two antipodal clumps `(0, 0)` and `(π, π)`, each coupling group split
/// evenly between them.
///
/// Without a two-population distribution the first half goes to the first clump.
pub fn sync_fixed_point<T: Scalar>(params: &ModelParams<T>) -> SwarmState<T> {
    let n_p = params.conformists().unwrap_or(params.n);
    let (c0, c1) = split(n_p);
    let (d0, d1) = split(params.n - n_p);
    let offsets = std::iter::repeat_n(0.0, c0)
        .chain(std::iter::repeat_n(PI, c1))
        .chain(std::iter::repeat_n(0.0, d0))
        .chain(std::iter::repeat_n(PI, d1))
        .collect();
    clumped_state(offsets)
}

pub fn fixed_point<T: Scalar>(params: &ModelParams<T>, kind: StateKind) -> Result<SwarmState<T>> {
    match kind {
        StateKind::Polarized => polarized_fixed_point(params),
        StateKind::Sync => Ok(sync_fixed_point(params)),
    }
}

/// Everything the `stability` command reports for one parameter point.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StabilityReport {
    pub parameters: ReportParameters,
    pub analytic_spectrum: Option<EigenSpectrum<f64>>,
    pub numeric_spectrum: Option<EigenSpectrum<f64>>,
    pub max_mismatch: Option<f64>,
    pub verdict: StabilityVerdict<f64>,
    pub critical_curves: CriticalCurves<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportParameters {
    pub j: f64,
    pub k_p: f64,
    pub k_n: f64,
    pub p: f64,
    pub n: usize,
    pub n_p: usize,
    pub state: StateKind,
}

/// Evaluates the analytic results at `(J, K_p, K_n, p, N)` and optionally
/// checks the spectrum against the finite-difference Jacobian.
pub fn stability_report(
    j: f64,
    k_p: f64,
    k_n: f64,
    p: f64,
    n: usize,
    kind: StateKind,
    verify_numeric: bool,
) -> Result<StabilityReport> {
    let analytic = match kind {
        StateKind::Polarized => polarized_eigenvalues(j, k_p, k_n, p, n),
        StateKind::Sync => sync_eigenvalues(j, k_p, k_n, p, n),
    };
    // a degenerate polarized population still gets a verdict
    let analytic = match analytic {
        Ok(s) => Some(s),
        Err(Error::DegeneratePopulation(_)) => None,
        Err(e) => return Err(e),
    };
    let numeric = if verify_numeric {
        let params = ModelParams::double_delta(p, k_p, k_n, n)?.with_j(j);
        match kind {
            StateKind::Polarized if analytic.is_none() => None,
            _ => Some(numeric_jacobian_spectrum(&params, kind)?),
        }
    } else {
        None
    };
    let mismatch = match (&analytic, &numeric) {
        (Some(a), Some(b)) => max_mismatch(a, b),
        _ => None,
    };
    let verdict = match kind {
        StateKind::Polarized => polarized_stability(j, k_p, k_n, p),
        StateKind::Sync => sync_stability(j, k_p, k_n, p),
    };
    Ok(StabilityReport {
        parameters: ReportParameters { j, k_p, k_n, p, n, n_p: conformist_count(p, n), state: kind },
        analytic_spectrum: analytic,
        numeric_spectrum: numeric,
        max_mismatch: mismatch,
        verdict,
        critical_curves: critical_curves(j, k_p, k_n, p),
    })
}
