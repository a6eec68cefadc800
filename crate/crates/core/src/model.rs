//! Ring swarmalator dynamics.
//!
//! Each swarmalator carries a position `x_i` and a phase `theta_i`, both on
//! the circle. With uniform position coupling `J` and per-swarmalator phase
//! coupling `K_i`:
//!
//! ```text
//! dx_i/dt     = nu    + (J/N)   Σ_j sin(x_j - x_i) cos(theta_j - theta_i)
//! dtheta_i/dt = omega + (K_i/N) Σ_j sin(theta_j - theta_i) cos(x_j - x_i)
//! ```
//!
//! Writing `xi = x + theta`, `eta = x - theta` turns each double sum into a
//! pair of Kuramoto-like mean fields `W± = mean(exp(i(x ± theta)))`, so the
//! right-hand side can be evaluated in O(N) ([`rhs_meanfield`]) as well as by
//! the literal O(N²) sum ([`rhs_direct`]). The two agree exactly up to
//! floating point reassociation.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::{wrap_angle, Scalar};

/// Positions and phases of N swarmalators at time `t`, wrapped to `[0, 2π)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SwarmState<T> {
    pub x: Vec<T>,
    pub theta: Vec<T>,
    pub t: T,
}

impl<T: Scalar> SwarmState<T> {
    /// Builds a state, wrapping every angle into `[0, 2π)`.
    pub fn new(x: Vec<T>, theta: Vec<T>, t: T) -> Result<Self> {
        if x.len() != theta.len() {
            return Err(Error::DimensionMismatch { expected: x.len(), found: theta.len() });
        }
        if x.len() < 2 {
            return Err(Error::InvalidState(format!("need at least 2 swarmalators, got {}", x.len())));
        }
        if x.iter().chain(theta.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidState("non-finite angle".into()));
        }
        Ok(Self { x: x.into_iter().map(wrap_angle).collect(), theta: theta.into_iter().map(wrap_angle).collect(), t })
    }

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Rigid shift of every position by `dx` and every phase by `dtheta`.
    pub fn shifted(&self, dx: T, dtheta: T) -> Self {
        Self {
            x: self.x.iter().map(|&v| wrap_angle(v + dx)).collect(),
            theta: self.theta.iter().map(|&v| wrap_angle(v + dtheta)).collect(),
            t: self.t,
        }
    }

    /// The mirror image `theta -> -theta`, which swaps the roles of `xi` and `eta`.
    pub fn mirrored(&self) -> Self {
        Self { x: self.x.clone(), theta: self.theta.iter().map(|&v| wrap_angle(-v)).collect(), t: self.t }
    }
}

/// Distribution the phase couplings `K_i` are drawn from.
///
/// For both the double-delta and the mixed Gaussian, `p` is the fraction of
/// swarmalators attached to `k_p`; those come first in the coupling vector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum CouplingDistribution<T> {
    DoubleDelta {
        p: T,
        k_p: T,
        k_n: T,
    },
    #[serde(rename = "gaussian")]
    SingleGaussian {
        mu: T,
        sigma: T,
    },
    MixedGaussian {
        p: T,
        k_p: T,
        k_n: T,
        sigma: T,
    },
}

impl<T: Scalar> CouplingDistribution<T> {
    pub fn validate(&self) -> Result<()> {
        let check_p = |p: T| {
            if !(p >= T::zero() && p <= T::one()) {
                return Err(Error::InvalidDistribution(format!("fraction p = {p} outside [0, 1]")));
            }
            Ok(())
        };
        let check_sigma = |s: T| {
            if !(s > T::zero()) {
                return Err(Error::InvalidDistribution(format!("sigma = {s} must be positive")));
            }
            Ok(())
        };
        match *self {
            Self::DoubleDelta { p, .. } => check_p(p),
            Self::SingleGaussian { sigma, .. } => check_sigma(sigma),
            Self::MixedGaussian { p, sigma, .. } => check_p(p).and(check_sigma(sigma)),
        }
    }

    /// Population mean of the coupling, `<K>`.
    pub fn mean(&self) -> T {
        match *self {
            Self::DoubleDelta { p, k_p, k_n } | Self::MixedGaussian { p, k_p, k_n, .. } => {
                p * k_p + (T::one() - p) * k_n
            }
            Self::SingleGaussian { mu, .. } => mu,
        }
    }
}

/// Number of swarmalators attached to `k_p`: `ceil(p·n)`.
///
/// The product is nudged down by 1e-9 before rounding up so that values like
/// `0.7 * 10 = 7.000000000000001` count as 7.
pub fn conformist_count<T: Scalar>(p: T, n: usize) -> usize {
    let raw = (p.as_f64() * n as f64 - 1e-9).ceil();
    (raw.max(0.0) as usize).min(n)
}

/// Draws the coupling vector for `n` swarmalators.
///
/// Double-delta counts are deterministic (`ceil(p·n)` copies of `k_p`, then
/// `k_n`). Gaussian draws come from a ChaCha8 stream seeded with `seed`.
pub fn sample_couplings<T: Scalar>(dist: &CouplingDistribution<T>, n: usize, seed: u64) -> Result<Vec<T>> {
    if n < 2 {
        return Err(Error::InvalidState(format!("need at least 2 swarmalators, got {n}")));
    }
    dist.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut gauss = |mean: T, sigma: T| -> Result<T> {
        let d = Normal::new(mean.as_f64(), sigma.as_f64()).map_err(|e| Error::InvalidDistribution(e.to_string()))?;
        Ok(T::lit(d.sample(&mut rng)))
    };
    match *dist {
        CouplingDistribution::DoubleDelta { p, k_p, k_n } => {
            let n_p = conformist_count(p, n);
            Ok((0..n).map(|i| if i < n_p { k_p } else { k_n }).collect())
        }
        CouplingDistribution::SingleGaussian { mu, sigma } => (0..n).map(|_| gauss(mu, sigma)).collect(),
        CouplingDistribution::MixedGaussian { p, k_p, k_n, sigma } => {
            let n_p = conformist_count(p, n);
            (0..n).map(|i| gauss(if i < n_p { k_p } else { k_n }, sigma)).collect()
        }
    }
}

/// Parameters of one model instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelParams<T> {
    pub n: usize,
    pub j: T,
    pub nu: T,
    pub omega: T,
    pub k: Vec<T>,
    pub distribution: CouplingDistribution<T>,
    pub seed: u64,
}

impl<T: Scalar> ModelParams<T> {
    /// Samples couplings from `distribution`, with `J = 1` and `nu = omega = 0`.
    pub fn new(distribution: CouplingDistribution<T>, n: usize, seed: u64) -> Result<Self> {
        let k = sample_couplings(&distribution, n, seed)?;
        Ok(Self { n, j: T::one(), nu: T::zero(), omega: T::zero(), k, distribution, seed })
    }

    /// Shorthand for the double-delta model `(J = 1, p, K_p, K_n)`.
    pub fn double_delta(p: T, k_p: T, k_n: T, n: usize) -> Result<Self> {
        Self::new(CouplingDistribution::DoubleDelta { p, k_p, k_n }, n, 0)
    }

    pub fn with_j(mut self, j: T) -> Self {
        self.j = j;
        self
    }

    pub fn with_frequencies(mut self, nu: T, omega: T) -> Self {
        self.nu = nu;
        self.omega = omega;
        self
    }

    /// `n_p` for the double-delta and mixed Gaussian distributions.
    pub fn conformists(&self) -> Option<usize> {
        match self.distribution {
            CouplingDistribution::DoubleDelta { p, .. } | CouplingDistribution::MixedGaussian { p, .. } => {
                Some(conformist_count(p, self.n))
            }
            CouplingDistribution::SingleGaussian { .. } => None,
        }
    }

    fn check(&self, state_n: usize) -> Result<()> {
        if self.k.len() != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: self.k.len() });
        }
        if state_n != self.n {
            return Err(Error::DimensionMismatch { expected: self.n, found: state_n });
        }
        Ok(())
    }
}

/// Instantaneous rates `(dx/dt, dtheta/dt)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rates<T> {
    pub dx: Vec<T>,
    pub dtheta: Vec<T>,
}

/// Literal O(N²) evaluation of the equations of motion.
pub fn rhs_direct<T: Scalar>(state: &SwarmState<T>, params: &ModelParams<T>) -> Result<Rates<T>> {
    params.check(state.n())?;
    let n = state.n();
    let mut dx = vec![T::zero(); n];
    let mut dtheta = vec![T::zero(); n];
    rhs_direct_into(&state.x, &state.theta, params, &mut dx, &mut dtheta);
    Ok(Rates { dx, dtheta })
}

/// Pairwise sum on raw angle slices.
pub(crate) fn rhs_direct_into<T: Scalar>(
    x: &[T],
    theta: &[T],
    params: &ModelParams<T>,
    dx: &mut [T],
    dtheta: &mut [T],
) {
    let n = x.len();
    let inv_n = T::one() / T::count(n);
    for i in 0..n {
        let (xi, ti) = (x[i], theta[i]);
        let mut sx = T::zero();
        let mut st = T::zero();
        // j == i contributes sin(0) = 0
        for j in 0..n {
            let ddx = x[j] - xi;
            let ddt = theta[j] - ti;
            sx = sx + ddx.sin() * ddt.cos();
            st = st + ddt.sin() * ddx.cos();
        }
        dx[i] = params.nu + params.j * inv_n * sx;
        dtheta[i] = params.omega + params.k[i] * inv_n * st;
    }
}

/// Rainbow mean fields `W± = (1/N) Σ exp(i(x_j ± theta_j))` as `(re, im)` pairs.
pub fn mean_fields<T: Scalar>(x: &[T], theta: &[T]) -> ((T, T), (T, T)) {
    let n = T::count(x.len());
    let (mut pr, mut pi, mut mr, mut mi) = (T::zero(), T::zero(), T::zero(), T::zero());
    for (&a, &b) in x.iter().zip(theta) {
        let (sp, cp) = (a + b).sin_cos();
        let (sm, cm) = (a - b).sin_cos();
        pr = pr + cp;
        pi = pi + sp;
        mr = mr + cm;
        mi = mi + sm;
    }
    ((pr / n, pi / n), (mr / n, mi / n))
}

/// Mean-field evaluation into caller-provided buffers; works on raw
/// (unwrapped) angles.
pub(crate) fn rhs_meanfield_into<T: Scalar>(
    x: &[T],
    theta: &[T],
    params: &ModelParams<T>,
    dx: &mut [T],
    dtheta: &mut [T],
) {
    let ((pr, pi), (mr, mi)) = mean_fields(x, theta);
    let half = T::lit(0.5);
    for i in 0..x.len() {
        let (s_xi, c_xi) = (x[i] + theta[i]).sin_cos();
        let (s_eta, c_eta) = (x[i] - theta[i]).sin_cos();
        // S sin(phi - a) = Im(W e^{-ia})
        let a = pi * c_xi - pr * s_xi;
        let b = mi * c_eta - mr * s_eta;
        dx[i] = params.nu + half * params.j * (a + b);
        dtheta[i] = params.omega + half * params.k[i] * (a - b);
    }
}

/// O(N) evaluation through the rainbow mean fields; identical to
/// [`rhs_direct`] up to rounding.
pub fn rhs_meanfield<T: Scalar>(state: &SwarmState<T>, params: &ModelParams<T>) -> Result<Rates<T>> {
    params.check(state.n())?;
    let n = state.n();
    let mut dx = vec![T::zero(); n];
    let mut dtheta = vec![T::zero(); n];
    rhs_meanfield_into(&state.x, &state.theta, params, &mut dx, &mut dtheta);
    Ok(Rates { dx, dtheta })
}

/// `xi = x + theta`, `eta = x - theta`, both wrapped to `[0, 2π)`.
pub fn to_xi_eta<T: Scalar>(state: &SwarmState<T>) -> (Vec<T>, Vec<T>) {
    state.x.iter().zip(&state.theta).map(|(&x, &t)| (wrap_angle(x + t), wrap_angle(x - t))).unzip()
}

/// Inverse of [`to_xi_eta`]: `x = (xi + eta)/2`, `theta = (xi - eta)/2`.
///
/// Halving loses a factor of 2 in the winding, so the result is one of the
/// two preimages; it agrees with the original state modulo π in both
/// coordinates, and exactly when `xi + eta` and `xi - eta` were not wrapped.
pub fn from_xi_eta<T: Scalar>(xi: &[T], eta: &[T], t: T) -> Result<SwarmState<T>> {
    let half = T::lit(0.5);
    let (x, theta) = xi.iter().zip(eta).map(|(&a, &b)| (half * (a + b), half * (a - b))).unzip();
    SwarmState::new(x, theta, t)
}
