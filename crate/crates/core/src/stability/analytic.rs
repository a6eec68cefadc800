//! Closed-form spectra and stability conditions.
//!
//! All finite-N formulas evaluate the population fraction as the realized
//! `n_p / N` with `n_p = ceil(p·N)`, which is what the Jacobian of a finite
//! system actually sees.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use super::spectrum::{EigenSpectrum, SpectrumSource};
use crate::error::{Error, Result};
use crate::model::{conformist_count, CouplingDistribution};
use crate::scalar::Scalar;

/// Clustering tolerance for coincident analytic eigenvalues.
const MERGE_TOL: f64 = 1e-12;

fn csqrt<T: Scalar>(v: T) -> Complex<T> {
    Complex::new(v, T::zero()).sqrt()
}

/// Roots `½(-b ± √(b² - 8Jk·f + 4Jk))` of one population's branch, where
/// `f` is the population fraction, `k` its coupling and `b = f(J + k)`.
fn population_branch<T: Scalar>(j: T, k: T, frac: T) -> [Complex<T>; 2] {
    let half = T::lit(0.5);
    let b = frac * (j + k);
    let disc = b * b - T::lit(8.0) * j * k * frac + T::lit(4.0) * j * k;
    let r = csqrt(disc);
    let base = Complex::new(-b, T::zero());
    [(base + r) * half, (base - r) * half]
}

/// The `(p, K_p) ↔ (q, K_n)` branch of the polarized spectrum that carries
/// multiplicity `n_p - 1`.
pub fn polarized_conformist_branch<T: Scalar>(j: T, k_p: T, p: T) -> [Complex<T>; 2] {
    population_branch(j, k_p, p)
}

/// Branch carrying multiplicity `n_q - 1`.
pub fn polarized_contrarian_branch<T: Scalar>(j: T, k_n: T, p: T) -> [Complex<T>; 2] {
    population_branch(j, k_n, T::one() - p)
}

/// `±√(J(qK_p + pK_n))`, the pair that crosses zero at the saddle-node curve.
///
/// A prefactor of ½ here disagrees with the finite-difference Jacobian by
/// exactly a factor of two; the unscaled root is the verified one.
pub fn polarized_saddle_pair<T: Scalar>(j: T, k_p: T, k_n: T, p: T) -> [Complex<T>; 2] {
    let q = T::one() - p;
    let r = csqrt(j * (q * k_p + p * k_n));
    [r, -r]
}

/// Full analytic spectrum of the four-clump polarized fixed point.
///
/// Multiplicities: `0` twice, the saddle pair once each, the conformist
/// branch `n_p - 1` times each and the contrarian branch `n_q - 1` times
/// each, `2N` in total.
pub fn polarized_eigenvalues<T: Scalar>(j: T, k_p: T, k_n: T, p: T, n: usize) -> Result<EigenSpectrum<T>> {
    if n < 4 {
        return Err(Error::InvalidConfig(format!("polarized spectrum needs N >= 4, got {n}")));
    }
    let n_p = conformist_count(p, n);
    let n_q = n - n_p;
    if n_p == 0 || n_q == 0 {
        return Err(Error::DegeneratePopulation(format!(
            "p = {p} leaves only one population at N = {n}; use the sync spectrum"
        )));
    }
    let pe = T::count(n_p) / T::count(n);
    let zero = Complex::new(T::zero(), T::zero());
    let [s1, s2] = polarized_saddle_pair(j, k_p, k_n, pe);
    let [c1, c2] = polarized_conformist_branch(j, k_p, pe);
    let [d1, d2] = polarized_contrarian_branch(j, k_n, pe);
    Ok(EigenSpectrum::from_entries(
        [(zero, 2), (s1, 1), (s2, 1), (c1, n_p - 1), (c2, n_p - 1), (d1, n_q - 1), (d2, n_q - 1)],
        T::lit(MERGE_TOL),
        SpectrumSource::Analytic,
    ))
}

/// Analytic spectrum of the two-clump static sync fixed point.
///
/// `0` (×2), `-J` (×N-1), `-(K_p n_q + K_n n_p)/N` (×1), `-K_p` (×n_p-1),
/// `-K_n` (×n_q-1). With a single population the third and fifth (or
/// fourth) entries cancel and the survivor carries multiplicity N-1.
pub fn sync_eigenvalues<T: Scalar>(j: T, k_p: T, k_n: T, p: T, n: usize) -> Result<EigenSpectrum<T>> {
    if n < 2 {
        return Err(Error::InvalidConfig(format!("sync spectrum needs N >= 2, got {n}")));
    }
    let n_p = conformist_count(p, n);
    let n_q = n - n_p;
    let re = |v: T| Complex::new(v, T::zero());
    let mut pairs = vec![(re(T::zero()), 2), (re(-j), n - 1)];
    if n_q == 0 {
        pairs.push((re(-k_p), n - 1));
    } else if n_p == 0 {
        pairs.push((re(-k_n), n - 1));
    } else {
        let mixed = -(k_p * T::count(n_q) + k_n * T::count(n_p)) / T::count(n);
        pairs.extend([(re(mixed), 1), (re(-k_p), n_p - 1), (re(-k_n), n_q - 1)]);
    }
    Ok(EigenSpectrum::from_entries(pairs, T::lit(MERGE_TOL), SpectrumSource::Analytic))
}

/// One named inequality of a stability verdict.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Condition<T> {
    pub name: String,
    /// The inequality in words, e.g. `J(qK_p + pK_n) < 0`.
    pub inequality: String,
    pub satisfied: bool,
    /// Left-hand side minus right-hand side of the inequality.
    pub margin: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityVerdict<T> {
    pub stable: bool,
    pub conditions: Vec<Condition<T>>,
}

impl<T: Scalar> StabilityVerdict<T> {
    fn from_conditions(conditions: Vec<Condition<T>>) -> Self {
        Self { stable: conditions.iter().all(|c| c.satisfied), conditions }
    }

    pub fn condition(&self, name: &str) -> Option<&Condition<T>> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

/// Polarized-state stability: `J(qK_p + pK_n) < 0`, `J + K_n > 0`, `p >= 1/2`.
pub fn polarized_stability<T: Scalar>(j: T, k_p: T, k_n: T, p: T) -> StabilityVerdict<T> {
    let q = T::one() - p;
    let saddle = j * (q * k_p + p * k_n);
    let hopf = j + k_n;
    let majority = p - T::lit(0.5);
    StabilityVerdict::from_conditions(vec![
        Condition {
            name: "saddle_node".into(),
            inequality: "J(qK_p + pK_n) < 0".into(),
            satisfied: saddle < T::zero(),
            margin: saddle,
        },
        Condition { name: "hopf".into(), inequality: "J + K_n > 0".into(), satisfied: hopf > T::zero(), margin: hopf },
        Condition {
            name: "conformist_majority".into(),
            inequality: "p >= 1/2".into(),
            satisfied: majority >= T::zero(),
            margin: majority,
        },
    ])
}

/// Static-sync stability: `J > 0`, `K_p > 0` and, when contrarians are
/// present, `K_n > 0`.
pub fn sync_stability<T: Scalar>(j: T, k_p: T, k_n: T, p: T) -> StabilityVerdict<T> {
    let mut conds = vec![
        Condition { name: "position_coupling".into(), inequality: "J > 0".into(), satisfied: j > T::zero(), margin: j },
        Condition {
            name: "conformist_coupling".into(),
            inequality: "K_p > 0".into(),
            satisfied: k_p > T::zero() || p <= T::zero(),
            margin: k_p,
        },
    ];
    if p < T::one() {
        conds.push(Condition {
            name: "contrarian_coupling".into(),
            inequality: "K_n > 0".into(),
            satisfied: k_n > T::zero(),
            margin: k_n,
        });
    }
    StabilityVerdict::from_conditions(conds)
}

/// Incoherent-state threshold `<K>_c = -<J>`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AsyncThreshold<T> {
    pub mean_coupling: T,
    pub critical_mean: T,
    /// `<K> < -J`.
    pub async_stable: bool,
    /// Critical fraction `p_s = (J + K_n)/(K_n - K_p)` for two-population
    /// distributions.
    pub p_s: Option<T>,
}

pub fn async_threshold<T: Scalar>(dist: &CouplingDistribution<T>, j: T) -> Result<AsyncThreshold<T>> {
    dist.validate()?;
    let mean = dist.mean();
    let p_s = match *dist {
        CouplingDistribution::DoubleDelta { k_p, k_n, .. } | CouplingDistribution::MixedGaussian { k_p, k_n, .. } => {
            Some(critical_fraction(j, k_p, k_n)?)
        }
        CouplingDistribution::SingleGaussian { .. } => None,
    };
    Ok(AsyncThreshold { mean_coupling: mean, critical_mean: -j, async_stable: mean < -j, p_s })
}

/// `p_s = (J + K_n)/(K_n - K_p)`.
pub fn critical_fraction<T: Scalar>(j: T, k_p: T, k_n: T) -> Result<T> {
    if k_n == k_p {
        return Err(Error::UndefinedThreshold);
    }
    Ok((j + k_n) / (k_n - k_p))
}

/// Theory curves in the `(p, K_n)` plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalCurves<T> {
    /// `K_n = -(q/p) K_p`; undefined at `p = 0`.
    pub kn_saddle: Option<T>,
    /// `K_n = -J`.
    pub kn_hopf: T,
    pub p_async: Option<T>,
}

pub fn critical_curves<T: Scalar>(j: T, k_p: T, k_n: T, p: T) -> CriticalCurves<T> {
    CriticalCurves { kn_saddle: saddle_curve(k_p, p), kn_hopf: -j, p_async: critical_fraction(j, k_p, k_n).ok() }
}

/// `K_n = -(q/p) K_p`.
pub fn saddle_curve<T: Scalar>(k_p: T, p: T) -> Option<T> {
    (p > T::zero()).then(|| -((T::one() - p) / p) * k_p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn saddle_pair_is_imaginary_in_polarized_region() {
        let [a, b] = polarized_saddle_pair(1.0f64, 0.5, -0.5, 0.8);
        // J(qK_p + pK_n) = 0.1 - 0.4 = -0.3
        assert!(a.re.abs() < 1e-15 && (a.im - 0.3f64.sqrt()).abs() < 1e-15);
        assert_eq!(b, -a);
        assert!((a.im - 0.547_722_557_505_166_1).abs() < 1e-12);
    }

    #[test]
    fn spectrum_counts_sum_to_2n() {
        for n in [5, 10, 20, 33] {
            let s = polarized_eigenvalues(1.0, 0.5, -0.5, 0.8, n).unwrap();
            assert_eq!(s.total_multiplicity(), 2 * n, "N = {n}");
            let s = sync_eigenvalues(1.0, 0.5, -0.5, 0.7, n).unwrap();
            assert_eq!(s.total_multiplicity(), 2 * n);
            let s = sync_eigenvalues(1.0, 0.5, -0.5, 1.0, n).unwrap();
            assert_eq!(s.total_multiplicity(), 2 * n);
        }
    }

    #[test]
    fn degenerate_population_rejected() {
        assert!(matches!(polarized_eigenvalues(1.0, 0.5, -0.5, 1.0, 10), Err(Error::DegeneratePopulation(_))));
        assert!(matches!(polarized_eigenvalues(1.0, 0.5, -0.5, 0.0, 10), Err(Error::DegeneratePopulation(_))));
    }

    #[test]
    fn sync_spectrum_at_full_conformity() {
        let s = sync_eigenvalues(1.0, 0.5, -0.5, 1.0, 6).unwrap();
        let c = |v: f64| Complex::new(v, 0.0);
        assert_eq!(s.multiplicity_of(c(0.0), 1e-12), 2);
        assert_eq!(s.multiplicity_of(c(-1.0), 1e-12), 5);
        assert_eq!(s.multiplicity_of(c(-0.5), 1e-12), 5);
        assert_eq!(s.multiplicity_of(c(0.5), 1e-12), 0);
    }

    #[test]
    fn stability_examples() {
        let v = polarized_stability(1.0f64, 0.5, -0.5, 0.8);
        assert!(v.stable);
        assert!((v.condition("saddle_node").unwrap().margin + 0.3).abs() < 1e-12);
        assert!((v.condition("hopf").unwrap().margin - 0.5).abs() < 1e-12);
        assert!((v.condition("conformist_majority").unwrap().margin - 0.3).abs() < 1e-12);

        let hopf_edge = polarized_stability(1.0, 0.5, -1.0, 0.8);
        assert_eq!(hopf_edge.condition("hopf").unwrap().margin, 0.0);
        assert!(!hopf_edge.stable);

        assert!((saddle_curve(0.5f64, 0.8).unwrap() + 0.125).abs() < 1e-12);
        let saddle_edge = polarized_stability(1.0f64, 0.5, -0.125, 0.8);
        assert!(saddle_edge.condition("saddle_node").unwrap().margin.abs() < 1e-15);

        let broken = polarized_stability(1.0, 0.5, -1.5, 0.8);
        assert!(!broken.stable && !broken.condition("hopf").unwrap().satisfied);

        assert!(sync_stability(1.0, 0.5, -0.5, 1.0).stable);
        assert!(!sync_stability(1.0, 0.5, -0.5, 0.9).stable);
        assert!(!sync_stability(-1.0, 0.5, 0.5, 1.0).stable);
    }

    #[test]
    fn async_threshold_examples() {
        let dd = |p: f64, k_p: f64, k_n: f64| CouplingDistribution::DoubleDelta { p, k_p, k_n };
        let a = async_threshold(&dd(0.3, 0.5, -2.0), 1.0).unwrap();
        assert!((a.p_s.unwrap() - 0.4).abs() < 1e-15);
        assert!(a.async_stable);
        let b = async_threshold(&dd(0.3, 0.5, -0.8), 1.0).unwrap();
        assert!(b.p_s.unwrap() < 0.0);
        assert!(!b.async_stable);
        let p_s = critical_fraction(1.0f64, 0.5, -2.0).unwrap();
        assert!((p_s * 0.5 + (1.0 - p_s) * -2.0 + 1.0).abs() <= 1e-12);
        assert!(matches!(async_threshold(&dd(0.3, 0.5, 0.5), 1.0), Err(Error::UndefinedThreshold)));
        let g = async_threshold(&CouplingDistribution::SingleGaussian { mu: -1.5, sigma: 0.5 }, 1.0).unwrap();
        assert!(g.async_stable && g.p_s.is_none());
    }

    #[test]
    fn curve_limits() {
        assert!((saddle_curve(0.5f64, 0.5).unwrap() + 0.5).abs() < 1e-15);
        assert_eq!(saddle_curve(0.5, 1.0).unwrap(), 0.0);
        assert!(saddle_curve(0.5, 0.0).is_none());
        let c = critical_curves(1.0f64, 0.5, -2.0, 0.5);
        assert_eq!(c.kn_hopf, -1.0);
        assert!((c.p_async.unwrap() - 0.4).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn branch_swap_symmetry(
            j in 0.1..3.0f64, k_p in -3.0..3.0f64, k_n in -3.0..3.0f64, p in 0.01..0.99f64,
        ) {
            let conf = polarized_conformist_branch(j, k_p, p);
            // the same formula evaluated at (q, K_n) is the contrarian branch
            let swapped = polarized_conformist_branch(j, k_n, 1.0 - p);
            let contra = polarized_contrarian_branch(j, k_n, p);
            prop_assert_eq!(swapped, contra);
            let back = polarized_contrarian_branch(j, k_p, 1.0 - p);
            for (a, b) in conf.iter().zip(&back) {
                prop_assert!((a - b).norm() <= 1e-12 * (1.0 + a.norm()));
            }
        }
    }
}
