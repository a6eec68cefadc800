use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SpectrumSource {
    Analytic,
    Numeric,
}

/// Eigenvalues with multiplicities.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenSpectrum<T> {
    pub entries: Vec<(Complex<T>, usize)>,
    pub source: SpectrumSource,
}

impl<T: Scalar> EigenSpectrum<T> {
    /// Groups `values` into clusters whose members lie within `tol` of the
    /// cluster's first value, then sorts by real part and imaginary part.
    pub fn from_values(values: &[Complex<T>], tol: T, source: SpectrumSource) -> Self {
        let mut entries: Vec<(Complex<T>, usize)> = Vec::new();
        for &v in values {
            match entries.iter_mut().find(|(c, _)| (*c - v).norm() <= tol) {
                Some((_, m)) => *m += 1,
                None => entries.push((v, 1)),
            }
        }
        let mut s = Self { entries, source };
        s.sort();
        s
    }

    /// Builds a spectrum from `(value, multiplicity)` pairs, dropping zero
    /// multiplicities and merging coincident values.
    pub fn from_entries(pairs: impl IntoIterator<Item = (Complex<T>, usize)>, tol: T, source: SpectrumSource) -> Self {
        let mut entries: Vec<(Complex<T>, usize)> = Vec::new();
        for (v, m) in pairs {
            if m == 0 {
                continue;
            }
            match entries.iter_mut().find(|(c, _)| (*c - v).norm() <= tol) {
                Some((_, acc)) => *acc += m,
                None => entries.push((v, m)),
            }
        }
        let mut s = Self { entries, source };
        s.sort();
        s
    }

    fn sort(&mut self) {
        self.entries.sort_by(|(a, _), (b, _)| {
            a.re.partial_cmp(&b.re)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.im.partial_cmp(&b.im).unwrap_or(std::cmp::Ordering::Equal))
        });
    }

    pub fn total_multiplicity(&self) -> usize {
        self.entries.iter().map(|(_, m)| m).sum()
    }

    /// Every eigenvalue repeated according to its multiplicity.
    pub fn expanded(&self) -> Vec<Complex<T>> {
        self.entries.iter().flat_map(|&(v, m)| std::iter::repeat_n(v, m)).collect()
    }

    /// Multiplicity of the cluster containing `value`, or 0.
    pub fn multiplicity_of(&self, value: Complex<T>, tol: T) -> usize {
        self.entries.iter().filter(|(v, _)| (*v - value).norm() <= tol).map(|(_, m)| m).sum()
    }

    /// Largest real part among eigenvalues farther than `tol` from zero.
    pub fn max_nonzero_real(&self, tol: T) -> Option<T> {
        self.entries
            .iter()
            .filter(|(v, _)| v.norm() > tol)
            .map(|(v, _)| v.re)
            .fold(None, |acc, r| Some(acc.map_or(r, |a: T| a.max(r))))
    }
}

/// Distance between two spectra compared as multisets.
///
/// Each eigenvalue of `a` (with multiplicity) is matched to the nearest
/// still-unmatched eigenvalue of `b`; the result is the worst matched
/// distance. `None` when the total multiplicities differ.
pub fn max_mismatch<T: Scalar>(a: &EigenSpectrum<T>, b: &EigenSpectrum<T>) -> Option<T> {
    let xs = a.expanded();
    let mut ys = b.expanded();
    if xs.len() != ys.len() {
        return None;
    }
    let mut worst = T::zero();
    for x in xs {
        let (idx, d) = ys
            .iter()
            .enumerate()
            .map(|(i, y)| (i, (*y - x).norm()))
            .fold((usize::MAX, T::infinity()), |best, cur| if cur.1 < best.1 { cur } else { best });
        ys.swap_remove(idx);
        worst = worst.max(d);
    }
    Some(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn clustering_counts_multiplicity() {
        let v = [c(0.0, 1.0), c(1e-9, 1.0), c(-1.0, 0.0), c(0.0, -1.0), c(0.0, 1.0 + 5e-8)];
        let s = EigenSpectrum::from_values(&v, 1e-7, SpectrumSource::Numeric);
        assert_eq!(s.total_multiplicity(), 5);
        assert_eq!(s.entries.len(), 3);
        assert_eq!(s.multiplicity_of(c(0.0, 1.0), 1e-6), 3);
        assert_eq!(s.entries[0].0, c(-1.0, 0.0));
    }

    #[test]
    fn mismatch_as_multisets() {
        let a = EigenSpectrum::from_entries([(c(0.0, 0.0), 2), (c(-1.0, 0.0), 1)], 1e-9, SpectrumSource::Analytic);
        let b = EigenSpectrum::from_values(&[c(-1.0, 1e-8), c(1e-9, 0.0), c(0.0, 0.0)], 1e-7, SpectrumSource::Numeric);
        assert!(max_mismatch(&a, &b).unwrap() < 2e-8);
        let short = EigenSpectrum::from_values(&[c(0.0, 0.0)], 1e-7, SpectrumSource::Numeric);
        assert!(max_mismatch(&a, &short).is_none());
        let off = EigenSpectrum::from_values(&[c(0.0, 0.0), c(0.0, 0.0), c(-0.5, 0.0)], 1e-7, SpectrumSource::Numeric);
        assert!((max_mismatch(&a, &off).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_multiplicity_dropped() {
        let s = EigenSpectrum::from_entries([(c(1.0, 0.0), 0), (c(2.0, 0.0), 3)], 1e-9, SpectrumSource::Analytic);
        assert_eq!(s.entries, vec![(c(2.0, 0.0), 3)]);
        assert_eq!(s.max_nonzero_real(1e-9), Some(2.0));
    }
}
