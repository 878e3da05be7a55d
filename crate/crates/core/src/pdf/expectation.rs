//! Density of ⟨A⟩_ψ for a simple spectrum in any dimension, and the
//! quadratic root pair that converts between the expectation and
//! uncertainty coordinates of a two-level observable.

use super::{Pdf1D, PdfValue};
use crate::error::Result;
use crate::observables::Spectrum;

/// Roots (r₋, r₊) of x² = (r − λ₁)(λ₂ − r), i.e. the two expectation
/// values of a two-level observable compatible with uncertainty `x`.
/// Returns `None` when 2x exceeds λ₂ − λ₁; the boundary 2x = λ₂ − λ₁
/// yields the double root at the midpoint.
pub fn quad_roots(lam1: f64, lam2: f64, x: f64) -> Option<(f64, f64)> {
    debug_assert!(lam1 < lam2 && x >= 0.0);
    let width = lam2 - lam1;
    let disc = width * width - 4.0 * x * x;
    if disc < 0.0 {
        return None;
    }
    let half = 0.5 * disc.sqrt();
    let mid = 0.5 * (lam1 + lam2);
    Some((mid - half, mid + half))
}

/// Density of ⟨A⟩_ψ over Haar-random pure states for a simple spectrum
/// λ₁ < … < λ_d:
///
///   f(r) = (−1)^(d−1) (d−1) Σᵢ (r − λᵢ)^(d−2) H(r − λᵢ) / Πⱼ≠ᵢ (λᵢ − λⱼ),
///
/// with H(0) = 1 so the support is the closed interval [λ₁, λ_d]. The
/// result is a piecewise polynomial of degree d − 2 with breakpoints at the
/// eigenvalues; for d = 2 it is the box 1/(λ₂ − λ₁).
pub fn pdf_expectation(spec: &Spectrum) -> Result<Pdf1D> {
    spec.require_simple()?;
    let values: Vec<f64> = spec.values().to_vec();
    let d = values.len();
    let mut inv_denoms = Vec::with_capacity(d);
    for i in 0..d {
        let mut denom = 1.0;
        for j in 0..d {
            if j != i {
                denom *= values[i] - values[j];
            }
        }
        inv_denoms.push(1.0 / denom);
    }
    let sign = if (d - 1).is_multiple_of(2) { 1.0 } else { -1.0 };
    let coeff = sign * (d as f64 - 1.0);
    let (lo, hi) = (values[0], values[d - 1]);
    let vals = values.clone();

    let eval = move |r: f64| {
        if r < lo || r > hi {
            return PdfValue::Finite(0.0);
        }
        if d == 2 {
            // On the closed support the box takes its constant value;
            // the raw sum telescopes to 0 at exactly r = λ₂.
            return PdfValue::Finite(1.0 / (hi - lo));
        }
        let mut acc = 0.0;
        for (i, &lam) in vals.iter().enumerate() {
            let t = r - lam;
            if t >= 0.0 {
                acc += t.powi(d as i32 - 2) * inv_denoms[i];
            }
        }
        PdfValue::Finite((coeff * acc).max(0.0))
    };

    Ok(Pdf1D::new(eval, vec![(lo, hi)], values, Vec::new()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn quad_roots_cases() {
        assert_eq!(quad_roots(-1.0, 1.0, 0.0), Some((-1.0, 1.0)));
        assert_eq!(quad_roots(-1.0, 1.0, 1.0), Some((0.0, 0.0)));
        let (lo, hi) = quad_roots(0.0, 2.0, 0.6).unwrap();
        assert_relative_eq!(lo, 0.2, epsilon = 1e-12);
        assert_relative_eq!(hi, 1.8, epsilon = 1e-12);
        assert_relative_eq!(lo * (2.0 - lo), 0.36, epsilon = 1e-12);
        assert!(quad_roots(-1.0, 1.0, 1.0 + 1e-9).is_none());
    }

    #[test]
    fn qubit_expectation_is_a_box() {
        let pdf = pdf_expectation(&Spectrum::new(vec![0.0, 1.0]).unwrap()).unwrap();
        for r in [0.0, 0.25, 0.5, 0.999] {
            assert_relative_eq!(pdf.density(r), 1.0, epsilon = 1e-12);
        }
        assert_eq!(pdf.density(-0.1), 0.0);
        assert_eq!(pdf.density(1.1), 0.0);
    }

    #[test]
    fn qutrit_point_value() {
        let pdf = pdf_expectation(&Spectrum::new(vec![1.0, 3.0, 9.0]).unwrap()).unwrap();
        assert_relative_eq!(pdf.density(3.0), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn normalization_across_dimensions() {
        let spectra = [
            vec![0.0, 1.0],
            vec![1.0, 3.0, 9.0],
            vec![1.0, 3.0, 9.0, 27.0],
            vec![-2.0, -0.5, 0.1, 1.4, 3.3],
            vec![-3.0, -1.0, 0.0, 0.7, 2.2, 5.0],
        ];
        for values in spectra {
            let pdf = pdf_expectation(&Spectrum::new(values).unwrap()).unwrap();
            assert_relative_eq!(pdf.integral(), 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn degenerate_spectrum_is_rejected() {
        let spec = Spectrum::new(vec![1.0, 1.0, 2.0]).unwrap();
        assert!(pdf_expectation(&spec).is_err());
    }
}
