//! Joint densities of (⟨A⟩, ⟨A²⟩) and (⟨A⟩, ΔA) for qutrits and d = 4,
//! the marginal uncertainty densities they induce, and the support regions
//! of both planes for any simple spectrum.
//!
//! The (⟨A⟩, ⟨A²⟩) support is bounded below by the chord lines
//! φ_{i,j}(r) = (a_i + a_j) r − a_i a_j and above by φ_{1,d}; substituting
//! s = r² + x² maps the cells to bands between square-root arcs in the
//! (⟨A⟩, ΔA) plane.

use super::{expectation::quad_roots, Density2D, OuterAxis, Pdf1D, PdfValue, Section, SupportRegion};
use crate::error::{Error, Result};
use crate::observables::Spectrum;

fn phi(vals: &[f64], i: usize, j: usize, r: f64) -> f64 {
    (vals[i] + vals[j]) * r - vals[i] * vals[j]
}

fn half_gap(vals: &[f64], i: usize, j: usize) -> f64 {
    0.5 * (vals[j] - vals[i])
}

/// Vandermonde product Π_{i<j} (a_j − a_i).
fn vandermonde(vals: &[f64]) -> f64 {
    let mut v = 1.0;
    for i in 0..vals.len() {
        for j in (i + 1)..vals.len() {
            v *= vals[j] - vals[i];
        }
    }
    v
}

fn require_dim(spec: &Spectrum, d: usize, what: &str) -> Result<()> {
    if spec.dim() != d {
        return Err(Error::UnsupportedDimension {
            dim: spec.dim(),
            details: format!("{what} is available for d = {d} only"),
        });
    }
    spec.require_simple()
}

/// Constant density Γ(3)/V₃ of (⟨A⟩, ⟨A²⟩) on its two-cell support for a
/// simple qutrit spectrum.
pub fn joint_exp_exp2_qutrit(spec: &Spectrum) -> Result<Density2D> {
    require_dim(spec, 3, "the (⟨A⟩, ⟨A²⟩) density")?;
    let vals: Vec<f64> = spec.values().to_vec();
    let height = 2.0 / vandermonde(&vals);
    let v1 = vals.clone();
    let eval = move |r: f64, s: f64| {
        if f_region_contains_exact(&v1, r, s) {
            PdfValue::Finite(height)
        } else {
            PdfValue::Finite(0.0)
        }
    };
    let v2 = vals.clone();
    let contains = move |r: f64, s: f64| f_region_contains_exact(&v2, r, s);
    let v3 = vals.clone();
    let sections = move |r: f64| f_section(&v3, r);
    let (s_lo, s_hi) = f_s_bounds(&vals);
    Ok(Density2D::new(
        eval,
        contains,
        OuterAxis::First,
        (vals[0], vals[2]),
        (false, false),
        vec![vals[1]],
        sections,
        ((vals[0], vals[2]), (s_lo, s_hi)),
    ))
}

/// Density 2Γ(3)x/V₃ of (⟨A⟩, ΔA) on the two band cells of a simple
/// qutrit spectrum.
pub fn joint_exp_std_qutrit(spec: &Spectrum) -> Result<Density2D> {
    require_dim(spec, 3, "the (⟨A⟩, ΔA) density")?;
    let vals: Vec<f64> = spec.values().to_vec();
    let coeff = 4.0 / vandermonde(&vals);
    // Section endpoints come from the quadratic-root form while membership
    // recomputes the arcs; an edge tolerance of a few ulps keeps boundary
    // grid points inside.
    let edge = 1e-11 * spec.width();
    let v1 = vals.clone();
    let eval = move |r: f64, x: f64| {
        if x >= 0.0 && v_region_contains_impl(&v1, r, x, edge) {
            PdfValue::Finite(coeff * x)
        } else {
            PdfValue::Finite(0.0)
        }
    };
    let v2 = vals.clone();
    let contains = move |r: f64, x: f64| v_region_contains_exact(&v2, r, x);
    let v3 = vals.clone();
    let sections = move |x: f64| v_sections_as_sections(&v3, x);
    let x_max = half_gap(&vals, 0, 2);
    let bps = vec![half_gap(&vals, 0, 1), half_gap(&vals, 1, 2)];
    Ok(Density2D::new(
        eval,
        contains,
        OuterAxis::Second,
        (0.0, x_max),
        (false, false),
        bps,
        sections,
        ((vals[0], vals[2]), (0.0, x_max)),
    ))
}

/// Marginal uncertainty density of a simple qutrit spectrum:
///
///   f(x) = (4Γ(3)/V₃) x (χ ε₃₁ − χ ε₃₂ − χ ε₂₁),
///
/// where ε_{ij}(x) = √(((a_i − a_j)/2)² − x²) and each indicator cuts the
/// term off at the corresponding half gap.
pub fn pdf_uncertainty_qutrit(spec: &Spectrum) -> Result<Pdf1D> {
    require_dim(spec, 3, "the uncertainty density")?;
    let vals: Vec<f64> = spec.values().to_vec();
    let coeff = 8.0 / vandermonde(&vals);
    let terms = [
        (half_gap(&vals, 0, 2), 1.0),
        (half_gap(&vals, 1, 2), -1.0),
        (half_gap(&vals, 0, 1), -1.0),
    ];
    let x_max = half_gap(&vals, 0, 2);
    let eval = move |x: f64| {
        if !(0.0..=x_max).contains(&x) {
            return PdfValue::Finite(0.0);
        }
        let mut acc = 0.0;
        for &(hg, sign) in &terms {
            if x <= hg {
                acc += sign * (hg * hg - x * x).sqrt();
            }
        }
        PdfValue::Finite((coeff * x * acc).max(0.0))
    };
    let mut bps = vec![0.0, x_max, half_gap(&vals, 0, 1), half_gap(&vals, 1, 2)];
    bps.retain(|&b| b <= x_max);
    Ok(Pdf1D::new(eval, vec![(0.0, x_max)], bps, Vec::new()))
}

/// Piecewise-linear factor g(r, s) of the d = 4 joint density, resolved by
/// strip (between consecutive eigenvalues, the middle strip split at the
/// pivot where φ_{2,4} and φ_{1,3} cross) and band (between chord lines).
fn g4(vals: &[f64], r_star: f64, r: f64, s: f64) -> f64 {
    if r < vals[0] || r > vals[3] {
        return 0.0;
    }
    let top = phi(vals, 0, 3, r);
    let low = if r < vals[1] {
        phi(vals, 0, 1, r)
    } else if r < vals[2] {
        phi(vals, 1, 2, r)
    } else {
        phi(vals, 2, 3, r)
    };
    if s < low || s > top {
        return 0.0;
    }
    let form_a = (vals[3] - vals[2]) * (s - phi(vals, 0, 1, r));
    let form_b = (vals[3] - vals[0]) * (s - phi(vals, 1, 2, r));
    let form_c = (vals[1] - vals[0]) * (s - phi(vals, 2, 3, r));
    let form_d = (vals[1] - vals[2]) * (s - phi(vals, 0, 3, r));
    let g = if r < vals[1] {
        if s < phi(vals, 0, 2, r) {
            form_a
        } else {
            form_d
        }
    } else if r < vals[2] {
        if r < r_star {
            if s < phi(vals, 1, 3, r) {
                form_b
            } else if s < phi(vals, 0, 2, r) {
                form_a
            } else {
                form_d
            }
        } else if s < phi(vals, 0, 2, r) {
            form_b
        } else if s < phi(vals, 1, 3, r) {
            form_c
        } else {
            form_d
        }
    } else if s < phi(vals, 1, 3, r) {
        form_c
    } else {
        form_d
    };
    g.max(0.0)
}

fn d4_pivot(vals: &[f64]) -> f64 {
    (vals[1] * vals[3] - vals[0] * vals[2]) / (vals[1] + vals[3] - vals[0] - vals[2])
}

/// Density Γ(4)/V₄ · g(r, s) of (⟨A⟩, ⟨A²⟩) for a simple d = 4 spectrum.
pub fn joint_exp_exp2_d4(spec: &Spectrum) -> Result<Density2D> {
    require_dim(spec, 4, "the (⟨A⟩, ⟨A²⟩) density")?;
    let vals: Vec<f64> = spec.values().to_vec();
    let scale = 6.0 / vandermonde(&vals);
    let r_star = d4_pivot(&vals);
    let v1 = vals.clone();
    let eval = move |r: f64, s: f64| PdfValue::Finite(scale * g4(&v1, r_star, r, s));
    let v2 = vals.clone();
    let contains = move |r: f64, s: f64| f_region_contains_exact(&v2, r, s);
    // Split the s-section at every chord line so each band integrates as a
    // smooth (linear) piece.
    let v3 = vals.clone();
    let sections = move |r: f64| {
        let mut knots = Vec::with_capacity(6);
        for i in 0..4 {
            for j in (i + 1)..4 {
                knots.push(phi(&v3, i, j, r));
            }
        }
        split_sections(f_section(&v3, r), &knots)
    };
    let (s_lo, s_hi) = f_s_bounds(&vals);
    Ok(Density2D::new(
        eval,
        contains,
        OuterAxis::First,
        (vals[0], vals[3]),
        (false, false),
        vec![vals[1], r_star, vals[2]],
        sections,
        ((vals[0], vals[3]), (s_lo, s_hi)),
    ))
}

/// Density 2Γ(4)/V₄ · x · g(r, x² + r²) of (⟨A⟩, ΔA) for a simple d = 4
/// spectrum.
pub fn joint_exp_std_d4(spec: &Spectrum) -> Result<Density2D> {
    require_dim(spec, 4, "the (⟨A⟩, ΔA) density")?;
    let vals: Vec<f64> = spec.values().to_vec();
    let scale = 12.0 / vandermonde(&vals);
    let r_star = d4_pivot(&vals);
    let v1 = vals.clone();
    // g vanishes continuously on both envelopes, so no edge tolerance is
    // needed here.
    let eval = move |r: f64, x: f64| {
        if x < 0.0 {
            return PdfValue::Finite(0.0);
        }
        PdfValue::Finite(scale * x * g4(&v1, r_star, r, x * x + r * r))
    };
    let v2 = vals.clone();
    let contains = move |r: f64, x: f64| v_region_contains_exact(&v2, r, x);
    // The band assignment of g changes where x² + r² crosses a chord line
    // φ_{i,j}, i.e. on the arcs x = √((a_j − r)(r − a_i)); split the
    // r-sections there (plus the pivot) so every piece is smooth.
    let v3 = vals.clone();
    let sections = move |x: f64| {
        let mut knots = vec![r_star];
        for i in 0..4 {
            for j in (i + 1)..4 {
                if let Some((k1, k2)) = quad_roots(v3[i], v3[j], x) {
                    knots.push(k1);
                    knots.push(k2);
                }
            }
        }
        split_sections(v_sections_as_sections(&v3, x), &knots)
    };
    let x_max = half_gap(&vals, 0, 3);
    let mut bps = Vec::new();
    for i in 0..4 {
        for j in (i + 1)..4 {
            bps.push(half_gap(&vals, i, j));
        }
    }
    Ok(Density2D::new(
        eval,
        contains,
        OuterAxis::Second,
        (0.0, x_max),
        (false, false),
        bps,
        sections,
        ((vals[0], vals[3]), (0.0, x_max)),
    ))
}

/// Marginal uncertainty density for a simple d = 4 spectrum:
///
///   f(x) = (16/V₄) x [ (a₄−a₃) χ ε³₁₂ + (a₄−a₁) χ ε³₂₃ − (a₄−a₂) χ ε³₁₃
///                    + (a₂−a₁) χ ε³₃₄ − (a₃−a₁) χ ε³₂₄ + (a₃−a₂) χ ε³₁₄ ],
///
/// each term cut off at its half gap (a_j − a_i)/2.
pub fn pdf_uncertainty_d4(spec: &Spectrum) -> Result<Pdf1D> {
    require_dim(spec, 4, "the uncertainty density")?;
    let vals: Vec<f64> = spec.values().to_vec();
    let coeff = 16.0 / vandermonde(&vals);
    let terms = [
        (0usize, 1usize, vals[3] - vals[2]),
        (1, 2, vals[3] - vals[0]),
        (0, 2, -(vals[3] - vals[1])),
        (2, 3, vals[1] - vals[0]),
        (1, 3, -(vals[2] - vals[0])),
        (0, 3, vals[2] - vals[1]),
    ];
    let cut: Vec<(f64, f64)> = terms
        .iter()
        .map(|&(i, j, c)| (half_gap(&vals, i, j), c))
        .collect();
    let x_max = half_gap(&vals, 0, 3);
    let eval = move |x: f64| {
        if !(0.0..=x_max).contains(&x) {
            return PdfValue::Finite(0.0);
        }
        let mut acc = 0.0;
        for &(hg, c) in &cut {
            if x <= hg {
                acc += c * (hg * hg - x * x).powf(1.5);
            }
        }
        PdfValue::Finite((coeff * x * acc).max(0.0))
    };
    let mut bps = vec![0.0];
    for i in 0..4 {
        for j in (i + 1)..4 {
            bps.push(half_gap(&vals, i, j));
        }
    }
    Ok(Pdf1D::new(eval, vec![(0.0, x_max)], bps, Vec::new()))
}

/// Exact membership (no tolerance) in the (⟨A⟩, ⟨A²⟩) support.
fn f_region_contains_exact(vals: &[f64], r: f64, s: f64) -> bool {
    f_region_contains_impl(vals, r, s, 0.0)
}

fn f_region_contains_impl(vals: &[f64], r: f64, s: f64, tol: f64) -> bool {
    let d = vals.len();
    for k in 0..d - 1 {
        if r >= vals[k] - tol
            && r <= vals[k + 1] + tol
            && s >= phi(vals, k, k + 1, r) - tol
            && s <= phi(vals, 0, d - 1, r) + tol
        {
            return true;
        }
    }
    false
}

/// Exact membership in the (⟨A⟩, ΔA) support.
fn v_region_contains_exact(vals: &[f64], r: f64, x: f64) -> bool {
    v_region_contains_impl(vals, r, x, 0.0)
}

fn v_region_contains_impl(vals: &[f64], r: f64, x: f64, tol: f64) -> bool {
    if x < -tol {
        return false;
    }
    let d = vals.len();
    let outer = ((vals[d - 1] - r) * (r - vals[0])).max(0.0).sqrt();
    for k in 0..d - 1 {
        if r >= vals[k] - tol && r <= vals[k + 1] + tol {
            let lower = ((vals[k + 1] - r) * (r - vals[k])).max(0.0).sqrt();
            if x >= lower - tol && x <= outer + tol {
                return true;
            }
        }
    }
    false
}

pub(crate) fn f_region_contains(spec: &Spectrum, r: f64, s: f64, tol: f64) -> bool {
    f_region_contains_impl(spec.values(), r, s, tol)
}

pub(crate) fn v_region_contains(spec: &Spectrum, r: f64, x: f64, tol: f64) -> bool {
    v_region_contains_impl(spec.values(), r, x, tol)
}

/// Vertical section of the (⟨A⟩, ⟨A²⟩) support at fixed r.
fn f_section(vals: &[f64], r: f64) -> Vec<Section> {
    let d = vals.len();
    if r < vals[0] || r > vals[d - 1] {
        return Vec::new();
    }
    let k = (0..d - 1)
        .find(|&k| r <= vals[k + 1])
        .unwrap_or(d - 2);
    let lo = phi(vals, k, k + 1, r);
    let hi = phi(vals, 0, d - 1, r);
    if hi <= lo {
        return Vec::new();
    }
    vec![Section {
        lo,
        hi,
        singular_lo: false,
        singular_hi: false,
    }]
}

/// s-range of the (⟨A⟩, ⟨A²⟩) support (attained at eigenvalue vertices).
fn f_s_bounds(vals: &[f64]) -> (f64, f64) {
    let lo = vals.iter().map(|v| v * v).fold(f64::INFINITY, f64::min);
    let hi = vals.iter().map(|v| v * v).fold(f64::NEG_INFINITY, f64::max);
    (lo, hi)
}

/// Horizontal sections of the (⟨A⟩, ΔA) support at fixed x: the outer-arc
/// chord minus the open intervals where a lower arc still exceeds x.
pub(crate) fn v_sections_r(vals: &[f64], x: f64) -> Vec<(f64, f64)> {
    let d = vals.len();
    let Some((r_lo, r_hi)) = quad_roots(vals[0], vals[d - 1], x) else {
        return Vec::new();
    };
    let mut cuts: Vec<(f64, f64)> = Vec::new();
    for k in 0..d - 1 {
        if let Some((c1, c2)) = quad_roots(vals[k], vals[k + 1], x) {
            if c2 > c1 {
                cuts.push((c1, c2));
            }
        }
    }
    cuts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let mut segments = Vec::new();
    let mut cursor = r_lo;
    for (c1, c2) in cuts {
        let c1 = c1.max(cursor);
        let c2 = c2.min(r_hi);
        if c2 <= c1 {
            continue;
        }
        if c1 > cursor {
            segments.push((cursor, c1));
        }
        cursor = c2;
    }
    if r_hi > cursor {
        segments.push((cursor, r_hi));
    }
    segments
}

fn v_sections_as_sections(vals: &[f64], x: f64) -> Vec<Section> {
    v_sections_r(vals, x)
        .into_iter()
        .map(|(lo, hi)| Section {
            lo,
            hi,
            singular_lo: false,
            singular_hi: false,
        })
        .collect()
}

/// Splits each section at the interior knots so piecewise-smooth
/// integrands are integrated piece by piece.
fn split_sections(sections: Vec<Section>, knots: &[f64]) -> Vec<Section> {
    let mut out = Vec::new();
    for sec in sections {
        let mut pts: Vec<f64> = knots
            .iter()
            .copied()
            .filter(|&k| k > sec.lo && k < sec.hi)
            .collect();
        pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        pts.dedup();
        let mut edges = Vec::with_capacity(pts.len() + 2);
        edges.push(sec.lo);
        edges.extend(pts);
        edges.push(sec.hi);
        let last = edges.len() - 2;
        for (i, w) in edges.windows(2).enumerate() {
            out.push(Section {
                lo: w[0],
                hi: w[1],
                singular_lo: sec.singular_lo && i == 0,
                singular_hi: sec.singular_hi && i == last,
            });
        }
    }
    out
}

fn arc_polyline(
    r_lo: f64,
    r_hi: f64,
    n: usize,
    f: impl Fn(f64) -> f64,
) -> Vec<(f64, f64)> {
    (0..=n)
        .map(|i| {
            let r = r_lo + (r_hi - r_lo) * i as f64 / n as f64;
            (r, f(r))
        })
        .collect()
}

pub(crate) fn v_region_boundary(spec: &Spectrum, n: usize) -> Vec<Vec<(f64, f64)>> {
    let vals = spec.values();
    let d = vals.len();
    let mut out = Vec::new();
    out.push(arc_polyline(vals[0], vals[d - 1], n, |r| {
        ((vals[d - 1] - r) * (r - vals[0])).max(0.0).sqrt()
    }));
    for k in 0..d - 1 {
        let (a, b) = (vals[k], vals[k + 1]);
        out.push(arc_polyline(a, b, n, move |r| {
            ((b - r) * (r - a)).max(0.0).sqrt()
        }));
    }
    out
}

pub(crate) fn f_region_boundary(spec: &Spectrum, n: usize) -> Vec<Vec<(f64, f64)>> {
    let vals: Vec<f64> = spec.values().to_vec();
    let d = vals.len();
    let mut out = Vec::new();
    let v = vals.clone();
    out.push(arc_polyline(vals[0], vals[d - 1], n, move |r| {
        phi(&v, 0, d - 1, r)
    }));
    for k in 0..d - 1 {
        let v = vals.clone();
        out.push(arc_polyline(vals[k], vals[k + 1], n, move |r| {
            phi(&v, k, k + 1, r)
        }));
    }
    out
}

/// The supports of the (⟨A⟩, ⟨A²⟩) and (⟨A⟩, ΔA) densities for any simple
/// spectrum (d ≥ 2), as membership predicates with boundary polylines.
pub fn support_regions(spec: &Spectrum) -> Result<(SupportRegion, SupportRegion)> {
    spec.require_simple()?;
    Ok((
        SupportRegion::ExpectationSecondMoment {
            spectrum: spec.clone(),
        },
        SupportRegion::ExpectationStdDev {
            spectrum: spec.clone(),
        },
    ))
}
