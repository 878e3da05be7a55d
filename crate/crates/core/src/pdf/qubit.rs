//! Densities for qubit observables: the uncertainty density of a single
//! observable, joint expectation densities of pairs and triples (with the
//! singular branches selected by the Gram-matrix rank), and the joint
//! uncertainty densities of pairs and triples.

use nalgebra::DMatrix;
use std::f64::consts::PI;
use std::sync::Arc;

use super::{
    Density2D, JointDistribution, LineSingular, LinearConstraint, OuterAxis, Pdf1D, PdfValue,
    Profile, Section, SupportRegion, SurfaceSingular,
};
use crate::error::{Error, Result};
use crate::observables::{gram, QubitObservable};

/// Density of Δ_ψA for a qubit observable with Bloch vector of length
/// a = |a| > 0:
///
///   f(x) = x / (a √(a² − x²)),   x ∈ [0, a),
///
/// divergent (integrably) as x → a; the closed-form CDF is
/// 1 − √(1 − x²/a²).
pub fn pdf_uncertainty_qubit(q: &QubitObservable) -> Result<Pdf1D> {
    q.require_nondegenerate()?;
    let a = q.bloch_norm();
    let eval = move |x: f64| {
        if x < 0.0 || x > a {
            PdfValue::Finite(0.0)
        } else if x == a {
            PdfValue::Divergent
        } else {
            PdfValue::Finite(x / (a * (a * a - x * x).sqrt()))
        }
    };
    Ok(Pdf1D::new(eval, vec![(0.0, a)], vec![0.0, a], vec![a]))
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Mahalanobis radius ω of (r, s) about (a0, b0) under the pair Gram
/// matrix; errors with `SingularGram` for collinear Bloch vectors.
pub fn omega2(a: &QubitObservable, b: &QubitObservable, r: f64, s: f64) -> Result<f64> {
    let g = gram(&[a.a, b.a]);
    let tinv = g.inverse()?;
    let v = [r - a.a0, s - b.a0];
    let mut q = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            q += v[i] * tinv[(i, j)] * v[j];
        }
    }
    Ok(q.max(0.0).sqrt())
}

/// Mahalanobis radius ω of (r, s, t) about (a0, b0, c0) under the triple
/// Gram matrix; errors with `SingularGram` unless the rank is 3.
pub fn omega3(
    a: &QubitObservable,
    b: &QubitObservable,
    c: &QubitObservable,
    r: f64,
    s: f64,
    t: f64,
) -> Result<f64> {
    let g = gram(&[a.a, b.a, c.a]);
    let tinv = g.inverse()?;
    let v = [r - a.a0, s - b.a0, t - c.a0];
    let mut q = 0.0;
    for i in 0..3 {
        for j in 0..3 {
            q += v[i] * tinv[(i, j)] * v[j];
        }
    }
    Ok(q.max(0.0).sqrt())
}

/// Shared geometry of a linearly independent qubit pair.
struct PairGeometry {
    a0: f64,
    b0: f64,
    det: f64,
    /// Inverse Gram entries (t00, t01, t11).
    t00: f64,
    t01: f64,
    t11: f64,
    norm_a: f64,
    norm_b: f64,
}

impl PairGeometry {
    fn new(a: &QubitObservable, b: &QubitObservable) -> Result<Self> {
        a.require_nondegenerate()?;
        b.require_nondegenerate()?;
        let g = gram(&[a.a, b.a]);
        let tinv = g.inverse()?;
        Ok(Self {
            a0: a.a0,
            b0: b.a0,
            det: g.det(),
            t00: tinv[(0, 0)],
            t01: tinv[(0, 1)],
            t11: tinv[(1, 1)],
            norm_a: a.bloch_norm(),
            norm_b: b.bloch_norm(),
        })
    }

    fn omega_sq(&self, p: f64, q: f64) -> f64 {
        self.t00 * p * p + 2.0 * self.t01 * p * q + self.t11 * q * q
    }
}

/// Density of (⟨A⟩, ⟨B⟩) for a linearly independent pair:
/// H(1 − ω) / (2π √(det T (1 − ω²))).
fn pair_expectation_density(a: &QubitObservable, b: &QubitObservable) -> Result<Density2D> {
    let geo = Arc::new(PairGeometry::new(a, b)?);
    let (a0, b0) = (geo.a0, geo.b0);
    let (na, nb) = (geo.norm_a, geo.norm_b);
    let det = geo.det;

    let geo_eval = geo.clone();
    let eval = move |r: f64, s: f64| {
        let w2 = geo_eval.omega_sq(r - a0, s - b0);
        if w2 > 1.0 {
            PdfValue::Finite(0.0)
        } else if w2 == 1.0 {
            PdfValue::Divergent
        } else {
            PdfValue::Finite(1.0 / (2.0 * PI * (det * (1.0 - w2)).sqrt()))
        }
    };
    let geo_c = geo.clone();
    let contains = move |r: f64, s: f64| geo_c.omega_sq(r - a0, s - b0) <= 1.0 + 1e-12;

    // Section in s at fixed r: the chord of the ellipse ω = 1, divergent at
    // both ends.
    let geo_s = geo.clone();
    let sections = move |r: f64| {
        let p = r - a0;
        let disc = geo_s.t11 - p * p / geo_s.det;
        if disc <= 0.0 {
            return Vec::new();
        }
        let half = disc.sqrt() / geo_s.t11;
        let mid = -geo_s.t01 * p / geo_s.t11;
        vec![Section {
            lo: b0 + mid - half,
            hi: b0 + mid + half,
            singular_lo: true,
            singular_hi: true,
        }]
    };

    Ok(Density2D::new(
        eval,
        contains,
        OuterAxis::First,
        (a0 - na, a0 + na),
        (true, true),
        Vec::new(),
        sections,
        ((a0 - na, a0 + na), (b0 - nb, b0 + nb)),
    ))
}

/// Joint distribution of (⟨A⟩_ψ, ⟨B⟩_ψ). Rank-2 Bloch pairs give an
/// absolutely continuous density on the ellipse ω ≤ 1; collinear pairs
/// (b = κ·a) put all mass on the line (s − b0) = κ (r − a0) with the
/// single-observable expectation density as profile.
pub fn joint_expectations_qubit2(
    a: &QubitObservable,
    b: &QubitObservable,
) -> Result<JointDistribution> {
    a.require_nondegenerate()?;
    b.require_nondegenerate()?;
    let g = gram(&[a.a, b.a]);
    if g.numerical_rank() == 2 {
        return Ok(JointDistribution::Density(pair_expectation_density(a, b)?));
    }
    let kappa = dot(a.a, b.a) / dot(a.a, a.a);
    let profile = super::pdf_expectation(&a.spectrum())?;
    Ok(JointDistribution::Line(LineSingular {
        constraints: vec![LinearConstraint {
            coeffs: vec![-kappa, 1.0],
            offsets: vec![a.a0, b.a0],
        }],
        profile: Profile::OneD(profile),
        profile_vars: vec![0],
        derived: false,
    }))
}

/// Joint density of (Δ_ψA, Δ_ψB) for a linearly independent qubit pair:
///
///   f(x, y) = 2xy Σ_{j∈±} f_{⟨A⟩,⟨B⟩}(r₊(x), s_j(y)) / √((a²−x²)(b²−y²)),
///
/// with r₊(x) = a0 + √(a²−x²), s_±(y) = b0 ± √(b²−y²). Errors with
/// `SingularGram` for collinear pairs (those reduce to a deterministic
/// curve; see [`joint_uncertainties_qubit2_dist`]).
pub fn joint_uncertainties_qubit2(
    a: &QubitObservable,
    b: &QubitObservable,
) -> Result<Density2D> {
    let geo = Arc::new(PairGeometry::new(a, b)?);
    let (na, nb) = (geo.norm_a, geo.norm_b);
    let det = geo.det;

    let geo_eval = geo.clone();
    let eval = move |x: f64, y: f64| {
        if !(0.0..=na).contains(&x) || !(0.0..=nb).contains(&y) {
            return PdfValue::Finite(0.0);
        }
        let p = (na * na - x * x).max(0.0).sqrt();
        let q = (nb * nb - y * y).max(0.0).sqrt();
        let mut sum = 0.0;
        let mut inside = false;
        let mut divergent = false;
        for sign in [1.0, -1.0] {
            let w2 = geo_eval.omega_sq(p, sign * q);
            if w2 < 1.0 {
                inside = true;
                sum += 1.0 / (2.0 * PI * (det * (1.0 - w2)).sqrt());
            } else if w2 == 1.0 {
                divergent = true;
            }
        }
        if !inside && !divergent {
            return PdfValue::Finite(0.0);
        }
        let denom_sq = (na * na - x * x) * (nb * nb - y * y);
        if divergent || denom_sq == 0.0 {
            return PdfValue::Divergent;
        }
        PdfValue::Finite(2.0 * x * y * sum / denom_sq.sqrt())
    };

    let geo_c = geo.clone();
    let contains = move |x: f64, y: f64| {
        if !(-1e-12..=na + 1e-12).contains(&x) || !(-1e-12..=nb + 1e-12).contains(&y) {
            return false;
        }
        let p = (na * na - x * x).max(0.0).sqrt();
        let q = (nb * nb - y * y).max(0.0).sqrt();
        let favorable = geo_c.t00 * p * p - 2.0 * geo_c.t01.abs() * p * q + geo_c.t11 * q * q;
        favorable <= 1.0 + 1e-12
    };

    // Sections in y at fixed x. In the q = √(b²−y²) coordinate the support
    // is the favorable-sign chord [qf_lo, qf_hi] ∩ [0, b]; the unfavorable
    // sign branch saturates ω = 1 at q*, an interior divergence where the
    // second term switches on.
    let geo_s = geo.clone();
    let sections = move |x: f64| {
        if !(0.0..=na).contains(&x) {
            return Vec::new();
        }
        let p = (na * na - x * x).max(0.0).sqrt();
        let c_abs = geo_s.t01.abs();
        let disc = geo_s.t11 - p * p / geo_s.det;
        if disc <= 0.0 {
            return Vec::new();
        }
        let sqrt_d = disc.sqrt();
        let qf_lo = (c_abs * p - sqrt_d) / geo_s.t11;
        let qf_hi = (c_abs * p + sqrt_d) / geo_s.t11;
        let q_star = (-c_abs * p + sqrt_d) / geo_s.t11;
        let lo = qf_lo.max(0.0);
        let hi = qf_hi.min(nb);
        if hi <= lo {
            return Vec::new();
        }
        // Collect q-knots: ends plus interior saturation point; each knot
        // that sits on ω = 1 or at q = 0 (y = b) is singular.
        let mut qs = vec![lo, hi];
        if q_star > lo + 1e-14 && q_star < hi - 1e-14 {
            qs.push(q_star);
        }
        qs.sort_by(|u, v| u.partial_cmp(v).unwrap());
        let is_singular_q = |q: f64| {
            let on_favorable =
                (q - qf_lo).abs() < 1e-12 * (1.0 + nb) || (q - qf_hi).abs() < 1e-12 * (1.0 + nb);
            let on_star = (q - q_star).abs() < 1e-12 * (1.0 + nb);
            let at_b_edge = q.abs() < 1e-12 * (1.0 + nb);
            on_favorable || on_star || at_b_edge
        };
        let y_of = |q: f64| (nb * nb - q * q).max(0.0).sqrt();
        let mut sections = Vec::new();
        for w in qs.windows(2) {
            let (q_a, q_b) = (w[0], w[1]);
            if q_b <= q_a {
                continue;
            }
            sections.push(Section {
                lo: y_of(q_b),
                hi: y_of(q_a),
                singular_lo: is_singular_q(q_b),
                singular_hi: is_singular_q(q_a),
            });
        }
        sections
    };

    // Outer breakpoints in x where the q-chord structure changes: the
    // saturation point entering at q* = 0 and the chord leaving the
    // physical range at qf_hi = b.
    let mut outer_bps = Vec::new();
    {
        // q* = 0  <=>  t00 p² = 1
        if geo.t00 > 0.0 {
            let p = (1.0 / geo.t00).sqrt();
            if p < na {
                outer_bps.push((na * na - p * p).sqrt());
            }
        }
        // qf_hi = b  <=>  t00 p² − 2 b |t01| p + (b² t11 − 1) = 0
        let bb = nb;
        let aq = geo.t00;
        let bq = -2.0 * bb * geo.t01.abs();
        let cq = bb * bb * geo.t11 - 1.0;
        let disc = bq * bq - 4.0 * aq * cq;
        if disc >= 0.0 {
            for sign in [-1.0, 1.0] {
                let p = (-bq + sign * disc.sqrt()) / (2.0 * aq);
                if p > 0.0 && p < na {
                    outer_bps.push((na * na - p * p).sqrt());
                }
            }
        }
    }

    Ok(Density2D::new(
        eval,
        contains,
        OuterAxis::First,
        (0.0, na),
        (false, true),
        outer_bps,
        sections,
        ((0.0, na), (0.0, nb)),
    ))
}

/// Joint distribution of (Δ_ψA, Δ_ψB) covering both ranks: rank 2 yields
/// the absolutely continuous density, a collinear pair (b = κ·a) collapses
/// onto the deterministic relation y = |κ| x with the single-observable
/// uncertainty density as profile. The collinear branch is a derived
/// reduction (flagged `derived`), not a separate closed form.
pub fn joint_uncertainties_qubit2_dist(
    a: &QubitObservable,
    b: &QubitObservable,
) -> Result<JointDistribution> {
    a.require_nondegenerate()?;
    b.require_nondegenerate()?;
    let g = gram(&[a.a, b.a]);
    if g.numerical_rank() == 2 {
        return Ok(JointDistribution::Density(joint_uncertainties_qubit2(
            a, b,
        )?));
    }
    let kappa = dot(a.a, b.a) / dot(a.a, a.a);
    Ok(JointDistribution::Line(LineSingular {
        constraints: vec![LinearConstraint {
            coeffs: vec![-kappa.abs(), 1.0],
            offsets: vec![0.0, 0.0],
        }],
        profile: Profile::OneD(pdf_uncertainty_qubit(a)?),
        profile_vars: vec![0],
        derived: true,
    }))
}

/// Joint distribution of (⟨A⟩, ⟨B⟩, ⟨C⟩), classified by the rank of the
/// Bloch Gram matrix:
///
/// * rank 3: uniform mass on the ellipsoid surface ω = 1 with weight
///   1/(4π √det T);
/// * rank 2: a plane delta on the dependent coordinate times the pair
///   density of an independent pair;
/// * rank 1: two line deltas times the single-observable expectation
///   density.
pub fn joint_expectations_qubit3(
    a: &QubitObservable,
    b: &QubitObservable,
    c: &QubitObservable,
) -> Result<JointDistribution> {
    for q in [a, b, c] {
        q.require_nondegenerate()?;
    }
    let obs = [a, b, c];
    let vectors = [a.a, b.a, c.a];
    let centers = [a.a0, b.a0, c.a0];
    let g3 = gram(&vectors);
    match g3.numerical_rank() {
        3 => Ok(JointDistribution::Surface(SurfaceSingular::new(
            centers, g3,
        )?)),
        2 => {
            // Find an independent pair, preferring (a, b).
            let (i1, i2, dep) = [(0usize, 1usize, 2usize), (0, 2, 1), (1, 2, 0)]
                .into_iter()
                .find(|&(i1, i2, _)| gram(&[vectors[i1], vectors[i2]]).numerical_rank() == 2)
                .expect("rank-2 Gram has an independent pair");
            let pair_gram = gram(&[vectors[i1], vectors[i2]]);
            let tinv = pair_gram.inverse()?;
            let rhs = [
                dot(vectors[dep], vectors[i1]),
                dot(vectors[dep], vectors[i2]),
            ];
            let kappa1 = tinv[(0, 0)] * rhs[0] + tinv[(0, 1)] * rhs[1];
            let kappa2 = tinv[(1, 0)] * rhs[0] + tinv[(1, 1)] * rhs[1];
            let mut coeffs = vec![0.0; 3];
            coeffs[dep] = 1.0;
            coeffs[i1] = -kappa1;
            coeffs[i2] = -kappa2;
            let profile = pair_expectation_density(obs[i1], obs[i2])?;
            Ok(JointDistribution::Line(LineSingular {
                constraints: vec![LinearConstraint {
                    coeffs,
                    offsets: centers.to_vec(),
                }],
                profile: Profile::TwoD(profile),
                profile_vars: vec![i1, i2],
                derived: false,
            }))
        }
        _ => {
            // All collinear with the first vector.
            let base = dot(vectors[0], vectors[0]);
            let kappa_ba = dot(vectors[1], vectors[0]) / base;
            let kappa_ca = dot(vectors[2], vectors[0]) / base;
            let profile = super::pdf_expectation(&a.spectrum())?;
            Ok(JointDistribution::Line(LineSingular {
                constraints: vec![
                    LinearConstraint {
                        coeffs: vec![-kappa_ba, 1.0, 0.0],
                        offsets: centers.to_vec(),
                    },
                    LinearConstraint {
                        coeffs: vec![-kappa_ca, 0.0, 1.0],
                        offsets: centers.to_vec(),
                    },
                ],
                profile: Profile::OneD(profile),
                profile_vars: vec![0],
                derived: false,
            }))
        }
    }
}

/// Geometry of the uncertainty-triple support surface of a rank-3 qubit
/// triple: (x, y, z) is attainable iff some sign branch of the mapped
/// expectation point satisfies ω = 1.
#[derive(Debug, Clone)]
pub struct Surface3 {
    centers: [f64; 3],
    norms: [f64; 3],
    tinv: DMatrix<f64>,
}

impl Surface3 {
    /// ω(r₊(x), s_j(y), t_k(z)) for signs j, k ∈ {−1, +1}.
    pub fn omega_branch(&self, x: f64, y: f64, z: f64, j: f64, k: f64) -> f64 {
        let [na, nb, nc] = self.norms;
        let v = [
            (na * na - x * x).max(0.0).sqrt(),
            j * (nb * nb - y * y).max(0.0).sqrt(),
            k * (nc * nc - z * z).max(0.0).sqrt(),
        ];
        let mut q = 0.0;
        for i in 0..3 {
            for l in 0..3 {
                q += v[i] * self.tinv[(i, l)] * v[l];
            }
        }
        q.max(0.0).sqrt()
    }

    /// min over the four sign branches of |ω − 1|.
    pub fn min_branch_deviation(&self, x: f64, y: f64, z: f64) -> f64 {
        let mut best = f64::INFINITY;
        for j in [1.0, -1.0] {
            for k in [1.0, -1.0] {
                best = best.min((self.omega_branch(x, y, z, j, k) - 1.0).abs());
            }
        }
        best
    }

    pub fn contains(&self, x: f64, y: f64, z: f64, tol: f64) -> bool {
        let [na, nb, nc] = self.norms;
        let in_box = (-tol..=na + tol).contains(&x)
            && (-tol..=nb + tol).contains(&y)
            && (-tol..=nc + tol).contains(&z);
        in_box && self.min_branch_deviation(x, y, z) < tol
    }

    pub fn centers(&self) -> [f64; 3] {
        self.centers
    }

    pub fn norms(&self) -> [f64; 3] {
        self.norms
    }
}

/// Per-branch surface-integration coefficient of the uncertainty-triple
/// distribution:
///
///   w(x, y, z) = 2xyz / (4π √det T √((a²−x²)(b²−y²)(c²−z²))),
///
/// the factor multiplying each contributing δ(1 − ω) branch.
#[derive(Debug, Clone)]
pub struct UncertaintySurfaceWeight {
    norms: [f64; 3],
    det: f64,
}

impl UncertaintySurfaceWeight {
    pub fn weight(&self, x: f64, y: f64, z: f64) -> f64 {
        let [na, nb, nc] = self.norms;
        let denom_sq = (na * na - x * x) * (nb * nb - y * y) * (nc * nc - z * z);
        if denom_sq <= 0.0 {
            return f64::INFINITY;
        }
        2.0 * x * y * z / (4.0 * PI * self.det.sqrt() * denom_sq.sqrt())
    }
}

/// Support surface and surface weight of (Δ_ψA, Δ_ψB, Δ_ψC) for a rank-3
/// qubit triple. Lower ranks error with `SingularGram`; use
/// [`joint_expectations_qubit3`] for the reduced components.
pub fn uncertainty_surface_qubit3(
    a: &QubitObservable,
    b: &QubitObservable,
    c: &QubitObservable,
) -> Result<(SupportRegion, UncertaintySurfaceWeight)> {
    for q in [a, b, c] {
        q.require_nondegenerate()?;
    }
    let g3 = gram(&[a.a, b.a, c.a]);
    if g3.numerical_rank() < 3 {
        return Err(Error::SingularGram {
            rank: g3.numerical_rank(),
            order: 3,
        });
    }
    let tinv = g3.inverse()?;
    let surface = Surface3 {
        centers: [a.a0, b.a0, c.a0],
        norms: [a.bloch_norm(), b.bloch_norm(), c.bloch_norm()],
        tinv,
    };
    let weight = UncertaintySurfaceWeight {
        norms: surface.norms,
        det: g3.det(),
    };
    Ok((SupportRegion::UncertaintySurface3(surface), weight))
}
