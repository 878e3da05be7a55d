//! Uncertainty-region membership predicates and the minimization problems
//! whose optima are state-independent uncertainty bounds.
//!
//! For qubit pairs the pure-state and mixed-state regions coincide, so the
//! Bloch-sphere search in [`minimize`] is a true global minimum. For
//! triples and higher dimensions only the pure-state region is searched;
//! those results are upper bounds for the mixed-state problem and are
//! labeled accordingly.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::haar::PreparedObservable;
use crate::observables::{gram, HermitianObservable, PureState, QubitObservable, Spectrum};
use crate::pdf::SupportRegion;
use crate::simplex::nelder_mead;

/// Default additive tolerance on membership slack.
pub const MEMBERSHIP_TOL: f64 = 1e-9;
/// Fibonacci-lattice size of the deterministic coarse stage.
pub const LATTICE_POINTS: usize = 4096;
/// Objective tolerance of the simplex refinement.
pub const REFINE_TOL: f64 = 1e-10;

/// What to minimize over the uncertainty tuple.
#[derive(Debug, Clone, PartialEq)]
pub enum Objective {
    /// Σ (ΔA_k)²
    SumOfVariances,
    /// Σ ΔA_k
    SumOfStdDevs,
    /// Σ w_k (ΔA_k)^p with p ∈ {1, 2} and w_k > 0.
    Weighted { weights: Vec<f64>, exponent: u8 },
}

impl Objective {
    fn validate(&self, n_obs: usize) -> Result<()> {
        if let Objective::Weighted { weights, exponent } = self {
            if weights.len() != n_obs {
                return Err(Error::DimMismatch {
                    expected: n_obs,
                    got: weights.len(),
                });
            }
            if weights.iter().any(|&w| !w.is_finite() || w <= 0.0) {
                return Err(Error::InvalidObservable("weights must be > 0".into()));
            }
            if !matches!(exponent, 1 | 2) {
                return Err(Error::InvalidObservable("exponent must be 1 or 2".into()));
            }
        }
        Ok(())
    }

    /// Objective value at an uncertainty tuple.
    pub fn eval(&self, uncertainties: &[f64]) -> f64 {
        match self {
            Objective::SumOfVariances => uncertainties.iter().map(|u| u * u).sum(),
            Objective::SumOfStdDevs => uncertainties.iter().sum(),
            Objective::Weighted { weights, exponent } => uncertainties
                .iter()
                .zip(weights)
                .map(|(u, w)| {
                    if *exponent == 2 {
                        w * u * u
                    } else {
                        w * u
                    }
                })
                .sum(),
        }
    }
}

/// Outcome of a region minimization.
#[derive(Debug, Clone)]
pub struct OptimResult {
    pub minimum: f64,
    pub argmin_uncertainties: Vec<f64>,
    pub witness_state: PureState,
    pub iterations: usize,
    pub converged: bool,
}

/// Per-observable interval [0, v(A_k)] with v = (λ_max − λ_min)/2; the
/// uncertainty region is contained in the product of these intervals.
pub fn supercube_bound(spectra: &[Spectrum]) -> Vec<(f64, f64)> {
    spectra.iter().map(|s| (0.0, 0.5 * s.width())).collect()
}

fn dot3(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Membership of (x, y) in the qubit-pair uncertainty region:
///
///   |b|² x² + |a|² y² + 2 |⟨a,b⟩| √((|a|²−x²)(|b|²−y²)) ≥ |a|²|b|² + ⟨a,b⟩²
///
/// within additive slack `tol`, inside the box [0,|a|] × [0,|b|].
pub fn qubit_pair_contains(
    a: &QubitObservable,
    b: &QubitObservable,
    x: f64,
    y: f64,
    tol: f64,
) -> Result<bool> {
    a.require_nondegenerate()?;
    b.require_nondegenerate()?;
    Ok(pair_slack(a, b, x, y, tol).is_some_and(|slack| slack >= -tol))
}

/// Signed inequality slack (lhs − rhs), or None when outside the box.
pub fn pair_slack(
    a: &QubitObservable,
    b: &QubitObservable,
    x: f64,
    y: f64,
    box_tol: f64,
) -> Option<f64> {
    let na = a.bloch_norm();
    let nb = b.bloch_norm();
    if !(-box_tol..=na + box_tol).contains(&x) || !(-box_tol..=nb + box_tol).contains(&y) {
        return None;
    }
    let xc = x.clamp(0.0, na);
    let yc = y.clamp(0.0, nb);
    let g = dot3(a.a, b.a);
    let lhs = nb * nb * xc * xc
        + na * na * yc * yc
        + 2.0 * g.abs() * ((na * na - xc * xc) * (nb * nb - yc * yc)).sqrt();
    let rhs = na * na * nb * nb + g * g;
    Some(lhs - rhs)
}

/// Membership of (x, y, z) in the qubit-triple uncertainty region. Rank-3
/// triples live on the surface where some sign branch reaches ω = 1;
/// lower ranks reduce to the pair region and a deterministic coordinate.
pub fn qubit_triple_contains(
    a: &QubitObservable,
    b: &QubitObservable,
    c: &QubitObservable,
    x: f64,
    y: f64,
    z: f64,
    tol: f64,
) -> bool {
    let obs = [a, b, c];
    let coords = [x, y, z];
    // A zero Bloch vector forces that uncertainty to 0 and drops out.
    if let Some(i) = (0..3).find(|&i| obs[i].bloch_norm() == 0.0) {
        if coords[i].abs() > tol {
            return false;
        }
        let rest: Vec<usize> = (0..3).filter(|&j| j != i).collect();
        return qubit_pair_contains(
            obs[rest[0]],
            obs[rest[1]],
            coords[rest[0]],
            coords[rest[1]],
            tol,
        )
        .unwrap_or(false);
    }
    let vectors = [a.a, b.a, c.a];
    let g3 = gram(&vectors);
    match g3.numerical_rank() {
        3 => {
            let Ok((region, _)) = crate::pdf::uncertainty_surface_qubit3(a, b, c) else {
                return false;
            };
            region.contains(&coords, tol)
        }
        2 => {
            let Some((i1, i2, dep)) = [(0usize, 1usize, 2usize), (0, 2, 1), (1, 2, 0)]
                .into_iter()
                .find(|&(i1, i2, _)| gram(&[vectors[i1], vectors[i2]]).numerical_rank() == 2)
            else {
                return false;
            };
            let pair_gram = gram(&[vectors[i1], vectors[i2]]);
            let Ok(tinv) = pair_gram.inverse() else {
                return false;
            };
            let rhs = [
                dot3(vectors[dep], vectors[i1]),
                dot3(vectors[dep], vectors[i2]),
            ];
            let kappa = [
                tinv[(0, 0)] * rhs[0] + tinv[(0, 1)] * rhs[1],
                tinv[(1, 0)] * rhs[0] + tinv[(1, 1)] * rhs[1],
            ];
            let norms = [
                obs[i1].bloch_norm(),
                obs[i2].bloch_norm(),
                obs[dep].bloch_norm(),
            ];
            let (x1, x2, xd) = (coords[i1], coords[i2], coords[dep]);
            if !(-tol..=norms[0] + tol).contains(&x1)
                || !(-tol..=norms[1] + tol).contains(&x2)
                || !(-tol..=norms[2] + tol).contains(&xd)
            {
                return false;
            }
            let alpha1_abs = (norms[0] * norms[0] - x1 * x1).max(0.0).sqrt();
            let alpha2_abs = (norms[1] * norms[1] - x2 * x2).max(0.0).sqrt();
            let scale = norms.iter().fold(1.0_f64, |m, n| m.max(n * n));
            for s1 in [1.0, -1.0] {
                for s2 in [1.0, -1.0] {
                    let a1 = s1 * alpha1_abs;
                    let a2 = s2 * alpha2_abs;
                    let omega_sq = tinv[(0, 0)] * a1 * a1
                        + 2.0 * tinv[(0, 1)] * a1 * a2
                        + tinv[(1, 1)] * a2 * a2;
                    if omega_sq > 1.0 + tol {
                        continue;
                    }
                    let ad = kappa[0] * a1 + kappa[1] * a2;
                    let expected_sq = norms[2] * norms[2] - ad * ad;
                    if (xd * xd - expected_sq).abs() <= tol * scale.max(1.0) {
                        return true;
                    }
                }
            }
            false
        }
        _ => {
            let base = dot3(vectors[0], vectors[0]);
            let kb = (dot3(vectors[1], vectors[0]) / base).abs();
            let kc = (dot3(vectors[2], vectors[0]) / base).abs();
            let na = a.bloch_norm();
            (0.0 - tol..=na + tol).contains(&x)
                && (y - kb * x).abs() <= tol * (1.0 + kb)
                && (z - kc * x).abs() <= tol * (1.0 + kc)
        }
    }
}

/// Uncertainty tuple of the qubit observables at Bloch vector `u`.
fn uncertainties_at(observables: &[QubitObservable], u: [f64; 3]) -> Vec<f64> {
    observables.iter().map(|q| q.std_dev_from_bloch(u)).collect()
}

fn fibonacci_sphere(n: usize) -> impl Iterator<Item = [f64; 3]> {
    let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
    (0..n).map(move |k| {
        let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
        let radius = (1.0 - z * z).max(0.0).sqrt();
        let azimuth = 2.0 * std::f64::consts::PI * (k as f64 / golden).fract();
        [radius * azimuth.cos(), radius * azimuth.sin(), z]
    })
}

fn orthonormal_tangent(u: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let pick = if u[0].abs() < 0.9 {
        [1.0, 0.0, 0.0]
    } else {
        [0.0, 1.0, 0.0]
    };
    let mut e1 = [
        pick[1] * u[2] - pick[2] * u[1],
        pick[2] * u[0] - pick[0] * u[2],
        pick[0] * u[1] - pick[1] * u[0],
    ];
    let n1 = dot3(e1, e1).sqrt();
    for v in &mut e1 {
        *v /= n1;
    }
    let e2 = [
        u[1] * e1[2] - u[2] * e1[1],
        u[2] * e1[0] - u[0] * e1[2],
        u[0] * e1[1] - u[1] * e1[0],
    ];
    (e1, e2)
}

/// Global minimum of `objective` over the qubit uncertainty region,
/// searched on the Bloch sphere: a deterministic Fibonacci lattice
/// followed by tangent-plane simplex refinement from the best lattice
/// points. Ties resolve to the earliest lattice index.
pub fn minimize(objective: &Objective, observables: &[QubitObservable]) -> Result<OptimResult> {
    if observables.is_empty() {
        return Err(Error::InvalidObservable("no observables given".into()));
    }
    objective.validate(observables.len())?;
    for q in observables {
        q.require_nondegenerate()?;
    }

    let value_at = |u: [f64; 3]| objective.eval(&uncertainties_at(observables, u));

    // Coarse deterministic stage.
    let mut ranked: Vec<(f64, [f64; 3])> = fibonacci_sphere(LATTICE_POINTS)
        .map(|u| (value_at(u), u))
        .collect();
    ranked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // Refine from the few best lattice points over the local tangent plane.
    let mut best_u = ranked[0].1;
    let mut best_value = ranked[0].0;
    let mut iterations = LATTICE_POINTS;
    let mut converged = false;
    for &(_, u0) in ranked.iter().take(5) {
        let (e1, e2) = orthonormal_tangent(u0);
        let embed = |v: &[f64]| {
            let raw = [
                u0[0] + v[0] * e1[0] + v[1] * e2[0],
                u0[1] + v[0] * e1[1] + v[1] * e2[1],
                u0[2] + v[0] * e1[2] + v[1] * e2[2],
            ];
            let n = dot3(raw, raw).sqrt();
            [raw[0] / n, raw[1] / n, raw[2] / n]
        };
        let out = nelder_mead(|v| value_at(embed(v)), &[0.0, 0.0], 0.1, REFINE_TOL, 400);
        iterations += out.iterations;
        let u = embed(&out.x);
        let value = value_at(u);
        if value < best_value {
            best_value = value;
            best_u = u;
        }
        converged |= out.converged;
    }

    let argmin = uncertainties_at(observables, best_u);
    Ok(OptimResult {
        minimum: objective.eval(&argmin),
        argmin_uncertainties: argmin,
        witness_state: PureState::qubit_from_bloch(best_u)?,
        iterations,
        converged,
    })
}

/// Heuristic pure-state minimization for arbitrary dimension: Haar-seeded
/// restarts refined by simplex descent over the real embedding of the
/// state vector. The result upper-bounds the true minimum; `converged`
/// reports agreement of the two best restarts within 1e-6.
pub fn minimize_heuristic(
    objective: &Objective,
    observables: &[HermitianObservable],
    restarts: usize,
    seed: u64,
) -> Result<OptimResult> {
    if observables.is_empty() {
        return Err(Error::InvalidObservable("no observables given".into()));
    }
    objective.validate(observables.len())?;
    let dim = observables[0].dim();
    for obs in observables {
        if obs.dim() != dim {
            return Err(Error::DimMismatch {
                expected: dim,
                got: obs.dim(),
            });
        }
    }
    let prepared: Vec<PreparedObservable> =
        observables.iter().map(PreparedObservable::new).collect();

    let state_of = |v: &[f64]| -> Option<PureState> {
        let norm_sq: f64 = v.iter().map(|x| x * x).sum();
        if norm_sq < 1e-12 {
            return None;
        }
        let amps = DVector::from_iterator(
            dim,
            (0..dim).map(|k| Complex64::new(v[2 * k], v[2 * k + 1])),
        );
        PureState::from_unnormalized(amps).ok()
    };
    let value_of = |v: &[f64]| -> f64 {
        match state_of(v) {
            None => 1e30,
            Some(psi) => {
                let uncs: Vec<f64> = prepared
                    .iter()
                    .map(|p| p.statistic(&psi, crate::haar::Statistic::StdDev))
                    .collect();
                objective.eval(&uncs)
            }
        }
    };

    let restarts = restarts.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut outcomes: Vec<(f64, Vec<f64>)> = Vec::with_capacity(restarts);
    let mut iterations = 0;
    for _ in 0..restarts {
        let start: Vec<f64> = (0..2 * dim)
            .map(|_| rng.sample::<f64, _>(StandardNormal))
            .collect();
        let out = nelder_mead(value_of, &start, 0.3, REFINE_TOL, 400 * dim.max(2));
        iterations += out.iterations;
        outcomes.push((out.value, out.x));
    }
    outcomes.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let converged = outcomes.len() >= 2 && (outcomes[1].0 - outcomes[0].0).abs() <= 1e-6;

    let witness = state_of(&outcomes[0].1)
        .ok_or_else(|| Error::InvalidObservable("optimizer returned a null state".into()))?;
    let argmin: Vec<f64> = prepared
        .iter()
        .map(|p| p.statistic(&witness, crate::haar::Statistic::StdDev))
        .collect();
    Ok(OptimResult {
        minimum: objective.eval(&argmin),
        argmin_uncertainties: argmin,
        witness_state: witness,
        iterations,
        converged,
    })
}

/// Pure-state uncertainty-region membership for an observable tuple given
/// by spectra only (used by supercube containment checks).
pub fn inside_supercube(bounds: &[(f64, f64)], point: &[f64], tol: f64) -> bool {
    bounds
        .iter()
        .zip(point)
        .all(|(&(lo, hi), &x)| x >= lo - tol && x <= hi + tol)
}

/// Region wrapper for figure bundles: the (⟨A⟩, ΔA) support of a spectrum.
pub fn expectation_std_region(spec: &Spectrum) -> Result<SupportRegion> {
    Ok(crate::pdf::support_regions(spec)?.1)
}
