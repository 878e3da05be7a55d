//! Observable representations and state-level statistics.
//!
//! An observable enters the library in one of three forms: a dense Hermitian
//! matrix, a bare spectrum (sorted eigenvalues, enough for every
//! single-observable density), or the qubit form `A = a0*I + a·σ`. This
//! module also carries pure states, expectation/standard-deviation
//! evaluation, the extremal variance, and Gram matrices of Bloch vectors
//! together with their numerical rank classification.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative tolerance for the Hermiticity check (against max |entry|).
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Tolerance on |‖ψ‖² − 1| when constructing a pure state.
pub const NORM_TOL: f64 = 1e-12;
/// Largest imaginary residue tolerated (and discarded) in ⟨ψ|A|ψ⟩.
pub const IMAG_RESIDUE_TOL: f64 = 1e-10;
/// Round-off below zero tolerated when clamping a variance to 0.
pub const NEG_VARIANCE_CLAMP: f64 = -1e-12;
/// Default relative gap tolerance: consecutive eigenvalues closer than
/// `DEFAULT_GAP_TOL_REL * (λ_d − λ_1)` make the spectrum degenerate.
pub const DEFAULT_GAP_TOL_REL: f64 = 1e-9;
/// Default relative eigenvalue threshold for the numerical rank of a Gram
/// matrix (against its largest eigenvalue).
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// A Hermitian matrix acting on ℂ^d.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianObservable {
    dim: usize,
    entries: DMatrix<Complex64>,
}

impl HermitianObservable {
    /// Validates that `entries` is square and equals its conjugate transpose
    /// within [`HERMITICITY_TOL`] relative to the largest entry magnitude.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        let (n, m) = entries.shape();
        if n != m || n == 0 {
            return Err(Error::InvalidObservable(format!(
                "expected a square nonempty matrix, got {n}x{m}"
            )));
        }
        let scale = entries
            .iter()
            .map(|z| z.norm())
            .fold(0.0_f64, f64::max)
            .max(1.0);
        let mut asymmetry = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                let d = (entries[(i, j)] - entries[(j, i)].conj()).norm();
                asymmetry = asymmetry.max(d);
            }
        }
        if asymmetry > HERMITICITY_TOL * scale {
            return Err(Error::NotHermitian {
                asymmetry,
                tol: HERMITICITY_TOL,
            });
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidObservable("non-finite entry".into()));
        }
        Ok(Self { dim: n, entries })
    }

    /// Diagonal observable carrying exactly the given spectrum.
    pub fn from_spectrum(spec: &Spectrum) -> Self {
        let d = spec.dim();
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        for (i, &v) in spec.values().iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        Self {
            dim: d,
            entries: m,
        }
    }

    /// Real symmetric input convenience.
    pub fn from_real(entries: DMatrix<f64>) -> Result<Self> {
        Self::new(entries.map(|x| Complex64::new(x, 0.0)))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    /// A + c·I.
    pub fn shifted(&self, c: f64) -> Self {
        let mut m = self.entries.clone();
        for i in 0..self.dim {
            m[(i, i)] += Complex64::new(c, 0.0);
        }
        Self {
            dim: self.dim,
            entries: m,
        }
    }

    /// κ·A.
    pub fn scaled(&self, kappa: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.map(|z| z * kappa),
        }
    }
}

/// Sorted eigenvalues λ₁ ≤ … ≤ λ_d of a qudit observable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    values: Vec<f64>,
}

impl Spectrum {
    /// Sorts the input ascending. Rejects empty or non-finite input.
    pub fn new(mut values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidObservable("empty spectrum".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidObservable("non-finite eigenvalue".into()));
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self { values })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// λ_d − λ₁.
    pub fn width(&self) -> f64 {
        self.values[self.values.len() - 1] - self.values[0]
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Smallest consecutive gap; 0 for d = 1.
    pub fn min_gap(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
            .min(f64::INFINITY)
    }

    /// All consecutive gaps strictly exceed `gap_tol`.
    pub fn is_simple_with(&self, gap_tol: f64) -> bool {
        if self.dim() < 2 {
            return true;
        }
        self.values.windows(2).all(|w| w[1] - w[0] > gap_tol)
    }

    /// Simplicity under the default relative gap tolerance.
    pub fn is_simple(&self) -> bool {
        self.is_simple_with(DEFAULT_GAP_TOL_REL * self.width())
    }

    /// Errors with `DegenerateSpectrum` when any gap closes under the
    /// default tolerance. Every closed-form density requires this.
    pub fn require_simple(&self) -> Result<()> {
        if self.dim() < 2 {
            return Err(Error::DimTooSmall {
                min: 2,
                got: self.dim(),
            });
        }
        if !self.is_simple() {
            return Err(Error::DegenerateSpectrum(format!(
                "min gap {:.3e} of spectrum {:?}",
                self.min_gap(),
                self.values
            )));
        }
        Ok(())
    }
}

/// Qubit observable in the form `A = a0 * I + a·σ` with Bloch vector `a`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitObservable {
    pub a0: f64,
    pub a: [f64; 3],
}

impl QubitObservable {
    pub fn new(a0: f64, a: [f64; 3]) -> Result<Self> {
        if !a0.is_finite() || a.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidObservable(
                "non-finite qubit parameter".into(),
            ));
        }
        Ok(Self { a0, a })
    }

    /// |a|, half the spectral width.
    pub fn bloch_norm(&self) -> f64 {
        (self.a[0] * self.a[0] + self.a[1] * self.a[1] + self.a[2] * self.a[2]).sqrt()
    }

    /// Densities need |a| > 0; |a| = 0 means the variance vanishes
    /// identically and there is nothing to distribute.
    pub fn require_nondegenerate(&self) -> Result<()> {
        if self.bloch_norm() <= 0.0 {
            return Err(Error::DegenerateSpectrum(
                "qubit observable with |a| = 0".into(),
            ));
        }
        Ok(())
    }

    /// Eigenvalues a0 ∓ |a|.
    pub fn spectrum(&self) -> Spectrum {
        let a = self.bloch_norm();
        Spectrum::new(vec![self.a0 - a, self.a0 + a]).expect("finite by construction")
    }

    /// Dense 2x2 matrix a0*I + a1*σ1 + a2*σ2 + a3*σ3.
    pub fn matrix(&self) -> HermitianObservable {
        let (a0, [a1, a2, a3]) = (self.a0, self.a);
        let m = DMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(a0 + a3, 0.0),
                Complex64::new(a1, -a2),
                Complex64::new(a1, a2),
                Complex64::new(a0 - a3, 0.0),
            ],
        );
        HermitianObservable::new(m).expect("Hermitian by construction")
    }

    /// ⟨A⟩ for the pure state with Bloch vector `u`.
    pub fn expectation_from_bloch(&self, u: [f64; 3]) -> f64 {
        self.a0 + self.a[0] * u[0] + self.a[1] * u[1] + self.a[2] * u[2]
    }

    /// Δ_ψA = sqrt(|a|² − ⟨u,a⟩²) for the pure state with Bloch vector `u`.
    pub fn std_dev_from_bloch(&self, u: [f64; 3]) -> f64 {
        let dot = self.a[0] * u[0] + self.a[1] * u[1] + self.a[2] * u[2];
        let v = self.bloch_norm().powi(2) - dot * dot;
        v.max(0.0).sqrt()
    }

    /// Recovers (a0, a) from a 2x2 Hermitian matrix.
    pub fn try_from_matrix(obs: &HermitianObservable) -> Result<Self> {
        if obs.dim() != 2 {
            return Err(Error::NonQubit(obs.dim()));
        }
        let m = obs.matrix();
        let a0 = 0.5 * (m[(0, 0)].re + m[(1, 1)].re);
        let a1 = m[(0, 1)].re;
        let a2 = -m[(0, 1)].im;
        let a3 = 0.5 * (m[(0, 0)].re - m[(1, 1)].re);
        Self::new(a0, [a1, a2, a3])
    }

    pub fn sigma_x() -> Self {
        Self {
            a0: 0.0,
            a: [1.0, 0.0, 0.0],
        }
    }

    pub fn sigma_y() -> Self {
        Self {
            a0: 0.0,
            a: [0.0, 1.0, 0.0],
        }
    }

    pub fn sigma_z() -> Self {
        Self {
            a0: 0.0,
            a: [0.0, 0.0, 1.0],
        }
    }
}

/// A normalized vector in ℂ^d.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: DVector<Complex64>,
}

impl PureState {
    /// Requires ‖ψ‖² = 1 within [`NORM_TOL`].
    pub fn new(amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidObservable("empty state vector".into()));
        }
        let norm_sq: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum();
        if (norm_sq - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidObservable(format!(
                "state norm² = {norm_sq} is not 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes an arbitrary nonzero vector.
    pub fn from_unnormalized(amplitudes: DVector<Complex64>) -> Result<Self> {
        let norm: f64 = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 0.0 || !norm.is_finite() {
            return Err(Error::InvalidObservable("zero or non-finite vector".into()));
        }
        Ok(Self {
            amplitudes: amplitudes.map(|z| z / norm),
        })
    }

    pub fn from_reals(values: &[f64]) -> Result<Self> {
        Self::from_unnormalized(DVector::from_iterator(
            values.len(),
            values.iter().map(|&v| Complex64::new(v, 0.0)),
        ))
    }

    /// Qubit state with the given Bloch vector (must be unit length).
    pub fn qubit_from_bloch(u: [f64; 3]) -> Result<Self> {
        let norm = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
        if (norm - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidObservable(format!(
                "Bloch vector norm {norm} is not 1"
            )));
        }
        let theta = (u[2] / norm).clamp(-1.0, 1.0).acos();
        let phi = u[1].atan2(u[0]);
        let amplitudes = DVector::from_vec(vec![
            Complex64::new((theta / 2.0).cos(), 0.0),
            Complex64::from_polar((theta / 2.0).sin(), phi),
        ]);
        Self::from_unnormalized(amplitudes)
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    /// Bloch vector (⟨σ1⟩, ⟨σ2⟩, ⟨σ3⟩) of a qubit state.
    pub fn bloch_vector(&self) -> Result<[f64; 3]> {
        if self.dim() != 2 {
            return Err(Error::NonQubit(self.dim()));
        }
        let (c0, c1) = (self.amplitudes[0], self.amplitudes[1]);
        let cross = c0.conj() * c1;
        Ok([
            2.0 * cross.re,
            2.0 * cross.im,
            c0.norm_sqr() - c1.norm_sqr(),
        ])
    }
}

/// Gram matrix T of 2 or 3 Bloch vectors, with determinant and
/// numerical rank attached.
#[derive(Debug, Clone, PartialEq)]
pub struct GramMatrix {
    order: usize,
    entries: DMatrix<f64>,
    det: f64,
    eigenvalues: Vec<f64>,
    numerical_rank: usize,
}

impl GramMatrix {
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn det(&self) -> f64 {
        self.det
    }

    /// Eigenvalues in descending order.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Rank under the default relative threshold.
    pub fn numerical_rank(&self) -> usize {
        self.numerical_rank
    }

    /// T⁻¹; errors with `SingularGram` when the numerical rank is deficient.
    pub fn inverse(&self) -> Result<DMatrix<f64>> {
        if self.numerical_rank < self.order {
            return Err(Error::SingularGram {
                rank: self.numerical_rank,
                order: self.order,
            });
        }
        self.entries
            .clone()
            .try_inverse()
            .ok_or(Error::SingularGram {
                rank: self.numerical_rank,
                order: self.order,
            })
    }

    /// Symmetric inverse square root T^(-1/2).
    pub fn inverse_sqrt(&self) -> Result<DMatrix<f64>> {
        if self.numerical_rank < self.order {
            return Err(Error::SingularGram {
                rank: self.numerical_rank,
                order: self.order,
            });
        }
        let sym = nalgebra::linalg::SymmetricEigen::new(self.entries.clone());
        let n = self.order;
        let mut out = DMatrix::<f64>::zeros(n, n);
        for k in 0..n {
            let col = sym.eigenvectors.column(k);
            let w = 1.0 / sym.eigenvalues[k].sqrt();
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += w * col[i] * col[j];
                }
            }
        }
        Ok(out)
    }
}

/// Sorted eigenvalues of a Hermitian observable; `gap_tol` is the absolute
/// gap below which the result should be treated as degenerate (query with
/// [`Spectrum::is_simple_with`]).
pub fn spectrum_of(obs: &HermitianObservable, _gap_tol: f64) -> Spectrum {
    let eig = nalgebra::linalg::SymmetricEigen::new(obs.matrix().clone());
    Spectrum::new(eig.eigenvalues.iter().copied().collect())
        .expect("eigenvalues of a finite Hermitian matrix are finite")
}

/// ⟨ψ|A|ψ⟩. The imaginary residue (≤ [`IMAG_RESIDUE_TOL`] up to rounding) is
/// discarded.
pub fn expectation(obs: &HermitianObservable, psi: &PureState) -> Result<f64> {
    if obs.dim() != psi.dim() {
        return Err(Error::DimMismatch {
            expected: obs.dim(),
            got: psi.dim(),
        });
    }
    let a_psi = obs.matrix() * psi.amplitudes();
    let val: Complex64 = psi
        .amplitudes()
        .iter()
        .zip(a_psi.iter())
        .map(|(c, d)| c.conj() * d)
        .sum();
    debug_assert!(val.im.abs() <= IMAG_RESIDUE_TOL * (1.0 + val.re.abs()));
    Ok(val.re)
}

/// Δ_ψA = sqrt(⟨A²⟩ − ⟨A⟩²); tiny negative round-off is clamped to 0.
///
/// ⟨A²⟩ is computed as ‖Aψ‖², so the variance is nonnegative up to rounding.
pub fn std_dev(obs: &HermitianObservable, psi: &PureState) -> Result<f64> {
    if obs.dim() != psi.dim() {
        return Err(Error::DimMismatch {
            expected: obs.dim(),
            got: psi.dim(),
        });
    }
    let a_psi = obs.matrix() * psi.amplitudes();
    let mean: f64 = psi
        .amplitudes()
        .iter()
        .zip(a_psi.iter())
        .map(|(c, d)| (c.conj() * d).re)
        .sum();
    let second: f64 = a_psi.iter().map(|z| z.norm_sqr()).sum();
    let var = second - mean * mean;
    debug_assert!(var >= NEG_VARIANCE_CLAMP * (1.0 + second.abs()));
    Ok(var.max(0.0).sqrt())
}

/// Largest variance attainable over all states: ¼(λ_d − λ₁)².
pub fn max_variance(spec: &Spectrum) -> Result<f64> {
    if spec.dim() < 2 {
        return Err(Error::DimTooSmall {
            min: 2,
            got: spec.dim(),
        });
    }
    Ok(0.25 * spec.width() * spec.width())
}

/// The maximum of [`max_variance`] together with a state attaining it:
/// the equal superposition of the extreme eigenvectors.
pub fn max_variance_witness(obs: &HermitianObservable) -> Result<(f64, PureState)> {
    if obs.dim() < 2 {
        return Err(Error::DimTooSmall {
            min: 2,
            got: obs.dim(),
        });
    }
    let eig = nalgebra::linalg::SymmetricEigen::new(obs.matrix().clone());
    let mut idx: Vec<usize> = (0..obs.dim()).collect();
    idx.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());
    let (lo, hi) = (idx[0], idx[obs.dim() - 1]);
    let v = (eig.eigenvectors.column(lo) + eig.eigenvectors.column(hi)).unscale(2.0_f64.sqrt());
    let spec = Spectrum::new(eig.eigenvalues.iter().copied().collect())?;
    Ok((max_variance(&spec)?, PureState::new(v)?))
}

/// Gram matrix of 2 or 3 real 3-vectors, with the default rank threshold
/// applied.
pub fn gram(vectors: &[[f64; 3]]) -> GramMatrix {
    assert!(
        (2..=3).contains(&vectors.len()),
        "gram matrices of order 2 or 3 only"
    );
    let n = vectors.len();
    let mut entries = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            entries[(i, j)] = vectors[i][0] * vectors[j][0]
                + vectors[i][1] * vectors[j][1]
                + vectors[i][2] * vectors[j][2];
        }
    }
    let det = entries.determinant();
    let sym = nalgebra::linalg::SymmetricEigen::new(entries.clone());
    let mut eigenvalues: Vec<f64> = sym.eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut g = GramMatrix {
        order: n,
        entries,
        det,
        eigenvalues,
        numerical_rank: 0,
    };
    g.numerical_rank = rank_classify(&g, DEFAULT_RANK_TOL);
    g
}

/// Number of Gram eigenvalues above `rank_tol` times the largest one.
/// Selects the absolutely-continuous vs singular branch of the joint
/// distributions.
pub fn rank_classify(g: &GramMatrix, rank_tol: f64) -> usize {
    let largest = g.eigenvalues.first().copied().unwrap_or(0.0).max(0.0);
    if largest <= 0.0 {
        return 0;
    }
    g.eigenvalues
        .iter()
        .filter(|&&ev| ev > rank_tol * largest)
        .count()
}

/// JSON form of an observable, as consumed by the command-line tool:
/// `{"spectrum": [...]}`, `{"qubit": {"a0": r, "a": [r, r, r]}}` or
/// `{"matrix": {"re": [[...]], "im": [[...]]}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableJson {
    Spectrum(Vec<f64>),
    Qubit { a0: f64, a: [f64; 3] },
    Matrix { re: Vec<Vec<f64>>, im: Vec<Vec<f64>> },
}

impl ObservableJson {
    pub fn parse(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidObservable(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("plain data serializes")
    }

    /// Dense Hermitian form.
    pub fn to_observable(&self) -> Result<HermitianObservable> {
        match self {
            ObservableJson::Spectrum(values) => {
                Ok(HermitianObservable::from_spectrum(&Spectrum::new(
                    values.clone(),
                )?))
            }
            ObservableJson::Qubit { a0, a } => Ok(QubitObservable::new(*a0, *a)?.matrix()),
            ObservableJson::Matrix { re, im } => {
                let n = re.len();
                if n == 0 || im.len() != n || re.iter().chain(im).any(|row| row.len() != n) {
                    return Err(Error::InvalidObservable(
                        "matrix rows must form a square d x d layout in both re and im".into(),
                    ));
                }
                let mut m = DMatrix::<Complex64>::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        m[(i, j)] = Complex64::new(re[i][j], im[i][j]);
                    }
                }
                HermitianObservable::new(m)
            }
        }
    }

    /// Qubit form, when the input is one.
    pub fn to_qubit(&self) -> Result<QubitObservable> {
        match self {
            ObservableJson::Qubit { a0, a } => QubitObservable::new(*a0, *a),
            other => QubitObservable::try_from_matrix(&other.to_observable()?),
        }
    }
}
