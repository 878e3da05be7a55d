//! Closed-form probability densities of observable statistics over
//! Haar-random pure states: expectation-value densities for any dimension,
//! uncertainty densities for d = 2, 3, 4, joint densities for pairs and
//! triples of qubit observables (including the singular branches), and the
//! support regions in the (⟨A⟩, ⟨A²⟩) and (⟨A⟩, ΔA) planes.

mod expectation;
mod qubit;
mod qudit;

pub use expectation::{pdf_expectation, quad_roots};
pub use qubit::{
    joint_expectations_qubit2, joint_expectations_qubit3, joint_uncertainties_qubit2,
    joint_uncertainties_qubit2_dist, omega2, omega3, uncertainty_surface_qubit3,
    pdf_uncertainty_qubit, UncertaintySurfaceWeight,
};
pub use qudit::{
    joint_exp_exp2_d4, joint_exp_exp2_qutrit, joint_exp_std_d4, joint_exp_std_qutrit,
    pdf_uncertainty_d4, pdf_uncertainty_qutrit, support_regions,
};

use nalgebra::DMatrix;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::observables::GramMatrix;
use crate::quad::{self, PANEL_TOL};

/// A density value; `Divergent` marks points where the density has an
/// integrable divergence (for example the upper support endpoint of a qubit
/// uncertainty density).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PdfValue {
    Finite(f64),
    Divergent,
}

impl PdfValue {
    pub fn to_f64(self) -> f64 {
        match self {
            PdfValue::Finite(v) => v,
            PdfValue::Divergent => f64::INFINITY,
        }
    }

    pub fn is_divergent(self) -> bool {
        matches!(self, PdfValue::Divergent)
    }
}

type Eval1D = Arc<dyn Fn(f64) -> PdfValue + Send + Sync>;

/// A one-dimensional density with closed support, piecewise breakpoints and
/// explicitly flagged singular points. Evaluation is pure and thread-safe.
#[derive(Clone)]
pub struct Pdf1D {
    eval: Eval1D,
    support: Vec<(f64, f64)>,
    breakpoints: Vec<f64>,
    singular: Vec<f64>,
}

impl std::fmt::Debug for Pdf1D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Pdf1D")
            .field("support", &self.support)
            .field("breakpoints", &self.breakpoints)
            .field("singular", &self.singular)
            .finish()
    }
}

impl Pdf1D {
    pub fn new(
        eval: impl Fn(f64) -> PdfValue + Send + Sync + 'static,
        support: Vec<(f64, f64)>,
        mut breakpoints: Vec<f64>,
        singular: Vec<f64>,
    ) -> Self {
        breakpoints.sort_by(|a, b| a.partial_cmp(b).unwrap());
        breakpoints.dedup();
        Self {
            eval: Arc::new(eval),
            support,
            breakpoints,
            singular,
        }
    }

    pub fn eval(&self, r: f64) -> PdfValue {
        (self.eval)(r)
    }

    /// Like [`Self::eval`] but mapping `Divergent` to `+inf`.
    pub fn density(&self, r: f64) -> f64 {
        self.eval(r).to_f64()
    }

    pub fn support(&self) -> &[(f64, f64)] {
        &self.support
    }

    pub fn support_lo(&self) -> f64 {
        self.support[0].0
    }

    pub fn support_hi(&self) -> f64 {
        self.support[self.support.len() - 1].1
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn singular_points(&self) -> &[f64] {
        &self.singular
    }

    fn is_singular_at(&self, x: f64) -> bool {
        let scale = (self.support_hi() - self.support_lo()).abs().max(1.0);
        self.singular.iter().any(|&s| (s - x).abs() <= 1e-12 * scale)
    }

    /// ∫ f over one segment, substituting away flagged singular endpoints.
    fn integrate_segment(&self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return 0.0;
        }
        let f = |x: f64| self.density(x);
        let sing_lo = self.is_singular_at(lo);
        let sing_hi = self.is_singular_at(hi);
        if sing_lo || sing_hi {
            quad::integrate_singular(f, lo, hi, sing_lo, sing_hi, PANEL_TOL)
        } else {
            quad::integrate(f, lo, hi, PANEL_TOL)
        }
    }

    /// ∫ f over the whole support, split at breakpoints.
    pub fn integral(&self) -> f64 {
        let mut total = 0.0;
        for &(lo, hi) in &self.support {
            let mut knots = vec![lo];
            for &b in &self.breakpoints {
                if b > lo && b < hi {
                    knots.push(b);
                }
            }
            knots.push(hi);
            for w in knots.windows(2) {
                total += self.integrate_segment(w[0], w[1]);
            }
        }
        total
    }

    /// CDF at a single point.
    pub fn cdf(&self, x: f64) -> f64 {
        let mut total = 0.0;
        for &(lo, hi) in &self.support {
            if x <= lo {
                break;
            }
            let top = x.min(hi);
            let mut knots = vec![lo];
            for &b in &self.breakpoints {
                if b > lo && b < top {
                    knots.push(b);
                }
            }
            knots.push(top);
            for w in knots.windows(2) {
                total += self.integrate_segment(w[0], w[1]);
            }
        }
        total
    }

    /// CDF evaluated at an ascending slice of points by incremental
    /// quadrature, one short panel per gap (exact one-sample KS wants the
    /// analytic CDF at every sorted sample, unbinned).
    pub fn cdf_at_sorted(&self, xs: &[f64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(xs.len());
        if xs.is_empty() {
            return out;
        }
        let width = (self.support_hi() - self.support_lo()).max(1e-300);
        let mut knots: Vec<f64> = Vec::new();
        for &(lo, hi) in &self.support {
            knots.push(lo);
            for &b in &self.breakpoints {
                if b > lo && b < hi {
                    knots.push(b);
                }
            }
            knots.push(hi);
        }
        knots.sort_by(|a, b| a.partial_cmp(b).unwrap());
        knots.dedup();

        let mut acc = self.cdf(xs[0]);
        out.push(acc);
        let mut prev = xs[0];
        for &x in &xs[1..] {
            debug_assert!(x >= prev);
            // Split the gap at interior knots so every panel stays inside
            // one smooth piece.
            let mut a = prev;
            for &k in &knots {
                if k > a && k < x {
                    acc += self.panel(a, k, width);
                    a = k;
                }
            }
            acc += self.panel(a, x, width);
            out.push(acc.min(1.0 + 1e-9));
            prev = x;
        }
        out
    }

    fn panel(&self, a: f64, b: f64, width: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        if self.is_singular_at(a) || self.is_singular_at(b) {
            self.integrate_segment(a, b)
        } else if b - a > width / 64.0 {
            quad::integrate(|x| self.density(x), a, b, PANEL_TOL)
        } else {
            quad::gauss8(|x| self.density(x), a, b)
        }
    }

    /// Density of κ·X when this is the density of X (κ > 0): support and
    /// breakpoints stretch by κ, values scale by 1/κ.
    pub fn scaled(&self, kappa: f64) -> Pdf1D {
        assert!(kappa > 0.0);
        let inner = self.eval.clone();
        Pdf1D {
            eval: Arc::new(move |x: f64| match inner(x / kappa) {
                PdfValue::Finite(v) => PdfValue::Finite(v / kappa),
                PdfValue::Divergent => PdfValue::Divergent,
            }),
            support: self
                .support
                .iter()
                .map(|&(a, b)| (a * kappa, b * kappa))
                .collect(),
            breakpoints: self.breakpoints.iter().map(|&b| b * kappa).collect(),
            singular: self.singular.iter().map(|&s| s * kappa).collect(),
        }
    }

    /// Density of X + c.
    pub fn shifted(&self, c: f64) -> Pdf1D {
        let inner = self.eval.clone();
        Pdf1D {
            eval: Arc::new(move |x: f64| inner(x - c)),
            support: self
                .support
                .iter()
                .map(|&(a, b)| (a + c, b + c))
                .collect(),
            breakpoints: self.breakpoints.iter().map(|&b| b + c).collect(),
            singular: self.singular.iter().map(|&s| s + c).collect(),
        }
    }
}

/// One interval of a 1D section through a 2D support, with singular-end
/// flags for the integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Section {
    pub lo: f64,
    pub hi: f64,
    pub singular_lo: bool,
    pub singular_hi: bool,
}

/// Which plane coordinate the iterated integration runs over last.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterAxis {
    First,
    Second,
}

type Eval2D = Arc<dyn Fn(f64, f64) -> PdfValue + Send + Sync>;
type Contains2D = Arc<dyn Fn(f64, f64) -> bool + Send + Sync>;
type Sections = Arc<dyn Fn(f64) -> Vec<Section> + Send + Sync>;

/// A two-dimensional density with a support predicate and enough structure
/// (outer range, per-outer-value sections of the inner coordinate) for
/// singularity-aware iterated integration.
#[derive(Clone)]
pub struct Density2D {
    eval: Eval2D,
    contains: Contains2D,
    outer_axis: OuterAxis,
    outer: (f64, f64),
    outer_singular: (bool, bool),
    outer_breakpoints: Vec<f64>,
    sections: Sections,
    bounds: ((f64, f64), (f64, f64)),
}

impl std::fmt::Debug for Density2D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Density2D")
            .field("outer_axis", &self.outer_axis)
            .field("outer", &self.outer)
            .field("bounds", &self.bounds)
            .finish()
    }
}

#[allow(clippy::too_many_arguments)]
impl Density2D {
    pub fn new(
        eval: impl Fn(f64, f64) -> PdfValue + Send + Sync + 'static,
        contains: impl Fn(f64, f64) -> bool + Send + Sync + 'static,
        outer_axis: OuterAxis,
        outer: (f64, f64),
        outer_singular: (bool, bool),
        mut outer_breakpoints: Vec<f64>,
        sections: impl Fn(f64) -> Vec<Section> + Send + Sync + 'static,
        bounds: ((f64, f64), (f64, f64)),
    ) -> Self {
        outer_breakpoints.sort_by(|a, b| a.partial_cmp(b).unwrap());
        outer_breakpoints.dedup();
        outer_breakpoints.retain(|&b| b > outer.0 && b < outer.1);
        Self {
            eval: Arc::new(eval),
            contains: Arc::new(contains),
            outer_axis,
            outer,
            outer_singular,
            outer_breakpoints,
            sections: Arc::new(sections),
            bounds,
        }
    }

    /// Density at a point of the plane, in the plane's named coordinate
    /// order (first, second).
    pub fn eval(&self, u: f64, v: f64) -> PdfValue {
        (self.eval)(u, v)
    }

    pub fn density(&self, u: f64, v: f64) -> f64 {
        self.eval(u, v).to_f64()
    }

    /// Support membership (boundary included).
    pub fn contains(&self, u: f64, v: f64) -> bool {
        (self.contains)(u, v)
    }

    /// Bounding box ((first_lo, first_hi), (second_lo, second_hi)).
    pub fn bounds(&self) -> ((f64, f64), (f64, f64)) {
        self.bounds
    }

    fn density_ordered(&self, outer: f64, inner: f64) -> f64 {
        match self.outer_axis {
            OuterAxis::First => self.density(outer, inner),
            OuterAxis::Second => self.density(inner, outer),
        }
    }

    /// Marginal density onto the outer axis: the inner coordinate
    /// integrated out along the section structure at `outer_value`.
    pub fn marginal_onto_outer(&self, outer_value: f64) -> f64 {
        let mut total = 0.0;
        for sec in (self.sections)(outer_value) {
            if sec.hi <= sec.lo {
                continue;
            }
            let f = |inner: f64| self.density_ordered(outer_value, inner);
            total += quad::integrate_singular(
                f,
                sec.lo,
                sec.hi,
                sec.singular_lo,
                sec.singular_hi,
                PANEL_TOL,
            );
        }
        total
    }

    pub fn outer_axis(&self) -> OuterAxis {
        self.outer_axis
    }

    pub fn outer_range(&self) -> (f64, f64) {
        self.outer
    }

    /// ∫∫ f over the support via iterated singularity-aware quadrature.
    pub fn integral(&self) -> f64 {
        let mut knots = vec![self.outer.0];
        knots.extend(self.outer_breakpoints.iter().copied());
        knots.push(self.outer.1);
        let mut total = 0.0;
        for w in knots.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            if hi <= lo {
                continue;
            }
            let sing_lo = self.outer_singular.0 && lo == self.outer.0;
            let sing_hi = self.outer_singular.1 && hi == self.outer.1;
            total += quad::integrate_singular(
                |o| self.marginal_onto_outer(o),
                lo,
                hi,
                sing_lo,
                sing_hi,
                1e-8,
            );
        }
        total
    }

    /// Support-doubled impostor (both coordinates stretched by `kappa`);
    /// used as a negative control in the verification harness.
    pub fn scaled(&self, kappa: f64) -> Density2D {
        assert!(kappa > 0.0);
        let eval = self.eval.clone();
        let contains = self.contains.clone();
        let sections = self.sections.clone();
        let k2 = kappa * kappa;
        Density2D {
            eval: Arc::new(move |u, v| match eval(u / kappa, v / kappa) {
                PdfValue::Finite(f) => PdfValue::Finite(f / k2),
                PdfValue::Divergent => PdfValue::Divergent,
            }),
            contains: Arc::new(move |u, v| contains(u / kappa, v / kappa)),
            outer_axis: self.outer_axis,
            outer: (self.outer.0 * kappa, self.outer.1 * kappa),
            outer_singular: self.outer_singular,
            outer_breakpoints: self.outer_breakpoints.iter().map(|b| b * kappa).collect(),
            sections: Arc::new(move |o| {
                sections(o / kappa)
                    .into_iter()
                    .map(|s| Section {
                        lo: s.lo * kappa,
                        hi: s.hi * kappa,
                        ..s
                    })
                    .collect()
            }),
            bounds: (
                (self.bounds.0 .0 * kappa, self.bounds.0 .1 * kappa),
                (self.bounds.1 .0 * kappa, self.bounds.1 .1 * kappa),
            ),
        }
    }
}

/// One linear constraint Σᵢ cᵢ (vᵢ − oᵢ) = 0 on a tuple of plane/space
/// coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub coeffs: Vec<f64>,
    pub offsets: Vec<f64>,
}

impl LinearConstraint {
    /// Signed constraint residual at `point`.
    pub fn slack(&self, point: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .zip(&self.offsets)
            .zip(point)
            .map(|((c, o), p)| c * (p - o))
            .sum()
    }
}

/// Profile density along the free coordinates of a singular component.
#[derive(Debug, Clone)]
pub enum Profile {
    OneD(Pdf1D),
    TwoD(Density2D),
}

/// Mass concentrated on an affine subspace: one constraint with a 1D or 2D
/// profile, or two constraints with a 1D profile.
#[derive(Debug, Clone)]
pub struct LineSingular {
    pub constraints: Vec<LinearConstraint>,
    pub profile: Profile,
    /// Indices (into the coordinate tuple) that the profile runs over.
    pub profile_vars: Vec<usize>,
    /// Marks relations derived from the deterministic reduction of a
    /// collinear pair in the uncertainty plane, as opposed to the
    /// expectation-plane components.
    pub derived: bool,
}

impl LineSingular {
    /// κ of a single-constraint pair component: the slope of the dependent
    /// coordinate against the first profile coordinate.
    pub fn kappa(&self) -> Option<f64> {
        if self.constraints.len() != 1 || self.constraints[0].coeffs.len() != 2 {
            return None;
        }
        let c = &self.constraints[0].coeffs;
        Some(-c[0] / c[1])
    }
}

/// Uniform mass on the boundary ellipsoid ω(r, s, t) = 1 with surface
/// weight 1/(4π √det T).
#[derive(Debug, Clone)]
pub struct SurfaceSingular {
    center: [f64; 3],
    gram: GramMatrix,
    tinv: DMatrix<f64>,
    weight: f64,
}

impl SurfaceSingular {
    pub fn new(center: [f64; 3], gram: GramMatrix) -> Result<Self> {
        let tinv = gram.inverse()?;
        let det = gram.det();
        if det <= 0.0 {
            return Err(Error::SingularGram {
                rank: gram.numerical_rank(),
                order: gram.order(),
            });
        }
        let weight = 1.0 / (4.0 * std::f64::consts::PI * det.sqrt());
        Ok(Self {
            center,
            gram,
            tinv,
            weight,
        })
    }

    pub fn center(&self) -> [f64; 3] {
        self.center
    }

    pub fn gram(&self) -> &GramMatrix {
        &self.gram
    }

    /// Uniform surface weight 1/(4π √det T).
    pub fn weight(&self) -> f64 {
        self.weight
    }

    /// Mahalanobis radius of (r, s, t) about the center.
    pub fn omega(&self, r: f64, s: f64, t: f64) -> f64 {
        let v = [r - self.center[0], s - self.center[1], t - self.center[2]];
        let mut q = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                q += v[i] * self.tinv[(i, j)] * v[j];
            }
        }
        q.max(0.0).sqrt()
    }
}

/// Tagged union over the absolutely-continuous and singular joint
/// distributions of expectation/uncertainty tuples.
#[derive(Debug, Clone)]
pub enum JointDistribution {
    Density(Density2D),
    Line(LineSingular),
    Surface(SurfaceSingular),
}

impl JointDistribution {
    pub fn variant_name(&self) -> &'static str {
        match self {
            JointDistribution::Density(_) => "density",
            JointDistribution::Line(_) => "line_singular",
            JointDistribution::Surface(_) => "surface_singular",
        }
    }
}

/// Support region of a pair of statistics of one observable, or of the
/// uncertainty triple of a rank-3 qubit triple.
#[derive(Debug, Clone)]
pub enum SupportRegion {
    /// Cells between the lines φ_{k,k+1} and φ_{1,d} in the (⟨A⟩, ⟨A²⟩)
    /// plane.
    ExpectationSecondMoment { spectrum: crate::observables::Spectrum },
    /// Band cells between square-root arcs in the (⟨A⟩, ΔA) plane.
    ExpectationStdDev { spectrum: crate::observables::Spectrum },
    /// The set of uncertainty triples (ΔA, ΔB, ΔC) reached by pure states,
    /// characterized by some sign branch attaining ω = 1.
    UncertaintySurface3(qubit::Surface3),
}

impl SupportRegion {
    /// Membership with additive tolerance; boundary points within `tol` are
    /// inside, and membership grows monotonically with `tol`.
    pub fn contains(&self, point: &[f64], tol: f64) -> bool {
        match self {
            SupportRegion::ExpectationSecondMoment { spectrum } => {
                qudit::f_region_contains(spectrum, point[0], point[1], tol)
            }
            SupportRegion::ExpectationStdDev { spectrum } => {
                qudit::v_region_contains(spectrum, point[0], point[1], tol)
            }
            SupportRegion::UncertaintySurface3(s) => {
                s.contains(point[0], point[1], point[2], tol)
            }
        }
    }

    /// Boundary polylines for plotting (2D kinds only). Each polyline is a
    /// list of points in the plane's coordinate order.
    pub fn boundary_polylines(&self, points_per_segment: usize) -> Vec<Vec<(f64, f64)>> {
        match self {
            SupportRegion::ExpectationSecondMoment { spectrum } => {
                qudit::f_region_boundary(spectrum, points_per_segment)
            }
            SupportRegion::ExpectationStdDev { spectrum } => {
                qudit::v_region_boundary(spectrum, points_per_segment)
            }
            SupportRegion::UncertaintySurface3(_) => Vec::new(),
        }
    }
}
