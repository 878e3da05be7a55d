//! Quantitative comparison of the analytic densities against the Haar
//! Monte Carlo oracle: exact one-sample Kolmogorov–Smirnov distances for
//! 1D densities (analytic CDF integrated to every sorted sample, never
//! binned), binned total-variation distances for 2D densities, and
//! constraint-slack checks for the singular components. Each check yields a
//! machine-readable pass/fail report.

use serde::Serialize;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::haar::{
    sample_mixed_statistics, SamplerConfig, Statistic,
};
use crate::observables::HermitianObservable;
use crate::pdf::{Density2D, JointDistribution, Pdf1D, Profile};
use crate::quad::gauss_legendre_cell;

/// Metric kinds a report can carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    Ks,
    L1,
    Tv,
    MaxSlack,
}

/// One verification outcome; `passed` is `value < threshold`.
#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub test_name: String,
    pub n_samples: usize,
    pub metric: MetricKind,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
    pub seed: u64,
    pub runtime_seconds: f64,
}

impl VerificationReport {
    fn finish(
        test_name: impl Into<String>,
        n_samples: usize,
        metric: MetricKind,
        value: f64,
        threshold: f64,
        seed: u64,
        started: Instant,
    ) -> Self {
        Self {
            test_name: test_name.into(),
            n_samples,
            metric,
            value,
            threshold,
            passed: value < threshold,
            seed,
            runtime_seconds: started.elapsed().as_secs_f64(),
        }
    }
}

/// The sampled quantity a 1D density is checked against.
#[derive(Debug, Clone)]
pub struct StatisticSpec {
    pub observable: HermitianObservable,
    pub statistic: Statistic,
}

impl StatisticSpec {
    pub fn expectation(observable: HermitianObservable) -> Self {
        Self {
            observable,
            statistic: Statistic::Expectation,
        }
    }

    pub fn std_dev(observable: HermitianObservable) -> Self {
        Self {
            observable,
            statistic: Statistic::StdDev,
        }
    }

    fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        let cfg = SamplerConfig::new(seed, self.observable.dim(), n);
        let table =
            sample_mixed_statistics(std::slice::from_ref(&self.observable), &[self.statistic], &cfg)?;
        Ok(table.column(0))
    }
}

/// Default KS threshold 3/√n.
pub fn ks_threshold(n: usize) -> f64 {
    3.0 / (n as f64).sqrt()
}

/// Exact one-sample KS distance between the empirical CDF of `n` Haar
/// samples of the statistic and the numerically integrated analytic CDF.
pub fn verify_pdf_1d(
    name: &str,
    pdf: &Pdf1D,
    stat: &StatisticSpec,
    n: usize,
    seed: u64,
) -> Result<VerificationReport> {
    verify_pdf_1d_with_threshold(name, pdf, stat, n, seed, ks_threshold(n))
}

pub fn verify_pdf_1d_with_threshold(
    name: &str,
    pdf: &Pdf1D,
    stat: &StatisticSpec,
    n: usize,
    seed: u64,
    threshold: f64,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let mut samples = stat.sample(n, seed)?;
    samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let value = ks_statistic_sorted(pdf, &samples);
    Ok(VerificationReport::finish(
        name,
        n,
        MetricKind::Ks,
        value,
        threshold,
        seed,
        started,
    ))
}

/// KS distance of pre-sorted samples against the analytic CDF.
pub fn ks_statistic_sorted(pdf: &Pdf1D, sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let cdf = pdf.cdf_at_sorted(sorted);
    let mut sup = 0.0_f64;
    for (i, &f) in cdf.iter().enumerate() {
        let lo = i as f64 / n;
        let hi = (i + 1) as f64 / n;
        sup = sup.max((f - lo).abs()).max((hi - f).abs());
    }
    sup
}

/// A pair of statistics (possibly of the same observable) drawn from the
/// same state stream, for 2D comparisons.
#[derive(Debug, Clone)]
pub struct PairStatSpec {
    pub first: StatisticSpec,
    pub second: StatisticSpec,
}

impl PairStatSpec {
    fn dim(&self) -> Result<usize> {
        let d = self.first.observable.dim();
        if self.second.observable.dim() != d {
            return Err(Error::DimMismatch {
                expected: d,
                got: self.second.observable.dim(),
            });
        }
        Ok(d)
    }

    fn sample(&self, n: usize, seed: u64) -> Result<Vec<(f64, f64)>> {
        let cfg = SamplerConfig::new(seed, self.dim()?, n);
        let table = sample_mixed_statistics(
            &[
                self.first.observable.clone(),
                self.second.observable.clone(),
            ],
            &[self.first.statistic, self.second.statistic],
            &cfg,
        )?;
        Ok(table.rows().map(|r| (r[0], r[1])).collect())
    }
}

/// Default TV threshold at the canonical 2D configuration.
pub const TV_THRESHOLD: f64 = 0.02;

/// Total-variation distance between the binned empirical mass of `n`
/// samples and the analytic mass integrated cell by cell (4×4
/// Gauss–Legendre; cells straddling the support boundary or a divergence
/// are subdivided twice). Sample mass falling outside the density's
/// bounding box counts fully toward the distance.
pub fn verify_joint_2d(
    name: &str,
    density: &Density2D,
    pair: &PairStatSpec,
    n: usize,
    bins: usize,
    seed: u64,
) -> Result<VerificationReport> {
    verify_joint_2d_with_threshold(name, density, pair, n, bins, seed, TV_THRESHOLD)
}

pub fn verify_joint_2d_with_threshold(
    name: &str,
    density: &Density2D,
    pair: &PairStatSpec,
    n: usize,
    bins: usize,
    seed: u64,
    threshold: f64,
) -> Result<VerificationReport> {
    let started = Instant::now();
    let samples = pair.sample(n, seed)?;
    let ((x_lo, x_hi), (y_lo, y_hi)) = density.bounds();
    let xedges = crate::haar::uniform_edges(x_lo, x_hi, bins);
    let yedges = crate::haar::uniform_edges(y_lo, y_hi, bins);
    let hist = crate::haar::histogram2d(&samples, &xedges, &yedges)?;

    let total = n as f64;
    let mut tv = hist.overflow() as f64 / total;
    for i in 0..bins {
        for j in 0..bins {
            let cell = (xedges[i], xedges[i + 1], yedges[j], yedges[j + 1]);
            let analytic = cell_mass(density, cell);
            let empirical = hist.count(i, j) as f64 / total;
            tv += (analytic - empirical).abs();
        }
    }
    tv *= 0.5;
    Ok(VerificationReport::finish(
        name,
        n,
        MetricKind::Tv,
        tv,
        threshold,
        seed,
        started,
    ))
}

/// Analytic mass of one histogram cell. Delicate cells (corners disagree
/// on membership, or a divergent/huge value shows up) are subdivided
/// twice, i.e. into 16 subcells.
fn cell_mass(density: &Density2D, cell: (f64, f64, f64, f64)) -> f64 {
    let (x0, x1, y0, y1) = cell;
    let probe = [
        (x0, y0),
        (x0, y1),
        (x1, y0),
        (x1, y1),
        (0.5 * (x0 + x1), 0.5 * (y0 + y1)),
    ];
    let inside = probe.iter().filter(|&&(x, y)| density.contains(x, y)).count();
    if inside == 0 {
        return 0.0;
    }
    let divergent = probe
        .iter()
        .any(|&(x, y)| density.eval(x, y).is_divergent());
    let straddles = inside < probe.len();
    let f = |x: f64, y: f64| {
        let v = density.density(x, y);
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    if !(straddles || divergent) {
        return gauss_legendre_cell(&f, x0, x1, y0, y1);
    }
    let mut acc = 0.0;
    let nsub = 4;
    for si in 0..nsub {
        for sj in 0..nsub {
            let sx0 = x0 + (x1 - x0) * si as f64 / nsub as f64;
            let sx1 = x0 + (x1 - x0) * (si + 1) as f64 / nsub as f64;
            let sy0 = y0 + (y1 - y0) * sj as f64 / nsub as f64;
            let sy1 = y0 + (y1 - y0) * (sj + 1) as f64 / nsub as f64;
            acc += gauss_legendre_cell(&f, sx0, sx1, sy0, sy1);
        }
    }
    acc
}

/// Default slack threshold on singular constraints.
pub const SLACK_THRESHOLD: f64 = 1e-9;

/// Verifies a singular joint distribution: the primary report is the
/// maximum constraint slack over `n` samples (|ω − 1| for a surface
/// component, distance to the line(s) otherwise); a second report checks
/// the profile density along the free coordinates with the 1D KS metric.
pub fn verify_singular(
    name: &str,
    dist: &JointDistribution,
    observables: &[HermitianObservable],
    stat: Statistic,
    n: usize,
    seed: u64,
) -> Result<Vec<VerificationReport>> {
    let started = Instant::now();
    let dim = observables
        .first()
        .map(|o| o.dim())
        .ok_or_else(|| Error::InvalidObservable("no observables given".into()))?;
    let cfg = SamplerConfig::new(seed, dim, n);
    let stats = vec![stat; observables.len()];
    let table = sample_mixed_statistics(observables, &stats, &cfg)?;

    match dist {
        JointDistribution::Density(_) => Err(Error::WrongVariant(
            "absolutely continuous density; use verify_joint_2d",
        )),
        JointDistribution::Surface(surface) => {
            if observables.len() != 3 {
                return Err(Error::DimMismatch {
                    expected: 3,
                    got: observables.len(),
                });
            }
            let mut max_slack = 0.0_f64;
            for row in table.rows() {
                let w = surface.omega(row[0], row[1], row[2]);
                max_slack = max_slack.max((w - 1.0).abs());
            }
            let slack_report = VerificationReport::finish(
                format!("{name}:constraint"),
                n,
                MetricKind::MaxSlack,
                max_slack,
                SLACK_THRESHOLD,
                seed,
                started,
            );
            // Profile check: T^(-1/2) maps the shifted samples onto the
            // unit sphere, whose third coordinate is uniform on [-1, 1].
            let profile_started = Instant::now();
            let half_inv = surface.gram().inverse_sqrt()?;
            let center = surface.center();
            let mut thirds: Vec<f64> = table
                .rows()
                .map(|row| {
                    let v = [row[0] - center[0], row[1] - center[1], row[2] - center[2]];
                    half_inv[(2, 0)] * v[0] + half_inv[(2, 1)] * v[1] + half_inv[(2, 2)] * v[2]
                })
                .collect();
            thirds.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let uniform = Pdf1D::new(
                |t| {
                    crate::pdf::PdfValue::Finite(if (-1.0..=1.0).contains(&t) {
                        0.5
                    } else {
                        0.0
                    })
                },
                vec![(-1.0, 1.0)],
                vec![-1.0, 1.0],
                Vec::new(),
            );
            let ks = ks_statistic_sorted(&uniform, &thirds);
            let profile_report = VerificationReport::finish(
                format!("{name}:profile"),
                n,
                MetricKind::Ks,
                ks,
                ks_threshold(n),
                seed,
                profile_started,
            );
            Ok(vec![slack_report, profile_report])
        }
        JointDistribution::Line(line) => {
            let mut max_slack = 0.0_f64;
            for row in table.rows() {
                for constraint in &line.constraints {
                    max_slack = max_slack.max(constraint.slack(row).abs());
                }
            }
            let slack_report = VerificationReport::finish(
                format!("{name}:constraint"),
                n,
                MetricKind::MaxSlack,
                max_slack,
                SLACK_THRESHOLD,
                seed,
                started,
            );
            let mut reports = vec![slack_report];
            // Profile along the free coordinates.
            match &line.profile {
                Profile::OneD(pdf) => {
                    let profile_started = Instant::now();
                    let var = line.profile_vars[0];
                    let mut values: Vec<f64> = table.rows().map(|row| row[var]).collect();
                    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    let ks = ks_statistic_sorted(pdf, &values);
                    reports.push(VerificationReport::finish(
                        format!("{name}:profile"),
                        n,
                        MetricKind::Ks,
                        ks,
                        ks_threshold(n),
                        seed,
                        profile_started,
                    ));
                }
                Profile::TwoD(density) => {
                    let profile_started = Instant::now();
                    let (v1, v2) = (line.profile_vars[0], line.profile_vars[1]);
                    let pairs: Vec<(f64, f64)> =
                        table.rows().map(|row| (row[v1], row[v2])).collect();
                    let tv = tv_against_pairs(density, &pairs, 50);
                    reports.push(VerificationReport::finish(
                        format!("{name}:profile"),
                        n,
                        MetricKind::Tv,
                        tv,
                        0.05,
                        seed,
                        profile_started,
                    ));
                }
            }
            Ok(reports)
        }
    }
}

/// Canonical verification suite: every closed-form density family checked
/// against the sampler at its default threshold. `n_1d` drives the KS
/// checks (threshold 3/√n), `n_2d` the binned TV checks, `n_slack` the
/// singular-constraint checks. Reports come back in a fixed order.
pub fn default_suite(
    seed: u64,
    n_1d: usize,
    n_2d: usize,
    n_slack: usize,
    bins: usize,
) -> Result<Vec<VerificationReport>> {
    use crate::observables::{QubitObservable, Spectrum};
    use crate::pdf;

    // The 0.02 TV threshold is calibrated for the canonical 4e6-sample,
    // 100²-bin run; smaller runs scale it by the statistical 1/√n law.
    let tv_threshold = TV_THRESHOLD * (4.0e6 / n_2d as f64).sqrt().max(1.0);
    let mut reports = Vec::new();

    // 1D uncertainty densities for d = 2, 3, 4.
    let q = QubitObservable::new(0.0, [0.3, 0.4, 1.2]).unwrap();
    reports.push(verify_pdf_1d(
        "ks:qubit-uncertainty",
        &pdf::pdf_uncertainty_qubit(&q)?,
        &StatisticSpec::std_dev(q.matrix()),
        n_1d,
        seed,
    )?);

    let s3 = Spectrum::new(vec![1.0, 3.0, 9.0]).unwrap();
    reports.push(verify_pdf_1d(
        "ks:qutrit-uncertainty",
        &pdf::pdf_uncertainty_qutrit(&s3)?,
        &StatisticSpec::std_dev(HermitianObservable::from_spectrum(&s3)),
        n_1d,
        seed,
    )?);

    let s4 = Spectrum::new(vec![1.0, 3.0, 9.0, 27.0]).unwrap();
    reports.push(verify_pdf_1d(
        "ks:d4-uncertainty",
        &pdf::pdf_uncertainty_d4(&s4)?,
        &StatisticSpec::std_dev(HermitianObservable::from_spectrum(&s4)),
        n_1d,
        seed,
    )?);

    // Expectation densities: the d = 2 box and the d = 4 piecewise cubic.
    let s2 = Spectrum::new(vec![-1.0, 1.0]).unwrap();
    reports.push(verify_pdf_1d(
        "ks:d2-expectation",
        &pdf::pdf_expectation(&s2)?,
        &StatisticSpec::expectation(HermitianObservable::from_spectrum(&s2)),
        n_1d,
        seed,
    )?);
    reports.push(verify_pdf_1d(
        "ks:d4-expectation",
        &pdf::pdf_expectation(&s4)?,
        &StatisticSpec::expectation(HermitianObservable::from_spectrum(&s4)),
        n_1d,
        seed,
    )?);

    // Joint 2D densities.
    let sx = QubitObservable::sigma_x();
    let sz = QubitObservable::sigma_z();
    reports.push(verify_joint_2d_with_threshold(
        "tv:pauli-xz-uncertainty-pair",
        &pdf::joint_uncertainties_qubit2(&sx, &sz)?,
        &PairStatSpec {
            first: StatisticSpec::std_dev(sx.matrix()),
            second: StatisticSpec::std_dev(sz.matrix()),
        },
        n_2d,
        bins,
        seed,
        tv_threshold,
    )?);
    let a3 = HermitianObservable::from_spectrum(&s3);
    reports.push(verify_joint_2d_with_threshold(
        "tv:qutrit-exp-std",
        &pdf::joint_exp_std_qutrit(&s3)?,
        &PairStatSpec {
            first: StatisticSpec::expectation(a3.clone()),
            second: StatisticSpec::std_dev(a3),
        },
        n_2d,
        bins,
        seed,
        tv_threshold,
    )?);

    // Singular components.
    let sy = QubitObservable::sigma_y();
    reports.extend(verify_singular(
        "singular:pauli-triple",
        &pdf::joint_expectations_qubit3(&sx, &sy, &sz)?,
        &[sx.matrix(), sy.matrix(), sz.matrix()],
        Statistic::Expectation,
        n_slack,
        seed,
    )?);
    let b2 = QubitObservable::new(0.0, [0.0, 0.0, 2.0]).unwrap();
    reports.extend(verify_singular(
        "singular:collinear-pair",
        &pdf::joint_expectations_qubit2(&sz, &b2)?,
        &[sz.matrix(), b2.matrix()],
        Statistic::Expectation,
        n_slack,
        seed,
    )?);

    Ok(reports)
}

/// TV distance of pre-drawn pairs against a density (used for profile
/// checks where the samples already exist).
fn tv_against_pairs(density: &Density2D, pairs: &[(f64, f64)], bins: usize) -> f64 {
    let ((x_lo, x_hi), (y_lo, y_hi)) = density.bounds();
    let xedges = crate::haar::uniform_edges(x_lo, x_hi, bins);
    let yedges = crate::haar::uniform_edges(y_lo, y_hi, bins);
    let hist = crate::haar::histogram2d(pairs, &xedges, &yedges).expect("uniform edges");
    let total = pairs.len() as f64;
    let mut tv = hist.overflow() as f64 / total;
    for i in 0..bins {
        for j in 0..bins {
            let analytic = cell_mass(
                density,
                (xedges[i], xedges[i + 1], yedges[j], yedges[j + 1]),
            );
            tv += (analytic - hist.count(i, j) as f64 / total).abs();
        }
    }
    0.5 * tv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::{QubitObservable, Spectrum};
    use crate::pdf;

    #[test]
    fn qubit_uncertainty_ks_passes() {
        let q = QubitObservable::new(0.0, [1.0, 0.0, 0.0]).unwrap();
        let pdf = pdf::pdf_uncertainty_qubit(&q).unwrap();
        let stat = StatisticSpec::std_dev(q.matrix());
        let report = verify_pdf_1d("qubit-unc", &pdf, &stat, 40_000, 42).unwrap();
        assert!(report.passed, "KS = {}", report.value);
    }

    #[test]
    fn support_doubled_impostor_fails() {
        let q = QubitObservable::new(0.0, [1.0, 0.0, 0.0]).unwrap();
        let pdf = pdf::pdf_uncertainty_qubit(&q).unwrap().scaled(2.0);
        let stat = StatisticSpec::std_dev(q.matrix());
        let report = verify_pdf_1d("qubit-unc-impostor", &pdf, &stat, 40_000, 42).unwrap();
        assert!(!report.passed);
    }

    #[test]
    fn expectation_box_ks_passes() {
        let spec = Spectrum::new(vec![-1.0, 1.0]).unwrap();
        let pdf = pdf::pdf_expectation(&spec).unwrap();
        let stat = StatisticSpec::expectation(HermitianObservable::from_spectrum(&spec));
        let report = verify_pdf_1d("box", &pdf, &stat, 40_000, 7).unwrap();
        assert!(report.passed, "KS = {}", report.value);
    }

    #[test]
    fn joint_2d_tv_small_run() {
        let spec = Spectrum::new(vec![1.0, 3.0, 9.0]).unwrap();
        let density = pdf::joint_exp_std_qutrit(&spec).unwrap();
        let obs = HermitianObservable::from_spectrum(&spec);
        let pair = PairStatSpec {
            first: StatisticSpec::expectation(obs.clone()),
            second: StatisticSpec::std_dev(obs),
        };
        let report =
            verify_joint_2d_with_threshold("qutrit-joint", &density, &pair, 200_000, 40, 42, 0.05)
                .unwrap();
        assert!(report.passed, "TV = {}", report.value);
    }

    #[test]
    fn singular_surface_check() {
        let (a, b, c) = (
            QubitObservable::sigma_x(),
            QubitObservable::sigma_y(),
            QubitObservable::sigma_z(),
        );
        let dist = pdf::joint_expectations_qubit3(&a, &b, &c).unwrap();
        let reports = verify_singular(
            "pauli-triple",
            &dist,
            &[a.matrix(), b.matrix(), c.matrix()],
            Statistic::Expectation,
            20_000,
            42,
        )
        .unwrap();
        assert!(reports.iter().all(|r| r.passed), "{reports:?}");
    }

    #[test]
    fn singular_line_check() {
        let a = QubitObservable::sigma_z();
        let b = QubitObservable::new(0.0, [0.0, 0.0, 2.0]).unwrap();
        let dist = pdf::joint_expectations_qubit2(&a, &b).unwrap();
        let reports = verify_singular(
            "collinear-pair",
            &dist,
            &[a.matrix(), b.matrix()],
            Statistic::Expectation,
            20_000,
            42,
        )
        .unwrap();
        assert!(reports.iter().all(|r| r.passed), "{reports:?}");
    }

    #[test]
    fn perturbed_triple_routes_to_surface() {
        // c nudged off-plane must classify rank 3 and use the surface test.
        let a = QubitObservable::new(0.0, [1.0, 0.0, 0.0]).unwrap();
        let b = QubitObservable::new(0.0, [0.0, 1.0, 0.0]).unwrap();
        let c = QubitObservable::new(0.0, [1.0, 1.0, 1e-3]).unwrap();
        let dist = pdf::joint_expectations_qubit3(&a, &b, &c).unwrap();
        assert!(matches!(dist, JointDistribution::Surface(_)));
    }

    #[test]
    fn report_serializes() {
        let report = VerificationReport {
            test_name: "demo".into(),
            n_samples: 10,
            metric: MetricKind::Ks,
            value: 0.1,
            threshold: 0.2,
            passed: true,
            seed: 42,
            runtime_seconds: 0.5,
        };
        let json = serde_json::to_string(&report).unwrap();
        assert!(json.contains("\"metric\":\"ks\""));
        assert!(json.contains("\"passed\":true"));
    }
}
