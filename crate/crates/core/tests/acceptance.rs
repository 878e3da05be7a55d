//! Acceptance suite: one test per exit criterion, each printing a
//! pass/fail line (visible with `--nocapture`) and enforcing its stated
//! tolerance and runtime budget.
//!
//! Run with `cargo test -p uncpdf --test acceptance -- --nocapture`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use uncpdf::haar::{map_samples, SamplerConfig};
use uncpdf::observables::{
    max_variance, std_dev, HermitianObservable, PureState, QubitObservable, Spectrum,
};
use uncpdf::pdf;
use uncpdf::regions;
use uncpdf::simplex::nelder_mead;
use uncpdf::verify::{
    verify_joint_2d, verify_pdf_1d, PairStatSpec, StatisticSpec,
};

const SEED: u64 = 42;

fn random_simple_spectrum(rng: &mut ChaCha8Rng, d: usize) -> Spectrum {
    loop {
        let values: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..4.0)).collect();
        let spec = Spectrum::new(values).unwrap();
        if spec.min_gap() > 0.05 * spec.width().max(1e-9) {
            return spec;
        }
    }
}

fn report(criterion: &str, passed: bool, detail: &str) {
    println!(
        "criterion {criterion}: {} — {detail}",
        if passed { "PASS" } else { "FAIL" }
    );
    assert!(passed, "criterion {criterion} failed: {detail}");
}

#[test]
fn criterion_1_normalization() {
    let started = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_1d = 0.0_f64;

    for d in 2..=6 {
        for _ in 0..5 {
            let spec = random_simple_spectrum(&mut rng, d);
            let err = (pdf::pdf_expectation(&spec).unwrap().integral() - 1.0).abs();
            worst_1d = worst_1d.max(err);
        }
    }
    for _ in 0..5 {
        let q = QubitObservable::new(
            rng.random_range(-1.0..1.0),
            [
                rng.random_range(-1.5..1.5),
                rng.random_range(-1.5..1.5),
                rng.random_range(0.2..1.5),
            ],
        )
        .unwrap();
        let err = (pdf::pdf_uncertainty_qubit(&q).unwrap().integral() - 1.0).abs();
        worst_1d = worst_1d.max(err);
    }
    for _ in 0..5 {
        let s3 = random_simple_spectrum(&mut rng, 3);
        worst_1d =
            worst_1d.max((pdf::pdf_uncertainty_qutrit(&s3).unwrap().integral() - 1.0).abs());
        let s4 = random_simple_spectrum(&mut rng, 4);
        worst_1d = worst_1d.max((pdf::pdf_uncertainty_d4(&s4).unwrap().integral() - 1.0).abs());
    }

    let mut worst_2d = 0.0_f64;
    let a = QubitObservable::new(0.2, [0.9, 0.1, -0.3]).unwrap();
    let b = QubitObservable::new(-0.4, [0.3, 0.8, 0.5]).unwrap();
    let pdf::JointDistribution::Density(pair_exp) =
        pdf::joint_expectations_qubit2(&a, &b).unwrap()
    else {
        panic!("rank-2 pair expected")
    };
    worst_2d = worst_2d.max((pair_exp.integral() - 1.0).abs());
    worst_2d =
        worst_2d.max((pdf::joint_uncertainties_qubit2(&a, &b).unwrap().integral() - 1.0).abs());
    let s3 = Spectrum::new(vec![1.0, 3.0, 9.0]).unwrap();
    let s4 = Spectrum::new(vec![1.0, 3.0, 9.0, 27.0]).unwrap();
    worst_2d = worst_2d.max((pdf::joint_exp_exp2_qutrit(&s3).unwrap().integral() - 1.0).abs());
    worst_2d = worst_2d.max((pdf::joint_exp_std_qutrit(&s3).unwrap().integral() - 1.0).abs());
    worst_2d = worst_2d.max((pdf::joint_exp_exp2_d4(&s4).unwrap().integral() - 1.0).abs());
    worst_2d = worst_2d.max((pdf::joint_exp_std_d4(&s4).unwrap().integral() - 1.0).abs());

    let elapsed = started.elapsed().as_secs_f64();
    report(
        "1 (normalization)",
        worst_1d < 1e-6 && worst_2d < 1e-5 && elapsed < 10.0,
        &format!(
            "max |∫f − 1|: 1D {worst_1d:.2e} (tol 1e-6), 2D {worst_2d:.2e} (tol 1e-5), \
             runtime {elapsed:.2}s (< 10s)"
        ),
    );
}

#[test]
fn criterion_2_monte_carlo_ks() {
    let n = 1_000_000;
    let threshold = 3.0 / (n as f64).sqrt();
    let q = QubitObservable::new(0.0, [0.3, 0.4, 1.2]).unwrap();
    let s3 = Spectrum::new(vec![1.0, 3.0, 9.0]).unwrap();
    let s4 = Spectrum::new(vec![1.0, 3.0, 9.0, 27.0]).unwrap();
    let s2 = Spectrum::new(vec![-1.0, 1.0]).unwrap();
    let cases: Vec<(&str, pdf::Pdf1D, StatisticSpec)> = vec![
        (
            "qubit ΔA",
            pdf::pdf_uncertainty_qubit(&q).unwrap(),
            StatisticSpec::std_dev(q.matrix()),
        ),
        (
            "qutrit ΔA",
            pdf::pdf_uncertainty_qutrit(&s3).unwrap(),
            StatisticSpec::std_dev(HermitianObservable::from_spectrum(&s3)),
        ),
        (
            "d4 ΔA",
            pdf::pdf_uncertainty_d4(&s4).unwrap(),
            StatisticSpec::std_dev(HermitianObservable::from_spectrum(&s4)),
        ),
        (
            "d2 ⟨A⟩",
            pdf::pdf_expectation(&s2).unwrap(),
            StatisticSpec::expectation(HermitianObservable::from_spectrum(&s2)),
        ),
        (
            "d4 ⟨A⟩",
            pdf::pdf_expectation(&s4).unwrap(),
            StatisticSpec::expectation(HermitianObservable::from_spectrum(&s4)),
        ),
    ];
    let mut passed = true;
    let mut details = Vec::new();
    for (name, pdf1, stat) in &cases {
        let started = Instant::now();
        let r = verify_pdf_1d(name, pdf1, stat, n, SEED).unwrap();
        let elapsed = started.elapsed().as_secs_f64();
        passed &= r.passed && elapsed < 60.0;
        details.push(format!("{name} KS {:.2e} in {elapsed:.1}s", r.value));
    }
    report(
        "2 (Monte Carlo KS)",
        passed,
        &format!("threshold {threshold:.2e}; {}", details.join(", ")),
    );
}

#[test]
fn criterion_3_joint_2d_tv() {
    let n = 4_000_000;
    let bins = 100;
    let sx = QubitObservable::sigma_x();
    let sz = QubitObservable::sigma_z();
    let started = Instant::now();
    let pair_report = verify_joint_2d(
        "pauli-xz",
        &pdf::joint_uncertainties_qubit2(&sx, &sz).unwrap(),
        &PairStatSpec {
            first: StatisticSpec::std_dev(sx.matrix()),
            second: StatisticSpec::std_dev(sz.matrix()),
        },
        n,
        bins,
        SEED,
    )
    .unwrap();
    let t1 = started.elapsed().as_secs_f64();

    let s3 = Spectrum::new(vec![1.0, 3.0, 9.0]).unwrap();
    let a3 = HermitianObservable::from_spectrum(&s3);
    let started = Instant::now();
    let qutrit_report = verify_joint_2d(
        "qutrit-exp-std",
        &pdf::joint_exp_std_qutrit(&s3).unwrap(),
        &PairStatSpec {
            first: StatisticSpec::expectation(a3.clone()),
            second: StatisticSpec::std_dev(a3),
        },
        n,
        bins,
        SEED,
    )
    .unwrap();
    let t2 = started.elapsed().as_secs_f64();

    report(
        "3 (joint 2D TV)",
        pair_report.passed && qutrit_report.passed && t1 < 180.0 && t2 < 180.0,
        &format!(
            "(Δσx, Δσz) TV {:.4} in {t1:.0}s, qutrit (⟨A⟩, ΔA) TV {:.4} in {t2:.0}s (tol 0.02, < 180s each)",
            pair_report.value, qutrit_report.value
        ),
    );
}

#[test]
fn criterion_4_singular_structure() {
    let n = 100_000;
    let (sx, sy, sz) = (
        QubitObservable::sigma_x(),
        QubitObservable::sigma_y(),
        QubitObservable::sigma_z(),
    );
    // Triple: every sampled expectation triple sits on ω = 1.
    let cfg = SamplerConfig::new(SEED, 2, n);
    let (mx, my, mz) = (sx.matrix(), sy.matrix(), sz.matrix());
    let triples = map_samples(&cfg, |psi| {
        [
            uncpdf::observables::expectation(&mx, psi).unwrap(),
            uncpdf::observables::expectation(&my, psi).unwrap(),
            uncpdf::observables::expectation(&mz, psi).unwrap(),
        ]
    })
    .unwrap();
    let mut max_surface_slack = 0.0_f64;
    for t in &triples {
        let w = pdf::omega3(&sx, &sy, &sz, t[0], t[1], t[2]).unwrap();
        max_surface_slack = max_surface_slack.max((w - 1.0).abs());
    }

    // Collinear pair B = 2A: every sampled pair sits on the line.
    let a = sz;
    let b = QubitObservable::new(0.0, [0.0, 0.0, 2.0]).unwrap();
    let pdf::JointDistribution::Line(line) = pdf::joint_expectations_qubit2(&a, &b).unwrap()
    else {
        panic!("collinear pair must be line-singular")
    };
    let (ma, mb) = (a.matrix(), b.matrix());
    let pairs = map_samples(&cfg, |psi| {
        [
            uncpdf::observables::expectation(&ma, psi).unwrap(),
            uncpdf::observables::expectation(&mb, psi).unwrap(),
        ]
    })
    .unwrap();
    let mut max_line_slack = 0.0_f64;
    for p in &pairs {
        max_line_slack = max_line_slack.max(line.constraints[0].slack(p).abs());
    }

    report(
        "4 (singular structure)",
        max_surface_slack < 1e-10 && max_line_slack < 1e-10,
        &format!(
            "max |ω₃ − 1| = {max_surface_slack:.2e}, max line slack = {max_line_slack:.2e} \
             over {n} samples (tol 1e-10)"
        ),
    );
}

#[test]
fn criterion_5_region_containment() {
    let n = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut worst_slack = f64::INFINITY;
    let mut all_contained = true;
    for pair_idx in 0..20 {
        let rand_q = |rng: &mut ChaCha8Rng| {
            QubitObservable::new(
                rng.random_range(-1.0..1.0),
                [
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                    rng.random_range(-1.0..1.0),
                ],
            )
            .unwrap()
        };
        let (a, b) = loop {
            let a = rand_q(&mut rng);
            let b = rand_q(&mut rng);
            if a.bloch_norm() > 0.1 && b.bloch_norm() > 0.1 {
                break (a, b);
            }
        };
        let (ma, mb) = (a.matrix(), b.matrix());
        let cfg = SamplerConfig::new(SEED.wrapping_add(pair_idx), 2, n);
        let samples = map_samples(&cfg, |psi| {
            (std_dev(&ma, psi).unwrap(), std_dev(&mb, psi).unwrap())
        })
        .unwrap();
        let cube = regions::supercube_bound(&[a.spectrum(), b.spectrum()]);
        for (x, y) in samples {
            match regions::pair_slack(&a, &b, x, y, 1e-9) {
                Some(slack) => worst_slack = worst_slack.min(slack),
                None => all_contained = false,
            }
            all_contained &= regions::inside_supercube(&cube, &[x, y], 1e-9);
        }
    }
    report(
        "5 (region containment)",
        worst_slack >= -1e-9 && all_contained,
        &format!(
            "min inequality slack {worst_slack:.2e} over 20 pairs × {n} samples \
             (≥ −1e-9); supercube containment: {all_contained}"
        ),
    );
}

/// Golden-angle lattice on the sphere, test-owned brute-force oracle.
fn lattice_minimum(objective: &regions::Objective, obs: &[QubitObservable], n: usize) -> f64 {
    let golden = (1.0 + 5.0_f64.sqrt()) / 2.0;
    let mut best = f64::INFINITY;
    for k in 0..n {
        let z = 1.0 - (2.0 * k as f64 + 1.0) / n as f64;
        let r = (1.0 - z * z).max(0.0).sqrt();
        let az = 2.0 * std::f64::consts::PI * (k as f64 / golden).fract();
        let u = [r * az.cos(), r * az.sin(), z];
        let uncs: Vec<f64> = obs.iter().map(|q| q.std_dev_from_bloch(u)).collect();
        best = best.min(objective.eval(&uncs));
    }
    best
}

#[test]
fn criterion_6_optimization() {
    let obs = [QubitObservable::sigma_x(), QubitObservable::sigma_z()];
    let var = regions::minimize(&regions::Objective::SumOfVariances, &obs).unwrap();
    let std = regions::minimize(&regions::Objective::SumOfStdDevs, &obs).unwrap();
    let var_ok = (var.minimum - 1.0).abs() <= 1e-6;
    let std_ok = (std.minimum - 1.0).abs() <= 1e-4;

    // Dense-grid oracle at 10⁶ lattice points: upper bound within lattice
    // resolution (quadratic minimum for the variance sum, conical for the
    // standard-deviation sum).
    let oracle_var = lattice_minimum(&regions::Objective::SumOfVariances, &obs, 1_000_000);
    let oracle_std = lattice_minimum(&regions::Objective::SumOfStdDevs, &obs, 1_000_000);
    let oracle_ok = oracle_var >= var.minimum - 1e-9
        && oracle_var - var.minimum <= 1e-6
        && oracle_std >= std.minimum - 1e-9
        && oracle_std - std.minimum <= 2e-3;

    // Extremal variance against a sampling + simplex refinement oracle.
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut maxvar_ok = true;
    let mut maxvar_detail = String::new();
    for d in [3usize, 4] {
        let spec = random_simple_spectrum(&mut rng, d);
        let obs_d = HermitianObservable::from_spectrum(&spec);
        let formula = max_variance(&spec).unwrap();
        // Stage 1: best of 20000 Haar states.
        let cfg = SamplerConfig::new(SEED, d, 20_000);
        let starts = map_samples(&cfg, |psi| {
            let sd = std_dev(&obs_d, psi).unwrap();
            (sd * sd, psi.clone())
        })
        .unwrap();
        let (mut best_var, mut best_state) = (0.0, starts[0].1.clone());
        for (v, s) in starts {
            if v > best_var {
                best_var = v;
                best_state = s;
            }
        }
        // Stage 2: simplex refinement over the real embedding.
        let start: Vec<f64> = best_state
            .amplitudes()
            .iter()
            .flat_map(|z| [z.re, z.im])
            .collect();
        let neg_var = |v: &[f64]| {
            let amps = nalgebra::DVector::from_iterator(
                d,
                (0..d).map(|k| num_complex::Complex64::new(v[2 * k], v[2 * k + 1])),
            );
            match PureState::from_unnormalized(amps) {
                Ok(psi) => {
                    let sd = std_dev(&obs_d, &psi).unwrap();
                    -(sd * sd)
                }
                Err(_) => 1e30,
            }
        };
        let out = nelder_mead(neg_var, &start, 0.2, 1e-12, 4000);
        let oracle = (-out.value).max(best_var);
        maxvar_ok &= (oracle - formula).abs() < 1e-6;
        maxvar_detail.push_str(&format!("d={d}: |oracle − ¼w²| = {:.2e}; ", (oracle - formula).abs()));
    }

    report(
        "6 (optimization)",
        var_ok && std_ok && oracle_ok && maxvar_ok,
        &format!(
            "min Σvar = {:.9} (1 ± 1e-6), min Σstd = {:.6} (1 ± 1e-4); lattice oracles \
             {oracle_var:.7}/{oracle_std:.5}; {maxvar_detail}",
            var.minimum, std.minimum
        ),
    );
}

/// Halo points offset outward from the (⟨A⟩, ΔA) region boundary along the
/// analytic normals.
fn boundary_halo(spec: &Spectrum, n_points: usize, offset: f64) -> Vec<(f64, f64)> {
    let vals = spec.values();
    let d = vals.len();
    let (lo, hi) = (vals[0], vals[d - 1]);
    let mut points = Vec::with_capacity(n_points);
    let per_curve = n_points / d; // outer arc + (d − 1) lower arcs
    // Outer arc: push above/outside along (−x', 1)/|·|.
    for i in 0..per_curve {
        let t = (i as f64 + 0.5) / per_curve as f64;
        let r = lo + (hi - lo) * t;
        let x = ((hi - r) * (r - lo)).sqrt();
        let slope = (hi + lo - 2.0 * r) / (2.0 * x);
        let norm = (1.0 + slope * slope).sqrt();
        points.push((r - offset * slope / norm, x + offset / norm));
    }
    // Lower arcs: push below along (x', −1)/|·|.
    for k in 0..d - 1 {
        let (a, b) = (vals[k], vals[k + 1]);
        for i in 0..per_curve {
            let t = (i as f64 + 0.5) / per_curve as f64;
            let r = a + (b - a) * t;
            let x = ((b - r) * (r - a)).sqrt();
            let slope = (a + b - 2.0 * r) / (2.0 * x);
            let norm = (1.0 + slope * slope).sqrt();
            points.push((r + offset * slope / norm, x - offset / norm));
        }
    }
    points
}

#[test]
fn criterion_7_figures() {
    let mut all_ok = true;
    let mut detail = String::new();
    for (name, spec) in [
        ("fig1a", Spectrum::new(vec![1.0, 3.0, 9.0]).unwrap()),
        ("fig1b", Spectrum::new(vec![1.0, 3.0, 9.0, 27.0]).unwrap()),
    ] {
        let (_, region) = pdf::support_regions(&spec).unwrap();
        let obs = HermitianObservable::from_spectrum(&spec);
        let cfg = SamplerConfig::new(SEED, spec.dim(), 100_000);
        let samples = map_samples(&cfg, |psi| {
            (
                uncpdf::observables::expectation(&obs, psi).unwrap(),
                std_dev(&obs, psi).unwrap(),
            )
        })
        .unwrap();
        let inside = samples
            .iter()
            .filter(|&&(r, x)| region.contains(&[r, x], 1e-9))
            .count();
        let halo = boundary_halo(&spec, 10_000, 1e-3);
        let rejected = halo
            .iter()
            .filter(|&&(r, x)| !region.contains(&[r, x], 1e-9))
            .count();
        let ok = inside == samples.len() && rejected == halo.len();
        all_ok &= ok;
        detail.push_str(&format!(
            "{name}: {inside}/{} samples inside, {rejected}/{} halo rejected; ",
            samples.len(),
            halo.len()
        ));
        // The emitted boundary polylines trace the same region.
        let bundle = uncpdf::figures::figure_data(name.parse().unwrap()).unwrap();
        all_ok &= !bundle.tables.is_empty();
    }

    // fig2b breakpoints: exactly the six half gaps of (1, 3, 9, 27).
    let pdf4 = pdf::pdf_uncertainty_d4(&Spectrum::new(vec![1.0, 3.0, 9.0, 27.0]).unwrap()).unwrap();
    let interior: Vec<f64> = pdf4
        .breakpoints()
        .iter()
        .copied()
        .filter(|&b| b > 0.0)
        .collect();
    let exact = interior == vec![1.0, 3.0, 4.0, 9.0, 12.0, 13.0];
    all_ok &= exact;
    detail.push_str(&format!("fig2b breakpoints {{1,3,4,9,12,13}} exact: {exact}"));

    report("7 (figure reproduction)", all_ok, &detail);
}

#[test]
fn criterion_8_negative_controls() {
    let n = 100_000;
    let mut failures_detected = 0;
    let mut total = 0;

    // 1D impostors: support doubled.
    let q = QubitObservable::new(0.0, [0.3, 0.4, 1.2]).unwrap();
    let s3 = Spectrum::new(vec![1.0, 3.0, 9.0]).unwrap();
    let s4 = Spectrum::new(vec![1.0, 3.0, 9.0, 27.0]).unwrap();
    let cases: Vec<(pdf::Pdf1D, StatisticSpec)> = vec![
        (
            pdf::pdf_uncertainty_qubit(&q).unwrap(),
            StatisticSpec::std_dev(q.matrix()),
        ),
        (
            pdf::pdf_uncertainty_qutrit(&s3).unwrap(),
            StatisticSpec::std_dev(HermitianObservable::from_spectrum(&s3)),
        ),
        (
            pdf::pdf_uncertainty_d4(&s4).unwrap(),
            StatisticSpec::std_dev(HermitianObservable::from_spectrum(&s4)),
        ),
        (
            pdf::pdf_expectation(&s4).unwrap(),
            StatisticSpec::expectation(HermitianObservable::from_spectrum(&s4)),
        ),
    ];
    for (pdf1, stat) in &cases {
        total += 1;
        let impostor = pdf1.scaled(2.0);
        let r = verify_pdf_1d("impostor-1d", &impostor, stat, n, SEED).unwrap();
        failures_detected += usize::from(!r.passed);
    }

    // 2D impostor.
    let sx = QubitObservable::sigma_x();
    let sz = QubitObservable::sigma_z();
    total += 1;
    let impostor = pdf::joint_uncertainties_qubit2(&sx, &sz).unwrap().scaled(2.0);
    let r = verify_joint_2d(
        "impostor-2d",
        &impostor,
        &PairStatSpec {
            first: StatisticSpec::std_dev(sx.matrix()),
            second: StatisticSpec::std_dev(sz.matrix()),
        },
        n,
        50,
        SEED,
    )
    .unwrap();
    failures_detected += usize::from(!r.passed);

    // Singular impostors: wrong line slope, wrong ellipsoid.
    let a = QubitObservable::sigma_z();
    let b = QubitObservable::new(0.0, [0.0, 0.0, 2.0]).unwrap();
    let b_wrong = QubitObservable::new(0.0, [0.0, 0.0, 4.0]).unwrap();
    let pdf::JointDistribution::Line(wrong_line) =
        pdf::joint_expectations_qubit2(&a, &b_wrong).unwrap()
    else {
        panic!()
    };
    total += 1;
    let cfg = SamplerConfig::new(SEED, 2, n);
    let (ma, mb) = (a.matrix(), b.matrix());
    let worst = map_samples(&cfg, |psi| {
        let p = [
            uncpdf::observables::expectation(&ma, psi).unwrap(),
            uncpdf::observables::expectation(&mb, psi).unwrap(),
        ];
        wrong_line.constraints[0].slack(&p).abs()
    })
    .unwrap()
    .into_iter()
    .fold(0.0, f64::max);
    failures_detected += usize::from(worst >= 1e-9);

    let sy = QubitObservable::sigma_y();
    let stretched = QubitObservable::new(0.0, [2.0, 0.0, 0.0]).unwrap();
    let pdf::JointDistribution::Surface(wrong_surface) =
        pdf::joint_expectations_qubit3(&stretched, &sy, &a).unwrap()
    else {
        panic!()
    };
    total += 1;
    let (mx, my, mz) = (sx.matrix(), sy.matrix(), a.matrix());
    let worst = map_samples(&cfg, |psi| {
        let w = wrong_surface.omega(
            uncpdf::observables::expectation(&mx, psi).unwrap(),
            uncpdf::observables::expectation(&my, psi).unwrap(),
            uncpdf::observables::expectation(&mz, psi).unwrap(),
        );
        (w - 1.0).abs()
    })
    .unwrap()
    .into_iter()
    .fold(0.0, f64::max);
    failures_detected += usize::from(worst >= 1e-9);

    report(
        "8 (negative controls)",
        failures_detected == total,
        &format!("{failures_detected}/{total} corrupted densities correctly rejected"),
    );
}
