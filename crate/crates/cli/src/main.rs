//! Command-line surface: density grids, region minimization, Monte Carlo
//! verification suites and figure-data bundles.
//!
//! Observables are given as JSON files (`--obs`, repeatable, order
//! preserved) or inline (`--spectrum a,b,c`, `--qubit a0,ax,ay,az`); inline
//! inputs follow the file inputs in declaration order. Grids are
//! `lo:hi:n` per axis (endpoints included), comma-separated for 2D.
//! Divergent density values are emitted as the literal token `inf`.

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use uncpdf::error::Error;
use uncpdf::figures::{figure_data, FigureId};
use uncpdf::fmt_sig;
use uncpdf::observables::{HermitianObservable, ObservableJson, QubitObservable, Spectrum};
use uncpdf::pdf::{
    self, Density2D, JointDistribution, Pdf1D, Profile, SupportRegion,
};
use uncpdf::regions::{minimize, minimize_heuristic, Objective};
use uncpdf::verify;

#[derive(Parser)]
#[command(
    name = "uncpdf",
    version,
    about = "Densities of observable expectation values and uncertainties over Haar-random pure states"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate a closed-form density on a grid (CSV), or describe a
    /// singular distribution (JSON).
    Pdf(PdfArgs),
    /// Uncertainty-region queries.
    Region {
        #[command(subcommand)]
        action: RegionAction,
    },
    /// Shorthand for `region min`.
    Min(MinArgs),
    /// Run a Monte Carlo verification suite; exit 0 iff every check passes.
    Verify(VerifyArgs),
    /// Emit figure data bundles (region boundaries, density curves).
    Figures(FiguresArgs),
}

#[derive(Subcommand)]
enum RegionAction {
    /// Minimize an uncertainty functional over pure states.
    Min(MinArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum PdfKind {
    /// Density of ⟨A⟩ (any simple spectrum, d ≥ 2).
    Expectation,
    /// Density of ΔA (d ∈ {2, 3, 4}).
    Uncertainty,
    /// Joint density of expectation values of 2 or 3 qubit observables.
    JointExp,
    /// Joint distribution of uncertainties of 2 or 3 qubit observables.
    JointUnc,
    /// Joint density of (⟨A⟩, ⟨A²⟩) (d ∈ {3, 4}).
    ExpExp2,
    /// Joint density of (⟨A⟩, ΔA) (d ∈ {3, 4}).
    ExpStd,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Csv,
    Json,
}

#[derive(Parser)]
struct ObsInputs {
    /// Observable JSON file; repeatable, order preserved.
    #[arg(long = "obs")]
    obs: Vec<PathBuf>,
    /// Inline spectrum, e.g. `--spectrum 1,3,9`; repeatable.
    #[arg(long = "spectrum", allow_hyphen_values = true)]
    spectrum: Vec<String>,
    /// Inline qubit observable `a0,ax,ay,az`; repeatable.
    #[arg(long = "qubit", allow_hyphen_values = true)]
    qubit: Vec<String>,
}

#[derive(Parser)]
struct PdfArgs {
    #[arg(value_enum)]
    kind: PdfKind,
    #[command(flatten)]
    inputs: ObsInputs,
    /// Grid `lo:hi:n` (1D) or `lo:hi:n,lo:hi:n` (2D); endpoints included,
    /// n >= 2. Defaults to the density's support.
    #[arg(long, allow_hyphen_values = true)]
    grid: Option<String>,
    /// Output file (stdout when omitted). Singular profiles go to
    /// `<out>.profile.csv`.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

#[derive(Parser)]
struct MinArgs {
    /// `sum-sq` minimizes Σ(ΔA_k)², `sum` minimizes ΣΔA_k.
    #[arg(long)]
    objective: String,
    #[command(flatten)]
    inputs: ObsInputs,
    /// Restarts of the general-dimension heuristic (ignored for qubits).
    #[arg(long, default_value_t = 16)]
    restarts: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Parser)]
struct VerifyArgs {
    /// Suite name; only `default` is defined.
    #[arg(long, default_value = "default")]
    suite: String,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Samples per 1D check; 2D checks use 4n, slack checks n/10.
    #[arg(long, default_value_t = 1_000_000)]
    n: usize,
    #[arg(long, default_value_t = 100)]
    bins: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Parser)]
struct FiguresArgs {
    /// One of fig1a, fig1b, fig2a, fig2b.
    #[arg(long)]
    which: String,
    /// Output directory (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    n: usize,
}

impl Axis {
    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        let (lo, hi, n) = (self.lo, self.hi, self.n);
        (0..n).map(move |i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
    }
}

fn parse_axis(text: &str) -> Result<Axis, Error> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(Error::InvalidObservable(format!(
            "grid axis {text:?} is not lo:hi:n"
        )));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| Error::InvalidObservable(format!("bad grid bound {:?}", parts[0])))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| Error::InvalidObservable(format!("bad grid bound {:?}", parts[1])))?;
    let n: usize = parts[2]
        .parse()
        .map_err(|_| Error::InvalidObservable(format!("bad grid count {:?}", parts[2])))?;
    if n < 2 || !lo.is_finite() || !hi.is_finite() || hi <= lo {
        return Err(Error::InvalidObservable(format!(
            "grid axis {text:?} needs hi > lo and n >= 2"
        )));
    }
    Ok(Axis { lo, hi, n })
}

fn parse_grid(text: &str) -> Result<Vec<Axis>, Error> {
    text.split(',').map(parse_axis).collect()
}

fn parse_csv_floats(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidObservable(format!("bad number {p:?}")))
        })
        .collect()
}

fn collect_observables(inputs: &ObsInputs) -> Result<Vec<ObservableJson>, Error> {
    let mut out = Vec::new();
    for path in &inputs.obs {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::InvalidObservable(format!("{}: {e}", path.display())))?;
        out.push(ObservableJson::parse(&text)?);
    }
    for spec in &inputs.spectrum {
        out.push(ObservableJson::Spectrum(parse_csv_floats(spec)?));
    }
    for q in &inputs.qubit {
        let v = parse_csv_floats(q)?;
        if v.len() != 4 {
            return Err(Error::InvalidObservable(format!(
                "--qubit expects a0,ax,ay,az, got {q:?}"
            )));
        }
        out.push(ObservableJson::Qubit {
            a0: v[0],
            a: [v[1], v[2], v[3]],
        });
    }
    if out.is_empty() {
        return Err(Error::InvalidObservable(
            "no observables given (use --obs, --spectrum or --qubit)".into(),
        ));
    }
    Ok(out)
}

fn spectrum_of_input(entry: &ObservableJson) -> Result<Spectrum, Error> {
    match entry {
        ObservableJson::Spectrum(values) => Spectrum::new(values.clone()),
        other => {
            let obs = other.to_observable()?;
            Ok(uncpdf::observables::spectrum_of(&obs, 0.0))
        }
    }
}

fn write_text(out: &Option<PathBuf>, text: &str) -> Result<(), Error> {
    match out {
        None => {
            match std::io::stdout().write_all(text.as_bytes()) {
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => {
                    Err(Error::InvalidObservable(e.to_string()))
                }
                _ => Ok(()),
            }
        }
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Error::InvalidObservable(format!("{}: {e}", path.display()))),
    }
}

/// Rows of (coords..., value) rendered as CSV or JSON.
fn render_table(headers: &[&str], rows: &[Vec<f64>], format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => {
            let mut out = String::new();
            out.push_str(&headers.join(","));
            out.push('\n');
            for row in rows {
                let cells: Vec<String> = row.iter().map(|&v| fmt_sig(v)).collect();
                out.push_str(&cells.join(","));
                out.push('\n');
            }
            out
        }
        OutputFormat::Json => {
            let rows_json: Vec<serde_json::Value> = rows
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|&v| {
                            if v.is_finite() {
                                json!(v)
                            } else {
                                json!(fmt_sig(v))
                            }
                        })
                        .collect()
                })
                .collect();
            let doc = json!({"headers": headers, "rows": rows_json});
            let mut text = serde_json::to_string_pretty(&doc).expect("plain data");
            text.push('\n');
            text
        }
    }
}

fn grid_1d(pdf: &Pdf1D, axis: &Axis, header: [&str; 2], format: OutputFormat) -> String {
    let rows: Vec<Vec<f64>> = axis.values().map(|r| vec![r, pdf.density(r)]).collect();
    render_table(&header, &rows, format)
}

fn grid_2d(
    density: &Density2D,
    axes: &[Axis],
    header: [&str; 3],
    format: OutputFormat,
) -> String {
    let mut rows = Vec::with_capacity(axes[0].n * axes[1].n);
    for u in axes[0].values() {
        for v in axes[1].values() {
            rows.push(vec![u, v, density.density(u, v)]);
        }
    }
    render_table(&header, &rows, format)
}

fn default_axis_1d(pdf: &Pdf1D, n: usize) -> Axis {
    Axis {
        lo: pdf.support_lo(),
        hi: pdf.support_hi(),
        n,
    }
}

fn default_axes_2d(density: &Density2D, n: usize) -> Vec<Axis> {
    let ((x_lo, x_hi), (y_lo, y_hi)) = density.bounds();
    vec![
        Axis {
            lo: x_lo,
            hi: x_hi,
            n,
        },
        Axis {
            lo: y_lo,
            hi: y_hi,
            n,
        },
    ]
}

/// Grid of a singular component's profile, as JSON rows.
fn profile_rows(profile: &Profile, n: usize) -> (Vec<&'static str>, Vec<Vec<f64>>) {
    match profile {
        Profile::OneD(pdf) => {
            let axis = default_axis_1d(pdf, n);
            (
                vec!["r", "f"],
                axis.values().map(|r| vec![r, pdf.density(r)]).collect(),
            )
        }
        Profile::TwoD(density) => {
            let axes = default_axes_2d(density, 60);
            let mut rows = Vec::new();
            for u in axes[0].values() {
                for v in axes[1].values() {
                    rows.push(vec![u, v, density.density(u, v)]);
                }
            }
            (vec!["r", "s", "f"], rows)
        }
    }
}

fn describe_singular(
    dist: &JointDistribution,
    out: &Option<PathBuf>,
) -> Result<String, Error> {
    let doc = match dist {
        JointDistribution::Density(_) => unreachable!("caller handles densities"),
        JointDistribution::Surface(surface) => {
            let g = surface.gram().entries();
            let gram_rows: Vec<Vec<f64>> = (0..3)
                .map(|i| (0..3).map(|j| g[(i, j)]).collect())
                .collect();
            json!({
                "variant": "surface_singular",
                "center": surface.center(),
                "gram": gram_rows,
                "det_gram": surface.gram().det(),
                "surface_weight": surface.weight(),
            })
        }
        JointDistribution::Line(line) => {
            let constraints: Vec<serde_json::Value> = line
                .constraints
                .iter()
                .map(|c| json!({"coeffs": c.coeffs, "offsets": c.offsets}))
                .collect();
            let (headers, rows) = profile_rows(&line.profile, 400);
            let mut doc = json!({
                "variant": "line_singular",
                "derived": line.derived,
                "constraints": constraints,
                "profile_vars": line.profile_vars,
            });
            match out {
                None => {
                    doc["profile"] = json!({"headers": headers, "rows": rows});
                }
                Some(path) => {
                    let profile_path = sibling_with_suffix(path, ".profile.csv");
                    let mut csv = String::new();
                    csv.push_str(&headers.join(","));
                    csv.push('\n');
                    for row in &rows {
                        let cells: Vec<String> = row.iter().map(|&v| fmt_sig(v)).collect();
                        csv.push_str(&cells.join(","));
                        csv.push('\n');
                    }
                    std::fs::write(&profile_path, csv).map_err(|e| {
                        Error::InvalidObservable(format!("{}: {e}", profile_path.display()))
                    })?;
                    doc["profile_csv"] = json!(profile_path.display().to_string());
                }
            }
            doc
        }
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("plain data");
    text.push('\n');
    Ok(text)
}

fn sibling_with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.as_os_str().to_owned();
    name.push(suffix);
    PathBuf::from(name)
}

fn qubits_from(entries: &[ObservableJson]) -> Result<Vec<QubitObservable>, Error> {
    entries.iter().map(|e| e.to_qubit()).collect()
}

fn run_pdf(args: &PdfArgs) -> Result<(), Error> {
    let entries = collect_observables(&args.inputs)?;
    let grid = args.grid.as_deref().map(parse_grid).transpose()?;
    let expect_axes = |want: usize| -> Result<(), Error> {
        if let Some(g) = &grid {
            if g.len() != want {
                return Err(Error::InvalidObservable(format!(
                    "this density needs a {want}-axis grid"
                )));
            }
        }
        Ok(())
    };

    match args.kind {
        PdfKind::Expectation => {
            expect_axes(1)?;
            let spec = spectrum_of_input(&entries[0])?;
            let pdf = pdf::pdf_expectation(&spec)?;
            let axis = grid
                .as_ref()
                .map(|g| g[0])
                .unwrap_or_else(|| default_axis_1d(&pdf, 400));
            write_text(&args.out, &grid_1d(&pdf, &axis, ["r", "f"], args.format))
        }
        PdfKind::Uncertainty => {
            expect_axes(1)?;
            let spec = spectrum_of_input(&entries[0])?;
            let pdf = match spec.dim() {
                2 => {
                    let vals = spec.values();
                    let q = QubitObservable::new(
                        0.5 * (vals[0] + vals[1]),
                        [0.5 * (vals[1] - vals[0]), 0.0, 0.0],
                    )?;
                    pdf::pdf_uncertainty_qubit(&q)?
                }
                3 => pdf::pdf_uncertainty_qutrit(&spec)?,
                4 => pdf::pdf_uncertainty_d4(&spec)?,
                d => {
                    return Err(Error::UnsupportedDimension {
                        dim: d,
                        details: "closed-form uncertainty densities exist for d = 2 \
                                  (single qubit), d = 3 and d = 4"
                            .into(),
                    })
                }
            };
            let axis = grid
                .as_ref()
                .map(|g| g[0])
                .unwrap_or_else(|| default_axis_1d(&pdf, 400));
            write_text(&args.out, &grid_1d(&pdf, &axis, ["r", "f"], args.format))
        }
        PdfKind::JointExp => {
            let qubits = qubits_from(&entries)?;
            let dist = match qubits.len() {
                2 => pdf::joint_expectations_qubit2(&qubits[0], &qubits[1])?,
                3 => pdf::joint_expectations_qubit3(&qubits[0], &qubits[1], &qubits[2])?,
                n => {
                    return Err(Error::InvalidObservable(format!(
                        "joint-exp takes 2 or 3 qubit observables, got {n}"
                    )))
                }
            };
            match dist {
                JointDistribution::Density(density) => {
                    expect_axes(2)?;
                    let axes = grid.unwrap_or_else(|| default_axes_2d(&density, 100));
                    write_text(
                        &args.out,
                        &grid_2d(&density, &axes, ["r", "s", "f"], args.format),
                    )
                }
                singular => write_text(&args.out, &describe_singular(&singular, &args.out)?),
            }
        }
        PdfKind::JointUnc => {
            let qubits = qubits_from(&entries)?;
            match qubits.len() {
                2 => {
                    let dist =
                        pdf::joint_uncertainties_qubit2_dist(&qubits[0], &qubits[1])?;
                    match dist {
                        JointDistribution::Density(density) => {
                            expect_axes(2)?;
                            let axes = grid.unwrap_or_else(|| default_axes_2d(&density, 100));
                            write_text(
                                &args.out,
                                &grid_2d(&density, &axes, ["x", "y", "f"], args.format),
                            )
                        }
                        singular => {
                            write_text(&args.out, &describe_singular(&singular, &args.out)?)
                        }
                    }
                }
                3 => {
                    let (region, _) = pdf::uncertainty_surface_qubit3(
                        &qubits[0], &qubits[1], &qubits[2],
                    )?;
                    let SupportRegion::UncertaintySurface3(surface) = &region else {
                        unreachable!()
                    };
                    let doc = json!({
                        "variant": "uncertainty_surface",
                        "centers": surface.centers(),
                        "norms": surface.norms(),
                    });
                    let mut text = serde_json::to_string_pretty(&doc).expect("plain data");
                    text.push('\n');
                    write_text(&args.out, &text)
                }
                n => Err(Error::InvalidObservable(format!(
                    "joint-unc takes 2 or 3 qubit observables, got {n}"
                ))),
            }
        }
        PdfKind::ExpExp2 | PdfKind::ExpStd => {
            expect_axes(2)?;
            let spec = spectrum_of_input(&entries[0])?;
            let density = match (args.kind, spec.dim()) {
                (PdfKind::ExpExp2, 3) => pdf::joint_exp_exp2_qutrit(&spec)?,
                (PdfKind::ExpExp2, 4) => pdf::joint_exp_exp2_d4(&spec)?,
                (PdfKind::ExpStd, 3) => pdf::joint_exp_std_qutrit(&spec)?,
                (PdfKind::ExpStd, 4) => pdf::joint_exp_std_d4(&spec)?,
                (_, d) => {
                    return Err(Error::UnsupportedDimension {
                        dim: d,
                        details: "the (⟨A⟩, ⟨A²⟩) and (⟨A⟩, ΔA) joint densities exist \
                                  for d = 3 and d = 4"
                            .into(),
                    })
                }
            };
            let axes = grid.unwrap_or_else(|| default_axes_2d(&density, 100));
            let header = if args.kind == PdfKind::ExpExp2 {
                ["r", "s", "f"]
            } else {
                ["r", "x", "f"]
            };
            write_text(&args.out, &grid_2d(&density, &axes, header, args.format))
        }
    }
}

fn run_min(args: &MinArgs) -> Result<(), Error> {
    let objective = match args.objective.as_str() {
        "sum-sq" => Objective::SumOfVariances,
        "sum" => Objective::SumOfStdDevs,
        other => {
            return Err(Error::InvalidObservable(format!(
                "unknown objective {other:?} (expected sum-sq or sum)"
            )))
        }
    };
    let entries = collect_observables(&args.inputs)?;
    let all_qubit: Result<Vec<QubitObservable>, Error> = qubits_from(&entries);
    let doc = match all_qubit {
        Ok(qubits) => {
            let res = minimize(&objective, &qubits)?;
            json!({
                "minimum": res.minimum,
                "argmin": res.argmin_uncertainties,
                "witness_bloch": res.witness_state.bloch_vector()?,
                "iterations": res.iterations,
                "converged": res.converged,
                "search": "bloch-lattice",
            })
        }
        Err(_) => {
            let observables: Vec<HermitianObservable> = entries
                .iter()
                .map(|e| e.to_observable())
                .collect::<Result<_, _>>()?;
            let res = minimize_heuristic(&objective, &observables, args.restarts, args.seed)?;
            let amps: Vec<Vec<f64>> = res
                .witness_state
                .amplitudes()
                .iter()
                .map(|z| vec![z.re, z.im])
                .collect();
            json!({
                "minimum": res.minimum,
                "argmin": res.argmin_uncertainties,
                "witness_amplitudes": amps,
                "iterations": res.iterations,
                "converged": res.converged,
                "search": "heuristic-restarts",
            })
        }
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("plain data");
    text.push('\n');
    write_text(&args.out, &text)
}

fn run_verify(args: &VerifyArgs) -> Result<bool, Error> {
    if args.suite != "default" {
        // Unknown suite names are usage errors (exit 2), handled by main.
        return Err(Error::InvalidObservable(format!(
            "unknown suite {:?}; available: default",
            args.suite
        )));
    }
    let n_2d = args.n.saturating_mul(4);
    let n_slack = (args.n / 10).max(1_000);
    let reports = verify::default_suite(args.seed, args.n, n_2d, n_slack, args.bins)?;
    let mut text = serde_json::to_string_pretty(&reports).expect("reports serialize");
    text.push('\n');
    write_text(&args.out, &text)?;
    Ok(reports.iter().all(|r| r.passed))
}

fn run_figures(args: &FiguresArgs) -> Result<(), Error> {
    let which: FigureId = args.which.parse()?;
    let bundle = figure_data(which)?;
    match &args.out {
        None => {
            let mut text = String::new();
            for (name, table) in &bundle.tables {
                text.push_str(&format!("# file: {name}\n"));
                text.push_str(&table.to_csv_string());
            }
            write_text(&None, &text)
        }
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .map_err(|e| Error::InvalidObservable(format!("{}: {e}", dir.display())))?;
            for (name, table) in &bundle.tables {
                let path = dir.join(name);
                std::fs::write(&path, table.to_csv_string())
                    .map_err(|e| Error::InvalidObservable(format!("{}: {e}", path.display())))?;
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Pdf(args) => run_pdf(args).map(|()| ExitCode::SUCCESS),
        Command::Region {
            action: RegionAction::Min(args),
        }
        | Command::Min(args) => run_min(args).map(|()| ExitCode::SUCCESS),
        Command::Verify(args) => match run_verify(args) {
            Ok(true) => Ok(ExitCode::SUCCESS),
            Ok(false) => Ok(ExitCode::FAILURE),
            Err(e @ Error::InvalidObservable(_)) if e.to_string().contains("unknown suite") => {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            Err(e) => Err(e),
        },
        Command::Figures(args) => run_figures(args).map(|()| ExitCode::SUCCESS),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
