//! Reproducible figure data: support-region boundaries in the (⟨A⟩, ΔA)
//! plane for the built-in spectra (1, 3, 9) and (1, 3, 9, 27), and the
//! marginal uncertainty-density curves for the same spectra. Output is
//! plain CSV; plotting is left to external tools.

use crate::error::{Error, Result};
use crate::observables::Spectrum;
use crate::pdf;

/// Built-in figure identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    /// Support boundary, spectrum (1, 3, 9).
    Fig1a,
    /// Support boundary, spectrum (1, 3, 9, 27).
    Fig1b,
    /// Uncertainty density curve, spectrum (1, 3, 9).
    Fig2a,
    /// Uncertainty density curve, spectrum (1, 3, 9, 27).
    Fig2b,
}

impl std::str::FromStr for FigureId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1a" => Ok(FigureId::Fig1a),
            "fig1b" => Ok(FigureId::Fig1b),
            "fig2a" => Ok(FigureId::Fig2a),
            "fig2b" => Ok(FigureId::Fig2b),
            other => Err(Error::InvalidObservable(format!(
                "unknown figure id {other:?} (expected fig1a, fig1b, fig2a or fig2b)"
            ))),
        }
    }
}

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            FigureId::Fig1a => "fig1a",
            FigureId::Fig1b => "fig1b",
            FigureId::Fig2a => "fig2a",
            FigureId::Fig2b => "fig2b",
        }
    }

    /// The spectrum each figure is built from.
    pub fn spectrum(self) -> Spectrum {
        match self {
            FigureId::Fig1a | FigureId::Fig2a => Spectrum::new(vec![1.0, 3.0, 9.0]).unwrap(),
            FigureId::Fig1b | FigureId::Fig2b => {
                Spectrum::new(vec![1.0, 3.0, 9.0, 27.0]).unwrap()
            }
        }
    }
}

/// Grid points per boundary segment / density curve.
pub const FIGURE_GRID_POINTS: usize = 2000;

/// A small CSV table of f64 columns (values may be infinite; those are
/// emitted as the literal token `inf`).
#[derive(Debug, Clone, PartialEq)]
pub struct CsvTable {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl CsvTable {
    pub fn to_csv_string(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.headers.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|&v| crate::fmt_sig(v)).collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

/// One named table per output file.
#[derive(Debug, Clone)]
pub struct FigureBundle {
    pub name: &'static str,
    pub tables: Vec<(String, CsvTable)>,
}

/// Builds the CSV bundle for a figure. Boundary figures carry one table
/// with columns `segment,r,x` (segment 0 is the outer arc, segments
/// 1..d−1 the lower arcs); density figures carry one table with columns
/// `x,f`.
pub fn figure_data(which: FigureId) -> Result<FigureBundle> {
    let spec = which.spectrum();
    match which {
        FigureId::Fig1a | FigureId::Fig1b => {
            let (_, v_region) = pdf::support_regions(&spec)?;
            let polylines = v_region.boundary_polylines(FIGURE_GRID_POINTS);
            let mut rows = Vec::new();
            for (segment, line) in polylines.iter().enumerate() {
                for &(r, x) in line {
                    rows.push(vec![segment as f64, r, x]);
                }
            }
            Ok(FigureBundle {
                name: which.name(),
                tables: vec![(
                    format!("{}_boundary.csv", which.name()),
                    CsvTable {
                        headers: vec!["segment".into(), "r".into(), "x".into()],
                        rows,
                    },
                )],
            })
        }
        FigureId::Fig2a | FigureId::Fig2b => {
            let pdf1 = match which {
                FigureId::Fig2a => pdf::pdf_uncertainty_qutrit(&spec)?,
                _ => pdf::pdf_uncertainty_d4(&spec)?,
            };
            let hi = pdf1.support_hi();
            let n = FIGURE_GRID_POINTS;
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    let x = hi * i as f64 / (n - 1) as f64;
                    vec![x, pdf1.density(x)]
                })
                .collect();
            Ok(FigureBundle {
                name: which.name(),
                tables: vec![(
                    format!("{}_pdf.csv", which.name()),
                    CsvTable {
                        headers: vec!["x".into(), "f".into()],
                        rows,
                    },
                )],
            })
        }
    }
}
