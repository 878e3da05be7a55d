//! Closed-form probability densities of expectation values and
//! uncertainties (standard deviations) of quantum observables over
//! Haar-random pure states, the uncertainty regions those densities are
//! supported on, minimizers yielding state-independent uncertainty bounds,
//! and a seeded Monte Carlo harness that verifies every density against an
//! independent sampling oracle.

pub mod error;
pub mod figures;
pub mod haar;
pub mod observables;
pub mod pdf;
pub mod quad;
pub mod regions;
pub mod simplex;
pub mod verify;

pub use error::{Error, Result};

/// Formats a value with 12 significant digits for CSV output; infinities
/// become the literal token `inf` / `-inf` so divergent density endpoints
/// survive in plot data without poisoning numeric columns.
pub fn fmt_sig(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.11e}")
    }
}
