//! Seeded, reproducible sampling of Haar-distributed pure states and
//! empirical estimation of the statistics whose closed-form densities the
//! rest of the library evaluates.
//!
//! A state is drawn as d i.i.d. standard complex Gaussians, normalized;
//! the result is unitarily invariant by construction. Sampling is chunked
//! into `n_workers` deterministic per-worker streams (ChaCha streams keyed
//! by worker index), so a run is bit-identical for a fixed
//! `(seed, n_workers)` pair no matter how the chunks are scheduled.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use std::io::Write;

use crate::error::{Error, Result};
use crate::observables::{HermitianObservable, PureState};

/// Default number of RNG streams. Fixed (not machine-dependent) so default
/// runs reproduce across hosts.
pub const DEFAULT_WORKERS: usize = 4;

/// Worker count used by [`SamplerConfig::new`]: the `UNC_PDF_THREADS`
/// environment variable when set, [`DEFAULT_WORKERS`] otherwise. The
/// worker count is part of the reproducibility key, so overriding it
/// changes the sample stream deterministically.
pub fn default_workers() -> usize {
    std::env::var("UNC_PDF_THREADS")
        .ok()
        .and_then(|s| s.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or(DEFAULT_WORKERS)
}

/// Sampling plan: RNG seed, Hilbert-space dimension, sample count and the
/// number of deterministic worker streams.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SamplerConfig {
    pub seed: u64,
    pub dim: usize,
    pub n_samples: usize,
    pub n_workers: usize,
}

impl SamplerConfig {
    pub fn new(seed: u64, dim: usize, n_samples: usize) -> Self {
        Self {
            seed,
            dim,
            n_samples,
            n_workers: default_workers(),
        }
    }

    pub fn with_workers(mut self, n_workers: usize) -> Self {
        self.n_workers = n_workers.max(1);
        self
    }

    fn validate(&self) -> Result<()> {
        if self.dim < 1 {
            return Err(Error::DimTooSmall {
                min: 1,
                got: self.dim,
            });
        }
        if self.n_samples < 1 || self.n_workers < 1 {
            return Err(Error::InvalidObservable(
                "n_samples and n_workers must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

fn worker_rng(seed: u64, worker: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(worker as u64);
    rng
}

fn chunk_sizes(n_samples: usize, n_workers: usize) -> Vec<usize> {
    let base = n_samples / n_workers;
    let rem = n_samples % n_workers;
    (0..n_workers)
        .map(|w| base + usize::from(w < rem))
        .collect()
}

fn draw_state(rng: &mut ChaCha8Rng, dim: usize) -> PureState {
    let mut v = DVector::<Complex64>::zeros(dim);
    loop {
        for k in 0..dim {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            v[k] = Complex64::new(re, im);
        }
        // A zero draw has probability 0; guard against it anyway.
        if v.iter().any(|z| z.norm_sqr() > 0.0) {
            break;
        }
    }
    PureState::from_unnormalized(v).expect("nonzero vector normalizes")
}

/// Applies `f` to every sample and returns the results in stream order
/// (worker 0's chunk first, then worker 1's, ...). Chunks run in parallel;
/// the concatenation order is fixed, so the output is deterministic.
pub fn map_samples<T, F>(cfg: &SamplerConfig, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(&PureState) -> T + Sync,
{
    cfg.validate()?;
    let sizes = chunk_sizes(cfg.n_samples, cfg.n_workers);
    let chunks: Vec<Vec<T>> = sizes
        .par_iter()
        .enumerate()
        .map(|(w, &count)| {
            let mut rng = worker_rng(cfg.seed, w);
            let mut out = Vec::with_capacity(count);
            for _ in 0..count {
                out.push(f(&draw_state(&mut rng, cfg.dim)));
            }
            out
        })
        .collect();
    Ok(chunks.into_iter().flatten().collect())
}

/// Materialized stream of Haar states.
pub fn sample_pure(cfg: &SamplerConfig) -> Result<Vec<PureState>> {
    map_samples(cfg, |psi| psi.clone())
}

/// Which per-sample statistic to record for an observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistic {
    /// ⟨A⟩_ψ
    Expectation,
    /// Δ_ψA
    StdDev,
    /// ⟨A²⟩_ψ
    SecondMoment,
}

/// An observable prepared for fast repeated evaluation (A and A² cached).
#[derive(Debug, Clone)]
pub struct PreparedObservable {
    matrix: nalgebra::DMatrix<Complex64>,
}

impl PreparedObservable {
    pub fn new(obs: &HermitianObservable) -> Self {
        Self {
            matrix: obs.matrix().clone(),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// (⟨A⟩, ⟨A²⟩) in one pass; ⟨A²⟩ = ‖Aψ‖².
    pub fn moments(&self, psi: &PureState) -> (f64, f64) {
        let a_psi = &self.matrix * psi.amplitudes();
        let mean: f64 = psi
            .amplitudes()
            .iter()
            .zip(a_psi.iter())
            .map(|(c, d)| (c.conj() * d).re)
            .sum();
        let second: f64 = a_psi.iter().map(|z| z.norm_sqr()).sum();
        (mean, second)
    }

    pub fn statistic(&self, psi: &PureState, stat: Statistic) -> f64 {
        let (mean, second) = self.moments(psi);
        match stat {
            Statistic::Expectation => mean,
            Statistic::SecondMoment => second,
            Statistic::StdDev => (second - mean * mean).max(0.0).sqrt(),
        }
    }
}

/// A dense row-major table of real tuples, one row per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleTable {
    columns: usize,
    data: Vec<f64>,
}

impl SampleTable {
    pub fn from_rows(columns: usize, rows: Vec<Vec<f64>>) -> Self {
        let mut data = Vec::with_capacity(rows.len() * columns);
        for row in rows {
            debug_assert_eq!(row.len(), columns);
            data.extend(row);
        }
        Self { columns, data }
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.columns
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.columns)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        assert!(j < self.columns);
        self.data
            .iter()
            .skip(j)
            .step_by(self.columns)
            .copied()
            .collect()
    }

    /// One tuple per row, 12 significant digits, `\n` line endings.
    pub fn write_csv<W: Write>(&self, mut w: W, headers: &[&str]) -> std::io::Result<()> {
        debug_assert_eq!(headers.len(), self.columns);
        writeln!(w, "{}", headers.join(","))?;
        for row in self.rows() {
            let line: Vec<String> = row.iter().map(|&v| crate::fmt_sig(v)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Per-sample tuples of the same statistic across several observables, in
/// declaration order.
pub fn sample_statistics(
    observables: &[HermitianObservable],
    cfg: &SamplerConfig,
    stat: Statistic,
) -> Result<SampleTable> {
    let stats = vec![stat; observables.len()];
    sample_mixed_statistics(observables, &stats, cfg)
}

/// Like [`sample_statistics`] but with a per-observable statistic, so tuples
/// such as (⟨A⟩, ΔA) of one observable can be drawn from the same states.
pub fn sample_mixed_statistics(
    observables: &[HermitianObservable],
    stats: &[Statistic],
    cfg: &SamplerConfig,
) -> Result<SampleTable> {
    assert_eq!(observables.len(), stats.len());
    if observables.is_empty() {
        return Err(Error::InvalidObservable("no observables given".into()));
    }
    for obs in observables {
        if obs.dim() != cfg.dim {
            return Err(Error::DimMismatch {
                expected: cfg.dim,
                got: obs.dim(),
            });
        }
    }
    let prepared: Vec<PreparedObservable> =
        observables.iter().map(PreparedObservable::new).collect();
    let k = prepared.len();
    cfg.validate()?;
    let sizes = chunk_sizes(cfg.n_samples, cfg.n_workers);
    let chunks: Vec<Vec<f64>> = sizes
        .par_iter()
        .enumerate()
        .map(|(w, &count)| {
            let mut rng = worker_rng(cfg.seed, w);
            let mut out = Vec::with_capacity(count * k);
            for _ in 0..count {
                let psi = draw_state(&mut rng, cfg.dim);
                for (p, &s) in prepared.iter().zip(stats) {
                    out.push(p.statistic(&psi, s));
                }
            }
            out
        })
        .collect();
    Ok(SampleTable {
        columns: k,
        data: chunks.into_iter().flatten().collect(),
    })
}

/// 1D histogram over explicit bin edges. Bins are `[e_i, e_{i+1})`, with the
/// last bin closed; samples outside the edges land in `overflow`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram1D {
    edges: Vec<f64>,
    counts: Vec<u64>,
    total: u64,
    overflow: u64,
}

impl Histogram1D {
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn overflow(&self) -> u64 {
        self.overflow
    }

    /// Empirical density value of bin i (count / (total · width)).
    pub fn density(&self, i: usize) -> f64 {
        let width = self.edges[i + 1] - self.edges[i];
        self.counts[i] as f64 / (self.total as f64 * width)
    }
}

fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 || edges.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::NonMonotoneEdges);
    }
    Ok(())
}

fn bin_index(edges: &[f64], x: f64) -> Option<usize> {
    let n = edges.len() - 1;
    if x < edges[0] || x > edges[n] {
        return None;
    }
    if x == edges[n] {
        return Some(n - 1);
    }
    // First edge strictly greater than x, minus one.
    let idx = edges.partition_point(|&e| e <= x);
    Some(idx - 1)
}

/// Bins `samples` into `edges`.
pub fn histogram1d(samples: &[f64], edges: &[f64]) -> Result<Histogram1D> {
    check_edges(edges)?;
    let mut counts = vec![0u64; edges.len() - 1];
    let mut overflow = 0u64;
    for &x in samples {
        match bin_index(edges, x) {
            Some(i) => counts[i] += 1,
            None => overflow += 1,
        }
    }
    Ok(Histogram1D {
        edges: edges.to_vec(),
        counts,
        total: samples.len() as u64,
        overflow,
    })
}

/// 2D histogram with row-major (x-bin, y-bin) counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram2D {
    xedges: Vec<f64>,
    yedges: Vec<f64>,
    counts: Vec<u64>,
    total: u64,
    overflow: u64,
}

impl Histogram2D {
    pub fn xedges(&self) -> &[f64] {
        &self.xedges
    }

    pub fn yedges(&self) -> &[f64] {
        &self.yedges
    }

    pub fn count(&self, i: usize, j: usize) -> u64 {
        self.counts[i * (self.yedges.len() - 1) + j]
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn overflow(&self) -> u64 {
        self.overflow
    }
}

/// Bins `(x, y)` pairs into the edge grid.
pub fn histogram2d(samples: &[(f64, f64)], xedges: &[f64], yedges: &[f64]) -> Result<Histogram2D> {
    check_edges(xedges)?;
    check_edges(yedges)?;
    let ny = yedges.len() - 1;
    let mut counts = vec![0u64; (xedges.len() - 1) * ny];
    let mut overflow = 0u64;
    for &(x, y) in samples {
        match (bin_index(xedges, x), bin_index(yedges, y)) {
            (Some(i), Some(j)) => counts[i * ny + j] += 1,
            _ => overflow += 1,
        }
    }
    Ok(Histogram2D {
        xedges: xedges.to_vec(),
        yedges: yedges.to_vec(),
        counts,
        total: samples.len() as u64,
        overflow,
    })
}

/// `n + 1` uniform edges spanning `[lo, hi]`.
pub fn uniform_edges(lo: f64, hi: f64, nbins: usize) -> Vec<f64> {
    assert!(nbins >= 1 && hi > lo);
    (0..=nbins)
        .map(|i| lo + (hi - lo) * i as f64 / nbins as f64)
        .collect()
}
