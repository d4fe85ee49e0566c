//! Nodal-count sequences and the distribution of `xi = nu / N`.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{NodalError, Result};
use crate::modes::{modes_in_range, spectral_count, ModePair, SpectrumBlocks, MAX_LAMBDA};
use crate::recursion::nodal_count;

/// Eigenvalue width of the blocks evaluated in parallel.
pub const DEFAULT_BLOCK: u64 = 1 << 14;
pub const DEFAULT_BINS: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NodalRow {
    #[serde(rename = "N")]
    pub index: u64,
    pub m: u64,
    pub n: u64,
    pub lambda: u64,
    pub nu: u64,
    pub eta: u64,
    pub loops: u64,
    pub tiles: u64,
    pub xi: f64,
}

impl NodalRow {
    pub fn evaluate(index: u64, mode: ModePair) -> Result<Self> {
        let s = nodal_count(mode)?;
        Ok(NodalRow {
            index,
            m: mode.m(),
            n: mode.n(),
            lambda: mode.lambda(),
            nu: s.nu,
            eta: s.eta,
            loops: s.loops,
            tiles: s.tiles,
            xi: s.nu as f64 / index as f64,
        })
    }

    pub fn recombined_nu(&self) -> u64 {
        self.tiles * (1 + self.eta / 2 + self.loops)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NodalSequence {
    pub max_lambda: u64,
    pub rows: Vec<NodalRow>,
}

impl NodalSequence {
    /// First row whose `nu` exceeds its index, if any.
    pub fn courant_violation(&self) -> Option<&NodalRow> {
        self.rows.iter().find(|r| r.nu > r.index)
    }
}

fn evaluate_block(first: u64, modes: &[ModePair]) -> Result<Vec<NodalRow>> {
    modes
        .iter()
        .zip(first..)
        .map(|(&mode, index)| NodalRow::evaluate(index, mode))
        .collect()
}

/// Streams rows in spectral order to `sink`, evaluating up to
/// `rayon::current_num_threads()` eigenvalue blocks at a time.
pub fn for_each_row<F>(max_lambda: u64, block: u64, mut sink: F) -> Result<()>
where
    F: FnMut(&NodalRow) -> Result<()>,
{
    let mut blocks = SpectrumBlocks::new(max_lambda, block)?;
    let batch = rayon::current_num_threads().max(1) * 2;
    loop {
        let pending: Vec<(u64, Vec<ModePair>)> = blocks.by_ref().take(batch).collect();
        if pending.is_empty() {
            return Ok(());
        }
        let evaluated: Vec<Vec<NodalRow>> = pending
            .par_iter()
            .map(|(first, modes)| evaluate_block(*first, modes))
            .collect::<Result<_>>()?;
        for row in evaluated.iter().flatten() {
            sink(row)?;
        }
    }
}

pub fn nodal_sequence(max_lambda: u64) -> Result<NodalSequence> {
    let mut rows = Vec::with_capacity(spectral_count(max_lambda.min(MAX_LAMBDA)) as usize);
    for_each_row(max_lambda, DEFAULT_BLOCK, |r| {
        rows.push(*r);
        Ok(())
    })?;
    Ok(NodalSequence { max_lambda, rows })
}

pub const SEQUENCE_HEADER: [&str; 9] =
    ["N", "m", "n", "lambda", "nu", "eta", "loops", "tiles", "xi"];

/// Writes the sequence CSV without holding it in memory.
pub fn write_sequence_csv<W: Write>(max_lambda: u64, out: W) -> Result<u64> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    w.write_record(SEQUENCE_HEADER)?;
    let mut count = 0;
    for_each_row(max_lambda, DEFAULT_BLOCK, |r| {
        w.write_record(&[
            r.index.to_string(),
            r.m.to_string(),
            r.n.to_string(),
            r.lambda.to_string(),
            r.nu.to_string(),
            r.eta.to_string(),
            r.loops.to_string(),
            r.tiles.to_string(),
            r.xi.to_string(),
        ])?;
        count += 1;
        Ok(())
    })?;
    w.flush()?;
    Ok(count)
}

/// Tile-count classes used to split each histogram bin.
pub const TILE_CLASSES: [(&str, u64, u64); 7] = [
    ("tiles_1", 1, 1),
    ("tiles_2", 2, 2),
    ("tiles_4_9", 4, 9),
    ("tiles_10_99", 10, 99),
    ("tiles_100_999", 100, 999),
    ("tiles_1000_9999", 1000, 9999),
    ("tiles_10000_plus", 10000, u64::MAX),
];

pub fn tile_class(tiles: u64) -> usize {
    TILE_CLASSES
        .iter()
        .position(|&(_, lo, hi)| (lo..=hi).contains(&tiles))
        // 3 tiles never occurs; lump it with the small classes if it did.
        .unwrap_or(2)
}

/// One sample entering a histogram.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct XiSample {
    pub lambda: u64,
    pub xi: f64,
    pub tiles: u64,
}

impl From<&NodalRow> for XiSample {
    fn from(r: &NodalRow) -> Self {
        XiSample {
            lambda: r.lambda,
            xi: r.xi,
            tiles: r.tiles,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DistributionHistogram {
    pub lambda_low: u64,
    pub lambda_high: u64,
    pub g: f64,
    /// `bins + 1` uniform edges over `[0, xi_max]`.
    pub bin_edges: Vec<f64>,
    pub counts: Vec<u64>,
    /// Per bin, counts split by [`TILE_CLASSES`].
    pub strata: Vec<[u64; 7]>,
    pub total: u64,
}

impl DistributionHistogram {
    pub fn bins(&self) -> usize {
        self.counts.len()
    }

    /// Bin masses normalised to one.
    pub fn mass(&self) -> Vec<f64> {
        let t = self.total as f64;
        self.counts.iter().map(|&c| c as f64 / t).collect()
    }

    /// Adds another histogram on the same bin edges.
    pub fn merge(&mut self, other: &DistributionHistogram) -> Result<()> {
        if self.bin_edges != other.bin_edges {
            return Err(NodalError::InvalidParameter(
                "histograms use different bins".into(),
            ));
        }
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        for (a, b) in self.strata.iter_mut().zip(&other.strata) {
            for k in 0..7 {
                a[k] += b[k];
            }
        }
        self.total += other.total;
        self.lambda_low = self.lambda_low.min(other.lambda_low);
        self.lambda_high = self.lambda_high.max(other.lambda_high);
        self.g = self.lambda_high as f64 / self.lambda_low as f64 - 1.0;
        Ok(())
    }

    /// Bins that are strict local maxima of the counts, excluding the first
    /// and last bin, with mass above `fraction` of the largest bin.
    pub fn interior_maxima(&self, fraction: f64) -> Vec<usize> {
        let peak = self.counts.iter().copied().max().unwrap_or(0) as f64;
        let c = &self.counts;
        (1..c.len().saturating_sub(1))
            .filter(|&i| c[i] > c[i - 1] && c[i] > c[i + 1] && c[i] as f64 > fraction * peak)
            .collect()
    }
}

/// Histogram of the samples with `low <= lambda <= high` on `bins` uniform
/// bins over `[0, xi_max]`. `xi_max` defaults to the largest `xi` present.
pub fn histogram(
    samples: &[XiSample],
    low: u64,
    high: u64,
    bins: usize,
    xi_max: Option<f64>,
) -> Result<DistributionHistogram> {
    if bins == 0 {
        return Err(NodalError::InvalidParameter("need at least one bin".into()));
    }
    let window: Vec<&XiSample> = samples
        .iter()
        .filter(|s| (low..=high).contains(&s.lambda))
        .collect();
    if window.is_empty() {
        return Err(NodalError::EmptyWindow { low, high });
    }
    let top = match xi_max {
        Some(v) if v > 0.0 => v,
        Some(v) => return Err(NodalError::NonPositive(v)),
        None => window.iter().map(|s| s.xi).fold(0.0, f64::max),
    };
    let width = top / bins as f64;
    let bin_edges = (0..=bins).map(|i| top * i as f64 / bins as f64).collect();
    let mut counts = vec![0u64; bins];
    let mut strata = vec![[0u64; 7]; bins];
    for s in &window {
        let b = ((s.xi / width) as usize).min(bins - 1);
        counts[b] += 1;
        strata[b][tile_class(s.tiles)] += 1;
    }
    Ok(DistributionHistogram {
        lambda_low: low,
        lambda_high: high,
        g: high as f64 / low as f64 - 1.0,
        bin_edges,
        counts,
        strata,
        total: window.len() as u64,
    })
}

fn window_high(lambda: u64, g: f64) -> Result<u64> {
    if !(g > 0.0) || !g.is_finite() {
        return Err(NodalError::NonPositive(g));
    }
    Ok(((1.0 + g) * lambda as f64).floor() as u64)
}

/// `P_{lambda,g}` from an already computed sequence.
pub fn distribution(
    seq: &NodalSequence,
    lambda: u64,
    g: f64,
    bins: usize,
) -> Result<DistributionHistogram> {
    let high = window_high(lambda, g)?;
    if high > seq.max_lambda {
        return Err(NodalError::WindowOutOfRange {
            low: lambda,
            high,
            max: seq.max_lambda,
        });
    }
    let samples: Vec<XiSample> = seq.rows.iter().map(XiSample::from).collect();
    histogram(&samples, lambda, high, bins, None)
}

/// Samples of the window `[lambda, (1 + g) lambda]` computed directly,
/// without the rows below `lambda`.
pub fn window_samples(lambda: u64, g: f64) -> Result<Vec<XiSample>> {
    let high = window_high(lambda, g)?;
    if lambda < 5 {
        return Err(NodalError::CutoffTooSmall(lambda));
    }
    if high > MAX_LAMBDA {
        return Err(NodalError::CutoffTooLarge(high));
    }
    let first = spectral_count(lambda - 1) + 1;
    let modes = modes_in_range(lambda, high);
    let chunks: Vec<(u64, &[ModePair])> = modes
        .chunks(4096)
        .scan(first, |next, c| {
            let start = *next;
            *next += c.len() as u64;
            Some((start, c))
        })
        .collect();
    let rows: Vec<Vec<NodalRow>> = chunks
        .par_iter()
        .map(|(start, c)| evaluate_block(*start, c))
        .collect::<Result<_>>()?;
    Ok(rows.iter().flatten().map(XiSample::from).collect())
}

/// `P_{lambda,g}` evaluated on the window alone.
pub fn window_distribution(lambda: u64, g: f64, bins: usize) -> Result<DistributionHistogram> {
    let high = window_high(lambda, g)?;
    histogram(&window_samples(lambda, g)?, lambda, high, bins, None)
}

/// Running sum of the normalised bin masses.
pub fn integrated_distribution(h: &DistributionHistogram) -> Vec<f64> {
    h.mass()
        .into_iter()
        .scan(0.0, |acc, m| {
            *acc += m;
            Some(*acc)
        })
        .collect()
}

pub fn write_histogram_csv<W: Write>(h: &DistributionHistogram, out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out);
    let mut header = vec!["bin_low", "bin_high", "mass", "integrated"];
    header.extend(TILE_CLASSES.iter().map(|c| c.0));
    w.write_record(&header)?;
    let integrated = integrated_distribution(h);
    for (i, mass) in h.mass().into_iter().enumerate() {
        let mut rec = vec![
            h.bin_edges[i].to_string(),
            h.bin_edges[i + 1].to_string(),
            mass.to_string(),
            integrated[i].to_string(),
        ];
        rec.extend(h.strata[i].iter().map(u64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
