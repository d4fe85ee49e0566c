//! Cumulative loop counts, their smooth parts, and Fourier peaks at
//! periodic-orbit lengths.
//!
//! `C(k)` sums the loop counts of all eigenfunctions with `sqrt(lambda) <= k`
//! and `Q(N)` sums them over the first `N` eigenfunctions, plotted against the
//! Weyl wavenumber `q = sqrt(8N / pi)`. After a polynomial smooth part is
//! subtracted, the power spectrum of the remainder peaks near lengths of
//! periodic billiard orbits.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{NodalError, Result};
use crate::modes::weyl_index;
use crate::stats::NodalRow;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    /// `C(k)`.
    Loops,
    /// `Q(N)` against `q`.
    LoopsByIndex,
    /// Cumulative boundary intersections against `k`.
    BoundaryEta,
}

impl CurveKind {
    pub fn variable(self) -> Variable {
        match self {
            CurveKind::LoopsByIndex => Variable::Q,
            _ => Variable::K,
        }
    }

    /// Smooth-part degree: quartic in `k`, quadratic in `N`.
    pub fn default_degree(self) -> usize {
        match self {
            CurveKind::LoopsByIndex => 2,
            _ => 4,
        }
    }

    /// Contribution of one eigenfunction. Loops are counted in every tile;
    /// the boundary is met `m + n - 3` times whether or not the mode tiles.
    fn weight(self, row: &NodalRow) -> u64 {
        match self {
            CurveKind::BoundaryEta => row.m + row.n - 3,
            _ => row.tiles * row.loops,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Variable {
    K,
    Q,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CumulativeCurve {
    pub kind: CurveKind,
    pub variable: Variable,
    pub start: f64,
    pub step: f64,
    pub values: Vec<u64>,
}

impl CumulativeCurve {
    pub fn x(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn xs(&self) -> Vec<f64> {
        (0..self.values.len()).map(|i| self.x(i)).collect()
    }

    pub fn end(&self) -> f64 {
        self.x(self.values.len().saturating_sub(1))
    }
}

fn grid_len(start: f64, end: f64, step: f64) -> Result<usize> {
    if !(step > 0.0) {
        return Err(NodalError::NonPositive(step));
    }
    if !(start >= 0.0) || !(end > start) {
        return Err(NodalError::InvalidParameter(format!(
            "bad grid [{start}, {end}]"
        )));
    }
    Ok(((end - start) / step + 1e-9).floor() as usize + 1)
}

/// Samples a cumulative count on `start, start + step, ..., <= end`.
///
/// `rows` must be in spectral order and complete up to the eigenvalue that
/// the grid end corresponds to.
pub fn cumulative(
    kind: CurveKind,
    rows: &[NodalRow],
    max_lambda: u64,
    start: f64,
    end: f64,
    step: f64,
) -> Result<CumulativeCurve> {
    let len = grid_len(start, end, step)?;
    let last = start + (len - 1) as f64 * step;
    let mut values = Vec::with_capacity(len);
    let mut acc = 0u64;
    let mut next = 0usize;
    match kind.variable() {
        Variable::K => {
            let needed = (last * last).floor() as u64;
            if needed > max_lambda {
                return Err(NodalError::GridOutOfRange {
                    requested: needed,
                    available: max_lambda,
                });
            }
            for i in 0..len {
                let bound = (start + i as f64 * step).powi(2);
                while next < rows.len() && rows[next].lambda as f64 <= bound {
                    acc += kind.weight(&rows[next]);
                    next += 1;
                }
                values.push(acc);
            }
        }
        Variable::Q => {
            let needed = weyl_index(last).floor() as u64;
            if needed > rows.len() as u64 {
                return Err(NodalError::GridOutOfRange {
                    requested: needed,
                    available: rows.len() as u64,
                });
            }
            for i in 0..len {
                let index = weyl_index(start + i as f64 * step).floor() as u64;
                while next < rows.len() && rows[next].index <= index {
                    acc += kind.weight(&rows[next]);
                    next += 1;
                }
                values.push(acc);
            }
        }
    }
    Ok(CumulativeCurve {
        kind,
        variable: kind.variable(),
        start,
        step,
        values,
    })
}

/// Polynomial in `t = (x - center) / scale`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Polynomial {
    pub center: f64,
    pub scale: f64,
    pub scaled: Vec<f64>,
}

impl Polynomial {
    pub fn eval(&self, x: f64) -> f64 {
        let t = (x - self.center) / self.scale;
        self.scaled.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let t = (x - self.center) / self.scale;
        let d = self
            .scaled
            .iter()
            .enumerate()
            .skip(1)
            .rev()
            .fold(0.0, |acc, (j, c)| acc * t + j as f64 * c);
        d / self.scale
    }

    /// Coefficients of `1, x, x^2, ...`.
    pub fn monomial(&self) -> Vec<f64> {
        let deg = self.scaled.len();
        let mut out = vec![0.0; deg];
        // c_j ((x - c) / s)^j expanded binomially.
        for (j, &cj) in self.scaled.iter().enumerate() {
            let f = cj / self.scale.powi(j as i32);
            let mut binom = 1.0;
            for (i, o) in out.iter_mut().enumerate().take(j + 1) {
                *o += f * binom * (-self.center).powi((j - i) as i32);
                binom = binom * (j - i) as f64 / (i + 1) as f64;
            }
        }
        out
    }
}

/// Largest acceptable ratio of extreme singular values.
pub const MAX_CONDITION: f64 = 1e10;

/// Least-squares polynomial through `(xs, ys)` and the condition number of
/// the scaled design matrix.
pub fn poly_fit(xs: &[f64], ys: &[f64], degree: usize) -> Result<(Polynomial, f64)> {
    if xs.len() != ys.len() || xs.len() < 10 * degree.max(1) {
        return Err(NodalError::InvalidParameter(format!(
            "{} points is too few for degree {degree}",
            xs.len()
        )));
    }
    let (lo, hi) = xs
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| {
            (a.min(x), b.max(x))
        });
    let center = (lo + hi) / 2.0;
    let scale = ((hi - lo) / 2.0).max(f64::MIN_POSITIVE);
    let cols = degree + 1;
    let a = DMatrix::from_fn(xs.len(), cols, |i, j| {
        ((xs[i] - center) / scale).powi(j as i32)
    });
    let b = DVector::from_column_slice(ys);
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if condition > MAX_CONDITION {
        return Err(NodalError::IllConditioned(condition));
    }
    let sol = svd
        .solve(&b, 0.0)
        .map_err(|e| NodalError::InvalidParameter(e.to_string()))?;
    Ok((
        Polynomial {
            center,
            scale,
            scaled: sol.iter().copied().collect(),
        },
        condition,
    ))
}

/// Smooth part of a curve and the oscillatory remainder on its grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SmoothFit {
    pub degree: usize,
    /// Polynomial in `k` for curves over `k`, in `N = pi q^2 / 8` for `Q`.
    pub poly: Polynomial,
    pub condition: f64,
    /// First grid index used in the fit.
    pub fit_from: usize,
    pub smooth: Vec<f64>,
    pub residual: Vec<f64>,
}

/// Fraction of the grid at its low end left out of the fit.
pub const DEFAULT_SKIP: f64 = 0.1;

pub fn smooth_fit(curve: &CumulativeCurve, degree: usize, skip: f64) -> Result<SmoothFit> {
    if !(0.0..1.0).contains(&skip) {
        return Err(NodalError::InvalidParameter(format!(
            "skip fraction {skip}"
        )));
    }
    let fit_var = |x: f64| match curve.variable {
        Variable::K => x,
        Variable::Q => weyl_index(x),
    };
    let xs: Vec<f64> = curve.xs().into_iter().map(fit_var).collect();
    let ys: Vec<f64> = curve.values.iter().map(|&v| v as f64).collect();
    let fit_from = (skip * xs.len() as f64).floor() as usize;
    let (poly, condition) = poly_fit(&xs[fit_from..], &ys[fit_from..], degree)?;
    let smooth: Vec<f64> = xs.iter().map(|&x| poly.eval(x)).collect();
    let residual = ys.iter().zip(&smooth).map(|(y, s)| y - s).collect();
    Ok(SmoothFit {
        degree,
        poly,
        condition,
        fit_from,
        smooth,
        residual,
    })
}

/// Least-squares slope of `ln smooth` against `ln x` over the fitted part of
/// the grid, with `x` the curve's own abscissa.
pub fn log_log_slope(curve: &CumulativeCurve, fit: &SmoothFit) -> Result<f64> {
    let pts: Vec<(f64, f64)> = (fit.fit_from..curve.values.len())
        .map(|i| (curve.x(i), fit.smooth[i]))
        .collect();
    if pts.iter().any(|&(x, s)| !(x > 0.0 && s > 0.0)) {
        return Err(NodalError::InvalidParameter(
            "smooth part is not positive".into(),
        ));
    }
    let n = pts.len() as f64;
    let (sx, sy) = pts
        .iter()
        .fold((0.0, 0.0), |(a, b), &(x, s)| (a + x.ln(), b + s.ln()));
    let (mx, my) = (sx / n, sy / n);
    let (num, den) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, s)| {
        let dx = x.ln() - mx;
        (a + dx * (s.ln() - my), b + dx * dx)
    });
    Ok(num / den)
}

/// Uniform length grid `0, step, ..., <= max`.
pub fn length_grid(max: f64, step: f64) -> Result<Vec<f64>> {
    let len = grid_len(0.0, max, step)?;
    Ok((0..len).map(|i| i as f64 * step).collect())
}

pub const DEFAULT_LENGTH_MAX: f64 = 40.0;
pub const DEFAULT_LENGTH_STEP: f64 = 0.005;
pub const DEFAULT_PEAK_FACTOR: f64 = 5.0;
pub const DEFAULT_TOLERANCE: f64 = 0.05;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Peak {
    pub length: f64,
    pub power: f64,
    pub orbit: Option<Orbit>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerSpectrum {
    pub lengths: Vec<f64>,
    pub power: Vec<f64>,
    pub window: (f64, f64),
    /// Strongest first.
    pub peaks: Vec<Peak>,
    pub median: f64,
}

/// `sin^2` taper vanishing at both ends of the window.
pub fn hann(x: f64, x0: f64, x1: f64) -> f64 {
    (PI * (x - x0) / (x1 - x0)).sin().powi(2)
}

/// `|sum_i w(x_i) r(x_i) e^{-i l x_i} dx|^2` on every length `l`.
///
/// `min_length` is the shortest length of interest: its period `2 pi / l`
/// must fit into the window.
pub fn power_spectrum(
    xs: &[f64],
    residual: &[f64],
    lengths: &[f64],
    min_length: f64,
) -> Result<Vec<f64>> {
    if xs.len() != residual.len() || xs.len() < 2 {
        return Err(NodalError::InvalidParameter(
            "residual needs two or more samples".into(),
        ));
    }
    let (x0, x1) = (xs[0], xs[xs.len() - 1]);
    if !(min_length > 0.0) {
        return Err(NodalError::NonPositive(min_length));
    }
    if x1 - x0 < 2.0 * PI / min_length {
        return Err(NodalError::InvalidParameter(format!(
            "window [{x0}, {x1}] is shorter than the period {} of length {min_length}",
            2.0 * PI / min_length
        )));
    }
    let dx = (x1 - x0) / (xs.len() - 1) as f64;
    let weighted: Vec<f64> = xs
        .iter()
        .zip(residual)
        .map(|(&x, &r)| hann(x, x0, x1) * r * dx)
        .collect();
    Ok(lengths
        .par_iter()
        .map(|&l| {
            let (mut re, mut im) = (0.0, 0.0);
            for (&x, &w) in xs.iter().zip(&weighted) {
                let (s, c) = (l * x).sin_cos();
                re += w * c;
                im -= w * s;
            }
            re * re + im * im
        })
        .collect())
}

/// Tapered residual energy, `2 pi dx sum (w r)^2`: what the power integrates
/// to over one full period `2 pi / dx` of lengths.
pub fn windowed_energy(xs: &[f64], residual: &[f64]) -> f64 {
    let (x0, x1) = (xs[0], xs[xs.len() - 1]);
    let dx = (x1 - x0) / (xs.len() - 1) as f64;
    2.0 * PI
        * dx
        * xs.iter()
            .zip(residual)
            .map(|(&x, &r)| (hann(x, x0, x1) * r).powi(2))
            .sum::<f64>()
}

fn median(v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(f64::total_cmp);
    if s.is_empty() {
        0.0
    } else if s.len() % 2 == 1 {
        s[s.len() / 2]
    } else {
        (s[s.len() / 2 - 1] + s[s.len() / 2]) / 2.0
    }
}

/// Strict local maxima above `factor` times the median power, strongest
/// first. The endpoint `l = 0` is never a peak.
pub fn find_peaks(lengths: &[f64], power: &[f64], factor: f64) -> (Vec<Peak>, f64) {
    let med = median(power);
    let mut peaks: Vec<Peak> = (1..power.len().saturating_sub(1))
        .filter(|&i| power[i] > power[i - 1] && power[i] > power[i + 1] && power[i] > factor * med)
        .map(|i| Peak {
            length: lengths[i],
            power: power[i],
            orbit: None,
        })
        .collect();
    peaks.sort_by(|a, b| {
        b.power
            .total_cmp(&a.power)
            .then(a.length.total_cmp(&b.length))
    });
    (peaks, med)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum OrbitClass {
    /// Continuous family of length `2 pi sqrt(p^2 + q^2)`, `p >= q >= 0`.
    Family { p: u64, q: u64 },
    /// Isolated orbit through the acute corners, length `sqrt(2) pi n`.
    Diagonal { n: u64 },
    /// Isolated orbit along a leg, length `2 pi n`.
    Cathetus { n: u64 },
}

impl OrbitClass {
    pub fn name(&self) -> &'static str {
        match self {
            OrbitClass::Family { .. } => "family",
            OrbitClass::Diagonal { .. } => "diagonal",
            OrbitClass::Cathetus { .. } => "cathetus",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Orbit {
    pub length: f64,
    pub class: OrbitClass,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrbitTable {
    /// Sorted by length, then family before diagonal before cathetus.
    pub orbits: Vec<Orbit>,
}

pub fn orbit_table(max_length: f64) -> Result<OrbitTable> {
    if !(max_length > 2.0 * PI) {
        return Err(NodalError::InvalidParameter(format!(
            "orbit table needs a cutoff above 2 pi, got {max_length}"
        )));
    }
    let mut orbits = Vec::new();
    let r = (max_length / (2.0 * PI)).floor() as u64;
    // One entry per distinct p^2 + q^2; the pair with the largest p names it.
    let mut seen = std::collections::BTreeMap::new();
    for p in 1..=r {
        for q in 0..=p {
            let s = p * p + q * q;
            let len = 2.0 * PI * (s as f64).sqrt();
            if len <= max_length {
                seen.entry(s).or_insert((p, q));
                if seen[&s].0 < p {
                    seen.insert(s, (p, q));
                }
            }
        }
    }
    for (s, (p, q)) in seen {
        orbits.push(Orbit {
            length: 2.0 * PI * (s as f64).sqrt(),
            class: OrbitClass::Family { p, q },
        });
    }
    let mut n = 1;
    while 2f64.sqrt() * PI * n as f64 <= max_length {
        orbits.push(Orbit {
            length: 2f64.sqrt() * PI * n as f64,
            class: OrbitClass::Diagonal { n },
        });
        n += 1;
    }
    let mut n = 1;
    while 2.0 * PI * n as f64 <= max_length {
        orbits.push(Orbit {
            length: 2.0 * PI * n as f64,
            class: OrbitClass::Cathetus { n },
        });
        n += 1;
    }
    let rank = |c: &OrbitClass| match c {
        OrbitClass::Family { .. } => 0,
        OrbitClass::Diagonal { .. } => 1,
        OrbitClass::Cathetus { .. } => 2,
    };
    orbits.sort_by(|a, b| {
        a.length
            .total_cmp(&b.length)
            .then(rank(&a.class).cmp(&rank(&b.class)))
    });
    Ok(OrbitTable { orbits })
}

/// Annotates each peak with the nearest orbit within `tolerance`; on equal
/// distance the earlier table entry wins.
pub fn match_peaks(peaks: &mut [Peak], table: &OrbitTable, tolerance: f64) {
    for peak in peaks {
        peak.orbit = table
            .orbits
            .iter()
            .map(|o| ((o.length - peak.length).abs(), o))
            .filter(|(d, _)| *d <= tolerance)
            .fold(None, |best: Option<(f64, &Orbit)>, (d, o)| match best {
                Some((bd, _)) if bd <= d => best,
                _ => Some((d, o)),
            })
            .map(|(_, o)| *o);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceConfig {
    pub degree: usize,
    pub skip: f64,
    pub step: f64,
    pub length_max: f64,
    pub length_step: f64,
    pub peak_factor: f64,
    pub tolerance: f64,
    pub min_length: f64,
}

impl TraceConfig {
    pub fn for_kind(kind: CurveKind) -> Self {
        TraceConfig {
            degree: kind.default_degree(),
            skip: DEFAULT_SKIP,
            step: 0.01,
            length_max: DEFAULT_LENGTH_MAX,
            length_step: DEFAULT_LENGTH_STEP,
            peak_factor: DEFAULT_PEAK_FACTOR,
            tolerance: DEFAULT_TOLERANCE,
            min_length: 2f64.sqrt() * PI,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceReport {
    pub curve: CumulativeCurve,
    pub fit: SmoothFit,
    pub slope: f64,
    pub spectrum: PowerSpectrum,
}

/// Curve, smooth fit, spectrum and matched peaks for `x in [start, end]`.
pub fn trace_analysis(
    kind: CurveKind,
    rows: &[NodalRow],
    max_lambda: u64,
    start: f64,
    end: f64,
    config: &TraceConfig,
) -> Result<TraceReport> {
    let curve = cumulative(kind, rows, max_lambda, start, end, config.step)?;
    let fit = smooth_fit(&curve, config.degree, config.skip)?;
    let slope = log_log_slope(&curve, &fit)?;
    let lengths = length_grid(config.length_max, config.length_step)?;
    let xs = curve.xs();
    let power = power_spectrum(&xs, &fit.residual, &lengths, config.min_length)?;
    let (mut peaks, median) = find_peaks(&lengths, &power, config.peak_factor);
    let table = orbit_table(config.length_max + config.tolerance)?;
    match_peaks(&mut peaks, &table, config.tolerance);
    Ok(TraceReport {
        spectrum: PowerSpectrum {
            lengths,
            power,
            window: (curve.start, curve.end()),
            peaks,
            median,
        },
        curve,
        fit,
        slope,
    })
}

fn csv_writer<W: Write>(out: W) -> csv::Writer<W> {
    csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(out)
}

/// Columns `x, value, smooth, residual`.
pub fn write_curve_csv<W: Write>(
    curve: &CumulativeCurve,
    fit: Option<&SmoothFit>,
    out: W,
) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["x", "value", "smooth", "residual"])?;
    for (i, v) in curve.values.iter().enumerate() {
        let (s, r) = match fit {
            Some(f) => (f.smooth[i].to_string(), f.residual[i].to_string()),
            None => (String::new(), String::new()),
        };
        w.write_record([curve.x(i).to_string(), v.to_string(), s, r])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_spectrum_csv<W: Write>(s: &PowerSpectrum, out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record(["l", "power"])?;
    for (l, p) in s.lengths.iter().zip(&s.power) {
        w.write_record([l.to_string(), p.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Columns `l, power, class, p, q, n, orbit_length, matched`.
pub fn write_peaks_csv<W: Write>(peaks: &[Peak], out: W) -> Result<()> {
    let mut w = csv_writer(out);
    w.write_record([
        "l",
        "power",
        "class",
        "p",
        "q",
        "n",
        "orbit_length",
        "matched",
    ])?;
    for pk in peaks {
        let blank = String::new;
        let (class, p, q, n, len) = match &pk.orbit {
            None => (blank(), blank(), blank(), blank(), blank()),
            Some(o) => {
                let (p, q, n) = match o.class {
                    OrbitClass::Family { p, q } => (p.to_string(), q.to_string(), blank()),
                    OrbitClass::Diagonal { n } | OrbitClass::Cathetus { n } => {
                        (blank(), blank(), n.to_string())
                    }
                };
                (o.class.name().to_string(), p, q, n, o.length.to_string())
            }
        };
        w.write_record([
            pk.length.to_string(),
            pk.power.to_string(),
            class,
            p,
            q,
            n,
            len,
            pk.orbit.is_some().to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
