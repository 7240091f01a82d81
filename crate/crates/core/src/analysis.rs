//! Remainder series and envelope-exponent fits.
//!
//! `E(λ)` oscillates through zero, so exponents are read off the maxima of
//! `|E|` over geometric windows rather than from individual samples.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, Result, WeylError};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorEntry {
    pub lambda: f64,
    pub count: f64,
    pub main_term: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ErrorSeries {
    pub description: String,
    pub main_coefficient: f64,
    pub total_degree: u32,
    pub entries: Vec<ErrorEntry>,
}

impl ErrorSeries {
    /// Wraps raw `(λ, value)` pairs whose value is already the quantity to fit.
    pub fn from_pairs(description: impl Into<String>, pairs: &[(f64, f64)]) -> Result<Self> {
        let entries =
            pairs.iter().map(|&(lambda, error)| ErrorEntry { lambda, count: error, main_term: 0.0, error }).collect();
        let s = Self { description: description.into(), main_coefficient: 0.0, total_degree: 0, entries };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.entries.iter().any(|e| !e.lambda.is_finite() || !e.error.is_finite()) {
            return invalid("series contains a non-finite entry");
        }
        if self.entries.windows(2).any(|p| !(p[1].lambda > p[0].lambda)) {
            return invalid("series lambdas must be strictly increasing");
        }
        Ok(())
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }
}

/// `E(λ) = N(λ) - c λ^{|d|}` on every grid point, evaluated in parallel.
pub fn error_series<F>(
    description: impl Into<String>,
    counter: F,
    main_coefficient: f64,
    total_degree: u32,
    grid: &[f64],
) -> Result<ErrorSeries>
where
    F: Fn(f64) -> Result<f64> + Sync,
{
    if grid.windows(2).any(|p| !(p[1] > p[0])) {
        return invalid("lambda grid must be strictly increasing");
    }
    let entries = grid
        .par_iter()
        .map(|&lambda| {
            let count = counter(lambda)?;
            let main_term = main_coefficient * lambda.powi(total_degree as i32);
            Ok(ErrorEntry { lambda, count, main_term, error: count - main_term })
        })
        .collect::<Result<Vec<_>>>()?;
    let s = ErrorSeries { description: description.into(), main_coefficient, total_degree, entries };
    s.validate()?;
    Ok(s)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Window {
    pub id: usize,
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    /// Geometric midpoint of the window.
    pub lambda_mid: f64,
    /// Sample at which `|E|` peaks; the regression abscissa.
    pub lambda_at_max: f64,
    pub max_abs_error: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentFit {
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub windows: Vec<Window>,
    pub dropped_zero_count: usize,
    pub empty_windows: usize,
}

/// Sixteen windows per factor `10^1.5` of the λ-range, at least 3.
pub fn default_window_count(lambda_lo: f64, lambda_hi: f64) -> usize {
    let decades = (lambda_hi / lambda_lo).log10().max(0.0);
    ((16.0 * decades / 1.5 - 1e-9).ceil() as usize).max(3)
}

/// Index of the geometric window holding each entry, over `[first, last]`.
pub fn window_ids(series: &ErrorSeries, window_count: usize) -> Vec<usize> {
    let (Some(first), Some(last)) = (series.entries.first(), series.entries.last()) else {
        return Vec::new();
    };
    let span = (last.lambda / first.lambda).ln();
    series
        .entries
        .iter()
        .map(|e| {
            if span > 0.0 {
                let t = (e.lambda / first.lambda).ln() / span;
                ((t * window_count as f64).floor() as usize).min(window_count - 1)
            } else {
                0
            }
        })
        .collect()
}

pub fn fit_envelope_exponent(series: &ErrorSeries, window_count: usize) -> Result<ExponentFit> {
    series.validate()?;
    if window_count == 0 {
        return invalid("window count must be positive");
    }
    if series.entries.first().is_none_or(|e| !(e.lambda > 0.0)) {
        return Err(WeylError::InsufficientWindows { usable: 0, dropped: 0 });
    }
    let first = series.entries[0].lambda;
    let ratio = series.entries[series.entries.len() - 1].lambda / first;
    let ids = window_ids(series, window_count);

    let mut best: Vec<Option<(f64, f64, usize)>> = vec![None; window_count];
    for (e, &id) in series.entries.iter().zip(&ids) {
        let a = e.error.abs();
        let slot = &mut best[id];
        match slot {
            Some((m, at, count)) => {
                *count += 1;
                if a > *m {
                    *m = a;
                    *at = e.lambda;
                }
            }
            None => *slot = Some((a, e.lambda, 1)),
        }
    }

    let mut windows = Vec::new();
    let (mut dropped, mut empty) = (0, 0);
    for (id, slot) in best.into_iter().enumerate() {
        let lo = first * ratio.powf(id as f64 / window_count as f64);
        let hi = first * ratio.powf((id + 1) as f64 / window_count as f64);
        match slot {
            None => empty += 1,
            Some((0.0, _, _)) => dropped += 1,
            Some((m, at, samples)) => windows.push(Window {
                id,
                lambda_lo: lo,
                lambda_hi: hi,
                lambda_mid: (lo * hi).sqrt(),
                lambda_at_max: at,
                max_abs_error: m,
                samples,
            }),
        }
    }
    if windows.len() < 3 {
        return Err(WeylError::InsufficientWindows { usable: windows.len(), dropped });
    }

    let xs: Vec<f64> = windows.iter().map(|w| w.lambda_at_max.ln()).collect();
    let ys: Vec<f64> = windows.iter().map(|w| w.max_abs_error.ln()).collect();
    let (slope, intercept, rms) = least_squares(&xs, &ys);
    if !slope.is_finite() {
        return invalid("degenerate fit: all window maxima at one lambda");
    }
    Ok(ExponentFit { slope, intercept, rms_residual: rms, windows, dropped_zero_count: dropped, empty_windows: empty })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss: f64 = xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    (slope, intercept, (ss / n).sqrt())
}

/// `|d| - 1`.
pub fn classical_exponent(total_degree: u32) -> f64 {
    total_degree as f64 - 1.0
}

/// `|d| - 1 - (n-1)/(n+1)`.
pub fn improved_exponent(total_degree: u32, n: usize) -> f64 {
    classical_exponent(total_degree) - (n as f64 - 1.0) / (n as f64 + 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExponentReport {
    pub spec: String,
    pub slope: f64,
    pub intercept: f64,
    pub rms_residual: f64,
    pub classical_exponent: f64,
    pub improved_exponent: f64,
    /// Exponent the slope is checked against.
    pub bound: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub dropped_zero_count: usize,
    pub windows: Vec<Window>,
}

/// Checks the fitted slope against the improved exponent.
pub fn exponent_report(spec: &str, fit: &ExponentFit, dims: &[u32], n: usize, tolerance: f64) -> ExponentReport {
    let degree: u32 = dims.iter().sum();
    let improved = improved_exponent(degree, n);
    bound_report(spec, fit, degree, n, improved, tolerance)
}

/// Like [`exponent_report`] with an explicit bound, for quantities whose
/// expected order differs from the remainder's.
pub fn bound_report(
    spec: &str,
    fit: &ExponentFit,
    degree: u32,
    n: usize,
    bound: f64,
    tolerance: f64,
) -> ExponentReport {
    ExponentReport {
        spec: spec.to_string(),
        slope: fit.slope,
        intercept: fit.intercept,
        rms_residual: fit.rms_residual,
        classical_exponent: classical_exponent(degree),
        improved_exponent: improved_exponent(degree, n),
        bound,
        tolerance,
        pass: fit.slope <= bound + tolerance,
        dropped_zero_count: fit.dropped_zero_count,
        windows: fit.windows.clone(),
    }
}
