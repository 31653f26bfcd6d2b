use serde::Serialize;

use crate::error::{Error, Result};

pub const MIN_WINDOW: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateFit {
    /// Least-squares slope: of `log err` against `log N` for power fits,
    /// against `N` for linear fits.
    pub slope: f64,
    /// `exp(slope)` for linear fits; `NaN` for power fits.
    pub ratio: f64,
    /// Inclusive iteration range `[start, end]`.
    pub window: (usize, usize),
}

fn window_values(errors: &[f64], window: (usize, usize)) -> Result<&[f64]> {
    let (start, end) = window;
    if end < start || end - start + 1 < MIN_WINDOW {
        return Err(Error::RateFit(format!(
            "window [{start}, {end}] is shorter than {MIN_WINDOW} points"
        )));
    }
    if end >= errors.len() {
        return Err(Error::RateFit(format!(
            "window end {end} is past the last record {}",
            errors.len().saturating_sub(1)
        )));
    }
    let values = &errors[start..=end];
    if let Some(i) = values.iter().position(|e| !(*e > 0.0 && e.is_finite())) {
        return Err(Error::RateFit(format!(
            "error at iteration {} is {}, not positive",
            start + i,
            values[i]
        )));
    }
    Ok(values)
}

fn least_squares_slope(xs: impl Iterator<Item = f64> + Clone, ys: &[f64]) -> f64 {
    let n = ys.len() as f64;
    let mx = xs.clone().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (x, y) in xs.zip(ys) {
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
    }
    sxy / sxx
}

/// Fit `err_N ≈ C N^slope` on `window`; `errors[N]` is the error after `N`
/// iterations, and the window must not include `N = 0`.
pub fn fit_power_rate(errors: &[f64], window: (usize, usize)) -> Result<RateFit> {
    if window.0 == 0 {
        return Err(Error::RateFit("power fits need N ≥ 1".into()));
    }
    let values = window_values(errors, window)?;
    let logs: Vec<f64> = values.iter().map(|e| e.ln()).collect();
    let slope = least_squares_slope((window.0..=window.1).map(|n| (n as f64).ln()), &logs);
    Ok(RateFit {
        slope,
        ratio: f64::NAN,
        window,
    })
}

/// Fit `err_N ≈ C ratio^N` on `window`.
pub fn fit_linear_rate(errors: &[f64], window: (usize, usize)) -> Result<RateFit> {
    let values = window_values(errors, window)?;
    let logs: Vec<f64> = values.iter().map(|e| e.ln()).collect();
    let slope = least_squares_slope((window.0..=window.1).map(|n| n as f64), &logs);
    Ok(RateFit {
        slope,
        ratio: slope.exp(),
        window,
    })
}

/// Whether `err_N ≤ C ρ^N` describes a curve, for a theoretical ratio `ρ`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundDominance {
    pub theoretical_ratio: f64,
    /// `log C` for the smallest `C` with `err_N ≤ C ρ^N` on the checked range.
    pub log_constant: f64,
    /// Checked iterations `[start, end]`; the end is the last iteration
    /// before the error reaches the round-off floor.
    pub range: (usize, usize),
    pub window_len: usize,
    /// Largest geometric ratio fitted on any window of `window_len` points.
    pub worst_window_ratio: f64,
    pub worst_window_start: usize,
    pub tolerance: f64,
    pub passed: bool,
}

/// Slide a window of `window_len` points over `errors[start..]`, stopping at
/// the first error at or below `floor` (the round-off level), fit a geometric
/// ratio on each, and require every ratio to stay within `(1 + tolerance) ρ`.
pub fn check_bound_dominance(
    errors: &[f64],
    theoretical_ratio: f64,
    start: usize,
    window_len: usize,
    tolerance: f64,
    floor: f64,
) -> Result<BoundDominance> {
    if !(theoretical_ratio > 0.0 && theoretical_ratio <= 1.0) {
        return Err(Error::RateFit(format!(
            "theoretical ratio {theoretical_ratio} outside (0, 1]"
        )));
    }
    let window_len = window_len.max(MIN_WINDOW);
    let Some(&first) = errors.get(start) else {
        return Err(Error::RateFit(format!("no record at iteration {start}")));
    };
    if !(first > floor) {
        return Err(Error::RateFit(format!(
            "error at iteration {start} is already below the floor {floor:e}"
        )));
    }
    let end = start
        + errors[start..]
            .iter()
            .take_while(|e| **e > floor && e.is_finite())
            .count();
    if end < start + window_len {
        return Err(Error::RateFit(format!(
            "only {} iterations above the round-off floor from N = {start}",
            end - start
        )));
    }
    let end = end - 1;
    let log_rho = theoretical_ratio.ln();
    let log_constant = (start..=end)
        .map(|n| errors[n].ln() - n as f64 * log_rho)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut worst = (f64::NEG_INFINITY, start);
    for s in start..=(end + 1 - window_len) {
        let fit = fit_linear_rate(errors, (s, s + window_len - 1))?;
        if fit.ratio > worst.0 {
            worst = (fit.ratio, s);
        }
    }
    Ok(BoundDominance {
        theoretical_ratio,
        log_constant,
        range: (start, end),
        window_len,
        worst_window_ratio: worst.0,
        worst_window_start: worst.1,
        tolerance,
        passed: worst.0 <= theoretical_ratio * (1.0 + tolerance),
    })
}
