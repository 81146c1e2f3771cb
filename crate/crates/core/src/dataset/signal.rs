use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{NormalizedGrid, Repetition};
use crate::error::{Error, Result};

/// Ranges at or below this fraction of the series magnitude are treated as
/// zero. Finite differences of a ramp leave rounding noise around 1e-15 that
/// must not be stretched to [-1, 1].
pub const DEGENERATE_RELATIVE_RANGE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffMethod {
    /// Second-order central differences inside, second-order one-sided at
    /// both ends. Valid on non-uniform time stamps.
    #[default]
    CentralDifference,
    /// First-order forward differences, backward at the last sample.
    ForwardDifference,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocityProfile {
    pub time: Vec<f64>,
    /// Joint-major, angle unit per second.
    pub velocities: Vec<Vec<f64>>,
}

/// Derivative of `values` with respect to `time`.
pub fn differentiate(time: &[f64], values: &[f64], method: DiffMethod) -> Result<Vec<f64>> {
    let n = time.len();
    if values.len() != n {
        return Err(Error::Parameter(format!(
            "time has {n} samples, values have {}",
            values.len()
        )));
    }
    if n < 3 {
        return Err(Error::Validation(format!(
            "need at least 3 samples to differentiate, got {n}"
        )));
    }
    let steps: Vec<f64> = time.windows(2).map(|w| w[1] - w[0]).collect();
    if let Some(i) = steps.iter().position(|h| *h <= 0.0) {
        return Err(Error::DuplicateTimestamp(i + 1));
    }
    let slopes: Vec<f64> = values
        .windows(2)
        .zip(&steps)
        .map(|(w, h)| (w[1] - w[0]) / h)
        .collect();

    let out = match method {
        DiffMethod::ForwardDifference => {
            let mut v = slopes.clone();
            v.push(slopes[n - 2]);
            v
        }
        DiffMethod::CentralDifference => {
            let mut v = Vec::with_capacity(n);
            let (h1, h2) = (steps[0], steps[1]);
            v.push(slopes[0] - h1 * (slopes[1] - slopes[0]) / (h1 + h2));
            for i in 1..n - 1 {
                let (h1, h2) = (steps[i - 1], steps[i]);
                v.push((h2 * slopes[i - 1] + h1 * slopes[i]) / (h1 + h2));
            }
            let (h1, h2) = (steps[n - 3], steps[n - 2]);
            let (d1, d2) = (slopes[n - 3], slopes[n - 2]);
            v.push(d2 + h2 * (d2 - d1) / (h1 + h2));
            v
        }
    };
    Ok(out)
}

/// Centered moving average; the window shrinks symmetrically near the ends.
/// A window of 0 or 1 returns the input unchanged.
pub fn moving_average(values: &[f64], window: usize) -> Vec<f64> {
    if window <= 1 {
        return values.to_vec();
    }
    let half = window / 2;
    let n = values.len();
    (0..n)
        .map(|i| {
            let reach = half.min(i).min(n - 1 - i);
            let slice = &values[i - reach..=i + reach];
            slice.iter().sum::<f64>() / slice.len() as f64
        })
        .collect()
}

/// Angular velocity of every joint. `smoothing`, when set, applies a moving
/// average of that window to the angles before differentiation.
pub fn compute_velocity(
    rep: &Repetition,
    method: DiffMethod,
    smoothing: Option<usize>,
) -> Result<VelocityProfile> {
    let velocities = rep
        .all_series()
        .iter()
        .map(|s| match smoothing {
            Some(w) => differentiate(rep.time(), &moving_average(s, w), method),
            None => differentiate(rep.time(), s, method),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VelocityProfile {
        time: rep.time().to_vec(),
        velocities,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Error)]
#[error("degenerate range: min {min} equals max {max}")]
pub struct DegenerateRange {
    pub min: f64,
    pub max: f64,
}

/// Affine map of `series` onto [-1, 1] using its own minimum and maximum.
pub fn range_normalize(series: &[f64]) -> std::result::Result<Vec<f64>, DegenerateRange> {
    let (min, max) = series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let range = max - min;
    let scale = min.abs().max(max.abs());
    if range.is_nan() || range <= DEGENERATE_RELATIVE_RANGE * scale {
        return Err(DegenerateRange { min, max });
    }
    Ok(series
        .iter()
        .map(|v| 2.0 * (v - min) / range - 1.0)
        .collect())
}

/// Linear interpolation of `(xs, ys)` at each of `at`. `xs` must be strictly
/// increasing and `at` must lie inside `[xs[0], xs[last]]`.
pub(crate) fn interp_linear(xs: &[f64], ys: &[f64], at: &[f64]) -> Vec<f64> {
    let last = xs.len() - 1;
    let mut k = 0;
    at.iter()
        .map(|&x| {
            while k + 1 < last && xs[k + 1] <= x {
                k += 1;
            }
            let w = ((x - xs[k]) / (xs[k + 1] - xs[k])).clamp(0.0, 1.0);
            (1.0 - w) * ys[k] + w * ys[k + 1]
        })
        .collect()
}

/// Maps the repetition's time onto `[0, 1]` and resamples every joint onto
/// `grid` by linear interpolation. The returned repetition's time stamps are
/// the grid points.
pub fn time_normalize_linear(rep: &Repetition, grid: &NormalizedGrid) -> Result<Repetition> {
    let t0 = rep.time()[0];
    let duration = rep.duration();
    if duration.is_nan() || duration <= 0.0 {
        return Err(Error::ZeroDuration(t0));
    }
    let s: Vec<f64> = rep.time().iter().map(|t| (t - t0) / duration).collect();
    let series = rep
        .all_series()
        .iter()
        .map(|v| interp_linear(&s, v, grid.points()))
        .collect();
    Repetition::new(grid.points().to_vec(), series)
}
