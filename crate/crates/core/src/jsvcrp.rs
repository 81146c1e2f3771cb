//! Joint synchronization variation: the area between two datasets' mean CRP
//! curves for a joint pair, integrated with the trapezoidal rule.
//!
//! `area` uses the normalized time axis `[0, 1]` (degrees x normalized time).
//! `area_percent` is the same integral over a `0..100` % axis, i.e. 100x
//! larger. Both are reported since either axis is a common convention.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crp::{joint_pairs, mean_crp, CrpCurve, CrpOptions};
use crate::dataset::{Dataset, NormalizedGrid};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JsvCrpResult {
    pub pair: (usize, usize),
    /// Degrees x normalized time.
    pub area: f64,
    /// Degrees x percent of movement duration.
    pub area_percent: f64,
    pub curve_a: CrpCurve,
    pub curve_b: CrpCurve,
    /// `|CRP_B - CRP_A|` on the grid, degrees.
    pub difference_profile: Vec<f64>,
}

impl JsvCrpResult {
    /// `area` converted to radians x normalized time.
    pub fn area_rad(&self) -> f64 {
        self.area.to_radians()
    }
}

/// Trapezoidal integral of `values` sampled on `grid`.
pub fn trapezoid(grid: &NormalizedGrid, values: &[f64]) -> f64 {
    grid.points()
        .windows(2)
        .zip(values.windows(2))
        .map(|(s, v)| 0.5 * (s[1] - s[0]) * (v[0] + v[1]))
        .sum()
}

/// Area between two CRP curves sharing a grid.
pub fn area_between(a: &CrpCurve, b: &CrpCurve) -> Result<(f64, Vec<f64>)> {
    if a.grid != b.grid || a.values.len() != b.values.len() {
        return Err(Error::Parameter(
            "CRP curves live on different grids".into(),
        ));
    }
    let diff: Vec<f64> = b
        .values
        .iter()
        .zip(&a.values)
        .map(|(vb, va)| (vb - va).abs())
        .collect();
    Ok((trapezoid(&a.grid, &diff), diff))
}

/// JsvCRP of joints `i`, `j` between datasets `a` and `b`.
pub fn jsvcrp(
    a: &Dataset,
    b: &Dataset,
    i: usize,
    j: usize,
    grid: &NormalizedGrid,
    opts: &CrpOptions,
) -> Result<JsvCrpResult> {
    a.check_compatible(b)?;
    let curve_a = mean_crp(a, i, j, grid, opts)?;
    let curve_b = mean_crp(b, i, j, grid, opts)?;
    let (area, difference_profile) = area_between(&curve_a, &curve_b)?;
    Ok(JsvCrpResult {
        pair: (i, j),
        area,
        area_percent: area * 100.0,
        curve_a,
        curve_b,
        difference_profile,
    })
}

/// One result per unordered joint pair, lexicographic order.
pub fn jsvcrp_all_pairs(
    a: &Dataset,
    b: &Dataset,
    grid: &NormalizedGrid,
    opts: &CrpOptions,
) -> Result<Vec<JsvCrpResult>> {
    a.check_compatible(b)?;
    if a.n_joints() < 2 {
        return Err(Error::Parameter("JsvCRP needs at least two joints".into()));
    }
    joint_pairs(a.n_joints())
        .into_par_iter()
        .map(|(i, j)| jsvcrp(a, b, i, j, grid, opts))
        .collect()
}
