//! Phase angles and continuous relative phase (CRP).
//!
//! Per repetition the pipeline is: linear time normalization onto the grid,
//! differentiation on the normalized grid, range normalization of position
//! and velocity to `[-1, 1]`, phase angle `atan2(velocity, position)`
//! unwrapped along time, then the pairwise difference.
//!
//! Sign: `crp(i, j) = phi_i - phi_j`. Phase portraits with position on the
//! horizontal axis turn clockwise, so a joint that is ahead in its cycle has
//! the *smaller* angle; with this orientation a positive CRP means the second
//! joint `j` leads. The curve is shifted by a whole number of turns so that
//! its first sample lies in `(-180, 180]` degrees.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{
    differentiate, moving_average, range_normalize, time_align_dtw_multi, time_normalize_linear,
    warp_onto_reference, Dataset, DiffMethod, NormalizedGrid, Repetition,
};
use crate::error::{Error, Result};

/// What to do with a signal whose range of motion is zero.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DegeneratePolicy {
    /// Replace the normalized signal with a constant 0 and flag it.
    #[default]
    ConstantZero,
    Error,
}

/// How repetitions are put on a common time base before averaging.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Alignment {
    /// Each repetition is resampled linearly over its own duration.
    #[default]
    Linear,
    /// After linear normalization, each repetition is warped onto the first
    /// one by DTW over all joint angles before its CRP enters the mean.
    Dtw,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrpOptions {
    pub diff_method: DiffMethod,
    /// Moving-average window applied to positions before differentiation.
    pub smoothing: Option<usize>,
    pub degenerate_policy: DegeneratePolicy,
    pub alignment: Alignment,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseAngleSeries {
    /// Unwrapped phase angle, radians.
    pub phi: Vec<f64>,
    /// Samples where position and velocity were both exactly zero; the angle
    /// there is carried over from the previous sample.
    pub degenerate_samples: Vec<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrpFlags {
    /// Joints whose position range was zero and were replaced by 0.
    pub zero_position: Vec<usize>,
    /// Joints whose velocity range was zero and were replaced by 0.
    pub zero_velocity: Vec<usize>,
    /// Total count of samples with an undefined phase angle.
    pub undefined_phase_samples: usize,
}

impl CrpFlags {
    pub fn is_clean(&self) -> bool {
        self.zero_position.is_empty()
            && self.zero_velocity.is_empty()
            && self.undefined_phase_samples == 0
    }

    fn merge(&mut self, other: &CrpFlags) {
        for j in &other.zero_position {
            if !self.zero_position.contains(j) {
                self.zero_position.push(*j);
            }
        }
        for j in &other.zero_velocity {
            if !self.zero_velocity.contains(j) {
                self.zero_velocity.push(*j);
            }
        }
        self.zero_position.sort_unstable();
        self.zero_velocity.sort_unstable();
        self.undefined_phase_samples += other.undefined_phase_samples;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CrpCurve {
    pub pair: (usize, usize),
    pub grid: NormalizedGrid,
    /// Degrees.
    pub values: Vec<f64>,
    pub n_reps_averaged: usize,
    pub flags: CrpFlags,
}

/// Phase angle of one joint from its range-normalized position and
/// velocity.
pub fn phase_angle(position: &[f64], velocity: &[f64]) -> Result<PhaseAngleSeries> {
    if position.len() != velocity.len() {
        return Err(Error::Parameter(format!(
            "position has {} samples, velocity has {}",
            position.len(),
            velocity.len()
        )));
    }
    let mut phi = Vec::with_capacity(position.len());
    let mut degenerate_samples = Vec::new();
    let mut prev: Option<f64> = None;
    for (g, (&x, &v)) in position.iter().zip(velocity).enumerate() {
        let angle = if x == 0.0 && v == 0.0 {
            degenerate_samples.push(g);
            prev.unwrap_or(0.0)
        } else {
            let raw = v.atan2(x);
            match prev {
                None => raw,
                Some(p) => p + wrap(raw - p),
            }
        };
        phi.push(angle);
        prev = Some(angle);
    }
    Ok(PhaseAngleSeries {
        phi,
        degenerate_samples,
    })
}

/// Wraps an angle into `(-pi, pi]`.
fn wrap(a: f64) -> f64 {
    let r = a - TAU * ((a + PI) / TAU).floor();
    // r is in [-pi, pi)
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

struct JointPhase {
    phase: PhaseAngleSeries,
    zero_position: bool,
    zero_velocity: bool,
}

fn normalize_or_zero(
    series: &[f64],
    policy: DegeneratePolicy,
    joint: usize,
    what: &str,
) -> Result<(Vec<f64>, bool)> {
    match range_normalize(series) {
        Ok(v) => Ok((v, false)),
        Err(e) => match policy {
            DegeneratePolicy::ConstantZero => Ok((vec![0.0; series.len()], true)),
            DegeneratePolicy::Error => Err(Error::Validation(format!("joint {joint} {what}: {e}"))),
        },
    }
}

fn joint_phase(rep: &Repetition, joint: usize, opts: &CrpOptions) -> Result<JointPhase> {
    let position = rep.series(joint);
    let velocity = match opts.smoothing {
        Some(w) => differentiate(rep.time(), &moving_average(position, w), opts.diff_method)?,
        None => differentiate(rep.time(), position, opts.diff_method)?,
    };
    let (pos_n, zero_position) =
        normalize_or_zero(position, opts.degenerate_policy, joint, "position")?;
    // resampling a constant leaves ulp-level ripple in its derivative
    let (vel_n, zero_velocity) = if zero_position {
        (vec![0.0; velocity.len()], true)
    } else {
        normalize_or_zero(&velocity, opts.degenerate_policy, joint, "velocity")?
    };
    Ok(JointPhase {
        phase: phase_angle(&pos_n, &vel_n)?,
        zero_position,
        zero_velocity,
    })
}

fn check_pair(n: usize, i: usize, j: usize) -> Result<()> {
    if i == j {
        return Err(Error::Parameter(format!(
            "CRP needs two distinct joints, got {i} twice"
        )));
    }
    if i >= n || j >= n {
        return Err(Error::Parameter(format!(
            "joint pair ({i}, {j}) out of range for {n} joints"
        )));
    }
    Ok(())
}

/// CRP curve (degrees) of joints `i` and `j` on an already time-normalized
/// repetition.
fn crp_on_grid(
    rep: &Repetition,
    i: usize,
    j: usize,
    opts: &CrpOptions,
) -> Result<(Vec<f64>, CrpFlags)> {
    let pi = joint_phase(rep, i, opts)?;
    let pj = joint_phase(rep, j, opts)?;
    if pi.zero_position && pj.zero_position {
        return Err(Error::BothJointsDegenerate(i, j));
    }
    let mut diff: Vec<f64> = pi
        .phase
        .phi
        .iter()
        .zip(&pj.phase.phi)
        .map(|(a, b)| a - b)
        .collect();
    let turns = ((diff[0] - wrap(diff[0])) / TAU).round();
    if turns != 0.0 {
        diff.iter_mut().for_each(|d| *d -= turns * TAU);
    }

    let mut flags = CrpFlags::default();
    for (joint, p) in [(i, &pi), (j, &pj)] {
        if p.zero_position {
            flags.zero_position.push(joint);
        }
        if p.zero_velocity {
            flags.zero_velocity.push(joint);
        }
        flags.undefined_phase_samples += p.phase.degenerate_samples.len();
    }
    flags.zero_position.sort_unstable();
    flags.zero_velocity.sort_unstable();
    Ok((diff.into_iter().map(f64::to_degrees).collect(), flags))
}

/// CRP between joints `i` and `j` of one repetition.
pub fn crp_pair(
    rep: &Repetition,
    i: usize,
    j: usize,
    grid: &NormalizedGrid,
    opts: &CrpOptions,
) -> Result<CrpCurve> {
    check_pair(rep.n_joints(), i, j)?;
    let normalized = time_normalize_linear(rep, grid)?;
    let (values, flags) = crp_on_grid(&normalized, i, j, opts)?;
    Ok(CrpCurve {
        pair: (i, j),
        grid: grid.clone(),
        values,
        n_reps_averaged: 1,
        flags,
    })
}

/// Pointwise mean of the CRP curves of every repetition in `ds`.
pub fn mean_crp(
    ds: &Dataset,
    i: usize,
    j: usize,
    grid: &NormalizedGrid,
    opts: &CrpOptions,
) -> Result<CrpCurve> {
    check_pair(ds.n_joints(), i, j)?;
    let tag = |repetition: usize| {
        move |e: Error| Error::Repetition {
            dataset: ds.name().to_owned(),
            repetition,
            source: Box::new(e),
        }
    };

    let normalized = ds
        .reps()
        .par_iter()
        .enumerate()
        .map(|(r, rep)| time_normalize_linear(rep, grid).map_err(tag(r)))
        .collect::<Result<Vec<_>>>()?;

    let curves = normalized
        .par_iter()
        .enumerate()
        .map(|(r, rep)| {
            let (values, flags) = crp_on_grid(rep, i, j, opts).map_err(tag(r))?;
            let values = match opts.alignment {
                Alignment::Linear => values,
                Alignment::Dtw if r == 0 => values,
                Alignment::Dtw => {
                    let samples =
                        |x: &Repetition| (0..x.len()).map(|t| x.sample(t)).collect::<Vec<_>>();
                    let path = time_align_dtw_multi(&samples(&normalized[0]), &samples(rep))
                        .map_err(tag(r))?
                        .path;
                    warp_onto_reference(&path, &values, grid.len())
                }
            };
            Ok((values, flags))
        })
        .collect::<Result<Vec<_>>>()?;

    // Running mean in repetition order: exact when all curves are equal.
    let mut mean = curves[0].0.clone();
    let mut flags = curves[0].1.clone();
    for (k, (values, f)) in curves.iter().enumerate().skip(1) {
        let weight = 1.0 / (k + 1) as f64;
        for (m, v) in mean.iter_mut().zip(values) {
            *m += (v - *m) * weight;
        }
        flags.merge(f);
    }
    Ok(CrpCurve {
        pair: (i, j),
        grid: grid.clone(),
        values: mean,
        n_reps_averaged: curves.len(),
        flags,
    })
}

/// All unordered joint pairs `(i, j)` with `i < j`, lexicographic.
pub fn joint_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseRatio {
    /// `noise / range`; infinite for a motionless joint.
    pub ratio: f64,
    /// Set when the ratio exceeds 1: CRP of this joint is not informative.
    pub exceeds_range: bool,
    pub degenerate: bool,
}

/// Sensor noise relative to the joint's range of motion.
pub fn noise_ratio_guard(rep: &Repetition, joint: usize, noise: f64) -> Result<NoiseRatio> {
    if joint >= rep.n_joints() {
        return Err(Error::Parameter(format!("joint {joint} out of range")));
    }
    if noise.is_nan() || noise < 0.0 {
        return Err(Error::Parameter(format!(
            "noise estimate must be >= 0, got {noise}"
        )));
    }
    let s = rep.series(joint);
    let range = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - s.iter().cloned().fold(f64::INFINITY, f64::min);
    if range == 0.0 {
        return Ok(NoiseRatio {
            ratio: f64::INFINITY,
            exceeds_range: true,
            degenerate: true,
        });
    }
    let ratio = noise / range;
    Ok(NoiseRatio {
        ratio,
        exceeds_range: ratio > 1.0,
        degenerate: false,
    })
}
