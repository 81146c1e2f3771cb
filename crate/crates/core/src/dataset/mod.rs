//! Joint-trajectory datasets: types, ingestion, resampling, differentiation,
//! and the simulated two-sine validation data.

mod dtw;
mod io;
mod signal;
mod sim;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dtw::{time_align_dtw, time_align_dtw_multi, warp_onto_reference, DtwAlignment};
pub use io::{load_dataset, read_repetition_csv, write_dataset};
pub use signal::{
    compute_velocity, differentiate, moving_average, range_normalize, time_normalize_linear,
    DegenerateRange, DiffMethod, VelocityProfile,
};
pub use sim::{generate_simulated, SimConfig};

/// Minimum number of samples in a repetition.
pub const MIN_SAMPLES: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleUnit {
    Deg,
    Rad,
}

impl fmt::Display for AngleUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AngleUnit::Deg => "deg",
            AngleUnit::Rad => "rad",
        })
    }
}

impl FromStr for AngleUnit {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "deg" | "degree" | "degrees" => Ok(AngleUnit::Deg),
            "rad" | "radian" | "radians" => Ok(AngleUnit::Rad),
            other => Err(Error::Config(format!(
                "unknown angle unit '{other}' (expected deg or rad)"
            ))),
        }
    }
}

/// One movement: strictly increasing time stamps plus one angle series per
/// joint. Series are stored joint-major (`series[j][t]`).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Repetition {
    time: Vec<f64>,
    series: Vec<Vec<f64>>,
}

impl Repetition {
    pub fn new(time: Vec<f64>, series: Vec<Vec<f64>>) -> Result<Self> {
        if time.len() < MIN_SAMPLES {
            return Err(Error::Validation(format!(
                "repetition has {} samples, need at least {MIN_SAMPLES}",
                time.len()
            )));
        }
        if series.is_empty() {
            return Err(Error::Validation("repetition has no joints".into()));
        }
        for (j, s) in series.iter().enumerate() {
            if s.len() != time.len() {
                return Err(Error::Validation(format!(
                    "joint {j} has {} samples but time has {}",
                    s.len(),
                    time.len()
                )));
            }
            if let Some(t) = s.iter().position(|v| !v.is_finite()) {
                return Err(Error::Validation(format!(
                    "non-finite value for joint {j} at sample {t}"
                )));
            }
        }
        if let Some(t) = time.iter().position(|v| !v.is_finite()) {
            return Err(Error::Validation(format!("non-finite time at sample {t}")));
        }
        if let Some(t) = time.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::Validation(format!(
                "time not strictly increasing at sample {}",
                t + 1
            )));
        }
        Ok(Self { time, series })
    }

    pub fn time(&self) -> &[f64] {
        &self.time
    }

    pub fn series(&self, joint: usize) -> &[f64] {
        &self.series[joint]
    }

    pub fn all_series(&self) -> &[Vec<f64>] {
        &self.series
    }

    pub fn n_joints(&self) -> usize {
        self.series.len()
    }

    pub fn len(&self) -> usize {
        self.time.len()
    }

    pub fn is_empty(&self) -> bool {
        self.time.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.time[self.time.len() - 1] - self.time[0]
    }

    /// Sample `t` across all joints.
    pub fn sample(&self, t: usize) -> Vec<f64> {
        self.series.iter().map(|s| s[t]).collect()
    }

    /// Returns a copy with joint columns reordered; `order[k]` is the source
    /// joint placed at position `k`.
    pub fn permute_joints(&self, order: &[usize]) -> Self {
        Self {
            time: self.time.clone(),
            series: order.iter().map(|&j| self.series[j].clone()).collect(),
        }
    }

    pub(crate) fn map_series(&self, mut f: impl FnMut(usize, &[f64]) -> Vec<f64>) -> Self {
        Self {
            time: self.time.clone(),
            series: self
                .series
                .iter()
                .enumerate()
                .map(|(j, s)| f(j, s))
                .collect(),
        }
    }
}

/// A named collection of repetitions sharing joint labels and angle unit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    name: String,
    joints: Vec<String>,
    reps: Vec<Repetition>,
    unit: AngleUnit,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        joints: Vec<String>,
        reps: Vec<Repetition>,
        unit: AngleUnit,
    ) -> Result<Self> {
        if reps.is_empty() {
            return Err(Error::Validation("no repetitions found".into()));
        }
        if joints.is_empty() {
            return Err(Error::Validation("dataset has no joints".into()));
        }
        for (r, rep) in reps.iter().enumerate() {
            if rep.n_joints() != joints.len() {
                return Err(Error::Validation(format!(
                    "repetition {r} has {} joints, dataset declares {}",
                    rep.n_joints(),
                    joints.len()
                )));
            }
        }
        Ok(Self {
            name: name.into(),
            joints,
            reps,
            unit,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn joints(&self) -> &[String] {
        &self.joints
    }

    pub fn reps(&self) -> &[Repetition] {
        &self.reps
    }

    pub fn unit(&self) -> AngleUnit {
        self.unit
    }

    pub fn n_joints(&self) -> usize {
        self.joints.len()
    }

    pub fn n_reps(&self) -> usize {
        self.reps.len()
    }

    /// Number of samples once all repetitions are concatenated.
    pub fn total_samples(&self) -> usize {
        self.reps.iter().map(Repetition::len).sum()
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// New dataset made of the repetitions at `indices`, in that order.
    pub fn subset(&self, name: impl Into<String>, indices: &[usize]) -> Result<Self> {
        let reps = indices
            .iter()
            .map(|&i| {
                self.reps.get(i).cloned().ok_or_else(|| {
                    Error::Parameter(format!(
                        "repetition index {i} out of range ({} repetitions)",
                        self.reps.len()
                    ))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(name, self.joints.clone(), reps, self.unit)
    }

    /// Same data with joint columns reordered (labels included).
    pub fn permute_joints(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.n_joints()];
        if order.len() != self.n_joints() {
            return Err(Error::Parameter(
                "joint permutation has wrong length".into(),
            ));
        }
        for &j in order {
            if j >= seen.len() || std::mem::replace(&mut seen[j], true) {
                return Err(Error::Parameter("invalid joint permutation".into()));
            }
        }
        Ok(Self {
            name: self.name.clone(),
            joints: order.iter().map(|&j| self.joints[j].clone()).collect(),
            reps: self.reps.iter().map(|r| r.permute_joints(order)).collect(),
            unit: self.unit,
        })
    }

    /// Errors unless `other` has the same joint list and angle unit.
    pub fn check_compatible(&self, other: &Dataset) -> Result<()> {
        if self.joints != other.joints {
            return Err(Error::Parameter(format!(
                "joint lists differ: '{}' has {:?}, '{}' has {:?}",
                self.name, self.joints, other.name, other.joints
            )));
        }
        if self.unit != other.unit {
            return Err(Error::Parameter(format!(
                "angle units differ: '{}' is {}, '{}' is {}",
                self.name, self.unit, other.name, other.unit
            )));
        }
        Ok(())
    }

    pub(crate) fn map_reps(&self, f: impl FnMut(&Repetition) -> Repetition) -> Self {
        Self {
            name: self.name.clone(),
            joints: self.joints.clone(),
            reps: self.reps.iter().map(f).collect(),
            unit: self.unit,
        }
    }

    /// Iterates every sample of every repetition, in repetition order.
    pub fn samples(&self) -> impl Iterator<Item = Vec<f64>> + '_ {
        self.reps
            .iter()
            .flat_map(|r| (0..r.len()).map(move |t| r.sample(t)))
    }
}

/// Per-joint mean over the concatenation of all repetitions.
pub fn concatenated_means(ds: &Dataset) -> Vec<f64> {
    let n = ds.total_samples() as f64;
    (0..ds.n_joints())
        .map(|j| ds.reps.iter().flat_map(|r| r.series(j)).sum::<f64>() / n)
        .collect()
}

/// Subtracts each joint's mean over all concatenated samples.
pub fn center_dataset(ds: &Dataset) -> Dataset {
    let means = concatenated_means(ds);
    ds.map_reps(|rep| rep.map_series(|j, s| s.iter().map(|v| v - means[j]).collect()))
}

/// Uniform grid over normalized movement time `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct NormalizedGrid {
    points: Vec<f64>,
}

impl NormalizedGrid {
    pub const MIN_SIZE: usize = 11;
    pub const DEFAULT_SIZE: usize = 101;

    pub fn new(size: usize) -> Result<Self> {
        if size < Self::MIN_SIZE {
            return Err(Error::Parameter(format!(
                "grid size {size} below minimum {}",
                Self::MIN_SIZE
            )));
        }
        let last = (size - 1) as f64;
        Ok(Self {
            points: (0..size).map(|g| g as f64 / last).collect(),
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.points.len() - 1) as f64
    }

    /// Grid expressed as 0–100 % of movement duration.
    pub fn percent(&self) -> Vec<f64> {
        self.points.iter().map(|s| s * 100.0).collect()
    }
}

impl Default for NormalizedGrid {
    fn default() -> Self {
        Self::new(Self::DEFAULT_SIZE).expect("default grid size is valid")
    }
}

impl TryFrom<usize> for NormalizedGrid {
    type Error = Error;

    fn try_from(size: usize) -> Result<Self> {
        Self::new(size)
    }
}

impl From<NormalizedGrid> for usize {
    fn from(grid: NormalizedGrid) -> usize {
        grid.len()
    }
}
