//! Joint contribution variation between a reference dataset A and a
//! comparison dataset B.
//!
//! 1. Fit PCA on A, giving the frame `R_A` (`m x n`).
//! 2. Project B into `R_A` (centered with A's mean).
//! 3. Fit PCA on the projected B, giving `b` (`m x m`), and compose
//!    `b_A = b * R_A` to express B's components over the original joints.
//!    The element-wise absolute values of `R_A` and `b_A` are the joint
//!    reprojection weights (JRW).
//! 4. `delta = |b_A| - |R_A|`: positive entries mean the joint contributes
//!    more in B than in A.
//!
//! Optionally each row of `delta` is scaled by A's explained-variance ratio
//! for that component, so low-variance components count for less.

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::linalg::matmul;
use crate::pca::{fit_pca, project, PcaWarning};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct JcvPcaConfig {
    /// Task dimensionality: number of components that carry the task.
    pub p: usize,
    /// Number of retained components, `p <= m <= n`.
    pub m: usize,
    pub weight_by_variance: bool,
}

impl JcvPcaConfig {
    /// `m = p + 1`, variance weighting on.
    pub fn for_task(p: usize) -> Self {
        Self {
            p,
            m: p + 1,
            weight_by_variance: true,
        }
    }

    pub fn validate(&self, n_joints: usize) -> Result<()> {
        if self.p == 0 {
            return Err(Error::Parameter(
                "task dimensionality p must be >= 1".into(),
            ));
        }
        if self.m < self.p || self.m > n_joints {
            return Err(Error::Parameter(format!(
                "need p <= m <= n, got p={}, m={}, n={n_joints}",
                self.p, self.m
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JrwMatrices {
    /// `|a_ui|`, `m x n`.
    pub jrw_a: Vec<Vec<f64>>,
    /// `|b^A_ui|`, `m x n`.
    pub jrw_b: Vec<Vec<f64>>,
    pub explained_variance_a: Vec<f64>,
    /// B's component variances as fractions of B's total joint-space variance.
    pub explained_variance_b: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings_a: Vec<PcaWarning>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings_b: Vec<PcaWarning>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JcvPcaResult {
    pub reference_name: String,
    pub comparison_name: String,
    pub joints: Vec<String>,
    pub m: usize,
    pub p: usize,
    /// `jrw_b - jrw_a`, `m x n`, entries in `[-1, 1]`.
    pub delta: Vec<Vec<f64>>,
    pub weighted_delta: Option<Vec<Vec<f64>>>,
    pub jrw: JrwMatrices,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Focus {
    /// The first `p` components.
    Task,
    /// Components `p+1..=m`.
    NullSpace,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowSelection {
    /// Zero-based component indices.
    pub rows: Vec<usize>,
    pub values: Vec<Vec<f64>>,
    pub warning: Option<String>,
}

fn joint_space_variance(ds: &Dataset) -> f64 {
    let n = ds.total_samples() as f64;
    (0..ds.n_joints())
        .map(|j| {
            let values = || ds.reps().iter().flat_map(|r| r.series(j).iter().copied());
            let mean = values().sum::<f64>() / n;
            values().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
        })
        .sum()
}

fn abs_matrix(m: &[Vec<f64>]) -> Vec<Vec<f64>> {
    m.iter()
        .map(|r| r.iter().map(|v| v.abs()).collect())
        .collect()
}

/// Joint reprojection weights of A and of B expressed in A's frame.
pub fn compute_jrw(a: &Dataset, b: &Dataset, m: usize) -> Result<JrwMatrices> {
    a.check_compatible(b)?;
    let model_a = fit_pca(a, m)?;
    let projected = project(b, &model_a)?;
    let model_b = fit_pca(&projected, m)?;
    let b_in_joints = matmul(&model_b.components, &model_a.components);

    debug_assert!(b_in_joints
        .iter()
        .all(|r| (r.iter().map(|v| v * v).sum::<f64>() - 1.0).abs() < 1e-9));

    let total_b = joint_space_variance(b);
    let explained_variance_b = model_b
        .eigenvalues
        .iter()
        .map(|v| if total_b > 0.0 { v / total_b } else { 0.0 })
        .collect();

    Ok(JrwMatrices {
        jrw_a: abs_matrix(&model_a.components),
        jrw_b: abs_matrix(&b_in_joints),
        explained_variance_a: model_a.explained_variance_ratio,
        explained_variance_b,
        warnings_a: model_a.warnings,
        warnings_b: model_b.warnings,
    })
}

/// JcvPCA of comparison `b` against reference `a`.
pub fn compute_jcvpca(a: &Dataset, b: &Dataset, config: &JcvPcaConfig) -> Result<JcvPcaResult> {
    a.check_compatible(b)?;
    config.validate(a.n_joints())?;
    let jrw = compute_jrw(a, b, config.m)?;
    let delta: Vec<Vec<f64>> = jrw
        .jrw_b
        .iter()
        .zip(&jrw.jrw_a)
        .map(|(rb, ra)| rb.iter().zip(ra).map(|(wb, wa)| wb - wa).collect())
        .collect();
    let weighted_delta = config.weight_by_variance.then(|| {
        delta
            .iter()
            .zip(&jrw.explained_variance_a)
            .map(|(row, var)| row.iter().map(|d| d * var).collect())
            .collect()
    });
    Ok(JcvPcaResult {
        reference_name: a.name().to_owned(),
        comparison_name: b.name().to_owned(),
        joints: a.joints().to_vec(),
        m: config.m,
        p: config.p,
        delta,
        weighted_delta,
        jrw,
    })
}

impl JcvPcaResult {
    /// `delta` as whole percentages, for human-readable summaries.
    pub fn percentages(&self) -> Vec<Vec<i64>> {
        self.delta
            .iter()
            .map(|r| r.iter().map(|d| (d * 100.0).round() as i64).collect())
            .collect()
    }
}

/// Rows of `delta` relevant to the task (`0..p`) or to the null space
/// (`p..m`).
pub fn select_rows(result: &JcvPcaResult, focus: Focus) -> RowSelection {
    let range = match focus {
        Focus::Task => 0..result.p.min(result.m),
        Focus::NullSpace => result.p.min(result.m)..result.m,
    };
    let warning = (range.is_empty() && focus == Focus::NullSpace)
        .then(|| format!("m = p = {}: no null-space components retained", result.p));
    RowSelection {
        rows: range.clone().collect(),
        values: result.delta[range].to_vec(),
        warning,
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;

    use super::*;
    use crate::dataset::{generate_simulated, AngleUnit, Repetition, SimConfig};

    fn two_joint(name: &str, f: impl Fn(f64) -> (f64, f64), reps: usize) -> Dataset {
        let reps = (0..reps)
            .map(|r| {
                let time: Vec<f64> = (0..120).map(|t| t as f64 * 0.01).collect();
                let (x, y): (Vec<f64>, Vec<f64>) =
                    time.iter().map(|t| f(t + 0.37 * r as f64)).unzip();
                Repetition::new(time, vec![x, y]).unwrap()
            })
            .collect();
        Dataset::new(name, vec!["s".into(), "e".into()], reps, AngleUnit::Deg).unwrap()
    }

    fn sample_pair() -> Dataset {
        two_joint(
            "A",
            |t| {
                (
                    (3.0 * t).sin() * 20.0,
                    (3.0 * t + 0.6).sin() * 35.0 + 4.0 * t,
                )
            },
            3,
        )
    }

    #[test]
    fn identical_datasets_give_zero() {
        let a = sample_pair();
        let r = compute_jcvpca(&a, &a, &JcvPcaConfig::for_task(1)).unwrap();
        for row in &r.delta {
            for d in row {
                assert_abs_diff_eq!(*d, 0.0, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn swapped_columns_swap_weights() {
        let a = sample_pair();
        let b = a.permute_joints(&[1, 0]).unwrap();
        // joint labels must match for a comparison; keep A's labels on swapped data
        let b = Dataset::new("B", a.joints().to_vec(), b.reps().to_vec(), a.unit()).unwrap();
        let same = compute_jrw(&a, &a, 2).unwrap();
        let swapped = compute_jrw(&a, &b, 2).unwrap();
        for u in 0..2 {
            assert_abs_diff_eq!(swapped.jrw_b[u][0], same.jrw_b[u][1], epsilon = 1e-12);
            assert_abs_diff_eq!(swapped.jrw_b[u][1], same.jrw_b[u][0], epsilon = 1e-12);
        }
    }

    #[test]
    fn simulated_first_component_shifts_to_theta2() {
        let (a, b) = generate_simulated(&SimConfig::default()).unwrap();
        let jrw = compute_jrw(&a, &b, 2).unwrap();
        assert!(jrw.jrw_b[0][0] < jrw.jrw_a[0][0]);
        let r = compute_jcvpca(&a, &b, &JcvPcaConfig::for_task(1)).unwrap();
        assert!(r.delta[0][0] < 0.0 && r.delta[0][1] > 0.0, "{:?}", r.delta);
    }

    #[test]
    fn jrw_rows_are_unit_norm() {
        let a = sample_pair();
        let b = two_joint(
            "B",
            |t| ((3.0 * t).sin() * 10.0, (3.0 * t + 1.4).sin() * 30.0),
            2,
        );
        let jrw = compute_jrw(&a, &b, 2).unwrap();
        for row in jrw.jrw_a.iter().chain(&jrw.jrw_b) {
            assert_abs_diff_eq!(row.iter().map(|v| v * v).sum::<f64>(), 1.0, epsilon = 1e-9);
            assert!(row.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }

    #[test]
    fn reference_scale_invariance() {
        let a = sample_pair();
        let scaled = Dataset::new(
            "A3",
            a.joints().to_vec(),
            a.reps()
                .iter()
                .map(|r| {
                    let s = r
                        .all_series()
                        .iter()
                        .map(|v| v.iter().map(|x| 3.5 * x).collect())
                        .collect();
                    Repetition::new(r.time().to_vec(), s).unwrap()
                })
                .collect(),
            a.unit(),
        )
        .unwrap();
        let b = two_joint("B", |t| ((3.0 * t).sin(), (3.0 * t + 1.4).sin() * 3.0), 2);
        let x = compute_jrw(&a, &b, 2).unwrap();
        let y = compute_jrw(&scaled, &b, 2).unwrap();
        for (ra, rb) in x.jrw_a.iter().zip(&y.jrw_a) {
            for (p, q) in ra.iter().zip(rb) {
                assert_abs_diff_eq!(p, q, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn weighting_uses_reference_variance() {
        let (a, b) = generate_simulated(&SimConfig::default()).unwrap();
        let r = compute_jcvpca(&a, &b, &JcvPcaConfig::for_task(1)).unwrap();
        let w = r.weighted_delta.as_ref().unwrap();
        for u in 0..2 {
            for i in 0..2 {
                assert_abs_diff_eq!(w[u][i], r.delta[u][i] * r.jrw.explained_variance_a[u]);
            }
        }
        let plain = compute_jcvpca(
            &a,
            &b,
            &JcvPcaConfig {
                weight_by_variance: false,
                ..JcvPcaConfig::for_task(1)
            },
        )
        .unwrap();
        assert!(plain.weighted_delta.is_none());
    }

    #[test]
    fn parameter_checks() {
        let a = sample_pair();
        assert!(compute_jcvpca(&a, &a, &JcvPcaConfig::for_task(2)).is_err());
        assert!(compute_jcvpca(
            &a,
            &a,
            &JcvPcaConfig {
                p: 2,
                m: 1,
                weight_by_variance: false
            }
        )
        .is_err());
        let other = a.clone().with_name("x").permute_joints(&[1, 0]).unwrap();
        assert!(matches!(
            compute_jrw(&a, &other, 2),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn row_selection() {
        let (a, b) = generate_simulated(&SimConfig::default()).unwrap();
        let r = compute_jcvpca(&a, &b, &JcvPcaConfig::for_task(1)).unwrap();
        let task = select_rows(&r, Focus::Task);
        assert_eq!(task.rows, vec![0]);
        assert_eq!(task.values, vec![r.delta[0].clone()]);
        let null = select_rows(&r, Focus::NullSpace);
        assert_eq!(null.rows, vec![1]);
        assert!(null.warning.is_none());

        let full = compute_jcvpca(
            &a,
            &b,
            &JcvPcaConfig {
                p: 2,
                m: 2,
                weight_by_variance: false,
            },
        )
        .unwrap();
        let empty = select_rows(&full, Focus::NullSpace);
        assert!(empty.rows.is_empty());
        assert!(empty.warning.is_some());
    }
}
