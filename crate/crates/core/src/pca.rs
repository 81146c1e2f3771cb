//! Principal component analysis over concatenated joint trajectories.
//!
//! Data are centered but never scaled: joints with large excursions must keep
//! their weight. Covariance uses the `1/(N-1)` normalization, components are
//! the covariance eigenvectors sorted by descending eigenvalue, and every
//! component is signed so that its largest-magnitude entry is non-negative.

use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, Repetition};
use crate::error::{Error, Result};
use crate::linalg::{dot, symmetric_eigen};

/// Relative eigenvalue gap under which the retained/discarded split is
/// reported as ill-determined.
pub const TIE_RELATIVE_GAP: f64 = 0.1;

/// Eigenvalues closer than this (relative to the largest) are treated as
/// exactly tied when ordering components.
const EXACT_TIE: f64 = 1e-12;

/// Recommended minimum samples per variable.
pub const SAMPLES_PER_VARIABLE: usize = 10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PcaWarning {
    /// The last retained and first discarded eigenvalues are nearly equal, so
    /// the retained subspace is not uniquely defined.
    EigenvalueTie {
        component: usize,
        retained: f64,
        discarded: f64,
    },
    SmallSample {
        samples: usize,
        recommended: usize,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    /// `m x n`, one unit eigenvector per row.
    pub components: Vec<Vec<f64>>,
    /// Covariance eigenvalues of the retained components.
    pub eigenvalues: Vec<f64>,
    pub explained_variance_ratio: Vec<f64>,
    /// Trace of the covariance matrix (sum of all `n` eigenvalues).
    pub total_variance: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<PcaWarning>,
}

/// Scores of a dataset in some model's component frame; joints are labeled
/// `PC1..PCm`.
pub type ProjectedDataset = Dataset;

impl PcaModel {
    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn n_features(&self) -> usize {
        self.mean.len()
    }

    /// Scores of one sample: `score_u = sum_i a_ui (x_i - mean_i)`.
    pub fn transform(&self, sample: &[f64]) -> Vec<f64> {
        let centered: Vec<f64> = sample.iter().zip(&self.mean).map(|(x, m)| x - m).collect();
        self.components.iter().map(|a| dot(a, &centered)).collect()
    }

    /// Maps scores back to centered joint space.
    pub fn reconstruct_centered(&self, scores: &[f64]) -> Vec<f64> {
        (0..self.n_features())
            .map(|i| {
                self.components
                    .iter()
                    .zip(scores)
                    .map(|(a, s)| a[i] * s)
                    .sum()
            })
            .collect()
    }
}

/// Fits PCA on row samples (`rows[t]` is one observation of `n` variables),
/// keeping `m` components.
pub fn fit_rows(rows: &[Vec<f64>], m: usize) -> Result<PcaModel> {
    let n = rows.first().map_or(0, Vec::len);
    if n == 0 {
        return Err(Error::Validation("PCA needs at least one variable".into()));
    }
    if m == 0 || m > n {
        return Err(Error::Parameter(format!(
            "component count {m} outside 1..={n}"
        )));
    }
    let count = rows.len();
    if count < 2 {
        return Err(Error::Validation(format!(
            "PCA needs at least 2 samples, got {count}"
        )));
    }
    if rows.iter().any(|r| r.len() != n) {
        return Err(Error::Validation("samples have differing lengths".into()));
    }

    let mean: Vec<f64> = (0..n)
        .map(|i| rows.iter().map(|r| r[i]).sum::<f64>() / count as f64)
        .collect();
    let mut cov = vec![vec![0.0; n]; n];
    for r in rows {
        let d: Vec<f64> = r.iter().zip(&mean).map(|(x, m)| x - m).collect();
        for i in 0..n {
            for j in i..n {
                cov[i][j] += d[i] * d[j];
            }
        }
    }
    let denom = (count - 1) as f64;
    for i in 0..n {
        for j in i..n {
            cov[i][j] /= denom;
            cov[j][i] = cov[i][j];
        }
    }

    let (values, vectors) = symmetric_eigen(&cov);
    let values: Vec<f64> = values.into_iter().map(|v| v.max(0.0)).collect();
    let mut pairs: Vec<(f64, Vec<f64>)> = values
        .into_iter()
        .zip(vectors)
        .map(|(v, mut vec)| {
            apply_sign_convention(&mut vec);
            (v, vec)
        })
        .collect();
    order_components(&mut pairs);

    let total: f64 = pairs.iter().map(|(v, _)| v).sum();
    let mut warnings = Vec::new();
    if m < n {
        let (kept, dropped) = (pairs[m - 1].0, pairs[m].0);
        if kept > 0.0 && (kept - dropped) <= TIE_RELATIVE_GAP * kept {
            warnings.push(PcaWarning::EigenvalueTie {
                component: m,
                retained: kept,
                discarded: dropped,
            });
        }
    }
    let recommended = SAMPLES_PER_VARIABLE * n;
    if count < recommended {
        warnings.push(PcaWarning::SmallSample {
            samples: count,
            recommended,
        });
    }

    pairs.truncate(m);
    let explained_variance_ratio = pairs
        .iter()
        .map(|(v, _)| if total > 0.0 { v / total } else { 0.0 })
        .collect();
    let (eigenvalues, components) = pairs.into_iter().unzip();
    Ok(PcaModel {
        mean,
        components,
        eigenvalues,
        explained_variance_ratio,
        total_variance: total,
        warnings,
    })
}

/// Fits PCA on all samples of all repetitions of `ds`, concatenated.
pub fn fit_pca(ds: &Dataset, m: usize) -> Result<PcaModel> {
    let rows: Vec<Vec<f64>> = ds.samples().collect();
    fit_rows(&rows, m)
}

/// Expresses every sample of `ds` as scores in `model`'s frame. Samples are
/// centered with the model's mean, not the dataset's own.
pub fn project(ds: &Dataset, model: &PcaModel) -> Result<ProjectedDataset> {
    if ds.n_joints() != model.n_features() {
        return Err(Error::Parameter(format!(
            "dataset '{}' has {} joints, model expects {}",
            ds.name(),
            ds.n_joints(),
            model.n_features()
        )));
    }
    let reps = ds
        .reps()
        .iter()
        .map(|rep| {
            let scores: Vec<Vec<f64>> = (0..rep.len())
                .map(|t| model.transform(&rep.sample(t)))
                .collect();
            let series = (0..model.n_components())
                .map(|u| scores.iter().map(|s| s[u]).collect())
                .collect();
            Repetition::new(rep.time().to_vec(), series)
        })
        .collect::<Result<Vec<_>>>()?;
    let labels = (1..=model.n_components())
        .map(|u| format!("PC{u}"))
        .collect();
    Dataset::new(ds.name(), labels, reps, ds.unit())
}

/// Flips `v` so that its largest-magnitude entry (first one on ties) is
/// non-negative.
fn apply_sign_convention(v: &mut [f64]) {
    let lead = argmax_abs(v);
    if v[lead] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

fn argmax_abs(v: &[f64]) -> usize {
    v.iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |(bi, bv), (i, x)| {
            if x.abs() > bv {
                (i, x.abs())
            } else {
                (bi, bv)
            }
        })
        .0
}

/// Descending eigenvalue; runs of tied eigenvalues are ordered by the joint
/// index of each vector's largest entry.
fn order_components(pairs: &mut [(f64, Vec<f64>)]) {
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let tol = EXACT_TIE * pairs.first().map_or(0.0, |p| p.0);
    let mut start = 0;
    while start < pairs.len() {
        let mut end = start + 1;
        while end < pairs.len() && pairs[start].0 - pairs[end].0 <= tol {
            end += 1;
        }
        pairs[start..end].sort_by_key(|p| argmax_abs(&p.1));
        start = end;
    }
}

#[cfg(test)]
mod tests {
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    use super::*;
    use crate::dataset::AngleUnit;

    fn dataset(rows: &[Vec<f64>]) -> Dataset {
        let n = rows[0].len();
        let time = (0..rows.len()).map(|t| t as f64).collect();
        let series = (0..n)
            .map(|j| rows.iter().map(|r| r[j]).collect())
            .collect();
        let labels = (0..n).map(|j| format!("j{j}")).collect();
        Dataset::new(
            "t",
            labels,
            vec![Repetition::new(time, series).unwrap()],
            AngleUnit::Deg,
        )
        .unwrap()
    }

    fn variance(v: &[f64]) -> f64 {
        let m = v.iter().sum::<f64>() / v.len() as f64;
        v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64
    }

    #[test]
    fn rank_one_data() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|t| {
                let x = (t as f64 * 0.37).sin() * 3.0 + 1.0;
                vec![x, 2.0 * x]
            })
            .collect();
        let model = fit_rows(&rows, 2).unwrap();
        let s5 = 5f64.sqrt();
        assert_abs_diff_eq!(model.components[0][0], 1.0 / s5, epsilon = 1e-6);
        assert_abs_diff_eq!(model.components[0][1], 2.0 / s5, epsilon = 1e-6);
        assert_abs_diff_eq!(model.explained_variance_ratio[0], 1.0, epsilon = 1e-9);
        assert_abs_diff_eq!(model.explained_variance_ratio[1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn isotropic_cloud_warns_about_tie() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let rows: Vec<Vec<f64>> = (0..5000)
            .map(|_| {
                vec![
                    StandardNormal.sample(&mut rng),
                    StandardNormal.sample(&mut rng),
                ]
            })
            .collect();
        let model = fit_rows(&rows, 1).unwrap();
        let full = fit_rows(&rows, 2).unwrap();
        let (l1, l2) = (full.eigenvalues[0], full.eigenvalues[1]);
        assert!((l1 - l2) / l1 < 0.1, "{l1} {l2}");
        assert!(model
            .warnings
            .iter()
            .any(|w| matches!(w, PcaWarning::EigenvalueTie { component: 1, .. })));
    }

    #[test]
    fn decorrelated_axes_give_basis_vectors() {
        let rows: Vec<Vec<f64>> = (0..60)
            .map(|t| {
                let s = t as f64 * 0.21;
                vec![0.3 * s.cos(), 4.0 * s.sin(), 1.5 * (2.0 * s).sin()]
            })
            .collect();
        // Rotate into the data's own PC frame, then refit.
        let first = fit_rows(&rows, 3).unwrap();
        let scores: Vec<Vec<f64>> = rows.iter().map(|r| first.transform(r)).collect();
        let refit = fit_rows(&scores, 3).unwrap();
        for (u, row) in refit.components.iter().enumerate() {
            for (i, v) in row.iter().enumerate() {
                let expected = if i == u { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(v.abs(), expected, epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn components_are_orthonormal_and_signed() {
        let rows: Vec<Vec<f64>> = (0..80)
            .map(|t| {
                let s = t as f64 * 0.13;
                vec![
                    s.sin(),
                    (1.3 * s).cos() - 0.2 * s.sin(),
                    -(0.7 * s).sin(),
                    0.1 * s,
                ]
            })
            .collect();
        let model = fit_rows(&rows, 4).unwrap();
        for a in &model.components {
            assert_abs_diff_eq!(dot(a, a), 1.0, epsilon = 1e-9);
            assert!(a[argmax_abs(a)] >= 0.0);
        }
        for u in 0..4 {
            for w in u + 1..4 {
                assert!(dot(&model.components[u], &model.components[w]).abs() < 1e-9);
            }
        }
        assert!(model
            .explained_variance_ratio
            .windows(2)
            .all(|w| w[0] >= w[1]));
        assert_abs_diff_eq!(
            model.explained_variance_ratio.iter().sum::<f64>(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn own_scores_carry_the_eigenvalues() {
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|t| {
                let s = t as f64 * 0.3;
                vec![2.0 * s.sin(), s.sin() + 0.5 * s.cos()]
            })
            .collect();
        let ds = dataset(&rows);
        let model = fit_pca(&ds, 2).unwrap();
        let proj = project(&ds, &model).unwrap();
        assert_eq!(proj.joints(), &["PC1".to_string(), "PC2".to_string()]);
        for u in 0..2 {
            assert_abs_diff_eq!(
                variance(proj.reps()[0].series(u)),
                model.eigenvalues[u],
                epsilon = 1e-9 * model.eigenvalues[0]
            );
        }
        // full reconstruction
        for (t, r) in rows.iter().enumerate() {
            let back = model.reconstruct_centered(&proj.reps()[0].sample(t));
            for i in 0..2 {
                assert_abs_diff_eq!(back[i], r[i] - model.mean[i], epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn identity_frame_projection() {
        let model = PcaModel {
            mean: vec![1.0, 2.0],
            components: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
            eigenvalues: vec![1.0, 1.0],
            explained_variance_ratio: vec![0.5, 0.5],
            total_variance: 2.0,
            warnings: vec![],
        };
        assert_eq!(model.transform(&[1.0, 2.0]), vec![0.0, 0.0]);
        assert_eq!(model.transform(&[3.0, -1.0]), vec![2.0, -3.0]);
    }

    #[test]
    fn bad_component_counts() {
        let rows = vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![2.0, 2.0]];
        assert!(matches!(fit_rows(&rows, 0), Err(Error::Parameter(_))));
        assert!(matches!(fit_rows(&rows, 3), Err(Error::Parameter(_))));
        let model = fit_rows(&rows, 2).unwrap();
        assert!(model
            .warnings
            .iter()
            .any(|w| matches!(w, PcaWarning::SmallSample { .. })));
    }

    #[test]
    fn projection_dimension_mismatch() {
        let ds = dataset(&[
            vec![0.0, 1.0, 2.0],
            vec![1.0, 0.0, 2.0],
            vec![2.0, 2.0, 0.0],
        ]);
        let model = fit_rows(&[vec![0.0, 1.0], vec![1.0, 0.0], vec![2.0, 2.5]], 1).unwrap();
        assert!(matches!(project(&ds, &model), Err(Error::Parameter(_))));
    }

    #[test]
    fn rotation_equivariance_2d() {
        let rows: Vec<Vec<f64>> = (0..200)
            .map(|t| {
                let s = t as f64 * 0.05;
                vec![3.0 * s.sin(), 0.8 * (2.1 * s).cos()]
            })
            .collect();
        let base = fit_rows(&rows, 2).unwrap();
        for alpha in [0.3f64, 1.1, 2.5, -0.7] {
            let (c, s) = (alpha.cos(), alpha.sin());
            let rotated: Vec<Vec<f64>> = rows
                .iter()
                .map(|r| vec![c * r[0] - s * r[1], s * r[0] + c * r[1]])
                .collect();
            let fit = fit_rows(&rotated, 2).unwrap();
            for u in 0..2 {
                let v = &base.components[u];
                let expected = [c * v[0] - s * v[1], s * v[0] + c * v[1]];
                assert_abs_diff_eq!(
                    dot(&expected, &fit.components[u]).abs(),
                    1.0,
                    epsilon = 1e-9
                );
            }
        }
    }

    #[test]
    fn fit_is_deterministic() {
        let rows: Vec<Vec<f64>> = (0..30)
            .map(|t| vec![(t as f64).sin(), (t as f64 * 0.5).cos(), t as f64 * 0.01])
            .collect();
        assert_eq!(fit_rows(&rows, 2).unwrap(), fit_rows(&rows, 2).unwrap());
    }
}
