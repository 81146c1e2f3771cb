//! Natural-variability baseline: a single condition is repeatedly shuffled
//! and split in two, both metrics are computed between the halves, and their
//! mean, standard deviation and standard error become the significance band.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crp::CrpOptions;
use crate::dataset::{Dataset, NormalizedGrid};
use crate::error::{Error, Result};
use crate::jcvpca::{compute_jcvpca, JcvPcaConfig, JcvPcaResult};
use crate::jsvcrp::{jsvcrp_all_pairs, JsvCrpResult};

pub const DEFAULT_SPLITS: usize = 15;
/// Each half needs at least two repetitions.
pub const MIN_REPETITIONS: usize = 4;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdRule {
    /// `mean +/- std`.
    #[default]
    MeanStd,
    /// `mean +/- std / sqrt(n_splits)`.
    MeanSem,
}

impl fmt::Display for ThresholdRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ThresholdRule::MeanStd => "std",
            ThresholdRule::MeanSem => "sem",
        })
    }
}

impl FromStr for ThresholdRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "std" | "mean_std" => Ok(ThresholdRule::MeanStd),
            "sem" | "mean_sem" => Ok(ThresholdRule::MeanSem),
            other => Err(Error::Config(format!(
                "unknown threshold rule '{other}' (expected std or sem)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineConfig {
    pub n_splits: usize,
    pub seed: u64,
    pub m: usize,
    pub grid: NormalizedGrid,
    pub crp: CrpOptions,
    pub rule: ThresholdRule,
}

impl BaselineConfig {
    pub fn new(m: usize) -> Self {
        Self {
            n_splits: DEFAULT_SPLITS,
            seed: 0,
            m,
            grid: NormalizedGrid::default(),
            crp: CrpOptions::default(),
            rule: ThresholdRule::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    /// Sample standard deviation (`n - 1` denominator).
    pub std: f64,
    pub sem: f64,
}

impl Summary {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        let std = var.sqrt();
        Self {
            mean,
            std,
            sem: std / n.sqrt(),
        }
    }

    pub fn band(&self, rule: ThresholdRule) -> f64 {
        match rule {
            ThresholdRule::MeanStd => self.std,
            ThresholdRule::MeanSem => self.sem,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairSummary {
    pub pair: (usize, usize),
    #[serde(flatten)]
    pub summary: Summary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BaselineReport {
    pub dataset: String,
    pub n_reps: usize,
    pub n_splits: usize,
    pub seed: u64,
    pub m: usize,
    pub grid_size: usize,
    pub rule: ThresholdRule,
    pub jcvpca_mean: Vec<Vec<f64>>,
    pub jcvpca_std: Vec<Vec<f64>>,
    pub jcvpca_sem: Vec<Vec<f64>>,
    /// JsvCRP area (normalized time axis) per joint pair.
    pub jsvcrp: Vec<PairSummary>,
}

impl BaselineReport {
    pub fn jcvpca_summary(&self, u: usize, i: usize) -> Summary {
        Summary {
            mean: self.jcvpca_mean[u][i],
            std: self.jcvpca_std[u][i],
            sem: self.jcvpca_sem[u][i],
        }
    }
}

/// Repetition indices of split `index`: a ChaCha stream per split, derived
/// from the master seed, so splits can run in any order.
pub fn split_indices(n_reps: usize, seed: u64, index: usize) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let mut order: Vec<usize> = (0..n_reps).collect();
    order.shuffle(&mut rng);
    // odd k: the reference half gets the extra repetition
    let comparison = order.split_off(n_reps.div_ceil(2));
    (order, comparison)
}

pub fn shuffle_split_baseline(ds: &Dataset, config: &BaselineConfig) -> Result<BaselineReport> {
    let k = ds.n_reps();
    if k < MIN_REPETITIONS {
        return Err(Error::InsufficientRepetitions {
            found: k,
            required: MIN_REPETITIONS,
        });
    }
    if config.n_splits < 2 {
        return Err(Error::Parameter(format!(
            "need at least 2 splits, got {}",
            config.n_splits
        )));
    }
    let jcv_config = JcvPcaConfig {
        p: 1,
        m: config.m,
        weight_by_variance: false,
    };
    jcv_config.validate(ds.n_joints())?;

    let runs = (0..config.n_splits)
        .into_par_iter()
        .map(|s| {
            let (ref_idx, cmp_idx) = split_indices(k, config.seed, s);
            let a = ds.subset(format!("{}#{s}a", ds.name()), &ref_idx)?;
            let b = ds.subset(format!("{}#{s}b", ds.name()), &cmp_idx)?;
            let jcv = compute_jcvpca(&a, &b, &jcv_config)?;
            let jsv = jsvcrp_all_pairs(&a, &b, &config.grid, &config.crp)?;
            Ok((
                jcv.delta,
                jsv.into_iter()
                    .map(|r| (r.pair, r.area))
                    .collect::<Vec<_>>(),
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let (rows, cols) = (runs[0].0.len(), runs[0].0[0].len());
    let mut jcvpca_mean = vec![vec![0.0; cols]; rows];
    let mut jcvpca_std = jcvpca_mean.clone();
    let mut jcvpca_sem = jcvpca_mean.clone();
    for u in 0..rows {
        for i in 0..cols {
            let values: Vec<f64> = runs.iter().map(|(d, _)| d[u][i]).collect();
            let s = Summary::of(&values);
            jcvpca_mean[u][i] = s.mean;
            jcvpca_std[u][i] = s.std;
            jcvpca_sem[u][i] = s.sem;
        }
    }
    let jsvcrp = runs[0]
        .1
        .iter()
        .enumerate()
        .map(|(p, (pair, _))| {
            let values: Vec<f64> = runs.iter().map(|(_, areas)| areas[p].1).collect();
            PairSummary {
                pair: *pair,
                summary: Summary::of(&values),
            }
        })
        .collect();

    Ok(BaselineReport {
        dataset: ds.name().to_owned(),
        n_reps: k,
        n_splits: config.n_splits,
        seed: config.seed,
        m: config.m,
        grid_size: config.grid.len(),
        rule: config.rule,
        jcvpca_mean,
        jcvpca_std,
        jcvpca_sem,
        jsvcrp,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    WithinVariability,
    ExceedsVariability,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::WithinVariability => "within",
            Verdict::ExceedsVariability => "EXCEEDS",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ElementVerdict {
    pub value: f64,
    pub lower: f64,
    pub upper: f64,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairVerdict {
    pub pair: (usize, usize),
    #[serde(flatten)]
    pub element: ElementVerdict,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SignificanceVerdict {
    pub rule: ThresholdRule,
    /// `m x n`, mirrors the JcvPCA delta.
    pub jcvpca: Vec<Vec<ElementVerdict>>,
    pub jsvcrp: Vec<PairVerdict>,
}

/// Absolute slack on band edges so round-off never flips a verdict when
/// the band has zero width (identical repetitions).
pub const CLASSIFY_TOLERANCE: f64 = 1e-9;

/// Two-sided interval test: exceeds iff `value` lies outside
/// `[mean - band, mean + band]` by more than [`CLASSIFY_TOLERANCE`].
pub fn classify_value(value: f64, summary: &Summary, rule: ThresholdRule) -> ElementVerdict {
    let band = summary.band(rule);
    let (lower, upper) = (summary.mean - band, summary.mean + band);
    let verdict = if value < lower - CLASSIFY_TOLERANCE || value > upper + CLASSIFY_TOLERANCE {
        Verdict::ExceedsVariability
    } else {
        Verdict::WithinVariability
    };
    ElementVerdict {
        value,
        lower,
        upper,
        verdict,
    }
}

/// Areas are distances, so only values above `mean + band` exceed the
/// natural variability; a smaller area means the curves are closer than
/// chance and is reported as within.
pub fn classify_area(value: f64, summary: &Summary, rule: ThresholdRule) -> ElementVerdict {
    let band = summary.band(rule);
    let upper = summary.mean + band;
    ElementVerdict {
        value,
        lower: summary.mean - band,
        upper,
        verdict: if value > upper + CLASSIFY_TOLERANCE {
            Verdict::ExceedsVariability
        } else {
            Verdict::WithinVariability
        },
    }
}

pub fn classify_jcvpca(
    result: &JcvPcaResult,
    baseline: &BaselineReport,
    rule: ThresholdRule,
) -> Result<Vec<Vec<ElementVerdict>>> {
    let shape = |m: &[Vec<f64>]| (m.len(), m.first().map_or(0, Vec::len));
    if shape(&result.delta) != shape(&baseline.jcvpca_mean) {
        return Err(Error::Parameter(format!(
            "JcvPCA result is {:?} but baseline is {:?}",
            shape(&result.delta),
            shape(&baseline.jcvpca_mean)
        )));
    }
    Ok(result
        .delta
        .iter()
        .enumerate()
        .map(|(u, row)| {
            row.iter()
                .enumerate()
                .map(|(i, v)| classify_value(*v, &baseline.jcvpca_summary(u, i), rule))
                .collect()
        })
        .collect())
}

pub fn classify_jsvcrp(
    results: &[JsvCrpResult],
    baseline: &BaselineReport,
    rule: ThresholdRule,
) -> Result<Vec<PairVerdict>> {
    results
        .iter()
        .map(|r| {
            let stats = baseline
                .jsvcrp
                .iter()
                .find(|p| p.pair == r.pair)
                .ok_or_else(|| {
                    Error::Parameter(format!("baseline has no entry for pair {:?}", r.pair))
                })?;
            Ok(PairVerdict {
                pair: r.pair,
                element: classify_area(r.area, &stats.summary, rule),
            })
        })
        .collect()
}

pub fn classify(
    jcvpca: &JcvPcaResult,
    jsvcrp: &[JsvCrpResult],
    baseline: &BaselineReport,
    rule: ThresholdRule,
) -> Result<SignificanceVerdict> {
    Ok(SignificanceVerdict {
        rule,
        jcvpca: classify_jcvpca(jcvpca, baseline, rule)?,
        jsvcrp: classify_jsvcrp(jsvcrp, baseline, rule)?,
    })
}
