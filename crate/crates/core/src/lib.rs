//! Metrics for quantifying changes in inter-joint coordination between two
//! kinematic datasets.
//!
//! Two complementary measures are provided:
//!
//! * **JcvPCA** ([`jcvpca`]): a reference dataset A is decomposed with PCA, a
//!   comparison dataset B is projected into A's component frame and decomposed
//!   again, and the per-joint absolute weights of both decompositions are
//!   subtracted. Positive entries mean a joint contributes more in B.
//! * **JsvCRP** ([`jsvcrp`]): for every joint pair, the mean continuous
//!   relative phase (CRP) curve of each dataset is computed on a normalized
//!   time grid, and the area between the two curves is reported.
//!
//! The [`baseline`] module estimates the natural variability of both metrics
//! by repeatedly splitting a single condition in two, and [`report`] turns
//! everything into JSON documents and plot-ready CSV files.
//!
//! ```
//! use jointcoord::dataset::{generate_simulated, NormalizedGrid, SimConfig};
//! use jointcoord::jcvpca::{compute_jcvpca, JcvPcaConfig};
//! use jointcoord::jsvcrp::jsvcrp;
//! use jointcoord::crp::CrpOptions;
//!
//! let (a, b) = generate_simulated(&SimConfig::default()).unwrap();
//! let jcv = compute_jcvpca(&a, &b, &JcvPcaConfig::for_task(1)).unwrap();
//! assert!(jcv.delta[0][0] < 0.0);
//!
//! let grid = NormalizedGrid::default();
//! let sync = jsvcrp(&a, &b, 0, 1, &grid, &CrpOptions::default()).unwrap();
//! assert!(sync.area > 0.0);
//! ```

// small dense matrix kernels read best with explicit indices
#![allow(clippy::needless_range_loop)]

pub mod baseline;
pub mod crp;
pub mod dataset;
pub mod error;
pub mod jcvpca;
pub mod jsvcrp;
mod linalg;
pub mod pca;
pub mod report;

pub use baseline::{
    classify_jcvpca, classify_jsvcrp, shuffle_split_baseline, BaselineConfig, BaselineReport,
    SignificanceVerdict, ThresholdRule, Verdict,
};
pub use crp::{crp_pair, mean_crp, phase_angle, CrpCurve, CrpOptions, PhaseAngleSeries};
pub use dataset::{
    AngleUnit, Dataset, DiffMethod, NormalizedGrid, Repetition, SimConfig, VelocityProfile,
};
pub use error::{Error, Result};
pub use jcvpca::{compute_jcvpca, compute_jrw, JcvPcaConfig, JcvPcaResult, JrwMatrices};
pub use jsvcrp::{jsvcrp, jsvcrp_all_pairs, JsvCrpResult};
pub use pca::{fit_pca, project, PcaModel, ProjectedDataset};
pub use report::{AnalysisReport, Conventions};

/// Version string echoed into every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
