//! Report assembly, JSON rendering and plot-ready CSV export.
//!
//! JSON is the canonical machine format; CSV files only carry the numbers a
//! plotting tool needs. Floats are always written with the shortest
//! representation that parses back to the same value.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::baseline::{
    classify, shuffle_split_baseline, BaselineConfig, BaselineReport, SignificanceVerdict, Verdict,
};
use crate::crp::{Alignment, CrpOptions, DegeneratePolicy};
use crate::dataset::{AngleUnit, Dataset, NormalizedGrid};
use crate::error::{Error, Result};
use crate::jcvpca::{compute_jcvpca, JcvPcaConfig, JcvPcaResult};
use crate::jsvcrp::{jsvcrp_all_pairs, JsvCrpResult};

/// Every choice needed to re-derive a result from the same inputs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Conventions {
    pub centering: String,
    pub subtraction: String,
    pub eigenvector_sign: String,
    pub variance_weighting: String,
    pub crp_orientation: String,
    pub phase_unwrapping: bool,
    pub time_normalization: String,
    pub velocity: String,
    pub degenerate_joint_policy: String,
    pub integration_axis: String,
}

impl Conventions {
    pub fn new(crp: &CrpOptions) -> Self {
        Self {
            centering: "comparison projected after centering with the reference mean; each PCA centers its own input".into(),
            subtraction: "delta = |b_A| - |a| (positive: joint contributes more in the comparison)".into(),
            eigenvector_sign: "largest-magnitude entry of each component is non-negative".into(),
            variance_weighting: "weighted_delta[u] = reference explained-variance ratio[u] * delta[u]".into(),
            crp_orientation: "crp(i, j) = phi_i - phi_j with phi = atan2(velocity, position); positive: joint j leads".into(),
            phase_unwrapping: true,
            time_normalization: match crp.alignment {
                Alignment::Linear => "linear, (t - t0) / (t_end - t0)".into(),
                Alignment::Dtw => "linear, then DTW onto the first repetition".into(),
            },
            velocity: format!(
                "{:?} on the normalized grid{}",
                crp.diff_method,
                crp.smoothing
                    .map(|w| format!(", moving average window {w}"))
                    .unwrap_or_default()
            ),
            degenerate_joint_policy: match crp.degenerate_policy {
                DegeneratePolicy::ConstantZero => "constant zero".into(),
                DegeneratePolicy::Error => "error".into(),
            },
            integration_axis: "area: normalized time [0, 1]; area_percent: [0, 100] %".into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool_version: String,
    pub reference: String,
    pub comparison: String,
    pub joints: Vec<String>,
    pub unit: AngleUnit,
    pub m: usize,
    pub p: usize,
    pub grid_size: usize,
    pub conventions: Conventions,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub metadata: Metadata,
    pub jcvpca: JcvPcaResult,
    pub jsvcrp: Vec<JsvCrpResult>,
    pub baseline: Option<BaselineReport>,
    pub verdicts: Option<SignificanceVerdict>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct AnalysisConfig {
    pub jcvpca: JcvPcaConfig,
    pub grid: NormalizedGrid,
    pub crp: CrpOptions,
    /// Baseline computed on the reference dataset when set.
    pub baseline: Option<BaselineConfig>,
}

/// Runs both metrics (and optionally the baseline with classification) for
/// `reference` vs `comparison`.
pub fn analyze(
    reference: &Dataset,
    comparison: &Dataset,
    config: &AnalysisConfig,
) -> Result<AnalysisReport> {
    let jcvpca = compute_jcvpca(reference, comparison, &config.jcvpca)?;
    let jsvcrp = jsvcrp_all_pairs(reference, comparison, &config.grid, &config.crp)?;
    let (baseline, verdicts) = match &config.baseline {
        Some(cfg) => {
            let base = shuffle_split_baseline(reference, cfg)?;
            let verdicts = classify(&jcvpca, &jsvcrp, &base, cfg.rule)?;
            (Some(base), Some(verdicts))
        }
        None => (None, None),
    };
    Ok(AnalysisReport {
        metadata: Metadata {
            tool_version: crate::VERSION.to_owned(),
            reference: reference.name().to_owned(),
            comparison: comparison.name().to_owned(),
            joints: reference.joints().to_vec(),
            unit: reference.unit(),
            m: config.jcvpca.m,
            p: config.jcvpca.p,
            grid_size: config.grid.len(),
            conventions: Conventions::new(&config.crp),
        },
        jcvpca,
        jsvcrp,
        baseline,
        verdicts,
    })
}

pub fn render_json(report: &AnalysisReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)?;
    s.push('\n');
    Ok(s)
}

pub fn parse_json(text: &str) -> Result<AnalysisReport> {
    Ok(serde_json::from_str(text)?)
}

pub fn render_baseline_json(baseline: &BaselineReport) -> Result<String> {
    let mut s = serde_json::to_string_pretty(baseline)?;
    s.push('\n');
    Ok(s)
}

fn matrix_csv(joints: &[String], rows: &[Vec<f64>]) -> String {
    let mut out = String::from("component");
    for j in joints {
        out.push(',');
        out.push_str(j);
    }
    out.push('\n');
    for (u, row) in rows.iter().enumerate() {
        let _ = write!(out, "PC{}", u + 1);
        for v in row {
            let _ = write!(out, ",{v}");
        }
        out.push('\n');
    }
    out
}

fn write_file(path: PathBuf, body: &str) -> Result<PathBuf> {
    fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

#[derive(Serialize)]
struct CrpPairMetadata<'a> {
    pair: (usize, usize),
    joints: (&'a str, &'a str),
    reference_reps: usize,
    comparison_reps: usize,
    area: f64,
    area_percent: f64,
    reference_flags: &'a crate::crp::CrpFlags,
    comparison_flags: &'a crate::crp::CrpFlags,
}

/// Writes the plot CSVs for `report` into `out_dir`, overwriting existing
/// files. Returns the written paths in a fixed order.
pub fn export_plot_data(report: &AnalysisReport, out_dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let joints = &report.metadata.joints;
    let jcv = &report.jcvpca;
    let mut written = vec![
        write_file(
            out_dir.join("jrw_a.csv"),
            &matrix_csv(joints, &jcv.jrw.jrw_a),
        )?,
        write_file(
            out_dir.join("jrw_b.csv"),
            &matrix_csv(joints, &jcv.jrw.jrw_b),
        )?,
        write_file(
            out_dir.join("jcvpca_delta.csv"),
            &matrix_csv(joints, &jcv.delta),
        )?,
    ];
    if let Some(w) = &jcv.weighted_delta {
        written.push(write_file(
            out_dir.join("jcvpca_weighted_delta.csv"),
            &matrix_csv(joints, w),
        )?);
    }

    for r in &report.jsvcrp {
        let (i, j) = r.pair;
        let stem = format!("crp_pair_{}_{}", i + 1, j + 1);
        let mut csv = String::from("percent,crp_a_deg,crp_b_deg,abs_difference_deg\n");
        for (g, s) in r.curve_a.grid.percent().iter().enumerate() {
            let _ = writeln!(
                csv,
                "{s},{},{},{}",
                r.curve_a.values[g], r.curve_b.values[g], r.difference_profile[g]
            );
        }
        written.push(write_file(out_dir.join(format!("{stem}.csv")), &csv)?);
        let meta = CrpPairMetadata {
            pair: r.pair,
            joints: (&joints[i], &joints[j]),
            reference_reps: r.curve_a.n_reps_averaged,
            comparison_reps: r.curve_b.n_reps_averaged,
            area: r.area,
            area_percent: r.area_percent,
            reference_flags: &r.curve_a.flags,
            comparison_flags: &r.curve_b.flags,
        };
        let mut body = serde_json::to_string_pretty(&meta)?;
        body.push('\n');
        written.push(write_file(out_dir.join(format!("{stem}.json")), &body)?);
    }

    if let Some(base) = &report.baseline {
        written.push(write_file(
            out_dir.join("baseline_summary.csv"),
            &baseline_csv(base, joints),
        )?);
    }
    Ok(written)
}

pub fn baseline_csv(base: &BaselineReport, joints: &[String]) -> String {
    let mut out = String::from("metric,component,target,mean,std,sem\n");
    for u in 0..base.jcvpca_mean.len() {
        for (i, joint) in joints.iter().enumerate() {
            let s = base.jcvpca_summary(u, i);
            let _ = writeln!(
                out,
                "jcvpca,PC{},{joint},{},{},{}",
                u + 1,
                s.mean,
                s.std,
                s.sem
            );
        }
    }
    for p in &base.jsvcrp {
        let (i, j) = p.pair;
        let _ = writeln!(
            out,
            "jsvcrp,,{}-{},{},{},{}",
            joints[i], joints[j], p.summary.mean, p.summary.std, p.summary.sem
        );
    }
    out
}

/// Human-readable tables of a baseline: `mean +/- std` and `mean +/- sem`.
pub fn render_baseline_tables(base: &BaselineReport, joints: &[String]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "Natural variability of '{}' ({} repetitions, {} splits, seed {})",
        base.dataset, base.n_reps, base.n_splits, base.seed
    );
    for (label, sem) in [("mean ± std", false), ("mean ± sem", true)] {
        let _ = writeln!(out, "\n{label}");
        for u in 0..base.jcvpca_mean.len() {
            let _ = write!(out, "  JcvPCA PC{}:", u + 1);
            for (i, joint) in joints.iter().enumerate() {
                let s = base.jcvpca_summary(u, i);
                let band = if sem { s.sem } else { s.std };
                let _ = write!(out, "  {joint} {:.4} ± {:.4}", s.mean, band);
            }
            out.push('\n');
        }
        for p in &base.jsvcrp {
            let band = if sem { p.summary.sem } else { p.summary.std };
            let _ = writeln!(
                out,
                "  JsvCRP {}-{}: {:.2} ± {:.2} deg (normalized time)",
                joints[p.pair.0], joints[p.pair.1], p.summary.mean, band
            );
        }
    }
    out
}

/// Short prose summary: signed percentages per joint and component, areas
/// per pair, and verdict tags when a baseline is present.
pub fn render_summary(report: &AnalysisReport) -> String {
    let meta = &report.metadata;
    let jcv = &report.jcvpca;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "JcvPCA: '{}' compared to reference '{}' (m = {}, p = {})",
        meta.comparison, meta.reference, meta.m, meta.p
    );
    let verdict_tag = |v: Option<Verdict>| v.map(|v| format!(" [{v}]")).unwrap_or_default();
    for (u, row) in jcv.percentages().iter().enumerate() {
        let role = if u < jcv.p { "task" } else { "null space" };
        let _ = write!(out, "  PC{} ({role}):", u + 1);
        for (i, pct) in row.iter().enumerate() {
            let tag = verdict_tag(report.verdicts.as_ref().map(|v| v.jcvpca[u][i].verdict));
            let _ = write!(out, "  {} {:+}%{tag}", meta.joints[i], pct);
        }
        out.push('\n');
    }
    let _ = writeln!(out, "JsvCRP (area between mean CRP curves):");
    for (k, r) in report.jsvcrp.iter().enumerate() {
        let tag = verdict_tag(
            report
                .verdicts
                .as_ref()
                .map(|v| v.jsvcrp[k].element.verdict),
        );
        let _ = writeln!(
            out,
            "  {}-{}: {:.3} deg (normalized time) = {:.1} deg·% = {:.4} rad (normalized time){tag}",
            meta.joints[r.pair.0],
            meta.joints[r.pair.1],
            r.area,
            r.area_percent,
            r.area_rad()
        );
    }
    if let Some(v) = &report.verdicts {
        let _ = writeln!(out, "Threshold rule: mean ± {}", v.rule);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{generate_simulated, SimConfig};

    fn config(baseline: bool) -> AnalysisConfig {
        AnalysisConfig {
            jcvpca: JcvPcaConfig::for_task(1),
            grid: NormalizedGrid::default(),
            crp: CrpOptions::default(),
            baseline: baseline.then(|| BaselineConfig {
                n_splits: 4,
                ..BaselineConfig::new(2)
            }),
        }
    }

    fn sim_report(baseline: bool) -> AnalysisReport {
        let (a, b) = generate_simulated(&SimConfig {
            samples: 300,
            repetitions: 4,
            noise_sigma: 0.02,
            seed: 5,
            ..Default::default()
        })
        .unwrap();
        analyze(&a, &b, &config(baseline)).unwrap()
    }

    #[test]
    fn json_round_trip_is_byte_identical() {
        let report = sim_report(true);
        let text = render_json(&report).unwrap();
        let back = parse_json(&text).unwrap();
        assert_eq!(back, report);
        assert_eq!(render_json(&back).unwrap(), text);
    }

    #[test]
    fn missing_baseline_is_null() {
        let report = sim_report(false);
        let value: serde_json::Value =
            serde_json::from_str(&render_json(&report).unwrap()).unwrap();
        assert!(value["baseline"].is_null());
        assert!(value["verdicts"].is_null());
        assert_eq!(value["metadata"]["tool_version"], crate::VERSION);
        assert!(value["metadata"]["conventions"]["phase_unwrapping"]
            .as_bool()
            .unwrap());
    }

    #[test]
    fn export_file_set_and_shapes() {
        let report = sim_report(true);
        let dir = tempfile::tempdir().unwrap();
        let files = export_plot_data(&report, dir.path()).unwrap();
        let names: Vec<String> = files
            .iter()
            .map(|p| p.file_name().unwrap().to_string_lossy().into_owned())
            .collect();
        for expected in [
            "jrw_a.csv",
            "jrw_b.csv",
            "jcvpca_delta.csv",
            "crp_pair_1_2.csv",
            "baseline_summary.csv",
        ] {
            assert!(
                names.iter().any(|n| n == expected),
                "missing {expected} in {names:?}"
            );
        }
        let jrw = fs::read_to_string(dir.path().join("jrw_a.csv")).unwrap();
        assert_eq!(jrw.lines().count(), 3);
        assert!(jrw.lines().all(|l| l.split(',').count() == 3));
        let crp = fs::read_to_string(dir.path().join("crp_pair_1_2.csv")).unwrap();
        assert_eq!(crp.lines().count(), report.metadata.grid_size + 1);

        // exported numbers are the in-memory values
        let second: f64 = jrw
            .lines()
            .nth(1)
            .unwrap()
            .split(',')
            .nth(1)
            .unwrap()
            .parse()
            .unwrap();
        assert_eq!(second, report.jcvpca.jrw.jrw_a[0][0]);

        // re-export overwrites with identical content
        let before: Vec<String> = files
            .iter()
            .map(|f| fs::read_to_string(f).unwrap())
            .collect();
        let again = export_plot_data(&report, dir.path()).unwrap();
        assert_eq!(again, files);
        let after: Vec<String> = again
            .iter()
            .map(|f| fs::read_to_string(f).unwrap())
            .collect();
        assert_eq!(before, after);
    }

    #[test]
    fn unwritable_directory() {
        let report = sim_report(false);
        let dir = tempfile::tempdir().unwrap();
        let blocker = dir.path().join("file");
        fs::write(&blocker, "x").unwrap();
        assert!(matches!(
            export_plot_data(&report, &blocker.join("sub")),
            Err(Error::Io { .. })
        ));
    }

    #[test]
    fn summary_mentions_percentages_and_verdicts() {
        let report = sim_report(true);
        let text = render_summary(&report);
        assert!(text.contains("PC1 (task)"), "{text}");
        assert!(text.contains('%'));
        assert!(text.contains("Threshold rule: mean ± std"));
        let tables =
            render_baseline_tables(report.baseline.as_ref().unwrap(), &report.metadata.joints);
        assert!(tables.contains("mean ± sem"));
    }
}
