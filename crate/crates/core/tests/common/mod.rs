//! Seeded random corpus and small closed-form oracles shared by the
//! integration tests.
#![allow(dead_code)]

use std::f64::consts::TAU;

use jointcoord::{AngleUnit, Dataset, Repetition};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Smooth multi-sine dataset: one full period of a dominant harmonic per
/// joint, a weaker second harmonic, and per-repetition jitter in phase,
/// amplitude and duration.
pub fn random_dataset(name: &str, n_joints: usize, n_reps: usize, seed: u64) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let base: Vec<(f64, f64, f64, f64)> = (0..n_joints)
        .map(|_| {
            (
                rng.random_range(0.5..2.0),  // amplitude
                rng.random_range(0.0..TAU),  // phase
                rng.random_range(0.0..0.15), // second harmonic ratio
                rng.random_range(-1.0..1.0), // offset
            )
        })
        .collect();
    let reps = (0..n_reps)
        .map(|_| {
            let samples = rng.random_range(150..250);
            let duration = rng.random_range(0.8..1.5);
            let time: Vec<f64> = (0..samples)
                .map(|t| duration * t as f64 / (samples - 1) as f64)
                .collect();
            let series = base
                .iter()
                .map(|&(amp, phase, h2, off)| {
                    let amp = amp * rng.random_range(0.9..1.1);
                    let phase = phase + rng.random_range(-0.2..0.2);
                    time.iter()
                        .map(|t| {
                            let s = TAU * t / duration;
                            off + amp * ((s + phase).sin() + h2 * (2.0 * s + 0.3 * phase).sin())
                        })
                        .collect()
                })
                .collect();
            Repetition::new(time, series).unwrap()
        })
        .collect();
    let joints = (0..n_joints).map(|j| format!("j{}", j + 1)).collect();
    Dataset::new(name, joints, reps, AngleUnit::Rad).unwrap()
}

/// Twenty `(n_joints, n_reps, seed)` triples covering n in {2,3,4} and
/// k in 4..=10.
pub fn corpus_specs() -> Vec<(usize, usize, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_101);
    (0..20u64)
        .map(|i| {
            let n = 2 + (i as usize % 3);
            let k = rng.random_range(4..=10);
            (n, k, 1_000 + i)
        })
        .collect()
}

pub fn corpus() -> Vec<Dataset> {
    corpus_specs()
        .into_iter()
        .map(|(n, k, seed)| random_dataset(&format!("rand{seed}"), n, k, seed))
        .collect()
}

/// Sample covariance (1/(N-1)) of 2-column rows.
pub fn cov2(rows: &[[f64; 2]]) -> [[f64; 2]; 2] {
    let n = rows.len() as f64;
    let mx = rows.iter().map(|r| r[0]).sum::<f64>() / n;
    let my = rows.iter().map(|r| r[1]).sum::<f64>() / n;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for r in rows {
        let (dx, dy) = (r[0] - mx, r[1] - my);
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    let d = n - 1.0;
    [[sxx / d, sxy / d], [sxy / d, syy / d]]
}

/// Closed-form eigen-decomposition of a symmetric 2x2 matrix. Rows of the
/// returned basis are unit eigenvectors, largest eigenvalue first, each
/// with its largest-magnitude entry non-negative.
pub fn eig2(c: [[f64; 2]; 2]) -> ([f64; 2], [[f64; 2]; 2]) {
    let (a, b, d) = (c[0][0], c[0][1], c[1][1]);
    let mid = 0.5 * (a + d);
    let rad = (0.25 * (a - d) * (a - d) + b * b).sqrt();
    let (l1, l2) = (mid + rad, mid - rad);
    let v1 = if b.abs() > 1e-300 {
        [b, l1 - a]
    } else if a >= d {
        [1.0, 0.0]
    } else {
        [0.0, 1.0]
    };
    let norm = (v1[0] * v1[0] + v1[1] * v1[1]).sqrt();
    let mut v1 = [v1[0] / norm, v1[1] / norm];
    let big = if v1[0].abs() >= v1[1].abs() {
        v1[0]
    } else {
        v1[1]
    };
    if big < 0.0 {
        v1 = [-v1[0], -v1[1]];
    }
    let mut v2 = [-v1[1], v1[0]];
    let big = if v2[0].abs() >= v2[1].abs() {
        v2[0]
    } else {
        v2[1]
    };
    if big < 0.0 {
        v2 = [-v2[0], -v2[1]];
    }
    ([l1, l2], [v1, v2])
}

pub fn rows2(ds: &Dataset) -> Vec<[f64; 2]> {
    ds.samples().map(|s| [s[0], s[1]]).collect()
}

pub type Mat2 = [[f64; 2]; 2];

/// Independent two-joint JcvPCA: returns `(jrw_a, jrw_b, delta)`.
pub fn jcvpca2(a: &Dataset, b: &Dataset) -> (Mat2, Mat2, Mat2) {
    let ra = rows2(a);
    let (_, basis_a) = eig2(cov2(&ra));
    let n = ra.len() as f64;
    let mean = [
        ra.iter().map(|r| r[0]).sum::<f64>() / n,
        ra.iter().map(|r| r[1]).sum::<f64>() / n,
    ];
    let proj: Vec<[f64; 2]> = rows2(b)
        .iter()
        .map(|r| {
            let c = [r[0] - mean[0], r[1] - mean[1]];
            [
                basis_a[0][0] * c[0] + basis_a[0][1] * c[1],
                basis_a[1][0] * c[0] + basis_a[1][1] * c[1],
            ]
        })
        .collect();
    let (_, basis_b) = eig2(cov2(&proj));
    let mut jrw_a = [[0.0; 2]; 2];
    let mut jrw_b = [[0.0; 2]; 2];
    let mut delta = [[0.0; 2]; 2];
    for u in 0..2 {
        for j in 0..2 {
            let composed = basis_b[u][0] * basis_a[0][j] + basis_b[u][1] * basis_a[1][j];
            jrw_a[u][j] = basis_a[u][j].abs();
            jrw_b[u][j] = composed.abs();
            delta[u][j] = jrw_b[u][j] - jrw_a[u][j];
        }
    }
    (jrw_a, jrw_b, delta)
}
