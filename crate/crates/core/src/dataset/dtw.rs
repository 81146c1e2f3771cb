use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Optimal monotone alignment between two sequences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DtwAlignment {
    /// Index pairs `(i, j)` from `(0, 0)` to `(len_a - 1, len_b - 1)`.
    pub path: Vec<(usize, usize)>,
    pub cost: f64,
}

/// Dynamic time warping of two scalar series with absolute-difference local
/// cost and steps `(1,0)`, `(0,1)`, `(1,1)`.
pub fn time_align_dtw(a: &[f64], b: &[f64]) -> Result<DtwAlignment> {
    check_len(a.len(), b.len())?;
    Ok(align(a.len(), b.len(), |i, j| (a[i] - b[j]).abs()))
}

/// Same as [`time_align_dtw`] for multivariate samples (`a[i]` is one sample
/// across all channels) with Euclidean local cost.
pub fn time_align_dtw_multi(a: &[Vec<f64>], b: &[Vec<f64>]) -> Result<DtwAlignment> {
    check_len(a.len(), b.len())?;
    if a.iter().chain(b).any(|s| s.len() != a[0].len()) {
        return Err(Error::Parameter(
            "samples have differing channel counts".into(),
        ));
    }
    Ok(align(a.len(), b.len(), |i, j| {
        a[i].iter()
            .zip(&b[j])
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }))
}

/// Resamples `values` (indexed like the second sequence of `path`) onto the
/// first sequence's indices, averaging every value matched to the same index.
pub fn warp_onto_reference(path: &[(usize, usize)], values: &[f64], ref_len: usize) -> Vec<f64> {
    let mut sum = vec![0.0; ref_len];
    let mut count = vec![0usize; ref_len];
    for &(i, j) in path {
        sum[i] += values[j];
        count[i] += 1;
    }
    sum.iter().zip(count).map(|(s, c)| s / c as f64).collect()
}

fn check_len(a: usize, b: usize) -> Result<()> {
    if a < 2 || b < 2 {
        return Err(Error::Parameter(format!(
            "DTW needs series of length >= 2, got {a} and {b}"
        )));
    }
    Ok(())
}

fn align(na: usize, nb: usize, local: impl Fn(usize, usize) -> f64) -> DtwAlignment {
    let mut acc = vec![f64::INFINITY; na * nb];
    let at = |i: usize, j: usize| i * nb + j;
    for i in 0..na {
        for j in 0..nb {
            let best = if i == 0 && j == 0 {
                0.0
            } else {
                let diag = if i > 0 && j > 0 {
                    acc[at(i - 1, j - 1)]
                } else {
                    f64::INFINITY
                };
                let up = if i > 0 {
                    acc[at(i - 1, j)]
                } else {
                    f64::INFINITY
                };
                let left = if j > 0 {
                    acc[at(i, j - 1)]
                } else {
                    f64::INFINITY
                };
                diag.min(up).min(left)
            };
            acc[at(i, j)] = best + local(i, j);
        }
    }

    // Backtrack; ties prefer the diagonal, then advancing in `a`.
    let mut path = vec![(na - 1, nb - 1)];
    let (mut i, mut j) = (na - 1, nb - 1);
    while i > 0 || j > 0 {
        (i, j) = if i == 0 {
            (0, j - 1)
        } else if j == 0 {
            (i - 1, 0)
        } else {
            let diag = acc[at(i - 1, j - 1)];
            let up = acc[at(i - 1, j)];
            let left = acc[at(i, j - 1)];
            if diag <= up && diag <= left {
                (i - 1, j - 1)
            } else if up <= left {
                (i - 1, j)
            } else {
                (i, j - 1)
            }
        };
        path.push((i, j));
    }
    path.reverse();
    DtwAlignment {
        path,
        cost: acc[at(na - 1, nb - 1)],
    }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    /// Minimum path cost by enumerating every monotone boundary-complete path.
    fn brute_force(a: &[f64], b: &[f64]) -> f64 {
        fn walk(a: &[f64], b: &[f64], i: usize, j: usize, acc: f64, best: &mut f64) {
            let acc = acc + (a[i] - b[j]).abs();
            if i == a.len() - 1 && j == b.len() - 1 {
                *best = best.min(acc);
                return;
            }
            if i + 1 < a.len() {
                walk(a, b, i + 1, j, acc, best);
            }
            if j + 1 < b.len() {
                walk(a, b, i, j + 1, acc, best);
            }
            if i + 1 < a.len() && j + 1 < b.len() {
                walk(a, b, i + 1, j + 1, acc, best);
            }
        }
        let mut best = f64::INFINITY;
        walk(a, b, 0, 0, 0.0, &mut best);
        best
    }

    fn path_cost(a: &[f64], b: &[f64], path: &[(usize, usize)]) -> f64 {
        path.iter().map(|&(i, j)| (a[i] - b[j]).abs()).sum()
    }

    fn assert_valid_path(path: &[(usize, usize)], na: usize, nb: usize) {
        assert_eq!(path[0], (0, 0));
        assert_eq!(*path.last().unwrap(), (na - 1, nb - 1));
        for w in path.windows(2) {
            let (di, dj) = (w[1].0 - w[0].0, w[1].1 - w[0].1);
            assert!(matches!((di, dj), (1, 0) | (0, 1) | (1, 1)), "{w:?}");
        }
    }

    #[test]
    fn self_alignment_is_diagonal() {
        let a = [0.0, 1.0, 3.0, 2.0, -1.0];
        let r = time_align_dtw(&a, &a).unwrap();
        assert_eq!(r.cost, 0.0);
        assert_eq!(r.path, (0..5).map(|i| (i, i)).collect::<Vec<_>>());
    }

    #[test]
    fn delayed_copy_follows_shifted_diagonal() {
        let a = [0.0, 1.0, 4.0, 2.0, 0.5];
        let b = [0.0, 0.0, 1.0, 4.0, 2.0];
        let r = time_align_dtw(&a, &b).unwrap();
        assert_valid_path(&r.path, 5, 5);
        assert_eq!(r.cost, brute_force(&a, &b));
        assert_eq!(r.cost, path_cost(&a, &b, &r.path));
        // Every matched pair except the trailing sample sits on j = i + 1.
        for &(i, j) in &r.path[1..r.path.len() - 1] {
            assert_eq!(j, i + 1, "{:?}", r.path);
        }
    }

    #[test]
    fn three_by_three_exhaustive() {
        let a = [0.0, 0.0, 1.0];
        let b = [0.0, 1.0, 1.0];
        let r = time_align_dtw(&a, &b).unwrap();
        assert_eq!(r.cost, brute_force(&a, &b));
        assert_eq!(r.cost, 0.0);
        assert_valid_path(&r.path, 3, 3);
    }

    #[test]
    fn short_series_rejected() {
        assert!(time_align_dtw(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn warping_averages_duplicates() {
        let path = [(0, 0), (0, 1), (1, 2), (2, 3)];
        let w = warp_onto_reference(&path, &[1.0, 3.0, 5.0, 7.0], 3);
        assert_eq!(w, vec![2.0, 5.0, 7.0]);
    }

    proptest! {
        #[test]
        fn matches_brute_force_and_is_symmetric(
            a in prop::collection::vec(-5.0f64..5.0, 2..6),
            b in prop::collection::vec(-5.0f64..5.0, 2..6),
        ) {
            let ab = time_align_dtw(&a, &b).unwrap();
            let ba = time_align_dtw(&b, &a).unwrap();
            prop_assert!((ab.cost - brute_force(&a, &b)).abs() < 1e-9);
            prop_assert!((ab.cost - ba.cost).abs() < 1e-9);
            prop_assert!((path_cost(&a, &b, &ab.path) - ab.cost).abs() < 1e-9);
        }

        #[test]
        fn multivariate_self_cost_is_zero(
            a in prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 3), 2..12),
        ) {
            prop_assert_eq!(time_align_dtw_multi(&a, &a).unwrap().cost, 0.0);
        }
    }
}
