use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng;

/// Smallest permutation count accepted by the tests.
pub const MIN_PERMUTATIONS: usize = 99;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CvmResult {
    pub statistic: f64,
    /// `(1 + #{permuted >= observed}) / (R + 1)`.
    pub p_value: f64,
    pub permutations: usize,
}

/// Per-channel tests plus the combined (mean) statistic, all driven by the
/// same per-cell swap indicators.
#[derive(Debug, Clone, PartialEq)]
pub struct JointCvmResult {
    pub per_channel: Vec<CvmResult>,
    pub combined: CvmResult,
}

fn check_pair(a: &[f64], b: &[f64]) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.len() < 2 {
        return Err(Error::param("sample", "need at least two paired observations"));
    }
    if let Some(i) = a.iter().chain(b).position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    Ok(())
}

/// Two-sample Cramér–von Mises statistic for equal-size samples, evaluated over
/// the pooled support: `(1 / 2n) * sum_z [F_a(z) - F_b(z)]^2` with right-continuous ECDFs.
pub fn cvm_statistic(a: &[f64], b: &[f64]) -> Result<f64> {
    check_pair(a, b)?;
    let mut scratch = Vec::with_capacity(2 * a.len());
    Ok(pooled_statistic(a, b, &mut scratch))
}

fn pooled_statistic(a: &[f64], b: &[f64], pooled: &mut Vec<(f64, bool)>) -> f64 {
    let n = a.len();
    pooled.clear();
    pooled.extend(a.iter().map(|&v| (v, true)));
    pooled.extend(b.iter().map(|&v| (v, false)));
    pooled.sort_unstable_by(|x, y| x.0.total_cmp(&y.0));

    let inv_n = 1.0 / n as f64;
    let (mut cum_a, mut cum_b) = (0usize, 0usize);
    let mut acc = 0.0;
    let mut i = 0;
    while i < pooled.len() {
        let v = pooled[i].0;
        let start = i;
        while i < pooled.len() && pooled[i].0 == v {
            if pooled[i].1 {
                cum_a += 1;
            } else {
                cum_b += 1;
            }
            i += 1;
        }
        let diff = (cum_a as f64 - cum_b as f64) * inv_n;
        acc += diff * diff * (i - start) as f64;
    }
    acc / (2 * n) as f64
}

pub fn cvm_combined(per_channel: &[f64; 3]) -> f64 {
    per_channel.iter().sum::<f64>() / 3.0
}

/// Paired permutation test for one channel.
pub fn cvm_permutation_test(
    initial: &[f64],
    final_: &[f64],
    permutations: usize,
    seed: u64,
) -> Result<CvmResult> {
    let joint = cvm_joint_permutation_test(&[initial], &[final_], permutations, seed)?;
    Ok(joint.per_channel[0])
}

pub(crate) fn add_one_p(exceed: usize, permutations: usize) -> f64 {
    (1 + exceed) as f64 / (permutations + 1) as f64
}

#[inline]
fn at_least(permuted: f64, observed: f64) -> bool {
    permuted >= observed - 1e-12 * observed.abs()
}

/// Paired permutation test over several channels at once.
///
/// Each replicate draws one swap indicator per cell and applies it to every
/// channel, so cross-channel dependence is preserved under the null. The
/// combined statistic is the mean of the per-channel statistics.
pub fn cvm_joint_permutation_test(
    initial: &[&[f64]],
    final_: &[&[f64]],
    permutations: usize,
    seed: u64,
) -> Result<JointCvmResult> {
    if permutations < MIN_PERMUTATIONS {
        return Err(Error::TooFewPermutations {
            min: MIN_PERMUTATIONS,
            got: permutations,
        });
    }
    if initial.is_empty() {
        return Err(Error::Empty("channel list"));
    }
    if initial.len() != final_.len() {
        return Err(Error::LengthMismatch {
            left: initial.len(),
            right: final_.len(),
        });
    }
    let n = initial[0].len();
    for (a, b) in initial.iter().zip(final_) {
        check_pair(a, b)?;
        if a.len() != n {
            return Err(Error::LengthMismatch {
                left: n,
                right: a.len(),
            });
        }
    }
    let k = initial.len();

    let mut scratch = Vec::with_capacity(2 * n);
    let observed: Vec<f64> = initial
        .iter()
        .zip(final_)
        .map(|(a, b)| pooled_statistic(a, b, &mut scratch))
        .collect();
    let observed_combined = observed.iter().sum::<f64>() / k as f64;

    let replicates: Vec<Vec<f64>> = (0..permutations)
        .into_par_iter()
        .map_init(
            || {
                (
                    Vec::with_capacity(2 * n),
                    vec![0.0; n],
                    vec![0.0; n],
                    vec![false; n],
                )
            },
            |(pooled, a, b, swap), r| {
                let mut rng = rng::replicate(seed, r);
                swap.iter_mut().for_each(|s| *s = rng.random::<bool>());
                initial
                    .iter()
                    .zip(final_)
                    .map(|(x, y)| {
                        for i in 0..n {
                            let (u, v) = if swap[i] { (y[i], x[i]) } else { (x[i], y[i]) };
                            a[i] = u;
                            b[i] = v;
                        }
                        pooled_statistic(a, b, pooled)
                    })
                    .collect()
            },
        )
        .collect();

    let mut exceed = vec![0usize; k];
    let mut exceed_combined = 0usize;
    for stats in &replicates {
        for (c, &s) in stats.iter().enumerate() {
            if at_least(s, observed[c]) {
                exceed[c] += 1;
            }
        }
        let combined = stats.iter().sum::<f64>() / k as f64;
        if at_least(combined, observed_combined) {
            exceed_combined += 1;
        }
    }

    Ok(JointCvmResult {
        per_channel: observed
            .iter()
            .zip(&exceed)
            .map(|(&statistic, &e)| CvmResult {
                statistic,
                p_value: add_one_p(e, permutations),
                permutations,
            })
            .collect(),
        combined: CvmResult {
            statistic: observed_combined,
            p_value: add_one_p(exceed_combined, permutations),
            permutations,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identical_samples() {
        let a = [0.3, 0.1, 0.7, 0.7];
        assert_eq!(cvm_statistic(&a, &a).unwrap(), 0.0);
        assert_eq!(cvm_statistic(&[0.0, 1.0], &[1.0, 0.0]).unwrap(), 0.0);
    }

    #[test]
    fn disjoint_constant_samples() {
        let s = cvm_statistic(&[1.0; 4], &[0.5; 4]).unwrap();
        assert!((s - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hand_computed_interleaved() {
        // pooled: 1(a) 2(b) 3(a) 4(b); diffs after each: 1/2, 0, 1/2, 0
        let s = cvm_statistic(&[1.0, 3.0], &[2.0, 4.0]).unwrap();
        assert!((s - 0.5 / 4.0).abs() < 1e-15);
    }

    #[test]
    fn errors() {
        assert!(cvm_statistic(&[1.0, 2.0], &[1.0]).is_err());
        assert!(cvm_statistic(&[1.0], &[1.0]).is_err());
        assert!(cvm_statistic(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
        assert!(matches!(
            cvm_permutation_test(&[1.0; 4], &[0.5; 4], 98, 0),
            Err(Error::TooFewPermutations { .. })
        ));
    }

    #[test]
    fn unchanged_gives_p_one() {
        let a: Vec<f64> = (0..30).map(|i| (i as f64 * 0.37).sin()).collect();
        let r = cvm_permutation_test(&a, &a, 199, 5).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn constant_shift_hits_floor() {
        let r = cvm_permutation_test(&[1.0; 400], &[0.63; 400], 999, 17).unwrap();
        assert!((r.statistic - 0.5).abs() < 1e-15);
        assert!((r.p_value - 0.001).abs() < 1e-15);
    }

    #[test]
    fn combined_mean() {
        assert_eq!(cvm_combined(&[0.0; 3]), 0.0);
        assert!((cvm_combined(&[0.3; 3]) - 0.3).abs() < 1e-15);
        assert!((cvm_combined(&[0.1, 0.2, 0.6]) - 0.3).abs() < 1e-15);
    }

    #[test]
    fn joint_combined_equals_channel_mean() {
        let a: Vec<f64> = (0..50).map(|i| (i as f64).cos()).collect();
        let b: Vec<f64> = (0..50).map(|i| (i as f64 * 1.3).cos() * 0.9).collect();
        let c: Vec<f64> = (0..50).map(|i| (i as f64 * 0.7).sin()).collect();
        let r = cvm_joint_permutation_test(&[&a, &a, &c], &[&b, &c, &a], 199, 3).unwrap();
        let stats: Vec<f64> = r.per_channel.iter().map(|c| c.statistic).collect();
        assert!((r.combined.statistic - cvm_combined(&[stats[0], stats[1], stats[2]])).abs() < 1e-15);
    }

    #[test]
    fn deterministic_for_seed() {
        let a: Vec<f64> = (0..40).map(|i| (i as f64 * 0.2).sin()).collect();
        let b: Vec<f64> = (0..40).map(|i| (i as f64 * 0.2 + 0.3).sin()).collect();
        let x = cvm_permutation_test(&a, &b, 499, 11).unwrap();
        let y = cvm_permutation_test(&a, &b, 499, 11).unwrap();
        assert_eq!(x, y);
    }

    proptest! {
        #[test]
        fn invariant_under_monotone_transform(
            a in proptest::collection::vec(0.01f64..10.0, 2..40),
            seed in any::<u64>(),
        ) {
            let b: Vec<f64> = a.iter().enumerate().map(|(i, v)| v * (1.0 + ((i as u64 ^ seed) % 7) as f64 * 0.1)).collect();
            let s = cvm_statistic(&a, &b).unwrap();
            let ta: Vec<f64> = a.iter().map(|v| v.ln() * 3.0 - 1.0).collect();
            let tb: Vec<f64> = b.iter().map(|v| v.ln() * 3.0 - 1.0).collect();
            prop_assert!((s - cvm_statistic(&ta, &tb).unwrap()).abs() < 1e-12);
            prop_assert!(s >= 0.0);
        }

        #[test]
        fn symmetric_in_arguments(a in proptest::collection::vec(-5.0f64..5.0, 2..30), shift in -1.0f64..1.0) {
            let b: Vec<f64> = a.iter().rev().map(|v| v + shift).collect();
            prop_assert!((cvm_statistic(&a, &b).unwrap() - cvm_statistic(&b, &a).unwrap()).abs() < 1e-15);
        }
    }
}
