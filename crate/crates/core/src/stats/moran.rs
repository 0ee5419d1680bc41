use rand::seq::SliceRandom;
use rayon::prelude::*;

use super::cvm::add_one_p;
use crate::error::{Error, Result};
use crate::lattice::GridSpec;
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoranResult {
    pub i: f64,
    /// `-1 / (n - 1)`.
    pub expected: f64,
    /// Two-sided permutation p-value around `expected`.
    pub p_value: f64,
    pub permutations: usize,
}

/// Inverse-distance spatial weights: `w_ij = 1 / d_ij` between cell centers
/// in cell units, zero diagonal, no row standardization. Stored as the packed
/// strict upper triangle, row `i` holding `j > i`.
#[derive(Debug, Clone)]
pub struct MoranWeights {
    grid: GridSpec,
    upper: Vec<f64>,
    s0: f64,
}

impl MoranWeights {
    pub fn inverse_distance(grid: GridSpec) -> Self {
        let n = grid.len();
        let mut upper = Vec::with_capacity(n * (n - 1) / 2);
        for i in 0..n {
            let (xi, yi) = grid.coords(i);
            for j in i + 1..n {
                let (xj, yj) = grid.coords(j);
                upper.push(1.0 / (xi as f64 - xj as f64).hypot(yi as f64 - yj as f64));
            }
        }
        let s0 = 2.0 * upper.iter().sum::<f64>();
        MoranWeights { grid, upper, s0 }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn s0(&self) -> f64 {
        self.s0
    }

    fn quadratic_form(&self, z: &[f64]) -> f64 {
        let mut total = 0.0;
        let mut offset = 0;
        for (i, &zi) in z.iter().enumerate() {
            let tail = &z[i + 1..];
            total += zi * dot(&self.upper[offset..offset + tail.len()], tail);
            offset += tail.len();
        }
        2.0 * total
    }

    /// Moran's I of already-centered values with `sum z^2 = ss`.
    fn statistic(&self, z: &[f64], ss: f64) -> f64 {
        (z.len() as f64 / self.s0) * self.quadratic_form(z) / ss
    }
}

// Four independent accumulators so the loop vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0; 4];
    let (ca, cb) = (a.chunks_exact(4), b.chunks_exact(4));
    let tail: f64 = ca
        .remainder()
        .iter()
        .zip(cb.remainder())
        .map(|(x, y)| x * y)
        .sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..4 {
            acc[k] += x[k] * y[k];
        }
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn centered(values: &[f64]) -> Result<(Vec<f64>, f64)> {
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite(i));
    }
    if values.iter().all(|&v| v == values[0]) {
        return Err(Error::ZeroVariance);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let z: Vec<f64> = values.iter().map(|v| v - mean).collect();
    let ss = z.iter().map(|v| v * v).sum::<f64>();
    if ss <= 0.0 {
        return Err(Error::ZeroVariance);
    }
    Ok((z, ss))
}

/// Moran's I alone, without significance.
pub fn morans_i_statistic(values: &[f64], weights: &MoranWeights) -> Result<f64> {
    check_len(values, weights)?;
    let (z, ss) = centered(values)?;
    Ok(weights.statistic(&z, ss))
}

fn check_len(values: &[f64], weights: &MoranWeights) -> Result<()> {
    if values.len() != weights.grid.len() {
        return Err(Error::LengthMismatch {
            left: weights.grid.len(),
            right: values.len(),
        });
    }
    if values.len() < 3 {
        return Err(Error::param("values", "Moran's I needs at least 3 cells"));
    }
    Ok(())
}

pub fn morans_i(values: &[f64], grid: GridSpec, permutations: usize, seed: u64) -> Result<MoranResult> {
    morans_i_with(values, &MoranWeights::inverse_distance(grid), permutations, seed)
}

/// Moran's I with a permutation p-value: cell values are shuffled across the
/// grid once per replicate.
pub fn morans_i_with(
    values: &[f64],
    weights: &MoranWeights,
    permutations: usize,
    seed: u64,
) -> Result<MoranResult> {
    check_len(values, weights)?;
    if permutations == 0 {
        return Err(Error::TooFewPermutations { min: 1, got: 0 });
    }
    let (z, ss) = centered(values)?;
    let n = z.len();
    let observed = weights.statistic(&z, ss);
    let expected = -1.0 / (n as f64 - 1.0);
    let gap = (observed - expected).abs();

    let exceed = (0..permutations)
        .into_par_iter()
        .map_init(
            || z.clone(),
            |buf, r| {
                buf.copy_from_slice(&z);
                buf.shuffle(&mut rng::replicate(seed, r));
                let i = weights.statistic(buf, ss);
                usize::from((i - expected).abs() >= gap - 1e-12 * gap)
            },
        )
        .sum::<usize>();

    Ok(MoranResult {
        i: observed,
        expected,
        p_value: add_one_p(exceed, permutations),
        permutations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Layer;
    use crate::smoothing::{smooth, BoundaryMode, KernelSpec};
    use proptest::prelude::*;

    fn brute_force_i(values: &[f64], grid: GridSpec) -> f64 {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let (mut num, mut s0) = (0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                if i == j {
                    continue;
                }
                let (a, b) = (grid.coords(i), grid.coords(j));
                let d = ((a.0 as f64 - b.0 as f64).powi(2) + (a.1 as f64 - b.1 as f64).powi(2)).sqrt();
                num += (values[i] - mean) * (values[j] - mean) / d;
                s0 += 1.0 / d;
            }
        }
        let den: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
        n as f64 / s0 * num / den
    }

    #[test]
    fn checkerboard_is_negative() {
        let g = GridSpec::new(4, 4, 1.0).unwrap();
        let v: Vec<f64> = (0..16).map(|i| ((i % 4 + i / 4) % 2) as f64).collect();
        let oracle = brute_force_i(&v, g);
        assert!(oracle < 0.0);
        let r = morans_i(&v, g, 199, 1).unwrap();
        assert!((r.i - oracle).abs() < 1e-12);
        assert!((r.expected + 1.0 / 15.0).abs() < 1e-15);
    }

    #[test]
    fn constant_field_errors() {
        let g = GridSpec::new(3, 3, 1.0).unwrap();
        assert!(matches!(morans_i(&[0.5; 9], g, 99, 0), Err(Error::ZeroVariance)));
    }

    #[test]
    fn clustered_field_is_significant() {
        let g = GridSpec::new(10, 10, 1.0).unwrap();
        let v: Vec<f64> = (0..100).map(|i| if i % 10 < 5 { 1.0 } else { 0.0 }).collect();
        let r = morans_i(&v, g, 999, 9).unwrap();
        assert!(r.i > 0.0);
        assert!((r.p_value - 0.001).abs() < 1e-15);
    }

    #[test]
    fn length_mismatch() {
        let g = GridSpec::new(3, 3, 1.0).unwrap();
        assert!(morans_i(&[1.0, 2.0], g, 99, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn matches_brute_force(v in proptest::collection::vec(-3.0f64..3.0, 30)) {
            let g = GridSpec::new(6, 5, 1.0).unwrap();
            prop_assume!(v.iter().any(|&x| x != v[0]));
            let w = MoranWeights::inverse_distance(g);
            prop_assert!((morans_i_statistic(&v, &w).unwrap() - brute_force_i(&v, g)).abs() < 1e-10);
        }

        #[test]
        fn smoothing_raises_autocorrelation(v in proptest::collection::vec(0.1f64..2.0, 144)) {
            let g = GridSpec::new(12, 12, 1.0).unwrap();
            let w = MoranWeights::inverse_distance(g);
            let layer = Layer::from_values(g, v).unwrap();
            let smoothed = smooth(&layer, &KernelSpec::new(1.2, BoundaryMode::TruncatedRenormalized).unwrap()).unwrap();
            let before = morans_i_statistic(layer.values(), &w).unwrap();
            let after = morans_i_statistic(smoothed.values(), &w).unwrap();
            prop_assert!(after >= before, "{after} < {before}");
        }
    }
}
