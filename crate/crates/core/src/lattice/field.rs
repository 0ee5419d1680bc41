use nalgebra::{DMatrix, DVector};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{GridSpec, Layer};
use crate::error::{Error, Result};
use crate::rng;

const COVARIANCE_JITTER: f64 = 1e-10;

/// Parameters of a Gaussian random initial-condition field.
///
/// The structured component has exponential covariance
/// `C(d) = spatial_sill * exp(-3 d / range_m)`, so correlation falls to ~5 % at
/// `range_m`. The nugget component is white noise with variance `nugget`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldParams {
    #[serde(default = "FieldParams::default_mean")]
    pub mean: f64,
    #[serde(default)]
    pub spatial_sill: f64,
    #[serde(default)]
    pub nugget: f64,
    #[serde(default = "FieldParams::default_range")]
    pub range_m: f64,
    #[serde(default = "FieldParams::default_floor")]
    pub floor: f64,
    #[serde(default)]
    pub lognormal: bool,
    #[serde(default)]
    pub log_mean: f64,
}

impl Default for FieldParams {
    fn default() -> Self {
        FieldParams {
            mean: Self::default_mean(),
            spatial_sill: 0.0,
            nugget: 0.0,
            range_m: Self::default_range(),
            floor: Self::default_floor(),
            lognormal: false,
            log_mean: 0.0,
        }
    }
}

impl FieldParams {
    fn default_mean() -> f64 {
        1.0
    }
    fn default_range() -> f64 {
        100.0
    }
    fn default_floor() -> f64 {
        0.01
    }

    pub fn validate(&self) -> Result<()> {
        let finite = [
            self.mean,
            self.spatial_sill,
            self.nugget,
            self.range_m,
            self.floor,
            self.log_mean,
        ];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::param("field", "all parameters must be finite"));
        }
        if self.spatial_sill < 0.0 {
            return Err(Error::param("spatial_sill", "must be non-negative"));
        }
        if self.nugget < 0.0 {
            return Err(Error::param("nugget", "must be non-negative"));
        }
        if self.range_m <= 0.0 {
            return Err(Error::param("range_m", "must be positive"));
        }
        if !self.lognormal && !(self.floor > 0.0 && self.floor < self.mean) {
            return Err(Error::param(
                "floor",
                format!("must satisfy 0 < floor < mean ({})", self.mean),
            ));
        }
        Ok(())
    }
}

/// Zero-mean Gaussian field sampler with a cached covariance factor.
///
/// Factorizing once and sampling many seeds is what ensemble studies need;
/// the single-shot generators below wrap it.
#[derive(Debug, Clone)]
pub struct GaussianFieldSampler {
    grid: GridSpec,
    factor: Option<DMatrix<f64>>,
    nugget_sd: f64,
}

impl GaussianFieldSampler {
    pub fn new(grid: GridSpec, spatial_sill: f64, nugget: f64, range_m: f64) -> Result<Self> {
        grid.validate()?;
        let factor = if spatial_sill > 0.0 {
            let n = grid.len();
            let mut cov = DMatrix::<f64>::zeros(n, n);
            for i in 0..n {
                let (xi, yi) = grid.coords(i);
                for j in 0..=i {
                    let (xj, yj) = grid.coords(j);
                    let dx = (xi as f64 - xj as f64) * grid.cell_size_m;
                    let dy = (yi as f64 - yj as f64) * grid.cell_size_m;
                    let d = dx.hypot(dy);
                    let c = spatial_sill * (-3.0 * d / range_m).exp();
                    cov[(i, j)] = c;
                    cov[(j, i)] = c;
                }
                cov[(i, i)] += COVARIANCE_JITTER;
            }
            let chol = cov.cholesky().ok_or_else(|| {
                Error::CovarianceNotPsd(format!("sill {spatial_sill}, range {range_m} m on {grid}"))
            })?;
            Some(chol.l())
        } else {
            None
        };
        Ok(GaussianFieldSampler {
            grid,
            factor,
            nugget_sd: nugget.sqrt(),
        })
    }

    pub fn from_params(grid: GridSpec, params: &FieldParams) -> Result<Self> {
        params.validate()?;
        Self::new(grid, params.spatial_sill, params.nugget, params.range_m)
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Structured plus nugget deviations, deterministic in `seed`.
    pub fn sample(&self, seed: u64) -> Vec<f64> {
        let n = self.grid.len();
        let mut rng = rng::seeded(seed);
        let white: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let nugget: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
        let mut out = match &self.factor {
            Some(l) => (l * DVector::from_vec(white)).data.into(),
            None => vec![0.0; n],
        };
        for (v, e) in out.iter_mut().zip(&nugget) {
            *v += self.nugget_sd * e;
        }
        out
    }
}

/// `max(floor, mean + structured + nugget)` per cell.
pub fn generate_structured_field(grid: GridSpec, params: &FieldParams, seed: u64) -> Result<Layer> {
    let sampler = GaussianFieldSampler::from_params(grid, params)?;
    structured_from_sampler(&sampler, params, seed)
}

pub(crate) fn structured_from_sampler(
    sampler: &GaussianFieldSampler,
    params: &FieldParams,
    seed: u64,
) -> Result<Layer> {
    let values = sampler
        .sample(seed)
        .into_iter()
        .map(|e| (params.mean + e).max(params.floor))
        .collect();
    Layer::from_values(sampler.grid(), values)
}

/// `exp(log_mean + structured + nugget)` per cell; strictly positive, unclamped.
pub fn generate_lognormal_field(grid: GridSpec, params: &FieldParams, seed: u64) -> Result<Layer> {
    if !params.lognormal {
        return Err(Error::param(
            "lognormal",
            "flag must be set for a log-normal field",
        ));
    }
    let sampler = GaussianFieldSampler::from_params(grid, params)?;
    let values = sampler
        .sample(seed)
        .into_iter()
        .map(|e| (params.log_mean + e).exp())
        .collect();
    Layer::from_values(grid, values)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(n: usize) -> GridSpec {
        GridSpec::new(n, n, 10.0).unwrap()
    }

    #[test]
    fn zero_variance_is_constant() {
        let p = FieldParams::default();
        let layer = generate_structured_field(grid(8), &p, 3).unwrap();
        assert!(layer.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn floor_clamps() {
        let p = FieldParams {
            mean: 0.02,
            nugget: 1.0,
            floor: 0.01,
            ..FieldParams::default()
        };
        let layer = generate_structured_field(grid(10), &p, 11).unwrap();
        assert!(layer.min() >= 0.01);
        assert!(layer.values().contains(&0.01));
    }

    #[test]
    fn deterministic_for_seed() {
        let p = FieldParams {
            spatial_sill: 0.04,
            nugget: 0.01,
            ..FieldParams::default()
        };
        let a = generate_structured_field(grid(6), &p, 99).unwrap();
        let b = generate_structured_field(grid(6), &p, 99).unwrap();
        let c = generate_structured_field(grid(6), &p, 100).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn lognormal_zero_variance_is_one() {
        let p = FieldParams {
            lognormal: true,
            ..FieldParams::default()
        };
        let layer = generate_lognormal_field(grid(5), &p, 1).unwrap();
        assert!(layer.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn lognormal_requires_flag() {
        assert!(generate_lognormal_field(grid(4), &FieldParams::default(), 1).is_err());
    }

    #[test]
    fn lognormal_is_positive() {
        let p = FieldParams {
            lognormal: true,
            log_mean: -3.0,
            spatial_sill: 2.0,
            nugget: 2.0,
            ..FieldParams::default()
        };
        let layer = generate_lognormal_field(grid(10), &p, 5).unwrap();
        assert!(layer.min() > 0.0);
    }

    #[test]
    fn lognormal_mean_identity() {
        // E[exp(Z)] = exp(sigma^2 / 2) for Z ~ N(0, sigma^2); compared within
        // 3 standard errors of the sample mean over 10,000 cells.
        let p = FieldParams {
            lognormal: true,
            nugget: 0.09,
            ..FieldParams::default()
        };
        let layer = generate_lognormal_field(grid(100), &p, 2024).unwrap();
        let n = layer.values().len() as f64;
        let mean = layer.sum() / n;
        let var = layer.values().iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
        let se = (var / n).sqrt();
        let expected = (0.045f64).exp();
        assert!(
            (mean - expected).abs() < 3.0 * se,
            "mean {mean} vs {expected} (se {se})"
        );
    }

    #[test]
    fn rejects_invalid_params() {
        let bad = [
            FieldParams {
                spatial_sill: -1.0,
                ..FieldParams::default()
            },
            FieldParams {
                nugget: -0.1,
                ..FieldParams::default()
            },
            FieldParams {
                range_m: 0.0,
                ..FieldParams::default()
            },
            FieldParams {
                floor: 0.0,
                ..FieldParams::default()
            },
            FieldParams {
                floor: 2.0,
                ..FieldParams::default()
            },
            FieldParams {
                mean: f64::NAN,
                ..FieldParams::default()
            },
        ];
        for p in bad {
            assert!(generate_structured_field(grid(3), &p, 0).is_err(), "{p:?}");
        }
    }
}
