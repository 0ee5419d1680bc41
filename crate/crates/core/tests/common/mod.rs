//! Reference implementations used only by the integration tests. They are
//! written for clarity, not speed, and share no code with the library.
#![allow(dead_code)]

use nutrient_lattice::GridSpec;

/// ECDF of `sample` at `z`, right-continuous.
pub fn ecdf(sample: &[f64], z: f64) -> f64 {
    sample.iter().filter(|&&v| v <= z).count() as f64 / sample.len() as f64
}

/// Two-sample CvM by direct evaluation at every pooled point.
pub fn cvm_bruteforce(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    a.iter()
        .chain(b)
        .map(|&z| (ecdf(a, z) - ecdf(b, z)).powi(2))
        .sum::<f64>()
        / (2.0 * n)
}

/// Exact paired-swap p-value: the share of all `2^n` swap patterns whose
/// statistic is at least the observed one.
pub fn exhaustive_swap_p(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len();
    assert!(n <= 16);
    let observed = cvm_bruteforce(a, b);
    let mut hits = 0usize;
    let total = 1usize << n;
    for mask in 0..total {
        let (mut x, mut y) = (a.to_vec(), b.to_vec());
        for i in 0..n {
            if mask >> i & 1 == 1 {
                std::mem::swap(&mut x[i], &mut y[i]);
            }
        }
        if cvm_bruteforce(&x, &y) >= observed - 1e-12 {
            hits += 1;
        }
    }
    hits as f64 / total as f64
}

pub struct Variogram {
    /// Mean pair distance per bin, metres.
    pub lag: Vec<f64>,
    pub gamma: Vec<f64>,
    pub pairs: Vec<usize>,
}

/// Classical semivariogram of several fields on one grid, pooled over fields,
/// in bins of `width` metres up to `max_lag`.
pub fn empirical_variogram(grid: GridSpec, fields: &[Vec<f64>], width: f64, max_lag: f64) -> Variogram {
    let bins = (max_lag / width).ceil() as usize;
    let (mut dist, mut sq, mut count) = (vec![0.0; bins], vec![0.0; bins], vec![0usize; bins]);
    let n = grid.len();
    let mut pair_bins = Vec::new();
    for i in 0..n {
        let (xi, yi) = grid.coords(i);
        for j in i + 1..n {
            let (xj, yj) = grid.coords(j);
            let h =
                grid.cell_size_m * ((xi as f64 - xj as f64).powi(2) + (yi as f64 - yj as f64).powi(2)).sqrt();
            if h < max_lag {
                pair_bins.push((i, j, (h / width) as usize, h));
            }
        }
    }
    for f in fields {
        for &(i, j, b, h) in &pair_bins {
            dist[b] += h;
            sq[b] += 0.5 * (f[i] - f[j]).powi(2);
            count[b] += 1;
        }
    }
    let keep: Vec<usize> = (0..bins).filter(|&b| count[b] > 0).collect();
    Variogram {
        lag: keep.iter().map(|&b| dist[b] / count[b] as f64).collect(),
        gamma: keep.iter().map(|&b| sq[b] / count[b] as f64).collect(),
        pairs: keep.iter().map(|&b| count[b]).collect(),
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ExponentialFit {
    pub nugget: f64,
    pub partial_sill: f64,
    pub range: f64,
}

impl ExponentialFit {
    pub fn nugget_ratio(&self) -> f64 {
        self.nugget / (self.nugget + self.partial_sill)
    }
}

/// Fits `gamma(h) = c0 + c1 (1 - exp(-3h / a))` by a grid search over `a`,
/// solving pair-count weighted least squares for `c0, c1` at each `a`.
pub fn fit_exponential(v: &Variogram, ranges: impl Iterator<Item = f64>) -> ExponentialFit {
    let mut best: Option<(f64, ExponentialFit)> = None;
    for a in ranges {
        let (mut sw, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for ((&h, &g), &w) in v.lag.iter().zip(&v.gamma).zip(&v.pairs) {
            let w = w as f64;
            let x = 1.0 - (-3.0 * h / a).exp();
            sw += w;
            sx += w * x;
            sy += w * g;
            sxx += w * x * x;
            sxy += w * x * g;
        }
        let c1 = (sw * sxy - sx * sy) / (sw * sxx - sx * sx);
        let c0 = (sy - c1 * sx) / sw;
        let sse: f64 = v
            .lag
            .iter()
            .zip(&v.gamma)
            .zip(&v.pairs)
            .map(|((&h, &g), &w)| w as f64 * (g - c0 - c1 * (1.0 - (-3.0 * h / a).exp())).powi(2))
            .sum();
        if best.as_ref().map_or(true, |(s, _)| sse < *s) {
            best = Some((
                sse,
                ExponentialFit {
                    nugget: c0,
                    partial_sill: c1,
                    range: a,
                },
            ));
        }
    }
    best.expect("non-empty range grid").1
}

/// Ensemble fit for structured fields with the given parameters.
pub fn recover_field_parameters(
    grid: GridSpec,
    spatial_sill: f64,
    nugget: f64,
    range_m: f64,
    seeds: std::ops::Range<u64>,
) -> ExponentialFit {
    use nutrient_lattice::lattice::GaussianFieldSampler;
    let sampler = GaussianFieldSampler::new(grid, spatial_sill, nugget, range_m).unwrap();
    let fields: Vec<Vec<f64>> = seeds.map(|s| sampler.sample(s)).collect();
    let v = empirical_variogram(grid, &fields, grid.cell_size_m, 3.0 * range_m);
    fit_exponential(&v, (10..=600).map(|a| a as f64))
}
