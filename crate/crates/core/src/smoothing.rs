//! Mass-conserving Gaussian smoothing of a single layer.
//!
//! Smoothing is written as a scatter: every source cell hands its value out
//! through its own copy of the kernel. Around grid edges part of that kernel
//! falls outside the field, and the two boundary modes decide where that share
//! goes:
//!
//! * [`BoundaryMode::TruncatedRenormalized`] drops the outside taps and keeps
//!   their weight on the source cell, so each source's in-grid kernel sums to 1.
//! * [`BoundaryMode::Reflective`] mirrors outside taps back across the grid
//!   edge (the edge is the outer face of the boundary cell).
//!
//! Both produce a symmetric, doubly stochastic operator: the global sum is
//! conserved and a constant field is a fixed point.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::Layer;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMode {
    #[default]
    TruncatedRenormalized,
    Reflective,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    /// Bandwidth in cell units.
    pub sigma: f64,
    /// Truncation radius in cells.
    pub radius: usize,
    pub boundary: BoundaryMode,
}

impl KernelSpec {
    /// Kernel with the default truncation radius `ceil(3 sigma)`.
    pub fn new(sigma: f64, boundary: BoundaryMode) -> Result<Self> {
        check_sigma(sigma)?;
        Ok(KernelSpec {
            sigma,
            radius: Self::default_radius(sigma),
            boundary,
        })
    }

    pub fn with_radius(sigma: f64, radius: usize, boundary: BoundaryMode) -> Result<Self> {
        check_sigma(sigma)?;
        Ok(KernelSpec {
            sigma,
            radius,
            boundary,
        })
    }

    pub fn default_radius(sigma: f64) -> usize {
        (3.0 * sigma).ceil().max(1.0) as usize
    }
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::param("sigma", format!("must be positive, got {sigma}")));
    }
    Ok(())
}

/// Normalized `(2r+1) x (2r+1)` Gaussian stencil.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel {
    radius: usize,
    weights: Vec<f64>,
}

impl Kernel {
    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn side(&self) -> usize {
        2 * self.radius + 1
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn weight(&self, dx: isize, dy: isize) -> f64 {
        let r = self.radius as isize;
        let side = self.side();
        self.weights[(dy + r) as usize * side + (dx + r) as usize]
    }
}

pub fn gaussian_kernel(spec: &KernelSpec) -> Result<Kernel> {
    check_sigma(spec.sigma)?;
    let r = spec.radius as isize;
    let two_s2 = 2.0 * spec.sigma * spec.sigma;
    let mut weights = Vec::with_capacity(((2 * r + 1) * (2 * r + 1)) as usize);
    for dy in -r..=r {
        for dx in -r..=r {
            weights.push((-((dx * dx + dy * dy) as f64) / two_s2).exp());
        }
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ok(Kernel {
        radius: spec.radius,
        weights,
    })
}

fn check_finite(layer: &Layer) -> Result<()> {
    match layer.values().iter().position(|v| !v.is_finite()) {
        Some(i) => Err(Error::NonFinite(i)),
        None => Ok(()),
    }
}

/// Smooths with the boundary handling named in `spec`.
pub fn smooth(layer: &Layer, spec: &KernelSpec) -> Result<Layer> {
    let kernel = gaussian_kernel(spec)?;
    smooth_with_kernel(layer, &kernel, spec.boundary)
}

pub fn smooth_with_kernel(layer: &Layer, kernel: &Kernel, boundary: BoundaryMode) -> Result<Layer> {
    match boundary {
        BoundaryMode::TruncatedRenormalized => scatter_truncated(layer, kernel),
        BoundaryMode::Reflective => scatter_reflective(layer, kernel),
    }
}

pub fn smooth_truncated(layer: &Layer, spec: &KernelSpec) -> Result<Layer> {
    scatter_truncated(layer, &gaussian_kernel(spec)?)
}

pub fn smooth_reflective(layer: &Layer, spec: &KernelSpec) -> Result<Layer> {
    scatter_reflective(layer, &gaussian_kernel(spec)?)
}

fn scatter_truncated(layer: &Layer, kernel: &Kernel) -> Result<Layer> {
    check_finite(layer)?;
    let grid = layer.grid();
    let (nx, ny) = (grid.nx as isize, grid.ny as isize);
    let r = kernel.radius() as isize;
    let side = kernel.side();
    let w = kernel.weights();
    let src = layer.values();
    let mut out = vec![0.0; src.len()];

    for y in 0..ny {
        for x in 0..nx {
            let v = src[(y * nx + x) as usize];
            let mut kept = 0.0;
            for dy in -r..=r {
                let uy = y + dy;
                if uy < 0 || uy >= ny {
                    continue;
                }
                let row = &w[(dy + r) as usize * side..][..side];
                let dst = (uy * nx) as usize;
                for dx in -r..=r {
                    let ux = x + dx;
                    if ux < 0 || ux >= nx {
                        continue;
                    }
                    let k = row[(dx + r) as usize];
                    out[dst + ux as usize] += v * k;
                    kept += k;
                }
            }
            // Weight of taps that fell off the grid stays with the source.
            out[(y * nx + x) as usize] += v * (1.0 - kept);
        }
    }
    Layer::from_values(grid, out)
}

/// Half-sample symmetric reflection: `-1 -> 0`, `n -> n - 1`, periodic in `2n`.
#[inline]
fn reflect(i: isize, n: isize) -> usize {
    let m = i.rem_euclid(2 * n);
    (if m < n { m } else { 2 * n - 1 - m }) as usize
}

fn scatter_reflective(layer: &Layer, kernel: &Kernel) -> Result<Layer> {
    check_finite(layer)?;
    let grid = layer.grid();
    let (nx, ny) = (grid.nx as isize, grid.ny as isize);
    let r = kernel.radius() as isize;
    let side = kernel.side();
    let w = kernel.weights();
    let src = layer.values();
    let mut out = vec![0.0; src.len()];

    for y in 0..ny {
        for x in 0..nx {
            let v = src[(y * nx + x) as usize];
            for dy in -r..=r {
                let dst = reflect(y + dy, ny) * grid.nx;
                let row = &w[(dy + r) as usize * side..][..side];
                for dx in -r..=r {
                    out[dst + reflect(x + dx, nx)] += v * row[(dx + r) as usize];
                }
            }
        }
    }
    Layer::from_values(grid, out)
}
