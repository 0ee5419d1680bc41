//! Grid geometry, the space × time × nutrient state tensor, initial-condition
//! generators and stiffness maps.

mod field;
pub mod raster;
mod stiffness;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use field::{generate_lognormal_field, generate_structured_field, FieldParams, GaussianFieldSampler};
pub use stiffness::{
    buffering_index_k, stiffness_from_buffering, stiffness_from_texture, BufferingParams, StiffnessMap,
    TextureClass, TextureClassMap,
};

/// Regular 2-D grid. Cells are addressed `(x, y)` with `y = 0` as the bottom row;
/// storage is row-major (`y * nx + x`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub nx: usize,
    pub ny: usize,
    pub cell_size_m: f64,
}

impl GridSpec {
    pub fn new(nx: usize, ny: usize, cell_size_m: f64) -> Result<Self> {
        let grid = GridSpec { nx, ny, cell_size_m };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 {
            return Err(Error::InvalidGrid(format!(
                "dimensions must be at least 2x2, got {}x{}",
                self.nx, self.ny
            )));
        }
        if !(self.cell_size_m > 0.0 && self.cell_size_m.is_finite()) {
            return Err(Error::InvalidGrid(format!(
                "cell_size_m must be positive, got {}",
                self.cell_size_m
            )));
        }
        Ok(())
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        debug_assert!(x < self.nx && y < self.ny);
        y * self.nx + x
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.nx, index / self.nx)
    }

    pub(crate) fn ensure_same(&self, other: &GridSpec) -> Result<()> {
        if self.nx != other.nx || self.ny != other.ny {
            return Err(Error::GridMismatch {
                expected: format!("{}x{}", self.nx, self.ny),
                actual: format!("{}x{}", other.nx, other.ny),
            });
        }
        Ok(())
    }
}

impl fmt::Display for GridSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{} @ {} m", self.nx, self.ny, self.cell_size_m)
    }
}

/// Nutrient channel. The discriminant is the storage order and the tie-break order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Channel {
    N = 0,
    P = 1,
    K = 2,
}

impl Channel {
    pub const ALL: [Channel; 3] = [Channel::N, Channel::P, Channel::K];

    #[inline]
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        match self {
            Channel::N => "N",
            Channel::P => "P",
            Channel::K => "K",
        }
    }
}

impl fmt::Display for Channel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One scalar value per grid cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Layer {
    pub fn filled(grid: GridSpec, value: f64) -> Self {
        Layer {
            grid,
            values: vec![value; grid.len()],
        }
    }

    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch {
                left: grid.len(),
                right: values.len(),
            });
        }
        Ok(Layer { grid, values })
    }

    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for y in 0..grid.ny {
            for x in 0..grid.nx {
                values.push(f(x, y));
            }
        }
        Layer { grid, values }
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    #[inline]
    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[self.grid.index(x, y)]
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, value: f64) {
        let i = self.grid.index(x, y);
        self.values[i] = value;
    }

    pub fn sum(&self) -> f64 {
        self.values.iter().sum()
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Normalized concentrations `S(x, y, t, c)` for every cell, stored year and channel.
///
/// Slice `t = 0` holds the initial condition and cannot be overwritten.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    grid: GridSpec,
    slices: usize,
    // [t][c][y][x]
    values: Vec<f64>,
}

impl LatticeState {
    /// Uniform initial state; every slice starts equal to `t = 0`.
    pub fn new_uniform(grid: GridSpec, slices: usize, value: f64) -> Result<Self> {
        grid.validate()?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::param("value", format!("must be positive, got {value}")));
        }
        let initial = [
            Layer::filled(grid, value),
            Layer::filled(grid, value),
            Layer::filled(grid, value),
        ];
        Self::from_initial(initial, slices)
    }

    /// State whose `t = 0` slice is given per channel (N, P, K order).
    pub fn from_initial(initial: [Layer; 3], slices: usize) -> Result<Self> {
        let grid = initial[0].grid();
        grid.validate()?;
        if slices == 0 {
            return Err(Error::param("slices", "need at least one time slice"));
        }
        for layer in &initial[1..] {
            grid.ensure_same(&layer.grid())?;
        }
        for layer in &initial {
            if let Some(i) = layer.values().iter().position(|v| !(*v > 0.0 && v.is_finite())) {
                return Err(Error::OutOfRange(format!(
                    "initial concentration at index {i} must be positive and finite, got {}",
                    layer.values()[i]
                )));
            }
        }
        let n = grid.len();
        let mut values = Vec::with_capacity(n * 3 * slices);
        for _ in 0..slices {
            for layer in &initial {
                values.extend_from_slice(layer.values());
            }
        }
        Ok(LatticeState { grid, slices, values })
    }

    #[inline]
    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    /// Number of stored time slices, `T + 1`.
    #[inline]
    pub fn slices(&self) -> usize {
        self.slices
    }

    /// Index of the last stored year, `T`.
    #[inline]
    pub fn final_year(&self) -> usize {
        self.slices - 1
    }

    fn offset(&self, year: usize, channel: Channel) -> usize {
        (year * 3 + channel.index()) * self.grid.len()
    }

    pub(crate) fn check_year(&self, year: usize) -> Result<()> {
        if year >= self.slices {
            return Err(Error::YearOutOfRange {
                year,
                slices: self.slices,
            });
        }
        Ok(())
    }

    pub fn slice(&self, year: usize, channel: Channel) -> Result<&[f64]> {
        self.check_year(year)?;
        let start = self.offset(year, channel);
        Ok(&self.values[start..start + self.grid.len()])
    }

    pub fn layer(&self, year: usize, channel: Channel) -> Result<Layer> {
        Ok(Layer {
            grid: self.grid,
            values: self.slice(year, channel)?.to_vec(),
        })
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize, year: usize, channel: Channel) -> f64 {
        self.values[self.offset(year, channel) + self.grid.index(x, y)]
    }

    /// Overwrites a finalized year slice. Slice 0 is rejected.
    pub fn store(&mut self, year: usize, channel: Channel, layer: &Layer) -> Result<()> {
        if year == 0 {
            return Err(Error::InitialSliceImmutable);
        }
        self.check_year(year)?;
        self.grid.ensure_same(&layer.grid())?;
        let start = self.offset(year, channel);
        let n = self.grid.len();
        self.values[start..start + n].copy_from_slice(layer.values());
        Ok(())
    }
}
