use serde::{Deserialize, Serialize};

use super::{GridSpec, Layer};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TextureClass {
    Sand,
    Loam,
    Clay,
}

impl TextureClass {
    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sand" | "sandy" => Some(TextureClass::Sand),
            "loam" | "loamy" => Some(TextureClass::Loam),
            "clay" | "clayey" => Some(TextureClass::Clay),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TextureClassMap {
    grid: GridSpec,
    classes: Vec<TextureClass>,
}

impl TextureClassMap {
    pub fn new(grid: GridSpec, classes: Vec<TextureClass>) -> Result<Self> {
        if classes.len() != grid.len() {
            return Err(Error::LengthMismatch {
                left: grid.len(),
                right: classes.len(),
            });
        }
        Ok(TextureClassMap { grid, classes })
    }

    pub fn uniform(grid: GridSpec, class: TextureClass) -> Self {
        TextureClassMap {
            grid,
            classes: vec![class; grid.len()],
        }
    }

    /// Reference layout: sand in the lower-left quadrant, clay in the
    /// upper-right, loam elsewhere. On odd dimensions the extra row/column
    /// belongs to the upper/right half.
    pub fn quadrant(grid: GridSpec) -> Self {
        let (hx, hy) = (grid.nx / 2, grid.ny / 2);
        let mut classes = Vec::with_capacity(grid.len());
        for y in 0..grid.ny {
            for x in 0..grid.nx {
                classes.push(match (x < hx, y < hy) {
                    (true, true) => TextureClass::Sand,
                    (false, false) => TextureClass::Clay,
                    _ => TextureClass::Loam,
                });
            }
        }
        TextureClassMap { grid, classes }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn classes(&self) -> &[TextureClass] {
        &self.classes
    }

    pub fn get(&self, x: usize, y: usize) -> TextureClass {
        self.classes[self.grid.index(x, y)]
    }
}

/// Per-cell force multiplier `alpha` in `(0, 1]`; 1 means no buffering.
#[derive(Debug, Clone, PartialEq)]
pub struct StiffnessMap {
    grid: GridSpec,
    alpha: Vec<f64>,
}

fn check_alpha(name: &'static str, a: f64) -> Result<()> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::param(name, format!("alpha must lie in (0, 1], got {a}")));
    }
    Ok(())
}

impl StiffnessMap {
    pub fn new(grid: GridSpec, alpha: Vec<f64>) -> Result<Self> {
        if alpha.len() != grid.len() {
            return Err(Error::LengthMismatch {
                left: grid.len(),
                right: alpha.len(),
            });
        }
        for &a in &alpha {
            check_alpha("alpha", a)?;
        }
        Ok(StiffnessMap { grid, alpha })
    }

    pub fn uniform(grid: GridSpec, alpha: f64) -> Result<Self> {
        Self::new(grid, vec![alpha; grid.len()])
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.alpha[self.grid.index(x, y)]
    }
}

pub fn stiffness_from_texture(
    classes: &TextureClassMap,
    sand_alpha: f64,
    loam_alpha: f64,
    clay_alpha: f64,
) -> Result<StiffnessMap> {
    check_alpha("sand", sand_alpha)?;
    check_alpha("loam", loam_alpha)?;
    check_alpha("clay", clay_alpha)?;
    let alpha = classes
        .classes()
        .iter()
        .map(|c| match c {
            TextureClass::Sand => sand_alpha,
            TextureClass::Loam => loam_alpha,
            TextureClass::Clay => clay_alpha,
        })
        .collect();
    Ok(StiffnessMap {
        grid: classes.grid(),
        alpha,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BufferingParams {
    pub beta: f64,
    /// Weights for clay fraction, smectite:illite ratio and CEC.
    pub weights: [f64; 3],
}

impl BufferingParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::param(
                "beta",
                format!("must be finite and >= 0, got {}", self.beta),
            ));
        }
        if self.weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::param("weights", "must be finite"));
        }
        Ok(())
    }
}

/// `alpha = 1 / (1 + beta * B)` for a buffering index `B` in `[0, 1]`.
pub fn stiffness_from_buffering(index: &Layer, params: &BufferingParams) -> Result<StiffnessMap> {
    params.validate()?;
    let alpha = index
        .values()
        .iter()
        .map(|&b| {
            if (0.0..=1.0).contains(&b) {
                Ok(1.0 / (1.0 + params.beta * b))
            } else {
                Err(Error::OutOfRange(format!("buffering index {b} outside [0, 1]")))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(StiffnessMap {
        grid: index.grid(),
        alpha,
    })
}

/// Weighted potassium buffering index from co-registered, pre-normalized rasters,
/// clamped to `[0, 1]`.
pub fn buffering_index_k(
    clay: &Layer,
    smectite_illite: &Layer,
    cec: &Layer,
    weights: [f64; 3],
) -> Result<Layer> {
    let grid = clay.grid();
    grid.ensure_same(&smectite_illite.grid())?;
    grid.ensure_same(&cec.grid())?;
    let [w1, w2, w3] = weights;
    let values = clay
        .values()
        .iter()
        .zip(smectite_illite.values())
        .zip(cec.values())
        .map(|((&c, &s), &e)| (w1 * c + w2 * s + w3 * e).clamp(0.0, 1.0))
        .collect();
    Layer::from_values(grid, values)
}
