//! Crop-rotation effects on soil N-P-K modeled as deformation of a spatial lattice.
//!
//! A field is a regular grid of cells holding normalized N, P and K
//! concentrations for every simulated year. Each year the crop in rotation
//! applies a multiplicative force, scaled per cell by a soil stiffness factor,
//! and the result is smoothed with a mass-conserving Gaussian kernel. Outcomes
//! are summarized as a per-cell multivariate stress and tested with paired
//! Cramér–von Mises permutation tests and Moran's I.
//!
//! [`scenario`] ties the pieces together behind a JSON configuration and
//! writes CSV and SVG reports.

pub mod error;
pub mod forces;
pub mod lattice;
pub mod rng;
pub mod scenario;
pub mod smoothing;
pub mod stats;
pub mod stress;

pub use error::{Error, Result};
pub use forces::{baseline_crop_library, CropForce, CropLibrary, Rotation};
pub use lattice::{Channel, GridSpec, LatticeState, Layer, StiffnessMap};
pub use scenario::{RunReport, ScenarioConfig};
pub use smoothing::{BoundaryMode, KernelSpec};
pub use stress::{Decomposition, StressMap, StressSummary};
