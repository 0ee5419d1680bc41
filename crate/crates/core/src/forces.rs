//! Crop force vectors, rotations, and the yearly force-then-smooth update.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Channel, LatticeState, Layer, StiffnessMap};
use crate::smoothing::{gaussian_kernel, smooth_with_kernel, KernelSpec};

/// Proportional per-season change in (N, P, K) caused by one crop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CropForce {
    pub name: String,
    pub f: [f64; 3],
}

impl CropForce {
    pub fn new(name: impl Into<String>, f: [f64; 3]) -> Result<Self> {
        let crop = CropForce { name: name.into(), f };
        crop.validate()?;
        Ok(crop)
    }

    pub fn validate(&self) -> Result<()> {
        for (c, v) in Channel::ALL.iter().zip(self.f) {
            if !(v > -1.0 && v < 1.0) {
                return Err(Error::OutOfRange(format!(
                    "crop `{}`: f_{c} = {v} outside (-1, 1)",
                    self.name
                )));
            }
        }
        Ok(())
    }

    pub fn force(&self, channel: Channel) -> f64 {
        self.f[channel.index()]
    }
}

/// Named crop forces, unique by name, in insertion order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CropLibrary {
    crops: Vec<CropForce>,
}

impl CropLibrary {
    pub fn new(crops: Vec<CropForce>) -> Result<Self> {
        let mut lib = CropLibrary::default();
        for crop in crops {
            lib.insert(crop)?;
        }
        Ok(lib)
    }

    pub fn insert(&mut self, crop: CropForce) -> Result<()> {
        crop.validate()?;
        if self.get(&crop.name).is_some() {
            return Err(Error::Duplicate(crop.name));
        }
        self.crops.push(crop);
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&CropForce> {
        self.crops.iter().find(|c| c.name == name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &CropForce> {
        self.crops.iter()
    }

    pub fn len(&self) -> usize {
        self.crops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.crops.is_empty()
    }
}

/// Corn, soybean and wheat at moderate single-season removal rates.
pub fn baseline_crop_library() -> CropLibrary {
    CropLibrary {
        crops: vec![
            CropForce {
                name: "Corn".into(),
                f: [-0.6, -0.2, -0.2],
            },
            CropForce {
                name: "Soybean".into(),
                f: [0.2, -0.1, -0.1],
            },
            CropForce {
                name: "Wheat".into(),
                f: [-0.2, -0.4, -0.1],
            },
        ],
    }
}

pub fn scale_forces(lib: &CropLibrary, factor: f64) -> Result<CropLibrary> {
    if !(factor > 0.0 && factor.is_finite()) {
        return Err(Error::param(
            "force_scale",
            format!("must be positive, got {factor}"),
        ));
    }
    let crops = lib
        .iter()
        .map(|c| CropForce::new(c.name.clone(), c.f.map(|v| v * factor)))
        .collect::<Result<Vec<_>>>()?;
    Ok(CropLibrary { crops })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Rotation {
    pub sequence: Vec<String>,
    #[serde(default = "Rotation::default_cycles")]
    pub cycles: usize,
}

impl Rotation {
    fn default_cycles() -> usize {
        1
    }

    pub fn new(sequence: Vec<String>, cycles: usize) -> Result<Self> {
        if sequence.is_empty() {
            return Err(Error::Empty("rotation sequence"));
        }
        if cycles == 0 {
            return Err(Error::param("cycles", "must be at least 1"));
        }
        Ok(Rotation { sequence, cycles })
    }

    /// Total simulated years.
    pub fn years(&self) -> usize {
        self.sequence.len() * self.cycles
    }

    /// Crop for each simulated year, in order.
    pub fn resolve<'a>(&self, lib: &'a CropLibrary) -> Result<Vec<&'a CropForce>> {
        if self.sequence.is_empty() {
            return Err(Error::Empty("rotation sequence"));
        }
        let once = self
            .sequence
            .iter()
            .map(|name| lib.get(name).ok_or_else(|| Error::UnknownCrop(name.clone())))
            .collect::<Result<Vec<_>>>()?;
        Ok(once.iter().copied().cycle().take(self.years()).collect())
    }
}

/// Pre-smoothing layers `S'(year) = S(year - 1) * (1 + f * alpha)` for N, P, K.
pub fn apply_force(
    state: &LatticeState,
    year: usize,
    crop: &CropForce,
    stiffness: &StiffnessMap,
) -> Result<[Layer; 3]> {
    if year == 0 {
        return Err(Error::param("year", "forces apply from year 1"));
    }
    state.check_year(year)?;
    let grid = state.grid();
    grid.ensure_same(&stiffness.grid())?;
    let alpha = stiffness.alpha();
    let mut out = Vec::with_capacity(3);
    for c in Channel::ALL {
        let f = crop.force(c);
        let prev = state.slice(year - 1, c)?;
        let mut values = Vec::with_capacity(prev.len());
        for (i, (&s, &a)) in prev.iter().zip(alpha).enumerate() {
            let factor = 1.0 + f * a;
            if factor <= 0.0 {
                let (x, y) = grid.coords(i);
                return Err(Error::ForceBound {
                    crop: crop.name.clone(),
                    channel: c.label(),
                    x,
                    y,
                    factor,
                });
            }
            values.push(s * factor);
        }
        out.push(Layer::from_values(grid, values)?);
    }
    let [n, p, k]: [Layer; 3] = out.try_into().expect("three channels");
    Ok([n, p, k])
}

/// One smoothing call during a rotation run.
pub struct SmoothingStep<'a> {
    pub year: usize,
    pub channel: Channel,
    pub before: &'a Layer,
    pub after: &'a Layer,
}

pub fn run_rotation(
    state: LatticeState,
    rotation: &Rotation,
    lib: &CropLibrary,
    stiffness: &StiffnessMap,
    kernel: &KernelSpec,
) -> Result<LatticeState> {
    run_rotation_observed(state, rotation, lib, stiffness, kernel, |_| {})
}

/// Runs every year of `rotation`: apply the crop force, then smooth each channel.
/// `observe` sees each smoothing call.
pub fn run_rotation_observed(
    mut state: LatticeState,
    rotation: &Rotation,
    lib: &CropLibrary,
    stiffness: &StiffnessMap,
    kernel: &KernelSpec,
    mut observe: impl FnMut(SmoothingStep<'_>),
) -> Result<LatticeState> {
    let crops = rotation.resolve(lib)?;
    if state.slices() < crops.len() + 1 {
        return Err(Error::param(
            "slices",
            format!(
                "state holds {} slices but the rotation needs {}",
                state.slices(),
                crops.len() + 1
            ),
        ));
    }
    let stencil = gaussian_kernel(kernel)?;
    for (i, crop) in crops.into_iter().enumerate() {
        let year = i + 1;
        let forced = apply_force(&state, year, crop, stiffness)?;
        for (c, layer) in Channel::ALL.into_iter().zip(&forced) {
            let smoothed = smooth_with_kernel(layer, &stencil, kernel.boundary)?;
            observe(SmoothingStep {
                year,
                channel: c,
                before: layer,
                after: &smoothed,
            });
            state.store(year, c, &smoothed)?;
        }
    }
    Ok(state)
}
