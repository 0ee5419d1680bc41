//! Built-in scenarios: the corn-soybean-wheat baseline and its sensitivity variants.

use super::config::{InitSpec, OutputSettings, ScenarioConfig, StatsSettings, StiffnessLayout};
use crate::forces::{baseline_crop_library, Rotation};
use crate::lattice::{FieldParams, GridSpec};
use crate::smoothing::{BoundaryMode, KernelSpec};

pub const BASELINE_SEED: u64 = 20_240_601;

const PRESETS: &[(&str, &str)] = &[
    (
        "baseline",
        "Corn-Soybean-Wheat, quadrant stiffness (1.0/0.5/0.2), sigma 1.2",
    ),
    ("s1_sigma3", "Baseline with high smoothing, sigma 3.0"),
    (
        "s2_low_contrast",
        "Baseline with low stiffness contrast (1.0/0.9/0.8)",
    ),
    ("s3_force15", "Baseline with all crop forces scaled by 1.5"),
    ("s4_continuous_corn", "Corn-Corn-Corn"),
    ("s4_corn_soybean", "Corn-Soybean-Corn"),
    (
        "heterogeneous_init",
        "Baseline from random initial fields (nugget:sill 0.25, range 100 m)",
    ),
];

pub fn names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn describe() -> &'static [(&'static str, &'static str)] {
    PRESETS
}

fn rotation(crops: &[&str]) -> Rotation {
    Rotation {
        sequence: crops.iter().map(|c| c.to_string()).collect(),
        cycles: 1,
    }
}

pub fn baseline() -> ScenarioConfig {
    ScenarioConfig {
        name: "baseline".into(),
        grid: GridSpec {
            nx: 20,
            ny: 20,
            cell_size_m: 10.0,
        },
        seed: BASELINE_SEED,
        rotation: rotation(&["Corn", "Soybean", "Wheat"]),
        crops: baseline_crop_library(),
        force_scale: 1.0,
        stiffness: StiffnessLayout::quadrant(1.0, 0.5, 0.2),
        smoothing: KernelSpec {
            sigma: 1.2,
            radius: KernelSpec::default_radius(1.2),
            boundary: BoundaryMode::TruncatedRenormalized,
        },
        init: InitSpec::Uniform { value: 1.0 },
        stats: StatsSettings::default(),
        threshold: crate::stress::DEFAULT_CRITICAL_STRESS,
        outputs: OutputSettings::default(),
    }
}

pub fn preset(name: &str) -> Option<ScenarioConfig> {
    let mut cfg = baseline();
    cfg.name = name.to_string();
    match name {
        "baseline" => {}
        "s1_sigma3" => {
            cfg.smoothing.sigma = 3.0;
            cfg.smoothing.radius = KernelSpec::default_radius(3.0);
        }
        "s2_low_contrast" => cfg.stiffness = StiffnessLayout::quadrant(1.0, 0.9, 0.8),
        "s3_force15" => cfg.force_scale = 1.5,
        "s4_continuous_corn" => cfg.rotation = rotation(&["Corn", "Corn", "Corn"]),
        "s4_corn_soybean" => cfg.rotation = rotation(&["Corn", "Soybean", "Corn"]),
        "heterogeneous_init" => {
            let field = FieldParams {
                mean: 1.0,
                spatial_sill: 0.03,
                nugget: 0.01,
                range_m: 100.0,
                floor: 0.01,
                lognormal: false,
                log_mean: 0.0,
            };
            cfg.init = InitSpec::RandomField {
                n: field.clone(),
                p: field.clone(),
                k: field,
            };
        }
        _ => return None,
    }
    Some(cfg)
}

pub fn all() -> Vec<ScenarioConfig> {
    names()
        .map(|n| preset(n).expect("listed preset exists"))
        .collect()
}
