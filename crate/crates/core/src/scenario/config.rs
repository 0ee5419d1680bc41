//! JSON scenario configuration.
//!
//! A config document may name a built-in `preset` and override any subset of
//! its fields. Without a preset, unspecified fields take the baseline values.
//! Relative raster paths are resolved against the config file's directory.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::presets;
use crate::error::{Error, Result};
use crate::forces::{scale_forces, CropForce, CropLibrary, Rotation};
use crate::lattice::{FieldParams, GridSpec, TextureClass};
use crate::smoothing::{BoundaryMode, KernelSpec};
use crate::stats::MIN_PERMUTATIONS;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "layout", rename_all = "snake_case", deny_unknown_fields)]
pub enum StiffnessLayout {
    /// Sand lower-left, clay upper-right, loam in the other two quadrants.
    Quadrant {
        #[serde(default = "default_sand")]
        sand: f64,
        #[serde(default = "default_loam")]
        loam: f64,
        #[serde(default = "default_clay")]
        clay: f64,
    },
    /// Every cell has one texture class.
    UniformClass {
        class: TextureClass,
        #[serde(default = "default_sand")]
        sand: f64,
        #[serde(default = "default_loam")]
        loam: f64,
        #[serde(default = "default_clay")]
        clay: f64,
    },
    /// `x,y,class` raster.
    TextureCsv {
        path: PathBuf,
        #[serde(default = "default_sand")]
        sand: f64,
        #[serde(default = "default_loam")]
        loam: f64,
        #[serde(default = "default_clay")]
        clay: f64,
    },
    /// `x,y,value` raster of alpha values.
    AlphaCsv { path: PathBuf },
    /// `x,y,value` raster of a buffering index in `[0, 1]`.
    BufferingCsv { path: PathBuf, beta: f64 },
    /// Potassium buffering index from clay, smectite:illite and CEC rasters.
    KBuffering {
        clay: PathBuf,
        smectite_illite: PathBuf,
        cec: PathBuf,
        weights: [f64; 3],
        beta: f64,
    },
}

fn default_sand() -> f64 {
    1.0
}
fn default_loam() -> f64 {
    0.5
}
fn default_clay() -> f64 {
    0.2
}

impl StiffnessLayout {
    pub fn quadrant(sand: f64, loam: f64, clay: f64) -> Self {
        StiffnessLayout::Quadrant { sand, loam, clay }
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        match self {
            StiffnessLayout::TextureCsv { path, .. }
            | StiffnessLayout::AlphaCsv { path }
            | StiffnessLayout::BufferingCsv { path, .. } => fix(path),
            StiffnessLayout::KBuffering {
                clay,
                smectite_illite,
                cec,
                ..
            } => {
                fix(clay);
                fix(smectite_illite);
                fix(cec);
            }
            StiffnessLayout::Quadrant { .. } | StiffnessLayout::UniformClass { .. } => {}
        }
    }

    fn validate(&self) -> Result<()> {
        let alpha = |name: &str, a: f64| {
            if a > 0.0 && a <= 1.0 {
                Ok(())
            } else {
                Err(Error::config(
                    format!("stiffness.{name}"),
                    format!("alpha must lie in (0, 1], got {a}"),
                ))
            }
        };
        let beta = |b: f64| {
            if b >= 0.0 && b.is_finite() {
                Ok(())
            } else {
                Err(Error::config(
                    "stiffness.beta",
                    format!("must be finite and >= 0, got {b}"),
                ))
            }
        };
        match self {
            StiffnessLayout::Quadrant { sand, loam, clay }
            | StiffnessLayout::UniformClass { sand, loam, clay, .. }
            | StiffnessLayout::TextureCsv { sand, loam, clay, .. } => {
                alpha("sand", *sand)?;
                alpha("loam", *loam)?;
                alpha("clay", *clay)
            }
            StiffnessLayout::AlphaCsv { .. } => Ok(()),
            StiffnessLayout::BufferingCsv { beta: b, .. } => beta(*b),
            StiffnessLayout::KBuffering { weights, beta: b, .. } => {
                if weights.iter().any(|w| !w.is_finite()) {
                    return Err(Error::config("stiffness.weights", "must be finite"));
                }
                beta(*b)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitSpec {
    Uniform {
        #[serde(default = "default_init_value")]
        value: f64,
    },
    /// Independent random field per channel.
    RandomField {
        n: FieldParams,
        p: FieldParams,
        k: FieldParams,
    },
}

fn default_init_value() -> f64 {
    1.0
}

impl InitSpec {
    fn validate(&self) -> Result<()> {
        match self {
            InitSpec::Uniform { value } => {
                if !(*value > 0.0 && value.is_finite()) {
                    return Err(Error::config(
                        "init.value",
                        format!("must be positive, got {value}"),
                    ));
                }
            }
            InitSpec::RandomField { n, p, k } => {
                for (label, params) in [("n", n), ("p", p), ("k", k)] {
                    params.validate().map_err(|e| match e {
                        Error::InvalidParameter { name, reason } => {
                            Error::config(format!("init.{label}.{name}"), reason)
                        }
                        other => Error::config(format!("init.{label}"), other.to_string()),
                    })?;
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatsSettings {
    /// Replicates for the Cramér–von Mises tests.
    pub permutations: usize,
    /// Replicates for Moran's I. Needs more than 999 for `p < 0.001` to be reachable.
    pub moran_permutations: usize,
}

impl Default for StatsSettings {
    fn default() -> Self {
        StatsSettings {
            permutations: 999,
            moran_permutations: 9999,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputSettings {
    pub dir: Option<PathBuf>,
    pub cells_csv: bool,
    pub heatmap: bool,
}

impl Default for OutputSettings {
    fn default() -> Self {
        OutputSettings {
            dir: None,
            cells_csv: true,
            heatmap: true,
        }
    }
}

/// A fully validated scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub grid: GridSpec,
    pub seed: u64,
    pub rotation: Rotation,
    /// Unscaled library; `force_scale` is applied at run time.
    pub crops: CropLibrary,
    pub force_scale: f64,
    pub stiffness: StiffnessLayout,
    pub smoothing: KernelSpec,
    pub init: InitSpec,
    pub stats: StatsSettings,
    pub threshold: f64,
    pub outputs: OutputSettings,
}

// ---- raw document ----

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<RawGrid>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rotation: Option<Rotation>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub crops: Option<CropsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub force_scale: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stiffness: Option<StiffnessLayout>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smoothing: Option<RawSmoothing>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub init: Option<InitSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<RawStats>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outputs: Option<RawOutputs>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawGrid {
    pub nx: Option<usize>,
    pub ny: Option<usize>,
    pub cell_size_m: Option<f64>,
}

/// `"baseline"` or an explicit list of crops.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CropsSpec {
    Named(String),
    List(Vec<CropForce>),
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSmoothing {
    pub sigma: Option<f64>,
    pub radius: Option<usize>,
    pub boundary: Option<BoundaryMode>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawStats {
    pub permutations: Option<usize>,
    pub moran_permutations: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawOutputs {
    pub dir: Option<PathBuf>,
    pub cells_csv: Option<bool>,
    pub heatmap: Option<bool>,
}

pub fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_config(&text, base)
}

/// Parses and validates a config document; relative paths resolve against `base_dir`.
pub fn parse_config(text: &str, base_dir: &Path) -> Result<ScenarioConfig> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let raw: RawConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        Error::config(
            if path == "." { "<root>".into() } else { path },
            e.into_inner().to_string(),
        )
    })?;
    let mut config = from_raw(raw)?;
    config.stiffness.resolve_paths(base_dir);
    if let Some(dir) = &mut config.outputs.dir {
        if dir.is_relative() {
            *dir = base_dir.join(&*dir);
        }
    }
    Ok(config)
}

/// Applies a raw document on top of its preset (or the baseline) and validates.
pub fn from_raw(raw: RawConfig) -> Result<ScenarioConfig> {
    let mut cfg = match &raw.preset {
        Some(name) => presets::preset(name)
            .ok_or_else(|| Error::config("preset", format!("unknown preset `{name}`")))?,
        None => {
            let mut c = presets::baseline();
            c.name = "custom".into();
            c
        }
    };
    if let Some(name) = raw.name {
        cfg.name = name;
    }
    if let Some(g) = raw.grid {
        cfg.grid = GridSpec {
            nx: g.nx.unwrap_or(cfg.grid.nx),
            ny: g.ny.unwrap_or(cfg.grid.ny),
            cell_size_m: g.cell_size_m.unwrap_or(cfg.grid.cell_size_m),
        };
    }
    if let Some(seed) = raw.seed {
        cfg.seed = seed;
    }
    if let Some(rotation) = raw.rotation {
        cfg.rotation = rotation;
    }
    let crop_list = match raw.crops {
        None => None,
        Some(CropsSpec::Named(name)) if name == "baseline" => {
            cfg.crops = crate::forces::baseline_crop_library();
            None
        }
        Some(CropsSpec::Named(name)) => {
            return Err(Error::config("crops", format!("unknown crop library `{name}`")))
        }
        Some(CropsSpec::List(list)) => Some(list),
    };
    if let Some(scale) = raw.force_scale {
        cfg.force_scale = scale;
    }
    if let Some(s) = raw.stiffness {
        cfg.stiffness = s;
    }
    if let Some(s) = raw.smoothing {
        let sigma_changed = s.sigma.is_some_and(|v| v != cfg.smoothing.sigma);
        if let Some(sigma) = s.sigma {
            cfg.smoothing.sigma = sigma;
        }
        match s.radius {
            Some(r) => cfg.smoothing.radius = r,
            None if sigma_changed && cfg.smoothing.sigma > 0.0 && cfg.smoothing.sigma.is_finite() => {
                cfg.smoothing.radius = KernelSpec::default_radius(cfg.smoothing.sigma)
            }
            None => {}
        }
        if let Some(b) = s.boundary {
            cfg.smoothing.boundary = b;
        }
    }
    if let Some(init) = raw.init {
        cfg.init = init;
    }
    if let Some(s) = raw.stats {
        if let Some(r) = s.permutations {
            cfg.stats.permutations = r;
        }
        if let Some(r) = s.moran_permutations {
            cfg.stats.moran_permutations = r;
        }
    }
    if let Some(t) = raw.threshold {
        cfg.threshold = t;
    }
    if let Some(o) = raw.outputs {
        if o.dir.is_some() {
            cfg.outputs.dir = o.dir;
        }
        if let Some(v) = o.cells_csv {
            cfg.outputs.cells_csv = v;
        }
        if let Some(v) = o.heatmap {
            cfg.outputs.heatmap = v;
        }
    }

    if let Some(list) = crop_list {
        let mut lib = CropLibrary::default();
        for (i, crop) in list.into_iter().enumerate() {
            lib.insert(crop).map_err(|e| match e {
                Error::Duplicate(name) => {
                    Error::config(format!("crops[{i}].name"), format!("duplicate crop `{name}`"))
                }
                other => Error::config(format!("crops[{i}].f"), other.to_string()),
            })?;
        }
        cfg.crops = lib;
    }

    cfg.validate()?;
    Ok(cfg)
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        if self.name.trim().is_empty() {
            return Err(Error::config("name", "must not be empty"));
        }
        if self.grid.nx < 2 {
            return Err(Error::config(
                "grid.nx",
                format!("must be >= 2, got {}", self.grid.nx),
            ));
        }
        if self.grid.ny < 2 {
            return Err(Error::config(
                "grid.ny",
                format!("must be >= 2, got {}", self.grid.ny),
            ));
        }
        if !(self.grid.cell_size_m > 0.0 && self.grid.cell_size_m.is_finite()) {
            return Err(Error::config(
                "grid.cell_size_m",
                format!("must be positive, got {}", self.grid.cell_size_m),
            ));
        }
        if self.rotation.sequence.is_empty() {
            return Err(Error::config("rotation.sequence", "must not be empty"));
        }
        if self.rotation.cycles == 0 {
            return Err(Error::config("rotation.cycles", "must be at least 1"));
        }
        for (i, name) in self.rotation.sequence.iter().enumerate() {
            if self.crops.get(name).is_none() {
                return Err(Error::config(
                    format!("rotation.sequence[{i}]"),
                    format!("unknown crop `{name}`"),
                ));
            }
        }
        scale_forces(&self.crops, self.force_scale)
            .map_err(|e| Error::config("force_scale", e.to_string()))?;
        self.stiffness.validate()?;
        let s = &self.smoothing;
        if !(s.sigma > 0.0 && s.sigma.is_finite()) {
            return Err(Error::config(
                "smoothing.sigma",
                format!("must be positive, got {}", s.sigma),
            ));
        }
        if s.radius < 1 {
            return Err(Error::config("smoothing.radius", "must be at least 1"));
        }
        self.init.validate()?;
        if self.stats.permutations < MIN_PERMUTATIONS {
            return Err(Error::config(
                "stats.permutations",
                format!(
                    "must be at least {MIN_PERMUTATIONS}, got {}",
                    self.stats.permutations
                ),
            ));
        }
        if self.stats.moran_permutations < MIN_PERMUTATIONS {
            return Err(Error::config(
                "stats.moran_permutations",
                format!(
                    "must be at least {MIN_PERMUTATIONS}, got {}",
                    self.stats.moran_permutations
                ),
            ));
        }
        if !(self.threshold >= 0.0 && self.threshold.is_finite()) {
            return Err(Error::config(
                "threshold",
                format!("must be finite and >= 0, got {}", self.threshold),
            ));
        }
        Ok(())
    }

    /// Fully materialized document form of this config.
    pub fn to_raw(&self) -> RawConfig {
        RawConfig {
            name: Some(self.name.clone()),
            preset: None,
            grid: Some(RawGrid {
                nx: Some(self.grid.nx),
                ny: Some(self.grid.ny),
                cell_size_m: Some(self.grid.cell_size_m),
            }),
            seed: Some(self.seed),
            rotation: Some(self.rotation.clone()),
            crops: Some(CropsSpec::List(self.crops.iter().cloned().collect())),
            force_scale: Some(self.force_scale),
            stiffness: Some(self.stiffness.clone()),
            smoothing: Some(RawSmoothing {
                sigma: Some(self.smoothing.sigma),
                radius: Some(self.smoothing.radius),
                boundary: Some(self.smoothing.boundary),
            }),
            init: Some(self.init.clone()),
            stats: Some(RawStats {
                permutations: Some(self.stats.permutations),
                moran_permutations: Some(self.stats.moran_permutations),
            }),
            threshold: Some(self.threshold),
            outputs: Some(RawOutputs {
                dir: self.outputs.dir.clone(),
                cells_csv: Some(self.outputs.cells_csv),
                heatmap: Some(self.outputs.heatmap),
            }),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_raw()).expect("config serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ScenarioConfig> {
        parse_config(text, Path::new("/tmp"))
    }

    fn config_path(text: &str) -> String {
        match parse(text) {
            Err(Error::Config { path, .. }) => path,
            other => panic!("expected config error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_preset_materializes_baseline() {
        let cfg = parse(r#"{"preset": "baseline"}"#).unwrap();
        assert_eq!(cfg, presets::baseline());
        assert_eq!(cfg.smoothing.sigma, 1.2);
        assert_eq!(cfg.smoothing.radius, 4);
        assert_eq!(cfg.smoothing.boundary, BoundaryMode::TruncatedRenormalized);
        assert_eq!(cfg.stats.permutations, 999);
        assert_eq!(cfg.threshold, 0.3);
        assert_eq!((cfg.grid.nx, cfg.grid.ny, cfg.grid.cell_size_m), (20, 20, 10.0));
    }

    #[test]
    fn negative_sigma_names_field() {
        assert_eq!(config_path(r#"{"smoothing": {"sigma": -1}}"#), "smoothing.sigma");
    }

    #[test]
    fn unknown_crop_is_rejected() {
        assert_eq!(
            config_path(r#"{"rotation": {"sequence": ["Corn", "Rye"]}}"#),
            "rotation.sequence[1]"
        );
    }

    #[test]
    fn schema_errors_carry_paths() {
        assert_eq!(config_path(r#"{"grid": {"nx": "twenty"}}"#), "grid.nx");
        assert_eq!(config_path(r#"{"smoothing": {"bogus": 1}}"#), "smoothing.bogus");
        assert_eq!(config_path(r#"{"preset": "nope"}"#), "preset");
        assert_eq!(
            config_path(r#"{"stiffness": {"layout": "quadrant", "clay": 0}}"#),
            "stiffness.clay"
        );
        assert_eq!(
            config_path(r#"{"stats": {"permutations": 10}}"#),
            "stats.permutations"
        );
        assert_eq!(config_path(r#"{"force_scale": 2.0}"#), "force_scale");
        assert_eq!(
            config_path(r#"{"init": {"kind": "random_field", "n": {"range_m": 0}, "p": {}, "k": {}}}"#),
            "init.n.range_m"
        );
        assert!(matches!(parse("{not json"), Err(Error::Config { .. })));
    }

    #[test]
    fn sigma_override_recomputes_radius() {
        let cfg = parse(r#"{"smoothing": {"sigma": 3.0}}"#).unwrap();
        assert_eq!(cfg.smoothing.radius, 9);
        let cfg = parse(r#"{"smoothing": {"sigma": 3.0, "radius": 5}}"#).unwrap();
        assert_eq!(cfg.smoothing.radius, 5);
    }

    #[test]
    fn custom_crops_replace_library() {
        let cfg = parse(
            r#"{"name": "covered",
                "crops": [{"name": "Corn", "f": [-0.6, -0.2, -0.2]}, {"name": "Clover", "f": [0.3, -0.05, -0.05]}],
                "rotation": {"sequence": ["Corn", "Clover"], "cycles": 2}}"#,
        )
        .unwrap();
        assert_eq!(cfg.crops.len(), 2);
        assert_eq!(cfg.rotation.years(), 4);
        assert_eq!(
            config_path(r#"{"crops": [{"name": "A", "f": [0,0,0]}, {"name": "A", "f": [0,0,0]}]}"#),
            "crops[1].name"
        );
    }

    #[test]
    fn relative_paths_resolve_against_config_dir() {
        let cfg = parse(r#"{"stiffness": {"layout": "alpha_csv", "path": "alpha.csv"}}"#).unwrap();
        assert_eq!(
            cfg.stiffness,
            StiffnessLayout::AlphaCsv {
                path: PathBuf::from("/tmp/alpha.csv")
            }
        );
    }

    #[test]
    fn json_round_trip() {
        for name in presets::names() {
            let cfg = presets::preset(name).unwrap();
            let again = parse(&cfg.to_json()).unwrap();
            assert_eq!(cfg, again, "{name}");
        }
    }
}
