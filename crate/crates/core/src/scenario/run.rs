use std::collections::HashSet;
use std::fmt::Write as _;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use super::config::{InitSpec, ScenarioConfig, StiffnessLayout};
use crate::error::{Error, Result};
use crate::forces::{run_rotation_observed, scale_forces, SmoothingStep};
use crate::lattice::{
    buffering_index_k, generate_lognormal_field, generate_structured_field, raster, stiffness_from_buffering,
    stiffness_from_texture, BufferingParams, Channel, GridSpec, LatticeState, Layer, StiffnessMap,
    TextureClassMap,
};
use crate::rng;
use crate::stats::{cvm_joint_permutation_test, morans_i, JointCvmResult, MoranResult};
use crate::stress::{decompose, stress_map, summarize, StressSummary};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelSummary {
    pub mean: f64,
    pub sd: f64,
    pub min: f64,
    pub max: f64,
}

impl ChannelSummary {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        ChannelSummary {
            mean,
            sd,
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        }
    }
}

/// Final-year per-cell values, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CellTable {
    pub grid: GridSpec,
    pub n: Vec<f64>,
    pub p: Vec<f64>,
    pub k: Vec<f64>,
    pub stress: Vec<f64>,
    pub dominant: Vec<Channel>,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub name: String,
    pub summary: StressSummary,
    /// Share of cells dominated by N, P, K.
    pub dominance: [f64; 3],
    pub channels: [ChannelSummary; 3],
    pub cvm: JointCvmResult,
    /// `None` when the stress map is constant and Moran's I is undefined.
    pub moran: Option<MoranResult>,
    pub duration: Duration,
    pub cells: CellTable,
}

/// Largest relative change of a channel total across a smoothing call.
#[derive(Debug, Clone, Copy, Default)]
pub struct ConservationLog {
    pub calls: usize,
    pub max_relative_error: f64,
}

pub fn build_stiffness(layout: &StiffnessLayout, grid: GridSpec) -> Result<StiffnessMap> {
    match layout {
        StiffnessLayout::Quadrant { sand, loam, clay } => {
            stiffness_from_texture(&TextureClassMap::quadrant(grid), *sand, *loam, *clay)
        }
        StiffnessLayout::UniformClass {
            class,
            sand,
            loam,
            clay,
        } => stiffness_from_texture(&TextureClassMap::uniform(grid, *class), *sand, *loam, *clay),
        StiffnessLayout::TextureCsv {
            path,
            sand,
            loam,
            clay,
        } => stiffness_from_texture(&raster::read_class_raster(path, grid)?, *sand, *loam, *clay),
        StiffnessLayout::AlphaCsv { path } => {
            StiffnessMap::new(grid, raster::read_value_raster(path, grid)?.into_values())
        }
        StiffnessLayout::BufferingCsv { path, beta } => stiffness_from_buffering(
            &raster::read_value_raster(path, grid)?,
            &BufferingParams {
                beta: *beta,
                weights: [1.0, 0.0, 0.0],
            },
        ),
        StiffnessLayout::KBuffering {
            clay,
            smectite_illite,
            cec,
            weights,
            beta,
        } => {
            let index = buffering_index_k(
                &raster::read_value_raster(clay, grid)?,
                &raster::read_value_raster(smectite_illite, grid)?,
                &raster::read_value_raster(cec, grid)?,
                *weights,
            )?;
            stiffness_from_buffering(
                &index,
                &BufferingParams {
                    beta: *beta,
                    weights: *weights,
                },
            )
        }
    }
}

pub fn initial_state(config: &ScenarioConfig) -> Result<LatticeState> {
    let slices = config.rotation.years() + 1;
    match &config.init {
        InitSpec::Uniform { value } => LatticeState::new_uniform(config.grid, slices, *value),
        InitSpec::RandomField { n, p, k } => {
            let mut layers = Vec::with_capacity(3);
            for (c, params) in Channel::ALL.into_iter().zip([n, p, k]) {
                let seed = rng::derive_seed(config.seed, rng::INIT_FIELD + c.index() as u64);
                let layer: Layer = if params.lognormal {
                    generate_lognormal_field(config.grid, params, seed)?
                } else {
                    generate_structured_field(config.grid, params, seed)?
                };
                layers.push(layer);
            }
            let [a, b, c]: [Layer; 3] = layers.try_into().expect("three channels");
            LatticeState::from_initial([a, b, c], slices)
        }
    }
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<RunReport> {
    run_scenario_logged(config).map(|(r, _)| r)
}

/// Runs a scenario and also reports mass conservation across every smoothing call.
pub fn run_scenario_logged(config: &ScenarioConfig) -> Result<(RunReport, ConservationLog)> {
    execute(config).map_err(|e| Error::Scenario {
        scenario: config.name.clone(),
        source: Box::new(e),
    })
}

fn execute(config: &ScenarioConfig) -> Result<(RunReport, ConservationLog)> {
    let start = Instant::now();
    config.validate()?;
    let grid = config.grid;
    let stiffness = build_stiffness(&config.stiffness, grid)?;
    let crops = scale_forces(&config.crops, config.force_scale)?;
    let state = initial_state(config)?;

    let mut log = ConservationLog::default();
    let state = run_rotation_observed(
        state,
        &config.rotation,
        &crops,
        &stiffness,
        &config.smoothing,
        |step: SmoothingStep<'_>| {
            let before = step.before.sum();
            let after = step.after.sum();
            let rel = (after - before).abs() / before.abs();
            log.calls += 1;
            log.max_relative_error = log.max_relative_error.max(rel);
        },
    )?;

    let year = state.final_year();
    let stress = stress_map(&state, year)?;
    let decomposition = decompose(&state, year)?;
    let summary = summarize(&stress, config.threshold);

    let initial: Vec<&[f64]> = Channel::ALL
        .iter()
        .map(|&c| state.slice(0, c))
        .collect::<Result<_>>()?;
    let last: Vec<&[f64]> = Channel::ALL
        .iter()
        .map(|&c| state.slice(year, c))
        .collect::<Result<_>>()?;
    let cvm = cvm_joint_permutation_test(
        &initial,
        &last,
        config.stats.permutations,
        rng::derive_seed(config.seed, rng::CVM_PERMUTATION),
    )?;
    let moran = match morans_i(
        &stress.d,
        grid,
        config.stats.moran_permutations,
        rng::derive_seed(config.seed, rng::MORAN_PERMUTATION),
    ) {
        Ok(m) => Some(m),
        Err(Error::ZeroVariance) => None,
        Err(e) => return Err(e),
    };

    let channels = [
        ChannelSummary::of(last[0]),
        ChannelSummary::of(last[1]),
        ChannelSummary::of(last[2]),
    ];
    let cells = CellTable {
        grid,
        n: last[0].to_vec(),
        p: last[1].to_vec(),
        k: last[2].to_vec(),
        stress: stress.d,
        dominant: decomposition.dominant,
    };
    let report = RunReport {
        name: config.name.clone(),
        summary,
        dominance: decomposition.fractions,
        channels,
        cvm,
        moran,
        duration: start.elapsed(),
        cells,
    };
    Ok((report, log))
}

/// Every scenario's outcome, in input order.
#[derive(Debug)]
pub struct SuiteReport {
    pub outcomes: Vec<(String, Result<RunReport>)>,
}

impl SuiteReport {
    pub fn reports(&self) -> impl Iterator<Item = &RunReport> {
        self.outcomes.iter().filter_map(|(_, r)| r.as_ref().ok())
    }

    pub fn failures(&self) -> impl Iterator<Item = (&str, &Error)> {
        self.outcomes
            .iter()
            .filter_map(|(n, r)| r.as_ref().err().map(|e| (n.as_str(), e)))
    }

    /// Plain-text table of Mean D, Max D, CV_D and Moran's I per scenario.
    pub fn comparison_table(&self) -> String {
        let width = self
            .outcomes
            .iter()
            .map(|(n, _)| n.len())
            .max()
            .unwrap_or(8)
            .max(8);
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<width$}  {:>8}  {:>8}  {:>8}  {:>9}",
            "scenario", "mean_d", "max_d", "cv_d", "moran_i"
        );
        for (name, outcome) in &self.outcomes {
            match outcome {
                Ok(r) => {
                    let moran = r
                        .moran
                        .map(|m| format!("{:.4}", m.i))
                        .unwrap_or_else(|| "NA".into());
                    let _ = writeln!(
                        out,
                        "{:<width$}  {:>8.4}  {:>8.4}  {:>8.4}  {:>9}",
                        name, r.summary.mean_d, r.summary.max_d, r.summary.cv_d, moran
                    );
                }
                Err(e) => {
                    let _ = writeln!(out, "{name:<width$}  FAILED: {e}");
                }
            }
        }
        out
    }
}

/// Runs scenarios in parallel. Individual failures are kept in the report.
pub fn run_suite(configs: &[ScenarioConfig]) -> Result<SuiteReport> {
    if configs.is_empty() {
        return Err(Error::Empty("scenario list"));
    }
    let mut seen = HashSet::new();
    for c in configs {
        if !seen.insert(c.name.as_str()) {
            return Err(Error::Duplicate(c.name.clone()));
        }
    }
    let outcomes = configs
        .par_iter()
        .map(|c| (c.name.clone(), run_scenario(c)))
        .collect();
    Ok(SuiteReport { outcomes })
}
