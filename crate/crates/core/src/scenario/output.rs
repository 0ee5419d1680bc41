//! Report files: `summary.csv`, `cells_<name>.csv` and `heatmap_<name>.svg`.

use std::fs;
use std::path::{Path, PathBuf};

use super::config::{OutputSettings, ScenarioConfig};
use super::heatmap;
use super::run::{CellTable, RunReport};
use crate::error::{Error, Result};
use crate::lattice::{Channel, GridSpec};

pub const SUMMARY_HEADER: [&str; 19] = [
    "name",
    "mean_d",
    "max_d",
    "min_d",
    "cv_d",
    "exceed_frac",
    "moran_i",
    "moran_p",
    "cvm_n",
    "p_n",
    "cvm_p",
    "p_p",
    "cvm_k",
    "p_k",
    "cvm_combined",
    "p_combined",
    "dom_n",
    "dom_p",
    "dom_k",
];

pub const CELLS_HEADER: [&str; 7] = ["x", "y", "n", "p", "k", "stress", "dominant"];

/// Formats with 6 significant digits, trailing zeros trimmed.
pub fn sig6(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return if v.is_nan() {
            "NA".into()
        } else if v == 0.0 {
            "0".into()
        } else {
            v.to_string()
        };
    }
    let magnitude = v.abs().log10().floor() as i32;
    if !(-5..=15).contains(&magnitude) {
        return format!("{v:.5e}");
    }
    let decimals = (5 - magnitude).max(0) as usize;
    let s = format!("{v:.decimals$}");
    // Rounding can carry into a new digit (9.999995 -> 10.00000); trimming handles both.
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    }
}

pub fn summary_row(r: &RunReport) -> Vec<String> {
    let (mi, mp) = match r.moran {
        Some(m) => (sig6(m.i), sig6(m.p_value)),
        None => ("NA".into(), "NA".into()),
    };
    let ch = &r.cvm.per_channel;
    vec![
        r.name.clone(),
        sig6(r.summary.mean_d),
        sig6(r.summary.max_d),
        sig6(r.summary.min_d),
        sig6(r.summary.cv_d),
        sig6(r.summary.exceed_fraction),
        mi,
        mp,
        sig6(ch[0].statistic),
        sig6(ch[0].p_value),
        sig6(ch[1].statistic),
        sig6(ch[1].p_value),
        sig6(ch[2].statistic),
        sig6(ch[2].p_value),
        sig6(r.cvm.combined.statistic),
        sig6(r.cvm.combined.p_value),
        sig6(r.dominance[0]),
        sig6(r.dominance[1]),
        sig6(r.dominance[2]),
    ]
}

pub fn write_summary_csv(path: &Path, reports: &[&RunReport]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(SUMMARY_HEADER).map_err(csv_err(path))?;
    for r in reports {
        w.write_record(summary_row(r)).map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_cells_csv(path: &Path, cells: &CellTable) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(CELLS_HEADER).map_err(csv_err(path))?;
    for i in 0..cells.grid.len() {
        let (x, y) = cells.grid.coords(i);
        w.write_record([
            x.to_string(),
            y.to_string(),
            sig6(cells.n[i]),
            sig6(cells.p[i]),
            sig6(cells.k[i]),
            sig6(cells.stress[i]),
            cells.dominant[i].label().to_string(),
        ])
        .map_err(csv_err(path))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(serde::Deserialize)]
struct CellRow {
    x: usize,
    y: usize,
    n: f64,
    p: f64,
    k: f64,
    stress: f64,
    dominant: String,
}

/// Reads a cells CSV back; the grid extent is inferred from the largest indices.
pub fn read_cells_csv(path: &Path, cell_size_m: f64) -> Result<CellTable> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_err(path))?;
    let rows: Vec<CellRow> = reader
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(csv_err(path))?;
    let nx = rows.iter().map(|r| r.x + 1).max().unwrap_or(0);
    let ny = rows.iter().map(|r| r.y + 1).max().unwrap_or(0);
    let grid = GridSpec::new(nx, ny, cell_size_m)?;
    if rows.len() != grid.len() {
        return Err(Error::LengthMismatch {
            left: grid.len(),
            right: rows.len(),
        });
    }
    let mut t = CellTable {
        grid,
        n: vec![0.0; grid.len()],
        p: vec![0.0; grid.len()],
        k: vec![0.0; grid.len()],
        stress: vec![0.0; grid.len()],
        dominant: vec![Channel::N; grid.len()],
    };
    for r in rows {
        let i = grid.index(r.x, r.y);
        t.n[i] = r.n;
        t.p[i] = r.p;
        t.k[i] = r.k;
        t.stress[i] = r.stress;
        t.dominant[i] = match r.dominant.as_str() {
            "N" => Channel::N,
            "P" => Channel::P,
            "K" => Channel::K,
            other => return Err(Error::OutOfRange(format!("unknown channel label `{other}`"))),
        };
    }
    Ok(t)
}

/// Writes the summary for all `reports` plus per-scenario files. Heatmaps share
/// one colour domain `[0, max stress across reports]`.
pub fn emit_suite(reports: &[&RunReport], dir: &Path, settings: &OutputSettings) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let summary = dir.join("summary.csv");
    write_summary_csv(&summary, reports)?;
    written.push(summary);

    let domain = reports
        .iter()
        .flat_map(|r| r.cells.stress.iter().copied())
        .fold(0.0, f64::max);
    for r in reports {
        let stem = file_stem(&r.name);
        if settings.cells_csv {
            let path = dir.join(format!("cells_{stem}.csv"));
            write_cells_csv(&path, &r.cells)?;
            written.push(path);
        }
        if settings.heatmap {
            let path = dir.join(format!("heatmap_{stem}.svg"));
            fs::write(&path, heatmap::render_svg(&r.name, &r.cells, domain))
                .map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
    }
    Ok(written)
}

/// Emits one scenario into its configured output directory (default `out`).
pub fn emit_reports(report: &RunReport, config: &ScenarioConfig) -> Result<Vec<PathBuf>> {
    let dir = config.outputs.dir.clone().unwrap_or_else(|| PathBuf::from("out"));
    emit_suite(&[report], &dir, &config.outputs)
}

fn file_stem(name: &str) -> String {
    name.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' {
                c
            } else {
                '_'
            }
        })
        .collect()
}
