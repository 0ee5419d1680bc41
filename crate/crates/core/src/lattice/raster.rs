//! CSV raster ingestion.
//!
//! Files carry a header of `x,y,value` (numeric rasters) or `x,y,class`
//! (texture rasters) with 0-based cell indices. Every cell must appear exactly once.

use std::path::Path;

use serde::Deserialize;

use super::{GridSpec, Layer, TextureClass, TextureClassMap};
use crate::error::{Error, Result};

#[derive(Deserialize)]
struct ValueRow {
    x: usize,
    y: usize,
    value: f64,
}

#[derive(Deserialize)]
struct ClassRow {
    x: usize,
    y: usize,
    class: String,
}

fn fill<T: Clone>(
    grid: GridSpec,
    path: &Path,
    rows: impl Iterator<Item = Result<(usize, usize, T)>>,
) -> Result<Vec<T>> {
    let mut cells: Vec<Option<T>> = vec![None; grid.len()];
    for row in rows {
        let (x, y, v) = row?;
        if x >= grid.nx || y >= grid.ny {
            return Err(Error::OutOfRange(format!(
                "{}: cell ({x}, {y}) outside {}x{} grid",
                path.display(),
                grid.nx,
                grid.ny
            )));
        }
        let slot = &mut cells[grid.index(x, y)];
        if slot.is_some() {
            return Err(Error::Duplicate(format!("{}: cell ({x}, {y})", path.display())));
        }
        *slot = Some(v);
    }
    cells
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            v.ok_or_else(|| {
                let (x, y) = grid.coords(i);
                Error::OutOfRange(format!("{}: cell ({x}, {y}) missing", path.display()))
            })
        })
        .collect()
}

pub fn read_value_raster(path: &Path, grid: GridSpec) -> Result<Layer> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let rows = reader.deserialize::<ValueRow>().map(|r| {
        let r = r.map_err(csv_err)?;
        if !r.value.is_finite() {
            return Err(Error::OutOfRange(format!(
                "{}: non-finite value at ({}, {})",
                path.display(),
                r.x,
                r.y
            )));
        }
        Ok((r.x, r.y, r.value))
    });
    let values = fill(grid, path, rows)?;
    Layer::from_values(grid, values)
}

pub fn read_class_raster(path: &Path, grid: GridSpec) -> Result<TextureClassMap> {
    let csv_err = |source| Error::Csv {
        path: path.to_path_buf(),
        source,
    };
    let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
    let rows = reader.deserialize::<ClassRow>().map(|r| {
        let r = r.map_err(csv_err)?;
        let class = TextureClass::parse(&r.class).ok_or_else(|| {
            Error::OutOfRange(format!("{}: unknown texture class `{}`", path.display(), r.class))
        })?;
        Ok((r.x, r.y, class))
    });
    let classes = fill(grid, path, rows)?;
    TextureClassMap::new(grid, classes)
}
