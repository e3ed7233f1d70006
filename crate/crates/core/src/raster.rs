//! Regular grids over the study area and inverse-distance-weighted
//! interpolation of scattered point estimates onto them.

use rayon::prelude::*;

use crate::error::{Error, Result};

/// Geometry of a regular grid: axis-aligned square cells in planar
/// coordinates, rows indexed bottom-up.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    /// Coordinates of the grid's lower-left corner (not a cell center).
    pub origin: (f64, f64),
    /// Side length of each square cell.
    pub cell_size: f64,
    pub ncols: usize,
    pub nrows: usize,
}

impl GridSpec {
    /// Lay a grid over the bounding box `(umin, vmin, umax, vmax)` with
    /// `ncols_requested` cells spanning the box's longer axis, then pad by
    /// one cell on every side so cell centers cover the box with margin.
    ///
    /// # Errors
    ///
    /// [`Error::BadGridSpec`] when the box is non-finite or has zero extent
    /// on both axes, or when `ncols_requested` is zero.
    pub fn from_bbox(bbox: (f64, f64, f64, f64), ncols_requested: usize) -> Result<GridSpec> {
        let (umin, vmin, umax, vmax) = bbox;
        if ![umin, vmin, umax, vmax].iter().all(|x| x.is_finite()) {
            return Err(Error::BadGridSpec("bounding box must be finite".to_string()));
        }
        let span_u = umax - umin;
        let span_v = vmax - vmin;
        if span_u < 0.0 || span_v < 0.0 {
            return Err(Error::BadGridSpec("bounding box min exceeds max".to_string()));
        }
        if ncols_requested == 0 {
            return Err(Error::BadGridSpec("requested column count must be >= 1".to_string()));
        }
        let major = span_u.max(span_v);
        if major <= 0.0 {
            return Err(Error::BadGridSpec(
                "bounding box has zero extent on both axes".to_string(),
            ));
        }
        let cell = major / ncols_requested as f64;
        // A small downward nudge before ceil keeps an exact integer ratio
        // from rounding up to an extra row or column.
        let cells_for = |span: f64| (span / cell - 1e-9).ceil().max(0.0) as usize + 2;
        let spec = GridSpec {
            origin: (umin - cell, vmin - cell),
            cell_size: cell,
            ncols: cells_for(span_u),
            nrows: cells_for(span_v),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// # Errors
    ///
    /// [`Error::BadGridSpec`] for a non-positive or non-finite cell size,
    /// zero rows or columns, or a non-finite origin.
    pub fn validate(&self) -> Result<()> {
        if !(self.cell_size > 0.0 && self.cell_size.is_finite()) {
            return Err(Error::BadGridSpec(format!(
                "cell size must be positive and finite, got {}",
                self.cell_size
            )));
        }
        if self.ncols == 0 || self.nrows == 0 {
            return Err(Error::BadGridSpec("grid must have at least one cell".to_string()));
        }
        if !(self.origin.0.is_finite() && self.origin.1.is_finite()) {
            return Err(Error::BadGridSpec("grid origin must be finite".to_string()));
        }
        Ok(())
    }

    pub fn n_cells(&self) -> usize {
        self.ncols * self.nrows
    }

    /// Center of the cell at (`row`, `col`); row 0 is the bottom row.
    pub fn cell_center(&self, row: usize, col: usize) -> (f64, f64) {
        (
            self.origin.0 + (col as f64 + 0.5) * self.cell_size,
            self.origin.1 + (row as f64 + 0.5) * self.cell_size,
        )
    }
}

/// A grid plus one real-or-missing value per cell, row-major with row 0 at
/// the bottom.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    pub grid: GridSpec,
    /// `values[row * ncols + col]`; `None` marks a masked cell.
    pub values: Vec<Option<f64>>,
}

impl Raster {
    /// # Errors
    ///
    /// [`Error::BadGridSpec`] when the grid is invalid or the value count
    /// does not equal `ncols * nrows`.
    pub fn new(grid: GridSpec, values: Vec<Option<f64>>) -> Result<Raster> {
        grid.validate()?;
        if values.len() != grid.n_cells() {
            return Err(Error::BadGridSpec(format!(
                "{} values cannot fill a {} x {} grid",
                values.len(),
                grid.nrows,
                grid.ncols
            )));
        }
        Ok(Raster { grid, values })
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.grid.ncols + col
    }

    pub fn value(&self, row: usize, col: usize) -> Option<f64> {
        self.values[self.index(row, col)]
    }

    /// Minimum and maximum over unmasked cells; `None` when all are masked.
    pub fn min_max(&self) -> Option<(f64, f64)> {
        let mut out: Option<(f64, f64)> = None;
        for v in self.values.iter().flatten() {
            out = Some(match out {
                None => (*v, *v),
                Some((lo, hi)) => (lo.min(*v), hi.max(*v)),
            });
        }
        out
    }
}

/// Interpolate scattered `(u, v, value)` samples onto `grid` by inverse
/// distance weighting over the `k_neighbors` nearest samples,
/// `w_i = d_i^(-power)`. A cell center within 1e-9 of a sample takes that
/// sample's value exactly (first such sample by index); `k_neighbors` is
/// clamped to the sample count. Cells are evaluated independently (in
/// parallel) and the output is identical under any thread count.
///
/// Every interpolated value is a convex combination of sample values, so
/// the output never leaves the samples' value range.
///
/// # Errors
///
/// [`Error::EmptySamples`] with no samples; [`Error::BadGridSpec`] for an
/// invalid grid, non-finite samples, `power <= 0`, or `k_neighbors == 0`.
pub fn idw_interpolate(
    samples: &[(f64, f64, f64)],
    grid: &GridSpec,
    power: f64,
    k_neighbors: usize,
) -> Result<Raster> {
    if samples.is_empty() {
        return Err(Error::EmptySamples);
    }
    grid.validate()?;
    if !(power > 0.0 && power.is_finite()) {
        return Err(Error::BadGridSpec(format!("power must be positive and finite, got {power}")));
    }
    if k_neighbors == 0 {
        return Err(Error::BadGridSpec("k_neighbors must be >= 1".to_string()));
    }
    if samples.iter().any(|(u, v, z)| !(u.is_finite() && v.is_finite() && z.is_finite())) {
        return Err(Error::BadGridSpec("samples must be finite".to_string()));
    }

    let k = k_neighbors.min(samples.len());
    let values: Vec<Option<f64>> = (0..grid.n_cells())
        .into_par_iter()
        .map(|idx| {
            let row = idx / grid.ncols;
            let col = idx % grid.ncols;
            let (cu, cv) = grid.cell_center(row, col);
            let mut dist: Vec<(f64, usize)> = samples
                .iter()
                .enumerate()
                .map(|(i, (u, v, _))| ((cu - u).hypot(cv - v), i))
                .collect();
            dist.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            // Coincident cells and single-neighbor averages are exact
            // assignments; skipping the weight arithmetic avoids smearing
            // them by a rounding step.
            if dist[0].0 < 1e-9 || k == 1 {
                return Some(samples[dist[0].1].2);
            }
            let mut num = 0.0;
            let mut den = 0.0;
            for &(d, i) in dist.iter().take(k) {
                let w = d.powf(-power);
                num += w * samples[i].2;
                den += w;
            }
            Some(num / den)
        })
        .collect();

    Raster::new(grid.clone(), values)
}
