use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const MILES_PER_DEGREE_LAT: f64 = 69.0;

/// Square grid of `2^(id_bits/2)` cells per side anchored at its south-west corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub origin_lat: f64,
    pub origin_lon: f64,
    pub cell_miles: f64,
    pub id_bits: u32,
}

impl GridSpec {
    pub fn new(origin_lat: f64, origin_lon: f64, cell_miles: f64, id_bits: u32) -> Result<Self> {
        let grid = GridSpec { origin_lat, origin_lon, cell_miles, id_bits };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cell_miles.is_nan() || self.cell_miles <= 0.0 {
            return Err(Error::InvalidParams(format!("cell_miles must be positive, got {}", self.cell_miles)));
        }
        if self.id_bits == 0 || !self.id_bits.is_multiple_of(2) || self.id_bits > 32 {
            return Err(Error::InvalidParams(format!("id_bits must be even and in [2, 32], got {}", self.id_bits)));
        }
        Ok(())
    }

    /// Cells per side.
    pub fn side(&self) -> u64 {
        1 << (self.id_bits / 2)
    }

    fn miles_per_degree_lon(&self) -> f64 {
        MILES_PER_DEGREE_LAT * self.origin_lat.to_radians().cos()
    }

    /// South-west corner of cell `(row, col)`, handy for building test points.
    pub fn cell_corner(&self, row: u64, col: u64) -> (f64, f64) {
        let lat = self.origin_lat + row as f64 * self.cell_miles / MILES_PER_DEGREE_LAT;
        let lon = self.origin_lon + col as f64 * self.cell_miles / self.miles_per_degree_lon();
        (lat, lon)
    }
}

/// Row-major cell index with rows counted from the grid origin.
pub fn row_major_index(row: u64, col: u64, width: u64) -> u64 {
    row * width + col
}

/// Maps a coordinate to its 0-based row-major location ID.
///
/// Distances use an equirectangular projection about the origin latitude,
/// which is accurate to well under a cell at city scale.
pub fn discretize(lat: f64, lon: f64, grid: &GridSpec) -> Result<u64> {
    grid.validate()?;
    let north = (lat - grid.origin_lat) * MILES_PER_DEGREE_LAT;
    let east = (lon - grid.origin_lon) * grid.miles_per_degree_lon();
    let row = (north / grid.cell_miles).floor();
    let col = (east / grid.cell_miles).floor();
    let side = grid.side() as f64;
    if !(0.0..side).contains(&row) || !(0.0..side).contains(&col) {
        return Err(Error::OutOfGrid { lat, lon });
    }
    Ok(row_major_index(row as u64, col as u64, grid.side()))
}
