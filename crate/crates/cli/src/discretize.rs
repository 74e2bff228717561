//! `discretize`: latitude/longitude to a grid cell ID.

use privcount_core::mechanisms::{discretize, GridSpec};

use crate::error::{CliError, CliResult};

pub fn cell_id(lat: f64, lon: f64, grid: &GridSpec) -> CliResult<u64> {
    discretize(lat, lon, grid).map_err(CliError::config)
}

pub fn grid(origin_lat: f64, origin_lon: f64, cell_miles: f64, id_bits: u32) -> CliResult<GridSpec> {
    GridSpec::new(origin_lat, origin_lon, cell_miles, id_bits).map_err(CliError::config)
}
