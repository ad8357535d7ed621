//! Multi-sensor Earth-Observation data cubes.
//!
//! Landsat-8/9 and Sentinel-2 scenes are reprojected to a common CRS,
//! clipped to an area of interest, resampled onto one grid, extended with 27
//! spectral products and stacked into a `(time, band, y, x)` cube that is
//! written as a NetCDF classic (64-bit offset) file.

pub mod classify;
pub mod cube;
pub mod error;
pub mod geodesy;
pub mod harmonize;
pub mod indices;
pub mod io;
pub mod model;
pub mod netcdf;
pub mod pipeline;

pub use error::{Error, Result};
pub use model::{
    band_id_of, BBox, BandId, GridSpec, HyperCube, Polygon, RadiometricParams, Raster2D, Scene,
    SceneCube, Sensor, SliceProvenance, BAND_COUNT, FILL,
};
