//! Shared domain types: band catalogue, grids, rasters, scenes and cubes.

mod band;
mod cube;
mod grid;
mod raster;
mod scene;

pub use band::{band_id_of, BandId, Sensor, BAND_COUNT};
pub use cube::{HyperCube, SceneCube, SliceProvenance};
pub use grid::{BBox, GridSpec, Polygon};
pub use raster::{is_fill, Raster2D, FILL};
pub use scene::{RadiometricParams, Scene, ThermalBand, ThermalParams};

/// Native label to catalogue band for a sensor.
pub fn sensor_band_mapping(sensor: Sensor) -> std::collections::BTreeMap<&'static str, BandId> {
    sensor.band_mapping().iter().copied().collect()
}
