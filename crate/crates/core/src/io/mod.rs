//! Input formats: GeoTIFF band rasters, Shapefile AOI polygons, scene metadata.

pub mod geotiff;
pub mod metadata;
pub mod shapefile;

pub use geotiff::{read_geotiff, write_geotiff, GeoTiffInfo, GeoTiffWriteOptions};
pub use metadata::read_metadata;
pub use shapefile::read_shapefile_polygons;
