use chrono::{DateTime, Utc};
use ndarray::{s, Array3, Array4, ArrayView2, ArrayView3};
use serde::{Deserialize, Serialize};

use super::band::{BandId, Sensor, BAND_COUNT};
use super::grid::GridSpec;
use super::raster::{is_fill, Raster2D};
use crate::error::{Error, Result};

/// Single-scene cube: 43 planes on one grid, indexed `(band, y, x)`.
#[derive(Debug, Clone)]
pub struct SceneCube {
    pub grid: GridSpec,
    pub time: DateTime<Utc>,
    pub sensor: Sensor,
    pub scene_id: String,
    bands: Array3<f32>,
}

impl SceneCube {
    /// An all-fill cube.
    pub fn empty(grid: GridSpec, time: DateTime<Utc>, sensor: Sensor, scene_id: impl Into<String>) -> Self {
        SceneCube {
            grid,
            time,
            sensor,
            scene_id: scene_id.into(),
            bands: Array3::from_elem((BAND_COUNT, grid.height, grid.width), f32::NAN),
        }
    }

    pub fn from_array(
        grid: GridSpec,
        time: DateTime<Utc>,
        sensor: Sensor,
        scene_id: impl Into<String>,
        bands: Array3<f32>,
    ) -> Result<Self> {
        if bands.dim() != (BAND_COUNT, grid.height, grid.width) {
            return Err(Error::Invalid(format!(
                "scene cube must be ({BAND_COUNT}, {}, {}), got {:?}",
                grid.height,
                grid.width,
                bands.dim()
            )));
        }
        Ok(SceneCube {
            grid,
            time,
            sensor,
            scene_id: scene_id.into(),
            bands,
        })
    }

    pub fn plane(&self, band: BandId) -> ArrayView2<'_, f32> {
        self.bands.slice(s![band.index(), .., ..])
    }

    pub fn raster(&self, band: BandId) -> Raster2D {
        Raster2D::from_parts(self.grid, self.plane(band).to_owned())
    }

    /// Replaces a plane; the raster must sit on the cube grid.
    pub fn set_plane(&mut self, band: BandId, raster: &Raster2D) -> Result<()> {
        if raster.grid() != &self.grid {
            return Err(Error::GridMismatch {
                scene: format!("{} ({})", self.scene_id, band.name()),
            });
        }
        self.bands
            .slice_mut(s![band.index(), .., ..])
            .assign(raster.values());
        Ok(())
    }

    pub fn clear_plane(&mut self, band: BandId) {
        self.bands.slice_mut(s![band.index(), .., ..]).fill(f32::NAN);
    }

    pub fn is_plane_all_fill(&self, band: BandId) -> bool {
        self.plane(band).iter().all(|v| is_fill(*v))
    }

    pub fn bands(&self) -> ArrayView3<'_, f32> {
        self.bands.view()
    }

    pub fn into_bands(self) -> Array3<f32> {
        self.bands
    }
}

/// Origin of one time slice.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceProvenance {
    pub sensor: Sensor,
    pub scene_id: String,
}

/// Time-stacked cube indexed `(time, band, y, x)`.
#[derive(Debug, Clone)]
pub struct HyperCube {
    grid: GridSpec,
    times: Vec<DateTime<Utc>>,
    data: Array4<f32>,
    provenance: Vec<SliceProvenance>,
}

impl HyperCube {
    pub fn new(
        grid: GridSpec,
        times: Vec<DateTime<Utc>>,
        data: Array4<f32>,
        provenance: Vec<SliceProvenance>,
    ) -> Result<Self> {
        grid.validate()?;
        if times.is_empty() {
            return Err(Error::Invalid("a cube needs at least one time slice".into()));
        }
        if let Some(w) = times.windows(2).find(|w| w[0] >= w[1]) {
            return Err(if w[0] == w[1] {
                Error::DuplicateTimestamp(w[0].to_rfc3339())
            } else {
                Error::Invalid("time axis must be strictly increasing".into())
            });
        }
        let expected = (times.len(), BAND_COUNT, grid.height, grid.width);
        if data.dim() != expected {
            return Err(Error::Invalid(format!(
                "cube data is {:?}, expected {expected:?}",
                data.dim()
            )));
        }
        if provenance.len() != times.len() {
            return Err(Error::Invalid("one provenance record per slice is required".into()));
        }
        Ok(HyperCube {
            grid,
            times,
            data,
            provenance,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn times(&self) -> &[DateTime<Utc>] {
        &self.times
    }

    pub fn provenance(&self) -> &[SliceProvenance] {
        &self.provenance
    }

    pub fn data(&self) -> &Array4<f32> {
        &self.data
    }

    pub(crate) fn data_mut(&mut self) -> &mut Array4<f32> {
        &mut self.data
    }

    pub fn len_time(&self) -> usize {
        self.times.len()
    }

    /// `(T, 43, H, W)`.
    pub fn shape(&self) -> (usize, usize, usize, usize) {
        self.data.dim()
    }

    pub fn plane(&self, t: usize, band: BandId) -> ArrayView2<'_, f32> {
        self.data.slice(s![t, band.index(), .., ..])
    }

    pub fn raster(&self, t: usize, band: BandId) -> Raster2D {
        Raster2D::from_parts(self.grid, self.plane(t, band).to_owned())
    }

    pub fn fill_fraction(&self, t: usize, band: BandId) -> f64 {
        let plane = self.plane(t, band);
        plane.iter().filter(|v| is_fill(**v)).count() as f64 / plane.len() as f64
    }

    /// Bitwise equality of values plus exact equality of coordinates and metadata.
    pub fn bit_eq(&self, other: &HyperCube) -> bool {
        self.grid == other.grid
            && self.times == other.times
            && self.provenance == other.provenance
            && self.data.dim() == other.data.dim()
            && self
                .data
                .iter()
                .zip(other.data.iter())
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}
