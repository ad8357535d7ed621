use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::band::Sensor;
use super::raster::Raster2D;
use crate::error::{Error, Result};

/// Calibration constants for one thermal band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThermalBand {
    /// Radiance multiplicative rescaling (ML).
    pub radiance_scale: f64,
    /// Radiance additive rescaling (AL).
    pub radiance_offset: f64,
    pub k1: f64,
    pub k2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThermalParams {
    pub tirs1: ThermalBand,
    pub tirs2: Option<ThermalBand>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadiometricParams {
    pub reflectance_scale: f64,
    pub reflectance_offset: f64,
    /// Present exactly for Landsat scenes.
    pub thermal: Option<ThermalParams>,
}

impl RadiometricParams {
    pub fn reflectance(scale: f64, offset: f64) -> Self {
        RadiometricParams {
            reflectance_scale: scale,
            reflectance_offset: offset,
            thermal: None,
        }
    }

    pub fn validate(&self, sensor: Sensor) -> Result<()> {
        if self.reflectance_scale == 0.0 || !self.reflectance_scale.is_finite() {
            return Err(Error::Invalid("reflectance scale must be finite and non-zero".into()));
        }
        if !self.reflectance_offset.is_finite() {
            return Err(Error::Invalid("reflectance offset must be finite".into()));
        }
        match (sensor.is_landsat(), &self.thermal) {
            (true, None) => Err(Error::Invalid(format!(
                "{sensor} scenes require thermal calibration constants"
            ))),
            (false, Some(_)) => Err(Error::Invalid(format!(
                "{sensor} scenes carry no thermal calibration constants"
            ))),
            _ => Ok(()),
        }
    }
}

/// One acquisition with its native bands keyed by upper-case label.
#[derive(Debug, Clone)]
pub struct Scene {
    pub id: String,
    pub sensor: Sensor,
    pub acquired_at: DateTime<Utc>,
    native_bands: BTreeMap<String, Raster2D>,
    pub radiometry: RadiometricParams,
}

impl Scene {
    pub fn new(
        id: impl Into<String>,
        sensor: Sensor,
        acquired_at: DateTime<Utc>,
        radiometry: RadiometricParams,
    ) -> Result<Self> {
        radiometry.validate(sensor)?;
        Ok(Scene {
            id: id.into(),
            sensor,
            acquired_at,
            native_bands: BTreeMap::new(),
            radiometry,
        })
    }

    /// Adds a native band; labels must belong to the sensor's table and be unique.
    pub fn insert_band(&mut self, label: &str, raster: Raster2D) -> Result<()> {
        let key = label.trim().to_ascii_uppercase();
        if self.sensor.band_for(&key).is_none() {
            return Err(Error::UnknownBand(format!("{label} (not a {} band)", self.sensor)));
        }
        if self.native_bands.contains_key(&key) {
            return Err(Error::Invalid(format!("duplicate native band {key}")));
        }
        self.native_bands.insert(key, raster);
        Ok(())
    }

    pub fn with_band(mut self, label: &str, raster: Raster2D) -> Result<Self> {
        self.insert_band(label, raster)?;
        Ok(self)
    }

    pub fn bands(&self) -> &BTreeMap<String, Raster2D> {
        &self.native_bands
    }

    pub fn band(&self, label: &str) -> Option<&Raster2D> {
        self.native_bands.get(&label.trim().to_ascii_uppercase())
    }

    pub(crate) fn replace_bands(&mut self, bands: BTreeMap<String, Raster2D>) {
        self.native_bands = bands;
    }
}
