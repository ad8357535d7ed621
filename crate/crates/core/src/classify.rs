//! Thematic classes for NDWI, WRI-2 and OSI rasters.
//!
//! Intervals are half-open `[lo, hi)` except the last, which also takes its
//! upper bound. Code 0 marks values outside every interval.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{is_fill, BandId, Raster2D, Sensor, FILL};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SensorScope {
    All,
    Landsat,
    Sentinel2,
}

/// One class; `None` bounds are unbounded.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassInterval {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub label: String,
    pub code: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassScheme {
    pub index: BandId,
    pub scope: SensorScope,
    pub classes: Vec<ClassInterval>,
}

impl ClassScheme {
    pub fn new(index: BandId, scope: SensorScope, classes: Vec<ClassInterval>) -> Result<Self> {
        for w in classes.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            match (a.hi, b.lo) {
                (Some(hi), Some(lo)) if hi <= lo => {}
                _ => return Err(Error::Invalid(format!("classes {:?} and {:?} overlap", a.label, b.label))),
            }
        }
        for (k, c) in classes.iter().enumerate() {
            if let (Some(lo), Some(hi)) = (c.lo, c.hi) {
                if lo >= hi {
                    return Err(Error::Invalid(format!("class {:?} is empty", c.label)));
                }
            }
            if c.code == 0 || classes[..k].iter().any(|o| o.label == c.label || o.code == c.code) {
                return Err(Error::Invalid(format!("class {:?} has a duplicate label or code", c.label)));
            }
        }
        Ok(ClassScheme { index, scope, classes })
    }

    /// Maps codes `1..=max_code` onto themselves; used to check that
    /// classifying a class raster again changes nothing.
    pub fn pass_through(index: BandId, max_code: u8) -> Self {
        let classes = (1..=max_code)
            .map(|k| ClassInterval {
                lo: Some(k as f64),
                hi: Some(k as f64 + 1.0),
                label: format!("class {k}"),
                code: k,
            })
            .collect();
        ClassScheme {
            index,
            scope: SensorScope::All,
            classes,
        }
    }

    /// Class code of a single value, 0 when unclassified.
    pub fn code_of(&self, v: f64) -> u8 {
        let last = self.classes.len().saturating_sub(1);
        self.classes
            .iter()
            .enumerate()
            .find(|(k, c)| {
                c.lo.is_none_or(|lo| v >= lo)
                    && c.hi.is_none_or(|hi| v < hi || (*k == last && v == hi))
            })
            .map_or(0, |(_, c)| c.code)
    }

    /// Like [`code_of`](Self::code_of) for single-precision pixels: the
    /// bounds are rounded to `f32` first, so a pixel holding `-0.3f32` sits
    /// on the `-0.3` boundary rather than just below it.
    pub fn code_of_f32(&self, v: f32) -> u8 {
        let last = self.classes.len().saturating_sub(1);
        self.classes
            .iter()
            .enumerate()
            .find(|(k, c)| {
                c.lo.is_none_or(|lo| v >= lo as f32)
                    && c.hi.is_none_or(|hi| v < hi as f32 || (*k == last && v == hi as f32))
            })
            .map_or(0, |(_, c)| c.code)
    }

    pub fn label_of(&self, code: u8) -> Option<&str> {
        self.classes.iter().find(|c| c.code == code).map(|c| c.label.as_str())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scheme serializes")
    }
}

/// Classifies `raster`, which must hold product `band`. Fill stays fill.
pub fn classify(raster: &Raster2D, band: BandId, scheme: &ClassScheme) -> Result<Raster2D> {
    if band != scheme.index {
        return Err(Error::SchemeMismatch {
            expected: scheme.index.name().to_string(),
            found: band.name().to_string(),
        });
    }
    let values = raster
        .values()
        .mapv(|v| if is_fill(v) { FILL } else { scheme.code_of_f32(v) as f32 });
    Ok(Raster2D::new(*raster.grid(), values).expect("codes are finite"))
}

fn class(lo: Option<f64>, hi: Option<f64>, label: &str, code: u8) -> ClassInterval {
    ClassInterval {
        lo,
        hi,
        label: label.to_string(),
        code,
    }
}

/// Built-in scheme for NDWI, WRI-2 or OSI. OSI ranges differ by sensor.
pub fn scheme_for(index: BandId, sensor: Sensor) -> Result<ClassScheme> {
    let scheme = match index {
        BandId::NDWI => ClassScheme::new(
            index,
            SensorScope::All,
            vec![
                class(Some(-1.0), Some(-0.3), "Drought, Non-Aqueous Surfaces", 1),
                class(Some(-0.3), Some(0.0), "Moderate drought, non-aqueous surfaces", 2),
                class(Some(0.0), Some(0.2), "Flooding, humidity", 3),
                class(Some(0.2), Some(1.0), "Water Surface", 4),
            ],
        ),
        BandId::WRI2 => ClassScheme::new(
            index,
            SensorScope::All,
            vec![
                class(Some(-1.0), Some(-0.75), "Critical water areas", 1),
                class(Some(-0.75), Some(-0.25), "Normal water quality", 2),
                class(Some(-0.25), Some(0.0), "Wet ground / Vegetation", 3),
                class(Some(0.0), Some(1.0), "Ground / Infrastructures", 4),
            ],
        ),
        BandId::OSI if sensor.is_landsat() => ClassScheme::new(
            index,
            SensorScope::Landsat,
            vec![
                class(None, Some(1.9), "building/infrastructures", 1),
                class(Some(1.9), Some(2.5), "vegetation regions", 2),
                class(Some(2.5), None, "water bodies", 3),
            ],
        ),
        BandId::OSI => ClassScheme::new(
            index,
            SensorScope::Sentinel2,
            vec![
                class(Some(0.75), Some(1.0), "vegetation regions", 1),
                class(Some(1.0), Some(1.9), "building/infrastructures", 2),
                class(Some(1.9), Some(2.5), "water bodies, blue-radiant", 3),
                class(Some(2.5), None, "water bodies, blue-absorbing", 4),
            ],
        ),
        other => return Err(Error::NoScheme(other.name().to_string())),
    };
    Ok(scheme.expect("built-in schemes are well formed"))
}
