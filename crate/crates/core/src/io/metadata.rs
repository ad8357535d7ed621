//! Radiometric constants from Landsat MTL text or the JSON sidecar
//! `{scale, offset, K1?, K2?, ML?, AL?}` (band-11 constants as `K1_B11` etc.).

use std::collections::HashMap;
use std::path::Path;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::{RadiometricParams, Sensor, ThermalBand, ThermalParams};

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Sidecar {
    scale: Option<f64>,
    offset: Option<f64>,
    #[serde(rename = "K1")]
    k1: Option<f64>,
    #[serde(rename = "K2")]
    k2: Option<f64>,
    #[serde(rename = "ML")]
    ml: Option<f64>,
    #[serde(rename = "AL")]
    al: Option<f64>,
    #[serde(rename = "K1_B11")]
    k1_b11: Option<f64>,
    #[serde(rename = "K2_B11")]
    k2_b11: Option<f64>,
    #[serde(rename = "ML_B11")]
    ml_b11: Option<f64>,
    #[serde(rename = "AL_B11")]
    al_b11: Option<f64>,
}

fn require(v: Option<f64>, key: &str) -> Result<f64> {
    v.ok_or_else(|| Error::MissingKey(key.to_string()))
}

/// All four constants or none; a partial set names the first missing key.
fn optional_band(values: [(Option<f64>, &str); 4]) -> Result<Option<ThermalBand>> {
    if values.iter().all(|(v, _)| v.is_none()) {
        return Ok(None);
    }
    let [ml, al, k1, k2] = values.map(|(v, k)| require(v, k));
    Ok(Some(ThermalBand {
        radiance_scale: ml?,
        radiance_offset: al?,
        k1: k1?,
        k2: k2?,
    }))
}

fn from_sidecar(s: Sidecar, sensor: Sensor) -> Result<RadiometricParams> {
    let reflectance_scale = require(s.scale, "scale")?;
    let reflectance_offset = require(s.offset, "offset")?;
    let thermal = if sensor.is_landsat() {
        Some(ThermalParams {
            tirs1: ThermalBand {
                radiance_scale: require(s.ml, "ML")?,
                radiance_offset: require(s.al, "AL")?,
                k1: require(s.k1, "K1")?,
                k2: require(s.k2, "K2")?,
            },
            tirs2: optional_band([
                (s.ml_b11, "ML_B11"),
                (s.al_b11, "AL_B11"),
                (s.k1_b11, "K1_B11"),
                (s.k2_b11, "K2_B11"),
            ])?,
        })
    } else {
        None
    };
    let params = RadiometricParams {
        reflectance_scale,
        reflectance_offset,
        thermal,
    };
    params.validate(sensor)?;
    Ok(params)
}

/// Parses `KEY = VALUE` lines; group markers and blank lines are skipped.
fn parse_key_values(text: &str) -> Result<HashMap<String, String>> {
    let mut out = HashMap::new();
    let mut offset = 0u64;
    for line in text.lines() {
        let start = offset;
        offset += line.len() as u64 + 1;
        let line = line.trim();
        if line.is_empty() || line == "END" || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::parse(start, format!("expected KEY = VALUE, found {line:?}")));
        };
        let key = key.trim();
        if key == "GROUP" || key == "END_GROUP" {
            continue;
        }
        out.insert(key.to_string(), value.trim().trim_matches('"').to_string());
    }
    Ok(out)
}

fn from_key_values(kv: &HashMap<String, String>, sensor: Sensor) -> Result<RadiometricParams> {
    let get = |key: &str| -> Result<Option<f64>> {
        kv.get(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Invalid(format!("{key} = {v:?} is not a number")))
            })
            .transpose()
    };
    let params = if sensor.is_landsat() {
        RadiometricParams {
            reflectance_scale: require(get("REFLECTANCE_MULT_BAND_1")?, "REFLECTANCE_MULT_BAND_1")?,
            reflectance_offset: require(get("REFLECTANCE_ADD_BAND_1")?, "REFLECTANCE_ADD_BAND_1")?,
            thermal: Some(ThermalParams {
                tirs1: ThermalBand {
                    radiance_scale: require(get("RADIANCE_MULT_BAND_10")?, "RADIANCE_MULT_BAND_10")?,
                    radiance_offset: require(get("RADIANCE_ADD_BAND_10")?, "RADIANCE_ADD_BAND_10")?,
                    k1: require(get("K1_CONSTANT_BAND_10")?, "K1_CONSTANT_BAND_10")?,
                    k2: require(get("K2_CONSTANT_BAND_10")?, "K2_CONSTANT_BAND_10")?,
                },
                tirs2: optional_band([
                    (get("RADIANCE_MULT_BAND_11")?, "RADIANCE_MULT_BAND_11"),
                    (get("RADIANCE_ADD_BAND_11")?, "RADIANCE_ADD_BAND_11"),
                    (get("K1_CONSTANT_BAND_11")?, "K1_CONSTANT_BAND_11"),
                    (get("K2_CONSTANT_BAND_11")?, "K2_CONSTANT_BAND_11"),
                ])?,
            }),
        }
    } else if let Some(q) = get("QUANTIFICATION_VALUE")? {
        // Sentinel-2 L2A: reflectance = (DN + BOA_ADD_OFFSET) / QUANTIFICATION_VALUE
        let add = get("BOA_ADD_OFFSET")?.unwrap_or(0.0);
        RadiometricParams::reflectance(1.0 / q, add / q)
    } else {
        RadiometricParams::reflectance(
            require(get("REFLECTANCE_SCALE")?, "REFLECTANCE_SCALE")?,
            get("REFLECTANCE_OFFSET")?.unwrap_or(0.0),
        )
    };
    params.validate(sensor)?;
    Ok(params)
}

/// Parses metadata text; a leading `{` selects the JSON sidecar form.
pub fn parse_metadata(text: &str, sensor: Sensor) -> Result<RadiometricParams> {
    if text.trim_start().starts_with('{') {
        let sidecar: Sidecar = serde_json::from_str(text).map_err(|e| Error::Parse {
            offset: 0,
            message: format!("sidecar JSON: {e}"),
        })?;
        from_sidecar(sidecar, sensor)
    } else {
        from_key_values(&parse_key_values(text)?, sensor)
    }
}

pub fn read_metadata(path: impl AsRef<Path>, sensor: Sensor) -> Result<RadiometricParams> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_metadata(&text, sensor)
}
