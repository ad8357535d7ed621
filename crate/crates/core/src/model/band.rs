//! The 43-entry band catalogue and the per-sensor native band tables.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of planes on the band axis of every cube.
pub const BAND_COUNT: usize = 43;

/// Catalogue identifier in `1..=43`. IDs 1-16 are sensor bands, 17-43 are
/// computed products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct BandId(u8);

struct Entry {
    name: &'static str,
    aliases: &'static [&'static str],
}

const fn entry(name: &'static str) -> Entry {
    Entry { name, aliases: &[] }
}

// Aliases keep the spellings found in published band tables loadable.
static CATALOGUE: [Entry; BAND_COUNT] = [
    entry("COASTAL AEROSOL"),
    entry("BLUE"),
    entry("GREEN"),
    entry("RED"),
    entry("NIR"),
    entry("SWIR-1"),
    entry("SWIR-2"),
    entry("CIRRUS"),
    entry("VRE-1"),
    entry("VRE-2"),
    entry("VRE-3"),
    entry("VRE-4"),
    Entry {
        name: "WATER VAPOUR",
        aliases: &["WATER VAROUR", "WATER VAPOR"],
    },
    Entry {
        name: "PANCHROMATIC",
        aliases: &["PANCHROMATICS"],
    },
    entry("TIRS-1"),
    entry("TIRS-2"),
    entry("NDVI"),
    entry("NDWI"),
    entry("NDVI (VRE-1)"),
    entry("NDVI (VRE-2)"),
    entry("NDVI (VRE-3)"),
    entry("NDVI (VRE-4)"),
    entry("LSWI-1"),
    entry("LSWI-2"),
    entry("ARVI"),
    entry("MSAVI2"),
    entry("MTVI2"),
    entry("VARI"),
    entry("TGI"),
    entry("LST-1"),
    entry("LST-2"),
    entry("LST-CELSIUS"),
    Entry {
        name: "LST-FAHRENHEIT",
        aliases: &["LST-FHRENHEIT"],
    },
    entry("VCI"),
    entry("MNDWI-1"),
    Entry {
        name: "MNDWI-2",
        aliases: &["MNDW-2"],
    },
    entry("WRI-1"),
    entry("WRI-2"),
    entry("NDTI"),
    entry("AWEI"),
    entry("OSI"),
    entry("NBR-1"),
    entry("NBR-2"),
];

impl BandId {
    pub const COASTAL_AEROSOL: BandId = BandId(1);
    pub const BLUE: BandId = BandId(2);
    pub const GREEN: BandId = BandId(3);
    pub const RED: BandId = BandId(4);
    pub const NIR: BandId = BandId(5);
    pub const SWIR1: BandId = BandId(6);
    pub const SWIR2: BandId = BandId(7);
    pub const CIRRUS: BandId = BandId(8);
    pub const VRE1: BandId = BandId(9);
    pub const VRE2: BandId = BandId(10);
    pub const VRE3: BandId = BandId(11);
    pub const VRE4: BandId = BandId(12);
    pub const WATER_VAPOUR: BandId = BandId(13);
    pub const PANCHROMATIC: BandId = BandId(14);
    pub const TIRS1: BandId = BandId(15);
    pub const TIRS2: BandId = BandId(16);
    pub const NDVI: BandId = BandId(17);
    pub const NDWI: BandId = BandId(18);
    pub const NDVI_VRE1: BandId = BandId(19);
    pub const NDVI_VRE2: BandId = BandId(20);
    pub const NDVI_VRE3: BandId = BandId(21);
    pub const NDVI_VRE4: BandId = BandId(22);
    pub const LSWI1: BandId = BandId(23);
    pub const LSWI2: BandId = BandId(24);
    pub const ARVI: BandId = BandId(25);
    pub const MSAVI2: BandId = BandId(26);
    pub const MTVI2: BandId = BandId(27);
    pub const VARI: BandId = BandId(28);
    pub const TGI: BandId = BandId(29);
    pub const LST1: BandId = BandId(30);
    pub const LST2: BandId = BandId(31);
    pub const LST_CELSIUS: BandId = BandId(32);
    pub const LST_FAHRENHEIT: BandId = BandId(33);
    pub const VCI: BandId = BandId(34);
    pub const MNDWI1: BandId = BandId(35);
    pub const MNDWI2: BandId = BandId(36);
    pub const WRI1: BandId = BandId(37);
    pub const WRI2: BandId = BandId(38);
    pub const NDTI: BandId = BandId(39);
    pub const AWEI: BandId = BandId(40);
    pub const OSI: BandId = BandId(41);
    pub const NBR1: BandId = BandId(42);
    pub const NBR2: BandId = BandId(43);

    pub fn new(id: u8) -> Result<Self> {
        if (1..=BAND_COUNT as u8).contains(&id) {
            Ok(BandId(id))
        } else {
            Err(Error::UnknownBand(id.to_string()))
        }
    }

    pub fn get(self) -> u8 {
        self.0
    }

    /// Position on the band axis (0-based).
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn from_index(index: usize) -> Self {
        assert!(index < BAND_COUNT, "band index {index} out of range");
        BandId(index as u8 + 1)
    }

    pub fn name(self) -> &'static str {
        CATALOGUE[self.index()].name
    }

    pub fn is_sensor_band(self) -> bool {
        self.0 <= 16
    }

    pub fn is_product(self) -> bool {
        self.0 > 16
    }

    pub fn all() -> impl Iterator<Item = BandId> {
        (1..=BAND_COUNT as u8).map(BandId)
    }

    pub fn products() -> impl Iterator<Item = BandId> {
        (17..=BAND_COUNT as u8).map(BandId)
    }
}

impl TryFrom<u8> for BandId {
    type Error = Error;

    fn try_from(id: u8) -> Result<Self> {
        BandId::new(id)
    }
}

impl From<BandId> for u8 {
    fn from(b: BandId) -> u8 {
        b.0
    }
}

impl fmt::Display for BandId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} ({})", self.name(), self.0)
    }
}

impl std::str::FromStr for BandId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        band_id_of(s)
    }
}

fn normalize(label: &str) -> String {
    label
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
        .to_ascii_uppercase()
}

/// Looks up a catalogue entry by label, case-insensitively.
pub fn band_id_of(name: &str) -> Result<BandId> {
    let wanted = normalize(name);
    CATALOGUE
        .iter()
        .position(|e| e.name == wanted || e.aliases.contains(&wanted.as_str()))
        .map(BandId::from_index)
        .ok_or_else(|| Error::UnknownBand(name.to_string()))
}

/// Supported acquisition platforms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Sensor {
    Landsat8,
    Landsat9,
    Sentinel2,
}

const SENTINEL2_BANDS: &[(&str, BandId)] = &[
    ("B01", BandId::COASTAL_AEROSOL),
    ("B02", BandId::BLUE),
    ("B03", BandId::GREEN),
    ("B04", BandId::RED),
    ("B05", BandId::VRE1),
    ("B06", BandId::VRE2),
    ("B07", BandId::VRE3),
    ("B08", BandId::NIR),
    ("B8A", BandId::VRE4),
    ("B09", BandId::WATER_VAPOUR),
    ("B10", BandId::CIRRUS),
    ("B11", BandId::SWIR1),
    ("B12", BandId::SWIR2),
];

const LANDSAT_BANDS: &[(&str, BandId)] = &[
    ("B1", BandId::COASTAL_AEROSOL),
    ("B2", BandId::BLUE),
    ("B3", BandId::GREEN),
    ("B4", BandId::RED),
    ("B5", BandId::NIR),
    ("B6", BandId::SWIR1),
    ("B7", BandId::SWIR2),
    ("B8", BandId::PANCHROMATIC),
    ("B9", BandId::CIRRUS),
    ("B10", BandId::TIRS1),
    ("B11", BandId::TIRS2),
];

impl Sensor {
    /// Native band label to catalogue entry. Fixed per sensor.
    pub fn band_mapping(self) -> &'static [(&'static str, BandId)] {
        match self {
            Sensor::Sentinel2 => SENTINEL2_BANDS,
            Sensor::Landsat8 | Sensor::Landsat9 => LANDSAT_BANDS,
        }
    }

    pub fn band_for(self, label: &str) -> Option<BandId> {
        let label = label.trim().to_ascii_uppercase();
        self.band_mapping()
            .iter()
            .find(|(l, _)| *l == label)
            .map(|&(_, b)| b)
    }

    /// Catalogue bands this sensor can populate.
    pub fn provides(self, band: BandId) -> bool {
        self.band_mapping().iter().any(|&(_, b)| b == band)
    }

    pub fn is_landsat(self) -> bool {
        matches!(self, Sensor::Landsat8 | Sensor::Landsat9)
    }

    pub fn name(self) -> &'static str {
        match self {
            Sensor::Landsat8 => "Landsat8",
            Sensor::Landsat9 => "Landsat9",
            Sensor::Sentinel2 => "Sentinel2",
        }
    }
}

impl fmt::Display for Sensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Sensor {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "landsat8" | "l8" => Ok(Sensor::Landsat8),
            "landsat9" | "l9" => Ok(Sensor::Landsat9),
            "sentinel2" | "s2" => Ok(Sensor::Sentinel2),
            _ => Err(Error::Invalid(format!("unknown sensor {s:?}"))),
        }
    }
}
