//! Minimal EPSG registry (WGS-84 geographic and UTM zones) and point
//! transforms between its members.

mod tm;

pub use tm::{TransverseMercator, MAX_LATITUDE, MAX_LON_OFFSET};

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ellipsoid {
    /// Semi-major axis, metres.
    pub a: f64,
    /// Flattening.
    pub f: f64,
}

pub const WGS84: Ellipsoid = Ellipsoid {
    a: 6_378_137.0,
    f: 1.0 / 298.257_223_563,
};

pub const EPSG_WGS84: u32 = 4326;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TmParams {
    /// Central meridian, degrees.
    pub lon0: f64,
    pub k0: f64,
    pub false_easting: f64,
    pub false_northing: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum CrsKind {
    Geographic,
    TransverseMercator(TmParams),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CrsDef {
    pub epsg: u32,
    pub kind: CrsKind,
    pub ellipsoid: Ellipsoid,
}

impl CrsDef {
    pub fn is_geographic(&self) -> bool {
        matches!(self.kind, CrsKind::Geographic)
    }

    pub fn tm_params(&self) -> Option<&TmParams> {
        match &self.kind {
            CrsKind::TransverseMercator(p) => Some(p),
            CrsKind::Geographic => None,
        }
    }

    /// UTM zone number and hemisphere (`true` = north), if this is a UTM CRS.
    pub fn utm_zone(&self) -> Option<(u32, bool)> {
        match self.epsg {
            32601..=32660 => Some((self.epsg - 32600, true)),
            32701..=32760 => Some((self.epsg - 32700, false)),
            _ => None,
        }
    }

    pub fn projection(&self) -> Option<TransverseMercator> {
        self.tm_params()
            .map(|p| TransverseMercator::new(self.ellipsoid, p.lon0, p.k0, p.false_easting, p.false_northing))
    }

    /// Linear unit name as used in CF metadata.
    pub fn units(&self) -> &'static str {
        if self.is_geographic() {
            "degrees"
        } else {
            "m"
        }
    }
}

/// Looks up a supported EPSG code.
pub fn epsg_lookup(code: u32) -> Result<CrsDef> {
    let (zone, north) = match code {
        EPSG_WGS84 => {
            return Ok(CrsDef {
                epsg: code,
                kind: CrsKind::Geographic,
                ellipsoid: WGS84,
            })
        }
        32601..=32660 => (code - 32600, true),
        32701..=32760 => (code - 32700, false),
        _ => return Err(Error::UnsupportedCrs(code)),
    };
    Ok(CrsDef {
        epsg: code,
        kind: CrsKind::TransverseMercator(TmParams {
            lon0: -183.0 + 6.0 * zone as f64,
            k0: 0.9996,
            false_easting: 500_000.0,
            false_northing: if north { 0.0 } else { 10_000_000.0 },
        }),
        ellipsoid: WGS84,
    })
}

fn tm_of(crs: &CrsDef) -> Result<TransverseMercator> {
    crs.projection()
        .ok_or_else(|| Error::Invalid(format!("EPSG:{} is not a transverse Mercator CRS", crs.epsg)))
}

/// Projects geographic degrees onto a TM CRS.
pub fn tm_forward(lat: f64, lon: f64, crs: &CrsDef) -> Result<(f64, f64)> {
    tm_of(crs)?.forward(lat, lon)
}

/// Unprojects TM metres to geographic degrees `(lat, lon)`.
pub fn tm_inverse(easting: f64, northing: f64, crs: &CrsDef) -> Result<(f64, f64)> {
    tm_of(crs)?.inverse(easting, northing)
}

enum Leg {
    Geographic,
    Tm(TransverseMercator),
}

impl Leg {
    fn new(crs: &CrsDef) -> Self {
        match crs.projection() {
            Some(tm) => Leg::Tm(tm),
            None => Leg::Geographic,
        }
    }
}

/// Reusable transform between two supported CRS. Geographic coordinates are
/// ordered `(lon, lat)` like any other `(x, y)` pair.
pub struct CrsTransform {
    identity: bool,
    src: Leg,
    dst: Leg,
}

impl CrsTransform {
    pub fn new(src_epsg: u32, dst_epsg: u32) -> Result<Self> {
        let src = epsg_lookup(src_epsg)?;
        let dst = epsg_lookup(dst_epsg)?;
        Ok(CrsTransform {
            identity: src_epsg == dst_epsg,
            src: Leg::new(&src),
            dst: Leg::new(&dst),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.identity
    }

    pub fn apply(&self, x: f64, y: f64) -> Result<(f64, f64)> {
        if self.identity {
            return Ok((x, y));
        }
        let (lat, lon) = match &self.src {
            Leg::Geographic => (y, x),
            Leg::Tm(tm) => tm.inverse(x, y)?,
        };
        match &self.dst {
            Leg::Geographic => Ok((lon, lat)),
            Leg::Tm(tm) => tm.forward(lat, lon),
        }
    }
}

/// Batch transform. `src == dst` returns the points unchanged.
pub fn transform_points(points: &[(f64, f64)], src_epsg: u32, dst_epsg: u32) -> Result<Vec<(f64, f64)>> {
    let t = CrsTransform::new(src_epsg, dst_epsg)?;
    points.iter().map(|&(x, y)| t.apply(x, y)).collect()
}
