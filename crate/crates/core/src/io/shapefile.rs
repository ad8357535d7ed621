//! ESRI Shapefile main-file (.shp) reader, polygon records only.
//!
//! The 100-byte header stores the file code and length big-endian and the
//! version and shape type little-endian. Each record carries a big-endian
//! (number, content length in 16-bit words) header followed by
//! little-endian content.

use std::path::Path;

use crate::error::{Error, Result};
use crate::model::Polygon;

const FILE_CODE: i32 = 9994;
const HEADER_LEN: usize = 100;
const SHAPE_NULL: i32 = 0;
const SHAPE_POLYGON: i32 = 5;

struct Cursor<'a> {
    data: &'a [u8],
}

impl Cursor<'_> {
    fn take<const N: usize>(&self, at: usize) -> Result<[u8; N]> {
        self.data
            .get(at..at + N)
            .map(|b| b.try_into().expect("slice length"))
            .ok_or_else(|| Error::parse(at as u64, "unexpected end of shapefile"))
    }

    fn i32_be(&self, at: usize) -> Result<i32> {
        Ok(i32::from_be_bytes(self.take(at)?))
    }

    fn i32_le(&self, at: usize) -> Result<i32> {
        Ok(i32::from_le_bytes(self.take(at)?))
    }

    fn f64_le(&self, at: usize) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take(at)?))
    }
}

/// Parses polygon records from shapefile bytes. `epsg` is assigned to every
/// polygon since the .prj file is not interpreted.
pub fn parse_shapefile_polygons(data: &[u8], epsg: u32) -> Result<Vec<Polygon>> {
    let cur = Cursor { data };
    if data.len() < HEADER_LEN {
        return Err(Error::parse(data.len() as u64, "shapefile header truncated"));
    }
    let code = cur.i32_be(0)?;
    if code != FILE_CODE {
        return Err(Error::parse(0, format!("file code {code}, expected {FILE_CODE}")));
    }
    let declared_len = cur.i32_be(24)? as i64 * 2;
    let shape_type = cur.i32_le(32)?;
    if shape_type != SHAPE_POLYGON {
        return Err(Error::UnsupportedShapeType(shape_type));
    }
    let end = if declared_len >= HEADER_LEN as i64 && (declared_len as usize) <= data.len() {
        declared_len as usize
    } else {
        data.len()
    };

    let mut polygons = Vec::new();
    let mut at = HEADER_LEN;
    while at + 8 <= end {
        let content_len = cur.i32_be(at + 4)?;
        if content_len < 2 {
            return Err(Error::parse(at as u64 + 4, format!("record content length {content_len}")));
        }
        let content = at + 8;
        let next = content + content_len as usize * 2;
        if next > data.len() {
            return Err(Error::parse(at as u64, "record extends past end of file"));
        }
        match cur.i32_le(content)? {
            SHAPE_NULL => {}
            SHAPE_POLYGON => polygons.push(parse_polygon(&cur, content, next, epsg)?),
            other => return Err(Error::UnsupportedShapeType(other)),
        }
        at = next;
    }
    Ok(polygons)
}

fn parse_polygon(cur: &Cursor<'_>, content: usize, end: usize, epsg: u32) -> Result<Polygon> {
    // shape type (4) + bbox (32)
    let num_parts = cur.i32_le(content + 36)?;
    let num_points = cur.i32_le(content + 40)?;
    if num_parts < 1 || num_points < 0 {
        return Err(Error::parse(
            content as u64 + 36,
            format!("invalid part/point counts {num_parts}/{num_points}"),
        ));
    }
    let (num_parts, num_points) = (num_parts as usize, num_points as usize);
    let parts_at = content + 44;
    let points_at = parts_at + 4 * num_parts;
    if points_at + 16 * num_points > end {
        return Err(Error::parse(content as u64, "polygon record shorter than its point count"));
    }
    let mut starts = Vec::with_capacity(num_parts);
    for k in 0..num_parts {
        let s = cur.i32_le(parts_at + 4 * k)?;
        if s < 0 || s as usize > num_points || starts.last().is_some_and(|&p| p > s as usize) {
            return Err(Error::parse((parts_at + 4 * k) as u64, format!("bad part start {s}")));
        }
        starts.push(s as usize);
    }
    let mut rings = Vec::with_capacity(num_parts);
    for (k, &start) in starts.iter().enumerate() {
        let stop = starts.get(k + 1).copied().unwrap_or(num_points);
        let ring = (start..stop)
            .map(|i| {
                let p = points_at + 16 * i;
                Ok((cur.f64_le(p)?, cur.f64_le(p + 8)?))
            })
            .collect::<Result<Vec<_>>>()?;
        rings.push(ring);
    }
    Polygon::new(epsg, rings)
}

/// Reads all polygon records of a `.shp` file.
pub fn read_shapefile_polygons(path: impl AsRef<Path>, epsg: u32) -> Result<Vec<Polygon>> {
    let path = path.as_ref();
    let data = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_shapefile_polygons(&data, epsg)
}

/// Encodes polygons as a shapefile main file (type 5). Used to produce AOI
/// fixtures; no .shx/.dbf companions are written.
pub fn encode_shapefile_polygons(polygons: &[Polygon]) -> Vec<u8> {
    let bbox_of = |pts: &mut dyn Iterator<Item = (f64, f64)>| {
        pts.fold(
            [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY],
            |b, (x, y)| [b[0].min(x), b[1].min(y), b[2].max(x), b[3].max(y)],
        )
    };
    let mut records = Vec::new();
    for (k, poly) in polygons.iter().enumerate() {
        let mut content = Vec::new();
        content.extend_from_slice(&SHAPE_POLYGON.to_le_bytes());
        for v in bbox_of(&mut poly.vertices()) {
            content.extend_from_slice(&v.to_le_bytes());
        }
        content.extend_from_slice(&(poly.rings.len() as i32).to_le_bytes());
        content.extend_from_slice(&(poly.vertices().count() as i32).to_le_bytes());
        let mut start = 0i32;
        for ring in &poly.rings {
            content.extend_from_slice(&start.to_le_bytes());
            start += ring.len() as i32;
        }
        for (x, y) in poly.vertices() {
            content.extend_from_slice(&x.to_le_bytes());
            content.extend_from_slice(&y.to_le_bytes());
        }
        records.extend_from_slice(&(k as i32 + 1).to_be_bytes());
        records.extend_from_slice(&((content.len() / 2) as i32).to_be_bytes());
        records.extend_from_slice(&content);
    }
    let mut out = Vec::with_capacity(HEADER_LEN + records.len());
    out.extend_from_slice(&FILE_CODE.to_be_bytes());
    out.extend_from_slice(&[0u8; 20]);
    out.extend_from_slice(&(((HEADER_LEN + records.len()) / 2) as i32).to_be_bytes());
    out.extend_from_slice(&1000i32.to_le_bytes());
    out.extend_from_slice(&SHAPE_POLYGON.to_le_bytes());
    let bbox = bbox_of(&mut polygons.iter().flat_map(|p| p.vertices()));
    for v in bbox {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out.extend_from_slice(&[0u8; 32]); // z and m ranges
    out.extend_from_slice(&records);
    out
}
