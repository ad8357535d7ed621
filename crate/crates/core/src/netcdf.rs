//! NetCDF classic files with 64-bit offsets (CDF-2).
//!
//! Layout written: dimensions `time, band, y, x`; coordinate variables of the
//! same names; a scalar `crs` grid-mapping variable; and the 4D float data
//! variable `oceandc(time, band, y, x)` with a NaN `_FillValue`.
//! All header integers are big-endian.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use chrono::{DateTime, TimeZone, Utc};
use ndarray::Array4;

use crate::error::{Error, Result};
use crate::geodesy::{epsg_lookup, WGS84};
use crate::model::{BandId, GridSpec, HyperCube, SliceProvenance, BAND_COUNT};

pub const DATA_VAR: &str = "oceandc";
const TIME_UNITS: &str = "seconds since 1970-01-01T00:00:00Z";

const NC_DIMENSION: u32 = 0x0A;
const NC_VARIABLE: u32 = 0x0B;
const NC_ATTRIBUTE: u32 = 0x0C;

const NC_BYTE: u32 = 1;
const NC_CHAR: u32 = 2;
const NC_SHORT: u32 = 3;
const NC_INT: u32 = 4;
const NC_FLOAT: u32 = 5;
const NC_DOUBLE: u32 = 6;

/// Largest fixed-size variable the format can describe.
const MAX_VAR_BYTES: u64 = (1 << 32) - 4;

#[derive(Debug, Clone, PartialEq)]
pub enum AttrValue {
    Text(String),
    Bytes(Vec<i8>),
    Shorts(Vec<i16>),
    Ints(Vec<i32>),
    Floats(Vec<f32>),
    Doubles(Vec<f64>),
}

impl AttrValue {
    fn nc_type(&self) -> u32 {
        match self {
            AttrValue::Text(_) => NC_CHAR,
            AttrValue::Bytes(_) => NC_BYTE,
            AttrValue::Shorts(_) => NC_SHORT,
            AttrValue::Ints(_) => NC_INT,
            AttrValue::Floats(_) => NC_FLOAT,
            AttrValue::Doubles(_) => NC_DOUBLE,
        }
    }

    fn len(&self) -> usize {
        match self {
            AttrValue::Text(s) => s.len(),
            AttrValue::Bytes(v) => v.len(),
            AttrValue::Shorts(v) => v.len(),
            AttrValue::Ints(v) => v.len(),
            AttrValue::Floats(v) => v.len(),
            AttrValue::Doubles(v) => v.len(),
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            AttrValue::Text(s) => Some(s),
            _ => None,
        }
    }
}

type Attrs = Vec<(String, AttrValue)>;

fn text(name: &str, value: impl Into<String>) -> (String, AttrValue) {
    (name.to_string(), AttrValue::Text(value.into()))
}

fn double(name: &str, value: f64) -> (String, AttrValue) {
    (name.to_string(), AttrValue::Doubles(vec![value]))
}

fn pad4(n: usize) -> usize {
    n.div_ceil(4) * 4
}

struct Header<'a> {
    buf: &'a mut Vec<u8>,
}

impl Header<'_> {
    fn u32(&mut self, v: u32) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_be_bytes());
    }

    fn padded(&mut self, bytes: &[u8]) {
        self.buf.extend_from_slice(bytes);
        self.buf.resize(self.buf.len() + pad4(bytes.len()) - bytes.len(), 0);
    }

    fn name(&mut self, name: &str) {
        self.u32(name.len() as u32);
        self.padded(name.as_bytes());
    }

    fn attrs(&mut self, attrs: &Attrs) {
        if attrs.is_empty() {
            self.u64(0);
            return;
        }
        self.u32(NC_ATTRIBUTE);
        self.u32(attrs.len() as u32);
        for (name, value) in attrs {
            self.name(name);
            self.u32(value.nc_type());
            self.u32(value.len() as u32);
            let bytes: Vec<u8> = match value {
                AttrValue::Text(s) => s.as_bytes().to_vec(),
                AttrValue::Bytes(v) => v.iter().map(|b| *b as u8).collect(),
                AttrValue::Shorts(v) => v.iter().flat_map(|x| x.to_be_bytes()).collect(),
                AttrValue::Ints(v) => v.iter().flat_map(|x| x.to_be_bytes()).collect(),
                AttrValue::Floats(v) => v.iter().flat_map(|x| x.to_be_bytes()).collect(),
                AttrValue::Doubles(v) => v.iter().flat_map(|x| x.to_be_bytes()).collect(),
            };
            self.padded(&bytes);
        }
    }
}

struct VarSpec {
    name: &'static str,
    dims: Vec<u32>,
    attrs: Attrs,
    nc_type: u32,
    bytes: u64,
}

fn crs_attrs(grid: &GridSpec) -> Result<Attrs> {
    let crs = epsg_lookup(grid.epsg)?;
    let mut attrs = Vec::new();
    match crs.tm_params() {
        Some(tm) => {
            attrs.push(text("grid_mapping_name", "transverse_mercator"));
            attrs.push(double("longitude_of_central_meridian", tm.lon0));
            attrs.push(double("latitude_of_projection_origin", 0.0));
            attrs.push(double("scale_factor_at_central_meridian", tm.k0));
            attrs.push(double("false_easting", tm.false_easting));
            attrs.push(double("false_northing", tm.false_northing));
        }
        None => attrs.push(text("grid_mapping_name", "latitude_longitude")),
    }
    attrs.push(double("semi_major_axis", WGS84.a));
    attrs.push(double("inverse_flattening", 1.0 / WGS84.f));
    attrs.push(text("epsg_code", format!("EPSG:{}", grid.epsg)));
    attrs.push(text(
        "GeoTransform",
        format!(
            "{} {} 0 {} 0 {}",
            grid.origin_x, grid.pixel_size_x, grid.origin_y, -grid.pixel_size_y
        ),
    ));
    Ok(attrs)
}

fn band_table() -> String {
    BandId::all()
        .map(|b| format!("{}={}", b.get(), b.name()))
        .collect::<Vec<_>>()
        .join("; ")
}

fn time_seconds(t: &DateTime<Utc>) -> f64 {
    t.timestamp() as f64 + t.timestamp_subsec_micros() as f64 * 1e-6
}

/// Serializes `cube` as CDF-2 into `out`. `history` becomes the global
/// history attribute; pin it to make output byte-reproducible.
pub fn write_netcdf_to<W: Write>(cube: &HyperCube, history: &str, out: &mut W) -> Result<()> {
    let (t, b, h, w) = cube.shape();
    let grid = cube.grid();
    let data_bytes = (t * b * h * w) as u64 * 4;
    if data_bytes > MAX_VAR_BYTES {
        return Err(Error::TooLarge(format!(
            "data variable needs {data_bytes} bytes, the format allows {MAX_VAR_BYTES}"
        )));
    }
    let crs = epsg_lookup(grid.epsg)?;
    let (x_name, y_name, unit_x, unit_y) = if crs.is_geographic() {
        ("longitude", "latitude", "degrees_east", "degrees_north")
    } else {
        ("projection_x_coordinate", "projection_y_coordinate", "m", "m")
    };
    let provenance = serde_json::to_string(cube.provenance()).expect("provenance serializes");

    let dims: [(&str, usize); 4] = [("time", t), ("band", b), ("y", h), ("x", w)];
    let vars = vec![
        VarSpec {
            name: "time",
            dims: vec![0],
            attrs: vec![
                text("standard_name", "time"),
                text("units", TIME_UNITS),
                text("calendar", "standard"),
                text("axis", "T"),
            ],
            nc_type: NC_DOUBLE,
            bytes: t as u64 * 8,
        },
        VarSpec {
            name: "band",
            dims: vec![1],
            attrs: vec![text("long_name", "band identifier (see global band_table)")],
            nc_type: NC_INT,
            bytes: b as u64 * 4,
        },
        VarSpec {
            name: "y",
            dims: vec![2],
            attrs: vec![text("standard_name", y_name), text("units", unit_y), text("axis", "Y")],
            nc_type: NC_DOUBLE,
            bytes: h as u64 * 8,
        },
        VarSpec {
            name: "x",
            dims: vec![3],
            attrs: vec![text("standard_name", x_name), text("units", unit_x), text("axis", "X")],
            nc_type: NC_DOUBLE,
            bytes: w as u64 * 8,
        },
        VarSpec {
            name: "crs",
            dims: vec![],
            attrs: crs_attrs(grid)?,
            nc_type: NC_INT,
            bytes: 4,
        },
        VarSpec {
            name: DATA_VAR,
            dims: vec![0, 1, 2, 3],
            attrs: vec![
                ("_FillValue".to_string(), AttrValue::Floats(vec![f32::NAN])),
                text("long_name", "calibrated bands and spectral products"),
                text("grid_mapping", "crs"),
            ],
            nc_type: NC_FLOAT,
            bytes: data_bytes,
        },
    ];
    let globals: Attrs = vec![
        text("Conventions", "CF-1.8"),
        text("title", "multi-sensor Earth observation data cube"),
        text("history", history),
        text("band_table", band_table()),
        text("slice_provenance", provenance),
    ];

    let encode_header = |begins: &[u64]| {
        let mut buf = Vec::new();
        let mut hd = Header { buf: &mut buf };
        hd.buf.extend_from_slice(b"CDF\x02");
        hd.u32(0);
        hd.u32(NC_DIMENSION);
        hd.u32(dims.len() as u32);
        for (name, len) in dims {
            hd.name(name);
            hd.u32(len as u32);
        }
        hd.attrs(&globals);
        hd.u32(NC_VARIABLE);
        hd.u32(vars.len() as u32);
        for (v, begin) in vars.iter().zip(begins) {
            hd.name(v.name);
            hd.u32(v.dims.len() as u32);
            for d in &v.dims {
                hd.u32(*d);
            }
            hd.attrs(&v.attrs);
            hd.u32(v.nc_type);
            hd.u32(pad4(v.bytes as usize) as u32);
            hd.u64(*begin);
        }
        buf
    };
    let header_len = encode_header(&[0; 6]).len() as u64;
    let mut begins = Vec::with_capacity(vars.len());
    let mut at = header_len;
    for v in &vars {
        begins.push(at);
        at += pad4(v.bytes as usize) as u64;
    }
    let header = encode_header(&begins);

    let io = |e: std::io::Error| Error::Write {
        path: Default::default(),
        source: e,
    };
    out.write_all(&header).map_err(io)?;
    let mut small = Vec::new();
    small.extend(cube.times().iter().flat_map(|t| time_seconds(t).to_be_bytes()));
    small.extend((1..=BAND_COUNT as i32).flat_map(|b| b.to_be_bytes()));
    small.extend((0..h).flat_map(|r| grid.pixel_center(0, r).1.to_be_bytes()));
    small.extend((0..w).flat_map(|c| grid.pixel_center(c, 0).0.to_be_bytes()));
    small.extend((grid.epsg as i32).to_be_bytes());
    out.write_all(&small).map_err(io)?;

    let mut chunk = Vec::with_capacity(1 << 16);
    for v in cube.data().iter() {
        chunk.extend_from_slice(&v.to_bits().to_be_bytes());
        if chunk.len() >= 1 << 16 {
            out.write_all(&chunk).map_err(io)?;
            chunk.clear();
        }
    }
    out.write_all(&chunk).map_err(io)?;
    Ok(())
}

/// In-memory variant of [`write_netcdf`].
pub fn encode_netcdf(cube: &HyperCube, history: &str) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    write_netcdf_to(cube, history, &mut out)?;
    Ok(out)
}

pub fn write_netcdf(cube: &HyperCube, path: impl AsRef<Path>, history: &str) -> Result<()> {
    let path = path.as_ref();
    let with_path = |e: Error| match e {
        Error::Write { source, .. } => Error::Write {
            path: path.to_path_buf(),
            source,
        },
        other => other,
    };
    let file = File::create(path).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })?;
    let mut out = BufWriter::with_capacity(1 << 20, file);
    write_netcdf_to(cube, history, &mut out).map_err(with_path)?;
    out.flush().map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

struct Reader<'a> {
    data: &'a [u8],
    at: usize,
    offset64: bool,
}

impl<'a> Reader<'a> {
    fn bytes(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .at
            .checked_add(n)
            .filter(|e| *e <= self.data.len())
            .ok_or_else(|| Error::parse(self.at as u64, format!("need {n} bytes, file is truncated")))?;
        let out = &self.data[self.at..end];
        self.at = end;
        Ok(out)
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_be_bytes(self.bytes(4)?.try_into().expect("4 bytes")))
    }

    fn offset(&mut self) -> Result<u64> {
        if self.offset64 {
            Ok(u64::from_be_bytes(self.bytes(8)?.try_into().expect("8 bytes")))
        } else {
            Ok(self.u32()? as u64)
        }
    }

    fn padded(&mut self, n: usize) -> Result<&'a [u8]> {
        let out = self.bytes(n)?;
        self.bytes(pad4(n) - n)?;
        Ok(out)
    }

    fn name(&mut self) -> Result<String> {
        let at = self.at;
        let n = self.u32()? as usize;
        let raw = self.padded(n)?;
        String::from_utf8(raw.to_vec()).map_err(|_| Error::parse(at as u64, "name is not UTF-8"))
    }

    /// Reads a list tag and its count; ABSENT is `0, 0`.
    fn list(&mut self, tag: u32) -> Result<usize> {
        let at = self.at;
        let found = self.u32()?;
        let n = self.u32()? as usize;
        if found == 0 && n == 0 {
            return Ok(0);
        }
        if found != tag {
            return Err(Error::parse(at as u64, format!("expected list tag {tag:#x}, found {found:#x}")));
        }
        Ok(n)
    }

    fn attrs(&mut self) -> Result<Attrs> {
        let n = self.list(NC_ATTRIBUTE)?;
        let mut out = Vec::with_capacity(n.min(1024));
        for _ in 0..n {
            let name = self.name()?;
            let at = self.at;
            let ty = self.u32()?;
            let len = self.u32()? as usize;
            let size = type_size(ty).ok_or_else(|| Error::parse(at as u64, format!("unknown type {ty}")))?;
            let raw = self.padded(
                len.checked_mul(size)
                    .ok_or_else(|| Error::parse(at as u64, "attribute too long"))?,
            )?;
            let value = match ty {
                NC_CHAR => AttrValue::Text(String::from_utf8_lossy(raw).into_owned()),
                NC_BYTE => AttrValue::Bytes(raw.iter().map(|b| *b as i8).collect()),
                NC_SHORT => AttrValue::Shorts(raw.chunks(2).map(|c| i16::from_be_bytes([c[0], c[1]])).collect()),
                NC_INT => AttrValue::Ints(raw.chunks(4).map(|c| i32::from_be_bytes(c.try_into().unwrap())).collect()),
                NC_FLOAT => AttrValue::Floats(raw.chunks(4).map(|c| f32::from_be_bytes(c.try_into().unwrap())).collect()),
                _ => AttrValue::Doubles(raw.chunks(8).map(|c| f64::from_be_bytes(c.try_into().unwrap())).collect()),
            };
            out.push((name, value));
        }
        Ok(out)
    }
}

fn type_size(ty: u32) -> Option<usize> {
    match ty {
        NC_BYTE | NC_CHAR => Some(1),
        NC_SHORT => Some(2),
        NC_INT | NC_FLOAT => Some(4),
        NC_DOUBLE => Some(8),
        _ => None,
    }
}

#[derive(Debug)]
struct Var {
    name: String,
    dims: Vec<usize>,
    attrs: Attrs,
    nc_type: u32,
    begin: u64,
}

fn attr<'a>(attrs: &'a Attrs, name: &str) -> Option<&'a AttrValue> {
    attrs.iter().find(|(n, _)| n == name).map(|(_, v)| v)
}

/// Parsed classic-format header with byte access to variable payloads.
pub struct NetcdfFile<'a> {
    data: &'a [u8],
    dims: Vec<(String, usize)>,
    globals: Attrs,
    vars: Vec<Var>,
}

impl<'a> NetcdfFile<'a> {
    pub fn parse(data: &'a [u8]) -> Result<Self> {
        let offset64 = match data.get(..4) {
            Some(b"CDF\x01") => false,
            Some(b"CDF\x02") => true,
            _ => return Err(Error::NotNetcdf),
        };
        let mut rd = Reader { data, at: 4, offset64 };
        let _numrecs = rd.u32()?;
        let ndims = rd.list(NC_DIMENSION)?;
        let mut dims = Vec::with_capacity(ndims.min(1024));
        for _ in 0..ndims {
            let name = rd.name()?;
            let len = rd.u32()? as usize;
            dims.push((name, len));
        }
        let globals = rd.attrs()?;
        let nvars = rd.list(NC_VARIABLE)?;
        let mut vars = Vec::with_capacity(nvars.min(1024));
        for _ in 0..nvars {
            let name = rd.name()?;
            let n = rd.u32()? as usize;
            let mut ids = Vec::with_capacity(n.min(64));
            for _ in 0..n {
                let at = rd.at;
                let id = rd.u32()? as usize;
                if id >= dims.len() {
                    return Err(Error::parse(at as u64, format!("dimension id {id} out of range")));
                }
                ids.push(id);
            }
            let attrs = rd.attrs()?;
            let nc_type = rd.u32()?;
            let _vsize = rd.u32()?;
            let begin = rd.offset()?;
            vars.push(Var {
                name,
                dims: ids,
                attrs,
                nc_type,
                begin,
            });
        }
        Ok(NetcdfFile {
            data,
            dims,
            globals,
            vars,
        })
    }

    pub fn dimensions(&self) -> &[(String, usize)] {
        &self.dims
    }

    pub fn global(&self, name: &str) -> Option<&AttrValue> {
        attr(&self.globals, name)
    }

    fn var(&self, name: &str) -> Result<&Var> {
        self.vars
            .iter()
            .find(|v| v.name == name)
            .ok_or_else(|| Error::Schema(format!("missing variable {name:?}")))
    }

    pub fn var_attr(&self, var: &str, name: &str) -> Option<&AttrValue> {
        self.var(var).ok().and_then(|v| attr(&v.attrs, name))
    }

    fn dim_len(&self, name: &str) -> Result<usize> {
        self.dims
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, l)| *l)
            .ok_or_else(|| Error::Schema(format!("missing dimension {name:?}")))
    }

    fn payload(&self, var: &Var, elem: usize) -> Result<&'a [u8]> {
        let count: usize = var.dims.iter().map(|d| self.dims[*d].1).product();
        let start = var.begin as usize;
        let len = count * elem;
        self.data.get(start..start + len).ok_or_else(|| {
            Error::parse(
                self.data.len() as u64,
                format!("variable {:?} needs bytes {start}..{}", var.name, start + len),
            )
        })
    }

    fn typed(&self, name: &str, ty: u32, dims: &[&str]) -> Result<&'a [u8]> {
        let var = self.var(name)?;
        if var.nc_type != ty {
            return Err(Error::Schema(format!("variable {name:?} has type {}, expected {ty}", var.nc_type)));
        }
        let names: Vec<&str> = var.dims.iter().map(|d| self.dims[*d].0.as_str()).collect();
        if names != dims {
            return Err(Error::Schema(format!("variable {name:?} has dimensions {names:?}, expected {dims:?}")));
        }
        self.payload(var, type_size(ty).expect("known type"))
    }

    fn doubles(&self, name: &str, dims: &[&str]) -> Result<Vec<f64>> {
        Ok(self
            .typed(name, NC_DOUBLE, dims)?
            .chunks_exact(8)
            .map(|c| f64::from_be_bytes(c.try_into().unwrap()))
            .collect())
    }
}

fn parse_epsg(s: &str) -> Option<u32> {
    s.trim().strip_prefix("EPSG:")?.parse().ok()
}

fn recover_grid(nc: &NetcdfFile<'_>, epsg: u32, width: usize, height: usize) -> Result<GridSpec> {
    if let Some(gt) = nc.var_attr("crs", "GeoTransform").and_then(AttrValue::as_text) {
        let v: Vec<f64> = gt
            .split_whitespace()
            .map(str::parse)
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| Error::Schema(format!("unreadable GeoTransform {gt:?}")))?;
        if v.len() == 6 {
            return GridSpec::new(epsg, (v[0], v[3]), (v[1], -v[5]), width, height);
        }
    }
    let xs = nc.doubles("x", &["x"])?;
    let ys = nc.doubles("y", &["y"])?;
    if xs.len() < 2 || ys.len() < 2 {
        return Err(Error::Schema("cannot infer pixel size without GeoTransform".into()));
    }
    let (psx, psy) = (xs[1] - xs[0], ys[0] - ys[1]);
    GridSpec::new(epsg, (xs[0] - psx / 2.0, ys[0] + psy / 2.0), (psx, psy), width, height)
}

/// Decodes a cube from CDF-1/CDF-2 bytes following the layout above.
pub fn decode_netcdf(data: &[u8]) -> Result<HyperCube> {
    let nc = NetcdfFile::parse(data)?;
    let t = nc.dim_len("time")?;
    let b = nc.dim_len("band")?;
    let h = nc.dim_len("y")?;
    let w = nc.dim_len("x")?;
    if b != BAND_COUNT {
        return Err(Error::Schema(format!("band dimension is {b}, expected {BAND_COUNT}")));
    }
    let bands: Vec<i32> = nc
        .typed("band", NC_INT, &["band"])?
        .chunks_exact(4)
        .map(|c| i32::from_be_bytes(c.try_into().unwrap()))
        .collect();
    if bands.iter().zip(1..).any(|(id, k)| *id != k) {
        return Err(Error::Schema("band coordinate must be 1..43".into()));
    }
    let units = nc.var_attr("time", "units").and_then(AttrValue::as_text).unwrap_or_default();
    if !units.starts_with("seconds since 1970-01-01") {
        return Err(Error::Schema(format!("unsupported time units {units:?}")));
    }
    let times = nc
        .doubles("time", &["time"])?
        .into_iter()
        .map(|s| {
            let micros = (s * 1e6).round() as i64;
            Utc.timestamp_micros(micros)
                .single()
                .ok_or_else(|| Error::Schema(format!("time value {s} out of range")))
        })
        .collect::<Result<Vec<_>>>()?;
    let epsg = nc
        .var_attr("crs", "epsg_code")
        .and_then(AttrValue::as_text)
        .and_then(parse_epsg)
        .ok_or_else(|| Error::Schema("crs variable lacks an epsg_code attribute".into()))?;
    epsg_lookup(epsg)?;
    let grid = recover_grid(&nc, epsg, w, h)?;
    let provenance: Vec<SliceProvenance> = nc
        .global("slice_provenance")
        .and_then(AttrValue::as_text)
        .ok_or_else(|| Error::Schema("missing slice_provenance attribute".into()))
        .and_then(|s| serde_json::from_str(s).map_err(|e| Error::Schema(format!("slice_provenance: {e}"))))?;

    let raw = nc.typed(DATA_VAR, NC_FLOAT, &["time", "band", "y", "x"])?;
    let values: Vec<f32> = raw
        .chunks_exact(4)
        .map(|c| f32::from_bits(u32::from_be_bytes(c.try_into().unwrap())))
        .collect();
    let data = Array4::from_shape_vec((t, b, h, w), values).expect("payload length checked");
    HyperCube::new(grid, times, data, provenance)
}

pub fn read_netcdf(path: impl AsRef<Path>) -> Result<HyperCube> {
    let path = path.as_ref();
    let data = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_netcdf(&data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Sensor;

    fn cube(t: usize, h: usize, w: usize) -> HyperCube {
        let grid = GridSpec::new(32634, (700000.0, 4200000.0), (10.0, 10.0), w, h).unwrap();
        let times = (0..t)
            .map(|k| Utc.timestamp_opt(1_505_000_000 + 86400 * k as i64, 0).unwrap())
            .collect();
        let data = Array4::from_shape_fn((t, BAND_COUNT, h, w), |(a, b, c, d)| {
            if b % 5 == 0 {
                f32::NAN
            } else {
                (a * 1000 + b * 10 + c + d) as f32 * 0.01
            }
        });
        let prov = (0..t)
            .map(|k| SliceProvenance {
                sensor: if k % 2 == 0 { Sensor::Sentinel2 } else { Sensor::Landsat8 },
                scene_id: format!("scene-{k}"),
            })
            .collect();
        HyperCube::new(grid, times, data, prov).unwrap()
    }

    #[test]
    fn magic_and_round_trip() {
        let c = cube(2, 3, 4);
        let bytes = encode_netcdf(&c, "pinned").unwrap();
        assert_eq!(&bytes[..4], &[0x43, 0x44, 0x46, 0x02]);
        let back = decode_netcdf(&bytes).unwrap();
        assert!(back.bit_eq(&c));
        assert_eq!(encode_netcdf(&c, "pinned").unwrap(), bytes);
    }

    #[test]
    fn ndwi_scalar_is_retrievable() {
        let grid = GridSpec::new(32634, (0.0, 10.0), (10.0, 10.0), 1, 1).unwrap();
        let mut data = Array4::from_elem((1, BAND_COUNT, 1, 1), f32::NAN);
        let third = (0.2f32 - 0.1) / (0.2 + 0.1);
        data[(0, BandId::NDWI.index(), 0, 0)] = third;
        let c = HyperCube::new(
            grid,
            vec![Utc.timestamp_opt(0, 0).unwrap()],
            data,
            vec![SliceProvenance {
                sensor: Sensor::Sentinel2,
                scene_id: "x".into(),
            }],
        )
        .unwrap();
        let back = decode_netcdf(&encode_netcdf(&c, "").unwrap()).unwrap();
        assert_eq!(back.plane(0, BandId::NDWI)[(0, 0)], third);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(decode_netcdf(b"hello world"), Err(Error::NotNetcdf)));
        let bytes = encode_netcdf(&cube(1, 2, 2), "").unwrap();
        assert!(matches!(decode_netcdf(&bytes[..40]), Err(Error::Parse { .. })));
        assert!(matches!(decode_netcdf(&bytes[..bytes.len() - 1]), Err(Error::Parse { .. })));
    }

    #[test]
    fn wrong_band_count_is_schema_error() {
        let mut bytes = encode_netcdf(&cube(1, 2, 2), "").unwrap();
        // dimension list: magic(4) numrecs(4) tag(4) n(4) "time"(4+4) len(4) "band"(4+4) len
        let at = 4 + 4 + 8 + 12 + 8;
        assert_eq!(&bytes[at..at + 4], &43u32.to_be_bytes());
        bytes[at..at + 4].copy_from_slice(&12u32.to_be_bytes());
        assert!(matches!(decode_netcdf(&bytes), Err(Error::Schema(_))));
    }

    #[test]
    fn microsecond_times_survive() {
        let mut c = cube(1, 1, 1);
        let t = Utc.timestamp_micros(1_505_296_123_456_789).unwrap();
        c = HyperCube::new(*c.grid(), vec![t], c.data().clone(), c.provenance().to_vec()).unwrap();
        let back = decode_netcdf(&encode_netcdf(&c, "").unwrap()).unwrap();
        assert_eq!(back.times(), &[t]);
    }
}
