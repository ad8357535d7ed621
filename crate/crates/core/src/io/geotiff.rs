//! Single-band GeoTIFF subset: baseline (non-Big) TIFF, either byte order,
//! strips or tiles, no compression or DEFLATE, u8/u16/i16/f32 samples,
//! georeferenced by ModelPixelScale + ModelTiepoint and an EPSG geo-key.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use flate2::read::ZlibDecoder;
use flate2::write::ZlibEncoder;
use ndarray::Array2;

use crate::error::{Error, Result};
use crate::model::{GridSpec, Raster2D, FILL};

mod tag {
    pub const IMAGE_WIDTH: u16 = 256;
    pub const IMAGE_LENGTH: u16 = 257;
    pub const BITS_PER_SAMPLE: u16 = 258;
    pub const COMPRESSION: u16 = 259;
    pub const PHOTOMETRIC: u16 = 262;
    pub const STRIP_OFFSETS: u16 = 273;
    pub const SAMPLES_PER_PIXEL: u16 = 277;
    pub const ROWS_PER_STRIP: u16 = 278;
    pub const STRIP_BYTE_COUNTS: u16 = 279;
    pub const PLANAR_CONFIG: u16 = 284;
    pub const PREDICTOR: u16 = 317;
    pub const TILE_WIDTH: u16 = 322;
    pub const TILE_LENGTH: u16 = 323;
    pub const TILE_OFFSETS: u16 = 324;
    pub const TILE_BYTE_COUNTS: u16 = 325;
    pub const SAMPLE_FORMAT: u16 = 339;
    pub const MODEL_PIXEL_SCALE: u16 = 33550;
    pub const MODEL_TIEPOINT: u16 = 33922;
    pub const MODEL_TRANSFORMATION: u16 = 34264;
    pub const GEO_KEY_DIRECTORY: u16 = 34735;
    pub const GDAL_NODATA: u16 = 42113;
}

const KEY_RASTER_TYPE: u16 = 1025;
const KEY_GEOGRAPHIC_TYPE: u16 = 2048;
const KEY_PROJECTED_CS_TYPE: u16 = 3072;
const RASTER_PIXEL_IS_POINT: u16 = 2;

const COMPRESSION_NONE: u16 = 1;
const COMPRESSION_DEFLATE: u16 = 8;
const COMPRESSION_DEFLATE_OLD: u16 = 32946;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ByteOrder {
    Little,
    Big,
}

impl ByteOrder {
    fn u16(self, b: [u8; 2]) -> u16 {
        match self {
            ByteOrder::Little => u16::from_le_bytes(b),
            ByteOrder::Big => u16::from_be_bytes(b),
        }
    }

    fn u32(self, b: [u8; 4]) -> u32 {
        match self {
            ByteOrder::Little => u32::from_le_bytes(b),
            ByteOrder::Big => u32::from_be_bytes(b),
        }
    }

    fn u64(self, b: [u8; 8]) -> u64 {
        match self {
            ByteOrder::Little => u64::from_le_bytes(b),
            ByteOrder::Big => u64::from_be_bytes(b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleFormat {
    U8,
    U16,
    I16,
    F32,
}

impl SampleFormat {
    pub fn bytes(self) -> usize {
        match self {
            SampleFormat::U8 => 1,
            SampleFormat::U16 | SampleFormat::I16 => 2,
            SampleFormat::F32 => 4,
        }
    }

    fn tiff_code(self) -> u16 {
        match self {
            SampleFormat::U8 | SampleFormat::U16 => 1,
            SampleFormat::I16 => 2,
            SampleFormat::F32 => 3,
        }
    }

    fn range(self) -> (f64, f64) {
        match self {
            SampleFormat::U8 => (0.0, u8::MAX as f64),
            SampleFormat::U16 => (0.0, u16::MAX as f64),
            SampleFormat::I16 => (i16::MIN as f64, i16::MAX as f64),
            SampleFormat::F32 => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    Strips { rows_per_strip: usize },
    Tiles { width: usize, height: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Compression {
    None,
    Deflate,
}

/// Structural summary of a GeoTIFF within the supported subset.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoTiffInfo {
    pub width: usize,
    pub height: usize,
    pub byte_order: ByteOrder,
    pub sample_format: SampleFormat,
    pub layout: Layout,
    pub compression: Compression,
    pub pixel_scale: (f64, f64),
    /// Raster (i, j) and model (x, y) of the first tie point.
    pub tiepoint: [f64; 4],
    pub pixel_is_point: bool,
    pub epsg: u32,
    pub nodata: Option<f64>,
}

impl GeoTiffInfo {
    pub fn grid(&self) -> Result<GridSpec> {
        let (sx, sy) = self.pixel_scale;
        let [i, j, x, y] = self.tiepoint;
        let mut origin_x = x - i * sx;
        let mut origin_y = y + j * sy;
        if self.pixel_is_point {
            origin_x -= 0.5 * sx;
            origin_y += 0.5 * sy;
        }
        GridSpec::new(self.epsg, (origin_x, origin_y), (sx, sy), self.width, self.height)
    }
}

#[derive(Debug, Clone, Copy)]
struct RawEntry {
    typ: u16,
    count: u64,
    /// Offset of the value bytes within the file.
    offset: u64,
    /// Offset of the IFD entry itself, for diagnostics.
    entry_offset: u64,
}

fn type_size(typ: u16) -> Option<u64> {
    Some(match typ {
        1 | 2 | 6 | 7 => 1,
        3 | 8 => 2,
        4 | 9 | 11 => 4,
        5 | 10 | 12 => 8,
        _ => return None,
    })
}

struct TiffBytes<'a> {
    data: &'a [u8],
    order: ByteOrder,
}

impl<'a> TiffBytes<'a> {
    fn slice(&self, offset: u64, len: u64) -> Result<&'a [u8]> {
        let end = offset.checked_add(len).filter(|&e| e <= self.data.len() as u64);
        match end {
            Some(end) => Ok(&self.data[offset as usize..end as usize]),
            None => Err(Error::parse(
                offset,
                format!("{len} bytes requested past end of file ({} bytes)", self.data.len()),
            )),
        }
    }

    fn u16_at(&self, offset: u64) -> Result<u16> {
        let b = self.slice(offset, 2)?;
        Ok(self.order.u16([b[0], b[1]]))
    }

    fn u32_at(&self, offset: u64) -> Result<u32> {
        let b = self.slice(offset, 4)?;
        Ok(self.order.u32([b[0], b[1], b[2], b[3]]))
    }

    fn u64_at(&self, offset: u64) -> Result<u64> {
        let b = self.slice(offset, 8)?;
        Ok(self.order.u64(b.try_into().expect("8 bytes")))
    }
}

struct Ifd<'a> {
    bytes: TiffBytes<'a>,
    entries: BTreeMap<u16, RawEntry>,
}

impl<'a> Ifd<'a> {
    fn parse(data: &'a [u8]) -> Result<Self> {
        if data.len() < 8 {
            return Err(Error::parse(0, "file shorter than a TIFF header"));
        }
        let order = match &data[0..2] {
            b"II" => ByteOrder::Little,
            b"MM" => ByteOrder::Big,
            _ => return Err(Error::parse(0, "missing II/MM byte-order mark")),
        };
        let bytes = TiffBytes { data, order };
        match bytes.u16_at(2)? {
            42 => {}
            43 => return Err(Error::UnsupportedFormat("bigtiff".into())),
            other => return Err(Error::parse(2, format!("bad TIFF version {other}"))),
        }
        let ifd_offset = bytes.u32_at(4)? as u64;
        let count = bytes.u16_at(ifd_offset)? as u64;
        let mut entries = BTreeMap::new();
        for k in 0..count {
            let at = ifd_offset + 2 + 12 * k;
            let tag = bytes.u16_at(at)?;
            let typ = bytes.u16_at(at + 2)?;
            let n = bytes.u32_at(at + 4)? as u64;
            let Some(size) = type_size(typ) else {
                // Unknown field types are skipped as TIFF readers must.
                continue;
            };
            let total = size
                .checked_mul(n)
                .ok_or_else(|| Error::parse(at, "tag value size overflows"))?;
            let offset = if total <= 4 { at + 8 } else { bytes.u32_at(at + 8)? as u64 };
            bytes.slice(offset, total)?;
            entries.insert(
                tag,
                RawEntry {
                    typ,
                    count: n,
                    offset,
                    entry_offset: at,
                },
            );
        }
        Ok(Ifd { bytes, entries })
    }

    fn uints(&self, tag: u16) -> Result<Option<Vec<u64>>> {
        let Some(e) = self.entries.get(&tag) else {
            return Ok(None);
        };
        let mut out = Vec::with_capacity(e.count as usize);
        for k in 0..e.count {
            let v = match e.typ {
                1 | 7 => self.bytes.slice(e.offset + k, 1)?[0] as u64,
                3 => self.bytes.u16_at(e.offset + 2 * k)? as u64,
                4 => self.bytes.u32_at(e.offset + 4 * k)? as u64,
                t => {
                    return Err(Error::parse(
                        e.entry_offset,
                        format!("tag {tag} has type {t}, expected an unsigned integer"),
                    ))
                }
            };
            out.push(v);
        }
        Ok(Some(out))
    }

    fn uint(&self, tag: u16) -> Result<Option<u64>> {
        Ok(self.uints(tag)?.and_then(|v| v.first().copied()))
    }

    fn required_uint(&self, tag: u16, name: &str) -> Result<u64> {
        self.uint(tag)?
            .ok_or_else(|| Error::parse(0, format!("required tag {name} ({tag}) is missing")))
    }

    fn doubles(&self, tag: u16) -> Result<Option<Vec<f64>>> {
        let Some(e) = self.entries.get(&tag) else {
            return Ok(None);
        };
        let mut out = Vec::with_capacity(e.count as usize);
        for k in 0..e.count {
            let v = match e.typ {
                12 => f64::from_bits(self.bytes.u64_at(e.offset + 8 * k)?),
                11 => f32::from_bits(self.bytes.u32_at(e.offset + 4 * k)?) as f64,
                t => {
                    return Err(Error::parse(
                        e.entry_offset,
                        format!("tag {tag} has type {t}, expected DOUBLE"),
                    ))
                }
            };
            out.push(v);
        }
        Ok(Some(out))
    }

    fn ascii(&self, tag: u16) -> Result<Option<String>> {
        let Some(e) = self.entries.get(&tag) else {
            return Ok(None);
        };
        if e.typ != 2 {
            return Err(Error::parse(e.entry_offset, format!("tag {tag} is not ASCII")));
        }
        let raw = self.bytes.slice(e.offset, e.count)?;
        let text = raw.split(|&b| b == 0).next().unwrap_or_default();
        Ok(Some(String::from_utf8_lossy(text).trim().to_string()))
    }

    fn entry_offset(&self, tag: u16) -> u64 {
        self.entries.get(&tag).map_or(0, |e| e.entry_offset)
    }
}

fn sample_format_of(ifd: &Ifd<'_>) -> Result<SampleFormat> {
    let bits = ifd.uints(tag::BITS_PER_SAMPLE)?.unwrap_or_else(|| vec![1]);
    let fmt = ifd.uint(tag::SAMPLE_FORMAT)?.unwrap_or(1);
    match (bits[0], fmt) {
        (8, 1) => Ok(SampleFormat::U8),
        (16, 1) => Ok(SampleFormat::U16),
        (16, 2) => Ok(SampleFormat::I16),
        (32, 3) => Ok(SampleFormat::F32),
        (b, f) => Err(Error::UnsupportedFormat(format!("sample_format={f},bits_per_sample={b}"))),
    }
}

fn inspect(ifd: &Ifd<'_>) -> Result<GeoTiffInfo> {
    let width = ifd.required_uint(tag::IMAGE_WIDTH, "ImageWidth")? as usize;
    let height = ifd.required_uint(tag::IMAGE_LENGTH, "ImageLength")? as usize;
    if width == 0 || height == 0 {
        return Err(Error::parse(ifd.entry_offset(tag::IMAGE_WIDTH), "zero image dimension"));
    }
    let spp = ifd.uint(tag::SAMPLES_PER_PIXEL)?.unwrap_or(1);
    if spp != 1 {
        return Err(Error::UnsupportedFormat(format!("samples_per_pixel={spp}")));
    }
    let sample_format = sample_format_of(ifd)?;
    let compression = match ifd.uint(tag::COMPRESSION)?.unwrap_or(1) as u16 {
        COMPRESSION_NONE => Compression::None,
        COMPRESSION_DEFLATE | COMPRESSION_DEFLATE_OLD => Compression::Deflate,
        c => return Err(Error::UnsupportedFormat(format!("compression={c}"))),
    };
    if let Some(p) = ifd.uint(tag::PREDICTOR)? {
        if p != 1 {
            return Err(Error::UnsupportedFormat(format!("predictor={p}")));
        }
    }
    if ifd.uint(tag::PHOTOMETRIC)? == Some(3) {
        return Err(Error::UnsupportedFormat("photometric=palette".into()));
    }
    let layout = match (ifd.uint(tag::TILE_WIDTH)?, ifd.uint(tag::TILE_LENGTH)?) {
        (Some(w), Some(h)) if w > 0 && h > 0 => Layout::Tiles {
            width: w as usize,
            height: h as usize,
        },
        (None, None) => Layout::Strips {
            rows_per_strip: ifd
                .uint(tag::ROWS_PER_STRIP)?
                .map_or(height, |r| (r as usize).clamp(1, height)),
        },
        _ => return Err(Error::parse(ifd.entry_offset(tag::TILE_WIDTH), "incomplete tile geometry")),
    };

    let scale = match ifd.doubles(tag::MODEL_PIXEL_SCALE)? {
        Some(v) if v.len() >= 2 => v,
        Some(_) => return Err(Error::parse(ifd.entry_offset(tag::MODEL_PIXEL_SCALE), "short ModelPixelScale")),
        None if ifd.entries.contains_key(&tag::MODEL_TRANSFORMATION) => {
            return Err(Error::UnsupportedFormat("ModelTransformation georeferencing".into()))
        }
        None => return Err(Error::MissingGeoreference("ModelPixelScale (33550)".into())),
    };
    if !(scale[0] > 0.0 && scale[1] > 0.0) {
        return Err(Error::parse(
            ifd.entry_offset(tag::MODEL_PIXEL_SCALE),
            format!("pixel scale ({}, {}) must be positive", scale[0], scale[1]),
        ));
    }
    let tie = match ifd.doubles(tag::MODEL_TIEPOINT)? {
        Some(v) if v.len() >= 6 => v,
        Some(_) => return Err(Error::parse(ifd.entry_offset(tag::MODEL_TIEPOINT), "short ModelTiepoint")),
        None => return Err(Error::MissingGeoreference("ModelTiepoint (33922)".into())),
    };
    let keys = ifd
        .uints(tag::GEO_KEY_DIRECTORY)?
        .ok_or_else(|| Error::MissingGeoreference("GeoKeyDirectory (34735)".into()))?;
    let geokeys = parse_geokeys(&keys, ifd.entry_offset(tag::GEO_KEY_DIRECTORY))?;
    let epsg = geokeys
        .get(&KEY_PROJECTED_CS_TYPE)
        .or_else(|| geokeys.get(&KEY_GEOGRAPHIC_TYPE))
        .copied()
        .filter(|&c| c != 0 && c != 32767)
        .ok_or_else(|| Error::MissingGeoreference("EPSG code in geo-keys".into()))?;
    let nodata = match ifd.ascii(tag::GDAL_NODATA)? {
        Some(s) if !s.is_empty() => Some(parse_nodata(&s).ok_or_else(|| {
            Error::parse(ifd.entry_offset(tag::GDAL_NODATA), format!("bad no-data value {s:?}"))
        })?),
        _ => None,
    };

    Ok(GeoTiffInfo {
        width,
        height,
        byte_order: ifd.bytes.order,
        sample_format,
        layout,
        compression,
        pixel_scale: (scale[0], scale[1]),
        tiepoint: [tie[0], tie[1], tie[3], tie[4]],
        pixel_is_point: geokeys.get(&KEY_RASTER_TYPE) == Some(&(RASTER_PIXEL_IS_POINT as u32)),
        epsg,
        nodata,
    })
}

fn parse_nodata(s: &str) -> Option<f64> {
    match s.to_ascii_lowercase().as_str() {
        "nan" | "-nan" => Some(f64::NAN),
        other => other.parse().ok(),
    }
}

/// Short-valued geo-keys only (TIFFTagLocation 0).
fn parse_geokeys(keys: &[u64], at: u64) -> Result<BTreeMap<u16, u32>> {
    if keys.len() < 4 {
        return Err(Error::parse(at, "GeoKeyDirectory header truncated"));
    }
    let n = keys[3] as usize;
    if keys.len() < 4 + 4 * n {
        return Err(Error::parse(at, "GeoKeyDirectory shorter than its key count"));
    }
    Ok(keys[4..4 + 4 * n]
        .chunks_exact(4)
        .filter(|k| k[1] == 0)
        .map(|k| (k[0] as u16, k[3] as u32))
        .collect())
}

/// Reads the structural summary without decoding pixels.
pub fn inspect_geotiff(data: &[u8]) -> Result<GeoTiffInfo> {
    inspect(&Ifd::parse(data)?)
}

struct Chunk {
    offset: u64,
    byte_count: u64,
    /// Pixel rectangle covered: col0, row0, stored width, stored height.
    rect: (usize, usize, usize, usize),
}

fn chunks(ifd: &Ifd<'_>, info: &GeoTiffInfo) -> Result<Vec<Chunk>> {
    let (offsets_tag, counts_tag) = match info.layout {
        Layout::Strips { .. } => (tag::STRIP_OFFSETS, tag::STRIP_BYTE_COUNTS),
        Layout::Tiles { .. } => (tag::TILE_OFFSETS, tag::TILE_BYTE_COUNTS),
    };
    let offsets = ifd
        .uints(offsets_tag)?
        .ok_or_else(|| Error::parse(0, format!("missing data offsets tag {offsets_tag}")))?;
    let counts = ifd
        .uints(counts_tag)?
        .ok_or_else(|| Error::parse(0, format!("missing byte counts tag {counts_tag}")))?;
    let rects: Vec<_> = match info.layout {
        Layout::Strips { rows_per_strip } => (0..info.height.div_ceil(rows_per_strip))
            .map(|k| {
                let row0 = k * rows_per_strip;
                (0, row0, info.width, rows_per_strip.min(info.height - row0))
            })
            .collect(),
        Layout::Tiles { width, height } => {
            let across = info.width.div_ceil(width);
            let down = info.height.div_ceil(height);
            (0..down)
                .flat_map(|ty| (0..across).map(move |tx| (tx * width, ty * height, width, height)))
                .collect()
        }
    };
    if offsets.len() < rects.len() || counts.len() < rects.len() {
        return Err(Error::parse(
            ifd.entry_offset(offsets_tag),
            format!("expected {} data chunks, found {}", rects.len(), offsets.len().min(counts.len())),
        ));
    }
    Ok(rects
        .into_iter()
        .enumerate()
        .map(|(k, rect)| Chunk {
            offset: offsets[k],
            byte_count: counts[k],
            rect,
        })
        .collect())
}

fn decode_sample(fmt: SampleFormat, order: ByteOrder, b: &[u8]) -> f32 {
    match fmt {
        SampleFormat::U8 => b[0] as f32,
        SampleFormat::U16 => order.u16([b[0], b[1]]) as f32,
        SampleFormat::I16 => order.u16([b[0], b[1]]) as i16 as f32,
        SampleFormat::F32 => f32::from_bits(order.u32([b[0], b[1], b[2], b[3]])),
    }
}

/// Decodes an in-memory GeoTIFF into a raster.
pub fn decode_geotiff(data: &[u8]) -> Result<Raster2D> {
    let ifd = Ifd::parse(data)?;
    let info = inspect(&ifd)?;
    let grid = info.grid()?;
    let bps = info.sample_format.bytes();
    let mut values = Array2::from_elem((info.height, info.width), FILL);
    let mut inflated = Vec::new();

    for chunk in chunks(&ifd, &info)? {
        let (col0, row0, cw, ch) = chunk.rect;
        let expected = cw * ch * bps;
        let raw = ifd.bytes.slice(chunk.offset, chunk.byte_count)?;
        let pixels: &[u8] = match info.compression {
            Compression::None => {
                if raw.len() < expected {
                    return Err(Error::parse(
                        chunk.offset,
                        format!("chunk holds {} bytes, {expected} expected", raw.len()),
                    ));
                }
                raw
            }
            Compression::Deflate => {
                inflated.clear();
                ZlibDecoder::new(raw)
                    .read_to_end(&mut inflated)
                    .map_err(|e| Error::parse(chunk.offset, format!("DEFLATE stream: {e}")))?;
                if inflated.len() < expected {
                    return Err(Error::parse(
                        chunk.offset,
                        format!("DEFLATE chunk inflated to {} bytes, {expected} expected", inflated.len()),
                    ));
                }
                &inflated
            }
        };
        let rows = ch.min(info.height.saturating_sub(row0));
        let cols = cw.min(info.width.saturating_sub(col0));
        for r in 0..rows {
            let line = &pixels[r * cw * bps..(r * cw + cols) * bps];
            for (c, s) in line.chunks_exact(bps).enumerate() {
                values[(row0 + r, col0 + c)] = decode_sample(info.sample_format, info.byte_order, s);
            }
        }
    }

    if let Some(nd) = info.nodata {
        if !nd.is_nan() {
            let nd = nd as f32;
            values.mapv_inplace(|v| if v == nd { FILL } else { v });
        }
    }
    // Infinite float samples carry no usable data.
    values.mapv_inplace(|v| if v.is_finite() { v } else { FILL });
    Raster2D::new(grid, values)
}

/// Reads a single-band GeoTIFF from disk.
pub fn read_geotiff(path: impl AsRef<Path>) -> Result<Raster2D> {
    let path = path.as_ref();
    let data = std::fs::read(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    decode_geotiff(&data)
}

/// Encoding choices for [`encode_geotiff`].
#[derive(Debug, Clone, Copy)]
pub struct GeoTiffWriteOptions {
    pub byte_order: ByteOrder,
    pub layout: Layout,
    pub compression: Compression,
    pub sample_format: SampleFormat,
    /// Written as GDAL_NODATA; integer formats substitute it for fill.
    pub nodata: Option<f64>,
}

impl Default for GeoTiffWriteOptions {
    fn default() -> Self {
        GeoTiffWriteOptions {
            byte_order: ByteOrder::Little,
            layout: Layout::Strips { rows_per_strip: 16 },
            compression: Compression::None,
            sample_format: SampleFormat::F32,
            nodata: Some(f64::NAN),
        }
    }
}

struct IfdWriter {
    order: ByteOrder,
    entries: Vec<(u16, u16, u32, Vec<u8>)>,
}

impl IfdWriter {
    fn put_u16(&self, out: &mut Vec<u8>, v: u16) {
        out.extend_from_slice(&match self.order {
            ByteOrder::Little => v.to_le_bytes(),
            ByteOrder::Big => v.to_be_bytes(),
        });
    }

    fn put_u32(&self, out: &mut Vec<u8>, v: u32) {
        out.extend_from_slice(&match self.order {
            ByteOrder::Little => v.to_le_bytes(),
            ByteOrder::Big => v.to_be_bytes(),
        });
    }

    fn shorts(&mut self, tag: u16, vals: &[u16]) {
        let mut b = Vec::new();
        for &v in vals {
            self.put_u16(&mut b, v);
        }
        self.entries.push((tag, 3, vals.len() as u32, b));
    }

    fn longs(&mut self, tag: u16, vals: &[u32]) {
        let mut b = Vec::new();
        for &v in vals {
            self.put_u32(&mut b, v);
        }
        self.entries.push((tag, 4, vals.len() as u32, b));
    }

    fn doubles(&mut self, tag: u16, vals: &[f64]) {
        let mut b = Vec::new();
        for &v in vals {
            b.extend_from_slice(&match self.order {
                ByteOrder::Little => v.to_bits().to_le_bytes(),
                ByteOrder::Big => v.to_bits().to_be_bytes(),
            });
        }
        self.entries.push((tag, 12, vals.len() as u32, b));
    }

    fn ascii(&mut self, tag: u16, s: &str) {
        let mut b = s.as_bytes().to_vec();
        b.push(0);
        self.entries.push((tag, 2, b.len() as u32, b));
    }

    /// Appends the IFD at the (word-aligned) end of `out` and returns its offset.
    fn finish(mut self, out: &mut Vec<u8>) -> u32 {
        if out.len() % 2 == 1 {
            out.push(0);
        }
        self.entries.sort_by_key(|e| e.0);
        let ifd_at = out.len();
        let mut extra_at = ifd_at + 2 + 12 * self.entries.len() + 4;
        let mut extra = Vec::new();
        let mut ifd = Vec::new();
        self.put_u16(&mut ifd, self.entries.len() as u16);
        for (tag, typ, count, bytes) in &self.entries {
            self.put_u16(&mut ifd, *tag);
            self.put_u16(&mut ifd, *typ);
            self.put_u32(&mut ifd, *count);
            if bytes.len() <= 4 {
                let mut inline = bytes.clone();
                inline.resize(4, 0);
                ifd.extend_from_slice(&inline);
            } else {
                self.put_u32(&mut ifd, extra_at as u32);
                extra.extend_from_slice(bytes);
                if bytes.len() % 2 == 1 {
                    extra.push(0);
                }
                extra_at = ifd_at + 2 + 12 * self.entries.len() + 4 + extra.len();
            }
        }
        self.put_u32(&mut ifd, 0);
        out.extend_from_slice(&ifd);
        out.extend_from_slice(&extra);
        ifd_at as u32
    }
}

fn encode_sample(fmt: SampleFormat, order: ByteOrder, v: f32, out: &mut Vec<u8>) {
    macro_rules! put {
        ($x:expr) => {
            match order {
                ByteOrder::Little => out.extend_from_slice(&$x.to_le_bytes()),
                ByteOrder::Big => out.extend_from_slice(&$x.to_be_bytes()),
            }
        };
    }
    match fmt {
        SampleFormat::U8 => out.push(v as u8),
        SampleFormat::U16 => put!(v as u16),
        SampleFormat::I16 => put!(v as i16),
        SampleFormat::F32 => put!(v.to_bits()),
    }
}

/// Encodes a raster as a single-band GeoTIFF within the readable subset.
pub fn encode_geotiff(raster: &Raster2D, opts: &GeoTiffWriteOptions) -> Result<Vec<u8>> {
    let grid = raster.grid();
    let fmt = opts.sample_format;
    let (lo, hi) = fmt.range();
    let fill_value = match (fmt, opts.nodata) {
        (SampleFormat::F32, _) => f32::NAN,
        (_, Some(nd)) if nd.fract() == 0.0 && nd >= lo && nd <= hi => nd as f32,
        (_, Some(nd)) => return Err(Error::Invalid(format!("no-data {nd} not representable as {fmt:?}"))),
        (_, None) if raster.fill_count() > 0 => {
            return Err(Error::Invalid("integer output with fill pixels needs a no-data value".into()))
        }
        (_, None) => 0.0,
    };
    if fmt != SampleFormat::F32 {
        if let Some(v) = raster
            .values()
            .iter()
            .find(|v| !v.is_nan() && (v.fract() != 0.0 || (**v as f64) < lo || (**v as f64) > hi))
        {
            return Err(Error::Invalid(format!("value {v} not representable as {fmt:?}")));
        }
    }

    let (cw, ch) = match opts.layout {
        Layout::Strips { rows_per_strip } => (grid.width, rows_per_strip.clamp(1, grid.height)),
        Layout::Tiles { width, height } => {
            if width % 16 != 0 || height % 16 != 0 || width == 0 || height == 0 {
                return Err(Error::Invalid("tile dimensions must be positive multiples of 16".into()));
            }
            (width, height)
        }
    };
    let across = grid.width.div_ceil(cw);
    let down = grid.height.div_ceil(ch);

    let mut out = Vec::new();
    out.extend_from_slice(match opts.byte_order {
        ByteOrder::Little => b"II",
        ByteOrder::Big => b"MM",
    });
    let mut w = IfdWriter {
        order: opts.byte_order,
        entries: Vec::new(),
    };
    w.put_u16(&mut out, 42);
    w.put_u32(&mut out, 0); // patched below

    let mut offsets = Vec::new();
    let mut counts = Vec::new();
    let mut buf = Vec::new();
    for ty in 0..down {
        for tx in 0..across {
            buf.clear();
            let rows = match opts.layout {
                Layout::Strips { .. } => ch.min(grid.height - ty * ch),
                Layout::Tiles { .. } => ch,
            };
            for r in 0..rows {
                for c in 0..cw {
                    let (col, row) = (tx * cw + c, ty * ch + r);
                    let v = if col < grid.width && row < grid.height {
                        let v = raster.get(col, row);
                        if v.is_nan() {
                            fill_value
                        } else {
                            v
                        }
                    } else {
                        fill_value
                    };
                    encode_sample(fmt, opts.byte_order, v, &mut buf);
                }
            }
            let payload = match opts.compression {
                Compression::None => buf.clone(),
                Compression::Deflate => {
                    let mut enc = ZlibEncoder::new(Vec::new(), flate2::Compression::default());
                    std::io::Write::write_all(&mut enc, &buf).expect("in-memory write");
                    enc.finish().expect("in-memory write")
                }
            };
            if out.len() % 2 == 1 {
                out.push(0);
            }
            offsets.push(out.len() as u32);
            counts.push(payload.len() as u32);
            out.extend_from_slice(&payload);
        }
    }
    if out.len() > u32::MAX as usize {
        return Err(Error::TooLarge("GeoTIFF exceeds 4 GiB".into()));
    }

    w.longs(tag::IMAGE_WIDTH, &[grid.width as u32]);
    w.longs(tag::IMAGE_LENGTH, &[grid.height as u32]);
    w.shorts(tag::BITS_PER_SAMPLE, &[(fmt.bytes() * 8) as u16]);
    w.shorts(
        tag::COMPRESSION,
        &[match opts.compression {
            Compression::None => COMPRESSION_NONE,
            Compression::Deflate => COMPRESSION_DEFLATE,
        }],
    );
    w.shorts(tag::PHOTOMETRIC, &[1]);
    w.shorts(tag::SAMPLES_PER_PIXEL, &[1]);
    w.shorts(tag::PLANAR_CONFIG, &[1]);
    w.shorts(tag::SAMPLE_FORMAT, &[fmt.tiff_code()]);
    match opts.layout {
        Layout::Strips { .. } => {
            w.longs(tag::ROWS_PER_STRIP, &[ch as u32]);
            w.longs(tag::STRIP_OFFSETS, &offsets);
            w.longs(tag::STRIP_BYTE_COUNTS, &counts);
        }
        Layout::Tiles { .. } => {
            w.longs(tag::TILE_WIDTH, &[cw as u32]);
            w.longs(tag::TILE_LENGTH, &[ch as u32]);
            w.longs(tag::TILE_OFFSETS, &offsets);
            w.longs(tag::TILE_BYTE_COUNTS, &counts);
        }
    }
    w.doubles(tag::MODEL_PIXEL_SCALE, &[grid.pixel_size_x, grid.pixel_size_y, 0.0]);
    w.doubles(tag::MODEL_TIEPOINT, &[0.0, 0.0, 0.0, grid.origin_x, grid.origin_y, 0.0]);
    let geographic = grid.epsg == crate::geodesy::EPSG_WGS84;
    let (model, cs_key) = if geographic {
        (2, KEY_GEOGRAPHIC_TYPE)
    } else {
        (1, KEY_PROJECTED_CS_TYPE)
    };
    w.shorts(
        tag::GEO_KEY_DIRECTORY,
        &[1, 1, 0, 3, 1024, 0, 1, model, KEY_RASTER_TYPE, 0, 1, 1, cs_key, 0, 1, grid.epsg as u16],
    );
    if let Some(nd) = opts.nodata {
        let text = if nd.is_nan() { "nan".to_string() } else { format!("{nd}") };
        w.ascii(tag::GDAL_NODATA, &text);
    }
    let ifd_at = w.finish(&mut out);
    let ifd_bytes = match opts.byte_order {
        ByteOrder::Little => ifd_at.to_le_bytes(),
        ByteOrder::Big => ifd_at.to_be_bytes(),
    };
    out[4..8].copy_from_slice(&ifd_bytes);
    Ok(out)
}

/// Writes a raster as a GeoTIFF file.
pub fn write_geotiff(path: impl AsRef<Path>, raster: &Raster2D, opts: &GeoTiffWriteOptions) -> Result<()> {
    let path = path.as_ref();
    if raster.grid().epsg > u16::MAX as u32 {
        return Err(Error::UnsupportedCrs(raster.grid().epsg));
    }
    let bytes = encode_geotiff(raster, opts)?;
    std::fs::write(path, bytes).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}
