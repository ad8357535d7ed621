//! Synthetic scenes over one AOI: two Sentinel-2 acquisitions and one
//! Landsat-8 acquisition, written as GeoTIFF plus metadata sidecars.
#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use oceandc::io::geotiff::{write_geotiff, ByteOrder, Compression, GeoTiffWriteOptions, Layout, SampleFormat};
use oceandc::io::shapefile::encode_shapefile_polygons;
use oceandc::{GridSpec, Polygon, Raster2D};

pub const AOI_X0: f64 = 700_000.0;
pub const AOI_Y1: f64 = 4_205_120.0;
pub const AOI_PIXELS: usize = 512;

const S2_BANDS: [(&str, f64); 13] = [
    ("B01", 60.0),
    ("B02", 10.0),
    ("B03", 10.0),
    ("B04", 10.0),
    ("B05", 20.0),
    ("B06", 20.0),
    ("B07", 20.0),
    ("B08", 10.0),
    ("B8A", 20.0),
    ("B09", 60.0),
    ("B10", 60.0),
    ("B11", 20.0),
    ("B12", 20.0),
];

const L8_BANDS: [(&str, f64); 11] = [
    ("B1", 30.0),
    ("B2", 30.0),
    ("B3", 30.0),
    ("B4", 30.0),
    ("B5", 30.0),
    ("B6", 30.0),
    ("B7", 30.0),
    ("B8", 15.0),
    ("B9", 30.0),
    ("B10", 30.0),
    ("B11", 30.0),
];

pub struct Scene {
    pub sensor: &'static str,
    pub acquired_at: &'static str,
    pub origin: (f64, f64),
    pub extent: f64,
    pub seed: u32,
    pub deflate: bool,
}

pub fn default_scenes() -> Vec<Scene> {
    vec![
        Scene {
            sensor: "Sentinel2",
            acquired_at: "2017-09-13T09:20:31Z",
            origin: (699_900.0, 4_205_160.0),
            extent: 5_400.0,
            seed: 1,
            deflate: true,
        },
        Scene {
            sensor: "Landsat8",
            acquired_at: "2017-09-08T09:13:05Z",
            origin: (699_885.0, 4_205_175.0),
            extent: 5_460.0,
            seed: 2,
            deflate: false,
        },
        Scene {
            sensor: "Sentinel2",
            acquired_at: "2017-09-03T09:20:29Z",
            origin: (699_910.0, 4_205_150.0),
            extent: 5_400.0,
            seed: 3,
            deflate: false,
        },
    ]
}

/// Digital number of band `label` at pixel `(col, row)`.
fn dn(label: &str, seed: u32, col: usize, row: usize) -> f32 {
    let h = label.bytes().fold(seed.wrapping_mul(2654435761), |a, b| a.wrapping_mul(31).wrapping_add(b as u32));
    let texture = ((col * 7 + row * 13 + (h as usize % 97)) % 400) as f32;
    match label {
        "B10" | "B11" if seed == 2 => 24_000.0 + texture * 5.0,
        _ if seed == 2 => 9_000.0 + (h % 20_000) as f32 + texture * 10.0,
        _ => 300.0 + (h % 3_000) as f32 + texture * 4.0,
    }
}

fn write_band(path: &Path, grid: GridSpec, label: &str, scene: &Scene) {
    let raster = Raster2D::from_fn(grid, |c, r| dn(label, scene.seed, c, r));
    let opts = GeoTiffWriteOptions {
        byte_order: if scene.seed == 3 { ByteOrder::Big } else { ByteOrder::Little },
        layout: if scene.deflate {
            Layout::Tiles { width: 256, height: 256 }
        } else {
            Layout::Strips { rows_per_strip: 64 }
        },
        compression: if scene.deflate { Compression::Deflate } else { Compression::None },
        sample_format: SampleFormat::U16,
        nodata: None,
    };
    write_geotiff(path, &raster, &opts).unwrap();
}

pub fn write_aoi(dir: &Path, x0: f64, y1: f64, size: f64) -> PathBuf {
    let ring = vec![(x0, y1), (x0 + size, y1), (x0 + size, y1 - size), (x0, y1 - size), (x0, y1)];
    let path = dir.join("aoi.shp");
    std::fs::write(&path, encode_shapefile_polygons(&[Polygon::new(32634, vec![ring]).unwrap()])).unwrap();
    path
}

/// Writes every scene's rasters and sidecars and returns the JSON
/// description of the `scenes` array.
pub fn write_scenes(dir: &Path, scenes: &[Scene]) -> serde_json::Value {
    let mut out = Vec::new();
    for (k, s) in scenes.iter().enumerate() {
        let sub = dir.join(format!("scene{k}"));
        std::fs::create_dir_all(&sub).unwrap();
        let landsat = s.sensor.starts_with("Landsat");
        let bands: &[(&str, f64)] = if landsat { &L8_BANDS } else { &S2_BANDS };
        let mut map = serde_json::Map::new();
        for &(label, res) in bands {
            let n = (s.extent / res).round() as usize;
            let grid = GridSpec::new(32634, s.origin, (res, res), n, n).unwrap();
            let file = format!("scene{k}/{label}.tif");
            write_band(&dir.join(&file), grid, label, s);
            map.insert(label.to_string(), file.into());
        }
        let meta = if landsat {
            serde_json::json!({
                "scale": 2.0e-5, "offset": -0.1,
                "ML": 3.342e-4, "AL": 0.1, "K1": 774.8853, "K2": 1321.0789,
                "ML_B11": 3.342e-4, "AL_B11": 0.1, "K1_B11": 480.8883, "K2_B11": 1201.1442
            })
        } else {
            serde_json::json!({"scale": 1.0e-4, "offset": 0.0})
        };
        let meta_file = format!("scene{k}/meta.json");
        std::fs::write(dir.join(&meta_file), meta.to_string()).unwrap();
        out.push(serde_json::json!({
            "sensor": s.sensor,
            "acquired_at": s.acquired_at,
            "bands": map,
            "metadata": meta_file,
        }));
    }
    serde_json::Value::Array(out)
}

/// Writes a config referencing the fixture in `dir` and returns its path.
pub fn write_config(dir: &Path, name: &str, scenes: &serde_json::Value, extra: serde_json::Value) -> PathBuf {
    let mut cfg = serde_json::json!({
        "aoi": {"path": "aoi.shp", "epsg": 32634},
        "target_epsg": 32634,
        "target_resolution": 10,
        "scenes": scenes,
        "output": format!("{name}.nc"),
    });
    for (k, v) in extra.as_object().unwrap() {
        cfg[k] = v.clone();
    }
    let path = dir.join(format!("{name}.json"));
    std::fs::write(&path, serde_json::to_string_pretty(&cfg).unwrap()).unwrap();
    path
}

/// Standard fixture: AOI of 512 x 512 target pixels and the three scenes.
pub fn standard(dir: &Path) -> serde_json::Value {
    write_aoi(dir, AOI_X0, AOI_Y1, AOI_PIXELS as f64 * 10.0);
    write_scenes(dir, &default_scenes())
}

pub fn oceandc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_oceandc"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .unwrap()
}
