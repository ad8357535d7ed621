//! Declarative batch workflow: read, harmonize, assemble, stack, write.

use std::collections::{BTreeMap, HashSet};
use std::path::{Path, PathBuf};

use chrono::{DateTime, Utc};
use log::info;
use ndarray::s;
use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize};

use crate::classify::{classify, scheme_for};
use crate::cube::{assemble_scene, stack};
use crate::error::{Error, Result};
use crate::geodesy::{epsg_lookup, CrsTransform};
use crate::harmonize::{compute_clip_box, harmonize_scene};
use crate::io::geotiff::{write_geotiff, GeoTiffWriteOptions};
use crate::io::{read_geotiff, read_metadata, read_shapefile_polygons};
use crate::model::{band_id_of, BBox, BandId, GridSpec, HyperCube, Raster2D, Scene, Sensor};
use crate::netcdf::{read_netcdf, write_netcdf};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AoiConfig {
    pub path: PathBuf,
    pub epsg: u32,
}

fn de_sensor<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Sensor, D::Error> {
    let s = String::deserialize(d)?;
    s.parse().map_err(serde::de::Error::custom)
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneConfig {
    #[serde(default)]
    pub id: Option<String>,
    #[serde(deserialize_with = "de_sensor")]
    pub sensor: Sensor,
    pub acquired_at: DateTime<Utc>,
    /// Native band label to GeoTIFF path.
    pub bands: BTreeMap<String, PathBuf>,
    pub metadata: PathBuf,
}

impl SceneConfig {
    pub fn scene_id(&self) -> String {
        self.id.clone().unwrap_or_else(|| {
            format!("{}_{}", self.sensor, self.acquired_at.format("%Y%m%dT%H%M%SZ"))
        })
    }
}

/// A band given by catalogue number or name.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum BandRef {
    Id(u8),
    Name(String),
}

impl BandRef {
    pub fn resolve(&self) -> Result<BandId> {
        match self {
            BandRef::Id(id) => BandId::new(*id),
            BandRef::Name(name) => band_id_of(name),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassificationConfig {
    pub index: BandRef,
    /// GeoTIFF path; `{t}` is replaced by the time index.
    pub output: PathBuf,
    #[serde(default)]
    pub time: Option<usize>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuildConfig {
    pub aoi: AoiConfig,
    pub target_epsg: u32,
    pub target_resolution: f64,
    pub scenes: Vec<SceneConfig>,
    pub output: PathBuf,
    #[serde(default)]
    pub products: Option<Vec<BandRef>>,
    #[serde(default)]
    pub classifications: Vec<ClassificationConfig>,
    /// Fixed history attribute, for reproducible output.
    #[serde(default)]
    pub history: Option<String>,
}

fn config_err(path: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        path: path.into(),
        message: message.into(),
    }
}

impl BuildConfig {
    /// Parses JSON; errors name the JSON path of the offending value.
    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let cfg: BuildConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_err(if path.is_empty() { "$".to_string() } else { path }, e.into_inner().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file and resolves relative paths against its directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| config_err("$", format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_json(&text)?;
        if let Some(dir) = path.parent() {
            cfg.resolve_paths(dir);
        }
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.aoi.path);
        fix(&mut self.output);
        for s in &mut self.scenes {
            fix(&mut s.metadata);
            s.bands.values_mut().for_each(fix);
        }
        for c in &mut self.classifications {
            fix(&mut c.output);
        }
    }

    pub fn validate(&self) -> Result<()> {
        epsg_lookup(self.aoi.epsg).map_err(|e| config_err("aoi.epsg", e.to_string()))?;
        epsg_lookup(self.target_epsg).map_err(|e| config_err("target_epsg", e.to_string()))?;
        if !(self.target_resolution > 0.0 && self.target_resolution.is_finite()) {
            return Err(config_err("target_resolution", "must be a positive number"));
        }
        if self.scenes.is_empty() {
            return Err(config_err("scenes", "at least one scene is required"));
        }
        let mut seen_times = HashSet::new();
        let mut seen_ids = HashSet::new();
        for (i, s) in self.scenes.iter().enumerate() {
            if !seen_times.insert(s.acquired_at) {
                return Err(config_err(
                    format!("scenes[{i}].acquired_at"),
                    Error::DuplicateTimestamp(s.acquired_at.to_rfc3339()).to_string(),
                ));
            }
            if !seen_ids.insert(s.scene_id()) {
                return Err(config_err(format!("scenes[{i}].id"), format!("duplicate scene id {:?}", s.scene_id())));
            }
            if s.bands.is_empty() {
                return Err(config_err(format!("scenes[{i}].bands"), "at least one band is required"));
            }
            let mut labels = HashSet::new();
            for label in s.bands.keys() {
                if s.sensor.band_for(label).is_none() {
                    return Err(config_err(
                        format!("scenes[{i}].bands.{label}"),
                        format!("{label:?} is not a {} band", s.sensor),
                    ));
                }
                if !labels.insert(label.trim().to_ascii_uppercase()) {
                    return Err(config_err(format!("scenes[{i}].bands.{label}"), "band listed twice"));
                }
            }
        }
        for (k, p) in self.products.iter().flatten().enumerate() {
            p.resolve().map_err(|e| config_err(format!("products[{k}]"), e.to_string()))?;
        }
        let t = self.scenes.len();
        for (k, c) in self.classifications.iter().enumerate() {
            let id = c
                .index
                .resolve()
                .map_err(|e| config_err(format!("classifications[{k}].index"), e.to_string()))?;
            scheme_for(id, Sensor::Sentinel2)
                .map_err(|e| config_err(format!("classifications[{k}].index"), e.to_string()))?;
            if self.products().is_some_and(|p| !p.contains(&id)) {
                return Err(config_err(
                    format!("classifications[{k}].index"),
                    format!("{} is not among the selected products", id.name()),
                ));
            }
            match c.time {
                Some(ti) if ti >= t => {
                    return Err(config_err(
                        format!("classifications[{k}].time"),
                        format!("time index {ti} out of range for {t} scenes"),
                    ))
                }
                None if t > 1 && !c.output.to_string_lossy().contains("{t}") => {
                    return Err(config_err(
                        format!("classifications[{k}].output"),
                        "needs a {t} placeholder or an explicit time when there are several scenes",
                    ))
                }
                _ => {}
            }
        }
        Ok(())
    }

    /// Selected product bands, `None` meaning all.
    pub fn products(&self) -> Option<Vec<BandId>> {
        self.products
            .as_ref()
            .map(|ps| ps.iter().filter_map(|p| p.resolve().ok()).collect())
    }
}

/// Target grid: the AOI box carried into the target CRS and snapped
/// outward to multiples of the resolution.
pub fn target_grid(aoi: &BBox, target_epsg: u32, res: f64) -> Result<GridSpec> {
    let t = CrsTransform::new(aoi.epsg, target_epsg)?;
    const STEPS: usize = 16;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for i in 0..=STEPS {
        let f = i as f64 / STEPS as f64;
        let x = aoi.min_x + f * aoi.width();
        let y = aoi.min_y + f * aoi.height();
        for (px, py) in [(x, aoi.min_y), (x, aoi.max_y), (aoi.min_x, y), (aoi.max_x, y)] {
            let (tx, ty) = t.apply(px, py)?;
            xs.push(tx);
            ys.push(ty);
        }
    }
    let fold = |v: &[f64]| v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), x| (a.min(*x), b.max(*x)));
    let (min_x, max_x) = fold(&xs);
    let (min_y, max_y) = fold(&ys);
    let c0 = (min_x / res).floor();
    let c1 = (max_x / res).ceil();
    let r0 = (max_y / res).ceil();
    let r1 = (min_y / res).floor();
    GridSpec::new(
        target_epsg,
        (c0 * res, r0 * res),
        (res, res),
        ((c1 - c0) as usize).max(1),
        ((r0 - r1) as usize).max(1),
    )
}

fn load_scene(cfg: &SceneConfig) -> Result<Scene> {
    let params = read_metadata(&cfg.metadata, cfg.sensor)?;
    let mut scene = Scene::new(cfg.scene_id(), cfg.sensor, cfg.acquired_at, params)?;
    let rasters: Vec<(String, Raster2D)> = cfg
        .bands
        .par_iter()
        .map(|(label, path)| {
            read_geotiff(path)
                .map(|r| (label.clone(), r))
                .map_err(|e| e.in_band(label.clone()))
        })
        .collect::<Result<_>>()?;
    for (label, raster) in rasters {
        scene.insert_band(&label, raster).map_err(|e| e.in_band(label))?;
    }
    Ok(scene)
}

#[derive(Debug, Clone, Serialize)]
pub struct SliceSummary {
    pub time: DateTime<Utc>,
    pub sensor: Sensor,
    pub scene_id: String,
    /// Fill percentage per band, indexed by band number - 1.
    pub fill_percent: Vec<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CubeSummary {
    pub shape: [usize; 4],
    pub grid: GridSpec,
    pub slices: Vec<SliceSummary>,
}

impl CubeSummary {
    pub fn of(cube: &HyperCube) -> Self {
        let (t, b, h, w) = cube.shape();
        let slices = (0..t)
            .map(|k| SliceSummary {
                time: cube.times()[k],
                sensor: cube.provenance()[k].sensor,
                scene_id: cube.provenance()[k].scene_id.clone(),
                fill_percent: BandId::all().map(|band| 100.0 * cube.fill_fraction(k, band)).collect(),
            })
            .collect();
        CubeSummary {
            shape: [t, b, h, w],
            grid: *cube.grid(),
            slices,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct BuildSummary {
    pub output: PathBuf,
    #[serde(flatten)]
    pub cube: CubeSummary,
    pub classifications: Vec<PathBuf>,
}

/// History attribute: the configured value, else derived from
/// `SOURCE_DATE_EPOCH`, else the current time.
pub fn history_for(cfg: &BuildConfig) -> String {
    if let Some(h) = &cfg.history {
        return h.clone();
    }
    let when = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse::<i64>().ok())
        .and_then(|s| DateTime::from_timestamp(s, 0))
        .unwrap_or_else(Utc::now);
    format!("{} oceandc build", when.format("%Y-%m-%dT%H:%M:%SZ"))
}

/// Runs the whole workflow in memory and returns the cube.
pub fn build_cube(cfg: &BuildConfig) -> Result<HyperCube> {
    let polygons = read_shapefile_polygons(&cfg.aoi.path, cfg.aoi.epsg).map_err(|e| e.in_stage("aoi"))?;
    let aoi = compute_clip_box(&polygons).map_err(|e| e.in_stage("aoi"))?;
    let target = target_grid(&aoi, cfg.target_epsg, cfg.target_resolution).map_err(|e| e.in_stage("aoi"))?;
    info!(
        "target grid EPSG:{} {}x{} at {}",
        target.epsg, target.width, target.height, target.pixel_size_x
    );

    let cubes = cfg
        .scenes
        .par_iter()
        .map(|sc| {
            let id = sc.scene_id();
            let scene = load_scene(sc).map_err(|e| e.in_scene(id.clone()).in_stage("read"))?;
            info!("{id}: read {} bands", scene.bands().len());
            let scene = harmonize_scene(&scene, &target).map_err(|e| e.in_scene(id.clone()).in_stage("harmonize"))?;
            assemble_scene(&scene).map_err(|e| e.in_stage("assemble"))
        })
        .collect::<Result<Vec<_>>>()?;
    let mut cube = stack(cubes).map_err(|e| e.in_stage("stack"))?;

    if let Some(selected) = cfg.products() {
        let data = cube.data_mut();
        for band in BandId::products().filter(|b| !selected.contains(b)) {
            data.slice_mut(s![.., band.index(), .., ..]).fill(f32::NAN);
        }
    }
    Ok(cube)
}

/// Builds the cube, writes it and any requested class rasters.
pub fn run_build(cfg: &BuildConfig) -> Result<BuildSummary> {
    let cube = build_cube(cfg)?;
    write_netcdf(&cube, &cfg.output, &history_for(cfg)).map_err(|e| e.in_stage("write"))?;
    info!("wrote {}", cfg.output.display());

    let mut written = Vec::new();
    for c in &cfg.classifications {
        let id = c.index.resolve()?;
        let times: Vec<usize> = match c.time {
            Some(t) => vec![t],
            None => (0..cube.len_time()).collect(),
        };
        for t in times {
            let path = PathBuf::from(c.output.to_string_lossy().replace("{t}", &t.to_string()));
            let raster = classify_slice(&cube, id, t).map_err(|e| e.in_stage("classify"))?;
            write_geotiff(&path, &raster, &GeoTiffWriteOptions::default()).map_err(|e| e.in_stage("classify"))?;
            written.push(path);
        }
    }
    Ok(BuildSummary {
        output: cfg.output.clone(),
        cube: CubeSummary::of(&cube),
        classifications: written,
    })
}

/// Class-code raster of product `index` at time step `t`, using the scheme
/// of the slice's sensor.
pub fn classify_slice(cube: &HyperCube, index: BandId, t: usize) -> Result<Raster2D> {
    if t >= cube.len_time() {
        return Err(Error::Invalid(format!(
            "time index {t} out of range (cube has {} steps)",
            cube.len_time()
        )));
    }
    let scheme = scheme_for(index, cube.provenance()[t].sensor)?;
    classify(&cube.raster(t, index), index, &scheme)
}

/// Summary of a cube file.
pub fn inspect_cube(path: impl AsRef<Path>) -> Result<CubeSummary> {
    Ok(CubeSummary::of(&read_netcdf(path)?))
}
