//! Spatial harmonization: AOI box, nearest-neighbour reprojection, clipping
//! and block ("pseudo-resolution") resampling onto a shared target grid.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};

use ndarray::{s, Array2, Zip};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geodesy::{epsg_lookup, CrsTransform};
use crate::model::{BBox, GridSpec, Polygon, Raster2D, Scene, FILL};

/// Relative slack when deciding that a fractional pixel coordinate sits on
/// a pixel boundary.
const SNAP_EPS: f64 = 1e-9;

fn snap_floor(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() <= SNAP_EPS * r.abs().max(1.0) {
        r
    } else {
        v.floor()
    }
}

fn snap_ceil(v: f64) -> f64 {
    let r = v.round();
    if (v - r).abs() <= SNAP_EPS * r.abs().max(1.0) {
        r
    } else {
        v.ceil()
    }
}

/// Bounding box over every vertex of every polygon.
pub fn compute_clip_box(polygons: &[Polygon]) -> Result<BBox> {
    let first = polygons.first().ok_or(Error::EmptyGeometry)?;
    if polygons.iter().any(|p| p.epsg != first.epsg) {
        return Err(Error::Invalid("AOI polygons use different CRS".into()));
    }
    let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
    let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (x, y) in polygons.iter().flat_map(|p| p.vertices()) {
        min_x = min_x.min(x);
        min_y = min_y.min(y);
        max_x = max_x.max(x);
        max_y = max_y.max(y);
    }
    BBox::new(first.epsg, min_x, min_y, max_x, max_y)
}

/// Whether any destination pixel landed on the source extent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WarpStatus {
    Ok,
    AllFill,
}

#[derive(Debug, Clone)]
pub struct Warped {
    pub raster: Raster2D,
    pub status: WarpStatus,
}

/// Nearest-neighbour reprojection by inverse mapping: each destination pixel
/// centre is carried into the source CRS and takes the value of the source
/// pixel containing it (floor rule, half-open pixels). Destination pixels off
/// the source extent, or outside the projection domain, become fill.
pub fn reproject_raster(src: &Raster2D, dst_grid: &GridSpec) -> Result<Warped> {
    dst_grid.validate()?;
    epsg_lookup(src.grid().epsg)?;
    epsg_lookup(dst_grid.epsg)?;
    if src.grid() == dst_grid {
        return Ok(Warped {
            raster: src.clone(),
            status: WarpStatus::Ok,
        });
    }
    let transform = CrsTransform::new(dst_grid.epsg, src.grid().epsg)?;
    let sg = *src.grid();
    let sv = src.values();
    let hits = AtomicUsize::new(0);
    let mut out = Array2::from_elem((dst_grid.height, dst_grid.width), FILL);
    Zip::indexed(&mut out).par_for_each(|(row, col), v| {
        let (x, y) = dst_grid.pixel_center(col, row);
        let Ok((sx, sy)) = transform.apply(x, y) else {
            return;
        };
        if let Some((c, r)) = sg.pixel_at(sx, sy) {
            *v = sv[(r, c)];
            hits.fetch_add(1, Ordering::Relaxed);
        }
    });
    let status = if hits.into_inner() == 0 {
        WarpStatus::AllFill
    } else {
        WarpStatus::Ok
    };
    Ok(Warped {
        raster: Raster2D::from_parts(*dst_grid, out),
        status,
    })
}

/// Pixel window `(col0, row0, width, height)` of `grid` covering `bbox`,
/// expanded outward to pixel boundaries.
fn clip_window(grid: &GridSpec, bbox: &BBox) -> Result<(usize, usize, usize, usize)> {
    if bbox.epsg != grid.epsg {
        return Err(Error::Invalid(format!(
            "clip box is in EPSG:{} but the raster is in EPSG:{}",
            bbox.epsg, grid.epsg
        )));
    }
    if !grid.extent().intersects(bbox) {
        return Err(Error::EmptyIntersection);
    }
    let (c0, r0) = grid.map_to_pixel(bbox.min_x, bbox.max_y);
    let (c1, r1) = grid.map_to_pixel(bbox.max_x, bbox.min_y);
    let clamp = |v: f64, hi: usize| v.clamp(0.0, hi as f64) as usize;
    let col0 = clamp(snap_floor(c0), grid.width);
    let col1 = clamp(snap_ceil(c1), grid.width);
    let row0 = clamp(snap_floor(r0), grid.height);
    let row1 = clamp(snap_ceil(r1), grid.height);
    if col1 <= col0 || row1 <= row0 {
        return Err(Error::EmptyIntersection);
    }
    Ok((col0, row0, col1 - col0, row1 - row0))
}

fn sub_grid(grid: &GridSpec, (col0, row0, w, h): (usize, usize, usize, usize)) -> GridSpec {
    GridSpec {
        origin_x: grid.origin_x + col0 as f64 * grid.pixel_size_x,
        origin_y: grid.origin_y - row0 as f64 * grid.pixel_size_y,
        width: w,
        height: h,
        ..*grid
    }
}

/// The grid [`clip_raster`] would produce for `bbox`.
pub fn clip_grid(grid: &GridSpec, bbox: &BBox) -> Result<GridSpec> {
    Ok(sub_grid(grid, clip_window(grid, bbox)?))
}

/// Smallest pixel-aligned window of `src` containing `bbox`; values untouched.
pub fn clip_raster(src: &Raster2D, bbox: &BBox) -> Result<Raster2D> {
    let window = clip_window(src.grid(), bbox)?;
    let (col0, row0, w, h) = window;
    if (col0, row0, w, h) == (0, 0, src.width(), src.height()) {
        return Ok(src.clone());
    }
    let values = src
        .values()
        .slice(s![row0..row0 + h, col0..col0 + w])
        .to_owned();
    Ok(Raster2D::from_parts(sub_grid(src.grid(), window), values))
}

/// Integer ratio between two resolutions, if there is one.
fn integer_ratio(coarse: f64, fine: f64) -> Option<usize> {
    let ratio = coarse / fine;
    let k = ratio.round();
    (k >= 1.0 && (ratio - k).abs() <= SNAP_EPS * k).then_some(k as usize)
}

/// Splits every pixel into a `k x k` block of its value, where
/// `k = pixel_size / target_res` must be an integer on both axes.
pub fn resample_nn(src: &Raster2D, target_res: f64) -> Result<Raster2D> {
    let g = src.grid();
    if target_res <= 0.0 || !target_res.is_finite() {
        return Err(Error::Invalid(format!("target resolution {target_res} must be positive")));
    }
    let kx = integer_ratio(g.pixel_size_x, target_res)
        .ok_or(Error::NonIntegerRatio(g.pixel_size_x / target_res))?;
    let ky = integer_ratio(g.pixel_size_y, target_res)
        .ok_or(Error::NonIntegerRatio(g.pixel_size_y / target_res))?;
    if kx == 1 && ky == 1 {
        return Ok(src.clone());
    }
    let grid = GridSpec {
        pixel_size_x: target_res,
        pixel_size_y: target_res,
        width: g.width * kx,
        height: g.height * ky,
        ..*g
    };
    let sv = src.values();
    let values = Array2::from_shape_fn((grid.height, grid.width), |(r, c)| sv[(r / ky, c / kx)]);
    Ok(Raster2D::from_parts(grid, values))
}

/// Map extent of a raster carried into another CRS, sampled along its edges.
fn footprint(grid: &GridSpec, dst_epsg: u32) -> Result<BBox> {
    let t = CrsTransform::new(grid.epsg, dst_epsg)?;
    let ext = grid.extent();
    if t.is_identity() {
        return Ok(BBox { epsg: dst_epsg, ..ext });
    }
    const STEPS: usize = 32;
    let mut pts = Vec::with_capacity(4 * (STEPS + 1));
    for i in 0..=STEPS {
        let f = i as f64 / STEPS as f64;
        let x = ext.min_x + f * ext.width();
        let y = ext.min_y + f * ext.height();
        pts.extend([(x, ext.min_y), (x, ext.max_y), (ext.min_x, y), (ext.max_x, y)]);
    }
    let (mut min_x, mut min_y) = (f64::INFINITY, f64::INFINITY);
    let (mut max_x, mut max_y) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for (x, y) in pts.into_iter().filter_map(|(x, y)| t.apply(x, y).ok()) {
        min_x = min_x.min(x);
        min_y = min_y.min(y);
        max_x = max_x.max(x);
        max_y = max_y.max(y);
    }
    BBox::new(dst_epsg, min_x, min_y, max_x, max_y).map_err(|_| Error::EmptyIntersection)
}

/// Brings one band onto `target`: reproject onto a lattice aligned with the
/// target at the band's own resolution, clip to the target extent, split
/// pixels down to the target resolution, then paste into the target frame.
fn harmonize_band(src: &Raster2D, target: &GridSpec) -> Result<Raster2D> {
    if src.grid() == target {
        return Ok(src.clone());
    }
    let res = target.pixel_size_x;
    let src_crs = epsg_lookup(src.grid().epsg)?;
    let dst_crs = epsg_lookup(target.epsg)?;
    // Block splitting only applies when the native size is an integer multiple
    // of the target size in comparable units; otherwise warp straight to target.
    let k = if src_crs.is_geographic() == dst_crs.is_geographic() {
        match (
            integer_ratio(src.grid().pixel_size_x, res),
            integer_ratio(src.grid().pixel_size_y, res),
        ) {
            (Some(kx), Some(ky)) if kx == ky => kx,
            _ => 1,
        }
    } else {
        1
    };
    let coarse = k as f64 * res;
    let target_box = target.extent();

    let fp = footprint(src.grid(), target.epsg)?;
    // Lattice cells (relative to the target origin) spanned by the footprint.
    let c0 = snap_floor((fp.min_x - target.origin_x) / coarse);
    let c1 = snap_ceil((fp.max_x - target.origin_x) / coarse);
    let r0 = snap_floor((target.origin_y - fp.max_y) / coarse);
    let r1 = snap_ceil((target.origin_y - fp.min_y) / coarse);
    let lattice = GridSpec::new(
        target.epsg,
        (target.origin_x + c0 * coarse, target.origin_y - r0 * coarse),
        (coarse, coarse),
        (c1 - c0).max(1.0) as usize,
        (r1 - r0).max(1.0) as usize,
    )?;
    // Warping is pointwise, so warping onto the clipped lattice equals warping
    // the whole footprint and clipping afterwards.
    let clipped_grid = clip_grid(&lattice, &target_box)?;
    let warped = reproject_raster(src, &clipped_grid)?;
    let clipped = clip_raster(&warped.raster, &target_box)?;
    let fine = resample_nn(&clipped, res)?;

    let fg = fine.grid();
    let off_c = ((fg.origin_x - target.origin_x) / res).round() as usize;
    let off_r = ((target.origin_y - fg.origin_y) / res).round() as usize;
    let w = fg.width.min(target.width.saturating_sub(off_c));
    let h = fg.height.min(target.height.saturating_sub(off_r));
    let mut out = Array2::from_elem((target.height, target.width), FILL);
    out.slice_mut(s![off_r..off_r + h, off_c..off_c + w])
        .assign(&fine.values().slice(s![..h, ..w]));
    Ok(Raster2D::from_parts(*target, out))
}

/// Reprojects, clips and resamples every native band onto `target`.
pub fn harmonize_scene(scene: &Scene, target: &GridSpec) -> Result<Scene> {
    target.validate()?;
    if target.pixel_size_x != target.pixel_size_y {
        return Err(Error::Invalid("target grid must have square pixels".into()));
    }
    let bands: Vec<(String, Raster2D)> = scene
        .bands()
        .par_iter()
        .map(|(label, raster)| {
            harmonize_band(raster, target)
                .map(|r| (label.clone(), r))
                .map_err(|e| e.in_band(label.clone()))
        })
        .collect::<Result<_>>()?;
    let mut out = scene.clone();
    out.replace_bands(bands.into_iter().collect::<BTreeMap<_, _>>());
    Ok(out)
}
