use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CRS, north-up affine geotransform and raster dimensions.
///
/// `origin_x`/`origin_y` locate the outer (top-left) corner of pixel (0, 0);
/// rows advance towards decreasing y.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub epsg: u32,
    pub origin_x: f64,
    pub origin_y: f64,
    pub pixel_size_x: f64,
    pub pixel_size_y: f64,
    pub width: usize,
    pub height: usize,
}

impl GridSpec {
    pub fn new(
        epsg: u32,
        origin: (f64, f64),
        pixel_size: (f64, f64),
        width: usize,
        height: usize,
    ) -> Result<Self> {
        let grid = GridSpec {
            epsg,
            origin_x: origin.0,
            origin_y: origin.1,
            pixel_size_x: pixel_size.0,
            pixel_size_y: pixel_size.1,
            width,
            height,
        };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 {
            return Err(Error::Invalid(format!(
                "grid dimensions must be positive, got {}x{}",
                self.width, self.height
            )));
        }
        let sizes_ok = |v: f64| v.is_finite() && v > 0.0;
        if !sizes_ok(self.pixel_size_x) || !sizes_ok(self.pixel_size_y) {
            return Err(Error::Invalid(format!(
                "pixel sizes must be positive, got ({}, {})",
                self.pixel_size_x, self.pixel_size_y
            )));
        }
        if !self.origin_x.is_finite() || !self.origin_y.is_finite() {
            return Err(Error::Invalid("grid origin must be finite".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.width * self.height
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Map coordinate of the center of pixel (col, row).
    pub fn pixel_center(&self, col: usize, row: usize) -> (f64, f64) {
        (
            self.origin_x + (col as f64 + 0.5) * self.pixel_size_x,
            self.origin_y - (row as f64 + 0.5) * self.pixel_size_y,
        )
    }

    /// Fractional (col, row) of a map coordinate; pixel (c, r) spans
    /// `[c, c+1) x [r, r+1)`.
    pub fn map_to_pixel(&self, x: f64, y: f64) -> (f64, f64) {
        (
            (x - self.origin_x) / self.pixel_size_x,
            (self.origin_y - y) / self.pixel_size_y,
        )
    }

    /// Pixel containing a map coordinate, if it lies on the grid.
    pub fn pixel_at(&self, x: f64, y: f64) -> Option<(usize, usize)> {
        let (fc, fr) = self.map_to_pixel(x, y);
        let (c, r) = (fc.floor(), fr.floor());
        if c >= 0.0 && r >= 0.0 && (c as usize) < self.width && (r as usize) < self.height {
            Some((c as usize, r as usize))
        } else {
            None
        }
    }

    pub fn max_x(&self) -> f64 {
        self.origin_x + self.width as f64 * self.pixel_size_x
    }

    pub fn min_y(&self) -> f64 {
        self.origin_y - self.height as f64 * self.pixel_size_y
    }

    pub fn extent(&self) -> BBox {
        BBox {
            epsg: self.epsg,
            min_x: self.origin_x,
            min_y: self.min_y(),
            max_x: self.max_x(),
            max_y: self.origin_y,
        }
    }

    /// Same CRS, origin and dimensions.
    pub fn same_pixels(&self, other: &GridSpec) -> bool {
        self == other
    }
}

/// Axis-aligned box in a declared CRS, `min < max` on both axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BBox {
    pub epsg: u32,
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl BBox {
    pub fn new(epsg: u32, min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Result<Self> {
        let all_finite = [min_x, min_y, max_x, max_y].iter().all(|v| v.is_finite());
        if !all_finite || min_x >= max_x || min_y >= max_y {
            return Err(Error::EmptyGeometry);
        }
        Ok(BBox {
            epsg,
            min_x,
            min_y,
            max_x,
            max_y,
        })
    }

    pub fn intersects(&self, other: &BBox) -> bool {
        self.min_x < other.max_x
            && other.min_x < self.max_x
            && self.min_y < other.max_y
            && other.min_y < self.max_y
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }
}

/// Polygon with one or more rings; vertex order is kept as supplied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    pub epsg: u32,
    pub rings: Vec<Vec<(f64, f64)>>,
}

impl Polygon {
    /// Builds a polygon, requiring at least 3 distinct vertices overall.
    pub fn new(epsg: u32, rings: Vec<Vec<(f64, f64)>>) -> Result<Self> {
        let mut distinct: Vec<(f64, f64)> = Vec::new();
        for &p in rings.iter().flatten() {
            if !p.0.is_finite() || !p.1.is_finite() {
                return Err(Error::Invalid(format!("non-finite vertex {p:?}")));
            }
            if !distinct.contains(&p) {
                distinct.push(p);
                if distinct.len() >= 3 {
                    break;
                }
            }
        }
        if distinct.len() < 3 {
            return Err(Error::EmptyGeometry);
        }
        Ok(Polygon { epsg, rings })
    }

    pub fn vertices(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.rings.iter().flatten().copied()
    }
}
