use ndarray::Array2;

use super::grid::GridSpec;
use crate::error::{Error, Result};

/// Fill sentinel for every raster plane.
pub const FILL: f32 = f32::NAN;

#[inline]
pub fn is_fill(v: f32) -> bool {
    v.is_nan()
}

/// One band on a georeferenced grid, stored row-major as `(row, col)`.
#[derive(Debug, Clone)]
pub struct Raster2D {
    grid: GridSpec,
    values: Array2<f32>,
}

impl Raster2D {
    /// Wraps values; dimensions must match the grid and non-fill values must
    /// be finite.
    pub fn new(grid: GridSpec, values: Array2<f32>) -> Result<Self> {
        grid.validate()?;
        if values.dim() != (grid.height, grid.width) {
            return Err(Error::Invalid(format!(
                "values are {:?} but grid is {}x{} (rows x cols)",
                values.dim(),
                grid.height,
                grid.width
            )));
        }
        if values.iter().any(|v| v.is_infinite()) {
            return Err(Error::Invalid("raster holds infinite values".into()));
        }
        Ok(Raster2D { grid, values })
    }

    pub fn from_vec(grid: GridSpec, values: Vec<f32>) -> Result<Self> {
        let arr = Array2::from_shape_vec((grid.height, grid.width), values)
            .map_err(|e| Error::Invalid(e.to_string()))?;
        Raster2D::new(grid, arr)
    }

    pub fn filled(grid: GridSpec) -> Self {
        Raster2D {
            values: Array2::from_elem((grid.height, grid.width), FILL),
            grid,
        }
    }

    pub fn constant(grid: GridSpec, value: f32) -> Self {
        let value = if value.is_finite() { value } else { FILL };
        Raster2D {
            values: Array2::from_elem((grid.height, grid.width), value),
            grid,
        }
    }

    /// Builds a raster from `f(col, row)`; non-finite results become fill.
    pub fn from_fn(grid: GridSpec, mut f: impl FnMut(usize, usize) -> f32) -> Self {
        let values = Array2::from_shape_fn((grid.height, grid.width), |(r, c)| {
            let v = f(c, r);
            if v.is_finite() {
                v
            } else {
                FILL
            }
        });
        Raster2D { grid, values }
    }

    /// Trusted constructor for kernels that already guarantee the invariants.
    pub(crate) fn from_parts(grid: GridSpec, values: Array2<f32>) -> Self {
        debug_assert_eq!(values.dim(), (grid.height, grid.width));
        Raster2D { grid, values }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &Array2<f32> {
        &self.values
    }

    pub fn into_values(self) -> Array2<f32> {
        self.values
    }

    pub fn width(&self) -> usize {
        self.grid.width
    }

    pub fn height(&self) -> usize {
        self.grid.height
    }

    pub fn get(&self, col: usize, row: usize) -> f32 {
        self.values[(row, col)]
    }

    pub fn fill_count(&self) -> usize {
        self.values.iter().filter(|v| is_fill(**v)).count()
    }

    pub fn is_all_fill(&self) -> bool {
        self.values.iter().all(|v| is_fill(*v))
    }

    pub fn fill_fraction(&self) -> f64 {
        self.fill_count() as f64 / self.grid.len() as f64
    }

    /// Bitwise comparison of grid and values; fill compares equal to fill.
    pub fn bit_eq(&self, other: &Raster2D) -> bool {
        self.grid == other.grid
            && self
                .values
                .iter()
                .zip(other.values.iter())
                .all(|(a, b)| a.to_bits() == b.to_bits())
    }
}
