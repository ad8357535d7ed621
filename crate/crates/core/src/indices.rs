//! Spectral products 17-43: normalized differences, water and oil-spill
//! ratios, land surface temperature and the vegetation condition index.
//!
//! Every recipe is a total per-pixel map evaluated in `f32`. A fill input,
//! a zero denominator, a negative square-root argument or a result outside
//! the product's valid range all yield fill.

use ndarray::{Array2, ArrayView2, Axis, Zip};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::{is_fill, BandId, RadiometricParams, Raster2D, SceneCube, FILL};

/// Reflectance values outside this window are treated as invalid.
pub const REFLECTANCE_WINDOW: (f64, f64) = (-0.2, 1.6);

/// Effective wavelengths of TIRS-1 and TIRS-2 in micrometres.
pub const TIRS1_WAVELENGTH: f32 = 10.895;
pub const TIRS2_WAVELENGTH: f32 = 12.005;
/// h·c / k_B in µm·K.
pub const RHO: f32 = 14388.0;

#[derive(Debug, Clone, PartialEq)]
pub struct IndexDefinition {
    pub band_id: BandId,
    /// Operands in the order the recipe consumes them.
    pub inputs: &'static [BandId],
    /// Inclusive bounds; values outside become fill.
    pub valid_range: Option<(f32, f32)>,
}

const UNIT: Option<(f32, f32)> = Some((-1.0, 1.0));

macro_rules! def {
    ($id:ident, [$($input:ident),+], $range:expr) => {
        IndexDefinition {
            band_id: BandId::$id,
            inputs: &[$(BandId::$input),+],
            valid_range: $range,
        }
    };
}

static DEFINITIONS: [IndexDefinition; 27] = [
    def!(NDVI, [NIR, RED], UNIT),
    def!(NDWI, [NIR, SWIR1], UNIT),
    def!(NDVI_VRE1, [VRE1, RED], UNIT),
    def!(NDVI_VRE2, [VRE2, RED], UNIT),
    def!(NDVI_VRE3, [VRE3, RED], UNIT),
    def!(NDVI_VRE4, [VRE4, RED], UNIT),
    def!(LSWI1, [NIR, SWIR1], UNIT),
    def!(LSWI2, [NIR, SWIR2], UNIT),
    def!(ARVI, [NIR, RED, BLUE], None),
    def!(MSAVI2, [NIR, RED], None),
    def!(MTVI2, [NIR, RED, GREEN], None),
    def!(VARI, [GREEN, RED, BLUE], None),
    def!(TGI, [GREEN, RED, BLUE], None),
    def!(LST1, [TIRS1, NDVI], None),
    def!(LST2, [TIRS2, NDVI], None),
    def!(LST_CELSIUS, [LST1], None),
    def!(LST_FAHRENHEIT, [LST1], None),
    def!(VCI, [NDVI], Some((0.0, 100.0))),
    def!(MNDWI1, [GREEN, SWIR1], UNIT),
    def!(MNDWI2, [GREEN, SWIR2], UNIT),
    def!(WRI1, [GREEN, RED, NIR, SWIR1], None),
    def!(WRI2, [GREEN, RED, NIR, SWIR2], None),
    def!(NDTI, [RED, GREEN], UNIT),
    def!(AWEI, [GREEN, SWIR1, NIR, SWIR2], None),
    def!(OSI, [RED, GREEN, BLUE], None),
    def!(NBR1, [NIR, SWIR2], UNIT),
    def!(NBR2, [SWIR1, SWIR2], UNIT),
];

/// All 27 product definitions in band order.
pub fn definitions() -> &'static [IndexDefinition] {
    &DEFINITIONS
}

pub fn definition(id: BandId) -> Result<&'static IndexDefinition> {
    if !id.is_product() {
        return Err(Error::UnknownBand(id.to_string()));
    }
    Ok(&DEFINITIONS[id.index() - 16])
}

fn div(n: f32, d: f32) -> f32 {
    if d == 0.0 {
        FILL
    } else {
        n / d
    }
}

fn sqrt(v: f32) -> f32 {
    if v < 0.0 {
        FILL
    } else {
        v.sqrt()
    }
}

fn nd(a: f32, b: f32) -> f32 {
    div(a - b, a + b)
}

/// Surface emissivity from NDVI thresholds.
pub fn emissivity(ndvi: f32) -> f32 {
    if ndvi < 0.0 {
        0.991
    } else if ndvi < 0.2 {
        0.966
    } else if ndvi <= 0.5 {
        0.973
    } else {
        0.993
    }
}

/// Emissivity-corrected land surface temperature.
pub fn lst_kelvin(bt: f32, ndvi: f32, wavelength: f32) -> f32 {
    div(bt, 1.0 + (wavelength * bt / RHO) * emissivity(ndvi).ln())
}

fn recipe(id: BandId, x: &[f32]) -> f32 {
    match id {
        BandId::NDVI
        | BandId::NDWI
        | BandId::NDVI_VRE1
        | BandId::NDVI_VRE2
        | BandId::NDVI_VRE3
        | BandId::NDVI_VRE4
        | BandId::LSWI1
        | BandId::LSWI2
        | BandId::MNDWI1
        | BandId::MNDWI2
        | BandId::NDTI
        | BandId::NBR1
        | BandId::NBR2 => nd(x[0], x[1]),
        BandId::ARVI => {
            let rb = 2.0 * x[1] - x[2];
            div(x[0] - rb, x[0] + rb)
        }
        BandId::MSAVI2 => {
            let t = 2.0 * x[0] + 1.0;
            (t - sqrt(t * t - 8.0 * (x[0] - x[1]))) / 2.0
        }
        BandId::MTVI2 => {
            let (nir, red, green) = (x[0], x[1], x[2]);
            let t = 2.0 * nir + 1.0;
            let num = 1.5 * (1.2 * (nir - green) - 2.5 * (red - green));
            div(num, sqrt(t * t - (6.0 * nir - 5.0 * sqrt(red)) - 0.5))
        }
        BandId::VARI => div(x[0] - x[1], x[0] + x[1] - x[2]),
        BandId::TGI => x[0] - 0.39 * x[1] - 0.61 * x[2],
        BandId::LST1 => lst_kelvin(x[0], x[1], TIRS1_WAVELENGTH),
        BandId::LST2 => lst_kelvin(x[0], x[1], TIRS2_WAVELENGTH),
        BandId::LST_CELSIUS => x[0] - 273.15,
        BandId::LST_FAHRENHEIT => x[0] * 9.0 / 5.0 - 459.67,
        BandId::WRI1 => div(x[0] + x[1], x[2] + x[3]),
        BandId::WRI2 => div(x[0] - x[1], x[2] + x[3]),
        BandId::AWEI => 4.0 * (x[0] - x[1]) - (0.25 * x[2] + 2.75 * x[3]),
        BandId::OSI => div(x[0] + x[1], x[2]),
        _ => FILL,
    }
}

/// Evaluates one product at one pixel; `inputs` follow
/// [`IndexDefinition::inputs`].
pub fn evaluate_pixel(def: &IndexDefinition, inputs: &[f32]) -> f32 {
    if inputs.iter().any(|v| is_fill(*v)) {
        return FILL;
    }
    let v = recipe(def.band_id, inputs);
    if !v.is_finite() {
        return FILL;
    }
    match def.valid_range {
        Some((lo, hi)) if v < lo || v > hi => FILL,
        _ => v,
    }
}

/// Applies a per-pixel recipe over aligned input planes, row-parallel.
pub fn evaluate_planes(def: &IndexDefinition, planes: &[ArrayView2<'_, f32>]) -> Array2<f32> {
    let dim = planes[0].dim();
    let mut out = Array2::from_elem(dim, FILL);
    out.axis_iter_mut(Axis(0))
        .into_par_iter()
        .enumerate()
        .for_each(|(r, mut row)| {
            let mut buf = [0f32; 4];
            for (c, v) in row.iter_mut().enumerate() {
                for (b, p) in buf.iter_mut().zip(planes) {
                    *b = p[(r, c)];
                }
                *v = evaluate_pixel(def, &buf[..planes.len()]);
            }
        });
    out
}

/// DN to reflectance; results outside [`REFLECTANCE_WINDOW`] become fill.
pub fn scale_to_reflectance(raster: &Raster2D, params: &RadiometricParams) -> Raster2D {
    let (scale, offset) = (params.reflectance_scale, params.reflectance_offset);
    let (lo, hi) = REFLECTANCE_WINDOW;
    let values = raster.values().mapv(|dn| {
        if is_fill(dn) {
            return FILL;
        }
        let r = dn as f64 * scale + offset;
        if (lo..=hi).contains(&r) {
            r as f32
        } else {
            FILL
        }
    });
    Raster2D::from_parts(*raster.grid(), values)
}

/// Thermal DN to brightness temperature in Kelvin for TIRS-1 or TIRS-2.
pub fn brightness_temperature(tirs: &Raster2D, params: &RadiometricParams, band: BandId) -> Result<Raster2D> {
    let missing = || Error::MissingInput {
        band: band.name().to_string(),
        sensor: "scene without thermal calibration".into(),
    };
    let thermal = params.thermal.as_ref().ok_or_else(missing)?;
    let cal = match band {
        BandId::TIRS1 => &thermal.tirs1,
        BandId::TIRS2 => thermal.tirs2.as_ref().ok_or_else(missing)?,
        other => return Err(Error::Invalid(format!("{other} is not a thermal band"))),
    };
    let values = tirs.values().mapv(|dn| {
        if is_fill(dn) {
            return FILL;
        }
        let l = cal.radiance_scale * dn as f64 + cal.radiance_offset;
        if l <= 0.0 {
            return FILL;
        }
        let t = cal.k2 / (cal.k1 / l + 1.0).ln();
        if t.is_finite() {
            t as f32
        } else {
            FILL
        }
    });
    Ok(Raster2D::from_parts(*tirs.grid(), values))
}

/// LST-1, LST-2, LST-Celsius and LST-Fahrenheit (IDs 30-33). Without a
/// TIRS-2 temperature LST-2 is all fill.
pub fn lst_products(bt1: &Raster2D, bt2: Option<&Raster2D>, ndvi: &Raster2D) -> Result<[Raster2D; 4]> {
    let grid = *bt1.grid();
    for r in std::iter::once(ndvi).chain(bt2) {
        if r.grid() != &grid {
            return Err(Error::GridMismatch {
                scene: "thermal inputs".into(),
            });
        }
    }
    let run = |id: BandId, planes: &[ArrayView2<'_, f32>]| {
        Raster2D::from_parts(grid, evaluate_planes(definition(id).expect("product id"), planes))
    };
    let lst1 = run(BandId::LST1, &[bt1.values().view(), ndvi.values().view()]);
    let lst2 = match bt2 {
        Some(bt2) => run(BandId::LST2, &[bt2.values().view(), ndvi.values().view()]),
        None => Raster2D::filled(grid),
    };
    let celsius = run(BandId::LST_CELSIUS, &[lst1.values().view()]);
    let fahrenheit = run(BandId::LST_FAHRENHEIT, &[lst1.values().view()]);
    Ok([lst1, lst2, celsius, fahrenheit])
}

/// Computes product `id` from the planes already present in `cube`.
///
/// VCI needs a time series and reports [`Error::InsufficientHistory`] here;
/// see [`vci`].
pub fn compute_index(cube: &SceneCube, id: BandId) -> Result<Raster2D> {
    let def = definition(id)?;
    if id == BandId::VCI {
        return Err(Error::InsufficientHistory);
    }
    if let Some(missing) = def.inputs.iter().find(|b| cube.is_plane_all_fill(**b)) {
        return Err(Error::MissingInput {
            band: missing.name().to_string(),
            sensor: cube.sensor.to_string(),
        });
    }
    let planes: Vec<_> = def.inputs.iter().map(|b| cube.plane(*b)).collect();
    Ok(Raster2D::from_parts(cube.grid, evaluate_planes(def, &planes)))
}

fn vci_pixel(series: &[f32], out: &mut [f32]) {
    let (mut lo, mut hi, mut n) = (f32::INFINITY, f32::NEG_INFINITY, 0usize);
    for &v in series.iter().filter(|v| !is_fill(**v)) {
        lo = lo.min(v);
        hi = hi.max(v);
        n += 1;
    }
    for (o, &v) in out.iter_mut().zip(series) {
        *o = if n < 2 || hi == lo || is_fill(v) {
            FILL
        } else {
            100.0 * (v - lo) / (hi - lo)
        };
    }
}

/// Vegetation condition index per time step from a time-ordered NDVI series.
pub fn vci(ndvi_series: &[Raster2D]) -> Result<Vec<Raster2D>> {
    if ndvi_series.len() < 2 {
        return Err(Error::InsufficientHistory);
    }
    let grid = *ndvi_series[0].grid();
    if let Some(k) = ndvi_series.iter().position(|r| r.grid() != &grid) {
        return Err(Error::GridMismatch {
            scene: format!("time step {k}"),
        });
    }
    let views: Vec<_> = ndvi_series.iter().map(|r| r.values().view()).collect();
    let stacked = ndarray::stack(Axis(0), &views).expect("equal shapes");
    let out = vci_stack(stacked.view());
    Ok(out
        .outer_iter()
        .map(|plane| Raster2D::from_parts(grid, plane.to_owned()))
        .collect())
}

/// VCI over a `(time, y, x)` NDVI stack.
pub(crate) fn vci_stack(ndvi: ndarray::ArrayView3<'_, f32>) -> ndarray::Array3<f32> {
    let mut out = ndarray::Array3::from_elem(ndvi.dim(), FILL);
    let t = ndvi.dim().0;
    Zip::from(out.lanes_mut(Axis(0)))
        .and(ndvi.lanes(Axis(0)))
        .par_for_each(|mut o, s| {
            let series: Vec<f32> = s.to_vec();
            let mut buf = vec![FILL; t];
            vci_pixel(&series, &mut buf);
            o.iter_mut().zip(buf).for_each(|(d, v)| *d = v);
        });
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GridSpec, Sensor, ThermalBand, ThermalParams};
    use approx::assert_abs_diff_eq;

    fn px(id: BandId, inputs: &[f32]) -> f32 {
        evaluate_pixel(definition(id).unwrap(), inputs)
    }

    #[test]
    fn definitions_are_in_band_order() {
        for (k, d) in definitions().iter().enumerate() {
            assert_eq!(d.band_id.get() as usize, 17 + k);
            assert!(!d.inputs.is_empty());
        }
        assert!(matches!(definition(BandId::RED), Err(Error::UnknownBand(_))));
    }

    #[test]
    fn spot_values() {
        assert_abs_diff_eq!(px(BandId::NDWI, &[0.2, 0.1]), 1.0 / 3.0, epsilon = 1e-7);
        assert_eq!(px(BandId::NDWI, &[0.3, 0.3]), 0.0);
        assert_eq!(px(BandId::WRI2, &[0.1, 0.1, 0.3, 0.2]), 0.0);
        assert_eq!(px(BandId::OSI, &[0.1, 0.1, 0.1]), 2.0);
        assert_eq!(px(BandId::MSAVI2, &[1.0, 0.0]), 1.0);
        assert!(px(BandId::NDWI, &[0.0, 0.0]).is_nan());
        assert!(px(BandId::NDWI, &[FILL, 0.1]).is_nan());
    }

    #[test]
    fn wri_variants() {
        assert_abs_diff_eq!(px(BandId::WRI1, &[0.1, 0.2, 0.2, 0.1]), 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(px(BandId::WRI2, &[0.3, 0.1, 0.2, 0.2]), 0.5, epsilon = 1e-6);
        assert!(px(BandId::WRI1, &[0.1, 0.2, 0.0, 0.0]).is_nan());
    }

    #[test]
    fn negative_radicand_is_fill() {
        assert!(px(BandId::MTVI2, &[0.3, -0.1, 0.2]).is_nan());
    }

    #[test]
    fn reflectance_scaling() {
        let g = GridSpec::new(32634, (0.0, 3.0), (1.0, 1.0), 3, 1).unwrap();
        let dn = Raster2D::from_vec(g, vec![10000.0, FILL, 65535.0]).unwrap();
        let r = scale_to_reflectance(&dn, &RadiometricParams::reflectance(0.0001, 0.0));
        assert_eq!(r.get(0, 0), 1.0);
        assert!(r.get(1, 0).is_nan());
        let l = scale_to_reflectance(&dn, &RadiometricParams::reflectance(0.0000275, -0.2));
        assert!(l.get(2, 0).is_nan());
    }

    fn landsat_params(k1: f64, k2: f64) -> RadiometricParams {
        RadiometricParams {
            reflectance_scale: 2e-5,
            reflectance_offset: -0.1,
            thermal: Some(ThermalParams {
                tirs1: ThermalBand {
                    radiance_scale: 1.0,
                    radiance_offset: 0.0,
                    k1,
                    k2,
                },
                tirs2: None,
            }),
        }
    }

    #[test]
    fn brightness_temperature_values() {
        let g = GridSpec::new(32634, (0.0, 3.0), (1.0, 1.0), 3, 1).unwrap();
        let p = landsat_params(774.8853, 1321.0789);
        let dn = Raster2D::from_vec(g, vec![10.0, 774.8853, 0.0]).unwrap();
        let bt = brightness_temperature(&dn, &p, BandId::TIRS1).unwrap();
        assert_eq!(bt.get(0, 0), 302.794_701_561_071_86_f64 as f32);
        assert_abs_diff_eq!(bt.get(1, 0) as f64, 1321.0789 / 2f64.ln(), epsilon = 1e-4);
        assert!(bt.get(2, 0).is_nan());
        assert!(matches!(
            brightness_temperature(&dn, &p, BandId::TIRS2),
            Err(Error::MissingInput { .. })
        ));
        let s2 = RadiometricParams::reflectance(1e-4, 0.0);
        assert!(s2.validate(Sensor::Sentinel2).is_ok());
        assert!(brightness_temperature(&dn, &s2, BandId::TIRS1).is_err());
    }

    #[test]
    fn lst_conversions() {
        assert!(lst_kelvin(300.0, 0.3, TIRS1_WAVELENGTH) > 300.0);
        assert_abs_diff_eq!(px(BandId::LST_CELSIUS, &[300.0]), 26.85, epsilon = 1e-4);
        assert_abs_diff_eq!(px(BandId::LST_FAHRENHEIT, &[300.0]), 80.33, epsilon = 1e-4);
        let g = GridSpec::new(32634, (0.0, 1.0), (1.0, 1.0), 1, 1).unwrap();
        let bt = Raster2D::constant(g, 300.0);
        let ndvi = Raster2D::constant(g, 0.7);
        let [l1, l2, c, f] = lst_products(&bt, None, &ndvi).unwrap();
        let expect = 300.0 / (1.0 + (10.895f32 * 300.0 / 14388.0) * 0.993f32.ln());
        assert_eq!(l1.get(0, 0), expect);
        assert!(l2.is_all_fill());
        assert_eq!(c.get(0, 0), expect - 273.15);
        assert_eq!(f.get(0, 0), expect * 9.0 / 5.0 - 459.67);
    }

    #[test]
    fn emissivity_thresholds() {
        assert_eq!(emissivity(-0.1), 0.991);
        assert_eq!(emissivity(0.0), 0.966);
        assert_eq!(emissivity(0.2), 0.973);
        assert_eq!(emissivity(0.5), 0.973);
        assert_eq!(emissivity(0.51), 0.993);
    }

    #[test]
    fn vci_examples() {
        let g = GridSpec::new(32634, (0.0, 1.0), (1.0, 1.0), 1, 1).unwrap();
        let series = |vals: &[f32]| vals.iter().map(|v| Raster2D::constant(g, *v)).collect::<Vec<_>>();
        let out = vci(&series(&[0.2, 0.4, 0.6])).unwrap();
        assert_abs_diff_eq!(out[1].get(0, 0), 50.0, epsilon = 1e-4);
        assert_eq!(out[0].get(0, 0), 0.0);
        assert_eq!(out[2].get(0, 0), 100.0);
        assert!(vci(&series(&[0.3, 0.3])).unwrap().iter().all(|r| r.is_all_fill()));
        let one_valid = vec![Raster2D::constant(g, 0.3), Raster2D::filled(g), Raster2D::filled(g)];
        assert!(vci(&one_valid).unwrap().iter().all(|r| r.is_all_fill()));
        assert!(matches!(vci(&series(&[0.3])), Err(Error::InsufficientHistory)));
    }
}
