//! Scene cube assembly and time stacking.

use log::debug;
use ndarray::{s, Array4, Axis};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::indices::{brightness_temperature, compute_index, definitions, scale_to_reflectance, vci_stack};
use crate::model::{BandId, HyperCube, Raster2D, Scene, SceneCube, SliceProvenance};

/// Builds the 43-plane cube of a harmonized scene: calibrated sensor bands
/// in planes 1-16 followed by every product the sensor can support.
pub fn assemble_scene(scene: &Scene) -> Result<SceneCube> {
    let in_scene = |e: Error| e.in_scene(scene.id.clone());
    let mut bands = scene.bands().iter();
    let (_, first) = bands
        .next()
        .ok_or_else(|| in_scene(Error::Invalid("scene has no bands".into())))?;
    let grid = *first.grid();
    if let Some((label, _)) = scene.bands().iter().find(|(_, r)| r.grid() != &grid) {
        return Err(Error::GridMismatch {
            scene: format!("{} ({label})", scene.id),
        });
    }

    let calibrated: Vec<(BandId, Option<Raster2D>)> = scene
        .bands()
        .par_iter()
        .map(|(label, raw)| {
            let id = scene
                .sensor
                .band_for(label)
                .ok_or_else(|| Error::UnknownBand(label.clone()))?;
            if id == BandId::TIRS1 || id == BandId::TIRS2 {
                match brightness_temperature(raw, &scene.radiometry, id) {
                    Ok(bt) => Ok((id, Some(bt))),
                    Err(Error::MissingInput { .. }) => {
                        debug!("{}: no calibration for {}, plane left as fill", scene.id, id.name());
                        Ok((id, None))
                    }
                    Err(e) => Err(e),
                }
            } else {
                Ok((id, Some(scale_to_reflectance(raw, &scene.radiometry))))
            }
            .map_err(|e| e.in_band(label.clone()))
        })
        .collect::<Result<_>>()
        .map_err(in_scene)?;

    let mut cube = SceneCube::empty(grid, scene.acquired_at, scene.sensor, scene.id.clone());
    for (id, raster) in &calibrated {
        if let Some(r) = raster {
            cube.set_plane(*id, r)?;
        }
    }

    // Products whose inputs are all sensor bands are independent of each
    // other; the LST chain depends on NDVI and LST-1 and runs afterwards.
    let (direct, chained): (Vec<_>, Vec<_>) = definitions()
        .iter()
        .filter(|d| d.band_id != BandId::VCI)
        .partition(|d| d.inputs.iter().all(|b| b.is_sensor_band()));
    let computed: Vec<_> = direct
        .par_iter()
        .map(|d| (d.band_id, compute_index(&cube, d.band_id)))
        .collect();
    let put = |cube: &mut SceneCube, id: BandId, result: Result<Raster2D>| -> Result<()> {
        match result {
            Ok(r) => cube.set_plane(id, &r),
            Err(Error::MissingInput { band, sensor }) => {
                debug!("{}: {} needs {band}, unavailable for {sensor}", scene.id, id.name());
                Ok(())
            }
            Err(e) => Err(e.in_band(id.name()).in_scene(scene.id.clone())),
        }
    };
    for (id, result) in computed {
        put(&mut cube, id, result)?;
    }
    for d in chained {
        let result = compute_index(&cube, d.band_id);
        put(&mut cube, d.band_id, result)?;
    }
    Ok(cube)
}

/// Stacks scene cubes in acquisition order and fills the VCI plane across
/// the time axis.
pub fn stack(mut cubes: Vec<SceneCube>) -> Result<HyperCube> {
    if cubes.is_empty() {
        return Err(Error::Invalid("nothing to stack".into()));
    }
    let grid = cubes[0].grid;
    if let Some(c) = cubes.iter().find(|c| c.grid != grid) {
        return Err(Error::GridMismatch {
            scene: c.scene_id.clone(),
        });
    }
    cubes.sort_by_key(|c| c.time);
    if let Some(w) = cubes.windows(2).find(|w| w[0].time == w[1].time) {
        return Err(Error::DuplicateTimestamp(format!(
            "{} (scenes {} and {})",
            w[0].time.to_rfc3339(),
            w[0].scene_id,
            w[1].scene_id
        )));
    }
    let times = cubes.iter().map(|c| c.time).collect();
    let provenance = cubes
        .iter()
        .map(|c| SliceProvenance {
            sensor: c.sensor,
            scene_id: c.scene_id.clone(),
        })
        .collect();
    let views: Vec<_> = cubes.iter().map(|c| c.bands()).collect();
    let mut data: Array4<f32> = ndarray::stack(Axis(0), &views).expect("cubes share a grid");
    drop(views);
    drop(cubes);

    let vci = BandId::VCI.index();
    if data.dim().0 >= 2 {
        let ndvi = data.slice(s![.., BandId::NDVI.index(), .., ..]);
        let v = vci_stack(ndvi);
        data.slice_mut(s![.., vci, .., ..]).assign(&v);
    } else {
        data.slice_mut(s![.., vci, .., ..]).fill(f32::NAN);
    }
    HyperCube::new(grid, times, data, provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GridSpec, RadiometricParams, Sensor, ThermalBand, ThermalParams};
    use chrono::{TimeZone, Utc};

    fn grid(w: usize) -> GridSpec {
        GridSpec::new(32634, (0.0, 40.0), (10.0, 10.0), w, 4).unwrap()
    }

    fn s2_scene(id: &str, day: u32, w: usize) -> Scene {
        let t = Utc.with_ymd_and_hms(2017, 9, day, 9, 0, 0).unwrap();
        let mut s = Scene::new(id, Sensor::Sentinel2, t, RadiometricParams::reflectance(1e-4, 0.0)).unwrap();
        for (label, _) in Sensor::Sentinel2.band_mapping() {
            let dn = match *label {
                "B08" => 2000.0,
                "B11" => 1000.0,
                _ => 500.0 + day as f32,
            };
            s.insert_band(label, Raster2D::constant(grid(w), dn)).unwrap();
        }
        s
    }

    fn l8_scene(day: u32) -> Scene {
        let t = Utc.with_ymd_and_hms(2017, 9, day, 9, 0, 0).unwrap();
        let tb = ThermalBand {
            radiance_scale: 3.342e-4,
            radiance_offset: 0.1,
            k1: 774.8853,
            k2: 1321.0789,
        };
        let params = RadiometricParams {
            reflectance_scale: 2e-5,
            reflectance_offset: -0.1,
            thermal: Some(ThermalParams { tirs1: tb, tirs2: Some(tb) }),
        };
        let mut s = Scene::new("l8", Sensor::Landsat8, t, params).unwrap();
        for (label, _) in Sensor::Landsat8.band_mapping() {
            let dn = if label.starts_with("B1") && label.len() == 3 { 28000.0 } else { 12000.0 + day as f32 };
            s.insert_band(label, Raster2D::constant(grid(3), dn)).unwrap();
        }
        s
    }

    #[test]
    fn sentinel_coverage_and_ndwi() {
        let cube = assemble_scene(&s2_scene("a", 1, 3)).unwrap();
        for b in BandId::all() {
            let fill = cube.is_plane_all_fill(b);
            let expect_fill = [14, 15, 16, 30, 31, 32, 33, 34].contains(&b.get());
            assert_eq!(fill, expect_fill, "{}", b.name());
        }
        let ndwi = cube.plane(BandId::NDWI);
        assert!(ndwi.iter().all(|v| (v - 1.0 / 3.0).abs() < 1e-7));
    }

    #[test]
    fn landsat_coverage() {
        let cube = assemble_scene(&l8_scene(2)).unwrap();
        for b in BandId::all() {
            let expect_fill = (9..=13).contains(&b.get()) || (19..=22).contains(&b.get()) || b == BandId::VCI;
            assert_eq!(cube.is_plane_all_fill(b), expect_fill, "{}", b.name());
        }
        let bt = cube.plane(BandId::TIRS1)[(0, 0)];
        assert!(bt > 250.0 && bt < 350.0, "{bt}");
    }

    #[test]
    fn stack_orders_and_computes_vci() {
        let cubes = vec![
            assemble_scene(&s2_scene("c", 20, 3)).unwrap(),
            assemble_scene(&s2_scene("a", 1, 3)).unwrap(),
            assemble_scene(&s2_scene("b", 10, 3)).unwrap(),
        ];
        let hc = stack(cubes).unwrap();
        assert_eq!(hc.shape(), (3, 43, 4, 3));
        assert!(hc.times().windows(2).all(|w| w[0] < w[1]));
        let ids: Vec<_> = hc.provenance().iter().map(|p| p.scene_id.as_str()).collect();
        assert_eq!(ids, ["a", "b", "c"]);
        assert!(hc.plane(0, BandId::VCI).iter().all(|v| !v.is_nan()));
    }

    #[test]
    fn single_slice_vci_is_fill() {
        let hc = stack(vec![assemble_scene(&s2_scene("a", 1, 3)).unwrap()]).unwrap();
        assert_eq!(hc.len_time(), 1);
        assert!(hc.plane(0, BandId::VCI).iter().all(|v| v.is_nan()));
    }

    #[test]
    fn mixed_sensors_share_grid() {
        let hc = stack(vec![
            assemble_scene(&l8_scene(5)).unwrap(),
            assemble_scene(&s2_scene("s", 1, 3)).unwrap(),
        ])
        .unwrap();
        assert_eq!(hc.provenance()[0].sensor, Sensor::Sentinel2);
        assert_eq!(hc.provenance()[1].sensor, Sensor::Landsat8);
        assert_eq!(hc.fill_fraction(0, BandId::TIRS1), 1.0);
        assert_eq!(hc.fill_fraction(1, BandId::VRE1), 1.0);
    }

    #[test]
    fn stack_errors() {
        let a = assemble_scene(&s2_scene("a", 1, 3)).unwrap();
        let wide = assemble_scene(&s2_scene("wide", 2, 5)).unwrap();
        assert!(matches!(stack(vec![a.clone(), wide]), Err(Error::GridMismatch { scene }) if scene == "wide"));
        let mut dup = a.clone();
        dup.scene_id = "dup".into();
        assert!(matches!(stack(vec![a, dup]), Err(Error::DuplicateTimestamp(_))));
        assert!(stack(vec![]).is_err());
    }
}
