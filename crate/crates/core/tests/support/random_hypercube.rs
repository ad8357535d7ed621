//! Randomized cubes for NetCDF round trips.
#![allow(dead_code)]

use chrono::{DateTime, Duration, TimeZone, Utc};
use ndarray::Array4;
use oceandc::{GridSpec, HyperCube, Sensor, SliceProvenance, BAND_COUNT};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_cube(rng: &mut ChaCha8Rng) -> HyperCube {
    let t = rng.random_range(1..4);
    let (w, h) = (rng.random_range(1..9), rng.random_range(1..9));
    let epsg = if rng.random_bool(0.2) { 4326 } else { 32600 + rng.random_range(1..=60) };
    let grid = if epsg == 4326 {
        GridSpec::new(epsg, (23.0, 38.0), (0.0001, 0.0001), w, h).unwrap()
    } else {
        let ps = [10.0, 20.0, 30.0][rng.random_range(0..3)];
        let ox = rng.random_range(100_000..900_000) as f64;
        let oy = rng.random_range(0..9_000_000) as f64;
        GridSpec::new(epsg, (ox, oy), (ps, ps), w, h).unwrap()
    };
    let start = Utc.with_ymd_and_hms(2015, 1, 1, 0, 0, 0).unwrap() + Duration::seconds(rng.random_range(0..300_000_000));
    let times: Vec<DateTime<Utc>> = (0..t).map(|k| start + Duration::days(5 * k as i64)).collect();
    let data = Array4::from_shape_fn((t, BAND_COUNT, h, w), |_| {
        if rng.random_bool(0.15) {
            f32::NAN
        } else {
            rng.random_range(-1.0f32..400.0)
        }
    });
    let provenance = (0..t)
        .map(|k| SliceProvenance {
            sensor: [Sensor::Sentinel2, Sensor::Landsat8, Sensor::Landsat9][k % 3],
            scene_id: format!("scene_{k}"),
        })
        .collect();
    HyperCube::new(grid, times, data, provenance).unwrap()
}
