//! Independent per-pixel evaluation of every computed product.
#![allow(dead_code)]

use chrono::{TimeZone, Utc};
use ndarray::Array3;
use oceandc::{GridSpec, SceneCube, Sensor, BAND_COUNT};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const N: usize = 16;

/// Scalar oracle: returns `None` wherever the product is undefined.
pub fn oracle(id: u8, p: &dyn Fn(u8) -> f32) -> Option<f32> {
    let (blue, green, red, nir, swir1, swir2) = (p(2), p(3), p(4), p(5), p(6), p(7));
    let finite = |v: f32| if v.is_finite() { Some(v) } else { None };
    let ratio = |n: f32, d: f32| if d == 0.0 { None } else { finite(n / d) };
    let unit = |v: Option<f32>| v.filter(|x| (-1.0..=1.0).contains(x));
    let root = |v: f32| if v < 0.0 { None } else { Some(v.sqrt()) };
    let eps = |ndvi: f32| -> f32 {
        if ndvi < 0.0 {
            0.991
        } else if ndvi < 0.2 {
            0.966
        } else if ndvi <= 0.5 {
            0.973
        } else {
            0.993
        }
    };
    let lst = |t: f32, ndvi: f32, lambda: f32| ratio(t, 1.0 + (lambda * t / 14388.0) * eps(ndvi).ln());
    let inputs: &[u8] = match id {
        17 => &[5, 4],
        18 | 23 => &[5, 6],
        19 => &[9, 4],
        20 => &[10, 4],
        21 => &[11, 4],
        22 => &[12, 4],
        24 | 42 => &[5, 7],
        25 => &[5, 4, 2],
        26 => &[5, 4],
        27 => &[5, 4, 3],
        28 | 29 => &[3, 4, 2],
        30 => &[15, 17],
        31 => &[16, 17],
        32 | 33 => &[30],
        35 => &[3, 6],
        36 => &[3, 7],
        37 => &[3, 4, 5, 6],
        38 => &[3, 4, 5, 7],
        39 => &[4, 3],
        40 => &[3, 6, 5, 7],
        41 => &[4, 3, 2],
        43 => &[6, 7],
        _ => unreachable!(),
    };
    if inputs.iter().any(|b| p(*b).is_nan()) {
        return None;
    }
    match id {
        17 => unit(ratio(nir - red, nir + red)),
        18 | 23 => unit(ratio(nir - swir1, nir + swir1)),
        19..=22 => {
            let vre = p(id - 10);
            unit(ratio(vre - red, vre + red))
        }
        24 | 42 => unit(ratio(nir - swir2, nir + swir2)),
        25 => ratio(nir - (2.0 * red - blue), nir + (2.0 * red - blue)),
        26 => {
            let r = root((2.0 * nir + 1.0) * (2.0 * nir + 1.0) - 8.0 * (nir - red))?;
            finite((2.0 * nir + 1.0 - r) / 2.0)
        }
        27 => {
            let inner = root((2.0 * nir + 1.0) * (2.0 * nir + 1.0) - (6.0 * nir - 5.0 * root(red)?) - 0.5)?;
            ratio(1.5 * (1.2 * (nir - green) - 2.5 * (red - green)), inner)
        }
        28 => ratio(green - red, green + red - blue),
        29 => finite(green - 0.39 * red - 0.61 * blue),
        30 => lst(p(15), p(17), 10.895),
        31 => lst(p(16), p(17), 12.005),
        32 => finite(p(30) - 273.15),
        33 => finite(p(30) * 9.0 / 5.0 - 459.67),
        35 => unit(ratio(green - swir1, green + swir1)),
        36 => unit(ratio(green - swir2, green + swir2)),
        37 => ratio(green + red, nir + swir1),
        38 => ratio(green - red, nir + swir2),
        39 => unit(ratio(red - green, red + green)),
        40 => finite(4.0 * (green - swir1) - (0.25 * nir + 2.75 * swir2)),
        41 => ratio(red + green, blue),
        43 => unit(ratio(swir1 - swir2, swir1 + swir2)),
        _ => unreachable!(),
    }
}

pub fn random_cube(rng: &mut ChaCha8Rng) -> SceneCube {
    let grid = GridSpec::new(32634, (0.0, 160.0), (10.0, 10.0), N, N).unwrap();
    let mut data = Array3::from_elem((BAND_COUNT, N, N), f32::NAN);
    for ((b, _, _), v) in data.indexed_iter_mut() {
        let band = b + 1;
        let roll: f64 = rng.random();
        *v = if roll < 0.04 {
            f32::NAN
        } else if roll < 0.07 {
            0.0
        } else {
            match band {
                15 | 16 => rng.random_range(250.0..330.0),
                17 => rng.random_range(-1.0..1.0),
                30 => rng.random_range(250.0..330.0),
                _ => rng.random_range(-0.2..1.0),
            }
        };
    }
    let t = Utc.with_ymd_and_hms(2020, 1, 1, 0, 0, 0).unwrap();
    SceneCube::from_array(grid, t, Sensor::Landsat8, "random", data).unwrap()
}

pub fn same(a: f32, b: Option<f32>) -> bool {
    match b {
        None => a.is_nan(),
        Some(b) => a.to_bits() == b.to_bits(),
    }
}
