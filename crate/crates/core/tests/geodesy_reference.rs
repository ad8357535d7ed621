//! Projection checks against values computed with PROJ (see
//! `oracles/geodesy_reference.py`).

#[path = "support/geodesy_points.rs"]
mod geodesy_points;

use geodesy_points::{FORWARD, INVERSE, ZONE_34_TO_35};
use oceandc::geodesy::{epsg_lookup, tm_forward, tm_inverse, transform_points, CrsDef};
use oceandc::Error;
use proptest::prelude::*;

fn crs(epsg: u32) -> CrsDef {
    epsg_lookup(epsg).unwrap()
}

#[test]
fn forward_matches_reference_within_a_millimetre() {
    for &(epsg, lat, lon, e, n) in FORWARD {
        let (x, y) = tm_forward(lat, lon, &crs(epsg)).unwrap();
        assert!((x - e).abs() < 1e-3, "EPSG:{epsg} ({lat}, {lon}) easting {x} vs {e}");
        assert!((y - n).abs() < 1e-3, "EPSG:{epsg} ({lat}, {lon}) northing {y} vs {n}");
    }
}

#[test]
fn inverse_matches_reference() {
    for &(epsg, e, n, lat, lon) in INVERSE {
        let (la, lo) = tm_inverse(e, n, &crs(epsg)).unwrap();
        assert!((la - lat).abs() < 1e-9, "EPSG:{epsg} lat {la} vs {lat}");
        assert!((lo - lon).abs() < 1e-9, "EPSG:{epsg} lon {lo} vs {lon}");
    }
}

#[test]
fn zone_to_zone_matches_reference() {
    let src: Vec<_> = ZONE_34_TO_35.iter().map(|p| (p.0, p.1)).collect();
    let out = transform_points(&src, 32634, 32635).unwrap();
    for (&(_, _, e, n), (x, y)) in ZONE_34_TO_35.iter().zip(out) {
        assert!((x - e).abs() < 1e-3 && (y - n).abs() < 1e-3, "({x}, {y}) vs ({e}, {n})");
    }
}

#[test]
fn geographic_to_utm_uses_lon_lat_order() {
    let out = transform_points(&[(23.6, 37.9)], 4326, 32634).unwrap();
    assert!((out[0].0 - 728602.111673377).abs() < 1e-3);
    assert!((out[0].1 - 4197907.330025521).abs() < 1e-3);
}

#[test]
fn round_trip_over_lattice() {
    let zone = crs(32634);
    let lon0 = 21.0;
    let mut worst: f64 = 0.0;
    for lat in (-80..=80).step_by(10) {
        for dlon in -6..=6 {
            let (lat, lon) = (lat as f64, lon0 + dlon as f64);
            let (e, n) = tm_forward(lat, lon, &zone).unwrap();
            let (la, lo) = tm_inverse(e, n, &zone).unwrap();
            worst = worst.max((la - lat).abs()).max((lo - lon).abs());
        }
    }
    assert!(worst < 1e-9, "worst round-trip error {worst} deg");
}

#[test]
fn domain_errors() {
    assert!(matches!(
        tm_forward(85.0, 21.0, &crs(32634)),
        Err(Error::OutOfProjectionDomain { .. })
    ));
    assert!(matches!(epsg_lookup(3857), Err(Error::UnsupportedCrs(3857))));
}

proptest! {
    #[test]
    fn round_trip_random(lat in -80.0f64..80.0, dlon in -6.0f64..6.0, zone in 1u32..=60) {
        let c = crs(32600 + zone);
        let lon0 = -183.0 + 6.0 * zone as f64;
        let lon = lon0 + dlon;
        let lon = if lon > 180.0 { lon - 360.0 } else if lon < -180.0 { lon + 360.0 } else { lon };
        let (e, n) = tm_forward(lat, lon, &c).unwrap();
        let (la, lo) = tm_inverse(e, n, &c).unwrap();
        let dl = (lo - lon + 540.0).rem_euclid(360.0) - 180.0;
        prop_assert!((la - lat).abs() < 1e-9);
        prop_assert!(dl.abs() < 1e-9);
    }

    #[test]
    fn central_meridian_has_false_easting(lat in -80.0f64..80.0) {
        let (e, _) = tm_forward(lat, 21.0, &crs(32634)).unwrap();
        prop_assert!((e - 500_000.0).abs() < 1e-6);
    }
}
