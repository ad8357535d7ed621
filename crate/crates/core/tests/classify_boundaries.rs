//! Every published interval boundary, probed on both sides.

use oceandc::classify::{classify, scheme_for, ClassScheme};
use oceandc::{BandId, GridSpec, Raster2D, Sensor};
use proptest::prelude::*;

fn code(index: BandId, sensor: Sensor, v: f32) -> u8 {
    let g = GridSpec::new(32634, (0.0, 1.0), (1.0, 1.0), 1, 1).unwrap();
    let r = Raster2D::from_vec(g, vec![v]).unwrap();
    classify(&r, index, &scheme_for(index, sensor).unwrap()).unwrap().get(0, 0) as u8
}

fn below(v: f32) -> f32 {
    f32::from_bits(if v > 0.0 { v.to_bits() - 1 } else if v < 0.0 { v.to_bits() + 1 } else { (-f32::MIN_POSITIVE).to_bits() })
}

/// (value at the boundary, code just below, code at/above)
type Case = (f32, u8, u8);

fn check(index: BandId, sensor: Sensor, cases: &[Case]) -> usize {
    for &(b, lo, hi) in cases {
        assert_eq!(code(index, sensor, below(b)), lo, "{} {sensor} just below {b}", index.name());
        assert_eq!(code(index, sensor, b), hi, "{} {sensor} at {b}", index.name());
    }
    cases.len() * 2
}

#[test]
fn ndwi_boundaries() {
    let n = check(
        BandId::NDWI,
        Sensor::Sentinel2,
        &[(-1.0, 0, 1), (-0.3, 1, 2), (0.0, 2, 3), (0.2, 3, 4), (1.0, 4, 4)],
    );
    assert_eq!(code(BandId::NDWI, Sensor::Landsat8, 1.0001), 0);
    assert_eq!(n, 10);
}

#[test]
fn wri_boundaries() {
    check(
        BandId::WRI2,
        Sensor::Landsat9,
        &[(-1.0, 0, 1), (-0.75, 1, 2), (-0.25, 2, 3), (0.0, 3, 4), (1.0, 4, 4)],
    );
    assert_eq!(code(BandId::WRI2, Sensor::Landsat9, 1.5), 0);
}

#[test]
fn osi_landsat_boundaries() {
    check(BandId::OSI, Sensor::Landsat8, &[(1.9, 1, 2), (2.5, 2, 3)]);
    assert_eq!(code(BandId::OSI, Sensor::Landsat8, -5.0), 1);
    assert_eq!(code(BandId::OSI, Sensor::Landsat8, 3.0), 3);
}

#[test]
fn osi_sentinel_boundaries() {
    check(
        BandId::OSI,
        Sensor::Sentinel2,
        &[(0.75, 0, 1), (1.0, 1, 2), (1.9, 2, 3), (2.5, 3, 4)],
    );
    assert_eq!(code(BandId::OSI, Sensor::Sentinel2, 50.0), 4);
}

#[test]
fn labels_follow_the_published_wording() {
    let s = scheme_for(BandId::NDWI, Sensor::Sentinel2).unwrap();
    let labels: Vec<_> = s.classes.iter().map(|c| c.label.as_str()).collect();
    assert_eq!(
        labels,
        [
            "Drought, Non-Aqueous Surfaces",
            "Moderate drought, non-aqueous surfaces",
            "Flooding, humidity",
            "Water Surface"
        ]
    );
    let w = scheme_for(BandId::WRI2, Sensor::Sentinel2).unwrap();
    assert_eq!(w.classes[0].label, "Critical water areas");
    assert_eq!(w.classes[3].label, "Ground / Infrastructures");
}

proptest! {
    #[test]
    fn ndwi_codes_are_monotone(a in -1.0f32..=1.0, b in -1.0f32..=1.0) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(code(BandId::NDWI, Sensor::Sentinel2, lo) <= code(BandId::NDWI, Sensor::Sentinel2, hi));
    }

    #[test]
    fn every_in_range_value_has_exactly_one_class(v in -1.0f64..=1.0) {
        let s = scheme_for(BandId::NDWI, Sensor::Sentinel2).unwrap();
        let last = s.classes.len() - 1;
        let hits = s.classes.iter().enumerate().filter(|(k, c)| {
            c.lo.is_none_or(|lo| v >= lo) && c.hi.is_none_or(|hi| v < hi || (*k == last && v == hi))
        }).count();
        prop_assert_eq!(hits, 1);
        prop_assert!(s.code_of(v) >= 1);
    }

    #[test]
    fn reclassifying_codes_is_a_no_op(vals in proptest::collection::vec(-3.0f32..3.0, 1..30)) {
        let g = GridSpec::new(32634, (0.0, 1.0), (1.0, 1.0), vals.len(), 1).unwrap();
        let r = Raster2D::from_vec(g, vals).unwrap();
        for (index, sensor, n) in [(BandId::OSI, Sensor::Sentinel2, 4), (BandId::OSI, Sensor::Landsat8, 3), (BandId::WRI2, Sensor::Landsat8, 4)] {
            let codes = classify(&r, index, &scheme_for(index, sensor).unwrap()).unwrap();
            let again = classify(&codes, index, &ClassScheme::pass_through(index, n)).unwrap();
            prop_assert!(again.bit_eq(&codes));
        }
    }
}
