//! NetCDF writer and reader round trips, cross-checked with the third-party
//! `netcdf3` reader.

#[path = "support/random_hypercube.rs"]
mod random_hypercube;

use oceandc::netcdf::{decode_netcdf, encode_netcdf, read_netcdf, write_netcdf, NetcdfFile, DATA_VAR};
use oceandc::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use random_hypercube::random_cube;

#[test]
fn fifty_random_cubes_round_trip_bitwise() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for k in 0..50 {
        let cube = random_cube(&mut rng);
        let bytes = encode_netcdf(&cube, "test").unwrap();
        assert_eq!(&bytes[..4], b"CDF\x02");
        let back = decode_netcdf(&bytes).unwrap();
        assert!(back.bit_eq(&cube), "cube {k} differs after round trip");
    }
}

#[test]
fn third_party_reader_sees_the_same_arrays() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let dir = tempfile::tempdir().unwrap();
    for k in 0..10 {
        let cube = random_cube(&mut rng);
        let path = dir.path().join(format!("c{k}.nc"));
        write_netcdf(&cube, &path, "pinned").unwrap();

        let mut r = netcdf3::FileReader::open(&path).unwrap();
        let (t, b, h, w) = cube.shape();
        let ds = r.data_set();
        assert_eq!(ds.dim_size("time"), Some(t));
        assert_eq!(ds.dim_size("band"), Some(b));
        assert_eq!(ds.dim_size("y"), Some(h));
        assert_eq!(ds.dim_size("x"), Some(w));
        assert_eq!(ds.get_global_attr_as_string("Conventions").as_deref(), Some("CF-1.8"));
        assert_eq!(ds.get_global_attr_as_string("history").as_deref(), Some("pinned"));
        assert_eq!(
            ds.get_var_attr_as_string("crs", "epsg_code"),
            Some(format!("EPSG:{}", cube.grid().epsg))
        );

        let data = r.read_var_f32(DATA_VAR).unwrap();
        assert_eq!(data.len(), cube.data().len());
        for (a, b) in data.iter().zip(cube.data().iter()) {
            assert_eq!(a.to_bits(), b.to_bits());
        }
        let g = cube.grid();
        let xs = r.read_var_f64("x").unwrap();
        let ys = r.read_var_f64("y").unwrap();
        for (c, x) in xs.iter().enumerate() {
            assert_eq!(*x, g.pixel_center(c, 0).0);
        }
        for (row, y) in ys.iter().enumerate() {
            assert_eq!(*y, g.pixel_center(0, row).1);
        }
        let bands = r.read_var_i32("band").unwrap();
        assert_eq!(bands, (1..=43).collect::<Vec<i32>>());
        let times = r.read_var_f64("time").unwrap();
        for (s, t) in times.iter().zip(cube.times()) {
            assert_eq!(*s, t.timestamp() as f64);
        }

        assert!(read_netcdf(&path).unwrap().bit_eq(&cube));
    }
}

#[test]
fn identical_input_gives_identical_bytes() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let cube = random_cube(&mut rng);
    assert_eq!(encode_netcdf(&cube, "h").unwrap(), encode_netcdf(&cube, "h").unwrap());
}

#[test]
fn header_exposes_attributes() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cube = random_cube(&mut rng);
    let bytes = encode_netcdf(&cube, "h").unwrap();
    let f = NetcdfFile::parse(&bytes).unwrap();
    let table = f.global("band_table").and_then(|a| a.as_text()).unwrap();
    assert!(table.contains("NDVI"));
    assert!(f.var_attr("crs", "GeoTransform").is_some());
}

#[test]
fn not_netcdf_and_truncation() {
    assert!(matches!(decode_netcdf(b"GIF89a"), Err(Error::NotNetcdf)));
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let bytes = encode_netcdf(&random_cube(&mut rng), "h").unwrap();
    assert!(decode_netcdf(&bytes[..bytes.len() - 3]).is_err());
    assert!(matches!(decode_netcdf(&bytes[..40]), Err(Error::Parse { .. })));
}
