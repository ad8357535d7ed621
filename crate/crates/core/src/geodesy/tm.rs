//! Transverse Mercator via the Krüger series in the third flattening,
//! truncated at order 6.

use super::Ellipsoid;
use crate::error::{Error, Result};

/// Latitude limit accepted by the forward projection, degrees.
pub const MAX_LATITUDE: f64 = 84.0;
/// Largest longitude offset from the central meridian, degrees.
pub const MAX_LON_OFFSET: f64 = 60.0;

/// Precomputed constants for one TM definition.
#[derive(Debug, Clone)]
pub struct TransverseMercator {
    lon0: f64,
    k0: f64,
    false_easting: f64,
    false_northing: f64,
    e: f64,
    e2: f64,
    /// Rectifying radius A.
    rect_radius: f64,
    alpha: [f64; 6],
    beta: [f64; 6],
}

impl TransverseMercator {
    /// `lon0_deg` is the central meridian; latitude of origin is the equator.
    pub fn new(ellipsoid: Ellipsoid, lon0_deg: f64, k0: f64, false_easting: f64, false_northing: f64) -> Self {
        let f = ellipsoid.f;
        let n = f / (2.0 - f);
        let (n2, n3) = (n * n, n * n * n);
        let (n4, n5, n6) = (n3 * n, n3 * n2, n3 * n3);

        let alpha = [
            n / 2.0 - 2.0 / 3.0 * n2 + 5.0 / 16.0 * n3 + 41.0 / 180.0 * n4 - 127.0 / 288.0 * n5
                + 7891.0 / 37800.0 * n6,
            13.0 / 48.0 * n2 - 3.0 / 5.0 * n3 + 557.0 / 1440.0 * n4 + 281.0 / 630.0 * n5
                - 1983433.0 / 1935360.0 * n6,
            61.0 / 240.0 * n3 - 103.0 / 140.0 * n4 + 15061.0 / 26880.0 * n5 + 167603.0 / 181440.0 * n6,
            49561.0 / 161280.0 * n4 - 179.0 / 168.0 * n5 + 6601661.0 / 7257600.0 * n6,
            34729.0 / 80640.0 * n5 - 3418889.0 / 1995840.0 * n6,
            212378941.0 / 319334400.0 * n6,
        ];
        let beta = [
            n / 2.0 - 2.0 / 3.0 * n2 + 37.0 / 96.0 * n3 - 1.0 / 360.0 * n4 - 81.0 / 512.0 * n5
                + 96199.0 / 604800.0 * n6,
            1.0 / 48.0 * n2 + 1.0 / 15.0 * n3 - 437.0 / 1440.0 * n4 + 46.0 / 105.0 * n5
                - 1118711.0 / 3870720.0 * n6,
            17.0 / 480.0 * n3 - 37.0 / 840.0 * n4 - 209.0 / 4480.0 * n5 + 5569.0 / 90720.0 * n6,
            4397.0 / 161280.0 * n4 - 11.0 / 504.0 * n5 - 830251.0 / 7257600.0 * n6,
            4583.0 / 161280.0 * n5 - 108847.0 / 3991680.0 * n6,
            20648693.0 / 638668800.0 * n6,
        ];
        let e2 = f * (2.0 - f);
        TransverseMercator {
            lon0: lon0_deg,
            k0,
            false_easting,
            false_northing,
            e: e2.sqrt(),
            e2,
            rect_radius: ellipsoid.a / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0),
            alpha,
            beta,
        }
    }

    pub fn central_meridian(&self) -> f64 {
        self.lon0
    }

    /// Longitude offset from the central meridian wrapped to [-180, 180).
    fn lon_offset(&self, lon: f64) -> f64 {
        (lon - self.lon0 + 180.0).rem_euclid(360.0) - 180.0
    }

    /// Geodetic tangent to conformal tangent.
    fn conformal_tan(&self, tau: f64) -> f64 {
        let sec = tau.hypot(1.0);
        let sigma = (self.e * (self.e * tau / sec).atanh()).sinh();
        tau * sigma.hypot(1.0) - sigma * sec
    }

    /// Inverse of [`Self::conformal_tan`] by Newton iteration.
    fn geodetic_tan(&self, tau_c: f64) -> f64 {
        let mut tau = tau_c / (1.0 - self.e2);
        for _ in 0..10 {
            let sec = tau.hypot(1.0);
            let tau_i = self.conformal_tan(tau);
            let step = (tau_c - tau_i) * (1.0 + (1.0 - self.e2) * tau * tau)
                / ((1.0 - self.e2) * sec * tau_i.hypot(1.0));
            tau += step;
            if step.abs() <= 1e-15 * tau.abs().max(1.0) {
                break;
            }
        }
        tau
    }

    /// (lat, lon) in degrees to (easting, northing) in metres.
    pub fn forward(&self, lat: f64, lon: f64) -> Result<(f64, f64)> {
        let dlon = self.lon_offset(lon);
        if !lat.is_finite() || !lon.is_finite() || lat.abs() > MAX_LATITUDE || dlon.abs() > MAX_LON_OFFSET {
            return Err(Error::OutOfProjectionDomain { x: lon, y: lat });
        }
        let phi = lat.to_radians();
        let lam = dlon.to_radians();

        let tau_c = self.conformal_tan(phi.tan());
        let (sin_lam, cos_lam) = lam.sin_cos();
        let xi_c = tau_c.atan2(cos_lam);
        let eta_c = (sin_lam / tau_c.hypot(cos_lam)).asinh();

        let mut xi = xi_c;
        let mut eta = eta_c;
        for (j, a) in self.alpha.iter().enumerate() {
            let m = 2.0 * (j + 1) as f64;
            let (s, c) = (m * xi_c).sin_cos();
            xi += a * s * (m * eta_c).cosh();
            eta += a * c * (m * eta_c).sinh();
        }

        let scale = self.k0 * self.rect_radius;
        Ok((
            self.false_easting + scale * eta,
            self.false_northing + scale * xi,
        ))
    }

    /// (easting, northing) in metres to (lat, lon) in degrees.
    pub fn inverse(&self, easting: f64, northing: f64) -> Result<(f64, f64)> {
        let out_of_domain = || Error::OutOfProjectionDomain { x: easting, y: northing };
        if !easting.is_finite() || !northing.is_finite() {
            return Err(out_of_domain());
        }
        let scale = self.k0 * self.rect_radius;
        let eta = (easting - self.false_easting) / scale;
        let xi = (northing - self.false_northing) / scale;
        // Beyond these the series no longer converges usefully.
        if eta.abs() > 1.4 || xi.abs() > std::f64::consts::FRAC_PI_2 * 1.01 {
            return Err(out_of_domain());
        }

        let mut xi_c = xi;
        let mut eta_c = eta;
        for (j, b) in self.beta.iter().enumerate() {
            let m = 2.0 * (j + 1) as f64;
            let (s, c) = (m * xi).sin_cos();
            xi_c -= b * s * (m * eta).cosh();
            eta_c -= b * c * (m * eta).sinh();
        }

        let sinh_eta = eta_c.sinh();
        let (sin_xi, cos_xi) = xi_c.sin_cos();
        let tau_c = sin_xi / sinh_eta.hypot(cos_xi);
        let lat = self.geodetic_tan(tau_c).atan().to_degrees();
        let dlon = sinh_eta.atan2(cos_xi).to_degrees();
        if !lat.is_finite() || dlon.abs() > MAX_LON_OFFSET {
            return Err(out_of_domain());
        }
        let lon = (self.lon0 + dlon + 180.0).rem_euclid(360.0) - 180.0;
        Ok((lat, lon))
    }
}
