use serde::{Deserialize, Serialize};

use super::{GeoPoint, PlanarPoint};
use crate::error::{Error, Result};

/// Mean Earth radius used by the projection, in meters.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Spherical azimuthal-equidistant projection centred on `origin`.
///
/// Distances from the origin are exact on the sphere and pairwise distances
/// stay within ~1e-5 relative error out to 50 km, at any latitude.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub origin: GeoPoint,
}

impl Projection {
    pub fn new(origin: GeoPoint) -> Self {
        Self { origin }
    }

    pub fn forward(&self, p: &GeoPoint) -> PlanarPoint {
        let (phi0, lam0) = (self.origin.lat.to_radians(), self.origin.lon.to_radians());
        let (phi, lam) = (p.lat.to_radians(), p.lon.to_radians());
        let dlam = lam - lam0;
        // Angular distance via haversine; stable for tiny separations.
        let h = ((phi - phi0) / 2.0).sin().powi(2) + phi0.cos() * phi.cos() * (dlam / 2.0).sin().powi(2);
        let c = 2.0 * h.sqrt().min(1.0).asin();
        let k = if c == 0.0 { 1.0 } else { c / c.sin() };
        PlanarPoint {
            x: EARTH_RADIUS_M * k * phi.cos() * dlam.sin(),
            y: EARTH_RADIUS_M * k * (phi0.cos() * phi.sin() - phi0.sin() * phi.cos() * dlam.cos()),
        }
    }

    pub fn inverse(&self, p: &PlanarPoint) -> GeoPoint {
        let rho = p.x.hypot(p.y);
        if rho == 0.0 {
            return self.origin;
        }
        let phi0 = self.origin.lat.to_radians();
        let c = rho / EARTH_RADIUS_M;
        let (sin_c, cos_c) = c.sin_cos();
        let phi = (cos_c * phi0.sin() + p.y * sin_c * phi0.cos() / rho).clamp(-1.0, 1.0).asin();
        let dlam = (p.x * sin_c).atan2(rho * phi0.cos() * cos_c - p.y * phi0.sin() * sin_c);
        GeoPoint { lat: phi.to_degrees(), lon: self.origin.lon + dlam.to_degrees() }
    }
}

/// Projects `points` around their centroid (arithmetic mean of lat/lon).
pub fn project(points: &[GeoPoint]) -> Result<(Vec<PlanarPoint>, Projection)> {
    if points.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = points.len() as f64;
    let lat = points.iter().map(|p| p.lat).sum::<f64>() / n;
    let lon = points.iter().map(|p| p.lon).sum::<f64>() / n;
    let projection = Projection::new(GeoPoint { lat, lon });
    let planar = points.iter().map(|p| projection.forward(p)).collect();
    Ok((planar, projection))
}
