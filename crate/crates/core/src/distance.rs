//! Point-to-point distances and the full distance matrix.
//!
//! Planar coordinates use straight Euclidean distance in input units
//! (metres). Geographic coordinates are interpreted as (longitude, latitude)
//! degrees and measured along a spherical great circle.

use nalgebra::DMatrix;

use crate::data::CoordSystem;
use crate::error::{Error, Result};

/// Mean Earth radius in metres for the spherical model.
pub const EARTH_RADIUS_M: f64 = 6_371_000.0;

/// Euclidean distance between two planar points.
pub fn euclidean(a: (f64, f64), b: (f64, f64)) -> f64 {
    let du = a.0 - b.0;
    let dv = a.1 - b.1;
    du.hypot(dv)
}

/// Great-circle distance in metres between `(lon, lat)` degree pairs.
///
/// Haversine form, which stays accurate for small separations where the
/// spherical law of cosines loses precision.
pub fn haversine(a: (f64, f64), b: (f64, f64)) -> f64 {
    let (lon1, lat1) = (a.0.to_radians(), a.1.to_radians());
    let (lon2, lat2) = (b.0.to_radians(), b.1.to_radians());
    let dlat = lat2 - lat1;
    let dlon = lon2 - lon1;
    let s = (dlat / 2.0).sin().powi(2) + lat1.cos() * lat2.cos() * (dlon / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * s.sqrt().min(1.0).asin()
}

/// Distance under the dataset's coordinate system.
pub fn pair_distance(cs: CoordSystem, a: (f64, f64), b: (f64, f64)) -> f64 {
    match cs {
        CoordSystem::PlanarMeters => euclidean(a, b),
        CoordSystem::Wgs84Degrees => haversine(a, b),
    }
}

/// Full symmetric distance matrix with a zero diagonal.
///
/// # Errors
///
/// [`Error::DegenerateCoordinates`] if two distinct points coincide (their
/// distance would be zero, which breaks inverse-distance weighting and
/// adaptive bandwidths downstream).
pub fn distance_matrix(coords: &[(f64, f64)], cs: CoordSystem) -> Result<DMatrix<f64>> {
    let n = coords.len();
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let d = pair_distance(cs, coords[i], coords[j]);
            if d <= 0.0 {
                return Err(Error::DegenerateCoordinates { first: i, second: j });
            }
            m[(i, j)] = d;
            m[(j, i)] = d;
        }
    }
    Ok(m)
}

/// Largest pairwise distance; zero for fewer than two points.
pub fn diameter(dist: &DMatrix<f64>) -> f64 {
    dist.iter().copied().fold(0.0, f64::max)
}
