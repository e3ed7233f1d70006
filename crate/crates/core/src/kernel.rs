//! Distance-decay kernels and bandwidth schemes for local regression.
//!
//! A [`KernelSpec`] pairs a decay shape with a bandwidth scheme. Fixed
//! bandwidths apply one distance everywhere; adaptive bandwidths re-scale at
//! each calibration point to the distance of its N-th nearest neighbour, so
//! every local fit sees a comparable amount of data regardless of point
//! density.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Decay shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum KernelKind {
    /// `exp(-0.5 (d/b)^2)`; strictly positive everywhere.
    Gaussian,
    /// `(1 - (d/b)^2)^2` inside the bandwidth, zero beyond it.
    Bisquare,
}

/// Bandwidth scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Bandwidth {
    /// One distance for every calibration point.
    Fixed(f64),
    /// Per-point distance to the N-th nearest other point.
    Adaptive(usize),
}

/// A kernel shape plus its bandwidth scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec {
    pub kind: KernelKind,
    pub bandwidth: Bandwidth,
}

impl KernelSpec {
    pub fn gaussian_adaptive(n_neighbors: usize) -> Self {
        KernelSpec { kind: KernelKind::Gaussian, bandwidth: Bandwidth::Adaptive(n_neighbors) }
    }

    pub fn gaussian_fixed(distance: f64) -> Self {
        KernelSpec { kind: KernelKind::Gaussian, bandwidth: Bandwidth::Fixed(distance) }
    }
}

/// Kernel weight for a point at distance `d` under bandwidth `bandwidth`.
///
/// Always 1 at `d = 0`; the bandwidth must be strictly positive.
pub fn kernel_weight(d: f64, bandwidth: f64, kind: KernelKind) -> Result<f64> {
    if !(bandwidth > 0.0) {
        return Err(Error::NonpositiveBandwidth(bandwidth));
    }
    Ok(weight_unchecked(d, bandwidth, kind))
}

/// Status-checked callers (the fit engines validate the bandwidth once and
/// then stream distances through this).
#[inline]
pub(crate) fn weight_unchecked(d: f64, bandwidth: f64, kind: KernelKind) -> f64 {
    let r = d / bandwidth;
    match kind {
        KernelKind::Gaussian => (-0.5 * r * r).exp(),
        KernelKind::Bisquare => {
            if d < bandwidth {
                let t = 1.0 - r * r;
                t * t
            } else {
                0.0
            }
        }
    }
}

/// Distance from point `i` to its `n_neighbors`-th nearest *other* point.
///
/// Ties sort by index, which cannot change the returned distance but keeps
/// the ordering deterministic. `n_neighbors` must lie in `1..=n-1`.
pub fn adaptive_bandwidth_distance(
    dist: &DMatrix<f64>,
    i: usize,
    n_neighbors: usize,
) -> Result<f64> {
    let n = dist.nrows();
    if n_neighbors == 0 || n_neighbors >= n {
        return Err(Error::KOutOfRange { k: n_neighbors, n });
    }
    let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
    order.sort_by(|&a, &b| dist[(i, a)].total_cmp(&dist[(i, b)]).then(a.cmp(&b)));
    Ok(dist[(i, order[n_neighbors - 1])])
}

/// Per-location bandwidth distances for a kernel spec.
///
/// Adaptive neighbour counts are clamped to `n - 1` so that the upper end of
/// a selection bracket (`N = n`) resolves to the full-extent bandwidth.
pub fn resolve_bandwidths(dist: &DMatrix<f64>, spec: &KernelSpec) -> Result<Vec<f64>> {
    let n = dist.nrows();
    match spec.bandwidth {
        Bandwidth::Fixed(b) => {
            if !(b > 0.0) {
                return Err(Error::NonpositiveBandwidth(b));
            }
            Ok(vec![b; n])
        }
        Bandwidth::Adaptive(nn) => {
            if nn == 0 {
                return Err(Error::KOutOfRange { k: nn, n });
            }
            let nn = nn.min(n - 1);
            (0..n).map(|i| adaptive_bandwidth_distance(dist, i, nn)).collect()
        }
    }
}
