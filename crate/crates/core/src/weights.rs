//! Sparse spatial weight matrices.
//!
//! Neighbour structures are stored row-wise: `neighbors[i]` lists `(j, w_ij)`
//! pairs in ascending `j`. Construction is by k-nearest-neighbour graph,
//! fixed distance band, or inverse-distance decay; any matrix can be
//! row-standardized afterwards. The summary sums `S0`, `S1`, `S2` feed the
//! randomization moments of Moran's I.

use nalgebra::DMatrix;

use crate::data::CoordSystem;
use crate::distance::distance_matrix;
use crate::error::{Error, Result};

/// How a weight matrix was built.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightsKind {
    /// Binary k-nearest-neighbour graph; distance ties break to the lower
    /// point index.
    Knn { k: usize },
    /// Binary within-radius graph.
    DistanceBand { radius: f64 },
    /// Weight `d^{-power}` for every other point.
    InverseDistance { power: f64 },
}

/// Sparse row-wise spatial weights.
#[derive(Debug, Clone)]
pub struct WeightsMatrix {
    pub n: usize,
    /// `neighbors[i]` = sorted `(j, w_ij)` with `j != i`.
    pub neighbors: Vec<Vec<(usize, f64)>>,
    pub row_standardized: bool,
    pub kind: WeightsKind,
}

impl WeightsMatrix {
    /// Weight `w_ij`, zero when `j` is not a neighbour of `i`.
    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.neighbors[i]
            .binary_search_by_key(&j, |&(ix, _)| ix)
            .map(|pos| self.neighbors[i][pos].1)
            .unwrap_or(0.0)
    }

    /// Scale each row to sum to one. Rows without neighbours stay empty.
    pub fn row_standardize(mut self) -> Self {
        for row in &mut self.neighbors {
            let total: f64 = row.iter().map(|(_, w)| w).sum();
            if total > 0.0 {
                for (_, w) in row.iter_mut() {
                    *w /= total;
                }
            }
        }
        self.row_standardized = true;
        self
    }

    /// Sum of all weights.
    pub fn s0(&self) -> f64 {
        self.neighbors.iter().flat_map(|r| r.iter().map(|(_, w)| w)).sum()
    }

    /// `0.5 * sum_ij (w_ij + w_ji)^2`.
    pub fn s1(&self) -> f64 {
        let mut total = 0.0;
        for i in 0..self.n {
            for &(j, w_ij) in &self.neighbors[i] {
                let w_ji = self.weight(j, i);
                total += (w_ij + w_ji) * (w_ij + w_ji);
            }
        }
        // The loop above visits each *nonzero directed* edge once, but the
        // ordered-pair sum needs every (i, j) with either direction nonzero
        // visited twice. Pairs stored in both directions already got their
        // two visits; one-sided edges got one, so their square is re-added.
        let mut one_sided = 0.0;
        for i in 0..self.n {
            for &(j, w_ij) in &self.neighbors[i] {
                if self.weight(j, i) == 0.0 {
                    one_sided += w_ij * w_ij;
                }
            }
        }
        0.5 * (total + one_sided)
    }

    /// `sum_i (w_i. + w_.i)^2` where `w_i.`/`w_.i` are row/column sums.
    pub fn s2(&self) -> f64 {
        let mut row_sums = vec![0.0; self.n];
        let mut col_sums = vec![0.0; self.n];
        for i in 0..self.n {
            for &(j, w) in &self.neighbors[i] {
                row_sums[i] += w;
                col_sums[j] += w;
            }
        }
        (0..self.n).map(|i| (row_sums[i] + col_sums[i]).powi(2)).sum()
    }

    /// Dense copy; test and diagnostic helper, quadratic in `n`.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for i in 0..self.n {
            for &(j, w) in &self.neighbors[i] {
                m[(i, j)] = w;
            }
        }
        m
    }
}

/// Binary k-nearest-neighbour weights (tie on distance -> lower index).
///
/// `k` must lie in `1..=n-1`. Row-standardization is applied when
/// `row_standardize` is set, which is the usual choice for Moran tests.
pub fn knn_weights(
    coords: &[(f64, f64)],
    cs: CoordSystem,
    k: usize,
    row_standardize: bool,
) -> Result<WeightsMatrix> {
    let n = coords.len();
    if k == 0 || k >= n {
        return Err(Error::KOutOfRange { k, n });
    }
    let dist = distance_matrix(coords, cs)?;
    let mut neighbors = Vec::with_capacity(n);
    for i in 0..n {
        let mut order: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        order.sort_by(|&a, &b| dist[(i, a)].total_cmp(&dist[(i, b)]).then(a.cmp(&b)));
        let mut row: Vec<(usize, f64)> = order[..k].iter().map(|&j| (j, 1.0)).collect();
        row.sort_by_key(|&(j, _)| j);
        neighbors.push(row);
    }
    let w = WeightsMatrix { n, neighbors, row_standardized: false, kind: WeightsKind::Knn { k } };
    Ok(if row_standardize { w.row_standardize() } else { w })
}

/// Binary weights linking every pair within `radius`.
pub fn distance_band_weights(
    coords: &[(f64, f64)],
    cs: CoordSystem,
    radius: f64,
    row_standardize: bool,
) -> Result<WeightsMatrix> {
    if radius <= 0.0 {
        return Err(Error::BadConfig(format!("distance band radius must be positive, got {radius}")));
    }
    let n = coords.len();
    let dist = distance_matrix(coords, cs)?;
    let neighbors: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            (0..n).filter(|&j| j != i && dist[(i, j)] <= radius).map(|j| (j, 1.0)).collect()
        })
        .collect();
    let w = WeightsMatrix {
        n,
        neighbors,
        row_standardized: false,
        kind: WeightsKind::DistanceBand { radius },
    };
    Ok(if row_standardize { w.row_standardize() } else { w })
}

/// Inverse-distance weights `d_ij^{-power}` over all pairs.
pub fn inverse_distance_weights(
    coords: &[(f64, f64)],
    cs: CoordSystem,
    power: f64,
    row_standardize: bool,
) -> Result<WeightsMatrix> {
    if power <= 0.0 {
        return Err(Error::BadConfig(format!("inverse-distance power must be positive, got {power}")));
    }
    let n = coords.len();
    let dist = distance_matrix(coords, cs)?;
    let neighbors: Vec<Vec<(usize, f64)>> = (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .map(|j| (j, dist[(i, j)].powf(-power)))
                .collect()
        })
        .collect();
    let w = WeightsMatrix {
        n,
        neighbors,
        row_standardized: false,
        kind: WeightsKind::InverseDistance { power },
    };
    Ok(if row_standardize { w.row_standardize() } else { w })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn knn_on_a_line_breaks_ties_to_lower_index() {
        let coords: Vec<(f64, f64)> = (0..4).map(|i| (i as f64, 0.0)).collect();
        let w = knn_weights(&coords, CoordSystem::PlanarMeters, 1, false).unwrap();
        // Interior points are equidistant from both sides; the lower index
        // must win.
        assert_eq!(w.neighbors[0], vec![(1, 1.0)]);
        assert_eq!(w.neighbors[1], vec![(0, 1.0)]);
        assert_eq!(w.neighbors[2], vec![(1, 1.0)]);
        assert_eq!(w.neighbors[3], vec![(2, 1.0)]);
    }

    #[test]
    fn k_equals_n_minus_one_is_fully_connected() {
        let coords = vec![(0.0, 0.0), (1.0, 0.5), (2.0, 0.1), (0.5, 2.0), (3.0, 3.0)];
        let w = knn_weights(&coords, CoordSystem::PlanarMeters, 4, false).unwrap();
        for i in 0..5 {
            assert_eq!(w.neighbors[i].len(), 4);
        }
        assert_relative_eq!(w.s0(), 20.0);
    }

    #[test]
    fn k_out_of_range_is_rejected() {
        let coords = vec![(0.0, 0.0), (1.0, 0.0), (2.0, 0.0)];
        for k in [0usize, 3, 10] {
            match knn_weights(&coords, CoordSystem::PlanarMeters, k, false) {
                Err(Error::KOutOfRange { .. }) => {}
                other => panic!("expected KOutOfRange for k={k}, got {other:?}"),
            }
        }
    }

    #[test]
    fn knn_matches_brute_force_oracle_on_random_cloud() {
        // Deterministic scatter of 20 points.
        let mut s = 1234u64;
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        let coords: Vec<(f64, f64)> = (0..20).map(|_| (next() * 100.0, next() * 100.0)).collect();
        let k = 3;
        let w = knn_weights(&coords, CoordSystem::PlanarMeters, k, false).unwrap();
        for i in 0..20 {
            // Oracle: repeatedly extract the closest remaining point.
            let mut remaining: Vec<usize> = (0..20).filter(|&j| j != i).collect();
            let mut picks = Vec::new();
            for _ in 0..k {
                let best = remaining
                    .iter()
                    .copied()
                    .min_by(|&a, &b| {
                        let da = crate::distance::euclidean(coords[i], coords[a]);
                        let db = crate::distance::euclidean(coords[i], coords[b]);
                        da.total_cmp(&db).then(a.cmp(&b))
                    })
                    .unwrap();
                picks.push(best);
                remaining.retain(|&j| j != best);
            }
            picks.sort_unstable();
            let got: Vec<usize> = w.neighbors[i].iter().map(|&(j, _)| j).collect();
            assert_eq!(got, picks, "row {i}");
        }
    }

    #[test]
    fn row_standardization_sums_rows_to_one() {
        let coords = vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.5), (2.0, 2.0), (4.0, 1.0)];
        let w = knn_weights(&coords, CoordSystem::PlanarMeters, 3, true).unwrap();
        for row in &w.neighbors {
            let sum: f64 = row.iter().map(|(_, w)| w).sum();
            assert_relative_eq!(sum, 1.0, epsilon = 1e-12);
        }
        assert_relative_eq!(w.s0(), 5.0, epsilon = 1e-12);
    }

    #[test]
    fn summary_sums_match_dense_loops() {
        let coords = vec![(0.0, 0.0), (1.0, 0.2), (0.3, 1.1), (2.2, 1.9), (3.0, 0.5), (1.5, 2.8)];
        let w = knn_weights(&coords, CoordSystem::PlanarMeters, 2, true).unwrap();
        let dense = w.to_dense();
        let n = w.n;
        let s0: f64 = dense.iter().sum();
        let mut s1 = 0.0;
        for i in 0..n {
            for j in 0..n {
                s1 += (dense[(i, j)] + dense[(j, i)]).powi(2);
            }
        }
        s1 *= 0.5;
        let mut s2 = 0.0;
        for i in 0..n {
            let wi: f64 = (0..n).map(|j| dense[(i, j)]).sum();
            let wti: f64 = (0..n).map(|j| dense[(j, i)]).sum();
            s2 += (wi + wti).powi(2);
        }
        assert_relative_eq!(w.s0(), s0, epsilon = 1e-12);
        assert_relative_eq!(w.s1(), s1, epsilon = 1e-12);
        assert_relative_eq!(w.s2(), s2, epsilon = 1e-12);
    }

    #[test]
    fn band_and_inverse_distance_constructors() {
        let coords = vec![(0.0, 0.0), (1.0, 0.0), (3.0, 0.0), (6.0, 0.0)];
        let band = distance_band_weights(&coords, CoordSystem::PlanarMeters, 2.0, false).unwrap();
        assert_eq!(band.neighbors[0], vec![(1, 1.0)]);
        assert_eq!(band.neighbors[2], vec![(1, 1.0)]);
        let inv = inverse_distance_weights(&coords, CoordSystem::PlanarMeters, 2.0, false).unwrap();
        assert_relative_eq!(inv.weight(0, 1), 1.0);
        assert_relative_eq!(inv.weight(0, 2), 1.0 / 9.0);
        assert_relative_eq!(inv.weight(3, 0), 1.0 / 36.0);
    }
}
