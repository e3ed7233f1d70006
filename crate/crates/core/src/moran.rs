//! Moran's I spatial autocorrelation statistic.
//!
//! For centred values `z` and weights `W`,
//!
//! ```text
//! I = (n / S0) * (sum_ij w_ij z_i z_j) / (sum_i z_i^2)
//! ```
//!
//! Inference comes two ways. The analytic route uses the exact expectation
//! `E[I] = -1 / (n - 1)` and the randomization-assumption variance, giving a
//! normal-approximation z and two-sided p. The optional Monte Carlo route
//! re-labels values over locations with a seeded, stream-indexed shuffle per
//! permutation, so the p-value is reproducible regardless of thread count.

use rand::RngExt;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::linalg::mean;
use crate::rng::StreamDomain;
use crate::weights::WeightsMatrix;

/// Result of a Moran's I test.
#[derive(Debug, Clone)]
pub struct MoranResult {
    /// Observed statistic.
    pub i: f64,
    /// Exact null expectation `-1/(n-1)`.
    pub expected_i: f64,
    /// Randomization-assumption variance of `I`.
    pub variance: f64,
    /// `(i - expected_i) / sqrt(variance)`.
    pub z: f64,
    /// Two-sided normal p-value.
    pub p_analytic: f64,
    /// Number of Monte Carlo permutations run (0 = analytic only).
    pub permutations: usize,
    /// Two-sided pseudo p-value `(extreme + 1) / (permutations + 1)`,
    /// doubled from the one-sided count and capped at 1.
    pub p_permutation: Option<f64>,
}

impl MoranResult {
    /// Strict significance screen: `|z| > 2.58` and `p < 0.01`.
    pub fn significant_at_01(&self) -> bool {
        self.z.abs() > 2.58 && self.p_analytic < 0.01
    }
}

/// Moran's I with analytic inference and optional permutation test.
///
/// `values` must vary (constant input has no autocorrelation to measure) and
/// match the weight matrix dimension. With `permutations > 0`, that many
/// random relabelings are scored; permutation `k` always draws from RNG
/// stream `k` of `seed`.
pub fn morans_i(
    values: &[f64],
    w: &WeightsMatrix,
    permutations: usize,
    seed: u64,
) -> Result<MoranResult> {
    let n = values.len();
    if n != w.n {
        return Err(Error::DimensionMismatch { expected: w.n, got: n });
    }
    if n < 4 {
        // The randomization variance divides by (n-1)(n-2)(n-3).
        return Err(Error::TooFewRows { rows: n, needed: 4 });
    }
    let m = mean(values);
    let z: Vec<f64> = values.iter().map(|v| v - m).collect();
    let ss: f64 = z.iter().map(|v| v * v).sum();
    if ss <= 0.0 {
        return Err(Error::ZeroVariance("<values>".into()));
    }

    let s0 = w.s0();
    if s0 <= 0.0 {
        return Err(Error::BadConfig("weight matrix has zero total weight".into()));
    }
    let stat = |z: &[f64]| -> f64 {
        let mut cross = 0.0;
        for i in 0..n {
            for &(j, wij) in &w.neighbors[i] {
                cross += wij * z[i] * z[j];
            }
        }
        (n as f64 / s0) * cross / ss
    };
    let i_obs = stat(&z);

    let nf = n as f64;
    let expected_i = -1.0 / (nf - 1.0);

    // Randomization-assumption moments (kurtosis-corrected).
    let s1 = w.s1();
    let s2 = w.s2();
    let b2 = nf * z.iter().map(|v| v.powi(4)).sum::<f64>() / (ss * ss);
    let num_a = nf * ((nf * nf - 3.0 * nf + 3.0) * s1 - nf * s2 + 3.0 * s0 * s0);
    let num_b = b2 * ((nf * nf - nf) * s1 - 2.0 * nf * s2 + 6.0 * s0 * s0);
    let den = (nf - 1.0) * (nf - 2.0) * (nf - 3.0) * s0 * s0;
    let variance = (num_a - num_b) / den - expected_i * expected_i;
    if variance <= 0.0 {
        return Err(Error::NonPositiveDefiniteCovariance);
    }

    let z_score = (i_obs - expected_i) / variance.sqrt();
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let p_analytic = (2.0 * normal.sf(z_score.abs())).min(1.0);

    let p_permutation = if permutations > 0 {
        let sims: Vec<f64> = (0..permutations as u64)
            .into_par_iter()
            .map(|k| {
                let mut rng = StreamDomain::Permutation(k).rng(seed);
                let mut perm: Vec<usize> = (0..n).collect();
                // Fisher-Yates with the stream generator.
                for i in (1..n).rev() {
                    let j = rng.random_range(0..=i);
                    perm.swap(i, j);
                }
                let shuffled: Vec<f64> = perm.iter().map(|&ix| z[ix]).collect();
                stat(&shuffled)
            })
            .collect();
        let diff = i_obs - expected_i;
        let extreme = sims
            .iter()
            .filter(|&&s| {
                if diff >= 0.0 {
                    s - expected_i >= diff
                } else {
                    s - expected_i <= diff
                }
            })
            .count();
        let one_sided = (extreme as f64 + 1.0) / (permutations as f64 + 1.0);
        Some((2.0 * one_sided).min(1.0))
    } else {
        None
    };

    Ok(MoranResult {
        i: i_obs,
        expected_i,
        variance,
        z: z_score,
        p_analytic,
        permutations,
        p_permutation,
    })
}
