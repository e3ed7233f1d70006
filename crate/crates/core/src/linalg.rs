//! Numerically stable least squares on top of nalgebra.
//!
//! All regression paths in this crate route through [`lstsq`], which factors
//! the design with a column-pivoted QR rather than forming normal equations.
//! The pivoted factorization both improves conditioning and exposes rank
//! deficiency through the decay of the `R` diagonal.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Reciprocal-condition threshold below which a design is declared rank
/// deficient.
pub const RCOND_MIN: f64 = 1e-12;

/// Output of a least-squares solve.
#[derive(Debug, Clone)]
pub struct Lstsq {
    /// Solution vector, original column order.
    pub coefficients: DVector<f64>,
    /// `X * coefficients`.
    pub fitted: DVector<f64>,
    /// `y - fitted`.
    pub residuals: DVector<f64>,
    /// Residual sum of squares.
    pub rss: f64,
    /// `(X'X)^{-1}`, original column order; feeds coefficient covariance.
    pub xtx_inv: DMatrix<f64>,
    /// Diagonal-decay estimate of the reciprocal condition number of `X`.
    pub rcond: f64,
}

/// Minimum-residual solution of `X b = y` for a tall or square `X`.
///
/// Fails with [`Error::RankDeficient`] when the reciprocal condition estimate
/// (ratio of smallest to largest pivoted `R` diagonal) drops below `rcond`.
pub fn lstsq(x: &DMatrix<f64>, y: &DVector<f64>, rcond: f64) -> Result<Lstsq> {
    let (n, p) = x.shape();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    if n < p {
        return Err(Error::TooFewRows { rows: n, needed: p });
    }

    let qr = x.clone().col_piv_qr();
    let (q, r, perm) = {
        let mut qty = y.clone();
        qr.q_tr_mul(&mut qty);
        let (q, r, perm) = qr.unpack();
        let _ = q; // thin Q not needed beyond q_tr_mul above
        (qty, r, perm)
    };
    let qty = q;

    // Column pivoting orders |r_ii| in decreasing magnitude, so the extremes
    // sit at the ends of the diagonal.
    let diag_max = r[(0, 0)].abs();
    let diag_min = r[(p - 1, p - 1)].abs();
    let cond = if diag_max > 0.0 { diag_min / diag_max } else { 0.0 };
    if !cond.is_finite() || cond < rcond {
        return Err(Error::RankDeficient { rcond });
    }

    // Solve R z = (Q'y)[..p], then undo the column permutation.
    let mut z = DVector::from_fn(p, |i, _| qty[i]);
    if !r.solve_upper_triangular_mut(&mut z) {
        return Err(Error::RankDeficient { rcond });
    }
    perm.inv_permute_rows(&mut z);
    let coefficients = z;

    let fitted = x * &coefficients;
    let residuals = y - &fitted;
    let rss = residuals.dot(&residuals);

    // (X'X)^{-1} = P R^{-1} R^{-T} P'
    let r_inv = r
        .solve_upper_triangular(&DMatrix::identity(p, p))
        .ok_or(Error::RankDeficient { rcond })?;
    let mut xtx_inv = &r_inv * r_inv.transpose();
    perm.inv_permute_rows(&mut xtx_inv);
    perm.inv_permute_columns(&mut xtx_inv);

    Ok(Lstsq { coefficients, fitted, residuals, rss, xtx_inv, rcond: cond })
}

/// Sample mean of a slice.
pub fn mean(values: &[f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample standard deviation (n − 1 denominator).
pub fn sample_sd(values: &[f64]) -> f64 {
    let n = values.len();
    if n < 2 {
        return f64::NAN;
    }
    let m = mean(values);
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    (ss / (n as f64 - 1.0)).sqrt()
}
