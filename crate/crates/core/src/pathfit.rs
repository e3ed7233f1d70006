//! Goodness-of-fit indices for the recursive single-mediator path model.
//!
//! The observed variables are the predictors, the mediator and the outcome.
//! The model leaves the predictor block saturated (free covariances), links
//! every predictor to the mediator, and links the mediator plus a chosen
//! subset of predictors to the outcome. Omitting a predictor's direct path
//! constrains one coefficient to zero and buys one degree of freedom; with
//! no omissions the model is saturated and fits the sample moments exactly.
//!
//! Fit is judged by the maximum-likelihood discrepancy between the sample
//! covariance `S` and the implied covariance `Σ(θ)`:
//!
//! ```text
//! F(θ) = ln|Σ| − ln|S| + tr(S·Σ⁻¹) − p
//! ```
//!
//! minimized here in closed form (the model factorizes into per-equation
//! regressions, so the minimizing parameters are the corresponding
//! least-squares solutions in the metric of `S`). The reported indices are
//! the usual transforms of the minimized discrepancy: chi-square,
//! chi-square/df, CFI against the independence baseline, RMSEA, and SRMR.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::Serialize;

use crate::data::{Dataset, ModelSpec};
use crate::error::{Error, Result};

/// Acceptability thresholds, strict inequalities.
pub const CFI_ACCEPTABLE_MIN: f64 = 0.95;
pub const RMSEA_ACCEPTABLE_MAX: f64 = 0.08;
pub const SRMR_ACCEPTABLE_MAX: f64 = 0.09;
pub const CMIN_DF_ACCEPTABLE_MAX: f64 = 2.0;

/// Verdict for a single index against its cutoff.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexVerdict {
    Acceptable,
    Poor,
}

impl IndexVerdict {
    pub fn as_str(&self) -> &'static str {
        match self {
            IndexVerdict::Acceptable => "acceptable",
            IndexVerdict::Poor => "poor",
        }
    }

    fn from_bool(ok: bool) -> Self {
        if ok {
            IndexVerdict::Acceptable
        } else {
            IndexVerdict::Poor
        }
    }
}

impl std::fmt::Display for IndexVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Per-index verdicts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct FitVerdicts {
    pub cfi: IndexVerdict,
    pub rmsea: IndexVerdict,
    pub srmr: IndexVerdict,
    pub cmin_df: IndexVerdict,
}

impl FitVerdicts {
    pub fn all_acceptable(&self) -> bool {
        [self.cfi, self.rmsea, self.srmr, self.cmin_df]
            .iter()
            .all(|v| *v == IndexVerdict::Acceptable)
    }
}

/// Apply the cutoff rules: CFI must exceed 0.95; RMSEA, SRMR and
/// chi-square/df must fall below 0.08, 0.09 and 2 respectively. All four
/// comparisons are strict.
pub fn fit_verdicts(cfi: f64, rmsea: f64, srmr: f64, cmin_df: f64) -> FitVerdicts {
    FitVerdicts {
        cfi: IndexVerdict::from_bool(cfi > CFI_ACCEPTABLE_MIN),
        rmsea: IndexVerdict::from_bool(rmsea < RMSEA_ACCEPTABLE_MAX),
        srmr: IndexVerdict::from_bool(srmr < SRMR_ACCEPTABLE_MAX),
        cmin_df: IndexVerdict::from_bool(cmin_df < CMIN_DF_ACCEPTABLE_MAX),
    }
}

/// The fitted discrepancy and its derived indices.
#[derive(Debug, Clone, Serialize)]
pub struct FitIndices {
    pub chi_square: f64,
    pub df: usize,
    /// `chi_square / df` for `df > 0`; reported as 0 for a saturated model.
    pub cmin_df: f64,
    pub cfi: f64,
    pub rmsea: f64,
    pub srmr: f64,
    pub baseline_chi_square: f64,
    pub baseline_df: usize,
    pub n: usize,
    pub verdicts: FitVerdicts,
}

/// Implied covariance of `(x₁..x_k, m, y)` under the path parameters.
///
/// `phi` is the predictor covariance block, `a` the predictor-to-mediator
/// coefficients, `c_full` the direct predictor-to-outcome coefficients
/// (zeros at omitted positions), `b` the mediator-to-outcome coefficient,
/// and the two variances are the equation error variances.
pub(crate) fn implied_covariance(
    phi: &DMatrix<f64>,
    a: &DVector<f64>,
    sigma2_m: f64,
    c_full: &DVector<f64>,
    b: f64,
    sigma2_y: f64,
) -> DMatrix<f64> {
    let k = phi.nrows();
    let p = k + 2;
    let phi_a = phi * a;
    let phi_c = phi * c_full;
    let var_m = a.dot(&phi_a) + sigma2_m;
    let cov_xy = &phi_c + &phi_a * b;
    let cov_my = a.dot(&phi_c) + b * var_m;
    let var_y = c_full.dot(&phi_c) + 2.0 * b * a.dot(&phi_c) + b * b * var_m + sigma2_y;

    let mut sigma = DMatrix::zeros(p, p);
    sigma.view_mut((0, 0), (k, k)).copy_from(phi);
    for j in 0..k {
        sigma[(j, k)] = phi_a[j];
        sigma[(k, j)] = phi_a[j];
        sigma[(j, k + 1)] = cov_xy[j];
        sigma[(k + 1, j)] = cov_xy[j];
    }
    sigma[(k, k)] = var_m;
    sigma[(k, k + 1)] = cov_my;
    sigma[(k + 1, k)] = cov_my;
    sigma[(k + 1, k + 1)] = var_y;
    sigma
}

/// `ln|Σ| − ln|S| + tr(S·Σ⁻¹) − p`, or `None` when `Σ` is not positive
/// definite.
pub(crate) fn ml_discrepancy(s: &DMatrix<f64>, sigma: &DMatrix<f64>, ln_det_s: f64) -> Option<f64> {
    let p = s.nrows() as f64;
    let chol = well_conditioned_cholesky(sigma.clone())?;
    let ln_det_sigma: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
    let sigma_inv = chol.inverse();
    let trace: f64 = s.iter().zip(sigma_inv.iter()).map(|(si, vi)| si * vi).sum();
    Some(ln_det_sigma - ln_det_s + trace - p)
}

/// Cholesky that also rejects numerically singular matrices: the squared
/// ratio of the smallest to largest pivot must clear 1e-12.
fn well_conditioned_cholesky(m: DMatrix<f64>) -> Option<Cholesky<f64, nalgebra::Dyn>> {
    let chol = Cholesky::new(m)?;
    let diag = chol.l_dirty().diagonal();
    let max = diag.iter().cloned().fold(f64::MIN, f64::max);
    let min = diag.iter().cloned().fold(f64::MAX, f64::min);
    if !(min > 0.0) || (min / max) * (min / max) < 1e-12 {
        return None;
    }
    Some(chol)
}

/// Compute fit indices for the path model, optionally constraining the
/// direct outcome paths of the predictors named in `omit_direct` to zero.
///
/// With `omit_direct` empty the model is saturated (zero degrees of
/// freedom): it reproduces the sample covariance exactly, and the indices
/// are reported at their ideal values (chi-square 0, CFI 1, RMSEA 0) with a
/// trivially acceptable verdict. Each omitted path adds one degree of
/// freedom and lets misfit register.
///
/// # Errors
///
/// [`Error::InconsistentSpec`] for an unknown or repeated name in
/// `omit_direct`; [`Error::TooFewRows`] when `n` does not exceed the number
/// of observed variables; [`Error::NonPositiveDefiniteCovariance`] when the
/// sample covariance (or an implied covariance along the way) is singular or
/// indefinite.
pub fn path_fit_indices(
    d: &Dataset,
    spec: &ModelSpec,
    omit_direct: &[String],
) -> Result<FitIndices> {
    spec.validate(d)?;
    let k = spec.predictor_subset.len();
    let p = k + 2;
    let n = d.n();
    if n <= p {
        return Err(Error::TooFewRows { rows: n, needed: p + 1 });
    }

    let mut omit_idx = Vec::with_capacity(omit_direct.len());
    for name in omit_direct {
        let j = spec
            .predictor_subset
            .iter()
            .position(|t| t == name)
            .ok_or_else(|| Error::InconsistentSpec(format!("cannot omit unknown path `{name}`")))?;
        if omit_idx.contains(&j) {
            return Err(Error::InconsistentSpec(format!("path `{name}` omitted twice")));
        }
        omit_idx.push(j);
    }

    // Sample covariance of (x.., m, y) with the n−1 divisor.
    let mut z = DMatrix::zeros(n, p);
    for (j, name) in spec.predictor_subset.iter().enumerate() {
        let col = d.column(name)?;
        for i in 0..n {
            z[(i, j)] = col[i];
        }
    }
    let m_col = d.column(&spec.mediator_name)?;
    let y_col = d.column(&spec.outcome_name)?;
    for i in 0..n {
        z[(i, k)] = m_col[i];
        z[(i, k + 1)] = y_col[i];
    }
    for j in 0..p {
        let mean = z.column(j).mean();
        for i in 0..n {
            z[(i, j)] -= mean;
        }
    }
    let s = (z.transpose() * &z) / (n as f64 - 1.0);

    let s_chol = well_conditioned_cholesky(s.clone())
        .ok_or(Error::NonPositiveDefiniteCovariance)?;
    let ln_det_s: f64 = 2.0 * s_chol.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();

    // Per-equation least squares in the metric of S.
    let phi = s.view((0, 0), (k, k)).into_owned();
    let s_xm = DVector::from_fn(k, |i, _| s[(i, k)]);
    let phi_chol =
        well_conditioned_cholesky(phi.clone()).ok_or(Error::NonPositiveDefiniteCovariance)?;
    let a = phi_chol.solve(&s_xm);
    let sigma2_m = s[(k, k)] - a.dot(&s_xm);

    let included: Vec<usize> = (0..k).filter(|j| !omit_idx.contains(j)).collect();
    let r_vars: Vec<usize> = included.iter().copied().chain(std::iter::once(k)).collect();
    let r_dim = r_vars.len();
    let s_rr = DMatrix::from_fn(r_dim, r_dim, |i, j| s[(r_vars[i], r_vars[j])]);
    let s_ry = DVector::from_fn(r_dim, |i, _| s[(r_vars[i], k + 1)]);
    let rr_chol =
        well_conditioned_cholesky(s_rr).ok_or(Error::NonPositiveDefiniteCovariance)?;
    let beta = rr_chol.solve(&s_ry);
    let sigma2_y = s[(k + 1, k + 1)] - beta.dot(&s_ry);

    let mut c_full = DVector::zeros(k);
    for (pos, &j) in included.iter().enumerate() {
        c_full[j] = beta[pos];
    }
    let b = beta[r_dim - 1];

    let sigma = implied_covariance(&phi, &a, sigma2_m, &c_full, b, sigma2_y);
    let f_ml = ml_discrepancy(&s, &sigma, ln_det_s)
        .ok_or(Error::NonPositiveDefiniteCovariance)?
        .max(0.0);

    let moments = p * (p + 1) / 2;
    let free = k * (k + 1) / 2 + k + 1 + included.len() + 1 + 1;
    debug_assert!(moments >= free);
    let df = moments - free;
    debug_assert_eq!(df, omit_idx.len());

    // Independence baseline: diagonal Σ fits the variances exactly, so its
    // discrepancy reduces to −ln|R| with R the sample correlation matrix.
    let ln_det_diag: f64 = (0..p).map(|j| s[(j, j)].ln()).sum();
    let f_baseline = (ln_det_diag - ln_det_s).max(0.0);
    let baseline_chi_square = (n as f64 - 1.0) * f_baseline;
    let baseline_df = p * (p - 1) / 2;

    let srmr = {
        let mut sum = 0.0;
        for i in 0..p {
            for j in 0..=i {
                let denom = (s[(i, i)] * s[(j, j)]).sqrt();
                let r = (s[(i, j)] - sigma[(i, j)]) / denom;
                sum += r * r;
            }
        }
        (sum / moments as f64).sqrt()
    };

    let (chi_square, cfi, rmsea, cmin_df) = if df == 0 {
        (0.0, 1.0, 0.0, 0.0)
    } else {
        let chi_square = (n as f64 - 1.0) * f_ml;
        let num = (chi_square - df as f64).max(0.0);
        let den = (baseline_chi_square - baseline_df as f64).max(num);
        let cfi = if den > 0.0 { (1.0 - num / den).clamp(0.0, 1.0) } else { 1.0 };
        let rmsea = (num / (df as f64 * (n as f64 - 1.0))).sqrt();
        (chi_square, cfi, rmsea, chi_square / df as f64)
    };

    Ok(FitIndices {
        chi_square,
        df,
        cmin_df,
        cfi,
        rmsea,
        srmr,
        baseline_chi_square,
        baseline_df,
        n,
        verdicts: fit_verdicts(cfi, rmsea, srmr, cmin_df),
    })
}
