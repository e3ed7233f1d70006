//! Global (aspatial) least squares: coefficient table, inference, and
//! variance inflation factors.
//!
//! This is the screening stage that precedes any spatial modelling: a
//! conventional OLS fit with t/F inference plus VIF collinearity
//! diagnostics. Solves go through the pivoted-QR path in [`crate::linalg`];
//! normal equations are never formed.

use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, FisherSnedecor, StudentsT};

use crate::data::{Dataset, ModelSpec};
use crate::error::{Error, Result};
use crate::linalg::{lstsq, RCOND_MIN};

/// Ordinary least squares fit with the usual inferential summary.
#[derive(Debug, Clone)]
pub struct OlsFit {
    /// Column labels, `(Intercept)` first when present.
    pub term_names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub std_errors: Vec<f64>,
    pub t_values: Vec<f64>,
    /// Two-sided p-values from the t distribution on `df_resid`.
    pub p_values: Vec<f64>,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    /// Residual variance estimate `rss / df_resid`.
    pub sigma2: f64,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    pub f_statistic: f64,
    pub f_p_value: f64,
    pub df_model: usize,
    pub df_resid: usize,
}

impl OlsFit {
    /// Coefficient for a named term, if present.
    pub fn coefficient(&self, term: &str) -> Option<f64> {
        self.term_names.iter().position(|t| t == term).map(|i| self.coefficients[i])
    }

    /// Two-sided p-value for a named term, if present.
    pub fn p_value(&self, term: &str) -> Option<f64> {
        self.term_names.iter().position(|t| t == term).map(|i| self.p_values[i])
    }
}

/// Fit the regression described by `spec` on `d`.
pub fn ols_fit(d: &Dataset, spec: &ModelSpec) -> Result<OlsFit> {
    let design = d.design(spec)?;
    ols_from_design(&design.x, &design.y, design.term_names, spec.include_intercept)
}

/// Fit on an explicit design matrix (used by resampling loops).
pub fn ols_from_design(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    term_names: Vec<String>,
    has_intercept: bool,
) -> Result<OlsFit> {
    let (n, k) = x.shape();
    if n <= k {
        return Err(Error::TooFewRows { rows: n, needed: k + 1 });
    }
    let sol = lstsq(x, y, RCOND_MIN)?;

    let df_resid = n - k;
    let df_model = if has_intercept { k - 1 } else { k };
    let sigma2 = sol.rss / df_resid as f64;

    let std_errors: Vec<f64> =
        (0..k).map(|j| (sigma2 * sol.xtx_inv[(j, j)]).max(0.0).sqrt()).collect();
    let t_values: Vec<f64> = (0..k)
        .map(|j| if std_errors[j] > 0.0 { sol.coefficients[j] / std_errors[j] } else { f64::INFINITY })
        .collect();
    let t_dist = StudentsT::new(0.0, 1.0, df_resid as f64)
        .map_err(|e| Error::BadConfig(format!("t distribution: {e}")))?;
    let p_values: Vec<f64> = t_values.iter().map(|&t| (2.0 * t_dist.sf(t.abs())).min(1.0)).collect();

    let tss = if has_intercept {
        let ybar = y.mean();
        y.iter().map(|v| (v - ybar) * (v - ybar)).sum::<f64>()
    } else {
        y.dot(y)
    };
    if tss <= 0.0 {
        return Err(Error::ZeroVariance("<response>".into()));
    }
    let r_squared = 1.0 - sol.rss / tss;
    let adj_r_squared = 1.0 - (1.0 - r_squared) * (n as f64 - 1.0) / (df_resid as f64);

    let (f_statistic, f_p_value) = if df_model > 0 && sol.rss > 0.0 {
        let f = ((tss - sol.rss) / df_model as f64) / sigma2;
        let f_dist = FisherSnedecor::new(df_model as f64, df_resid as f64)
            .map_err(|e| Error::BadConfig(format!("F distribution: {e}")))?;
        (f, f_dist.sf(f))
    } else {
        // A saturated or perfect fit: the F statistic degenerates.
        (f64::INFINITY, 0.0)
    };

    Ok(OlsFit {
        term_names,
        coefficients: sol.coefficients.iter().copied().collect(),
        std_errors,
        t_values,
        p_values,
        fitted: sol.fitted.iter().copied().collect(),
        residuals: sol.residuals.iter().copied().collect(),
        rss: sol.rss,
        sigma2,
        r_squared,
        adj_r_squared,
        f_statistic,
        f_p_value,
        df_model,
        df_resid,
    })
}

/// Variance inflation factors for every non-intercept column of the design.
///
/// Each value is `1 / (1 - R²_j)` from the auxiliary regression of column
/// `j` on the remaining columns (with intercept). A single regressor has
/// nothing to inflate it, so the result is `[1.0]` by convention.
///
/// # Errors
///
/// [`Error::PerfectCollinearity`] when an auxiliary regression is an exact
/// fit (R² within 1e-12 of one), naming the offending column.
pub fn vif(d: &Dataset, spec: &ModelSpec) -> Result<Vec<f64>> {
    let design = d.design(spec)?;
    let names: Vec<String> = design
        .term_names
        .iter()
        .filter(|t| t.as_str() != "(Intercept)")
        .cloned()
        .collect();
    let cols: Vec<usize> = design
        .term_names
        .iter()
        .enumerate()
        .filter(|(_, t)| t.as_str() != "(Intercept)")
        .map(|(i, _)| i)
        .collect();
    vif_from_columns(&design.x, &cols, &names)
}

fn vif_from_columns(x: &DMatrix<f64>, cols: &[usize], names: &[String]) -> Result<Vec<f64>> {
    let n = x.nrows();
    if cols.len() == 1 {
        return Ok(vec![1.0]);
    }
    let mut out = Vec::with_capacity(cols.len());
    for (slot, &j) in cols.iter().enumerate() {
        // Auxiliary design: intercept plus every other candidate column.
        let others: Vec<usize> = cols.iter().copied().filter(|&c| c != j).collect();
        let mut aux = DMatrix::zeros(n, others.len() + 1);
        for i in 0..n {
            aux[(i, 0)] = 1.0;
            for (slot2, &c) in others.iter().enumerate() {
                aux[(i, slot2 + 1)] = x[(i, c)];
            }
        }
        let target = DVector::from_fn(n, |i, _| x[(i, j)]);
        let sol = match lstsq(&aux, &target, RCOND_MIN) {
            Ok(s) => s,
            Err(Error::RankDeficient { .. }) => {
                return Err(Error::PerfectCollinearity(names[slot].clone()))
            }
            Err(e) => return Err(e),
        };
        let mbar = target.mean();
        let tss: f64 = target.iter().map(|v| (v - mbar) * (v - mbar)).sum();
        if tss <= 0.0 {
            return Err(Error::ZeroVariance(names[slot].clone()));
        }
        let r2 = 1.0 - sol.rss / tss;
        if r2 >= 1.0 - 1e-12 {
            return Err(Error::PerfectCollinearity(names[slot].clone()));
        }
        out.push(1.0 / (1.0 - r2));
    }
    Ok(out)
}
