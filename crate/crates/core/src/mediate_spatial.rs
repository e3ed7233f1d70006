//! Spatially resolved mediation: the triple of equations fit as multiscale
//! local regressions, composed into per-location effect surfaces.
//!
//! Three models are fit over the same samples:
//!
//! ```text
//! (mediator) m ~ x        → per-location a_j(i)
//! (outcome)  y ~ x + m    → per-location c'_j(i) and b(i)
//! (total)    y ~ x        → per-location marginal g_j(i)
//! ```
//!
//! For each predictor `j` and location `i`, the direct effect is `c'_j(i)`,
//! the indirect effect `a_j(i)·b(i)`, and the composed total their sum —
//! exactly, by construction. The marginal total `g_j(i)` from the third
//! model is reported alongside, with its discrepancy from the composed
//! total, because local fits carry no finite-sample identity tying the two:
//! averaging them would bury a genuine diagnostic.
//!
//! Effects are masked per location by pseudo-t at a configured two-sided
//! level; an indirect effect counts as established only where *both* of its
//! legs are. Masks are also derivable downstream from the stored models'
//! pseudo-t matrices plus the level alone.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::{Dataset, Equation, ModelSpec};
use crate::error::{Error, Result};
use crate::gwr::SelectionCriterion;
use crate::kernel::KernelKind;
use crate::mgwr::{mgwr_fit, MgwrConfig, MgwrFit};

/// Settings for a spatial mediation fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct SpatialMediationConfig {
    pub kernel_kind: KernelKind,
    /// Search adaptive neighbour counts (true) or fixed distances (false).
    pub adaptive: bool,
    pub criterion: SelectionCriterion,
    /// Backfitting convergence threshold, per model.
    pub tol: f64,
    /// Maximum backfitting sweeps, per model.
    pub max_iter: usize,
    /// Permit unstandardized variables (see [`MgwrConfig::allow_raw`]).
    pub allow_raw: bool,
    /// Two-sided significance level for masking.
    pub alpha: f64,
    /// Divide the level by each term's effective parameter count before
    /// thresholding, a conservative correction for the effective number of
    /// independent local tests per surface.
    pub enp_adjusted_alpha: bool,
}

impl Default for SpatialMediationConfig {
    fn default() -> Self {
        SpatialMediationConfig {
            kernel_kind: KernelKind::Bisquare,
            adaptive: true,
            criterion: SelectionCriterion::Aicc,
            tol: 1e-5,
            max_iter: 200,
            allow_raw: false,
            alpha: 0.05,
            enp_adjusted_alpha: false,
        }
    }
}

impl SpatialMediationConfig {
    fn to_mgwr(&self) -> MgwrConfig {
        MgwrConfig {
            kernel_kind: self.kernel_kind,
            adaptive: self.adaptive,
            criterion: self.criterion,
            tol: self.tol,
            max_iter: self.max_iter,
            pinned_bandwidths: None,
            allow_raw: self.allow_raw,
        }
    }
}

/// Two-sided standard-normal critical value for level `alpha`.
fn critical_t(alpha: f64) -> f64 {
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    normal.inverse_cdf(1.0 - alpha / 2.0)
}

/// Per-term critical values for one fitted model.
fn per_term_t_crit(fit: &MgwrFit, alpha: f64, enp_adjusted: bool) -> Vec<f64> {
    fit.per_term_enp
        .iter()
        .map(|&enp| {
            let level = if enp_adjusted { alpha / enp.max(1.0) } else { alpha };
            critical_t(level)
        })
        .collect()
}

/// The three local models and their composed effect surfaces.
///
/// All effect matrices are `n x k` over the exogenous predictors in spec
/// order; masks have the same shape and are `true` where the effect passes
/// its significance threshold.
#[derive(Debug, Clone)]
pub struct SpatialMediationFit {
    /// Exogenous predictors, in spec order.
    pub predictor_names: Vec<String>,
    pub alpha: f64,
    pub enp_adjusted_alpha: bool,
    /// Mediator regressed on predictors.
    pub mediator_model: MgwrFit,
    /// Outcome regressed on predictors plus mediator.
    pub outcome_model: MgwrFit,
    /// Outcome regressed on predictors alone.
    pub total_model: MgwrFit,
    /// Mediator-to-outcome coefficient surface `b(i)`.
    pub beta_m: DVector<f64>,
    /// `c'_j(i)`: direct effects from the outcome model.
    pub direct: DMatrix<f64>,
    /// `a_j(i)·b(i)`: indirect effects through the mediator.
    pub indirect: DMatrix<f64>,
    /// `direct + indirect`, elementwise — exact by construction.
    pub composed_total: DMatrix<f64>,
    /// `g_j(i)`: marginal totals from the total model.
    pub marginal_total: DMatrix<f64>,
    /// `composed_total − marginal_total`: the per-location gap between the
    /// two notions of "total effect".
    pub discrepancy: DMatrix<f64>,
    pub direct_mask: Vec<Vec<bool>>,
    /// Both legs significant: `a_j(i)` and `b(i)`.
    pub indirect_mask: Vec<Vec<bool>>,
    /// Either component established.
    pub composed_total_mask: Vec<Vec<bool>>,
    pub marginal_total_mask: Vec<Vec<bool>>,
    /// Significance of `b(i)` alone.
    pub beta_m_mask: Vec<bool>,
}

/// Fit the three local models and compose per-location mediation effects.
///
/// The models are fit sequentially on identical samples; each selects its
/// own per-term bandwidths. Masking uses two-sided pseudo-t thresholds at
/// `config.alpha` (optionally corrected per term, see
/// [`SpatialMediationConfig::enp_adjusted_alpha`]).
///
/// # Errors
///
/// Propagates local-regression errors; [`Error::InconsistentSpec`] when the
/// mediator appears among the predictors; [`Error::BadConfig`] for a level
/// outside (0, 1).
pub fn fit_spatial_mediation(
    d: &Dataset,
    spec: &ModelSpec,
    config: &SpatialMediationConfig,
) -> Result<SpatialMediationFit> {
    if !(config.alpha > 0.0 && config.alpha < 1.0) {
        return Err(Error::BadConfig(format!("alpha must lie in (0, 1), got {}", config.alpha)));
    }
    spec.validate(d)?;
    let mgwr_config = config.to_mgwr();

    let mediator_model = mgwr_fit(d, &spec.clone().with_equation(Equation::Mediator), &mgwr_config)?;
    let outcome_model = mgwr_fit(d, &spec.clone().with_equation(Equation::Outcome), &mgwr_config)?;
    let total_model = mgwr_fit(d, &spec.clone().with_equation(Equation::Total), &mgwr_config)?;

    let n = d.n();
    let k = spec.predictor_subset.len();

    let med_cols: Vec<usize> = spec
        .predictor_subset
        .iter()
        .map(|name| mediator_model.term_index(name).expect("term present"))
        .collect();
    let out_cols: Vec<usize> = spec
        .predictor_subset
        .iter()
        .map(|name| outcome_model.term_index(name).expect("term present"))
        .collect();
    let tot_cols: Vec<usize> = spec
        .predictor_subset
        .iter()
        .map(|name| total_model.term_index(name).expect("term present"))
        .collect();
    let b_col = outcome_model.term_index(&spec.mediator_name).expect("mediator term present");

    let beta_m = DVector::from_fn(n, |i, _| outcome_model.coefficient_surfaces[(i, b_col)]);
    let direct =
        DMatrix::from_fn(n, k, |i, j| outcome_model.coefficient_surfaces[(i, out_cols[j])]);
    let indirect = DMatrix::from_fn(n, k, |i, j| {
        mediator_model.coefficient_surfaces[(i, med_cols[j])] * beta_m[i]
    });
    let composed_total = DMatrix::from_fn(n, k, |i, j| direct[(i, j)] + indirect[(i, j)]);
    let marginal_total =
        DMatrix::from_fn(n, k, |i, j| total_model.coefficient_surfaces[(i, tot_cols[j])]);
    let discrepancy =
        DMatrix::from_fn(n, k, |i, j| composed_total[(i, j)] - marginal_total[(i, j)]);

    let med_crit = per_term_t_crit(&mediator_model, config.alpha, config.enp_adjusted_alpha);
    let out_crit = per_term_t_crit(&outcome_model, config.alpha, config.enp_adjusted_alpha);
    let tot_crit = per_term_t_crit(&total_model, config.alpha, config.enp_adjusted_alpha);

    let beta_m_mask: Vec<bool> =
        (0..n).map(|i| outcome_model.pseudo_t[(i, b_col)].abs() > out_crit[b_col]).collect();
    let mut direct_mask = vec![vec![false; k]; n];
    let mut indirect_mask = vec![vec![false; k]; n];
    let mut composed_total_mask = vec![vec![false; k]; n];
    let mut marginal_total_mask = vec![vec![false; k]; n];
    for i in 0..n {
        for j in 0..k {
            let a_sig = mediator_model.pseudo_t[(i, med_cols[j])].abs() > med_crit[med_cols[j]];
            let d_sig = outcome_model.pseudo_t[(i, out_cols[j])].abs() > out_crit[out_cols[j]];
            direct_mask[i][j] = d_sig;
            indirect_mask[i][j] = a_sig && beta_m_mask[i];
            composed_total_mask[i][j] = d_sig || indirect_mask[i][j];
            marginal_total_mask[i][j] =
                total_model.pseudo_t[(i, tot_cols[j])].abs() > tot_crit[tot_cols[j]];
        }
    }

    Ok(SpatialMediationFit {
        predictor_names: spec.predictor_subset.clone(),
        alpha: config.alpha,
        enp_adjusted_alpha: config.enp_adjusted_alpha,
        mediator_model,
        outcome_model,
        total_model,
        beta_m,
        direct,
        indirect,
        composed_total,
        marginal_total,
        discrepancy,
        direct_mask,
        indirect_mask,
        composed_total_mask,
        marginal_total_mask,
        beta_m_mask,
    })
}
