//! Multiscale geographically weighted regression.
//!
//! Each design column gets its *own* bandwidth: smooth processes (an
//! intercept, a regional covariate) may borrow strength from the whole map
//! while fast-varying processes stay local. The model is additive,
//! `y = sum_j f_j + e` with `f_j = x_j .* beta_j`, and is estimated by
//! backfitting: terms are refit in turn against their partial residuals,
//! reselecting the term bandwidth each sweep, until the fitted surface stops
//! moving.
//!
//! Alongside each component the engine tracks the matrix that maps the
//! response to that component, so effective parameter counts per term and
//! honest standard errors of the coefficient surfaces come out of the same
//! iteration. Convergence is declared on the relative change of the fitted
//! vector between sweeps (`soc_f`).

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandwidth::golden_section_search;
use crate::data::{Dataset, Design, ModelSpec};
use crate::distance::{diameter, distance_matrix};
use crate::error::{Error, Result};
use crate::gwr::{aicc, gwr_engine, select_bandwidth_from_parts, EngineOptions, SelectionCriterion};
use crate::kernel::{resolve_bandwidths, weight_unchecked, Bandwidth, KernelKind, KernelSpec};

/// Settings for a multiscale fit.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct MgwrConfig {
    pub kernel_kind: KernelKind,
    /// Search adaptive neighbour counts (true) or fixed distances (false).
    pub adaptive: bool,
    pub criterion: SelectionCriterion,
    /// Convergence threshold on the relative fitted-vector change per sweep.
    pub tol: f64,
    /// Maximum backfitting sweeps; zero returns the initialization itself.
    pub max_iter: usize,
    /// Fix every term's bandwidth instead of reselecting each sweep; one
    /// entry per design column (intercept first).
    pub pinned_bandwidths: Option<Vec<Bandwidth>>,
    /// Permit fitting on a dataset that was not standardized. Bandwidths are
    /// only comparable across terms on standardized variables, so this is
    /// opt-in (truth-recovery studies on raw simulated fields).
    pub allow_raw: bool,
}

impl Default for MgwrConfig {
    fn default() -> Self {
        MgwrConfig {
            kernel_kind: KernelKind::Bisquare,
            adaptive: true,
            criterion: SelectionCriterion::Aicc,
            tol: 1e-5,
            max_iter: 200,
            pinned_bandwidths: None,
            allow_raw: false,
        }
    }
}

/// A fitted multiscale model.
#[derive(Debug, Clone)]
pub struct MgwrFit {
    /// Column labels, `(Intercept)` first when present.
    pub term_names: Vec<String>,
    pub kernel_kind: KernelKind,
    /// Final bandwidth per design column.
    pub bandwidths: Vec<Bandwidth>,
    /// `n x k`: column `j` is the coefficient surface for term `j`.
    pub coefficient_surfaces: DMatrix<f64>,
    /// `n x k` standard errors for `coefficient_surfaces`.
    pub local_std_errors: DMatrix<f64>,
    /// `n x k` pseudo t values.
    pub pseudo_t: DMatrix<f64>,
    /// Effective number of parameters consumed by each term.
    pub per_term_enp: Vec<f64>,
    pub fitted: DVector<f64>,
    pub residuals: DVector<f64>,
    pub rss: f64,
    /// Total effective number of parameters (trace of the joint smoother).
    pub hat_trace: f64,
    /// Trace of `S'S` for the joint smoother.
    pub tr_sts: f64,
    /// Residual variance with the effective-degrees-of-freedom denominator.
    pub sigma2: f64,
    pub aicc: f64,
    pub r_squared: f64,
    pub adj_r_squared: f64,
    /// Full sweeps executed (0 = initialization only).
    pub iterations: usize,
    pub converged: bool,
    /// Relative fitted-vector change after each sweep.
    pub soc_trace: Vec<f64>,
    /// Residual sum of squares at initialization and after each sweep.
    pub rss_trace: Vec<f64>,
}

impl MgwrFit {
    /// Boolean mask of coefficients whose |pseudo t| exceeds `t_crit`.
    pub fn significance_mask(&self, t_crit: f64) -> Vec<Vec<bool>> {
        (0..self.pseudo_t.nrows())
            .map(|i| {
                (0..self.pseudo_t.ncols()).map(|j| self.pseudo_t[(i, j)].abs() > t_crit).collect()
            })
            .collect()
    }

    pub fn term_index(&self, name: &str) -> Option<usize> {
        self.term_names.iter().position(|t| t == name)
    }
}

/// Backfitting internals; consumed by the invariant tests, which check that
/// every component keeps agreeing with its tracked smoother.
#[cfg_attr(not(test), allow(dead_code))]
pub(crate) struct BackfitDetail {
    /// Additive components `f_j` (each length n).
    pub components: Vec<DVector<f64>>,
    /// Coefficient smoothers `B_j` with `beta_j = B_j y`.
    pub coef_hats: Vec<DMatrix<f64>>,
}

/// Convergence statistic: relative change of the fitted vector.
///
/// `|new - old| / |new|` in the Euclidean norm; falls back to the absolute
/// change when the new fitted vector is identically zero.
pub fn soc_f(yhat_new: &DVector<f64>, yhat_old: &DVector<f64>) -> f64 {
    let delta = (yhat_new - yhat_old).norm();
    let scale = yhat_new.norm();
    if scale > 0.0 {
        delta / scale
    } else {
        delta
    }
}

/// Fit a multiscale geographically weighted regression.
///
/// The dataset must be standardized (see [`crate::standardize`]) unless
/// `config.allow_raw` is set, because per-term bandwidths are only
/// comparable when every variable is on a common scale.
pub fn mgwr_fit(d: &Dataset, spec: &ModelSpec, config: &MgwrConfig) -> Result<MgwrFit> {
    if !d.standardized && !config.allow_raw {
        return Err(Error::NotStandardized);
    }
    let design = d.design(spec)?;
    let dist = distance_matrix(&d.coords(), d.coord_system)?;
    mgwr_fit_from_parts(&design, &dist, config).map(|(fit, _)| fit)
}

/// Engine entry point that reuses a prebuilt design and distance matrix and
/// also returns the backfitting internals.
pub(crate) fn mgwr_fit_from_parts(
    design: &Design,
    dist: &DMatrix<f64>,
    config: &MgwrConfig,
) -> Result<(MgwrFit, BackfitDetail)> {
    let x = &design.x;
    let y = &design.y;
    let (n, k) = x.shape();
    if let Some(pinned) = &config.pinned_bandwidths {
        if pinned.len() != k {
            return Err(Error::BadConfig(format!(
                "{} pinned bandwidths for {k} design columns",
                pinned.len()
            )));
        }
    }
    if !(config.tol > 0.0) {
        return Err(Error::BadConfig(format!("tolerance must be positive, got {}", config.tol)));
    }

    // ----- Initialization: one single-bandwidth fit shared by all terms.
    let init_bandwidth = match &config.pinned_bandwidths {
        Some(pinned) => pinned[0],
        None => {
            let (spec, _) = select_bandwidth_from_parts(
                x,
                y,
                dist,
                config.kernel_kind,
                config.adaptive,
                config.criterion,
            )?;
            spec.bandwidth
        }
    };
    let init_kernel = KernelSpec { kind: config.kernel_kind, bandwidth: init_bandwidth };
    let init = gwr_engine(
        x,
        y,
        dist,
        &init_kernel,
        &EngineOptions { loo: false, inference: false, coefficient_hats: true },
    )?;

    let xcols: Vec<DVector<f64>> = (0..k).map(|j| x.column(j).into_owned()).collect();
    let mut beta: Vec<DVector<f64>> =
        (0..k).map(|j| init.coefficients.column(j).into_owned()).collect();
    let mut components: Vec<DVector<f64>> =
        (0..k).map(|j| xcols[j].component_mul(&beta[j])).collect();
    let mut coef_hats = init.coefficient_hats.expect("hats requested");
    let mut bandwidths: Vec<Bandwidth> = match &config.pinned_bandwidths {
        Some(pinned) => pinned.clone(),
        None => vec![init_bandwidth; k],
    };

    let mut yhat = DVector::zeros(n);
    for f in &components {
        yhat += f;
    }
    let mut rss_trace = vec![(y - &yhat).norm_squared()];
    let mut soc_trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    // ----- Backfitting sweeps.
    for _sweep in 0..config.max_iter {
        let yhat_old = yhat.clone();
        for j in 0..k {
            // Partial residual: everything the other terms do not explain.
            let e = (y - &yhat) + &components[j];

            if config.pinned_bandwidths.is_none() {
                bandwidths[j] = select_term_bandwidth(
                    &xcols[j],
                    &e,
                    dist,
                    config.kernel_kind,
                    config.adaptive,
                    config.criterion,
                )?;
            }
            let bw = resolve_term_bandwidths(dist, config.kernel_kind, bandwidths[j])?;
            let (beta_j, _trace, smoother) =
                term_fit(&xcols[j], &e, dist, config.kernel_kind, &bw, false, true)?;
            let a_j = smoother.expect("smoother requested");

            // The response-to-coefficient map: beta_j = A_j (I - sum_{l != j} R_l) y,
            // where R_l row i is x_{il} times row i of B_l.
            let mut m = DMatrix::identity(n, n);
            for l in 0..k {
                if l == j {
                    continue;
                }
                let bl = &coef_hats[l];
                for i in 0..n {
                    let xi = xcols[l][i];
                    if xi == 0.0 {
                        continue;
                    }
                    for c in 0..n {
                        m[(i, c)] -= xi * bl[(i, c)];
                    }
                }
            }
            coef_hats[j] = &a_j * &m;

            let f_new = xcols[j].component_mul(&beta_j);
            yhat -= &components[j];
            yhat += &f_new;
            components[j] = f_new;
            beta[j] = beta_j;
        }
        iterations += 1;
        let soc = soc_f(&yhat, &yhat_old);
        soc_trace.push(soc);
        rss_trace.push((y - &yhat).norm_squared());
        if soc < config.tol {
            converged = true;
            break;
        }
    }

    // ----- Model-level statistics from the tracked smoothers.
    let residuals = y - &yhat;
    let rss = residuals.norm_squared();

    let mut joint = DMatrix::zeros(n, n);
    let mut per_term_enp = Vec::with_capacity(k);
    for j in 0..k {
        let bj = &coef_hats[j];
        let mut enp_j = 0.0;
        for i in 0..n {
            let xi = xcols[j][i];
            enp_j += xi * bj[(i, i)];
            for c in 0..n {
                joint[(i, c)] += xi * bj[(i, c)];
            }
        }
        per_term_enp.push(enp_j);
    }
    let hat_trace = joint.diagonal().sum();
    let tr_sts = joint.norm_squared();

    let nf = n as f64;
    let df_resid = nf - 2.0 * hat_trace + tr_sts;
    if df_resid <= 0.0 {
        return Err(Error::DegreesOfFreedomExhausted { enp: hat_trace, n });
    }
    let sigma2 = rss / df_resid;
    let aicc_val = aicc(n, rss, hat_trace)?;

    let mut surfaces = DMatrix::zeros(n, k);
    let mut se = DMatrix::zeros(n, k);
    let mut t = DMatrix::zeros(n, k);
    for j in 0..k {
        let bj = &coef_hats[j];
        for i in 0..n {
            surfaces[(i, j)] = beta[j][i];
            let row_norm2: f64 = (0..n).map(|c| bj[(i, c)] * bj[(i, c)]).sum();
            let s = (sigma2 * row_norm2).sqrt();
            se[(i, j)] = s;
            t[(i, j)] = beta[j][i] / s;
        }
    }

    let ybar = y.mean();
    let tss: f64 = y.iter().map(|v| (v - ybar) * (v - ybar)).sum();
    if tss <= 0.0 {
        return Err(Error::ZeroVariance("<response>".into()));
    }
    let r_squared = 1.0 - rss / tss;
    let adj_denom = nf - hat_trace - 1.0;
    let adj_r_squared = if adj_denom > 0.0 {
        1.0 - (1.0 - r_squared) * (nf - 1.0) / adj_denom
    } else {
        f64::NAN
    };

    let fit = MgwrFit {
        term_names: design.term_names.clone(),
        kernel_kind: config.kernel_kind,
        bandwidths,
        coefficient_surfaces: surfaces,
        local_std_errors: se,
        pseudo_t: t,
        per_term_enp,
        fitted: yhat,
        residuals,
        rss,
        hat_trace,
        tr_sts,
        sigma2,
        aicc: aicc_val,
        r_squared,
        adj_r_squared,
        iterations,
        converged,
        soc_trace,
        rss_trace,
    };
    Ok((fit, BackfitDetail { components, coef_hats }))
}

fn resolve_term_bandwidths(
    dist: &DMatrix<f64>,
    kind: KernelKind,
    bandwidth: Bandwidth,
) -> Result<Vec<f64>> {
    resolve_bandwidths(dist, &KernelSpec { kind, bandwidth })
}

/// Local no-intercept regression of `e` on the single column `xj`.
///
/// Returns the coefficient surface, the trace of the term smoother, and
/// (when requested) the full coefficient smoother `A_j` with
/// `A_j[i, l] = w_il x_l / sum_m w_im x_m^2`.
fn term_fit(
    xj: &DVector<f64>,
    e: &DVector<f64>,
    dist: &DMatrix<f64>,
    kind: KernelKind,
    bandwidths: &[f64],
    loo: bool,
    want_smoother: bool,
) -> Result<(DVector<f64>, f64, Option<DMatrix<f64>>)> {
    let n = xj.len();
    let rows: Vec<Result<(f64, f64, Option<DVector<f64>>)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let b = bandwidths[i];
            let mut den = 0.0;
            let mut num = 0.0;
            let mut w = DVector::zeros(n);
            for l in 0..n {
                let mut wl = weight_unchecked(dist[(i, l)], b, kind);
                if loo && l == i {
                    wl = 0.0;
                }
                w[l] = wl;
                let xl = xj[l];
                den += wl * xl * xl;
                num += wl * xl * e[l];
            }
            if !(den > 0.0) || !den.is_finite() {
                return Err(Error::LocalRankDeficient { location: i });
            }
            let beta_i = num / den;
            let w_self = if loo { 0.0 } else { 1.0 };
            let s_ii = w_self * xj[i] * xj[i] / den;
            let row = want_smoother.then(|| {
                DVector::from_fn(n, |l, _| w[l] * xj[l] / den)
            });
            Ok((beta_i, s_ii, row))
        })
        .collect();

    let mut beta = DVector::zeros(n);
    let mut trace = 0.0;
    let mut smoother = want_smoother.then(|| DMatrix::zeros(n, n));
    for (i, row) in rows.into_iter().enumerate() {
        let (b_i, s_ii, a_row) = row?;
        beta[i] = b_i;
        trace += s_ii;
        if let (Some(sm), Some(r)) = (smoother.as_mut(), a_row) {
            sm.row_mut(i).copy_from(&r.transpose());
        }
    }
    Ok((beta, trace, smoother))
}

/// Golden-section selection of one term's bandwidth against its partial
/// residual. Degenerate candidates score `+inf` and are skipped.
fn select_term_bandwidth(
    xj: &DVector<f64>,
    e: &DVector<f64>,
    dist: &DMatrix<f64>,
    kind: KernelKind,
    adaptive: bool,
    criterion: SelectionCriterion,
) -> Result<Bandwidth> {
    let n = xj.len();
    let mut evaluate = |b: f64| -> Result<f64> {
        let bandwidth =
            if adaptive { Bandwidth::Adaptive(b.round() as usize) } else { Bandwidth::Fixed(b) };
        let score = (|| {
            let bw = resolve_term_bandwidths(dist, kind, bandwidth)?;
            match criterion {
                SelectionCriterion::Aicc => {
                    let (beta, trace, _) = term_fit(xj, e, dist, kind, &bw, false, false)?;
                    let rss = (e - xj.component_mul(&beta)).norm_squared();
                    if rss <= 0.0 {
                        return Ok(f64::INFINITY);
                    }
                    aicc(n, rss, trace)
                }
                SelectionCriterion::Cv => {
                    let (beta, _, _) = term_fit(xj, e, dist, kind, &bw, true, false)?;
                    Ok((e - xj.component_mul(&beta)).norm_squared())
                }
            }
        })();
        match score {
            Ok(c) => Ok(c),
            Err(Error::LocalRankDeficient { .. }) | Err(Error::DegreesOfFreedomExhausted { .. }) => {
                Ok(f64::INFINITY)
            }
            Err(err) => Err(err),
        }
    };

    let (lo, hi, tol, integer) = if adaptive {
        (2.0, n as f64, 0.51, true)
    } else {
        let dmax = diameter(dist);
        (dmax / 1000.0, dmax, dmax * 1e-3, false)
    };
    let (best, best_score, _) = golden_section_search(&mut evaluate, lo, hi, tol, 200, integer)?;
    if !best_score.is_finite() {
        return Err(Error::BadConfig(
            "no bandwidth in the search bracket produced a valid term fit".into(),
        ));
    }
    Ok(if adaptive { Bandwidth::Adaptive(best.round() as usize) } else { Bandwidth::Fixed(best) })
}
