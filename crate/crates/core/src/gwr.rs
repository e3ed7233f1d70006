//! Geographically weighted regression.
//!
//! Each observation gets its own coefficient vector, estimated by weighted
//! least squares with weights that decay in geographic distance from that
//! observation. The engine tracks the smoother ("hat") diagonal and its
//! squared norm so that effective parameter counts, the corrected Akaike
//! criterion and honest coefficient standard errors all come out of one pass.
//!
//! Local solves are embarrassingly parallel; they are mapped across a thread
//! pool and collected back in location order, after which every reduction is
//! sequential, so results are independent of thread count and scheduling.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bandwidth::{golden_section_search, SearchTrace};
use crate::data::{Dataset, Design, ModelSpec};
use crate::distance::{diameter, distance_matrix};
use crate::error::{Error, Result};
use crate::kernel::{resolve_bandwidths, weight_unchecked, Bandwidth, KernelKind, KernelSpec};
use crate::linalg::{lstsq, RCOND_MIN};

/// Corrected Akaike information criterion for a local-likelihood smoother.
///
/// `hat_trace` is the trace of the smoother matrix (the effective number of
/// parameters). The criterion has a pole at `hat_trace = n - 2`; at or past
/// it the model has exhausted its degrees of freedom.
pub fn aicc(n: usize, rss: f64, hat_trace: f64) -> Result<f64> {
    let nf = n as f64;
    let denom = nf - 2.0 - hat_trace;
    if denom <= 0.0 {
        return Err(Error::DegreesOfFreedomExhausted { enp: hat_trace, n });
    }
    if !(rss > 0.0) || !rss.is_finite() {
        return Err(Error::BadConfig(format!(
            "information criterion needs a positive residual sum of squares, got {rss}"
        )));
    }
    let sigma_ml = (rss / nf).sqrt();
    Ok(2.0 * nf * sigma_ml.ln()
        + nf * (2.0 * std::f64::consts::PI).ln()
        + nf * (nf + hat_trace) / denom)
}

/// Which score drives bandwidth selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionCriterion {
    /// Corrected Akaike information criterion.
    Aicc,
    /// Leave-one-out cross-validated residual sum of squares.
    Cv,
}

/// Tuning knobs for the local-fit engine.
#[derive(Debug, Clone, Copy, Default)]
pub(crate) struct EngineOptions {
    /// Zero each observation's self weight (leave-one-out prediction).
    pub loo: bool,
    /// Accumulate per-coefficient variance factors.
    pub inference: bool,
    /// Retain the full coefficient smoother matrices (one `n x n` matrix per
    /// design column); needed to seed backfitting, expensive in memory.
    pub coefficient_hats: bool,
}

/// Raw engine output before model-level statistics are attached.
pub(crate) struct EngineOutput {
    /// `n x k` local coefficients, one row per location.
    pub coefficients: DMatrix<f64>,
    /// `n x k` diagonal of `A^-1 X'W^2X A^-1` per location; multiply by the
    /// residual variance to get squared standard errors.
    pub var_unscaled: Option<DMatrix<f64>>,
    pub fitted: DVector<f64>,
    pub residuals: DVector<f64>,
    pub rss: f64,
    /// Trace of the smoother matrix.
    pub hat_trace: f64,
    /// Trace of `S'S`.
    pub tr_sts: f64,
    /// Per design column `j`, the matrix `B_j` with `B_j[i, l]` the weight of
    /// `y_l` in coefficient `j` at location `i` (so `beta_j = B_j y`).
    pub coefficient_hats: Option<Vec<DMatrix<f64>>>,
    /// Resolved per-location bandwidth distances.
    pub bandwidth_distances: Vec<f64>,
}

struct LocalFit {
    coefficients: DVector<f64>,
    var_unscaled: Option<DVector<f64>>,
    s_ii: f64,
    s_norm2: f64,
    fitted_i: f64,
    /// `k x n` coefficient smoother rows for this location.
    c_rows: Option<DMatrix<f64>>,
}

/// Fit every local regression. `x` is the full design (including any
/// intercept column), `dist` the symmetric distance matrix for the same row
/// order.
pub(crate) fn gwr_engine(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    dist: &DMatrix<f64>,
    kernel: &KernelSpec,
    opts: &EngineOptions,
) -> Result<EngineOutput> {
    let (n, k) = x.shape();
    if y.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: y.len() });
    }
    if dist.nrows() != n || dist.ncols() != n {
        return Err(Error::DimensionMismatch { expected: n, got: dist.nrows() });
    }
    if n < k + 1 {
        return Err(Error::TooFewRows { rows: n, needed: k + 1 });
    }
    let bandwidths = resolve_bandwidths(dist, kernel)?;

    let locals: Vec<Result<LocalFit>> = (0..n)
        .into_par_iter()
        .map(|i| local_fit(x, y, dist, kernel.kind, bandwidths[i], i, opts))
        .collect();

    // Sequential scan keeps the reported error deterministic under any
    // thread schedule.
    let mut fits = Vec::with_capacity(n);
    for local in locals {
        fits.push(local?);
    }

    let mut coefficients = DMatrix::zeros(n, k);
    let mut var_unscaled = opts.inference.then(|| DMatrix::zeros(n, k));
    let mut fitted = DVector::zeros(n);
    let mut hat_trace = 0.0;
    let mut tr_sts = 0.0;
    let mut coefficient_hats =
        opts.coefficient_hats.then(|| vec![DMatrix::zeros(n, n); k]);
    for (i, local) in fits.iter().enumerate() {
        for j in 0..k {
            coefficients[(i, j)] = local.coefficients[j];
        }
        if let (Some(vu), Some(local_vu)) = (var_unscaled.as_mut(), local.var_unscaled.as_ref()) {
            for j in 0..k {
                vu[(i, j)] = local_vu[j];
            }
        }
        fitted[i] = local.fitted_i;
        hat_trace += local.s_ii;
        tr_sts += local.s_norm2;
        if let (Some(hats), Some(c)) = (coefficient_hats.as_mut(), local.c_rows.as_ref()) {
            for j in 0..k {
                for l in 0..n {
                    hats[j][(i, l)] = c[(j, l)];
                }
            }
        }
    }
    let residuals = y - &fitted;
    let rss = residuals.norm_squared();

    Ok(EngineOutput {
        coefficients,
        var_unscaled,
        fitted,
        residuals,
        rss,
        hat_trace,
        tr_sts,
        coefficient_hats,
        bandwidth_distances: bandwidths,
    })
}

fn local_fit(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    dist: &DMatrix<f64>,
    kind: KernelKind,
    bandwidth: f64,
    i: usize,
    opts: &EngineOptions,
) -> Result<LocalFit> {
    let n = x.nrows();
    let mut w = DVector::from_fn(n, |l, _| weight_unchecked(dist[(i, l)], bandwidth, kind));
    if opts.loo {
        w[i] = 0.0;
    }
    let w_sqrt = w.map(f64::sqrt);

    let mut xw = x.clone();
    for r in 0..n {
        xw.row_mut(r).scale_mut(w_sqrt[r]);
    }
    let yw = DVector::from_fn(n, |l, _| y[l] * w_sqrt[l]);
    let ls = lstsq(&xw, &yw, RCOND_MIN).map_err(|e| match e {
        Error::RankDeficient { .. } => Error::LocalRankDeficient { location: i },
        other => other,
    })?;

    let x_i = x.row(i).transpose();
    let fitted_i = x_i.dot(&ls.coefficients);

    // Smoother row: s_l = w_l * x_l' (X'WX)^-1 x_i, so that yhat_i = s'y.
    let (s_ii, s_norm2, c_rows) = if opts.coefficient_hats {
        // Coefficient smoother C = (X'WX)^-1 X' W, column l scaled by w_l.
        let mut c = &ls.xtx_inv * x.transpose();
        for l in 0..n {
            c.column_mut(l).scale_mut(w[l]);
        }
        let s = c.transpose() * &x_i;
        (s[i], s.norm_squared(), Some(c))
    } else {
        let b = &ls.xtx_inv * &x_i;
        let mut s = x * &b;
        for l in 0..n {
            s[l] *= w[l];
        }
        (s[i], s.norm_squared(), None)
    };

    let var_unscaled = if opts.inference {
        // Var(beta_i) = sigma^2 A^-1 (X'W^2X) A^-1 with A = X'WX.
        let mut z = x.clone();
        for r in 0..n {
            z.row_mut(r).scale_mut(w[r]);
        }
        let g = z.transpose() * &z;
        let m = &ls.xtx_inv * g * &ls.xtx_inv;
        Some(m.diagonal())
    } else {
        None
    };

    Ok(LocalFit {
        coefficients: ls.coefficients,
        var_unscaled,
        s_ii,
        s_norm2,
        fitted_i,
        c_rows,
    })
}

/// A fitted geographically weighted regression.
#[derive(Debug, Clone)]
pub struct GwrFit {
    /// Column labels, `(Intercept)` first when present.
    pub term_names: Vec<String>,
    pub kernel: KernelSpec,
    /// Resolved bandwidth distance at each location.
    pub bandwidth_distances: Vec<f64>,
    /// `n x k`: row `i` holds the coefficients local to observation `i`.
    pub local_coefficients: DMatrix<f64>,
    /// `n x k` standard errors matching `local_coefficients`.
    pub local_std_errors: DMatrix<f64>,
    /// `n x k` pseudo t values (`coefficient / standard error`).
    pub pseudo_t: DMatrix<f64>,
    pub fitted: DVector<f64>,
    pub residuals: DVector<f64>,
    pub rss: f64,
    /// Effective number of parameters (trace of the smoother matrix).
    pub hat_trace: f64,
    /// Trace of `S'S`.
    pub tr_sts: f64,
    /// Residual variance with the effective-degrees-of-freedom denominator.
    pub sigma2: f64,
    pub aicc: f64,
    pub r_squared: f64,
    pub adj_r_squared: f64,
}

impl GwrFit {
    /// Boolean mask of coefficients whose |pseudo t| exceeds `t_crit`,
    /// shaped like `local_coefficients`.
    pub fn significance_mask(&self, t_crit: f64) -> Vec<Vec<bool>> {
        (0..self.pseudo_t.nrows())
            .map(|i| (0..self.pseudo_t.ncols()).map(|j| self.pseudo_t[(i, j)].abs() > t_crit).collect())
            .collect()
    }

    /// Column index of a term by name.
    pub fn term_index(&self, name: &str) -> Option<usize> {
        self.term_names.iter().position(|t| t == name)
    }
}

/// Fit a geographically weighted regression of the equation described by
/// `spec` under `kernel`.
pub fn gwr_fit(d: &Dataset, spec: &ModelSpec, kernel: KernelSpec) -> Result<GwrFit> {
    let design = d.design(spec)?;
    let dist = distance_matrix(&d.coords(), d.coord_system)?;
    gwr_fit_from_parts(&design, &dist, kernel, spec.include_intercept)
}

/// Same as [`gwr_fit`] but reusing a precomputed design and distance matrix.
pub(crate) fn gwr_fit_from_parts(
    design: &Design,
    dist: &DMatrix<f64>,
    kernel: KernelSpec,
    has_intercept: bool,
) -> Result<GwrFit> {
    let n = design.x.nrows();
    let out = gwr_engine(
        &design.x,
        &design.y,
        dist,
        &kernel,
        &EngineOptions { loo: false, inference: true, coefficient_hats: false },
    )?;

    let nf = n as f64;
    let df_resid = nf - 2.0 * out.hat_trace + out.tr_sts;
    if df_resid <= 0.0 {
        return Err(Error::DegreesOfFreedomExhausted { enp: out.hat_trace, n });
    }
    let sigma2 = out.rss / df_resid;
    let aicc_val = aicc(n, out.rss, out.hat_trace)?;

    let var_unscaled = out.var_unscaled.expect("inference requested");
    let k = design.x.ncols();
    let mut se = DMatrix::zeros(n, k);
    let mut t = DMatrix::zeros(n, k);
    for i in 0..n {
        for j in 0..k {
            let s = (sigma2 * var_unscaled[(i, j)]).max(0.0).sqrt();
            se[(i, j)] = s;
            t[(i, j)] = out.coefficients[(i, j)] / s;
        }
    }

    let tss = if has_intercept {
        let ybar = design.y.mean();
        design.y.iter().map(|v| (v - ybar) * (v - ybar)).sum::<f64>()
    } else {
        design.y.norm_squared()
    };
    if tss <= 0.0 {
        return Err(Error::ZeroVariance("<response>".into()));
    }
    let r_squared = 1.0 - out.rss / tss;
    let adj_denom = nf - out.hat_trace - 1.0;
    let adj_r_squared = if adj_denom > 0.0 {
        1.0 - (1.0 - r_squared) * (nf - 1.0) / adj_denom
    } else {
        f64::NAN
    };

    Ok(GwrFit {
        term_names: design.term_names.clone(),
        kernel,
        bandwidth_distances: out.bandwidth_distances,
        local_coefficients: out.coefficients,
        local_std_errors: se,
        pseudo_t: t,
        fitted: out.fitted,
        residuals: out.residuals,
        rss: out.rss,
        hat_trace: out.hat_trace,
        tr_sts: out.tr_sts,
        sigma2,
        aicc: aicc_val,
        r_squared,
        adj_r_squared,
    })
}

/// Pick a bandwidth for `spec` by golden-section search on `criterion`.
///
/// Adaptive searches run over whole neighbour counts in
/// `[k + 1, n]` (`k` = design columns); fixed searches run over distances in
/// `[diameter/1000, diameter]`. Candidates whose fit is locally rank
/// deficient, exhausts its degrees of freedom, or interpolates exactly score
/// `+inf` and are skipped rather than aborting the search.
pub fn select_bandwidth(
    d: &Dataset,
    spec: &ModelSpec,
    kind: KernelKind,
    adaptive: bool,
    criterion: SelectionCriterion,
) -> Result<(KernelSpec, SearchTrace)> {
    let design = d.design(spec)?;
    let dist = distance_matrix(&d.coords(), d.coord_system)?;
    select_bandwidth_from_parts(&design.x, &design.y, &dist, kind, adaptive, criterion)
}

pub(crate) fn select_bandwidth_from_parts(
    x: &DMatrix<f64>,
    y: &DVector<f64>,
    dist: &DMatrix<f64>,
    kind: KernelKind,
    adaptive: bool,
    criterion: SelectionCriterion,
) -> Result<(KernelSpec, SearchTrace)> {
    let (n, k) = x.shape();
    let mut evaluate = |b: f64| -> Result<f64> {
        let bandwidth = if adaptive {
            Bandwidth::Adaptive(b.round() as usize)
        } else {
            Bandwidth::Fixed(b)
        };
        let ks = KernelSpec { kind, bandwidth };
        let score = match criterion {
            SelectionCriterion::Aicc => gwr_engine(
                x,
                y,
                dist,
                &ks,
                &EngineOptions { loo: false, inference: false, coefficient_hats: false },
            )
            .and_then(|out| {
                if out.rss <= 0.0 {
                    // An exact interpolator; never a sensible smoother.
                    Ok(f64::INFINITY)
                } else {
                    aicc(n, out.rss, out.hat_trace)
                }
            }),
            SelectionCriterion::Cv => gwr_engine(
                x,
                y,
                dist,
                &ks,
                &EngineOptions { loo: true, inference: false, coefficient_hats: false },
            )
            .map(|out| out.rss),
        };
        match score {
            Ok(c) => Ok(c),
            Err(Error::LocalRankDeficient { .. })
            | Err(Error::DegreesOfFreedomExhausted { .. }) => Ok(f64::INFINITY),
            Err(e) => Err(e),
        }
    };

    let (lo, hi, tol, integer) = if adaptive {
        ((k + 1) as f64, n as f64, 0.51, true)
    } else {
        let dmax = diameter(dist);
        (dmax / 1000.0, dmax, dmax * 1e-3, false)
    };
    let (best, best_score, trace) =
        golden_section_search(&mut evaluate, lo, hi, tol, 200, integer)?;
    if !best_score.is_finite() {
        return Err(Error::BadConfig(
            "no bandwidth in the search bracket produced a valid fit".into(),
        ));
    }
    let bandwidth = if adaptive {
        Bandwidth::Adaptive(best.round() as usize)
    } else {
        Bandwidth::Fixed(best)
    };
    Ok((KernelSpec { kind, bandwidth }, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{CoordSystem, Equation, SpatialSample};
    use crate::regress::ols_fit;
    use crate::rng::{standard_normal, stream_rng};
    use approx::assert_relative_eq;
    use rand::RngExt;

    /// One-predictor dataset with spatially varying truth
    /// `y = b0(s,t) + b1(s,t) x + noise`, coordinates in a 1 km square
    /// (`s`, `t` are coordinates rescaled to the unit square).
    fn varying_dataset(
        n: usize,
        seed: u64,
        noise_sd: f64,
        beta: &dyn Fn(f64, f64) -> (f64, f64),
    ) -> crate::data::Dataset {
        let mut coord_rng = stream_rng(seed, 0);
        let mut x_rng = stream_rng(seed, 1);
        let mut m_rng = stream_rng(seed, 2);
        let mut e_rng = stream_rng(seed, 3);
        let samples = (0..n)
            .map(|i| {
                let u = coord_rng.random::<f64>() * 1000.0;
                let v = coord_rng.random::<f64>() * 1000.0;
                let x1 = standard_normal(&mut x_rng);
                let (b0, b1) = beta(u / 1000.0, v / 1000.0);
                let y = b0 + b1 * x1 + noise_sd * standard_normal(&mut e_rng);
                SpatialSample {
                    id: i.to_string(),
                    u,
                    v,
                    predictors: vec![x1],
                    mediator: standard_normal(&mut m_rng),
                    outcome: y,
                }
            })
            .collect();
        crate::data::Dataset::new(
            samples,
            vec!["x1".into()],
            "m".into(),
            "y".into(),
            CoordSystem::PlanarMeters,
        )
        .unwrap()
    }

    /// Two-predictor dataset with constant truth `y = 1 + 2 x1 - x2 + e`.
    fn global_dataset2(n: usize, seed: u64, duplicate_x2: bool) -> crate::data::Dataset {
        let mut coord_rng = stream_rng(seed, 0);
        let mut x_rng = stream_rng(seed, 1);
        let mut e_rng = stream_rng(seed, 3);
        let samples = (0..n)
            .map(|i| {
                let u = coord_rng.random::<f64>() * 1000.0;
                let v = coord_rng.random::<f64>() * 1000.0;
                let x1 = standard_normal(&mut x_rng);
                let x2 = if duplicate_x2 { x1 } else { standard_normal(&mut x_rng) };
                let y = 1.0 + 2.0 * x1 - x2 + 0.5 * standard_normal(&mut e_rng);
                SpatialSample {
                    id: i.to_string(),
                    u,
                    v,
                    predictors: vec![x1, x2],
                    mediator: standard_normal(&mut e_rng),
                    outcome: y,
                }
            })
            .collect();
        crate::data::Dataset::new(
            samples,
            vec!["x1".into(), "x2".into()],
            "m".into(),
            "y".into(),
            CoordSystem::PlanarMeters,
        )
        .unwrap()
    }

    fn total_spec(d: &crate::data::Dataset) -> ModelSpec {
        ModelSpec::from_dataset(d).with_equation(Equation::Total)
    }

    #[test]
    fn aicc_matches_hand_computed_value() {
        // n=100, rss=100, trace=10: sigma_ml = 1 so the first term vanishes,
        // leaving 100 ln(2 pi) + 100 * 110 / 88.
        let expected = 100.0 * (2.0 * std::f64::consts::PI).ln() + 125.0;
        assert_relative_eq!(aicc(100, 100.0, 10.0).unwrap(), expected, epsilon = 1e-9);
    }

    #[test]
    fn aicc_pole_errors_out() {
        for trace in [98.0, 98.5, 120.0] {
            match aicc(100, 50.0, trace) {
                Err(Error::DegreesOfFreedomExhausted { .. }) => {}
                other => panic!("expected exhausted dof at trace {trace}, got {other:?}"),
            }
        }
    }

    #[test]
    fn aicc_rejects_nonpositive_rss() {
        for rss in [0.0, -1.0] {
            match aicc(100, rss, 5.0) {
                Err(Error::BadConfig(_)) => {}
                other => panic!("expected BadConfig for rss {rss}, got {other:?}"),
            }
        }
    }

    #[test]
    fn aicc_monotone_in_rss() {
        let mut last = f64::NEG_INFINITY;
        for rss in [1.0, 5.0, 25.0, 125.0] {
            let a = aicc(80, rss, 12.0).unwrap();
            assert!(a > last);
            last = a;
        }
    }

    #[test]
    fn flat_kernel_reduces_to_ols() {
        let d = global_dataset2(60, 11, false);
        let spec = total_spec(&d);
        let ols = ols_fit(&d, &spec).unwrap();
        let dist = distance_matrix(&d.coords(), d.coord_system).unwrap();
        let b = diameter(&dist) * 1e6;
        let fit = gwr_fit(&d, &spec, KernelSpec::gaussian_fixed(b)).unwrap();

        for i in 0..d.n() {
            for j in 0..3 {
                assert_relative_eq!(
                    fit.local_coefficients[(i, j)],
                    ols.coefficients[j],
                    epsilon = 1e-6,
                    max_relative = 1e-6
                );
                assert_relative_eq!(
                    fit.local_std_errors[(i, j)],
                    ols.std_errors[j],
                    max_relative = 1e-5
                );
            }
            assert_relative_eq!(fit.fitted[i], ols.fitted[i], epsilon = 1e-6, max_relative = 1e-6);
        }
        // A flat smoother has one effective parameter per design column.
        assert_relative_eq!(fit.hat_trace, 3.0, epsilon = 1e-4);
        assert_relative_eq!(fit.r_squared, ols.r_squared, epsilon = 1e-6);
    }

    #[test]
    fn recovers_smoothly_varying_coefficients() {
        // Zero noise, coefficients drifting linearly across the square; the
        // local fits should track the surfaces closely everywhere.
        let beta = |s: f64, t: f64| (1.0 + s, 1.0 + 0.5 * (s + t));
        let d = varying_dataset(400, 5, 0.0, &beta);
        let spec = total_spec(&d);
        let kernel = KernelSpec { kind: KernelKind::Bisquare, bandwidth: Bandwidth::Adaptive(30) };
        let fit = gwr_fit(&d, &spec, kernel).unwrap();

        let mut sq0 = 0.0;
        let mut sq1 = 0.0;
        for (i, s) in d.samples.iter().enumerate() {
            let (b0, b1) = beta(s.u / 1000.0, s.v / 1000.0);
            sq0 += (fit.local_coefficients[(i, 0)] - b0).powi(2);
            sq1 += (fit.local_coefficients[(i, 1)] - b1).powi(2);
        }
        let rmse0 = (sq0 / d.n() as f64).sqrt();
        let rmse1 = (sq1 / d.n() as f64).sqrt();
        // Both true surfaces span a range of 1.0.
        assert!(rmse0 < 0.05, "intercept surface rmse {rmse0}");
        assert!(rmse1 < 0.05, "slope surface rmse {rmse1}");
        assert!(fit.r_squared > 0.99);
    }

    #[test]
    fn duplicated_column_is_locally_rank_deficient() {
        let d = global_dataset2(30, 3, true);
        let spec = total_spec(&d);
        match gwr_fit(&d, &spec, KernelSpec::gaussian_adaptive(10)) {
            Err(Error::LocalRankDeficient { .. }) => {}
            other => panic!("expected LocalRankDeficient, got {other:?}"),
        }
    }

    #[test]
    fn hat_trace_decreases_as_bandwidth_grows() {
        let d = varying_dataset(80, 21, 0.3, &|_, _| (1.0, 2.0));
        let spec = total_spec(&d);
        let mut last = f64::INFINITY;
        for b in [150.0, 400.0, 1200.0, 6000.0] {
            let fit = gwr_fit(&d, &spec, KernelSpec::gaussian_fixed(b)).unwrap();
            assert!(
                fit.hat_trace < last,
                "hat trace {} did not shrink at bandwidth {b}",
                fit.hat_trace
            );
            last = fit.hat_trace;
        }
        // Never below the global-model parameter count.
        assert!(last >= 2.0 - 1e-9);
    }

    #[test]
    fn doubling_y_doubles_coefficients() {
        let d = varying_dataset(50, 9, 0.2, &|s, t| (1.0 + s, 1.0 + t));
        let spec = total_spec(&d);
        let mut doubled_samples = d.samples.clone();
        for s in &mut doubled_samples {
            s.outcome *= 2.0;
        }
        let d2 = crate::data::Dataset::new(
            doubled_samples,
            d.predictor_names.clone(),
            d.mediator_name.clone(),
            d.outcome_name.clone(),
            CoordSystem::PlanarMeters,
        )
        .unwrap();

        let kernel = KernelSpec::gaussian_adaptive(15);
        let f1 = gwr_fit(&d, &spec, kernel).unwrap();
        let f2 = gwr_fit(&d2, &total_spec(&d2), kernel).unwrap();
        // Scaling by a power of two commutes exactly with every float op on
        // the response side; the smoother itself is response independent.
        assert_eq!(f1.hat_trace.to_bits(), f2.hat_trace.to_bits());
        for i in 0..d.n() {
            for j in 0..2 {
                assert_relative_eq!(
                    f2.local_coefficients[(i, j)],
                    2.0 * f1.local_coefficients[(i, j)],
                    max_relative = 1e-14,
                    epsilon = 1e-14
                );
            }
        }
    }

    #[test]
    fn pseudo_t_is_coefficient_over_se() {
        let d = varying_dataset(60, 33, 0.4, &|s, _| (1.0, 1.0 + s));
        let fit = gwr_fit(&d, &total_spec(&d), KernelSpec::gaussian_adaptive(20)).unwrap();
        for i in 0..d.n() {
            for j in 0..2 {
                let se = fit.local_std_errors[(i, j)];
                assert!(se > 0.0);
                assert_relative_eq!(
                    fit.pseudo_t[(i, j)],
                    fit.local_coefficients[(i, j)] / se,
                    max_relative = 1e-12
                );
            }
        }
        let mask = fit.significance_mask(1.96);
        for i in 0..d.n() {
            for j in 0..2 {
                assert_eq!(mask[i][j], fit.pseudo_t[(i, j)].abs() > 1.96);
            }
        }
    }

    #[test]
    fn bandwidth_distances_match_kernel_resolution() {
        let d = varying_dataset(25, 2, 0.1, &|_, _| (0.5, 1.0));
        let spec = total_spec(&d);
        let kernel = KernelSpec { kind: KernelKind::Bisquare, bandwidth: Bandwidth::Adaptive(6) };
        let fit = gwr_fit(&d, &spec, kernel).unwrap();
        let dist = distance_matrix(&d.coords(), d.coord_system).unwrap();
        let expected = resolve_bandwidths(&dist, &kernel).unwrap();
        assert_eq!(fit.bandwidth_distances, expected);
    }

    #[test]
    fn leave_one_out_prediction_ignores_own_response() {
        let d = varying_dataset(40, 17, 0.3, &|s, t| (1.0 + s, 1.0 + t));
        let spec = total_spec(&d);
        let design = d.design(&spec).unwrap();
        let dist = distance_matrix(&d.coords(), d.coord_system).unwrap();
        let kernel = KernelSpec::gaussian_adaptive(10);
        let opts = EngineOptions { loo: true, inference: false, coefficient_hats: false };

        let base = gwr_engine(&design.x, &design.y, &dist, &kernel, &opts).unwrap();
        let mut y2 = design.y.clone();
        y2[7] += 10.0;
        let bumped = gwr_engine(&design.x, &y2, &dist, &kernel, &opts).unwrap();

        assert_eq!(base.fitted[7].to_bits(), bumped.fitted[7].to_bits());
        let moved = (0..40).filter(|&l| l != 7).any(|l| {
            (base.fitted[l] - bumped.fitted[l]).abs() > 1e-6
        });
        assert!(moved, "perturbing one response should move other leave-one-out fits");
    }

    #[test]
    fn selection_distinguishes_global_from_varying_processes() {
        // Constant truth: the criterion should push the neighbour count to
        // (essentially) the whole sample.
        let d_global = varying_dataset(150, 41, 0.5, &|_, _| (1.0, 2.0));
        let spec = total_spec(&d_global);
        let (ks, trace) = select_bandwidth(
            &d_global,
            &spec,
            KernelKind::Bisquare,
            true,
            SelectionCriterion::Aicc,
        )
        .unwrap();
        let n_global = match ks.bandwidth {
            Bandwidth::Adaptive(nn) => nn,
            other => panic!("expected adaptive bandwidth, got {other:?}"),
        };
        assert!(n_global >= 135, "global process selected {n_global} neighbours");
        assert!(!trace.steps.is_empty());

        // Strongly varying truth: a local window must win.
        let beta = |s: f64, t: f64| (1.0 + 2.0 * s, 1.0 + 2.0 * (s + t));
        let d_vary = varying_dataset(150, 43, 0.1, &beta);
        let spec_v = total_spec(&d_vary);
        for criterion in [SelectionCriterion::Aicc, SelectionCriterion::Cv] {
            let (ks, _) =
                select_bandwidth(&d_vary, &spec_v, KernelKind::Bisquare, true, criterion).unwrap();
            let n_vary = match ks.bandwidth {
                Bandwidth::Adaptive(nn) => nn,
                other => panic!("expected adaptive bandwidth, got {other:?}"),
            };
            assert!(n_vary < 75, "varying process selected {n_vary} neighbours ({criterion:?})");
        }
    }

    #[test]
    fn fixed_bandwidth_selection_stays_in_bracket() {
        let beta = |s: f64, t: f64| (1.0 + 2.0 * s, 1.0 + 2.0 * (s + t));
        let d = varying_dataset(100, 47, 0.1, &beta);
        let spec = total_spec(&d);
        let (ks, _) = select_bandwidth(
            &d,
            &spec,
            KernelKind::Gaussian,
            false,
            SelectionCriterion::Aicc,
        )
        .unwrap();
        let dist = distance_matrix(&d.coords(), d.coord_system).unwrap();
        let dmax = diameter(&dist);
        match ks.bandwidth {
            Bandwidth::Fixed(b) => {
                assert!(b >= dmax / 1000.0 && b <= dmax, "selected {b} outside bracket");
                // A strongly varying surface should pick a sub-diameter window.
                assert!(b < 0.5 * dmax, "selected {b} vs diameter {dmax}");
            }
            other => panic!("expected fixed bandwidth, got {other:?}"),
        }
    }
}
