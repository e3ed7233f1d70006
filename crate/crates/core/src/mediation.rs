//! Global mediation analysis: product-of-coefficients decomposition with
//! bootstrap confidence intervals and a significance screen for predictors.
//!
//! The model is a single-mediator path triple fit by ordinary least squares:
//!
//! ```text
//! (total)    y = γ'x + ε₁
//! (mediator) m = a'x + ε₂
//! (outcome)  y = c''x + b·m + ε₃
//! ```
//!
//! For each predictor `j` the indirect effect through the mediator is
//! `a_j·b`, the direct effect is `c'_j`, and their sum is the total effect.
//! Because the three designs are nested and share rows, the marginal
//! coefficient `γ_j` equals `c'_j + a_j·b` up to floating-point error — an
//! exact least-squares identity, not an approximation — and the fit exposes
//! both sides so callers can audit it.
//!
//! Confidence intervals for the indirect effects come from a seeded
//! case-resampling percentile bootstrap; replicates are indexed streams, so
//! intervals are reproducible bit for bit regardless of thread count.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Equation, ModelSpec};
use crate::error::{Error, Result};
use crate::regress::{ols_from_design, ols_fit, OlsFit};
use crate::rng::StreamDomain;
use rand::RngExt;

/// How a predictor's effect on the outcome routes through the mediator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MediationClass {
    /// No established indirect path (either leg nonsignificant).
    None,
    /// Indirect path established, direct effect not distinguishable from
    /// zero: the mediator carries the whole effect.
    Full,
    /// Both paths established with agreeing signs.
    Partial,
    /// Both paths established with opposing signs: the indirect path
    /// suppresses (works against) the direct one.
    Suppression,
}

impl MediationClass {
    pub fn as_str(&self) -> &'static str {
        match self {
            MediationClass::None => "none",
            MediationClass::Full => "full",
            MediationClass::Partial => "partial",
            MediationClass::Suppression => "suppression",
        }
    }
}

impl std::fmt::Display for MediationClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Decompose one predictor's effect, treating nonzero paths as established.
///
/// Returns `(indirect, total, classification)` with `indirect = a·b` and
/// `total = c_prime + a·b`. This is the significance-blind form: a path
/// counts as established exactly when its coefficient is nonzero. When
/// p-values are available use [`mediation_decompose_with_significance`].
pub fn mediation_decompose(a: f64, b: f64, c_prime: f64) -> (f64, f64, MediationClass) {
    mediation_decompose_with_significance(a, b, c_prime, a != 0.0, b != 0.0, c_prime != 0.0)
}

/// Decompose one predictor's effect with explicit significance flags.
///
/// Classification rule: no mediation unless both legs of the indirect path
/// (`a` and `b`) are established; full mediation when the direct effect is
/// not; otherwise partial when direct and indirect effects agree in sign and
/// suppression when they oppose.
pub fn mediation_decompose_with_significance(
    a: f64,
    b: f64,
    c_prime: f64,
    a_significant: bool,
    b_significant: bool,
    c_prime_significant: bool,
) -> (f64, f64, MediationClass) {
    let indirect = a * b;
    let total = c_prime + indirect;
    let class = if !(a_significant && b_significant) {
        MediationClass::None
    } else if !c_prime_significant {
        MediationClass::Full
    } else if c_prime * indirect < 0.0 {
        MediationClass::Suppression
    } else {
        MediationClass::Partial
    };
    (indirect, total, class)
}

/// One predictor's effect decomposition from the fitted triple.
#[derive(Debug, Clone, Serialize)]
pub struct MediationEffect {
    pub predictor: String,
    /// Predictor-to-mediator coefficient.
    pub a: f64,
    pub a_p_value: f64,
    /// Direct predictor-to-outcome coefficient, mediator held fixed.
    pub c_prime: f64,
    pub c_prime_p_value: f64,
    /// `a · b`.
    pub indirect: f64,
    /// `c_prime + a · b` (definitional sum).
    pub total: f64,
    /// The same predictor's coefficient in the marginal outcome equation;
    /// equals `total` up to floating-point error by the nested-design
    /// identity.
    pub marginal_total: f64,
    pub classification: MediationClass,
    /// Percentile bootstrap interval for the indirect effect, when requested.
    pub indirect_ci: Option<(f64, f64)>,
}

/// Bootstrap settings for indirect-effect confidence intervals.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct BootstrapConfig {
    /// Number of case-resampled replicates.
    pub replicates: usize,
    pub seed: u64,
    /// Central coverage of the percentile interval, in (0, 1).
    pub ci_level: f64,
    /// How many redraws a single replicate may consume before the bootstrap
    /// is declared degenerate.
    pub max_attempts: usize,
}

impl Default for BootstrapConfig {
    fn default() -> Self {
        BootstrapConfig { replicates: 2000, seed: 42, ci_level: 0.95, max_attempts: 8 }
    }
}

impl BootstrapConfig {
    fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::BadConfig("bootstrap needs at least one replicate".into()));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(Error::BadConfig(format!(
                "ci_level must lie in (0, 1), got {}",
                self.ci_level
            )));
        }
        if self.max_attempts == 0 || self.max_attempts > 1024 {
            return Err(Error::BadConfig(format!(
                "max_attempts must lie in 1..=1024, got {}",
                self.max_attempts
            )));
        }
        Ok(())
    }
}

/// What the bootstrap actually did, for reporting.
#[derive(Debug, Clone, Serialize)]
pub struct BootstrapSummary {
    pub replicates: usize,
    pub ci_level: f64,
    /// Total degenerate replicates that were redrawn.
    pub redraws: usize,
}

/// The fitted global mediation triple.
#[derive(Debug, Clone)]
pub struct GlobalMediation {
    /// Per-predictor decompositions, in spec order.
    pub effects: Vec<MediationEffect>,
    /// Mediator-to-outcome coefficient (shared across predictors).
    pub b: f64,
    pub b_p_value: f64,
    /// Mediator regressed on predictors.
    pub mediator_model: OlsFit,
    /// Outcome regressed on predictors plus mediator.
    pub outcome_model: OlsFit,
    /// Outcome regressed on predictors alone.
    pub total_model: OlsFit,
    /// Two-sided significance level used for classification.
    pub alpha: f64,
    pub bootstrap: Option<BootstrapSummary>,
}

/// Index of the `p`-quantile in a sorted sample of size `b`:
/// the `ceil(p·b)`-th order statistic, clamped to the valid range.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    let b = sorted.len() as f64;
    let idx = ((p * b).ceil() as isize - 1).clamp(0, sorted.len() as isize - 1) as usize;
    sorted[idx]
}

/// Fit the mediation triple by OLS and decompose every predictor's effect.
///
/// Classification uses two-sided OLS p-values at level `alpha`. When
/// `bootstrap` is given, percentile intervals for each indirect effect are
/// computed from case-resampled replicates: a replicate draws `n` rows with
/// replacement (the same rows for both equations), refits the mediator and
/// outcome regressions, and records each `a_j·b`. Degenerate replicates
/// (any refit error, e.g. a resample that loses a predictor's variance) are
/// redrawn on a fresh stream up to `max_attempts` times and counted in the
/// summary. The reported interval is widened, if necessary, to include the
/// point estimate, so the interval-contains-estimate contract holds at any
/// level ≥ 0.5 even under extreme resampling skew.
///
/// # Errors
///
/// OLS failures propagate; [`Error::BootstrapDegenerate`] when one replicate
/// exhausts its redraw budget; [`Error::BadConfig`] for an invalid `alpha`
/// or bootstrap config.
pub fn fit_global_mediation(
    d: &Dataset,
    spec: &ModelSpec,
    bootstrap: Option<&BootstrapConfig>,
    alpha: f64,
) -> Result<GlobalMediation> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::BadConfig(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    spec.validate(d)?;
    let spec_total = spec.clone().with_equation(Equation::Total);
    let spec_med = spec.clone().with_equation(Equation::Mediator);
    let spec_out = spec.clone().with_equation(Equation::Outcome);

    let total_model = ols_fit(d, &spec_total)?;
    let mediator_model = ols_fit(d, &spec_med)?;
    let outcome_model = ols_fit(d, &spec_out)?;

    let b = outcome_model.coefficient(&spec.mediator_name).expect("mediator term present");
    let b_p_value = outcome_model.p_value(&spec.mediator_name).expect("mediator term present");

    let boot = match bootstrap {
        Some(cfg) => Some(run_bootstrap(d, spec, cfg)?),
        None => None,
    };

    let mut effects = Vec::with_capacity(spec.predictor_subset.len());
    for (j, name) in spec.predictor_subset.iter().enumerate() {
        let a = mediator_model.coefficient(name).expect("predictor term present");
        let a_p = mediator_model.p_value(name).expect("predictor term present");
        let c_prime = outcome_model.coefficient(name).expect("predictor term present");
        let c_p = outcome_model.p_value(name).expect("predictor term present");
        let marginal_total = total_model.coefficient(name).expect("predictor term present");
        let (indirect, total, classification) = mediation_decompose_with_significance(
            a,
            b,
            c_prime,
            a_p < alpha,
            b_p_value < alpha,
            c_p < alpha,
        );
        let indirect_ci = boot.as_ref().map(|(_, draws)| {
            let mut sorted: Vec<f64> = draws.iter().map(|row| row[j]).collect();
            sorted.sort_by(f64::total_cmp);
            let level = bootstrap.expect("draws imply a config").ci_level;
            let lo = percentile(&sorted, (1.0 - level) / 2.0);
            let hi = percentile(&sorted, (1.0 + level) / 2.0);
            (lo.min(indirect), hi.max(indirect))
        });
        effects.push(MediationEffect {
            predictor: name.clone(),
            a,
            a_p_value: a_p,
            c_prime,
            c_prime_p_value: c_p,
            indirect,
            total,
            marginal_total,
            classification,
            indirect_ci,
        });
    }

    Ok(GlobalMediation {
        effects,
        b,
        b_p_value,
        mediator_model,
        outcome_model,
        total_model,
        alpha,
        bootstrap: boot.map(|(summary, _)| summary),
    })
}

/// Resample rows, refit both equations, and collect per-predictor `a_j·b`.
///
/// Returns the summary plus one row of indirect draws per replicate.
fn run_bootstrap(
    d: &Dataset,
    spec: &ModelSpec,
    cfg: &BootstrapConfig,
) -> Result<(BootstrapSummary, Vec<Vec<f64>>)> {
    cfg.validate()?;
    let design_med = d.design(&spec.clone().with_equation(Equation::Mediator))?;
    let design_out = d.design(&spec.clone().with_equation(Equation::Outcome))?;
    let n = design_med.x.nrows();

    let med_cols: Vec<usize> = spec
        .predictor_subset
        .iter()
        .map(|name| design_med.term_names.iter().position(|t| t == name).expect("term present"))
        .collect();
    let b_col =
        design_out.term_names.iter().position(|t| *t == spec.mediator_name).expect("term present");

    let mut draws = Vec::with_capacity(cfg.replicates);
    let mut redraws = 0usize;
    for replicate in 0..cfg.replicates {
        let mut done = false;
        for attempt in 0..cfg.max_attempts {
            let mut rng = StreamDomain::Bootstrap {
                replicate: replicate as u64,
                attempt: attempt as u64,
            }
            .rng(cfg.seed);
            let idx: Vec<usize> = (0..n).map(|_| rng.random_range(0..n)).collect();

            let xm = DMatrix::from_fn(n, design_med.x.ncols(), |r, c| design_med.x[(idx[r], c)]);
            let ym = DVector::from_fn(n, |r, _| design_med.y[idx[r]]);
            let xo = DMatrix::from_fn(n, design_out.x.ncols(), |r, c| design_out.x[(idx[r], c)]);
            let yo = DVector::from_fn(n, |r, _| design_out.y[idx[r]]);

            let fit_m = ols_from_design(&xm, &ym, design_med.term_names.clone(), true);
            let fit_o = ols_from_design(&xo, &yo, design_out.term_names.clone(), true);
            match (fit_m, fit_o) {
                (Ok(fm), Ok(fo)) => {
                    let b_star = fo.coefficients[b_col];
                    let row: Vec<f64> =
                        med_cols.iter().map(|&c| fm.coefficients[c] * b_star).collect();
                    draws.push(row);
                    done = true;
                    break;
                }
                _ => redraws += 1,
            }
        }
        if !done {
            return Err(Error::BootstrapDegenerate { attempts: cfg.max_attempts });
        }
    }
    Ok((
        BootstrapSummary { replicates: cfg.replicates, ci_level: cfg.ci_level, redraws },
        draws,
    ))
}

/// One predictor's screening outcome.
#[derive(Debug, Clone, Serialize)]
pub struct ScreenRow {
    pub predictor: String,
    /// p-value in the mediator equation.
    pub mediator_p: f64,
    /// p-value in the outcome equation (mediator included).
    pub outcome_p: f64,
    pub retained: bool,
}

/// Result of the two-equation significance screen.
#[derive(Debug, Clone, Serialize)]
pub struct ScreenReport {
    pub alpha: f64,
    pub rows: Vec<ScreenRow>,
    /// Predictors significant in at least one equation, in spec order.
    pub retained: Vec<String>,
    pub dropped: Vec<String>,
}

/// Screen predictors on the fitted triple: a predictor is retained when it
/// is significant (two-sided p below `alpha`) in *at least one* of the
/// mediator and outcome equations, and dropped only when nonsignificant in
/// both. Note the asymmetry this implies: a variable can survive on the
/// strength of either equation alone, so screening on a single equation
/// would generally select a different set.
///
/// # Errors
///
/// Propagates OLS errors; [`Error::BadConfig`] for `alpha` outside (0, 1).
pub fn screen_predictors(d: &Dataset, spec: &ModelSpec, alpha: f64) -> Result<ScreenReport> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::BadConfig(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    spec.validate(d)?;
    let mediator_model = ols_fit(d, &spec.clone().with_equation(Equation::Mediator))?;
    let outcome_model = ols_fit(d, &spec.clone().with_equation(Equation::Outcome))?;

    let mut rows = Vec::with_capacity(spec.predictor_subset.len());
    let mut retained = Vec::new();
    let mut dropped = Vec::new();
    for name in &spec.predictor_subset {
        let mediator_p = mediator_model.p_value(name).expect("predictor term present");
        let outcome_p = outcome_model.p_value(name).expect("predictor term present");
        let keep = mediator_p < alpha || outcome_p < alpha;
        rows.push(ScreenRow { predictor: name.clone(), mediator_p, outcome_p, retained: keep });
        if keep {
            retained.push(name.clone());
        } else {
            dropped.push(name.clone());
        }
    }
    Ok(ScreenReport { alpha, rows, retained, dropped })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{CoordSystem, SpatialSample};
    use crate::synth::{gen_synthetic, CoefficientField, Layout, SynthConfig};
    use approx::assert_abs_diff_eq;

    #[test]
    fn decompose_recovers_known_triples() {
        let (ind, tot, class) = mediation_decompose(-0.63, 0.72, -0.19);
        assert_abs_diff_eq!(ind, -0.4536, epsilon = 1e-12);
        assert_abs_diff_eq!(tot, -0.6436, epsilon = 1e-12);
        assert_abs_diff_eq!(ind, -0.46, epsilon = 0.01);
        assert_abs_diff_eq!(tot, -0.65, epsilon = 0.01);
        assert_eq!(class, MediationClass::Partial);

        let (ind, tot, class) = mediation_decompose(0.26, 0.72, 0.0);
        assert_abs_diff_eq!(ind, 0.1872, epsilon = 1e-12);
        assert_abs_diff_eq!(tot, 0.1872, epsilon = 1e-12);
        assert_abs_diff_eq!(ind, 0.19, epsilon = 0.01);
        assert_abs_diff_eq!(tot, 0.19, epsilon = 0.01);
        assert_eq!(class, MediationClass::Full);

        let (ind, tot, class) = mediation_decompose(-0.35, 0.72, 0.13);
        assert_abs_diff_eq!(ind, -0.252, epsilon = 1e-12);
        assert_abs_diff_eq!(tot, -0.122, epsilon = 1e-12);
        assert_abs_diff_eq!(ind, -0.25, epsilon = 0.01);
        assert_abs_diff_eq!(tot, -0.12, epsilon = 0.01);
        assert_eq!(class, MediationClass::Suppression);
    }

    #[test]
    fn zero_a_path_classifies_none() {
        let (ind, tot, class) = mediation_decompose(0.0, 0.72, 0.4);
        assert_eq!(ind, 0.0);
        assert_eq!(tot, 0.4);
        assert_eq!(class, MediationClass::None);
    }

    #[test]
    fn significance_flags_drive_the_classification() {
        // Indirect path broken by a nonsignificant leg.
        let (_, _, class) =
            mediation_decompose_with_significance(0.5, 0.6, 0.2, true, false, true);
        assert_eq!(class, MediationClass::None);
        // Direct effect present but nonsignificant: full mediation.
        let (_, _, class) =
            mediation_decompose_with_significance(0.5, 0.6, 0.2, true, true, false);
        assert_eq!(class, MediationClass::Full);
        // Same signs: partial.
        let (_, _, class) =
            mediation_decompose_with_significance(0.5, 0.6, 0.2, true, true, true);
        assert_eq!(class, MediationClass::Partial);
        // Opposing signs: suppression.
        let (_, _, class) =
            mediation_decompose_with_significance(-0.5, 0.6, 0.2, true, true, true);
        assert_eq!(class, MediationClass::Suppression);
    }

    #[test]
    fn suppression_total_follows_the_stronger_indirect_path() {
        let (ind, tot, class) = mediation_decompose(-0.35, 0.72, 0.13);
        assert_eq!(class, MediationClass::Suppression);
        assert!(ind < 0.0 && tot < 0.0, "total must carry the indirect sign");
        assert!(ind.abs() > 0.13);
    }

    fn varied_config(seed: u64) -> SynthConfig {
        SynthConfig {
            n: 120,
            layout: Layout::UniformRandom,
            seed,
            alpha_fields: vec![
                CoefficientField::Constant(0.8),
                CoefficientField::LinearGradient { from: -0.5, to: 0.5 },
                CoefficientField::Sinusoidal { frequency: 1.0 },
            ],
            gamma_fields: vec![
                CoefficientField::Constant(-0.4),
                CoefficientField::SignFlipBoundary,
                CoefficientField::Constant(0.0),
            ],
            beta_field: CoefficientField::LinearGradient { from: 0.3, to: 0.9 },
            noise_sd_mediator: 0.7,
            noise_sd_outcome: 0.9,
            extent: 1000.0,
        }
    }

    #[test]
    fn nested_design_identity_holds_to_1e10() {
        for seed in [1, 2, 3, 4, 5] {
            let (d, _) = gen_synthetic(&varied_config(seed)).unwrap();
            let spec = ModelSpec::from_dataset(&d);
            let fit = fit_global_mediation(&d, &spec, None, 0.05).unwrap();
            for e in &fit.effects {
                assert!(
                    (e.marginal_total - e.total).abs() < 1e-10,
                    "seed {seed}, {}: marginal {} vs composed {}",
                    e.predictor,
                    e.marginal_total,
                    e.total
                );
                assert_eq!(e.total, e.c_prime + e.indirect); // definitional
            }
        }
    }

    fn generative_config() -> SynthConfig {
        SynthConfig {
            n: 1000,
            layout: Layout::UniformRandom,
            seed: 11,
            alpha_fields: vec![CoefficientField::Constant(0.5)],
            gamma_fields: vec![CoefficientField::Constant(0.0)],
            beta_field: CoefficientField::Constant(0.7),
            noise_sd_mediator: 1.0,
            noise_sd_outcome: 1.0,
            extent: 1000.0,
        }
    }

    #[test]
    fn generative_indirect_effect_is_recovered_with_covering_ci() {
        let (d, _) = gen_synthetic(&generative_config()).unwrap();
        let spec = ModelSpec::from_dataset(&d);
        let boot = BootstrapConfig { replicates: 800, seed: 5, ..BootstrapConfig::default() };
        let fit = fit_global_mediation(&d, &spec, Some(&boot), 0.05).unwrap();
        let e = &fit.effects[0];
        assert_abs_diff_eq!(e.indirect, 0.35, epsilon = 0.06);
        let (lo, hi) = e.indirect_ci.unwrap();
        assert!(lo <= 0.35 && 0.35 <= hi, "CI [{lo}, {hi}] misses the generative value");
        assert!(lo <= e.indirect && e.indirect <= hi);
        assert_eq!(e.classification, MediationClass::Full);
        let summary = fit.bootstrap.unwrap();
        assert_eq!(summary.replicates, 800);
        assert_eq!(summary.ci_level, 0.95);
    }

    #[test]
    fn bootstrap_is_deterministic_bit_for_bit() {
        let cfg = SynthConfig { n: 80, ..generative_config() };
        let (d, _) = gen_synthetic(&cfg).unwrap();
        let spec = ModelSpec::from_dataset(&d);
        let boot = BootstrapConfig { replicates: 200, seed: 9, ..BootstrapConfig::default() };
        let f1 = fit_global_mediation(&d, &spec, Some(&boot), 0.05).unwrap();
        let f2 = fit_global_mediation(&d, &spec, Some(&boot), 0.05).unwrap();
        let ci1 = f1.effects[0].indirect_ci.unwrap();
        let ci2 = f2.effects[0].indirect_ci.unwrap();
        assert_eq!(ci1.0.to_bits(), ci2.0.to_bits());
        assert_eq!(ci1.1.to_bits(), ci2.1.to_bits());
        assert_eq!(f1.bootstrap.unwrap().redraws, f2.bootstrap.unwrap().redraws);
    }

    #[test]
    fn ci_contains_point_even_at_half_level() {
        let cfg = SynthConfig { n: 60, ..generative_config() };
        let (d, _) = gen_synthetic(&cfg).unwrap();
        let spec = ModelSpec::from_dataset(&d);
        for level in [0.5, 0.8, 0.95] {
            let boot = BootstrapConfig {
                replicates: 300,
                seed: 3,
                ci_level: level,
                ..BootstrapConfig::default()
            };
            let fit = fit_global_mediation(&d, &spec, Some(&boot), 0.05).unwrap();
            let e = &fit.effects[0];
            let (lo, hi) = e.indirect_ci.unwrap();
            assert!(lo <= e.indirect && e.indirect <= hi, "level {level}: [{lo}, {hi}]");
        }
    }

    /// A dataset whose second predictor is nonzero in exactly one row, so a
    /// resample that misses that row yields a constant column.
    fn spike_dataset() -> Dataset {
        let n = 40;
        let samples: Vec<SpatialSample> = (0..n)
            .map(|i| {
                let x1 = ((i * 7 + 3) % 11) as f64 / 11.0 - 0.5;
                let x2 = if i == 0 { 1.0 } else { 0.0 };
                let u = (i % 8) as f64 * 10.0;
                let v = (i / 8) as f64 * 10.0;
                SpatialSample {
                    id: i.to_string(),
                    u,
                    v,
                    predictors: vec![x1, x2],
                    mediator: 0.5 * x1 + 0.2 * x2 + ((i * 13 + 5) % 17) as f64 / 17.0,
                    outcome: 0.3 * x1 + ((i * 5 + 1) % 13) as f64 / 13.0,
                }
            })
            .collect();
        Dataset::new(
            samples,
            vec!["x1".into(), "x2".into()],
            "m".into(),
            "y".into(),
            CoordSystem::PlanarMeters,
        )
        .unwrap()
    }

    #[test]
    fn degenerate_replicates_are_redrawn_and_counted() {
        let d = spike_dataset();
        let spec = ModelSpec::from_dataset(&d);
        let boot = BootstrapConfig { replicates: 60, seed: 1, ..BootstrapConfig::default() };
        let fit = fit_global_mediation(&d, &spec, Some(&boot), 0.05).unwrap();
        let summary = fit.bootstrap.unwrap();
        assert!(summary.redraws > 0, "the spike row should be lost by some resamples");
        assert_eq!(summary.replicates, 60);
    }

    #[test]
    fn exhausted_redraw_budget_reports_degenerate_bootstrap() {
        let d = spike_dataset();
        let spec = ModelSpec::from_dataset(&d);
        let boot = BootstrapConfig {
            replicates: 60,
            seed: 1,
            max_attempts: 1,
            ..BootstrapConfig::default()
        };
        match fit_global_mediation(&d, &spec, Some(&boot), 0.05) {
            Err(Error::BootstrapDegenerate { attempts }) => assert_eq!(attempts, 1),
            other => panic!("expected BootstrapDegenerate, got {other:?}"),
        }
    }

    #[test]
    fn screen_keeps_predictors_significant_in_either_equation() {
        let cfg = SynthConfig {
            n: 300,
            layout: Layout::UniformRandom,
            seed: 21,
            alpha_fields: vec![
                CoefficientField::Constant(0.9),  // x1: strong on mediator
                CoefficientField::Constant(0.0),  // x2: null everywhere
                CoefficientField::Constant(0.8),  // x3: mediator only
            ],
            gamma_fields: vec![
                CoefficientField::Constant(0.6), // x1: strong direct
                CoefficientField::Constant(0.0), // x2: null
                CoefficientField::Constant(0.0), // x3: no direct path
            ],
            beta_field: CoefficientField::Constant(0.5),
            noise_sd_mediator: 1.0,
            noise_sd_outcome: 1.0,
            extent: 1000.0,
        };
        let (d, _) = gen_synthetic(&cfg).unwrap();
        let spec = ModelSpec::from_dataset(&d);
        let report = screen_predictors(&d, &spec, 0.05).unwrap();
        assert_eq!(report.retained, vec!["x1".to_string(), "x3".to_string()]);
        assert_eq!(report.dropped, vec!["x2".to_string()]);
        let x3 = &report.rows[2];
        assert!(x3.mediator_p < 0.05, "x3 survives through the mediator equation");
        assert!(x3.retained);
    }

    #[test]
    fn classification_uses_fitted_p_values() {
        // Strong constant paths with agreeing signs at n = 400: partial.
        let cfg = SynthConfig {
            n: 400,
            alpha_fields: vec![CoefficientField::Constant(0.8)],
            gamma_fields: vec![CoefficientField::Constant(0.5)],
            beta_field: CoefficientField::Constant(0.7),
            seed: 33,
            ..generative_config()
        };
        let (d, _) = gen_synthetic(&cfg).unwrap();
        let spec = ModelSpec::from_dataset(&d);
        let fit = fit_global_mediation(&d, &spec, None, 0.05).unwrap();
        assert_eq!(fit.effects[0].classification, MediationClass::Partial);
        assert!(fit.b_p_value < 0.05);
        assert_abs_diff_eq!(fit.b, 0.7, epsilon = 0.15);
    }

    #[test]
    fn alpha_outside_unit_interval_is_rejected() {
        let (d, _) = gen_synthetic(&generative_config()).unwrap();
        let spec = ModelSpec::from_dataset(&d);
        assert!(matches!(
            fit_global_mediation(&d, &spec, None, 0.0),
            Err(Error::BadConfig(_))
        ));
        assert!(matches!(screen_predictors(&d, &spec, 1.0), Err(Error::BadConfig(_))));
    }
}
