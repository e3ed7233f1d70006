//! Seeded synthetic data with known spatially varying coefficients.
//!
//! The generator draws coordinates and predictors, then builds a mediator
//! and an outcome from configurable coefficient surfaces:
//!
//! ```text
//! m_i = Σ_j alpha_j(s_i, t_i) · x_ij + sd_m · ε_i
//! y_i = Σ_j gamma_j(s_i, t_i) · x_ij + beta(s_i, t_i) · m_i + sd_y · η_i
//! ```
//!
//! with `(s, t)` on the unit square, scaled to `extent` metres in the output
//! [`Dataset`]. The true surfaces come back alongside in a [`TruthBundle`] so
//! estimators can be scored against ground truth. Every draw flows through a
//! dedicated [`StreamDomain`], making the output a pure function of the
//! config.

use serde::{Deserialize, Serialize};

use crate::data::{CoordSystem, Dataset, SpatialSample};
use crate::error::{Error, Result};
use crate::rng::{standard_normal, StreamDomain};
use rand::RngExt;

/// How sample coordinates are placed on the unit square.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Independent uniform draws per axis.
    UniformRandom,
    /// First `n` nodes of a near-square lattice (`ceil(sqrt(n))` columns).
    Grid,
}

/// A scalar field over the unit square, evaluated at `(s, t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientField {
    /// The same value everywhere.
    Constant(f64),
    /// Linear blend from `from` at the lower-left corner to `to` at the
    /// upper-right, along `(s + t) / 2`.
    LinearGradient { from: f64, to: f64 },
    /// `sin(2π·f·s) · cos(2π·f·t)`: smooth oscillation with range `[-1, 1]`.
    Sinusoidal { frequency: f64 },
    /// `tanh(10·(s − 1/2))`: a sharp sign flip across the vertical midline.
    SignFlipBoundary,
}

impl CoefficientField {
    /// Evaluate the field at unit-square coordinates.
    pub fn eval(&self, s: f64, t: f64) -> f64 {
        match *self {
            CoefficientField::Constant(c) => c,
            CoefficientField::LinearGradient { from, to } => from + (to - from) * 0.5 * (s + t),
            CoefficientField::Sinusoidal { frequency } => {
                (std::f64::consts::TAU * frequency * s).sin()
                    * (std::f64::consts::TAU * frequency * t).cos()
            }
            CoefficientField::SignFlipBoundary => (10.0 * (s - 0.5)).tanh(),
        }
    }
}

/// Full recipe for one synthetic dataset.
///
/// `alpha_fields[j]` drives predictor `j`'s effect on the mediator,
/// `gamma_fields[j]` its direct effect on the outcome, and `beta_field` the
/// mediator's effect on the outcome. The per-location indirect effect is
/// therefore `alpha_j · beta` and the total effect `gamma_j + alpha_j · beta`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SynthConfig {
    pub n: usize,
    pub layout: Layout,
    pub seed: u64,
    /// Predictor effects on the mediator, one per predictor.
    pub alpha_fields: Vec<CoefficientField>,
    /// Direct predictor effects on the outcome, aligned with `alpha_fields`.
    pub gamma_fields: Vec<CoefficientField>,
    /// Mediator effect on the outcome.
    pub beta_field: CoefficientField,
    /// Noise standard deviation in the mediator equation. With zero noise
    /// the mediator is an exact linear combination of the predictors, so any
    /// regression of the outcome on predictors plus mediator is rank
    /// deficient by construction.
    pub noise_sd_mediator: f64,
    /// Noise standard deviation in the outcome equation.
    pub noise_sd_outcome: f64,
    /// Side length, in metres, that the unit square is scaled to.
    pub extent: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n: 200,
            layout: Layout::UniformRandom,
            seed: 42,
            alpha_fields: vec![CoefficientField::Constant(0.5)],
            gamma_fields: vec![CoefficientField::Constant(0.3)],
            beta_field: CoefficientField::Constant(0.7),
            noise_sd_mediator: 1.0,
            noise_sd_outcome: 1.0,
            extent: 1000.0,
        }
    }
}

impl SynthConfig {
    /// Check the config against its documented domain.
    pub fn validate(&self) -> Result<()> {
        if self.n < 30 {
            return Err(Error::BadConfig(format!("n = {} below the minimum of 30", self.n)));
        }
        if self.alpha_fields.is_empty() {
            return Err(Error::BadConfig("at least one predictor field is required".into()));
        }
        if self.alpha_fields.len() != self.gamma_fields.len() {
            return Err(Error::BadConfig(format!(
                "alpha_fields ({}) and gamma_fields ({}) must align",
                self.alpha_fields.len(),
                self.gamma_fields.len()
            )));
        }
        for (label, sd) in
            [("mediator", self.noise_sd_mediator), ("outcome", self.noise_sd_outcome)]
        {
            if !sd.is_finite() || sd < 0.0 {
                return Err(Error::BadConfig(format!("{label} noise sd must be >= 0, got {sd}")));
            }
        }
        if !self.extent.is_finite() || self.extent <= 0.0 {
            return Err(Error::BadConfig(format!("extent must be positive, got {}", self.extent)));
        }
        Ok(())
    }
}

/// The generating surfaces and effects, aligned with the emitted dataset.
///
/// Outer index: predictor `j`; inner index: sample `i` (matching row order).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TruthBundle {
    pub predictor_names: Vec<String>,
    /// Unit-square coordinates per sample, before scaling by `extent`.
    pub unit_coords: Vec<(f64, f64)>,
    /// `alpha_j(s_i, t_i)`: predictor-to-mediator surfaces.
    pub alpha: Vec<Vec<f64>>,
    /// `gamma_j(s_i, t_i)`: direct predictor-to-outcome surfaces.
    pub gamma: Vec<Vec<f64>>,
    /// `beta(s_i, t_i)`: mediator-to-outcome surface.
    pub beta_m: Vec<f64>,
    /// `alpha_j · beta` per location.
    pub indirect: Vec<Vec<f64>>,
    /// `gamma_j + alpha_j · beta` per location.
    pub total: Vec<Vec<f64>>,
}

/// First `n` nodes of a `ceil(sqrt(n))`-column lattice on the unit square.
///
/// Node `i` sits at column `i % m`, row `i / m`, with centers offset half a
/// cell from the edges, so any `n` yields a near-square point cloud.
pub(crate) fn grid_points(n: usize) -> Vec<(f64, f64)> {
    let m = (n as f64).sqrt().ceil() as usize;
    (0..n)
        .map(|i| {
            let col = i % m;
            let row = i / m;
            (((col as f64) + 0.5) / m as f64, ((row as f64) + 0.5) / m as f64)
        })
        .collect()
}

/// Generate one dataset plus its generating truth.
///
/// Deterministic: the config (seed included) fully determines both outputs,
/// bit for bit. Coordinates, predictors and the two noise vectors each read
/// from their own seeded stream, so changing one block never perturbs the
/// others.
///
/// # Errors
///
/// [`Error::BadConfig`] for an invalid config; dataset assembly errors
/// propagate from [`Dataset::new`] (e.g. coincident random coordinates).
pub fn gen_synthetic(cfg: &SynthConfig) -> Result<(Dataset, TruthBundle)> {
    cfg.validate()?;
    let n = cfg.n;
    let k = cfg.alpha_fields.len();

    let unit_coords: Vec<(f64, f64)> = match cfg.layout {
        Layout::Grid => grid_points(n),
        Layout::UniformRandom => {
            let mut rng = StreamDomain::SynthCoords.rng(cfg.seed);
            (0..n)
                .map(|_| {
                    let s: f64 = rng.random();
                    let t: f64 = rng.random();
                    (s, t)
                })
                .collect()
        }
    };

    // Row-major predictor draws: sample i's block precedes sample i+1's.
    let mut pred_rng = StreamDomain::SynthPredictors.rng(cfg.seed);
    let predictors: Vec<Vec<f64>> =
        (0..n).map(|_| (0..k).map(|_| standard_normal(&mut pred_rng)).collect()).collect();

    let mut med_rng = StreamDomain::SynthNoiseMediator.rng(cfg.seed);
    let mut out_rng = StreamDomain::SynthNoiseOutcome.rng(cfg.seed);

    let mut alpha = vec![vec![0.0; n]; k];
    let mut gamma = vec![vec![0.0; n]; k];
    let mut beta_m = vec![0.0; n];
    let mut samples = Vec::with_capacity(n);

    for (i, &(s, t)) in unit_coords.iter().enumerate() {
        let mut m_val = 0.0;
        let mut y_val = 0.0;
        for j in 0..k {
            alpha[j][i] = cfg.alpha_fields[j].eval(s, t);
            gamma[j][i] = cfg.gamma_fields[j].eval(s, t);
            m_val += alpha[j][i] * predictors[i][j];
            y_val += gamma[j][i] * predictors[i][j];
        }
        beta_m[i] = cfg.beta_field.eval(s, t);
        m_val += cfg.noise_sd_mediator * standard_normal(&mut med_rng);
        y_val += beta_m[i] * m_val + cfg.noise_sd_outcome * standard_normal(&mut out_rng);
        samples.push(SpatialSample {
            id: i.to_string(),
            u: s * cfg.extent,
            v: t * cfg.extent,
            predictors: predictors[i].clone(),
            mediator: m_val,
            outcome: y_val,
        });
    }

    let indirect: Vec<Vec<f64>> =
        (0..k).map(|j| (0..n).map(|i| alpha[j][i] * beta_m[i]).collect()).collect();
    let total: Vec<Vec<f64>> =
        (0..k).map(|j| (0..n).map(|i| gamma[j][i] + indirect[j][i]).collect()).collect();

    let predictor_names: Vec<String> = (1..=k).map(|j| format!("x{j}")).collect();
    let dataset = Dataset::new(
        samples,
        predictor_names.clone(),
        "m".to_string(),
        "y".to_string(),
        CoordSystem::PlanarMeters,
    )?;
    let truth =
        TruthBundle { predictor_names, unit_coords, alpha, gamma, beta_m, indirect, total };
    Ok((dataset, truth))
}

/// Root-mean-square error between two surfaces over the unmasked entries.
///
/// With `mask = None` every entry counts; otherwise only entries whose mask
/// is `true`.
///
/// # Errors
///
/// [`Error::DimensionMismatch`] when lengths disagree; [`Error::EmptyMask`]
/// when no entry survives the mask (or the surfaces are empty).
pub fn surface_rmse(truth: &[f64], estimate: &[f64], mask: Option<&[bool]>) -> Result<f64> {
    if truth.len() != estimate.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), got: estimate.len() });
    }
    if let Some(m) = mask {
        if m.len() != truth.len() {
            return Err(Error::DimensionMismatch { expected: truth.len(), got: m.len() });
        }
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..truth.len() {
        if mask.map_or(true, |m| m[i]) {
            let d = truth[i] - estimate[i];
            sum += d * d;
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::EmptyMask);
    }
    Ok((sum / count as f64).sqrt())
}
