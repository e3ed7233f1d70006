//! Sample container, CSV ingestion, and variable standardization.
//!
//! A [`Dataset`] is a flat list of georeferenced rows: planar or geographic
//! coordinates, a block of predictor columns, one mediator column and one
//! outcome column. Estimators never touch files; everything enters through
//! [`load_dataset`] (schema-mapped CSV) or [`Dataset::new`].
//!
//! Standardization is explicit and reversible: [`standardize`] z-scores every
//! variable column and returns the per-column [`ScalingInfo`] needed by
//! [`unstandardize`] to restore raw units.

use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{mean, sample_sd};
use crate::rng::StreamDomain;

/// Interpretation of the `(u, v)` coordinate pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoordSystem {
    /// Projected planar coordinates in metres.
    PlanarMeters,
    /// Longitude/latitude degrees; distances use a spherical great circle.
    Wgs84Degrees,
}

/// One georeferenced observation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpatialSample {
    /// Row identifier: the schema's id column, or the 0-based row index.
    pub id: String,
    pub u: f64,
    pub v: f64,
    /// Predictor values, aligned with `Dataset::predictor_names`.
    pub predictors: Vec<f64>,
    pub mediator: f64,
    pub outcome: f64,
}

/// A validated collection of samples plus column metadata.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub samples: Vec<SpatialSample>,
    pub predictor_names: Vec<String>,
    pub mediator_name: String,
    pub outcome_name: String,
    pub coord_system: CoordSystem,
    /// True once every variable column has been z-scored.
    pub standardized: bool,
}

/// What to do when two rows share an identical coordinate pair.
#[derive(Debug, Clone, Copy)]
pub enum DuplicatePolicy {
    /// Fail with [`Error::DuplicateCoordinate`] (default).
    Reject,
    /// Displace later duplicates by a seeded uniform offset of 1e-6 of the
    /// coordinate span per axis.
    Jitter { seed: u64 },
}

/// Column mapping for CSV ingestion.
#[derive(Debug, Clone)]
pub struct CsvSchema {
    pub u: String,
    pub v: String,
    /// Empty means: every column that is not a coordinate, id, mediator or
    /// outcome becomes a predictor, in header order.
    pub predictors: Vec<String>,
    pub mediator: String,
    pub outcome: String,
    pub id: Option<String>,
    pub coord_system: CoordSystem,
    pub duplicates: DuplicatePolicy,
}

impl CsvSchema {
    /// Schema with inferred predictors, planar coordinates and duplicate
    /// rejection.
    pub fn new(u: &str, v: &str, mediator: &str, outcome: &str) -> Self {
        CsvSchema {
            u: u.to_string(),
            v: v.to_string(),
            predictors: Vec::new(),
            mediator: mediator.to_string(),
            outcome: outcome.to_string(),
            id: None,
            coord_system: CoordSystem::PlanarMeters,
            duplicates: DuplicatePolicy::Reject,
        }
    }
}

/// Per-column affine transform recorded by [`standardize`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ColumnScale {
    pub name: String,
    pub mean: f64,
    pub sd: f64,
}

/// The sidecar produced alongside a standardized dataset.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingInfo {
    pub columns: Vec<ColumnScale>,
}

impl ScalingInfo {
    pub fn get(&self, name: &str) -> Option<&ColumnScale> {
        self.columns.iter().find(|c| c.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scaling info serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::BadConfig(format!("scaling info: {e}")))
    }
}

/// Which regression a [`ModelSpec`] describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Equation {
    /// Outcome on predictors: the marginal (total-effect) equation.
    Total,
    /// Mediator on predictors.
    Mediator,
    /// Outcome on predictors plus the mediator.
    Outcome,
}

/// Variable roles for one regression or a mediation triple.
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub outcome_name: String,
    pub mediator_name: String,
    /// Predictors entering the design, in order.
    pub predictor_subset: Vec<String>,
    pub include_intercept: bool,
    pub equation: Equation,
}

impl ModelSpec {
    /// All predictors, intercept on, marginal equation.
    pub fn from_dataset(d: &Dataset) -> Self {
        ModelSpec {
            outcome_name: d.outcome_name.clone(),
            mediator_name: d.mediator_name.clone(),
            predictor_subset: d.predictor_names.clone(),
            include_intercept: true,
            equation: Equation::Total,
        }
    }

    pub fn with_equation(mut self, equation: Equation) -> Self {
        self.equation = equation;
        self
    }

    /// Checks that the dataset provides every column this model needs.
    pub fn validate(&self, d: &Dataset) -> Result<()> {
        if self.predictor_subset.is_empty() {
            return Err(Error::InconsistentSpec("empty predictor subset".into()));
        }
        for name in &self.predictor_subset {
            if *name == self.mediator_name {
                return Err(Error::InconsistentSpec(format!(
                    "mediator `{name}` also appears among predictors"
                )));
            }
            if *name == self.outcome_name {
                return Err(Error::InconsistentSpec(format!(
                    "outcome `{name}` also appears among predictors"
                )));
            }
            if !d.predictor_names.contains(name) {
                return Err(Error::MissingColumn(name.clone()));
            }
        }
        if self.mediator_name == self.outcome_name {
            return Err(Error::InconsistentSpec("mediator equals outcome".into()));
        }
        if self.mediator_name != d.mediator_name {
            return Err(Error::MissingColumn(self.mediator_name.clone()));
        }
        if self.outcome_name != d.outcome_name {
            return Err(Error::MissingColumn(self.outcome_name.clone()));
        }
        let dup: Vec<_> = {
            let mut seen = std::collections::HashSet::new();
            self.predictor_subset.iter().filter(|n| !seen.insert(n.as_str())).collect()
        };
        if !dup.is_empty() {
            return Err(Error::InconsistentSpec(format!("duplicate predictor `{}`", dup[0])));
        }
        Ok(())
    }
}

/// Design matrix realised from a dataset and spec.
#[derive(Debug, Clone)]
pub struct Design {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    /// One label per column of `x` ("(Intercept)" first when present).
    pub term_names: Vec<String>,
}

impl Dataset {
    /// Validating constructor for programmatic assembly (tests, generators).
    pub fn new(
        samples: Vec<SpatialSample>,
        predictor_names: Vec<String>,
        mediator_name: String,
        outcome_name: String,
        coord_system: CoordSystem,
    ) -> Result<Self> {
        let p = predictor_names.len();
        let needed = p + 3;
        if samples.len() < needed {
            return Err(Error::TooFewRows { rows: samples.len(), needed });
        }
        for (i, s) in samples.iter().enumerate() {
            if s.predictors.len() != p {
                return Err(Error::DimensionMismatch { expected: p, got: s.predictors.len() });
            }
            let mut vals = vec![s.u, s.v, s.mediator, s.outcome];
            vals.extend_from_slice(&s.predictors);
            if vals.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonNumericCell { row: i, column: "<non-finite>".into() });
            }
        }
        let mut seen: HashMap<(u64, u64), usize> = HashMap::new();
        for (i, s) in samples.iter().enumerate() {
            if let Some(&first) = seen.get(&(s.u.to_bits(), s.v.to_bits())) {
                return Err(Error::DuplicateCoordinate { first, second: i });
            }
            seen.insert((s.u.to_bits(), s.v.to_bits()), i);
        }
        Ok(Dataset {
            samples,
            predictor_names,
            mediator_name,
            outcome_name,
            coord_system,
            standardized: false,
        })
    }

    pub fn n(&self) -> usize {
        self.samples.len()
    }

    /// Number of predictor columns (excludes mediator and outcome).
    pub fn p(&self) -> usize {
        self.predictor_names.len()
    }

    pub fn coords(&self) -> Vec<(f64, f64)> {
        self.samples.iter().map(|s| (s.u, s.v)).collect()
    }

    /// `(min_u, min_v, max_u, max_v)` over all samples.
    pub fn bbox(&self) -> (f64, f64, f64, f64) {
        let mut b = (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY);
        for s in &self.samples {
            b.0 = b.0.min(s.u);
            b.1 = b.1.min(s.v);
            b.2 = b.2.max(s.u);
            b.3 = b.3.max(s.v);
        }
        b
    }

    /// Values of a variable column: a predictor, the mediator or the outcome.
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        if name == self.mediator_name {
            return Ok(self.samples.iter().map(|s| s.mediator).collect());
        }
        if name == self.outcome_name {
            return Ok(self.samples.iter().map(|s| s.outcome).collect());
        }
        match self.predictor_names.iter().position(|n| n == name) {
            Some(j) => Ok(self.samples.iter().map(|s| s.predictors[j]).collect()),
            None => Err(Error::MissingColumn(name.to_string())),
        }
    }

    /// All variable column names: predictors, then mediator, then outcome.
    pub fn variable_names(&self) -> Vec<String> {
        let mut names = self.predictor_names.clone();
        names.push(self.mediator_name.clone());
        names.push(self.outcome_name.clone());
        names
    }

    /// Realise the design matrix and response for `spec`.
    pub fn design(&self, spec: &ModelSpec) -> Result<Design> {
        spec.validate(self)?;
        let n = self.n();
        let mut term_names = Vec::new();
        let mut cols: Vec<Vec<f64>> = Vec::new();
        if spec.include_intercept {
            term_names.push("(Intercept)".to_string());
            cols.push(vec![1.0; n]);
        }
        for name in &spec.predictor_subset {
            term_names.push(name.clone());
            cols.push(self.column(name)?);
        }
        let y_name = match spec.equation {
            Equation::Mediator => &spec.mediator_name,
            Equation::Total => &spec.outcome_name,
            Equation::Outcome => {
                term_names.push(spec.mediator_name.clone());
                cols.push(self.column(&spec.mediator_name)?);
                &spec.outcome_name
            }
        };
        let y = DVector::from_vec(self.column(y_name)?);
        let x = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
        Ok(Design { x, y, term_names })
    }

    /// Serialize as CSV with shortest round-trip float formatting, so a
    /// reload reproduces every value bit for bit.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["id".to_string(), "u".to_string(), "v".to_string()];
        header.extend(self.predictor_names.iter().cloned());
        header.push(self.mediator_name.clone());
        header.push(self.outcome_name.clone());
        w.write_record(&header)?;
        for s in &self.samples {
            let mut rec = vec![s.id.clone(), format!("{}", s.u), format!("{}", s.v)];
            rec.extend(s.predictors.iter().map(|p| format!("{p}")));
            rec.push(format!("{}", s.mediator));
            rec.push(format!("{}", s.outcome));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Read a schema-mapped CSV into a [`Dataset`].
///
/// # Errors
///
/// `MissingColumn` when a mapped column is absent, `NonNumericCell` when a
/// value fails to parse (or is non-finite), `TooFewRows` when fewer than
/// `p + 3` rows survive, `DuplicateCoordinate` under the reject policy.
pub fn load_dataset<P: AsRef<Path>>(path: P, schema: &CsvSchema) -> Result<Dataset> {
    let file = std::fs::File::open(path)?;
    read_dataset(file, schema)
}

/// [`load_dataset`] over any reader; useful for in-memory sources.
pub fn read_dataset<R: Read>(reader: R, schema: &CsvSchema) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.to_string()).collect();

    let col = |name: &str| -> Result<usize> {
        headers.iter().position(|h| h == name).ok_or_else(|| Error::MissingColumn(name.into()))
    };
    let u_ix = col(&schema.u)?;
    let v_ix = col(&schema.v)?;
    let med_ix = col(&schema.mediator)?;
    let out_ix = col(&schema.outcome)?;
    let id_ix = match &schema.id {
        Some(name) => Some(col(name)?),
        None => None,
    };

    let predictor_names: Vec<String> = if schema.predictors.is_empty() {
        headers
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                *i != u_ix && *i != v_ix && *i != med_ix && *i != out_ix && Some(*i) != id_ix
            })
            .map(|(_, h)| h.clone())
            .collect()
    } else {
        schema.predictors.clone()
    };
    let pred_ix: Vec<usize> =
        predictor_names.iter().map(|n| col(n)).collect::<Result<Vec<_>>>()?;

    let parse = |field: &str, row: usize, column: &str| -> Result<f64> {
        let v: f64 = field
            .parse()
            .map_err(|_| Error::NonNumericCell { row, column: column.to_string() })?;
        if !v.is_finite() {
            return Err(Error::NonNumericCell { row, column: column.to_string() });
        }
        Ok(v)
    };

    let mut samples = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let get = |ix: usize| record.get(ix).unwrap_or("");
        let u = parse(get(u_ix), row, &schema.u)?;
        let v = parse(get(v_ix), row, &schema.v)?;
        let mediator = parse(get(med_ix), row, &schema.mediator)?;
        let outcome = parse(get(out_ix), row, &schema.outcome)?;
        let predictors = pred_ix
            .iter()
            .zip(&predictor_names)
            .map(|(&ix, name)| parse(get(ix), row, name))
            .collect::<Result<Vec<f64>>>()?;
        let id = match id_ix {
            Some(ix) => get(ix).to_string(),
            None => row.to_string(),
        };
        samples.push(SpatialSample { id, u, v, predictors, mediator, outcome });
    }

    let needed = predictor_names.len() + 3;
    if samples.len() < needed {
        return Err(Error::TooFewRows { rows: samples.len(), needed });
    }

    resolve_duplicates(&mut samples, schema.duplicates)?;

    Dataset::new(
        samples,
        predictor_names,
        schema.mediator.clone(),
        schema.outcome.clone(),
        schema.coord_system,
    )
}

/// Enforce the duplicate-coordinate policy in place.
fn resolve_duplicates(samples: &mut [SpatialSample], policy: DuplicatePolicy) -> Result<()> {
    let find_dup = |samples: &[SpatialSample]| -> Option<(usize, usize)> {
        let mut seen: HashMap<(u64, u64), usize> = HashMap::new();
        for (i, s) in samples.iter().enumerate() {
            let key = (s.u.to_bits(), s.v.to_bits());
            if let Some(&first) = seen.get(&key) {
                return Some((first, i));
            }
            seen.insert(key, i);
        }
        None
    };

    match policy {
        DuplicatePolicy::Reject => match find_dup(samples) {
            Some((first, second)) => Err(Error::DuplicateCoordinate { first, second }),
            None => Ok(()),
        },
        DuplicatePolicy::Jitter { seed } => {
            let (mut min_u, mut max_u) = (f64::INFINITY, f64::NEG_INFINITY);
            let (mut min_v, mut max_v) = (f64::INFINITY, f64::NEG_INFINITY);
            for s in samples.iter() {
                min_u = min_u.min(s.u);
                max_u = max_u.max(s.u);
                min_v = min_v.min(s.v);
                max_v = max_v.max(s.v);
            }
            let span = (max_u - min_u).max(max_v - min_v).max(f64::MIN_POSITIVE);
            let eps = 1e-6 * span;
            let mut rng = StreamDomain::Jitter.rng(seed);
            for _round in 0..100 {
                let Some((_, second)) = find_dup(samples) else { return Ok(()) };
                samples[second].u += rng.random_range(-eps..=eps);
                samples[second].v += rng.random_range(-eps..=eps);
            }
            // One hundred rounds failing means the data is pathological.
            match find_dup(samples) {
                Some((first, second)) => Err(Error::DuplicateCoordinate { first, second }),
                None => Ok(()),
            }
        }
    }
}

/// Z-score every variable column; coordinates and ids are untouched.
///
/// Returns the standardized copy and the [`ScalingInfo`] that inverts it.
pub fn standardize(d: &Dataset) -> Result<(Dataset, ScalingInfo)> {
    let mut out = d.clone();
    let mut columns = Vec::new();
    for name in d.variable_names() {
        let values = d.column(&name)?;
        let m = mean(&values);
        let sd = sample_sd(&values);
        if !(sd.is_finite() && sd > 1e-15 * (1.0 + m.abs())) {
            return Err(Error::ZeroVariance(name.clone()));
        }
        columns.push(ColumnScale { name: name.clone(), mean: m, sd });
    }
    for s in &mut out.samples {
        for (j, _) in d.predictor_names.iter().enumerate() {
            let c = &columns[j];
            s.predictors[j] = (s.predictors[j] - c.mean) / c.sd;
        }
        let cm = &columns[d.p()];
        s.mediator = (s.mediator - cm.mean) / cm.sd;
        let co = &columns[d.p() + 1];
        s.outcome = (s.outcome - co.mean) / co.sd;
    }
    out.standardized = true;
    Ok((out, ScalingInfo { columns }))
}

/// Invert [`standardize`] with its recorded sidecar.
pub fn unstandardize(d: &Dataset, scaling: &ScalingInfo) -> Result<Dataset> {
    let mut out = d.clone();
    let scale_for = |name: &str| -> Result<&ColumnScale> {
        scaling.get(name).ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    for s in &mut out.samples {
        for (j, name) in d.predictor_names.iter().enumerate() {
            let c = scale_for(name)?;
            s.predictors[j] = s.predictors[j] * c.sd + c.mean;
        }
        let cm = scale_for(&d.mediator_name)?;
        s.mediator = s.mediator * cm.sd + cm.mean;
        let co = scale_for(&d.outcome_name)?;
        s.outcome = s.outcome * co.sd + co.mean;
    }
    out.standardized = false;
    Ok(out)
}
