//! Run configuration: flat key-value JSON file, flag overrides, and the
//! manifest each run writes for reproducibility.
//!
//! Precedence per setting: command-line flag, then config-file key, then
//! built-in default. The manifest records every setting the run actually
//! used plus the library version — but not the thread count or anything
//! else that cannot change the numbers — so two manifests agree exactly
//! when and only when the runs were equivalent.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use geomediate::gwr::SelectionCriterion;
use geomediate::kernel::KernelKind;
use geomediate::synth::{CoefficientField, Layout};
use geomediate::{data::CoordSystem, data::Equation, Error, Result};
use serde::Deserialize;
use serde_json::Value;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "GEOMEDIATE_OUT";

/// Every setting a config file may carry, all optional. Keys mirror flag
/// names with underscores. Unknown keys are rejected so typos fail loudly.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    // Input and schema.
    pub input: Option<String>,
    pub out_dir: Option<String>,
    pub seed: Option<u64>,
    pub u_col: Option<String>,
    pub v_col: Option<String>,
    pub id_col: Option<String>,
    pub mediator: Option<String>,
    pub outcome: Option<String>,
    pub predictors: Option<Vec<String>>,
    pub coord_system: Option<String>,
    pub jitter_duplicates: Option<bool>,
    pub raw: Option<bool>,
    // Model equation and kernel search.
    pub equation: Option<String>,
    pub kernel: Option<String>,
    pub adaptive: Option<bool>,
    pub criterion: Option<String>,
    pub bandwidth: Option<f64>,
    pub neighbors: Option<usize>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    // Mediation.
    pub bootstrap: Option<usize>,
    pub ci_level: Option<f64>,
    pub alpha: Option<f64>,
    pub screen: Option<bool>,
    pub omit_direct: Option<Vec<String>>,
    pub enp_adjusted: Option<bool>,
    // Moran test.
    pub value_col: Option<String>,
    pub permutations: Option<usize>,
    pub weights: Option<String>,
    pub k: Option<usize>,
    pub radius: Option<f64>,
    pub power: Option<f64>,
    pub row_standardize: Option<bool>,
    // Map export.
    pub ncols: Option<usize>,
    pub idw_k: Option<usize>,
    pub format: Option<String>,
    // Synthetic generator.
    pub n: Option<usize>,
    pub layout: Option<String>,
    pub alpha_fields: Option<Vec<String>>,
    pub gamma_fields: Option<Vec<String>>,
    pub beta_field: Option<String>,
    pub noise_sd_mediator: Option<f64>,
    pub noise_sd_outcome: Option<f64>,
    pub extent: Option<f64>,
}

impl RunConfig {
    /// Load the config file, or an empty config when no path is given.
    pub fn load(path: Option<&Path>) -> Result<RunConfig> {
        let Some(path) = path else { return Ok(RunConfig::default()) };
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| {
            Error::BadConfig(format!("config file {}: {e}", path.display()))
        })
    }
}

/// Accumulates the resolved settings of one run and writes the manifest.
pub struct Resolver {
    subcommand: &'static str,
    settings: BTreeMap<String, Value>,
}

impl Resolver {
    pub fn new(subcommand: &'static str) -> Resolver {
        Resolver { subcommand, settings: BTreeMap::new() }
    }

    /// Record a resolved setting under its config key.
    pub fn record<T: serde::Serialize>(&mut self, key: &str, value: &T) {
        self.settings.insert(
            key.to_string(),
            serde_json::to_value(value).expect("manifest value serializes"),
        );
    }

    /// Flag beats file beats default; the winner is recorded and returned.
    pub fn pick<T: Clone + serde::Serialize>(
        &mut self,
        key: &str,
        flag: Option<T>,
        file: Option<T>,
        default: T,
    ) -> T {
        let value = flag.or(file).unwrap_or(default);
        self.record(key, &value);
        value
    }

    /// Like [`Resolver::pick`] but without a default; absent stays absent
    /// (recorded as null).
    pub fn pick_opt<T: Clone + serde::Serialize>(
        &mut self,
        key: &str,
        flag: Option<T>,
        file: Option<T>,
    ) -> Option<T> {
        let value = flag.or(file);
        self.record(key, &value);
        value
    }

    /// A setting the subcommand cannot run without.
    pub fn pick_required<T: Clone + serde::Serialize>(
        &mut self,
        key: &str,
        flag: Option<T>,
        file: Option<T>,
    ) -> Result<T> {
        let value = flag.or(file).ok_or_else(|| {
            Error::BadConfig(format!(
                "missing required setting `{key}` (pass --{} or set \"{key}\" in the config file)",
                key.replace('_', "-")
            ))
        })?;
        self.record(key, &value);
        Ok(value)
    }

    /// A boolean switch: the flag can only turn it on; the file sets either.
    pub fn pick_switch(&mut self, key: &str, flag: bool, file: Option<bool>) -> bool {
        let value = flag || file.unwrap_or(false);
        self.record(key, &value);
        value
    }

    /// Write `{subcommand}_manifest.json` into `out_dir` and return its
    /// path. Hyphens in the subcommand become underscores in the filename.
    pub fn write_manifest(&self, out_dir: &Path) -> Result<PathBuf> {
        let mut doc = serde_json::Map::new();
        doc.insert("subcommand".into(), Value::String(self.subcommand.to_string()));
        doc.insert(
            "library_version".into(),
            Value::String(geomediate::VERSION.to_string()),
        );
        for (k, v) in &self.settings {
            doc.insert(k.clone(), v.clone());
        }
        let path = out_dir
            .join(format!("{}_manifest.json", self.subcommand.replace('-', "_")));
        let mut text = serde_json::to_string_pretty(&Value::Object(doc))
            .expect("manifest serializes");
        text.push('\n');
        std::fs::write(&path, text)?;
        Ok(path)
    }
}

/// Resolve the output directory (flag, file, `$GEOMEDIATE_OUT`, working
/// directory) and create it. Deliberately not recorded in the manifest: it
/// locates the outputs without affecting any of their bytes.
pub fn resolve_out_dir(flag: Option<PathBuf>, file: Option<&str>) -> Result<PathBuf> {
    let dir = flag
        .or_else(|| file.map(PathBuf::from))
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn bad_choice(setting: &str, got: &str, choices: &[&str]) -> Error {
    Error::BadConfig(format!(
        "unknown {setting} `{got}` (choose one of: {})",
        choices.join(", ")
    ))
}

pub fn parse_kernel(s: &str) -> Result<KernelKind> {
    match s {
        "gaussian" => Ok(KernelKind::Gaussian),
        "bisquare" => Ok(KernelKind::Bisquare),
        other => Err(bad_choice("kernel", other, &["gaussian", "bisquare"])),
    }
}

pub fn parse_criterion(s: &str) -> Result<SelectionCriterion> {
    match s {
        "aicc" => Ok(SelectionCriterion::Aicc),
        "cv" => Ok(SelectionCriterion::Cv),
        other => Err(bad_choice("criterion", other, &["aicc", "cv"])),
    }
}

pub fn parse_equation(s: &str) -> Result<Equation> {
    match s {
        "total" => Ok(Equation::Total),
        "mediator" => Ok(Equation::Mediator),
        "outcome" => Ok(Equation::Outcome),
        other => Err(bad_choice("equation", other, &["total", "mediator", "outcome"])),
    }
}

pub fn parse_coord_system(s: &str) -> Result<CoordSystem> {
    match s {
        "planar_meters" => Ok(CoordSystem::PlanarMeters),
        "wgs84_degrees" => Ok(CoordSystem::Wgs84Degrees),
        other => Err(bad_choice("coord_system", other, &["planar_meters", "wgs84_degrees"])),
    }
}

pub fn parse_layout(s: &str) -> Result<Layout> {
    match s {
        "uniform_random" => Ok(Layout::UniformRandom),
        "grid" => Ok(Layout::Grid),
        other => Err(bad_choice("layout", other, &["uniform_random", "grid"])),
    }
}

/// Parse one coefficient-field spec: `constant:C`, `gradient:FROM:TO`,
/// `sin:FREQ`, or `flip`.
pub fn parse_field(s: &str) -> Result<CoefficientField> {
    let parts: Vec<&str> = s.split(':').collect();
    let num = |text: &str| -> Result<f64> {
        text.parse::<f64>().map_err(|_| {
            Error::BadConfig(format!("bad number `{text}` in field spec `{s}`"))
        })
    };
    match parts.as_slice() {
        ["constant", c] => Ok(CoefficientField::Constant(num(c)?)),
        ["gradient", from, to] => {
            Ok(CoefficientField::LinearGradient { from: num(from)?, to: num(to)? })
        }
        ["sin", f] | ["sinusoidal", f] => {
            Ok(CoefficientField::Sinusoidal { frequency: num(f)? })
        }
        ["flip"] | ["sign_flip"] => Ok(CoefficientField::SignFlipBoundary),
        _ => Err(Error::BadConfig(format!(
            "bad field spec `{s}` (forms: constant:C, gradient:FROM:TO, sin:FREQ, flip)"
        ))),
    }
}
