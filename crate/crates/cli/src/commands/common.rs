//! Shared plumbing for dataset-consuming subcommands: schema resolution,
//! loading, and standardization with a scaling sidecar.

use std::path::{Path, PathBuf};

use geomediate::data::{
    load_dataset, standardize, CsvSchema, Dataset, DuplicatePolicy, ScalingInfo,
};
use geomediate::Result;
use serde_json::Value;

use crate::opts::SchemaOpts;
use crate::runconfig::{parse_coord_system, Resolver, RunConfig};

/// Resolve the input path and column mapping from flags, file, defaults.
pub fn resolve_schema(
    res: &mut Resolver,
    args: &SchemaOpts,
    cfg: &RunConfig,
    seed: u64,
) -> Result<(PathBuf, CsvSchema, bool)> {
    let input = res.pick_required(
        "input",
        args.input.as_ref().map(|p| p.display().to_string()),
        cfg.input.clone(),
    )?;
    let u = res.pick("u_col", args.u_col.clone(), cfg.u_col.clone(), "u".into());
    let v = res.pick("v_col", args.v_col.clone(), cfg.v_col.clone(), "v".into());
    let mut id = res.pick_opt("id_col", args.id_col.clone(), cfg.id_col.clone());
    if id.is_none() && header_has_id(Path::new(&input))? {
        // A bare `id` column is a row label, not a predictor.
        id = Some("id".to_string());
        res.record("id_col", &id);
    }
    let mediator =
        res.pick_required("mediator", args.mediator.clone(), cfg.mediator.clone())?;
    let outcome =
        res.pick_required("outcome", args.outcome.clone(), cfg.outcome.clone())?;
    let predictors = args.predictors.clone().or_else(|| cfg.predictors.clone());
    let coord = res.pick(
        "coord_system",
        args.coord_system.clone(),
        cfg.coord_system.clone(),
        "planar_meters".into(),
    );
    let jitter =
        res.pick_switch("jitter_duplicates", args.jitter_duplicates, cfg.jitter_duplicates);
    let raw = res.pick_switch("raw", args.raw, cfg.raw);

    let schema = CsvSchema {
        u,
        v,
        predictors: predictors.unwrap_or_default(),
        mediator,
        outcome,
        id,
        coord_system: parse_coord_system(&coord)?,
        duplicates: if jitter { DuplicatePolicy::Jitter { seed } } else { DuplicatePolicy::Reject },
    };
    Ok((PathBuf::from(input), schema, raw))
}

/// Load the dataset and standardize it unless raw mode is on. The resolved
/// predictor list (after inference from the header) is recorded in the
/// manifest; the scaling sidecar is written as
/// `{subcommand}_scaling.json` when standardization ran.
pub fn load_prepared(
    res: &mut Resolver,
    args: &SchemaOpts,
    cfg: &RunConfig,
    seed: u64,
    out_dir: &Path,
    sidecar_prefix: &str,
) -> Result<(Dataset, Option<ScalingInfo>, bool)> {
    let (input, schema, raw) = resolve_schema(res, args, cfg, seed)?;
    let d = load_dataset(&input, &schema)?;
    res.record("predictors", &d.predictor_names);
    log::info!(
        "loaded {} rows, {} predictors from {}",
        d.n(),
        d.predictor_names.len(),
        input.display()
    );
    if raw {
        return Ok((d, None, raw));
    }
    let (dz, scaling) = standardize(&d)?;
    let sidecar = out_dir.join(format!("{sidecar_prefix}_scaling.json"));
    std::fs::write(&sidecar, scaling.to_json())?;
    log::info!("standardized {} columns; scaling written to {}", scaling.columns.len(), sidecar.display());
    Ok((dz, Some(scaling), raw))
}

/// Whether the CSV header contains a column named exactly `id`.
fn header_has_id(path: &Path) -> Result<bool> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(std::fs::File::open(path)?);
    Ok(rdr.headers()?.iter().any(|h| h == "id"))
}

/// Write pretty JSON with a trailing newline.
pub fn write_json(path: &Path, value: &Value) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("report serializes");
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Conventional significance stars for a p-value.
pub fn stars(p: f64) -> &'static str {
    if p < 0.001 {
        "***"
    } else if p < 0.01 {
        "**"
    } else if p < 0.05 {
        "*"
    } else {
        ""
    }
}

/// A term label fit for a CSV header: `(Intercept)` becomes `intercept`.
pub fn header_label(term: &str) -> String {
    if term == "(Intercept)" {
        "intercept".to_string()
    } else {
        term.to_string()
    }
}
