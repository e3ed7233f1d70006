//! The `moran` subcommand: spatial autocorrelation of one variable.

use geomediate::data::load_dataset;
use geomediate::weights::{distance_band_weights, inverse_distance_weights, knn_weights};
use geomediate::{Error, Result};
use serde_json::json;

use super::common::{resolve_schema, write_json};
use crate::opts::MoranArgs;
use crate::runconfig::{resolve_out_dir, Resolver, RunConfig};

pub fn run_moran(args: &MoranArgs) -> Result<()> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let mut res = Resolver::new("moran");
    let out_dir = resolve_out_dir(args.common.out.clone(), cfg.out_dir.as_deref())?;
    let seed = res.pick("seed", args.common.seed, cfg.seed, 42);

    // Moran's I is scale invariant, so the dataset is used as-is.
    let (input, schema, _raw) = resolve_schema(&mut res, &args.schema, &cfg, seed)?;
    let d = load_dataset(&input, &schema)?;
    res.record("predictors", &d.predictor_names);

    let value_col = res.pick(
        "value_col",
        args.value_col.clone(),
        cfg.value_col.clone(),
        d.outcome_name.clone(),
    );
    let values = d.column(&value_col)?;
    let permutations = res.pick("permutations", args.permutations, cfg.permutations, 999);
    let weights_kind =
        res.pick("weights", args.weights.clone(), cfg.weights.clone(), "knn".into());
    let row_standardize =
        res.pick("row_standardize", args.row_standardize, cfg.row_standardize, true);

    let coords = d.coords();
    let w = match weights_kind.as_str() {
        "knn" => {
            let k = res.pick("k", args.k, cfg.k, 8);
            knn_weights(&coords, d.coord_system, k, row_standardize)?
        }
        "distance_band" => {
            let radius = res.pick_required("radius", args.radius, cfg.radius)?;
            distance_band_weights(&coords, d.coord_system, radius, row_standardize)?
        }
        "inverse_distance" => {
            let power = res.pick("power", args.power, cfg.power, 1.0);
            inverse_distance_weights(&coords, d.coord_system, power, row_standardize)?
        }
        other => {
            return Err(Error::BadConfig(format!(
                "unknown weights `{other}` (choose one of: knn, distance_band, inverse_distance)"
            )))
        }
    };

    let r = geomediate::moran::morans_i(&values, &w, permutations, seed)?;
    println!("Moran's I for `{value_col}` over {} locations", d.n());
    println!(
        "I = {:.6}   E[I] = {:.6}   var = {:.3e}   z = {:.4}   p(analytic) = {:.6}",
        r.i, r.expected_i, r.variance, r.z, r.p_analytic
    );
    match r.p_permutation {
        Some(p) => println!("p(permutation, {} draws) = {:.6}", r.permutations, p),
        None => println!("permutation test disabled"),
    }

    write_json(
        &out_dir.join("moran_result.json"),
        &json!({
            "value_col": value_col,
            "n": d.n(),
            "i": r.i,
            "expected_i": r.expected_i,
            "variance": r.variance,
            "z": r.z,
            "p_analytic": r.p_analytic,
            "permutations": r.permutations,
            "p_permutation": r.p_permutation,
        }),
    )?;
    res.write_manifest(&out_dir)?;
    Ok(())
}
