//! The `mediate` (global decomposition) and `mediate-spatial` (local
//! surfaces) subcommands.

use std::path::Path;

use geomediate::data::{Dataset, ModelSpec};
use geomediate::mediate_spatial::{fit_spatial_mediation, SpatialMediationConfig, SpatialMediationFit};
use geomediate::mediation::{fit_global_mediation, screen_predictors, BootstrapConfig};
use geomediate::pathfit::path_fit_indices;
use geomediate::{Error, Result};
use serde_json::json;

use super::common::{load_prepared, stars, write_json};
use super::estimate::{mgwr_summary_json, resolve_kernel};
use crate::opts::{MediateArgs, MediateSpatialArgs};
use crate::runconfig::{resolve_out_dir, Resolver, RunConfig};

pub fn run_mediate(args: &MediateArgs) -> Result<()> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let mut res = Resolver::new("mediate");
    let out_dir = resolve_out_dir(args.common.out.clone(), cfg.out_dir.as_deref())?;
    let seed = res.pick("seed", args.common.seed, cfg.seed, 42);
    let (d, _scaling, _raw) =
        load_prepared(&mut res, &args.schema, &cfg, seed, &out_dir, "mediate")?;

    let alpha = res.pick("alpha", args.alpha, cfg.alpha, 0.05);
    let screen = res.pick_switch("screen", args.screen, cfg.screen);
    let mut spec = ModelSpec::from_dataset(&d);

    let screen_report = if screen {
        let report = screen_predictors(&d, &spec, alpha)?;
        println!("Predictor screening at alpha = {alpha}:");
        println!("{:<16} {:>12} {:>12}  kept", "predictor", "p(mediator)", "p(outcome)");
        for row in &report.rows {
            println!(
                "{:<16} {:>12.5} {:>12.5}  {}",
                row.predictor,
                row.mediator_p,
                row.outcome_p,
                if row.retained { "yes" } else { "no" }
            );
        }
        if report.retained.is_empty() {
            return Err(Error::BadConfig(
                "screening removed every predictor; nothing left to mediate".to_string(),
            ));
        }
        spec.predictor_subset = report.retained.clone();
        res.record("screened_predictors", &report.retained);
        Some(report)
    } else {
        None
    };

    let replicates = res.pick("bootstrap", args.bootstrap, cfg.bootstrap, 2000);
    let ci_level = res.pick("ci_level", args.ci_level, cfg.ci_level, 0.95);
    let bootstrap = if replicates == 0 {
        None
    } else {
        Some(BootstrapConfig { replicates, seed, ci_level, ..BootstrapConfig::default() })
    };

    let fit = fit_global_mediation(&d, &spec, bootstrap.as_ref(), alpha)?;

    let omit_direct = res.pick(
        "omit_direct",
        args.omit_direct.clone(),
        cfg.omit_direct.clone(),
        Vec::new(),
    );
    let indices = path_fit_indices(&d, &spec, &omit_direct)?;

    println!(
        "\nMediation decomposition: {} predictors -> {} -> {}",
        spec.predictor_subset.len(),
        d.mediator_name,
        d.outcome_name
    );
    println!(
        "b ({} -> {}): {:.5}{} (p = {:.5})",
        d.mediator_name,
        d.outcome_name,
        fit.b,
        stars(fit.b_p_value),
        fit.b_p_value
    );
    println!(
        "{:<24} {:>10} {:>10} {:>10} {:>10} {:>22} {}",
        "path", "a", "direct", "indirect", "total", "indirect CI", "class"
    );
    for e in &fit.effects {
        let ci = match e.indirect_ci {
            Some((lo, hi)) => format!("[{lo:.4}, {hi:.4}]"),
            None => "-".to_string(),
        };
        println!(
            "{:<24} {:>10.4} {:>10.4} {:>10.4} {:>10.4} {:>22} {}",
            format!("{} -> {} -> {}", e.predictor, d.mediator_name, d.outcome_name),
            e.a,
            e.c_prime,
            e.indirect,
            e.total,
            ci,
            e.classification,
        );
    }
    println!(
        "\nPath-model fit: chi2 {:.4} (df {}), CMIN/DF {:.4} [{}], CFI {:.4} [{}], \
         RMSEA {:.4} [{}], SRMR {:.4} [{}]",
        indices.chi_square,
        indices.df,
        indices.cmin_df,
        indices.verdicts.cmin_df,
        indices.cfi,
        indices.verdicts.cfi,
        indices.rmsea,
        indices.verdicts.rmsea,
        indices.srmr,
        indices.verdicts.srmr,
    );

    let model_block = |m: &geomediate::regress::OlsFit| {
        json!({
            "r_squared": m.r_squared,
            "adj_r_squared": m.adj_r_squared,
            "f_statistic": m.f_statistic,
            "f_p_value": m.f_p_value,
        })
    };
    write_json(
        &out_dir.join("mediate_report.json"),
        &json!({
            "mediator": d.mediator_name,
            "outcome": d.outcome_name,
            "n": d.n(),
            "alpha": alpha,
            "b": fit.b,
            "b_p_value": fit.b_p_value,
            "effects": fit.effects,
            "bootstrap": fit.bootstrap,
            "screening": screen_report,
            "fit_indices": indices,
            "models": {
                "mediator": model_block(&fit.mediator_model),
                "outcome": model_block(&fit.outcome_model),
                "total": model_block(&fit.total_model),
            },
        }),
    )?;
    res.write_manifest(&out_dir)?;
    Ok(())
}

fn write_effects_csv(path: &Path, d: &Dataset, fit: &SpatialMediationFit) -> Result<()> {
    let mut w = csv::Writer::from_writer(std::fs::File::create(path)?);
    let mut header = vec![
        "id".to_string(),
        "u".to_string(),
        "v".to_string(),
        "beta_m".to_string(),
        "beta_m_sig".to_string(),
    ];
    for p in &fit.predictor_names {
        for suffix in [
            "direct",
            "indirect",
            "composed_total",
            "marginal_total",
            "discrepancy",
            "direct_sig",
            "indirect_sig",
            "composed_total_sig",
            "marginal_total_sig",
        ] {
            header.push(format!("{p}_{suffix}"));
        }
    }
    w.write_record(&header)?;
    let flag = |b: bool| if b { "1" } else { "0" }.to_string();
    for (i, s) in d.samples.iter().enumerate() {
        let mut rec = vec![
            s.id.clone(),
            format!("{}", s.u),
            format!("{}", s.v),
            format!("{}", fit.beta_m[i]),
            flag(fit.beta_m_mask[i]),
        ];
        for j in 0..fit.predictor_names.len() {
            rec.push(format!("{}", fit.direct[(i, j)]));
            rec.push(format!("{}", fit.indirect[(i, j)]));
            rec.push(format!("{}", fit.composed_total[(i, j)]));
            rec.push(format!("{}", fit.marginal_total[(i, j)]));
            rec.push(format!("{}", fit.discrepancy[(i, j)]));
            rec.push(flag(fit.direct_mask[i][j]));
            rec.push(flag(fit.indirect_mask[i][j]));
            rec.push(flag(fit.composed_total_mask[i][j]));
            rec.push(flag(fit.marginal_total_mask[i][j]));
        }
        w.write_record(&rec)?;
    }
    w.flush().map_err(std::io::Error::from)?;
    Ok(())
}

pub fn run_mediate_spatial(args: &MediateSpatialArgs) -> Result<()> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let mut res = Resolver::new("mediate-spatial");
    let out_dir = resolve_out_dir(args.common.out.clone(), cfg.out_dir.as_deref())?;
    let seed = res.pick("seed", args.common.seed, cfg.seed, 42);
    let (d, _scaling, raw) =
        load_prepared(&mut res, &args.schema, &cfg, seed, &out_dir, "mediate_spatial")?;
    let (kind, adaptive, criterion) = resolve_kernel(&mut res, &args.kernel, &cfg)?;
    let tol = res.pick("tol", args.tol, cfg.tol, 1e-5);
    let max_iter = res.pick("max_iter", args.max_iter, cfg.max_iter, 200);
    let alpha = res.pick("alpha", args.alpha, cfg.alpha, 0.05);
    let enp_adjusted =
        res.pick_switch("enp_adjusted", args.enp_adjusted, cfg.enp_adjusted);

    let config = SpatialMediationConfig {
        kernel_kind: kind,
        adaptive,
        criterion,
        tol,
        max_iter,
        allow_raw: raw,
        alpha,
        enp_adjusted_alpha: enp_adjusted,
    };
    let spec = ModelSpec::from_dataset(&d);
    let fit = fit_spatial_mediation(&d, &spec, &config)?;

    println!(
        "Spatial mediation over {} locations: {} predictors -> {} -> {}",
        d.n(),
        fit.predictor_names.len(),
        d.mediator_name,
        d.outcome_name
    );
    let n = d.n() as f64;
    let mut predictor_blocks = Vec::new();
    for (j, p) in fit.predictor_names.iter().enumerate() {
        let kept = fit.indirect_mask.iter().filter(|row| row[j]).count();
        let mean_abs_gap =
            (0..d.n()).map(|i| fit.discrepancy[(i, j)].abs()).sum::<f64>() / n;
        println!(
            "  {p}: indirect significant at {:.1}% of locations, \
             mean |composed - marginal| = {:.5}",
            100.0 * kept as f64 / n,
            mean_abs_gap
        );
        predictor_blocks.push(json!({
            "predictor": p,
            "indirect_significant_share": kept as f64 / n,
            "direct_significant_share":
                fit.direct_mask.iter().filter(|row| row[j]).count() as f64 / n,
            "mean_abs_discrepancy": mean_abs_gap,
        }));
    }

    write_effects_csv(&out_dir.join("mediate_spatial_effects.csv"), &d, &fit)?;
    write_json(
        &out_dir.join("mediate_spatial_summary.json"),
        &json!({
            "mediator": d.mediator_name,
            "outcome": d.outcome_name,
            "alpha": alpha,
            "enp_adjusted_alpha": enp_adjusted,
            "predictors": predictor_blocks,
            "models": {
                "mediator": mgwr_summary_json(&fit.mediator_model, d.n()),
                "outcome": mgwr_summary_json(&fit.outcome_model, d.n()),
                "total": mgwr_summary_json(&fit.total_model, d.n()),
            },
        }),
    )?;
    res.write_manifest(&out_dir)?;
    Ok(())
}
