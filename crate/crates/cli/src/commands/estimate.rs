//! The single-equation estimators: `ols`, `gwr`, and `mgwr`.

use std::path::Path;

use geomediate::data::{Dataset, ModelSpec};
use geomediate::gwr::{gwr_fit, select_bandwidth, GwrFit};
use geomediate::kernel::{Bandwidth, KernelSpec};
use geomediate::mgwr::{mgwr_fit, MgwrConfig, MgwrFit};
use geomediate::regress::{ols_fit, vif};
use geomediate::{Error, Result};
use serde_json::json;

use super::common::{header_label, load_prepared, stars, write_json};
use crate::opts::{GwrArgs, KernelOpts, MgwrArgs, OlsArgs};
use crate::runconfig::{
    parse_criterion, parse_equation, parse_kernel, resolve_out_dir, Resolver, RunConfig,
};

pub fn run_ols(args: &OlsArgs) -> Result<()> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let mut res = Resolver::new("ols");
    let out_dir = resolve_out_dir(args.common.out.clone(), cfg.out_dir.as_deref())?;
    let seed = res.pick("seed", args.common.seed, cfg.seed, 42);
    let (d, _scaling, _raw) =
        load_prepared(&mut res, &args.schema, &cfg, seed, &out_dir, "ols")?;
    let equation =
        res.pick("equation", args.equation.clone(), cfg.equation.clone(), "total".into());
    let spec = ModelSpec::from_dataset(&d).with_equation(parse_equation(&equation)?);

    let fit = ols_fit(&d, &spec)?;
    let vifs = vif(&d, &spec)?;
    let vif_names: Vec<&String> =
        spec.predictor_subset.iter().collect();

    println!("OLS fit of the {equation} equation ({} observations)", d.n());
    println!("{:<16} {:>12} {:>10} {:>8} {:>10} {:>8}", "term", "coef", "se", "t", "p", "vif");
    for (j, term) in fit.term_names.iter().enumerate() {
        let vif_txt = vif_names
            .iter()
            .position(|n| *n == term)
            .map(|ix| format!("{:.3}", vifs[ix]))
            .unwrap_or_else(|| "-".to_string());
        println!(
            "{:<16} {:>12.5} {:>10.5} {:>8.3} {:>10.5} {:>8} {}",
            term,
            fit.coefficients[j],
            fit.std_errors[j],
            fit.t_values[j],
            fit.p_values[j],
            vif_txt,
            stars(fit.p_values[j]),
        );
    }
    println!(
        "R2 {:.5}  adj R2 {:.5}  F {:.4} (p {:.5})",
        fit.r_squared, fit.adj_r_squared, fit.f_statistic, fit.f_p_value
    );

    let terms: Vec<serde_json::Value> = fit
        .term_names
        .iter()
        .enumerate()
        .map(|(j, term)| {
            json!({
                "term": term,
                "coefficient": fit.coefficients[j],
                "std_error": fit.std_errors[j],
                "t": fit.t_values[j],
                "p": fit.p_values[j],
                "vif": vif_names.iter().position(|n| *n == term).map(|ix| vifs[ix]),
            })
        })
        .collect();
    write_json(
        &out_dir.join("ols_results.json"),
        &json!({
            "equation": equation,
            "n": d.n(),
            "terms": terms,
            "rss": fit.rss,
            "sigma2": fit.sigma2,
            "r_squared": fit.r_squared,
            "adj_r_squared": fit.adj_r_squared,
            "f_statistic": fit.f_statistic,
            "f_p_value": fit.f_p_value,
            "df_model": fit.df_model,
            "df_resid": fit.df_resid,
        }),
    )?;
    res.write_manifest(&out_dir)?;
    Ok(())
}

/// Resolve kernel options shared by `gwr` and `mgwr`.
pub(super) fn resolve_kernel(
    res: &mut Resolver,
    args: &KernelOpts,
    cfg: &RunConfig,
) -> Result<(geomediate::kernel::KernelKind, bool, geomediate::gwr::SelectionCriterion)> {
    let kernel =
        res.pick("kernel", args.kernel.clone(), cfg.kernel.clone(), "bisquare".into());
    let adaptive = if args.fixed {
        res.record("adaptive", &false);
        false
    } else {
        let v = cfg.adaptive.unwrap_or(true);
        res.record("adaptive", &v);
        v
    };
    let criterion =
        res.pick("criterion", args.criterion.clone(), cfg.criterion.clone(), "aicc".into());
    Ok((parse_kernel(&kernel)?, adaptive, parse_criterion(&criterion)?))
}

fn write_gwr_surface(path: &Path, d: &Dataset, fit: &GwrFit) -> Result<()> {
    let mut w = csv::Writer::from_writer(std::fs::File::create(path)?);
    let mut header = vec!["id".to_string(), "u".to_string(), "v".to_string()];
    for term in &fit.term_names {
        let label = header_label(term);
        header.push(format!("{label}_coef"));
        header.push(format!("{label}_se"));
        header.push(format!("{label}_t"));
    }
    header.push("fitted".into());
    header.push("residual".into());
    w.write_record(&header)?;
    for (i, s) in d.samples.iter().enumerate() {
        let mut rec = vec![s.id.clone(), format!("{}", s.u), format!("{}", s.v)];
        for j in 0..fit.term_names.len() {
            rec.push(format!("{}", fit.local_coefficients[(i, j)]));
            rec.push(format!("{}", fit.local_std_errors[(i, j)]));
            rec.push(format!("{}", fit.pseudo_t[(i, j)]));
        }
        rec.push(format!("{}", fit.fitted[i]));
        rec.push(format!("{}", fit.residuals[i]));
        w.write_record(&rec)?;
    }
    w.flush().map_err(std::io::Error::from)?;
    Ok(())
}

fn bandwidth_json(b: &Bandwidth) -> serde_json::Value {
    match b {
        Bandwidth::Fixed(d) => json!({"fixed": d}),
        Bandwidth::Adaptive(n) => json!({"adaptive": n}),
    }
}

pub fn run_gwr(args: &GwrArgs) -> Result<()> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let mut res = Resolver::new("gwr");
    let out_dir = resolve_out_dir(args.common.out.clone(), cfg.out_dir.as_deref())?;
    let seed = res.pick("seed", args.common.seed, cfg.seed, 42);
    let (d, _scaling, _raw) =
        load_prepared(&mut res, &args.schema, &cfg, seed, &out_dir, "gwr")?;
    let equation =
        res.pick("equation", args.equation.clone(), cfg.equation.clone(), "total".into());
    let spec = ModelSpec::from_dataset(&d).with_equation(parse_equation(&equation)?);
    let (kind, adaptive, criterion) = resolve_kernel(&mut res, &args.kernel, &cfg)?;

    let pinned_fixed = res.pick_opt("bandwidth", args.bandwidth, cfg.bandwidth);
    let pinned_adaptive = res.pick_opt("neighbors", args.neighbors, cfg.neighbors);
    let kernel = match (pinned_fixed, pinned_adaptive) {
        (Some(_), Some(_)) => {
            return Err(Error::BadConfig(
                "give either `bandwidth` or `neighbors`, not both".to_string(),
            ))
        }
        (Some(b), None) => KernelSpec { kind, bandwidth: Bandwidth::Fixed(b) },
        (None, Some(k)) => KernelSpec { kind, bandwidth: Bandwidth::Adaptive(k) },
        (None, None) => {
            let (spec_sel, trace) = select_bandwidth(&d, &spec, kind, adaptive, criterion)?;
            let best = trace.best().expect("selection evaluated at least once");
            log::info!(
                "selected bandwidth {:?} ({} evaluations, criterion {:.6})",
                spec_sel.bandwidth,
                trace.steps.len(),
                best.criterion
            );
            spec_sel
        }
    };
    res.record("selected_bandwidth", &bandwidth_json(&kernel.bandwidth));

    let fit = gwr_fit(&d, &spec, kernel)?;
    println!(
        "GWR fit of the {equation} equation: bandwidth {:?}, AICc {:.4}, R2 {:.5}, ENP {:.2}",
        kernel.bandwidth, fit.aicc, fit.r_squared, fit.hat_trace
    );
    write_gwr_surface(&out_dir.join("gwr_surface.csv"), &d, &fit)?;
    write_json(
        &out_dir.join("gwr_summary.json"),
        &json!({
            "equation": equation,
            "n": d.n(),
            "terms": fit.term_names,
            "bandwidth": bandwidth_json(&kernel.bandwidth),
            "aicc": fit.aicc,
            "rss": fit.rss,
            "sigma2": fit.sigma2,
            "r_squared": fit.r_squared,
            "adj_r_squared": fit.adj_r_squared,
            "effective_parameters": fit.hat_trace,
        }),
    )?;
    res.write_manifest(&out_dir)?;
    Ok(())
}

fn write_mgwr_surface(path: &Path, d: &Dataset, fit: &MgwrFit) -> Result<()> {
    let mut w = csv::Writer::from_writer(std::fs::File::create(path)?);
    let mut header = vec!["id".to_string(), "u".to_string(), "v".to_string()];
    for term in &fit.term_names {
        let label = header_label(term);
        header.push(format!("{label}_coef"));
        header.push(format!("{label}_se"));
        header.push(format!("{label}_t"));
    }
    header.push("fitted".into());
    header.push("residual".into());
    w.write_record(&header)?;
    for (i, s) in d.samples.iter().enumerate() {
        let mut rec = vec![s.id.clone(), format!("{}", s.u), format!("{}", s.v)];
        for j in 0..fit.term_names.len() {
            rec.push(format!("{}", fit.coefficient_surfaces[(i, j)]));
            rec.push(format!("{}", fit.local_std_errors[(i, j)]));
            rec.push(format!("{}", fit.pseudo_t[(i, j)]));
        }
        rec.push(format!("{}", fit.fitted[i]));
        rec.push(format!("{}", fit.residuals[i]));
        w.write_record(&rec)?;
    }
    w.flush().map_err(std::io::Error::from)?;
    Ok(())
}

pub(super) fn mgwr_summary_json(fit: &MgwrFit, n: usize) -> serde_json::Value {
    let bandwidths: Vec<serde_json::Value> = fit
        .term_names
        .iter()
        .zip(&fit.bandwidths)
        .map(|(term, b)| json!({"term": term, "bandwidth": bandwidth_json(b)}))
        .collect();
    json!({
        "n": n,
        "terms": fit.term_names,
        "bandwidths": bandwidths,
        "aicc": fit.aicc,
        "rss": fit.rss,
        "sigma2": fit.sigma2,
        "r_squared": fit.r_squared,
        "adj_r_squared": fit.adj_r_squared,
        "effective_parameters": fit.hat_trace,
        "per_term_effective_parameters": fit.per_term_enp,
        "iterations": fit.iterations,
        "converged": fit.converged,
    })
}

pub fn run_mgwr(args: &MgwrArgs) -> Result<()> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let mut res = Resolver::new("mgwr");
    let out_dir = resolve_out_dir(args.common.out.clone(), cfg.out_dir.as_deref())?;
    let seed = res.pick("seed", args.common.seed, cfg.seed, 42);
    let (d, _scaling, raw) =
        load_prepared(&mut res, &args.schema, &cfg, seed, &out_dir, "mgwr")?;
    let equation =
        res.pick("equation", args.equation.clone(), cfg.equation.clone(), "total".into());
    let spec = ModelSpec::from_dataset(&d).with_equation(parse_equation(&equation)?);
    let (kind, adaptive, criterion) = resolve_kernel(&mut res, &args.kernel, &cfg)?;
    let tol = res.pick("tol", args.tol, cfg.tol, 1e-5);
    let max_iter = res.pick("max_iter", args.max_iter, cfg.max_iter, 200);

    let pinned_fixed = res.pick_opt("bandwidth", args.bandwidth, cfg.bandwidth);
    let pinned_adaptive = res.pick_opt("neighbors", args.neighbors, cfg.neighbors);
    let pinned = match (pinned_fixed, pinned_adaptive) {
        (Some(_), Some(_)) => {
            return Err(Error::BadConfig(
                "give either `bandwidth` or `neighbors`, not both".to_string(),
            ))
        }
        (Some(b), None) => Some(Bandwidth::Fixed(b)),
        (None, Some(k)) => Some(Bandwidth::Adaptive(k)),
        (None, None) => None,
    };
    let pinned_bandwidths = match pinned {
        Some(b) => Some(vec![b; d.design(&spec)?.term_names.len()]),
        None => None,
    };

    let config = MgwrConfig {
        kernel_kind: kind,
        adaptive,
        criterion,
        tol,
        max_iter,
        pinned_bandwidths,
        allow_raw: raw,
    };
    let fit = mgwr_fit(&d, &spec, &config)?;
    println!(
        "MGWR fit of the {equation} equation: AICc {:.4}, R2 {:.5}, {} iterations ({})",
        fit.aicc,
        fit.r_squared,
        fit.iterations,
        if fit.converged { "converged" } else { "not converged" }
    );
    for (term, b) in fit.term_names.iter().zip(&fit.bandwidths) {
        println!("  {term}: bandwidth {b:?}");
    }
    write_mgwr_surface(&out_dir.join("mgwr_surface.csv"), &d, &fit)?;
    let mut summary = mgwr_summary_json(&fit, d.n());
    summary["equation"] = json!(equation);
    write_json(&out_dir.join("mgwr_summary.json"), &summary)?;
    res.write_manifest(&out_dir)?;
    Ok(())
}
