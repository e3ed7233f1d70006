//! The `synth` subcommand: seeded synthetic data with known truth.

use geomediate::synth::{gen_synthetic, SynthConfig};
use geomediate::Result;

use super::common::write_json;
use crate::opts::SynthArgs;
use crate::runconfig::{parse_field, parse_layout, resolve_out_dir, Resolver, RunConfig};

pub fn run_synth(args: &SynthArgs) -> Result<()> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let mut res = Resolver::new("synth");
    let out_dir = resolve_out_dir(args.common.out.clone(), cfg.out_dir.as_deref())?;
    let seed = res.pick("seed", args.common.seed, cfg.seed, 42);

    let defaults = SynthConfig::default();
    let n = res.pick("n", args.n, cfg.n, defaults.n);
    let layout = res.pick(
        "layout",
        args.layout.clone(),
        cfg.layout.clone(),
        "uniform_random".into(),
    );
    let alpha_specs = res.pick(
        "alpha_fields",
        args.alpha_fields.clone(),
        cfg.alpha_fields.clone(),
        vec!["constant:0.5".to_string()],
    );
    let gamma_specs = res.pick(
        "gamma_fields",
        args.gamma_fields.clone(),
        cfg.gamma_fields.clone(),
        vec!["constant:0.3".to_string()],
    );
    let beta_spec = res.pick(
        "beta_field",
        args.beta_field.clone(),
        cfg.beta_field.clone(),
        "constant:0.7".to_string(),
    );
    let noise_sd_mediator = res.pick(
        "noise_sd_mediator",
        args.noise_sd_mediator,
        cfg.noise_sd_mediator,
        defaults.noise_sd_mediator,
    );
    let noise_sd_outcome = res.pick(
        "noise_sd_outcome",
        args.noise_sd_outcome,
        cfg.noise_sd_outcome,
        defaults.noise_sd_outcome,
    );
    let extent = res.pick("extent", args.extent, cfg.extent, defaults.extent);

    let config = SynthConfig {
        n,
        layout: parse_layout(&layout)?,
        seed,
        alpha_fields: alpha_specs
            .iter()
            .map(|s| parse_field(s))
            .collect::<Result<Vec<_>>>()?,
        gamma_fields: gamma_specs
            .iter()
            .map(|s| parse_field(s))
            .collect::<Result<Vec<_>>>()?,
        beta_field: parse_field(&beta_spec)?,
        noise_sd_mediator,
        noise_sd_outcome,
        extent,
    };
    let (dataset, truth) = gen_synthetic(&config)?;

    let data_path = out_dir.join("synth_data.csv");
    dataset.write_csv(std::fs::File::create(&data_path)?)?;
    write_json(
        &out_dir.join("synth_truth.json"),
        &serde_json::to_value(&truth).expect("truth bundle serializes"),
    )?;
    println!(
        "Generated {} samples with {} predictors (seed {}); wrote {} and synth_truth.json",
        dataset.n(),
        dataset.predictor_names.len(),
        seed,
        data_path.display()
    );
    res.write_manifest(&out_dir)?;
    Ok(())
}
