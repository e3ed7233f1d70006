//! Acceptance gate: one test per release criterion, each printing a PASS
//! line with its measured runtime. Tolerances and runtime budgets are
//! pinned as constants next to the test that uses them; weakening one is a
//! contract change, not a test fix.

use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use geomediate::data::{standardize, CoordSystem, Dataset, Equation, ModelSpec};
use geomediate::gwr::{gwr_fit, SelectionCriterion};
use geomediate::kernel::{Bandwidth, KernelKind, KernelSpec};
use geomediate::mediation::{fit_global_mediation, mediation_decompose, MediationClass};
use geomediate::mgwr::{mgwr_fit, MgwrConfig};
use geomediate::moran::morans_i;
use geomediate::pathfit::{fit_verdicts, IndexVerdict};
use geomediate::synth::{gen_synthetic, CoefficientField, Layout, SynthConfig};
use geomediate::weights::{distance_band_weights, knn_weights};
use geomediate::{fit_spatial_mediation, SpatialMediationConfig};

fn report(number: u32, elapsed: Duration, budget: Duration, what: &str) {
    assert!(
        elapsed <= budget,
        "criterion {number:02} over budget: {elapsed:.2?} > {budget:.2?}"
    );
    println!("acceptance {number:02} PASS in {elapsed:.2?} (budget {budget:.2?}): {what}");
}

/// Bounding-box diagonal of a dataset, in coordinate units.
fn diameter(d: &Dataset) -> f64 {
    let (umin, vmin, umax, vmax) = d.bbox();
    ((umax - umin).powi(2) + (vmax - vmin).powi(2)).sqrt()
}

// ---------------------------------------------------------------- 01

/// Two-decimal reference triples: decomposing (a, b, c') must reproduce
/// the rounded (indirect, total) values, and the opposed-signs case must
/// classify as suppression.
#[test]
fn acceptance_01_decomposition_arithmetic() {
    const TOL: f64 = 0.01; // the fixtures are rounded to two decimals
    let start = Instant::now();

    let fixtures: [(f64, f64, f64, f64, f64, MediationClass); 3] = [
        (-0.63, 0.72, -0.19, -0.46, -0.65, MediationClass::Partial),
        (0.26, 0.72, 0.0, 0.19, 0.19, MediationClass::Full),
        (-0.35, 0.72, 0.13, -0.25, -0.12, MediationClass::Suppression),
    ];
    for (a, b, c_prime, want_indirect, want_total, want_class) in fixtures {
        let (indirect, total, class) = mediation_decompose(a, b, c_prime);
        assert!(
            (indirect - want_indirect).abs() <= TOL,
            "indirect {indirect} vs {want_indirect} for ({a}, {b}, {c_prime})"
        );
        assert!(
            (total - want_total).abs() <= TOL,
            "total {total} vs {want_total} for ({a}, {b}, {c_prime})"
        );
        assert_eq!(class, want_class, "classification for ({a}, {b}, {c_prime})");
    }

    report(1, start.elapsed(), Duration::from_secs(1), "decomposition matches all three fixtures");
}

// ---------------------------------------------------------------- 02

/// Cutoff logic: a fixture that sits inside every cutoff must come back
/// acceptable on all four indices.
#[test]
fn acceptance_02_fit_index_cutoffs() {
    let start = Instant::now();

    let v = fit_verdicts(0.998, 0.063, 0.013, 1.509);
    assert_eq!(v.cfi, IndexVerdict::Acceptable, "cfi");
    assert_eq!(v.rmsea, IndexVerdict::Acceptable, "rmsea");
    assert_eq!(v.srmr, IndexVerdict::Acceptable, "srmr");
    assert_eq!(v.cmin_df, IndexVerdict::Acceptable, "cmin/df");
    assert!(v.all_acceptable());

    report(2, start.elapsed(), Duration::from_secs(1), "all four indices acceptable");
}

// ---------------------------------------------------------------- 03

/// Decomposition identity: on random data the marginal total-equation
/// coefficient equals direct + indirect to near machine precision, for
/// every predictor.
#[test]
fn acceptance_03_mediation_identity() {
    const TOL: f64 = 1e-10;
    const DATASETS: u64 = 100;
    let start = Instant::now();

    let mut worst = 0.0_f64;
    for seed in 0..DATASETS {
        let cfg = SynthConfig {
            n: 200,
            seed,
            alpha_fields: vec![
                CoefficientField::Constant(0.5),
                CoefficientField::Constant(-0.3),
                CoefficientField::Constant(0.8),
            ],
            gamma_fields: vec![
                CoefficientField::Constant(0.3),
                CoefficientField::Constant(0.2),
                CoefficientField::Constant(-0.4),
            ],
            ..SynthConfig::default()
        };
        let (d, _) = gen_synthetic(&cfg).unwrap();
        let spec = ModelSpec::from_dataset(&d);
        let fit = fit_global_mediation(&d, &spec, None, 0.05).unwrap();
        assert_eq!(fit.effects.len(), 3);
        for e in &fit.effects {
            let gap = (e.marginal_total - (e.c_prime + e.a * fit.b)).abs();
            assert!(
                gap < TOL,
                "identity gap {gap:.3e} for {} at seed {seed}",
                e.predictor
            );
            worst = worst.max(gap);
        }
    }

    report(
        3,
        start.elapsed(),
        Duration::from_secs(10),
        &format!("identity holds on {DATASETS} datasets (worst gap {worst:.2e})"),
    );
}

// ---------------------------------------------------------------- 04

/// Flat-kernel limit: with a fixed bandwidth a million times the data
/// diameter, every local coefficient collapses to the global fit.
#[test]
fn acceptance_04_gwr_flat_kernel_limit() {
    const TOL: f64 = 1e-6;
    let start = Instant::now();

    let cfg = SynthConfig { n: 200, seed: 7, ..SynthConfig::default() };
    let (d_raw, _) = gen_synthetic(&cfg).unwrap();
    let (d, _) = standardize(&d_raw).unwrap();
    let spec = ModelSpec::from_dataset(&d).with_equation(Equation::Total);

    let kernel = KernelSpec {
        kind: KernelKind::Bisquare,
        bandwidth: Bandwidth::Fixed(1e6 * diameter(&d)),
    };
    let local = gwr_fit(&d, &spec, kernel).unwrap();
    let global = geomediate::regress::ols_fit(&d, &spec).unwrap();

    let mut worst = 0.0_f64;
    for i in 0..d.n() {
        for j in 0..global.coefficients.len() {
            worst = worst.max((local.local_coefficients[(i, j)] - global.coefficients[j]).abs());
        }
    }
    assert!(worst < TOL, "max |local - global| = {worst:.3e}");

    report(
        4,
        start.elapsed(),
        Duration::from_secs(10),
        &format!("max |local - global| = {worst:.2e}"),
    );
}

// ---------------------------------------------------------------- 05

/// Equal-bandwidth reduction: with one huge bandwidth pinned for every
/// term, backfitting and the joint local fit coincide (both collapse to
/// the same flat-kernel limit).
#[test]
fn acceptance_05_mgwr_equal_bandwidth_reduction() {
    const TOL: f64 = 1e-4;
    let start = Instant::now();

    let cfg = SynthConfig { n: 150, seed: 11, ..SynthConfig::default() };
    let (d_raw, _) = gen_synthetic(&cfg).unwrap();
    let (d, _) = standardize(&d_raw).unwrap();
    let spec = ModelSpec::from_dataset(&d).with_equation(Equation::Total);

    let bw = Bandwidth::Fixed(100.0 * diameter(&d));
    let kernel = KernelSpec { kind: KernelKind::Gaussian, bandwidth: bw };
    let joint = gwr_fit(&d, &spec, kernel).unwrap();

    let k = d.design(&spec).unwrap().term_names.len();
    let config = MgwrConfig {
        kernel_kind: KernelKind::Gaussian,
        adaptive: false,
        criterion: SelectionCriterion::Aicc,
        tol: 1e-10,
        max_iter: 1000,
        pinned_bandwidths: Some(vec![bw; k]),
        allow_raw: false,
    };
    let backfit = mgwr_fit(&d, &spec, &config).unwrap();

    let mut worst = 0.0_f64;
    for i in 0..d.n() {
        worst = worst.max((backfit.fitted[i] - joint.fitted[i]).abs());
    }
    assert!(worst < TOL, "max |backfit - joint| = {worst:.3e}");

    report(
        5,
        start.elapsed(),
        Duration::from_secs(60),
        &format!("max fitted gap {worst:.2e}"),
    );
}

// ---------------------------------------------------------------- 06

/// Multiscale recovery: one constant and one varying coefficient must come
/// back with a near-global and a clearly local bandwidth respectively, and
/// the varying surface must be recovered to a tenth of its range.
#[test]
fn acceptance_06_mgwr_multiscale_recovery() {
    const N: usize = 400;
    const RMSE_FRACTION: f64 = 0.1;
    let start = Instant::now();

    let cfg = SynthConfig {
        n: N,
        layout: Layout::Grid,
        seed: 23,
        alpha_fields: vec![
            CoefficientField::Constant(0.5),
            CoefficientField::Sinusoidal { frequency: 0.5 },
        ],
        gamma_fields: vec![CoefficientField::Constant(0.3), CoefficientField::Constant(0.2)],
        beta_field: CoefficientField::Constant(0.7),
        noise_sd_mediator: 0.2,
        noise_sd_outcome: 0.2,
        ..SynthConfig::default()
    };
    let (d, truth) = gen_synthetic(&cfg).unwrap();
    let spec = ModelSpec::from_dataset(&d).with_equation(Equation::Mediator);
    let config = MgwrConfig { allow_raw: true, ..MgwrConfig::default() };
    let fit = mgwr_fit(&d, &spec, &config).unwrap();

    let neighbors = |term: &str| -> usize {
        let j = fit.term_names.iter().position(|t| t == term).unwrap();
        match fit.bandwidths[j] {
            Bandwidth::Adaptive(nb) => nb,
            Bandwidth::Fixed(b) => panic!("expected an adaptive bandwidth, got Fixed({b})"),
        }
    };
    let constant_bw = neighbors("x1");
    let varying_bw = neighbors("x2");
    assert!(
        constant_bw as f64 >= 0.9 * N as f64,
        "constant-coefficient bandwidth {constant_bw} below 0.9n"
    );
    assert!(
        (varying_bw as f64) < 0.5 * N as f64,
        "varying-coefficient bandwidth {varying_bw} not local"
    );

    let j2 = fit.term_names.iter().position(|t| t == "x2").unwrap();
    let truth_surface = &truth.alpha[1];
    let range = truth_surface.iter().cloned().fold(f64::MIN, f64::max)
        - truth_surface.iter().cloned().fold(f64::MAX, f64::min);
    let mse: f64 = (0..d.n())
        .map(|i| (fit.coefficient_surfaces[(i, j2)] - truth_surface[i]).powi(2))
        .sum::<f64>()
        / d.n() as f64;
    let rmse = mse.sqrt();
    assert!(
        rmse < RMSE_FRACTION * range,
        "varying-surface RMSE {rmse:.4} vs limit {:.4}",
        RMSE_FRACTION * range
    );

    report(
        6,
        start.elapsed(),
        Duration::from_secs(300),
        &format!(
            "bandwidths {constant_bw}/{varying_bw} of n={N}, surface RMSE {rmse:.3} (range {range:.3})"
        ),
    );
}

// ---------------------------------------------------------------- 07

/// Autocorrelation exactness: the 2x2 checkerboard with rook contiguity is
/// perfect negative autocorrelation; the null mean is -1/(n-1) exactly;
/// and permutation inference agrees with the analytic tail on Gaussian
/// noise.
#[test]
fn acceptance_07_moran_exactness() {
    const P_TOL: f64 = 0.02;
    const PERMUTATIONS: usize = 9999;
    let start = Instant::now();

    // A 2x2 lattice with alternating values; rook contiguity links only
    // the unit-distance pairs.
    let coords = [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
    let values = [1.0, -1.0, -1.0, 1.0];
    let w = distance_band_weights(&coords, CoordSystem::PlanarMeters, 1.0, false).unwrap();
    let res = morans_i(&values, &w, 0, 42).unwrap();
    assert_eq!(res.i, -1.0, "checkerboard statistic must be exactly -1");
    assert_eq!(res.expected_i, -1.0 / 3.0);

    // The null mean is exact for any size.
    for n in [10usize, 37, 100] {
        let coords: Vec<(f64, f64)> =
            (0..n).map(|i| (i as f64, ((i * i) % 13) as f64 * 0.1)).collect();
        let values: Vec<f64> =
            (0..n).map(|i| ((i * 31 % 17) as f64) * 0.3 + i as f64 * 0.01).collect();
        let w = knn_weights(&coords, CoordSystem::PlanarMeters, 4, true).unwrap();
        let res = morans_i(&values, &w, 0, 42).unwrap();
        assert_eq!(res.expected_i, -1.0 / ((n - 1) as f64), "null mean at n={n}");
    }

    // Spatially unstructured Gaussian noise on a 10x10 lattice with rook
    // contiguity: uniform-degree symmetric weights keep the randomization
    // distribution close to its normal approximation, so the Monte Carlo
    // tail must track the analytic tail.
    let cfg = SynthConfig {
        n: 100,
        layout: Layout::Grid,
        seed: 4242,
        alpha_fields: vec![CoefficientField::Constant(0.0)],
        gamma_fields: vec![CoefficientField::Constant(0.0)],
        ..SynthConfig::default()
    };
    let (d, _) = gen_synthetic(&cfg).unwrap();
    let noise: Vec<f64> = d.samples.iter().map(|s| s.mediator).collect();
    // Lattice spacing is a tenth of the extent; a radius just above it
    // links exactly the rook pairs.
    let w = distance_band_weights(&d.coords(), d.coord_system, 110.0, false).unwrap();
    let res = morans_i(&noise, &w, PERMUTATIONS, 4242).unwrap();
    let p_perm = res.p_permutation.unwrap();
    let gap = (p_perm - res.p_analytic).abs();
    assert!(
        gap < P_TOL,
        "permutation p {p_perm:.4} vs analytic {:.4} (gap {gap:.4})",
        res.p_analytic
    );

    report(
        7,
        start.elapsed(),
        Duration::from_secs(30),
        &format!("I = -1 exact; E[I] exact; p gap {gap:.4} over {PERMUTATIONS} permutations"),
    );
}

// ---------------------------------------------------------------- 08

/// Residual whiteness: fitting a correctly specified model must leave
/// spatially unstructured residuals in at least 95% of seeded replicates.
#[test]
fn acceptance_08_mgwr_residual_whiteness() {
    const REPLICATES: usize = 50;
    const Z_LIMIT: f64 = 2.58;
    const MIN_WHITE: usize = 48; // ceil(0.95 * 50)
    let start = Instant::now();

    let mut white = 0usize;
    for r in 0..REPLICATES {
        let cfg = SynthConfig {
            n: 120,
            seed: 1000 + r as u64,
            alpha_fields: vec![CoefficientField::Constant(0.5)],
            gamma_fields: vec![CoefficientField::Constant(0.3)],
            noise_sd_mediator: 0.2,
            ..SynthConfig::default()
        };
        let (d, _) = gen_synthetic(&cfg).unwrap();
        let spec = ModelSpec::from_dataset(&d).with_equation(Equation::Mediator);
        let config = MgwrConfig { allow_raw: true, ..MgwrConfig::default() };
        let fit = mgwr_fit(&d, &spec, &config).unwrap();

        let w = knn_weights(&d.coords(), d.coord_system, 8, true).unwrap();
        let res = morans_i(fit.residuals.as_slice(), &w, 0, cfg.seed).unwrap();
        if res.z.abs() < Z_LIMIT {
            white += 1;
        }
    }
    assert!(
        white >= MIN_WHITE,
        "only {white}/{REPLICATES} replicates had |z| < {Z_LIMIT}"
    );

    report(
        8,
        start.elapsed(),
        Duration::from_secs(600),
        &format!("{white}/{REPLICATES} replicates spatially white"),
    );
}

// ---------------------------------------------------------------- 09

/// Sign recovery: with an effect that flips sign across the midline, the
/// masked indirect surface must agree in sign with the generating field on
/// at least 90% of unmasked locations, and the composed total must equal
/// direct + indirect bit for bit.
#[test]
fn acceptance_09_spatial_mediation_sign_recovery() {
    const N: usize = 400;
    const MIN_AGREE: f64 = 0.9;
    let start = Instant::now();

    let cfg = SynthConfig {
        n: N,
        layout: Layout::Grid,
        seed: 43,
        alpha_fields: vec![CoefficientField::SignFlipBoundary],
        gamma_fields: vec![CoefficientField::Constant(0.4)],
        beta_field: CoefficientField::Constant(0.8),
        noise_sd_mediator: 0.3,
        noise_sd_outcome: 0.3,
        ..SynthConfig::default()
    };
    let (d, truth) = gen_synthetic(&cfg).unwrap();
    let spec = ModelSpec::from_dataset(&d);
    let config = SpatialMediationConfig { allow_raw: true, ..SpatialMediationConfig::default() };
    let fit = fit_spatial_mediation(&d, &spec, &config).unwrap();

    let mut unmasked = 0usize;
    let mut agree = 0usize;
    for i in 0..d.n() {
        // Bitwise identity of the composed total, masked or not.
        let composed = fit.composed_total[(i, 0)];
        assert_eq!(
            composed.to_bits(),
            (fit.direct[(i, 0)] + fit.indirect[(i, 0)]).to_bits(),
            "composed total must be the exact sum at row {i}"
        );
        if fit.indirect_mask[i][0] {
            unmasked += 1;
            if fit.indirect[(i, 0)].signum() == truth.indirect[0][i].signum() {
                agree += 1;
            }
        }
    }
    assert!(unmasked > N / 4, "masking left too little signal: {unmasked} of {N}");
    let rate = agree as f64 / unmasked as f64;
    assert!(rate >= MIN_AGREE, "sign agreement {rate:.3} below {MIN_AGREE} ({agree}/{unmasked})");

    report(
        9,
        start.elapsed(),
        Duration::from_secs(300),
        &format!("sign agreement {rate:.3} on {unmasked} unmasked locations"),
    );
}

// ---------------------------------------------------------------- 10

/// Thread-count determinism: rerunning the same seeded command with a
/// different worker cap must reproduce every output file byte for byte.
#[test]
fn acceptance_10_cli_determinism_across_threads() {
    let start = Instant::now();
    let bin = env!("CARGO_BIN_EXE_geomediate");
    let root = tempfile::tempdir().unwrap();

    let run = |args: &[&str], out: &Path, threads: &str| {
        let status = Command::new(bin)
            .args(args)
            .arg("--out")
            .arg(out)
            .arg("--threads")
            .arg(threads)
            .status()
            .unwrap();
        assert!(status.success(), "command failed: {args:?} --threads {threads}");
    };
    let compare = |a: &Path, b: &Path, files: &[&str]| {
        for f in files {
            let left = std::fs::read(a.join(f)).unwrap_or_else(|e| panic!("{f}: {e}"));
            let right = std::fs::read(b.join(f)).unwrap_or_else(|e| panic!("{f}: {e}"));
            assert_eq!(left, right, "{f} differs between thread counts");
        }
    };

    // One dataset feeds every estimator run below, so the recorded input
    // path is identical on both sides of each comparison.
    let s1 = root.path().join("s1");
    let s4 = root.path().join("s4");
    run(&["synth", "--n", "80"], &s1, "1");
    run(&["synth", "--n", "80"], &s4, "4");
    compare(&s1, &s4, &["synth_data.csv", "synth_truth.json", "synth_manifest.json"]);

    let data = s1.join("synth_data.csv");
    let data = data.to_str().unwrap();
    let med = &["--mediator", "m", "--outcome", "y"][..];

    let g1 = root.path().join("g1");
    let g4 = root.path().join("g4");
    run(&[&["gwr", "--in", data], med].concat(), &g1, "1");
    run(&[&["gwr", "--in", data], med].concat(), &g4, "4");
    compare(
        &g1,
        &g4,
        &["gwr_surface.csv", "gwr_summary.json", "gwr_scaling.json", "gwr_manifest.json"],
    );

    let m1 = root.path().join("m1");
    let m4 = root.path().join("m4");
    run(&[&["moran", "--in", data, "--permutations", "999"], med].concat(), &m1, "1");
    run(&[&["moran", "--in", data, "--permutations", "999"], med].concat(), &m4, "4");
    compare(&m1, &m4, &["moran_result.json", "moran_manifest.json"]);

    let b1 = root.path().join("b1");
    let b4 = root.path().join("b4");
    run(&[&["mediate", "--in", data, "--bootstrap", "500"], med].concat(), &b1, "1");
    run(&[&["mediate", "--in", data, "--bootstrap", "500"], med].concat(), &b4, "4");
    compare(&b1, &b4, &["mediate_report.json", "mediate_manifest.json"]);

    let sp1 = root.path().join("sp1");
    let sp4 = root.path().join("sp4");
    run(&[&["mediate-spatial", "--in", data], med].concat(), &sp1, "1");
    run(&[&["mediate-spatial", "--in", data], med].concat(), &sp4, "4");
    compare(
        &sp1,
        &sp4,
        &[
            "mediate_spatial_effects.csv",
            "mediate_spatial_summary.json",
            "mediate_spatial_manifest.json",
        ],
    );

    report(
        10,
        start.elapsed(),
        Duration::from_secs(600),
        "synth, gwr, moran, mediate, and mediate-spatial outputs byte-identical",
    );
}
