//! Command-line surface: subcommands and their flags.
//!
//! Every flag has a matching key in the flat JSON config file; a flag given
//! on the command line overrides the file value. Boolean switches turn a
//! feature on; to force one off against a config file, change the file.

use std::path::PathBuf;

use clap::{ArgAction, Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "geomediate",
    version,
    about = "Spatial mediation analysis: screening, autocorrelation, local \
             regression, mediation decomposition, and map export",
    propagate_version = true
)]
pub struct Cli {
    /// Cap the worker thread pool (default: all cores). Results are
    /// byte-identical for any value.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Increase log verbosity on stderr (-v progress, -vv debug).
    #[arg(short, long, global = true, action = ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Global least-squares fit of one model equation, with collinearity
    /// diagnostics.
    Ols(OlsArgs),
    /// Moran's I spatial autocorrelation test for one variable.
    Moran(MoranArgs),
    /// Geographically weighted regression with bandwidth selection.
    Gwr(GwrArgs),
    /// Multiscale geographically weighted regression (one bandwidth per
    /// covariate).
    Mgwr(MgwrArgs),
    /// Global mediation decomposition with bootstrap intervals and
    /// path-model fit indices.
    Mediate(MediateArgs),
    /// Spatially varying mediation: local direct, indirect, and total
    /// effect surfaces with significance masks.
    MediateSpatial(MediateSpatialArgs),
    /// Interpolate a point CSV onto a raster and export it as GeoJSON,
    /// SVG, or CSV.
    Map(MapArgs),
    /// Generate a seeded synthetic dataset with known coefficient surfaces.
    Synth(SynthArgs),
}

/// Options shared by every subcommand: config file, output directory, seed.
#[derive(Debug, Args)]
pub struct CommonOpts {
    /// Flat key-value JSON config file; command-line flags override it.
    #[arg(long, value_name = "FILE")]
    pub config: Option<PathBuf>,

    /// Output directory (default: $GEOMEDIATE_OUT, else the working
    /// directory). Created if missing.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    /// Seed for every stochastic step (default 42); echoed in the manifest.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Input file and column mapping for dataset-consuming subcommands.
#[derive(Debug, Args)]
pub struct SchemaOpts {
    /// Input CSV path.
    #[arg(long = "in", value_name = "FILE")]
    pub input: Option<PathBuf>,

    /// Column holding the horizontal coordinate (default "u").
    #[arg(long)]
    pub u_col: Option<String>,

    /// Column holding the vertical coordinate (default "v").
    #[arg(long)]
    pub v_col: Option<String>,

    /// Column holding row identifiers (default: none; rows are numbered).
    #[arg(long)]
    pub id_col: Option<String>,

    /// Mediator column name.
    #[arg(long)]
    pub mediator: Option<String>,

    /// Outcome column name.
    #[arg(long)]
    pub outcome: Option<String>,

    /// Comma-separated predictor columns (default: every column that is not
    /// a coordinate, id, mediator, or outcome).
    #[arg(long, value_delimiter = ',')]
    pub predictors: Option<Vec<String>>,

    /// Coordinate interpretation: planar_meters or wgs84_degrees.
    #[arg(long)]
    pub coord_system: Option<String>,

    /// Displace duplicate coordinates by a tiny seeded offset instead of
    /// rejecting the file.
    #[arg(long, action = ArgAction::SetTrue)]
    pub jitter_duplicates: bool,

    /// Fit on raw columns instead of standardizing predictors, mediator,
    /// and outcome first.
    #[arg(long, action = ArgAction::SetTrue)]
    pub raw: bool,
}

/// Kernel and bandwidth-search options for the local-regression commands.
#[derive(Debug, Args)]
pub struct KernelOpts {
    /// Kernel shape: bisquare (default) or gaussian.
    #[arg(long)]
    pub kernel: Option<String>,

    /// Search fixed distance bandwidths instead of adaptive neighbor
    /// counts.
    #[arg(long, action = ArgAction::SetTrue)]
    pub fixed: bool,

    /// Bandwidth selection criterion: aicc (default) or cv.
    #[arg(long)]
    pub criterion: Option<String>,
}

#[derive(Debug, Args)]
pub struct OlsArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    #[command(flatten)]
    pub schema: SchemaOpts,

    /// Which equation to fit: total (default), mediator, or outcome.
    #[arg(long)]
    pub equation: Option<String>,
}

#[derive(Debug, Args)]
pub struct MoranArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    #[command(flatten)]
    pub schema: SchemaOpts,

    /// Variable to test (default: the outcome column).
    #[arg(long)]
    pub value_col: Option<String>,

    /// Number of Monte Carlo permutations (default 999; 0 = analytic only).
    #[arg(long)]
    pub permutations: Option<usize>,

    /// Spatial weights: knn (default), distance_band, or inverse_distance.
    #[arg(long)]
    pub weights: Option<String>,

    /// Neighbor count for knn weights (default 8).
    #[arg(long)]
    pub k: Option<usize>,

    /// Radius for distance_band weights.
    #[arg(long)]
    pub radius: Option<f64>,

    /// Power for inverse_distance weights (default 1).
    #[arg(long)]
    pub power: Option<f64>,

    /// Row-standardize the weight matrix (default true).
    #[arg(long)]
    pub row_standardize: Option<bool>,
}

#[derive(Debug, Args)]
pub struct GwrArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    #[command(flatten)]
    pub schema: SchemaOpts,
    #[command(flatten)]
    pub kernel: KernelOpts,

    /// Which equation to fit: total (default), mediator, or outcome.
    #[arg(long)]
    pub equation: Option<String>,

    /// Pin a fixed bandwidth distance instead of selecting one.
    #[arg(long)]
    pub bandwidth: Option<f64>,

    /// Pin an adaptive neighbor count instead of selecting one.
    #[arg(long)]
    pub neighbors: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MgwrArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    #[command(flatten)]
    pub schema: SchemaOpts,
    #[command(flatten)]
    pub kernel: KernelOpts,

    /// Which equation to fit: total (default), mediator, or outcome.
    #[arg(long)]
    pub equation: Option<String>,

    /// Pin one fixed bandwidth distance for every term instead of
    /// selecting per-term bandwidths.
    #[arg(long)]
    pub bandwidth: Option<f64>,

    /// Pin one adaptive neighbor count for every term instead of
    /// selecting per-term bandwidths.
    #[arg(long)]
    pub neighbors: Option<usize>,

    /// Backfitting convergence threshold (default 1e-5).
    #[arg(long)]
    pub tol: Option<f64>,

    /// Maximum backfitting sweeps (default 200).
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Debug, Args)]
pub struct MediateArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    #[command(flatten)]
    pub schema: SchemaOpts,

    /// Bootstrap replicates for indirect-effect intervals (default 2000;
    /// 0 disables the bootstrap).
    #[arg(long)]
    pub bootstrap: Option<usize>,

    /// Bootstrap confidence level (default 0.95).
    #[arg(long)]
    pub ci_level: Option<f64>,

    /// Significance level for classification and screening (default 0.05).
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Screen predictors first: drop any that are significant in neither
    /// equation, then fit on the survivors.
    #[arg(long, action = ArgAction::SetTrue)]
    pub screen: bool,

    /// Comma-separated predictors whose direct path is fixed to zero in
    /// the fit-index path model (default: none, a saturated model).
    #[arg(long, value_delimiter = ',')]
    pub omit_direct: Option<Vec<String>>,
}

#[derive(Debug, Args)]
pub struct MediateSpatialArgs {
    #[command(flatten)]
    pub common: CommonOpts,
    #[command(flatten)]
    pub schema: SchemaOpts,
    #[command(flatten)]
    pub kernel: KernelOpts,

    /// Backfitting convergence threshold (default 1e-5).
    #[arg(long)]
    pub tol: Option<f64>,

    /// Maximum backfitting sweeps (default 200).
    #[arg(long)]
    pub max_iter: Option<usize>,

    /// Two-sided significance level for the effect masks (default 0.05).
    #[arg(long)]
    pub alpha: Option<f64>,

    /// Tighten each surface's mask by its effective number of parameters.
    #[arg(long, action = ArgAction::SetTrue)]
    pub enp_adjusted: bool,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[command(flatten)]
    pub common: CommonOpts,

    /// Input CSV of scattered points.
    #[arg(long = "in", value_name = "FILE")]
    pub input: Option<PathBuf>,

    /// Column holding the horizontal coordinate (default "u").
    #[arg(long)]
    pub u_col: Option<String>,

    /// Column holding the vertical coordinate (default "v").
    #[arg(long)]
    pub v_col: Option<String>,

    /// Column holding the value to interpolate (default "value").
    #[arg(long)]
    pub value_col: Option<String>,

    /// Raster columns across the bounding box's longer axis (default 100).
    #[arg(long)]
    pub ncols: Option<usize>,

    /// Inverse-distance power (default 2).
    #[arg(long)]
    pub power: Option<f64>,

    /// Neighbors per cell (default 12).
    #[arg(long)]
    pub k: Option<usize>,

    /// Output format: geojson (default), svg, or csv.
    #[arg(long)]
    pub format: Option<String>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[command(flatten)]
    pub common: CommonOpts,

    /// Number of samples (default 200, minimum 30).
    #[arg(long)]
    pub n: Option<usize>,

    /// Point layout: uniform_random (default) or grid.
    #[arg(long)]
    pub layout: Option<String>,

    /// Comma-separated mediator-equation coefficient fields, one per
    /// predictor. Forms: constant:C, gradient:FROM:TO, sin:FREQ, flip.
    #[arg(long, value_delimiter = ',')]
    pub alpha_fields: Option<Vec<String>>,

    /// Comma-separated outcome-equation direct-effect fields, one per
    /// predictor (same forms as --alpha-fields).
    #[arg(long, value_delimiter = ',')]
    pub gamma_fields: Option<Vec<String>>,

    /// Mediator-to-outcome coefficient field (same forms).
    #[arg(long)]
    pub beta_field: Option<String>,

    /// Mediator-equation noise standard deviation (default 1).
    #[arg(long)]
    pub noise_sd_mediator: Option<f64>,

    /// Outcome-equation noise standard deviation (default 1).
    #[arg(long)]
    pub noise_sd_outcome: Option<f64>,

    /// Side length of the square study area (default 1000).
    #[arg(long)]
    pub extent: Option<f64>,
}
