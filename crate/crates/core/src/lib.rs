//! Spatial statistics for georeferenced survey data: global regression
//! screening, spatial autocorrelation tests, geographically weighted
//! regression with per-covariate bandwidths, and spatially varying mediation
//! effects, plus raster interpolation for mapping the results.
//!
//! The crate is organised around a [`data::Dataset`] of point samples.
//! Estimators consume a dataset plus a [`data::ModelSpec`] describing
//! variable roles and return plain result structs; nothing here touches the
//! filesystem except CSV ingestion and the export helpers, so every stage
//! composes in memory.
//!
//! Determinism is a contract: all stochastic routines (permutation tests,
//! bootstrap intervals, synthetic data) draw from seeded, stream-indexed
//! generators in [`rng`], so results are identical for a given seed no
//! matter how many threads run.

/// Library version, echoed into run manifests by downstream tooling.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod bandwidth;
pub mod data;
pub mod distance;
pub mod error;
pub mod export;
pub mod gwr;
pub mod kernel;
pub mod linalg;
pub mod mediate_spatial;
pub mod mediation;
pub mod mgwr;
pub mod moran;
pub mod pathfit;
pub mod raster;
pub mod regress;
pub mod rng;
pub mod synth;
pub mod weights;

pub use bandwidth::{golden_section_search, SearchStep, SearchTrace};
pub use data::{
    load_dataset, read_dataset, standardize, unstandardize, CoordSystem, CsvSchema, Dataset,
    DuplicatePolicy, Equation, ModelSpec, ScalingInfo, SpatialSample,
};
pub use error::{Error, Result};
pub use export::{
    export_geojson, export_raster_csv, geojson_string, palette_color, palette_hex,
    palette_position, raster_csv_string, render_svg_heatmap, svg_string,
};
pub use gwr::{aicc, gwr_fit, select_bandwidth, GwrFit, SelectionCriterion};
pub use kernel::{kernel_weight, Bandwidth, KernelKind, KernelSpec};
pub use mediate_spatial::{fit_spatial_mediation, SpatialMediationConfig, SpatialMediationFit};
pub use mediation::{
    fit_global_mediation, mediation_decompose, mediation_decompose_with_significance,
    screen_predictors, BootstrapConfig, BootstrapSummary, GlobalMediation, MediationClass,
    MediationEffect, ScreenReport, ScreenRow,
};
pub use mgwr::{mgwr_fit, soc_f, MgwrConfig, MgwrFit};
pub use moran::{morans_i, MoranResult};
pub use pathfit::{fit_verdicts, path_fit_indices, FitIndices, FitVerdicts, IndexVerdict};
pub use raster::{idw_interpolate, GridSpec, Raster};
pub use regress::{ols_fit, vif, OlsFit};
pub use synth::{gen_synthetic, surface_rmse, CoefficientField, Layout, SynthConfig, TruthBundle};
pub use weights::{knn_weights, WeightsKind, WeightsMatrix};
