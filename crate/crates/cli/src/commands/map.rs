//! The `map` subcommand: scattered points to raster to GeoJSON/SVG/CSV.

use std::path::Path;

use geomediate::export::{export_geojson, export_raster_csv, render_svg_heatmap};
use geomediate::raster::{idw_interpolate, GridSpec};
use geomediate::{Error, Result};

use crate::opts::MapArgs;
use crate::runconfig::{resolve_out_dir, Resolver, RunConfig};

/// Read `(u, v, value)` points from a CSV with the named columns.
fn read_points(
    path: &Path,
    u_col: &str,
    v_col: &str,
    value_col: &str,
) -> Result<Vec<(f64, f64, f64)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(std::fs::File::open(path)?);
    let headers: Vec<String> = rdr.headers()?.iter().map(|h| h.to_string()).collect();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let (u_ix, v_ix, val_ix) = (col(u_col)?, col(v_col)?, col(value_col)?);
    let mut points = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record?;
        let parse = |ix: usize, column: &str| -> Result<f64> {
            let field = record.get(ix).unwrap_or("");
            let value: f64 = field.parse().map_err(|_| Error::NonNumericCell {
                row,
                column: column.to_string(),
            })?;
            if !value.is_finite() {
                return Err(Error::NonNumericCell { row, column: column.to_string() });
            }
            Ok(value)
        };
        points.push((parse(u_ix, u_col)?, parse(v_ix, v_col)?, parse(val_ix, value_col)?));
    }
    Ok(points)
}

pub fn run_map(args: &MapArgs) -> Result<()> {
    let cfg = RunConfig::load(args.common.config.as_deref())?;
    let mut res = Resolver::new("map");
    let out_dir = resolve_out_dir(args.common.out.clone(), cfg.out_dir.as_deref())?;
    res.pick("seed", args.common.seed, cfg.seed, 42);

    let input = res.pick_required(
        "input",
        args.input.as_ref().map(|p| p.display().to_string()),
        cfg.input.clone(),
    )?;
    let u_col = res.pick("u_col", args.u_col.clone(), cfg.u_col.clone(), "u".into());
    let v_col = res.pick("v_col", args.v_col.clone(), cfg.v_col.clone(), "v".into());
    let value_col =
        res.pick("value_col", args.value_col.clone(), cfg.value_col.clone(), "value".into());
    let ncols = res.pick("ncols", args.ncols, cfg.ncols, 100);
    let power = res.pick("power", args.power, cfg.power, 2.0);
    let k = res.pick("idw_k", args.k, cfg.idw_k, 12);
    let format = res.pick("format", args.format.clone(), cfg.format.clone(), "geojson".into());

    let points = read_points(Path::new(&input), &u_col, &v_col, &value_col)?;
    if points.is_empty() {
        return Err(Error::EmptySamples);
    }
    let bbox = points.iter().fold(
        (f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY),
        |b, p| (b.0.min(p.0), b.1.min(p.1), b.2.max(p.0), b.3.max(p.1)),
    );
    let grid = GridSpec::from_bbox(bbox, ncols)?;
    log::info!(
        "interpolating {} points onto a {} x {} grid (cell {})",
        points.len(),
        grid.nrows,
        grid.ncols,
        grid.cell_size
    );
    let raster = idw_interpolate(&points, &grid, power, k)?;

    let out_path = match format.as_str() {
        "geojson" => {
            let path = out_dir.join("map.geojson");
            export_geojson(&raster, &value_col, &path)?;
            path
        }
        "svg" => {
            let path = out_dir.join("map.svg");
            render_svg_heatmap(&raster, &value_col, &path)?;
            path
        }
        "csv" => {
            let path = out_dir.join("map_raster.csv");
            export_raster_csv(&raster, &path)?;
            path
        }
        other => {
            return Err(Error::BadConfig(format!(
                "unknown format `{other}` (choose one of: geojson, svg, csv)"
            )))
        }
    };
    println!(
        "Interpolated {} points onto {} x {} cells; wrote {}",
        points.len(),
        raster.grid.nrows,
        raster.grid.ncols,
        out_path.display()
    );
    res.write_manifest(&out_dir)?;
    Ok(())
}
