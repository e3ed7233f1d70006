//! Map export: rasters to GeoJSON cell polygons, SVG heatmaps, and CSV.
//!
//! All three writers emit cells in row-major order (row 0 first) and skip
//! masked cells, so output bytes are a pure function of the raster.

use std::path::Path;

use serde_json::json;

use crate::error::{Error, Result};
use crate::raster::Raster;

/// Five-stop perceptual color ramp (dark violet to yellow), interpolated
/// linearly between stops.
const PALETTE_STOPS: [(u8, u8, u8); 5] =
    [(68, 1, 84), (59, 82, 139), (33, 145, 140), (94, 201, 98), (253, 231, 37)];

/// Number of constant-color stripes used to draw the legend ramp.
const LEGEND_STRIPES: usize = 64;

/// Position of `value` on the ramp, linear in value and clamped to [0, 1].
/// A degenerate range (`max <= min`) maps everything to 0.
pub fn palette_position(value: f64, min: f64, max: f64) -> f64 {
    if !(max > min) {
        return 0.0;
    }
    ((value - min) / (max - min)).clamp(0.0, 1.0)
}

/// Color at ramp position `t` in [0, 1] (clamped).
pub fn palette_color(t: f64) -> (u8, u8, u8) {
    let t = t.clamp(0.0, 1.0);
    let seg = t * (PALETTE_STOPS.len() - 1) as f64;
    let i = (seg.floor() as usize).min(PALETTE_STOPS.len() - 2);
    let frac = seg - i as f64;
    let (r0, g0, b0) = PALETTE_STOPS[i];
    let (r1, g1, b1) = PALETTE_STOPS[i + 1];
    let lerp = |a: u8, b: u8| (a as f64 + (b as f64 - a as f64) * frac).round() as u8;
    (lerp(r0, r1), lerp(g0, g1), lerp(b0, b1))
}

/// Hex form of [`palette_color`], e.g. `"#440154"`.
pub fn palette_hex(t: f64) -> String {
    let (r, g, b) = palette_color(t);
    format!("#{r:02x}{g:02x}{b:02x}")
}

/// Serialize the raster as a GeoJSON FeatureCollection: one square polygon
/// per unmasked cell in row-major order, with `value`, `row`, and `col`
/// properties. Exterior rings run counterclockwise and are closed. `name`
/// labels the collection (a foreign member, as GIS tools conventionally
/// emit).
pub fn geojson_string(r: &Raster, name: &str) -> String {
    let g = &r.grid;
    let mut features = Vec::new();
    for row in 0..g.nrows {
        for col in 0..g.ncols {
            let Some(value) = r.value(row, col) else { continue };
            let u0 = g.origin.0 + col as f64 * g.cell_size;
            let v0 = g.origin.1 + row as f64 * g.cell_size;
            let u1 = u0 + g.cell_size;
            let v1 = v0 + g.cell_size;
            features.push(json!({
                "type": "Feature",
                "geometry": {
                    "type": "Polygon",
                    "coordinates": [[[u0, v0], [u1, v0], [u1, v1], [u0, v1], [u0, v0]]],
                },
                "properties": {"value": value, "row": row, "col": col},
            }));
        }
    }
    let collection = json!({
        "type": "FeatureCollection",
        "name": name,
        "features": features,
    });
    serde_json::to_string_pretty(&collection).expect("raster geojson serializes")
}

/// Write [`geojson_string`] to `path`.
///
/// # Errors
///
/// [`Error::Io`] when the file cannot be written.
pub fn export_geojson(r: &Raster, name: &str, path: &Path) -> Result<()> {
    std::fs::write(path, geojson_string(r, name))?;
    Ok(())
}

/// Serialize the raster as CSV with header `u,v,value`: one line per
/// unmasked cell center, row-major.
pub fn raster_csv_string(r: &Raster) -> String {
    let mut out = String::from("u,v,value\n");
    for row in 0..r.grid.nrows {
        for col in 0..r.grid.ncols {
            let Some(value) = r.value(row, col) else { continue };
            let (u, v) = r.grid.cell_center(row, col);
            out.push_str(&format!("{u},{v},{value}\n"));
        }
    }
    out
}

/// Write [`raster_csv_string`] to `path`.
///
/// # Errors
///
/// [`Error::Io`] when the file cannot be written.
pub fn export_raster_csv(r: &Raster, path: &Path) -> Result<()> {
    std::fs::write(path, raster_csv_string(r))?;
    Ok(())
}

/// Render the raster as an SVG heatmap: one unit square `<rect>` per
/// unmasked cell (masked cells show the neutral background), colors linear
/// in value between the raster's min and max, plus a vertical legend ramp
/// with numeric ticks at the minimum, midpoint, and maximum. Rows are
/// flipped so larger `v` is drawn higher. A constant raster renders every
/// cell at the ramp's low end with min and max ticks equal.
///
/// # Errors
///
/// [`Error::AllMasked`] when no cell carries a value.
pub fn svg_string(r: &Raster, title: &str) -> Result<String> {
    let (min, max) = r.min_max().ok_or(Error::AllMasked)?;
    let g = &r.grid;
    let grid_w = g.ncols as f64;
    let grid_h = g.nrows as f64;
    let view_w = grid_w + 8.0;
    let view_h = grid_h.max(6.0) + 1.2;
    let font = (view_h / 18.0).max(0.45);

    let mut out = String::new();
    out.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"900\" height=\"{:.0}\" \
         viewBox=\"-0.2 -1.2 {view_w} {view_h}\" shape-rendering=\"crispEdges\">\n",
        900.0 * view_h / view_w
    ));
    out.push_str(&format!(
        "  <title>{}</title>\n",
        xml_escape(title)
    ));
    out.push_str(&format!(
        "  <text x=\"0\" y=\"-0.4\" font-size=\"{font}\" font-family=\"sans-serif\">{}</text>\n",
        xml_escape(title)
    ));
    out.push_str(&format!(
        "  <rect class=\"bg\" x=\"0\" y=\"0\" width=\"{grid_w}\" height=\"{grid_h}\" \
         fill=\"#e8e8e8\"/>\n"
    ));
    for row in 0..g.nrows {
        for col in 0..g.ncols {
            let Some(value) = r.value(row, col) else { continue };
            let fill = palette_hex(palette_position(value, min, max));
            let y = g.nrows - 1 - row;
            out.push_str(&format!(
                "  <rect class=\"cell\" x=\"{col}\" y=\"{y}\" width=\"1\" height=\"1\" \
                 fill=\"{fill}\"/>\n"
            ));
        }
    }

    let bar_x = grid_w + 1.0;
    let bar_h = grid_h.max(6.0) - 1.0;
    let bar_top = 0.5;
    let stripe_h = bar_h / LEGEND_STRIPES as f64;
    for s in 0..LEGEND_STRIPES {
        // Stripe 0 sits at the top of the bar and shows the maximum.
        let t = 1.0 - s as f64 / (LEGEND_STRIPES - 1) as f64;
        let y = bar_top + s as f64 * stripe_h;
        out.push_str(&format!(
            "  <rect class=\"legend\" x=\"{bar_x}\" y=\"{y}\" width=\"0.8\" \
             height=\"{stripe_h}\" fill=\"{}\"/>\n",
            palette_hex(t)
        ));
    }
    let tick_x = bar_x + 1.0;
    let mid = 0.5 * (min + max);
    for (frac, value) in [(0.0, max), (0.5, mid), (1.0, min)] {
        let y = bar_top + frac * bar_h;
        out.push_str(&format!(
            "  <line x1=\"{bar_x}\" y1=\"{y}\" x2=\"{tick_x}\" y2=\"{y}\" \
             stroke=\"#333\" stroke-width=\"0.05\"/>\n"
        ));
        out.push_str(&format!(
            "  <text class=\"tick\" x=\"{}\" y=\"{}\" font-size=\"{font}\" \
             font-family=\"sans-serif\">{value}</text>\n",
            tick_x + 0.2,
            y + 0.35 * font
        ));
    }
    out.push_str("</svg>\n");
    Ok(out)
}

/// Write [`svg_string`] to `path`.
///
/// # Errors
///
/// [`Error::AllMasked`] when no cell carries a value; [`Error::Io`] when
/// the file cannot be written.
pub fn render_svg_heatmap(r: &Raster, title: &str, path: &Path) -> Result<()> {
    let svg = svg_string(r, title)?;
    std::fs::write(path, svg)?;
    Ok(())
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
