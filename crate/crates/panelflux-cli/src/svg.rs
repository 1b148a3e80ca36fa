//! Standalone SVG rendering for impulse-response charts.
//!
//! Each chart shows one (shock, response) pair: the point response as a
//! polyline over quarters, an optional percentile-band polygon behind it,
//! and the Cholesky ordering spelled out in the chart title so a chart
//! never circulates detached from the identification assumption that
//! produced it. The output is a self-contained SVG document with no
//! external references, so it renders identically anywhere.

use std::fmt::Write as _;
use std::path::Path;

use panelflux::irf::IrfResult;

use crate::error::{CliError, Result};

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 24.0;
const MARGIN_TOP: f64 = 48.0;
const MARGIN_BOTTOM: f64 = 56.0;

const BAND_FILL: &str = "#9ecae1";
const LINE_STROKE: &str = "#08519c";

/// Render one shock/response panel of `irf` and write it to `path`.
pub fn render_irf_svg(irf: &IrfResult, shock: &str, response: &str, path: &Path) -> Result<()> {
    let doc = irf_svg_document(irf, shock, response)?;
    std::fs::write(path, doc)?;
    Ok(())
}

/// Build the SVG document for one shock/response pair.
pub fn irf_svg_document(irf: &IrfResult, shock: &str, response: &str) -> Result<String> {
    let values = irf
        .response_path(shock, response)
        .map_err(|_| CliError::Config(format!("no `{shock}` -> `{response}` pair in the IRF")))?;
    let band = irf.band_path(shock, response);

    // Value range covers the path, the band envelope, and zero so the
    // baseline is always on screen.
    let mut ymin = 0.0f64;
    let mut ymax = 0.0f64;
    for &v in &values {
        ymin = ymin.min(v);
        ymax = ymax.max(v);
    }
    if let Some((lower, upper)) = &band {
        for &v in lower.iter().chain(upper.iter()) {
            ymin = ymin.min(v);
            ymax = ymax.max(v);
        }
    }
    let pad = 0.05 * (ymax - ymin);
    let (ymin, ymax) = if ymax - ymin < 1e-12 {
        (ymin - 1.0, ymax + 1.0)
    } else {
        (ymin - pad, ymax + pad)
    };

    let horizon = irf.horizon;
    // A single-point chart (horizon 0) still needs a non-degenerate x range.
    let (xmin, xmax) = if horizon == 0 {
        (-0.5, 0.5)
    } else {
        (0.0, horizon as f64)
    };

    let px = |x: f64| MARGIN_LEFT + (x - xmin) / (xmax - xmin) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT);
    let py = |y: f64| MARGIN_TOP + (ymax - y) / (ymax - ymin) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM);

    let title = format!(
        "Response of {response} to a {shock} shock (Cholesky ordering: {})",
        irf.ordering.join(", ")
    );

    let mut out = String::new();
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    );
    let _ = writeln!(out, "  <title>{}</title>", escape_xml(&title));
    let _ = writeln!(
        out,
        "  <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#ffffff\"/>"
    );
    let _ = writeln!(
        out,
        "  <text x=\"{:.2}\" y=\"26\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">{}</text>",
        (MARGIN_LEFT + WIDTH - MARGIN_RIGHT) / 2.0,
        escape_xml(&title)
    );

    // Band polygon sits behind the response line.
    if let Some((lower, upper)) = &band {
        let mut pts = String::new();
        for (h, &v) in upper.iter().enumerate() {
            let _ = write!(pts, "{:.2},{:.2} ", px(h as f64), py(v));
        }
        for (h, &v) in lower.iter().enumerate().rev() {
            let _ = write!(pts, "{:.2},{:.2} ", px(h as f64), py(v));
        }
        let _ = writeln!(
            out,
            "  <polygon class=\"band\" points=\"{}\" fill=\"{BAND_FILL}\" fill-opacity=\"0.45\" stroke=\"none\"/>",
            pts.trim_end()
        );
    }

    // Frame, zero baseline, and ticks.
    let x0 = MARGIN_LEFT;
    let x1 = WIDTH - MARGIN_RIGHT;
    let y0 = MARGIN_TOP;
    let y1 = HEIGHT - MARGIN_BOTTOM;
    let _ = writeln!(
        out,
        "  <line x1=\"{x0:.2}\" y1=\"{y1:.2}\" x2=\"{x1:.2}\" y2=\"{y1:.2}\" stroke=\"#333333\" stroke-width=\"1\"/>"
    );
    let _ = writeln!(
        out,
        "  <line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x0:.2}\" y2=\"{y1:.2}\" stroke=\"#333333\" stroke-width=\"1\"/>"
    );
    if ymin < 0.0 && ymax > 0.0 {
        let zy = py(0.0);
        let _ = writeln!(
            out,
            "  <line x1=\"{x0:.2}\" y1=\"{zy:.2}\" x2=\"{x1:.2}\" y2=\"{zy:.2}\" stroke=\"#999999\" stroke-width=\"1\" stroke-dasharray=\"4 3\"/>"
        );
    }

    let x_step = ((horizon.max(1) as f64 / 8.0).ceil() as usize).max(1);
    let mut h = 0usize;
    while h <= horizon {
        let x = px(h as f64);
        let _ = writeln!(
            out,
            "  <line x1=\"{x:.2}\" y1=\"{y1:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#333333\" stroke-width=\"1\"/>",
            y1 + 5.0
        );
        let _ = writeln!(
            out,
            "  <text x=\"{x:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">{h}</text>",
            y1 + 18.0
        );
        h += x_step;
    }

    let y_step = nice_step((ymax - ymin) / 5.0);
    let mut tick = (ymin / y_step).ceil() * y_step;
    while tick <= ymax + 1e-9 * y_step {
        let y = py(tick);
        let _ = writeln!(
            out,
            "  <line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{x0:.2}\" y2=\"{y:.2}\" stroke=\"#333333\" stroke-width=\"1\"/>",
            x0 - 5.0
        );
        let _ = writeln!(
            out,
            "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">{}</text>",
            x0 - 8.0,
            y + 3.5,
            format_tick(tick)
        );
        tick += y_step;
    }

    // Axis labels.
    let _ = writeln!(
        out,
        "  <text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">quarters</text>",
        (x0 + x1) / 2.0,
        HEIGHT - 14.0
    );
    let _ = writeln!(
        out,
        "  <text x=\"18\" y=\"{:.2}\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\" transform=\"rotate(-90 18 {:.2})\">response</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );

    // Response polyline plus point markers, so a horizon-0 chart still
    // shows its single value.
    let mut pts = String::new();
    for (h, &v) in values.iter().enumerate() {
        let _ = write!(pts, "{:.2},{:.2} ", px(h as f64), py(v));
    }
    let _ = writeln!(
        out,
        "  <polyline class=\"response\" points=\"{}\" fill=\"none\" stroke=\"{LINE_STROKE}\" stroke-width=\"1.8\"/>",
        pts.trim_end()
    );
    for (h, &v) in values.iter().enumerate() {
        let _ = writeln!(
            out,
            "  <circle cx=\"{:.2}\" cy=\"{:.2}\" r=\"2.5\" fill=\"{LINE_STROKE}\"/>",
            px(h as f64),
            py(v)
        );
    }

    let _ = writeln!(out, "</svg>");
    Ok(out)
}

/// Parse the `points` attribute of the response polyline back into pixel
/// coordinates. Returns `None` if the document has no response polyline.
pub fn polyline_points(svg: &str) -> Option<Vec<(f64, f64)>> {
    let start = svg.find("<polyline class=\"response\"")?;
    let rest = &svg[start..];
    let pts_start = rest.find("points=\"")? + "points=\"".len();
    let pts_end = rest[pts_start..].find('"')? + pts_start;
    let mut out = Vec::new();
    for pair in rest[pts_start..pts_end].split_whitespace() {
        let (x, y) = pair.split_once(',')?;
        out.push((x.parse().ok()?, y.parse().ok()?));
    }
    Some(out)
}

/// Round a raw interval up to a 1/2/2.5/5 x 10^k "nice" step.
fn nice_step(raw: f64) -> f64 {
    let raw = raw.max(1e-12);
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let n = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 2.5 {
        2.5
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    n * mag
}

fn format_tick(v: f64) -> String {
    if v.abs() < 1e-12 {
        return "0".to_string();
    }
    let s = format!("{v:.6}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn escape_xml(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use nalgebra::DMatrix;
    use panelflux::irf::{self, IrfBands, IrfResult};

    use super::*;

    fn decay_irf(horizon: usize) -> IrfResult {
        // Diagonal VAR(1) with unit shocks: own responses decay as 0.5^h
        // and 0.4^h, cross responses are identically zero.
        let gamma = DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.4]);
        let sigma = DMatrix::identity(2, 2);
        let model = irf::model_from_parameters(&["F", "ICT"], vec![gamma], sigma).unwrap();
        irf::impulse_response(&model, horizon, &["F", "ICT"]).unwrap()
    }

    #[test]
    fn decay_polyline_is_monotone_in_pixels() {
        let irf = decay_irf(12);
        let doc = irf_svg_document(&irf, "F", "F").unwrap();
        let pts = polyline_points(&doc).unwrap();
        assert_eq!(pts.len(), 13);
        for pair in pts.windows(2) {
            // Value decreases each quarter, so pixel y (which grows
            // downward) must strictly increase, and x must advance.
            assert!(pair[1].0 > pair[0].0);
            assert!(pair[1].1 > pair[0].1);
        }
    }

    #[test]
    fn zero_response_is_flat_at_the_baseline() {
        let irf = decay_irf(8);
        let doc = irf_svg_document(&irf, "F", "ICT").unwrap();
        let pts = polyline_points(&doc).unwrap();
        assert_eq!(pts.len(), 9);
        let first_y = pts[0].1;
        for &(_, y) in &pts {
            assert!((y - first_y).abs() < 1e-9);
        }
        // The flat line sits at value zero; with the [-1, 1] padded range
        // that is the vertical midpoint of the plot area.
        let mid = (MARGIN_TOP + HEIGHT - MARGIN_BOTTOM) / 2.0;
        assert!((first_y - mid).abs() < 0.51, "baseline y {first_y} vs midpoint {mid}");
    }

    #[test]
    fn horizon_zero_renders_a_single_point() {
        let irf = decay_irf(0);
        let doc = irf_svg_document(&irf, "F", "F").unwrap();
        let pts = polyline_points(&doc).unwrap();
        assert_eq!(pts.len(), 1);
        assert!(doc.contains("<circle"));
        assert!(doc.contains("quarters"));
        assert!(doc.contains("response"));
    }

    #[test]
    fn band_polygon_present_only_with_bands() {
        let mut irf = decay_irf(4);
        let doc = irf_svg_document(&irf, "F", "F").unwrap();
        assert!(!doc.contains("<polygon"));

        let widen = |m: &DMatrix<f64>, d: f64| m.map(|v| v + d);
        irf.bands = Some(IrfBands {
            lower: irf.responses.iter().map(|m| widen(m, -0.1)).collect(),
            upper: irf.responses.iter().map(|m| widen(m, 0.1)).collect(),
            coverage: 0.90,
            replicates_used: 30,
            replicates_dropped: 0,
        });
        let doc = irf_svg_document(&irf, "F", "F").unwrap();
        assert!(doc.contains("<polygon class=\"band\""));
        // Envelope has 2(H+1) vertices.
        let pts_attr = doc
            .split_once("<polygon class=\"band\" points=\"")
            .and_then(|(_, rest)| rest.split_once('"'))
            .map(|(pts, _)| pts.split_whitespace().count())
            .unwrap();
        assert_eq!(pts_attr, 10);
    }

    #[test]
    fn title_carries_the_ordering_annotation() {
        let irf = decay_irf(4);
        let doc = irf_svg_document(&irf, "F", "ICT").unwrap();
        assert!(doc.contains("Response of ICT to a F shock"));
        assert!(doc.contains("Cholesky ordering: F, ICT"));
    }

    #[test]
    fn unknown_pair_is_rejected() {
        let irf = decay_irf(4);
        assert!(irf_svg_document(&irf, "F", "GDP").is_err());
    }

    #[test]
    fn render_writes_the_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("irf_F_to_F.svg");
        let irf = decay_irf(6);
        render_irf_svg(&irf, "F", "F", &path).unwrap();
        let body = std::fs::read_to_string(&path).unwrap();
        assert!(body.starts_with("<svg"));
        assert!(body.trim_end().ends_with("</svg>"));
    }
}
