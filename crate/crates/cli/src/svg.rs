//! Self-contained SVG line plots: fixed 800x500 viewBox, polylines, linear
//! axes with five ticks. No dependency; the CSVs stay the ground truth and
//! these are quick-look figures.

use std::fmt::Write;

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 16.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 48.0;
const PALETTE: [&str; 6] =
    ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

fn tick_label(x: f64) -> String {
    let ax = x.abs();
    if x == 0.0 {
        "0".into()
    } else if (1e-3..1e5).contains(&ax) {
        let s = format!("{x:.4}");
        let s = s.trim_end_matches('0').trim_end_matches('.');
        s.to_string()
    } else {
        format!("{x:.2e}")
    }
}

/// Render one plot. Non-finite points are dropped; degenerate ranges are
/// widened so a constant series still draws as a horizontal line.
pub fn line_plot(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let mut xmin = f64::INFINITY;
    let mut xmax = f64::NEG_INFINITY;
    let mut ymin = f64::INFINITY;
    let mut ymax = f64::NEG_INFINITY;
    for s in series {
        for &(x, y) in &s.points {
            if x.is_finite() && y.is_finite() {
                xmin = xmin.min(x);
                xmax = xmax.max(x);
                ymin = ymin.min(y);
                ymax = ymax.max(y);
            }
        }
    }
    if !xmin.is_finite() {
        (xmin, xmax, ymin, ymax) = (0.0, 1.0, 0.0, 1.0);
    }
    let widen = |lo: &mut f64, hi: &mut f64| {
        let span = *hi - *lo;
        let pad = if span > 0.0 { 0.04 * span } else { 0.5 * lo.abs().max(1e-9) };
        *lo -= pad;
        *hi += pad;
    };
    widen(&mut xmin, &mut xmax);
    widen(&mut ymin, &mut ymax);

    let px = |x: f64| LEFT + (x - xmin) / (xmax - xmin) * (WIDTH - LEFT - RIGHT);
    let py = |y: f64| HEIGHT - BOTTOM - (y - ymin) / (ymax - ymin) * (HEIGHT - TOP - BOTTOM);

    let mut out = String::with_capacity(4096);
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"monospace\" font-size=\"12\">"
    );
    let _ = writeln!(out, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>");
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">{}</text>",
        LEFT + 0.5 * (WIDTH - LEFT - RIGHT),
        xml_escape(title)
    );

    // frame, ticks, grid
    let _ = writeln!(
        out,
        "<rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{:.1}\" height=\"{:.1}\" fill=\"none\" \
         stroke=\"black\"/>",
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    );
    for i in 0..5 {
        let f = i as f64 / 4.0;
        let xv = xmin + f * (xmax - xmin);
        let yv = ymin + f * (ymax - ymin);
        let (gx, gy) = (px(xv), py(yv));
        let _ = writeln!(
            out,
            "<line x1=\"{gx:.1}\" y1=\"{TOP}\" x2=\"{gx:.1}\" y2=\"{:.1}\" stroke=\"#ddd\"/>",
            HEIGHT - BOTTOM
        );
        let _ = writeln!(
            out,
            "<line x1=\"{LEFT}\" y1=\"{gy:.1}\" x2=\"{:.1}\" y2=\"{gy:.1}\" stroke=\"#ddd\"/>",
            WIDTH - RIGHT
        );
        let _ = writeln!(
            out,
            "<text x=\"{gx:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
            HEIGHT - BOTTOM + 16.0,
            tick_label(xv)
        );
        let _ = writeln!(
            out,
            "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"end\">{}</text>",
            LEFT - 6.0,
            gy + 4.0,
            tick_label(yv)
        );
    }
    let _ = writeln!(
        out,
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\">{}</text>",
        LEFT + 0.5 * (WIDTH - LEFT - RIGHT),
        HEIGHT - 10.0,
        xml_escape(x_label)
    );
    let _ = writeln!(
        out,
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">{}</text>",
        TOP + 0.5 * (HEIGHT - TOP - BOTTOM),
        TOP + 0.5 * (HEIGHT - TOP - BOTTOM),
        xml_escape(y_label)
    );

    for (k, s) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let mut pts = String::new();
        for &(x, y) in &s.points {
            if x.is_finite() && y.is_finite() {
                let _ = write!(pts, "{:.2},{:.2} ", px(x), py(y));
            }
        }
        let _ = writeln!(
            out,
            "<polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>",
            pts.trim_end()
        );
        if series.len() > 1 {
            let ly = TOP + 16.0 + 16.0 * k as f64;
            let lx = WIDTH - RIGHT - 150.0;
            let _ = writeln!(
                out,
                "<line x1=\"{lx:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" \
                 stroke=\"{color}\" stroke-width=\"1.5\"/>",
                lx + 24.0
            );
            let _ = writeln!(
                out,
                "<text x=\"{:.1}\" y=\"{:.1}\">{}</text>",
                lx + 30.0,
                ly + 4.0,
                xml_escape(&s.label)
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_polyline_within_viewbox() {
        let s = Series { label: "ell".into(), points: vec![(0.0, 1.0), (1.0, 2.0)] };
        let svg = line_plot("support", "t", "ell", &[s]);
        assert!(svg.starts_with("<svg"));
        assert!(svg.contains("viewBox=\"0 0 800 500\""));
        assert!(svg.contains("<polyline"));
    }

    #[test]
    fn constant_series_survives_degenerate_range() {
        let s = Series { label: "flat".into(), points: vec![(0.0, 3.0), (1.0, 3.0)] };
        let svg = line_plot("flat", "t", "y", &[s]);
        assert!(svg.contains("<polyline"));
        assert!(!svg.contains("NaN"));
    }

    #[test]
    fn skips_non_finite_points() {
        let s = Series {
            label: "gappy".into(),
            points: vec![(0.0, f64::NAN), (1.0, 1.0), (2.0, 2.0)],
        };
        let svg = line_plot("gaps", "t", "y", &[s]);
        assert!(!svg.contains("NaN"));
    }
}
