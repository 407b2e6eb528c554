//! Minimal static SVG line plots: exponent convergence against `log n` and
//! log-log correlation curves. One `<polyline>` per series, one horizontal
//! `<line>` for the reference value when present, axes as `<path>` elements.

use crate::error::EstimateError;

/// One plotted series: `(x, y)` points with a legend label.
#[derive(Debug, Clone)]
pub struct PlotSeries {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 500.0;
const MARGIN_L: f64 = 70.0;
const MARGIN_R: f64 = 30.0;
const MARGIN_T: f64 = 40.0;
const MARGIN_B: f64 = 50.0;

const SERIES_COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

/// Render series with a log-scaled x axis. Every series needs at least two
/// points with positive `x`.
pub fn render_log_x_plot(
    series: &[PlotSeries],
    reference: Option<f64>,
    title: &str,
    x_label: &str,
    y_label: &str,
) -> Result<String, EstimateError> {
    if series.is_empty() {
        return Err(EstimateError::TooFewPlotPoints(0));
    }
    for s in series {
        if s.points.len() < 2 {
            return Err(EstimateError::TooFewPlotPoints(s.points.len()));
        }
    }

    let xs: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.0.max(f64::MIN_POSITIVE).ln()))
        .collect();
    let mut ys: Vec<f64> = series
        .iter()
        .flat_map(|s| s.points.iter().map(|p| p.1))
        .collect();
    if let Some(r) = reference {
        ys.push(r);
    }
    let (x_min, x_max) = min_max(&xs);
    let (mut y_min, mut y_max) = min_max(&ys);
    if y_min == y_max {
        y_min -= 0.5;
        y_max += 0.5;
    }
    let pad = 0.06 * (y_max - y_min);
    y_min -= pad;
    y_max += pad;

    let x_to_px = |x: f64| {
        let t = if x_max > x_min {
            (x.max(f64::MIN_POSITIVE).ln() - x_min) / (x_max - x_min)
        } else {
            0.5
        };
        MARGIN_L + t * (WIDTH - MARGIN_L - MARGIN_R)
    };
    let y_to_px = |y: f64| {
        let t = (y - y_min) / (y_max - y_min);
        HEIGHT - MARGIN_B - t * (HEIGHT - MARGIN_T - MARGIN_B)
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" \
         font-family=\"sans-serif\" font-size=\"13\">\n"
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"22\" text-anchor=\"middle\" font-size=\"16\">{}</text>\n",
        WIDTH / 2.0,
        escape(title)
    ));
    // axes
    svg.push_str(&format!(
        "  <path d=\"M {l} {t} L {l} {b} L {r} {b}\" fill=\"none\" stroke=\"#333\"/>\n",
        l = MARGIN_L,
        t = MARGIN_T,
        b = HEIGHT - MARGIN_B,
        r = WIDTH - MARGIN_R,
    ));
    svg.push_str(&format!(
        "  <text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n",
        (MARGIN_L + WIDTH - MARGIN_R) / 2.0,
        HEIGHT - 12.0,
        escape(x_label)
    ));
    svg.push_str(&format!(
        "  <text x=\"18\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {})\">{}</text>\n",
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        (MARGIN_T + HEIGHT - MARGIN_B) / 2.0,
        escape(y_label)
    ));
    // y tick labels at the extremes
    for (value, anchor_y) in [(y_max - pad, MARGIN_T + 12.0), (y_min + pad, HEIGHT - MARGIN_B)] {
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"end\">{:.3}</text>\n",
            MARGIN_L - 6.0,
            anchor_y,
            value
        ));
    }

    if let Some(r) = reference {
        let y = y_to_px(r);
        svg.push_str(&format!(
            "  <line x1=\"{}\" y1=\"{y}\" x2=\"{}\" y2=\"{y}\" stroke=\"#777\" \
             stroke-dasharray=\"6 4\"/>\n",
            MARGIN_L,
            WIDTH - MARGIN_R,
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" text-anchor=\"end\" fill=\"#777\">reference {r}</text>\n",
            WIDTH - MARGIN_R - 4.0,
            y - 5.0,
        ));
    }

    for (k, s) in series.iter().enumerate() {
        let color = SERIES_COLORS[k % SERIES_COLORS.len()];
        let coords: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| format!("{:.2},{:.2}", x_to_px(x), y_to_px(y)))
            .collect();
        svg.push_str(&format!(
            "  <polyline points=\"{}\" fill=\"none\" stroke=\"{color}\" stroke-width=\"1.5\"/>\n",
            coords.join(" ")
        ));
        svg.push_str(&format!(
            "  <text x=\"{}\" y=\"{}\" fill=\"{color}\">{}</text>\n",
            WIDTH - MARGIN_R - 150.0,
            MARGIN_T + 16.0 * (k as f64 + 1.0),
            escape(&s.label)
        ));
    }

    svg.push_str("</svg>\n");
    Ok(svg)
}

fn min_max(values: &[f64]) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &v in values {
        if v.is_finite() {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    if !lo.is_finite() {
        (0.0, 1.0)
    } else {
        (lo, hi)
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
