//! Minimal SVG plotting: line panels and histograms, enough for the
//! diagnostic figures. Degenerate inputs (single point, zero range) render
//! as valid if uninteresting plots.

use std::fmt::Write;

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 300.0;
const MARGIN_L: f64 = 60.0;
const MARGIN_B: f64 = 42.0;
const MARGIN_T: f64 = 28.0;
const MARGIN_R: f64 = 14.0;

const COLORS: &[&str] = &["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Scatter markers instead of a polyline.
    pub points: bool,
    /// Thin/faint rendering for sample bundles.
    pub faint: bool,
}

impl Series {
    pub fn line(label: &str, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { label: label.into(), x, y, points: false, faint: false }
    }

    pub fn scatter(label: &str, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { label: label.into(), x, y, points: true, faint: false }
    }

    pub fn faint_line(label: &str, x: Vec<f64>, y: Vec<f64>) -> Self {
        Self { label: label.into(), x, y, points: false, faint: true }
    }
}

#[derive(Debug, Clone)]
pub struct Panel {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub series: Vec<Series>,
}

fn finite_range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values.filter(|v| v.is_finite()) {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() || !hi.is_finite() {
        return (0.0, 1.0);
    }
    if lo == hi {
        // pad a degenerate range
        let pad = if lo == 0.0 { 1.0 } else { lo.abs() * 0.1 };
        return (lo - pad, hi + pad);
    }
    (lo, hi)
}

fn render_panel(svg: &mut String, panel: &Panel, x_off: f64) {
    let (x_lo, x_hi) = finite_range(panel.series.iter().flat_map(|s| s.x.iter().cloned()));
    let (y_lo, y_hi) = finite_range(panel.series.iter().flat_map(|s| s.y.iter().cloned()));
    let plot_w = PANEL_W - MARGIN_L - MARGIN_R;
    let plot_h = PANEL_H - MARGIN_T - MARGIN_B;
    let sx = move |x: f64| x_off + MARGIN_L + (x - x_lo) / (x_hi - x_lo) * plot_w;
    let sy = move |y: f64| MARGIN_T + plot_h - (y - y_lo) / (y_hi - y_lo) * plot_h;

    // frame and labels
    let _ = write!(
        svg,
        "<rect x='{:.1}' y='{MARGIN_T}' width='{plot_w:.1}' height='{plot_h:.1}' fill='none' stroke='#333'/>",
        x_off + MARGIN_L
    );
    let _ = write!(
        svg,
        "<text x='{:.1}' y='16' text-anchor='middle' font-size='13' font-family='sans-serif'>{}</text>",
        x_off + PANEL_W / 2.0,
        panel.title
    );
    let _ = write!(
        svg,
        "<text x='{:.1}' y='{:.1}' text-anchor='middle' font-size='11' font-family='sans-serif'>{}</text>",
        x_off + PANEL_W / 2.0,
        PANEL_H - 8.0,
        panel.x_label
    );
    let _ = write!(
        svg,
        "<text x='{:.1}' y='{:.1}' text-anchor='middle' font-size='11' font-family='sans-serif' transform='rotate(-90 {:.1} {:.1})'>{}</text>",
        x_off + 14.0,
        MARGIN_T + plot_h / 2.0,
        x_off + 14.0,
        MARGIN_T + plot_h / 2.0,
        panel.y_label
    );
    // axis tick labels at the extremes
    for (v, anchor, x, y) in [
        (x_lo, "start", x_off + MARGIN_L, PANEL_H - MARGIN_B + 14.0),
        (x_hi, "end", x_off + PANEL_W - MARGIN_R, PANEL_H - MARGIN_B + 14.0),
    ] {
        let _ = write!(
            svg,
            "<text x='{x:.1}' y='{y:.1}' text-anchor='{anchor}' font-size='10' font-family='sans-serif'>{v:.4}</text>"
        );
    }
    for (v, y) in [(y_lo, MARGIN_T + plot_h), (y_hi, MARGIN_T + 10.0)] {
        let _ = write!(
            svg,
            "<text x='{:.1}' y='{y:.1}' text-anchor='end' font-size='10' font-family='sans-serif'>{v:.4}</text>",
            x_off + MARGIN_L - 4.0
        );
    }

    let mut color_idx = 0usize;
    let mut legend_y = MARGIN_T + 14.0;
    for s in &panel.series {
        let color = if s.faint { "#9999bb" } else { COLORS[color_idx % COLORS.len()] };
        if !s.faint {
            color_idx += 1;
        }
        if s.points {
            for (&x, &y) in s.x.iter().zip(&s.y) {
                if x.is_finite() && y.is_finite() {
                    let _ = write!(svg, "<circle cx='{:.2}' cy='{:.2}' r='2.6' fill='{color}'/>", sx(x), sy(y));
                }
            }
        } else {
            let mut d = String::new();
            let mut pen_down = false;
            for (&x, &y) in s.x.iter().zip(&s.y) {
                if x.is_finite() && y.is_finite() {
                    let cmd = if pen_down { 'L' } else { 'M' };
                    let _ = write!(d, "{cmd}{:.2} {:.2} ", sx(x), sy(y));
                    pen_down = true;
                } else {
                    pen_down = false;
                }
            }
            let (width, opacity) = if s.faint { (0.6, 0.35) } else { (1.6, 1.0) };
            let _ = write!(
                svg,
                "<path d='{d}' fill='none' stroke='{color}' stroke-width='{width}' stroke-opacity='{opacity}'/>"
            );
        }
        if !s.label.is_empty() && !s.faint {
            let _ = write!(
                svg,
                "<text x='{:.1}' y='{legend_y:.1}' font-size='10' font-family='sans-serif' fill='{color}'>{}</text>",
                x_off + MARGIN_L + 6.0,
                s.label
            );
            legend_y += 13.0;
        }
    }
}

/// Renders one or more panels side by side into a standalone SVG document.
pub fn render(panels: &[Panel]) -> String {
    let total_w = PANEL_W * panels.len() as f64;
    let mut svg = format!(
        "<svg xmlns='http://www.w3.org/2000/svg' width='{total_w:.0}' height='{PANEL_H:.0}' viewBox='0 0 {total_w:.0} {PANEL_H:.0}'>\
         <rect width='100%' height='100%' fill='white'/>"
    );
    for (i, panel) in panels.iter().enumerate() {
        render_panel(&mut svg, panel, i as f64 * PANEL_W);
    }
    svg.push_str("</svg>\n");
    svg
}

/// Histogram bin counts on an equal-width grid; returns (centers, counts).
pub fn histogram_bins(values: &[f64], bins: usize) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi) = finite_range(values.iter().cloned());
    let bins = bins.max(1);
    let w = (hi - lo) / bins as f64;
    let mut counts = vec![0.0; bins];
    for &v in values {
        if v.is_finite() {
            let idx = (((v - lo) / w) as usize).min(bins - 1);
            counts[idx] += 1.0;
        }
    }
    let centers = (0..bins).map(|i| lo + (i as f64 + 0.5) * w).collect();
    (centers, counts)
}

/// A histogram panel rendered as a step line.
pub fn histogram_panel(title: &str, x_label: &str, values: &[f64], bins: usize) -> (Panel, Vec<f64>, Vec<f64>) {
    let (centers, counts) = histogram_bins(values, bins);
    let panel = Panel {
        title: title.into(),
        x_label: x_label.into(),
        y_label: "count".into(),
        series: vec![Series::line("", centers.clone(), counts.clone())],
    };
    (panel, centers, counts)
}
