//! Minimal SVG figures: axes, histogram bars, polylines, dashed markers and
//! a heatmap. Output is a single `<svg>` root element.

use std::fmt::Write;

use spikelab_core::stats::Histogram;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const MARGIN_LEFT: f64 = 60.0;
const MARGIN_RIGHT: f64 = 20.0;
const MARGIN_TOP: f64 = 36.0;
const MARGIN_BOTTOM: f64 = 48.0;

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

struct Frame {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Frame {
    fn new(x0: f64, x1: f64, y0: f64, y1: f64) -> Self {
        let (x1, y1) = (if x1 > x0 { x1 } else { x0 + 1.0 }, if y1 > y0 { y1 } else { y0 + 1.0 });
        Frame { x0, x1, y0, y1 }
    }

    fn px(&self, x: f64) -> f64 {
        MARGIN_LEFT + (x - self.x0) / (self.x1 - self.x0) * (WIDTH - MARGIN_LEFT - MARGIN_RIGHT)
    }

    fn py(&self, y: f64) -> f64 {
        HEIGHT - MARGIN_BOTTOM - (y - self.y0) / (self.y1 - self.y0) * (HEIGHT - MARGIN_TOP - MARGIN_BOTTOM)
    }
}

fn open(out: &mut String, width: f64, height: f64, title: &str) {
    let _ = write!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = write!(out, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = write!(out, r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#, width / 2.0, escape(title));
}

fn axes(out: &mut String, f: &Frame, x_label: &str, y_label: &str) {
    let (l, r, t, b) = (f.px(f.x0), f.px(f.x1), f.py(f.y1), f.py(f.y0));
    let _ = write!(out, r#"<path d="M{l:.2},{t:.2} L{l:.2},{b:.2} L{r:.2},{b:.2}" fill="none" stroke="black"/>"#);
    for i in 0..=4 {
        let x = f.x0 + (f.x1 - f.x0) * i as f64 / 4.0;
        let y = f.y0 + (f.y1 - f.y0) * i as f64 / 4.0;
        let _ = write!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, f.px(x), b + 16.0, tick(x));
        let _ = write!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, l - 6.0, f.py(y) + 4.0, tick(y));
    }
    let _ = write!(out, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, (l + r) / 2.0, HEIGHT - 8.0, escape(x_label));
    let _ = write!(
        out,
        r#"<text x="14" y="{:.2}" text-anchor="middle" transform="rotate(-90 14 {:.2})">{}</text>"#,
        (t + b) / 2.0,
        (t + b) / 2.0,
        escape(y_label)
    );
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-2 || v.abs() >= 1e4) {
        format!("{v:.1e}")
    } else {
        format!("{v:.2}")
    }
}

fn polyline(out: &mut String, f: &Frame, pts: &[(f64, f64)], color: &str, dashed: bool) {
    if pts.is_empty() {
        return;
    }
    let mut d = String::new();
    for (x, y) in pts {
        let _ = write!(d, "{:.2},{:.2} ", f.px(*x), f.py(*y));
    }
    let dash = if dashed { r#" stroke-dasharray="6,4""# } else { "" };
    let _ = write!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"{dash}/>"#, d.trim_end());
}

fn vline(out: &mut String, f: &Frame, x: f64, color: &str) {
    let _ = write!(
        out,
        r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="{color}" stroke-dasharray="6,4"/>"#,
        f.py(f.y0),
        f.py(f.y1),
        x = f.px(x)
    );
}

/// Density histogram with an overlaid curve and dashed vertical markers.
pub fn histogram_plot(hist: &Histogram, curve: &[(f64, f64)], markers: &[f64], title: &str, x_label: &str) -> String {
    let lo = hist.edges[0];
    let hi = *hist.edges.last().expect("histogram has edges");
    let top = hist
        .density
        .iter()
        .copied()
        .chain(curve.iter().map(|p| p.1).filter(|y| y.is_finite()))
        .fold(0.0_f64, f64::max)
        * 1.1;
    let f = Frame::new(lo, hi, 0.0, top);
    let mut out = String::new();
    open(&mut out, WIDTH, HEIGHT, title);
    for (i, &d) in hist.density.iter().enumerate() {
        let (x0, x1) = (f.px(hist.edges[i]), f.px(hist.edges[i + 1]));
        let (y, base) = (f.py(d.min(top)), f.py(0.0));
        let _ = write!(
            out,
            r##"<rect x="{x0:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="#4c78a8" fill-opacity="0.6"/>"##,
            (x1 - x0).max(0.0),
            (base - y).max(0.0)
        );
    }
    let clipped: Vec<(f64, f64)> = curve.iter().map(|&(x, y)| (x, y.min(top))).collect();
    polyline(&mut out, &f, &clipped, "#e45756", false);
    for &m in markers.iter().filter(|m| (lo..=hi).contains(*m)) {
        vline(&mut out, &f, m, "#54a24b");
    }
    axes(&mut out, &f, x_label, "density");
    out.push_str("</svg>\n");
    out
}

/// Scatter of `points` with an optional reference polyline.
pub fn scatter_plot(points: &[(f64, f64)], reference: &[(f64, f64)], title: &str, x_label: &str, y_label: &str) -> String {
    let all = points.iter().chain(reference);
    let (mut x0, mut x1, mut y0, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    let pad = 0.05 * (y1 - y0).max(1e-12);
    let f = Frame::new(x0, x1, y0 - pad, y1 + pad);
    let mut out = String::new();
    open(&mut out, WIDTH, HEIGHT, title);
    for &(x, y) in points {
        let _ = write!(out, r##"<circle cx="{:.2}" cy="{:.2}" r="1.5" fill="#4c78a8"/>"##, f.px(x), f.py(y));
    }
    polyline(&mut out, &f, reference, "#e45756", false);
    axes(&mut out, &f, x_label, y_label);
    out.push_str("</svg>\n");
    out
}

/// Square heatmap of values in `[0, 1]`; `None` cells are left blank.
pub fn heatmap(cells: &[Vec<Option<f64>>], labels: &[&str], title: &str) -> String {
    let k = cells.len();
    let cell = 56.0;
    let left = 110.0;
    let top = 50.0;
    let width = left + cell * k as f64 + 20.0;
    let height = top + cell * k as f64 + 110.0;
    let mut out = String::new();
    open(&mut out, width, height, title);
    for (r, row) in cells.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let (x, y) = (left + cell * c as f64, top + cell * r as f64);
            match v {
                Some(v) => {
                    let t = v.clamp(0.0, 1.0);
                    let (red, green, blue) = if c > r { (255.0 * (1.0 - t), 255.0 * (1.0 - 0.6 * t), 255.0) } else { (255.0, 255.0 * (1.0 - 0.5 * t), 255.0 * (1.0 - t)) };
                    let _ = write!(
                        out,
                        r#"<rect x="{x:.1}" y="{y:.1}" width="{cell}" height="{cell}" fill="rgb({:.0},{:.0},{:.0})" stroke="white"/>"#,
                        red, green, blue
                    );
                    let _ = write!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{v:.2}</text>"#, x + cell / 2.0, y + cell / 2.0 + 4.0);
                }
                None => {
                    let _ = write!(out, r#"<rect x="{x:.1}" y="{y:.1}" width="{cell}" height="{cell}" fill="rgb(235,235,235)" stroke="white"/>"#);
                }
            }
        }
    }
    for (i, name) in labels.iter().enumerate().take(k) {
        let _ = write!(out, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#, left - 6.0, top + cell * i as f64 + cell / 2.0 + 4.0, escape(name));
        let (x, y) = (left + cell * i as f64 + cell / 2.0, top + cell * k as f64 + 10.0);
        let _ = write!(out, r#"<text x="{x:.1}" y="{y:.1}" text-anchor="end" transform="rotate(-45 {x:.1} {y:.1})">{}</text>"#, escape(name));
    }
    out.push_str("</svg>\n");
    out
}
