//! Static SVG charts: scatter and line series with optional error bands,
//! a color scale and an identity diagonal.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 110.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
// viridis anchors
const RAMP: [(f64, f64, f64); 5] =
    [(68.0, 1.0, 84.0), (59.0, 82.0, 139.0), (33.0, 145.0, 140.0), (94.0, 201.0, 98.0), (253.0, 231.0, 37.0)];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    Scatter,
    Line,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Series {
    pub label: String,
    pub style: Style,
    pub points: Vec<(f64, f64)>,
    /// Per-point color value mapped onto the ramp.
    pub color_values: Option<Vec<f64>>,
    /// Per-point half-width of a shaded band (line series).
    pub band: Option<Vec<f64>>,
}

impl Series {
    pub fn new(label: &str, style: Style, points: Vec<(f64, f64)>) -> Self {
        Self { label: label.to_string(), style, points, color_values: None, band: None }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Chart {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub color_label: Option<String>,
    pub diagonal: bool,
    pub series: Vec<Series>,
}

fn ramp(t: f64) -> String {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let s = t * (RAMP.len() - 1) as f64;
    let i = (s.floor() as usize).min(RAMP.len() - 2);
    let f = s - i as f64;
    let (a, b) = (RAMP[i], RAMP[i + 1]);
    let mix = |x: f64, y: f64| (x + (y - x) * f).round() as u8;
    format!("#{:02x}{:02x}{:02x}", mix(a.0, b.0), mix(a.1, b.1), mix(a.2, b.2))
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn extent(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), v| (l.min(v), h.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 {
        let pad = if lo.abs() > 0.0 { 0.05 * lo.abs() } else { 0.5 };
        return (lo - pad, hi + pad);
    }
    let pad = 0.04 * (hi - lo);
    (lo - pad, hi + pad)
}

/// About five round tick positions covering `[lo, hi]`.
pub fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(if t.abs() < 1e-12 * step { 0.0 } else { t });
        t += step;
    }
    out
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" { "0".into() } else { s.to_string() }
}

pub fn render(chart: &Chart) -> String {
    let xs = chart.series.iter().flat_map(|s| s.points.iter().map(|p| p.0));
    let ys = chart.series.iter().flat_map(|s| {
        s.points.iter().enumerate().flat_map(move |(i, p)| {
            let b = s.band.as_ref().map_or(0.0, |b| b[i]);
            [p.1 - b, p.1 + b]
        })
    });
    let (mut x0, mut x1) = extent(xs);
    let (mut y0, mut y1) = extent(ys);
    if chart.diagonal {
        let (lo, hi) = (x0.min(y0), x1.max(y1));
        (x0, x1, y0, y1) = (lo, hi, lo, hi);
    }
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - (y - y0) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(&chart.title));
    let _ = writeln!(svg, r##"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>"##);
    for t in ticks(x0, x1) {
        let x = sx(t);
        let _ = writeln!(svg, r##"<line x1="{x:.2}" y1="{}" x2="{x:.2}" y2="{}" stroke="#333"/>"##, TOP + ph, TOP + ph + 5.0);
        let _ = writeln!(svg, r#"<text x="{x:.2}" y="{}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, tick_label(t));
    }
    for t in ticks(y0, y1) {
        let y = sy(t);
        let _ = writeln!(svg, r##"<line x1="{}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="#333"/>"##, LEFT - 5.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + 4.0, tick_label(t));
    }
    let _ = writeln!(svg, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 15.0, escape(&chart.x_label));
    let _ = writeln!(
        svg,
        r#"<text x="20" y="{0}" text-anchor="middle" transform="rotate(-90 20 {0})">{1}</text>"#,
        TOP + ph / 2.0,
        escape(&chart.y_label)
    );
    if chart.diagonal {
        let _ = writeln!(
            svg,
            r##"<line x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="#888" stroke-dasharray="4 3"/>"##,
            sx(x0),
            sy(x0),
            sx(x1),
            sy(x1)
        );
    }

    let mut color_range = None;
    for (k, s) in chart.series.iter().enumerate() {
        let base = PALETTE[k % PALETTE.len()];
        if let Some(band) = &s.band {
            let upper = s.points.iter().zip(band).map(|(p, b)| format!("{:.2},{:.2}", sx(p.0), sy(p.1 + b)));
            let lower = s.points.iter().zip(band).rev().map(|(p, b)| format!("{:.2},{:.2}", sx(p.0), sy(p.1 - b)));
            let pts: Vec<String> = upper.chain(lower).collect();
            let _ = writeln!(svg, r#"<polygon points="{}" fill="{base}" fill-opacity="0.2" stroke="none"/>"#, pts.join(" "));
        }
        match s.style {
            Style::Line => {
                let pts: Vec<String> = s.points.iter().map(|p| format!("{:.2},{:.2}", sx(p.0), sy(p.1))).collect();
                let _ = writeln!(svg, r#"<polyline points="{}" fill="none" stroke="{base}" stroke-width="1.5"/>"#, pts.join(" "));
            }
            Style::Scatter => {
                let colors = s.color_values.as_ref().map(|c| {
                    let (lo, hi) = extent(c.iter().copied());
                    color_range = Some((lo, hi));
                    c.iter().map(|v| ramp((v - lo) / (hi - lo))).collect::<Vec<_>>()
                });
                for (i, p) in s.points.iter().enumerate() {
                    let fill = colors.as_ref().map_or(base, |c| c[i].as_str());
                    let _ = writeln!(svg, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5" fill="{fill}" fill-opacity="0.8"/>"#, sx(p.0), sy(p.1));
                }
            }
        }
        let ly = TOP + 14.0 + 16.0 * k as f64;
        let _ = writeln!(svg, r#"<rect x="{}" y="{}" width="10" height="10" fill="{base}"/>"#, LEFT + 10.0, ly - 9.0);
        let _ = writeln!(svg, r#"<text x="{}" y="{ly}">{}</text>"#, LEFT + 26.0, escape(&s.label));
    }
    if let (Some((lo, hi)), Some(label)) = (color_range, &chart.color_label) {
        let x = WIDTH - RIGHT + 20.0;
        let steps = 50;
        for i in 0..steps {
            let t = i as f64 / (steps - 1) as f64;
            let y = TOP + ph - (i + 1) as f64 * ph / steps as f64;
            let _ = writeln!(svg, r#"<rect x="{x}" y="{y:.2}" width="14" height="{:.2}" fill="{}"/>"#, ph / steps as f64 + 0.5, ramp(t));
        }
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, x + 18.0, TOP + ph, tick_label(lo));
        let _ = writeln!(svg, r#"<text x="{}" y="{}">{}</text>"#, x + 18.0, TOP + 10.0, tick_label(hi));
        let _ = writeln!(
            svg,
            r#"<text x="{0}" y="{1}" text-anchor="middle" transform="rotate(90 {0} {1})">{2}</text>"#,
            x + 60.0,
            TOP + ph / 2.0,
            escape(label)
        );
    }
    svg.push_str("</svg>\n");
    svg
}
