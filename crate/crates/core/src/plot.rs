//! Deterministic SVG scatter plots of one report metric against another.
//!
//! Labels follow `<meta>:<debias>:<stage>`. Marker shape encodes the
//! meta-embedding method, fill colour the debiaser, and fill opacity the
//! stage. Every marker carries its data and pixel coordinates as `data-*`
//! attributes so the geometry can be checked without rasterising.

use std::fmt::Write;

use crate::error::{Error, Result};
use crate::pipeline::EvalReport;

pub const WIDTH: f64 = 720.0;
pub const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const MARKER: f64 = 6.0;

/// Metrics where a lower score means less bias.
const LOWER_IS_BETTER: &[&str] = &["weat", "wat", "sembias"];

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub label: String,
    pub x: f64,
    pub y: f64,
}

/// `(min, max)` of `values` widened by 5% of the range on each side. A zero
/// range is widened by 5% of the magnitude (or of 1 at zero).
pub fn padded_limits(values: &[f64]) -> (f64, f64) {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { lo.abs().max(1.0) };
    (lo - 0.05 * span, hi + 0.05 * span)
}

/// Labels present in both reports with the requested metrics, in `x` order.
pub fn shared_points(x: &EvalReport, x_metric: &str, y: &EvalReport, y_metric: &str) -> Vec<Point> {
    x.labels()
        .into_iter()
        .filter_map(|label| {
            Some(Point {
                label: label.to_string(),
                x: x.score(label, x_metric)?,
                y: y.score(label, y_metric)?,
            })
        })
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

fn parts(label: &str) -> (&str, &str, &str) {
    let mut it = label.splitn(3, ':');
    (
        it.next().unwrap_or(""),
        it.next().unwrap_or(""),
        it.next().unwrap_or(""),
    )
}

fn fill(debias: &str) -> &'static str {
    match debias {
        "none" => "#7f7f7f",
        "hard" => "#1f77b4",
        "inlp" => "#ff7f0e",
        "dict" => "#2ca02c",
        d if d.contains('+') => "#9467bd",
        _ => "#8c564b",
    }
}

fn opacity(stage: &str) -> &'static str {
    match stage {
        "pre" => "0.85",
        "post" => "0.6",
        "both" => "0.35",
        _ => "1",
    }
}

fn polygon(cx: f64, cy: f64, r: f64, sides: usize, rotation: f64, inner: Option<f64>) -> String {
    let n = if inner.is_some() { sides * 2 } else { sides };
    (0..n)
        .map(|i| {
            let radius = match inner {
                Some(f) if i % 2 == 1 => r * f,
                _ => r,
            };
            let angle = rotation + std::f64::consts::TAU * i as f64 / n as f64;
            format!("{:.3},{:.3}", cx + radius * angle.sin(), cy - radius * angle.cos())
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// SVG element drawing the marker for `meta` at `(cx, cy)`.
fn shape(meta: &str, cx: f64, cy: f64, style: &str) -> String {
    let r = MARKER;
    match meta {
        "avg" => format!(r#"<circle cx="{cx:.3}" cy="{cy:.3}" r="{r}" {style}/>"#),
        "conc" => format!(
            r#"<rect x="{:.3}" y="{:.3}" width="{:.3}" height="{:.3}" {style}/>"#,
            cx - r,
            cy - r,
            2.0 * r,
            2.0 * r
        ),
        "lle" => format!(
            r#"<polygon points="{}" {style}/>"#,
            polygon(cx, cy, r * 1.2, 3, 0.0, None)
        ),
        "gle" => format!(
            r#"<polygon points="{}" {style}/>"#,
            polygon(cx, cy, r * 1.1, 5, 0.0, None)
        ),
        "aeme" => format!(
            r#"<polygon points="{}" {style}/>"#,
            polygon(cx, cy, r * 1.2, 4, 0.0, None)
        ),
        "source" => format!(
            r#"<polygon points="{}" {style}/>"#,
            polygon(cx, cy, r * 1.3, 5, 0.0, Some(0.45))
        ),
        _ => format!(
            r#"<polygon points="{}" {style}/>"#,
            polygon(cx, cy, r, 4, std::f64::consts::FRAC_PI_4, Some(0.3))
        ),
    }
}

/// Renders the scatter plot of `x_metric` (from `x`) against `y_metric`
/// (from `y`).
pub fn scatter_svg(x: &EvalReport, x_metric: &str, y: &EvalReport, y_metric: &str) -> Result<String> {
    let points = shared_points(x, x_metric, y, y_metric);
    if points.is_empty() {
        return Err(Error::EmptyPlot);
    }
    let xs: Vec<f64> = points.iter().map(|p| p.x).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.y).collect();
    let (x0, x1) = padded_limits(&xs);
    let (y0, y1) = padded_limits(&ys);
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let px = |v: f64| LEFT + (v - x0) / (x1 - x0) * pw;
    let py = |v: f64| TOP + ph - (v - y0) / (y1 - y0) * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<g id="plot-area" data-left="{LEFT}" data-top="{TOP}" data-width="{pw}" data-height="{ph}" data-x-min="{x0}" data-x-max="{x1}" data-y-min="{y0}" data-y-max="{y1}">"#
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=4 {
        let t = i as f64 / 4.0;
        let (vx, vy) = (x0 + t * (x1 - x0), y0 + t * (y1 - y0));
        let (tx, ty) = (px(vx), py(vy));
        let _ = writeln!(
            svg,
            r#"<line x1="{tx:.3}" y1="{:.3}" x2="{tx:.3}" y2="{:.3}" stroke="black"/><text x="{tx:.3}" y="{:.3}" font-size="11" text-anchor="middle">{vx:.3}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0
        );
        let _ = writeln!(
            svg,
            r#"<line x1="{:.3}" y1="{ty:.3}" x2="{LEFT}" y2="{ty:.3}" stroke="black"/><text x="{:.3}" y="{:.3}" font-size="11" text-anchor="end">{vy:.3}</text>"#,
            LEFT - 5.0,
            LEFT - 8.0,
            ty + 4.0
        );
    }
    for p in &points {
        let (meta, debias, stage) = parts(&p.label);
        let (cx, cy) = (px(p.x), py(p.y));
        let style = format!(
            r#"fill="{}" fill-opacity="{}" stroke="black" stroke-width="1""#,
            fill(debias),
            opacity(stage)
        );
        let _ = writeln!(
            svg,
            r#"<g class="marker" data-label="{}" data-x="{}" data-y="{}" data-cx="{cx:.3}" data-cy="{cy:.3}">{}</g>"#,
            escape(&p.label),
            p.x,
            p.y,
            shape(meta, cx, cy, &style)
        );
    }
    let _ = writeln!(svg, "</g>");

    let note = |m: &str| {
        if LOWER_IS_BETTER.contains(&m) {
            " (lower is better)"
        } else {
            " (higher is better)"
        }
    };
    let _ = writeln!(
        svg,
        r#"<text id="x-label" x="{:.3}" y="{:.3}" font-size="13" text-anchor="middle">{}{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0,
        escape(x_metric),
        note(x_metric)
    );
    let _ = writeln!(
        svg,
        r#"<text id="y-label" x="15" y="{:.3}" font-size="13" text-anchor="middle" transform="rotate(-90 15 {:.3})">{}{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_metric),
        note(y_metric)
    );

    let _ = writeln!(svg, r#"<g id="legend">"#);
    for (i, p) in points.iter().enumerate() {
        let (meta, debias, stage) = parts(&p.label);
        let (lx, ly) = (WIDTH - RIGHT + 20.0, TOP + 10.0 + 18.0 * i as f64);
        let style = format!(
            r#"fill="{}" fill-opacity="{}" stroke="black""#,
            fill(debias),
            opacity(stage)
        );
        let _ = writeln!(
            svg,
            r#"{}<text x="{:.3}" y="{:.3}" font-size="11">{}</text>"#,
            shape(meta, lx, ly, &style),
            lx + 12.0,
            ly + 4.0,
            escape(&p.label)
        );
    }
    let _ = writeln!(svg, "</g>");
    svg.push_str("</svg>\n");
    Ok(svg)
}
