//! Self-contained SVG plots over the (C, N) plane.
//!
//! Cooperativity runs along the horizontal axis and resource size along the
//! vertical axis. Curves are drawn as one `<polyline>` each; Monte Carlo
//! confidence whiskers, axes and legend swatches use `<line>` so that the
//! polyline count equals the curve count.

use std::fmt::Write as _;
use std::path::Path;

use crate::cli_io::emit::{format_sig, write_text};
use crate::contours::{CurveKind, LevelCurve, SweepGrid};
use crate::error::{Error, Result};
use crate::resource_states::AllocationMode;

const WIDTH: f64 = 760.0;
const HEIGHT: f64 = 500.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 190.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

pub const EDGE_COLOR: &str = "#1f5fbf";
pub const PAULI_COLOR: &str = "#7f7f7f";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Glyph {
    Cross,
    Diamond,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotCurve {
    pub label: String,
    pub color: String,
    /// `(C, N, confidence half-width on C)`.
    pub points: Vec<(f64, f64, Option<f64>)>,
}

impl PlotCurve {
    /// Reachable points of `curve`, in order.
    pub fn from_level_curve(curve: &LevelCurve, label: impl Into<String>, color: &str) -> Self {
        PlotCurve {
            label: label.into(),
            color: color.to_string(),
            points: curve
                .points
                .iter()
                .filter_map(|p| p.c.map(|c| (c, p.n, p.c_half_width)))
                .collect(),
        }
    }

    pub fn default_color(kind: CurveKind) -> &'static str {
        match kind {
            CurveKind::Pauli => PAULI_COLOR,
            _ => EDGE_COLOR,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Marker {
    pub c: f64,
    pub n: f64,
    pub glyph: Glyph,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Heatmap {
    pub label: String,
    pub c_values: Vec<f64>,
    pub n_values: Vec<u32>,
    /// Row-major by N: `values[i_n * c_values.len() + i_c]`.
    pub values: Vec<f64>,
}

impl Heatmap {
    /// Edge-failure means of `mode` from a sweep.
    pub fn edge_failure(grid: &SweepGrid, mode: AllocationMode) -> Self {
        Self::from_grid(grid, format!("log10 edge failure ({mode})"), |cell| {
            (cell.mode == mode).then_some(cell.edge_failure.mean_failure_fraction)
        })
    }

    /// Pauli error totals from a sweep.
    pub fn pauli(grid: &SweepGrid) -> Self {
        let first = grid.grid.modes.first().copied();
        Self::from_grid(grid, "log10 Pauli error".to_string(), |cell| {
            (Some(cell.mode) == first).then_some(cell.pauli.total)
        })
    }

    fn from_grid(grid: &SweepGrid, label: String, pick: impl Fn(&crate::contours::SweepCell) -> Option<f64>) -> Self {
        let c_values = grid.grid.c_values.clone();
        let n_values = grid.grid.n_values.clone();
        let mut values = vec![f64::NAN; c_values.len() * n_values.len()];
        for cell in &grid.cells {
            if let Some(v) = pick(cell) {
                let ic = c_values.iter().position(|&c| c == cell.c);
                let in_ = n_values.iter().position(|&n| n == cell.n);
                if let (Some(ic), Some(in_)) = (ic, in_) {
                    values[in_ * c_values.len() + ic] = v;
                }
            }
        }
        Heatmap {
            label,
            c_values,
            n_values,
            values,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlotSpec {
    pub title: String,
    pub c_range: (f64, f64),
    pub n_range: (f64, f64),
    pub heatmap: Option<Heatmap>,
    pub curves: Vec<PlotCurve>,
    pub markers: Vec<Marker>,
}

impl PlotSpec {
    pub fn new(title: impl Into<String>) -> Self {
        PlotSpec {
            title: title.into(),
            c_range: (10.0, 300.0),
            n_range: (9.0, 21.0),
            heatmap: None,
            curves: Vec::new(),
            markers: Vec::new(),
        }
    }
}

struct Frame {
    c_range: (f64, f64),
    n_range: (f64, f64),
}

impl Frame {
    fn x(&self, c: f64) -> f64 {
        let (lo, hi) = self.c_range;
        LEFT + (c - lo) / (hi - lo) * (WIDTH - LEFT - RIGHT)
    }

    fn y(&self, n: f64) -> f64 {
        let (lo, hi) = self.n_range;
        HEIGHT - BOTTOM - (n - lo) / (hi - lo) * (HEIGHT - TOP - BOTTOM)
    }
}

/// Piecewise-linear approximation of the viridis colormap, `t` in [0, 1].
fn colormap(t: f64) -> String {
    const STOPS: [(f64, [u8; 3]); 5] = [
        (0.0, [68, 1, 84]),
        (0.25, [59, 82, 139]),
        (0.5, [33, 145, 140]),
        (0.75, [94, 201, 98]),
        (1.0, [253, 231, 37]),
    ];
    let t = t.clamp(0.0, 1.0);
    let k = STOPS.windows(2).position(|w| t <= w[1].0).unwrap_or(STOPS.len() - 2);
    let (t0, c0) = STOPS[k];
    let (t1, c1) = STOPS[k + 1];
    let f = (t - t0) / (t1 - t0);
    let mix = |a: u8, b: u8| (a as f64 + f * (b as f64 - a as f64)).round() as u8;
    format!(
        "#{:02x}{:02x}{:02x}",
        mix(c0[0], c1[0]),
        mix(c0[1], c1[1]),
        mix(c0[2], c1[2])
    )
}

/// Cell edges halfway between neighbouring grid values.
fn cell_bounds(values: &[f64]) -> Vec<(f64, f64)> {
    let n = values.len();
    (0..n)
        .map(|i| {
            let lo = if i > 0 {
                0.5 * (values[i - 1] + values[i])
            } else if n > 1 {
                values[0] - 0.5 * (values[1] - values[0])
            } else {
                values[0] - 0.5
            };
            let hi = if i + 1 < n {
                0.5 * (values[i] + values[i + 1])
            } else if n > 1 {
                values[n - 1] + 0.5 * (values[n - 1] - values[n - 2])
            } else {
                values[0] + 0.5
            };
            (lo, hi)
        })
        .collect()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn draw_heatmap(svg: &mut String, frame: &Frame, map: &Heatmap) {
    let logs: Vec<f64> = map.values.iter().filter(|v| **v > 0.0).map(|v| v.log10()).collect();
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = if hi > lo { hi - lo } else { 1.0 };
    let cb = cell_bounds(&map.c_values);
    let nb = cell_bounds(&map.n_values.iter().map(|&n| n as f64).collect::<Vec<_>>());
    svg.push_str("<g class=\"heatmap\" clip-path=\"url(#plot-area)\">\n");
    for (i_n, &(n0, n1)) in nb.iter().enumerate() {
        for (i_c, &(c0, c1)) in cb.iter().enumerate() {
            let v = map.values[i_n * map.c_values.len() + i_c];
            if v.is_nan() {
                continue;
            }
            let t = if v > 0.0 { (v.log10() - lo) / span } else { 0.0 };
            let (x0, x1) = (frame.x(c0), frame.x(c1));
            let (y0, y1) = (frame.y(n1), frame.y(n0));
            let _ = writeln!(
                svg,
                "<rect x=\"{:.2}\" y=\"{:.2}\" width=\"{:.2}\" height=\"{:.2}\" fill=\"{}\"><title>C={} N={} value={}</title></rect>",
                x0,
                y0,
                x1 - x0,
                y1 - y0,
                colormap(t),
                format_sig(map.c_values[i_c]),
                map.n_values[i_n],
                format_sig(v)
            );
        }
    }
    svg.push_str("</g>\n");
    if logs.is_empty() {
        return;
    }
    // Colour bar.
    let x = WIDTH - RIGHT + 20.0;
    let (top, bottom) = (TOP + 170.0, HEIGHT - BOTTOM);
    let steps = 20;
    for k in 0..steps {
        let t = k as f64 / (steps - 1) as f64;
        let h = (bottom - top) / steps as f64;
        let y = bottom - (k + 1) as f64 * h;
        let _ = writeln!(
            svg,
            "<rect x=\"{x:.2}\" y=\"{y:.2}\" width=\"14\" height=\"{:.2}\" fill=\"{}\"/>",
            h + 0.5,
            colormap(t)
        );
    }
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\">{}</text>",
        x + 18.0,
        bottom,
        format_sig(lo)
    );
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"11\">{}</text>",
        x + 18.0,
        top + 10.0,
        format_sig(hi)
    );
    let _ = writeln!(
        svg,
        "<text x=\"{x:.2}\" y=\"{:.2}\" font-size=\"11\">{}</text>",
        top - 6.0,
        escape(&map.label)
    );
}

fn draw_axes(svg: &mut String, frame: &Frame) {
    let (x0, x1) = (frame.x(frame.c_range.0), frame.x(frame.c_range.1));
    let (y0, y1) = (frame.y(frame.n_range.0), frame.y(frame.n_range.1));
    svg.push_str("<g class=\"axes\" stroke=\"#000\" stroke-width=\"1\">\n");
    let _ = writeln!(
        svg,
        "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x1:.2}\" y2=\"{y0:.2}\"/>"
    );
    let _ = writeln!(
        svg,
        "<line x1=\"{x0:.2}\" y1=\"{y0:.2}\" x2=\"{x0:.2}\" y2=\"{y1:.2}\"/>"
    );
    svg.push_str("</g>\n<g class=\"ticks\" font-size=\"11\" text-anchor=\"middle\">\n");
    let (c_lo, c_hi) = frame.c_range;
    let mut c = (c_lo / 50.0).ceil() * 50.0;
    let mut c_ticks = vec![c_lo];
    while c <= c_hi {
        if c > c_lo {
            c_ticks.push(c);
        }
        c += 50.0;
    }
    if *c_ticks.last().unwrap() < c_hi {
        c_ticks.push(c_hi);
    }
    for c in c_ticks {
        let x = frame.x(c);
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{y0:.2}\" x2=\"{x:.2}\" y2=\"{:.2}\" stroke=\"#000\"/>",
            y0 + 5.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{x:.2}\" y=\"{:.2}\">{}</text>",
            y0 + 18.0,
            format_sig(c)
        );
    }
    let (n_lo, n_hi) = frame.n_range;
    let mut n = n_lo.ceil();
    while n <= n_hi {
        let y = frame.y(n);
        let _ = writeln!(
            svg,
            "<line x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{x0:.2}\" y2=\"{y:.2}\" stroke=\"#000\"/>",
            x0 - 5.0
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\" text-anchor=\"end\">{}</text>",
            x0 - 8.0,
            y + 4.0,
            n
        );
        n += 1.0;
    }
    svg.push_str("</g>\n");
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\">cooperativity C</text>",
        0.5 * (x0 + x1),
        HEIGHT - 15.0
    );
    let _ = writeln!(
        svg,
        "<text x=\"18\" y=\"{:.2}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 18 {:.2})\">resource state size N</text>",
        0.5 * (y0 + y1),
        0.5 * (y0 + y1)
    );
}

fn draw_curve(svg: &mut String, frame: &Frame, curve: &PlotCurve) {
    let vertices: Vec<String> = curve
        .points
        .iter()
        .map(|&(c, n, _)| format!("{:.2},{:.2}", frame.x(c), frame.y(n)))
        .collect();
    let _ = writeln!(
        svg,
        "<g class=\"curve\" clip-path=\"url(#plot-area)\">\n<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"2\" points=\"{}\"/>",
        curve.color,
        vertices.join(" ")
    );
    for &(c, n, hw) in &curve.points {
        if let Some(h) = hw.filter(|h| *h > 0.0) {
            let y = frame.y(n);
            let _ = writeln!(
                svg,
                "<line class=\"whisker\" x1=\"{:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{}\" stroke-width=\"1\"/>",
                frame.x(c - h),
                frame.x(c + h),
                curve.color
            );
        }
    }
    svg.push_str("</g>\n");
}

fn draw_marker(svg: &mut String, frame: &Frame, marker: &Marker) {
    let (x, y) = (frame.x(marker.c), frame.y(marker.n));
    let r = 6.0;
    match marker.glyph {
        Glyph::Cross => {
            let _ = writeln!(
                svg,
                "<path class=\"marker cross\" d=\"M{:.2},{:.2}L{:.2},{:.2}M{:.2},{:.2}L{:.2},{:.2}\" stroke=\"#000\" stroke-width=\"2.5\"/>",
                x - r,
                y - r,
                x + r,
                y + r,
                x - r,
                y + r,
                x + r,
                y - r
            );
        }
        Glyph::Diamond => {
            let _ = writeln!(
                svg,
                "<polygon class=\"marker diamond\" points=\"{:.2},{:.2} {:.2},{:.2} {:.2},{:.2} {:.2},{:.2}\" fill=\"#000\"/>",
                x,
                y - r,
                x + r,
                y,
                x,
                y + r,
                x - r,
                y
            );
        }
    }
}

fn draw_legend(svg: &mut String, spec: &PlotSpec) {
    let x = WIDTH - RIGHT + 20.0;
    let mut y = TOP + 10.0;
    svg.push_str("<g class=\"legend\" font-size=\"11\">\n");
    for curve in &spec.curves {
        let _ = writeln!(
            svg,
            "<line x1=\"{x:.2}\" y1=\"{y:.2}\" x2=\"{:.2}\" y2=\"{y:.2}\" stroke=\"{}\" stroke-width=\"2\"/>",
            x + 20.0,
            curve.color
        );
        let _ = writeln!(
            svg,
            "<text x=\"{:.2}\" y=\"{:.2}\">{}</text>",
            x + 26.0,
            y + 4.0,
            escape(&curve.label)
        );
        y += 16.0;
    }
    for m in &spec.markers {
        let glyph = match m.glyph {
            Glyph::Cross => "x",
            Glyph::Diamond => "\u{25c6}",
        };
        let _ = writeln!(
            svg,
            "<text x=\"{x:.2}\" y=\"{:.2}\">{glyph} {}</text>",
            y + 4.0,
            escape(&m.label)
        );
        y += 16.0;
    }
    svg.push_str("</g>\n");
}

/// Render `spec` as SVG text. Fails if there is nothing to draw.
pub fn render_svg(spec: &PlotSpec) -> Result<String> {
    if spec.curves.is_empty() && spec.heatmap.is_none() {
        return Err(Error::EmptyPlot("no curves or heatmap given"));
    }
    let frame = Frame {
        c_range: spec.c_range,
        n_range: spec.n_range,
    };
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\" font-family=\"sans-serif\">"
    );
    let _ = writeln!(
        svg,
        "<defs><clipPath id=\"plot-area\"><rect x=\"{LEFT}\" y=\"{TOP}\" width=\"{}\" height=\"{}\"/></clipPath></defs>",
        WIDTH - LEFT - RIGHT,
        HEIGHT - TOP - BOTTOM
    );
    let _ = writeln!(svg, "<rect width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"#fff\"/>");
    let _ = writeln!(
        svg,
        "<text x=\"{:.2}\" y=\"24\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
        0.5 * (LEFT + WIDTH - RIGHT),
        escape(&spec.title)
    );
    if let Some(map) = &spec.heatmap {
        draw_heatmap(&mut svg, &frame, map);
    }
    draw_axes(&mut svg, &frame);
    for curve in &spec.curves {
        draw_curve(&mut svg, &frame, curve);
    }
    for m in &spec.markers {
        draw_marker(&mut svg, &frame, m);
    }
    draw_legend(&mut svg, spec);
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Render and write an SVG. Nothing is written when rendering fails.
pub fn emit_plot(spec: &PlotSpec, path: &Path) -> Result<()> {
    let svg = render_svg(spec)?;
    write_text(path, &svg)
}
