//! Dependency-free SVG 1.1 emitters.
//!
//! Output is a pure function of the input: coordinates are printed with two
//! decimals and elements are emitted in a fixed order, so identical inputs
//! give byte-identical documents.

use std::fmt::Write as _;

use crate::binning::{assign_bin, BinSpec, ReliabilityPoint};
use crate::error::{Error, Result};
use crate::metrics::{curve_minimum, CurvePoint, Dataset};

const WIDTH: f64 = 520.0;
const HEIGHT: f64 = 480.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 30.0;
const MARGIN_TOP: f64 = 40.0;
const MARGIN_BOTTOM: f64 = 60.0;

/// Marker radius used by the reliability diagram, in pixels.
pub const MARKER_RADIUS: f64 = 5.0;

/// Maps data coordinates onto the plot area. `y` grows upwards in data
/// space and downwards in pixel space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PlotFrame {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl PlotFrame {
    pub const UNIT: PlotFrame = PlotFrame {
        x_min: 0.0,
        x_max: 1.0,
        y_min: 0.0,
        y_max: 1.0,
    };

    fn plot_width() -> f64 {
        WIDTH - MARGIN_LEFT - MARGIN_RIGHT
    }

    fn plot_height() -> f64 {
        HEIGHT - MARGIN_TOP - MARGIN_BOTTOM
    }

    pub fn to_px(&self, x: f64, y: f64) -> (f64, f64) {
        let fx = (x - self.x_min) / (self.x_max - self.x_min);
        let fy = (y - self.y_min) / (self.y_max - self.y_min);
        (
            MARGIN_LEFT + fx * Self::plot_width(),
            MARGIN_TOP + (1.0 - fy) * Self::plot_height(),
        )
    }

    pub fn from_px(&self, px: f64, py: f64) -> (f64, f64) {
        let fx = (px - MARGIN_LEFT) / Self::plot_width();
        let fy = 1.0 - (py - MARGIN_TOP) / Self::plot_height();
        (
            self.x_min + fx * (self.x_max - self.x_min),
            self.y_min + fy * (self.y_max - self.y_min),
        )
    }
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Doc {
    out: String,
}

impl Doc {
    fn new(title: &str) -> Self {
        let mut out = String::new();
        writeln!(out, r#"<?xml version="1.0" encoding="UTF-8"?>"#).unwrap();
        writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
        )
        .unwrap();
        writeln!(
            out,
            r#"<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#
        )
        .unwrap();
        if !title.is_empty() {
            writeln!(
                out,
                r#"<text class="title" x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
                WIDTH / 2.0,
                escape(title)
            )
            .unwrap();
        }
        Self { out }
    }

    fn line(&mut self, class: &str, a: (f64, f64), b: (f64, f64), style: &str) {
        writeln!(
            self.out,
            r#"<line class="{class}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" {style}/>"#,
            a.0, a.1, b.0, b.1
        )
        .unwrap();
    }

    fn text(&mut self, class: &str, at: (f64, f64), anchor: &str, body: &str) {
        writeln!(
            self.out,
            r#"<text class="{class}" x="{:.2}" y="{:.2}" text-anchor="{anchor}">{}</text>"#,
            at.0,
            at.1,
            escape(body)
        )
        .unwrap();
    }

    fn axes(
        &mut self,
        frame: &PlotFrame,
        x_label: &str,
        y_label: &str,
        x_ticks: &[f64],
        y_ticks: &[f64],
    ) {
        let axis = r#"stroke="black" stroke-width="1""#;
        let origin = frame.to_px(frame.x_min, frame.y_min);
        self.line("axis", origin, frame.to_px(frame.x_max, frame.y_min), axis);
        self.line("axis", origin, frame.to_px(frame.x_min, frame.y_max), axis);
        for &t in x_ticks {
            let (px, py) = frame.to_px(t, frame.y_min);
            self.line("tick", (px, py), (px, py + 5.0), axis);
            self.text("tick-label", (px, py + 18.0), "middle", &tick_text(t));
        }
        for &t in y_ticks {
            let (px, py) = frame.to_px(frame.x_min, t);
            self.line("tick", (px - 5.0, py), (px, py), axis);
            self.text("tick-label", (px - 8.0, py + 4.0), "end", &tick_text(t));
        }
        let bottom = frame.to_px((frame.x_min + frame.x_max) / 2.0, frame.y_min);
        self.text("axis-label", (bottom.0, bottom.1 + 40.0), "middle", x_label);
        let left = frame.to_px(frame.x_min, (frame.y_min + frame.y_max) / 2.0);
        writeln!(
            self.out,
            r#"<text class="axis-label" x="{:.2}" y="{:.2}" text-anchor="middle" transform="rotate(-90 {:.2} {:.2})">{}</text>"#,
            left.0 - 50.0,
            left.1,
            left.0 - 50.0,
            left.1,
            escape(y_label)
        )
        .unwrap();
    }

    fn finish(mut self) -> String {
        self.out.push_str("</svg>\n");
        self.out
    }
}

fn tick_text(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0');
    let s = s.strip_suffix('.').unwrap_or(s);
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn unit_ticks() -> Vec<f64> {
    (0..=5).map(|i| i as f64 / 5.0).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityOptions {
    pub title: String,
    pub bin_labels: bool,
}

impl Default for ReliabilityOptions {
    fn default() -> Self {
        Self {
            title: "Reliability diagram".into(),
            bin_labels: true,
        }
    }
}

/// Pixel centres of the reliability markers, in input order.
pub fn marker_positions(points: &[ReliabilityPoint]) -> Vec<(f64, f64)> {
    points
        .iter()
        .map(|p| PlotFrame::UNIT.to_px(p.conf, p.frac_pos))
        .collect()
}

/// Fraction of positives against mean confidence, with the identity line.
/// Markers above the line are under-confident bins, below over-confident.
pub fn render_reliability_svg(points: &[ReliabilityPoint], options: &ReliabilityOptions) -> String {
    let frame = PlotFrame::UNIT;
    let mut doc = Doc::new(&options.title);
    doc.axes(
        &frame,
        "Mean predicted probability",
        "Fraction of positives",
        &unit_ticks(),
        &unit_ticks(),
    );
    doc.line(
        "diagonal",
        frame.to_px(0.0, 0.0),
        frame.to_px(1.0, 1.0),
        r#"stroke="gray" stroke-dasharray="6,4" stroke-width="1""#,
    );
    for (p, (cx, cy)) in points.iter().zip(marker_positions(points)) {
        writeln!(
            doc.out,
            r#"<circle class="bin-marker" data-bin="{}" data-count="{}" cx="{cx:.2}" cy="{cy:.2}" r="{MARKER_RADIUS}" fill="steelblue" stroke="navy"/>"#,
            p.bin + 1,
            p.count
        )
        .unwrap();
        if options.bin_labels {
            doc.text(
                "bin-label",
                (cx + 7.0, cy - 7.0),
                "start",
                &(p.bin + 1).to_string(),
            );
        }
    }
    doc.finish()
}

/// Counts of probabilities per equal-width bin.
pub fn histogram_counts(data: &Dataset, bins: usize) -> Result<Vec<usize>> {
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let spec = BinSpec::new(bins)?;
    let mut counts = vec![0usize; bins];
    for r in data {
        counts[assign_bin(r.prob(), spec)?] += 1;
    }
    Ok(counts)
}

/// Bar chart of estimated-probability counts per bin.
pub fn render_histogram_svg(data: &Dataset, bins: usize, title: &str) -> Result<String> {
    let counts = histogram_counts(data, bins)?;
    let max = *counts.iter().max().expect("bins >= 1") as f64;
    let frame = PlotFrame {
        y_max: max,
        ..PlotFrame::UNIT
    };
    let mut doc = Doc::new(title);
    let y_ticks: Vec<f64> = (0..=4).map(|i| (max * i as f64 / 4.0).round()).collect();
    doc.axes(
        &frame,
        "Predicted probability",
        "Count",
        &unit_ticks(),
        &y_ticks,
    );
    let width = 1.0 / bins as f64;
    for (m, &c) in counts.iter().enumerate() {
        let (x0, y0) = frame.to_px(m as f64 * width, c as f64);
        let (x1, y1) = frame.to_px((m + 1) as f64 * width, 0.0);
        writeln!(
            doc.out,
            r#"<rect class="bar" data-bin="{}" data-count="{c}" x="{x0:.2}" y="{y0:.2}" width="{:.2}" height="{:.2}" fill="steelblue" stroke="white"/>"#,
            m + 1,
            x1 - x0,
            y1 - y0
        )
        .unwrap();
    }
    Ok(doc.finish())
}

/// Per-sample ECD against probability for both labels, with the zero line
/// and the minimum annotated.
pub fn render_ecd_curve_svg(curve: &[CurvePoint]) -> Result<String> {
    let (min_p, min_label, min_score) = curve_minimum(curve).ok_or(Error::EmptyDataset)?;
    let max_score = curve
        .iter()
        .flat_map(|c| [c.score_label0, c.score_label1])
        .fold(f64::NEG_INFINITY, f64::max);
    let y_max = max_score.max(0.0).ceil().max(1.0);
    let y_min = -1.0;
    let frame = PlotFrame {
        y_min,
        y_max,
        ..PlotFrame::UNIT
    };
    let mut doc = Doc::new("ECD score per prediction");
    let step = (y_max / 5.0).ceil().max(1.0);
    let y_ticks: Vec<f64> = std::iter::successors(Some(y_min), |t| Some(t + step))
        .take_while(|t| *t <= y_max + 1e-9)
        .collect();
    doc.axes(
        &frame,
        "Predicted probability of class 1",
        "ECD",
        &unit_ticks(),
        &y_ticks,
    );
    doc.line(
        "zero-line",
        frame.to_px(0.0, 0.0),
        frame.to_px(1.0, 0.0),
        r#"stroke="gray" stroke-width="1""#,
    );
    for (label, colour) in [(0u8, "darkorange"), (1u8, "steelblue")] {
        let mut pts = String::new();
        for c in curve {
            let score = if label == 0 {
                c.score_label0
            } else {
                c.score_label1
            };
            let (x, y) = frame.to_px(c.prob, score);
            write!(pts, "{x:.2},{y:.2} ").unwrap();
        }
        writeln!(
            doc.out,
            r#"<polyline class="curve" data-label="{label}" fill="none" stroke="{colour}" stroke-width="1.5" points="{}"/>"#,
            pts.trim_end()
        )
        .unwrap();
    }
    let legend = frame.to_px(0.62, y_max);
    doc.text(
        "legend",
        (legend.0, legend.1 + 16.0),
        "start",
        "true label 0",
    );
    doc.text(
        "legend",
        (legend.0, legend.1 + 32.0),
        "start",
        "true label 1",
    );
    let (mx, my) = frame.to_px(min_p, min_score);
    writeln!(
        doc.out,
        r#"<circle class="minimum" cx="{mx:.2}" cy="{my:.2}" r="3" fill="crimson"/>"#
    )
    .unwrap();
    doc.text(
        "minimum-annotation",
        (mx, my + 18.0),
        "middle",
        &format!("min {min_score:.4} at p = {min_p:.4} (label {min_label})"),
    );
    Ok(doc.finish())
}
