//! Standalone SVG scatter plots and box plots.

use std::fmt::Write as _;

use crate::stats::Summary;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;

pub const PALETTE: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"];

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Linear map from data range to pixel range.
#[derive(Debug, Clone, Copy)]
struct Axis {
    lo: f64,
    hi: f64,
    px_lo: f64,
    px_hi: f64,
}

impl Axis {
    fn new(lo: f64, hi: f64, px_lo: f64, px_hi: f64) -> Self {
        let (lo, hi) = if lo == hi { (lo - 0.5, hi + 0.5) } else { (lo, hi) };
        let pad = (hi - lo) * 0.05;
        Axis {
            lo: lo - pad,
            hi: hi + pad,
            px_lo,
            px_hi,
        }
    }

    fn map(&self, v: f64) -> f64 {
        self.px_lo + (v - self.lo) / (self.hi - self.lo) * (self.px_hi - self.px_lo)
    }

    /// About five round tick values inside the range.
    fn ticks(&self) -> Vec<f64> {
        let span = self.hi - self.lo;
        let raw = span / 5.0;
        let mag = 10f64.powf(raw.log10().floor());
        let step = [1.0, 2.0, 5.0, 10.0]
            .iter()
            .map(|m| m * mag)
            .find(|s| span / s <= 6.0)
            .unwrap_or(10.0 * mag);
        let mut t = (self.lo / step).ceil() * step;
        let mut out = Vec::new();
        while t <= self.hi + 1e-12 * span {
            out.push(if t.abs() < 1e-12 * span { 0.0 } else { t });
            t += step;
        }
        out
    }
}

fn header(s: &mut String, title: &str) {
    let _ = writeln!(
        s,
        r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">
<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );
}

fn frame(s: &mut String, x: Option<&Axis>, y: &Axis, x_label: &str, y_label: &str) {
    let (x0, x1, y0, y1) = (LEFT, WIDTH - RIGHT, HEIGHT - BOTTOM, TOP);
    let _ = writeln!(
        s,
        r##"<rect x="{x0}" y="{y1}" width="{:.1}" height="{:.1}" fill="none" stroke="#333"/>"##,
        x1 - x0,
        y0 - y1
    );
    for t in y.ticks() {
        let py = y.map(t);
        let _ = writeln!(
            s,
            r##"<line x1="{x0}" y1="{py:.2}" x2="{x1}" y2="{py:.2}" stroke="#ddd"/><text x="{:.1}" y="{:.2}" text-anchor="end">{}</text>"##,
            x0 - 6.0,
            py + 4.0,
            tick_label(t)
        );
    }
    if let Some(x) = x {
        for t in x.ticks() {
            let px = x.map(t);
            let _ = writeln!(
                s,
                r##"<line x1="{px:.2}" y1="{y0}" x2="{px:.2}" y2="{:.1}" stroke="#333"/><text x="{px:.2}" y="{:.1}" text-anchor="middle">{}</text>"##,
                y0 + 5.0,
                y0 + 18.0,
                tick_label(t)
            );
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        (x0 + x1) / 2.0,
        HEIGHT - 15.0,
        escape(x_label)
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{:.1}" text-anchor="middle" transform="rotate(-90 18 {:.1})">{}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0,
        escape(y_label)
    );
}

fn tick_label(v: f64) -> String {
    let s = format!("{v:.4}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".into()
    } else {
        s.into()
    }
}

fn legend(s: &mut String, labels: &[(&str, &str)]) {
    for (k, (label, color)) in labels.iter().enumerate() {
        let y = TOP + 14.0 + 18.0 * k as f64;
        let x = WIDTH - RIGHT - 150.0;
        let _ = writeln!(
            s,
            r#"<g class="legend"><circle cx="{:.1}" cy="{y:.1}" r="5" fill="{color}"/><text x="{:.1}" y="{:.1}">{}</text></g>"#,
            x,
            x + 10.0,
            y + 4.0,
            escape(label)
        );
    }
}

/// A named, colored set of points.
#[derive(Debug, Clone)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

/// Scatter plot, one color per series, with a legend.
pub fn scatter(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let all = series.iter().flat_map(|s| s.points.iter());
    let (mut xl, mut xh, mut yl, mut yh) = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in all {
        xl = xl.min(x);
        xh = xh.max(x);
        yl = yl.min(y);
        yh = yh.max(y);
    }
    if !xl.is_finite() {
        (xl, xh, yl, yh) = (0.0, 1.0, 0.0, 1.0);
    }
    let xa = Axis::new(xl, xh, LEFT, WIDTH - RIGHT);
    let ya = Axis::new(yl, yh, HEIGHT - BOTTOM, TOP);
    let mut s = String::new();
    header(&mut s, title);
    frame(&mut s, Some(&xa), &ya, x_label, y_label);
    for (k, ser) in series.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let _ = writeln!(s, r#"<g class="series" fill="{color}" fill-opacity="0.7">"#);
        for &(x, y) in &ser.points {
            let _ = writeln!(s, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5"/>"#, xa.map(x), ya.map(y));
        }
        s.push_str("</g>\n");
    }
    let labels: Vec<(&str, &str)> = series
        .iter()
        .enumerate()
        .map(|(k, ser)| (ser.label.as_str(), PALETTE[k % PALETTE.len()]))
        .collect();
    legend(&mut s, &labels);
    s.push_str("</svg>\n");
    s
}

/// Box plot per group; whiskers reach the minimum and maximum so every point
/// lies inside them. Groups with no values are skipped.
pub fn boxplot(title: &str, y_label: &str, groups: &[(String, Vec<f64>)]) -> String {
    let summaries: Vec<(&str, Summary)> = groups
        .iter()
        .filter_map(|(l, v)| Summary::of(v).map(|s| (l.as_str(), s)))
        .collect();
    let yl = summaries.iter().map(|(_, s)| s.min).fold(f64::INFINITY, f64::min);
    let yh = summaries.iter().map(|(_, s)| s.max).fold(f64::NEG_INFINITY, f64::max);
    let ya = if yl.is_finite() {
        Axis::new(yl, yh, HEIGHT - BOTTOM, TOP)
    } else {
        Axis::new(0.0, 1.0, HEIGHT - BOTTOM, TOP)
    };
    let mut s = String::new();
    header(&mut s, title);
    frame(&mut s, None, &ya, "", y_label);
    let slot = (WIDTH - LEFT - RIGHT) / summaries.len().max(1) as f64;
    for (k, (label, st)) in summaries.iter().enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let cx = LEFT + slot * (k as f64 + 0.5);
        let half = (slot * 0.25).min(50.0);
        let (pmin, pq1, pmed, pq3, pmax) = (ya.map(st.min), ya.map(st.q1), ya.map(st.median), ya.map(st.q3), ya.map(st.max));
        let _ = writeln!(
            s,
            r##"<g class="box"><line x1="{cx:.2}" y1="{pmax:.2}" x2="{cx:.2}" y2="{pq3:.2}" stroke="#333"/><line x1="{cx:.2}" y1="{pq1:.2}" x2="{cx:.2}" y2="{pmin:.2}" stroke="#333"/><line x1="{:.2}" y1="{pmax:.2}" x2="{:.2}" y2="{pmax:.2}" stroke="#333"/><line x1="{:.2}" y1="{pmin:.2}" x2="{:.2}" y2="{pmin:.2}" stroke="#333"/><rect x="{:.2}" y="{pq3:.2}" width="{:.2}" height="{:.2}" fill="{color}" fill-opacity="0.5" stroke="#333"/><line x1="{:.2}" y1="{pmed:.2}" x2="{:.2}" y2="{pmed:.2}" stroke="#000" stroke-width="2"/><text x="{cx:.2}" y="{:.1}" text-anchor="middle">{} (n={})</text></g>"##,
            cx - half / 2.0,
            cx + half / 2.0,
            cx - half / 2.0,
            cx + half / 2.0,
            cx - half,
            2.0 * half,
            (pq1 - pq3).max(0.0),
            cx - half,
            cx + half,
            HEIGHT - BOTTOM + 18.0,
            escape(label),
            st.count
        );
    }
    s.push_str("</svg>\n");
    s
}
