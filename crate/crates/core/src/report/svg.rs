//! Minimal SVG line/scatter plotter with linear or log axes.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const LEFT: f64 = 80.0;
const RIGHT: f64 = 20.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub label: String,
    pub log: bool,
}

impl Axis {
    pub fn linear(label: &str) -> Self {
        Axis { label: label.into(), log: false }
    }

    pub fn log(label: &str) -> Self {
        Axis { label: label.into(), log: true }
    }

    fn map(&self, v: f64) -> f64 {
        if self.log {
            v.log10()
        } else {
            v
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mark {
    Line,
    Dots,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
    pub mark: Mark,
    /// Palette index.
    pub color: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Plot {
    pub title: String,
    pub x: Axis,
    pub y: Axis,
    pub series: Vec<Series>,
    /// Horizontal reference lines `(y, label)`.
    pub hlines: Vec<(f64, String)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

/// Tick positions (in mapped units) for `[lo, hi]`.
fn ticks(lo: f64, hi: f64, log: bool) -> Vec<f64> {
    if log {
        if hi - lo < 2.0 {
            // 1-2-5 ticks when less than two decades are visible
            let (a, b) = (lo.floor() as i32, hi.ceil() as i32);
            return (a..=b)
                .flat_map(|d| [1.0, 2.0, 5.0].map(|m| (m * 10f64.powi(d)).log10()))
                .filter(|t| (lo..=hi).contains(t))
                .collect();
        }
        let (a, b) = (lo.ceil() as i32, hi.floor() as i32);
        let step = ((b - a) / 6 + 1).max(1);
        return (a..=b).step_by(step as usize).map(f64::from).collect();
    }
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn tick_label(v: f64, log: bool) -> String {
    if log {
        let x = 10f64.powf(v);
        if (1e-3..1e4).contains(&x) {
            format!("{}", (x * 1e3).round() / 1e3)
        } else {
            format!("1e{}", v.round() as i32)
        }
    } else if v.abs() < 1e-12 {
        "0".into()
    } else {
        format!("{}", (v * 1e6).round() / 1e6)
    }
}

impl Plot {
    pub fn new(title: &str, x: Axis, y: Axis) -> Self {
        Plot { title: title.into(), x, y, series: Vec::new(), hlines: Vec::new() }
    }

    pub fn curve(&mut self, label: &str, points: Vec<(f64, f64)>, color: usize) {
        self.series.push(Series { label: label.into(), points, mark: Mark::Line, color });
    }

    pub fn dots(&mut self, label: &str, points: Vec<(f64, f64)>, color: usize) {
        self.series.push(Series { label: label.into(), points, mark: Mark::Dots, color });
    }

    fn usable(&self, p: (f64, f64)) -> bool {
        p.0.is_finite() && p.1.is_finite() && (!self.x.log || p.0 > 0.0) && (!self.y.log || p.1 > 0.0)
    }

    fn bounds(&self) -> (f64, f64, f64, f64) {
        let mut b = (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY);
        let pts = self.series.iter().flat_map(|s| s.points.iter().copied());
        let refs = self.hlines.iter().filter_map(|h| self.series.first().and_then(|s| s.points.first()).map(|p| (p.0, h.0)));
        for p in pts.chain(refs).filter(|&p| self.usable(p)) {
            let (x, y) = (self.x.map(p.0), self.y.map(p.1));
            b = (b.0.min(x), b.1.max(x), b.2.min(y), b.3.max(y));
        }
        if !b.0.is_finite() {
            return (0.0, 1.0, 0.0, 1.0);
        }
        let pad = |lo: f64, hi: f64| {
            let d = if hi > lo { 0.05 * (hi - lo) } else { 0.5 };
            (lo - d, hi + d)
        };
        let (x0, x1) = pad(b.0, b.1);
        let (y0, y1) = pad(b.2, b.3);
        (x0, x1, y0, y1)
    }

    /// The SVG document. Coordinates are printed to two decimals so output
    /// bytes depend only on the data.
    pub fn render(&self) -> String {
        let (x0, x1, y0, y1) = self.bounds();
        let pw = WIDTH - LEFT - RIGHT;
        let ph = HEIGHT - TOP - BOTTOM;
        let sx = |v: f64| LEFT + (v - x0) / (x1 - x0) * pw;
        let sy = |v: f64| TOP + (y1 - v) / (y1 - y0) * ph;
        let mut s = String::new();
        let w = &mut s;
        writeln!(w, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#).unwrap();
        writeln!(w, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#).unwrap();
        writeln!(w, r#"<text x="{:.2}" y="24" text-anchor="middle" font-size="15">{}</text>"#, WIDTH / 2.0, escape(&self.title)).unwrap();
        writeln!(w, r#"<rect class="frame" x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#).unwrap();
        for t in ticks(x0, x1, self.x.log) {
            let x = sx(t);
            writeln!(w, r#"<line class="tick" x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="black"/>"#, TOP + ph, TOP + ph + 5.0).unwrap();
            writeln!(w, r#"<text x="{x:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, TOP + ph + 18.0, tick_label(t, self.x.log)).unwrap();
        }
        for t in ticks(y0, y1, self.y.log) {
            let y = sy(t);
            writeln!(w, r#"<line class="tick" x1="{:.2}" y1="{y:.2}" x2="{LEFT}" y2="{y:.2}" stroke="black"/>"#, LEFT - 5.0).unwrap();
            writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{}</text>"#, LEFT - 8.0, y + 4.0, tick_label(t, self.y.log)).unwrap();
        }
        writeln!(w, r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#, LEFT + pw / 2.0, HEIGHT - 15.0, escape(&self.x.label)).unwrap();
        writeln!(w, r#"<text x="20" y="{:.2}" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"#, TOP + ph / 2.0, TOP + ph / 2.0, escape(&self.y.label)).unwrap();
        for (v, label) in &self.hlines {
            if !(v.is_finite() && (!self.y.log || *v > 0.0)) {
                continue;
            }
            let y = sy(self.y.map(*v));
            if y < TOP || y > TOP + ph {
                continue;
            }
            writeln!(w, r#"<line class="reference" x1="{LEFT}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="gray" stroke-dasharray="4 3"><title>{}</title></line>"#, LEFT + pw, escape(label)).unwrap();
        }
        for series in &self.series {
            let color = PALETTE[series.color % PALETTE.len()];
            let pts: Vec<(f64, f64)> = series
                .points
                .iter()
                .copied()
                .filter(|&p| self.usable(p))
                .map(|p| (sx(self.x.map(p.0)), sy(self.y.map(p.1))))
                .collect();
            match series.mark {
                Mark::Line => {
                    let coords: Vec<String> = pts.iter().map(|p| format!("{:.2},{:.2}", p.0, p.1)).collect();
                    writeln!(w, r#"<polyline class="curve" fill="none" stroke="{color}" stroke-width="1.5" points="{}"><title>{}</title></polyline>"#, coords.join(" "), escape(&series.label)).unwrap();
                }
                Mark::Dots => {
                    writeln!(w, r#"<g class="points" fill="{color}"><title>{}</title>"#, escape(&series.label)).unwrap();
                    for p in pts {
                        writeln!(w, r#"<circle cx="{:.2}" cy="{:.2}" r="2.5"/>"#, p.0, p.1).unwrap();
                    }
                    writeln!(w, "</g>").unwrap();
                }
            }
        }
        writeln!(w, "</svg>").unwrap();
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_ticks_are_round() {
        assert_eq!(ticks(0.0, 10.0, false), vec![0.0, 2.0, 4.0, 6.0, 8.0, 10.0]);
        assert_eq!(ticks(-0.31, 0.5, true).len(), 3);
        assert_eq!(tick_label(2f64.log10(), true), "2");
        assert_eq!(ticks(-1.0, 6.0, true), vec![-1.0, 1.0, 3.0, 5.0]);
    }

    #[test]
    fn render_is_deterministic_and_counts_marks() {
        let mut p = Plot::new("t <1>", Axis::log("L"), Axis::linear("E"));
        p.curve("a", vec![(1.0, 1.0), (10.0, 2.0)], 0);
        p.curve("b", vec![(1.0, 0.5), (-1.0, 2.0), (10.0, 0.7)], 1);
        p.dots("c", vec![(2.0, 1.5)], 2);
        p.hlines.push((1.2, "ref".into()));
        let a = p.render();
        assert_eq!(a, p.render());
        assert_eq!(a.matches(r#"class="curve""#).count(), 2);
        assert_eq!(a.matches("<circle").count(), 1);
        assert_eq!(a.matches(r#"class="reference""#).count(), 1);
        assert!(a.contains("t &lt;1&gt;"));
    }
}
