//! Minimal static SVG line plots: axes, ticks, a legend, optional log scales.

use std::fmt::Write as _;

#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub points: Vec<(f64, f64)>,
}

#[derive(Debug, Clone)]
pub struct Plot {
    pub title: String,
    pub x_label: String,
    pub y_label: String,
    pub log_x: bool,
    pub log_y: bool,
    pub series: Vec<Series>,
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];
const PANEL_W: f64 = 480.0;
const PANEL_H: f64 = 360.0;
const MARGIN: [f64; 4] = [40.0, 20.0, 50.0, 70.0]; // top, right, bottom, left

impl Plot {
    pub fn new(title: &str, x_label: &str, y_label: &str) -> Self {
        Self {
            title: title.into(),
            x_label: x_label.into(),
            y_label: y_label.into(),
            log_x: false,
            log_y: false,
            series: Vec::new(),
        }
    }

    pub fn log_x(mut self, on: bool) -> Self {
        self.log_x = on;
        self
    }

    pub fn log_y(mut self, on: bool) -> Self {
        self.log_y = on;
        self
    }

    pub fn with_series(mut self, name: &str, points: Vec<(f64, f64)>) -> Self {
        self.series.push(Series {
            name: name.into(),
            points,
        });
        self
    }

    pub fn to_svg(&self) -> String {
        render(std::slice::from_ref(self))
    }
}

/// Panels side by side in one document.
pub fn render(panels: &[Plot]) -> String {
    let width = PANEL_W * panels.len().max(1) as f64;
    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{PANEL_H}" viewBox="0 0 {width} {PANEL_H}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        s,
        r#"<rect width="{width}" height="{PANEL_H}" fill="white"/>"#
    );
    for (k, p) in panels.iter().enumerate() {
        panel(&mut s, p, k as f64 * PANEL_W);
    }
    s.push_str("</svg>\n");
    s
}

fn transform(v: f64, log: bool) -> Option<f64> {
    if log {
        (v > 0.0).then(|| v.log10())
    } else {
        v.is_finite().then_some(v)
    }
}

fn range(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo < 1e-12 * hi.abs().max(1.0) {
        let pad = 0.5 * hi.abs().max(1.0) * 0.1;
        return (lo - pad, hi + pad);
    }
    let pad = 0.05 * (hi - lo);
    (lo - pad, hi + pad)
}

fn ticks(lo: f64, hi: f64, log: bool) -> Vec<f64> {
    if log {
        let (a, b) = (lo.ceil() as i32, hi.floor() as i32);
        let mut t: Vec<f64> = (a..=b).map(f64::from).collect();
        if t.len() < 2 {
            t = vec![lo, hi];
        }
        return t;
    }
    let raw = (hi - lo) / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| *s >= raw)
        .unwrap_or(10.0 * mag);
    let first = (lo / step).ceil() as i64;
    let last = (hi / step + 1e-9).floor() as i64;
    (first..=last).map(|k| k as f64 * step).collect()
}

fn label(v: f64, log: bool) -> String {
    let x = if log { 10f64.powf(v) } else { v };
    if x == 0.0 {
        "0".into()
    } else if (1e-2..1e4).contains(&x.abs()) {
        let s = format!("{x:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{x:.0e}")
    }
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn panel(s: &mut String, p: &Plot, x0: f64) {
    let [mt, mr, mb, ml] = MARGIN;
    let (pw, ph) = (PANEL_W - ml - mr, PANEL_H - mt - mb);
    let pts: Vec<Vec<(f64, f64)>> = p
        .series
        .iter()
        .map(|se| {
            se.points
                .iter()
                .filter_map(|&(x, y)| Some((transform(x, p.log_x)?, transform(y, p.log_y)?)))
                .collect()
        })
        .collect();
    let (xl, xh) = range(pts.iter().flatten().map(|q| q.0));
    let (yl, yh) = range(pts.iter().flatten().map(|q| q.1));
    let sx = |x: f64| x0 + ml + (x - xl) / (xh - xl) * pw;
    let sy = |y: f64| mt + ph - (y - yl) / (yh - yl) * ph;

    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="13">{}</text>"#,
        x0 + ml + pw / 2.0,
        escape(&p.title)
    );
    let _ = writeln!(
        s,
        r#"<rect x="{:.1}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#,
        x0 + ml
    );
    for t in ticks(xl, xh, p.log_x) {
        let x = sx(t);
        let _ = writeln!(
            s,
            r#"<line x1="{x:.1}" y1="{:.1}" x2="{x:.1}" y2="{:.1}" stroke="black"/><text x="{x:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            mt + ph,
            mt + ph + 5.0,
            mt + ph + 18.0,
            label(t, p.log_x)
        );
    }
    for t in ticks(yl, yh, p.log_y) {
        let y = sy(t);
        let _ = writeln!(
            s,
            r#"<line x1="{:.1}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}" stroke="black"/><text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            x0 + ml - 5.0,
            x0 + ml,
            x0 + ml - 8.0,
            y + 4.0,
            label(t, p.log_y)
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        x0 + ml + pw / 2.0,
        PANEL_H - 12.0,
        escape(&p.x_label)
    );
    let (lx, ly) = (x0 + 16.0, mt + ph / 2.0);
    let _ = writeln!(
        s,
        r#"<text x="{lx:.1}" y="{ly:.1}" text-anchor="middle" transform="rotate(-90 {lx:.1} {ly:.1})">{}</text>"#,
        escape(&p.y_label)
    );
    for (k, (se, q)) in p.series.iter().zip(&pts).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        if q.len() > 1 {
            let path: Vec<String> = q
                .iter()
                .map(|&(x, y)| format!("{:.1},{:.1}", sx(x), sy(y)))
                .collect();
            let _ = writeln!(
                s,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#,
                path.join(" ")
            );
        }
        for &(x, y) in q {
            let _ = writeln!(
                s,
                r#"<circle cx="{:.1}" cy="{:.1}" r="2.5" fill="{color}"/>"#,
                sx(x),
                sy(y)
            );
        }
        let ly = mt + 14.0 + 14.0 * k as f64;
        let lx = x0 + ml + pw - 110.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{:.1}" x2="{:.1}" y2="{:.1}" stroke="{color}" stroke-width="2"/><text x="{:.1}" y="{ly:.1}">{}</text>"#,
            ly - 4.0,
            lx + 16.0,
            ly - 4.0,
            lx + 20.0,
            escape(&se.name)
        );
    }
}
