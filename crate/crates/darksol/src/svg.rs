//! Minimal SVG line plot.

use std::fmt::Write as _;

pub struct Series<'a> {
    pub label: &'a str,
    pub y: &'a [f64],
    pub color: &'a str,
    pub dashed: bool,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 50.0;
const MAX_POINTS: usize = 2000;

/// Polylines of every series against `x`, with axes and a legend.
pub fn line_plot(title: &str, x: &[f64], series: &[Series<'_>]) -> String {
    let finite = |v: &&f64| v.is_finite();
    let (xmin, xmax) = bounds(x.iter().filter(finite).copied());
    let (ymin, ymax) = bounds(series.iter().flat_map(|s| s.y.iter().filter(finite).copied()));
    let pad = 0.05 * (ymax - ymin).max(1e-12);
    let (ymin, ymax) = (ymin - pad, ymax + pad);
    let sx = |v: f64| MARGIN + (v - xmin) / (xmax - xmin).max(1e-300) * (WIDTH - 2.0 * MARGIN);
    let sy = |v: f64| HEIGHT - MARGIN - (v - ymin) / (ymax - ymin) * (HEIGHT - 2.0 * MARGIN);
    let stride = x.len().div_ceil(MAX_POINTS).max(1);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="20" text-anchor="middle">{}</text>"#, WIDTH / 2.0, escape(title));
    let (x0, y0) = (MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(
        s,
        r#"<path d="M{x0} {MARGIN} L{x0} {y0} L{} {y0}" stroke="black" fill="none"/>"#,
        WIDTH - MARGIN
    );
    if ymin < 0.0 && ymax > 0.0 {
        let _ = writeln!(
            s,
            r##"<line x1="{x0}" y1="{0:.2}" x2="{1}" y2="{0:.2}" stroke="#bbb"/>"##,
            sy(0.0),
            WIDTH - MARGIN
        );
    }
    for (v, anchor, px) in [(xmin, "start", sx(xmin)), (xmax, "end", sx(xmax))] {
        let _ = writeln!(s, r#"<text x="{px:.2}" y="{}" text-anchor="{anchor}">{}</text>"#, y0 + 16.0, tick(v));
    }
    for v in [ymin, ymax] {
        let _ = writeln!(s, r#"<text x="{}" y="{:.2}" text-anchor="end">{}</text>"#, x0 - 4.0, sy(v) + 4.0, tick(v));
    }
    for (k, ser) in series.iter().enumerate() {
        let mut d = String::new();
        for i in (0..x.len().min(ser.y.len())).step_by(stride).chain(std::iter::once(x.len().saturating_sub(1))) {
            if !ser.y[i].is_finite() {
                continue;
            }
            let _ = write!(d, "{:.2},{:.2} ", sx(x[i]), sy(ser.y[i]));
        }
        let dash = if ser.dashed { r#" stroke-dasharray="6 4""# } else { "" };
        let _ = writeln!(
            s,
            r#"<polyline points="{}" stroke="{}" fill="none" stroke-width="1.5"{dash}/>"#,
            d.trim_end(),
            ser.color
        );
        let ly = MARGIN + 16.0 * k as f64;
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{ly}" fill="{}" text-anchor="end">{}</text>"#,
            WIDTH - MARGIN - 4.0,
            ser.color,
            escape(ser.label)
        );
    }
    s.push_str("</svg>\n");
    s
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) = values.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));
    if lo.is_finite() && hi.is_finite() {
        if hi > lo {
            (lo, hi)
        } else {
            (lo - 1.0, hi + 1.0)
        }
    } else {
        (0.0, 1.0)
    }
}

fn tick(v: f64) -> String {
    format!("{v:.3}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
