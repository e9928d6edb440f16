//! Minimal static SVG charts. Output is a pure function of the input, with
//! fixed float formatting, so files are byte-stable.

use std::fmt::Write;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 48.0;
const PALETTE: [&str; 8] = ["#d6457b", "#3b7dd8", "#3aa55d", "#e89a2c", "#8a5cc2", "#5b5b5b", "#1fa3a3", "#b0702a"];

pub(crate) struct Series {
    pub label: String,
    pub values: Vec<f64>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let (x0, y0, y1) = (MARGIN, HEIGHT - MARGIN, MARGIN);
    let _ = writeln!(out, r#"<line class="axis" x1="{x0}" y1="{y0}" x2="{}" y2="{y0}" stroke="black"/>"#, WIDTH - MARGIN);
    let _ = writeln!(out, r#"<line class="axis" x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>"#);
    for tick in 0..=4 {
        let v = tick as f64 / 4.0;
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">{v:.2}</text>"#,
            x0 - 4.0,
            y_of(v) + 3.0
        );
    }
}

fn legend(out: &mut String, series: &[Series]) {
    for (i, s) in series.iter().enumerate() {
        let y = MARGIN + 14.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<text class="legend" x="{:.2}" y="{y:.2}" font-size="10" fill="{}" text-anchor="end">{}</text>"#,
            WIDTH - MARGIN,
            PALETTE[i % PALETTE.len()],
            escape(&s.label)
        );
    }
}

fn y_of(v: f64) -> f64 {
    let plot = HEIGHT - 2.0 * MARGIN;
    HEIGHT - MARGIN - v.clamp(0.0, 1.0) * plot
}

/// Bars grouped by category, one bar per series in each group.
pub(crate) fn bar_chart(title: &str, categories: &[String], series: &[Series]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let plot_w = WIDTH - 2.0 * MARGIN;
    let group_w = plot_w / categories.len().max(1) as f64;
    let bar_w = group_w * 0.8 / series.len().max(1) as f64;
    for (g, cat) in categories.iter().enumerate() {
        let gx = MARGIN + group_w * g as f64 + group_w * 0.1;
        for (i, s) in series.iter().enumerate() {
            let v = s.values.get(g).copied().unwrap_or(0.0);
            let y = y_of(v);
            let _ = writeln!(
                out,
                r#"<rect class="bar" data-series="{i}" x="{:.2}" y="{y:.2}" width="{bar_w:.2}" height="{:.2}" fill="{}"><title>{}: {v:.4}</title></rect>"#,
                gx + bar_w * i as f64,
                HEIGHT - MARGIN - y,
                PALETTE[i % PALETTE.len()],
                escape(&s.label)
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#,
            gx + group_w * 0.4,
            HEIGHT - MARGIN + 14.0,
            escape(cat)
        );
    }
    legend(&mut out, series);
    out.push_str("</svg>\n");
    out
}

/// One polyline per series over shared x values, a marker per point.
pub(crate) fn line_chart(title: &str, xs: &[f64], series: &[Series]) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let plot_w = WIDTH - 2.0 * MARGIN;
    let (lo, hi) = xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)));
    let span = if hi > lo { hi - lo } else { 1.0 };
    let x_of = |x: f64| MARGIN + (x - lo) / span * plot_w;
    for &x in xs {
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{x}</text>"#,
            x_of(x),
            HEIGHT - MARGIN + 14.0
        );
    }
    for (i, s) in series.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let points: Vec<String> =
            xs.iter().zip(&s.values).map(|(&x, &v)| format!("{:.2},{:.2}", x_of(x), y_of(v))).collect();
        let _ = writeln!(
            out,
            r#"<polyline data-series="{i}" fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#,
            points.join(" ")
        );
        for (&x, &v) in xs.iter().zip(&s.values) {
            let _ = writeln!(
                out,
                r#"<circle class="marker" data-series="{i}" cx="{:.2}" cy="{:.2}" r="3" fill="{colour}"><title>{} @ {x}: {v:.4}</title></circle>"#,
                x_of(x),
                y_of(v),
                escape(&s.label)
            );
        }
    }
    legend(&mut out, series);
    out.push_str("</svg>\n");
    out
}
