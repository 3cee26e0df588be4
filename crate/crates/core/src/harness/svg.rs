//! Minimal two-panel log-scale line plots.

use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    /// `(k, bits, metric)` triples.
    pub points: Vec<(f64, f64, f64)>,
}

const PANEL_W: f64 = 420.0;
const PANEL_H: f64 = 300.0;
const MARGIN: f64 = 60.0;
const COLORS: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Metric against iteration (left) and against cumulative bits (right).
/// Non-positive metric values are dropped from the log axis.
pub fn render(title: &str, metric: &str, series: &[Series]) -> String {
    let positive = || {
        series
            .iter()
            .flat_map(|s| s.points.iter())
            .filter(|p| p.2 > 0.0 && p.2.is_finite())
    };
    let (mut lo, mut hi) = positive().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| {
        (lo.min(p.2.log10()), hi.max(p.2.log10()))
    });
    if !lo.is_finite() {
        lo = -1.0;
        hi = 1.0;
    }
    lo = lo.floor();
    hi = hi.ceil().max(lo + 1.0);
    let k_max = positive().map(|p| p.0).fold(1.0, f64::max);
    let b_max = positive().map(|p| p.1).fold(1.0, f64::max);

    let width = 2.0 * (PANEL_W + 2.0 * MARGIN);
    let height = PANEL_H + 2.0 * MARGIN + 20.0 * series.len() as f64;
    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        width / 2.0,
        escape(title)
    );
    for (panel, (xlabel, x_max)) in [("iteration k", k_max), ("cumulative bits", b_max)]
        .into_iter()
        .enumerate()
    {
        let ox = MARGIN + panel as f64 * (PANEL_W + 2.0 * MARGIN);
        let oy = MARGIN;
        let sx = |x: f64| ox + x / x_max * PANEL_W;
        let sy = |v: f64| oy + (hi - v.log10()) / (hi - lo) * PANEL_H;
        let _ = writeln!(
            out,
            r#"<rect x="{ox}" y="{oy}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="black"/>"#
        );
        let mut e = lo as i64;
        while e <= hi as i64 {
            let y = sy(10f64.powi(e as i32));
            let _ = writeln!(
                out,
                r##"<line x1="{ox}" y1="{y}" x2="{}" y2="{y}" stroke="#ddd"/><text x="{}" y="{}" text-anchor="end">1e{e}</text>"##,
                ox + PANEL_W,
                ox - 4.0,
                y + 4.0
            );
            e += 1;
        }
        for t in 0..=4 {
            let x = x_max * t as f64 / 4.0;
            let _ = writeln!(
                out,
                r#"<text x="{}" y="{}" text-anchor="middle">{:.3e}</text>"#,
                sx(x),
                oy + PANEL_H + 14.0,
                x
            );
        }
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
            ox + PANEL_W / 2.0,
            oy + PANEL_H + 32.0,
            xlabel
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" transform="rotate(-90 {} {})">{}</text>"#,
            ox - 44.0,
            oy + PANEL_H / 2.0,
            ox - 44.0,
            oy + PANEL_H / 2.0,
            escape(metric)
        );
        for (i, s) in series.iter().enumerate() {
            let pts: Vec<String> = s
                .points
                .iter()
                .filter(|p| p.2 > 0.0 && p.2.is_finite())
                .map(|p| {
                    let x = if panel == 0 { p.0 } else { p.1 };
                    format!("{:.2},{:.2}", sx(x), sy(p.2))
                })
                .collect();
            let _ = writeln!(
                out,
                r#"<polyline fill="none" stroke="{}" stroke-width="1.5" points="{}"/>"#,
                COLORS[i % COLORS.len()],
                pts.join(" ")
            );
        }
    }
    for (i, s) in series.iter().enumerate() {
        let y = MARGIN + PANEL_H + 50.0 + 20.0 * i as f64;
        let _ = writeln!(
            out,
            r#"<line x1="{MARGIN}" y1="{y}" x2="{}" y2="{y}" stroke="{}" stroke-width="3"/><text x="{}" y="{}">{}</text>"#,
            MARGIN + 25.0,
            COLORS[i % COLORS.len()],
            MARGIN + 32.0,
            y + 4.0,
            escape(&s.label)
        );
    }
    out.push_str("</svg>\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
