//! Minimal SVG rendering of per-index statistics: a mean line and an interquartile band
//! per method.

use std::fmt::Write as _;

use crate::experiments::MethodStats;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 56.0;
const COLORS: [&str; 6] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"];

/// Log-scale plot of `mean_log10` against the index with a shaded `q25..q75` band.
pub fn stats_svg(title: &str, methods: &[MethodStats]) -> String {
    let rows = methods.iter().flat_map(|m| &m.rows);
    let xmax = rows.clone().map(|r| r.index).max().unwrap_or(1).max(2) as f64;
    let finite = |v: f64| v.is_finite() && v > -299.0;
    let ys: Vec<f64> = rows
        .flat_map(|r| [r.mean_log10, r.q25_log10, r.q75_log10])
        .filter(|&v| finite(v))
        .collect();
    let ymin = ys.iter().copied().fold(f64::INFINITY, f64::min).floor().min(-1.0);
    let ymax = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max).ceil().max(0.0);
    let px = |x: f64| MARGIN + (x - 1.0) / (xmax - 1.0) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| {
        let y = y.clamp(ymin, ymax);
        HEIGHT - MARGIN - (y - ymin) / (ymax - ymin) * (HEIGHT - 2.0 * MARGIN)
    };

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(s, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
    let (x0, x1, y0, y1) = (px(1.0), px(xmax), py(ymin), py(ymax));
    let _ = writeln!(s, r#"<path d="M{x0:.1},{y1:.1} L{x0:.1},{y0:.1} L{x1:.1},{y0:.1}" stroke="black" fill="none"/>"#);
    let mut tick = ymin;
    while tick <= ymax {
        let y = py(tick);
        let _ = writeln!(s, r##"<line x1="{:.1}" y1="{y:.1}" x2="{x1:.1}" y2="{y:.1}" stroke="#ddd"/>"##, x0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">1e{tick}</text>"#, x0 - 6.0, y + 4.0);
        tick += ((ymax - ymin) / 8.0).ceil().max(1.0);
    }
    let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">index</text>"#, WIDTH / 2.0, HEIGHT - 16.0);

    for (i, m) in methods.iter().enumerate() {
        let color = COLORS[i % COLORS.len()];
        let upper: Vec<String> = m.rows.iter().map(|r| format!("{:.1},{:.1}", px(r.index as f64), py(r.q75_log10))).collect();
        let lower: Vec<String> = m.rows.iter().rev().map(|r| format!("{:.1},{:.1}", px(r.index as f64), py(r.q25_log10))).collect();
        if !upper.is_empty() {
            let _ = writeln!(
                s,
                r#"<polygon points="{} {}" fill="{color}" fill-opacity="0.15" stroke="none"/>"#,
                upper.join(" "),
                lower.join(" ")
            );
        }
        let line: Vec<String> = m.rows.iter().map(|r| format!("{:.1},{:.1}", px(r.index as f64), py(r.mean_log10))).collect();
        let _ = writeln!(s, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, line.join(" "));
        let ly = MARGIN + 16.0 * i as f64;
        let _ = writeln!(s, r#"<line x1="{:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{color}" stroke-width="2"/>"#, x1 - 150.0, x1 - 130.0);
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, x1 - 124.0, ly + 4.0, m.method);
    }
    s.push_str("</svg>\n");
    s
}

fn escape(t: &str) -> String {
    t.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::IndexStats;
    use crate::ordering::Method;

    #[test]
    fn renders_every_method() {
        let rows = (1..=4)
            .map(|i| IndexStats {
                index: i,
                mean_log10: -(i as f64),
                std_log10: 0.1,
                median_log10: -(i as f64),
                q25_log10: -(i as f64) - 0.2,
                q75_log10: -(i as f64) + 0.2,
                zero_count: 0,
            })
            .collect::<Vec<_>>();
        let m = [
            MethodStats { method: Method::Canonical, rows: rows.clone(), seconds: 0.0 },
            MethodStats { method: Method::Fiedler, rows, seconds: 0.0 },
        ];
        let svg = stats_svg("a < b", &m);
        assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
        assert_eq!(svg.matches("<polyline").count(), 2);
        assert!(svg.contains("a &lt; b"));
    }
}
