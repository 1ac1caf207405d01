//! Minimal SVG figures: a line chart with error bars and a cell heatmap.

use std::fmt::Write;

use itca::theory::RegionGrid;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="24" text-anchor="middle" font-size="14">{}</text>"#, WIDTH / 2.0, escape(title));
}

fn axes(out: &mut String, x_label: &str, y_label: &str, x_range: (f64, f64), y_range: (f64, f64)) {
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(out, r#"<polyline points="{l},{t} {l},{b} {r},{b}" fill="none" stroke="black"/>"#);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#, WIDTH / 2.0, HEIGHT - 20.0, escape(x_label));
    let _ = writeln!(
        out,
        r#"<text x="18" y="{}" text-anchor="middle" transform="rotate(-90 18 {})">{}</text>"#,
        HEIGHT / 2.0,
        HEIGHT / 2.0,
        escape(y_label)
    );
    let _ = writeln!(out, r#"<text x="{l}" y="{}" text-anchor="middle">{}</text>"#, b + 16.0, fmt_tick(x_range.0));
    let _ = writeln!(out, r#"<text x="{r}" y="{}" text-anchor="middle">{}</text>"#, b + 16.0, fmt_tick(x_range.1));
    let _ = writeln!(out, r#"<text x="{}" y="{b}" text-anchor="end">{}</text>"#, l - 4.0, fmt_tick(y_range.0));
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{}</text>"#, l - 4.0, t + 4.0, fmt_tick(y_range.1));
}

fn fmt_tick(v: f64) -> String {
    format!("{v:.3}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn scale(v: f64, (lo, hi): (f64, f64), (a, b): (f64, f64)) -> f64 {
    if hi > lo {
        a + (v - lo) / (hi - lo) * (b - a)
    } else {
        (a + b) / 2.0
    }
}

/// Points `(x, y, stderr)` joined by a polyline, with vertical error bars.
pub fn line_chart(points: &[(f64, f64, f64)], title: &str, x_label: &str, y_label: &str) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let x_range = points.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.0), hi.max(p.0)));
    let y_range = points
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), p| (lo.min(p.1 - p.2), hi.max(p.1 + p.2)));
    if points.is_empty() {
        out.push_str("</svg>\n");
        return out;
    }
    axes(&mut out, x_label, y_label, x_range, y_range);
    let px = |x: f64| scale(x, x_range, (MARGIN, WIDTH - MARGIN));
    let py = |y: f64| scale(y, y_range, (HEIGHT - MARGIN, MARGIN));
    let line: Vec<String> = points.iter().map(|p| format!("{:.2},{:.2}", px(p.0), py(p.1))).collect();
    let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="steelblue" stroke-width="2"/>"#, line.join(" "));
    for &(x, y, se) in points {
        let _ = writeln!(
            out,
            r#"<line x1="{x:.2}" y1="{:.2}" x2="{x:.2}" y2="{:.2}" stroke="steelblue"/>"#,
            py(y - se),
            py(y + se),
            x = px(x)
        );
        let _ = writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="steelblue"/>"#, px(x), py(y));
    }
    out.push_str("</svg>\n");
    out
}

/// One square per grid cell: red where merging helps, blue where it hurts.
pub fn heatmap(grid: &RegionGrid, title: &str) -> String {
    let mut out = String::new();
    header(&mut out, title);
    let range = (grid.domain.lo, grid.domain.hi);
    axes(&mut out, "p1", "p2", range, range);
    let side = (HEIGHT - 2.0 * MARGIN).min(WIDTH - 2.0 * MARGIN);
    let cell = side / grid.resolution as f64;
    let peak = grid.cells.iter().map(|c| c.delta.abs()).fold(0.0, f64::max);
    for c in &grid.cells {
        let x = scale(c.p1, range, (MARGIN, MARGIN + side)) - cell / 2.0;
        let y = scale(c.p2, range, (HEIGHT - MARGIN, HEIGHT - MARGIN - side)) - cell / 2.0;
        let level = if peak > 0.0 { c.delta.abs() / peak } else { 0.0 };
        let fade = (255.0 * (1.0 - level)).round() as u8;
        let color = if c.delta > 0.0 {
            format!("rgb(255,{fade},{fade})")
        } else {
            format!("rgb({fade},{fade},255)")
        };
        let _ = writeln!(
            out,
            r#"<rect x="{x:.2}" y="{y:.2}" width="{cell:.2}" height="{cell:.2}" fill="{color}"><title>({:.4}, {:.4}): {:.6}</title></rect>"#,
            c.p1, c.p2, c.delta
        );
    }
    out.push_str("</svg>\n");
    out
}
