//! Minimal native SVG charts.

use std::fmt::Write;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 160.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#17becf", "#8c564b", "#e377c2"];

pub struct Series {
    pub label: String,
    pub points: Vec<(f64, f64)>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let (lo, hi) =
        values.filter(|v| v.is_finite()).fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        return (0.0, 1.0);
    }
    if hi - lo <= f64::EPSILON * lo.abs().max(1.0) {
        return (lo - 0.5, hi + 0.5);
    }
    (lo, hi)
}

fn frame(out: &mut String, title: &str, xlabel: &str, ylabel: &str, x: (f64, f64), y: (f64, f64)) {
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="24" text-anchor="middle" font-size="15">{}</text>"#,
        LEFT + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(out, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for k in 0..=4 {
        let f = k as f64 / 4.0;
        let px = LEFT + f * pw;
        let py = TOP + ph - f * ph;
        let _ = writeln!(
            out,
            r#"<text x="{px:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
            TOP + ph + 16.0,
            tick(x.0 + f * (x.1 - x.0))
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{}</text>"#,
            LEFT - 6.0,
            py + 4.0,
            tick(y.0 + f * (y.1 - y.0))
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 12.0,
        escape(xlabel)
    );
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(ylabel)
    );
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() >= 1e4 || v.abs() < 1e-2) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

/// Polylines sharing one pair of axes, with a legend on the right.
pub fn line_chart(title: &str, xlabel: &str, ylabel: &str, series: &[Series]) -> String {
    let x = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.0)));
    let y = bounds(series.iter().flat_map(|s| s.points.iter().map(|p| p.1)));
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let mut out = String::new();
    frame(&mut out, title, xlabel, ylabel, x, y);
    for (n, s) in series.iter().enumerate() {
        let color = PALETTE[n % PALETTE.len()];
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|p| p.0.is_finite() && p.1.is_finite())
            .map(|(px, py)| {
                let sx = LEFT + (px - x.0) / (x.1 - x.0) * pw;
                let sy = TOP + ph - (py - y.0) / (y.1 - y.0) * ph;
                format!("{sx:.2},{sy:.2}")
            })
            .collect();
        let _ =
            writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#, pts.join(" "));
        let ly = TOP + 14.0 + 18.0 * n as f64;
        let lx = WIDTH - RIGHT + 12.0;
        let _ = writeln!(
            out,
            r#"<line x1="{lx}" y1="{ly}" x2="{:.1}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#,
            lx + 20.0
        );
        let _ = writeln!(out, r#"<text x="{:.1}" y="{:.1}">{}</text>"#, lx + 26.0, ly + 4.0, escape(&s.label));
    }
    out.push_str("</svg>\n");
    out
}

/// Colour map of `values[row][col]` on a regular grid of `xs` by `ys`.
pub fn heatmap(
    title: &str,
    xlabel: &str,
    ylabel: &str,
    xs: &[f64],
    ys: &[f64],
    values: &[Vec<f64>],
    legend: &str,
) -> String {
    let x = bounds(xs.iter().copied());
    let y = bounds(ys.iter().copied());
    let z = bounds(values.iter().flatten().copied());
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let mut out = String::new();
    frame(&mut out, title, xlabel, ylabel, x, y);
    let cw = pw / xs.len().max(1) as f64;
    let ch = ph / ys.len().max(1) as f64;
    for (r, row) in values.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            let f = if z.1 > z.0 { ((v - z.0) / (z.1 - z.0)).clamp(0.0, 1.0) } else { 0.0 };
            let shade = (255.0 * (1.0 - f)).round() as u8;
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{cw:.2}" height="{ch:.2}" fill="rgb(255,{shade},{shade})" stroke="white"/>"#,
                LEFT + c as f64 * cw,
                TOP + ph - (r + 1) as f64 * ch
            );
        }
    }
    let lx = WIDTH - RIGHT + 12.0;
    let _ = writeln!(out, r#"<text x="{lx}" y="{:.1}">{}</text>"#, TOP + 14.0, escape(legend));
    let _ = writeln!(out, r#"<text x="{lx}" y="{:.1}">white {}</text>"#, TOP + 32.0, tick(z.0));
    let _ = writeln!(out, r#"<text x="{lx}" y="{:.1}">red {}</text>"#, TOP + 50.0, tick(z.1));
    out.push_str("</svg>\n");
    out
}

/// Horizontal bars, one per label.
pub fn bar_chart(title: &str, xlabel: &str, labels: &[String], values: &[f64]) -> String {
    let lo = values.iter().copied().filter(|v| v.is_finite()).fold(0.0f64, f64::min);
    let hi = values.iter().copied().filter(|v| v.is_finite()).fold(0.0f64, f64::max);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 1.0, hi + 1.0) };
    let pw = WIDTH - LEFT - RIGHT;
    let ph = HEIGHT - TOP - BOTTOM;
    let mut out = String::new();
    frame(&mut out, title, xlabel, "", (lo, hi), (0.0, labels.len() as f64));
    let bh = ph / labels.len().max(1) as f64;
    let zero = LEFT + (0.0 - lo) / (hi - lo) * pw;
    for (n, (label, v)) in labels.iter().zip(values).enumerate() {
        let v = if v.is_finite() { *v } else { lo };
        let end = LEFT + (v - lo) / (hi - lo) * pw;
        let y = TOP + n as f64 * bh;
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{}"/>"#,
            zero.min(end),
            y + 0.15 * bh,
            (end - zero).abs(),
            0.7 * bh,
            PALETTE[n % PALETTE.len()]
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.1}" y="{:.1}">{}</text>"#,
            WIDTH - RIGHT + 12.0,
            y + 0.5 * bh + 4.0,
            escape(label)
        );
    }
    out.push_str("</svg>\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn charts_are_well_formed() {
        let s = line_chart("t <1>", "x", "y", &[Series { label: "a".into(), points: vec![(0.0, 1.0), (1.0, 2.0)] }]);
        assert!(s.starts_with("<svg") && s.trim_end().ends_with("</svg>"));
        assert!(s.contains("t &lt;1&gt;") && s.contains("<polyline"));
        let h = heatmap("h", "x", "y", &[1.0, 2.0], &[1.0], &[vec![0.0, 1.0]], "z");
        assert_eq!(h.matches("<rect").count(), 4);
        let b = bar_chart("b", "x", &["one".into()], &[-3.0]);
        assert!(b.contains("one"));
    }
}
