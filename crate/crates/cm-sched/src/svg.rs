//! Minimal hand-rolled SVG emission for trace line plots and composition
//! pies. No plotting framework; the figures are static artifacts meant
//! for eyeballing schedule and curriculum shapes.

use std::fmt::Write as _;

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 400.0;
const MARGIN: f64 = 48.0;

/// Line plot of `(x, y)` series, e.g. a curriculum trace `k -> N(k)`.
pub fn line_plot(series: &[(f64, f64)], title: &str, x_label: &str, y_label: &str) -> String {
    let (x_min, x_max) = bounds(series.iter().map(|p| p.0));
    let (y_min, y_max) = bounds(series.iter().map(|p| p.1));
    let x_span = (x_max - x_min).max(1e-12);
    let y_span = (y_max - y_min).max(1e-12);
    let sx = |x: f64| MARGIN + (x - x_min) / x_span * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y_min) / y_span * (HEIGHT - 2.0 * MARGIN);

    let mut path = String::new();
    for (i, (x, y)) in series.iter().enumerate() {
        let cmd = if i == 0 { 'M' } else { 'L' };
        let _ = write!(path, "{cmd}{:.2} {:.2} ", sx(*x), sy(*y));
    }

    let mut svg = svg_open(title);
    let _ = writeln!(
        svg,
        r##"  <line x1="{m}" y1="{b}" x2="{r}" y2="{b}" stroke="#444" stroke-width="1"/>
  <line x1="{m}" y1="{t}" x2="{m}" y2="{b}" stroke="#444" stroke-width="1"/>"##,
        m = MARGIN,
        b = HEIGHT - MARGIN,
        r = WIDTH - MARGIN,
        t = MARGIN,
    );
    let _ = writeln!(
        svg,
        r##"  <path d="{}" fill="none" stroke="#1f77b4" stroke-width="2"/>"##,
        path.trim_end()
    );
    let _ = writeln!(
        svg,
        r##"  <text x="{:.1}" y="{:.1}" font-size="12" text-anchor="middle">{x_label}</text>"##,
        WIDTH / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        svg,
        r##"  <text x="14" y="{:.1}" font-size="12" text-anchor="middle" transform="rotate(-90 14 {:.1})">{y_label}</text>"##,
        HEIGHT / 2.0,
        HEIGHT / 2.0
    );
    for (value, at_max) in [(y_min, false), (y_max, true)] {
        let _ = writeln!(
            svg,
            r##"  <text x="{:.1}" y="{:.1}" font-size="10" text-anchor="end">{value}</text>"##,
            MARGIN - 4.0,
            if at_max { MARGIN + 4.0 } else { HEIGHT - MARGIN }
        );
    }
    for (value, at_max) in [(x_min, false), (x_max, true)] {
        let _ = writeln!(
            svg,
            r##"  <text x="{:.1}" y="{:.1}" font-size="10" text-anchor="middle">{value}</text>"##,
            if at_max { WIDTH - MARGIN } else { MARGIN },
            HEIGHT - MARGIN + 14.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Pie chart of labelled shares (shares are renormalized defensively).
pub fn pie_chart(slices: &[(String, f64)], title: &str) -> String {
    const COLORS: [&str; 8] = [
        "#9edae5", "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
    ];
    let total: f64 = slices.iter().map(|(_, s)| s.max(0.0)).sum();
    let (cx, cy, r) = (HEIGHT / 2.0, HEIGHT / 2.0, HEIGHT / 2.0 - MARGIN);

    let mut svg = svg_open(title);
    let mut angle = -std::f64::consts::FRAC_PI_2;
    for (i, (label, share)) in slices.iter().enumerate() {
        let frac = if total > 0.0 { share.max(0.0) / total } else { 0.0 };
        let sweep = frac * std::f64::consts::TAU;
        let color = COLORS[i % COLORS.len()];
        if frac >= 1.0 - 1e-9 {
            let _ = writeln!(
                svg,
                r##"  <circle cx="{cx:.2}" cy="{cy:.2}" r="{r:.2}" fill="{color}"/>"##
            );
        } else if sweep > 0.0 {
            let (x0, y0) = (cx + r * angle.cos(), cy + r * angle.sin());
            let end = angle + sweep;
            let (x1, y1) = (cx + r * end.cos(), cy + r * end.sin());
            let large = if sweep > std::f64::consts::PI { 1 } else { 0 };
            let _ = writeln!(
                svg,
                r##"  <path d="M{cx:.2} {cy:.2} L{x0:.2} {y0:.2} A{r:.2} {r:.2} 0 {large} 1 {x1:.2} {y1:.2} Z" fill="{color}"/>"##
            );
        }
        let _ = writeln!(
            svg,
            r##"  <rect x="{x:.1}" y="{y:.1}" width="12" height="12" fill="{color}"/>
  <text x="{tx:.1}" y="{ty:.1}" font-size="12">{label}: {pct:.2}%</text>"##,
            x = HEIGHT + 10.0,
            y = MARGIN + 20.0 * i as f64,
            tx = HEIGHT + 28.0,
            ty = MARGIN + 20.0 * i as f64 + 10.0,
            pct = frac * 100.0,
        );
        angle += sweep;
    }
    svg.push_str("</svg>\n");
    svg
}

fn svg_open(title: &str) -> String {
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r##"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"##
    );
    let _ = writeln!(
        svg,
        r##"  <rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>
  <text x="{:.1}" y="24" font-size="14" text-anchor="middle">{title}</text>"##,
        WIDTH / 2.0
    );
    svg
}

fn bounds(values: impl Iterator<Item = f64>) -> (f64, f64) {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for v in values {
        lo = lo.min(v);
        hi = hi.max(v);
    }
    if lo > hi {
        (0.0, 1.0)
    } else {
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn line_plot_is_wellformed() {
        let series: Vec<(f64, f64)> = (0..100).map(|k| (k as f64, (k * k) as f64)).collect();
        let svg = line_plot(&series, "trace", "k", "N(k)");
        assert!(svg.starts_with("<svg"));
        assert!(svg.ends_with("</svg>\n"));
        assert!(svg.contains("<path"));
    }

    #[test]
    fn pie_handles_full_circle_and_zero() {
        let svg = pie_chart(
            &[("all".into(), 1.0), ("none".into(), 0.0)],
            "degenerate",
        );
        assert!(svg.contains("<circle"));
        let svg = pie_chart(
            &[("a".into(), 0.5), ("b".into(), 0.3), ("c".into(), 0.2)],
            "pie",
        );
        assert_eq!(svg.matches("<path").count(), 3);
    }

    #[test]
    fn deterministic_output() {
        let series = vec![(0.0, 1.0), (1.0, 3.0)];
        assert_eq!(
            line_plot(&series, "t", "x", "y"),
            line_plot(&series, "t", "x", "y")
        );
    }
}
