//! SVG chart of query budget against approximation factor.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 460.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 30.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 60.0;
const X_MIN: f64 = 1.0;
const X_MAX: f64 = 2.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub experiment: String,
    /// `log_n(queries)`.
    pub exponent: f64,
    pub ratio: f64,
}

/// Points with a finite ratio and at least two queries on at least two points.
pub fn read_points(csv_text: &str) -> anyhow::Result<Vec<Point>> {
    let mut rdr = csv::Reader::from_reader(csv_text.as_bytes());
    let headers = rdr.headers()?.clone();
    let col = |name: &str| headers.iter().position(|h| h == name).with_context(|| format!("missing column {name}"));
    let (ie, in_, iq, ir) = (col("experiment")?, col("n")?, col("queries")?, col("ratio")?);
    let mut points = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let parse = |i: usize| record.get(i).and_then(|s| s.parse::<f64>().ok());
        if let (Some(n), Some(q), Some(ratio)) = (parse(in_), parse(iq), parse(ir)) {
            if n >= 2.0 && q >= 2.0 && ratio.is_finite() {
                points.push(Point { experiment: record[ie].to_string(), exponent: q.ln() / n.ln(), ratio });
            }
        }
    }
    Ok(points)
}

/// Lower bound `2(k+1)` for budgets up to `n^{1+1/k}`.
pub fn step_bound(exponent: f64) -> f64 {
    if exponent <= 1.0 {
        return f64::INFINITY;
    }
    let k = (1.0 / (exponent - 1.0)).floor().max(1.0);
    2.0 * (k + 1.0)
}

fn color(experiment: &str) -> &'static str {
    match experiment {
        "approximator" | "baseline" => "#1f5fbf",
        "adversary" => "#c0392b",
        "small-alpha" => "#e67e22",
        _ => "#555555",
    }
}

pub fn render(points: &[Point]) -> String {
    let top = points.iter().map(|p| p.ratio).fold(12.0f64, f64::max).ceil() + 1.0;
    let (pw, ph) = (WIDTH - LEFT - RIGHT, HEIGHT - TOP - BOTTOM);
    let sx = |x: f64| LEFT + (x.clamp(X_MIN, X_MAX) - X_MIN) / (X_MAX - X_MIN) * pw;
    let sy = |y: f64| TOP + ph - (y.clamp(0.0, top) / top) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">Approximation factor against query budget</text>"#,
        WIDTH / 2.0
    );
    let _ = writeln!(
        s,
        r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#
    );
    for i in 0..=10 {
        let x = X_MIN + i as f64 * (X_MAX - X_MIN) / 10.0;
        let _ = writeln!(
            s,
            r#"<line x1="{0:.2}" y1="{1}" x2="{0:.2}" y2="{2}" stroke="black"/><text x="{0:.2}" y="{3}" text-anchor="middle">n^{4:.1}</text>"#,
            sx(x),
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 20.0,
            x
        );
    }
    let step = if top > 24.0 { 4 } else { 2 };
    for y in (0..=top as usize).step_by(step) {
        let _ = writeln!(
            s,
            r#"<line x1="{0}" y1="{1:.2}" x2="{2}" y2="{1:.2}" stroke="black"/><text x="{3}" y="{4:.2}" text-anchor="end">{y}</text>"#,
            LEFT - 5.0,
            sy(y as f64),
            LEFT,
            LEFT - 8.0,
            sy(y as f64) + 4.0
        );
    }
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" text-anchor="middle">queries (log scale, as a power of n)</text>"#,
        LEFT + pw / 2.0,
        HEIGHT - 15.0
    );
    let _ = writeln!(
        s,
        r#"<text x="18" y="{0}" text-anchor="middle" transform="rotate(-90 18 {0})">approximation factor</text>"#,
        TOP + ph / 2.0
    );

    // Horizontal run at 2(k+1) over (1 + 1/(k+1), 1 + 1/k], joined by risers.
    let mut path = String::new();
    let mut k = 1.0f64;
    loop {
        let (x_hi, x_lo) = (1.0 + 1.0 / k, 1.0 + 1.0 / (k + 1.0));
        let y = step_bound((x_hi + x_lo) / 2.0);
        if y > top {
            let _ = write!(path, " L{:.2},{:.2}", sx(x_hi), sy(top));
            break;
        }
        let cmd = if path.is_empty() { 'M' } else { 'L' };
        let _ = write!(path, "{cmd}{:.2},{:.2} L{:.2},{:.2}", sx(x_hi), sy(y), sx(x_lo), sy(y));
        k += 1.0;
    }
    let _ = writeln!(s, r##"<path d="{path}" fill="none" stroke="#c0392b" stroke-width="2"/>"##);

    for p in points {
        let _ = writeln!(
            s,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" fill="{}" fill-opacity="0.8"><title>{} {:.3}</title></circle>"#,
            sx(p.exponent),
            sy(p.ratio),
            color(&p.experiment),
            p.experiment,
            p.ratio
        );
    }

    let legend = [("#c0392b", "lower bound 2(k+1)"), ("#1f5fbf", "approximators"), ("#c0392b", "adversary runs"), ("#e67e22", "small-alpha runs")];
    for (i, (c, label)) in legend.iter().enumerate() {
        let y = TOP + 15.0 + 16.0 * i as f64;
        let x = LEFT + pw - 170.0;
        if i == 0 {
            let _ = writeln!(s, r#"<line x1="{x}" y1="{y}" x2="{}" y2="{y}" stroke="{c}" stroke-width="2"/>"#, x + 16.0);
        } else {
            let _ = writeln!(s, r#"<circle cx="{}" cy="{y}" r="4" fill="{c}"/>"#, x + 8.0);
        }
        let _ = writeln!(s, r#"<text x="{}" y="{}">{label}</text>"#, x + 22.0, y + 4.0);
    }
    s.push_str("</svg>\n");
    s
}

pub fn report(input: &Path, out: &Path) -> anyhow::Result<()> {
    let text = std::fs::read_to_string(input).with_context(|| format!("reading {}", input.display()))?;
    let points = read_points(&text).map_err(|e| avgdist::Error::Parse(format!("{e:#}")))?;
    std::fs::write(out, render(&points))?;
    Ok(())
}
