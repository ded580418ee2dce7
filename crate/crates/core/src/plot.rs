//! Minimal SVG line charts with error bars for benchmark summaries.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::bench::{Method, Summary};
use crate::error::{Error, Result};

const W: f64 = 640.0;
const H: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 130.0;
const TOP: f64 = 40.0;
const BOTTOM: f64 = 55.0;
const COLOURS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];

#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub x: f64,
    pub mean: f64,
    pub std: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub name: String,
    pub points: Vec<Point>,
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn ticks(lo: f64, hi: f64) -> Vec<f64> {
    let span = (hi - lo).max(1e-12);
    let raw = span / 5.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0]
        .iter()
        .map(|m| m * mag)
        .find(|s| span / s <= 6.0)
        .unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + step * 1e-9 {
        out.push(t);
        t += step;
    }
    out
}

fn label(v: f64) -> String {
    if v == 0.0 || (v.abs() >= 0.01 && v.abs() < 1e5) {
        let s = format!("{v:.3}");
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        format!("{v:.1e}")
    }
}

/// Render series as a line chart; error bars span mean ± std.
pub fn line_chart(title: &str, x_label: &str, y_label: &str, series: &[Series]) -> String {
    let pts = series.iter().flat_map(|s| &s.points);
    let (mut x0, mut x1, mut y1) = (f64::INFINITY, f64::NEG_INFINITY, 0.0f64);
    for p in pts {
        x0 = x0.min(p.x);
        x1 = x1.max(p.x);
        y1 = y1.max(p.mean + p.std);
    }
    if !x0.is_finite() {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 <= x0 {
        x1 = x0 + 1.0;
    }
    if y1 <= 0.0 {
        y1 = 1.0;
    }
    let y1 = y1 * 1.05;
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - x0) / (x1 - x0) * pw;
    let sy = |y: f64| TOP + ph - y / y1 * ph;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="22" text-anchor="middle" font-size="14">{}</text>"#,
        LEFT + pw / 2.0,
        escape(title)
    );
    let _ = writeln!(
        svg,
        r#"<line x1="{LEFT}" y1="{}" x2="{}" y2="{}" stroke="black"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{}" stroke="black"/>"#,
        TOP + ph,
        LEFT + pw,
        TOP + ph,
        TOP + ph
    );
    for t in ticks(x0, x1) {
        let x = sx(t);
        let _ = writeln!(
            svg,
            r#"<line x1="{x:.1}" y1="{}" x2="{x:.1}" y2="{}" stroke="black"/><text x="{x:.1}" y="{}" text-anchor="middle">{}</text>"#,
            TOP + ph,
            TOP + ph + 5.0,
            TOP + ph + 18.0,
            label(t)
        );
    }
    for t in ticks(0.0, y1) {
        let y = sy(t);
        let _ = writeln!(
            svg,
            r##"<line x1="{}" y1="{y:.1}" x2="{LEFT}" y2="{y:.1}" stroke="black"/><line x1="{LEFT}" y1="{y:.1}" x2="{}" y2="{y:.1}" stroke="#eee"/><text x="{}" y="{:.1}" text-anchor="end">{}</text>"##,
            LEFT - 5.0,
            LEFT + pw,
            LEFT - 8.0,
            y + 4.0,
            label(t)
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        LEFT + pw / 2.0,
        H - 12.0,
        escape(x_label)
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{}" text-anchor="middle" transform="rotate(-90 16 {})">{}</text>"#,
        TOP + ph / 2.0,
        TOP + ph / 2.0,
        escape(y_label)
    );

    for (i, s) in series.iter().enumerate() {
        let c = COLOURS[i % COLOURS.len()];
        let path: Vec<String> = s
            .points
            .iter()
            .map(|p| format!("{:.1},{:.1}", sx(p.x), sy(p.mean)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{c}" stroke-width="2" points="{}"/>"#,
            path.join(" ")
        );
        for p in &s.points {
            let (x, lo, hi) = (sx(p.x), sy((p.mean - p.std).max(0.0)), sy(p.mean + p.std));
            let _ = writeln!(
                svg,
                r#"<line x1="{x:.1}" y1="{lo:.1}" x2="{x:.1}" y2="{hi:.1}" stroke="{c}"/><line x1="{:.1}" y1="{lo:.1}" x2="{:.1}" y2="{lo:.1}" stroke="{c}"/><line x1="{:.1}" y1="{hi:.1}" x2="{:.1}" y2="{hi:.1}" stroke="{c}"/><circle cx="{x:.1}" cy="{:.1}" r="3" fill="{c}"/>"#,
                x - 4.0,
                x + 4.0,
                x - 4.0,
                x + 4.0,
                sy(p.mean)
            );
        }
        let ly = TOP + 10.0 + 20.0 * i as f64;
        let lx = W - RIGHT + 15.0;
        let _ = writeln!(
            svg,
            r#"<line x1="{lx}" y1="{ly}" x2="{}" y2="{ly}" stroke="{c}" stroke-width="2"/><text x="{}" y="{}">{}</text>"#,
            lx + 20.0,
            lx + 26.0,
            ly + 4.0,
            escape(&s.name)
        );
    }
    svg.push_str("</svg>\n");
    svg
}

fn series_by_method(rows: Vec<&Summary>, x: impl Fn(&Summary) -> f64) -> Vec<Series> {
    let mut methods: Vec<Method> = rows.iter().map(|s| s.method).collect();
    methods.sort();
    methods.dedup();
    methods
        .into_iter()
        .map(|m| {
            let mut points: Vec<Point> = rows
                .iter()
                .filter(|s| s.method == m)
                .map(|s| Point {
                    x: x(s),
                    mean: s.mean_s,
                    std: s.std_s,
                })
                .collect();
            points.sort_by(|a, b| a.x.total_cmp(&b.x));
            Series {
                name: m.to_string(),
                points,
            }
        })
        .collect()
}

/// Elapsed seconds against the number of levels, at one size and fraction.
pub fn elapsed_vs_n(summaries: &[Summary], size: usize, fraction: f64) -> String {
    let rows = summaries.iter().filter(|s| s.size == size && s.fraction == fraction).collect();
    let domain = summaries.first().map_or("", |s| s.domain.name());
    line_chart(
        &format!("{domain} size {size}, fraction {fraction}"),
        "levels required",
        "elapsed (s)",
        &series_by_method(rows, |s| s.n_levels as f64),
    )
}

/// Elapsed seconds against level size, at one fraction and level count.
pub fn elapsed_vs_size(summaries: &[Summary], fraction: f64, n_levels: usize) -> String {
    let rows = summaries
        .iter()
        .filter(|s| s.n_levels == n_levels && s.fraction == fraction)
        .collect();
    let domain = summaries.first().map_or("", |s| s.domain.name());
    line_chart(
        &format!("{domain}, {n_levels} levels, fraction {fraction}"),
        "size",
        "elapsed (s)",
        &series_by_method(rows, |s| s.size as f64),
    )
}

fn distinct<T: PartialEq + Copy>(items: impl Iterator<Item = T>) -> Vec<T> {
    let mut out = Vec::new();
    for i in items {
        if !out.contains(&i) {
            out.push(i);
        }
    }
    out
}

/// Write every chart with at least two x values into `dir`.
pub fn write_plots(summaries: &[Summary], dir: &Path) -> Result<Vec<PathBuf>> {
    let sizes = distinct(summaries.iter().map(|s| s.size));
    let fractions = distinct(summaries.iter().map(|s| s.fraction));
    let ns = distinct(summaries.iter().map(|s| s.n_levels));
    let mut written = Vec::new();
    let mut save = |name: String, svg: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, svg).map_err(|e| Error::io(&path, e))?;
        written.push(path);
        Ok(())
    };
    if ns.len() > 1 {
        for &size in &sizes {
            for &f in &fractions {
                save(format!("elapsed_vs_n_size{size}_f{f}.svg"), elapsed_vs_n(summaries, size, f))?;
            }
        }
    }
    if sizes.len() > 1 {
        for &f in &fractions {
            for &n in &ns {
                save(format!("elapsed_vs_size_n{n}_f{f}.svg"), elapsed_vs_size(summaries, f, n))?;
            }
        }
    }
    Ok(written)
}
