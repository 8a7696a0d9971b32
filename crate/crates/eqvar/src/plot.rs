//! Recovery-rate curves as a standalone SVG.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::harness::ExperimentResult;

#[derive(Debug, Error)]
pub enum PlotError {
    #[error("nothing to plot: the result has no cells")]
    Empty,
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
}

const W: f64 = 720.0;
const H: f64 = 460.0;
const LEFT: f64 = 64.0;
const RIGHT: f64 = 170.0;
const TOP: f64 = 24.0;
const BOTTOM: f64 = 52.0;

/// Hues for successive in-degrees.
const HUES: [f64; 6] = [210.0, 10.0, 130.0, 280.0, 40.0, 180.0];

fn color(q_rank: usize, d_rank: usize, d_count: usize) -> String {
    let hue = HUES[q_rank % HUES.len()];
    // Larger d gets the darker shade.
    let light = if d_count <= 1 { 45.0 } else { 72.0 - 44.0 * d_rank as f64 / (d_count - 1) as f64 };
    format!("hsl({hue:.0},70%,{light:.0}%)")
}

fn nice_ticks(lo: f64, hi: f64) -> Vec<f64> {
    if hi <= lo {
        return vec![lo];
    }
    let raw = (hi - lo) / 6.0;
    let mag = 10f64.powf(raw.log10().floor());
    let step = [1.0, 2.0, 5.0, 10.0].iter().map(|m| m * mag).find(|s| *s >= raw).unwrap_or(10.0 * mag);
    let mut t = (lo / step).ceil() * step;
    let mut out = Vec::new();
    while t <= hi + 1e-9 * step {
        out.push(t);
        t += step;
    }
    out
}

/// One polyline per `(d, q)` with `x = n` and `y = recovery rate`.
pub fn render_svg(result: &ExperimentResult) -> Result<String, PlotError> {
    if result.cells.is_empty() {
        return Err(PlotError::Empty);
    }
    let mut curves: BTreeMap<(usize, usize), Vec<(usize, f64)>> = BTreeMap::new();
    for c in &result.cells {
        curves.entry((c.q, c.d)).or_default().push((c.n, c.recovery_rate));
    }
    let qs: Vec<usize> = {
        let mut v: Vec<usize> = result.cells.iter().map(|c| c.q).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let ds: Vec<usize> = {
        let mut v: Vec<usize> = result.cells.iter().map(|c| c.d).collect();
        v.sort_unstable();
        v.dedup();
        v
    };
    let n_min = result.cells.iter().map(|c| c.n).min().unwrap() as f64;
    let n_max = result.cells.iter().map(|c| c.n).max().unwrap() as f64;
    let (x_lo, x_hi) = if n_max > n_min { (n_min, n_max) } else { (n_min - 1.0, n_max + 1.0) };
    let pw = W - LEFT - RIGHT;
    let ph = H - TOP - BOTTOM;
    let sx = |n: f64| LEFT + (n - x_lo) / (x_hi - x_lo) * pw;
    let sy = |p: f64| TOP + (1.0 - p) * ph;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(s, r##"<g stroke="#ddd" stroke-width="1">"##);
    for t in nice_ticks(x_lo, x_hi) {
        let x = sx(t);
        let _ = writeln!(s, r#"<line x1="{x:.1}" y1="{TOP}" x2="{x:.1}" y2="{:.1}"/>"#, TOP + ph);
    }
    for i in 0..=5 {
        let y = sy(i as f64 / 5.0);
        let _ = writeln!(s, r#"<line x1="{LEFT}" y1="{y:.1}" x2="{:.1}" y2="{y:.1}"/>"#, LEFT + pw);
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, r#"<rect x="{LEFT}" y="{TOP}" width="{pw}" height="{ph}" fill="none" stroke="black"/>"#);
    for t in nice_ticks(x_lo, x_hi) {
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">{}</text>"#, sx(t), TOP + ph + 16.0, t);
    }
    for i in 0..=5 {
        let p = i as f64 / 5.0;
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}" text-anchor="end">{p:.1}</text>"#, LEFT - 6.0, sy(p) + 4.0);
    }
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="{:.1}" text-anchor="middle">sample size n</text>"#,
        LEFT + pw / 2.0,
        H - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text transform="translate(16,{:.1}) rotate(-90)" text-anchor="middle">P(recovered = true)</text>"#,
        TOP + ph / 2.0
    );

    for (idx, (&(q, d), pts)) in curves.iter().enumerate() {
        let mut pts = pts.clone();
        pts.sort_by_key(|p| p.0);
        let qr = qs.iter().position(|&v| v == q).unwrap();
        let dr = ds.iter().position(|&v| v == d).unwrap();
        let col = color(qr, dr, ds.len());
        let path: Vec<String> = pts.iter().map(|&(n, p)| format!("{:.1},{:.1}", sx(n as f64), sy(p))).collect();
        let _ = writeln!(
            s,
            r#"<polyline fill="none" stroke="{col}" stroke-width="2" points="{}"><title>d={d}, q={q}</title></polyline>"#,
            path.join(" ")
        );
        for &(n, p) in &pts {
            let _ = writeln!(s, r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{col}"/>"#, sx(n as f64), sy(p));
        }
        let ly = TOP + 10.0 + 16.0 * idx as f64;
        let lx = LEFT + pw + 14.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.1}" y1="{ly:.1}" x2="{:.1}" y2="{ly:.1}" stroke="{col}" stroke-width="3"/>"#,
            lx + 22.0
        );
        let _ = writeln!(s, r#"<text x="{:.1}" y="{:.1}">d={d}, q={q}</text>"#, lx + 28.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

/// Writes the SVG to `path` and the results table next to it with a `.csv` extension.
pub fn emit_plot(result: &ExperimentResult, path: &Path) -> Result<PathBuf, PlotError> {
    let svg = render_svg(result)?;
    std::fs::write(path, svg).map_err(|source| PlotError::Io { path: path.to_owned(), source })?;
    let csv_path = path.with_extension("csv");
    result.write_csv_file(&csv_path).map_err(|source| PlotError::Io { path: csv_path.clone(), source })?;
    Ok(csv_path)
}
