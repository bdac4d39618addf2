//! Minimal self-contained SVG charts.

use std::fmt::Write as _;
use std::fs::File;
use std::path::{Path, PathBuf};

use shortpolar::autgroup::{Category, GridCell};
use shortpolar::sim::{read_csv, SimResult};

use crate::PlotKind;

const W: f64 = 640.0;
const H: f64 = 440.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 20.0;
const BOTTOM: f64 = 50.0;
const PALETTE: [&str; 8] = ["#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf"];

pub fn render(kind: PlotKind, inputs: &[PathBuf]) -> Result<String, String> {
    match kind {
        PlotKind::Bler | PlotKind::Tmax => {
            let mut series = Vec::new();
            for path in inputs {
                let file = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
                let rows = read_csv(file).map_err(|e| format!("{}: {e}", path.display()))?;
                series.push((label(path), rows));
            }
            Ok(curves(kind, &series))
        }
        PlotKind::Grid => {
            if inputs.len() > 2 {
                return Err("grid plots take one or two CSVs".into());
            }
            let mut grids = Vec::new();
            for path in inputs {
                let file = File::open(path).map_err(|e| format!("{}: {e}", path.display()))?;
                let mut rd = csv::Reader::from_reader(file);
                let cells: Result<Vec<GridCell>, _> = rd.deserialize().collect();
                grids.push(cells.map_err(|e| format!("{}: {e}", path.display()))?);
            }
            grid(&grids)
        }
    }
}

fn label(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

fn header(out: &mut String) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(out, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
}

struct Axis {
    lo: f64,
    hi: f64,
}

impl Axis {
    fn new(values: impl Iterator<Item = f64>, pad: f64) -> Self {
        let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
        for v in values {
            lo = lo.min(v);
            hi = hi.max(v);
        }
        if !lo.is_finite() {
            (lo, hi) = (0.0, 1.0);
        }
        if hi - lo < 1e-9 {
            (lo, hi) = (lo - 0.5, hi + 0.5);
        }
        Self { lo: lo - pad, hi: hi + pad }
    }

    fn map(&self, v: f64, from: f64, to: f64) -> f64 {
        from + (v - self.lo) / (self.hi - self.lo) * (to - from)
    }
}

fn curves(kind: PlotKind, series: &[(String, Vec<SimResult>)]) -> String {
    // Points are (x, y) in plot units; BLER axes are log10.
    let points: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|(_, rows)| {
            rows.iter()
                .filter(|r| r.bler > 0.0)
                .map(|r| match kind {
                    PlotKind::Bler => (r.snr_db, r.bler.log10()),
                    _ => (-r.bler.log10(), r.avg_tmax),
                })
                .collect()
        })
        .collect();
    let all = || points.iter().flatten();
    let (x_name, y_name) = match kind {
        PlotKind::Bler => ("SNR [dB]", "BLER"),
        _ => ("BLER", "E[T_max]"),
    };
    let log_pad = if matches!(kind, PlotKind::Bler) { 0.0 } else { 0.2 };
    let mut xa = Axis::new(all().map(|p| p.0), log_pad);
    let mut ya = Axis::new(all().map(|p| p.1), 0.0);
    if matches!(kind, PlotKind::Bler) {
        (ya.lo, ya.hi) = (ya.lo.floor(), ya.hi.ceil().max(ya.lo.floor() + 1.0));
        xa = Axis { lo: xa.lo - 0.1, hi: xa.hi + 0.1 };
    } else {
        (xa.lo, xa.hi) = (xa.lo.floor(), xa.hi.ceil().max(xa.lo.floor() + 1.0));
        ya = Axis { lo: 0.0, hi: ya.hi * 1.1 };
    }
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let mut out = String::new();
    header(&mut out);
    let _ = writeln!(out, r##"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="#333"/>"##, x1 - x0, y0 - y1);
    // Ticks.
    for i in 0..=5 {
        let v = xa.lo + (xa.hi - xa.lo) * i as f64 / 5.0;
        let x = xa.map(v, x0, x1);
        let text = match kind {
            PlotKind::Bler => format!("{v:.2}"),
            _ => format!("1e-{v:.1}"),
        };
        let _ = writeln!(out, r##"<line x1="{x:.1}" y1="{y0}" x2="{x:.1}" y2="{}" stroke="#333"/>"##, y0 + 5.0);
        let _ = writeln!(out, r#"<text x="{x:.1}" y="{}" text-anchor="middle">{text}</text>"#, y0 + 18.0);
    }
    let y_ticks: Vec<f64> = match kind {
        PlotKind::Bler => (ya.lo as i32..=ya.hi as i32).map(f64::from).collect(),
        _ => (0..=5).map(|i| ya.hi * i as f64 / 5.0).collect(),
    };
    for v in y_ticks {
        let y = ya.map(v, y0, y1);
        let text = match kind {
            PlotKind::Bler => format!("1e{v:.0}"),
            _ => format!("{v:.1}"),
        };
        let _ = writeln!(out, r##"<line x1="{x0}" y1="{y:.1}" x2="{x1}" y2="{y:.1}" stroke="#ddd"/>"##);
        let _ = writeln!(out, r#"<text x="{}" y="{:.1}" text-anchor="end">{text}</text>"#, x0 - 6.0, y + 4.0);
    }
    let _ = writeln!(out, r#"<text x="{:.1}" y="{}" text-anchor="middle">{x_name}</text>"#, (x0 + x1) / 2.0, H - 10.0);
    let _ = writeln!(
        out,
        r#"<text x="16" y="{:.1}" text-anchor="middle" transform="rotate(-90 16 {:.1})">{y_name}</text>"#,
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    );
    for (k, ((name, _), pts)) in series.iter().zip(&points).enumerate() {
        let color = PALETTE[k % PALETTE.len()];
        let path: Vec<String> =
            pts.iter().map(|&(x, y)| format!("{:.1},{:.1}", xa.map(x, x0, x1), ya.map(y, y0, y1))).collect();
        if path.len() > 1 {
            let _ = writeln!(out, r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="1.5"/>"#, path.join(" "));
        }
        for &(x, y) in pts {
            let _ = writeln!(
                out,
                r#"<circle cx="{:.1}" cy="{:.1}" r="3" fill="{color}"/>"#,
                xa.map(x, x0, x1),
                ya.map(y, y0, y1)
            );
        }
        let ly = y1 + 16.0 * k as f64 + 10.0;
        let _ = writeln!(out, r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{color}" stroke-width="2"/>"#, x1 + 10.0, x1 + 30.0);
        let _ = writeln!(out, r#"<text x="{}" y="{}">{}</text>"#, x1 + 35.0, ly + 4.0, escape(name));
    }
    out.push_str("</svg>\n");
    out
}

fn grid(grids: &[Vec<GridCell>]) -> Result<String, String> {
    let first = grids.first().ok_or("no grid input")?;
    let max_s = first.iter().map(|c| c.s).max().unwrap_or(1);
    let max_k = first.iter().map(|c| c.k_prime).max().unwrap_or(1);
    let lookup = |g: &Vec<GridCell>, s: usize, k: usize| g.iter().find(|c| c.s == s && c.k_prime == k).map(|c| c.category);
    let (x0, x1, y0, y1) = (LEFT, W - RIGHT, H - BOTTOM, TOP);
    let cw = (x1 - x0) / (max_k + 1) as f64;
    let ch = (y0 - y1) / max_s as f64;
    let mut out = String::new();
    header(&mut out);
    for c in first {
        let cats: Vec<Option<Category>> = grids.iter().map(|g| lookup(g, c.s, c.k_prime)).collect();
        let color = match cats.as_slice() {
            [Some(Category::Infeasible), ..] => "#ff9900",
            [Some(Category::Large)] => "#1f4fd8",
            [Some(Category::Large), Some(Category::Large)] => "#8e44ad",
            [Some(Category::Large), _] => "#1f4fd8",
            [_, Some(Category::Large)] => "#2ca02c",
            _ => "#ffffff",
        };
        let x = x0 + c.k_prime as f64 * cw;
        let y = y0 - c.s as f64 * ch;
        let _ = writeln!(out, r#"<rect x="{x:.2}" y="{y:.2}" width="{:.2}" height="{:.2}" fill="{color}"/>"#, cw + 0.05, ch + 0.05);
    }
    let _ = writeln!(out, r##"<rect x="{x0}" y="{y1}" width="{}" height="{}" fill="none" stroke="#333"/>"##, x1 - x0, y0 - y1);
    let _ = writeln!(out, r#"<text x="{:.1}" y="{}" text-anchor="middle">K'</text>"#, (x0 + x1) / 2.0, H - 10.0);
    let _ = writeln!(out, r#"<text x="30" y="{:.1}" text-anchor="middle">S</text>"#, (y0 + y1) / 2.0);
    let _ = writeln!(out, r#"<text x="{x0}" y="{}">0</text><text x="{x1}" y="{}" text-anchor="end">{max_k}</text>"#, y0 + 16.0, y0 + 16.0);
    let _ = writeln!(out, r#"<text x="{}" y="{}" text-anchor="end">{max_s}</text>"#, x0 - 6.0, y1 + 10.0);
    let legend: &[(&str, &str)] = if grids.len() == 2 {
        &[("#1f4fd8", "BR large"), ("#2ca02c", "block large"), ("#8e44ad", "both large"), ("#ffffff", "neither"), ("#ff9900", "K' > N - S")]
    } else {
        &[("#1f4fd8", "large"), ("#ffffff", "small"), ("#ff9900", "K' > N - S")]
    };
    for (k, (color, name)) in legend.iter().enumerate() {
        let ly = y1 + 18.0 * k as f64;
        let _ = writeln!(out, r##"<rect x="{}" y="{ly}" width="12" height="12" fill="{color}" stroke="#333"/>"##, x1 + 10.0);
        let _ = writeln!(out, r#"<text x="{}" y="{}">{name}</text>"#, x1 + 28.0, ly + 10.0);
    }
    out.push_str("</svg>\n");
    Ok(out)
}
