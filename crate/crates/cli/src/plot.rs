use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use hdch::diagnostics::{read_csv, DiagRecord};
use hdch::Field;

use crate::error::{CliError, CliResult};

const WIDTH: f64 = 720.0;
const PANEL: f64 = 260.0;
const MARGIN: f64 = 70.0;

/// Blue-white-red map of `[-1, 1]`; values outside are clamped.
pub fn colormap(v: f64) -> [u8; 3] {
    let v = v.clamp(-1.0, 1.0);
    let fade = |t: f64| (255.0 * t).round() as u8;
    if v < 0.0 {
        [fade(1.0 + v), fade(1.0 + v), 255]
    } else {
        [255, fade(1.0 - v), fade(1.0 - v)]
    }
}

/// Binary PPM, first row at the top of the domain (largest y).
pub fn heatmap_ppm(phi: &Field) -> Vec<u8> {
    let g = phi.grid();
    let mut out = format!("P6\n{} {}\n255\n", g.nx, g.ny).into_bytes();
    for j in (0..g.ny).rev() {
        for i in 0..g.nx {
            out.extend_from_slice(&colormap(phi.values()[g.index(i, j)]));
        }
    }
    out
}

fn panel(svg: &mut String, top: f64, title: &str, t: &[f64], y: &[f64]) {
    let (t0, t1) = (t.first().copied().unwrap_or(0.0), t.last().copied().unwrap_or(1.0));
    let finite = y.iter().copied().filter(|v| v.is_finite());
    let (mut lo, mut hi) = finite.fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(v), b.max(v)));
    if !lo.is_finite() {
        (lo, hi) = (0.0, 1.0);
    }
    if hi - lo <= 1e-12 * hi.abs().max(lo.abs()) {
        let pad = 0.5 * hi.abs().max(1e-300);
        (lo, hi) = (lo - pad, hi + pad);
    }
    let span_t = if t1 > t0 { t1 - t0 } else { 1.0 };
    let (x0, w, h) = (MARGIN, WIDTH - 1.5 * MARGIN, PANEL - 50.0);
    let px = |tv: f64| x0 + w * (tv - t0) / span_t;
    let py = |yv: f64| top + 30.0 + h * (1.0 - (yv - lo) / (hi - lo));
    let _ = writeln!(svg, r#"<text x="{:.2}" y="{:.2}" font-size="14">{title}</text>"#, x0, top + 18.0);
    let _ = writeln!(
        svg,
        r#"<rect x="{x0:.2}" y="{:.2}" width="{w:.2}" height="{h:.2}" fill="none" stroke="black"/>"#,
        top + 30.0
    );
    for (label, yv) in [(hi, hi), (lo, lo)] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="end">{label:.6e}</text>"#,
            x0 - 4.0,
            py(yv) + 4.0
        );
    }
    for tv in [t0, t1] {
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{:.2}" font-size="10" text-anchor="middle">{tv:.4e}</text>"#,
            px(tv),
            top + 30.0 + h + 14.0
        );
    }
    let pts: Vec<String> = t
        .iter()
        .zip(y)
        .filter(|(_, v)| v.is_finite())
        .map(|(&tv, &yv)| format!("{:.2},{:.2}", px(tv), py(yv)))
        .collect();
    let _ = writeln!(svg, r##"<polyline fill="none" stroke="#1f4e9c" stroke-width="1.5" points="{}"/>"##, pts.join(" "));
}

/// Energy and higher-order energy against time, one panel each.
pub fn diagnostics_svg(records: &[DiagRecord]) -> String {
    let t: Vec<f64> = records.iter().map(|r| r.t).collect();
    let e: Vec<f64> = records.iter().map(|r| r.energy).collect();
    let h: Vec<f64> = records.iter().map(|r| r.h).collect();
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{}" font-family="sans-serif">"#,
        2.0 * PANEL + 10.0
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    panel(&mut svg, 0.0, "energy E(t)", &t, &e);
    panel(&mut svg, PANEL, "higher-order energy H(t)", &t, &h);
    svg.push_str("</svg>\n");
    svg
}

/// Plots a `diag.csv` (SVG) or an `.hdch` snapshot (PPM) into `out_dir`.
pub fn plot(file: &Path, out_dir: &Path) -> CliResult<PathBuf> {
    let bytes = fs::read(file).map_err(CliError::io(file))?;
    let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or("plot");
    fs::create_dir_all(out_dir).map_err(CliError::io(out_dir))?;
    let bad = |e: hdch::Error| CliError::Config(format!("{}: {e}", file.display()));
    let (path, body) = if bytes.starts_with(b"HDCH") {
        let phi = Field::read_snapshot(&bytes[..]).map_err(bad)?;
        (out_dir.join(format!("{stem}.ppm")), heatmap_ppm(&phi))
    } else {
        let records = read_csv(&bytes[..]).map_err(bad)?;
        (out_dir.join(format!("{stem}.svg")), diagnostics_svg(&records).into_bytes())
    };
    fs::write(&path, body).map_err(CliError::io(&path))?;
    Ok(path)
}
