use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::sweep::SweepReport;
use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub const CSV_HEADER: &str = "h,A,rho_p,tv,rhs1,rhs2,psup,prhs,ok1,ok2,okp";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(Error::param(format!("unknown report format {other:?}"))),
        }
    }
}

/// Parses a comma-separated format list such as `csv,json,svg`.
pub fn parse_formats(list: &str) -> Result<Vec<Format>> {
    list.split(',').filter(|s| !s.trim().is_empty()).map(Format::from_str).collect()
}

pub fn to_csv<S: Scalar>(report: &SweepReport<S>) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        writeln!(
            out,
            "{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{},{},{}",
            r.h, r.a, r.rho_p, r.tv, r.rhs1, r.rhs2, r.psup, r.prhs, r.ok1, r.ok2, r.okp
        )
        .expect("writing to a string");
    }
    out
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

/// Log–log plot of measured `ρ_p` and both certificate curves against `A`.
pub fn to_svg<S: Scalar>(report: &SweepReport<S>) -> String {
    let series: [(&str, &str, Vec<(f64, f64)>); 3] = [
        ("measured rho_p", "#1f77b4", report.rows.iter().map(|r| (r.a.f64(), r.rho_p.f64())).collect()),
        ("lemma1 rhs", "#d62728", report.rows.iter().map(|r| (r.a.f64(), r.rhs1.f64())).collect()),
        ("lemma2 rhs", "#2ca02c", report.rows.iter().map(|r| (r.a.f64(), r.rhs2.f64())).collect()),
    ];
    let logs: Vec<Vec<(f64, f64)>> = series
        .iter()
        .map(|(_, _, pts)| {
            pts.iter().filter(|(x, y)| *x > 0.0 && *y > 0.0).map(|(x, y)| (x.log10(), y.log10())).collect()
        })
        .collect();
    let all: Vec<(f64, f64)> = logs.iter().flatten().copied().collect();
    let range = |f: fn(&(f64, f64)) -> f64| {
        let lo = all.iter().map(f).fold(f64::INFINITY, f64::min);
        let hi = all.iter().map(f).fold(f64::NEG_INFINITY, f64::max);
        if lo.is_finite() && hi > lo {
            (lo, hi)
        } else if lo.is_finite() {
            (lo - 1.0, lo + 1.0)
        } else {
            (0.0, 1.0)
        }
    };
    let (x0, x1) = range(|p| p.0);
    let (y0, y1) = range(|p| p.1);
    let sx = |x: f64| MARGIN + (x - x0) / (x1 - x0) * (WIDTH - 2.0 * MARGIN);
    let sy = |y: f64| HEIGHT - MARGIN - (y - y0) / (y1 - y0) * (HEIGHT - 2.0 * MARGIN);

    let mut out = String::new();
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#).unwrap();
    writeln!(out, r#"<title>{}</title>"#, report.scenario).unwrap();
    writeln!(
        out,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        WIDTH - 2.0 * MARGIN,
        HEIGHT - 2.0 * MARGIN
    )
    .unwrap();
    writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">log10 A</text>"#, WIDTH / 2.0, HEIGHT - 15.0).unwrap();
    writeln!(out, r#"<text x="15" y="{}" transform="rotate(-90 15 {})" text-anchor="middle">log10 value</text>"#, HEIGHT / 2.0, HEIGHT / 2.0).unwrap();
    for (x, anchor) in [(x0, "start"), (x1, "end")] {
        writeln!(out, r#"<text x="{:.2}" y="{}" text-anchor="{anchor}">{x:.2}</text>"#, sx(x), HEIGHT - MARGIN + 18.0).unwrap();
    }
    for y in [y0, y1] {
        writeln!(out, r#"<text x="{}" y="{:.2}" text-anchor="end">{y:.2}</text>"#, MARGIN - 6.0, sy(y)).unwrap();
    }
    for (k, ((label, color, _), pts)) in series.iter().zip(&logs).enumerate() {
        let points: Vec<String> = pts.iter().map(|(x, y)| format!("{:.2},{:.2}", sx(*x), sy(*y))).collect();
        writeln!(out, r#"<polyline fill="none" stroke="{color}" stroke-width="2" points="{}"/>"#, points.join(" ")).unwrap();
        if k == 0 {
            for (x, y) in pts {
                writeln!(out, r#"<circle cx="{:.2}" cy="{:.2}" r="3" fill="{color}"/>"#, sx(*x), sy(*y)).unwrap();
            }
        }
        writeln!(out, r#"<text x="{}" y="{}" fill="{color}">{label}</text>"#, MARGIN + 10.0, MARGIN + 18.0 * (k as f64 + 1.0)).unwrap();
    }
    out.push_str("</svg>\n");
    out
}

/// Writes `<scenario>.csv`, `.json` and `.svg` into `dir` as requested and
/// returns the paths written.
pub fn emit_report<S: Scalar>(report: &SweepReport<S>, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    for format in formats {
        let (ext, body) = match format {
            Format::Csv => ("csv", to_csv(report)),
            Format::Json => ("json", report.to_json()),
            Format::Svg => ("svg", to_svg(report)),
        };
        let path = dir.join(format!("{}.{ext}", report.scenario));
        fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}
