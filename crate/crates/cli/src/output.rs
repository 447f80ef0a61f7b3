//! Report, table and plot files.
//!
//! Table schemas (one header row, comma separated):
//! - `checks.csv`: `name,value,relation,bound,passed`
//! - `lemma.csv`: `index,lemma,region,vertex,radius,lhs_norm,rhs_norm,residual`;
//!   `vertex` is empty for balls and for the kernel identity, `radius` for simplices.
//! - `convergence.csv`: `r,samples,mean,min,max,mean_grad_error,mean_value_error,grad_norm,value_norm,grad_ratio,cells_per_sample,rejected`;
//!   `grad_ratio` is empty on the first level.
//! - `convergence_samples.csv`: `r,sample,h_0..h_{n-1},grad_error,value_error`
//! - `bv_summary.csv`: `r,samples,exact_tv,min_tv,mean_tv,max_tv,max_ratio,bound_constant,rejected`
//! - `bv_samples.csv`: `r,sample,tv`
//! - `locate.csv`: `x_0..,base_0..,perm_0..,min_barycentric`

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use pwaffine::analysis::ConvergenceLevel;

use crate::run::{Relation, Results, RunError, RunReport};

/// Files written by [`write_outputs`].
#[derive(Clone, Debug, Default)]
pub struct WrittenFiles {
    pub report: PathBuf,
    pub tables: Vec<PathBuf>,
    pub plots: Vec<PathBuf>,
}

struct Table {
    name: &'static str,
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl Table {
    fn new(name: &'static str, header: &[&str]) -> Self {
        Self {
            name,
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    fn render(&self) -> String {
        let mut out = self.header.join(",");
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }
}

fn num(v: f64) -> String {
    format!("{v}")
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

fn indexed(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|k| format!("{prefix}_{k}")).collect()
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn tables(report: &RunReport) -> Vec<Table> {
    let mut checks = Table::new("checks", &["name", "value", "relation", "bound", "passed"]);
    for c in &report.checks {
        let rel = match c.relation {
            Relation::AtMost => "at-most",
            Relation::AtLeast => "at-least",
            Relation::Below => "below",
        };
        checks.rows.push(vec![
            quoted(&c.name),
            num(c.value),
            rel.into(),
            num(c.bound),
            c.passed.to_string(),
        ]);
    }
    let mut out = vec![checks];
    let n = report.config.dimension;
    match &report.results {
        Results::Lemma { residuals, .. } => {
            let mut t = Table::new(
                "lemma",
                &[
                    "index", "lemma", "region", "vertex", "radius", "lhs_norm", "rhs_norm",
                    "residual",
                ],
            );
            for (i, r) in residuals.iter().enumerate() {
                let c = &r.context;
                t.rows.push(vec![
                    i.to_string(),
                    c.lemma.to_string(),
                    c.region.clone(),
                    c.vertex.map(|v| v.to_string()).unwrap_or_default(),
                    c.radius.map(num).unwrap_or_default(),
                    num(norm(&r.lhs)),
                    num(norm(&r.rhs)),
                    num(r.residual),
                ]);
            }
            out.push(t);
        }
        Results::Converge { levels } => {
            let mut t = Table::new(
                "convergence",
                &[
                    "r",
                    "samples",
                    "mean",
                    "min",
                    "max",
                    "mean_grad_error",
                    "mean_value_error",
                    "grad_norm",
                    "value_norm",
                    "grad_ratio",
                    "cells_per_sample",
                    "rejected",
                ],
            );
            let mut header = vec!["r".to_string(), "sample".to_string()];
            header.extend(indexed("h", n));
            header.extend(["grad_error".to_string(), "value_error".to_string()]);
            let mut samples = Table {
                name: "convergence_samples",
                header,
                rows: Vec::new(),
            };
            for l in levels {
                let a = &l.averaged;
                t.rows.push(vec![
                    num(a.r),
                    a.samples.to_string(),
                    num(a.mean),
                    num(a.min),
                    num(a.max),
                    num(a.mean_grad_error),
                    num(a.mean_value_error),
                    num(l.grad_norm),
                    num(l.value_norm),
                    l.grad_ratio.map(num).unwrap_or_default(),
                    a.cells_per_sample.to_string(),
                    a.rejected.to_string(),
                ]);
                for (k, s) in a.per_sample.iter().enumerate() {
                    let mut row = vec![num(a.r), k.to_string()];
                    row.extend(s.h.iter().map(|c| num(*c)));
                    row.extend([num(s.grad_error_p), num(s.value_error_q)]);
                    samples.rows.push(row);
                }
            }
            out.push(t);
            out.push(samples);
        }
        Results::Bv { studies } => {
            let mut summary = Table::new(
                "bv_summary",
                &[
                    "r",
                    "samples",
                    "exact_tv",
                    "min_tv",
                    "mean_tv",
                    "max_tv",
                    "max_ratio",
                    "bound_constant",
                    "rejected",
                ],
            );
            let mut samples = Table::new("bv_samples", &["r", "sample", "tv"]);
            for s in studies {
                summary.rows.push(vec![
                    num(s.r),
                    s.samples.to_string(),
                    num(s.exact_tv),
                    num(s.min_tv),
                    num(s.mean_tv),
                    num(s.max_tv),
                    num(s.max_ratio),
                    num(s.bound_constant),
                    s.rejected.to_string(),
                ]);
                for (k, tv) in s.per_sample.iter().enumerate() {
                    samples.rows.push(vec![num(s.r), k.to_string(), num(*tv)]);
                }
            }
            out.push(summary);
            out.push(samples);
        }
        Results::LocateDemo { points, .. } => {
            let mut header = indexed("x", n);
            header.extend(indexed("base", n));
            header.extend(indexed("perm", n));
            header.push("min_barycentric".into());
            let mut t = Table {
                name: "locate",
                header,
                rows: Vec::new(),
            };
            for p in points {
                let mut row: Vec<String> = p.x.iter().map(|c| num(*c)).collect();
                row.extend(p.base.iter().map(|b| b.to_string()));
                row.extend(p.perm.iter().map(|b| b.to_string()));
                row.push(num(p
                    .barycentric
                    .iter()
                    .copied()
                    .fold(f64::INFINITY, f64::min)));
                t.rows.push(row);
            }
            out.push(t);
        }
    }
    out
}

struct Series<'a> {
    label: &'a str,
    colour: &'a str,
    points: Vec<(f64, f64)>,
}

/// Log-log plot of the averaged error and its gradient and value norms against `r`.
pub fn convergence_svg(levels: &[ConvergenceLevel]) -> String {
    let series = [
        Series {
            label: "mean averaged error",
            colour: "#1f77b4",
            points: levels
                .iter()
                .map(|l| (l.averaged.r, l.averaged.mean))
                .collect(),
        },
        Series {
            label: "gradient error norm",
            colour: "#d62728",
            points: levels.iter().map(|l| (l.averaged.r, l.grad_norm)).collect(),
        },
        Series {
            label: "value error norm",
            colour: "#2ca02c",
            points: levels
                .iter()
                .map(|l| (l.averaged.r, l.value_norm))
                .collect(),
        },
    ];
    let logs: Vec<(f64, f64)> = series
        .iter()
        .flat_map(|s| s.points.iter())
        .filter(|(x, y)| *x > 0.0 && *y > 0.0)
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    let (w, h, margin) = (640.0, 480.0, 70.0);
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    if logs.is_empty() {
        svg.push_str("</svg>\n");
        return svg;
    }
    let bounds = |f: fn(&(f64, f64)) -> f64| {
        let lo = logs.iter().map(f).fold(f64::INFINITY, f64::min).floor();
        let hi = logs.iter().map(f).fold(f64::NEG_INFINITY, f64::max).ceil();
        (lo, if hi > lo { hi } else { lo + 1.0 })
    };
    let (x0, x1) = bounds(|p| p.0);
    let (y0, y1) = bounds(|p| p.1);
    let px = |lx: f64| margin + (lx - x0) / (x1 - x0) * (w - 2.0 * margin);
    let py = |ly: f64| h - margin - (ly - y0) / (y1 - y0) * (h - 2.0 * margin);

    let _ = writeln!(
        svg,
        r#"<rect x="{margin}" y="{margin}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        w - 2.0 * margin,
        h - 2.0 * margin
    );
    for d in (x0 as i32)..=(x1 as i32) {
        let x = px(d as f64);
        let _ = writeln!(
            svg,
            r##"<line x1="{x:.2}" y1="{margin}" x2="{x:.2}" y2="{:.2}" stroke="#ddd"/><text x="{x:.2}" y="{:.2}" font-size="12" text-anchor="middle">1e{d}</text>"##,
            h - margin,
            h - margin + 18.0
        );
    }
    for d in (y0 as i32)..=(y1 as i32) {
        let y = py(d as f64);
        let _ = writeln!(
            svg,
            r##"<line x1="{margin}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="#ddd"/><text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">1e{d}</text>"##,
            w - margin,
            margin - 6.0,
            y + 4.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">r</text>"#,
        w / 2.0,
        h - 20.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" font-size="14" text-anchor="middle" transform="rotate(-90 18 {:.2})">error</text>"#,
        h / 2.0,
        h / 2.0
    );
    for (k, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .points
            .iter()
            .filter(|(x, y)| *x > 0.0 && *y > 0.0)
            .map(|(x, y)| format!("{:.2},{:.2}", px(x.log10()), py(y.log10())))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline points="{}" fill="none" stroke="{}" stroke-width="2"/>"#,
            pts.join(" "),
            s.colour
        );
        for p in &pts {
            let (cx, cy) = p.split_once(',').unwrap_or(("0", "0"));
            let _ = writeln!(
                svg,
                r#"<circle cx="{cx}" cy="{cy}" r="3" fill="{}"/>"#,
                s.colour
            );
        }
        let ly = margin + 16.0 + 18.0 * k as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{}" stroke-width="2"/><text x="{:.2}" y="{:.2}" font-size="12">{}</text>"#,
            margin + 10.0,
            margin + 30.0,
            s.colour,
            margin + 36.0,
            ly + 4.0,
            s.label
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes `report.json`, the CSV tables and, for sweeps, the SVG plot under `dir`.
pub fn write_outputs(report: &RunReport, dir: &Path) -> Result<WrittenFiles, RunError> {
    let paths = &report.config.output;
    let table_dir = dir.join(&paths.tables);
    fs::create_dir_all(&table_dir)?;
    let mut written = WrittenFiles::default();
    for t in tables(report) {
        let path = table_dir.join(format!("{}.csv", t.name));
        fs::write(&path, t.render())?;
        written.tables.push(path);
    }
    if let Results::Converge { levels } = &report.results {
        let plot_dir = dir.join(&paths.plots);
        fs::create_dir_all(&plot_dir)?;
        let path = plot_dir.join("convergence.svg");
        fs::write(&path, convergence_svg(levels))?;
        written.plots.push(path);
    }
    let path = dir.join(&paths.report);
    let mut json = serde_json::to_string_pretty(report)?;
    json.push('\n');
    fs::write(&path, json)?;
    written.report = path;
    Ok(written)
}
