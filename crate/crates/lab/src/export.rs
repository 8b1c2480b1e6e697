//! CSV, JSON and SVG output of a [`RunReport`].

use crate::error::{io, Result};
use crate::report::{RunRecord, RunReport};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "csv" => Ok(Self::Csv),
            "json" => Ok(Self::Json),
            "svg" => Ok(Self::Svg),
            other => Err(format!("unknown format `{other}` (csv, json, svg)")),
        }
    }
}

/// `t,s,x,D` on the interpolation grid, one row per point, 17 significant
/// digits.
pub fn csv(run: &RunRecord) -> String {
    let series = &run.series;
    let mut out = String::with_capacity(80 * (series.t.len() + 1));
    out.push_str("t,s,x,D\n");
    for i in 0..series.t.len() {
        writeln!(
            out,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            series.t[i], series.s[i], series.x[i], series.d[i]
        )
        .expect("writing to a String");
    }
    out
}

pub fn json(report: &RunReport) -> String {
    report.to_json()
}

const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f",
    "#bcbd22", "#17becf",
];
const PANEL_W: f64 = 440.0;
const PANEL_H: f64 = 280.0;
const MARGIN: f64 = 56.0;

struct Panel<'a> {
    id: &'a str,
    title: &'a str,
    x_label: &'a str,
    curves: Vec<Vec<(f64, f64)>>,
    markers: bool,
}

/// Four panels in a 2 × 2 layout: `s(t)`, `D(t)`, `x(t)` and
/// `log10 |R_j|` at the collocation nodes, one curve per run.
pub fn svg(report: &RunReport) -> String {
    let runs = &report.runs;
    let series_of = |f: fn(&RunRecord) -> &Vec<f64>| -> Vec<Vec<(f64, f64)>> {
        runs.iter()
            .map(|r| {
                r.series
                    .t
                    .iter()
                    .copied()
                    .zip(f(r).iter().copied())
                    .collect()
            })
            .collect()
    };
    let residual: Vec<Vec<(f64, f64)>> = runs
        .iter()
        .map(|r| {
            r.solution
                .residual_nodes
                .iter()
                .enumerate()
                .map(|(j, v)| (r.solution.grid.node(j), v.max(1e-18).log10()))
                .collect()
        })
        .collect();
    let panels = [
        Panel {
            id: "substrate",
            title: "substrate s(t)",
            x_label: "t",
            curves: series_of(|r| &r.series.s),
            markers: false,
        },
        Panel {
            id: "dilution",
            title: "dilution rate D(t)",
            x_label: "t",
            curves: series_of(|r| &r.series.d),
            markers: false,
        },
        Panel {
            id: "biomass",
            title: "biomass x(t)",
            x_label: "t",
            curves: series_of(|r| &r.series.x),
            markers: false,
        },
        Panel {
            id: "residual",
            title: "log10 |collocation residual|",
            x_label: "t_j",
            curves: residual,
            markers: true,
        },
    ];

    let width = 2.0 * (PANEL_W + MARGIN) + MARGIN;
    let height = 2.0 * (PANEL_H + MARGIN) + 2.0 * MARGIN;
    let mut out = String::new();
    let w = &mut out;
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        w,
        r#"<text x="{}" y="{}" font-size="15" text-anchor="middle">{}</text>"#,
        width / 2.0,
        MARGIN * 0.6,
        escape(&report.scenario.name)
    );
    for (i, panel) in panels.iter().enumerate() {
        let ox = MARGIN + (i % 2) as f64 * (PANEL_W + MARGIN);
        let oy = 1.2 * MARGIN + (i / 2) as f64 * (PANEL_H + MARGIN);
        draw_panel(w, panel, ox, oy);
    }
    let _ = writeln!(w, "</svg>");
    out
}

fn draw_panel(w: &mut String, panel: &Panel<'_>, ox: f64, oy: f64) {
    let pts = panel.curves.iter().flatten();
    let (mut x0, mut x1, mut y0, mut y1) = (
        f64::INFINITY,
        f64::NEG_INFINITY,
        f64::INFINITY,
        f64::NEG_INFINITY,
    );
    for &(x, y) in pts {
        if x.is_finite() && y.is_finite() {
            x0 = x0.min(x);
            x1 = x1.max(x);
            y0 = y0.min(y);
            y1 = y1.max(y);
        }
    }
    if !x0.is_finite() {
        (x0, x1, y0, y1) = (0.0, 1.0, 0.0, 1.0);
    }
    if x1 - x0 <= 0.0 {
        x1 = x0 + 1.0;
    }
    let pad = if y1 - y0 > 0.0 {
        0.05 * (y1 - y0)
    } else {
        0.05 * y0.abs().max(1.0)
    };
    y0 -= pad;
    y1 += pad;
    let sx = |x: f64| ox + (x - x0) / (x1 - x0) * PANEL_W;
    let sy = |y: f64| oy + PANEL_H - (y - y0) / (y1 - y0) * PANEL_H;

    let _ = writeln!(w, r#"<g class="panel" id="panel-{}">"#, panel.id);
    let _ = writeln!(
        w,
        r##"<rect x="{ox}" y="{oy}" width="{PANEL_W}" height="{PANEL_H}" fill="none" stroke="#333"/>"##
    );
    let _ = writeln!(
        w,
        r#"<text x="{}" y="{}" text-anchor="middle">{}</text>"#,
        ox + PANEL_W / 2.0,
        oy - 8.0,
        escape(panel.title)
    );
    for k in 0..=4 {
        let fx = x0 + (x1 - x0) * k as f64 / 4.0;
        let fy = y0 + (y1 - y0) * k as f64 / 4.0;
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle" font-size="10">{}</text>"#,
            sx(fx),
            oy + PANEL_H + 14.0,
            tick(fx)
        );
        let _ = writeln!(
            w,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end" font-size="10">{}</text>"#,
            ox - 4.0,
            sy(fy) + 3.0,
            tick(fy)
        );
    }
    let _ = writeln!(
        w,
        r#"<text x="{}" y="{}" text-anchor="middle" font-size="11">{}</text>"#,
        ox + PANEL_W / 2.0,
        oy + PANEL_H + 30.0,
        panel.x_label
    );
    for (c, curve) in panel.curves.iter().enumerate() {
        let color = PALETTE[c % PALETTE.len()];
        let mut path = String::new();
        for &(x, y) in curve.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
            let _ = write!(path, "{:.2},{:.2} ", sx(x), sy(y));
        }
        if panel.markers {
            let _ = writeln!(w, r#"<g fill="{color}" fill-opacity="0.6">"#);
            for &(x, y) in curve.iter().filter(|(x, y)| x.is_finite() && y.is_finite()) {
                let _ = writeln!(
                    w,
                    r#"<circle cx="{:.2}" cy="{:.2}" r="1.6"/>"#,
                    sx(x),
                    sy(y)
                );
            }
            let _ = writeln!(w, "</g>");
        } else {
            let _ = writeln!(
                w,
                r#"<polyline fill="none" stroke="{color}" stroke-width="1.2" points="{}"/>"#,
                path.trim_end()
            );
        }
    }
    let _ = writeln!(w, "</g>");
}

fn tick(v: f64) -> String {
    if v != 0.0 && (v.abs() < 1e-3 || v.abs() >= 1e4) {
        format!("{v:.2e}")
    } else {
        format!("{v:.3}")
    }
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}

fn file_stem(s: &str) -> String {
    s.chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.' {
                c
            } else {
                '_'
            }
        })
        .collect()
}

/// Writes the requested formats into `dir` and returns the paths.
///
/// CSV goes to `<name>.csv` for single-run reports and to
/// `<name>-<label>.csv` per run otherwise.
pub fn write_outputs(report: &RunReport, dir: &Path, formats: &[Format]) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir).map_err(io(dir))?;
    let stem = file_stem(&report.scenario.name);
    let mut written = Vec::new();
    let mut put = |name: String, body: String| -> Result<()> {
        let path = dir.join(name);
        std::fs::write(&path, body).map_err(io(&path))?;
        written.push(path);
        Ok(())
    };
    for format in formats {
        match format {
            Format::Json => put(format!("{stem}.json"), json(report))?,
            Format::Svg => put(format!("{stem}.svg"), svg(report))?,
            Format::Csv if report.runs.len() == 1 => {
                put(format!("{stem}.csv"), csv(&report.runs[0]))?
            }
            Format::Csv => {
                for run in &report.runs {
                    put(format!("{stem}-{}.csv", file_stem(&run.label)), csv(run))?;
                }
            }
        }
    }
    Ok(written)
}
