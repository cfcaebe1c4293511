//! CSV and SVG output for sweep results.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::experiment::{ResultRow, SweepVar};
use crate::receivers::Scheme;

pub const CSV_HEADER: &str = "scheme,sweep_var,sweep_value,trials,system_failures,failure_rate_system,failure_rate_per_destination,stderr_system,master_seed";

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("rows mix sweep variables")]
    MixedSweep,
}

fn write_file(path: &Path, contents: &str) -> Result<(), ReportError> {
    fs::write(path, contents).map_err(|source| ReportError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// One line of the results CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRecord {
    pub scheme: String,
    pub sweep_var: String,
    pub sweep_value: f64,
    pub trials: u64,
    pub system_failures: u64,
    pub failure_rate_system: f64,
    pub failure_rate_per_destination: f64,
    pub stderr_system: f64,
    pub master_seed: u64,
}

impl From<&ResultRow> for CsvRecord {
    fn from(r: &ResultRow) -> Self {
        Self {
            scheme: r.scheme.name().to_string(),
            sweep_var: r.sweep_var.name().to_string(),
            sweep_value: r.sweep_value,
            trials: r.trials,
            system_failures: r.system_failures,
            failure_rate_system: r.failure_rate_system(),
            failure_rate_per_destination: r.failure_rate_per_destination(),
            stderr_system: r.stderr_system(),
            master_seed: r.master_seed,
        }
    }
}

pub fn csv_string(rows: &[ResultRow]) -> String {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{:.6},{:.6},{:.6},{}",
            r.scheme,
            r.sweep_var,
            r.sweep_var.format_value(r.sweep_value),
            r.trials,
            r.system_failures,
            r.failure_rate_system(),
            r.failure_rate_per_destination(),
            r.stderr_system(),
            r.master_seed
        );
    }
    out
}

pub fn emit_csv(rows: &[ResultRow], path: &Path) -> Result<(), ReportError> {
    write_file(path, &csv_string(rows))
}

fn field<T: FromStr>(cols: &[&str], i: usize, line: usize, name: &str) -> Result<T, ReportError> {
    cols[i].trim().parse().map_err(|_| ReportError::Parse {
        line,
        msg: format!("bad {name} {:?}", cols[i]),
    })
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRecord>, ReportError> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end() == CSV_HEADER => {}
        _ => {
            return Err(ReportError::Parse {
                line: 1,
                msg: "missing or unexpected header".into(),
            })
        }
    }
    let mut out = Vec::new();
    for (idx, line) in lines {
        let n = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 9 {
            return Err(ReportError::Parse {
                line: n,
                msg: format!("expected 9 fields, found {}", cols.len()),
            });
        }
        out.push(CsvRecord {
            scheme: cols[0].to_string(),
            sweep_var: cols[1].to_string(),
            sweep_value: field(&cols, 2, n, "sweep_value")?,
            trials: field(&cols, 3, n, "trials")?,
            system_failures: field(&cols, 4, n, "system_failures")?,
            failure_rate_system: field(&cols, 5, n, "failure_rate_system")?,
            failure_rate_per_destination: field(&cols, 6, n, "failure_rate_per_destination")?,
            stderr_system: field(&cols, 7, n, "stderr_system")?,
            master_seed: field(&cols, 8, n, "master_seed")?,
        });
    }
    Ok(out)
}

/// Which failure rate goes on the y-axis.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Metric {
    #[default]
    PerDestination,
    System,
}

impl FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "per-destination" | "per_destination" | "destination" => Ok(Metric::PerDestination),
            "system" => Ok(Metric::System),
            other => Err(format!("unknown metric {other:?}")),
        }
    }
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const LEFT: f64 = 70.0;
const RIGHT: f64 = 150.0;
const TOP: f64 = 30.0;
const BOTTOM: f64 = 55.0;

fn color(scheme: &str) -> &'static str {
    match scheme {
        "routing" => "#d62728",
        "rlnc" => "#1f77b4",
        "subspace" => "#2ca02c",
        _ => "#7f7f7f",
    }
}

/// Renders records as a standalone SVG line chart, one polyline per scheme.
pub fn render_svg(records: &[CsvRecord], metric: Metric) -> Result<String, ReportError> {
    if records.windows(2).any(|w| w[0].sweep_var != w[1].sweep_var) {
        return Err(ReportError::MixedSweep);
    }
    let var = records.first().map_or("p", |r| r.sweep_var.as_str());
    let (xmin, xmax) = records.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
        (lo.min(r.sweep_value), hi.max(r.sweep_value))
    });
    let (xmin, xmax) = if records.is_empty() {
        (0.0, 1.0)
    } else if xmax > xmin {
        (xmin, xmax)
    } else {
        (xmin - 0.5, xmax + 0.5)
    };
    let plot_w = WIDTH - LEFT - RIGHT;
    let plot_h = HEIGHT - TOP - BOTTOM;
    let sx = |x: f64| LEFT + (x - xmin) / (xmax - xmin) * plot_w;
    let sy = |y: f64| TOP + (1.0 - y) * plot_h;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(s, r#"<rect width="{WIDTH}" height="{HEIGHT}" fill="white"/>"#);
    for i in 0..=5 {
        let y = i as f64 / 5.0;
        let py = sy(y);
        let _ = writeln!(
            s,
            r##"<line x1="{LEFT:.2}" y1="{py:.2}" x2="{:.2}" y2="{py:.2}" stroke="#dddddd"/>"##,
            LEFT + plot_w
        );
        let _ = writeln!(
            s,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="end">{y:.1}</text>"#,
            LEFT - 6.0,
            py + 4.0
        );
    }
    for i in 0..=5 {
        let x = xmin + (xmax - xmin) * i as f64 / 5.0;
        let px = sx(x);
        let label = if var == "errors" { format!("{x:.0}") } else { format!("{x:.2}") };
        let _ = writeln!(
            s,
            r##"<line x1="{px:.2}" y1="{:.2}" x2="{px:.2}" y2="{:.2}" stroke="#000000"/>"##,
            TOP + plot_h,
            TOP + plot_h + 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{px:.2}" y="{:.2}" text-anchor="middle">{label}</text>"#,
            TOP + plot_h + 18.0
        );
    }
    let _ = writeln!(
        s,
        r##"<rect x="{LEFT}" y="{TOP}" width="{plot_w}" height="{plot_h}" fill="none" stroke="#000000"/>"##
    );
    let xlabel = if var == "errors" { "number of bit errors in the data matrix" } else { "interference probability p" };
    let ylabel = match metric {
        Metric::PerDestination => "average decoding failure probability",
        Metric::System => "system decoding failure probability",
    };
    let _ = writeln!(
        s,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{xlabel}</text>"#,
        LEFT + plot_w / 2.0,
        HEIGHT - 12.0
    );
    let _ = writeln!(
        s,
        r#"<text x="16" y="{:.2}" text-anchor="middle" transform="rotate(-90 16 {:.2})">{ylabel}</text>"#,
        TOP + plot_h / 2.0,
        TOP + plot_h / 2.0
    );

    let mut schemes: Vec<&str> = Vec::new();
    for r in records {
        if !schemes.contains(&r.scheme.as_str()) {
            schemes.push(&r.scheme);
        }
    }
    for (k, scheme) in schemes.iter().enumerate() {
        let c = color(scheme);
        let pts: Vec<(f64, f64)> = records
            .iter()
            .filter(|r| r.scheme == *scheme)
            .map(|r| {
                let y = match metric {
                    Metric::PerDestination => r.failure_rate_per_destination,
                    Metric::System => r.failure_rate_system,
                };
                (sx(r.sweep_value), sy(y.clamp(0.0, 1.0)))
            })
            .collect();
        if pts.len() > 1 {
            let path: Vec<String> = pts.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                s,
                r#"<polyline fill="none" stroke="{c}" stroke-width="2" points="{}"/>"#,
                path.join(" ")
            );
        }
        for (x, y) in &pts {
            let _ = writeln!(s, r#"<circle cx="{x:.2}" cy="{y:.2}" r="3" fill="{c}"/>"#);
        }
        let ly = TOP + 15.0 + 20.0 * k as f64;
        let lx = LEFT + plot_w + 15.0;
        let _ = writeln!(
            s,
            r#"<line x1="{lx:.2}" y1="{ly:.2}" x2="{:.2}" y2="{ly:.2}" stroke="{c}" stroke-width="2"/>"#,
            lx + 25.0
        );
        let _ = writeln!(s, r#"<text x="{:.2}" y="{:.2}">{scheme}</text>"#, lx + 32.0, ly + 4.0);
    }
    s.push_str("</svg>\n");
    Ok(s)
}

pub fn emit_plot(rows: &[ResultRow], path: &Path, metric: Metric) -> Result<(), ReportError> {
    let records: Vec<CsvRecord> = rows.iter().map(CsvRecord::from).collect();
    write_file(path, &render_svg(&records, metric)?)
}

/// Scheme names present in `rows`, for callers that only hold CSV records.
pub fn schemes_in(records: &[CsvRecord]) -> Vec<Scheme> {
    let mut out: Vec<Scheme> = records.iter().filter_map(|r| r.scheme.parse().ok()).collect();
    out.sort();
    out.dedup();
    out
}

/// Sweep variable of a record set, if consistent.
pub fn sweep_var_of(records: &[CsvRecord]) -> Option<SweepVar> {
    records.first().and_then(|r| r.sweep_var.parse().ok())
}
