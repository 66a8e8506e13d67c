//! Run outputs: `diagnostics.csv`, `summary.json` and `snap_<i>.dat`.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::config::SimConfig;
use crate::diagnostics::{decay_fit, DiagnosticsRow};
use crate::error::{Error, Result};
use crate::field::{Field, Grid};
use crate::pucci::chi_bound_audit;
use crate::sim::{Breakdown, RunOutput, Snapshot};
use crate::verify::Check;

pub fn csv_string(rows: &[DiagnosticsRow]) -> String {
    let mut out = String::with_capacity(rows.len() * 200);
    out.push_str(DiagnosticsRow::HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.csv_line());
        out.push('\n');
    }
    out
}

pub fn write_csv(path: &Path, rows: &[DiagnosticsRow]) -> Result<()> {
    fs::write(path, csv_string(rows))?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Vec<DiagnosticsRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(csv_error)?;
    let header: Vec<String> = reader.headers().map_err(csv_error)?.iter().map(str::to_owned).collect();
    if header.join(",") != DiagnosticsRow::HEADER {
        return Err(Error::InvalidProblem(format!(
            "unexpected diagnostics header `{}`",
            header.join(",")
        )));
    }
    reader.deserialize().map(|r| r.map_err(csv_error)).collect()
}

fn csv_error(e: csv::Error) -> Error {
    Error::InvalidProblem(format!("diagnostics table: {e}"))
}

fn push_block(out: &mut String, name: &str, values: &Field) {
    let _ = writeln!(out, "# {name}");
    for row in values.values().rows() {
        let line: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
        out.push_str(&line.join(" "));
        out.push('\n');
    }
}

/// Header `N_r N_θ t`, then the blocks `q` and `J` (one radial row per
/// line, θ fastest) and `h` (one line).
pub fn snapshot_string(grid: &Grid, snap: &Snapshot) -> String {
    let s = &snap.state;
    let mut out = format!("{} {} {:e}\n", grid.n_r(), grid.n_theta(), s.t);
    push_block(&mut out, "q", &s.q);
    let _ = writeln!(out, "# h");
    let h: Vec<String> = s.h.values().iter().map(|v| format!("{v:e}")).collect();
    out.push_str(&h.join(" "));
    out.push('\n');
    push_block(&mut out, "J", &s.gauge.j);
    out
}

/// A snapshot file read back: `(n_r, n_θ, t, q, h, J)` with `q`, `J` row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotData {
    pub n_r: usize,
    pub n_theta: usize,
    pub t: f64,
    pub q: Vec<f64>,
    pub h: Vec<f64>,
    pub j: Vec<f64>,
}

pub fn parse_snapshot(text: &str) -> Result<SnapshotData> {
    let bad = |what: &str| Error::InvalidProblem(format!("snapshot: {what}"));
    let mut lines = text.lines();
    let header: Vec<&str> = lines
        .next()
        .ok_or_else(|| bad("empty file"))?
        .split_whitespace()
        .collect();
    let [n_r, n_theta, t] = header[..] else {
        return Err(bad("header must be `N_r N_theta t`"));
    };
    let n_r: usize = n_r.parse().map_err(|_| bad("N_r"))?;
    let n_theta: usize = n_theta.parse().map_err(|_| bad("N_theta"))?;
    let t: f64 = t.parse().map_err(|_| bad("t"))?;
    let mut blocks: Vec<(String, Vec<f64>)> = Vec::new();
    for line in lines {
        if let Some(name) = line.strip_prefix("# ") {
            blocks.push((name.trim().to_owned(), Vec::new()));
        } else if let Some((_, values)) = blocks.last_mut() {
            for v in line.split_whitespace() {
                values.push(v.parse().map_err(|_| bad("value"))?);
            }
        }
    }
    let mut take = |name: &str, len: usize| -> Result<Vec<f64>> {
        let i = blocks.iter().position(|b| b.0 == name).ok_or_else(|| bad(name))?;
        let values = std::mem::take(&mut blocks[i].1);
        if values.len() != len {
            return Err(bad(&format!(
                "block {name} has {} values, expected {len}",
                values.len()
            )));
        }
        Ok(values)
    };
    Ok(SnapshotData {
        n_r,
        n_theta,
        t,
        q: take("q", n_r * n_theta)?,
        h: take("h", n_theta)?,
        j: take("J", n_r * n_theta)?,
    })
}

/// Decay rates fitted to a diagnostics table over `[from, to]`.
#[derive(Clone, Debug, Serialize)]
pub struct FitReport {
    pub from: f64,
    pub to: f64,
    pub samples: usize,
    pub chi_rate: Option<f64>,
    pub max_q_rate: Option<f64>,
    pub dissipation_rate: Option<f64>,
}

/// Fits over the trailing half when `from` is `None`.
pub fn fit_rows(rows: &[DiagnosticsRow], from: Option<f64>, to: Option<f64>) -> FitReport {
    let t_last = rows.last().map_or(0.0, |r| r.t);
    let from = from.unwrap_or(0.5 * t_last);
    let to = to.unwrap_or(t_last);
    let window: Vec<&DiagnosticsRow> = rows.iter().filter(|r| r.t >= from && r.t <= to).collect();
    let rate = |pick: fn(&DiagnosticsRow) -> f64| {
        let series: Vec<(f64, f64)> = window.iter().map(|r| (r.t, pick(r))).collect();
        decay_fit(&series).ok()
    };
    FitReport {
        from,
        to,
        samples: window.len(),
        chi_rate: rate(|r| r.chi),
        max_q_rate: rate(|r| r.max_q),
        dissipation_rate: rate(|r| r.d_disc),
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RunSummary {
    pub config: SimConfig,
    /// `t_end_reached` or `breakdown`.
    pub termination: String,
    pub breakdown: Option<Breakdown>,
    pub final_t: f64,
    pub steps: usize,
    pub lambda: f64,
    pub eta: f64,
    pub beta: f64,
    pub k: f64,
    pub t_k: f64,
    pub c1: f64,
    pub fit: FitReport,
    /// `max |conserved − conserved(0)| / conserved(0)` over the table.
    pub conservation_drift: f64,
    /// `max |h − h₀|_{L²(Γ)}` with `h₀ = 0`.
    pub max_height_change: f64,
    pub coefficient_deviation: f64,
    pub drift: f64,
    pub filtered_max: f64,
    pub audits: Vec<Check>,
}

impl RunSummary {
    pub fn new(cfg: &SimConfig, out: &RunOutput) -> Self {
        let rows = &out.rows;
        let first = rows.first();
        let reference = first.map_or(f64::NAN, |r| r.conserved);
        let conservation_drift = rows
            .iter()
            .map(|r| (r.conserved - reference).abs() / reference.abs())
            .fold(0.0, f64::max);
        let series: Vec<(f64, f64)> = rows.iter().map(|r| (r.t, r.chi)).collect();
        let audit = chi_bound_audit(&series, out.lambda, out.c1, out.eta, cfg.constants.chi_floor);
        let min_q = out.measurements.iter().map(|m| m.min_q).fold(f64::INFINITY, f64::min);
        let min_chi = series.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
        let audits = vec![
            Check::at_least("rayleigh_taylor_margin", out.rayleigh_taylor.margin, 0.0),
            Check::at_least("min_chi", min_chi, f64::MIN_POSITIVE),
            Check::at_least("chi_bound_constant", audit.c, audit.floor),
            Check::at_least("min_q", min_q, -1e-9),
        ];
        RunSummary {
            config: cfg.clone(),
            termination: if out.breakdown.is_some() {
                "breakdown"
            } else {
                "t_end_reached"
            }
            .into(),
            breakdown: out.breakdown.clone(),
            final_t: out.final_state.t,
            steps: rows.len().saturating_sub(1),
            lambda: out.lambda,
            eta: out.eta,
            beta: out.beta,
            k: out.k,
            t_k: out.t_k,
            c1: out.c1,
            fit: fit_rows(rows, None, None),
            conservation_drift,
            max_height_change: rows.iter().map(|r| r.h_l2).fold(0.0, f64::max),
            coefficient_deviation: out.coefficient_deviation,
            drift: out.drift,
            filtered_max: out.filtered_max,
            audits,
        }
    }
}

/// Writes the table, the summary and every snapshot into `dir`.
pub fn write_outputs(dir: &Path, cfg: &SimConfig, grid: &Grid, out: &RunOutput) -> Result<RunSummary> {
    fs::create_dir_all(dir)?;
    write_csv(&dir.join("diagnostics.csv"), &out.rows)?;
    for snap in &out.snapshots {
        fs::write(
            dir.join(format!("snap_{}.dat", snap.index)),
            snapshot_string(grid, snap),
        )?;
    }
    let summary = RunSummary::new(cfg, out);
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::InvalidProblem(e.to_string()))?;
    fs::write(dir.join("summary.json"), json)?;
    Ok(summary)
}
