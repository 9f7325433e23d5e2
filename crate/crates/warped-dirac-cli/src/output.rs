//! Serialization: CSV and JSON trajectory tables, flat key=value reports.
//!
//! Floats are printed with 17 significant digits, which round-trips f64
//! exactly; identical runs therefore produce byte-identical files.

use std::io::Write;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::config::RunConfig;
use warped_dirac::constraints::ResidualReport;
use warped_dirac::evolution::Termination;

pub const EVEN_HEADER: &[&str] = &[
    "t",
    "f",
    "f_t",
    "re_h_plus",
    "im_h_plus",
    "re_h_minus",
    "im_h_minus",
    "C_H",
    "einstein_tan",
    "einstein_normal",
    "diff_charge",
];

pub const ODD_HEADER: &[&str] = &[
    "t",
    "f",
    "f_t",
    "h_plus",
    "k_plus",
    "C_H",
    "einstein_tan",
    "einstein_normal",
    "diff_charge",
];

pub const CLOSED_FORM_HEADER: &[&str] = &["t", "f", "f_t", "f_tt", "S"];

/// A column-labeled block of rows, ready for CSV or JSON.
pub struct Table {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<f64>>,
}

/// 17 significant digits: exact f64 round-trip, stable bytes.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn write_csv(path: &Path, table: &Table) -> Result<(), String> {
    let mut out = String::new();
    out.push_str(&table.header.join(","));
    out.push('\n');
    for row in &table.rows {
        let fields: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

fn metadata(config: &RunConfig, termination: &Termination, window: f64) -> Value {
    json!({
        "mode": config.mode.to_string(),
        "parity": format!("{:?}", config.parity).to_lowercase(),
        "m": config.m,
        "a": config.a,
        "lambda_m": config.lambda_m,
        "lambda_q": config.lambda_q,
        "epsilon": config.epsilon.value(),
        "norm": config.norm,
        "sign": config.sign.value(),
        "c": config.c,
        "t_end": config.t_end,
        "step": config.step,
        "omega": config.omega,
        "tolerance": config.tolerance,
        "termination": termination.to_string(),
        "resolved_window": window,
        "version": env!("CARGO_PKG_VERSION"),
    })
}

pub fn write_json(
    path: &Path,
    table: &Table,
    config: &RunConfig,
    termination: &Termination,
    window: f64,
) -> Result<(), String> {
    let rows: Vec<Value> = table
        .rows
        .iter()
        .map(|row| {
            let mut obj = Map::new();
            for (name, value) in table.header.iter().zip(row) {
                obj.insert((*name).to_string(), json!(value));
            }
            Value::Object(obj)
        })
        .collect();
    let doc = json!({
        "metadata": metadata(config, termination, window),
        "rows": rows,
    });
    let text = serde_json::to_string_pretty(&doc).expect("tables serialize");
    std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

pub fn write_table(
    config: &RunConfig,
    table: &Table,
    termination: &Termination,
    window: f64,
) -> Result<(), String> {
    match config.format {
        crate::config::Format::Csv => write_csv(&config.out, table),
        crate::config::Format::Json => write_json(&config.out, table, config, termination, window),
    }
}

/// Flat key=value report, the same syntax the config files use.
pub fn report_lines(
    mode: &str,
    termination: &Termination,
    window: f64,
    report: &ResidualReport,
    extra: &[(&str, String)],
) -> String {
    let mut s = String::new();
    let mut push = |k: &str, v: String| {
        s.push_str(k);
        s.push_str(" = ");
        s.push_str(&v);
        s.push('\n');
    };
    push("mode", mode.to_string());
    push("termination", termination.to_string());
    push("resolved_window", fmt_f64(window));
    push("hamiltonian_max", fmt_f64(report.hamiltonian_max));
    push("einstein_tan_max", fmt_f64(report.einstein_tan_max));
    push("einstein_normal_max", fmt_f64(report.einstein_normal_max));
    if let Some(d) = report.charge_drift_max {
        push("charge_drift_max", fmt_f64(d));
    }
    if let Some(w) = report.wk_residual_max {
        push("wk_residual_max", fmt_f64(w));
    }
    for (k, v) in extra {
        push(k, v.clone());
    }
    push("tolerance", fmt_f64(report.tolerance));
    push("pass", report.pass.to_string());
    s
}

pub fn write_report(path: &Path, contents: &str) -> Result<(), String> {
    std::fs::write(path, contents).map_err(|e| format!("cannot write {}: {e}", path.display()))
}

/// Read a CSV produced by [`write_csv`] back into header + numeric rows.
pub fn read_csv(path: &Path) -> Result<(Vec<String>, Vec<Vec<f64>>), String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut lines = text.lines();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| format!("{}: empty file", path.display()))?
        .split(',')
        .map(|s| s.trim().to_string())
        .collect();
    let mut rows = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let row: Result<Vec<f64>, _> = line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        let row = row.map_err(|e| format!("{}:{}: {e}", path.display(), lineno + 2))?;
        if row.len() != header.len() {
            return Err(format!(
                "{}:{}: {} fields, expected {}",
                path.display(),
                lineno + 2,
                row.len(),
                header.len()
            ));
        }
        rows.push(row);
    }
    Ok((header, rows))
}

/// One-line machine-greppable run summary on stdout.
pub fn print_summary(
    mode: &str,
    termination: &Termination,
    window: f64,
    report: &ResidualReport,
    out: &Path,
) {
    let opt = |x: Option<f64>| x.map_or_else(|| "none".to_string(), |v| format!("{v:.3e}"));
    let mut line = format!(
        "mode={mode} termination={termination} window={window:.6} \
         hamiltonian_max={:.3e} einstein_tan_max={:.3e} einstein_normal_max={:.3e} \
         charge_drift_max={} wk_residual_max={} pass={} out={}",
        report.hamiltonian_max,
        report.einstein_tan_max,
        report.einstein_normal_max,
        opt(report.charge_drift_max),
        opt(report.wk_residual_max),
        report.pass,
        out.display()
    );
    line.push('\n');
    let _ = std::io::stdout().write_all(line.as_bytes());
}
