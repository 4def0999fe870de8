//! CSV time series and a generated plotting script.
//!
//! Layout: one header line
//! `t,x1..xn,y1..yn,u1..um,u0_1..u0_m,uc_1..uc_m,theta_1..theta_k,lambda,V,x_norm`,
//! then one line per logged row. Numbers use Rust's shortest round-trip
//! formatting. Events appear as comment lines `# event t=<t> <label>` directly
//! before the first row at or after the event time.

use std::fmt::Write as _;
use std::io;
use std::path::Path;

use thiserror::Error;

use super::simulate::{Event, LogRow, RunLog};

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub fn csv_header(n: usize, m: usize, k: usize) -> String {
    let mut cols = vec!["t".to_string()];
    cols.extend((1..=n).map(|i| format!("x{i}")));
    cols.extend((1..=n).map(|i| format!("y{i}")));
    cols.extend((1..=m).map(|i| format!("u{i}")));
    cols.extend((1..=m).map(|i| format!("u0_{i}")));
    cols.extend((1..=m).map(|i| format!("uc_{i}")));
    cols.extend((1..=k).map(|i| format!("theta_{i}")));
    cols.extend(["lambda", "V", "x_norm"].map(String::from));
    cols.join(",")
}

fn push_row(out: &mut String, r: &LogRow) {
    let mut first = true;
    let mut put = |v: f64| {
        if !first {
            out.push(',');
        }
        first = false;
        let _ = write!(out, "{v:?}");
    };
    put(r.t);
    for v in r.x.iter().chain(&r.y).chain(&r.u).chain(&r.u0).chain(&r.uc).chain(&r.theta) {
        put(*v);
    }
    put(r.lambda);
    put(r.v);
    put(r.x_norm);
    out.push('\n');
}

pub fn to_csv_string(log: &RunLog) -> String {
    let mut out = csv_header(log.state_dim(), log.input_dim(), log.weight_len());
    out.push('\n');
    let mut pending = log.events.iter().peekable();
    for r in &log.rows {
        while let Some(e) = pending.next_if(|e| e.t <= r.t + crate::EVENT_TOL) {
            let _ = writeln!(out, "# event t={} {}", e.t, e.label);
        }
        push_row(&mut out, r);
    }
    for e in pending {
        let _ = writeln!(out, "# event t={} {}", e.t, e.label);
    }
    out
}

pub fn export_csv(log: &RunLog, path: impl AsRef<Path>) -> Result<(), CsvError> {
    std::fs::write(path, to_csv_string(log))?;
    Ok(())
}

/// Rows and events read back from a CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvSeries {
    pub rows: Vec<LogRow>,
    pub events: Vec<Event>,
}

fn dims_from_header(header: &str) -> Option<(usize, usize, usize)> {
    let cols: Vec<&str> = header.split(',').collect();
    let count = |prefix: &str| {
        cols.iter()
            .filter(|c| c.strip_prefix(prefix).is_some_and(|rest| rest.parse::<usize>().is_ok()))
            .count()
    };
    let (n, m, k) = (count("x"), count("u0_"), count("theta_"));
    (header == csv_header(n, m, k)).then_some((n, m, k))
}

pub fn parse_csv(text: &str) -> Result<CsvSeries, CsvError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(CsvError::Parse { line: 1, msg: "empty file".into() })?;
    let (n, m, k) = dims_from_header(header).ok_or(CsvError::Parse {
        line: 1,
        msg: format!("unrecognised header {header:?}"),
    })?;
    let width = 1 + 2 * n + 3 * m + k + 3;
    let mut rows = Vec::new();
    let mut events = Vec::new();
    for (i, line) in lines {
        let err = |msg: String| CsvError::Parse { line: i + 1, msg };
        if let Some(rest) = line.strip_prefix("# event t=") {
            let (t, label) = rest.split_once(' ').ok_or_else(|| err("malformed event".into()))?;
            events.push(Event {
                t: t.parse().map_err(|e| err(format!("event time: {e}")))?,
                label: label.to_string(),
            });
            continue;
        }
        if line.starts_with('#') || line.is_empty() {
            continue;
        }
        let vals: Vec<f64> = line
            .split(',')
            .map(|s| s.parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|e| err(e.to_string()))?;
        if vals.len() != width {
            return Err(err(format!("{} fields, expected {width}", vals.len())));
        }
        let mut it = vals.into_iter();
        let mut take = |c: usize| -> Vec<f64> { it.by_ref().take(c).collect() };
        let t = take(1)[0];
        let x = take(n);
        let y = take(n);
        let u = take(m);
        let u0 = take(m);
        let uc = take(m);
        let theta = take(k);
        let tail = take(3);
        rows.push(LogRow {
            t,
            x,
            y,
            u,
            u0,
            uc,
            theta,
            lambda: tail[0],
            v: tail[1],
            x_norm: tail[2],
        });
    }
    Ok(CsvSeries { rows, events })
}

pub fn read_csv(path: impl AsRef<Path>) -> Result<CsvSeries, CsvError> {
    parse_csv(&std::fs::read_to_string(path)?)
}

/// Writes a matplotlib script that plots the CSV at `csv_path`.
pub fn emit_plot_script(log: &RunLog, csv_path: &str, path: impl AsRef<Path>) -> Result<(), CsvError> {
    std::fs::write(path, plot_script(log, csv_path))?;
    Ok(())
}

pub fn plot_script(log: &RunLog, csv_path: &str) -> String {
    let n = log.state_dim();
    let k = log.weight_len();
    let states: Vec<String> = (1..=n).map(|i| format!("\"x{i}\"")).collect();
    let thetas: Vec<String> = (1..=k).map(|i| format!("\"theta_{i}\"")).collect();
    let events: Vec<String> = log.events.iter().map(|e| format!("({}, \"{}\")", e.t, e.label)).collect();
    format!(
        r##"#!/usr/bin/env python3
# Generated by aacsim for scenario "{name}".
import sys

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

CSV = sys.argv[1] if len(sys.argv) > 1 else "{csv}"
OUT = sys.argv[2] if len(sys.argv) > 2 else CSV.rsplit(".", 1)[0] + ".png"
STATES = [{states}]
THETAS = [{thetas}]
EVENTS = [{events}]

d = np.genfromtxt(CSV, delimiter=",", names=True, comments="#")
t = d["t"]
fig, ax = plt.subplots(4, 1, figsize=(8, 10), sharex=True)
for s in STATES:
    ax[0].plot(t, d[s], label=s)
ax[0].set_ylabel("state")
ax[1].plot(t, d["u1"], label="u")
ax[1].plot(t, d["u0_1"], "--", label="u0")
ax[1].plot(t, d["uc_1"], ":", label="uc")
ax[1].set_ylabel("control")
for s in THETAS:
    ax[2].plot(t, d[s], linewidth=0.8)
ax[2].set_ylabel("theta")
ax[3].plot(t, d["lambda"])
ax[3].set_ylabel("lambda")
ax[3].set_xlabel("t [s]")
for a in ax:
    for te, label in EVENTS:
        a.axvline(te, color="grey", linestyle=":", linewidth=0.8)
    a.grid(True, alpha=0.3)
ax[0].legend(loc="upper right")
ax[1].legend(loc="upper right")
fig.suptitle("{name}")
fig.tight_layout()
fig.savefig(OUT, dpi=120)
print(OUT)
"##,
        name = log.scenario,
        csv = csv_path,
        states = states.join(", "),
        thetas = thetas.join(", "),
        events = events.join(", "),
    )
}
