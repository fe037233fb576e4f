use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::perturbation::PerturbCategory;

use super::eval::EvalReport;

/// Published per-category `(mean, std)` scores for the two reference agents,
/// in the order Testing, Easy, Moderate, Difficult.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceScores {
    pub rows: [(&'static str, [(f64, f64); 4]); 2],
}

pub const REFERENCE: ReferenceScores = ReferenceScores {
    rows: [
        (
            "UNREAL",
            [(96.92, 8.08), (101.96, 9.656), (92.64, 12.35), (39.16, 11.44)],
        ),
        (
            "Visually-Attentive UNREAL",
            [(95.92, 10.88), (96.96, 9.39), (83.52, 10.09), (40.52, 14.67)],
        ),
    ],
};

impl ReferenceScores {
    /// Cell text exactly as published, e.g. `101.96 (9.656)`.
    pub fn cell(mean: f64, std: f64) -> String {
        format!("{mean} ({std})")
    }
}

const COLUMNS: [(&str, PerturbCategory); 4] = [
    ("Testing", PerturbCategory::None),
    ("Easy", PerturbCategory::Easy),
    ("Moderate", PerturbCategory::Moderate),
    ("Difficult", PerturbCategory::Difficult),
];

#[derive(Debug, Clone, PartialEq)]
pub struct AgentRow {
    pub agent: String,
    /// Pooled `(k, mean, std)` per column.
    pub cells: [(usize, f64, f64); 4],
    /// Difficult mean below Testing mean.
    pub degrades: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub rows: Vec<AgentRow>,
    pub text: String,
    pub csv: String,
}

impl Table {
    pub fn trend(&self, agent: &str) -> Option<bool> {
        self.rows.iter().find(|r| r.agent == agent).map(|r| r.degrades)
    }
}

fn check_report(r: &EvalReport) -> Result<()> {
    if r.k == 0 || r.returns.len() != r.k {
        return Err(Error::Report(format!(
            "{} / {}: k = {} but {} returns stored",
            r.label,
            r.category,
            r.k,
            r.returns.len()
        )));
    }
    let (mean, std) = super::mean_std(&r.returns);
    if (mean - r.mean).abs() > 1e-9 || (std - r.std).abs() > 1e-9 {
        return Err(Error::Report(format!(
            "{} / {}: stored mean/std ({}, {}) disagree with per-game returns ({mean}, {std})",
            r.label, r.category, r.mean, r.std
        )));
    }
    Ok(())
}

/// Table of measured agents (reports pooled per label and category) followed by the reference rows.
pub fn report_table(reports: &[EvalReport]) -> Result<Table> {
    let mut labels: Vec<&str> = Vec::new();
    for r in reports {
        check_report(r)?;
        if !labels.contains(&r.label.as_str()) {
            labels.push(&r.label);
        }
    }

    let mut rows = Vec::new();
    for label in labels {
        let mut cells = [(0, 0.0, 0.0); 4];
        for (cell, (name, cat)) in cells.iter_mut().zip(COLUMNS) {
            let pooled: Vec<f64> = reports
                .iter()
                .filter(|r| r.label == label && r.category == cat)
                .flat_map(|r| r.returns.iter().copied())
                .collect();
            if pooled.is_empty() {
                return Err(Error::Report(format!("agent {label:?} has no {name} ({cat}) report")));
            }
            let (mean, std) = super::mean_std(&pooled);
            *cell = (pooled.len(), mean, std);
        }
        rows.push(AgentRow {
            agent: label.to_string(),
            degrades: cells[3].1 < cells[0].1,
            cells,
        });
    }

    let agent_width = rows
        .iter()
        .map(|r| r.agent.len())
        .chain(REFERENCE.rows.iter().map(|(n, _)| n.len() + 12))
        .max()
        .unwrap_or(5)
        .max(5);
    let mut text = String::new();
    let mut line = |agent: &str, cells: [String; 4], trend: &str| {
        let _ = write!(text, "| {agent:<agent_width$} |");
        for c in cells {
            let _ = write!(text, " {c:<16} |");
        }
        let _ = writeln!(text, " {trend:<19} |");
    };
    line("Agent", COLUMNS.map(|(n, _)| n.to_string()), "Difficult < Testing");
    for r in &rows {
        line(
            &r.agent,
            r.cells.map(|(_, m, s)| format!("{m:.2} ({s:.2})")),
            if r.degrades { "yes" } else { "no" },
        );
    }
    for (name, cells) in REFERENCE.rows {
        line(
            &format!("{name} [reference]"),
            cells.map(|(m, s)| ReferenceScores::cell(m, s)),
            if cells[3].0 < cells[0].0 { "yes" } else { "no" },
        );
    }

    let mut csv = String::from("agent,source,category,k,mean,std\n");
    for r in &rows {
        for ((_, cat), (k, m, s)) in COLUMNS.iter().zip(r.cells) {
            let _ = writeln!(csv, "{},measured,{cat},{k},{m:.6},{s:.6}", csv_field(&r.agent));
        }
    }
    for (name, cells) in REFERENCE.rows {
        for ((_, cat), (m, s)) in COLUMNS.iter().zip(cells) {
            let _ = writeln!(csv, "{},reference,{cat},25,{m},{s}", csv_field(name));
        }
    }
    Ok(Table { rows, text, csv })
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Every `*.json` evaluation report under `dir`, in path order.
pub fn load_reports(dir: &Path) -> Result<Vec<EvalReport>> {
    let mut paths = Vec::new();
    collect_json(dir, &mut paths)?;
    paths.sort();
    paths.iter().map(EvalReport::load_json).collect()
}

fn collect_json(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    let entries = std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))?;
    for entry in entries {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        if path.is_dir() {
            collect_json(&path, out)?;
        } else if path.extension().is_some_and(|e| e == "json") {
            out.push(path);
        }
    }
    Ok(())
}
