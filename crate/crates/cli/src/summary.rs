//! Accuracy tables, radius curves and timings computed from CSV rows.

use std::fmt::Write as _;

use adds_core::sampler::PipelineConfig;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::experiment::{reported_scale, CertifyRow};

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Curve {
    pub radius: Vec<f64>,
    pub certified_accuracy: Vec<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct CellSummary {
    pub method: String,
    pub sigma: f64,
    pub votes: usize,
    pub guidance_scale: f64,
    pub respaced_steps: usize,
    pub points: usize,
    pub clean_accuracy: f64,
    pub certified_accuracy_r0: f64,
    pub abstain_rate: f64,
    pub curve: Curve,
    pub mean_wall_time_ms: f64,
    pub total_wall_time_ms: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct TableRow {
    pub label: String,
    pub method: String,
    pub votes: usize,
    /// One entry per sigma; `None` where the cell was not run.
    pub values: Vec<Option<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Table {
    pub title: String,
    pub sigmas: Vec<f64>,
    pub rows: Vec<TableRow>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct Summary {
    pub seed: u64,
    pub num_points: usize,
    pub n0: usize,
    pub n: usize,
    pub alpha: f64,
    pub certified_accuracy_r0: Table,
    pub clean_accuracy: Table,
    pub cells: Vec<CellSummary>,
}

/// Fraction of rows certified correct at radius `r`.
pub fn certified_accuracy(rows: &[&CertifyRow], r: f64) -> f64 {
    if rows.is_empty() {
        return 0.0;
    }
    let hits = rows
        .iter()
        .filter(|x| x.correct && !x.abstained && x.radius >= r)
        .count();
    hits as f64 / rows.len() as f64
}

fn radius_grid(cfg: &ExperimentConfig, sigma: f64) -> Vec<f64> {
    match &cfg.radius_grid {
        Some(g) => g.clone(),
        None => (0..=8).map(|i| 0.25 * i as f64 * sigma).collect(),
    }
}

fn row_label(cell: &PipelineConfig, detailed: bool) -> String {
    let mut label = cell.method.as_str().to_string();
    if cell.method.uses_votes() {
        let _ = write!(
            label,
            " ({} vote{})",
            cell.votes,
            if cell.votes == 1 { "" } else { "s" }
        );
    }
    if detailed {
        if cell.method.is_guided() {
            let _ = write!(label, " s={}", cell.guidance_scale);
        }
        let _ = write!(label, " steps={}", cell.respaced_steps);
    }
    label
}

/// Summarise rows produced for `cells`. With `detailed` the table rows also
/// distinguish guidance scale and step count (sweeps); otherwise rows are
/// keyed by method and vote count, as in the comparison tables.
pub fn summarize(
    cfg: &ExperimentConfig,
    cells: &[PipelineConfig],
    rows: &[CertifyRow],
    detailed: bool,
) -> Summary {
    let n_cells = cells.len();
    let cell_summaries: Vec<CellSummary> = cells
        .iter()
        .enumerate()
        .map(|(i, cell)| {
            // rows are ordered by point then cell
            let mine: Vec<&CertifyRow> = rows.iter().skip(i).step_by(n_cells.max(1)).collect();
            debug_assert!(mine.iter().all(|r| r.matches(cell)));
            let radius = radius_grid(cfg, cell.sigma);
            let certified: Vec<f64> = radius
                .iter()
                .map(|&r| certified_accuracy(&mine, r))
                .collect();
            let count = mine.len().max(1) as f64;
            let total_time: f64 = mine.iter().map(|r| r.wall_time_ms).sum();
            CellSummary {
                method: cell.method.as_str().to_string(),
                sigma: cell.sigma,
                votes: cell.votes,
                guidance_scale: reported_scale(cell),
                respaced_steps: cell.respaced_steps,
                points: mine.len(),
                clean_accuracy: mine.iter().filter(|r| r.correct).count() as f64 / count,
                certified_accuracy_r0: certified_accuracy(&mine, 0.0),
                abstain_rate: mine.iter().filter(|r| r.abstained).count() as f64 / count,
                curve: Curve {
                    radius,
                    certified_accuracy: certified,
                },
                mean_wall_time_ms: total_time / count,
                total_wall_time_ms: total_time,
            }
        })
        .collect();

    let mut sigmas: Vec<f64> = Vec::new();
    let mut labels: Vec<(String, String, usize)> = Vec::new();
    for c in cells {
        if !sigmas.contains(&c.sigma) {
            sigmas.push(c.sigma);
        }
        let key = (
            row_label(c, detailed),
            c.method.as_str().to_string(),
            c.votes,
        );
        if !labels.contains(&key) {
            labels.push(key);
        }
    }
    let table = |title: &str, value: fn(&CellSummary) -> f64| Table {
        title: title.to_string(),
        sigmas: sigmas.clone(),
        rows: labels
            .iter()
            .map(|(label, method, votes)| TableRow {
                label: label.clone(),
                method: method.clone(),
                votes: *votes,
                values: sigmas
                    .iter()
                    .map(|&s| {
                        cells
                            .iter()
                            .zip(&cell_summaries)
                            .find(|(c, _)| c.sigma == s && row_label(c, detailed) == *label)
                            .map(|(_, cs)| value(cs))
                    })
                    .collect(),
            })
            .collect(),
    };
    Summary {
        seed: cfg.seed,
        num_points: cfg.num_test_points,
        n0: cfg.n0,
        n: cfg.n,
        alpha: cfg.alpha,
        certified_accuracy_r0: table("Certified accuracy at r=0", |c| c.certified_accuracy_r0),
        clean_accuracy: table("Clean accuracy", |c| c.clean_accuracy),
        cells: cell_summaries,
    }
}

impl Table {
    pub fn to_markdown(&self) -> String {
        let mut out = format!("{}\n\n| method |", self.title);
        for s in &self.sigmas {
            let _ = write!(out, " σ={s} |");
        }
        out.push_str("\n|---|");
        out.push_str(&"---|".repeat(self.sigmas.len()));
        for row in &self.rows {
            let _ = write!(out, "\n| {} |", row.label);
            for v in &row.values {
                match v {
                    Some(v) => {
                        let _ = write!(out, " {:.1}% |", 100.0 * v);
                    }
                    None => out.push_str(" - |"),
                }
            }
        }
        out.push('\n');
        out
    }
}

impl Summary {
    pub fn to_markdown(&self) -> String {
        let mut out = self.certified_accuracy_r0.to_markdown();
        out.push('\n');
        out.push_str(&self.clean_accuracy.to_markdown());
        out.push_str("\nMean time per point\n\n| method | σ | ms |\n|---|---|---|");
        for c in &self.cells {
            let _ = write!(
                out,
                "\n| {} ({}) | {} | {:.2} |",
                c.method, c.votes, c.sigma, c.mean_wall_time_ms
            );
        }
        out.push('\n');
        out
    }
}
