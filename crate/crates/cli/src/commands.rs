//! The `adds` subcommands as library functions.

use std::fs;
use std::path::{Path, PathBuf};

use adds_core::certify::{smoothed_predict, Prediction, SmoothedClassifier};
use adds_core::exec::Parallelism;
use adds_core::oracle::{run_battery, BatteryOptions, CheckReport, OracleCheck};
use adds_core::rng::unit_direction;
use adds_core::sampler::PipelineConfig;
use adds_core::stats::clopper_pearson_upper;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};
use crate::experiment::{
    cell_key, certify_cells, dump_trajectories, read_rows, write_rows, CertifyRow, Task,
    PHASE_ATTACK,
};
use crate::summary::{summarize, Summary};

#[derive(Clone, Debug, Default)]
pub struct CertifyOptions {
    pub parallelism: Parallelism,
    /// Write guided trajectories for the first few points here.
    pub dump_trajectory: Option<PathBuf>,
    pub dump_points: usize,
}

pub struct CertifyOutput {
    pub rows: Vec<CertifyRow>,
    pub summary: Summary,
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path.display(), e))?;
    fs::write(path, text + "\n").map_err(|e| CliError::io(path.display(), e))
}

fn run_cells(
    cfg: &ExperimentConfig,
    cells: &[PipelineConfig],
    opts: &CertifyOptions,
    detailed: bool,
) -> Result<CertifyOutput> {
    let task = Task::build(cfg)?;
    if let Some(dir) = &opts.dump_trajectory {
        dump_trajectories(cfg, &task, cells, dir, opts.dump_points.max(1))?;
    }
    let rows = certify_cells(cfg, &task, cells, opts.parallelism)?;
    let summary = summarize(cfg, cells, &rows, detailed);
    let csv_path = cfg.output.clone();
    let summary_path = ExperimentConfig::summary_path(&csv_path);
    write_rows(&csv_path, &rows)?;
    write_json(&summary_path, &summary)?;
    Ok(CertifyOutput {
        rows,
        summary,
        csv_path,
        summary_path,
    })
}

/// Certify every test point under every configured pipeline; writes the
/// CSV to `cfg.output` and the summary JSON beside it.
pub fn cmd_certify(cfg: &ExperimentConfig, opts: &CertifyOptions) -> Result<CertifyOutput> {
    let cells = cfg.pipeline_configs()?;
    run_cells(cfg, &cells, opts, false)
}

/// Like [`cmd_certify`] over the `[sweep]` grid.
pub fn cmd_sweep(cfg: &ExperimentConfig, opts: &CertifyOptions) -> Result<CertifyOutput> {
    let cells = cfg.sweep_configs()?;
    run_cells(cfg, &cells, opts, true)
}

#[derive(Clone, Debug)]
pub struct AttackOptions {
    pub trials: usize,
    pub fraction: f64,
    /// Samples per prediction; the config's `n0` when unset.
    pub n0: Option<usize>,
    pub parallelism: Parallelism,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AttackGroup {
    pub method: String,
    pub sigma: f64,
    pub votes: usize,
    pub guidance_scale: f64,
    pub rows_checked: usize,
    pub trials: usize,
    pub flips: usize,
    pub abstentions: usize,
    pub flip_rate: f64,
    /// Binomial standard error of `flip_rate`.
    pub flip_rate_stderr: f64,
    /// One-sided 95% Clopper–Pearson upper bound on the flip rate.
    pub flip_rate_upper_95: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
pub struct AttackReport {
    pub fraction: f64,
    pub trials_per_point: usize,
    pub n0: usize,
    pub alpha: f64,
    pub skipped_rows: usize,
    pub abstained_rows: usize,
    pub groups: Vec<AttackGroup>,
    pub total: AttackGroup,
}

fn tally(
    template: (&str, f64, usize, f64),
    rows_checked: usize,
    outcomes: &[Prediction],
    reference: &[usize],
) -> Result<AttackGroup> {
    let trials = outcomes.len();
    let flips = outcomes
        .iter()
        .zip(reference)
        .filter(|(o, &y)| matches!(o, Prediction::Label(l) if *l != y))
        .count();
    let abstentions = outcomes
        .iter()
        .filter(|o| **o == Prediction::Abstain)
        .count();
    let rate = if trials == 0 {
        0.0
    } else {
        flips as f64 / trials as f64
    };
    let upper = if trials == 0 {
        1.0
    } else {
        clopper_pearson_upper(flips as u64, trials as u64, 0.05)?
    };
    Ok(AttackGroup {
        method: template.0.to_string(),
        sigma: template.1,
        votes: template.2,
        guidance_scale: template.3,
        rows_checked,
        trials,
        flips,
        abstentions,
        flip_rate: rate,
        flip_rate_stderr: if trials == 0 {
            0.0
        } else {
            (rate * (1.0 - rate) / trials as f64).sqrt()
        },
        flip_rate_upper_95: upper,
    })
}

/// Empirical soundness check: push each certified point a fixed fraction of
/// its radius in random directions and count how often the smoothed
/// prediction moves to a different label. Abstentions are not flips and are
/// reported separately.
pub fn cmd_attack_check(
    cfg: &ExperimentConfig,
    csv: &Path,
    opts: &AttackOptions,
) -> Result<AttackReport> {
    if !(opts.fraction > 0.0 && opts.fraction < 1.0) {
        return Err(CliError::config(format!(
            "fraction {} outside (0,1)",
            opts.fraction
        )));
    }
    if opts.trials == 0 {
        return Err(CliError::config("trials must be positive"));
    }
    let n0 = opts.n0.unwrap_or(cfg.n0);
    let rows = read_rows(csv)?;
    let task = Task::build(cfg)?;
    let cells = cfg.pipeline_configs()?;
    let pipelines = cells
        .iter()
        .map(|c| task.pipeline(c))
        .collect::<Result<Vec<_>>>()?;

    let mut skipped = 0;
    let mut abstained = 0;
    let mut checked: Vec<(usize, &CertifyRow)> = Vec::new();
    for row in &rows {
        if row.abstained || row.radius.is_nan() || row.radius <= 0.0 {
            abstained += 1;
            continue;
        }
        match cells.iter().position(|c| row.matches(c)) {
            Some(cell) if row.sample_id < task.points.len() => checked.push((cell, row)),
            _ => skipped += 1,
        }
    }
    if skipped > 0 {
        eprintln!("warning: skipped {skipped} rows with no matching pipeline or test point");
    }

    let d = task.model.dim();
    let jobs = checked.len() * opts.trials;
    let outcomes = opts.parallelism.map(jobs, |job| -> Result<Prediction> {
        let (idx, trial) = (job / opts.trials, job % opts.trials);
        let (cell, row) = checked[idx];
        let key = cell_key(cfg.seed, row.sample_id, cell)
            .child(PHASE_ATTACK)
            .child(trial as u64);
        let dir = unit_direction(&mut key.child(0).rng(), d);
        let step = opts.fraction * row.radius;
        let x: Vec<f64> = task.points.points[row.sample_id]
            .iter()
            .zip(&dir)
            .map(|(v, u)| v + step * u)
            .collect();
        let model = SmoothedClassifier::new(&pipelines[cell], &task.classifier)
            .with_parallelism(opts.parallelism);
        Ok(smoothed_predict(&model, &x, n0, cfg.alpha, key.child(1))?.prediction)
    });
    let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
    let reference: Vec<usize> = (0..jobs)
        .map(|j| checked[j / opts.trials].1.prediction)
        .collect();

    let mut groups = Vec::new();
    for (ci, c) in cells.iter().enumerate() {
        let idx: Vec<usize> = (0..jobs)
            .filter(|&j| checked[j / opts.trials].0 == ci)
            .collect();
        if idx.is_empty() {
            continue;
        }
        let outs: Vec<Prediction> = idx.iter().map(|&j| outcomes[j]).collect();
        let refs: Vec<usize> = idx.iter().map(|&j| reference[j]).collect();
        let rows_checked = checked.iter().filter(|(cell, _)| *cell == ci).count();
        let template = (
            c.method.as_str(),
            c.sigma,
            c.votes,
            crate::experiment::reported_scale(c),
        );
        groups.push(tally(template, rows_checked, &outs, &refs)?);
    }
    let total = tally(("all", 0.0, 0, 0.0), checked.len(), &outcomes, &reference)?;
    Ok(AttackReport {
        fraction: opts.fraction,
        trials_per_point: opts.trials,
        n0,
        alpha: cfg.alpha,
        skipped_rows: skipped,
        abstained_rows: abstained,
        groups,
        total,
    })
}

pub fn write_attack_report(path: &Path, report: &AttackReport) -> Result<()> {
    write_json(path, report)
}

/// Run the selected oracle checks. An empty selection is a config error.
pub fn cmd_oracle_check(checks: &[OracleCheck], opts: &BatteryOptions) -> Result<Vec<CheckReport>> {
    Ok(run_battery(checks, opts)?)
}

/// Oracle error naming every failed check, if any.
pub fn oracle_verdict(reports: &[CheckReport]) -> Result<()> {
    let failed: Vec<&str> = reports
        .iter()
        .filter(|r| !r.passed())
        .map(|r| r.check.name())
        .collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::Oracle(failed.join(", ")))
    }
}
