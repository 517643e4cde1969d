//! Task construction and the per-cell certification loop shared by the
//! `certify` and `sweep` commands.

use std::fs;
use std::path::Path;

use adds_core::certify::{certify, CertificationResult, SmoothedClassifier};
use adds_core::data::{make_gmm_task, sample_dataset, BayesClassifier, Dataset};
use adds_core::denoise::{GmmDenoiser, GmmModel};
use adds_core::exec::Parallelism;
use adds_core::rng::StreamKey;
use adds_core::sampler::{guided_denoise, CleanInput, Pipeline, PipelineConfig};
use adds_core::schedule::NoiseSchedule;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{CliError, Result};

/// Substream phases under `(seed, point, cell)`.
pub const PHASE_SELECT: u64 = 0;
pub const PHASE_ESTIMATE: u64 = 1;
pub const PHASE_ATTACK: u64 = 2;
pub const PHASE_TRAJECTORY: u64 = 3;

/// The mixture, its Bayes classifier, the test points and the base schedule.
pub struct Task {
    pub model: GmmModel,
    pub classifier: BayesClassifier,
    pub denoiser: GmmDenoiser,
    pub points: Dataset,
    pub schedule: NoiseSchedule,
}

impl Task {
    pub fn build(cfg: &ExperimentConfig) -> Result<Self> {
        let seed = cfg.task_seed();
        let t = &cfg.task;
        let model = match &t.gmm_path {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| CliError::io(p.display(), e))?;
                GmmModel::from_spec_text(&text)?
            }
            None => make_gmm_task(t.classes, t.dim, t.separation, t.scale, seed)?,
        };
        let points = match &t.dataset_path {
            Some(p) => {
                let mut data = Dataset::load(p)?;
                if data.dim() != model.dim() {
                    return Err(CliError::config(format!(
                        "dataset dimension {} does not match the mixture's {}",
                        data.dim(),
                        model.dim()
                    )));
                }
                if data.len() < cfg.num_test_points {
                    return Err(CliError::config(format!(
                        "dataset has {} points, config asks for {}",
                        data.len(),
                        cfg.num_test_points
                    )));
                }
                data.points.truncate(cfg.num_test_points);
                data.labels.truncate(cfg.num_test_points);
                data
            }
            None => sample_dataset(&model, cfg.num_test_points, seed.wrapping_add(1))?,
        };
        let s = &cfg.schedule;
        let schedule = NoiseSchedule::linear(s.steps, s.beta_start, s.beta_end)?;
        Ok(Task {
            classifier: BayesClassifier::new(model.clone()),
            denoiser: GmmDenoiser::new(model.clone()),
            model,
            points,
            schedule,
        })
    }

    pub fn pipeline(&self, config: &PipelineConfig) -> Result<Pipeline<&GmmDenoiser>> {
        Ok(Pipeline::new(
            config.clone(),
            &self.schedule,
            &self.denoiser,
        )?)
    }
}

/// Key for everything drawn for `point` under pipeline `cell`.
pub fn cell_key(seed: u64, point: usize, cell: usize) -> StreamKey {
    StreamKey::path(seed, &[point as u64, cell as u64])
}

/// One CSV row of certification output.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyRow {
    pub sample_id: usize,
    pub method: String,
    pub sigma: f64,
    pub votes: usize,
    pub guidance_scale: f64,
    pub prediction: usize,
    pub true_label: usize,
    pub correct: bool,
    pub abstained: bool,
    pub p_lower: f64,
    pub radius: f64,
    pub n0: usize,
    pub n: usize,
    pub alpha: f64,
    pub wall_time_ms: f64,
    pub seed: u64,
}

/// Guidance scale as reported: only guided methods use one.
pub fn reported_scale(config: &PipelineConfig) -> f64 {
    if config.method.is_guided() {
        config.guidance_scale
    } else {
        0.0
    }
}

impl CertifyRow {
    fn new(
        cfg: &ExperimentConfig,
        pipeline: &PipelineConfig,
        point: usize,
        true_label: usize,
        res: &CertificationResult,
    ) -> Self {
        CertifyRow {
            sample_id: point,
            method: pipeline.method.as_str().to_string(),
            sigma: pipeline.sigma,
            votes: pipeline.votes,
            guidance_scale: reported_scale(pipeline),
            prediction: res.top_label,
            true_label,
            correct: res.top_label == true_label,
            abstained: res.abstained(),
            p_lower: res.p_plus_lb,
            radius: res.radius,
            n0: res.n0,
            n: res.n,
            alpha: res.alpha,
            wall_time_ms: if cfg.record_timing {
                res.wall_time_ms
            } else {
                0.0
            },
            seed: cfg.seed,
        }
    }

    /// Whether this row's pipeline is `config`.
    pub fn matches(&self, config: &PipelineConfig) -> bool {
        self.method == config.method.as_str()
            && self.sigma == config.sigma
            && self.votes == config.votes
            && self.guidance_scale == reported_scale(config)
    }
}

/// Certify every test point under every pipeline. Rows come back ordered
/// by point, then pipeline, whatever order the work finishes in.
pub fn certify_cells(
    cfg: &ExperimentConfig,
    task: &Task,
    cells: &[PipelineConfig],
    parallelism: Parallelism,
) -> Result<Vec<CertifyRow>> {
    let pipelines = cells
        .iter()
        .map(|c| task.pipeline(c))
        .collect::<Result<Vec<_>>>()?;
    let n_points = task.points.len();
    let jobs = n_points * cells.len();
    let results = parallelism.map(jobs, |job| -> Result<CertifyRow> {
        let (point, cell) = (job / cells.len(), job % cells.len());
        let model = SmoothedClassifier::new(&pipelines[cell], &task.classifier)
            .with_parallelism(parallelism);
        let x = &task.points.points[point];
        let res = certify(
            &model,
            x,
            cfg.n0,
            cfg.n,
            cfg.alpha,
            cell_key(cfg.seed, point, cell),
        )?;
        Ok(CertifyRow::new(
            cfg,
            &cells[cell],
            point,
            task.points.labels[point],
            &res,
        ))
    });
    results.into_iter().collect()
}

pub fn write_rows(path: &Path, rows: &[CertifyRow]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))?;
    }
    let mut w = csv::Writer::from_path(path).map_err(|e| CliError::io(path.display(), e))?;
    for r in rows {
        w.serialize(r)
            .map_err(|e| CliError::io(path.display(), e))?;
    }
    w.flush().map_err(|e| CliError::io(path.display(), e))
}

pub fn read_rows(path: &Path) -> Result<Vec<CertifyRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| CliError::io(path.display(), e))?;
    r.deserialize()
        .map(|row| row.map_err(|e| CliError::io(path.display(), e)))
        .collect()
}

/// Write one guided trajectory and its spending ledger per guided cell for
/// the first `points` test points.
pub fn dump_trajectories(
    cfg: &ExperimentConfig,
    task: &Task,
    cells: &[PipelineConfig],
    dir: &Path,
    points: usize,
) -> Result<usize> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir.display(), e))?;
    let mut written = 0;
    for (cell, config) in cells
        .iter()
        .enumerate()
        .filter(|(_, c)| c.method.is_guided())
    {
        let pipeline = task.pipeline(config)?;
        for point in 0..points.min(task.points.len()) {
            let key = cell_key(cfg.seed, point, cell).child(PHASE_TRAJECTORY);
            let x = &task.points.points[point];
            let (_, traj) = guided_denoise(
                CleanInput::new(x),
                config,
                &task.denoiser,
                pipeline.schedule(),
                &mut key.rng(),
            )?;
            let path = dir.join(format!("trajectory_p{point}_c{cell}_{}.txt", config.method));
            let text = format!(
                "# method={} sigma={} s={} exhausted_at={}\n{}\n{}",
                config.method,
                config.sigma,
                config.guidance_scale,
                traj.t_exhausted.map_or("none".into(), |t| t.to_string()),
                traj.to_table(),
                traj.ledger.to_table()
            );
            fs::write(&path, text).map_err(|e| CliError::io(path.display(), e))?;
            written += 1;
        }
    }
    Ok(written)
}
