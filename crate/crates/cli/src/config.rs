//! Experiment configuration, read from TOML.

use std::path::{Path, PathBuf};

use adds_core::sampler::{Method, NoisingConvention, PipelineConfig, VoteMode};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub seed: u64,
    /// CSV destination; the summary JSON goes next to it.
    pub output: PathBuf,
    #[serde(default = "default_n0")]
    pub n0: usize,
    #[serde(default = "default_n")]
    pub n: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_points")]
    pub num_test_points: usize,
    /// Write measured times to `wall_time_ms`; with `false` the column is 0
    /// and the CSV is byte-for-byte reproducible.
    #[serde(default = "default_true")]
    pub record_timing: bool,
    /// Absolute radii for the summary curves. Defaults to 0, 0.25σ, …, 2σ
    /// for each cell.
    #[serde(default)]
    pub radius_grid: Option<Vec<f64>>,
    #[serde(default)]
    pub task: TaskConfig,
    #[serde(default)]
    pub schedule: ScheduleConfig,
    #[serde(default)]
    pub pipelines: Vec<PipelineEntry>,
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub sweep: Option<SweepConfig>,
}

fn default_n0() -> usize {
    100
}
fn default_n() -> usize {
    1000
}
fn default_alpha() -> f64 {
    0.001
}
fn default_points() -> usize {
    250
}
fn default_true() -> bool {
    true
}

/// Where test points come from. Files take precedence over generation.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct TaskConfig {
    pub gmm_path: Option<PathBuf>,
    pub dataset_path: Option<PathBuf>,
    pub classes: usize,
    pub dim: usize,
    pub separation: f64,
    pub scale: f64,
    /// Seed for the mixture and the test points; the master seed if unset.
    pub seed: Option<u64>,
}

impl Default for TaskConfig {
    fn default() -> Self {
        TaskConfig {
            gmm_path: None,
            dataset_path: None,
            classes: 3,
            dim: 2,
            separation: 2.0,
            scale: 0.5,
            seed: None,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields, default)]
pub struct ScheduleConfig {
    pub steps: usize,
    pub beta_start: f64,
    pub beta_end: f64,
}

impl Default for ScheduleConfig {
    fn default() -> Self {
        ScheduleConfig {
            steps: 1000,
            beta_start: 1e-4,
            beta_end: 0.02,
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct PipelineEntry {
    pub method: String,
    pub sigma: f64,
    #[serde(default = "default_scale")]
    pub guidance_scale: f64,
    #[serde(default = "default_votes")]
    pub votes: usize,
    #[serde(default = "default_steps")]
    pub respaced_steps: usize,
    #[serde(default = "default_noising")]
    pub noising: String,
    #[serde(default = "default_vote_mode")]
    pub vote_mode: String,
}

fn default_scale() -> f64 {
    0.8
}
fn default_votes() -> usize {
    1
}
fn default_steps() -> usize {
    20
}
fn default_noising() -> String {
    "sigma_direct".into()
}
fn default_vote_mode() -> String {
    "shared_prefix".into()
}

impl PipelineEntry {
    pub fn to_pipeline_config(&self) -> Result<PipelineConfig> {
        let method: Method = self.method.parse()?;
        let noising: NoisingConvention = self.noising.parse()?;
        let vote_mode: VoteMode = self.vote_mode.parse()?;
        let cfg = PipelineConfig {
            method,
            sigma: self.sigma,
            guidance_scale: self.guidance_scale,
            votes: self.votes,
            respaced_steps: self.respaced_steps,
            noising,
            vote_mode,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Cartesian product of methods, vote counts and noise levels. Vote
/// counts only apply to methods that vote; the others run once.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub methods: Vec<String>,
    #[serde(default = "default_vote_list")]
    pub votes: Vec<usize>,
    pub sigmas: Vec<f64>,
    #[serde(default = "default_scale")]
    pub guidance_scale: f64,
    /// Per-sigma guidance scales, aligned with `sigmas`.
    #[serde(default)]
    pub guidance_scales: Option<Vec<f64>>,
    #[serde(default = "default_steps")]
    pub respaced_steps: usize,
    #[serde(default = "default_noising")]
    pub noising: String,
    #[serde(default = "default_vote_mode")]
    pub vote_mode: String,
}

fn default_vote_list() -> Vec<usize> {
    vec![1]
}

/// Grid over guidance scale and respaced step count for `adds sweep`.
#[derive(Clone, Debug, Deserialize, Serialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub guidance_scales: Vec<f64>,
    #[serde(default = "default_step_list")]
    pub respaced_steps: Vec<usize>,
}

fn default_step_list() -> Vec<usize> {
    vec![20]
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| CliError::config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Read a config file. Relative paths inside it are taken relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))?;
        let mut cfg = Self::from_toml(&text)?;
        let base = path.parent().unwrap_or(Path::new(""));
        let rebase = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        rebase(&mut cfg.output);
        if let Some(p) = cfg.task.gmm_path.as_mut() {
            rebase(p);
        }
        if let Some(p) = cfg.task.dataset_path.as_mut() {
            rebase(p);
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_test_points == 0 {
            return Err(CliError::config("num_test_points must be at least 1"));
        }
        if self.n0 == 0 || self.n < self.n0 {
            return Err(CliError::config(format!(
                "need n >= n0 >= 1 (n0={}, n={})",
                self.n0, self.n
            )));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(CliError::config(format!(
                "alpha={} outside (0,1)",
                self.alpha
            )));
        }
        if let Some(grid) = &self.radius_grid {
            if grid.is_empty() || grid.iter().any(|r| !(*r >= 0.0 && r.is_finite())) {
                return Err(CliError::config(
                    "radius_grid must be non-empty and non-negative",
                ));
            }
        }
        if let Some(g) = &self.grid {
            if let Some(scales) = &g.guidance_scales {
                if scales.len() != g.sigmas.len() {
                    return Err(CliError::config(
                        "grid.guidance_scales must align with grid.sigmas",
                    ));
                }
            }
        }
        if let Some(s) = &self.sweep {
            if s.guidance_scales.is_empty() || s.respaced_steps.is_empty() {
                return Err(CliError::config("sweep grid must have at least one cell"));
            }
        }
        let cells = self.pipeline_configs()?;
        if cells.is_empty() {
            return Err(CliError::config(
                "no pipelines: add [[pipelines]] or [grid]",
            ));
        }
        Ok(())
    }

    pub fn task_seed(&self) -> u64 {
        self.task.seed.unwrap_or(self.seed)
    }

    /// Pipelines in run order: explicit entries, then the grid ordered by
    /// sigma, method, votes. Duplicates are dropped.
    pub fn pipeline_configs(&self) -> Result<Vec<PipelineConfig>> {
        let mut out: Vec<PipelineConfig> = Vec::new();
        let mut push = |c: PipelineConfig| {
            if !out.contains(&c) {
                out.push(c);
            }
        };
        for entry in &self.pipelines {
            push(entry.to_pipeline_config()?);
        }
        if let Some(g) = &self.grid {
            let noising: NoisingConvention = g.noising.parse()?;
            let vote_mode: VoteMode = g.vote_mode.parse()?;
            for (i, &sigma) in g.sigmas.iter().enumerate() {
                let scale = g
                    .guidance_scales
                    .as_ref()
                    .map_or(g.guidance_scale, |s| s[i]);
                for m in &g.methods {
                    let method: Method = m.parse()?;
                    let votes: &[usize] = if method.uses_votes() { &g.votes } else { &[1] };
                    for &k in votes {
                        let cfg = PipelineConfig {
                            method,
                            sigma,
                            guidance_scale: scale,
                            votes: k,
                            respaced_steps: g.respaced_steps,
                            noising,
                            vote_mode,
                        };
                        cfg.validate()?;
                        push(cfg);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Sweep cells: each base pipeline crossed with the sweep grid. Scale
    /// only varies for guided methods and step count only for methods that
    /// walk the respaced schedule.
    pub fn sweep_configs(&self) -> Result<Vec<PipelineConfig>> {
        let sweep = self
            .sweep
            .as_ref()
            .ok_or_else(|| CliError::config("missing [sweep] section"))?;
        let mut out: Vec<PipelineConfig> = Vec::new();
        for base in self.pipeline_configs()? {
            for &s in &sweep.guidance_scales {
                for &steps in &sweep.respaced_steps {
                    let mut c = base.clone();
                    if c.method.is_guided() {
                        c.guidance_scale = s;
                    }
                    if c.method != Method::Rs && c.method != Method::Dds {
                        c.respaced_steps = steps;
                    }
                    c.validate()?;
                    if !out.contains(&c) {
                        out.push(c);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Where the summary JSON for `csv` is written.
    pub fn summary_path(csv: &Path) -> PathBuf {
        csv.with_extension("summary.json")
    }
}
