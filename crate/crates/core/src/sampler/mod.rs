//! Reverse diffusion, clean-image guidance and the smoothing pipelines.
//!
//! One reverse step in terms of the clean-image prediction:
//!
//! ```text
//! x_{t-1} = sqrt(abar_{t-1}) beta_t / (1 - abar_t) * x0_hat
//!         + (1 - abar_{t-1}) sqrt(alpha_t) / (1 - abar_t) * x_t
//!         + N(0, diag(sigma_t^2))
//! ```

mod guidance;

use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

pub use guidance::{apply_guidance, CleanInput};

use crate::denoise::Denoiser;
use crate::error::{check_dim, Error, Result};
use crate::privacy::{BudgetVector, GuidanceAccountant, GuidanceStep, SpendLedger};
use crate::rng::{fork, standard_normal_vec, SampleRng};
use crate::schedule::NoiseSchedule;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    /// Plain randomized smoothing, no denoiser.
    Rs,
    /// One-shot denoising from the matched timestep.
    Dds,
    /// Multi-step unguided denoising from the matched timestep.
    DensePure,
    /// Budget-filtered guided denoising, unguided after exhaustion.
    Adds,
    /// Budget-filtered guided denoising, one-shot at exhaustion.
    AddsOneShot,
}

impl Method {
    pub const ALL: [Method; 5] = [
        Method::Rs,
        Method::Dds,
        Method::DensePure,
        Method::Adds,
        Method::AddsOneShot,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Rs => "rs",
            Method::Dds => "dds",
            Method::DensePure => "densepure",
            Method::Adds => "adds",
            Method::AddsOneShot => "adds_oneshot",
        }
    }

    pub fn is_guided(self) -> bool {
        matches!(self, Method::Adds | Method::AddsOneShot)
    }

    /// Whether the pipeline forks into vote branches.
    pub fn uses_votes(self) -> bool {
        matches!(self, Method::DensePure | Method::Adds)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::param(format!("unknown method '{s}'")))
    }
}

/// How DDS and DensePure noise the input before embedding it.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum NoisingConvention {
    /// Noise scale of the matched timestep, `sqrt((1 - abar)/abar) >= sigma`.
    ExactMatch,
    /// Noise with `sigma` itself.
    #[default]
    SigmaDirect,
}

impl FromStr for NoisingConvention {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exact_match" => Ok(NoisingConvention::ExactMatch),
            "sigma_direct" => Ok(NoisingConvention::SigmaDirect),
            _ => Err(Error::param(format!("unknown noising convention '{s}'"))),
        }
    }
}

/// How ADDS vote branches relate to the guided run.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub enum VoteMode {
    /// Branches fork after the exhausting step and finish unguided.
    #[default]
    SharedPrefix,
    /// Each branch is a complete guided run with `1/k` of the budget.
    Independent,
}

impl FromStr for VoteMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "shared_prefix" => Ok(VoteMode::SharedPrefix),
            "independent" => Ok(VoteMode::Independent),
            _ => Err(Error::param(format!("unknown vote mode '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipelineConfig {
    pub method: Method,
    pub sigma: f64,
    pub guidance_scale: f64,
    pub votes: usize,
    pub respaced_steps: usize,
    pub noising: NoisingConvention,
    pub vote_mode: VoteMode,
}

impl PipelineConfig {
    pub fn new(method: Method, sigma: f64) -> Self {
        PipelineConfig {
            method,
            sigma,
            guidance_scale: 0.8,
            votes: 1,
            respaced_steps: 20,
            noising: NoisingConvention::default(),
            vote_mode: VoteMode::default(),
        }
    }

    pub fn with_scale(mut self, s: f64) -> Self {
        self.guidance_scale = s;
        self
    }

    pub fn with_votes(mut self, k: usize) -> Self {
        self.votes = k;
        self
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.respaced_steps = steps;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma > 0.0 && self.sigma.is_finite()) {
            return Err(Error::param(format!(
                "sigma must be positive, got {}",
                self.sigma
            )));
        }
        if !(0.0..=1.0).contains(&self.guidance_scale) {
            return Err(Error::param(format!(
                "guidance scale {} outside [0,1]",
                self.guidance_scale
            )));
        }
        if self.votes == 0 {
            return Err(Error::param("votes must be at least 1"));
        }
        if self.respaced_steps == 0 {
            return Err(Error::param("respaced_steps must be at least 1"));
        }
        Ok(())
    }
}

/// Mean coefficients `(coef_x0, coef_xt)` of reverse step `t`.
pub fn mean_coefficients(t: usize, schedule: &NoiseSchedule) -> (f64, f64) {
    let ab_prev = schedule.alpha_bar(t - 1);
    let tail = 1.0 - schedule.alpha_bar(t);
    (
        ab_prev.sqrt() * schedule.beta(t) / tail,
        (1.0 - ab_prev) * schedule.alpha(t).sqrt() / tail,
    )
}

fn add_noise<R: Rng + ?Sized>(mut mean: Vec<f64>, sigma_diag: &[f64], rng: &mut R) -> Vec<f64> {
    for (m, sd) in mean.iter_mut().zip(sigma_diag) {
        let z: f64 = StandardNormal.sample(rng);
        *m += sd * z;
    }
    mean
}

/// Reverse step from the clean-image prediction. Draws one standard normal
/// per pixel even where `sigma_diag` is zero.
pub fn ddpm_step<R: Rng + ?Sized>(
    x_t: &[f64],
    x0_hat: &[f64],
    t: usize,
    schedule: &NoiseSchedule,
    sigma_diag: &[f64],
    rng: &mut R,
) -> Vec<f64> {
    let (a, b) = mean_coefficients(t, schedule);
    let mean = x0_hat.iter().zip(x_t).map(|(p, x)| a * p + b * x).collect();
    add_noise(mean, sigma_diag, rng)
}

/// Reverse step from a noise prediction,
/// `(x_t - (1 - alpha_t)/sqrt(1 - abar_t) eps) / sqrt(alpha_t) + z`.
pub fn ddpm_step_eps<R: Rng + ?Sized>(
    x_t: &[f64],
    eps: &[f64],
    t: usize,
    schedule: &NoiseSchedule,
    sigma_diag: &[f64],
    rng: &mut R,
) -> Vec<f64> {
    let k = schedule.beta(t) / (1.0 - schedule.alpha_bar(t)).sqrt();
    let sa = schedule.alpha(t).sqrt();
    let mean = x_t.iter().zip(eps).map(|(x, e)| (x - k * e) / sa).collect();
    add_noise(mean, sigma_diag, rng)
}

/// Mean of the guided reverse step, as a function of the clean input.
pub fn guided_mean(
    x_t: &[f64],
    x0_hat: &[f64],
    x: CleanInput<'_>,
    s: f64,
    t: usize,
    schedule: &NoiseSchedule,
) -> Result<Vec<f64>> {
    check_dim(x_t.len(), x0_hat.len())?;
    let guided = apply_guidance(x0_hat, x, s)?;
    let (a, b) = mean_coefficients(t, schedule);
    Ok(guided.iter().zip(x_t).map(|(p, v)| a * p + b * v).collect())
}

/// One-shot clean-image estimate from `x_t`.
pub fn one_shot_x0<D: Denoiser + ?Sized>(
    x_t: &[f64],
    t: usize,
    denoiser: &D,
    schedule: &NoiseSchedule,
) -> Result<Vec<f64>> {
    if t == 0 {
        check_dim(denoiser.dim(), x_t.len())?;
        return Ok(x_t.to_vec());
    }
    Ok(denoiser.predict(x_t, t, schedule)?.x0_hat)
}

/// States and budget audit of one guided run.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Trajectory {
    /// `(t, x_t)` in decreasing `t`, ending at `t = 0`.
    pub states: Vec<(usize, Vec<f64>)>,
    pub ledger: SpendLedger,
    pub t_exhausted: Option<usize>,
}

impl Trajectory {
    /// Plain-text dump `t min_pixel max_pixel spent` where `spent` is the
    /// largest per-pixel budget used before reaching the state.
    pub fn to_table(&self) -> String {
        let mut out = String::from("t min_pixel max_pixel spent\n");
        for (t, x) in &self.states {
            let min = x.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let d = self.ledger.records.first().map_or(0, |r| r.cost.len());
            let mut spent = vec![0.0; d];
            for r in self.ledger.records.iter().filter(|r| r.t > *t) {
                spent.iter_mut().zip(&r.cost).for_each(|(s, c)| *s += c);
            }
            let spent = spent.into_iter().fold(0.0, f64::max);
            let _ = writeln!(out, "{t} {min:.16e} {max:.16e} {spent:.16e}");
        }
        out
    }
}

/// Where a guided run stopped.
struct GuidedRun {
    t: usize,
    x_t: Vec<f64>,
    trajectory: Trajectory,
}

struct GuidedOptions {
    sigma: f64,
    scale: f64,
    one_shot: bool,
    stop_after_exhaustion: bool,
    record: bool,
}

fn run_guided<D: Denoiser + ?Sized>(
    x: CleanInput<'_>,
    opts: &GuidedOptions,
    denoiser: &D,
    schedule: &NoiseSchedule,
    rng: &mut SampleRng,
) -> Result<GuidedRun> {
    let d = denoiser.dim();
    check_dim(d, x.dim())?;
    let mut acct = GuidanceAccountant::new(BudgetVector::for_sigma(opts.sigma, d)?);
    if !opts.record {
        acct = acct.without_records();
    }
    let mut x_t = standard_normal_vec(rng, d);
    let mut states = Vec::new();
    let mut t = schedule.steps();
    if opts.record {
        states.push((t, x_t.clone()));
    }
    while t > 0 {
        let out = denoiser.predict(&x_t, t, schedule)?;
        let (scale, kind) = acct.step(opts.scale, t, schedule, &out.sigma_diag)?;
        let x0 = if scale > 0.0 {
            apply_guidance(&out.x0_hat, x, scale)?
        } else {
            out.x0_hat
        };
        let exhausting = kind == GuidanceStep::Exhausting;
        if exhausting && opts.one_shot && scale == 0.0 {
            // nothing left to spend: one-shot from the current state
            break;
        }
        x_t = ddpm_step(&x_t, &x0, t, schedule, &out.sigma_diag, rng);
        t -= 1;
        if opts.record {
            states.push((t, x_t.clone()));
        }
        if exhausting && (opts.one_shot || opts.stop_after_exhaustion) {
            break;
        }
    }
    if opts.one_shot && t > 0 {
        x_t = one_shot_x0(&x_t, t, denoiser, schedule)?;
        t = 0;
        if opts.record {
            states.push((0, x_t.clone()));
        }
    }
    let t_exhausted = acct.exhausted_at();
    Ok(GuidedRun {
        t,
        x_t,
        trajectory: Trajectory {
            states,
            ledger: acct.into_ledger(),
            t_exhausted,
        },
    })
}

/// Unguided reverse steps from `(t, x_t)` down to 0.
pub fn denoise_unguided<D: Denoiser + ?Sized>(
    mut x_t: Vec<f64>,
    from_t: usize,
    denoiser: &D,
    schedule: &NoiseSchedule,
    rng: &mut SampleRng,
) -> Result<Vec<f64>> {
    for t in (1..=from_t).rev() {
        let out = denoiser.predict(&x_t, t, schedule)?;
        x_t = ddpm_step(&x_t, &out.x0_hat, t, schedule, &out.sigma_diag, rng);
    }
    Ok(x_t)
}

/// Clean-image guided denoising under a privacy filter. Starts from
/// `x_T ~ N(0, I)`, guides each step at the configured scale while the
/// filter admits it, spends the remainder at the largest feasible scale on
/// the step the filter first rejects, and then either continues unguided
/// (`adds`) or returns a one-shot estimate (`adds_oneshot`).
pub fn guided_denoise<D: Denoiser + ?Sized>(
    x: CleanInput<'_>,
    config: &PipelineConfig,
    denoiser: &D,
    schedule: &NoiseSchedule,
    rng: &mut SampleRng,
) -> Result<(Vec<f64>, Trajectory)> {
    config.validate()?;
    if !config.method.is_guided() {
        return Err(Error::param(format!(
            "guided denoising needs method adds or adds_oneshot, got {}",
            config.method
        )));
    }
    let opts = GuidedOptions {
        sigma: config.sigma,
        scale: config.guidance_scale,
        one_shot: config.method == Method::AddsOneShot,
        stop_after_exhaustion: false,
        record: true,
    };
    let run = run_guided(x, &opts, denoiser, schedule, rng)?;
    debug_assert_eq!(run.t, 0);
    Ok((run.x_t, run.trajectory))
}

/// A configured smoothing pipeline: noise or guided-denoise an input and
/// return the images handed to the classifier (one per vote branch).
#[derive(Clone, Debug)]
pub struct Pipeline<D> {
    config: PipelineConfig,
    base: NoiseSchedule,
    respaced: NoiseSchedule,
    denoiser: D,
}

impl<D: Denoiser> Pipeline<D> {
    /// `base` is the full schedule (used for DDS timestep matching); the
    /// multi-step methods run on its `respaced_steps`-step respacing.
    pub fn new(config: PipelineConfig, base: &NoiseSchedule, denoiser: D) -> Result<Self> {
        config.validate()?;
        let respaced = if config.respaced_steps >= base.steps() {
            base.clone()
        } else {
            base.respace_evenly(config.respaced_steps)?
        };
        let p = Pipeline {
            config,
            base: base.clone(),
            respaced,
            denoiser,
        };
        // surface an unmatched sigma at construction
        match p.config.method {
            Method::Dds => {
                p.base.match_timestep(p.config.sigma)?;
            }
            Method::DensePure => {
                p.respaced.match_timestep(p.config.sigma)?;
            }
            _ => {}
        }
        Ok(p)
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn denoiser(&self) -> &D {
        &self.denoiser
    }

    pub fn schedule(&self) -> &NoiseSchedule {
        &self.respaced
    }

    pub fn dim(&self) -> usize {
        self.denoiser.dim()
    }

    /// Embed `x + noise` at the matched step of `schedule`.
    fn embed(
        &self,
        x: &[f64],
        schedule: &NoiseSchedule,
        rng: &mut SampleRng,
    ) -> Result<(usize, Vec<f64>)> {
        let sigma = self.config.sigma;
        let t_star = schedule.match_timestep(sigma)?;
        let ab = schedule.alpha_bar(t_star);
        let noise_scale = match self.config.noising {
            NoisingConvention::SigmaDirect => sigma,
            NoisingConvention::ExactMatch => ((1.0 - ab) / ab).sqrt(),
        };
        let z = standard_normal_vec(rng, x.len());
        let sa = ab.sqrt();
        let x_t = x
            .iter()
            .zip(z)
            .map(|(v, e)| sa * (v + noise_scale * e))
            .collect();
        Ok((t_star, x_t))
    }

    fn complete_votes(
        &self,
        x_t: Vec<f64>,
        t: usize,
        rng: &mut SampleRng,
    ) -> Result<Vec<Vec<f64>>> {
        let k = self.config.votes;
        if k == 1 || t == 0 {
            return Ok(vec![denoise_unguided(
                x_t,
                t,
                &self.denoiser,
                &self.respaced,
                rng,
            )?]);
        }
        fork(rng, k)
            .into_iter()
            .map(|mut branch| {
                denoise_unguided(x_t.clone(), t, &self.denoiser, &self.respaced, &mut branch)
            })
            .collect()
    }

    /// Draw one smoothing sample for input `x`.
    pub fn sample(&self, x: &[f64], rng: &mut SampleRng) -> Result<Vec<Vec<f64>>> {
        check_dim(self.dim(), x.len())?;
        let cfg = &self.config;
        match cfg.method {
            Method::Rs => {
                let z = standard_normal_vec(rng, x.len());
                Ok(vec![x
                    .iter()
                    .zip(z)
                    .map(|(v, e)| v + cfg.sigma * e)
                    .collect()])
            }
            Method::Dds => {
                let (t_star, x_t) = self.embed(x, &self.base, rng)?;
                Ok(vec![one_shot_x0(&x_t, t_star, &self.denoiser, &self.base)?])
            }
            Method::DensePure => {
                let (t_star, x_t) = self.embed(x, &self.respaced, rng)?;
                self.complete_votes(x_t, t_star, rng)
            }
            Method::AddsOneShot => {
                let opts = self.guided_options(cfg.sigma, false);
                let run = run_guided(
                    CleanInput::new(x),
                    &opts,
                    &self.denoiser,
                    &self.respaced,
                    rng,
                )?;
                Ok(vec![run.x_t])
            }
            Method::Adds => match cfg.vote_mode {
                VoteMode::SharedPrefix => {
                    // past exhaustion the guided loop is plain unguided sampling
                    let opts = self.guided_options(cfg.sigma, true);
                    let run = run_guided(
                        CleanInput::new(x),
                        &opts,
                        &self.denoiser,
                        &self.respaced,
                        rng,
                    )?;
                    self.complete_votes(run.x_t, run.t, rng)
                }
                VoteMode::Independent => {
                    // k full guided runs compose, so each gets 1/k of mu^2
                    let sigma = cfg.sigma * (cfg.votes as f64).sqrt();
                    let opts = self.guided_options(sigma, false);
                    fork(rng, cfg.votes)
                        .into_iter()
                        .map(|mut branch| {
                            run_guided(
                                CleanInput::new(x),
                                &opts,
                                &self.denoiser,
                                &self.respaced,
                                &mut branch,
                            )
                            .map(|run| run.x_t)
                        })
                        .collect()
                }
            },
        }
    }

    fn guided_options(&self, sigma: f64, stop_after_exhaustion: bool) -> GuidedOptions {
        GuidedOptions {
            sigma,
            scale: self.config.guidance_scale,
            one_shot: self.config.method == Method::AddsOneShot,
            stop_after_exhaustion,
            record: false,
        }
    }
}
