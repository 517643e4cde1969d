//! DDPM noise schedules.
//!
//! Steps are indexed `1..=T`. Index 0 is the clean state, with
//! `alpha_bar(0) == 1`.

use std::fmt::Write as _;

use crate::error::{Error, Result};

/// The beta / alpha / alpha-bar ladder of a (possibly respaced) diffusion.
#[derive(Clone, Debug, PartialEq)]
pub struct NoiseSchedule {
    betas: Vec<f64>,
    alphas: Vec<f64>,
    // length T + 1, alpha_bars[0] == 1
    alpha_bars: Vec<f64>,
    posterior_vars: Vec<f64>,
    timestep_map: Option<Vec<usize>>,
}

pub const DEFAULT_BETA_START: f64 = 1e-4;
pub const DEFAULT_BETA_END: f64 = 0.02;
pub const DEFAULT_STEPS: usize = 1000;

impl NoiseSchedule {
    /// Betas linearly interpolated from `beta_start` to `beta_end` inclusive.
    pub fn linear(steps: usize, beta_start: f64, beta_end: f64) -> Result<Self> {
        if steps == 0 {
            return Err(Error::param("schedule needs at least one step"));
        }
        if !(beta_start > 0.0 && beta_start <= beta_end && beta_end < 1.0) {
            return Err(Error::param(format!(
                "need 0 < beta_start <= beta_end < 1, got {beta_start}, {beta_end}"
            )));
        }
        let betas = if steps == 1 {
            vec![beta_start]
        } else {
            let span = beta_end - beta_start;
            (0..steps)
                .map(|i| beta_start + span * i as f64 / (steps - 1) as f64)
                .collect()
        };
        Self::from_betas(betas)
    }

    /// The 1000-step linear schedule used as the reference model.
    pub fn reference() -> Self {
        Self::linear(DEFAULT_STEPS, DEFAULT_BETA_START, DEFAULT_BETA_END)
            .expect("default schedule parameters are valid")
    }

    /// Build from explicit betas, which must lie in (0, 1) and be
    /// nondecreasing.
    pub fn from_betas(betas: Vec<f64>) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::param("schedule needs at least one step"));
        }
        for (i, &b) in betas.iter().enumerate() {
            if !(b > 0.0 && b < 1.0) {
                return Err(Error::param(format!("beta[{}]={b} outside (0,1)", i + 1)));
            }
            if i > 0 && b < betas[i - 1] {
                return Err(Error::param(format!(
                    "betas must be nondecreasing (beta[{}]={b} < beta[{}]={})",
                    i + 1,
                    i,
                    betas[i - 1]
                )));
            }
        }
        let alphas: Vec<f64> = betas.iter().map(|b| 1.0 - b).collect();
        let mut alpha_bars = Vec::with_capacity(betas.len() + 1);
        alpha_bars.push(1.0);
        for a in &alphas {
            let prev = *alpha_bars.last().unwrap();
            alpha_bars.push(prev * a);
        }
        Ok(Self::assemble(betas, alphas, alpha_bars, None))
    }

    fn assemble(
        betas: Vec<f64>,
        alphas: Vec<f64>,
        alpha_bars: Vec<f64>,
        timestep_map: Option<Vec<usize>>,
    ) -> Self {
        let posterior_vars = (1..=betas.len())
            .map(|t| {
                let prev = 1.0 - alpha_bars[t - 1];
                let cur = 1.0 - alpha_bars[t];
                prev / cur * betas[t - 1]
            })
            .collect();
        NoiseSchedule {
            betas,
            alphas,
            alpha_bars,
            posterior_vars,
            timestep_map,
        }
    }

    /// Keep only the `selected` original timesteps (strictly increasing,
    /// within `1..=T`). The alpha-bar values at the selected steps are
    /// preserved and the per-step alphas become their successive ratios.
    pub fn respace(&self, selected: &[usize]) -> Result<Self> {
        if selected.is_empty() {
            return Err(Error::param("respacing needs at least one timestep"));
        }
        for (i, &s) in selected.iter().enumerate() {
            if s == 0 || s > self.steps() {
                return Err(Error::param(format!(
                    "timestep {s} outside 1..={}",
                    self.steps()
                )));
            }
            if i > 0 && s <= selected[i - 1] {
                return Err(Error::param(
                    "respaced timesteps must be strictly increasing",
                ));
            }
        }
        let mut alpha_bars = Vec::with_capacity(selected.len() + 1);
        alpha_bars.push(1.0);
        alpha_bars.extend(selected.iter().map(|&s| self.alpha_bars[s]));
        let mut alphas = Vec::with_capacity(selected.len());
        let mut betas = Vec::with_capacity(selected.len());
        for j in 1..alpha_bars.len() {
            let (prev, cur) = (alpha_bars[j - 1], alpha_bars[j]);
            alphas.push(cur / prev);
            betas.push((prev - cur) / prev);
        }
        let map = selected
            .iter()
            .map(|&s| self.original_timestep(s))
            .collect();
        Ok(Self::assemble(betas, alphas, alpha_bars, Some(map)))
    }

    /// Respace to `count` evenly spaced steps ending at `T`
    /// (for T=1000, count=20: 50, 100, ..., 1000).
    pub fn respace_evenly(&self, count: usize) -> Result<Self> {
        self.respace(&evenly_spaced(self.steps(), count)?)
    }

    pub fn steps(&self) -> usize {
        self.betas.len()
    }

    pub fn beta(&self, t: usize) -> f64 {
        self.betas[t - 1]
    }

    pub fn alpha(&self, t: usize) -> f64 {
        self.alphas[t - 1]
    }

    /// Valid for `t` in `0..=T`.
    pub fn alpha_bar(&self, t: usize) -> f64 {
        self.alpha_bars[t]
    }

    /// Fixed reverse-step variance `(1 - abar_{t-1}) / (1 - abar_t) * beta_t`.
    pub fn posterior_var(&self, t: usize) -> f64 {
        self.posterior_vars[t - 1]
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Alpha-bars for steps `1..=T` (the leading 1 is not included).
    pub fn alpha_bars(&self) -> &[f64] {
        &self.alpha_bars[1..]
    }

    pub fn posterior_vars(&self) -> &[f64] {
        &self.posterior_vars
    }

    pub fn timestep_map(&self) -> Option<&[usize]> {
        self.timestep_map.as_deref()
    }

    /// Original timestep of respaced step `t` (identity when not respaced).
    pub fn original_timestep(&self, t: usize) -> usize {
        match &self.timestep_map {
            Some(map) => map[t - 1],
            None => t,
        }
    }

    /// Signal-to-noise ratio `abar_t / (1 - abar_t)`; infinite at t = 0.
    pub fn snr(&self, t: usize) -> f64 {
        let ab = self.alpha_bars[t];
        ab / (1.0 - ab)
    }

    /// Largest RS noise level the schedule can absorb.
    pub fn max_sigma(&self) -> f64 {
        let ab = self.alpha_bars[self.steps()];
        ((1.0 - ab) / ab).sqrt()
    }

    /// First step at least as noisy as RS noise `sigma`: the smallest `t`
    /// with `(1 - abar_t) / abar_t >= sigma^2`.
    pub fn match_timestep(&self, sigma: f64) -> Result<usize> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::param(format!("sigma must be positive, got {sigma}")));
        }
        let target = sigma * sigma;
        (1..=self.steps())
            .find(|&t| {
                let ab = self.alpha_bars[t];
                (1.0 - ab) / ab >= target
            })
            .ok_or(Error::NoiseExceedsSchedule {
                sigma,
                max_sigma: self.max_sigma(),
            })
    }

    /// Plain-text table with columns `t beta alpha alpha_bar posterior_var`.
    pub fn to_table(&self) -> String {
        let mut out = String::from("t beta alpha alpha_bar posterior_var\n");
        for t in 1..=self.steps() {
            let _ = writeln!(
                out,
                "{} {:.16e} {:.16e} {:.16e} {:.16e}",
                t,
                self.beta(t),
                self.alpha(t),
                self.alpha_bar(t),
                self.posterior_var(t)
            );
        }
        out
    }

    /// Parse a table written by [`NoiseSchedule::to_table`]. The alpha-bar
    /// column is authoritative; the others are recomputed from it.
    pub fn from_table(text: &str) -> Result<Self> {
        let mut alpha_bars = vec![1.0];
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some((_, header)) if header.split_whitespace().next() == Some("t") => {}
            Some((n, _)) => return Err(Error::parse(n, "expected header line")),
            None => return Err(Error::parse(1, "empty schedule table")),
        }
        for (n, line) in lines {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 5 {
                return Err(Error::parse(
                    n,
                    format!("expected 5 columns, got {}", fields.len()),
                ));
            }
            let t: usize = fields[0]
                .parse()
                .map_err(|_| Error::parse(n, format!("bad timestep '{}'", fields[0])))?;
            if t != alpha_bars.len() {
                return Err(Error::parse(n, format!("timestep {t} out of sequence")));
            }
            let ab: f64 = fields[3]
                .parse()
                .map_err(|_| Error::parse(n, format!("bad alpha_bar '{}'", fields[3])))?;
            let prev = *alpha_bars.last().unwrap();
            if !(ab > 0.0 && ab < prev) {
                return Err(Error::parse(
                    n,
                    "alpha_bar must be positive and strictly decreasing",
                ));
            }
            alpha_bars.push(ab);
        }
        if alpha_bars.len() == 1 {
            return Err(Error::parse(1, "schedule table has no rows"));
        }
        let (alphas, betas) = (1..alpha_bars.len())
            .map(|j| {
                let (prev, cur) = (alpha_bars[j - 1], alpha_bars[j]);
                (cur / prev, (prev - cur) / prev)
            })
            .unzip();
        Ok(Self::assemble(betas, alphas, alpha_bars, None))
    }
}

/// `count` evenly spaced timesteps from `1..=steps`, ending at `steps`,
/// returned in increasing order.
pub fn evenly_spaced(steps: usize, count: usize) -> Result<Vec<usize>> {
    if count == 0 || count > steps {
        return Err(Error::param(format!(
            "cannot pick {count} timesteps out of {steps}"
        )));
    }
    let stride = steps as f64 / count as f64;
    let mut out: Vec<usize> = (0..count)
        .map(|j| steps - (j as f64 * stride).round() as usize)
        .collect();
    out.reverse();
    Ok(out)
}
