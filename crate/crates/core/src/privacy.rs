//! Gaussian-DP budget accounting for guided denoising.
//!
//! Guidance at scale `s` on reverse step `t` is a Gaussian mechanism on each
//! pixel `i` with per-unit-radius cost
//!
//! ```text
//! mu_{t,i}^2 = s^2 * c_t / sigma_{t,i}^2,   c_t = abar_{t-1} (1 - alpha_t)^2 / (1 - abar_t)^2
//! ```
//!
//! A [`BudgetVector`] starts every pixel at `mu^2 = 1 / sigma^2` and the
//! filter admits a step only while every pixel stays strictly positive.
//! All quantities are squared GDP per unit attack radius.

use std::fmt::Write as _;

use crate::error::{check_dim, Error, Result};
use crate::schedule::NoiseSchedule;
use crate::stats::{clamp_probability, phi_inv};

/// Remaining per-pixel budget.
#[derive(Clone, Debug, PartialEq)]
pub struct BudgetVector {
    remaining: Vec<f64>,
    mu_total: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Ok,
    No,
}

impl BudgetVector {
    /// Fresh budget for RS noise `sigma`: `mu = 1/sigma`, every pixel at `mu^2`.
    pub fn for_sigma(sigma: f64, dim: usize) -> Result<Self> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::param(format!("sigma must be positive, got {sigma}")));
        }
        if dim == 0 {
            return Err(Error::param("budget dimension must be positive"));
        }
        let mu = 1.0 / sigma;
        Ok(BudgetVector {
            remaining: vec![mu * mu; dim],
            mu_total: mu,
        })
    }

    pub fn from_remaining(remaining: Vec<f64>, mu_total: f64) -> Result<Self> {
        let cap = mu_total * mu_total;
        if !(mu_total > 0.0 && cap.is_finite()) {
            return Err(Error::param("mu_total must be positive and finite"));
        }
        if remaining.is_empty() || remaining.iter().any(|&l| !(0.0..=cap).contains(&l)) {
            return Err(Error::param("remaining budget must lie in [0, mu^2]"));
        }
        Ok(BudgetVector {
            remaining,
            mu_total,
        })
    }

    pub fn remaining(&self) -> &[f64] {
        &self.remaining
    }

    pub fn mu_total(&self) -> f64 {
        self.mu_total
    }

    /// `mu^2`, the per-pixel starting budget.
    pub fn capacity(&self) -> f64 {
        self.mu_total * self.mu_total
    }

    pub fn dim(&self) -> usize {
        self.remaining.len()
    }

    pub fn min_remaining(&self) -> f64 {
        self.remaining.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// The filter rule: subtract `cost`; if any pixel ends at or below zero
    /// the original budget is returned with [`Verdict::No`].
    pub fn filter(&self, cost: &[f64]) -> (BudgetVector, Verdict) {
        debug_assert_eq!(cost.len(), self.remaining.len());
        let next: Vec<f64> = self
            .remaining
            .iter()
            .zip(cost)
            .map(|(l, c)| l - c)
            .collect();
        if next.iter().any(|&l| !(l > 0.0)) {
            (self.clone(), Verdict::No)
        } else {
            (
                BudgetVector {
                    remaining: next,
                    mu_total: self.mu_total,
                },
                Verdict::Ok,
            )
        }
    }

    /// In-place form of [`BudgetVector::filter`].
    fn try_spend(&mut self, cost: &[f64]) -> Verdict {
        if self.remaining.iter().zip(cost).any(|(l, c)| !(l - c > 0.0)) {
            return Verdict::No;
        }
        self.remaining
            .iter_mut()
            .zip(cost)
            .for_each(|(l, c)| *l -= c);
        Verdict::Ok
    }

    /// Subtract `cost`, which must not exceed the remaining budget in any
    /// pixel. Used for the exhausting fallback step, which may land exactly
    /// on zero.
    fn spend_exact(&mut self, cost: &[f64]) {
        for (l, c) in self.remaining.iter_mut().zip(cost) {
            debug_assert!(*c <= *l);
            *l = (*l - c).max(0.0);
        }
    }
}

/// `c_t = abar_{t-1} (1 - alpha_t)^2 / (1 - abar_t)^2`.
pub fn step_constant(t: usize, schedule: &NoiseSchedule) -> f64 {
    let beta = schedule.beta(t);
    let tail = 1.0 - schedule.alpha_bar(t);
    schedule.alpha_bar(t - 1) * beta * beta / (tail * tail)
}

fn cost_from_constant(s: f64, c_t: f64, sigma_diag: &[f64]) -> Vec<f64> {
    if s == 0.0 {
        return vec![0.0; sigma_diag.len()];
    }
    sigma_diag
        .iter()
        .map(|&sd| {
            if sd == 0.0 {
                f64::INFINITY
            } else {
                s * s * c_t / (sd * sd)
            }
        })
        .collect()
}

/// Per-pixel budget cost of guiding step `t` at scale `s`. A pixel with zero
/// reverse-step noise costs `+inf` unless `s == 0`.
pub fn step_cost(s: f64, t: usize, schedule: &NoiseSchedule, sigma_diag: &[f64]) -> Vec<f64> {
    cost_from_constant(s, step_constant(t, schedule), sigma_diag)
}

/// One application of the privacy filter at scale `s` on step `t`.
pub fn privacy_filter(
    budget: &BudgetVector,
    s: f64,
    t: usize,
    schedule: &NoiseSchedule,
    sigma_diag: &[f64],
) -> (BudgetVector, Verdict) {
    budget.filter(&step_cost(s, t, schedule, sigma_diag))
}

/// Largest scale (at most `s_cap`) whose cost fits the remaining budget in
/// every pixel: `min_i sigma_{t,i} * sqrt(remaining_i / c_t)`.
pub fn max_feasible_scale(
    budget: &BudgetVector,
    s_cap: f64,
    t: usize,
    schedule: &NoiseSchedule,
    sigma_diag: &[f64],
) -> f64 {
    max_scale_from_constant(budget, s_cap, step_constant(t, schedule), sigma_diag)
}

fn max_scale_from_constant(budget: &BudgetVector, s_cap: f64, c_t: f64, sigma_diag: &[f64]) -> f64 {
    budget
        .remaining
        .iter()
        .zip(sigma_diag)
        .map(|(&l, &sd)| if l <= 0.0 { 0.0 } else { sd * (l / c_t).sqrt() })
        .fold(s_cap, f64::min)
        .max(0.0)
}

/// Per-step effective GDP noise scale `sigma_{t,i} / (s sqrt(c_t))`: guidance
/// at step `t` behaves like a fixed-variance step with this noise.
pub fn effective_noise_scale(s: f64, t: usize, schedule: &NoiseSchedule, sigma: f64) -> f64 {
    sigma / (s * step_constant(t, schedule).sqrt())
}

/// Radius of a fixed-variance composition of Gaussian steps:
/// `(Phi^-1(p_plus) - Phi^-1(p_minus)) / (2 sqrt(sum 1/sigma_i^2))`.
pub fn ars_fixed_radius(sigmas: &[f64], p_plus_lb: f64, p_minus_ub: f64) -> Result<f64> {
    if sigmas.is_empty() || sigmas.iter().any(|&s| !(s > 0.0)) {
        return Err(Error::param("step noise levels must be positive"));
    }
    for p in [p_plus_lb, p_minus_ub] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::param(format!("probability bound {p} outside [0,1]")));
        }
    }
    if p_minus_ub > p_plus_lb {
        return Err(Error::param("need p_minus_ub <= p_plus_lb"));
    }
    let precision: f64 = sigmas.iter().map(|s| 1.0 / (s * s)).sum();
    let gap = phi_inv(clamp_probability(p_plus_lb))? - phi_inv(clamp_probability(p_minus_ub))?;
    Ok(gap / (2.0 * precision.sqrt()))
}

/// One audited filter decision.
#[derive(Clone, Debug, PartialEq)]
pub struct SpendRecord {
    pub t: usize,
    pub scale_used: f64,
    pub cost: Vec<f64>,
    pub min_remaining: f64,
}

/// What the accountant decided for a step.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GuidanceStep {
    /// Filter accepted the requested scale.
    Full,
    /// Filter rejected; the largest feasible scale was spent and the budget
    /// is now exhausted. The scale may be zero.
    Exhausting,
    /// Some pixel has zero reverse-step noise, so any guidance costs an
    /// infinite budget. Skipped without marking exhaustion.
    Blocked,
    /// Budget was exhausted at an earlier step.
    Spent,
}

/// Filter plus fallback plus audit ledger for one sampling run.
#[derive(Clone, Debug)]
pub struct GuidanceAccountant {
    budget: BudgetVector,
    records: Vec<SpendRecord>,
    exhausted_at: Option<usize>,
    cost_multiplier: f64,
    keep_records: bool,
}

impl GuidanceAccountant {
    pub fn new(budget: BudgetVector) -> Self {
        GuidanceAccountant {
            budget,
            records: Vec::new(),
            exhausted_at: None,
            cost_multiplier: 1.0,
            keep_records: true,
        }
    }

    /// Skip the per-step ledger. Decisions are unchanged.
    pub fn without_records(mut self) -> Self {
        self.keep_records = false;
        self
    }

    /// Fault injection: scale every cost the accountant charges. Only
    /// meant for negative controls of the ledger audit.
    #[doc(hidden)]
    pub fn with_cost_multiplier(mut self, m: f64) -> Self {
        self.cost_multiplier = m;
        self
    }

    pub fn budget(&self) -> &BudgetVector {
        &self.budget
    }

    pub fn exhausted_at(&self) -> Option<usize> {
        self.exhausted_at
    }

    pub fn records(&self) -> &[SpendRecord] {
        &self.records
    }

    pub fn into_ledger(self) -> SpendLedger {
        SpendLedger {
            capacity: self.budget.capacity(),
            records: self.records,
        }
    }

    /// Decide the guidance scale for step `t` given the requested `s`.
    /// Returns the scale to apply (0 for none) and the kind of decision.
    pub fn step(
        &mut self,
        s: f64,
        t: usize,
        schedule: &NoiseSchedule,
        sigma_diag: &[f64],
    ) -> Result<(f64, GuidanceStep)> {
        check_dim(self.budget.dim(), sigma_diag.len())?;
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::param(format!("guidance scale {s} outside [0,1]")));
        }
        let d = self.budget.dim();
        if self.exhausted_at.is_some() {
            self.record(t, 0.0, vec![0.0; d]);
            return Ok((0.0, GuidanceStep::Spent));
        }
        let c_t = step_constant(t, schedule) * self.cost_multiplier;
        let cost = cost_from_constant(s, c_t, sigma_diag);
        if self.budget.try_spend(&cost) == Verdict::Ok {
            self.record(t, s, cost);
            return Ok((s, GuidanceStep::Full));
        }
        if cost.iter().any(|c| c.is_infinite()) {
            self.record(t, 0.0, vec![0.0; d]);
            return Ok((0.0, GuidanceStep::Blocked));
        }
        // fallback: spend whatever is left at the largest feasible scale
        let mut scale = max_scale_from_constant(&self.budget, s, c_t, sigma_diag);
        let mut cost = cost_from_constant(scale, c_t, sigma_diag);
        let mut tries = 0;
        while scale > 0.0 && cost.iter().zip(&self.budget.remaining).any(|(c, l)| c > l) {
            tries += 1;
            scale = if tries > 64 {
                0.0
            } else {
                scale * (1.0 - 4.0 * f64::EPSILON)
            };
            cost = cost_from_constant(scale, c_t, sigma_diag);
        }
        self.budget.spend_exact(&cost);
        self.exhausted_at = Some(t);
        self.record(t, scale, cost);
        Ok((scale, GuidanceStep::Exhausting))
    }

    fn record(&mut self, t: usize, scale_used: f64, cost: Vec<f64>) {
        if !self.keep_records {
            return;
        }
        self.records.push(SpendRecord {
            t,
            scale_used,
            cost,
            min_remaining: self.budget.min_remaining(),
        });
    }
}

/// Audit trail of a run's filter decisions.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SpendLedger {
    pub capacity: f64,
    pub records: Vec<SpendRecord>,
}

impl SpendLedger {
    /// Per-pixel total of accepted costs.
    pub fn total_spent(&self) -> Vec<f64> {
        let d = self.records.first().map_or(0, |r| r.cost.len());
        let mut total = vec![0.0; d];
        for r in &self.records {
            total.iter_mut().zip(&r.cost).for_each(|(t, c)| *t += c);
        }
        total
    }

    /// Plain-text table `t scale_used min_cost max_cost min_remaining`.
    pub fn to_table(&self) -> String {
        let mut out = String::from("t scale_used min_cost max_cost min_remaining\n");
        for r in &self.records {
            let min = r.cost.iter().cloned().fold(f64::INFINITY, f64::min);
            let max = r.cost.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let _ = writeln!(
                out,
                "{} {:.16e} {:.16e} {:.16e} {:.16e}",
                r.t, r.scale_used, min, max, r.min_remaining
            );
        }
        out
    }
}
