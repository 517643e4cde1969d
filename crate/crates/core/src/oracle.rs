//! Independent reference computations and the oracle battery.
//!
//! Every check here recomputes a quantity along a route that shares no code
//! with the implementation it audits: the normal CDF from its power series
//! and continued fraction, binomial tails by direct summation, budget costs
//! from alpha-bar ratios rather than stored betas.

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::denoise::{gmm_posterior_mean, mc_posterior_mean_oracle, GmmDenoiser, GmmModel};
use crate::error::{Error, Result};
use crate::exec::Parallelism;
use crate::privacy::{ars_fixed_radius, step_cost, BudgetVector, GuidanceAccountant};
use crate::rng::{standard_normal_vec, StreamKey};
use crate::sampler::{
    ddpm_step, ddpm_step_eps, guided_mean, CleanInput, Method, Pipeline, PipelineConfig,
};
use crate::schedule::NoiseSchedule;
use crate::stats::{clopper_pearson_lower, phi_inv};

// ---------------------------------------------------------------------------
// reference formulas

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal CDF from the power series `0.5 + phi(z) sum z^{2n+1}/(2n+1)!!`
/// for `|z| <= 3` and the Mills-ratio continued fraction beyond.
pub fn normal_cdf_reference(z: f64) -> f64 {
    if z > 0.0 {
        return 1.0 - normal_cdf_reference(-z);
    }
    let pdf = INV_SQRT_2PI * (-0.5 * z * z).exp();
    if z >= -3.0 {
        let (mut term, mut sum, mut n) = (z, z, 0u32);
        while term.abs() > 1e-18 * sum.abs() && n < 500 {
            n += 1;
            term *= z * z / f64::from(2 * n + 1);
            sum += term;
        }
        0.5 + pdf * sum
    } else {
        let a = -z;
        let mut frac = a;
        for k in (1..=300).rev() {
            frac = a + f64::from(k) / frac;
        }
        pdf / frac
    }
}

/// Normal quantile by bisection on [`normal_cdf_reference`].
pub fn phi_inv_reference(p: f64) -> f64 {
    if p > 0.5 {
        return -phi_inv_reference(1.0 - p);
    }
    let (mut lo, mut hi) = (-40.0f64, 0.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if normal_cdf_reference(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn ln_factorials(n: u64) -> Vec<f64> {
    let mut out = Vec::with_capacity(n as usize + 1);
    out.push(0.0);
    let mut acc = 0.0;
    for i in 1..=n {
        acc += (i as f64).ln();
        out.push(acc);
    }
    out
}

/// `P[Bin(n, p) >= k]` by direct summation.
pub fn binomial_tail_reference(k: u64, n: u64, p: f64) -> f64 {
    if k == 0 {
        return 1.0;
    }
    if p <= 0.0 {
        return 0.0;
    }
    if p >= 1.0 {
        return 1.0;
    }
    let lf = ln_factorials(n);
    (k..=n)
        .map(|j| {
            let ln_c = lf[n as usize] - lf[j as usize] - lf[(n - j) as usize];
            (ln_c + j as f64 * p.ln() + (n - j) as f64 * (1.0 - p).ln()).exp()
        })
        .sum()
}

/// Clopper–Pearson lower bound by bisection on the binomial tail.
pub fn clopper_pearson_lower_reference(k: u64, n: u64, alpha: f64) -> f64 {
    if k == 0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if binomial_tail_reference(k, n, mid) < alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Per-step budget constant from alpha-bar ratios only.
pub fn step_constant_reference(t: usize, schedule: &NoiseSchedule) -> f64 {
    let prev = schedule.alpha_bar(t - 1);
    let cur = schedule.alpha_bar(t);
    let one_minus_alpha = 1.0 - cur / prev;
    prev * one_minus_alpha * one_minus_alpha / ((1.0 - cur) * (1.0 - cur))
}

/// Coefficient multiplying the guided prediction in the reverse-step mean.
pub fn guided_coefficient_reference(t: usize, schedule: &NoiseSchedule) -> f64 {
    let prev = schedule.alpha_bar(t - 1);
    let cur = schedule.alpha_bar(t);
    prev.sqrt() * (1.0 - cur / prev) / (1.0 - cur)
}

/// Random nondecreasing schedule with at most `max_steps` steps.
pub fn random_schedule<R: Rng + ?Sized>(
    rng: &mut R,
    max_steps: usize,
    beta_max: f64,
) -> NoiseSchedule {
    let steps = rng.random_range(1..=max_steps);
    let mut betas: Vec<f64> = (0..steps)
        .map(|_| rng.random_range(1e-4..beta_max))
        .collect();
    betas.sort_by(f64::total_cmp);
    NoiseSchedule::from_betas(betas).expect("sorted betas in (0,1)")
}

fn random_gmm<R: Rng + ?Sized>(rng: &mut R) -> GmmModel {
    let k = rng.random_range(1..=4usize);
    let d = rng.random_range(1..=3usize);
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let rest: f64 = weights[1..].iter().sum();
    weights[0] = 1.0 - rest;
    let means = (0..k)
        .map(|_| {
            standard_normal_vec(rng, d)
                .into_iter()
                .map(|v| 2.0 * v)
                .collect()
        })
        .collect();
    let scales = (0..k).map(|_| rng.random_range(0.5..1.5)).collect();
    GmmModel::new(weights, means, scales, (0..k).collect()).expect("valid random mixture")
}

// ---------------------------------------------------------------------------
// the battery

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OracleCheck {
    GmmDenoiser,
    ClopperPearson,
    PhiInv,
    FilterLedger,
    StepIdentity,
    ArsConsistency,
    Sensitivity,
    ZeroScale,
}

impl OracleCheck {
    pub const ALL: [OracleCheck; 8] = [
        OracleCheck::GmmDenoiser,
        OracleCheck::ClopperPearson,
        OracleCheck::PhiInv,
        OracleCheck::FilterLedger,
        OracleCheck::StepIdentity,
        OracleCheck::ArsConsistency,
        OracleCheck::Sensitivity,
        OracleCheck::ZeroScale,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OracleCheck::GmmDenoiser => "gmm_denoiser",
            OracleCheck::ClopperPearson => "clopper_pearson",
            OracleCheck::PhiInv => "phi_inv",
            OracleCheck::FilterLedger => "filter_ledger",
            OracleCheck::StepIdentity => "step_identity",
            OracleCheck::ArsConsistency => "ars_consistency",
            OracleCheck::Sensitivity => "sensitivity",
            OracleCheck::ZeroScale => "zero_scale",
        }
    }
}

impl fmt::Display for OracleCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for OracleCheck {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        OracleCheck::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| Error::param(format!("unknown oracle check '{s}'")))
    }
}

/// Knobs for [`run_battery`].
#[derive(Clone, Copy, Debug, Default)]
pub struct BatteryOptions {
    pub seed: u64,
    /// Charge the privacy accountant only half the true cost, so the
    /// ledger audit must fail.
    pub inject_filter_fault: bool,
    pub parallelism: Parallelism,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub check: OracleCheck,
    pub cases: usize,
    pub failures: usize,
    /// Failures the check tolerates (statistical checks allow a few).
    pub allowed_failures: usize,
    pub max_delta: f64,
    pub tolerance: f64,
    /// Inputs and deltas of the first few failures.
    pub details: Vec<String>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures <= self.allowed_failures
    }

    fn new(check: OracleCheck, tolerance: f64) -> Self {
        CheckReport {
            check,
            cases: 0,
            failures: 0,
            allowed_failures: 0,
            max_delta: 0.0,
            tolerance,
            details: Vec::new(),
        }
    }

    fn observe(&mut self, delta: f64, ok: bool, detail: impl FnOnce() -> String) {
        self.cases += 1;
        if delta.is_nan() || delta > self.max_delta {
            self.max_delta = delta;
        }
        if !ok {
            self.failures += 1;
            if self.details.len() < 5 {
                self.details.push(detail());
            }
        }
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:<16} cases={:<6} failures={} (allowed {}) max_delta={:.3e} tol={:.1e}",
            if self.passed() { "PASS" } else { "FAIL" },
            self.check.name(),
            self.cases,
            self.failures,
            self.allowed_failures,
            self.max_delta,
            self.tolerance
        )?;
        for d in &self.details {
            write!(f, "\n    {d}")?;
        }
        Ok(())
    }
}

pub fn run_battery(checks: &[OracleCheck], opts: &BatteryOptions) -> Result<Vec<CheckReport>> {
    if checks.is_empty() {
        return Err(Error::param("empty oracle battery selection"));
    }
    checks.iter().map(|&c| run_check(c, opts)).collect()
}

pub fn run_check(check: OracleCheck, opts: &BatteryOptions) -> Result<CheckReport> {
    let key = StreamKey::path(opts.seed, &[0x0_7ac1e, check as u64]);
    match check {
        OracleCheck::GmmDenoiser => check_gmm_denoiser(key, 50, 100_000, opts.parallelism),
        OracleCheck::ClopperPearson => Ok(check_clopper_pearson()),
        OracleCheck::PhiInv => Ok(check_phi_inv(key, 1000)),
        OracleCheck::FilterLedger => Ok(check_filter_ledger(key, 10_000, opts.inject_filter_fault)),
        OracleCheck::StepIdentity => Ok(check_step_identity(key, 1000)),
        OracleCheck::ArsConsistency => check_ars_consistency(key, 1000),
        OracleCheck::Sensitivity => check_sensitivity(key, 1000),
        OracleCheck::ZeroScale => check_zero_scale(key, 100),
    }
}

/// Analytic posterior mean within 3 standard errors of the importance
/// sampling estimate in every coordinate; one failing case tolerated.
pub fn check_gmm_denoiser(
    key: StreamKey,
    cases: usize,
    samples: usize,
    parallelism: Parallelism,
) -> Result<CheckReport> {
    let mut report = CheckReport::new(OracleCheck::GmmDenoiser, 3.0);
    report.allowed_failures = 1;
    let results = parallelism.map(cases, |i| -> Result<(f64, String)> {
        let mut rng = key.child(i as u64).rng();
        let gmm = random_gmm(&mut rng);
        let alpha_bar: f64 = rng.random_range(0.1..0.9);
        let (x0, _) = gmm.sample(&mut rng);
        let eps = standard_normal_vec(&mut rng, gmm.dim());
        let x_t: Vec<f64> = x0
            .iter()
            .zip(&eps)
            .map(|(a, e)| alpha_bar.sqrt() * a + (1.0 - alpha_bar).sqrt() * e)
            .collect();
        let exact = gmm_posterior_mean(&gmm, &x_t, alpha_bar)?;
        let (est, se) = mc_posterior_mean_oracle(&gmm, &x_t, alpha_bar, samples, key.child(i as u64).raw())?;
        let z = exact
            .iter()
            .zip(&est)
            .zip(&se)
            .map(|((a, b), s)| (a - b).abs() / s)
            .fold(0.0, f64::max);
        Ok((z, format!("case {i}: abar={alpha_bar:.3} x_t={x_t:?} exact={exact:?} mc={est:?} se={se:?}")))
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    for (z, detail) in results {
        report.observe(z, z <= 3.0, || detail);
    }
    Ok(report)
}

/// Bisection on the incomplete beta against bisection on the summed
/// binomial tail, for every `k <= n <= 30` and both confidence levels, plus
/// the `k = n = 1000` closed form.
pub fn check_clopper_pearson() -> CheckReport {
    let mut report = CheckReport::new(OracleCheck::ClopperPearson, 1e-9);
    for alpha in [0.05, 0.001] {
        for n in 1..=30u64 {
            for k in 0..=n {
                let got = clopper_pearson_lower(k, n, alpha).unwrap_or(f64::NAN);
                let want = clopper_pearson_lower_reference(k, n, alpha);
                let delta = (got - want).abs();
                report.observe(delta, delta <= 1e-9, || {
                    format!("k={k} n={n} alpha={alpha}: got {got:.15} want {want:.15}")
                });
            }
        }
    }
    let got = clopper_pearson_lower(1000, 1000, 0.001).unwrap_or(f64::NAN);
    let want = 0.001f64.powf(1.0 / 1000.0);
    let delta = (got - want).abs();
    report.observe(
        delta,
        delta <= 1e-9 && (want - 0.993_116).abs() < 5e-7,
        || format!("k=n=1000: got {got:.15} want {want:.15}"),
    );
    report
}

/// Quantiles at log-spaced tail probabilities and uniform interior points.
pub fn check_phi_inv(key: StreamKey, probes: usize) -> CheckReport {
    let mut report = CheckReport::new(OracleCheck::PhiInv, 1e-9);
    let mut rng = key.rng();
    for i in 0..probes {
        let p = match i % 4 {
            0 => 10f64.powf(-rng.random_range(1.0..12.0)),
            1 => 1.0 - 10f64.powf(-rng.random_range(1.0..12.0)),
            _ => rng.random_range(1e-12..1.0 - 1e-12),
        };
        let got = phi_inv(p).unwrap_or(f64::NAN);
        let want = phi_inv_reference(p);
        let delta = (got - want).abs();
        report.observe(delta, delta <= 1e-9, || {
            format!("p={p:e}: got {got:.15} want {want:.15}")
        });
    }
    report
}

/// Result of one randomized filter run, audited independently.
#[derive(Clone, Debug)]
pub struct FilterAudit {
    pub max_overspend: f64,
    pub guided_after_exhaustion: bool,
    pub capacity: f64,
}

/// Drive a [`GuidanceAccountant`] through a random schedule with a random
/// requested scale and random per-pixel noise each step, then re-derive
/// every charged cost from the ledger.
pub fn audit_random_filter_run<R: Rng + ?Sized>(rng: &mut R, cost_multiplier: f64) -> FilterAudit {
    let schedule = random_schedule(rng, 50, 0.5);
    let d = rng.random_range(1..=8usize);
    let sigma = rng.random_range(0.25..3.0);
    let budget = BudgetVector::for_sigma(sigma, d).expect("positive sigma");
    let capacity = budget.capacity();
    let mut acct = GuidanceAccountant::new(budget).with_cost_multiplier(cost_multiplier);
    let mut noise = Vec::new();
    for t in (1..=schedule.steps()).rev() {
        let base = schedule.posterior_var(t).sqrt();
        let sd: Vec<f64> = (0..d)
            .map(|_| {
                if rng.random::<f64>() < 0.05 {
                    0.0
                } else {
                    base * rng.random_range(0.2..2.0) + 1e-3 * rng.random::<f64>()
                }
            })
            .collect();
        let s = rng.random::<f64>();
        acct.step(s, t, &schedule, &sd).expect("valid step");
        noise.push((t, sd));
    }
    let exhausted_at = acct.exhausted_at();
    let ledger = acct.into_ledger();
    let mut spent = vec![0.0; d];
    let mut guided_after = false;
    for (record, (t, sd)) in ledger.records.iter().zip(&noise) {
        debug_assert_eq!(record.t, *t);
        let c = step_constant_reference(*t, &schedule);
        let s = record.scale_used;
        for (total, sdi) in spent.iter_mut().zip(sd) {
            if s > 0.0 {
                *total += s * s * c / (sdi * sdi);
            }
        }
        if let Some(at) = exhausted_at {
            guided_after |= *t < at && s > 0.0;
        }
    }
    let max_overspend = spent
        .iter()
        .map(|v| v - capacity)
        .fold(f64::NEG_INFINITY, f64::max);
    FilterAudit {
        max_overspend,
        guided_after_exhaustion: guided_after,
        capacity,
    }
}

pub fn check_filter_ledger(key: StreamKey, runs: usize, inject_fault: bool) -> CheckReport {
    let mut report = CheckReport::new(OracleCheck::FilterLedger, 1e-12);
    let multiplier = if inject_fault { 0.5 } else { 1.0 };
    for i in 0..runs {
        let mut rng = key.child(i as u64).rng();
        let audit = audit_random_filter_run(&mut rng, multiplier);
        let ok = audit.max_overspend <= 1e-12 && !audit.guided_after_exhaustion;
        report.observe(audit.max_overspend.max(0.0), ok, || {
            format!(
                "run {i}: overspend {:.3e} of capacity {:.4}, guided after exhaustion: {}",
                audit.max_overspend, audit.capacity, audit.guided_after_exhaustion
            )
        });
    }
    report
}

/// Noise-prediction and clean-prediction forms of a reverse step agree
/// under a shared random stream.
pub fn check_step_identity(key: StreamKey, cases: usize) -> CheckReport {
    let mut report = CheckReport::new(OracleCheck::StepIdentity, 1e-12);
    for i in 0..cases {
        let mut rng = key.child(i as u64).rng();
        let schedule = random_schedule(&mut rng, 50, 0.2);
        let t = rng.random_range(1..=schedule.steps());
        let d = rng.random_range(1..=6usize);
        let x_t = standard_normal_vec(&mut rng, d);
        let eps = standard_normal_vec(&mut rng, d);
        let sd: Vec<f64> = (0..d).map(|_| rng.random_range(0.0..1.0)).collect();
        let ab = schedule.alpha_bar(t);
        let x0: Vec<f64> = x_t
            .iter()
            .zip(&eps)
            .map(|(x, e)| (x - (1.0 - ab).sqrt() * e) / ab.sqrt())
            .collect();
        let seed = key.child(i as u64).child(1);
        let a = ddpm_step(&x_t, &x0, t, &schedule, &sd, &mut seed.rng());
        let b = ddpm_step_eps(&x_t, &eps, t, &schedule, &sd, &mut seed.rng());
        let delta = a
            .iter()
            .zip(&b)
            .map(|(u, v)| (u - v).abs())
            .fold(0.0, f64::max);
        report.observe(delta, delta <= 1e-12, || {
            format!("case {i}: t={t} T={} delta={delta:e}", schedule.steps())
        });
    }
    report
}

/// Radius from the accountant's ledger against the fixed-variance
/// composition formula fed with per-step effective noise levels.
pub fn check_ars_consistency(key: StreamKey, cases: usize) -> Result<CheckReport> {
    let mut report = CheckReport::new(OracleCheck::ArsConsistency, 1e-9);
    let mut i = 0u64;
    while report.cases < cases {
        i += 1;
        let mut rng = key.child(i).rng();
        let schedule = random_schedule(&mut rng, 50, 0.5);
        // a tiny RS sigma leaves the filter slack, so every step is admitted
        let mut acct = GuidanceAccountant::new(BudgetVector::for_sigma(1e-6, 1)?);
        let mut effective = Vec::new();
        for t in (2..=schedule.steps()).rev() {
            if rng.random::<f64>() < 0.3 {
                continue;
            }
            let s = rng.random_range(0.05..1.0);
            let sd = rng.random_range(0.05..2.0);
            acct.step(s, t, &schedule, &[sd])?;
            effective.push(sd / (s * step_constant_reference(t, &schedule).sqrt()));
        }
        if effective.is_empty() {
            continue;
        }
        let p_plus = rng.random_range(0.5..0.999_999);
        let p_minus = rng.random_range(0.0..p_plus);
        let spent = acct.into_ledger().total_spent()[0];
        let from_ledger = crate::certify::radius_from_budget(spent, p_plus, p_minus);
        let fixed = ars_fixed_radius(&effective, p_plus, p_minus)?;
        let delta = (from_ledger - fixed).abs();
        report.observe(delta, delta <= 1e-9, || {
            format!(
                "case {i}: {} steps, ledger radius {from_ledger} vs fixed {fixed}",
                effective.len()
            )
        });
    }
    Ok(report)
}

/// Perturbing one input pixel by `e` moves the guided step mean in that
/// pixel by exactly `s * coef * |e|` and leaves the others untouched.
pub fn check_sensitivity(key: StreamKey, cases: usize) -> Result<CheckReport> {
    let mut report = CheckReport::new(OracleCheck::Sensitivity, 1e-12);
    for i in 0..cases {
        let mut rng = key.child(i as u64).rng();
        let schedule = random_schedule(&mut rng, 50, 0.5);
        let t = rng.random_range(1..=schedule.steps());
        let d = rng.random_range(1..=6usize);
        let x_t = standard_normal_vec(&mut rng, d);
        let x0 = standard_normal_vec(&mut rng, d);
        let x = standard_normal_vec(&mut rng, d);
        let s = rng.random_range(0.0..=1.0);
        let pixel = rng.random_range(0..d);
        let e: f64 = rng.random_range(-2.0..2.0);
        let mut shifted = x.clone();
        shifted[pixel] += e;
        let e = shifted[pixel] - x[pixel];
        let a = guided_mean(&x_t, &x0, CleanInput::new(&x), s, t, &schedule)?;
        let b = guided_mean(&x_t, &x0, CleanInput::new(&shifted), s, t, &schedule)?;
        let want = s * guided_coefficient_reference(t, &schedule) * e.abs();
        let mut delta = ((b[pixel] - a[pixel]).abs() - want).abs();
        for j in (0..d).filter(|&j| j != pixel) {
            delta = delta.max((b[j] - a[j]).abs());
        }
        // the budget charged for this step is the squared sensitivity over the noise
        let sd = rng.random_range(0.1..1.0);
        let cost = step_cost(s, t, &schedule, &[sd])[0];
        let mu_sq = (s * guided_coefficient_reference(t, &schedule) / sd).powi(2);
        let rel = if mu_sq > 0.0 {
            (cost - mu_sq).abs() / mu_sq
        } else {
            cost
        };
        let ok = delta <= 1e-12 && rel <= 1e-12;
        report.observe(delta.max(rel), ok, || {
            format!("case {i}: t={t} s={s} e={e} mean delta={delta:e} cost rel delta={rel:e}")
        });
    }
    Ok(report)
}

/// With `s = 0` the guided pipelines never look at the input.
pub fn check_zero_scale(key: StreamKey, pairs: usize) -> Result<CheckReport> {
    let mut report = CheckReport::new(OracleCheck::ZeroScale, 0.0);
    let base = NoiseSchedule::reference();
    let mut rng = key.rng();
    let gmm = crate::data::make_gmm_task(3, 2, 2.0, 0.5, key.raw())?;
    let den = GmmDenoiser::new(gmm);
    let pipelines = [
        Pipeline::new(
            PipelineConfig::new(Method::Adds, 1.0).with_scale(0.0),
            &base,
            &den,
        )?,
        Pipeline::new(
            PipelineConfig::new(Method::Adds, 1.5)
                .with_scale(0.0)
                .with_votes(5),
            &base,
            &den,
        )?,
        Pipeline::new(
            PipelineConfig::new(Method::AddsOneShot, 2.0).with_scale(0.0),
            &base,
            &den,
        )?,
    ];
    for i in 0..pairs {
        let p = &pipelines[i % pipelines.len()];
        let a: Vec<f64> = standard_normal_vec(&mut rng, 2)
            .into_iter()
            .map(|v| 3.0 * v)
            .collect();
        let b: Vec<f64> = standard_normal_vec(&mut rng, 2)
            .into_iter()
            .map(|v| 3.0 * v)
            .collect();
        let seed = key.child(i as u64);
        let out_a = p.sample(&a, &mut seed.rng())?;
        let out_b = p.sample(&b, &mut seed.rng())?;
        let same = out_a.len() == out_b.len()
            && out_a
                .iter()
                .flatten()
                .zip(out_b.iter().flatten())
                .all(|(u, v)| u.to_bits() == v.to_bits());
        report.observe(if same { 0.0 } else { 1.0 }, same, || {
            format!("pair {i}: inputs {a:?} and {b:?} gave different outputs")
        });
    }
    Ok(report)
}
