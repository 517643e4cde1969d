//! Smoothed prediction and L2 certification.
//!
//! Each smoothing sample runs the pipeline once, classifies every vote
//! branch and reduces them by majority vote to one label. Prediction and
//! certification then count those labels over independent substreams.

use std::time::Instant;

use crate::denoise::Denoiser;
use crate::error::{Error, Result};
use crate::exec::Parallelism;
use crate::rng::StreamKey;
use crate::sampler::Pipeline;
use crate::stats::{binomial_test_half, clamp_probability};

pub use crate::stats::{clopper_pearson_lower, clopper_pearson_upper, phi_inv};

/// The base classifier applied to pipeline outputs.
pub trait Classifier: Sync {
    fn num_classes(&self) -> usize;
    fn classify(&self, x: &[f64]) -> usize;
}

impl<C: Classifier + ?Sized> Classifier for &C {
    fn num_classes(&self) -> usize {
        (**self).num_classes()
    }
    fn classify(&self, x: &[f64]) -> usize {
        (**self).classify(x)
    }
}

/// `max(0, sigma/2 * (Phi^-1(p_plus) - Phi^-1(p_minus)))`, with both bounds
/// clamped into `[1e-12, 1 - 1e-12]`.
pub fn radius(sigma: f64, p_plus_lb: f64, p_minus_ub: f64) -> f64 {
    let hi = phi_inv(clamp_probability(p_plus_lb)).unwrap_or(f64::NAN);
    let lo = phi_inv(clamp_probability(p_minus_ub)).unwrap_or(f64::NAN);
    let r = 0.5 * sigma * (hi - lo);
    if r > 0.0 {
        r
    } else {
        0.0
    }
}

/// Radius when the run spent `spent` squared-GDP per unit radius in its
/// tightest pixel; equivalent to smoothing with noise `1/sqrt(spent)`.
pub fn radius_from_budget(spent: f64, p_plus_lb: f64, p_minus_ub: f64) -> f64 {
    radius(1.0 / spent.sqrt(), p_plus_lb, p_minus_ub)
}

/// Most frequent label; ties go to the smallest label.
pub fn majority_vote(labels: &[usize]) -> Result<usize> {
    let max = *labels
        .iter()
        .max()
        .ok_or_else(|| Error::param("cannot vote over an empty list"))?;
    let mut counts = vec![0usize; max + 1];
    for &l in labels {
        counts[l] += 1;
    }
    Ok(top_two(&counts).0)
}

/// `(top, runner_up)` indices by count, ties to the smaller index.
fn top_two<T: Copy + PartialOrd>(counts: &[T]) -> (usize, Option<usize>) {
    let mut top = 0;
    for i in 1..counts.len() {
        if counts[i] > counts[top] {
            top = i;
        }
    }
    let mut second: Option<usize> = None;
    for i in 0..counts.len() {
        if i != top && second.is_none_or(|s| counts[i] > counts[s]) {
            second = Some(i);
        }
    }
    (top, second)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Prediction {
    Label(usize),
    Abstain,
}

impl Prediction {
    pub fn label(self) -> Option<usize> {
        match self {
            Prediction::Label(l) => Some(l),
            Prediction::Abstain => None,
        }
    }
}

/// A pipeline and base classifier viewed as one randomized classifier.
pub struct SmoothedClassifier<'a, D, C> {
    pipeline: &'a Pipeline<D>,
    classifier: &'a C,
    parallelism: Parallelism,
}

impl<'a, D: Denoiser, C: Classifier> SmoothedClassifier<'a, D, C> {
    pub fn new(pipeline: &'a Pipeline<D>, classifier: &'a C) -> Self {
        SmoothedClassifier {
            pipeline,
            classifier,
            parallelism: Parallelism::default(),
        }
    }

    pub fn with_parallelism(mut self, parallelism: Parallelism) -> Self {
        self.parallelism = parallelism;
        self
    }

    pub fn pipeline(&self) -> &Pipeline<D> {
        self.pipeline
    }

    pub fn sigma(&self) -> f64 {
        self.pipeline.config().sigma
    }

    /// One smoothing sample reduced to a label.
    pub fn sample_label(&self, x: &[f64], key: StreamKey) -> Result<usize> {
        let outputs = self.pipeline.sample(x, &mut key.rng())?;
        let labels: Vec<usize> = outputs
            .iter()
            .map(|o| self.classifier.classify(o))
            .collect();
        majority_vote(&labels)
    }

    /// Label counts over `n` samples; sample `i` draws from `key.child(i)`.
    pub fn counts(&self, x: &[f64], n: usize, key: StreamKey) -> Result<Vec<u64>> {
        let labels = self
            .parallelism
            .map(n, |i| self.sample_label(x, key.child(i as u64)));
        let mut counts = vec![0u64; self.classifier.num_classes().max(1)];
        for l in labels {
            let l = l?;
            if l >= counts.len() {
                counts.resize(l + 1, 0);
            }
            counts[l] += 1;
        }
        Ok(counts)
    }
}

/// Outcome of [`smoothed_predict`].
#[derive(Clone, Debug, PartialEq)]
pub struct PredictOutcome {
    pub prediction: Prediction,
    /// Plurality label, reported even when abstaining.
    pub top: usize,
    pub counts: Vec<u64>,
    pub p_value: f64,
}

/// Predict from `n0` samples: the plurality label if an exact two-sided
/// binomial test of top against runner-up rejects equality at `alpha`,
/// otherwise abstain.
pub fn smoothed_predict<D: Denoiser, C: Classifier>(
    model: &SmoothedClassifier<'_, D, C>,
    x: &[f64],
    n0: usize,
    alpha: f64,
    key: StreamKey,
) -> Result<PredictOutcome> {
    if n0 == 0 {
        return Err(Error::param("n0 must be at least 1"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("alpha={alpha} outside (0,1)")));
    }
    let counts = model.counts(x, n0, key)?;
    Ok(decide(counts, alpha))
}

fn decide(counts: Vec<u64>, alpha: f64) -> PredictOutcome {
    let (top, second) = top_two(&counts);
    let n_top = counts[top];
    let n_second = second.map_or(0, |s| counts[s]);
    let p_value = binomial_test_half(n_top, n_top + n_second);
    let prediction = if p_value <= alpha {
        Prediction::Label(top)
    } else {
        Prediction::Abstain
    };
    PredictOutcome {
        prediction,
        top,
        counts,
        p_value,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertificationResult {
    pub prediction: Prediction,
    /// Phase-one plurality label.
    pub top_label: usize,
    /// Hits of `top_label` among the `n` phase-two samples.
    pub hits: u64,
    pub p_plus_lb: f64,
    pub p_minus_ub: f64,
    pub radius: f64,
    pub n0: usize,
    pub n: usize,
    pub alpha: f64,
    pub wall_time_ms: f64,
}

impl CertificationResult {
    pub fn abstained(&self) -> bool {
        self.prediction == Prediction::Abstain
    }

    pub fn is_correct(&self, true_label: usize) -> bool {
        self.top_label == true_label
    }

    /// Counts toward certified accuracy at radius `r`.
    pub fn certified_at(&self, true_label: usize, r: f64) -> bool {
        self.prediction == Prediction::Label(true_label) && self.radius >= r
    }
}

/// Two-phase certification: pick the plurality label from `n0` samples,
/// lower-bound its probability from `n` fresh samples, and convert the
/// bound into an L2 radius (`p_minus_ub = 1 - p_plus_lb`). Abstains with
/// radius 0 when the bound is at most 1/2.
pub fn certify<D: Denoiser, C: Classifier>(
    model: &SmoothedClassifier<'_, D, C>,
    x: &[f64],
    n0: usize,
    n: usize,
    alpha: f64,
    key: StreamKey,
) -> Result<CertificationResult> {
    if n0 == 0 || n < n0 {
        return Err(Error::param(format!("need n >= n0 >= 1 (n0={n0}, n={n})")));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::param(format!("alpha={alpha} outside (0,1)")));
    }
    let start = Instant::now();
    let selection = model.counts(x, n0, key.child(0))?;
    let top_label = top_two(&selection).0;
    let estimate = model.counts(x, n, key.child(1))?;
    let hits = estimate.get(top_label).copied().unwrap_or(0);
    let p_plus_lb = clopper_pearson_lower(hits, n as u64, alpha)?;
    let p_minus_ub = 1.0 - p_plus_lb;
    let (prediction, r) = if p_plus_lb > 0.5 {
        (
            Prediction::Label(top_label),
            radius(model.sigma(), p_plus_lb, p_minus_ub),
        )
    } else {
        (Prediction::Abstain, 0.0)
    };
    Ok(CertificationResult {
        prediction,
        top_label,
        hits,
        p_plus_lb,
        p_minus_ub,
        radius: r,
        n0,
        n,
        alpha,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::denoise::ZeroDenoiser;
    use crate::sampler::{Method, PipelineConfig};
    use crate::schedule::NoiseSchedule;

    struct Constant(usize);
    impl Classifier for Constant {
        fn num_classes(&self) -> usize {
            3
        }
        fn classify(&self, _x: &[f64]) -> usize {
            self.0
        }
    }

    struct SignOf;
    impl Classifier for SignOf {
        fn num_classes(&self) -> usize {
            2
        }
        fn classify(&self, x: &[f64]) -> usize {
            usize::from(x[0] > 0.0)
        }
    }

    fn rs(sigma: f64) -> Pipeline<ZeroDenoiser> {
        Pipeline::new(
            PipelineConfig::new(Method::Rs, sigma),
            &NoiseSchedule::reference(),
            ZeroDenoiser { dim: 1 },
        )
        .unwrap()
    }

    #[test]
    fn radius_examples() {
        assert_eq!(radius(1.0, 0.7, 0.7), 0.0);
        assert!((radius(1.0, 0.99, 0.01) - 2.326_348).abs() < 1e-6);
        let r1 = radius(1.0, 0.9, 0.05);
        assert!((radius(2.0, 0.9, 0.05) - 2.0 * r1).abs() < 1e-15);
        assert_eq!(radius(1.0, 0.3, 0.6), 0.0);
        assert!(radius(1.0, 1.0, 0.0).is_finite());
    }

    #[test]
    fn votes() {
        assert_eq!(majority_vote(&[0, 0, 1, 2, 0]).unwrap(), 0);
        assert_eq!(majority_vote(&[0, 1]).unwrap(), 0);
        assert_eq!(majority_vote(&[1, 0]).unwrap(), 0);
        assert_eq!(majority_vote(&[2]).unwrap(), 2);
        assert_eq!(majority_vote(&[3, 1, 3, 1, 2]).unwrap(), 1);
        assert!(majority_vote(&[]).is_err());
    }

    #[test]
    fn unanimous_samples_predict() {
        let p = rs(1.0);
        let model = SmoothedClassifier::new(&p, &Constant(2));
        let out = smoothed_predict(&model, &[0.0], 100, 0.001, StreamKey::new(1)).unwrap();
        assert_eq!(out.prediction, Prediction::Label(2));
        assert_eq!(out.counts, vec![0, 0, 100]);
    }

    #[test]
    fn split_counts_abstain() {
        let out = decide(vec![500, 500], 0.001);
        assert_eq!(out.prediction, Prediction::Abstain);
        assert_eq!(out.top, 0);
        let p = rs(1.0);
        let model = SmoothedClassifier::new(&p, &SignOf);
        let out = smoothed_predict(&model, &[0.0], 1000, 0.001, StreamKey::new(2)).unwrap();
        assert_eq!(out.prediction, Prediction::Abstain);
    }

    #[test]
    fn constant_classifier_certificate() {
        let p = rs(0.5);
        let model = SmoothedClassifier::new(&p, &Constant(1));
        let res = certify(&model, &[0.3], 100, 1000, 0.001, StreamKey::new(3)).unwrap();
        let p_lb = 0.001f64.powf(1.0 / 1000.0);
        assert!((res.p_plus_lb - p_lb).abs() < 1e-12);
        let expect = 0.5 * phi_inv(p_lb).unwrap();
        assert!((res.radius - expect).abs() < 1e-9);
        assert_eq!(res.prediction, Prediction::Label(1));
        assert!(!res.is_correct(0));
        assert!(res.radius > 0.0);
        assert!(res.wall_time_ms >= 0.0);
    }

    #[test]
    fn certify_rejects_bad_counts() {
        let p = rs(1.0);
        let model = SmoothedClassifier::new(&p, &Constant(0));
        assert!(certify(&model, &[0.0], 0, 10, 0.01, StreamKey::new(0)).is_err());
        assert!(certify(&model, &[0.0], 10, 5, 0.01, StreamKey::new(0)).is_err());
        assert!(certify(&model, &[0.0], 10, 10, 0.0, StreamKey::new(0)).is_err());
        assert!(smoothed_predict(&model, &[0.0], 0, 0.01, StreamKey::new(0)).is_err());
    }

    #[test]
    fn counts_independent_of_backend() {
        let p = rs(1.0);
        let seq = SmoothedClassifier::new(&p, &SignOf).with_parallelism(Parallelism::Sequential);
        let par = SmoothedClassifier::new(&p, &SignOf).with_parallelism(Parallelism::Rayon);
        let key = StreamKey::new(4);
        assert_eq!(
            seq.counts(&[0.2], 3000, key).unwrap(),
            par.counts(&[0.2], 3000, key).unwrap()
        );
    }

    #[test]
    fn budget_radius_matches_sigma_radius() {
        let r = radius_from_budget(0.25, 0.9, 0.1);
        assert!((r - radius(2.0, 0.9, 0.1)).abs() < 1e-15);
    }
}
