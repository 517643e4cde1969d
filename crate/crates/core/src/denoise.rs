//! Clean-image predictors for the reverse diffusion.
//!
//! A [`Denoiser`] maps a noisy state `x_t` at step `t` to a prediction of
//! the clean image plus the per-pixel noise standard deviation of the
//! reverse step. [`GmmDenoiser`] computes the exact posterior mean for a
//! Gaussian-mixture data distribution, which stands in for a trained model.

use std::fmt::Write as _;

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dim, Error, Result};
use crate::rng::StreamKey;
use crate::schedule::NoiseSchedule;

/// Output of one denoiser call.
#[derive(Clone, Debug, PartialEq)]
pub struct DenoiserOutput {
    pub x0_hat: Vec<f64>,
    pub sigma_diag: Vec<f64>,
}

pub trait Denoiser: Sync {
    fn dim(&self) -> usize;

    /// Predicted clean image. Called only with validated inputs; must be a
    /// pure function of `(x_t, t)`.
    fn predict_x0(&self, x_t: &[f64], t: usize, schedule: &NoiseSchedule) -> Vec<f64>;

    /// Per-pixel reverse-step standard deviation. Defaults to the schedule's
    /// posterior variance in every pixel.
    fn noise_std(&self, _x_t: &[f64], t: usize, schedule: &NoiseSchedule) -> Vec<f64> {
        vec![schedule.posterior_var(t).sqrt(); self.dim()]
    }

    fn predict(&self, x_t: &[f64], t: usize, schedule: &NoiseSchedule) -> Result<DenoiserOutput> {
        check_dim(self.dim(), x_t.len())?;
        if t == 0 || t > schedule.steps() {
            return Err(Error::param(format!(
                "timestep {t} outside 1..={}",
                schedule.steps()
            )));
        }
        Ok(DenoiserOutput {
            x0_hat: self.predict_x0(x_t, t, schedule),
            sigma_diag: self.noise_std(x_t, t, schedule),
        })
    }
}

impl<D: Denoiser + ?Sized> Denoiser for &D {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn predict_x0(&self, x_t: &[f64], t: usize, schedule: &NoiseSchedule) -> Vec<f64> {
        (**self).predict_x0(x_t, t, schedule)
    }
    fn noise_std(&self, x_t: &[f64], t: usize, schedule: &NoiseSchedule) -> Vec<f64> {
        (**self).noise_std(x_t, t, schedule)
    }
}

/// `x0 = (x_t - sqrt(1 - abar) * eps) / sqrt(abar)`
pub fn x0_from_eps(x_t: &[f64], eps: &[f64], alpha_bar: f64) -> Vec<f64> {
    let (a, b) = (alpha_bar.sqrt(), (1.0 - alpha_bar).sqrt());
    x_t.iter().zip(eps).map(|(x, e)| (x - b * e) / a).collect()
}

/// `eps = (x_t - sqrt(abar) * x0) / sqrt(1 - abar)`
pub fn eps_from_x0(x_t: &[f64], x0: &[f64], alpha_bar: f64) -> Vec<f64> {
    let (a, b) = (alpha_bar.sqrt(), (1.0 - alpha_bar).sqrt());
    x_t.iter().zip(x0).map(|(x, z)| (x - a * z) / b).collect()
}

/// Always predicts the zero image.
#[derive(Clone, Copy, Debug)]
pub struct ZeroDenoiser {
    pub dim: usize,
}

impl Denoiser for ZeroDenoiser {
    fn dim(&self) -> usize {
        self.dim
    }
    fn predict_x0(&self, _x_t: &[f64], _t: usize, _s: &NoiseSchedule) -> Vec<f64> {
        vec![0.0; self.dim]
    }
}

/// A model that predicts the injected noise rather than the clean image.
pub trait NoisePredictor: Sync {
    fn dim(&self) -> usize;
    fn predict_eps(&self, x_t: &[f64], t: usize, schedule: &NoiseSchedule) -> Vec<f64>;
}

/// Adapts a [`NoisePredictor`] into a [`Denoiser`].
#[derive(Clone, Debug)]
pub struct EpsilonDenoiser<M>(pub M);

impl<M: NoisePredictor> Denoiser for EpsilonDenoiser<M> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn predict_x0(&self, x_t: &[f64], t: usize, schedule: &NoiseSchedule) -> Vec<f64> {
        let eps = self.0.predict_eps(x_t, t, schedule);
        x0_from_eps(x_t, &eps, schedule.alpha_bar(t))
    }
}

/// Replaces the inner denoiser's reverse-step std with a constant.
#[derive(Clone, Debug)]
pub struct FixedNoise<D> {
    pub inner: D,
    pub std: f64,
}

impl<D: Denoiser> Denoiser for FixedNoise<D> {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn predict_x0(&self, x_t: &[f64], t: usize, schedule: &NoiseSchedule) -> Vec<f64> {
        self.inner.predict_x0(x_t, t, schedule)
    }
    fn noise_std(&self, _x_t: &[f64], _t: usize, _s: &NoiseSchedule) -> Vec<f64> {
        vec![self.std; self.inner.dim()]
    }
}

/// Isotropic Gaussian mixture with one class label per component.
#[derive(Clone, Debug, PartialEq)]
pub struct GmmModel {
    weights: Vec<f64>,
    means: Vec<Vec<f64>>,
    scales: Vec<f64>,
    labels: Vec<usize>,
    log_weights: Vec<f64>,
}

impl GmmModel {
    pub fn new(
        weights: Vec<f64>,
        means: Vec<Vec<f64>>,
        scales: Vec<f64>,
        labels: Vec<usize>,
    ) -> Result<Self> {
        let k = weights.len();
        if k == 0 {
            return Err(Error::param("mixture needs at least one component"));
        }
        if means.len() != k || scales.len() != k || labels.len() != k {
            return Err(Error::param(format!(
                "component count mismatch: {k} weights, {} means, {} scales, {} labels",
                means.len(),
                scales.len(),
                labels.len()
            )));
        }
        let d = means[0].len();
        if d == 0 {
            return Err(Error::param("mixture dimension must be positive"));
        }
        if let Some(m) = means.iter().find(|m| m.len() != d) {
            return Err(Error::Dimension {
                expected: d,
                actual: m.len(),
            });
        }
        if means.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::param("means must be finite"));
        }
        if weights.iter().any(|&w| !(w > 0.0 && w.is_finite())) {
            return Err(Error::param("weights must be positive"));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::param(format!("weights sum to {total}, not 1")));
        }
        if scales.iter().any(|&c| !(c > 0.0 && c.is_finite())) {
            return Err(Error::param("scales must be positive"));
        }
        Ok(GmmModel {
            log_weights: weights.iter().map(|w| w.ln()).collect(),
            weights,
            means,
            scales,
            labels,
        })
    }

    pub fn dim(&self) -> usize {
        self.means[0].len()
    }

    pub fn num_components(&self) -> usize {
        self.weights.len()
    }

    /// One more than the largest label.
    pub fn num_labels(&self) -> usize {
        self.labels.iter().max().map_or(0, |m| m + 1)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[Vec<f64>] {
        &self.means
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn prior_mean(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        for (w, m) in self.weights.iter().zip(&self.means) {
            out.iter_mut().zip(m).for_each(|(o, v)| *o += w * v);
        }
        out
    }

    /// Draw `(point, component index)` from the mixture.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (Vec<f64>, usize) {
        let k = if self.weights.len() == 1 {
            0
        } else {
            WeightedIndex::new(&self.weights)
                .expect("weights validated at construction")
                .sample(rng)
        };
        let c = self.scales[k];
        let x = self.means[k]
            .iter()
            .map(|m| {
                let z: f64 = StandardNormal.sample(rng);
                m + c * z
            })
            .collect();
        (x, k)
    }

    /// Text form with labelled blocks:
    ///
    /// ```text
    /// components 2
    /// dim 1
    /// weights 0.5 0.5
    /// scales 1 1
    /// labels 0 1
    /// means
    /// -2
    /// 2
    /// ```
    pub fn to_spec_text(&self) -> String {
        let join = |v: &mut dyn Iterator<Item = String>| v.collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        let _ = writeln!(out, "components {}", self.num_components());
        let _ = writeln!(out, "dim {}", self.dim());
        let _ = writeln!(
            out,
            "weights {}",
            join(&mut self.weights.iter().map(|w| format!("{w:.16e}")))
        );
        let _ = writeln!(
            out,
            "scales {}",
            join(&mut self.scales.iter().map(|w| format!("{w:.16e}")))
        );
        let _ = writeln!(
            out,
            "labels {}",
            join(&mut self.labels.iter().map(|l| l.to_string()))
        );
        out.push_str("means\n");
        for m in &self.means {
            let _ = writeln!(out, "{}", join(&mut m.iter().map(|w| format!("{w:.16e}"))));
        }
        out
    }

    pub fn from_spec_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let mut k = None;
        let mut d = None;
        let mut weights = None;
        let mut scales = None;
        let mut labels = None;
        let mut means = Vec::new();
        let mut last_line = 0;
        while let Some((n, line)) = lines.next() {
            last_line = n;
            let mut fields = line.split_whitespace();
            let key = fields.next().unwrap_or_default();
            let rest: Vec<&str> = fields.collect();
            match key {
                "components" => k = Some(parse_one::<usize>(n, &rest)?),
                "dim" => d = Some(parse_one::<usize>(n, &rest)?),
                "weights" => weights = Some(parse_all::<f64>(n, &rest)?),
                "scales" => scales = Some(parse_all::<f64>(n, &rest)?),
                "labels" => labels = Some(parse_all::<usize>(n, &rest)?),
                "means" => {
                    let k =
                        k.ok_or_else(|| Error::parse(n, "'components' must precede 'means'"))?;
                    for _ in 0..k {
                        let (n, row) = lines
                            .next()
                            .ok_or_else(|| Error::parse(n, format!("expected {k} mean rows")))?;
                        last_line = n;
                        let fields: Vec<&str> = row.split_whitespace().collect();
                        means.push(parse_all::<f64>(n, &fields)?);
                    }
                }
                other => return Err(Error::parse(n, format!("unknown key '{other}'"))),
            }
        }
        let missing = |what: &str| Error::parse(last_line.max(1), format!("missing '{what}'"));
        let k = k.ok_or_else(|| missing("components"))?;
        let d = d.ok_or_else(|| missing("dim"))?;
        let weights = weights.ok_or_else(|| missing("weights"))?;
        let scales = scales.ok_or_else(|| missing("scales"))?;
        let labels = labels.ok_or_else(|| missing("labels"))?;
        if means.len() != k {
            return Err(missing("means"));
        }
        if weights.len() != k || scales.len() != k || labels.len() != k {
            return Err(Error::parse(
                last_line,
                "block lengths disagree with 'components'",
            ));
        }
        if means.iter().any(|m| m.len() != d) {
            return Err(Error::parse(last_line, "mean rows disagree with 'dim'"));
        }
        GmmModel::new(weights, means, scales, labels)
    }
}

fn parse_one<T: std::str::FromStr>(line: usize, fields: &[&str]) -> Result<T> {
    match fields {
        [v] => v
            .parse()
            .map_err(|_| Error::parse(line, format!("cannot parse '{v}'"))),
        _ => Err(Error::parse(line, "expected exactly one value")),
    }
}

fn parse_all<T: std::str::FromStr>(line: usize, fields: &[&str]) -> Result<Vec<T>> {
    fields
        .iter()
        .map(|v| {
            v.parse()
                .map_err(|_| Error::parse(line, format!("cannot parse '{v}'")))
        })
        .collect()
}

/// `E[x0 | x_t]` for `x_t = sqrt(abar) x0 + sqrt(1 - abar) eps` with `x0`
/// drawn from the mixture.
pub fn gmm_posterior_mean(gmm: &GmmModel, x_t: &[f64], alpha_bar: f64) -> Result<Vec<f64>> {
    check_dim(gmm.dim(), x_t.len())?;
    if !(alpha_bar > 0.0 && alpha_bar <= 1.0) {
        return Err(Error::param(format!("alpha_bar={alpha_bar} outside (0,1]")));
    }
    Ok(posterior_mean_unchecked(gmm, x_t, alpha_bar))
}

fn posterior_mean_unchecked(gmm: &GmmModel, x_t: &[f64], alpha_bar: f64) -> Vec<f64> {
    if alpha_bar == 1.0 {
        return x_t.to_vec();
    }
    let half_d = 0.5 * x_t.len() as f64;
    let sa = alpha_bar.sqrt();
    // streaming log-sum-exp: responsibilities and the weighted sum are kept
    // relative to the running maximum log weight
    let mut top = f64::NEG_INFINITY;
    let mut total = 0.0;
    let mut out = vec![0.0; x_t.len()];
    for c in 0..gmm.num_components() {
        let c2 = gmm.scales[c] * gmm.scales[c];
        let var = alpha_bar * c2 + (1.0 - alpha_bar);
        let mean = &gmm.means[c];
        let dist2: f64 = x_t
            .iter()
            .zip(mean)
            .map(|(x, m)| (x - sa * m).powi(2))
            .sum();
        let log_r = gmm.log_weights[c] - half_d * var.ln() - 0.5 * dist2 / var;
        if log_r > top {
            let rescale = (top - log_r).exp();
            total *= rescale;
            out.iter_mut().for_each(|o| *o *= rescale);
            top = log_r;
        }
        let r = (log_r - top).exp();
        if r == 0.0 {
            continue;
        }
        total += r;
        let gain = sa * c2 / var;
        for (o, (x, m)) in out.iter_mut().zip(x_t.iter().zip(mean)) {
            *o += r * (m + gain * (x - sa * m));
        }
    }
    out.iter_mut().for_each(|o| *o /= total);
    out
}

/// Self-normalised importance estimate of `E[x0 | x_t]`: prior draws
/// weighted by the forward-process likelihood. Returns the estimate and its
/// per-coordinate standard error.
pub fn mc_posterior_mean_oracle(
    gmm: &GmmModel,
    x_t: &[f64],
    alpha_bar: f64,
    n_samples: usize,
    seed: u64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    check_dim(gmm.dim(), x_t.len())?;
    if !(alpha_bar > 0.0 && alpha_bar <= 1.0) {
        return Err(Error::param(format!("alpha_bar={alpha_bar} outside (0,1]")));
    }
    if n_samples < 1000 {
        return Err(Error::param("oracle needs at least 1000 samples"));
    }
    let d = x_t.len();
    if alpha_bar == 1.0 {
        // the likelihood is a point mass at x_t
        return Ok((x_t.to_vec(), vec![0.0; d]));
    }
    let mut rng = StreamKey::new(seed).rng();
    let sa = alpha_bar.sqrt();
    let noise_var = 1.0 - alpha_bar;
    let mut draws = Vec::with_capacity(n_samples);
    let mut log_w = Vec::with_capacity(n_samples);
    for _ in 0..n_samples {
        let (x0, _) = gmm.sample(&mut rng);
        let dist2: f64 = x_t.iter().zip(&x0).map(|(x, z)| (x - sa * z).powi(2)).sum();
        log_w.push(-0.5 * dist2 / noise_var);
        draws.push(x0);
    }
    let max = log_w.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(Error::OracleIllConditioned("all weights underflow".into()));
    }
    let w: Vec<f64> = log_w.iter().map(|l| (l - max).exp()).collect();
    let sum_w: f64 = w.iter().sum();
    let sum_w2: f64 = w.iter().map(|v| v * v).sum();
    let ess = sum_w * sum_w / sum_w2;
    if !(ess >= 2.0) {
        return Err(Error::OracleIllConditioned(format!(
            "effective sample size {ess:.3} too small"
        )));
    }
    let mut est = vec![0.0; d];
    for (wi, x0) in w.iter().zip(&draws) {
        est.iter_mut().zip(x0).for_each(|(e, v)| *e += wi * v);
    }
    est.iter_mut().for_each(|e| *e /= sum_w);
    let mut se = vec![0.0; d];
    for (wi, x0) in w.iter().zip(&draws) {
        for j in 0..d {
            se[j] += (wi * (x0[j] - est[j])).powi(2);
        }
    }
    se.iter_mut().for_each(|s| *s = s.sqrt() / sum_w);
    Ok((est, se))
}

/// Exact posterior-mean denoiser for a [`GmmModel`] data distribution.
#[derive(Clone, Debug)]
pub struct GmmDenoiser {
    model: GmmModel,
}

impl GmmDenoiser {
    pub fn new(model: GmmModel) -> Self {
        GmmDenoiser { model }
    }

    pub fn model(&self) -> &GmmModel {
        &self.model
    }
}

impl Denoiser for GmmDenoiser {
    fn dim(&self) -> usize {
        self.model.dim()
    }
    fn predict_x0(&self, x_t: &[f64], t: usize, schedule: &NoiseSchedule) -> Vec<f64> {
        posterior_mean_unchecked(&self.model, x_t, schedule.alpha_bar(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_gaussian(d: usize) -> GmmModel {
        GmmModel::new(vec![1.0], vec![vec![0.0; d]], vec![1.0], vec![0]).unwrap()
    }

    fn symmetric(m: f64) -> GmmModel {
        GmmModel::new(
            vec![0.5, 0.5],
            vec![vec![-m, 0.5 * m], vec![m, -0.5 * m]],
            vec![0.7, 0.7],
            vec![0, 1],
        )
        .unwrap()
    }

    #[test]
    fn zero_denoiser_predicts_zero() {
        let s = NoiseSchedule::linear(10, 0.01, 0.1).unwrap();
        let out = ZeroDenoiser { dim: 3 }
            .predict(&[1.0, -2.0, 3.0], 5, &s)
            .unwrap();
        assert_eq!(out.x0_hat, vec![0.0; 3]);
        let expect = s.posterior_var(5).sqrt();
        assert!(out.sigma_diag.iter().all(|&v| v == expect));
    }

    #[test]
    fn predict_validates_inputs() {
        let s = NoiseSchedule::linear(10, 0.01, 0.1).unwrap();
        let den = ZeroDenoiser { dim: 2 };
        assert!(matches!(
            den.predict(&[1.0], 1, &s),
            Err(Error::Dimension { .. })
        ));
        assert!(den.predict(&[1.0, 2.0], 0, &s).is_err());
        assert!(den.predict(&[1.0, 2.0], 11, &s).is_err());
    }

    #[test]
    fn single_gaussian_posterior_mean() {
        // abar * c^2 + (1 - abar) = 1, so E[x0 | x_t] = sqrt(abar) x_t
        let g = unit_gaussian(1);
        let out = gmm_posterior_mean(&g, &[2.0], 0.5).unwrap();
        assert!((out[0] - std::f64::consts::SQRT_2).abs() < 1e-12);
        let d = gmm_posterior_mean(&unit_gaussian(3), &[1.0, -1.0, 0.5], 0.5).unwrap();
        for (o, x) in d.iter().zip([1.0, -1.0, 0.5]) {
            assert!((o - 0.5f64.sqrt() * x).abs() < 1e-12);
        }
    }

    #[test]
    fn gmm_denoiser_matches_closed_form() {
        // build a schedule with abar_1 = 0.5
        let s = NoiseSchedule::from_betas(vec![0.5, 0.6]).unwrap();
        let den = GmmDenoiser::new(unit_gaussian(2));
        let out = den.predict(&[1.0, 1.0], 1, &s).unwrap();
        for v in out.x0_hat {
            assert!((v - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        }
    }

    #[test]
    fn posterior_mean_edge_cases() {
        let g = symmetric(2.0);
        assert_eq!(
            gmm_posterior_mean(&g, &[0.3, -0.7], 1.0).unwrap(),
            vec![0.3, -0.7]
        );
        let z = gmm_posterior_mean(&g, &[0.0, 0.0], 0.4).unwrap();
        assert!(z.iter().all(|v| v.abs() < 1e-15));
        assert!(gmm_posterior_mean(&g, &[0.0, 0.0], 0.0).is_err());
        assert!(gmm_posterior_mean(&g, &[0.0, 0.0], 1.5).is_err());
        assert!(gmm_posterior_mean(&g, &[0.0], 0.5).is_err());
    }

    #[test]
    fn posterior_mean_limits() {
        let g = GmmModel::new(
            vec![0.2, 0.3, 0.5],
            vec![vec![1.0, 2.0], vec![-3.0, 0.5], vec![0.0, -1.0]],
            vec![0.5, 1.0, 2.0],
            vec![0, 1, 2],
        )
        .unwrap();
        let x = [0.7, -1.3];
        let near_clean = gmm_posterior_mean(&g, &x, 1.0 - 1e-9).unwrap();
        for (a, b) in near_clean.iter().zip(x) {
            assert!(((a - b) / b).abs() < 1e-3);
        }
        let near_noise = gmm_posterior_mean(&g, &x, 1e-9).unwrap();
        for (a, b) in near_noise.iter().zip(g.prior_mean()) {
            assert!((a - b).abs() < 1e-3);
        }
    }

    #[test]
    fn oracle_special_cases() {
        let g = symmetric(1.5);
        let (est, se) = mc_posterior_mean_oracle(&g, &[0.2, 0.1], 1.0, 1000, 1).unwrap();
        assert_eq!(est, vec![0.2, 0.1]);
        assert_eq!(se, vec![0.0, 0.0]);
        assert!(mc_posterior_mean_oracle(&g, &[0.2, 0.1], 0.5, 999, 1).is_err());
        let a = mc_posterior_mean_oracle(&g, &[0.2, 0.1], 0.5, 5000, 9).unwrap();
        let b = mc_posterior_mean_oracle(&g, &[0.2, 0.1], 0.5, 5000, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn oracle_agrees_on_single_gaussian() {
        let g = unit_gaussian(1);
        let (est, se) = mc_posterior_mean_oracle(&g, &[2.0], 0.5, 100_000, 3).unwrap();
        assert!((est[0] - 2.0f64.sqrt()).abs() < 3.0 * se[0]);
    }

    #[test]
    fn eps_and_x0_conversions_invert() {
        let x_t = [0.3, -1.2, 2.0];
        let eps = [0.5, 0.1, -0.9];
        let x0 = x0_from_eps(&x_t, &eps, 0.37);
        let back = eps_from_x0(&x_t, &x0, 0.37);
        for (a, b) in back.iter().zip(eps) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(x0_from_eps(&[1.0], &[0.0], 0.25), vec![2.0]);
    }

    #[test]
    fn spec_text_round_trip() {
        let g = symmetric(1.25);
        let back = GmmModel::from_spec_text(&g.to_spec_text()).unwrap();
        assert_eq!(back, g);
        let err = GmmModel::from_spec_text("components 2\ndim x\n").unwrap_err();
        assert_eq!(err, Error::parse(2, "cannot parse 'x'"));
        assert!(GmmModel::from_spec_text("").is_err());
        assert!(GmmModel::from_spec_text(
            "components 1\ndim 1\nweights 0.5\nscales 1\nlabels 0\nmeans\n0\n"
        )
        .is_err());
    }

    #[test]
    fn model_validation() {
        assert!(GmmModel::new(vec![], vec![], vec![], vec![]).is_err());
        assert!(GmmModel::new(
            vec![0.4, 0.5],
            vec![vec![0.0], vec![1.0]],
            vec![1.0, 1.0],
            vec![0, 1]
        )
        .is_err());
        assert!(GmmModel::new(vec![1.0], vec![vec![0.0]], vec![0.0], vec![0]).is_err());
        assert!(GmmModel::new(
            vec![0.5, 0.5],
            vec![vec![0.0], vec![1.0, 2.0]],
            vec![1.0, 1.0],
            vec![0, 1]
        )
        .is_err());
    }
}
