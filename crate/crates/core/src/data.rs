//! Synthetic Gaussian-mixture classification tasks.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;

use crate::certify::Classifier;
use crate::denoise::GmmModel;
use crate::error::{check_dim, Error, Result};
use crate::rng::StreamKey;

/// `K` equal-weight isotropic components with means on a sphere of radius
/// `separation`, labelled `0..K`.
///
/// In one dimension the sphere is `{-r, +r}`, so at most two classes fit.
/// In two dimensions the means are evenly spaced in angle with a random
/// rotation; in higher dimensions they are random directions.
pub fn make_gmm_task(
    num_classes: usize,
    dim: usize,
    separation: f64,
    scale: f64,
    seed: u64,
) -> Result<GmmModel> {
    if num_classes < 2 || dim == 0 {
        return Err(Error::param("need at least 2 classes and 1 dimension"));
    }
    if !(separation > 0.0 && scale > 0.0) {
        return Err(Error::param("separation and scale must be positive"));
    }
    let mut rng = StreamKey::path(seed, &[0x6d_6f_64_65_6c]).rng();
    let means: Vec<Vec<f64>> = match dim {
        1 => {
            if num_classes > 2 {
                return Err(Error::param("a 1-D task holds at most 2 classes"));
            }
            let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
            vec![vec![sign * separation], vec![-sign * separation]]
        }
        2 => {
            let offset = rng.random::<f64>() * 2.0 * PI;
            (0..num_classes)
                .map(|k| {
                    let a = offset + 2.0 * PI * k as f64 / num_classes as f64;
                    vec![separation * a.cos(), separation * a.sin()]
                })
                .collect()
        }
        _ => (0..num_classes)
            .map(|_| {
                crate::rng::unit_direction(&mut rng, dim)
                    .into_iter()
                    .map(|u| separation * u)
                    .collect()
            })
            .collect(),
    };
    GmmModel::new(
        vec![1.0 / num_classes as f64; num_classes],
        means,
        vec![scale; num_classes],
        (0..num_classes).collect(),
    )
}

/// Bayes-optimal classifier for a mixture: the label of the component with
/// the largest `log pi_k + log N(x; mu_k, c_k^2 I)`, ties to the smaller label.
#[derive(Clone, Debug)]
pub struct BayesClassifier {
    model: GmmModel,
}

impl BayesClassifier {
    pub fn new(model: GmmModel) -> Self {
        BayesClassifier { model }
    }

    pub fn model(&self) -> &GmmModel {
        &self.model
    }

    pub fn log_scores(&self, x: &[f64]) -> Vec<f64> {
        let d = x.len() as f64;
        let m = &self.model;
        (0..m.num_components())
            .map(|k| {
                let c2 = m.scales()[k] * m.scales()[k];
                let dist2: f64 = x
                    .iter()
                    .zip(&m.means()[k])
                    .map(|(a, b)| (a - b).powi(2))
                    .sum();
                m.weights()[k].ln() - 0.5 * d * c2.ln() - 0.5 * dist2 / c2
            })
            .collect()
    }
}

pub fn bayes_classify(gmm: &GmmModel, x: &[f64]) -> Result<usize> {
    check_dim(gmm.dim(), x.len())?;
    Ok(BayesClassifier::new(gmm.clone()).classify(x))
}

impl Classifier for BayesClassifier {
    fn num_classes(&self) -> usize {
        self.model.num_labels()
    }

    fn classify(&self, x: &[f64]) -> usize {
        let scores = self.log_scores(x);
        let labels = self.model.labels();
        let mut best = 0;
        for k in 1..scores.len() {
            let better =
                scores[k] > scores[best] || (scores[k] == scores[best] && labels[k] < labels[best]);
            if better {
                best = k;
            }
        }
        labels[best]
    }
}

/// Labelled points, optionally with the mixture that generated them.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub points: Vec<Vec<f64>>,
    pub labels: Vec<usize>,
    pub num_classes: usize,
    pub generator: Option<GmmModel>,
    pub seed: Option<u64>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, Vec::len)
    }

    /// Header `n d K`, then one line per point: `d` coordinates and a label,
    /// written with 17 significant digits.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.len(), self.dim(), self.num_classes);
        for (p, l) in self.points.iter().zip(&self.labels) {
            for v in p {
                let _ = write!(out, "{v:.16e} ");
            }
            let _ = writeln!(out, "{l}");
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty());
        let (hline, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "empty dataset file"))?;
        let head: Vec<usize> = header
            .split_whitespace()
            .map(|f| {
                f.parse()
                    .map_err(|_| Error::parse(hline, format!("bad header field '{f}'")))
            })
            .collect::<Result<_>>()?;
        let [n, d, k] = head[..] else {
            return Err(Error::parse(hline, "header must be 'n d K'"));
        };
        if n == 0 || d == 0 {
            return Err(Error::parse(hline, "dataset needs n >= 1 and d >= 1"));
        }
        let mut points = Vec::with_capacity(n);
        let mut labels = Vec::with_capacity(n);
        for (line, row) in lines {
            let fields: Vec<&str> = row.split_whitespace().collect();
            if fields.len() != d + 1 {
                return Err(Error::parse(
                    line,
                    format!("expected {} fields, got {}", d + 1, fields.len()),
                ));
            }
            let p = fields[..d]
                .iter()
                .map(|f| {
                    f.parse::<f64>()
                        .map_err(|_| Error::parse(line, format!("bad coordinate '{f}'")))
                })
                .collect::<Result<Vec<_>>>()?;
            let l: usize = fields[d]
                .parse()
                .map_err(|_| Error::parse(line, format!("bad label '{}'", fields[d])))?;
            if l >= k {
                return Err(Error::parse(line, format!("label {l} outside 0..{k}")));
            }
            points.push(p);
            labels.push(l);
        }
        if points.len() != n {
            return Err(Error::parse(
                text.lines().count().max(1),
                format!("header promises {n} rows, found {}", points.len()),
            ));
        }
        Ok(Dataset {
            points,
            labels,
            num_classes: k,
            generator: None,
            seed: None,
        })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_text(&std::fs::read_to_string(path)?)
    }
}

/// `n` i.i.d. labelled draws from the mixture.
pub fn sample_dataset(gmm: &GmmModel, n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::param("dataset needs at least one point"));
    }
    let mut rng = StreamKey::path(seed, &[0x64_61_74_61]).rng();
    let (points, labels) = (0..n)
        .map(|_| {
            let (x, k) = gmm.sample(&mut rng);
            (x, gmm.labels()[k])
        })
        .unzip();
    Ok(Dataset {
        points,
        labels,
        num_classes: gmm.num_labels(),
        generator: Some(gmm.clone()),
        seed: Some(seed),
    })
}

/// Accuracy of the nearest-centroid rule (a linear classifier fitted on the
/// data itself), a sanity baseline for the Bayes classifier.
pub fn nearest_mean_accuracy(data: &Dataset) -> f64 {
    let k = data.num_classes;
    let d = data.dim();
    let mut sums = vec![vec![0.0; d]; k];
    let mut counts = vec![0usize; k];
    for (p, &l) in data.points.iter().zip(&data.labels) {
        counts[l] += 1;
        sums[l].iter_mut().zip(p).for_each(|(s, v)| *s += v);
    }
    let centroids: Vec<Vec<f64>> = sums
        .into_iter()
        .zip(&counts)
        .map(|(s, &c)| s.into_iter().map(|v| v / c.max(1) as f64).collect())
        .collect();
    let correct = data
        .points
        .iter()
        .zip(&data.labels)
        .filter(|(p, &l)| {
            let best = (0..k)
                .filter(|&j| counts[j] > 0)
                .min_by(|&a, &b| {
                    let da: f64 = p
                        .iter()
                        .zip(&centroids[a])
                        .map(|(x, c)| (x - c).powi(2))
                        .sum();
                    let db: f64 = p
                        .iter()
                        .zip(&centroids[b])
                        .map(|(x, c)| (x - c).powi(2))
                        .sum();
                    da.total_cmp(&db)
                })
                .unwrap_or(0);
            best == l
        })
        .count();
    correct as f64 / data.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_dimensional_task() {
        let g = make_gmm_task(2, 1, 2.0, 0.5, 3).unwrap();
        let (a, b) = (g.means()[0][0], g.means()[1][0]);
        assert_eq!(a, -b);
        assert_eq!(a.abs(), 2.0);
        assert_eq!(g.weights().iter().sum::<f64>(), 1.0);
        assert_eq!(g, make_gmm_task(2, 1, 2.0, 0.5, 3).unwrap());
        assert!(make_gmm_task(3, 1, 2.0, 0.5, 3).is_err());
        assert!(make_gmm_task(1, 2, 2.0, 0.5, 3).is_err());
        assert!(make_gmm_task(2, 2, 0.0, 0.5, 3).is_err());
    }

    #[test]
    fn means_lie_on_sphere() {
        for (k, d) in [(3, 2), (5, 4), (7, 3)] {
            let g = make_gmm_task(k, d, 3.0, 1.0, 11).unwrap();
            assert!((g.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for m in g.means() {
                let r = m.iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!((r - 3.0).abs() < 1e-12);
            }
            assert_eq!(g.labels(), &(0..k).collect::<Vec<_>>()[..]);
        }
    }

    #[test]
    fn bayes_classifier_basics() {
        let g = make_gmm_task(3, 2, 4.0, 0.5, 1).unwrap();
        for (k, m) in g.means().iter().enumerate() {
            assert_eq!(bayes_classify(&g, m).unwrap(), k);
        }
        let sym = make_gmm_task(2, 1, 1.0, 1.0, 0).unwrap();
        assert_eq!(bayes_classify(&sym, &[0.0]).unwrap(), 0);
        assert!(bayes_classify(&sym, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn bayes_matches_explicit_density() {
        let g = GmmModel::new(
            vec![0.2, 0.5, 0.3],
            vec![vec![0.0, 1.0], vec![1.5, -0.5], vec![-1.0, -1.0]],
            vec![0.5, 1.2, 0.8],
            vec![2, 0, 1],
        )
        .unwrap();
        let mut rng = StreamKey::new(5).rng();
        for _ in 0..100 {
            let x: Vec<f64> = (0..2).map(|_| rng.random::<f64>() * 6.0 - 3.0).collect();
            let density = |k: usize| {
                let c2 = g.scales()[k].powi(2);
                let d2: f64 = x
                    .iter()
                    .zip(&g.means()[k])
                    .map(|(a, b)| (a - b).powi(2))
                    .sum();
                g.weights()[k] * (-0.5 * d2 / c2).exp() / (2.0 * PI * c2)
            };
            let best = (0..3)
                .max_by(|&a, &b| density(a).total_cmp(&density(b)))
                .unwrap();
            assert_eq!(bayes_classify(&g, &x).unwrap(), g.labels()[best]);
        }
    }

    #[test]
    fn class_frequencies_concentrate() {
        let g = GmmModel::new(
            vec![0.2, 0.8],
            vec![vec![0.0], vec![1.0]],
            vec![1.0, 1.0],
            vec![0, 1],
        )
        .unwrap();
        let n = 10_000;
        let data = sample_dataset(&g, n, 17).unwrap();
        let ones = data.labels.iter().filter(|&&l| l == 1).count() as f64 / n as f64;
        assert!((ones - 0.8).abs() < 3.0 * (0.16f64 / n as f64).sqrt());
    }

    #[test]
    fn text_round_trip_is_bitwise() {
        let g = make_gmm_task(3, 2, 2.0, 0.7, 2).unwrap();
        let data = sample_dataset(&g, 50, 4).unwrap();
        let back = Dataset::from_text(&data.to_text()).unwrap();
        assert_eq!(back.points, data.points);
        assert_eq!(back.labels, data.labels);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.txt");
        data.save(&path).unwrap();
        assert_eq!(Dataset::load(&path).unwrap().points, data.points);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        assert_eq!(
            Dataset::from_text("").unwrap_err(),
            Error::parse(1, "empty dataset file")
        );
        assert_eq!(
            Dataset::from_text("2 1 2\n0.5 0\n0.5 x\n").unwrap_err(),
            Error::parse(3, "bad label 'x'")
        );
        assert!(matches!(
            Dataset::from_text("2 1 2\n0.5 0\n"),
            Err(Error::Parse { .. })
        ));
        assert!(matches!(
            Dataset::from_text("1 1 2\n0.5 7\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn bayes_beats_linear_probe() {
        // unequal scales make the optimal boundary curved
        let g = GmmModel::new(
            vec![0.5, 0.5],
            vec![vec![0.0, 0.0], vec![1.0, 0.0]],
            vec![0.3, 1.5],
            vec![0, 1],
        )
        .unwrap();
        let data = sample_dataset(&g, 5000, 8).unwrap();
        let clf = BayesClassifier::new(g);
        let bayes = data
            .points
            .iter()
            .zip(&data.labels)
            .filter(|(p, &l)| clf.classify(p) == l)
            .count() as f64
            / data.len() as f64;
        assert!(bayes > nearest_mean_accuracy(&data));
    }
}
