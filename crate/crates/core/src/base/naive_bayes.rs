use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{check_labels, Design, Row};
use crate::error::{Error, Result};
use crate::types::{Distribution, FeatureKind, Value};

/// Lower bound on per-class Gaussian variances.
pub const VARIANCE_FLOOR: f64 = 1e-6;

/// Laplace smoothing constant for priors and categorical conditionals.
const ALPHA: f64 = 1.0;

/// Posteriors are floored at `exp(-LOG_RATIO_FLOOR)` relative to the best
/// class, so no class ever gets exactly zero mass.
const LOG_RATIO_FLOOR: f64 = 700.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
enum Conditional {
    /// `log_p[c * cardinality + v] = ln p(x = v | c)`.
    Categorical { cardinality: u32, log_p: Vec<f64> },
    Gaussian {
        mean: Vec<f64>,
        var: Vec<f64>,
        /// `-0.5 ln(2 pi var)` per class.
        log_norm: Vec<f64>,
    },
}

/// Naive Bayes with Laplace-smoothed categorical conditionals and Gaussian
/// numeric conditionals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    features: Vec<FeatureKind>,
    log_prior: Vec<f64>,
    conditionals: Vec<Conditional>,
}

impl NaiveBayesModel {
    pub fn train(design: &Design<'_>, labels: &[u32], n_classes: usize) -> Result<Self> {
        if design.is_empty() {
            return Err(Error::EmptyData);
        }
        check_labels(labels, n_classes, design.len())?;
        design.check()?;

        let n = design.len() as f64;
        let mut class_counts = vec![0usize; n_classes];
        for &c in labels {
            class_counts[c as usize] += 1;
        }
        let log_prior = class_counts
            .iter()
            .map(|&k| libm::log((k as f64 + ALPHA) / (n + ALPHA * n_classes as f64)))
            .collect();

        let conditionals = design
            .features()
            .iter()
            .enumerate()
            .map(|(j, kind)| match *kind {
                FeatureKind::Categorical { cardinality } => {
                    let card = cardinality as usize;
                    let mut counts = vec![0usize; n_classes * card];
                    for (i, &c) in labels.iter().enumerate() {
                        let v = design.value(i, j).as_cat().expect("checked") as usize;
                        counts[c as usize * card + v] += 1;
                    }
                    let log_p = counts
                        .iter()
                        .enumerate()
                        .map(|(idx, &k)| {
                            let denom = class_counts[idx / card] as f64 + ALPHA * card as f64;
                            libm::log((k as f64 + ALPHA) / denom)
                        })
                        .collect();
                    Conditional::Categorical { cardinality, log_p }
                }
                FeatureKind::Numeric => gaussian(design, labels, n_classes, &class_counts, j),
            })
            .collect();

        Ok(NaiveBayesModel {
            features: design.features().to_vec(),
            log_prior,
            conditionals,
        })
    }

    pub fn n_classes(&self) -> usize {
        self.log_prior.len()
    }

    pub fn features(&self) -> &[FeatureKind] {
        &self.features
    }

    pub fn log_prior(&self, class: u32) -> f64 {
        self.log_prior[class as usize]
    }

    /// `ln p(x_j = value | class)` (a log density for numeric features).
    pub fn log_term(&self, feature: usize, class: u32, value: Value) -> f64 {
        let c = class as usize;
        match (&self.conditionals[feature], value) {
            (Conditional::Categorical { cardinality, log_p }, Value::Cat(v)) => {
                log_p[c * *cardinality as usize + v as usize]
            }
            (Conditional::Gaussian { mean, var, log_norm }, Value::Num(x)) => {
                let d = x - mean[c];
                log_norm[c] - d * d / (2.0 * var[c])
            }
            _ => panic!("feature {feature}: value kind does not match the trained model"),
        }
    }

    /// Unnormalised `ln p(c) + sum_j ln p(x_j | c)` per class.
    pub fn log_joint(&self, row: Row<'_>) -> Vec<f64> {
        let mut out = self.log_prior.clone();
        self.accumulate(&mut out, row, 0..self.conditionals.len());
        out
    }

    fn accumulate(&self, acc: &mut [f64], row: Row<'_>, features: core::ops::Range<usize>) {
        for j in features {
            let v = row.get(j);
            for (c, a) in acc.iter_mut().enumerate() {
                *a += self.log_term(j, c as u32, v);
            }
        }
    }

    pub fn predict(&self, row: Row<'_>) -> Distribution {
        Self::normalise(self.log_joint(row))
    }

    /// `predict(Row::new(x, &[v]))` for every `v` in `0..n`, sharing the
    /// work on `x`. Bit-identical to the one-at-a-time calls.
    pub fn predict_over_last(&self, x: &[Value], n: u32) -> Vec<Distribution> {
        let width = self.conditionals.len();
        if x.len() + 1 != width {
            return (0..n).map(|v| self.predict(Row::new(x, &[v]))).collect();
        }
        let mut base = self.log_prior.clone();
        self.accumulate(&mut base, Row::plain(x), 0..width - 1);
        (0..n)
            .map(|v| {
                let mut lj = base.clone();
                self.accumulate(&mut lj, Row::new(x, &[v]), width - 1..width);
                Self::normalise(lj)
            })
            .collect()
    }

    fn normalise(lj: Vec<f64>) -> Distribution {
        let top = lj.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let weights = lj.iter().map(|&l| libm::exp((l - top).max(-LOG_RATIO_FLOOR))).collect();
        Distribution::from_weights(weights).expect("best class has weight 1")
    }
}

fn gaussian(design: &Design<'_>, labels: &[u32], n_classes: usize, class_counts: &[usize], j: usize) -> Conditional {
    let mut sum = vec![0.0; n_classes];
    let mut global = 0.0;
    for (i, &c) in labels.iter().enumerate() {
        let x = design.value(i, j).as_num().expect("checked");
        sum[c as usize] += x;
        global += x;
    }
    let global_mean = global / labels.len() as f64;
    let mean: Vec<f64> = sum
        .iter()
        .zip(class_counts)
        .map(|(&s, &k)| if k > 0 { s / k as f64 } else { global_mean })
        .collect();
    let mut sq = vec![0.0; n_classes];
    let mut global_sq = 0.0;
    for (i, &c) in labels.iter().enumerate() {
        let x = design.value(i, j).as_num().expect("checked");
        let d = x - mean[c as usize];
        sq[c as usize] += d * d;
        let g = x - global_mean;
        global_sq += g * g;
    }
    let global_var = global_sq / labels.len() as f64;
    // classes never seen in training fall back to the pooled estimate
    let var: Vec<f64> = sq
        .iter()
        .zip(class_counts)
        .map(|(&s, &k)| if k > 0 { s / k as f64 } else { global_var })
        .map(|v| v.max(VARIANCE_FLOOR))
        .collect();
    let log_norm = var
        .iter()
        .map(|&v| -0.5 * libm::log(2.0 * core::f64::consts::PI * v))
        .collect();
    Conditional::Gaussian { mean, var, log_norm }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::FeatureVector;

    fn cat(v: u32) -> FeatureVector {
        FeatureVector(vec![Value::Cat(v)])
    }

    fn binary() -> Vec<FeatureKind> {
        vec![FeatureKind::Categorical { cardinality: 2 }]
    }

    #[test]
    fn hand_computed_posterior() {
        let rows = [cat(0), cat(0), cat(1), cat(1)];
        let labels = [0, 0, 1, 0];
        let m = NaiveBayesModel::train(&Design::new(&rows, &binary()), &labels, 2).unwrap();
        assert!((libm::exp(m.log_prior(0)) - 2.0 / 3.0).abs() < 1e-12);
        assert!((libm::exp(m.log_term(0, 0, Value::Cat(0))) - 3.0 / 5.0).abs() < 1e-12);
        let d = m.predict(Row::plain(cat(0).values()));
        assert!((d.prob(0) - 18.0 / 23.0).abs() < 1e-9);
        assert!((d.prob(1) - 5.0 / 23.0).abs() < 1e-9);
    }

    #[test]
    fn single_class_prior_dominates() {
        let rows = [cat(0), cat(1), cat(1)];
        let m = NaiveBayesModel::train(&Design::new(&rows, &binary()), &[1, 1, 1], 3).unwrap();
        for v in 0..2 {
            let d = m.predict(Row::plain(cat(v).values()));
            assert!(d.prob(1) > d.prob(0) && d.prob(1) > d.prob(2));
        }
    }

    #[test]
    fn balanced_table_gives_prior() {
        // 3:1 class prior, feature balanced within each class
        let rows = [cat(0), cat(1), cat(0), cat(1), cat(0), cat(1), cat(0), cat(1)];
        let labels = [0, 0, 0, 0, 0, 0, 1, 1];
        let m = NaiveBayesModel::train(&Design::new(&rows, &binary()), &labels, 2).unwrap();
        let prior0 = libm::exp(m.log_prior(0));
        for v in 0..2 {
            let d = m.predict(Row::plain(cat(v).values()));
            assert!((d.prob(0) - prior0).abs() < 1e-9);
        }
    }

    #[test]
    fn uniform_data_gives_uniform_posterior() {
        let rows = [cat(0), cat(1), cat(0), cat(1)];
        let m = NaiveBayesModel::train(&Design::new(&rows, &binary()), &[0, 0, 1, 1], 2).unwrap();
        for v in 0..2 {
            let d = m.predict(Row::plain(cat(v).values()));
            assert!((d.prob(0) - 0.5).abs() < 1e-9 && (d.prob(1) - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn constant_numeric_feature_is_floored() {
        let rows: Vec<FeatureVector> = (0..4).map(|_| FeatureVector(vec![Value::Num(1.0)])).collect();
        let m = NaiveBayesModel::train(&Design::new(&rows, &[FeatureKind::Numeric]), &[0, 0, 1, 1], 2).unwrap();
        let far = [Value::Num(1e6)];
        let d = m.predict(Row::plain(&far));
        assert!(d.probs().iter().all(|&p| p > 0.0 && p < 1.0));
    }

    #[test]
    fn extreme_evidence_keeps_mass_positive() {
        let rows = [
            FeatureVector(vec![Value::Num(0.0)]),
            FeatureVector(vec![Value::Num(0.0)]),
            FeatureVector(vec![Value::Num(100.0)]),
            FeatureVector(vec![Value::Num(100.0)]),
        ];
        let m = NaiveBayesModel::train(&Design::new(&rows, &[FeatureKind::Numeric]), &[0, 0, 1, 1], 2).unwrap();
        let d = m.predict(Row::plain(&[Value::Num(0.0)]));
        assert!(d.prob(1) > 0.0);
        assert!(libm::log(d.prob(1)).is_finite());
    }

    #[test]
    fn empty_data_rejected() {
        let rows: [FeatureVector; 0] = [];
        assert_eq!(
            NaiveBayesModel::train(&Design::new(&rows, &binary()), &[], 2).unwrap_err(),
            Error::EmptyData
        );
    }
}
