//! Seeded random multi-label datasets with chained label dependencies, for
//! tests and benchmarks.

use alloc::format;
use alloc::vec::Vec;

use rand::Rng;

use crate::error::Result;
use crate::seed;
use crate::types::{Dataset, FeatureKind, Instance, LabelSchema, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct RandomDatasetConfig {
    pub n: usize,
    pub numeric: usize,
    /// Cardinality of each categorical feature.
    pub categorical: Vec<u32>,
    /// Cardinality of each label position.
    pub labels: Vec<u32>,
    /// Probability that a label is drawn uniformly instead of from the
    /// chained rule.
    pub noise: f64,
}

impl RandomDatasetConfig {
    /// Small random shape: 1..=max_t positions of cardinality 2..=max_l.
    pub fn random_shape(rng: &mut impl Rng, max_t: usize, max_l: u32) -> Self {
        let t = rng.gen_range(1..=max_t);
        RandomDatasetConfig {
            n: rng.gen_range(20..=60),
            numeric: rng.gen_range(0..=2),
            categorical: (0..rng.gen_range(1..=2)).map(|_| rng.gen_range(2..=3)).collect(),
            labels: (0..t).map(|_| rng.gen_range(2..=max_l)).collect(),
            noise: rng.gen_range(0.05..0.5),
        }
    }
}

fn gaussian(rng: &mut impl Rng) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen();
    libm::sqrt(-2.0 * libm::log(u1)) * libm::cos(core::f64::consts::TAU * u2)
}

/// Label `t` follows `y_{t-1}` shifted by a feature-dependent offset, with
/// probability `noise` of a uniform draw instead.
pub fn random_dataset(cfg: &RandomDatasetConfig, seed: u64) -> Result<Dataset> {
    let schema = LabelSchema::new(cfg.labels.clone())?;
    let mut features: Vec<FeatureKind> = (0..cfg.numeric).map(|_| FeatureKind::Numeric).collect();
    features.extend(
        cfg.categorical
            .iter()
            .map(|&k| FeatureKind::Categorical { cardinality: k }),
    );
    let mut rng = seed::stream(seed, &["random-dataset".into()]);
    let instances = (0..cfg.n)
        .map(|_| {
            let mut x: Vec<Value> = (0..cfg.numeric).map(|_| Value::Num(gaussian(&mut rng))).collect();
            x.extend(cfg.categorical.iter().map(|&k| Value::Cat(rng.gen_range(0..k))));
            let signal: u32 = x
                .iter()
                .map(|v| match *v {
                    Value::Num(z) => (z > 0.0) as u32,
                    Value::Cat(c) => c,
                })
                .sum();
            let mut y: Vec<u32> = Vec::with_capacity(cfg.labels.len());
            for (t, &l) in cfg.labels.iter().enumerate() {
                let v = if rng.gen::<f64>() < cfg.noise {
                    rng.gen_range(0..l)
                } else {
                    let prev = if t == 0 { 0 } else { y[t - 1] };
                    (prev + signal + t as u32) % l
                };
                y.push(v);
            }
            Instance::new(x, y)
        })
        .collect();
    Ok(Dataset::new(format!("random-{seed}"), schema, features, instances))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn valid_and_reproducible() {
        let mut rng = seed::rng(3);
        for s in 0..20 {
            let cfg = RandomDatasetConfig::random_shape(&mut rng, 6, 4);
            let d = random_dataset(&cfg, s).unwrap();
            assert!(d.validate().is_empty());
            assert_eq!(d, random_dataset(&cfg, s).unwrap());
        }
    }
}
