//! Label powerset: every distinct training label vector is one meta-class.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::base::{BaseLearner, BaseModel, Design, Row};
use crate::error::{Error, Result};
use crate::types::{Dataset, LabelSchema, LabelVector, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowersetModel {
    schema: LabelSchema,
    /// Meta-classes, ordered by training frequency (descending) then first
    /// occurrence.
    classes: Vec<LabelVector>,
    /// Training frequency of each meta-class before any pruning.
    support: Vec<usize>,
    classifier: BaseModel,
}

/// Distinct vectors with (frequency, first occurrence), most frequent first.
fn ranked_vectors(targets: &[Vec<u32>]) -> Vec<(Vec<u32>, usize)> {
    let mut stats: BTreeMap<&[u32], (usize, usize)> = BTreeMap::new();
    for (i, y) in targets.iter().enumerate() {
        stats.entry(y.as_slice()).or_insert((0, i)).0 += 1;
    }
    let mut ranked: Vec<(&[u32], usize, usize)> =
        stats.into_iter().map(|(y, (count, first))| (y, count, first)).collect();
    ranked.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    ranked.into_iter().map(|(y, count, _)| (y.to_vec(), count)).collect()
}

fn hamming(a: &[u32], b: &[u32]) -> usize {
    a.iter().zip(b).filter(|(x, y)| x != y).count()
}

impl PowersetModel {
    /// Trains on `targets` (one label vector per design row). Returns the
    /// model and each row's assigned meta-class.
    ///
    /// With `prune = Some(n)` only the `n` most frequent vectors are kept;
    /// other rows move to the nearest kept vector by Hamming distance (ties
    /// to the more frequent, then earlier, vector).
    pub fn train(
        design: &Design<'_>,
        targets: &[Vec<u32>],
        schema: &LabelSchema,
        base: &BaseLearner,
        prune: Option<usize>,
    ) -> Result<(Self, Vec<u32>)> {
        if design.is_empty() {
            return Err(Error::EmptyData);
        }
        if targets.len() != design.len() {
            return Err(Error::LengthMismatch {
                left: targets.len(),
                right: design.len(),
            });
        }
        if prune == Some(0) {
            return Err(Error::param("prune", "must keep at least one label vector"));
        }
        for y in targets {
            schema.check(y)?;
        }
        let mut ranked = ranked_vectors(targets);
        if let Some(n) = prune {
            ranked.truncate(n);
        }
        let index: BTreeMap<&[u32], u32> = ranked
            .iter()
            .enumerate()
            .map(|(k, (y, _))| (y.as_slice(), k as u32))
            .collect();
        let meta: Vec<u32> = targets
            .iter()
            .map(|y| match index.get(y.as_slice()) {
                Some(&k) => k,
                None => {
                    let mut best = 0;
                    for (k, (kept, _)) in ranked.iter().enumerate().skip(1) {
                        if hamming(y, kept) < hamming(y, &ranked[best].0) {
                            best = k;
                        }
                    }
                    best as u32
                }
            })
            .collect();
        let classifier = base.fit(design, &meta, ranked.len())?;
        let (classes, support) = ranked.into_iter().map(|(y, n)| (LabelVector(y), n)).unzip();
        Ok((
            PowersetModel {
                schema: schema.clone(),
                classes,
                support,
                classifier,
            },
            meta,
        ))
    }

    /// Plain LP on a dataset.
    pub fn train_dataset(d: &Dataset, base: &BaseLearner, prune: Option<usize>) -> Result<Self> {
        d.ensure_valid()?;
        let design = Design::from_refs(d.instances_x(), &d.features);
        let targets: Vec<Vec<u32>> = d.instances.iter().map(|i| i.y.0.clone()).collect();
        Ok(Self::train(&design, &targets, &d.schema, base, prune)?.0)
    }

    pub fn schema(&self) -> &LabelSchema {
        &self.schema
    }

    pub fn classes(&self) -> &[LabelVector] {
        &self.classes
    }

    pub fn support(&self) -> &[usize] {
        &self.support
    }

    pub fn classifier(&self) -> &BaseModel {
        &self.classifier
    }

    pub fn class_index(&self, y: &[u32]) -> Option<u32> {
        self.classes.iter().position(|c| c.values() == y).map(|k| k as u32)
    }

    /// Most probable meta-class for a row.
    pub fn predict_meta(&self, row: Row<'_>) -> Result<u32> {
        self.classifier.predict(row)
    }

    pub fn predict_row(&self, row: Row<'_>) -> Result<&LabelVector> {
        Ok(&self.classes[self.predict_meta(row)? as usize])
    }

    pub fn predict(&self, x: &[Value]) -> Result<LabelVector> {
        self.predict_row(Row::plain(x)).cloned()
    }

    /// Probability of `y` as a meta-class; zero outside the known vectors.
    pub fn score_row(&self, row: Row<'_>, y: &[u32]) -> Result<f64> {
        let dist = self.classifier.predict_dist(row)?;
        Ok(self.class_index(y).map_or(0.0, |k| dist.prob(k)))
    }
}

impl Dataset {
    pub(crate) fn instances_x(&self) -> Vec<&[Value]> {
        self.instances.iter().map(|i| i.x.values()).collect()
    }
}
