//! Probabilistic multi-class base learners.
//!
//! Every multi-label method reduces to training several of these. Training
//! data is presented through a [`Design`]: borrowed base feature rows plus an
//! optional block of extra categorical columns (chained labels, meta-labels)
//! stored flat, so chains never copy the base features.

mod naive_bayes;
mod tree;

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{Distribution, FeatureKind, FeatureVector, Value};

pub use naive_bayes::{NaiveBayesModel, VARIANCE_FLOOR};
pub use tree::{DecisionTreeConfig, DecisionTreeModel, Node};

/// One query row: base features followed by extra categorical codes.
#[derive(Debug, Clone, Copy)]
pub struct Row<'a> {
    pub x: &'a [Value],
    pub extra: &'a [u32],
}

impl<'a> Row<'a> {
    pub fn new(x: &'a [Value], extra: &'a [u32]) -> Self {
        Row { x, extra }
    }

    pub fn plain(x: &'a [Value]) -> Self {
        Row { x, extra: &[] }
    }

    pub fn width(&self) -> usize {
        self.x.len() + self.extra.len()
    }

    #[inline]
    pub fn get(&self, col: usize) -> Value {
        if col < self.x.len() {
            self.x[col]
        } else {
            Value::Cat(self.extra[col - self.x.len()])
        }
    }
}

/// Training design matrix.
#[derive(Debug, Clone)]
pub struct Design<'a> {
    x: Vec<&'a [Value]>,
    extra: Vec<u32>,
    extra_width: usize,
    features: Vec<FeatureKind>,
}

impl<'a> Design<'a> {
    pub fn new<R: AsRef<[Value]> + 'a>(rows: &'a [R], features: &[FeatureKind]) -> Self {
        Design {
            x: rows.iter().map(|r| r.as_ref()).collect(),
            extra: Vec::new(),
            extra_width: 0,
            features: features.to_vec(),
        }
    }

    pub fn from_refs(rows: Vec<&'a [Value]>, features: &[FeatureKind]) -> Self {
        Design {
            x: rows,
            extra: Vec::new(),
            extra_width: 0,
            features: features.to_vec(),
        }
    }

    /// Appends categorical columns; `values` is row-major with one entry per
    /// (row, column) and `cardinalities.len()` columns.
    pub fn with_extra(mut self, cardinalities: &[u32], values: Vec<u32>) -> Result<Self> {
        let width = cardinalities.len();
        if values.len() != width * self.x.len() {
            return Err(Error::LengthMismatch {
                left: values.len(),
                right: width * self.x.len(),
            });
        }
        self.features.extend(
            cardinalities
                .iter()
                .map(|&c| FeatureKind::Categorical { cardinality: c }),
        );
        self.extra = values;
        self.extra_width = width;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn features(&self) -> &[FeatureKind] {
        &self.features
    }

    pub fn row(&self, i: usize) -> Row<'_> {
        Row {
            x: self.x[i],
            extra: &self.extra[i * self.extra_width..(i + 1) * self.extra_width],
        }
    }

    #[inline]
    pub fn value(&self, i: usize, col: usize) -> Value {
        let x = self.x[i];
        if col < x.len() {
            x[col]
        } else {
            Value::Cat(self.extra[i * self.extra_width + col - x.len()])
        }
    }

    /// Checks every row against the declared feature kinds.
    pub fn check(&self) -> Result<()> {
        for i in 0..self.len() {
            check_row(&self.features, self.row(i))?;
        }
        Ok(())
    }
}

pub(crate) fn check_row(features: &[FeatureKind], row: Row<'_>) -> Result<()> {
    if row.width() != features.len() {
        return Err(Error::Arity {
            expected: features.len(),
            got: row.width(),
        });
    }
    for (j, kind) in features.iter().enumerate() {
        kind.check(j, row.get(j))?;
    }
    Ok(())
}

pub(crate) fn check_labels(labels: &[u32], n_classes: usize, rows: usize) -> Result<()> {
    if labels.len() != rows {
        return Err(Error::LengthMismatch {
            left: labels.len(),
            right: rows,
        });
    }
    if n_classes == 0 {
        return Err(Error::param("n_classes", "at least one class required"));
    }
    if let Some(&bad) = labels.iter().find(|&&c| c as usize >= n_classes) {
        return Err(Error::LabelOutOfRange {
            position: 0,
            value: bad,
            cardinality: n_classes as u32,
        });
    }
    Ok(())
}

/// Which base learner to train.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub enum BaseLearner {
    #[default]
    NaiveBayes,
    DecisionTree(DecisionTreeConfig),
}

impl BaseLearner {
    pub fn tree() -> Self {
        BaseLearner::DecisionTree(DecisionTreeConfig::default())
    }

    pub fn name(&self) -> &'static str {
        match self {
            BaseLearner::NaiveBayes => "nb",
            BaseLearner::DecisionTree(_) => "dt",
        }
    }

    pub fn fit(&self, design: &Design<'_>, labels: &[u32], n_classes: usize) -> Result<BaseModel> {
        Ok(match self {
            BaseLearner::NaiveBayes => BaseModel::NaiveBayes(NaiveBayesModel::train(design, labels, n_classes)?),
            BaseLearner::DecisionTree(cfg) => {
                BaseModel::DecisionTree(DecisionTreeModel::train(design, labels, n_classes, *cfg)?)
            }
        })
    }

    /// Convenience for plain feature rows.
    pub fn fit_rows(
        &self,
        rows: &[FeatureVector],
        labels: &[u32],
        n_classes: usize,
        features: &[FeatureKind],
    ) -> Result<BaseModel> {
        self.fit(&Design::new(rows, features), labels, n_classes)
    }
}

/// A trained base classifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum BaseModel {
    NaiveBayes(NaiveBayesModel),
    DecisionTree(DecisionTreeModel),
}

impl BaseModel {
    pub fn n_classes(&self) -> usize {
        match self {
            BaseModel::NaiveBayes(m) => m.n_classes(),
            BaseModel::DecisionTree(m) => m.n_classes(),
        }
    }

    pub fn features(&self) -> &[FeatureKind] {
        match self {
            BaseModel::NaiveBayes(m) => m.features(),
            BaseModel::DecisionTree(m) => m.features(),
        }
    }

    pub fn predict_dist(&self, row: Row<'_>) -> Result<Distribution> {
        check_row(self.features(), row)?;
        Ok(self.predict_unchecked(row))
    }

    /// Skips the arity / range check. Callers must pass rows that conform to
    /// [`BaseModel::features`].
    pub fn predict_unchecked(&self, row: Row<'_>) -> Distribution {
        match self {
            BaseModel::NaiveBayes(m) => m.predict(row),
            BaseModel::DecisionTree(m) => m.predict(row),
        }
    }

    /// `predict_unchecked(Row::new(x, &[v]))` for every `v` in `0..n`.
    pub fn predict_over_last(&self, x: &[Value], n: u32) -> Vec<Distribution> {
        match self {
            BaseModel::NaiveBayes(m) => m.predict_over_last(x, n),
            BaseModel::DecisionTree(m) => (0..n).map(|v| m.predict(Row::new(x, &[v]))).collect(),
        }
    }

    pub fn predict(&self, row: Row<'_>) -> Result<u32> {
        Ok(self.predict_dist(row)?.argmax())
    }
}
