//! Shared data model: schemas, instances, datasets and distributions.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when checking that a distribution sums to one.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// A single feature value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Value {
    /// Dense zero-based categorical code.
    Cat(u32),
    Num(f64),
}

impl Value {
    pub fn as_num(self) -> Option<f64> {
        match self {
            Value::Num(v) => Some(v),
            Value::Cat(_) => None,
        }
    }

    pub fn as_cat(self) -> Option<u32> {
        match self {
            Value::Cat(c) => Some(c),
            Value::Num(_) => None,
        }
    }
}

/// Declared kind of a feature column.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeatureKind {
    Numeric,
    Categorical { cardinality: u32 },
}

impl FeatureKind {
    /// Checks that `value` is of this kind (and in range for categorical
    /// features). `index` is only used for the error.
    pub fn check(&self, index: usize, value: Value) -> Result<()> {
        match (self, value) {
            (FeatureKind::Numeric, Value::Num(_)) => Ok(()),
            (FeatureKind::Numeric, Value::Cat(_)) => Err(Error::ExpectedNumeric(index)),
            (FeatureKind::Categorical { cardinality }, Value::Cat(code)) => {
                if code < *cardinality {
                    Ok(())
                } else {
                    Err(Error::CategoryOutOfRange {
                        feature: index,
                        code,
                        cardinality: *cardinality,
                    })
                }
            }
            (FeatureKind::Categorical { .. }, Value::Num(_)) => Err(Error::ExpectedCategorical(index)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FeatureVector(pub Vec<Value>);

impl FeatureVector {
    pub fn new(values: Vec<Value>) -> Self {
        FeatureVector(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[Value] {
        &self.0
    }
}

impl AsRef<[Value]> for FeatureVector {
    fn as_ref(&self) -> &[Value] {
        &self.0
    }
}

impl From<Vec<Value>> for FeatureVector {
    fn from(v: Vec<Value>) -> Self {
        FeatureVector(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct LabelVector(pub Vec<u32>);

impl LabelVector {
    pub fn new(values: Vec<u32>) -> Self {
        LabelVector(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }
}

impl AsRef<[u32]> for LabelVector {
    fn as_ref(&self) -> &[u32] {
        &self.0
    }
}

impl From<Vec<u32>> for LabelVector {
    fn from(v: Vec<u32>) -> Self {
        LabelVector(v)
    }
}

/// Output structure: `T` label positions, position `t` taking values in
/// `0..cardinalities[t]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelSchema {
    cardinalities: Vec<u32>,
}

impl LabelSchema {
    pub fn new(cardinalities: Vec<u32>) -> Result<Self> {
        if cardinalities.is_empty() {
            return Err(Error::InvalidSchema("at least one label position required".into()));
        }
        if let Some(t) = cardinalities.iter().position(|&l| l < 2) {
            return Err(Error::InvalidSchema(format!(
                "position {t} has cardinality {}, at least 2 required",
                cardinalities[t]
            )));
        }
        Ok(LabelSchema { cardinalities })
    }

    /// `positions` copies of the same cardinality.
    pub fn uniform(positions: usize, cardinality: u32) -> Result<Self> {
        Self::new(alloc::vec![cardinality; positions])
    }

    pub fn len(&self) -> usize {
        self.cardinalities.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cardinality(&self, position: usize) -> u32 {
        self.cardinalities[position]
    }

    pub fn cardinalities(&self) -> &[u32] {
        &self.cardinalities
    }

    /// Schema of the positions listed in `positions`, in that order.
    pub fn select(&self, positions: &[usize]) -> Result<Self> {
        Self::new(positions.iter().map(|&p| self.cardinalities[p]).collect())
    }

    pub fn check(&self, y: &[u32]) -> Result<()> {
        if y.len() != self.len() {
            return Err(Error::LabelArity {
                expected: self.len(),
                got: y.len(),
            });
        }
        for (position, (&value, &cardinality)) in y.iter().zip(&self.cardinalities).enumerate() {
            if value >= cardinality {
                return Err(Error::LabelOutOfRange {
                    position,
                    value,
                    cardinality,
                });
            }
        }
        Ok(())
    }

    /// Number of distinct label vectors, saturating.
    pub fn space_size(&self) -> u128 {
        self.cardinalities
            .iter()
            .fold(1u128, |acc, &l| acc.saturating_mul(l as u128))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub x: FeatureVector,
    pub y: LabelVector,
}

impl Instance {
    pub fn new(x: impl Into<FeatureVector>, y: impl Into<LabelVector>) -> Self {
        Instance {
            x: x.into(),
            y: y.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub name: String,
    pub schema: LabelSchema,
    pub features: Vec<FeatureKind>,
    pub instances: Vec<Instance>,
}

/// One invariant violation found by [`validate_dataset`].
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub instance: usize,
    pub kind: ViolationKind,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ViolationKind {
    FeatureArity {
        expected: usize,
        got: usize,
    },
    Feature(Error),
    LabelArity {
        expected: usize,
        got: usize,
    },
    Label {
        position: usize,
        value: u32,
        cardinality: u32,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "instance {}: ", self.instance)?;
        match &self.kind {
            ViolationKind::FeatureArity { expected, got } => {
                write!(f, "{got} features, expected {expected}")
            }
            ViolationKind::Feature(e) => write!(f, "{e}"),
            ViolationKind::LabelArity { expected, got } => {
                write!(f, "{got} labels, expected {expected}")
            }
            ViolationKind::Label {
                position,
                value,
                cardinality,
            } => write!(f, "label {value} at position {position} outside 0..{cardinality}"),
        }
    }
}

/// Every schema / feature violation, tagged with its instance index.
pub fn validate_dataset(d: &Dataset) -> Vec<Violation> {
    let mut out = Vec::new();
    let width = d.features.len();
    for (i, inst) in d.instances.iter().enumerate() {
        if inst.x.len() != width {
            out.push(Violation {
                instance: i,
                kind: ViolationKind::FeatureArity {
                    expected: width,
                    got: inst.x.len(),
                },
            });
        } else {
            for (j, (kind, &v)) in d.features.iter().zip(inst.x.values()).enumerate() {
                if let Err(e) = kind.check(j, v) {
                    out.push(Violation {
                        instance: i,
                        kind: ViolationKind::Feature(e),
                    });
                }
            }
        }
        if inst.y.len() != d.schema.len() {
            out.push(Violation {
                instance: i,
                kind: ViolationKind::LabelArity {
                    expected: d.schema.len(),
                    got: inst.y.len(),
                },
            });
            continue;
        }
        for (position, (&value, &cardinality)) in inst.y.values().iter().zip(d.schema.cardinalities()).enumerate() {
            if value >= cardinality {
                out.push(Violation {
                    instance: i,
                    kind: ViolationKind::Label {
                        position,
                        value,
                        cardinality,
                    },
                });
            }
        }
    }
    out
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        schema: LabelSchema,
        features: Vec<FeatureKind>,
        instances: Vec<Instance>,
    ) -> Self {
        Dataset {
            name: name.into(),
            schema,
            features,
            instances,
        }
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn validate(&self) -> Vec<Violation> {
        validate_dataset(self)
    }

    /// Fails with the first violation when the dataset is not valid.
    pub fn ensure_valid(&self) -> Result<()> {
        let violations = validate_dataset(self);
        match violations.first() {
            None => Ok(()),
            Some(first) => Err(Error::InvalidDataset {
                name: self.name.clone(),
                violations: violations.len(),
                first: format!("{first}"),
            }),
        }
    }

    /// Copy of the dataset restricted to the given instance indices.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            schema: self.schema.clone(),
            features: self.features.clone(),
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
        }
    }

    /// Label column `position` across all instances.
    pub fn label_column(&self, position: usize) -> Vec<u32> {
        self.instances.iter().map(|inst| inst.y.0[position]).collect()
    }

    /// Reorders label positions: new position `j` holds old position
    /// `order[j]`.
    pub fn permute_labels(&self, order: &[usize]) -> Result<Dataset> {
        check_permutation(order, self.schema.len())?;
        Ok(Dataset {
            name: self.name.clone(),
            schema: self.schema.select(order)?,
            features: self.features.clone(),
            instances: self
                .instances
                .iter()
                .map(|inst| Instance {
                    x: inst.x.clone(),
                    y: LabelVector(order.iter().map(|&p| inst.y.0[p]).collect()),
                })
                .collect(),
        })
    }
}

pub(crate) fn check_permutation(order: &[usize], n: usize) -> Result<()> {
    if order.len() != n {
        return Err(Error::InvalidOrder(n));
    }
    let mut seen = alloc::vec![false; n];
    for &p in order {
        if p >= n || seen[p] {
            return Err(Error::InvalidOrder(n));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Probability distribution over `0..len` classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution(Vec<f64>);

impl Distribution {
    /// Validates non-negativity and sum-to-one.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::param("probs", "empty distribution"));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::param("probs", "entries must be finite and non-negative"));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::param("probs", format!("entries sum to {sum}")));
        }
        Ok(Distribution(probs))
    }

    /// Normalises non-negative weights.
    pub fn from_weights(weights: Vec<f64>) -> Result<Self> {
        let total: f64 = weights.iter().sum();
        if !total.is_finite() || total <= 0.0 {
            return Err(Error::param("weights", "total weight must be positive"));
        }
        Self::new(weights.into_iter().map(|w| w / total).collect())
    }

    pub fn uniform(n: usize) -> Self {
        Distribution(alloc::vec![1.0 / n as f64; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn prob(&self, class: u32) -> f64 {
        self.0[class as usize]
    }

    /// Most probable class; ties go to the lowest index.
    pub fn argmax(&self) -> u32 {
        argmax(&self.0) as u32
    }

    /// Class whose cumulative mass first exceeds `u` in `[0, 1)`.
    pub fn sample_with(&self, u: f64) -> u32 {
        let mut acc = 0.0;
        for (i, &p) in self.0.iter().enumerate() {
            acc += p;
            if u < acc {
                return i as u32;
            }
        }
        // rounding left `u` past the total; fall back to the last class with mass
        self.0.iter().rposition(|&p| p > 0.0).unwrap_or(0) as u32
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

/// Index of the largest entry, lowest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}
