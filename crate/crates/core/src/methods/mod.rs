//! Problem-transformation predictors and their shared contract.

pub mod chain;
pub mod info;
pub mod powerset;
pub mod subsets;
pub mod trellis;
pub mod viterbi;

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

pub use chain::{ChainMode, ChainModel};
pub use info::mutual_information;
pub use powerset::PowersetModel;
pub use subsets::SubsetsModel;
pub use trellis::TrellisModel;
pub use viterbi::{ConditionalTables, FirstOrderChain, ViterbiTable};

use crate::base::BaseLearner;
use crate::error::{Error, Result};
use crate::seed;
use crate::types::{Dataset, LabelSchema, LabelVector, Value};

/// A trained multi-label predictor.
pub trait MultiLabelModel {
    fn schema(&self) -> &LabelSchema;

    fn predict(&self, x: &[Value]) -> Result<LabelVector>;

    /// Joint probability the model assigns to `y`, where the model defines
    /// one.
    fn joint_score(&self, _x: &[Value], _y: &[u32]) -> Option<Result<f64>> {
        None
    }
}

/// Label order for chain-structured methods.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum LabelOrder {
    #[default]
    Time,
    /// Seeded random permutation.
    Random,
}

impl LabelOrder {
    pub fn resolve(self, len: usize, seed: u64) -> Vec<usize> {
        let mut order: Vec<usize> = (0..len).collect();
        if self == LabelOrder::Random {
            order.shuffle(&mut seed::stream(seed, &["label-order".into()]));
        }
        order
    }
}

impl FromStr for LabelOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "time" => Ok(LabelOrder::Time),
            "random" => Ok(LabelOrder::Random),
            other => Err(Error::param("order", alloc::format!("unknown order `{other}`"))),
        }
    }
}

impl fmt::Display for LabelOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LabelOrder::Time => "time",
            LabelOrder::Random => "random",
        })
    }
}

pub const DEFAULT_K: usize = 3;
pub const DEFAULT_ELL: usize = 2;
pub const DEFAULT_SAMPLES: usize = 100;
pub const DEFAULT_ALPHA: usize = 3;

/// Method plus its hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MethodKind {
    Ic,
    Cc { order: LabelOrder },
    Pcc { order: LabelOrder, samples: usize },
    Memm,
    Vcc,
    Lp { prune: Option<usize> },
    Rakeld { k: usize, sequential: bool },
    Ct { ell: usize, order: LabelOrder },
    Sicl { alpha: usize },
}

impl MethodKind {
    /// The method with its default hyperparameters.
    pub fn with_defaults(name: &str) -> Result<Self> {
        Ok(match name {
            "ic" => MethodKind::Ic,
            "cc" => MethodKind::Cc {
                order: LabelOrder::Time,
            },
            "pcc" => MethodKind::Pcc {
                order: LabelOrder::Time,
                samples: DEFAULT_SAMPLES,
            },
            "memm" => MethodKind::Memm,
            "vcc" => MethodKind::Vcc,
            "lp" => MethodKind::Lp { prune: None },
            "rakeld" => MethodKind::Rakeld {
                k: DEFAULT_K,
                sequential: false,
            },
            "ct" => MethodKind::Ct {
                ell: DEFAULT_ELL,
                order: LabelOrder::Time,
            },
            "sicl" => MethodKind::Sicl { alpha: DEFAULT_ALPHA },
            other => return Err(Error::param("method", alloc::format!("unknown method `{other}`"))),
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            MethodKind::Ic => "ic",
            MethodKind::Cc { .. } => "cc",
            MethodKind::Pcc { .. } => "pcc",
            MethodKind::Memm => "memm",
            MethodKind::Vcc => "vcc",
            MethodKind::Lp { .. } => "lp",
            MethodKind::Rakeld { .. } => "rakeld",
            MethodKind::Ct { .. } => "ct",
            MethodKind::Sicl { .. } => "sicl",
        }
    }
}

/// A named, fully configured method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSpec {
    pub name: String,
    pub kind: MethodKind,
    pub base: BaseLearner,
}

impl MethodSpec {
    pub fn new(kind: MethodKind, base: BaseLearner) -> Self {
        MethodSpec {
            name: kind.name().to_string(),
            kind,
            base,
        }
    }

    pub fn named(name: impl Into<String>, kind: MethodKind, base: BaseLearner) -> Self {
        MethodSpec {
            name: name.into(),
            kind,
            base,
        }
    }

    /// Trains on `d`. Every random choice derives from `seed`.
    pub fn train(&self, d: &Dataset, seed: u64) -> Result<TrainedModel> {
        let t = d.schema.len();
        let time = chain::time_order(t);
        let base = &self.base;
        Ok(match &self.kind {
            MethodKind::Ic => TrainedModel::Ic(ChainModel::train(d, base, &time, ChainMode::Independent)?),
            MethodKind::Cc { order } => {
                let order = order.resolve(t, seed::derive(seed, &["cc-order".into()]));
                TrainedModel::Cc(ChainModel::train(d, base, &order, ChainMode::AllPrevious)?)
            }
            MethodKind::Pcc { order, samples } => {
                let order = order.resolve(t, seed::derive(seed, &["cc-order".into()]));
                TrainedModel::Pcc {
                    chain: ChainModel::train(d, base, &order, ChainMode::AllPrevious)?,
                    samples: *samples,
                    seed: seed::derive(seed, &["pcc".into()]),
                }
            }
            MethodKind::Memm => TrainedModel::Memm(ChainModel::train(d, base, &time, ChainMode::FirstOrder)?),
            MethodKind::Vcc => TrainedModel::Vcc(ChainModel::train(d, base, &time, ChainMode::FirstOrder)?),
            MethodKind::Lp { prune } => TrainedModel::Lp(PowersetModel::train_dataset(d, base, *prune)?),
            MethodKind::Rakeld { k, sequential } => TrainedModel::Rakeld(SubsetsModel::rakeld(
                d,
                base,
                *k,
                seed::derive(seed, &["rakeld".into()]),
                *sequential,
            )?),
            MethodKind::Ct { ell, order } => {
                let order = order.resolve(t, seed::derive(seed, &["ct-order".into()]));
                TrainedModel::Ct(TrellisModel::train(d, base, *ell, &order)?)
            }
            MethodKind::Sicl { alpha } => TrainedModel::Sicl(SubsetsModel::sicl(d, base, *alpha)?),
        })
    }
}

/// Any trained method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TrainedModel {
    Ic(ChainModel),
    Cc(ChainModel),
    Pcc {
        chain: ChainModel,
        samples: usize,
        seed: u64,
    },
    Memm(ChainModel),
    Vcc(ChainModel),
    Lp(PowersetModel),
    Rakeld(SubsetsModel),
    Ct(TrellisModel),
    Sicl(SubsetsModel),
}

impl TrainedModel {
    pub fn method_name(&self) -> &'static str {
        match self {
            TrainedModel::Ic(_) => "ic",
            TrainedModel::Cc(_) => "cc",
            TrainedModel::Pcc { .. } => "pcc",
            TrainedModel::Memm(_) => "memm",
            TrainedModel::Vcc(_) => "vcc",
            TrainedModel::Lp(_) => "lp",
            TrainedModel::Rakeld(_) => "rakeld",
            TrainedModel::Ct(_) => "ct",
            TrainedModel::Sicl(_) => "sicl",
        }
    }

    pub fn predict_all(&self, xs: &[&[Value]]) -> Result<Vec<LabelVector>> {
        xs.iter().map(|x| self.predict(x)).collect()
    }
}

impl MultiLabelModel for TrainedModel {
    fn schema(&self) -> &LabelSchema {
        match self {
            TrainedModel::Ic(m) | TrainedModel::Cc(m) | TrainedModel::Memm(m) | TrainedModel::Vcc(m) => m.schema(),
            TrainedModel::Pcc { chain, .. } => chain.schema(),
            TrainedModel::Lp(m) => m.schema(),
            TrainedModel::Rakeld(m) | TrainedModel::Sicl(m) => m.schema(),
            TrainedModel::Ct(m) => m.schema(),
        }
    }

    fn predict(&self, x: &[Value]) -> Result<LabelVector> {
        match self {
            TrainedModel::Ic(m) | TrainedModel::Cc(m) | TrainedModel::Memm(m) => m.predict_greedy(x).map(LabelVector),
            TrainedModel::Pcc { chain, samples, seed } => chain.predict_sampled(x, *samples, *seed).map(LabelVector),
            TrainedModel::Vcc(m) => m.predict_viterbi(x).map(|(y, _)| LabelVector(y)),
            TrainedModel::Lp(m) => m.predict(x),
            TrainedModel::Rakeld(m) | TrainedModel::Sicl(m) => m.predict(x),
            TrainedModel::Ct(m) => m.predict(x),
        }
    }

    fn joint_score(&self, x: &[Value], y: &[u32]) -> Option<Result<f64>> {
        Some(match self {
            TrainedModel::Ic(m) | TrainedModel::Cc(m) | TrainedModel::Memm(m) | TrainedModel::Vcc(m) => {
                m.joint_score(x, y)
            }
            TrainedModel::Pcc { chain, .. } => chain.joint_score(x, y),
            TrainedModel::Lp(m) => {
                return Some(
                    m.schema()
                        .check(y)
                        .and_then(|_| m.score_row(crate::base::Row::plain(x), y)),
                )
            }
            TrainedModel::Rakeld(m) | TrainedModel::Sicl(m) => m.joint_score(x, y),
            TrainedModel::Ct(m) => m.joint_score(x, y),
        })
    }
}

/// Independent classifiers.
pub fn ic_train(d: &Dataset, base: &BaseLearner) -> Result<ChainModel> {
    ChainModel::train(d, base, &chain::time_order(d.schema.len()), ChainMode::Independent)
}

/// Classifier chain in the given label order.
pub fn cc_train(d: &Dataset, base: &BaseLearner, order: &[usize]) -> Result<ChainModel> {
    ChainModel::train(d, base, order, ChainMode::AllPrevious)
}

/// First-order chain in time order, shared by MEMM (greedy) and VCC (Viterbi).
pub fn memm_train(d: &Dataset, base: &BaseLearner) -> Result<ChainModel> {
    ChainModel::train(d, base, &chain::time_order(d.schema.len()), ChainMode::FirstOrder)
}

pub fn lp_train(d: &Dataset, base: &BaseLearner, prune: Option<usize>) -> Result<PowersetModel> {
    PowersetModel::train_dataset(d, base, prune)
}

pub fn rakeld_train(d: &Dataset, base: &BaseLearner, k: usize, seed: u64, sequential: bool) -> Result<SubsetsModel> {
    SubsetsModel::rakeld(d, base, k, seed, sequential)
}

pub fn ct_train(d: &Dataset, base: &BaseLearner, ell: usize, order: &[usize]) -> Result<TrellisModel> {
    TrellisModel::train(d, base, ell, order)
}

pub fn sicl_train(d: &Dataset, base: &BaseLearner, alpha: usize) -> Result<SubsetsModel> {
    SubsetsModel::sicl(d, base, alpha)
}
