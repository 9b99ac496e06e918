//! Multi-label problem-transformation methods applied to sequence prediction.
//!
//! A stream of `(emission, state)` pairs is cut into fixed-width blocks
//! ([`transform::window_transform`]); each block pairs a window of past
//! observations with the next `tau` states, giving an ordinary multi-label
//! dataset. Any method in [`methods`] can then be trained on it:
//!
//! | method | structure | inference |
//! |--------|-----------|-----------|
//! | IC     | independent per-position classifiers | argmax per position |
//! | CC     | chain over all earlier labels | greedy |
//! | PCC    | same as CC | greedy path + Monte-Carlo samples, best joint |
//! | MEMM   | first-order chain | greedy |
//! | VCC    | first-order chain | exact MAP by Viterbi |
//! | LP     | one meta-class per distinct label vector | argmax |
//! | RAkELd | disjoint size-`k` labelsets, one LP each | re-index |
//! | CT     | each label conditioned on up to `ell` high-MI parents | greedy |
//! | SICL   | time-ordered labelsets of size `alpha`, `2 alpha`, ... chained | set by set |
//!
//! The crate is `no_std` (with `alloc`) when built without the default `std`
//! feature. File formats, the synthetic data generator and the CLI live in
//! the companion `mlseq` crate.

#![cfg_attr(not(feature = "std"), no_std)]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod base;
pub mod error;
pub mod gen;
pub mod geo;
pub mod harness;
pub mod methods;
pub mod metrics;
pub mod seed;
pub mod transform;
pub mod types;

pub use base::{BaseLearner, BaseModel, DecisionTreeConfig, Design};
pub use error::{Error, Result};
pub use methods::{MethodKind, MethodSpec, MultiLabelModel, TrainedModel};
pub use metrics::EvalReport;
pub use types::{
    Dataset, Distribution, FeatureKind, FeatureVector, Instance, LabelSchema, LabelVector, Value, Violation,
};
