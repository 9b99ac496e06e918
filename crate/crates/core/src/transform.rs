//! Block transformation of `(emission, state)` streams into multi-label
//! datasets.
//!
//! For a window `tau` and anchor `t` the instance is
//!
//! ```text
//! features = (x[t-tau+1], ..., x[t], y[t-tau], ..., y[t-1])
//! labels   = [y[t], ..., y[t+tau-1]]
//! ```
//!
//! with 1-based time indices. Past states enter as categorical features
//! after the emission block. Anchors run with stride 1 from `tau + 1` to
//! `T_i - tau + 1`; with padding they run to `T_i` and missing future labels
//! repeat the final state.

use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::types::{Dataset, FeatureKind, FeatureVector, Instance, LabelSchema, LabelVector, Value};

#[derive(Debug, Clone, PartialEq)]
pub struct Sequence {
    pub id: String,
    pub emissions: Vec<FeatureVector>,
    pub states: Vec<u32>,
}

impl Sequence {
    pub fn new(id: impl Into<String>, emissions: Vec<FeatureVector>, states: Vec<u32>) -> Self {
        Sequence {
            id: id.into(),
            emissions,
            states,
        }
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn check(&self, features: &[FeatureKind], n_states: u32) -> Result<()> {
        let bad = |reason: String| Error::MalformedSequence {
            id: self.id.clone(),
            reason,
        };
        if self.emissions.len() != self.states.len() {
            return Err(bad(alloc::format!(
                "{} emissions but {} states",
                self.emissions.len(),
                self.states.len()
            )));
        }
        if self.states.is_empty() {
            return Err(bad("empty sequence".into()));
        }
        for (t, (x, &s)) in self.emissions.iter().zip(&self.states).enumerate() {
            if s >= n_states {
                return Err(bad(alloc::format!("state {s} at step {t} outside 0..{n_states}")));
            }
            if x.len() != features.len() {
                return Err(bad(alloc::format!(
                    "step {t} has {} features, expected {}",
                    x.len(),
                    features.len()
                )));
            }
            for (j, (kind, &v)) in features.iter().zip(x.values()).enumerate() {
                kind.check(j, v).map_err(|e| bad(alloc::format!("step {t}: {e}")))?;
            }
        }
        Ok(())
    }
}

/// Block-transformation parameters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Window {
    pub tau: usize,
    pub pad: bool,
}

impl Window {
    pub fn new(tau: usize) -> Self {
        Window { tau, pad: false }
    }

    pub fn padded(tau: usize) -> Self {
        Window { tau, pad: true }
    }

    /// Minimum sequence length accepted.
    pub fn min_len(&self) -> usize {
        if self.pad {
            self.tau + 1
        } else {
            2 * self.tau
        }
    }

    /// 1-based anchors emitted for a sequence of length `len`.
    pub fn anchors(&self, len: usize) -> core::ops::RangeInclusive<usize> {
        let last = if self.pad { len } else { len + 1 - self.tau };
        (self.tau + 1)..=last
    }
}

/// Feature layout of a transformed dataset: `tau` emission blocks followed by
/// `tau` past-state columns.
pub fn window_features(emission: &[FeatureKind], tau: usize, n_states: u32) -> Vec<FeatureKind> {
    let mut out = Vec::with_capacity(tau * (emission.len() + 1));
    for _ in 0..tau {
        out.extend_from_slice(emission);
    }
    out.extend(std::iter::repeat_n(
        FeatureKind::Categorical { cardinality: n_states },
        tau,
    ));
    out
}

/// Cuts every sequence into overlapping blocks; see the module docs for the
/// layout. Instances appear in (sequence, anchor) order.
pub fn window_transform(
    name: impl Into<String>,
    seqs: &[Sequence],
    emission: &[FeatureKind],
    n_states: u32,
    window: Window,
) -> Result<Dataset> {
    let tau = window.tau;
    if tau == 0 {
        return Err(Error::param("tau", "window length must be at least 1"));
    }
    let schema = LabelSchema::uniform(tau, n_states)?;
    let mut instances = Vec::new();
    for seq in seqs {
        seq.check(emission, n_states)?;
        if seq.len() < window.min_len() {
            return Err(Error::SequenceTooShort {
                id: seq.id.clone(),
                len: seq.len(),
                need: window.min_len(),
            });
        }
        let last_state = *seq.states.last().expect("checked non-empty");
        for anchor in window.anchors(seq.len()) {
            // zero-based index of x_t / y_t
            let t = anchor - 1;
            let mut x = Vec::with_capacity(tau * (emission.len() + 1));
            for s in (t + 1 - tau)..=t {
                x.extend_from_slice(seq.emissions[s].values());
            }
            for s in (t - tau)..t {
                x.push(Value::Cat(seq.states[s]));
            }
            let y = (t..t + tau)
                .map(|s| seq.states.get(s).copied().unwrap_or(last_state))
                .collect();
            instances.push(Instance {
                x: FeatureVector(x),
                y: LabelVector(y),
            });
        }
    }
    Ok(Dataset::new(
        name,
        schema,
        window_features(emission, tau, n_states),
        instances,
    ))
}
