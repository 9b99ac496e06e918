//! Per-position classifier chains: IC, CC, PCC, MEMM and VCC.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::viterbi::{self, FirstOrderChain};
use crate::base::{check_row, BaseLearner, BaseModel, Design, Row};
use crate::error::{Error, Result};
use crate::seed;
use crate::types::{check_permutation, Dataset, Distribution, FeatureKind, LabelSchema, Value};

/// Which earlier labels each chain step sees as extra features.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ChainMode {
    /// None: independent classifiers.
    Independent,
    /// Every earlier label in chain order (classifier chains).
    AllPrevious,
    /// Only the immediately preceding label (MEMM / VCC).
    FirstOrder,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainModel {
    schema: LabelSchema,
    features: Vec<FeatureKind>,
    /// `order[s]` is the label position predicted at chain step `s`.
    order: Vec<usize>,
    mode: ChainMode,
    models: Vec<BaseModel>,
}

impl ChainModel {
    /// Teacher-forced training: step `s` sees the true labels selected by
    /// `mode`.
    pub fn train(d: &Dataset, base: &BaseLearner, order: &[usize], mode: ChainMode) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::EmptyData);
        }
        check_permutation(order, d.schema.len())?;
        d.ensure_valid()?;
        let rows: Vec<&[Value]> = d.instances.iter().map(|i| i.x.values()).collect();
        let mut models = Vec::with_capacity(order.len());
        for (s, &position) in order.iter().enumerate() {
            let parents = Self::parents_of(order, mode, s);
            let cards: Vec<u32> = parents.iter().map(|&p| d.schema.cardinality(p)).collect();
            let mut extra = Vec::with_capacity(parents.len() * d.len());
            for inst in &d.instances {
                extra.extend(parents.iter().map(|&p| inst.y.0[p]));
            }
            let design = Design::from_refs(rows.clone(), &d.features).with_extra(&cards, extra)?;
            let labels = d.label_column(position);
            models.push(base.fit(&design, &labels, d.schema.cardinality(position) as usize)?);
        }
        Ok(ChainModel {
            schema: d.schema.clone(),
            features: d.features.clone(),
            order: order.to_vec(),
            mode,
            models,
        })
    }

    fn parents_of(order: &[usize], mode: ChainMode, step: usize) -> &[usize] {
        match mode {
            ChainMode::Independent => &[],
            ChainMode::AllPrevious => &order[..step],
            ChainMode::FirstOrder if step == 0 => &[],
            ChainMode::FirstOrder => &order[step - 1..step],
        }
    }

    pub fn schema(&self) -> &LabelSchema {
        &self.schema
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn mode(&self) -> ChainMode {
        self.mode
    }

    pub fn models(&self) -> &[BaseModel] {
        &self.models
    }

    pub fn check_input(&self, x: &[Value]) -> Result<()> {
        check_row(&self.features, Row::plain(x))
    }

    /// Conditional of chain step `s`; `chained` holds the labels of steps
    /// `0..s` in chain order.
    pub fn step_dist(&self, x: &[Value], s: usize, chained: &[u32]) -> Distribution {
        let extra: &[u32] = match self.mode {
            ChainMode::Independent => &[],
            ChainMode::AllPrevious => &chained[..s],
            ChainMode::FirstOrder if s == 0 => &[],
            ChainMode::FirstOrder => &chained[s - 1..s],
        };
        self.models[s].predict_unchecked(Row::new(x, extra))
    }

    /// Walks the chain, choosing each step's label with `choose`. Returns
    /// the labels in position order and the log score of the path.
    fn walk(&self, x: &[Value], mut choose: impl FnMut(usize, &Distribution) -> u32) -> (Vec<u32>, f64) {
        let mut chained = Vec::with_capacity(self.order.len());
        let mut score = 0.0;
        for s in 0..self.order.len() {
            let dist = self.step_dist(x, s, &chained);
            let k = choose(s, &dist);
            score += libm::log(dist.prob(k));
            chained.push(k);
        }
        (self.to_positions(&chained), score)
    }

    fn to_positions(&self, chained: &[u32]) -> Vec<u32> {
        let mut y = vec![0u32; chained.len()];
        for (&p, &k) in self.order.iter().zip(chained) {
            y[p] = k;
        }
        y
    }

    /// Greedy inference: each step takes its argmax given earlier
    /// predictions. For independent mode this is per-position argmax.
    pub fn predict_greedy(&self, x: &[Value]) -> Result<Vec<u32>> {
        self.check_input(x)?;
        Ok(self.walk(x, |_, d| d.argmax()).0)
    }

    /// Log of the product of the chain's conditionals evaluated at `y`
    /// (position order).
    pub fn log_joint(&self, x: &[Value], y: &[u32]) -> Result<f64> {
        self.check_input(x)?;
        self.schema.check(y)?;
        Ok(self.walk(x, |s, _| y[self.order[s]]).1)
    }

    pub fn joint_score(&self, x: &[Value], y: &[u32]) -> Result<f64> {
        Ok(libm::exp(self.log_joint(x, y)?))
    }

    /// Monte-Carlo search: the greedy path plus `samples` ancestral samples;
    /// the candidate with the highest joint probability wins (earliest on
    /// ties, greedy first).
    pub fn predict_sampled(&self, x: &[Value], samples: usize, seed: u64) -> Result<Vec<u32>> {
        self.check_input(x)?;
        let (mut best, mut best_score) = self.walk(x, |_, d| d.argmax());
        let mut rng = seed::stream(seed, &["pcc-samples".into()]);
        for _ in 0..samples {
            let (path, score) = self.walk(x, |_, d| d.sample_with(rng.gen::<f64>()));
            if score > best_score {
                best = path;
                best_score = score;
            }
        }
        Ok(best)
    }

    /// Exact MAP under the first-order factorisation, with its probability.
    pub fn predict_viterbi(&self, x: &[Value]) -> Result<(Vec<u32>, f64)> {
        self.check_input(x)?;
        if self.mode != ChainMode::FirstOrder {
            return Err(Error::param("mode", "Viterbi decoding needs a first-order chain"));
        }
        let (chained, score) = viterbi::viterbi_decode(&self.first_order(x));
        Ok((self.to_positions(&chained), libm::exp(score)))
    }

    /// Fixes the input of a first-order chain, exposing its conditionals.
    pub fn first_order<'a>(&'a self, x: &'a [Value]) -> FixedInput<'a> {
        FixedInput { chain: self, x }
    }
}

/// A first-order [`ChainModel`] with its input bound.
pub struct FixedInput<'a> {
    chain: &'a ChainModel,
    x: &'a [Value],
}

impl FirstOrderChain for FixedInput<'_> {
    fn n_steps(&self) -> usize {
        self.chain.order.len()
    }

    fn first(&self) -> Distribution {
        self.chain.models[0].predict_unchecked(Row::plain(self.x))
    }

    fn transition(&self, step: usize, prev: u32) -> Distribution {
        self.chain.models[step].predict_unchecked(Row::new(self.x, &[prev]))
    }

    fn transitions(&self, step: usize, n_prev: usize) -> Vec<Distribution> {
        self.chain.models[step].predict_over_last(self.x, n_prev as u32)
    }
}

pub fn time_order(len: usize) -> Vec<usize> {
    (0..len).collect()
}
