//! Classifier trellis: each label conditions on at most `ell` earlier labels
//! chosen by empirical mutual information.

use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::info::mutual_information;
use crate::base::{check_row, BaseLearner, BaseModel, Design, Row};
use crate::error::{Error, Result};
use crate::types::{check_permutation, Dataset, FeatureKind, LabelSchema, LabelVector, Value};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrellisModel {
    schema: LabelSchema,
    features: Vec<FeatureKind>,
    order: Vec<usize>,
    /// Parent positions of each chain step, strongest first.
    parents: Vec<Vec<usize>>,
    models: Vec<BaseModel>,
}

/// Parents of every step of `order`: the `min(ell, s)` earlier positions
/// with the highest mutual information, ties to the nearer step then the
/// lower position index.
pub fn select_parents(d: &Dataset, order: &[usize], ell: usize) -> Result<Vec<Vec<usize>>> {
    let columns: Vec<Vec<u32>> = (0..d.schema.len()).map(|p| d.label_column(p)).collect();
    let mut out = Vec::with_capacity(order.len());
    for (s, &p) in order.iter().enumerate() {
        let mut scored: Vec<(f64, usize, usize)> = Vec::with_capacity(s);
        for (s_q, &q) in order[..s].iter().enumerate() {
            scored.push((mutual_information(&columns[p], &columns[q])?, s - s_q, q));
        }
        scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        out.push(scored.into_iter().take(ell).map(|(_, _, q)| q).collect());
    }
    Ok(out)
}

impl TrellisModel {
    pub fn train(d: &Dataset, base: &BaseLearner, ell: usize, order: &[usize]) -> Result<Self> {
        if ell == 0 {
            return Err(Error::param("ell", "must be at least 1"));
        }
        if d.is_empty() {
            return Err(Error::EmptyData);
        }
        d.ensure_valid()?;
        check_permutation(order, d.schema.len())?;
        let parents = select_parents(d, order, ell)?;
        let rows = d.instances_x();
        let mut models = Vec::with_capacity(order.len());
        for (&p, pa) in order.iter().zip(&parents) {
            let cards: Vec<u32> = pa.iter().map(|&q| d.schema.cardinality(q)).collect();
            let mut extra = Vec::with_capacity(pa.len() * d.len());
            for inst in &d.instances {
                extra.extend(pa.iter().map(|&q| inst.y.0[q]));
            }
            let design = Design::from_refs(rows.clone(), &d.features).with_extra(&cards, extra)?;
            let labels = d.label_column(p);
            models.push(base.fit(&design, &labels, d.schema.cardinality(p) as usize)?);
        }
        Ok(TrellisModel {
            schema: d.schema.clone(),
            features: d.features.clone(),
            order: order.to_vec(),
            parents,
            models,
        })
    }

    pub fn schema(&self) -> &LabelSchema {
        &self.schema
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }

    pub fn parents(&self) -> &[Vec<usize>] {
        &self.parents
    }

    fn walk(&self, x: &[Value], mut choose: impl FnMut(usize, &crate::Distribution) -> u32) -> (Vec<u32>, f64) {
        let mut y = alloc::vec![0u32; self.schema.len()];
        let mut extra = Vec::new();
        let mut score = 0.0;
        for (s, (&p, pa)) in self.order.iter().zip(&self.parents).enumerate() {
            extra.clear();
            extra.extend(pa.iter().map(|&q| y[q]));
            let dist = self.models[s].predict_unchecked(Row::new(x, &extra));
            let k = choose(p, &dist);
            score += libm::log(dist.prob(k));
            y[p] = k;
        }
        (y, score)
    }

    /// Greedy inference in chain order.
    pub fn predict(&self, x: &[Value]) -> Result<LabelVector> {
        check_row(&self.features, Row::plain(x))?;
        Ok(LabelVector(self.walk(x, |_, d| d.argmax()).0))
    }

    /// Product of each position's conditional given its parents at `y`.
    pub fn joint_score(&self, x: &[Value], y: &[u32]) -> Result<f64> {
        check_row(&self.features, Row::plain(x))?;
        self.schema.check(y)?;
        Ok(libm::exp(self.walk(x, |p, _| y[p]).1))
    }
}
