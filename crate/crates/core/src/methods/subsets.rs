//! Disjoint labelset methods: RAkELd and SICL.

use alloc::vec;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::powerset::PowersetModel;
use crate::base::{check_row, BaseLearner, Design, Row};
use crate::error::{Error, Result};
use crate::seed;
use crate::types::{Dataset, FeatureKind, LabelSchema, LabelVector, Value};

/// Consecutive chunks of `k` (last one takes the remainder).
pub fn chunk_partition(order: &[usize], k: usize) -> Vec<Vec<usize>> {
    order.chunks(k).map(|c| c.to_vec()).collect()
}

/// RAkELd partition of `0..t` into `ceil(t / k)` sets: chunks of a seeded
/// random permutation, or of time order when `sequential`. Indices within a
/// set are sorted.
pub fn rakeld_partition(t: usize, k: usize, seed: u64, sequential: bool) -> Result<Vec<Vec<usize>>> {
    if k == 0 || k > t {
        return Err(Error::param("k", alloc::format!("labelset size {k} outside 1..={t}")));
    }
    let mut order: Vec<usize> = (0..t).collect();
    if !sequential {
        order.shuffle(&mut seed::stream(seed, &["rakeld-partition".into()]));
    }
    let mut sets = chunk_partition(&order, k);
    for s in &mut sets {
        s.sort_unstable();
    }
    Ok(sets)
}

/// SICL set sizes `alpha, 2 alpha, 3 alpha, ...`, the last truncated to what
/// remains of `t` positions.
pub fn sicl_sizes(t: usize, alpha: usize) -> Result<Vec<usize>> {
    if alpha == 0 {
        return Err(Error::param("alpha", "must be at least 1"));
    }
    let mut sizes = Vec::new();
    let mut left = t;
    let mut m = 1;
    while left > 0 {
        let size = (alpha * m).min(left);
        sizes.push(size);
        left -= size;
        m += 1;
    }
    Ok(sizes)
}

/// Time-ordered SICL partition of `0..t`.
pub fn sicl_partition(t: usize, alpha: usize) -> Result<Vec<Vec<usize>>> {
    let mut start = 0;
    Ok(sicl_sizes(t, alpha)?
        .into_iter()
        .map(|size| {
            let set = (start..start + size).collect();
            start += size;
            set
        })
        .collect())
}

/// One powerset model per labelset. When `chained`, set `m` also sees the
/// meta-labels of sets `0..m` as categorical features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetsModel {
    schema: LabelSchema,
    features: Vec<FeatureKind>,
    sets: Vec<Vec<usize>>,
    models: Vec<PowersetModel>,
    chained: bool,
}

impl SubsetsModel {
    pub fn train(d: &Dataset, base: &BaseLearner, sets: Vec<Vec<usize>>, chained: bool) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::EmptyData);
        }
        d.ensure_valid()?;
        check_partition(&sets, d.schema.len())?;
        let rows = d.instances_x();
        let mut models: Vec<PowersetModel> = Vec::with_capacity(sets.len());
        // true meta-labels of the sets trained so far, row-major
        let mut meta_cols: Vec<Vec<u32>> = Vec::new();
        for set in &sets {
            let schema = d.schema.select(set)?;
            let targets: Vec<Vec<u32>> = d
                .instances
                .iter()
                .map(|inst| set.iter().map(|&p| inst.y.0[p]).collect())
                .collect();
            let mut design = Design::from_refs(rows.clone(), &d.features);
            if chained && !meta_cols.is_empty() {
                let cards: Vec<u32> = models.iter().map(|m| m.classes().len() as u32).collect();
                let mut extra = Vec::with_capacity(cards.len() * d.len());
                for i in 0..d.len() {
                    extra.extend(meta_cols.iter().map(|col| col[i]));
                }
                design = design.with_extra(&cards, extra)?;
            }
            let (model, meta) = PowersetModel::train(&design, &targets, &schema, base, None)?;
            meta_cols.push(meta);
            models.push(model);
        }
        Ok(SubsetsModel {
            schema: d.schema.clone(),
            features: d.features.clone(),
            sets,
            models,
            chained,
        })
    }

    pub fn rakeld(d: &Dataset, base: &BaseLearner, k: usize, seed: u64, sequential: bool) -> Result<Self> {
        let sets = rakeld_partition(d.schema.len(), k, seed, sequential)?;
        Self::train(d, base, sets, false)
    }

    pub fn sicl(d: &Dataset, base: &BaseLearner, alpha: usize) -> Result<Self> {
        let sets = sicl_partition(d.schema.len(), alpha)?;
        Self::train(d, base, sets, true)
    }

    pub fn schema(&self) -> &LabelSchema {
        &self.schema
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    pub fn models(&self) -> &[PowersetModel] {
        &self.models
    }

    pub fn is_chained(&self) -> bool {
        self.chained
    }

    pub fn predict(&self, x: &[Value]) -> Result<LabelVector> {
        check_row(&self.features, Row::plain(x))?;
        let mut y = vec![0u32; self.schema.len()];
        let mut metas = Vec::with_capacity(self.sets.len());
        for (set, model) in self.sets.iter().zip(&self.models) {
            let extra: &[u32] = if self.chained { &metas } else { &[] };
            let meta = model.predict_meta(Row::new(x, extra))?;
            for (&p, &v) in set.iter().zip(model.classes()[meta as usize].values()) {
                y[p] = v;
            }
            metas.push(meta);
        }
        Ok(LabelVector(y))
    }

    /// Product of per-set meta-class probabilities of `y` (chained on the
    /// true meta-labels for SICL); zero when any sub-vector is unknown.
    pub fn joint_score(&self, x: &[Value], y: &[u32]) -> Result<f64> {
        check_row(&self.features, Row::plain(x))?;
        self.schema.check(y)?;
        let mut metas = Vec::with_capacity(self.sets.len());
        let mut score = 1.0;
        for (set, model) in self.sets.iter().zip(&self.models) {
            let sub: Vec<u32> = set.iter().map(|&p| y[p]).collect();
            let extra: &[u32] = if self.chained { &metas } else { &[] };
            let Some(k) = model.class_index(&sub) else {
                return Ok(0.0);
            };
            score *= model.score_row(Row::new(x, extra), &sub)?;
            metas.push(k);
        }
        Ok(score)
    }
}

pub fn check_partition(sets: &[Vec<usize>], t: usize) -> Result<()> {
    let mut seen = vec![false; t];
    for set in sets {
        if set.is_empty() {
            return Err(Error::param("sets", "empty labelset"));
        }
        for &p in set {
            if p >= t || seen[p] {
                return Err(Error::param(
                    "sets",
                    alloc::format!("position {p} repeated or out of range"),
                ));
            }
            seen[p] = true;
        }
    }
    if seen.iter().any(|&s| !s) {
        return Err(Error::param("sets", "labelsets do not cover every position"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rakeld_sizes() {
        let sets = rakeld_partition(6, 3, 1, false).unwrap();
        assert_eq!(sets.iter().map(Vec::len).collect::<Vec<_>>(), vec![3, 3]);
        check_partition(&sets, 6).unwrap();
        let sets = rakeld_partition(7, 3, 1, false).unwrap();
        assert_eq!(sets.iter().map(Vec::len).collect::<Vec<_>>(), vec![3, 3, 1]);
        assert_eq!(
            rakeld_partition(7, 3, 1, true).unwrap(),
            vec![vec![0, 1, 2], vec![3, 4, 5], vec![6]]
        );
        assert!(rakeld_partition(3, 0, 1, false).is_err());
        assert!(rakeld_partition(3, 4, 1, false).is_err());
    }

    #[test]
    fn sicl_set_sizes() {
        assert_eq!(sicl_sizes(10, 1).unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(sicl_sizes(10, 3).unwrap(), vec![3, 6, 1]);
        assert_eq!(sicl_sizes(5, 3).unwrap(), vec![3, 2]);
        assert_eq!(sicl_sizes(4, 9).unwrap(), vec![4]);
        assert!(sicl_sizes(4, 0).is_err());
        assert_eq!(sicl_partition(6, 1).unwrap(), vec![vec![0], vec![1, 2], vec![3, 4, 5]]);
    }

    #[test]
    fn partition_checks() {
        assert!(check_partition(&[vec![0, 1], vec![1]], 2).is_err());
        assert!(check_partition(&[vec![0]], 2).is_err());
        assert!(check_partition(&[vec![1], vec![0]], 2).is_ok());
    }
}
