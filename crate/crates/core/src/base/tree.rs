use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};

use super::{check_labels, Design, Row};
use crate::error::{Error, Result};
use crate::types::{Distribution, FeatureKind, Value};

const MIN_GAIN: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecisionTreeConfig {
    /// Minimum instances on each side of a numeric split; nodes smaller than
    /// `2 * min_leaf` are not split.
    pub min_leaf: usize,
    pub max_depth: Option<usize>,
}

impl Default for DecisionTreeConfig {
    fn default() -> Self {
        DecisionTreeConfig {
            min_leaf: 2,
            max_depth: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Split {
    Leaf,
    /// Multiway split over the values observed at this node, sorted by value.
    Categorical {
        feature: usize,
        children: Vec<(u32, usize)>,
    },
    /// `x <= threshold` goes left.
    Numeric {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub counts: Vec<u32>,
    /// Laplace-smoothed class distribution; also used when a categorical
    /// value was never seen at this node.
    pub dist: Vec<f64>,
    pub split: Split,
}

/// Unpruned information-gain decision tree.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecisionTreeModel {
    features: Vec<FeatureKind>,
    n_classes: usize,
    nodes: Vec<Node>,
}

fn entropy(counts: &[u32]) -> f64 {
    let n: u32 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let n = n as f64;
    counts
        .iter()
        .filter(|&&k| k > 0)
        .map(|&k| {
            let p = k as f64 / n;
            -p * libm::log(p)
        })
        .sum()
}

fn laplace(counts: &[u32]) -> Vec<f64> {
    let n: u32 = counts.iter().sum();
    let denom = n as f64 + counts.len() as f64;
    counts.iter().map(|&k| (k as f64 + 1.0) / denom).collect()
}

enum Candidate {
    Categorical {
        feature: usize,
        groups: Vec<(u32, Vec<usize>)>,
    },
    Numeric {
        feature: usize,
        threshold: f64,
    },
}

struct Builder<'d, 'a> {
    design: &'d Design<'a>,
    labels: &'d [u32],
    n_classes: usize,
    cfg: DecisionTreeConfig,
}

impl Builder<'_, '_> {
    fn counts(&self, idx: &[usize]) -> Vec<u32> {
        let mut c = vec![0u32; self.n_classes];
        for &i in idx {
            c[self.labels[i] as usize] += 1;
        }
        c
    }

    fn categorical_groups(&self, idx: &[usize], feature: usize) -> Vec<(u32, Vec<usize>)> {
        let mut groups: Vec<(u32, Vec<usize>)> = Vec::new();
        let mut sorted: Vec<(u32, usize)> = idx
            .iter()
            .map(|&i| (self.design.value(i, feature).as_cat().expect("checked"), i))
            .collect();
        sorted.sort_unstable();
        for (v, i) in sorted {
            match groups.last_mut() {
                Some((gv, members)) if *gv == v => members.push(i),
                _ => groups.push((v, vec![i])),
            }
        }
        groups
    }

    fn groups_gain(&self, parent: f64, n: usize, groups: &[(u32, Vec<usize>)]) -> f64 {
        let children: f64 = groups
            .iter()
            .map(|(_, members)| members.len() as f64 / n as f64 * entropy(&self.counts(members)))
            .sum();
        parent - children
    }

    /// Best threshold and its gain; `None` when no threshold leaves
    /// `min_leaf` instances on both sides.
    fn best_threshold(&self, idx: &[usize], feature: usize, parent: f64) -> Option<(f64, f64)> {
        let mut pairs: Vec<(f64, u32)> = idx
            .iter()
            .map(|&i| (self.design.value(i, feature).as_num().expect("checked"), self.labels[i]))
            .collect();
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let n = pairs.len();
        let min_leaf = self.cfg.min_leaf.max(1);
        let mut left = vec![0u32; self.n_classes];
        let mut right = vec![0u32; self.n_classes];
        for &(_, c) in &pairs {
            right[c as usize] += 1;
        }
        let mut best: Option<(f64, f64)> = None;
        for k in 0..n - 1 {
            let c = pairs[k].1 as usize;
            left[c] += 1;
            right[c] -= 1;
            let n_left = k + 1;
            if pairs[k].0 == pairs[k + 1].0 || n_left < min_leaf || n - n_left < min_leaf {
                continue;
            }
            let gain = parent
                - (n_left as f64 / n as f64) * entropy(&left)
                - ((n - n_left) as f64 / n as f64) * entropy(&right);
            if best.is_none_or(|(_, g)| gain > g) {
                best = Some((0.5 * (pairs[k].0 + pairs[k + 1].0), gain));
            }
        }
        best
    }

    /// Highest-gain split over all usable features, ties to the lowest
    /// feature index.
    fn best_split(&self, idx: &[usize], used: &[bool], parent: f64) -> Option<(Candidate, f64)> {
        let mut best: Option<(Candidate, f64)> = None;
        for (j, kind) in self.design.features().iter().enumerate() {
            let (cand, gain) = match kind {
                FeatureKind::Categorical { .. } => {
                    if used[j] {
                        continue;
                    }
                    let groups = self.categorical_groups(idx, j);
                    if groups.len() < 2 {
                        continue;
                    }
                    let gain = self.groups_gain(parent, idx.len(), &groups);
                    (Candidate::Categorical { feature: j, groups }, gain)
                }
                FeatureKind::Numeric => match self.best_threshold(idx, j, parent) {
                    Some((threshold, gain)) => (Candidate::Numeric { feature: j, threshold }, gain),
                    None => continue,
                },
            };
            if best.as_ref().is_none_or(|(_, g)| gain > *g) {
                best = Some((cand, gain));
            }
        }
        best
    }

    fn splittable(&self, idx: &[usize], depth: usize) -> bool {
        let counts = self.counts(idx);
        let impure = counts.iter().filter(|&&k| k > 0).count() > 1;
        impure && idx.len() >= 2 * self.cfg.min_leaf.max(1) && self.cfg.max_depth.is_none_or(|d| depth < d)
    }

    /// Chooses the split for a node, or `None` for a leaf.
    ///
    /// A split needs gain >= `MIN_GAIN`. Failing that, the lowest-index unused
    /// categorical feature that partitions the node is taken when at least one
    /// of its children then has a positive-gain split (XOR-like structure).
    fn choose(&self, idx: &[usize], used: &[bool], depth: usize) -> Option<Candidate> {
        if !self.splittable(idx, depth) {
            return None;
        }
        let parent = entropy(&self.counts(idx));
        match self.best_split(idx, used, parent) {
            Some((cand, gain)) if gain >= MIN_GAIN => return Some(cand),
            _ => {}
        }
        for (j, kind) in self.design.features().iter().enumerate() {
            if used[j] || !matches!(kind, FeatureKind::Categorical { .. }) {
                continue;
            }
            let groups = self.categorical_groups(idx, j);
            if groups.len() < 2 {
                continue;
            }
            let mut child_used = used.to_vec();
            child_used[j] = true;
            let promising = groups.iter().any(|(_, members)| {
                self.splittable(members, depth + 1)
                    && self
                        .best_split(members, &child_used, entropy(&self.counts(members)))
                        .is_some_and(|(_, g)| g >= MIN_GAIN)
            });
            if promising {
                return Some(Candidate::Categorical { feature: j, groups });
            }
        }
        None
    }

    fn build(&self) -> Vec<Node> {
        let all: Vec<usize> = (0..self.labels.len()).collect();
        let mut nodes = Vec::new();
        // (node slot, members, used categorical features, depth)
        let mut stack = vec![(0usize, all, vec![false; self.design.features().len()], 0usize)];
        nodes.push(self.leaf(&stack[0].1));
        while let Some((slot, idx, used, depth)) = stack.pop() {
            let Some(cand) = self.choose(&idx, &used, depth) else {
                continue;
            };
            match cand {
                Candidate::Categorical { feature, groups } => {
                    let mut child_used = used.clone();
                    child_used[feature] = true;
                    let mut children = Vec::with_capacity(groups.len());
                    for (v, members) in groups {
                        let child = nodes.len();
                        nodes.push(self.leaf(&members));
                        children.push((v, child));
                        stack.push((child, members, child_used.clone(), depth + 1));
                    }
                    nodes[slot].split = Split::Categorical { feature, children };
                }
                Candidate::Numeric { feature, threshold } => {
                    let (l, r): (Vec<usize>, Vec<usize>) = idx
                        .iter()
                        .partition(|&&i| self.design.value(i, feature).as_num().expect("checked") <= threshold);
                    let left = nodes.len();
                    nodes.push(self.leaf(&l));
                    let right = nodes.len();
                    nodes.push(self.leaf(&r));
                    nodes[slot].split = Split::Numeric {
                        feature,
                        threshold,
                        left,
                        right,
                    };
                    stack.push((right, r, used.clone(), depth + 1));
                    stack.push((left, l, used, depth + 1));
                }
            }
        }
        nodes
    }

    fn leaf(&self, idx: &[usize]) -> Node {
        let counts = self.counts(idx);
        Node {
            dist: laplace(&counts),
            counts,
            split: Split::Leaf,
        }
    }
}

impl DecisionTreeModel {
    pub fn train(design: &Design<'_>, labels: &[u32], n_classes: usize, cfg: DecisionTreeConfig) -> Result<Self> {
        if design.is_empty() {
            return Err(Error::EmptyData);
        }
        check_labels(labels, n_classes, design.len())?;
        design.check()?;
        let builder = Builder {
            design,
            labels,
            n_classes,
            cfg,
        };
        Ok(DecisionTreeModel {
            features: design.features().to_vec(),
            n_classes,
            nodes: builder.build(),
        })
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn features(&self) -> &[FeatureKind] {
        &self.features
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    /// Index of the node where `row` stops.
    pub fn route(&self, row: Row<'_>) -> usize {
        let mut at = 0;
        loop {
            match &self.nodes[at].split {
                Split::Leaf => return at,
                Split::Categorical { feature, children } => {
                    let v = match row.get(*feature) {
                        Value::Cat(v) => v,
                        Value::Num(_) => return at,
                    };
                    match children.binary_search_by_key(&v, |&(cv, _)| cv) {
                        Ok(k) => at = children[k].1,
                        Err(_) => return at,
                    }
                }
                Split::Numeric {
                    feature,
                    threshold,
                    left,
                    right,
                } => {
                    let x = row.get(*feature).as_num().unwrap_or(f64::NAN);
                    at = if x <= *threshold { *left } else { *right };
                }
            }
        }
    }

    pub fn predict(&self, row: Row<'_>) -> Distribution {
        Distribution::new(self.nodes[self.route(row)].dist.clone()).expect("laplace leaf")
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], at: usize) -> usize {
            match &nodes[at].split {
                Split::Leaf => 0,
                Split::Categorical { children, .. } => {
                    1 + children.iter().map(|&(_, c)| walk(nodes, c)).max().unwrap_or(0)
                }
                Split::Numeric { left, right, .. } => 1 + walk(nodes, *left).max(walk(nodes, *right)),
            }
        }
        walk(&self.nodes, 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::FeatureVector;

    fn cats(vals: &[u32]) -> FeatureVector {
        FeatureVector(vals.iter().map(|&v| Value::Cat(v)).collect())
    }

    fn accuracy(m: &DecisionTreeModel, rows: &[FeatureVector], labels: &[u32]) -> f64 {
        let hits = rows
            .iter()
            .zip(labels)
            .filter(|(r, &y)| m.predict(Row::plain(r.values())).argmax() == y)
            .count();
        hits as f64 / rows.len() as f64
    }

    #[test]
    fn xor_is_learned_at_depth_two() {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for a in 0..2 {
            for b in 0..2 {
                for _ in 0..4 {
                    rows.push(cats(&[a, b]));
                    labels.push(a ^ b);
                }
            }
        }
        let kinds = [FeatureKind::Categorical { cardinality: 2 }; 2];
        let design = Design::new(&rows, &kinds);
        let b = Builder {
            design: &design,
            labels: &labels,
            n_classes: 2,
            cfg: DecisionTreeConfig::default(),
        };
        let all: Vec<usize> = (0..16).collect();
        let h = entropy(&b.counts(&all));
        for j in 0..2 {
            let g = b.groups_gain(h, 16, &b.categorical_groups(&all, j));
            assert!(g.abs() < 1e-12);
        }
        let m = DecisionTreeModel::train(&design, &labels, 2, DecisionTreeConfig::default()).unwrap();
        assert_eq!(m.depth(), 2);
        assert!(matches!(m.nodes()[0].split, Split::Categorical { feature: 0, .. }));
        assert_eq!(accuracy(&m, &rows, &labels), 1.0);
    }

    #[test]
    fn pure_data_is_one_leaf() {
        let rows = [cats(&[0]), cats(&[1]), cats(&[1])];
        let kinds = [FeatureKind::Categorical { cardinality: 2 }];
        let m = DecisionTreeModel::train(&Design::new(&rows, &kinds), &[2, 2, 2], 3, Default::default()).unwrap();
        assert_eq!(m.nodes().len(), 1);
        assert_eq!(m.predict(Row::plain(&[Value::Cat(0)])).argmax(), 2);
    }

    #[test]
    fn laplace_leaf_counts() {
        // a single leaf with counts (3, 1)
        let rows = [cats(&[0]), cats(&[0]), cats(&[0]), cats(&[0])];
        let kinds = [FeatureKind::Categorical { cardinality: 2 }];
        let m = DecisionTreeModel::train(&Design::new(&rows, &kinds), &[0, 0, 1, 0], 2, Default::default()).unwrap();
        let d = m.predict(Row::plain(&[Value::Cat(0)]));
        assert!((d.prob(0) - 2.0 / 3.0).abs() < 1e-12);
        assert!((d.prob(1) - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn numeric_threshold_separates() {
        let rows: Vec<FeatureVector> = (0..10).map(|i| FeatureVector(vec![Value::Num(i as f64)])).collect();
        let labels: Vec<u32> = (0..10).map(|i| (i >= 6) as u32).collect();
        let m = DecisionTreeModel::train(
            &Design::new(&rows, &[FeatureKind::Numeric]),
            &labels,
            2,
            Default::default(),
        )
        .unwrap();
        match m.nodes()[0].split {
            Split::Numeric { threshold, .. } => assert_eq!(threshold, 5.5),
            ref other => panic!("unexpected root {other:?}"),
        }
        assert_eq!(accuracy(&m, &rows, &labels), 1.0);
    }

    #[test]
    fn unseen_category_falls_back_to_node() {
        let rows = [cats(&[0]), cats(&[0]), cats(&[1]), cats(&[1])];
        let kinds = [FeatureKind::Categorical { cardinality: 3 }];
        let m = DecisionTreeModel::train(&Design::new(&rows, &kinds), &[0, 0, 1, 1], 2, Default::default()).unwrap();
        let d = m.predict(Row::plain(&[Value::Cat(2)]));
        assert_eq!(d.probs(), &[0.5, 0.5]);
    }

    #[test]
    fn depth_cap_respected() {
        let rows: Vec<FeatureVector> = (0..32).map(|i| FeatureVector(vec![Value::Num(i as f64)])).collect();
        let labels: Vec<u32> = (0..32).map(|i| (i / 2 % 2) as u32).collect();
        let cfg = DecisionTreeConfig {
            min_leaf: 1,
            max_depth: Some(3),
        };
        let m = DecisionTreeModel::train(&Design::new(&rows, &[FeatureKind::Numeric]), &labels, 2, cfg).unwrap();
        assert!(m.depth() <= 3);
    }
}
