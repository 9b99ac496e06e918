//! Randomized two-fold cross-validation, method grids and rank tables.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::methods::{LabelOrder, MethodSpec, MultiLabelModel};
use crate::metrics::{EvalReport, Metric};
use crate::seed;
use crate::types::{Dataset, LabelVector};

/// Shuffled instance indices split into the first `ceil(n/2)` and the rest.
/// Depends only on `seed` and the dataset name, so every method sees the
/// same folds.
pub fn fold_split(n: usize, seed: u64, dataset: &str) -> [Vec<usize>; 2] {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut seed::stream(seed, &["folds".into(), dataset.into()]));
    let rest = idx.split_off(n.div_ceil(2));
    [idx, rest]
}

/// Training seed of one fold of one grid cell.
pub fn cell_seed(seed: u64, dataset: &str, method: &str, fold: usize) -> u64 {
    seed::derive(seed, &["cell".into(), dataset.into(), method.into(), fold.into()])
}

/// Label permutation used when the experiment asks for a random order.
pub fn experiment_label_order(seed: u64, dataset: &str, len: usize, order: LabelOrder) -> Vec<usize> {
    order.resolve(len, seed::derive(seed, &["label-order".into(), dataset.into()]))
}

/// Two-fold cross-validation with a caller-supplied trainer.
///
/// `train(train_set, fold_seed)` builds a model on one half; it is tested on
/// the other. With `LabelOrder::Random` the label positions are permuted
/// before training and predictions are mapped back, so the report is always
/// in the dataset's native position order. Metrics are pooled over both
/// test folds.
pub fn two_fold_cv_by<M, F>(
    d: &Dataset,
    method: &str,
    seed: u64,
    label_order: LabelOrder,
    mut train: F,
) -> Result<EvalReport>
where
    M: MultiLabelModel,
    F: FnMut(&Dataset, u64) -> Result<M>,
{
    if d.len() < 2 {
        return Err(Error::TooFewInstances(d.len()));
    }
    let order = experiment_label_order(seed, &d.name, d.schema.len(), label_order);
    let permuted = d.permute_labels(&order)?;
    let folds = fold_split(d.len(), seed, &d.name);
    let mut pairs: Vec<(&[u32], LabelVector)> = Vec::with_capacity(d.len());
    for fold in 0..2 {
        let (train_idx, test_idx) = (&folds[fold], &folds[1 - fold]);
        let model = train(&permuted.subset(train_idx), cell_seed(seed, &d.name, method, fold))?;
        for &i in test_idx {
            let yhat = model.predict(permuted.instances[i].x.values())?;
            let mut native = alloc::vec![0u32; order.len()];
            for (j, &p) in order.iter().enumerate() {
                native[p] = yhat.0[j];
            }
            pairs.push((d.instances[i].y.values(), LabelVector(native)));
        }
    }
    EvalReport::from_pairs(&pairs)
}

pub fn two_fold_cv(d: &Dataset, method: &MethodSpec, seed: u64) -> Result<EvalReport> {
    two_fold_cv_with(d, method, seed, LabelOrder::Time)
}

pub fn two_fold_cv_with(d: &Dataset, method: &MethodSpec, seed: u64, label_order: LabelOrder) -> Result<EvalReport> {
    two_fold_cv_by(d, &method.name, seed, label_order, |train, s| method.train(train, s))
}

/// One grid cell; failures carry the cell identity.
pub fn evaluate_cell(d: &Dataset, method: &MethodSpec, seed: u64, label_order: LabelOrder) -> Result<EvalReport> {
    two_fold_cv_with(d, method, seed, label_order).map_err(|e| Error::Cell {
        dataset: d.name.clone(),
        method: method.name.clone(),
        source: alloc::boxed::Box::new(e),
    })
}

/// Competition ranking: tied values share the smallest rank and the next
/// distinct value skips past the tie group. NaN ranks last.
pub fn rank_row(values: &[f64], lower_is_better: bool) -> Vec<u32> {
    let key = |v: f64| {
        let v = if lower_is_better { v } else { -v };
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    values
        .iter()
        .map(|&v| {
            let k = key(v);
            1 + values.iter().filter(|&&w| key(w) < k).count() as u32
        })
        .collect()
}

/// Reports of a full dataset-by-method grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub datasets: Vec<String>,
    pub methods: Vec<String>,
    /// `reports[d][m]`.
    pub reports: Vec<Vec<EvalReport>>,
}

impl Grid {
    /// Fills the grid cell by cell with `cell(dataset_index, method_index)`.
    pub fn fill_with<F>(datasets: Vec<String>, methods: Vec<String>, mut cell: F) -> Result<Self>
    where
        F: FnMut(usize, usize) -> Result<EvalReport>,
    {
        let reports = (0..datasets.len())
            .map(|di| (0..methods.len()).map(|mi| cell(di, mi)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Grid {
            datasets,
            methods,
            reports,
        })
    }

    pub fn table(&self, metric: Metric) -> ResultsTable {
        let values = self
            .reports
            .iter()
            .map(|row| row.iter().map(|r| r.get(metric)).collect())
            .collect();
        ResultsTable::new(
            metric.name(),
            self.datasets.clone(),
            self.methods.clone(),
            values,
            metric.lower_is_better(),
        )
    }
}

/// Sequential grid run. Every cell's randomness is keyed by its own
/// identity, so a parallel run gives identical numbers.
pub fn run_grid(datasets: &[Dataset], methods: &[MethodSpec], seed: u64, label_order: LabelOrder) -> Result<Grid> {
    Grid::fill_with(
        datasets.iter().map(|d| d.name.clone()).collect(),
        methods.iter().map(|m| m.name.clone()).collect(),
        |di, mi| evaluate_cell(&datasets[di], &methods[mi], seed, label_order),
    )
}

/// One metric over the grid with per-dataset ranks and the average rank of
/// each method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsTable {
    pub metric: String,
    pub datasets: Vec<String>,
    pub methods: Vec<String>,
    pub values: Vec<Vec<f64>>,
    pub ranks: Vec<Vec<u32>>,
    pub average_rank: Vec<f64>,
}

impl ResultsTable {
    pub fn new(
        metric: &str,
        datasets: Vec<String>,
        methods: Vec<String>,
        values: Vec<Vec<f64>>,
        lower_is_better: bool,
    ) -> Self {
        let ranks: Vec<Vec<u32>> = values.iter().map(|row| rank_row(row, lower_is_better)).collect();
        let average_rank = (0..methods.len())
            .map(|m| {
                if ranks.is_empty() {
                    return 0.0;
                }
                ranks.iter().map(|r| r[m] as f64).sum::<f64>() / ranks.len() as f64
            })
            .collect();
        ResultsTable {
            metric: metric.to_string(),
            datasets,
            methods,
            values,
            ranks,
            average_rank,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{FeatureKind, Instance, LabelSchema, Value};
    use alloc::vec;

    #[test]
    fn elec_row_ranks() {
        let row = [0.278, 0.283, 0.271, 0.272, 0.270, 0.277, 0.272, 0.272];
        assert_eq!(rank_row(&row, true), vec![7, 8, 2, 3, 1, 6, 3, 3]);
        assert_eq!(rank_row(&[0.5; 4], true), vec![1; 4]);
        assert_eq!(rank_row(&[0.1, 0.2, 0.3], true), vec![1, 2, 3]);
        assert_eq!(rank_row(&[0.1, 0.2, 0.3], false), vec![3, 2, 1]);
        assert_eq!(rank_row(&[f64::NAN, 0.2], true), vec![2, 1]);
    }

    #[test]
    fn folds_partition_instances() {
        for n in [2, 5, 10] {
            let [a, b] = fold_split(n, 3, "d");
            assert_eq!(a.len(), n.div_ceil(2));
            let mut all: Vec<usize> = a.iter().chain(&b).copied().collect();
            all.sort_unstable();
            assert_eq!(all, (0..n).collect::<Vec<_>>());
        }
        assert_eq!(fold_split(9, 3, "d"), fold_split(9, 3, "d"));
    }

    struct Constant(LabelSchema, Vec<u32>);

    impl MultiLabelModel for Constant {
        fn schema(&self) -> &LabelSchema {
            &self.0
        }

        fn predict(&self, _x: &[Value]) -> Result<LabelVector> {
            Ok(LabelVector(self.1.clone()))
        }
    }

    #[test]
    fn pooled_loss_by_hand() {
        // predicts the first training label vector; folds of two, so each test
        // instance is compared against one of the two training vectors
        let ys = [[0, 0], [0, 1], [1, 1], [1, 0]];
        let instances = ys
            .iter()
            .enumerate()
            .map(|(i, y)| Instance::new(vec![Value::Num(i as f64)], y.to_vec()))
            .collect();
        let d = Dataset::new(
            "four",
            LabelSchema::uniform(2, 2).unwrap(),
            vec![FeatureKind::Numeric],
            instances,
        );
        let r = two_fold_cv_by(&d, "first", 11, LabelOrder::Time, |train, _| {
            Ok(Constant(train.schema.clone(), train.instances[0].y.0.clone()))
        })
        .unwrap();
        let folds = fold_split(4, 11, "four");
        let mut wrong = 0;
        for f in 0..2 {
            let guess = ys[folds[f][0]];
            for &i in &folds[1 - f] {
                wrong += (0..2).filter(|&j| ys[i][j] != guess[j]).count();
            }
        }
        assert_eq!(r.hamming_loss, wrong as f64 / 8.0);
        assert_eq!(r.n, 4);
        let one = Dataset::new("one", d.schema.clone(), d.features.clone(), d.instances[..1].to_vec());
        assert_eq!(
            two_fold_cv_by(&one, "first", 1, LabelOrder::Time, |t, _| Ok(Constant(
                t.schema.clone(),
                vec![0, 0]
            )))
            .unwrap_err(),
            Error::TooFewInstances(1)
        );
    }

    #[test]
    fn average_rank_by_hand() {
        let values = [vec![0.1, 0.2, 0.3], vec![0.5, 0.4, 0.5]];
        let names = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
        let grid = Grid::fill_with(names(&["a", "b"]), names(&["x", "y", "z"]), |di, mi| {
            Ok(EvalReport {
                hamming_loss: values[di][mi],
                zero_one_loss: 0.0,
                levenshtein_norm: 0.0,
                lcs_norm: 0.0,
                per_horizon: vec![values[di][mi]],
                n: 1,
            })
        })
        .unwrap();
        let t = grid.table(Metric::HammingLoss);
        assert_eq!(t.ranks, vec![vec![1, 2, 3], vec![2, 1, 2]]);
        assert_eq!(t.average_rank, vec![1.5, 1.5, 2.5]);
        assert_eq!(grid.table(Metric::ZeroOneLoss).average_rank, vec![1.0; 3]);
    }
}
