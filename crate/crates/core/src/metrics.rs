//! Sequence losses and the per-horizon error curve.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn same_len<T>(y: &[T], yhat: &[T]) -> Result<()> {
    if y.len() != yhat.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: yhat.len(),
        });
    }
    Ok(())
}

fn mismatches<T: PartialEq>(y: &[T], yhat: &[T]) -> usize {
    y.iter().zip(yhat).filter(|(a, b)| a != b).count()
}

/// Fraction of mismatched positions. Empty vectors score 0.
pub fn hamming_loss<T: PartialEq>(y: &[T], yhat: &[T]) -> Result<f64> {
    same_len(y, yhat)?;
    if y.is_empty() {
        return Ok(0.0);
    }
    Ok(mismatches(y, yhat) as f64 / y.len() as f64)
}

/// 0 when the vectors are identical, 1 otherwise.
pub fn zero_one_loss<T: PartialEq>(y: &[T], yhat: &[T]) -> Result<f64> {
    same_len(y, yhat)?;
    Ok(if y == yhat { 0.0 } else { 1.0 })
}

/// Unit-cost edit distance (insert, delete, substitute). Two-row DP.
pub fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Levenshtein distance divided by the length of the true sequence `y`.
pub fn levenshtein_norm<T: PartialEq>(y: &[T], yhat: &[T]) -> f64 {
    if y.is_empty() {
        return if yhat.is_empty() { 0.0 } else { 1.0 };
    }
    levenshtein(y, yhat) as f64 / y.len() as f64
}

pub fn lcs_len<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y { prev[j] + 1 } else { prev[j + 1].max(cur[j]) };
        }
        core::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Edit distance with insertions and deletions only.
pub fn lcs_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    a.len() + b.len() - 2 * lcs_len(a, b)
}

/// Entry `j` is the error rate at position `j` across `pairs`.
pub fn per_horizon_error<Y: AsRef<[u32]>, P: AsRef<[u32]>>(pairs: &[(Y, P)]) -> Result<Vec<f64>> {
    let Some((first, _)) = pairs.first() else {
        return Err(Error::EmptyData);
    };
    let t = first.as_ref().len();
    let mut wrong = vec![0usize; t];
    for (y, yhat) in pairs {
        let (y, yhat) = (y.as_ref(), yhat.as_ref());
        same_len(y, yhat)?;
        same_len(first.as_ref(), y)?;
        for (j, (a, b)) in y.iter().zip(yhat).enumerate() {
            wrong[j] += usize::from(a != b);
        }
    }
    Ok(wrong.into_iter().map(|w| w as f64 / pairs.len() as f64).collect())
}

/// Mean losses over a set of predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub hamming_loss: f64,
    pub zero_one_loss: f64,
    pub levenshtein_norm: f64,
    pub lcs_norm: f64,
    pub per_horizon: Vec<f64>,
    pub n: usize,
}

impl EvalReport {
    pub fn from_pairs<Y: AsRef<[u32]>, P: AsRef<[u32]>>(pairs: &[(Y, P)]) -> Result<Self> {
        let per_horizon = per_horizon_error(pairs)?;
        let (mut hl, mut zo, mut lev, mut lcs) = (0.0, 0.0, 0.0, 0.0);
        for (y, yhat) in pairs {
            let (y, yhat) = (y.as_ref(), yhat.as_ref());
            hl += hamming_loss(y, yhat)?;
            zo += zero_one_loss(y, yhat)?;
            lev += levenshtein_norm(y, yhat);
            lcs += if y.is_empty() {
                0.0
            } else {
                lcs_distance(y, yhat) as f64 / (2 * y.len()) as f64
            };
        }
        let n = pairs.len() as f64;
        Ok(EvalReport {
            hamming_loss: hl / n,
            zero_one_loss: zo / n,
            levenshtein_norm: lev / n,
            lcs_norm: lcs / n,
            per_horizon,
            n: pairs.len(),
        })
    }

    pub fn accuracy(&self) -> f64 {
        1.0 - self.hamming_loss
    }

    pub fn exact_match(&self) -> f64 {
        1.0 - self.zero_one_loss
    }

    pub fn get(&self, metric: Metric) -> f64 {
        match metric {
            Metric::HammingLoss => self.hamming_loss,
            Metric::ZeroOneLoss => self.zero_one_loss,
            Metric::LevenshteinNorm => self.levenshtein_norm,
            Metric::LcsNorm => self.lcs_norm,
            Metric::Accuracy => self.accuracy(),
            Metric::ExactMatch => self.exact_match(),
        }
    }
}

/// A scalar summary of an [`EvalReport`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Metric {
    HammingLoss,
    ZeroOneLoss,
    LevenshteinNorm,
    LcsNorm,
    Accuracy,
    ExactMatch,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::HammingLoss,
        Metric::ZeroOneLoss,
        Metric::LevenshteinNorm,
        Metric::LcsNorm,
        Metric::Accuracy,
        Metric::ExactMatch,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Metric::HammingLoss => "hamming_loss",
            Metric::ZeroOneLoss => "zero_one_loss",
            Metric::LevenshteinNorm => "levenshtein_norm",
            Metric::LcsNorm => "lcs_norm",
            Metric::Accuracy => "accuracy",
            Metric::ExactMatch => "exact_match",
        }
    }

    pub fn lower_is_better(self) -> bool {
        !matches!(self, Metric::Accuracy | Metric::ExactMatch)
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let alias = match s {
            "hamming" => "hamming_loss",
            "zero_one" | "01" => "zero_one_loss",
            "levenshtein" => "levenshtein_norm",
            "lcs" => "lcs_norm",
            other => other,
        };
        Metric::ALL
            .into_iter()
            .find(|m| m.name() == alias)
            .ok_or_else(|| Error::param("metric", alloc::format!("unknown metric `{s}`")))
    }
}
