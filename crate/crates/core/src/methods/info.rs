use alloc::collections::BTreeMap;

use crate::error::{Error, Result};

/// Plug-in mutual information estimate between two discrete columns, in nats.
pub fn mutual_information(a: &[u32], b: &[u32]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::EmptyData);
    }
    let n = a.len() as f64;
    let mut joint: BTreeMap<(u32, u32), usize> = BTreeMap::new();
    let mut pa: BTreeMap<u32, usize> = BTreeMap::new();
    let mut pb: BTreeMap<u32, usize> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b) {
        *joint.entry((x, y)).or_default() += 1;
        *pa.entry(x).or_default() += 1;
        *pb.entry(y).or_default() += 1;
    }
    let mi = joint
        .iter()
        .map(|(&(x, y), &k)| {
            let pxy = k as f64 / n;
            let px = pa[&x] as f64 / n;
            let py = pb[&y] as f64 / n;
            pxy * libm::log(pxy / (px * py))
        })
        .sum::<f64>();
    Ok(mi)
}

/// Plug-in entropy of a discrete column, in nats.
pub fn entropy(a: &[u32]) -> f64 {
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &x in a {
        *counts.entry(x).or_default() += 1;
    }
    let n = a.len() as f64;
    counts
        .values()
        .map(|&k| {
            let p = k as f64 / n;
            -p * libm::log(p)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec::Vec;

    #[test]
    fn identical_balanced_columns_give_ln2() {
        let a = [0, 1, 0, 1, 1, 0];
        assert!((mutual_information(&a, &a).unwrap() - core::f64::consts::LN_2).abs() < 1e-9);
    }

    #[test]
    fn constant_column_gives_zero() {
        assert_eq!(mutual_information(&[3, 3, 3, 3], &[0, 1, 2, 0]).unwrap(), 0.0);
    }

    #[test]
    fn product_table_gives_zero() {
        let mut a = Vec::new();
        let mut b = Vec::new();
        for x in 0..4 {
            for y in 0..4 {
                a.push(x);
                b.push(y);
            }
        }
        assert!(mutual_information(&a, &b).unwrap().abs() < 1e-9);
    }

    #[test]
    fn length_mismatch_rejected() {
        assert!(mutual_information(&[0, 1], &[0]).is_err());
    }
}
