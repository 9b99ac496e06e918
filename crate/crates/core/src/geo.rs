//! GPS fixes to node sequences: k-means node map and nearest-node snapping.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;
use crate::transform::Sequence;
use crate::types::{FeatureKind, FeatureVector, Value};

pub type Point = (f64, f64);

pub const MAX_ITERATIONS: usize = 100;

/// Frozen set of node centroids `(latitude, longitude)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeMap {
    centroids: Vec<Point>,
}

fn dist2(a: Point, b: Point) -> f64 {
    let (dx, dy) = (a.0 - b.0, a.1 - b.1);
    dx * dx + dy * dy
}

impl NodeMap {
    pub fn new(centroids: Vec<Point>) -> Result<Self> {
        if centroids.is_empty() {
            return Err(Error::param("centroids", "at least one centroid required"));
        }
        if let Some(i) = centroids.iter().position(|c| !c.0.is_finite() || !c.1.is_finite()) {
            return Err(Error::NonFiniteCoordinate(i));
        }
        Ok(NodeMap { centroids })
    }

    pub fn len(&self) -> usize {
        self.centroids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centroids.is_empty()
    }

    pub fn centroids(&self) -> &[Point] {
        &self.centroids
    }

    /// Index of the nearest centroid (Euclidean), lowest index on ties.
    pub fn nearest(&self, p: Point) -> usize {
        nearest(&self.centroids, p).0
    }
}

fn nearest(centroids: &[Point], p: Point) -> (usize, f64) {
    let mut best = (0, dist2(centroids[0], p));
    for (i, &c) in centroids.iter().enumerate().skip(1) {
        let d = dist2(c, p);
        if d < best.1 {
            best = (i, d);
        }
    }
    best
}

/// Result of [`kmeans_fit`] with its run trace.
#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub map: NodeMap,
    pub assignments: Vec<usize>,
    /// Inertia after each assignment step.
    pub inertia: Vec<f64>,
    pub iterations: usize,
}

fn count_distinct(points: &[Point]) -> usize {
    let mut keys: Vec<(u64, u64)> = points
        .iter()
        .map(|p| ((p.0 + 0.0).to_bits(), (p.1 + 0.0).to_bits()))
        .collect();
    keys.sort_unstable();
    keys.dedup();
    keys.len()
}

fn inertia(points: &[Point], centroids: &[Point], assignments: &[usize]) -> f64 {
    points
        .iter()
        .zip(assignments)
        .map(|(&p, &a)| dist2(p, centroids[a]))
        .sum()
}

/// k-means++ seeding followed by Lloyd iterations until no assignment
/// changes (at most [`MAX_ITERATIONS`]). Deterministic under `seed`.
pub fn kmeans_fit(points: &[Point], k: usize, seed: u64) -> Result<KMeansFit> {
    if k == 0 {
        return Err(Error::param("k", "at least one cluster required"));
    }
    if let Some(i) = points.iter().position(|p| !p.0.is_finite() || !p.1.is_finite()) {
        return Err(Error::NonFiniteCoordinate(i));
    }
    let distinct = count_distinct(points);
    if distinct < k {
        return Err(Error::TooFewPoints { distinct, k });
    }
    let mut rng = seed::stream(seed, &["kmeans++".into()]);

    // k-means++ seeding
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.gen_range(0..points.len())]);
    let mut d2: Vec<f64> = points.iter().map(|&p| dist2(p, centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = d2.iter().sum();
        let mut target = rng.gen::<f64>() * total;
        let mut pick = None;
        for (i, &w) in d2.iter().enumerate() {
            if w <= 0.0 {
                continue;
            }
            if target < w {
                pick = Some(i);
                break;
            }
            target -= w;
        }
        let pick = pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).expect("distinct >= k"));
        let c = points[pick];
        centroids.push(c);
        for (w, &p) in d2.iter_mut().zip(points) {
            *w = w.min(dist2(p, c));
        }
    }

    let mut assignments: Vec<usize> = points.iter().map(|&p| nearest(&centroids, p).0).collect();
    repair_empty(points, &mut centroids, &mut assignments);
    let mut trace = vec![inertia(points, &centroids, &assignments)];
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        update_centroids(points, &mut centroids, &assignments);
        let next: Vec<usize> = points.iter().map(|&p| nearest(&centroids, p).0).collect();
        let changed = next != assignments;
        assignments = next;
        repair_empty(points, &mut centroids, &mut assignments);
        trace.push(inertia(points, &centroids, &assignments));
        if !changed {
            break;
        }
    }
    Ok(KMeansFit {
        map: NodeMap { centroids },
        assignments,
        inertia: trace,
        iterations,
    })
}

fn update_centroids(points: &[Point], centroids: &mut [Point], assignments: &[usize]) {
    let k = centroids.len();
    let mut sums = vec![(0.0, 0.0); k];
    let mut counts = vec![0usize; k];
    for (&p, &a) in points.iter().zip(assignments) {
        sums[a].0 += p.0;
        sums[a].1 += p.1;
        counts[a] += 1;
    }
    for ((c, s), &n) in centroids.iter_mut().zip(&sums).zip(&counts) {
        if n > 0 {
            *c = (s.0 / n as f64, s.1 / n as f64);
        }
    }
}

/// Gives each empty cluster the point farthest from its current centroid
/// (taken from a cluster with more than one member).
fn repair_empty(points: &[Point], centroids: &mut [Point], assignments: &mut [usize]) {
    let k = centroids.len();
    loop {
        let mut counts = vec![0usize; k];
        for &a in assignments.iter() {
            counts[a] += 1;
        }
        let Some(empty) = counts.iter().position(|&n| n == 0) else {
            return;
        };
        let mut best: Option<(usize, f64)> = None;
        for (i, (&p, &a)) in points.iter().zip(assignments.iter()).enumerate() {
            if counts[a] < 2 {
                continue;
            }
            let d = dist2(p, centroids[a]);
            if best.is_none_or(|(_, bd)| d > bd) {
                best = Some((i, d));
            }
        }
        let Some((i, _)) = best else { return };
        assignments[i] = empty;
        centroids[empty] = points[i];
    }
}

/// One raw, minute-averaged GPS fix with its calendar context.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawFix {
    pub lat: f64,
    pub lon: f64,
    /// Day of week, 1..=7.
    pub day: u8,
    /// Hour of day, 0.00..=23.98.
    pub hour: f64,
}

/// Emission layout produced by [`snap_sequence`]: latitude, longitude,
/// day-of-week (code `day - 1`), hour of day.
pub fn snapped_features() -> Vec<FeatureKind> {
    vec![
        FeatureKind::Numeric,
        FeatureKind::Numeric,
        FeatureKind::Categorical { cardinality: 7 },
        FeatureKind::Numeric,
    ]
}

/// Snaps every fix to its nearest node.
pub fn snap_sequence(id: impl Into<String>, raw: &[RawFix], map: &NodeMap) -> Result<Sequence> {
    let mut emissions = Vec::with_capacity(raw.len());
    let mut states = Vec::with_capacity(raw.len());
    for (i, fix) in raw.iter().enumerate() {
        if !fix.lat.is_finite() || !fix.lon.is_finite() || !fix.hour.is_finite() {
            return Err(Error::NonFiniteCoordinate(i));
        }
        if !(1..=7).contains(&fix.day) {
            return Err(Error::param(
                "day",
                alloc::format!("day {} at fix {i} outside 1..=7", fix.day),
            ));
        }
        states.push(map.nearest((fix.lat, fix.lon)) as u32);
        emissions.push(FeatureVector(vec![
            Value::Num(fix.lat),
            Value::Num(fix.lon),
            Value::Cat(fix.day as u32 - 1),
            Value::Num(fix.hour),
        ]));
    }
    Ok(Sequence::new(id, emissions, states))
}
