//! Synthetic traveller: a walker on a random geometric graph in the unit
//! square, commuting between home and work on weekdays, sampled once per
//! minute.

use std::collections::VecDeque;

use mlseq_core::geo::{snapped_features, RawFix};
use mlseq_core::seed;
use mlseq_core::transform::Sequence;
use mlseq_core::{FeatureVector, Value};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{IoError, IoResult};
use crate::SequenceData;

const MINUTES_PER_DAY: usize = 1440;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthTravellerConfig {
    pub n_nodes: usize,
    pub n_steps: usize,
    pub seed: u64,
    /// Each node links to this many nearest neighbours (links are symmetric).
    pub degree: usize,
    /// Probability of staying put for a minute.
    pub stay_prob: f64,
    /// Probability that a move heads towards the scheduled destination
    /// rather than to a random neighbour.
    pub commute_strength: f64,
    /// Standard deviation of the GPS noise added to node coordinates.
    pub noise: f64,
    /// Day of week of the first step, 1..=7.
    pub start_day: u8,
}

impl Default for SynthTravellerConfig {
    fn default() -> Self {
        SynthTravellerConfig {
            n_nodes: 100,
            n_steps: 10_000,
            seed: 0,
            degree: 4,
            stay_prob: 0.1,
            commute_strength: 0.9,
            noise: 0.01,
            start_day: 1,
        }
    }
}

impl SynthTravellerConfig {
    pub fn validate(&self) -> IoResult<()> {
        let bad = |m: &str| Err(IoError::Format(format!("synthetic traveller config: {m}")));
        if self.n_nodes < 2 {
            return bad("n_nodes must be at least 2");
        }
        if self.n_steps < 1 {
            return bad("n_steps must be at least 1");
        }
        if self.degree < 1 {
            return bad("degree must be at least 1");
        }
        for (name, p) in [
            ("stay_prob", self.stay_prob),
            ("commute_strength", self.commute_strength),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(&format!("{name} must lie in [0, 1]"));
            }
        }
        if !(self.noise >= 0.0 && self.noise.is_finite()) {
            return bad("noise must be finite and non-negative");
        }
        if !(1..=7).contains(&self.start_day) {
            return bad("start_day must lie in 1..=7");
        }
        Ok(())
    }

    /// Applies `key = value` overrides.
    pub fn set(&mut self, key: &str, value: &str) -> IoResult<()> {
        let bad = || IoError::Format(format!("bad value `{value}` for `{key}`"));
        match key {
            "n_nodes" => self.n_nodes = value.parse().map_err(|_| bad())?,
            "n_steps" => self.n_steps = value.parse().map_err(|_| bad())?,
            "seed" => self.seed = value.parse().map_err(|_| bad())?,
            "degree" => self.degree = value.parse().map_err(|_| bad())?,
            "stay_prob" => self.stay_prob = value.parse().map_err(|_| bad())?,
            "commute_strength" => self.commute_strength = value.parse().map_err(|_| bad())?,
            "noise" => self.noise = value.parse().map_err(|_| bad())?,
            "start_day" => self.start_day = value.parse().map_err(|_| bad())?,
            _ => return Err(IoError::Format(format!("unknown synthetic traveller key `{key}`"))),
        }
        Ok(())
    }
}

/// A generated trace with the ground truth behind it.
#[derive(Debug, Clone, PartialEq)]
pub struct SynthTraveller {
    /// Node positions as (latitude, longitude) in the unit square.
    pub nodes: Vec<(f64, f64)>,
    pub adjacency: Vec<Vec<usize>>,
    pub home: usize,
    pub work: usize,
    pub leisure: usize,
    pub fixes: Vec<RawFix>,
    pub states: Vec<u32>,
}

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)
}

fn build_graph(nodes: &[(f64, f64)], degree: usize) -> Vec<Vec<usize>> {
    let n = nodes.len();
    let mut adj = vec![Vec::new(); n];
    let link = |adj: &mut Vec<Vec<usize>>, a: usize, b: usize| {
        if !adj[a].contains(&b) {
            adj[a].push(b);
            adj[b].push(a);
        }
    };
    for i in 0..n {
        let mut others: Vec<usize> = (0..n).filter(|&j| j != i).collect();
        others.sort_by(|&a, &b| {
            dist2(nodes[i], nodes[a])
                .total_cmp(&dist2(nodes[i], nodes[b]))
                .then(a.cmp(&b))
        });
        for &j in others.iter().take(degree) {
            link(&mut adj, i, j);
        }
    }
    // join components to the one holding node 0 by their closest pair
    loop {
        let reach = bfs(&adj, 0);
        let (inside, outside): (Vec<usize>, Vec<usize>) = (0..n).partition(|&i| reach[i].is_some());
        if outside.is_empty() {
            break;
        }
        let mut best = (f64::INFINITY, 0, 0);
        for &a in &inside {
            for &b in &outside {
                let d = dist2(nodes[a], nodes[b]);
                if d < best.0 {
                    best = (d, a, b);
                }
            }
        }
        link(&mut adj, best.1, best.2);
    }
    for a in &mut adj {
        a.sort_unstable();
    }
    adj
}

/// Hop distance from `from` to every node.
fn bfs(adj: &[Vec<usize>], from: usize) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[from] = Some(0);
    let mut queue = VecDeque::from([from]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].expect("queued nodes are reached");
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Destination at a given day (1..=7) and minute of day.
fn destination(day: u8, minute: usize, home: usize, work: usize, leisure: usize) -> usize {
    let hour = minute / 60;
    match (day <= 5, hour) {
        (true, 8..=16) => work,
        (true, 17..=18) | (false, 11..=15) => leisure,
        _ => home,
    }
}

pub fn generate(cfg: &SynthTravellerConfig) -> IoResult<SynthTraveller> {
    cfg.validate()?;
    let mut rng = seed::stream(cfg.seed, &["synth-traveller".into(), "layout".into()]);
    let nodes: Vec<(f64, f64)> = (0..cfg.n_nodes).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect();
    let adjacency = build_graph(&nodes, cfg.degree.min(cfg.n_nodes - 1));
    let mut ids: Vec<usize> = (0..cfg.n_nodes).collect();
    ids.shuffle(&mut rng);
    let home = ids[0];
    let work = ids[1];
    let leisure = ids[2 % cfg.n_nodes];
    let towards: Vec<Vec<Option<usize>>> = [home, work, leisure].iter().map(|&t| bfs(&adjacency, t)).collect();
    let slot = |t: usize| {
        [home, work, leisure]
            .iter()
            .position(|&x| x == t)
            .expect("scheduled node")
    };

    let mut rng = seed::stream(cfg.seed, &["synth-traveller".into(), "walk".into()]);
    let normal = Normal::new(0.0, cfg.noise).map_err(|e| IoError::Format(e.to_string()))?;
    let mut at = home;
    let mut fixes = Vec::with_capacity(cfg.n_steps);
    let mut states = Vec::with_capacity(cfg.n_steps);
    for step in 0..cfg.n_steps {
        let day = ((cfg.start_day as usize - 1 + step / MINUTES_PER_DAY) % 7 + 1) as u8;
        let minute = step % MINUTES_PER_DAY;
        if step > 0 && rng.gen::<f64>() >= cfg.stay_prob {
            let target = destination(day, minute, home, work, leisure);
            let hops = &towards[slot(target)];
            at = if rng.gen::<f64>() < cfg.commute_strength {
                if at == target {
                    at
                } else {
                    // lowest-index neighbour one hop closer
                    let d = hops[at].expect("graph is connected");
                    *adjacency[at]
                        .iter()
                        .find(|&&v| hops[v] == Some(d - 1))
                        .expect("shortest path")
                }
            } else {
                *adjacency[at].choose(&mut rng).expect("no isolated nodes")
            };
        }
        let (lat, lon) = nodes[at];
        fixes.push(RawFix {
            lat: lat + normal.sample(&mut rng),
            lon: lon + normal.sample(&mut rng),
            day,
            hour: (minute as f64 / 60.0 * 100.0).floor() / 100.0,
        });
        states.push(at as u32);
    }
    Ok(SynthTraveller {
        nodes,
        adjacency,
        home,
        work,
        leisure,
        fixes,
        states,
    })
}

impl SynthTraveller {
    /// Fixes as emissions (latitude, longitude, day code `day - 1`, hour),
    /// true nodes as states.
    pub fn to_sequences(&self, id: &str) -> SequenceData {
        let emissions = self
            .fixes
            .iter()
            .map(|f| {
                FeatureVector(vec![
                    Value::Num(f.lat),
                    Value::Num(f.lon),
                    Value::Cat(f.day as u32 - 1),
                    Value::Num(f.hour),
                ])
            })
            .collect();
        SequenceData {
            feature_names: ["lat", "lon", "day", "hour"].map(String::from).to_vec(),
            features: snapped_features(),
            state_names: (0..self.nodes.len()).map(|i| i.to_string()).collect(),
            sequences: vec![Sequence::new(id, emissions, self.states.clone())],
        }
    }
}

pub fn synth_traveller(cfg: &SynthTravellerConfig) -> IoResult<SequenceData> {
    Ok(generate(cfg)?.to_sequences(&format!("traveller-{}", cfg.seed)))
}
