//! Exact MAP decoding of first-order chains.
//!
//! A first-order chain scores a path `y` as
//! `f_1(y_1 | x) * prod_{t >= 2} f_t(y_t | x, y_{t-1})`. Scores are kept in
//! log space; all decoders here add log terms in step order, so the score
//! of a given path is bit-identical whichever decoder produced it.

use alloc::vec;
use alloc::vec::Vec;

use crate::types::{argmax, Distribution};

/// Conditional distributions of a first-order chain for one input.
pub trait FirstOrderChain {
    fn n_steps(&self) -> usize;
    fn first(&self) -> Distribution;
    /// `f_step(. | x, y_{step-1} = prev)`, for `step >= 1`.
    fn transition(&self, step: usize, prev: u32) -> Distribution;

    /// `transition(step, prev)` for every `prev` in `0..n_prev`.
    fn transitions(&self, step: usize, n_prev: usize) -> Vec<Distribution> {
        (0..n_prev as u32).map(|prev| self.transition(step, prev)).collect()
    }
}

/// Trellis of best-path log scores (`log_delta`) and back-pointers (`psi`).
#[derive(Debug, Clone, PartialEq)]
pub struct ViterbiTable {
    pub log_delta: Vec<Vec<f64>>,
    pub psi: Vec<Vec<u32>>,
}

impl ViterbiTable {
    /// Fills the trellis. Costs `sum_t L_{t-1}` transition evaluations.
    pub fn build(chain: &impl FirstOrderChain) -> Self {
        let steps = chain.n_steps();
        let first = chain.first();
        let mut log_delta = vec![first.probs().iter().map(|&p| libm::log(p)).collect::<Vec<_>>()];
        let mut psi = vec![vec![0u32; first.len()]];
        for step in 1..steps {
            let prev_delta = &log_delta[step - 1];
            let table = chain.transitions(step, prev_delta.len());
            let width = table.first().map_or(0, Distribution::len);
            let mut delta = vec![f64::NEG_INFINITY; width];
            let mut back = vec![0u32; width];
            for (i, (&d_prev, f)) in prev_delta.iter().zip(&table).enumerate() {
                for (k, &p) in f.probs().iter().enumerate() {
                    let cand = d_prev + libm::log(p);
                    // strict: earlier predecessor wins ties
                    if cand > delta[k] {
                        delta[k] = cand;
                        back[k] = i as u32;
                    }
                }
            }
            log_delta.push(delta);
            psi.push(back);
        }
        ViterbiTable { log_delta, psi }
    }

    pub fn delta(&self, step: usize, state: usize) -> f64 {
        libm::exp(self.log_delta[step][state])
    }

    /// Best final state (lowest index on ties) followed back through `psi`.
    pub fn best_path(&self) -> (Vec<u32>, f64) {
        let steps = self.log_delta.len();
        let mut path = vec![0u32; steps];
        let last = argmax(&self.log_delta[steps - 1]);
        path[steps - 1] = last as u32;
        for step in (1..steps).rev() {
            path[step - 1] = self.psi[step][path[step] as usize];
        }
        (path, self.log_delta[steps - 1][last])
    }
}

/// Viterbi decode: the MAP path and its log score.
pub fn viterbi_decode(chain: &impl FirstOrderChain) -> (Vec<u32>, f64) {
    ViterbiTable::build(chain).best_path()
}

/// Greedy forward decode (MEMM-style): locally best label at every step.
pub fn greedy_decode(chain: &impl FirstOrderChain) -> (Vec<u32>, f64) {
    let mut path = Vec::with_capacity(chain.n_steps());
    let mut score = 0.0;
    for step in 0..chain.n_steps() {
        let f = if step == 0 {
            chain.first()
        } else {
            chain.transition(step, path[step - 1])
        };
        let k = f.argmax();
        score += libm::log(f.prob(k));
        path.push(k);
    }
    (path, score)
}

/// Log score of a given path.
pub fn path_log_score(chain: &impl FirstOrderChain, path: &[u32]) -> f64 {
    let mut score = 0.0;
    for (step, &k) in path.iter().enumerate() {
        let f = if step == 0 {
            chain.first()
        } else {
            chain.transition(step, path[step - 1])
        };
        score += libm::log(f.prob(k));
    }
    score
}

/// Explicit conditional tables; `transitions[t - 1][prev]` is the
/// distribution of step `t` given the previous label.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalTables {
    pub first: Distribution,
    pub transitions: Vec<Vec<Distribution>>,
}

impl FirstOrderChain for ConditionalTables {
    fn n_steps(&self) -> usize {
        self.transitions.len() + 1
    }

    fn first(&self) -> Distribution {
        self.first.clone()
    }

    fn transition(&self, step: usize, prev: u32) -> Distribution {
        self.transitions[step - 1][prev as usize].clone()
    }
}
