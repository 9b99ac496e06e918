//! File formats, the synthetic traveller generator and the experiment runner
//! for [`mlseq_core`].

pub mod arff;
pub mod csvio;
pub mod error;
pub mod experiment;
pub mod model_io;
pub mod synth;

pub use error::{IoError, IoResult};
pub use mlseq_core;

use mlseq_core::transform::Sequence;
use mlseq_core::FeatureKind;

/// Raw sequences with their emission layout and state alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceData {
    pub feature_names: Vec<String>,
    pub features: Vec<FeatureKind>,
    /// Symbol of each state code; its length is the state cardinality.
    pub state_names: Vec<String>,
    pub sequences: Vec<Sequence>,
}

impl SequenceData {
    pub fn n_states(&self) -> u32 {
        self.state_names.len() as u32
    }

    pub fn total_len(&self) -> usize {
        self.sequences.iter().map(Sequence::len).sum()
    }
}
