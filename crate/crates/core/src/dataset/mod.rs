//! Annotated corpora: ingestion, frequency groups, labeling, splits and a
//! synthetic generator.

mod groups;
mod io;
mod labels;
mod split;
mod synth;
mod table;

pub use groups::{extract_group, FrequencyGroup, KNOWN_RATES};
pub use io::{load_corpus, load_recording, write_corpus, ANNOTATION_SUFFIX};
pub use labels::{assign_labels, window_labels, LabeledWindow, WindowLabels};
pub use split::{split_patient_independent, CorpusSplit, DEFAULT_SPLIT};
pub use synth::{synth_corpus, SynthConfig};
pub use table::{build_feature_table, FeatureRow, FeatureTable, SplitFilter, SplitName, SplitPlan};

use crate::signal::Recording;
use crate::{Error, Result};

/// Label ids 0 (background) through 12.
pub const N_LABELS: usize = 13;
pub const MAX_LABEL: u8 = 12;

/// Artifact interval on one channel, in seconds from recording start.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Annotation {
    pub channel: usize,
    pub start_s: f64,
    pub stop_s: f64,
    pub label: u8,
}

impl Annotation {
    pub fn validate(&self, n_channels: usize) -> Result<()> {
        if !(self.start_s >= 0.0 && self.start_s < self.stop_s) {
            return Err(Error::invalid(format!(
                "annotation interval [{}, {}) is empty or negative",
                self.start_s, self.stop_s
            )));
        }
        if self.channel >= n_channels {
            return Err(Error::invalid(format!(
                "annotation channel {} out of range for {} channels",
                self.channel, n_channels
            )));
        }
        if self.label > MAX_LABEL {
            return Err(Error::invalid(format!("unknown label id {}", self.label)));
        }
        Ok(())
    }

    /// Length of the intersection with `[start, end)`.
    pub fn overlap(&self, start: f64, end: f64) -> f64 {
        (self.stop_s.min(end) - self.start_s.max(start)).max(0.0)
    }
}

/// Recording plus its artifact annotations. `name` is the file stem.
#[derive(Debug, Clone, PartialEq)]
pub struct AnnotatedRecording {
    pub name: String,
    pub recording: Recording,
    pub annotations: Vec<Annotation>,
}

impl AnnotatedRecording {
    pub fn new(
        name: impl Into<String>,
        recording: Recording,
        annotations: Vec<Annotation>,
    ) -> Result<Self> {
        for a in &annotations {
            a.validate(recording.n_channels())?;
        }
        Ok(Self {
            name: name.into(),
            recording,
            annotations,
        })
    }

    pub fn patient_id(&self) -> &str {
        self.recording.patient_id()
    }

    pub fn window_count(&self) -> usize {
        self.recording.len() / self.recording.fs() as usize
    }
}
