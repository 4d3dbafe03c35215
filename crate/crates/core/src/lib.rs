//! Artifact detection for wearable EEG.
//!
//! The pipeline windows multi-channel recordings into 1 s blocks, extracts
//! five energies per channel (one FFT high-band energy and four Haar detail
//! energies), trains Extra-Trees forests under three labeling schemes, prunes
//! them with minimal cost-complexity pruning until they fit a byte budget and
//! stores them in a flat 9-byte-per-node layout suited to microcontrollers.

// `!(x >= 0.0)` style checks are kept so that NaN is rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod compact;
pub mod dataset;
pub mod error;
pub mod eval;
pub mod forest;
pub mod signal;

#[doc(hidden)]
pub mod cli;

pub use error::{Error, Result};

/// Labeling scheme for a window.
///
/// `Bc` yields one binary label per window, `Mc` one binary label per
/// channel and `Mmc` one artifact class (0 = background, 1..=12) per channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LabelScheme {
    Bc,
    Mc,
    Mmc,
}

impl LabelScheme {
    /// Number of classes each output distinguishes.
    pub fn n_classes(self) -> usize {
        match self {
            LabelScheme::Bc | LabelScheme::Mc => 2,
            LabelScheme::Mmc => dataset::N_LABELS,
        }
    }

    /// Number of outputs for a montage with `n_channels` channels.
    pub fn n_outputs(self, n_channels: usize) -> usize {
        match self {
            LabelScheme::Bc => 1,
            LabelScheme::Mc | LabelScheme::Mmc => n_channels,
        }
    }

    pub fn code(self) -> u8 {
        match self {
            LabelScheme::Bc => 0,
            LabelScheme::Mc => 1,
            LabelScheme::Mmc => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(LabelScheme::Bc),
            1 => Some(LabelScheme::Mc),
            2 => Some(LabelScheme::Mmc),
            _ => None,
        }
    }
}

impl std::fmt::Display for LabelScheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            LabelScheme::Bc => "bc",
            LabelScheme::Mc => "mc",
            LabelScheme::Mmc => "mmc",
        })
    }
}

impl std::str::FromStr for LabelScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bc" => Ok(LabelScheme::Bc),
            "mc" => Ok(LabelScheme::Mc),
            "mmc" => Ok(LabelScheme::Mmc),
            other => Err(Error::invalid(format!("unknown label scheme `{other}`"))),
        }
    }
}
