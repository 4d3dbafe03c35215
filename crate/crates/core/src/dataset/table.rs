//! Per-window feature table, the hand-off between `features` and the
//! training/evaluation commands.
//!
//! Columns: `patient,recording,start_s,split`, then `c{i}_fft_hi`,
//! `c{i}_d1`..`c{i}_d4` per channel, then `bc`, `mc{i}` and `mmc{i}`.

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::split::patient_assignment;
use super::{window_labels, AnnotatedRecording, WindowLabels};
use crate::forest::LabeledSet;
use crate::signal::{split_windows, FeatureExtractor, FEATURES_PER_CHANNEL};
use crate::{Error, LabelScheme, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitName {
    Train,
    Val,
    Test,
}

impl SplitName {
    pub fn as_str(self) -> &'static str {
        match self {
            SplitName::Train => "train",
            SplitName::Val => "val",
            SplitName::Test => "test",
        }
    }
}

impl std::str::FromStr for SplitName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "train" => Ok(SplitName::Train),
            "val" => Ok(SplitName::Val),
            "test" => Ok(SplitName::Test),
            other => Err(Error::invalid(format!("unknown split `{other}`"))),
        }
    }
}

/// Which rows of a feature table to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitFilter {
    All,
    Train,
    Val,
    Test,
}

impl SplitFilter {
    pub fn accepts(self, split: SplitName) -> bool {
        matches!(
            (self, split),
            (SplitFilter::All, _)
                | (SplitFilter::Train, SplitName::Train)
                | (SplitFilter::Val, SplitName::Val)
                | (SplitFilter::Test, SplitName::Test)
        )
    }
}

impl std::str::FromStr for SplitFilter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(SplitFilter::All),
            "train" => Ok(SplitFilter::Train),
            "val" => Ok(SplitFilter::Val),
            "test" => Ok(SplitFilter::Test),
            other => Err(Error::invalid(format!("unknown split `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureRow {
    pub patient: String,
    pub recording: String,
    pub start_s: f64,
    pub split: SplitName,
    pub features: Vec<f64>,
    pub labels: WindowLabels,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureTable {
    pub n_channels: usize,
    pub rows: Vec<FeatureRow>,
}

/// How rows are assigned to splits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitPlan {
    /// Every row is a training row.
    AllTrain,
    PatientIndependent { ratios: [f64; 3], seed: u64 },
}

/// Windows, featurizes and labels every recording. Row order follows the
/// corpus order, then window order.
pub fn build_feature_table(corpus: &[AnnotatedRecording], plan: SplitPlan) -> Result<FeatureTable> {
    if corpus.is_empty() {
        return Ok(FeatureTable::default());
    }
    let n_channels = corpus[0].recording.n_channels();
    if let Some(r) = corpus.iter().find(|r| r.recording.n_channels() != n_channels) {
        return Err(Error::invalid(format!(
            "recording `{}` has {} channels, expected {n_channels}",
            r.name,
            r.recording.n_channels()
        )));
    }
    let assignment = match plan {
        SplitPlan::AllTrain => None,
        SplitPlan::PatientIndependent { ratios, seed } => Some(patient_assignment(corpus, ratios, seed)?),
    };
    let per_recording = corpus
        .par_iter()
        .map(|rec| -> Result<Vec<FeatureRow>> {
            let extractor = FeatureExtractor::new(rec.recording.fs())?;
            let split = match &assignment {
                None => SplitName::Train,
                Some(a) => [SplitName::Train, SplitName::Val, SplitName::Test][a[rec.patient_id()]],
            };
            split_windows(&rec.recording)
                .iter()
                .map(|w| {
                    Ok(FeatureRow {
                        patient: rec.patient_id().to_string(),
                        recording: rec.name.clone(),
                        start_s: w.start_time,
                        split,
                        features: extractor.extract(w)?.0,
                        labels: window_labels(&rec.annotations, n_channels, w.start_time, w.end_time()),
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FeatureTable {
        n_channels,
        rows: per_recording.into_iter().flatten().collect(),
    })
}

impl FeatureTable {
    pub fn header(n_channels: usize) -> Vec<String> {
        let mut h: Vec<String> = ["patient", "recording", "start_s", "split"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        for c in 0..n_channels {
            h.push(format!("c{c}_fft_hi"));
            for d in 1..=4 {
                h.push(format!("c{c}_d{d}"));
            }
        }
        if n_channels > 0 {
            h.push("bc".into());
            h.extend((0..n_channels).map(|c| format!("mc{c}")));
            h.extend((0..n_channels).map(|c| format!("mmc{c}")));
        }
        h
    }

    pub fn to_csv(&self) -> String {
        let mut s = Self::header(self.n_channels).join(",");
        s.push('\n');
        for r in &self.rows {
            let _ = write!(s, "{},{},{},{}", r.patient, r.recording, r.start_s, r.split.as_str());
            for v in &r.features {
                let _ = write!(s, ",{v}");
            }
            let _ = write!(s, ",{}", r.labels.bc);
            for v in r.labels.mc.iter().chain(&r.labels.mmc) {
                let _ = write!(s, ",{v}");
            }
            s.push('\n');
        }
        s
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new().from_reader(text.as_bytes());
        let header = reader.headers().map_err(|e| Error::format(path, 1, e.to_string()))?;
        let n_channels = header.iter().filter(|h| h.ends_with("_fft_hi")).count();
        let expected = Self::header(n_channels);
        if header.iter().ne(expected.iter().map(String::as_str)) {
            return Err(Error::format(path, 1, "unexpected feature table header"));
        }
        let n_feat = n_channels * FEATURES_PER_CHANNEL;
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| {
                Error::format(path, e.position().map_or(0, |p| p.line()), e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            let bad = |what: &str| Error::format(path, line, format!("bad {what}"));
            let num = |i: usize, what: &str| -> Result<f64> {
                record.get(i).and_then(|v| v.parse().ok()).ok_or_else(|| bad(what))
            };
            let label = |i: usize| -> Result<u8> {
                record.get(i).and_then(|v| v.parse().ok()).ok_or_else(|| bad("label"))
            };
            let features = (0..n_feat).map(|i| num(4 + i, "feature")).collect::<Result<Vec<_>>>()?;
            let base = 4 + n_feat;
            rows.push(FeatureRow {
                patient: record[0].to_string(),
                recording: record[1].to_string(),
                start_s: num(2, "start_s")?,
                split: record[3].parse().map_err(|_| bad("split"))?,
                features,
                labels: WindowLabels {
                    bc: label(base)?,
                    mc: (0..n_channels).map(|c| label(base + 1 + c)).collect::<Result<_>>()?,
                    mmc: (0..n_channels)
                        .map(|c| label(base + 1 + n_channels + c))
                        .collect::<Result<_>>()?,
                },
            });
        }
        Ok(Self { n_channels, rows })
    }

    /// Rows accepted by `filter`, with labels for `scheme`.
    pub fn labeled_set(&self, scheme: LabelScheme, filter: SplitFilter) -> Result<LabeledSet> {
        let (features, labels): (Vec<_>, Vec<_>) = self
            .rows
            .iter()
            .filter(|r| filter.accepts(r.split))
            .map(|r| {
                let labels = r.labels.for_scheme(scheme).into_iter().map(u16::from).collect();
                (r.features.clone(), labels)
            })
            .unzip();
        LabeledSet::new(scheme, features, labels)
    }
}
