use std::str::FromStr;

use super::AnnotatedRecording;
use crate::signal::{decimate, linear_resample};
use crate::{Error, Result};

/// Native sampling rates present in the corpus.
pub const KNOWN_RATES: [u32; 5] = [250, 256, 400, 512, 1000];

/// Sub-corpus selected by native sampling rate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrequencyGroup {
    /// 250 Hz only.
    A,
    /// 250 Hz plus 1000 Hz decimated by 4.
    B,
    /// 256 Hz only.
    C,
    /// 256 Hz plus 512 Hz decimated by 2.
    D,
    /// Everything, linearly resampled to 250 Hz.
    E,
}

impl FrequencyGroup {
    pub fn target_rate(self) -> u32 {
        match self {
            FrequencyGroup::A | FrequencyGroup::B | FrequencyGroup::E => 250,
            FrequencyGroup::C | FrequencyGroup::D => 256,
        }
    }
}

impl FromStr for FrequencyGroup {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "a" => Ok(FrequencyGroup::A),
            "b" => Ok(FrequencyGroup::B),
            "c" => Ok(FrequencyGroup::C),
            "d" => Ok(FrequencyGroup::D),
            "e" => Ok(FrequencyGroup::E),
            other => Err(Error::invalid(format!("unknown frequency group `{other}`"))),
        }
    }
}

impl std::fmt::Display for FrequencyGroup {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            FrequencyGroup::A => "a",
            FrequencyGroup::B => "b",
            FrequencyGroup::C => "c",
            FrequencyGroup::D => "d",
            FrequencyGroup::E => "e",
        };
        f.write_str(s)
    }
}

/// Filters and converts a corpus to the group's uniform rate. Annotations are
/// in seconds and carried over untouched.
pub fn extract_group(
    corpus: &[AnnotatedRecording],
    group: FrequencyGroup,
) -> Result<Vec<AnnotatedRecording>> {
    let mut out = Vec::new();
    for rec in corpus {
        let fs = rec.recording.fs();
        if !KNOWN_RATES.contains(&fs) {
            return Err(Error::invalid(format!(
                "recording `{}` has unsupported sampling rate {fs} Hz",
                rec.name
            )));
        }
        let converted = match (group, fs) {
            (FrequencyGroup::A, 250) | (FrequencyGroup::B, 250) => Some(rec.recording.clone()),
            (FrequencyGroup::B, 1000) => {
                Some(rec.recording.map_channels(250, |c| decimate(c, 4))?)
            }
            (FrequencyGroup::C, 256) | (FrequencyGroup::D, 256) => Some(rec.recording.clone()),
            (FrequencyGroup::D, 512) => {
                Some(rec.recording.map_channels(256, |c| decimate(c, 2))?)
            }
            (FrequencyGroup::E, _) => {
                Some(rec.recording.map_channels(250, |c| linear_resample(c, fs, 250))?)
            }
            _ => None,
        };
        if let Some(recording) = converted {
            out.push(AnnotatedRecording {
                name: rec.name.clone(),
                recording,
                annotations: rec.annotations.clone(),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::Recording;

    fn rec(fs: u32, len: usize) -> AnnotatedRecording {
        let r = Recording::new(
            vec![(0..len).map(|i| i as f64).collect()],
            fs,
            vec!["c".into()],
            "p",
        )
        .unwrap();
        AnnotatedRecording::new(format!("r{fs}"), r, vec![]).unwrap()
    }

    #[test]
    fn group_b_decimates_1000() {
        let out = extract_group(&[rec(1000, 4000)], FrequencyGroup::B).unwrap();
        assert_eq!(out.len(), 1);
        assert_eq!(out[0].recording.fs(), 250);
        assert_eq!(out[0].recording.len(), 1000);
        assert_eq!(out[0].recording.channels()[0][1], 4.0);
    }

    #[test]
    fn filters_by_rate() {
        assert!(extract_group(&[rec(400, 400)], FrequencyGroup::A).unwrap().is_empty());
        let d = extract_group(&[rec(256, 256), rec(512, 512), rec(250, 250)], FrequencyGroup::D)
            .unwrap();
        assert_eq!(d.len(), 2);
        assert!(d.iter().all(|r| r.recording.fs() == 256));
    }

    #[test]
    fn group_e_resamples_everything() {
        let out = extract_group(&[rec(512, 1001), rec(250, 300)], FrequencyGroup::E).unwrap();
        assert_eq!(out[0].recording.len(), 489);
        assert_eq!(out[1].recording.len(), 300);
        assert!(out.iter().all(|r| r.recording.fs() == 250));
    }

    #[test]
    fn unknown_rate_is_an_error() {
        assert!(extract_group(&[rec(300, 300)], FrequencyGroup::E).is_err());
    }

    #[test]
    fn parse_roundtrip() {
        for g in ["a", "b", "c", "d", "e"] {
            assert_eq!(g.parse::<FrequencyGroup>().unwrap().to_string(), g);
        }
        assert!("f".parse::<FrequencyGroup>().is_err());
    }
}
