use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::AnnotatedRecording;
use crate::{Error, Result};

pub const DEFAULT_SPLIT: [f64; 3] = [0.8, 0.1, 0.1];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusSplit {
    pub train: Vec<AnnotatedRecording>,
    pub val: Vec<AnnotatedRecording>,
    pub test: Vec<AnnotatedRecording>,
}

impl CorpusSplit {
    pub fn parts(&self) -> [&[AnnotatedRecording]; 3] {
        [&self.train, &self.val, &self.test]
    }
}

/// Assigns whole patients to train/val/test.
///
/// Patients are shuffled with `seed`. The first patient goes to each split
/// with a positive ratio, then every remaining patient is given to the split
/// furthest below its window-count target (ties to the earlier split).
pub fn split_patient_independent(
    corpus: &[AnnotatedRecording],
    ratios: [f64; 3],
    seed: u64,
) -> Result<CorpusSplit> {
    if ratios.iter().any(|r| !(*r >= 0.0)) || ratios.iter().sum::<f64>() <= 0.0 {
        return Err(Error::invalid(format!("invalid split ratios {ratios:?}")));
    }
    let ids = patient_assignment(corpus, ratios, seed)?;
    let mut split = CorpusSplit::default();
    for rec in corpus {
        let target = match ids[rec.patient_id()] {
            0 => &mut split.train,
            1 => &mut split.val,
            _ => &mut split.test,
        };
        target.push(rec.clone());
    }
    Ok(split)
}

/// Patient id -> split index (0 train, 1 val, 2 test).
pub(crate) fn patient_assignment(
    corpus: &[AnnotatedRecording],
    ratios: [f64; 3],
    seed: u64,
) -> Result<BTreeMap<String, usize>> {
    let mut windows: BTreeMap<&str, usize> = BTreeMap::new();
    for rec in corpus {
        *windows.entry(rec.patient_id()).or_default() += rec.window_count();
    }
    if windows.len() < 3 {
        return Err(Error::invalid(format!(
            "patient-independent split needs at least 3 patients, found {}",
            windows.len()
        )));
    }
    let mut patients: Vec<(&str, usize)> = windows.into_iter().collect();
    patients.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));

    let ratio_sum: f64 = ratios.iter().sum();
    let total: usize = patients.iter().map(|p| p.1).sum();
    let targets: Vec<f64> = ratios.iter().map(|r| r / ratio_sum * total as f64).collect();
    let mut filled = [0usize; 3];
    let mut out = BTreeMap::new();

    let mut rest = patients.into_iter();
    for split in (0..3).filter(|&s| ratios[s] > 0.0) {
        let (id, w) = rest.next().expect("at least three patients");
        filled[split] += w;
        out.insert(id.to_string(), split);
    }
    for (id, w) in rest {
        let mut pick = 0;
        let mut best = f64::NEG_INFINITY;
        for s in 0..3 {
            if ratios[s] <= 0.0 {
                continue;
            }
            let deficit = targets[s] - filled[s] as f64;
            if deficit > best {
                best = deficit;
                pick = s;
            }
        }
        filled[pick] += w;
        out.insert(id.to_string(), pick);
    }
    Ok(out)
}
