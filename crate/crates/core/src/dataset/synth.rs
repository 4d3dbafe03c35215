//! Synthetic annotated EEG.
//!
//! Background is a sum of slowly modulated tones below 40 Hz plus white
//! noise. Artifact class `k` injects one of three signatures, chosen by
//! `(k - 1) % 3`:
//!
//! * 0: muscle-like burst of tones above 80 Hz, bandwidth growing with `k`
//! * 1: electrode pops, short spikes with exponential decay
//! * 2: rhythmic 18-40 Hz activity, frequency shifting with `k`
//!
//! Events start on whole seconds and last 1-3 s, so the expected fraction of
//! annotated time matches `artifact_rate`.

use std::f64::consts::PI;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{AnnotatedRecording, Annotation, MAX_LABEL};
use crate::signal::{Recording, DEFAULT_MONTAGE};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub n_patients: usize,
    pub n_channels: usize,
    pub fs: u32,
    pub duration_s: f64,
    /// Expected fraction of annotated time, in `[0, 2/3]`.
    pub artifact_rate: f64,
    /// Artifact classes used, `1..=class_count`.
    pub class_count: u8,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_patients: 8,
            n_channels: 4,
            fs: 250,
            duration_s: 600.0,
            artifact_rate: 0.3,
            class_count: 3,
            seed: 0,
        }
    }
}

impl SynthConfig {
    fn validate(&self) -> Result<()> {
        if self.n_patients == 0 || self.n_channels == 0 {
            return Err(Error::invalid("need at least one patient and one channel"));
        }
        if self.fs < 16 {
            return Err(Error::invalid(format!("fs = {} Hz is too low", self.fs)));
        }
        if !(self.duration_s >= 1.0) {
            return Err(Error::invalid("duration must be at least 1 s"));
        }
        if !(0.0..=1.0).contains(&self.artifact_rate) {
            return Err(Error::invalid("artifact rate must be in [0, 1]"));
        }
        if self.class_count == 0 || self.class_count > MAX_LABEL {
            return Err(Error::invalid(format!(
                "class count must be in 1..={MAX_LABEL}, got {}",
                self.class_count
            )));
        }
        Ok(())
    }
}

/// Generates `n_patients` recordings named `pNNN_s00`, one per patient.
pub fn synth_corpus(config: &SynthConfig) -> Result<Vec<AnnotatedRecording>> {
    config.validate()?;
    (0..config.n_patients)
        .into_par_iter()
        .map(|p| synth_patient(config, p))
        .collect()
}

struct Tone {
    freq: f64,
    amp: f64,
    phase: f64,
    mod_freq: f64,
    mod_phase: f64,
}

fn synth_patient(config: &SynthConfig, patient: usize) -> Result<AnnotatedRecording> {
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(patient as u64);

    let fs = config.fs as f64;
    let n = (config.duration_s * fs).round() as usize;
    let noise = Normal::new(0.0, rng.gen_range(2.0..5.0)).expect("positive sigma");

    let mut channels = Vec::with_capacity(config.n_channels);
    for _ in 0..config.n_channels {
        let tones: Vec<Tone> = (0..8)
            .map(|_| {
                let freq = rng.gen_range(0.5..40.0f64).min(fs / 2.0 - 1.0);
                Tone {
                    freq,
                    amp: rng.gen_range(5.0..25.0) / (1.0 + freq / 8.0),
                    phase: rng.gen_range(0.0..2.0 * PI),
                    mod_freq: rng.gen_range(0.02..0.2),
                    mod_phase: rng.gen_range(0.0..2.0 * PI),
                }
            })
            .collect();
        let samples: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / fs;
                let bg: f64 = tones
                    .iter()
                    .map(|tone| {
                        let envelope = 1.0 + 0.5 * (2.0 * PI * tone.mod_freq * t + tone.mod_phase).sin();
                        tone.amp * envelope * (2.0 * PI * tone.freq * t + tone.phase).sin()
                    })
                    .sum();
                bg + noise.sample(&mut rng)
            })
            .collect();
        channels.push(samples);
    }

    let annotations = inject_artifacts(config, &mut rng, &mut channels);

    let names = if config.n_channels == DEFAULT_MONTAGE.len() {
        DEFAULT_MONTAGE.iter().map(|s| s.to_string()).collect()
    } else {
        (0..config.n_channels).map(|c| format!("ch{c}")).collect()
    };
    let patient_id = format!("p{patient:03}");
    let recording = Recording::new(channels, config.fs, names, patient_id.clone())?;
    AnnotatedRecording::new(format!("{patient_id}_s00"), recording, annotations)
}

fn inject_artifacts(
    config: &SynthConfig,
    rng: &mut ChaCha8Rng,
    channels: &mut [Vec<f64>],
) -> Vec<Annotation> {
    let mut annotations = Vec::new();
    if config.artifact_rate <= 0.0 {
        return annotations;
    }
    let fs = config.fs as usize;
    let n = channels[0].len();
    let seconds = n / fs;
    // Idle gaps are geometric with mean 1/p seconds and events last 2 s on
    // average, so the covered fraction is 2p / (1 + 2p).
    let rate = config.artifact_rate.min(0.999);
    let start_prob = (rate / (2.0 * (1.0 - rate))).min(1.0);

    let mut t = 0;
    while t < seconds {
        if !rng.gen_bool(start_prob) {
            t += 1;
            continue;
        }
        let duration = rng.gen_range(1..=3).min(seconds - t);
        let class = rng.gen_range(1..=config.class_count);
        let mut hit: Vec<usize> = (0..channels.len()).filter(|_| rng.gen_bool(0.5)).collect();
        if hit.is_empty() {
            hit.push(rng.gen_range(0..channels.len()));
        }
        for &ch in &hit {
            let range = t * fs..(t + duration) * fs;
            add_signature(class, config.fs as f64, rng, &mut channels[ch][range]);
            annotations.push(Annotation {
                channel: ch,
                start_s: t as f64,
                stop_s: (t + duration) as f64,
                label: class,
            });
        }
        t += duration;
    }
    annotations
}

fn add_signature(class: u8, fs: f64, rng: &mut ChaCha8Rng, out: &mut [f64]) {
    let kind = (class - 1) % 3;
    let variant = f64::from((class - 1) / 3);
    let scale = rng.gen_range(0.4..1.5);
    let nyquist = fs / 2.0;
    match kind {
        0 => {
            let lo = 82.0f64.min(nyquist * 0.7);
            let hi = (lo + 10.0 + 8.0 * variant).min(nyquist - 1.0).max(lo + 0.5);
            let tones: Vec<(f64, f64)> = (0..5)
                .map(|_| (rng.gen_range(lo..hi), rng.gen_range(0.0..2.0 * PI)))
                .collect();
            for (i, v) in out.iter_mut().enumerate() {
                let t = i as f64 / fs;
                *v += tones
                    .iter()
                    .map(|&(f, ph)| 8.0 * scale * (2.0 * PI * f * t + ph).sin())
                    .sum::<f64>();
            }
        }
        1 => {
            let tau = (0.01 + 0.01 * variant) * fs;
            let mut at = rng.gen_range(0.0..0.3) * fs;
            while (at as usize) < out.len() {
                let amp = rng.gen_range(30.0..70.0) * scale * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let start = at as usize;
                for (j, v) in out[start..].iter_mut().enumerate() {
                    *v += amp * (-(j as f64) / tau).exp();
                }
                at += rng.gen_range(0.2..0.5) * fs;
            }
        }
        _ => {
            let f = (rng.gen_range(18.0..28.0) + 6.0 * variant).min(nyquist * 0.8);
            let ph = rng.gen_range(0.0..2.0 * PI);
            for (i, v) in out.iter_mut().enumerate() {
                let t = i as f64 / fs;
                *v += 30.0 * scale * ((2.0 * PI * f * t + ph).sin() + 0.4 * (4.0 * PI * f * t + ph).sin());
            }
        }
    }
}
