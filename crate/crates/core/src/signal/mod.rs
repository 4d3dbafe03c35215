//! Windowing, resampling, spectral and wavelet features.

mod fft;
mod haar;
mod resample;

pub use fft::{highband_energy, rfft_spectrum, ComplexFft, RealFft, Spectrum};
pub use haar::{dwt_detail_energies, haar_dwt, HaarDecomposition};
pub use resample::{decimate, linear_resample};

use crate::{Error, Result};

/// Default high-band cutoff for the FFT energy feature.
pub const HIGHBAND_CUTOFF_HZ: f64 = 80.0;
/// Haar levels whose detail energies become features.
pub const DWT_LEVELS: usize = 4;
/// Features per channel: one high-band energy plus one energy per DWT level.
pub const FEATURES_PER_CHANNEL: usize = 1 + DWT_LEVELS;

/// Default four-channel temporal montage.
pub const DEFAULT_MONTAGE: [&str; 4] = ["F7-T3", "T3-T5", "F8-T4", "T4-T6"];

/// Multi-channel recording at one sampling rate, in microvolts.
#[derive(Debug, Clone, PartialEq)]
pub struct Recording {
    channels: Vec<Vec<f64>>,
    fs: u32,
    channel_names: Vec<String>,
    patient_id: String,
}

impl Recording {
    pub fn new(
        channels: Vec<Vec<f64>>,
        fs: u32,
        channel_names: Vec<String>,
        patient_id: impl Into<String>,
    ) -> Result<Self> {
        if fs == 0 {
            return Err(Error::invalid("sampling rate must be positive"));
        }
        if channels.is_empty() {
            return Err(Error::invalid("recording has no channels"));
        }
        let len = channels[0].len();
        if len == 0 {
            return Err(Error::invalid("recording has no samples"));
        }
        if channels.iter().any(|c| c.len() != len) {
            return Err(Error::invalid("channels have different lengths"));
        }
        if channel_names.len() != channels.len() {
            return Err(Error::invalid(format!(
                "{} channel names for {} channels",
                channel_names.len(),
                channels.len()
            )));
        }
        Ok(Self {
            channels,
            fs,
            channel_names,
            patient_id: patient_id.into(),
        })
    }

    pub fn channels(&self) -> &[Vec<f64>] {
        &self.channels
    }

    pub fn fs(&self) -> u32 {
        self.fs
    }

    pub fn channel_names(&self) -> &[String] {
        &self.channel_names
    }

    pub fn patient_id(&self) -> &str {
        &self.patient_id
    }

    pub fn n_channels(&self) -> usize {
        self.channels.len()
    }

    /// Samples per channel.
    pub fn len(&self) -> usize {
        self.channels[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn duration_s(&self) -> f64 {
        self.len() as f64 / self.fs as f64
    }

    /// Applies `f` to every channel, producing a recording at `fs`.
    pub fn map_channels<F>(&self, fs: u32, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Result<Vec<f64>>,
    {
        let channels = self
            .channels
            .iter()
            .map(|c| f(c))
            .collect::<Result<Vec<_>>>()?;
        Recording::new(channels, fs, self.channel_names.clone(), self.patient_id.clone())
    }
}

/// One second of every channel.
#[derive(Debug, Clone, PartialEq)]
pub struct Window {
    pub samples: Vec<Vec<f64>>,
    pub start_time: f64,
    pub fs: u32,
}

impl Window {
    pub fn end_time(&self) -> f64 {
        self.start_time + 1.0
    }
}

/// Non-overlapping 1 s windows; a trailing partial window is discarded.
pub fn split_windows(recording: &Recording) -> Vec<Window> {
    let fs = recording.fs() as usize;
    let count = recording.len() / fs;
    (0..count)
        .map(|w| Window {
            samples: recording
                .channels()
                .iter()
                .map(|c| c[w * fs..(w + 1) * fs].to_vec())
                .collect(),
            start_time: w as f64,
            fs: recording.fs(),
        })
        .collect()
}

/// Flat feature layout `[ch0: fft_hi, d1, d2, d3, d4][ch1: ...]...`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn n_channels(&self) -> usize {
        self.0.len() / FEATURES_PER_CHANNEL
    }
}

/// Reusable per-rate feature extractor; holds the FFT plan for `fs` samples.
#[derive(Debug, Clone)]
pub struct FeatureExtractor {
    fs: u32,
    fft: RealFft,
    cutoff_hz: f64,
}

impl FeatureExtractor {
    pub fn new(fs: u32) -> Result<Self> {
        Self::with_cutoff(fs, HIGHBAND_CUTOFF_HZ)
    }

    pub fn with_cutoff(fs: u32, cutoff_hz: f64) -> Result<Self> {
        if cutoff_hz >= fs as f64 / 2.0 {
            return Err(Error::invalid(format!(
                "cutoff {cutoff_hz} Hz is not below Nyquist for fs = {fs} Hz"
            )));
        }
        if (fs as usize) < 1 << DWT_LEVELS {
            return Err(Error::invalid(format!(
                "fs = {fs} Hz gives windows too short for {DWT_LEVELS} Haar levels"
            )));
        }
        Ok(Self {
            fs,
            fft: RealFft::new(fs as usize)?,
            cutoff_hz,
        })
    }

    pub fn fs(&self) -> u32 {
        self.fs
    }

    /// Five energies for one channel's window.
    pub fn channel_features(&self, samples: &[f64]) -> Result<[f64; FEATURES_PER_CHANNEL]> {
        let spectrum = self.fft.process(samples)?;
        let hi = highband_energy(&spectrum, self.fs as f64, self.cutoff_hz)?;
        let dwt = haar_dwt(samples, DWT_LEVELS)?;
        let [d1, d2, d3, d4] = dwt_detail_energies(&dwt.details)?;
        Ok([hi, d1, d2, d3, d4])
    }

    pub fn extract(&self, window: &Window) -> Result<FeatureVector> {
        if window.fs != self.fs {
            return Err(Error::invalid(format!(
                "window at {} Hz given to a {} Hz extractor",
                window.fs, self.fs
            )));
        }
        let mut values = Vec::with_capacity(window.samples.len() * FEATURES_PER_CHANNEL);
        for channel in &window.samples {
            if channel.len() != self.fs as usize {
                return Err(Error::invalid(format!(
                    "window channel has {} samples, expected {}",
                    channel.len(),
                    self.fs
                )));
            }
            values.extend_from_slice(&self.channel_features(channel)?);
        }
        Ok(FeatureVector(values))
    }
}

/// Feature vector of a window: per channel, the high-band FFT energy followed
/// by the four Haar detail energies.
pub fn extract_features(window: &Window) -> Result<FeatureVector> {
    FeatureExtractor::new(window.fs)?.extract(window)
}
