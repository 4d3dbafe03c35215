use super::{AnnotatedRecording, Annotation};
use crate::signal::{FeatureVector, Window};
use crate::LabelScheme;

/// All three label views of one window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowLabels {
    pub bc: u8,
    pub mc: Vec<u8>,
    pub mmc: Vec<u8>,
}

impl WindowLabels {
    pub fn for_scheme(&self, scheme: LabelScheme) -> Vec<u8> {
        match scheme {
            LabelScheme::Bc => vec![self.bc],
            LabelScheme::Mc => self.mc.clone(),
            LabelScheme::Mmc => self.mmc.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledWindow {
    pub features: FeatureVector,
    pub labels: Vec<u8>,
}

/// Labels for the interval `[start, end)`.
///
/// An artifact annotation counts when it intersects the window with positive
/// length. Per channel the artifact with the longest overlap wins; equal
/// overlaps go to the smaller label id.
pub fn window_labels(
    annotations: &[Annotation],
    n_channels: usize,
    start: f64,
    end: f64,
) -> WindowLabels {
    let mut best: Vec<Option<(f64, u8)>> = vec![None; n_channels];
    for a in annotations.iter().filter(|a| a.label > 0) {
        let overlap = a.overlap(start, end);
        if overlap <= 0.0 || a.channel >= n_channels {
            continue;
        }
        let slot = &mut best[a.channel];
        let better = match *slot {
            None => true,
            Some((o, l)) => overlap > o || (overlap == o && a.label < l),
        };
        if better {
            *slot = Some((overlap, a.label));
        }
    }
    let mmc: Vec<u8> = best.iter().map(|b| b.map_or(0, |(_, l)| l)).collect();
    let mc: Vec<u8> = mmc.iter().map(|&l| u8::from(l > 0)).collect();
    let bc = u8::from(mc.contains(&1));
    WindowLabels { bc, mc, mmc }
}

/// Labels of each window of `recording` under `scheme`.
pub fn assign_labels(
    recording: &AnnotatedRecording,
    scheme: LabelScheme,
    windows: &[Window],
) -> Vec<Vec<u8>> {
    let n_channels = recording.recording.n_channels();
    windows
        .iter()
        .map(|w| {
            window_labels(&recording.annotations, n_channels, w.start_time, w.end_time())
                .for_scheme(scheme)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ann(channel: usize, start_s: f64, stop_s: f64, label: u8) -> Annotation {
        Annotation {
            channel,
            start_s,
            stop_s,
            label,
        }
    }

    #[test]
    fn no_annotations_is_background() {
        let l = window_labels(&[], 4, 0.0, 1.0);
        assert_eq!(l.bc, 0);
        assert_eq!(l.mc, vec![0; 4]);
        assert_eq!(l.mmc, vec![0; 4]);
    }

    #[test]
    fn single_artifact_on_channel_one() {
        let l = window_labels(&[ann(1, 0.0, 5.0, 3)], 4, 2.0, 3.0);
        assert_eq!(l.bc, 1);
        assert_eq!(l.mc, vec![0, 1, 0, 0]);
        assert_eq!(l.mmc, vec![0, 3, 0, 0]);
    }

    #[test]
    fn touching_intervals_do_not_count() {
        let l = window_labels(&[ann(0, 1.0, 2.0, 5)], 1, 2.0, 3.0);
        assert_eq!(l.bc, 0);
        let l = window_labels(&[ann(0, 3.0, 4.0, 5)], 1, 2.0, 3.0);
        assert_eq!(l.bc, 0);
    }

    #[test]
    fn larger_overlap_wins_then_smaller_label() {
        let anns = [ann(0, 0.0, 2.3, 7), ann(0, 2.3, 9.0, 4)];
        assert_eq!(window_labels(&anns, 1, 2.0, 3.0).mmc, vec![4]);
        let tie = [ann(0, 0.0, 2.5, 7), ann(0, 2.5, 9.0, 9)];
        assert_eq!(window_labels(&tie, 1, 2.0, 3.0).mmc, vec![7]);
        let mut rev = tie;
        rev.reverse();
        assert_eq!(window_labels(&rev, 1, 2.0, 3.0).mmc, vec![7]);
    }

    #[test]
    fn background_annotations_are_ignored() {
        let l = window_labels(&[ann(0, 0.0, 5.0, 0)], 2, 0.0, 1.0);
        assert_eq!(l.bc, 0);
    }
}
