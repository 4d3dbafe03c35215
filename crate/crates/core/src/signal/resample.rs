use crate::{Error, Result};

/// Keeps every `factor`-th sample starting at index 0.
pub fn decimate(signal: &[f64], factor: usize) -> Result<Vec<f64>> {
    if factor == 0 {
        return Err(Error::invalid("decimation factor must be at least 1"));
    }
    Ok(signal.iter().step_by(factor).copied().collect())
}

/// Linear interpolation from `fs_in` to `fs_out`.
///
/// Produces `round(len · fs_out / fs_in)` samples; sample `j` is the
/// interpolant at `j / fs_out` seconds, held at the last input sample past
/// the end of the signal.
pub fn linear_resample(signal: &[f64], fs_in: u32, fs_out: u32) -> Result<Vec<f64>> {
    if signal.is_empty() {
        return Err(Error::invalid("cannot resample an empty signal"));
    }
    if fs_in == 0 || fs_out == 0 {
        return Err(Error::invalid("sampling rates must be positive"));
    }
    if fs_in == fs_out {
        return Ok(signal.to_vec());
    }
    let (fs_in, fs_out) = (fs_in as u64, fs_out as u64);
    let out_len = (signal.len() as u64 * fs_out * 2 + fs_in) / (2 * fs_in);
    let last = signal.len() - 1;
    Ok((0..out_len)
        .map(|j| {
            // input position j·fs_in/fs_out, split exactly into index + fraction
            let num = j * fs_in;
            let idx = (num / fs_out) as usize;
            if idx >= last {
                return signal[last];
            }
            let frac = (num % fs_out) as f64 / fs_out as f64;
            signal[idx] + frac * (signal[idx + 1] - signal[idx])
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn decimate_by_four() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0];
        assert_eq!(decimate(&x, 4).unwrap(), vec![1.0, 5.0]);
        assert_eq!(decimate(&x, 1).unwrap(), x.to_vec());
        assert_eq!(decimate(&x[..7], 3).unwrap().len(), 3);
        assert!(decimate(&x, 0).is_err());
    }

    #[test]
    fn decimated_sine_matches_analytic_samples() {
        let x: Vec<f64> = (0..1000)
            .map(|t| (2.0 * PI * 10.0 * t as f64 / 1000.0).sin())
            .collect();
        let y = decimate(&x, 4).unwrap();
        assert_eq!(y.len(), 250);
        for (i, v) in y.iter().enumerate() {
            let want = (2.0 * PI * 10.0 * i as f64 / 250.0).sin();
            assert!((v - want).abs() < 1e-12);
        }
    }

    #[test]
    fn resample_identity_and_upsample() {
        let x = [0.3, -1.0, 2.5];
        assert_eq!(linear_resample(&x, 250, 250).unwrap(), x.to_vec());
        assert_eq!(
            linear_resample(&[0.0, 1.0], 1, 2).unwrap(),
            vec![0.0, 0.5, 1.0, 1.0]
        );
        assert!(linear_resample(&[], 1, 2).is_err());
        assert!(linear_resample(&x, 0, 2).is_err());
    }

    #[test]
    fn ramp_stays_linear() {
        let x: Vec<f64> = (0..400).map(|i| 0.25 * i as f64 - 3.0).collect();
        let y = linear_resample(&x, 400, 250).unwrap();
        assert_eq!(y.len(), 250);
        for (j, v) in y.iter().enumerate() {
            let t = j as f64 * 400.0 / 250.0;
            assert!((v - (0.25 * t - 3.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn resample_length_rounds() {
        let x = vec![0.0; 1001];
        // 1001 · 250 / 512 = 488.77
        assert_eq!(linear_resample(&x, 512, 250).unwrap().len(), 489);
    }
}
