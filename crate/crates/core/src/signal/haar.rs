//! Orthonormal Haar cascade.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::{Error, Result};

/// Output of a multi-level Haar transform.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarDecomposition {
    /// Detail coefficients, finest level first.
    pub details: Vec<Vec<f64>>,
    /// Approximation coefficients after the last level.
    pub approximation: Vec<f64>,
    /// Trailing unpaired sample each level dropped, if its input was odd.
    pub dropped: Vec<Option<f64>>,
}

impl HaarDecomposition {
    pub fn approximation_energy(&self) -> f64 {
        self.approximation.iter().map(|v| v * v).sum()
    }

    pub fn dropped_energy(&self) -> f64 {
        self.dropped.iter().flatten().map(|v| v * v).sum()
    }
}

/// `levels`-deep Haar cascade: `d[i] = (x[2i] - x[2i+1])/√2`,
/// `a[i] = (x[2i] + x[2i+1])/√2`, recursing on `a`.
///
/// An odd-length input at any level loses its last sample, which is kept in
/// [`HaarDecomposition::dropped`] so the energy balance stays exact.
pub fn haar_dwt(signal: &[f64], levels: usize) -> Result<HaarDecomposition> {
    if levels == 0 {
        return Err(Error::invalid("Haar cascade needs at least one level"));
    }
    if levels >= usize::BITS as usize || signal.len() < (1usize << levels) {
        return Err(Error::invalid(format!(
            "{} samples is too short for {levels} Haar levels",
            signal.len()
        )));
    }

    let mut details = Vec::with_capacity(levels);
    let mut dropped = Vec::with_capacity(levels);
    let mut approx = signal.to_vec();
    for _ in 0..levels {
        let pairs = approx.len() / 2;
        dropped.push((approx.len() % 2 == 1).then(|| approx[approx.len() - 1]));
        let mut detail = Vec::with_capacity(pairs);
        let mut next = Vec::with_capacity(pairs);
        for pair in approx.chunks_exact(2) {
            detail.push((pair[0] - pair[1]) * FRAC_1_SQRT_2);
            next.push((pair[0] + pair[1]) * FRAC_1_SQRT_2);
        }
        details.push(detail);
        approx = next;
    }
    Ok(HaarDecomposition {
        details,
        approximation: approx,
        dropped,
    })
}

/// Energy `Σ d²` of each of the first four detail levels.
pub fn dwt_detail_energies(details: &[Vec<f64>]) -> Result<[f64; 4]> {
    if details.len() < 4 {
        return Err(Error::invalid(format!(
            "need 4 detail levels, got {}",
            details.len()
        )));
    }
    let mut out = [0.0; 4];
    for (slot, level) in out.iter_mut().zip(details) {
        *slot = level.iter().map(|d| d * d).sum();
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_signal_has_no_detail() {
        let h = haar_dwt(&[1.0; 4], 2).unwrap();
        assert!(h.details.iter().flatten().all(|&d| d == 0.0));
        assert_eq!(h.approximation.len(), 1);
        assert!((h.approximation[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn two_point_transform() {
        let h = haar_dwt(&[1.0, -1.0], 1).unwrap();
        assert!((h.details[0][0] - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(h.approximation, vec![0.0]);
        let e = dwt_detail_energies(&[h.details[0].clone(), vec![], vec![], vec![]]).unwrap();
        assert!((e[0] - 2.0).abs() < 1e-12);
        assert_eq!(&e[1..], &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn odd_levels_drop_last_sample() {
        // 250 -> 125 -> 62 (drops one) -> 31 -> 15 (drops one)
        let x: Vec<f64> = (0..250).map(|i| i as f64).collect();
        let h = haar_dwt(&x, 4).unwrap();
        let lens: Vec<usize> = h.details.iter().map(Vec::len).collect();
        assert_eq!(lens, vec![125, 62, 31, 15]);
        assert_eq!(h.approximation.len(), 15);
        assert_eq!(
            h.dropped.iter().map(Option::is_some).collect::<Vec<_>>(),
            vec![false, true, false, true]
        );
    }

    #[test]
    fn short_input_is_rejected() {
        assert!(haar_dwt(&[1.0; 15], 4).is_err());
        assert!(haar_dwt(&[1.0; 16], 4).is_ok());
        assert!(haar_dwt(&[1.0; 4], 0).is_err());
    }

    #[test]
    fn energies_need_four_levels() {
        assert!(dwt_detail_energies(&vec![vec![1.0]; 3]).is_err());
        assert_eq!(dwt_detail_energies(&vec![vec![0.0]; 4]).unwrap(), [0.0; 4]);
    }
}
