//! Mixed-radix complex FFT and the half-length real-input transform built on it.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// Decimation-in-time mixed-radix FFT plan for one transform length.
///
/// The length is factored into radix-4 stages first, then the remaining
/// prime factors in ascending order. Any length is supported; large prime
/// factors fall back to a direct butterfly of that size.
#[derive(Debug, Clone)]
pub struct ComplexFft {
    len: usize,
    factors: Vec<usize>,
    // exp(-2πi·j/len) for j in 0..len
    twiddles: Vec<Complex64>,
}

impl ComplexFft {
    pub fn new(len: usize) -> Self {
        assert!(len > 0, "FFT length must be positive");
        let twiddles = (0..len)
            .map(|j| {
                let angle = -2.0 * PI * j as f64 / len as f64;
                Complex64::new(angle.cos(), angle.sin())
            })
            .collect();
        Self {
            len,
            factors: factorize(len),
            twiddles,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Forward transform, `X[k] = Σ x[t]·exp(-2πi·k·t/n)`.
    pub fn forward(&self, input: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(input.len(), self.len, "input length does not match plan");
        let mut out = vec![Complex64::default(); self.len];
        let mut scratch = Vec::new();
        self.stage(input, 0, 1, self.len, 0, &mut out, &mut scratch);
        out
    }

    #[allow(clippy::too_many_arguments)]
    fn stage(
        &self,
        input: &[Complex64],
        offset: usize,
        stride: usize,
        n: usize,
        depth: usize,
        out: &mut [Complex64],
        scratch: &mut Vec<Complex64>,
    ) {
        if n == 1 {
            out[0] = input[offset];
            return;
        }
        let radix = self.factors[depth];
        let m = n / radix;
        for r in 0..radix {
            self.stage(
                input,
                offset + r * stride,
                stride * radix,
                m,
                depth + 1,
                &mut out[r * m..(r + 1) * m],
                scratch,
            );
        }

        // Twiddle step: W_n^j lives at index j·(len/n) of the global table.
        let step_n = self.len / n;
        let step_radix = self.len / radix;
        scratch.clear();
        scratch.resize(radix, Complex64::default());
        for k in 0..m {
            for (r, slot) in scratch.iter_mut().enumerate() {
                let tw = self.twiddles[(r * k * step_n) % self.len];
                *slot = out[r * m + k] * tw;
            }
            match radix {
                2 => {
                    let (a, b) = (scratch[0], scratch[1]);
                    out[k] = a + b;
                    out[k + m] = a - b;
                }
                4 => {
                    let (a, b, c, d) = (scratch[0], scratch[1], scratch[2], scratch[3]);
                    let s0 = a + c;
                    let s1 = a - c;
                    let s2 = b + d;
                    // -i·(b - d)
                    let bd = b - d;
                    let s3 = Complex64::new(bd.im, -bd.re);
                    out[k] = s0 + s2;
                    out[k + m] = s1 + s3;
                    out[k + 2 * m] = s0 - s2;
                    out[k + 3 * m] = s1 - s3;
                }
                _ => {
                    for q in 0..radix {
                        let mut acc = Complex64::default();
                        for (r, v) in scratch.iter().enumerate() {
                            acc += v * self.twiddles[((r * q) % radix) * step_radix];
                        }
                        out[k + q * m] = acc;
                    }
                }
            }
        }
    }
}

fn factorize(mut n: usize) -> Vec<usize> {
    let mut factors = Vec::new();
    while n.is_multiple_of(4) {
        factors.push(4);
        n /= 4;
    }
    let mut p = 2;
    while n > 1 {
        if p * p > n {
            factors.push(n);
            break;
        }
        while n.is_multiple_of(p) {
            factors.push(p);
            n /= p;
        }
        p += 1;
    }
    factors
}

/// One-sided spectrum of a real signal: bins `0..=n/2` of its DFT.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Length of the transformed signal.
    pub n: usize,
    pub bins: Vec<Complex64>,
}

impl Spectrum {
    /// Rebuilds all `n` bins using conjugate symmetry.
    pub fn to_full(&self) -> Vec<Complex64> {
        (0..self.n)
            .map(|k| {
                if k < self.bins.len() {
                    self.bins[k]
                } else {
                    self.bins[self.n - k].conj()
                }
            })
            .collect()
    }
}

/// Real-input FFT plan.
///
/// Even lengths pack the signal into a complex sequence of half the length
/// (`z[m] = x[2m] + i·x[2m+1]`), transform it, and split the result back into
/// the spectra of the even and odd samples. Odd lengths run the full complex
/// transform.
#[derive(Debug, Clone)]
pub struct RealFft {
    n: usize,
    inner: ComplexFft,
    // exp(-2πi·k/n) for k in 0..=n/2, used by the even-length split step
    split: Vec<Complex64>,
}

impl RealFft {
    pub fn new(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!(
                "real FFT needs at least 2 samples, got {n}"
            )));
        }
        let inner = if n.is_multiple_of(2) {
            ComplexFft::new(n / 2)
        } else {
            ComplexFft::new(n)
        };
        let split = (0..=n / 2)
            .map(|k| {
                let angle = -2.0 * PI * k as f64 / n as f64;
                Complex64::new(angle.cos(), angle.sin())
            })
            .collect();
        Ok(Self { n, inner, split })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn process(&self, signal: &[f64]) -> Result<Spectrum> {
        if signal.len() != self.n {
            return Err(Error::invalid(format!(
                "signal has {} samples, plan expects {}",
                signal.len(),
                self.n
            )));
        }
        let n = self.n;
        if n % 2 == 1 {
            let input: Vec<Complex64> = signal.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let mut full = self.inner.forward(&input);
            full.truncate(n / 2 + 1);
            return Ok(Spectrum { n, bins: full });
        }

        let half = n / 2;
        let packed: Vec<Complex64> = signal
            .chunks_exact(2)
            .map(|pair| Complex64::new(pair[0], pair[1]))
            .collect();
        let z = self.inner.forward(&packed);
        let bins = (0..=half)
            .map(|k| {
                let zk = z[k % half];
                let zc = z[(half - k) % half].conj();
                let even = (zk + zc) * 0.5;
                let diff = (zk - zc) * 0.5;
                // odd = diff / i
                let odd = Complex64::new(diff.im, -diff.re);
                even + self.split[k] * odd
            })
            .collect();
        Ok(Spectrum { n, bins })
    }
}

/// One-sided DFT of a real signal of length `n ≥ 2`; returns `n/2 + 1` bins.
pub fn rfft_spectrum(signal: &[f64]) -> Result<Spectrum> {
    RealFft::new(signal.len())?.process(signal)
}

/// Sum of `|X[k]|²` over one-sided bins whose frequency `k·fs/n` is strictly
/// above `cutoff_hz`.
pub fn highband_energy(spectrum: &Spectrum, fs: f64, cutoff_hz: f64) -> Result<f64> {
    if !(fs > 0.0) {
        return Err(Error::invalid(format!("sampling rate must be positive, got {fs}")));
    }
    if cutoff_hz >= fs / 2.0 {
        return Err(Error::invalid(format!(
            "cutoff {cutoff_hz} Hz is at or above the Nyquist frequency {} Hz",
            fs / 2.0
        )));
    }
    let n = spectrum.n as f64;
    Ok(spectrum
        .bins
        .iter()
        .enumerate()
        .filter(|(k, _)| *k as f64 * fs / n > cutoff_hz)
        .map(|(_, b)| b.norm_sqr())
        .sum())
}
