use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{power_db, ComplexSequence};
use crate::error::{Error, Result};

/// Tapering window applied to each Welch segment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Window {
    #[default]
    Hann,
    Hamming,
    Blackman,
    Rectangular,
}

impl Window {
    /// Periodic window of length `n`.
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        let step = std::f64::consts::TAU / n as f64;
        (0..n)
            .map(|i| {
                let x = step * i as f64;
                match self {
                    Window::Hann => 0.5 - 0.5 * x.cos(),
                    Window::Hamming => 0.54 - 0.46 * x.cos(),
                    Window::Blackman => 0.42 - 0.5 * x.cos() + 0.08 * (2.0 * x).cos(),
                    Window::Rectangular => 1.0,
                }
            })
            .collect()
    }
}

/// A two-sided power spectral density on a strictly increasing frequency axis.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEstimate {
    freqs_hz: Vec<f64>,
    psd_db: Vec<f64>,
    resolution_hz: f64,
}

impl SpectrumEstimate {
    pub fn new(freqs_hz: Vec<f64>, psd_db: Vec<f64>, resolution_hz: f64) -> Result<Self> {
        if freqs_hz.len() != psd_db.len() {
            return Err(Error::Dimension {
                what: "psd values",
                expected: freqs_hz.len(),
                got: psd_db.len(),
            });
        }
        if freqs_hz.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::param("frequency axis must be strictly increasing"));
        }
        if !(resolution_hz > 0.0) {
            return Err(Error::param("resolution must be positive"));
        }
        Ok(SpectrumEstimate {
            freqs_hz,
            psd_db,
            resolution_hz,
        })
    }

    pub fn freqs_hz(&self) -> &[f64] {
        &self.freqs_hz
    }

    /// PSD per bin in dB/Hz; silent bins hold `f64::NEG_INFINITY`.
    pub fn psd_db(&self) -> &[f64] {
        &self.psd_db
    }

    pub fn resolution_hz(&self) -> f64 {
        self.resolution_hz
    }

    pub fn psd_linear(&self) -> Vec<f64> {
        self.psd_db.iter().map(|&d| 10f64.powf(d / 10.0)).collect()
    }

    /// Bins at strictly positive frequency, as `(freq_hz, psd_db)`.
    pub fn positive_bins(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.freqs_hz
            .iter()
            .copied()
            .zip(self.psd_db.iter().copied())
            .filter(|(f, _)| *f > 0.0)
    }

    /// Total power: PSD summed over all bins times the bin spacing.
    pub fn total_power(&self) -> f64 {
        self.psd_linear().iter().sum::<f64>() * self.resolution_hz
    }
}

/// Averaged modified-periodogram (Welch) estimate of a two-sided PSD.
///
/// The window is power-normalized, so white noise of variance σ² yields a
/// flat level of σ²/fs. The output axis runs from −fs/2 to just below fs/2.
pub fn welch_psd(
    x: &ComplexSequence,
    segment_len: usize,
    overlap_fraction: f64,
    window: Window,
) -> Result<SpectrumEstimate> {
    if segment_len < 8 {
        return Err(Error::param(format!(
            "segment length must be at least 8, got {segment_len}"
        )));
    }
    if segment_len > x.len() {
        return Err(Error::param(format!(
            "segment length {segment_len} exceeds signal length {}",
            x.len()
        )));
    }
    if !(0.0..1.0).contains(&overlap_fraction) {
        return Err(Error::param(format!(
            "overlap fraction must lie in [0, 1), got {overlap_fraction}"
        )));
    }
    let fs = x.sample_rate_hz();
    let n = segment_len;
    let hop = (n - (overlap_fraction * n as f64).round() as usize).max(1);
    let segments = (x.len() - n) / hop + 1;

    let w = window.coefficients(n);
    let w_power: f64 = w.iter().map(|v| v * v).sum();
    let fft = FftPlanner::new().plan_fft_forward(n);

    let mut acc = vec![0.0f64; n];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    let samples = x.samples();
    for s in 0..segments {
        let start = s * hop;
        for (i, b) in buf.iter_mut().enumerate() {
            *b = samples[start + i] * w[i];
        }
        fft.process_with_scratch(&mut buf, &mut scratch);
        for (a, b) in acc.iter_mut().zip(&buf) {
            *a += b.norm_sqr();
        }
    }
    let scale = 1.0 / (segments as f64 * fs * w_power);

    let neg_start = (n + 1) / 2;
    let order = (neg_start..n).chain(0..neg_start);
    let mut freqs = Vec::with_capacity(n);
    let mut psd = Vec::with_capacity(n);
    for bin in order {
        let signed = if bin < neg_start {
            bin as f64
        } else {
            bin as f64 - n as f64
        };
        freqs.push(signed * fs / n as f64);
        psd.push(power_db(acc[bin] * scale));
    }
    SpectrumEstimate::new(freqs, psd, fs / n as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{gaussian_complex, RngStream};

    #[test]
    fn white_noise_is_flat_at_variance_over_fs() {
        let mut rng = RngStream::new(5, 0);
        let x = gaussian_complex(&mut rng, 1 << 18, 1.0, 1.0).unwrap();
        let est = welch_psd(&x, 256, 0.5, Window::Hann).unwrap();
        for &d in est.psd_db() {
            assert!(d.abs() < 0.5, "bin level {d} dB");
        }
    }

    #[test]
    fn tone_lands_in_its_bin() {
        let fs = 1000.0;
        let f0 = 125.0;
        let samples: Vec<Complex64> = (0..4096)
            .map(|n| Complex64::from_polar(1.0, std::f64::consts::TAU * f0 * n as f64 / fs))
            .collect();
        let x = ComplexSequence::new(samples, fs).unwrap();
        let est = welch_psd(&x, 64, 0.5, Window::Hann).unwrap();
        let (imax, _) = est
            .psd_db()
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap();
        assert!((est.freqs_hz()[imax] - f0).abs() < 1e-9);
    }

    #[test]
    fn zero_signal_floor_is_negative_infinity() {
        let x = ComplexSequence::new(vec![Complex64::new(0.0, 0.0); 64], 1.0).unwrap();
        let est = welch_psd(&x, 16, 0.5, Window::Hann).unwrap();
        assert!(est.psd_db().iter().all(|d| *d == f64::NEG_INFINITY));
    }

    #[test]
    fn segment_longer_than_signal_is_rejected() {
        let x = ComplexSequence::new(vec![Complex64::new(1.0, 0.0); 16], 1.0).unwrap();
        assert!(welch_psd(&x, 32, 0.5, Window::Hann).is_err());
        assert!(welch_psd(&x, 4, 0.5, Window::Hann).is_err());
        assert!(welch_psd(&x, 8, 1.0, Window::Hann).is_err());
    }

    #[test]
    fn parseval_consistency() {
        let mut rng = RngStream::new(77, 1);
        let x = gaussian_complex(&mut rng, 1 << 18, 2.5, 3.0e6).unwrap();
        let est = welch_psd(&x, 1024, 0.5, Window::Hann).unwrap();
        let rel = (est.total_power() - x.mean_power()).abs() / x.mean_power();
        assert!(rel < 0.05, "relative mismatch {rel}");
    }

    #[test]
    fn frequency_axis_is_two_sided_and_increasing() {
        let x = ComplexSequence::new(vec![Complex64::new(1.0, 0.0); 33], 8.0).unwrap();
        let est = welch_psd(&x, 9, 0.0, Window::Rectangular).unwrap();
        let f = est.freqs_hz();
        assert_eq!(f.len(), 9);
        assert!(f.windows(2).all(|w| w[1] > w[0]));
        assert!(f[0] < 0.0 && *f.last().unwrap() < 4.0);
        assert!(f.contains(&0.0));
    }
}
