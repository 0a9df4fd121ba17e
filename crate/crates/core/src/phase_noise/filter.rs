use std::f64::consts::PI;

use num_complex::Complex64;

use super::{carrier_scale_db, PoleZeroPnParams, SidebandConvention};
use crate::error::{Error, Result};
use crate::signal::{ComplexSequence, RngStream};

/// Phase samples in radians at a fixed rate.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrajectory {
    phase_rad: Vec<f64>,
    sample_rate_hz: f64,
}

impl PhaseTrajectory {
    pub fn new(phase_rad: Vec<f64>, sample_rate_hz: f64) -> Result<Self> {
        if phase_rad.is_empty() {
            return Err(Error::param(
                "phase trajectory must hold at least one sample",
            ));
        }
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return Err(Error::param("sample rate must be positive"));
        }
        if phase_rad.iter().any(|p| !p.is_finite()) {
            return Err(Error::param("phase samples must be finite"));
        }
        Ok(PhaseTrajectory {
            phase_rad,
            sample_rate_hz,
        })
    }

    /// A constant phase (pure common phase error).
    pub fn constant(value: f64, n: usize, sample_rate_hz: f64) -> Result<Self> {
        Self::new(vec![value; n], sample_rate_hz)
    }

    pub fn phase_rad(&self) -> &[f64] {
        &self.phase_rad
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.phase_rad.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Mean-square phase in rad².
    pub fn mean_square(&self) -> f64 {
        self.phase_rad.iter().map(|p| p * p).sum::<f64>() / self.phase_rad.len() as f64
    }

    pub fn segment(&self, start: usize, len: usize) -> Result<&[f64]> {
        self.phase_rad
            .get(start..start + len)
            .ok_or(Error::Dimension {
                what: "phase trajectory segment end",
                expected: self.phase_rad.len(),
                got: start + len,
            })
    }

    pub fn to_sequence(&self) -> ComplexSequence {
        ComplexSequence::from_real(&self.phase_rad, self.sample_rate_hz)
            .expect("trajectory invariants guarantee a valid sequence")
    }
}

/// y[n] = b0·x[n] + b1·x[n−1] − a1·y[n−1]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderSection {
    pub b0: f64,
    pub b1: f64,
    pub a1: f64,
}

impl FirstOrderSection {
    /// Digital image of (1 + s/ω_z)/(1 + s/ω_p) under the bilinear map, with
    /// both corners prewarped so they land exactly at their analog frequencies.
    fn from_corners(zero_hz: f64, pole_hz: f64, fs: f64) -> Self {
        let inv_tz = 1.0 / (PI * zero_hz / fs).tan();
        let inv_tp = 1.0 / (PI * pole_hz / fs).tan();
        let a0 = 1.0 + inv_tp;
        FirstOrderSection {
            b0: (1.0 + inv_tz) / a0,
            b1: (1.0 - inv_tz) / a0,
            a1: (1.0 - inv_tp) / a0,
        }
    }

    fn response(&self, zinv: Complex64) -> Complex64 {
        (self.b0 + self.b1 * zinv) / (1.0 + self.a1 * zinv)
    }
}

/// Cascade of first-order sections with a scalar gain, shaping unit-variance
/// white noise into phase noise.
#[derive(Debug, Clone, PartialEq)]
pub struct PnFilter {
    sections: Vec<FirstOrderSection>,
    gain: f64,
    sample_rate_hz: f64,
    slowest_pole_hz: f64,
}

impl PnFilter {
    pub fn sections(&self) -> &[FirstOrderSection] {
        &self.sections
    }

    pub fn gain(&self) -> f64 {
        self.gain
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    /// Complex response at frequency `f_hz`.
    pub fn response(&self, f_hz: f64) -> Complex64 {
        let zinv = Complex64::from_polar(1.0, -2.0 * PI * f_hz / self.sample_rate_hz);
        self.sections
            .iter()
            .fold(Complex64::new(self.gain, 0.0), |acc, s| {
                acc * s.response(zinv)
            })
    }

    /// Two-sided output PSD (rad²/Hz) when driven by unit-variance white noise.
    pub fn output_psd(&self, f_hz: f64) -> f64 {
        self.response(f_hz).norm_sqr() / self.sample_rate_hz
    }

    /// Default warm-up: four time constants of the slowest pole, in samples.
    pub fn default_warmup(&self) -> usize {
        let tau = 1.0 / (2.0 * PI * self.slowest_pole_hz);
        (4.0 * tau * self.sample_rate_hz).ceil() as usize
    }

    /// Runs the cascade over `warmup + n` white samples and keeps the last `n`.
    pub fn generate(
        &self,
        n: usize,
        warmup: usize,
        rng: &mut RngStream,
    ) -> Result<PhaseTrajectory> {
        if n == 0 {
            return Err(Error::param("trajectory length must be at least 1"));
        }
        let mut state = vec![(0.0f64, 0.0f64); self.sections.len()];
        let mut out = Vec::with_capacity(n);
        for i in 0..warmup + n {
            let mut v = self.gain * rng.standard_normal();
            for (s, (x1, y1)) in self.sections.iter().zip(state.iter_mut()) {
                let y = s.b0 * v + s.b1 * *x1 - s.a1 * *y1;
                *x1 = v;
                *y1 = y;
                v = y;
            }
            if i >= warmup {
                out.push(v);
            }
        }
        PhaseTrajectory::new(out, self.sample_rate_hz)
    }
}

/// Bilinear-transform realization of the pole/zero model (SSB convention).
pub fn design_pn_filter(
    params: &PoleZeroPnParams,
    carrier_hz: f64,
    sample_rate_hz: f64,
) -> Result<PnFilter> {
    design_pn_filter_with(params, carrier_hz, sample_rate_hz, SidebandConvention::Ssb)
}

pub fn design_pn_filter_with(
    params: &PoleZeroPnParams,
    carrier_hz: f64,
    sample_rate_hz: f64,
    convention: SidebandConvention,
) -> Result<PnFilter> {
    params.validate()?;
    if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
        return Err(Error::param("sample rate must be positive"));
    }
    let nyquist = sample_rate_hz / 2.0;
    for (kind, list) in [("pole", &params.poles_mhz), ("zero", &params.zeros_mhz)] {
        for (i, f) in list.iter().enumerate() {
            if f * 1e6 >= nyquist {
                return Err(Error::param(format!(
                    "{kind} {i} at {f} MHz is not below the Nyquist frequency {} MHz",
                    nyquist * 1e-6
                )));
            }
        }
    }
    let level = params.psd0_dbc_hz + carrier_scale_db(carrier_hz, params.base_carrier_hz)?;
    let s0 = convention.two_sided_linear(level);
    let sections = params
        .zeros_mhz
        .iter()
        .zip(&params.poles_mhz)
        .map(|(z, p)| FirstOrderSection::from_corners(z * 1e6, p * 1e6, sample_rate_hz))
        .collect();
    Ok(PnFilter {
        sections,
        gain: (s0 * sample_rate_hz).sqrt(),
        sample_rate_hz,
        slowest_pole_hz: params.min_pole_hz(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SynthesisOptions {
    /// Samples generated and discarded before output; `None` uses the
    /// filter's default of four slowest-pole time constants.
    pub warmup_samples: Option<usize>,
    pub convention: SidebandConvention,
}

/// Synthesizes `n` phase samples whose PSD follows the pole/zero model.
pub fn synthesize_phase(
    params: &PoleZeroPnParams,
    carrier_hz: f64,
    sample_rate_hz: f64,
    n: usize,
    rng: &mut RngStream,
) -> Result<PhaseTrajectory> {
    synthesize_phase_with(
        params,
        carrier_hz,
        sample_rate_hz,
        n,
        rng,
        &SynthesisOptions::default(),
    )
}

pub fn synthesize_phase_with(
    params: &PoleZeroPnParams,
    carrier_hz: f64,
    sample_rate_hz: f64,
    n: usize,
    rng: &mut RngStream,
    options: &SynthesisOptions,
) -> Result<PhaseTrajectory> {
    let filter = design_pn_filter_with(params, carrier_hz, sample_rate_hz, options.convention)?;
    let warmup = options
        .warmup_samples
        .unwrap_or_else(|| filter.default_warmup());
    filter.generate(n, warmup, rng)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phase_noise::eval_pole_zero_psd;

    #[test]
    fn matched_corners_reduce_to_gain() {
        let p = PoleZeroPnParams::new(-80.0, vec![1.0, 3.0], vec![1.0, 3.0], 30e9).unwrap();
        let f = design_pn_filter(&p, 30e9, 100e6).unwrap();
        for s in f.sections() {
            assert!((s.b0 - 1.0).abs() < 1e-15 && (s.b1 - s.a1).abs() < 1e-15);
        }
        for freq in [0.0, 1e5, 1e7, 3e7] {
            assert!((f.response(freq).norm() - f.gain()).abs() < 1e-12 * f.gain());
        }
    }

    #[test]
    fn dc_gain_matches_plateau() {
        let p = PoleZeroPnParams::set_a();
        let fs = 122.88e6;
        let f = design_pn_filter(&p, 60e9, fs).unwrap();
        let want = 10f64.powf((p.psd0_dbc_hz + carrier_scale_db(60e9, 30e9).unwrap()) / 10.0);
        let got = f.response(0.0).norm_sqr() / fs;
        assert!(((got - want) / want).abs() < 1e-9);
    }

    #[test]
    fn corners_land_on_their_analog_frequencies() {
        // A single pair: the digital response at the pole frequency is the analog one.
        let p = PoleZeroPnParams::new(-80.0, vec![5.0], vec![20.0], 30e9).unwrap();
        let fs = 61.44e6;
        let f = design_pn_filter(&p, 30e9, fs).unwrap();
        let rel = f.response(5e6).norm_sqr() / f.response(0.0).norm_sqr();
        // prewarped: |H|² = (1 + (tan/tan_z)²)/(1 + (tan/tan_p)²) with tan = tan_p
        let tz = (PI * 20e6 / fs).tan();
        let tp = (PI * 5e6 / fs).tan();
        let expect = (1.0 + (tp / tz).powi(2)) / 2.0;
        assert!((rel - expect).abs() < 1e-12);
    }

    #[test]
    fn response_tracks_model_in_band() {
        let p = PoleZeroPnParams::set_a();
        let fs = 122.88e6;
        let f = design_pn_filter(&p, 30e9, fs).unwrap();
        for off in [1e4, 1e5, 1e6, 1e7] {
            let model = eval_pole_zero_psd(&p, off, 30e9).unwrap();
            let got = 10.0 * f.output_psd(off).log10();
            assert!((got - model).abs() < 0.5, "{off}: {got} vs {model}");
        }
    }

    #[test]
    fn corner_above_nyquist_is_named() {
        let e = design_pn_filter(&PoleZeroPnParams::set_a(), 30e9, 61.44e6).unwrap_err();
        assert!(e.to_string().contains("zero 2 at 40 MHz"), "{e}");
    }

    #[test]
    fn negligible_noise_stays_tiny() {
        let p = PoleZeroPnParams {
            psd0_dbc_hz: -300.0,
            ..PoleZeroPnParams::set_a()
        };
        let t = synthesize_phase(&p, 30e9, 122.88e6, 1 << 16, &mut RngStream::new(1, 0)).unwrap();
        assert!(t.phase_rad().iter().all(|v| v.abs() < 1e-6));
    }

    #[test]
    fn deterministic_for_equal_seeds() {
        let p = PoleZeroPnParams::set_b();
        let a = synthesize_phase(&p, 60e9, 30.72e6, 5000, &mut RngStream::new(3, 1)).unwrap();
        let b = synthesize_phase(&p, 60e9, 30.72e6, 5000, &mut RngStream::new(3, 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn dsb_convention_halves_the_level() {
        let p = PoleZeroPnParams::set_a();
        let ssb = design_pn_filter(&p, 30e9, 122.88e6).unwrap();
        let dsb = design_pn_filter_with(&p, 30e9, 122.88e6, SidebandConvention::Dsb).unwrap();
        assert!((ssb.gain().powi(2) / dsb.gain().powi(2) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn warmup_covers_slowest_pole() {
        let f = design_pn_filter(&PoleZeroPnParams::set_b(), 60e9, 30.72e6).unwrap();
        let tau_samples = 30.72e6 / (2.0 * PI * 5e3);
        assert_eq!(f.default_warmup(), (4.0 * tau_samples).ceil() as usize);
    }
}
