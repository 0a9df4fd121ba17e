use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{eval_pole_zero_psd, PoleZeroPnParams};
use crate::error::{first_violation, Error, Result, Violation};

/// Ratio of real polynomials in s, coefficients in ascending powers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalFunction {
    pub numerator: Vec<f64>,
    pub denominator: Vec<f64>,
}

impl RationalFunction {
    /// Passive lead-lag filter Z(s) = (1 + sRC)/(sC).
    pub fn series_rc(r_ohm: f64, c_farad: f64) -> Self {
        RationalFunction {
            numerator: vec![1.0, r_ohm * c_farad],
            denominator: vec![0.0, c_farad],
        }
    }

    fn horner(coeffs: &[f64], s: Complex64) -> Complex64 {
        coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * s + c)
    }

    pub fn numerator_at(&self, s: Complex64) -> Complex64 {
        Self::horner(&self.numerator, s)
    }

    pub fn denominator_at(&self, s: Complex64) -> Complex64 {
        Self::horner(&self.denominator, s)
    }

    pub fn eval(&self, s: Complex64) -> Result<Complex64> {
        let d = self.denominator_at(s);
        if d.norm() == 0.0 {
            return Err(Error::Numerical(format!(
                "loop filter has a pole at s = {s}"
            )));
        }
        Ok(self.numerator_at(s) / d)
    }
}

/// Phase-noise spectrum of one PLL noise source, in dBc/Hz.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SourcePsd {
    /// Noiseless source.
    Off,
    /// Pole/zero model evaluated at its own base carrier.
    PoleZero(PoleZeroPnParams),
    /// Straight lines in log-frequency between `(offset_hz, dbc_hz)` points,
    /// extended past the ends along the end segments' slopes.
    PowerLaw { points: Vec<(f64, f64)> },
}

impl SourcePsd {
    fn violations(&self, field: &str) -> Vec<Violation> {
        match self {
            SourcePsd::Off => Vec::new(),
            SourcePsd::PoleZero(p) => p
                .violations()
                .into_iter()
                .map(|v| Violation::new(format!("{field}.{}", v.field), v.message))
                .collect(),
            SourcePsd::PowerLaw { points } => {
                let mut v = Vec::new();
                if points.is_empty() {
                    v.push(Violation::new(
                        format!("{field}.points"),
                        "at least one point required",
                    ));
                }
                if points
                    .iter()
                    .any(|(f, d)| !(*f > 0.0 && f.is_finite() && d.is_finite()))
                {
                    v.push(Violation::new(
                        format!("{field}.points"),
                        "offsets must be positive and levels finite",
                    ));
                }
                if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
                    v.push(Violation::new(
                        format!("{field}.points"),
                        "offsets must be strictly increasing",
                    ));
                }
                v
            }
        }
    }

    /// Linear level at `offset_hz` (zero for [`SourcePsd::Off`]).
    pub fn linear(&self, offset_hz: f64) -> Result<f64> {
        Ok(match self {
            SourcePsd::Off => 0.0,
            SourcePsd::PoleZero(p) => {
                10f64.powf(eval_pole_zero_psd(p, offset_hz, p.base_carrier_hz)? / 10.0)
            }
            SourcePsd::PowerLaw { points } => {
                if points.len() == 1 {
                    return Ok(10f64.powf(points[0].1 / 10.0));
                }
                let lf = offset_hz.log10();
                let i = points
                    .windows(2)
                    .position(|w| offset_hz < w[1].0)
                    .unwrap_or(points.len() - 2);
                let (f0, d0) = points[i];
                let (f1, d1) = points[i + 1];
                let t = (lf - f0.log10()) / (f1.log10() - f0.log10());
                10f64.powf((d0 + t * (d1 - d0)) / 10.0)
            }
        })
    }
}

/// PLL phase-noise model: detector gain, VCO sensitivity, divider ratio,
/// loop filter and the three source spectra.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PllPnParams {
    pub kd: f64,
    pub kvco: f64,
    pub nd: f64,
    pub loop_filter: RationalFunction,
    pub reference: SourcePsd,
    pub loop_noise: SourcePsd,
    pub vco: SourcePsd,
}

impl PllPnParams {
    pub fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if !(self.nd > 0.0 && self.nd.is_finite()) {
            v.push(Violation::new("nd", "divider ratio must be positive"));
        }
        if !self.kd.is_finite() || !self.kvco.is_finite() {
            v.push(Violation::new("kd", "gains must be finite"));
        }
        if self.loop_filter.denominator.iter().all(|c| *c == 0.0) {
            v.push(Violation::new(
                "loop_filter.denominator",
                "must not be identically zero",
            ));
        }
        if self.loop_filter.numerator.is_empty() {
            v.push(Violation::new("loop_filter.numerator", "must not be empty"));
        }
        v.extend(self.reference.violations("reference"));
        v.extend(self.loop_noise.violations("loop_noise"));
        v.extend(self.vco.violations("vco"));
        v
    }

    pub fn validate(&self) -> Result<()> {
        first_violation(self.violations())
    }

    /// Magnitude of the open-loop gain K_D·K_VCO·Z(s)/(s·N_D) at `f_hz`.
    pub fn open_loop_gain(&self, f_hz: f64) -> Result<f64> {
        let s = Complex64::new(0.0, 2.0 * PI * f_hz);
        let z = self.loop_filter.eval(s)?;
        Ok((self.kd * self.kvco * z / (s * self.nd)).norm())
    }
}

/// Transfer functions from each source to the output phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PllTransfer {
    pub reference: Complex64,
    pub loop_noise: Complex64,
    pub vco: Complex64,
}

/// Evaluates the three source-to-output transfers at `offset_hz`.
///
/// With Z = n/d the common denominator is s·N_D·d + K_D·K_VCO·n, which keeps
/// the VCO path finite at poles of Z.
pub fn pll_transfer(params: &PllPnParams, offset_hz: f64) -> Result<PllTransfer> {
    params.validate()?;
    if !(offset_hz > 0.0 && offset_hz.is_finite()) {
        return Err(Error::param(format!(
            "offset must be positive, got {offset_hz}"
        )));
    }
    let s = Complex64::new(0.0, 2.0 * PI * offset_hz);
    let n = params.loop_filter.numerator_at(s);
    let d = params.loop_filter.denominator_at(s);
    let den = s * params.nd * d + params.kd * params.kvco * n;
    if !(den.norm() > 0.0) || !den.re.is_finite() || !den.im.is_finite() {
        return Err(Error::Numerical(format!(
            "closed-loop denominator vanishes at {offset_hz} Hz"
        )));
    }
    let forward = params.nd * params.kvco * n / den;
    Ok(PllTransfer {
        reference: forward,
        loop_noise: forward * params.kd,
        vco: s * params.nd * d / den,
    })
}

/// Output phase-noise level (dBc/Hz): Σ |Hᵢ|²·Sᵢ over independent sources.
pub fn eval_pll_psd(params: &PllPnParams, offset_hz: f64) -> Result<f64> {
    let h = pll_transfer(params, offset_hz)?;
    let total = h.reference.norm_sqr() * params.reference.linear(offset_hz)?
        + h.loop_noise.norm_sqr() * params.loop_noise.linear(offset_hz)?
        + h.vco.norm_sqr() * params.vco.linear(offset_hz)?;
    Ok(crate::signal::power_db(total))
}

/// Unity-gain crossover of the open loop, found by log-domain bisection.
pub fn loop_bandwidth_hz(params: &PllPnParams) -> Result<f64> {
    params.validate()?;
    let mut lo = -3.0f64;
    let g_lo = params.open_loop_gain(10f64.powf(lo))?;
    if g_lo <= 1.0 {
        return Err(Error::Numerical(
            "open-loop gain below unity at 1 mHz".into(),
        ));
    }
    let mut hi = lo;
    loop {
        hi += 0.25;
        if hi > 13.0 {
            return Err(Error::Numerical(
                "no unity-gain crossover below 10 THz".into(),
            ));
        }
        if params.open_loop_gain(10f64.powf(hi))? < 1.0 {
            break;
        }
        lo = hi;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if params.open_loop_gain(10f64.powf(mid))? > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(10f64.powf(0.5 * (lo + hi)))
}
