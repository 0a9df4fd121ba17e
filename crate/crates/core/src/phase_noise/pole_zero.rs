use serde::{Deserialize, Serialize};

use crate::error::{first_violation, Error, Result, Violation};

/// How a dBc/Hz model level maps onto the two-sided phase PSD.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SidebandConvention {
    /// Level is L(f); two-sided phase PSD equals L(|f|).
    #[default]
    Ssb,
    /// Level counts both sidebands; two-sided phase PSD equals half of it.
    Dsb,
}

impl SidebandConvention {
    /// Turns a model level in dBc/Hz into a linear two-sided phase PSD (rad²/Hz).
    pub fn two_sided_linear(self, level_dbc_hz: f64) -> f64 {
        let lin = 10f64.powf(level_dbc_hz / 10.0);
        match self {
            SidebandConvention::Ssb => lin,
            SidebandConvention::Dsb => 0.5 * lin,
        }
    }
}

/// Multi-pole/zero phase-noise model parameters.
///
/// S(f) = PSD₀ · ∏ₙ (1 + (f/f_z,n)²) / (1 + (f/f_p,n)²), measured at
/// `base_carrier_hz` and shifted by 20·log10(f_c/f_c,base) at other carriers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PoleZeroRecord", into = "PoleZeroRecord")]
pub struct PoleZeroPnParams {
    pub psd0_dbc_hz: f64,
    pub poles_mhz: Vec<f64>,
    pub zeros_mhz: Vec<f64>,
    pub base_carrier_hz: f64,
}

/// On-disk form: the carrier is written in GHz.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoleZeroRecord {
    psd0_dbc_hz: f64,
    poles_mhz: Vec<f64>,
    zeros_mhz: Vec<f64>,
    base_carrier_ghz: f64,
}

impl TryFrom<PoleZeroRecord> for PoleZeroPnParams {
    type Error = Error;

    fn try_from(r: PoleZeroRecord) -> Result<Self> {
        PoleZeroPnParams::new(
            r.psd0_dbc_hz,
            r.poles_mhz,
            r.zeros_mhz,
            r.base_carrier_ghz * 1e9,
        )
    }
}

impl From<PoleZeroPnParams> for PoleZeroRecord {
    fn from(p: PoleZeroPnParams) -> Self {
        PoleZeroRecord {
            psd0_dbc_hz: p.psd0_dbc_hz,
            poles_mhz: p.poles_mhz,
            zeros_mhz: p.zeros_mhz,
            base_carrier_ghz: p.base_carrier_hz / 1e9,
        }
    }
}

impl PoleZeroPnParams {
    pub fn new(
        psd0_dbc_hz: f64,
        poles_mhz: Vec<f64>,
        zeros_mhz: Vec<f64>,
        base_carrier_hz: f64,
    ) -> Result<Self> {
        let p = PoleZeroPnParams {
            psd0_dbc_hz,
            poles_mhz,
            zeros_mhz,
            base_carrier_hz,
        };
        first_violation(p.violations())?;
        Ok(p)
    }

    /// Oscillator measured at 30 GHz.
    pub fn set_a() -> Self {
        PoleZeroPnParams {
            psd0_dbc_hz: -79.4,
            poles_mhz: vec![0.1, 0.2, 8.0],
            zeros_mhz: vec![1.8, 2.2, 40.0],
            base_carrier_hz: 30e9,
        }
    }

    /// Oscillator measured at 60 GHz.
    pub fn set_b() -> Self {
        PoleZeroPnParams {
            psd0_dbc_hz: -70.0,
            poles_mhz: vec![0.005, 0.4, 0.6],
            zeros_mhz: vec![0.02, 6.0, 10.0],
            base_carrier_hz: 60e9,
        }
    }

    /// Every broken invariant, by field.
    pub fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if !self.psd0_dbc_hz.is_finite() {
            v.push(Violation::new("psd0_dbc_hz", "must be finite"));
        }
        if self.poles_mhz.len() != self.zeros_mhz.len() {
            v.push(Violation::new(
                "zeros_mhz",
                format!(
                    "poles and zeros must pair up: {} poles vs {} zeros",
                    self.poles_mhz.len(),
                    self.zeros_mhz.len()
                ),
            ));
        }
        if self.poles_mhz.is_empty() {
            v.push(Violation::new(
                "poles_mhz",
                "at least one pole/zero pair is required",
            ));
        }
        for (field, list) in [
            ("poles_mhz", &self.poles_mhz),
            ("zeros_mhz", &self.zeros_mhz),
        ] {
            for (i, f) in list.iter().enumerate() {
                if !(f.is_finite() && *f > 0.0) {
                    v.push(Violation::new(
                        format!("{field}[{i}]"),
                        format!("corner frequency must be positive and finite, got {f}"),
                    ));
                }
            }
        }
        if !(self.base_carrier_hz.is_finite() && self.base_carrier_hz > 0.0) {
            v.push(Violation::new(
                "base_carrier_ghz",
                "must be positive and finite",
            ));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        first_violation(self.violations())
    }

    /// Linear value of the pole/zero product at `offset_hz` (1 at DC).
    pub(crate) fn shape_linear(&self, offset_hz: f64) -> f64 {
        let f = offset_hz * 1e-6;
        self.zeros_mhz
            .iter()
            .zip(&self.poles_mhz)
            .map(|(z, p)| (1.0 + (f / z).powi(2)) / (1.0 + (f / p).powi(2)))
            .product()
    }

    /// Largest corner frequency in Hz.
    pub fn max_corner_hz(&self) -> f64 {
        self.poles_mhz
            .iter()
            .chain(&self.zeros_mhz)
            .fold(0.0f64, |a, &b| a.max(b))
            * 1e6
    }

    /// Smallest pole frequency in Hz (the slowest time constant).
    pub fn min_pole_hz(&self) -> f64 {
        self.poles_mhz.iter().fold(f64::INFINITY, |a, &b| a.min(b)) * 1e6
    }
}

/// 20·log10(carrier / base).
pub fn carrier_scale_db(carrier_hz: f64, base_carrier_hz: f64) -> Result<f64> {
    if !(carrier_hz > 0.0 && base_carrier_hz > 0.0) {
        return Err(Error::Domain(format!(
            "carrier frequencies must be positive, got {carrier_hz} and {base_carrier_hz}"
        )));
    }
    Ok(20.0 * (carrier_hz / base_carrier_hz).log10())
}

/// Evaluates the pole/zero model in dBc/Hz at `offset_hz` for a given carrier.
pub fn eval_pole_zero_psd(
    params: &PoleZeroPnParams,
    offset_hz: f64,
    carrier_hz: f64,
) -> Result<f64> {
    params.validate()?;
    if !(carrier_hz > 0.0) || !carrier_hz.is_finite() {
        return Err(Error::param(format!(
            "carrier must be positive, got {carrier_hz}"
        )));
    }
    if !(offset_hz >= 0.0) || !offset_hz.is_finite() {
        return Err(Error::param(format!(
            "offset must be non-negative, got {offset_hz}"
        )));
    }
    let shift = carrier_scale_db(carrier_hz, params.base_carrier_hz)?;
    Ok(params.psd0_dbc_hz + 10.0 * params.shape_linear(offset_hz).log10() + shift)
}
