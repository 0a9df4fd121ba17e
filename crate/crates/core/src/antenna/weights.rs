use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::geometry::{direction, ArrayGeometry};
use crate::error::{Error, Result};

/// Complex excitation per element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BeamWeights {
    pub weights: Vec<Complex64>,
    /// Set once phases have been snapped to 2^bits states.
    pub quantization_bits: Option<u32>,
}

impl BeamWeights {
    pub fn new(weights: Vec<Complex64>) -> Self {
        BeamWeights {
            weights,
            quantization_bits: None,
        }
    }

    pub fn uniform(n: usize) -> Self {
        Self::new(vec![Complex64::new(1.0, 0.0); n])
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn total_power(&self) -> f64 {
        self.weights.iter().map(|w| w.norm_sqr()).sum()
    }

    pub(crate) fn check_against(&self, geometry: &ArrayGeometry) -> Result<()> {
        if self.len() != geometry.len() {
            return Err(Error::Dimension {
                what: "beam weights",
                expected: geometry.len(),
                got: self.len(),
            });
        }
        Ok(())
    }
}

/// Conjugate-phase weights exp(−j2π r·û₀), positions in wavelengths.
pub fn steering_weights(geometry: &ArrayGeometry, theta0: f64, phi0: f64) -> Result<BeamWeights> {
    if !(theta0.is_finite() && phi0.is_finite()) || theta0.abs() > FRAC_PI_2 + 1e-12 {
        return Err(Error::param(format!(
            "steering angle θ₀ = {:.3}° is outside the visible hemisphere",
            theta0.to_degrees()
        )));
    }
    let u = direction(theta0, phi0);
    Ok(BeamWeights::new(
        geometry
            .positions()
            .iter()
            .map(|r| Complex64::from_polar(1.0, -TAU * (r[0] * u[0] + r[1] * u[1] + r[2] * u[2])))
            .collect(),
    ))
}

/// Snaps each phase to the nearest of 2^bits states k·360°/2^bits,
/// rounding ties (to within 1e-9 of a state spacing) down. Magnitudes are kept.
pub fn quantize_phase(weights: &BeamWeights, bits: u32) -> Result<BeamWeights> {
    if !(1..=16).contains(&bits) {
        return Err(Error::param(format!(
            "phase bits must be in 1..=16, got {bits}"
        )));
    }
    let states = 1u32 << bits;
    let step = TAU / states as f64;
    let snapped = weights
        .weights
        .iter()
        .map(|w| {
            let mag = w.norm();
            if mag == 0.0 {
                return Complex64::new(0.0, 0.0);
            }
            let phase = w.arg().rem_euclid(TAU);
            let k = ((phase / step - 0.5 - 1e-9).ceil() as i64).rem_euclid(states as i64);
            Complex64::from_polar(mag, k as f64 * step)
        })
        .collect();
    Ok(BeamWeights {
        weights: snapped,
        quantization_bits: Some(bits),
    })
}

/// Largest scan angle (degrees) before a grating lobe enters visible space
/// for a uniform pitch of `spacing_lambda` wavelengths.
pub fn grating_lobe_limit(spacing_lambda: f64) -> Result<f64> {
    if !(spacing_lambda > 0.0 && spacing_lambda.is_finite()) {
        return Err(Error::param(format!(
            "spacing must be positive, got {spacing_lambda}"
        )));
    }
    Ok(if spacing_lambda <= 0.5 {
        90.0
    } else if spacing_lambda >= 1.0 {
        0.0
    } else {
        (1.0 / spacing_lambda - 1.0).asin() * 180.0 / PI
    })
}
