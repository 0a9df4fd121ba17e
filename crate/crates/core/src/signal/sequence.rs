use num_complex::Complex64;

use crate::error::{Error, Result};

/// Complex baseband samples tagged with their sample rate.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexSequence {
    samples: Vec<Complex64>,
    sample_rate_hz: f64,
}

impl ComplexSequence {
    pub fn new(samples: Vec<Complex64>, sample_rate_hz: f64) -> Result<Self> {
        if !(sample_rate_hz > 0.0) || !sample_rate_hz.is_finite() {
            return Err(Error::param(format!(
                "sample rate must be positive and finite, got {sample_rate_hz}"
            )));
        }
        if let Some(i) = samples
            .iter()
            .position(|s| !(s.re.is_finite() && s.im.is_finite()))
        {
            return Err(Error::param(format!("sample {i} is not finite")));
        }
        Ok(ComplexSequence {
            samples,
            sample_rate_hz,
        })
    }

    /// Lifts a real-valued signal (e.g. a phase trajectory) onto the real axis.
    pub fn from_real(values: &[f64], sample_rate_hz: f64) -> Result<Self> {
        Self::new(
            values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
            sample_rate_hz,
        )
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Mean of |x|² over the buffer; zero for an empty buffer.
    pub fn mean_power(&self) -> f64 {
        if self.samples.is_empty() {
            return 0.0;
        }
        self.samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / self.samples.len() as f64
    }

    /// Maps every sample through `f`, keeping the sample rate.
    pub(crate) fn map_samples(&self, f: impl Fn(Complex64) -> Complex64) -> Result<Self> {
        Self::new(
            self.samples.iter().map(|&s| f(s)).collect(),
            self.sample_rate_hz,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_rate_and_non_finite() {
        assert!(ComplexSequence::new(vec![], 0.0).is_err());
        assert!(ComplexSequence::new(vec![Complex64::new(f64::NAN, 0.0)], 1.0).is_err());
        assert!(ComplexSequence::new(vec![], 1.0).unwrap().is_empty());
    }
}
