use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::{fill_gaussian_complex, ComplexSequence, RngStream};

const MC_CHUNK: usize = 1 << 16;
const MC_MIN_SAMPLES: usize = 10_000;

/// y = θ₁x + θ₂x|x|²
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Poly3Params {
    pub theta1: Complex64,
    pub theta2: Complex64,
}

impl Poly3Params {
    pub fn new(theta1: Complex64, theta2: Complex64) -> Result<Self> {
        let p = Poly3Params { theta1, theta2 };
        if ![theta1.re, theta1.im, theta2.re, theta2.im]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::param("polynomial coefficients must be finite"));
        }
        Ok(p)
    }

    #[inline]
    pub fn apply_sample(&self, x: Complex64) -> Complex64 {
        self.theta1 * x + self.theta2 * x * x.norm_sqr()
    }
}

pub fn apply_poly3(params: &Poly3Params, x: &ComplexSequence) -> Result<ComplexSequence> {
    x.map_samples(|s| params.apply_sample(s))
}

fn check_power(sigma_x2: f64) -> Result<()> {
    if !(sigma_x2 > 0.0 && sigma_x2.is_finite()) {
        return Err(Error::param(format!(
            "input power must be positive, got {sigma_x2}"
        )));
    }
    Ok(())
}

/// Bussgang gain α = E[y x*]/σ_x² = θ₁ + 2θ₂σ_x² for x ~ CN(0, σ_x²).
pub fn bussgang_alpha(params: &Poly3Params, sigma_x2: f64) -> Result<Complex64> {
    check_power(sigma_x2)?;
    Ok(params.theta1 + 2.0 * params.theta2 * sigma_x2)
}

/// Which rule produces the distortion power σ_w².
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum DistortionFormula {
    /// 2|θ₂|²(3σ_x⁶ + 2σ_x⁸), taken verbatim from the published closed form.
    AsPrinted,
    /// Sample mean of |y − αx|² over `samples` Gaussian draws.
    McOracle { samples: usize, seed: u64 },
}

/// A distortion power with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionEstimate {
    pub value: f64,
    /// 95 % half-width; present only for Monte-Carlo estimates.
    pub ci_halfwidth: Option<f64>,
    pub samples: usize,
    pub warning: Option<String>,
}

/// Bussgang first-order model y = αx + w for one input power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BussgangParams {
    pub alpha: Complex64,
    pub sigma_w2: f64,
    pub sigma_x2: f64,
}

impl BussgangParams {
    pub fn from_poly3(
        params: &Poly3Params,
        sigma_x2: f64,
        formula: DistortionFormula,
    ) -> Result<Self> {
        Ok(BussgangParams {
            alpha: bussgang_alpha(params, sigma_x2)?,
            sigma_w2: bussgang_distortion_power(params, sigma_x2, formula)?.value,
            sigma_x2,
        })
    }
}

pub fn bussgang_distortion_power(
    params: &Poly3Params,
    sigma_x2: f64,
    formula: DistortionFormula,
) -> Result<DistortionEstimate> {
    check_power(sigma_x2)?;
    match formula {
        DistortionFormula::AsPrinted => {
            let s6 = sigma_x2.powi(3);
            let s8 = sigma_x2.powi(4);
            Ok(DistortionEstimate {
                value: 2.0 * params.theta2.norm_sqr() * (3.0 * s6 + 2.0 * s8),
                ci_halfwidth: None,
                samples: 0,
                warning: None,
            })
        }
        DistortionFormula::McOracle { samples, seed } => {
            let mc = bussgang_monte_carlo(params, sigma_x2, samples, seed)?;
            let warning = (samples < MC_MIN_SAMPLES)
                .then(|| format!("only {samples} Monte-Carlo draws; estimate may be unreliable"));
            Ok(DistortionEstimate {
                value: mc.sigma_w2,
                ci_halfwidth: Some(mc.sigma_w2_ci),
                samples,
                warning,
            })
        }
    }
}

/// Sample statistics of the Bussgang split over Gaussian draws.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BussgangMonteCarlo {
    /// Sample estimate of E[y x*]/σ_x².
    pub alpha: Complex64,
    /// Sample mean of |y − α x|² with α from the closed form.
    pub sigma_w2: f64,
    pub sigma_w2_ci: f64,
    /// |E[w x*]| / (σ_x σ_w); zero when w vanishes.
    pub orthogonality: f64,
    pub samples: usize,
}

#[derive(Default, Clone, Copy)]
struct Moments {
    yx: Complex64,
    wx: Complex64,
    w2: f64,
    w4: f64,
}

/// Draws `samples` values of x ~ CN(0, σ_x²) in fixed-size chunks, one random
/// stream per chunk, and reduces them in chunk order.
pub fn bussgang_monte_carlo(
    params: &Poly3Params,
    sigma_x2: f64,
    samples: usize,
    seed: u64,
) -> Result<BussgangMonteCarlo> {
    check_power(sigma_x2)?;
    if samples == 0 {
        return Err(Error::param("Monte-Carlo estimate needs at least one draw"));
    }
    let alpha = bussgang_alpha(params, sigma_x2)?;
    let chunks = samples.div_ceil(MC_CHUNK);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = MC_CHUNK.min(samples - c * MC_CHUNK);
            let mut x = vec![Complex64::new(0.0, 0.0); len];
            fill_gaussian_complex(&mut RngStream::new(seed, c as u64), &mut x, sigma_x2);
            let mut m = Moments::default();
            for &xi in &x {
                let y = params.apply_sample(xi);
                let w = y - alpha * xi;
                m.yx += y * xi.conj();
                m.wx += w * xi.conj();
                let p = w.norm_sqr();
                m.w2 += p;
                m.w4 += p * p;
            }
            m
        })
        .collect();
    let total = parts.iter().fold(Moments::default(), |a, b| Moments {
        yx: a.yx + b.yx,
        wx: a.wx + b.wx,
        w2: a.w2 + b.w2,
        w4: a.w4 + b.w4,
    });
    let n = samples as f64;
    let mean_w2 = total.w2 / n;
    let var_w2 = (total.w4 / n - mean_w2 * mean_w2).max(0.0);
    let orthogonality = if mean_w2 > 0.0 {
        (total.wx / n).norm() / (sigma_x2 * mean_w2).sqrt()
    } else {
        0.0
    };
    Ok(BussgangMonteCarlo {
        alpha: total.yx / n / sigma_x2,
        sigma_w2: mean_w2,
        sigma_w2_ci: 1.96 * (var_w2 / n).sqrt(),
        orthogonality,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn linear_and_zero_cases() {
        let p = Poly3Params::new(c(0.7, -0.2), c(0.0, 0.0)).unwrap();
        let x = ComplexSequence::new(vec![c(1.0, 2.0), c(-0.3, 0.1), c(0.0, 0.0)], 1.0).unwrap();
        let y = apply_poly3(&p, &x).unwrap();
        for (a, b) in x.samples().iter().zip(y.samples()) {
            assert_eq!(*b, p.theta1 * a);
        }
        assert_eq!(y.samples()[2], c(0.0, 0.0));
    }

    #[test]
    fn direct_substitution() {
        let p = Poly3Params::new(c(1.0, 0.0), c(-0.1, 0.0)).unwrap();
        assert!((p.apply_sample(c(1.0, 0.0)) - c(0.9, 0.0)).norm() < 1e-15);
        assert!((bussgang_alpha(&p, 1.0).unwrap() - c(0.8, 0.0)).norm() < 1e-15);
        let lin = Poly3Params::new(c(0.3, 0.4), c(0.0, 0.0)).unwrap();
        assert_eq!(bussgang_alpha(&lin, 7.0).unwrap(), lin.theta1);
        assert!(bussgang_alpha(&p, 0.0).is_err());
    }

    #[test]
    fn as_printed_value() {
        let p = Poly3Params::new(c(1.0, 0.0), c(0.1, 0.0)).unwrap();
        let d = bussgang_distortion_power(&p, 1.0, DistortionFormula::AsPrinted).unwrap();
        assert!((d.value - 0.1).abs() < 1e-15);
    }

    #[test]
    fn no_cubic_term_means_no_distortion() {
        let p = Poly3Params::new(c(1.0, 0.5), c(0.0, 0.0)).unwrap();
        for f in [
            DistortionFormula::AsPrinted,
            DistortionFormula::McOracle {
                samples: 20_000,
                seed: 1,
            },
        ] {
            assert_eq!(bussgang_distortion_power(&p, 2.0, f).unwrap().value, 0.0);
        }
    }

    #[test]
    fn small_sample_runs_carry_a_warning() {
        let p = Poly3Params::new(c(1.0, 0.0), c(0.1, 0.0)).unwrap();
        let d = bussgang_distortion_power(
            &p,
            1.0,
            DistortionFormula::McOracle {
                samples: 1000,
                seed: 3,
            },
        )
        .unwrap();
        assert!(d.warning.is_some());
        assert!(d.ci_halfwidth.unwrap() > 0.0);
    }

    #[test]
    fn monte_carlo_alpha_and_orthogonality() {
        let p = Poly3Params::new(c(0.9, 0.1), c(-0.05, 0.02)).unwrap();
        let mc = bussgang_monte_carlo(&p, 0.8, 1_000_000, 17).unwrap();
        let a = bussgang_alpha(&p, 0.8).unwrap();
        assert!((mc.alpha - a).norm() / a.norm() < 0.01);
        assert!(mc.orthogonality < 0.01, "{}", mc.orthogonality);
    }

    #[test]
    fn alpha_is_independent_of_distortion_mode() {
        let p = Poly3Params::new(c(1.0, 0.0), c(0.1, -0.1)).unwrap();
        let a = BussgangParams::from_poly3(&p, 0.5, DistortionFormula::AsPrinted).unwrap();
        let b = BussgangParams::from_poly3(
            &p,
            0.5,
            DistortionFormula::McOracle {
                samples: 20_000,
                seed: 2,
            },
        )
        .unwrap();
        assert_eq!(a.alpha, b.alpha);
    }

    #[test]
    fn printed_growth_between_eight_and_sixteen() {
        let p = Poly3Params::new(c(1.0, 0.0), c(0.3, 0.2)).unwrap();
        for s in [0.01, 0.3, 1.0, 4.0, 100.0] {
            let a = bussgang_distortion_power(&p, s, DistortionFormula::AsPrinted)
                .unwrap()
                .value;
            let b = bussgang_distortion_power(&p, 2.0 * s, DistortionFormula::AsPrinted)
                .unwrap()
                .value;
            let r = b / a;
            assert!((8.0..=16.0).contains(&r), "{r}");
        }
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let p = Poly3Params::new(c(1.0, 0.0), c(0.1, 0.0)).unwrap();
        let a = bussgang_monte_carlo(&p, 1.0, 100_000, 5).unwrap();
        let b = bussgang_monte_carlo(&p, 1.0, 100_000, 5).unwrap();
        assert_eq!(a, b);
    }
}
