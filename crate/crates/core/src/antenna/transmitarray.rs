use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::geometry::{ArrayGeometry, ElementPattern};
use super::pattern::{total_pattern, FarFieldPattern, PatternGrid};
use super::weights::{quantize_phase, BeamWeights};
use crate::error::{first_violation, Error, Result, Violation};

const C0: f64 = 299_792_458.0;
/// Sub-cell samples per side when integrating the feed illumination.
const SUBSAMPLES: usize = 8;

/// Flat lens of `uc_rows × uc_cols` unit cells fed from a horn on axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TransmitarrayConfig {
    pub uc_rows: usize,
    pub uc_cols: usize,
    pub uc_size_mm: f64,
    pub focal_distance_mm: f64,
    /// Focal-source (feed horn) gain.
    pub fs_gain_dbi: f64,
    pub phase_bits: u32,
    pub frequency_ghz: f64,
}

impl TransmitarrayConfig {
    pub fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if self.uc_rows == 0 || self.uc_cols == 0 {
            v.push(Violation::new("uc_rows", "cell counts must be positive"));
        }
        for (name, val) in [
            ("uc_size_mm", self.uc_size_mm),
            ("focal_distance_mm", self.focal_distance_mm),
            ("frequency_ghz", self.frequency_ghz),
        ] {
            if !(val > 0.0 && val.is_finite()) {
                v.push(Violation::new(name, format!("must be positive, got {val}")));
            }
        }
        if !(10f64.powf(self.fs_gain_dbi / 10.0) >= 2.0) || !self.fs_gain_dbi.is_finite() {
            v.push(Violation::new(
                "fs_gain_dbi",
                "feed gain must be at least 3.01 dBi",
            ));
        }
        if !(1..=3).contains(&self.phase_bits) {
            v.push(Violation::new(
                "phase_bits",
                format!("must be 1, 2 or 3, got {}", self.phase_bits),
            ));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        first_violation(self.violations())
    }

    pub fn wavelength_mm(&self) -> f64 {
        C0 / (self.frequency_ghz * 1e9) * 1e3
    }

    /// Cos-power exponent q of the feed (field ∝ cos^q θ).
    pub fn feed_q(&self) -> f64 {
        0.5 * (0.5 * 10f64.powf(self.fs_gain_dbi / 10.0) - 1.0)
    }

    fn cell_centres_mm(&self) -> Vec<(f64, f64)> {
        let cx = 0.5 * (self.uc_cols as f64 - 1.0);
        let cy = 0.5 * (self.uc_rows as f64 - 1.0);
        let mut out = Vec::with_capacity(self.uc_rows * self.uc_cols);
        for r in 0..self.uc_rows {
            for c in 0..self.uc_cols {
                out.push((
                    (c as f64 - cx) * self.uc_size_mm,
                    (r as f64 - cy) * self.uc_size_mm,
                ));
            }
        }
        out
    }

    /// Feed power density on each cell, averaged over the cell (per mm², in
    /// units where the feed radiates 2π/(2q+1) in total).
    fn cell_illumination(&self) -> Vec<f64> {
        let q = self.feed_q();
        let f = self.focal_distance_mm;
        let s = self.uc_size_mm;
        self.cell_centres_mm()
            .iter()
            .map(|&(xc, yc)| {
                let mut acc = 0.0;
                for i in 0..SUBSAMPLES {
                    for j in 0..SUBSAMPLES {
                        let x = xc + s * ((i as f64 + 0.5) / SUBSAMPLES as f64 - 0.5);
                        let y = yc + s * ((j as f64 + 0.5) / SUBSAMPLES as f64 - 0.5);
                        let r2 = x * x + y * y + f * f;
                        let cos = f / r2.sqrt();
                        acc += cos.powf(2.0 * q + 1.0) / r2;
                    }
                }
                acc / (SUBSAMPLES * SUBSAMPLES) as f64
            })
            .collect()
    }
}

/// Gain/loss budget; losses are positive dB.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TransmitarrayBudget {
    pub aperture_directivity_dbi: f64,
    pub spillover_loss_db: f64,
    pub taper_loss_db: f64,
    pub quantization_loss_db: f64,
    pub total_loss_db: f64,
    pub net_gain_dbi: f64,
}

/// −20·log10 sinc(2^−bits), sinc(x) = sin(πx)/(πx).
pub fn quantization_loss_db(bits: u32) -> f64 {
    let x = 0.5f64.powi(bits as i32);
    -20.0 * ((PI * x).sin() / (PI * x)).log10()
}

pub fn transmitarray_budget(config: &TransmitarrayConfig) -> Result<TransmitarrayBudget> {
    config.validate()?;
    let lambda = config.wavelength_mm();
    let area = config.uc_rows as f64 * config.uc_cols as f64 * config.uc_size_mm.powi(2);
    let aperture_directivity_dbi = 10.0 * (4.0 * PI * area / (lambda * lambda)).log10();

    let q = config.feed_q();
    let dens = config.cell_illumination();
    let intercepted: f64 = dens.iter().sum::<f64>() * config.uc_size_mm.powi(2);
    let spillover = intercepted / (TAU / (2.0 * q + 1.0));
    let amp: Vec<f64> = dens.iter().map(|d| d.sqrt()).collect();
    let taper = amp.iter().sum::<f64>().powi(2) / (amp.len() as f64 * dens.iter().sum::<f64>());

    let spillover_loss_db = -10.0 * spillover.log10();
    let taper_loss_db = -10.0 * taper.log10();
    let quantization_loss_db = quantization_loss_db(config.phase_bits);
    let total_loss_db = spillover_loss_db + taper_loss_db + quantization_loss_db;
    Ok(TransmitarrayBudget {
        aperture_directivity_dbi,
        spillover_loss_db,
        taper_loss_db,
        quantization_loss_db,
        total_loss_db,
        net_gain_dbi: aperture_directivity_dbi - total_loss_db,
    })
}

/// Cell layout (in wavelengths) and aperture excitation for a beam towards
/// (θ₀, φ₀): feed amplitude and path phase, with the lens compensation
/// quantized to `phase_bits`.
pub fn transmitarray_aperture(
    config: &TransmitarrayConfig,
    theta0: f64,
    phi0: f64,
) -> Result<(ArrayGeometry, BeamWeights)> {
    config.validate()?;
    let lambda = config.wavelength_mm();
    let k = TAU / lambda;
    let centres = config.cell_centres_mm();
    let geometry = ArrayGeometry::from_positions(
        centres
            .iter()
            .map(|&(x, y)| [x / lambda, y / lambda, 0.0])
            .collect(),
    )?;
    let f = config.focal_distance_mm;
    let st = theta0.sin();
    let u = [st * phi0.cos(), st * phi0.sin()];
    let path: Vec<f64> = centres
        .iter()
        .map(|&(x, y)| (x * x + y * y + f * f).sqrt())
        .collect();
    let compensation = BeamWeights::new(
        centres
            .iter()
            .zip(&path)
            .map(|(&(x, y), r)| Complex64::from_polar(1.0, k * r - k * (x * u[0] + y * u[1])))
            .collect(),
    );
    let compensation = quantize_phase(&compensation, config.phase_bits)?;
    let dens = config.cell_illumination();
    let weights = compensation
        .weights
        .iter()
        .zip(&path)
        .zip(&dens)
        .map(|((c, r), d)| c * Complex64::from_polar(d.sqrt(), -k * r))
        .collect();
    Ok((
        geometry,
        BeamWeights {
            weights,
            quantization_bits: Some(config.phase_bits),
        },
    ))
}

/// Far-field gain (dBi) of the lens, spillover included; cells radiate as
/// cos-power elements with the directivity of their physical area.
pub fn transmitarray_pattern(
    config: &TransmitarrayConfig,
    theta0: f64,
    phi0: f64,
    grid: &PatternGrid,
) -> Result<FarFieldPattern> {
    let (geometry, weights) = transmitarray_aperture(config, theta0, phi0)?;
    let lambda = config.wavelength_mm();
    let cell_d = 4.0 * PI * (config.uc_size_mm / lambda).powi(2);
    let element = ElementPattern::CosPower {
        q: (0.5 * (0.5 * cell_d - 1.0)).max(0.0),
    };
    let budget = transmitarray_budget(config)?;
    let p = total_pattern(&geometry, &weights, &element, grid)?;
    let shifted = p
        .gain_db()
        .iter()
        .map(|g| g - budget.spillover_loss_db)
        .collect();
    FarFieldPattern::new(grid.clone(), shifted).map_err(|e| Error::Numerical(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table3_2bit() -> TransmitarrayConfig {
        TransmitarrayConfig {
            uc_rows: 14,
            uc_cols: 14,
            uc_size_mm: 5.0,
            focal_distance_mm: 45.0,
            fs_gain_dbi: 10.0,
            phase_bits: 2,
            frequency_ghz: 26.0,
        }
    }

    #[test]
    fn sinc_quantization_losses() {
        assert!((quantization_loss_db(1) - 3.92).abs() < 0.005);
        assert!((quantization_loss_db(2) - 0.91).abs() < 0.005);
        assert!((quantization_loss_db(3) - 0.22).abs() < 0.005);
    }

    #[test]
    fn ten_dbi_feed_has_q_two() {
        assert!((table3_2bit().feed_q() - 2.0).abs() < 1e-9);
    }

    #[test]
    fn budget_adds_up() {
        let b = transmitarray_budget(&table3_2bit()).unwrap();
        assert!((b.aperture_directivity_dbi - b.total_loss_db - b.net_gain_dbi).abs() < 1e-12);
        assert!(b.spillover_loss_db > 0.0 && b.taper_loss_db > 0.0);
        assert!((b.net_gain_dbi - 23.4).abs() < 1.5);
    }

    #[test]
    fn full_aperture_captures_all_feed_power() {
        // a huge lens close to the feed intercepts nearly the whole half-space
        let c = TransmitarrayConfig {
            uc_rows: 400,
            uc_cols: 400,
            focal_distance_mm: 20.0,
            ..table3_2bit()
        };
        let b = transmitarray_budget(&c).unwrap();
        assert!(b.spillover_loss_db < 0.01, "{}", b.spillover_loss_db);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let bad_f = TransmitarrayConfig {
            focal_distance_mm: 0.0,
            ..table3_2bit()
        };
        assert!(
            matches!(transmitarray_budget(&bad_f), Err(Error::Parameter(m)) if m.contains("focal_distance_mm"))
        );
        let bad_bits = TransmitarrayConfig {
            phase_bits: 4,
            ..table3_2bit()
        };
        assert!(transmitarray_budget(&bad_bits).is_err());
    }

    #[test]
    fn pattern_peak_tracks_budget() {
        // the quantized coherent sum lands near the sinc-loss estimate
        let c = table3_2bit();
        let grid = PatternGrid::cut(0.0, 0.5).unwrap();
        let p = transmitarray_pattern(&c, 0.0, 0.0, &grid).unwrap();
        let b = transmitarray_budget(&c).unwrap();
        assert!(p.peak_direction().0.abs() < 1e-9);
        assert!(
            (p.peak_gain_dbi() - b.net_gain_dbi).abs() < 1.0,
            "{} vs {}",
            p.peak_gain_dbi(),
            b.net_gain_dbi
        );
    }

    #[test]
    fn finer_quantization_ranks_better_at_wide_angles() {
        use crate::antenna::{mask_compliance, PrincipalCut, RadiationMask};
        let mask = RadiationMask::new(vec![(0.0, 0.0), (20.0, 0.0), (20.5, -30.0), (180.0, -30.0)])
            .unwrap();
        let grid = PatternGrid::cut(0.0, 0.25).unwrap();
        let margins: Vec<f64> = (1..=3)
            .map(|bits| {
                let c = TransmitarrayConfig {
                    uc_rows: 40,
                    uc_cols: 40,
                    focal_distance_mm: 134.0,
                    phase_bits: bits,
                    ..table3_2bit()
                };
                let p = transmitarray_pattern(&c, 0.0, 0.0, &grid).unwrap();
                mask_compliance(&p, &mask, PrincipalCut::XZ)
                    .unwrap()
                    .worst_margin_db
            })
            .collect();
        assert!(
            margins[2] >= margins[1] && margins[1] >= margins[0],
            "{margins:?}"
        );
    }
}
