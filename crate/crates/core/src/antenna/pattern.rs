use std::f64::consts::{PI, TAU};
use std::io::{Read, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::geometry::{direction, ArrayGeometry, ElementPattern};
use super::weights::BeamWeights;
use crate::error::{Error, Result};

/// Region of directions a grid samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Coverage {
    /// θ ∈ [0, π], φ ∈ [0, 2π).
    Sphere,
    /// θ ∈ [0, π/2], φ ∈ [0, 2π); back radiation assumed negligible.
    Hemisphere,
    /// Signed θ ∈ [−π/2, π/2] on the plane through z at azimuth φ.
    Cut,
}

/// Tensor grid of polar angles × azimuths, both in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternGrid {
    theta_rad: Vec<f64>,
    phi_rad: Vec<f64>,
    coverage: Coverage,
}

fn uniform(start: f64, stop: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
        .collect()
}

fn steps(span_deg: f64, step_deg: f64) -> Result<usize> {
    if !(step_deg > 0.0 && step_deg <= span_deg) {
        return Err(Error::param(format!(
            "grid step must be in (0, {span_deg}]°, got {step_deg}°"
        )));
    }
    Ok((span_deg / step_deg).round() as usize)
}

impl PatternGrid {
    pub fn new(theta_rad: Vec<f64>, phi_rad: Vec<f64>, coverage: Coverage) -> Result<Self> {
        if theta_rad.is_empty() || phi_rad.is_empty() {
            return Err(Error::param("pattern grid must not be empty"));
        }
        if theta_rad.iter().chain(&phi_rad).any(|a| !a.is_finite()) {
            return Err(Error::param("grid angles must be finite"));
        }
        if theta_rad.windows(2).any(|w| !(w[1] > w[0]))
            || phi_rad.windows(2).any(|w| !(w[1] > w[0]))
        {
            return Err(Error::param("grid angles must be strictly increasing"));
        }
        Ok(PatternGrid {
            theta_rad,
            phi_rad,
            coverage,
        })
    }

    pub fn sphere(step_deg: f64) -> Result<Self> {
        let nt = steps(180.0, step_deg)?;
        let np = steps(360.0, step_deg)?;
        Self::new(
            uniform(0.0, PI, nt + 1),
            (0..np).map(|i| TAU * i as f64 / np as f64).collect(),
            Coverage::Sphere,
        )
    }

    pub fn hemisphere(step_deg: f64) -> Result<Self> {
        let nt = steps(90.0, step_deg)?;
        let np = steps(360.0, step_deg)?;
        Self::new(
            uniform(0.0, 0.5 * PI, nt + 1),
            (0..np).map(|i| TAU * i as f64 / np as f64).collect(),
            Coverage::Hemisphere,
        )
    }

    /// Principal-plane cut at azimuth `phi_deg`.
    pub fn cut(phi_deg: f64, step_deg: f64) -> Result<Self> {
        let n = steps(180.0, step_deg)?;
        Self::new(
            uniform(-0.5 * PI, 0.5 * PI, n + 1),
            vec![phi_deg.to_radians()],
            Coverage::Cut,
        )
    }

    pub fn theta_rad(&self) -> &[f64] {
        &self.theta_rad
    }

    pub fn phi_rad(&self) -> &[f64] {
        &self.phi_rad
    }

    pub fn coverage(&self) -> Coverage {
        self.coverage
    }

    pub fn len(&self) -> usize {
        self.theta_rad.len() * self.phi_rad.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Direction of flat index `i` (θ-major).
    pub fn point(&self, i: usize) -> (f64, f64) {
        let np = self.phi_rad.len();
        (self.theta_rad[i / np], self.phi_rad[i % np])
    }
}

/// Gain samples (dB) on a [`PatternGrid`], θ-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FarFieldPattern {
    grid: PatternGrid,
    gain_db: Vec<f64>,
    peak_gain_dbi: f64,
    peak_direction: (f64, f64),
}

impl FarFieldPattern {
    pub fn new(grid: PatternGrid, gain_db: Vec<f64>) -> Result<Self> {
        if gain_db.len() != grid.len() {
            return Err(Error::Dimension {
                what: "pattern samples",
                expected: grid.len(),
                got: gain_db.len(),
            });
        }
        if gain_db.iter().any(|g| g.is_nan() || *g == f64::INFINITY) {
            return Err(Error::Numerical("pattern contains NaN or +inf".into()));
        }
        let (imax, &peak) =
            gain_db
                .iter()
                .enumerate()
                .fold((0, &f64::NEG_INFINITY), |best, cur| {
                    if cur.1 > best.1 {
                        cur
                    } else {
                        best
                    }
                });
        let peak_direction = grid.point(imax);
        Ok(FarFieldPattern {
            grid,
            gain_db,
            peak_gain_dbi: peak,
            peak_direction,
        })
    }

    pub fn grid(&self) -> &PatternGrid {
        &self.grid
    }

    pub fn gain_db(&self) -> &[f64] {
        &self.gain_db
    }

    pub fn gain_at(&self, i_theta: usize, i_phi: usize) -> f64 {
        self.gain_db[i_theta * self.grid.phi_rad.len() + i_phi]
    }

    pub fn peak_gain_dbi(&self) -> f64 {
        self.peak_gain_dbi
    }

    /// (θ, φ) of the largest sample, radians.
    pub fn peak_direction(&self) -> (f64, f64) {
        self.peak_direction
    }

    /// Writes `theta_deg,phi_deg,gain_dbi` rows.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Config(format!("writing pattern CSV: {e}"));
        w.write_record(["theta_deg", "phi_deg", "gain_dbi"])
            .map_err(io)?;
        for (i, g) in self.gain_db.iter().enumerate() {
            let (t, p) = self.grid.point(i);
            w.write_record([
                format!("{:.6}", t.to_degrees()),
                format!("{:.6}", p.to_degrees()),
                format!("{g:.6}"),
            ])
            .map_err(io)?;
        }
        w.flush()
            .map_err(|e| Error::Config(format!("writing pattern CSV: {e}")))?;
        Ok(())
    }

    /// Reads rows written by [`FarFieldPattern::write_csv`]; the grid must be
    /// a full θ × φ tensor in θ-major order.
    pub fn read_csv<R: Read>(input: R, coverage: Coverage) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut rows = Vec::new();
        for (i, rec) in r.deserialize::<(f64, f64, f64)>().enumerate() {
            let rec = rec.map_err(|e| Error::Parse {
                line: i + 2,
                message: e.to_string(),
            })?;
            rows.push(rec);
        }
        if rows.is_empty() {
            return Err(Error::param("pattern CSV has no rows"));
        }
        let np = rows.iter().take_while(|r| r.0 == rows[0].0).count();
        if rows.len() % np != 0 {
            return Err(Error::param("pattern CSV is not a θ × φ tensor grid"));
        }
        let phi: Vec<f64> = rows[..np].iter().map(|r| r.1.to_radians()).collect();
        let theta: Vec<f64> = rows.iter().step_by(np).map(|r| r.0.to_radians()).collect();
        for (i, row) in rows.iter().enumerate() {
            if (row.0.to_radians() - theta[i / np]).abs() > 1e-9
                || (row.1.to_radians() - phi[i % np]).abs() > 1e-9
            {
                return Err(Error::Parse {
                    line: i + 2,
                    message: "row breaks the θ-major tensor ordering".into(),
                });
            }
        }
        let gains = rows.iter().map(|r| r.2).collect();
        FarFieldPattern::new(PatternGrid::new(theta, phi, coverage)?, gains)
    }
}

fn af_sum(positions: &[[f64; 3]], weights: &[Complex64], theta: f64, phi: f64) -> Complex64 {
    let u = direction(theta, phi);
    positions
        .iter()
        .zip(weights)
        .map(|(r, w)| {
            w * Complex64::from_polar(1.0, TAU * (r[0] * u[0] + r[1] * u[1] + r[2] * u[2]))
        })
        .sum()
}

/// Complex array factor Σ w exp(j2π r·û) at every grid point.
pub fn array_factor_complex(
    geometry: &ArrayGeometry,
    weights: &BeamWeights,
    grid: &PatternGrid,
) -> Result<Vec<Complex64>> {
    weights.check_against(geometry)?;
    let pos = geometry.positions();
    Ok((0..grid.len())
        .into_par_iter()
        .map(|i| {
            let (t, p) = grid.point(i);
            af_sum(pos, &weights.weights, t, p)
        })
        .collect())
}

/// 20·log10|AF|: gain over a single element with unit weight.
pub fn array_factor(
    geometry: &ArrayGeometry,
    weights: &BeamWeights,
    grid: &PatternGrid,
) -> Result<FarFieldPattern> {
    let af = array_factor_complex(geometry, weights, grid)?;
    FarFieldPattern::new(
        grid.clone(),
        af.iter().map(|a| 20.0 * a.norm().log10()).collect(),
    )
}

/// Element gain + 20·log10|AF| − 10·log10 Σ|w|², in dBi.
pub fn total_pattern(
    geometry: &ArrayGeometry,
    weights: &BeamWeights,
    element: &ElementPattern,
    grid: &PatternGrid,
) -> Result<FarFieldPattern> {
    element.validate()?;
    let p = weights.total_power();
    if !(p > 0.0) {
        return Err(Error::param("beam weights carry no power"));
    }
    let norm = 10.0 * p.log10();
    let af = array_factor_complex(geometry, weights, grid)?;
    let gains = af
        .iter()
        .enumerate()
        .map(|(i, a)| element.gain_dbi(grid.point(i).0) + 20.0 * a.norm().log10() - norm)
        .collect();
    FarFieldPattern::new(grid.clone(), gains)
}

/// Numerically integrated directivity.
#[derive(Debug, Clone, PartialEq)]
pub struct DirectivityEstimate {
    pub dbi: f64,
    /// Richardson estimate of the quadrature error, dB.
    pub quadrature_error_db: f64,
    /// Set when the grid is too coarse for 0.1 dB accuracy.
    pub warning: Option<String>,
}

/// Weights wᵢ with Σ wᵢ·U(θᵢ) = ∫ U(θ) sin θ dθ exactly for piecewise-linear U.
fn sine_weights(theta: &[f64]) -> Vec<f64> {
    let n = theta.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let (a, b) = (theta[i], theta[i + 1]);
        let h = b - a;
        let i0 = a.cos() - b.cos();
        let i1 = (b.sin() - b * b.cos()) - (a.sin() - a * a.cos());
        w[i] += (b * i0 - i1) / h;
        w[i + 1] += (i1 - a * i0) / h;
    }
    w
}

fn sphere_integral(pattern: &FarFieldPattern, theta_stride: usize, phi_stride: usize) -> f64 {
    let g = &pattern.grid;
    let np = g.phi_rad.len();
    let ti: Vec<usize> = (0..g.theta_rad.len()).step_by(theta_stride).collect();
    let pi_: Vec<usize> = (0..np).step_by(phi_stride).collect();
    let thetas: Vec<f64> = ti.iter().map(|&i| g.theta_rad[i]).collect();
    let wt = sine_weights(&thetas);
    let dphi = TAU / pi_.len() as f64;
    let mut total = 0.0;
    for (k, &it) in ti.iter().enumerate() {
        let ring: f64 = pi_
            .iter()
            .map(|&ip| 10f64.powf(pattern.gain_at(it, ip) / 10.0))
            .sum();
        total += wt[k] * ring * dphi;
    }
    total
}

/// 4π·U_max / ∮U dΩ on a sphere or hemisphere grid.
pub fn directivity(pattern: &FarFieldPattern) -> Result<DirectivityEstimate> {
    let g = &pattern.grid;
    let (lo, hi) = match g.coverage {
        Coverage::Sphere => (0.0, PI),
        Coverage::Hemisphere => (0.0, 0.5 * PI),
        Coverage::Cut => {
            return Err(Error::param(
                "directivity needs a sphere or hemisphere grid, not a cut",
            ))
        }
    };
    let t = &g.theta_rad;
    if (t[0] - lo).abs() > 1e-9 || (t[t.len() - 1] - hi).abs() > 1e-9 || t.len() < 3 {
        return Err(Error::param(
            "θ samples must span the declared coverage end to end",
        ));
    }
    let integral = sphere_integral(pattern, 1, 1);
    if !(integral > 0.0) {
        return Err(Error::Numerical("pattern integrates to zero power".into()));
    }
    let peak = 10f64.powf(pattern.peak_gain_dbi / 10.0);
    let dbi = 10.0 * (4.0 * PI * peak / integral).log10();

    // Linear-interpolation error scales as h², so the half-resolution difference over 3.
    let theta_stride = if (t.len() - 1) % 2 == 0 { 2 } else { 1 };
    let phi_stride = if g.phi_rad.len() % 2 == 0 && g.phi_rad.len() > 1 {
        2
    } else {
        1
    };
    let quadrature_error_db = if theta_stride == 1 && phi_stride == 1 {
        f64::NAN
    } else {
        let coarse = sphere_integral(pattern, theta_stride, phi_stride);
        (10.0 * (integral / coarse).log10()).abs() / 3.0
    };
    let warning = if quadrature_error_db.is_nan() {
        Some("grid too small to estimate quadrature error".to_string())
    } else if quadrature_error_db > 0.1 {
        Some(format!(
            "directivity quadrature error ≈ {quadrature_error_db:.2} dB; refine the grid"
        ))
    } else {
        None
    };
    Ok(DirectivityEstimate {
        dbi,
        quadrature_error_db,
        warning,
    })
}
