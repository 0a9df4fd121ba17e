use serde::{Deserialize, Serialize};

use crate::error::{first_violation, Error, Result, Violation};

/// Rectangular lattice in the z = 0 plane, centred on the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lattice {
    pub rows: usize,
    pub cols: usize,
    /// Column pitch along x, in wavelengths.
    pub spacing_x: f64,
    /// Row pitch along y, in wavelengths.
    pub spacing_y: f64,
}

impl Lattice {
    /// Element positions, row-major with columns along x.
    pub fn positions(&self) -> Vec<[f64; 3]> {
        let cx = 0.5 * (self.cols as f64 - 1.0);
        let cy = 0.5 * (self.rows as f64 - 1.0);
        let mut out = Vec::with_capacity(self.rows * self.cols);
        for r in 0..self.rows {
            for c in 0..self.cols {
                out.push([
                    (c as f64 - cx) * self.spacing_x,
                    (r as f64 - cy) * self.spacing_y,
                    0.0,
                ]);
            }
        }
        out
    }
}

/// Element positions in wavelengths, optionally tagged with the lattice
/// that generated them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "GeometryRecord", into = "GeometryRecord")]
pub struct ArrayGeometry {
    positions: Vec<[f64; 3]>,
    lattice: Option<Lattice>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeometryRecord {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    lattice: Option<Lattice>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    positions: Option<Vec<[f64; 3]>>,
}

impl TryFrom<GeometryRecord> for ArrayGeometry {
    type Error = Error;

    fn try_from(r: GeometryRecord) -> Result<Self> {
        let g = match (r.lattice, r.positions) {
            (Some(l), positions) => ArrayGeometry {
                positions: positions.unwrap_or_else(|| l.positions()),
                lattice: Some(l),
            },
            (None, Some(p)) => ArrayGeometry {
                positions: p,
                lattice: None,
            },
            (None, None) => {
                return Err(Error::param(
                    "geometry needs a lattice or explicit positions",
                ))
            }
        };
        first_violation(g.violations())?;
        Ok(g)
    }
}

impl From<ArrayGeometry> for GeometryRecord {
    fn from(g: ArrayGeometry) -> Self {
        match g.lattice {
            Some(l) => GeometryRecord {
                lattice: Some(l),
                positions: None,
            },
            None => GeometryRecord {
                lattice: None,
                positions: Some(g.positions),
            },
        }
    }
}

impl ArrayGeometry {
    /// Arbitrary (aperiodic) layout.
    pub fn from_positions(positions: Vec<[f64; 3]>) -> Result<Self> {
        let g = ArrayGeometry {
            positions,
            lattice: None,
        };
        first_violation(g.violations())?;
        Ok(g)
    }

    pub fn planar(rows: usize, cols: usize, spacing_x: f64, spacing_y: f64) -> Result<Self> {
        let lattice = Lattice {
            rows,
            cols,
            spacing_x,
            spacing_y,
        };
        let g = ArrayGeometry {
            positions: lattice.positions(),
            lattice: Some(lattice),
        };
        first_violation(g.violations())?;
        Ok(g)
    }

    /// 1×n line along x.
    pub fn linear(n: usize, spacing: f64) -> Result<Self> {
        Self::planar(1, n, spacing, spacing)
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if self.positions.is_empty() {
            v.push(Violation::new("positions", "at least one element required"));
        }
        if self.positions.iter().flatten().any(|c| !c.is_finite()) {
            v.push(Violation::new("positions", "coordinates must be finite"));
        }
        if let Some(l) = &self.lattice {
            if !(l.spacing_x > 0.0
                && l.spacing_y > 0.0
                && l.spacing_x.is_finite()
                && l.spacing_y.is_finite())
            {
                v.push(Violation::new("lattice", "spacings must be positive"));
            }
            let expected = l.positions();
            let consistent = expected.len() == self.positions.len()
                && expected
                    .iter()
                    .zip(&self.positions)
                    .all(|(a, b)| a.iter().zip(b).all(|(x, y)| (x - y).abs() <= 1e-9));
            if !consistent {
                v.push(Violation::new(
                    "positions",
                    "explicit positions disagree with the lattice",
                ));
            }
        }
        v
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    pub fn lattice(&self) -> Option<&Lattice> {
        self.lattice.as_ref()
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }
}

/// Unit vector for polar angle θ from +z and azimuth φ from +x.
pub fn direction(theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [st * cp, st * sp, ct]
}

/// Radiation pattern of a single element.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ElementPattern {
    Isotropic,
    /// Field ∝ cos^q θ on the front hemisphere, nothing behind; the peak
    /// gain is then 2(2q+1).
    CosPower {
        q: f64,
    },
    /// Rotationally symmetric gain table interpolated linearly in θ.
    Tabulated {
        theta_deg: Vec<f64>,
        gain_dbi: Vec<f64>,
    },
}

impl ElementPattern {
    /// Cos-power element whose directivity equals `gain_dbi`.
    pub fn cos_power_for_gain(gain_dbi: f64) -> Result<Self> {
        let d = 10f64.powf(gain_dbi / 10.0);
        if !(d >= 2.0) {
            return Err(Error::param(format!(
                "cos-power elements cannot go below 3.01 dBi, got {gain_dbi} dBi"
            )));
        }
        Ok(ElementPattern::CosPower {
            q: 0.5 * (0.5 * d - 1.0),
        })
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        match self {
            ElementPattern::Isotropic => {}
            ElementPattern::CosPower { q } => {
                if !(*q >= 0.0 && q.is_finite()) {
                    v.push(Violation::new(
                        "element.q",
                        "exponent must be finite and non-negative",
                    ));
                }
            }
            ElementPattern::Tabulated {
                theta_deg,
                gain_dbi,
            } => {
                if theta_deg.is_empty() || theta_deg.len() != gain_dbi.len() {
                    v.push(Violation::new(
                        "element.gain_dbi",
                        "needs one gain per angle",
                    ));
                }
                if theta_deg.windows(2).any(|w| !(w[1] > w[0])) {
                    v.push(Violation::new(
                        "element.theta_deg",
                        "angles must be strictly increasing",
                    ));
                }
                if gain_dbi.iter().any(|g| g.is_nan() || *g == f64::INFINITY) {
                    v.push(Violation::new(
                        "element.gain_dbi",
                        "gains must be finite or -inf",
                    ));
                }
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        first_violation(self.violations())
    }

    pub fn peak_gain_dbi(&self) -> f64 {
        match self {
            ElementPattern::Isotropic => 0.0,
            ElementPattern::CosPower { q } => 10.0 * (2.0 * (2.0 * q + 1.0)).log10(),
            ElementPattern::Tabulated { gain_dbi, .. } => {
                gain_dbi.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            }
        }
    }

    /// Gain in dBi towards polar angle `theta` (radians; sign ignored).
    pub fn gain_dbi(&self, theta: f64) -> f64 {
        match self {
            ElementPattern::Isotropic => 0.0,
            ElementPattern::CosPower { q } => {
                let c = theta.cos();
                if c <= 0.0 {
                    f64::NEG_INFINITY
                } else {
                    self.peak_gain_dbi() + 20.0 * q * c.log10()
                }
            }
            ElementPattern::Tabulated {
                theta_deg,
                gain_dbi,
            } => {
                let t = theta.abs().to_degrees();
                let i = theta_deg.partition_point(|a| *a <= t);
                if i == 0 {
                    gain_dbi[0]
                } else if i == theta_deg.len() {
                    gain_dbi[i - 1]
                } else {
                    let w = (t - theta_deg[i - 1]) / (theta_deg[i] - theta_deg[i - 1]);
                    gain_dbi[i - 1] + w * (gain_dbi[i] - gain_dbi[i - 1])
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planar_lattice_is_centred() {
        let g = ArrayGeometry::planar(2, 3, 0.5, 0.7).unwrap();
        assert_eq!(g.len(), 6);
        let sum: f64 = g.positions().iter().map(|p| p[0] + p[1]).sum();
        assert!(sum.abs() < 1e-12);
        assert_eq!(g.positions()[0], [-0.5, -0.35, 0.0]);
    }

    #[test]
    fn empty_and_non_finite_layouts_are_rejected() {
        assert!(ArrayGeometry::from_positions(vec![]).is_err());
        assert!(ArrayGeometry::from_positions(vec![[0.0, f64::NAN, 0.0]]).is_err());
        assert!(ArrayGeometry::linear(4, 0.0).is_err());
    }

    #[test]
    fn inconsistent_lattice_and_positions_are_rejected() {
        let json = r#"{"lattice":{"rows":1,"cols":2,"spacing_x":0.5,"spacing_y":0.5},"positions":[[0,0,0],[1,0,0]]}"#;
        let err = serde_json::from_str::<ArrayGeometry>(json).unwrap_err();
        assert!(err.to_string().contains("disagree"));
        let ok = r#"{"lattice":{"rows":1,"cols":2,"spacing_x":0.5,"spacing_y":0.5},"positions":[[-0.25,0,0],[0.25,0,0]]}"#;
        assert_eq!(serde_json::from_str::<ArrayGeometry>(ok).unwrap().len(), 2);
    }

    #[test]
    fn cos_power_fit_matches_requested_gain() {
        let e = ElementPattern::cos_power_for_gain(9.0).unwrap();
        let ElementPattern::CosPower { q } = e else {
            panic!()
        };
        assert!((q - 1.4858).abs() < 1e-3);
        assert!((e.peak_gain_dbi() - 9.0).abs() < 1e-12);
        assert_eq!(
            e.gain_dbi(std::f64::consts::FRAC_PI_2 + 0.1),
            f64::NEG_INFINITY
        );
        assert!(ElementPattern::cos_power_for_gain(2.0).is_err());
    }

    #[test]
    fn tabulated_pattern_interpolates() {
        let e = ElementPattern::Tabulated {
            theta_deg: vec![0.0, 90.0],
            gain_dbi: vec![6.0, -4.0],
        };
        assert!((e.gain_dbi(45f64.to_radians()) - 1.0).abs() < 1e-12);
        assert!((e.gain_dbi(-45f64.to_radians()) - 1.0).abs() < 1e-12);
        assert_eq!(e.gain_dbi(2.0), -4.0);
        assert_eq!(e.peak_gain_dbi(), 6.0);
    }
}
