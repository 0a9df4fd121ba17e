use std::f64::consts::{PI, TAU};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::pattern::FarFieldPattern;
use crate::error::{first_violation, Error, Result, Violation};

/// Upper envelope on the relative pattern (dB below peak) as a function of
/// off-axis angle from the beam peak, piecewise linear between points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MaskRecord", into = "MaskRecord")]
pub struct RadiationMask {
    points: Vec<(f64, f64)>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaskRecord {
    points: Vec<(f64, f64)>,
}

impl TryFrom<MaskRecord> for RadiationMask {
    type Error = Error;

    fn try_from(r: MaskRecord) -> Result<Self> {
        RadiationMask::new(r.points)
    }
}

impl From<RadiationMask> for MaskRecord {
    fn from(m: RadiationMask) -> Self {
        MaskRecord { points: m.points }
    }
}

impl RadiationMask {
    /// `points` are `(angle_deg, max_relative_db)`.
    pub fn new(points: Vec<(f64, f64)>) -> Result<Self> {
        let m = RadiationMask { points };
        first_violation(m.violations())?;
        Ok(m)
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if self.points.is_empty() {
            v.push(Violation::new("mask.points", "at least one point required"));
        }
        if self
            .points
            .iter()
            .any(|(a, d)| !a.is_finite() || !d.is_finite())
        {
            v.push(Violation::new(
                "mask.points",
                "angles and levels must be finite",
            ));
        }
        if self.points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            v.push(Violation::new(
                "mask.points",
                "angles must be strictly increasing",
            ));
        }
        v
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    /// Angular span `[first, last]` in degrees.
    pub fn span_deg(&self) -> (f64, f64) {
        (self.points[0].0, self.points[self.points.len() - 1].0)
    }

    /// Limit at `angle_deg`, or `None` outside the span.
    pub fn limit_db(&self, angle_deg: f64) -> Option<f64> {
        let (lo, hi) = self.span_deg();
        if angle_deg < lo - 1e-9 || angle_deg > hi + 1e-9 {
            return None;
        }
        let i = self.points.partition_point(|p| p.0 <= angle_deg);
        if i == 0 {
            return Some(self.points[0].1);
        }
        if i == self.points.len() {
            return Some(self.points[i - 1].1);
        }
        let (a0, d0) = self.points[i - 1];
        let (a1, d1) = self.points[i];
        Some(d0 + (angle_deg - a0) / (a1 - a0) * (d1 - d0))
    }

    /// Reads `angle_deg,max_db` rows; `#` lines are comments and a header row
    /// is optional.
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(input);
        let mut points = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse {
                line: i + 1,
                message: e.to_string(),
            })?;
            if rec.len() != 2 {
                return Err(Error::Parse {
                    line: rec.position().map_or(i + 1, |p| p.line() as usize),
                    message: format!("expected 2 columns, found {}", rec.len()),
                });
            }
            let parsed = (rec[0].parse::<f64>(), rec[1].parse::<f64>());
            match parsed {
                (Ok(a), Ok(d)) => points.push((a, d)),
                _ if points.is_empty() && rec[0].eq_ignore_ascii_case("angle_deg") => {}
                _ => {
                    return Err(Error::Parse {
                        line: rec.position().map_or(i + 1, |p| p.line() as usize),
                        message: format!("not a number pair: {:?}", rec.iter().collect::<Vec<_>>()),
                    })
                }
            }
        }
        RadiationMask::new(points)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let err = |e: csv::Error| Error::Config(format!("writing mask CSV: {e}"));
        w.write_record(["angle_deg", "max_db"]).map_err(err)?;
        for (a, d) in &self.points {
            w.write_record([a.to_string(), d.to_string()])
                .map_err(err)?;
        }
        w.flush()
            .map_err(|e| Error::Config(format!("writing mask CSV: {e}")))
    }
}

/// Plane through the z axis at a fixed azimuth.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrincipalCut {
    pub phi_deg: f64,
}

impl PrincipalCut {
    /// x–z plane.
    pub const XZ: PrincipalCut = PrincipalCut { phi_deg: 0.0 };
    /// y–z plane.
    pub const YZ: PrincipalCut = PrincipalCut { phi_deg: 90.0 };
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MaskReport {
    pub pass: bool,
    /// Smallest (mask − relative pattern) over the cut, dB.
    pub worst_margin_db: f64,
    /// Signed polar angle of the worst margin, degrees.
    pub worst_angle_deg: f64,
    pub points_checked: usize,
}

fn same_azimuth(a: f64, b: f64) -> bool {
    let d = (a - b).rem_euclid(TAU);
    d < 1e-9 || TAU - d < 1e-9
}

/// Signed-θ samples `(theta_rad, gain_db)` of `pattern` on `cut`, sorted.
pub fn extract_cut(pattern: &FarFieldPattern, cut: PrincipalCut) -> Result<Vec<(f64, f64)>> {
    let grid = pattern.grid();
    let phi = cut.phi_deg.to_radians();
    let mut out = Vec::new();
    for (ip, &p) in grid.phi_rad().iter().enumerate() {
        let sign = if same_azimuth(p, phi) {
            1.0
        } else if same_azimuth(p, phi + PI) {
            -1.0
        } else {
            continue;
        };
        for (it, &t) in grid.theta_rad().iter().enumerate() {
            out.push((sign * t, pattern.gain_at(it, ip)));
        }
    }
    if out.is_empty() {
        return Err(Error::param(format!(
            "pattern grid has no samples on the φ = {}° cut",
            cut.phi_deg
        )));
    }
    out.sort_by(|a, b| a.0.total_cmp(&b.0));
    out.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12);
    Ok(out)
}

/// Compares the relative pattern on `cut` against `mask`, angles measured
/// from the cut's own peak.
pub fn mask_compliance(
    pattern: &FarFieldPattern,
    mask: &RadiationMask,
    cut: PrincipalCut,
) -> Result<MaskReport> {
    let samples = extract_cut(pattern, cut)?;
    let peak = pattern.peak_gain_dbi();
    let (t_peak, _) =
        samples.iter().copied().fold(
            (0.0, f64::NEG_INFINITY),
            |b, s| if s.1 > b.1 { s } else { b },
        );
    let mut worst = (f64::INFINITY, 0.0);
    for &(t, g) in &samples {
        let off = (t - t_peak).abs().to_degrees();
        let limit = mask.limit_db(off).ok_or_else(|| {
            Error::param(format!(
                "mask spans {:?}° but the cut reaches {off:.2}° off peak",
                mask.span_deg()
            ))
        })?;
        let margin = limit - (g - peak);
        if margin < worst.0 {
            worst = (margin, t.to_degrees());
        }
    }
    Ok(MaskReport {
        pass: worst.0 >= -1e-9,
        worst_margin_db: worst.0,
        worst_angle_deg: worst.1,
        points_checked: samples.len(),
    })
}
