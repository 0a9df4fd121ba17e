use std::path::{Path, PathBuf};

use mmw_core::antenna::{
    directivity, grating_lobe_limit, mask_compliance, quantize_phase, steering_weights,
    total_pattern, transmitarray_budget, transmitarray_pattern, Coverage, FarFieldPattern,
    PatternGrid, PrincipalCut,
};
use mmw_core::ofdm::run_bler;
use mmw_core::pa::{
    apply_gmp, apply_poly3, bussgang_alpha, bussgang_distortion_power, bussgang_monte_carlo,
    fit_gmp, DistortionFormula, GmpModel, GmpStructure, GmpTerm, Ridge,
};
use mmw_core::phase_noise::{
    eval_pll_psd, eval_pole_zero_psd, loop_bandwidth_hz, synthesize_phase_with, PllPnParams,
    PoleZeroPnParams, SynthesisOptions,
};
use mmw_core::signal::{fill_gaussian_complex, welch_psd, Window};
use mmw_core::{
    ArrayGeometry, BlerExperiment, Complex64, ComplexSequence, ElementPattern, Poly3Params,
    RadiationMask, RngStream, TransmitarrayConfig, Violation,
};
use serde::de::DeserializeOwned;
use serde::Deserialize;
use serde_json::{json, Value as Json};

use crate::config::{ExperimentConfig, ExperimentKind};
use crate::error::{CliError, CliResult};
use crate::output::DataTable;

/// Tables plus a free-form summary produced by one experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub tables: Vec<DataTable>,
    pub summary: Json,
}

trait Experiment: DeserializeOwned {
    fn violations(&self, base: &Path) -> Vec<Violation>;
    fn run(&self, seed: u64, base: &Path) -> CliResult<Artifacts>;
}

fn prefixed(prefix: &str, v: Vec<Violation>) -> Vec<Violation> {
    v.into_iter()
        .map(|v| Violation::new(format!("{prefix}.{}", v.field), v.message))
        .collect()
}

fn decode<T: Experiment>(params: &toml::Value) -> Result<T, Vec<Violation>> {
    params
        .clone()
        .try_into::<T>()
        .map_err(|e| vec![Violation::new("params", e.message().trim_end())])
}

fn positive(v: &mut Vec<Violation>, field: &str, x: f64) {
    if !(x > 0.0 && x.is_finite()) {
        v.push(Violation::new(
            field,
            format!("must be positive and finite, got {x}"),
        ));
    }
}

/// Pole/zero block with the carrier in GHz, checked field by field.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PoleZeroBlock {
    psd0_dbc_hz: f64,
    poles_mhz: Vec<f64>,
    zeros_mhz: Vec<f64>,
    base_carrier_ghz: f64,
}

impl PoleZeroBlock {
    fn params(&self) -> PoleZeroPnParams {
        PoleZeroPnParams {
            psd0_dbc_hz: self.psd0_dbc_hz,
            poles_mhz: self.poles_mhz.clone(),
            zeros_mhz: self.zeros_mhz.clone(),
            base_carrier_hz: self.base_carrier_ghz * 1e9,
        }
    }

    fn violations(&self, at: &str) -> Vec<Violation> {
        prefixed(at, self.params().violations())
            .into_iter()
            .map(|v| {
                Violation::new(
                    v.field.replace("base_carrier_hz", "base_carrier_ghz"),
                    v.message,
                )
            })
            .collect()
    }
}

fn default_ppd() -> usize {
    20
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PnPsd {
    pole_zero: Option<PoleZeroBlock>,
    pll: Option<PllPnParams>,
    /// Carrier for the pole/zero model; its own base carrier when absent.
    carrier_ghz: Option<f64>,
    f_min_hz: f64,
    f_max_hz: f64,
    #[serde(default = "default_ppd")]
    points_per_decade: usize,
}

impl PnPsd {
    fn offsets(&self) -> Vec<f64> {
        let decades = (self.f_max_hz / self.f_min_hz).log10();
        let n = (decades * self.points_per_decade as f64).round() as usize;
        (0..=n)
            .map(|i| self.f_min_hz * 10f64.powf(decades * i as f64 / n.max(1) as f64))
            .collect()
    }
}

impl Experiment for PnPsd {
    fn violations(&self, _: &Path) -> Vec<Violation> {
        let mut v = Vec::new();
        match (&self.pole_zero, &self.pll) {
            (Some(p), None) => v.extend(p.violations("params.pole_zero")),
            (None, Some(p)) => v.extend(prefixed("params.pll", p.violations())),
            _ => v.push(Violation::new(
                "params",
                "exactly one of `pole_zero` or `pll` is required",
            )),
        }
        if let Some(c) = self.carrier_ghz {
            positive(&mut v, "params.carrier_ghz", c);
        }
        positive(&mut v, "params.f_min_hz", self.f_min_hz);
        if !(self.f_max_hz > self.f_min_hz && self.f_max_hz.is_finite()) {
            v.push(Violation::new("params.f_max_hz", "must exceed f_min_hz"));
        }
        if self.points_per_decade == 0 {
            v.push(Violation::new(
                "params.points_per_decade",
                "must be at least 1",
            ));
        }
        v
    }

    fn run(&self, _: u64, _: &Path) -> CliResult<Artifacts> {
        let mut t = DataTable::new("psd", vec!["offset_hz", "psd_dbc_hz"]);
        let summary = if let Some(pz) = &self.pole_zero {
            let params = pz.params();
            let carrier = self.carrier_ghz.map_or(params.base_carrier_hz, |c| c * 1e9);
            for f in self.offsets() {
                t.push(vec![
                    f.into(),
                    eval_pole_zero_psd(&params, f, carrier)?.into(),
                ]);
            }
            json!({ "model": "pole-zero", "carrier_hz": carrier })
        } else {
            let p = self.pll.as_ref().expect("validated");
            for f in self.offsets() {
                t.push(vec![f.into(), eval_pll_psd(p, f)?.into()]);
            }
            json!({ "model": "pll", "loop_bandwidth_hz": loop_bandwidth_hz(p)? })
        };
        Ok(Artifacts {
            tables: vec![t],
            summary,
        })
    }
}

fn default_segment() -> usize {
    8192
}

fn default_overlap() -> f64 {
    0.5
}

fn default_band() -> [f64; 2] {
    [1e4, 1e7]
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PnSynth {
    pole_zero: PoleZeroBlock,
    carrier_ghz: f64,
    sample_rate_hz: f64,
    n_samples: usize,
    #[serde(default = "default_segment")]
    segment_len: usize,
    #[serde(default = "default_overlap")]
    overlap: f64,
    warmup_samples: Option<usize>,
    /// Offsets over which the summary reports the largest deviation.
    #[serde(default = "default_band")]
    band_hz: [f64; 2],
}

impl Experiment for PnSynth {
    fn violations(&self, _: &Path) -> Vec<Violation> {
        let mut v = self.pole_zero.violations("params.pole_zero");
        positive(&mut v, "params.carrier_ghz", self.carrier_ghz);
        positive(&mut v, "params.sample_rate_hz", self.sample_rate_hz);
        if self.segment_len < 8 || self.segment_len > self.n_samples {
            v.push(Violation::new(
                "params.segment_len",
                "must lie in 8..=n_samples",
            ));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            v.push(Violation::new("params.overlap", "must lie in [0, 1)"));
        }
        if !(self.band_hz[0] > 0.0 && self.band_hz[1] > self.band_hz[0]) {
            v.push(Violation::new("params.band_hz", "needs 0 < low < high"));
        }
        v
    }

    fn run(&self, seed: u64, _: &Path) -> CliResult<Artifacts> {
        let params = self.pole_zero.params();
        let carrier = self.carrier_ghz * 1e9;
        let opts = SynthesisOptions {
            warmup_samples: self.warmup_samples,
            ..Default::default()
        };
        let mut rng = RngStream::new(seed, 0);
        let theta = synthesize_phase_with(
            &params,
            carrier,
            self.sample_rate_hz,
            self.n_samples,
            &mut rng,
            &opts,
        )?;
        let est = welch_psd(
            &theta.to_sequence(),
            self.segment_len,
            self.overlap,
            Window::Hann,
        )?;
        let mut t = DataTable::new("psd", vec!["offset_hz", "welch_dbc_hz", "model_dbc_hz"]);
        let mut worst: f64 = 0.0;
        for (f, w) in est.positive_bins() {
            let m = eval_pole_zero_psd(&params, f, carrier)?;
            if (self.band_hz[0]..=self.band_hz[1]).contains(&f) {
                worst = worst.max((w - m).abs());
            }
            t.push(vec![f.into(), w.into(), m.into()]);
        }
        Ok(Artifacts {
            tables: vec![t],
            summary: json!({
                "n_samples": self.n_samples,
                "mean_square_phase_rad2": theta.mean_square(),
                "resolution_hz": est.resolution_hz(),
                "band_hz": self.band_hz,
                "max_abs_deviation_db": worst,
            }),
        })
    }
}

fn default_mc() -> usize {
    1_000_000
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PaBussgang {
    theta1: Complex64,
    theta2: Complex64,
    sigma_x2: Vec<f64>,
    #[serde(default = "default_mc")]
    mc_samples: usize,
}

impl Experiment for PaBussgang {
    fn violations(&self, _: &Path) -> Vec<Violation> {
        let mut v = Vec::new();
        if let Err(e) = Poly3Params::new(self.theta1, self.theta2) {
            v.push(Violation::new("params.theta1", e.to_string()));
        }
        if self.sigma_x2.is_empty() {
            v.push(Violation::new(
                "params.sigma_x2",
                "needs at least one input power",
            ));
        }
        for (i, s) in self.sigma_x2.iter().enumerate() {
            positive(&mut v, &format!("params.sigma_x2[{i}]"), *s);
        }
        if self.mc_samples == 0 {
            v.push(Violation::new("params.mc_samples", "must be at least 1"));
        }
        v
    }

    fn run(&self, seed: u64, _: &Path) -> CliResult<Artifacts> {
        let p = Poly3Params::new(self.theta1, self.theta2)?;
        let mut t = DataTable::new(
            "bussgang",
            vec![
                "sigma_x2",
                "alpha_re",
                "alpha_im",
                "alpha_mc_re",
                "alpha_mc_im",
                "sigma_w2_mc",
                "sigma_w2_mc_ci",
                "sigma_w2_printed",
                "sigma_w2_gaussian",
                "printed_over_mc_db",
            ],
        );
        for (i, &s2) in self.sigma_x2.iter().enumerate() {
            let alpha = bussgang_alpha(&p, s2)?;
            let mc = bussgang_monte_carlo(&p, s2, self.mc_samples, seed.wrapping_add(i as u64))?;
            let printed = bussgang_distortion_power(&p, s2, DistortionFormula::AsPrinted)?.value;
            let gaussian = 2.0 * p.theta2.norm_sqr() * s2.powi(3);
            t.push(vec![
                s2.into(),
                alpha.re.into(),
                alpha.im.into(),
                mc.alpha.re.into(),
                mc.alpha.im.into(),
                mc.sigma_w2.into(),
                mc.sigma_w2_ci.into(),
                printed.into(),
                gaussian.into(),
                (10.0 * (printed / mc.sigma_w2).log10()).into(),
            ]);
        }
        Ok(Artifacts {
            tables: vec![t],
            summary: json!({ "mc_samples": self.mc_samples }),
        })
    }
}

fn default_power() -> f64 {
    1.0
}

fn default_scale() -> f64 {
    0.1
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
enum GmpReference {
    /// Memoryless third-order PA.
    Poly3 {
        theta1: Complex64,
        theta2: Complex64,
    },
    /// A GMP of the fitted structure with seeded coefficients: 1 on the
    /// linear tap, CN(0, scale²/(1+k)²) elsewhere.
    RandomGmp {
        #[serde(default = "default_scale")]
        scale: f64,
    },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct PaGmpFit {
    structure: GmpStructure,
    n_samples: usize,
    #[serde(default = "default_power")]
    input_power: f64,
    reference: GmpReference,
    /// Output SNR of additive measurement noise; noiseless when absent.
    snr_db: Option<f64>,
    ridge: Option<f64>,
}

fn term_label(t: &GmpTerm) -> (String, usize, usize, usize) {
    match *t {
        GmpTerm::Aligned { k, l } => ("aligned".into(), k, l, 0),
        GmpTerm::Lagging { k, l, m } => ("lagging".into(), k, l, m),
        GmpTerm::Leading { k, l, m } => ("leading".into(), k, l, m),
        GmpTerm::Secondary { k, l } => ("secondary".into(), k, l, 0),
    }
}

impl Experiment for PaGmpFit {
    fn violations(&self, _: &Path) -> Vec<Violation> {
        let mut v = Vec::new();
        if let Err(e) = self.structure.validate() {
            v.push(Violation::new("params.structure", e.to_string()));
        } else if self.n_samples < self.structure.basis_size() {
            v.push(Violation::new(
                "params.n_samples",
                format!(
                    "needs at least {} samples for the basis",
                    self.structure.basis_size()
                ),
            ));
        }
        positive(&mut v, "params.input_power", self.input_power);
        if let GmpReference::Poly3 { theta1, theta2 } = &self.reference {
            if let Err(e) = Poly3Params::new(*theta1, *theta2) {
                v.push(Violation::new("params.reference", e.to_string()));
            }
        }
        if let Some(s) = self.snr_db {
            if !s.is_finite() {
                v.push(Violation::new("params.snr_db", "must be finite"));
            }
        }
        if let Some(r) = self.ridge {
            if !(r >= 0.0 && r.is_finite()) {
                v.push(Violation::new("params.ridge", "must be non-negative"));
            }
        }
        v
    }

    fn run(&self, seed: u64, _: &Path) -> CliResult<Artifacts> {
        let root = RngStream::new(seed, 0);
        let fs = 1.0;
        let gaussian = |stream: u64| -> CliResult<ComplexSequence> {
            let mut x = vec![Complex64::new(0.0, 0.0); self.n_samples];
            fill_gaussian_complex(&mut root.substream(stream), &mut x, self.input_power);
            Ok(ComplexSequence::new(x, fs)?)
        };
        let x = gaussian(1)?;
        let secondary = if self.structure.secondary {
            Some(gaussian(2)?)
        } else {
            None
        };
        let terms = self.structure.terms();
        let (y, truth) = match &self.reference {
            GmpReference::Poly3 { theta1, theta2 } => {
                (apply_poly3(&Poly3Params::new(*theta1, *theta2)?, &x)?, None)
            }
            GmpReference::RandomGmp { scale } => {
                let mut rng = root.substream(3);
                let coefficients: Vec<Complex64> = terms
                    .iter()
                    .enumerate()
                    .map(|(i, t)| {
                        if i == 0 {
                            return Complex64::new(1.0, 0.0);
                        }
                        let k = term_label(t).1;
                        let sd = scale / (1.0 + k as f64);
                        Complex64::new(rng.standard_normal(), rng.standard_normal())
                            * sd
                            * std::f64::consts::FRAC_1_SQRT_2
                    })
                    .collect();
                let model = GmpModel::new(self.structure, coefficients)?;
                (apply_gmp(&model, &x, secondary.as_ref())?, Some(model))
            }
        };
        let y = match self.snr_db {
            None => y,
            Some(snr) => {
                let mut noise = vec![Complex64::new(0.0, 0.0); y.len()];
                fill_gaussian_complex(
                    &mut root.substream(4),
                    &mut noise,
                    y.mean_power() * 10f64.powf(-snr / 10.0),
                );
                let noisy = y.samples().iter().zip(&noise).map(|(a, b)| a + b).collect();
                ComplexSequence::new(noisy, fs)?
            }
        };
        let ridge = self.ridge.map_or(Ridge::Auto, Ridge::Value);
        let (model, report) = fit_gmp(&x, &y, &self.structure, secondary.as_ref(), ridge)?;
        let mut t = DataTable::new(
            "coefficients",
            vec![
                "index", "term", "k", "l", "m", "re", "im", "true_re", "true_im",
            ],
        );
        for (i, (term, c)) in terms.iter().zip(model.coefficients()).enumerate() {
            let (name, k, l, m) = term_label(term);
            let tv = truth.as_ref().map(|g| g.coefficients()[i]);
            t.push(vec![
                i.into(),
                name.into(),
                k.into(),
                l.into(),
                m.into(),
                c.re.into(),
                c.im.into(),
                tv.map_or(f64::NAN, |v| v.re).into(),
                tv.map_or(f64::NAN, |v| v.im).into(),
            ]);
        }
        Ok(Artifacts {
            tables: vec![t],
            summary: json!({
                "basis_size": terms.len(),
                "nmse_db": report.nmse_db,
                "condition_estimate": report.condition_estimate,
                "ridge": report.ridge,
            }),
        })
    }
}

fn default_cut_step() -> f64 {
    0.5
}

fn default_sphere_step() -> f64 {
    2.0
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "coverage", rename_all = "kebab-case", deny_unknown_fields)]
enum GridSpec {
    Cut {
        #[serde(default)]
        phi_deg: f64,
        #[serde(default = "default_cut_step")]
        step_deg: f64,
    },
    Sphere {
        #[serde(default = "default_sphere_step")]
        step_deg: f64,
    },
    Hemisphere {
        #[serde(default = "default_sphere_step")]
        step_deg: f64,
    },
}

impl GridSpec {
    fn step(&self) -> f64 {
        match *self {
            GridSpec::Cut { step_deg, .. }
            | GridSpec::Sphere { step_deg }
            | GridSpec::Hemisphere { step_deg } => step_deg,
        }
    }

    fn grid(&self) -> CliResult<PatternGrid> {
        Ok(match *self {
            GridSpec::Cut { phi_deg, step_deg } => PatternGrid::cut(phi_deg, step_deg)?,
            GridSpec::Sphere { step_deg } => PatternGrid::sphere(step_deg)?,
            GridSpec::Hemisphere { step_deg } => PatternGrid::hemisphere(step_deg)?,
        })
    }
}

/// Mask given inline or as a CSV file (relative to the config).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct MaskSpec {
    points: Option<Vec<(f64, f64)>>,
    file: Option<PathBuf>,
    #[serde(default)]
    cut_phi_deg: f64,
}

impl MaskSpec {
    fn load(&self, base: &Path) -> CliResult<RadiationMask> {
        match (&self.points, &self.file) {
            (Some(p), None) => Ok(RadiationMask::new(p.clone())?),
            (None, Some(f)) => {
                let path = base.join(f);
                let file = std::fs::File::open(&path).map_err(|e| CliError::io(&path, e))?;
                Ok(RadiationMask::read_csv(file)?)
            }
            _ => Err(CliError::Invalid(vec![Violation::new(
                "mask",
                "give exactly one of `points` or `file`",
            )])),
        }
    }

    fn violations(&self, at: &str, base: &Path) -> Vec<Violation> {
        match self.load(base) {
            Ok(_) => Vec::new(),
            Err(CliError::Invalid(v)) => v
                .into_iter()
                .map(|x| Violation::new(at, x.message))
                .collect(),
            Err(e) => vec![Violation::new(at, e.to_string())],
        }
    }

    fn check(&self, pattern: &FarFieldPattern, base: &Path) -> CliResult<Json> {
        let mask = self.load(base)?;
        let report = mask_compliance(
            pattern,
            &mask,
            PrincipalCut {
                phi_deg: self.cut_phi_deg,
            },
        )?;
        Ok(serde_json::to_value(report).expect("report serializes"))
    }
}

fn pattern_table(p: &FarFieldPattern) -> DataTable {
    let mut t = DataTable::new("pattern", vec!["theta_deg", "phi_deg", "gain_dbi"]);
    for (i, g) in p.gain_db().iter().enumerate() {
        let (th, ph) = p.grid().point(i);
        t.push(vec![
            th.to_degrees().into(),
            ph.to_degrees().into(),
            (*g).into(),
        ]);
    }
    t
}

fn pattern_summary(p: &FarFieldPattern) -> CliResult<Json> {
    let (th, ph) = p.peak_direction();
    let mut s = json!({
        "peak_gain_dbi": p.peak_gain_dbi(),
        "peak_theta_deg": th.to_degrees(),
        "peak_phi_deg": ph.to_degrees(),
    });
    if p.grid().coverage() != Coverage::Cut {
        let d = directivity(p)?;
        s["directivity_dbi"] = json!(d.dbi);
        s["quadrature_error_db"] = json!(d.quadrature_error_db);
        s["directivity_warning"] = json!(d.warning);
    }
    Ok(s)
}

fn steering_violations(v: &mut Vec<Violation>, at: &str, theta_deg: f64, phi_deg: f64) {
    if !(theta_deg.is_finite() && phi_deg.is_finite()) || theta_deg.abs() > 90.0 {
        v.push(Violation::new(at, "steering θ must lie within ±90°"));
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ArrayPattern {
    geometry: ArrayGeometry,
    #[serde(default = "isotropic")]
    element: ElementPattern,
    #[serde(default)]
    steer_theta_deg: f64,
    #[serde(default)]
    steer_phi_deg: f64,
    phase_bits: Option<u32>,
    grid: GridSpec,
    mask: Option<MaskSpec>,
}

fn isotropic() -> ElementPattern {
    ElementPattern::Isotropic
}

impl Experiment for ArrayPattern {
    fn violations(&self, base: &Path) -> Vec<Violation> {
        let mut v = prefixed("params.geometry", self.geometry.violations());
        v.extend(prefixed("params.element", self.element.violations()));
        steering_violations(
            &mut v,
            "params.steer_theta_deg",
            self.steer_theta_deg,
            self.steer_phi_deg,
        );
        if let Some(b) = self.phase_bits {
            if !(1..=16).contains(&b) {
                v.push(Violation::new("params.phase_bits", "must lie in 1..=16"));
            }
        }
        positive(&mut v, "params.grid.step_deg", self.grid.step());
        if let Some(m) = &self.mask {
            v.extend(m.violations("params.mask", base));
        }
        v
    }

    fn run(&self, _: u64, base: &Path) -> CliResult<Artifacts> {
        let mut w = steering_weights(
            &self.geometry,
            self.steer_theta_deg.to_radians(),
            self.steer_phi_deg.to_radians(),
        )?;
        if let Some(b) = self.phase_bits {
            w = quantize_phase(&w, b)?;
        }
        let p = total_pattern(&self.geometry, &w, &self.element, &self.grid.grid()?)?;
        let mut summary = pattern_summary(&p)?;
        if let Some(l) = self.geometry.lattice() {
            summary["grating_lobe_limit_deg"] =
                json!(grating_lobe_limit(l.spacing_x.max(l.spacing_y))?);
        }
        if let Some(m) = &self.mask {
            summary["mask"] = m.check(&p, base)?;
        }
        Ok(Artifacts {
            tables: vec![pattern_table(&p)],
            summary,
        })
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaPatternSpec {
    #[serde(default)]
    phi_deg: f64,
    #[serde(default = "default_cut_step")]
    step_deg: f64,
    #[serde(default)]
    steer_theta_deg: f64,
    #[serde(default)]
    steer_phi_deg: f64,
    mask: Option<MaskSpec>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct TaBudget {
    transmitarray: TransmitarrayConfig,
    pattern: Option<TaPatternSpec>,
}

impl Experiment for TaBudget {
    fn violations(&self, base: &Path) -> Vec<Violation> {
        let mut v = prefixed("params.transmitarray", self.transmitarray.violations());
        if let Some(p) = &self.pattern {
            positive(&mut v, "params.pattern.step_deg", p.step_deg);
            steering_violations(
                &mut v,
                "params.pattern.steer_theta_deg",
                p.steer_theta_deg,
                p.steer_phi_deg,
            );
            if let Some(m) = &p.mask {
                v.extend(m.violations("params.pattern.mask", base));
            }
        }
        v
    }

    fn run(&self, _: u64, base: &Path) -> CliResult<Artifacts> {
        let b = transmitarray_budget(&self.transmitarray)?;
        let mut t = DataTable::new(
            "budget",
            vec![
                "aperture_directivity_dbi",
                "spillover_loss_db",
                "taper_loss_db",
                "quantization_loss_db",
                "total_loss_db",
                "net_gain_dbi",
            ],
        );
        t.push(vec![
            b.aperture_directivity_dbi.into(),
            b.spillover_loss_db.into(),
            b.taper_loss_db.into(),
            b.quantization_loss_db.into(),
            b.total_loss_db.into(),
            b.net_gain_dbi.into(),
        ]);
        let mut summary = serde_json::to_value(&b).expect("budget serializes");
        let mut tables = vec![t];
        if let Some(ps) = &self.pattern {
            let grid = PatternGrid::cut(ps.phi_deg, ps.step_deg)?;
            let p = transmitarray_pattern(
                &self.transmitarray,
                ps.steer_theta_deg.to_radians(),
                ps.steer_phi_deg.to_radians(),
                &grid,
            )?;
            summary["pattern"] = pattern_summary(&p)?;
            if let Some(m) = &ps.mask {
                summary["mask"] = m.check(&p, base)?;
            }
            tables.push(pattern_table(&p));
        }
        Ok(Artifacts { tables, summary })
    }
}

impl Experiment for BlerExperiment {
    fn violations(&self, _: &Path) -> Vec<Violation> {
        prefixed("params", BlerExperiment::violations(self))
    }

    fn run(&self, seed: u64, _: &Path) -> CliResult<Artifacts> {
        let points = run_bler(self, &RngStream::new(seed, 0))?;
        let mut t = DataTable::new(
            "bler",
            vec![
                "snr_db",
                "bler",
                "ci_halfwidth",
                "trials",
                "block_errors",
                "ci_low",
                "ci_high",
            ],
        );
        for p in &points {
            t.push(vec![
                p.snr_db.into(),
                p.bler.into(),
                p.ci_halfwidth.into(),
                p.trials.into(),
                p.block_errors.into(),
                p.ci_low.into(),
                p.ci_high.into(),
            ]);
        }
        let first = &points[0];
        Ok(Artifacts {
            tables: vec![t],
            summary: json!({
                "data_res": first.data_res,
                "info_bits": first.info_bits,
                "spectral_efficiency": first.spectral_efficiency,
            }),
        })
    }
}

fn checked<T: Experiment>(cfg: &ExperimentConfig, base: &Path) -> Result<T, Vec<Violation>> {
    let e: T = decode(&cfg.params)?;
    let v = e.violations(base);
    if v.is_empty() {
        Ok(e)
    } else {
        Err(v)
    }
}

fn run_kind<T: Experiment>(cfg: &ExperimentConfig, base: &Path) -> CliResult<Artifacts> {
    checked::<T>(cfg, base)
        .map_err(CliError::Invalid)?
        .run(cfg.seed, base)
}

fn check_kind<T: Experiment>(cfg: &ExperimentConfig, base: &Path) -> Vec<Violation> {
    checked::<T>(cfg, base).err().unwrap_or_default()
}

/// Every violated invariant of the parameter block, located by path.
pub fn param_violations(cfg: &ExperimentConfig, base: &Path) -> Vec<Violation> {
    match cfg.kind {
        ExperimentKind::PnPsd => check_kind::<PnPsd>(cfg, base),
        ExperimentKind::PnSynth => check_kind::<PnSynth>(cfg, base),
        ExperimentKind::PaBussgang => check_kind::<PaBussgang>(cfg, base),
        ExperimentKind::PaGmpFit => check_kind::<PaGmpFit>(cfg, base),
        ExperimentKind::ArrayPattern => check_kind::<ArrayPattern>(cfg, base),
        ExperimentKind::TaBudget => check_kind::<TaBudget>(cfg, base),
        ExperimentKind::LinkBler => check_kind::<BlerExperiment>(cfg, base),
    }
}

pub fn execute(cfg: &ExperimentConfig, base: &Path) -> CliResult<Artifacts> {
    match cfg.kind {
        ExperimentKind::PnPsd => run_kind::<PnPsd>(cfg, base),
        ExperimentKind::PnSynth => run_kind::<PnSynth>(cfg, base),
        ExperimentKind::PaBussgang => run_kind::<PaBussgang>(cfg, base),
        ExperimentKind::PaGmpFit => run_kind::<PaGmpFit>(cfg, base),
        ExperimentKind::ArrayPattern => run_kind::<ArrayPattern>(cfg, base),
        ExperimentKind::TaBudget => run_kind::<TaBudget>(cfg, base),
        ExperimentKind::LinkBler => run_kind::<BlerExperiment>(cfg, base),
    }
}
