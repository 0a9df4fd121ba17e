use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::ComplexSequence;

/// Shape of a generalized memory polynomial.
///
/// Nonlinearity orders k run over the odd values 1, 3, …, `order`. The basis
/// is laid out in a fixed order:
///
/// 1. aligned terms x[n−l]·|x[n−l]|^(k−1), k outer, l inner;
/// 2. lagging terms x[n−l]·|x[n−l−m]|^(k−1), k ≥ 3, looping k, l, m;
/// 3. leading terms x[n−l]·|x[n−l+m]|^(k−1), same loops;
/// 4. with `secondary`, coupling terms x[n−l]·|s[n−l]|^(k−1), k ≥ 3, k then l,
///    where s is the secondary (coupled) input.
///
/// Samples outside the record are zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GmpStructure {
    pub order: usize,
    pub memory_depth: usize,
    pub cross_terms: usize,
    #[serde(default)]
    pub secondary: bool,
}

/// One basis function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GmpTerm {
    Aligned { k: usize, l: usize },
    Lagging { k: usize, l: usize, m: usize },
    Leading { k: usize, l: usize, m: usize },
    Secondary { k: usize, l: usize },
}

impl GmpStructure {
    pub fn new(
        order: usize,
        memory_depth: usize,
        cross_terms: usize,
        secondary: bool,
    ) -> Result<Self> {
        let s = GmpStructure {
            order,
            memory_depth,
            cross_terms,
            secondary,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.order == 0 || self.order % 2 == 0 {
            return Err(Error::param(format!(
                "nonlinearity order must be odd, got {}",
                self.order
            )));
        }
        if self.memory_depth == 0 {
            return Err(Error::param("memory depth must be at least 1"));
        }
        Ok(())
    }

    pub fn terms(&self) -> Vec<GmpTerm> {
        let ks = |from: usize| (from..=self.order).step_by(2);
        let lags = 0..self.memory_depth;
        let mut t = Vec::with_capacity(self.basis_size());
        for k in ks(1) {
            for l in lags.clone() {
                t.push(GmpTerm::Aligned { k, l });
            }
        }
        for k in ks(3) {
            for l in lags.clone() {
                for m in 1..=self.cross_terms {
                    t.push(GmpTerm::Lagging { k, l, m });
                }
            }
        }
        for k in ks(3) {
            for l in lags.clone() {
                for m in 1..=self.cross_terms {
                    t.push(GmpTerm::Leading { k, l, m });
                }
            }
        }
        if self.secondary {
            for k in ks(3) {
                for l in lags.clone() {
                    t.push(GmpTerm::Secondary { k, l });
                }
            }
        }
        t
    }

    pub fn basis_size(&self) -> usize {
        let orders = self.order.div_ceil(2);
        let nonlinear = orders - 1;
        let l = self.memory_depth;
        orders * l
            + 2 * nonlinear * l * self.cross_terms
            + if self.secondary { nonlinear * l } else { 0 }
    }
}

/// GMP coefficients together with their structure.
#[derive(Debug, Clone, PartialEq)]
pub struct GmpModel {
    structure: GmpStructure,
    coefficients: Vec<Complex64>,
}

impl GmpModel {
    pub fn new(structure: GmpStructure, coefficients: Vec<Complex64>) -> Result<Self> {
        structure.validate()?;
        if coefficients.len() != structure.basis_size() {
            return Err(Error::Dimension {
                what: "GMP coefficient count",
                expected: structure.basis_size(),
                got: coefficients.len(),
            });
        }
        Ok(GmpModel {
            structure,
            coefficients,
        })
    }

    pub fn structure(&self) -> &GmpStructure {
        &self.structure
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }
}

fn at(x: &[Complex64], i: isize) -> Complex64 {
    if i >= 0 && (i as usize) < x.len() {
        x[i as usize]
    } else {
        Complex64::new(0.0, 0.0)
    }
}

fn envelope(v: Complex64, k: usize) -> f64 {
    v.norm_sqr().powi(((k - 1) / 2) as i32)
}

impl GmpTerm {
    fn value(&self, x: &[Complex64], s: &[Complex64], n: usize) -> Complex64 {
        let n = n as isize;
        match *self {
            GmpTerm::Aligned { k, l } => {
                let v = at(x, n - l as isize);
                v * envelope(v, k)
            }
            GmpTerm::Lagging { k, l, m } => {
                at(x, n - l as isize) * envelope(at(x, n - l as isize - m as isize), k)
            }
            GmpTerm::Leading { k, l, m } => {
                at(x, n - l as isize) * envelope(at(x, n - l as isize + m as isize), k)
            }
            GmpTerm::Secondary { k, l } => {
                at(x, n - l as isize) * envelope(at(s, n - l as isize), k)
            }
        }
    }
}

fn check_inputs<'a>(
    structure: &GmpStructure,
    x: &'a ComplexSequence,
    secondary: Option<&'a ComplexSequence>,
) -> Result<&'a [Complex64]> {
    match (structure.secondary, secondary) {
        (true, None) => Err(Error::param(
            "structure uses a secondary input but none was supplied",
        )),
        (true, Some(s)) if s.len() != x.len() => Err(Error::Dimension {
            what: "secondary input length",
            expected: x.len(),
            got: s.len(),
        }),
        (true, Some(s)) => Ok(s.samples()),
        (false, _) => Ok(&[]),
    }
}

/// Basis matrix Φ (samples × basis functions) in the documented term order.
pub fn gmp_basis(
    structure: &GmpStructure,
    x: &ComplexSequence,
    secondary: Option<&ComplexSequence>,
) -> Result<DMatrix<Complex64>> {
    structure.validate()?;
    let s = check_inputs(structure, x, secondary)?;
    let terms = structure.terms();
    let xs = x.samples();
    let mut phi = DMatrix::zeros(xs.len(), terms.len());
    for (j, t) in terms.iter().enumerate() {
        for (n, v) in phi.column_mut(j).iter_mut().enumerate() {
            *v = t.value(xs, s, n);
        }
    }
    Ok(phi)
}

pub fn apply_gmp(
    model: &GmpModel,
    x: &ComplexSequence,
    secondary: Option<&ComplexSequence>,
) -> Result<ComplexSequence> {
    let s = check_inputs(&model.structure, x, secondary)?;
    let xs = x.samples();
    let mut y = vec![Complex64::new(0.0, 0.0); xs.len()];
    for (t, c) in model.structure.terms().iter().zip(&model.coefficients) {
        if *c == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (n, out) in y.iter_mut().enumerate() {
            *out += c * t.value(xs, s, n);
        }
    }
    ComplexSequence::new(y, x.sample_rate_hz())
}

/// Tikhonov weight for [`fit_gmp`].
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Ridge {
    /// 1e−10 × trace(ΦᴴΦ).
    #[default]
    Auto,
    Value(f64),
}

/// Outcome of a least-squares GMP identification.
#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    pub nmse_db: f64,
    /// 2-norm condition number of the column-equilibrated basis
    /// (ridge-augmented when a ridge is applied).
    pub condition_estimate: f64,
    pub ridge: f64,
}

impl FitReport {
    /// `key = value` lines.
    pub fn to_key_value(&self) -> String {
        format!(
            "nmse_db = {:e}\ncondition_estimate = {:e}\nridge = {:e}\n",
            self.nmse_db, self.condition_estimate, self.ridge
        )
    }
}

/// Minimizes ‖y − Φc‖² + ridge·‖c‖² by Householder QR on the
/// column-equilibrated, ridge-augmented system.
pub fn fit_gmp(
    x: &ComplexSequence,
    y: &ComplexSequence,
    structure: &GmpStructure,
    secondary: Option<&ComplexSequence>,
    ridge: Ridge,
) -> Result<(GmpModel, FitReport)> {
    structure.validate()?;
    if x.len() != y.len() {
        return Err(Error::Dimension {
            what: "output length",
            expected: x.len(),
            got: y.len(),
        });
    }
    let p = structure.basis_size();
    if x.len() < 10 * p {
        return Err(Error::param(format!(
            "need at least {} samples for {p} basis functions, got {}",
            10 * p,
            x.len()
        )));
    }
    let phi = gmp_basis(structure, x, secondary)?;
    let n = phi.nrows();
    let norms: Vec<f64> = phi.column_iter().map(|c| c.norm()).collect();
    let trace: f64 = norms.iter().map(|v| v * v).sum();
    let lambda = match ridge {
        Ridge::Auto => 1e-10 * trace,
        Ridge::Value(v) if v >= 0.0 && v.is_finite() => v,
        Ridge::Value(v) => {
            return Err(Error::param(format!("ridge must be non-negative, got {v}")))
        }
    };
    if lambda == 0.0 {
        if let Some(j) = norms.iter().position(|&v| v == 0.0) {
            return Err(Error::Numerical(format!(
                "basis column {j} is identically zero; the basis is rank deficient, use ridge > 0"
            )));
        }
    }

    let mut a = DMatrix::<Complex64>::zeros(n + p, p);
    for j in 0..p {
        let d = if norms[j] > 0.0 { norms[j] } else { 1.0 };
        for i in 0..n {
            a[(i, j)] = phi[(i, j)] / d;
        }
        a[(n + j, j)] = Complex64::new(lambda.sqrt() / d, 0.0);
    }
    let mut b = DVector::<Complex64>::zeros(n + p);
    b.rows_mut(0, n).copy_from_slice(y.samples());

    let qr = a.qr();
    qr.q_tr_mul(&mut b);
    let r = qr.r();
    let diag: Vec<f64> = (0..p).map(|i| r[(i, i)].norm()).collect();
    let dmax = diag.iter().cloned().fold(0.0, f64::max);
    let dmin = diag.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(dmin > 1e-13 * dmax) {
        return Err(Error::Numerical(format!(
            "basis is numerically rank deficient (|r| ratio {:e}); use ridge > 0",
            dmin / dmax
        )));
    }
    let scaled = r
        .solve_upper_triangular(&b.rows(0, p).into_owned())
        .ok_or_else(|| Error::Numerical("triangular solve failed".into()))?;
    let sv = r.singular_values();
    let smax = sv.iter().cloned().fold(0.0, f64::max);
    let smin = sv.iter().cloned().fold(f64::INFINITY, f64::min);

    let coefficients: Vec<Complex64> = scaled
        .iter()
        .zip(&norms)
        .map(|(c, d)| if *d > 0.0 { c / *d } else { *c })
        .collect();
    let coef = DVector::from_column_slice(&coefficients);
    let yhat = &phi * &coef;
    let err: f64 = yhat
        .iter()
        .zip(y.samples())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    let energy: f64 = y.samples().iter().map(|v| v.norm_sqr()).sum();
    let nmse_db = crate::signal::power_db(err / energy);

    Ok((
        GmpModel::new(*structure, coefficients)?,
        FitReport {
            nmse_db,
            condition_estimate: smax / smin,
            ridge: lambda,
        },
    ))
}

/// Serializes a model: `key = value` header lines, then one `re im` pair per
/// coefficient in basis order.
pub fn write_gmp_coefficients(model: &GmpModel) -> String {
    let s = &model.structure;
    let mut out = format!(
        "# generalized memory polynomial coefficients\n\
         # order: aligned (k,l), lagging (k,l,m), leading (k,l,m), secondary (k,l)\n\
         order = {}\nmemory_depth = {}\ncross_terms = {}\nsecondary = {}\n",
        s.order, s.memory_depth, s.cross_terms, s.secondary
    );
    for c in &model.coefficients {
        out.push_str(&format!("{:e} {:e}\n", c.re, c.im));
    }
    out
}

pub fn read_gmp_coefficients(text: &str) -> Result<GmpModel> {
    let (mut order, mut depth, mut cross, mut secondary) = (None, None, None, None);
    let mut coefficients = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let perr = |message: String| Error::Parse {
            line: line_no,
            message,
        };
        if let Some((key, value)) = line.split_once('=') {
            let (key, value) = (key.trim(), value.trim());
            let count = || {
                value
                    .parse::<usize>()
                    .map_err(|e| perr(format!("{key}: {e}")))
            };
            match key {
                "order" => order = Some(count()?),
                "memory_depth" => depth = Some(count()?),
                "cross_terms" => cross = Some(count()?),
                "secondary" => {
                    secondary = Some(
                        value
                            .parse::<bool>()
                            .map_err(|e| perr(format!("secondary: {e}")))?,
                    )
                }
                other => return Err(perr(format!("unknown header key `{other}`"))),
            }
            continue;
        }
        let mut parts = line.split_whitespace();
        let mut num = || -> Result<f64> {
            parts
                .next()
                .ok_or_else(|| perr("expected `re im`".into()))?
                .parse::<f64>()
                .map_err(|e| perr(e.to_string()))
        };
        let re = num()?;
        let im = num()?;
        if parts.next().is_some() {
            return Err(perr("trailing data after `re im`".into()));
        }
        coefficients.push(Complex64::new(re, im));
    }
    let missing = |k: &str| Error::Parse {
        line: 0,
        message: format!("missing header key `{k}`"),
    };
    let structure = GmpStructure::new(
        order.ok_or_else(|| missing("order"))?,
        depth.ok_or_else(|| missing("memory_depth"))?,
        cross.ok_or_else(|| missing("cross_terms"))?,
        secondary.unwrap_or(false),
    )?;
    GmpModel::new(structure, coefficients)
}
