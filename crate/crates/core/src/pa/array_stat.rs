use nalgebra::DMatrix;
use num_complex::Complex64;

use super::{bussgang_alpha, bussgang_distortion_power, DistortionFormula, Poly3Params};
use crate::error::{Error, Result};
use crate::signal::{fill_gaussian_complex, RngStream};

const HERMITIAN_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

/// Multi-branch Bussgang model Y = ΛX + W, W ~ CN(0, C_ww).
#[derive(Debug, Clone, PartialEq)]
pub struct ArrayStatModel {
    alphas: Vec<Complex64>,
    c_ww: DMatrix<Complex64>,
    c_xx: DMatrix<Complex64>,
}

fn check_covariance(name: &str, c: &DMatrix<Complex64>) -> Result<()> {
    if !c.is_square() {
        return Err(Error::param(format!("{name} must be square")));
    }
    let scale = c.iter().map(|v| v.norm()).fold(1.0f64, f64::max);
    let asym = (c - c.adjoint())
        .iter()
        .map(|v| v.norm())
        .fold(0.0f64, f64::max);
    if asym > HERMITIAN_TOL * scale {
        return Err(Error::param(format!(
            "{name} is not Hermitian (max asymmetry {asym:e})"
        )));
    }
    let eig = nalgebra::SymmetricEigen::new(c.clone());
    let min = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    if min < -PSD_TOL * scale {
        return Err(Error::param(format!(
            "{name} is not positive semidefinite (smallest eigenvalue {min:e})"
        )));
    }
    Ok(())
}

impl ArrayStatModel {
    /// Builds a model from explicit parameters, e.g. a user-supplied
    /// correlated distortion covariance.
    pub fn new(
        alphas: Vec<Complex64>,
        c_ww: DMatrix<Complex64>,
        c_xx: DMatrix<Complex64>,
    ) -> Result<Self> {
        check_covariance("c_ww", &c_ww)?;
        check_covariance("c_xx", &c_xx)?;
        for (what, got) in [
            ("c_ww dimension", c_ww.nrows()),
            ("c_xx dimension", c_xx.nrows()),
        ] {
            if got != alphas.len() {
                return Err(Error::Dimension {
                    what,
                    expected: alphas.len(),
                    got,
                });
            }
        }
        Ok(ArrayStatModel { alphas, c_ww, c_xx })
    }

    pub fn branches(&self) -> usize {
        self.alphas.len()
    }

    pub fn alphas(&self) -> &[Complex64] {
        &self.alphas
    }

    pub fn c_ww(&self) -> &DMatrix<Complex64> {
        &self.c_ww
    }

    pub fn c_xx(&self) -> &DMatrix<Complex64> {
        &self.c_xx
    }

    /// A with A·Aᴴ = C_ww, from the Hermitian eigendecomposition.
    fn distortion_factor(&self) -> DMatrix<Complex64> {
        let eig = nalgebra::SymmetricEigen::new(self.c_ww.clone());
        let mut a = eig.eigenvectors.clone();
        for (j, lam) in eig.eigenvalues.iter().enumerate() {
            let s = lam.max(0.0).sqrt();
            a.column_mut(j).scale_mut(s);
        }
        a
    }
}

/// Per-branch Bussgang gains with σ_x² = C_xx[m,m] and a diagonal C_ww.
///
/// Monte-Carlo distortion estimates use stream `m` of the given seed, so
/// branches are estimated independently.
pub fn build_array_stat_model(
    branch_params: &[Poly3Params],
    c_xx: &DMatrix<Complex64>,
    formula: DistortionFormula,
) -> Result<ArrayStatModel> {
    check_covariance("c_xx", c_xx)?;
    if branch_params.len() != c_xx.nrows() {
        return Err(Error::Dimension {
            what: "branch count",
            expected: c_xx.nrows(),
            got: branch_params.len(),
        });
    }
    let m = branch_params.len();
    let mut alphas = Vec::with_capacity(m);
    let mut c_ww = DMatrix::zeros(m, m);
    for (i, p) in branch_params.iter().enumerate() {
        let sigma_x2 = c_xx[(i, i)].re;
        alphas.push(bussgang_alpha(p, sigma_x2)?);
        let branch_formula = match formula {
            DistortionFormula::McOracle { samples, seed } => DistortionFormula::McOracle {
                samples,
                seed: RngStream::new(seed, i as u64).substream(0).seed(),
            },
            f => f,
        };
        c_ww[(i, i)] = Complex64::new(
            bussgang_distortion_power(p, sigma_x2, branch_formula)?.value,
            0.0,
        );
    }
    ArrayStatModel::new(alphas, c_ww, c_xx.clone())
}

/// Y = ΛX + W for an M×T block, W drawn independently per column.
pub fn apply_array_stat(
    model: &ArrayStatModel,
    x_block: &DMatrix<Complex64>,
    rng: &mut RngStream,
) -> Result<DMatrix<Complex64>> {
    let m = model.branches();
    if x_block.nrows() != m {
        return Err(Error::Dimension {
            what: "block rows",
            expected: m,
            got: x_block.nrows(),
        });
    }
    let mut y = x_block.clone();
    for (i, mut row) in y.row_iter_mut().enumerate() {
        row *= model.alphas[i];
    }
    if model.c_ww.iter().all(|v| *v == Complex64::new(0.0, 0.0)) {
        return Ok(y);
    }
    let a = model.distortion_factor();
    let mut z = vec![Complex64::new(0.0, 0.0); m];
    for t in 0..y.ncols() {
        fill_gaussian_complex(rng, &mut z, 1.0);
        for i in 0..m {
            let w: Complex64 = (0..m).map(|j| a[(i, j)] * z[j]).sum();
            y[(i, t)] += w;
        }
    }
    Ok(y)
}
