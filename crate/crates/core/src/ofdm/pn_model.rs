use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::config::ChannelRealization;
use crate::error::{Error, Result};
use crate::signal::{fill_gaussian_complex, RngStream};

/// Forward and inverse plans of one size. The inverse is unscaled; callers
/// apply 1/N where the model needs it.
#[derive(Clone)]
pub struct FftPair {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for FftPair {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FftPair").field("n", &self.n).finish()
    }
}

impl FftPair {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftPair {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Σₙ xₙ e^{−j2πnk/N}, in place.
    pub fn dft(&self, x: &mut [Complex64]) {
        self.forward.process(x);
    }

    /// (1/N) Σₖ Xₖ e^{j2πnk/N}, in place.
    pub fn idft(&self, x: &mut [Complex64]) {
        self.inverse.process(x);
        let s = 1.0 / self.n as f64;
        x.iter_mut().for_each(|v| *v *= s);
    }
}

/// gₖ = (1/N) Σₙ e^{jθₙ} e^{−j2πnk/N}.
pub fn pn_dft_coeffs(theta: &[f64], n: usize) -> Result<Vec<Complex64>> {
    if theta.len() != n {
        return Err(Error::param(format!(
            "phase segment holds {} samples but the symbol has {n}",
            theta.len()
        )));
    }
    if theta.iter().all(|t| *t == theta[0]) {
        // constant phase: the transform is an exact delta
        let mut g = vec![Complex64::new(0.0, 0.0); n];
        g[0] = Complex64::from_polar(1.0, theta[0]);
        return Ok(g);
    }
    let mut g: Vec<Complex64> = theta
        .iter()
        .map(|t| Complex64::from_polar(1.0, *t))
        .collect();
    FftPair::new(n).dft(&mut g);
    let s = 1.0 / n as f64;
    g.iter_mut().for_each(|v| *v *= s);
    Ok(g)
}

/// Circulant matrix with entry (k, l) = g_{(k−l) mod N}.
pub fn build_pn_matrix(g: &[Complex64]) -> DMatrix<Complex64> {
    let n = g.len();
    DMatrix::from_fn(n, n, |k, l| g[(k + n - l) % n])
}

/// (G ⊗ I_A) x for stacked x (index k·A + a): circular convolution of g
/// with each antenna's subcarrier sequence.
fn circulant_apply(g: &[Complex64], x: &[Complex64], antennas: usize) -> Vec<Complex64> {
    let n = g.len();
    let mut y = vec![Complex64::new(0.0, 0.0); x.len()];
    for k in 0..n {
        for l in 0..n {
            let c = g[(k + n - l) % n];
            if c == Complex64::new(0.0, 0.0) {
                continue;
            }
            for a in 0..antennas {
                y[k * antennas + a] += c * x[l * antennas + a];
            }
        }
    }
    y
}

fn check_pn(g: &[Complex64], n: usize, side: &'static str) -> Result<()> {
    if g.len() != n {
        return Err(Error::Dimension {
            what: side,
            expected: n,
            got: g.len(),
        });
    }
    Ok(())
}

/// Noiseless (G_R ⊗ I) H (G_T ⊗ I) x.
fn pn_mimo(
    h: &ChannelRealization,
    g_tx: &[Complex64],
    g_rx: &[Complex64],
    x: &[Complex64],
) -> Result<Vec<Complex64>> {
    let n = h.n_blocks();
    h.check(n, x.len())?;
    check_pn(g_tx, n, "transmit phase-noise coefficients")?;
    check_pn(g_rx, n, "receive phase-noise coefficients")?;
    let tx = circulant_apply(g_tx, x, h.n_tx);
    Ok(circulant_apply(g_rx, &h.apply(&tx), h.n_rx))
}

/// y = (G_R ⊗ I_{N_R}) H (G_T ⊗ I_{N_T}) x + w with w ~ CN(0, noise_variance·I).
pub fn apply_pn_matrix_model(
    h: &ChannelRealization,
    g_tx: &[Complex64],
    g_rx: &[Complex64],
    x: &[Complex64],
    noise_variance: f64,
    rng: &mut RngStream,
) -> Result<Vec<Complex64>> {
    if !(noise_variance >= 0.0 && noise_variance.is_finite()) {
        return Err(Error::param(format!(
            "noise variance must be non-negative, got {noise_variance}"
        )));
    }
    let mut y = pn_mimo(h, g_tx, g_rx, x)?;
    if noise_variance > 0.0 {
        let mut w = vec![Complex64::new(0.0, 0.0); y.len()];
        fill_gaussian_complex(rng, &mut w, noise_variance);
        y.iter_mut().zip(&w).for_each(|(a, b)| *a += b);
    }
    Ok(y)
}

/// Time-domain form: per transmit antenna IDFT, multiply by e^{jθ_tx},
/// DFT, apply H_k (the circular convolution within the symbol), then per
/// receive antenna IDFT, multiply by e^{jθ_rx} and DFT.
pub fn apply_pn_time_domain(
    h: &ChannelRealization,
    theta_tx: &[f64],
    theta_rx: &[f64],
    x_freq: &[Complex64],
) -> Result<Vec<Complex64>> {
    let n = h.n_blocks();
    h.check(n, x_freq.len())?;
    if theta_tx.len() != n || theta_rx.len() != n {
        return Err(Error::param(format!(
            "phase segments must hold {n} samples, got {} and {}",
            theta_tx.len(),
            theta_rx.len()
        )));
    }
    let fft = FftPair::new(n);
    let rot_tx: Vec<Complex64> = theta_tx
        .iter()
        .map(|t| Complex64::from_polar(1.0, *t))
        .collect();
    let rot_rx: Vec<Complex64> = theta_rx
        .iter()
        .map(|t| Complex64::from_polar(1.0, *t))
        .collect();
    let mut tx_stacked = vec![Complex64::new(0.0, 0.0); x_freq.len()];
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    for t in 0..h.n_tx {
        for k in 0..n {
            buf[k] = x_freq[k * h.n_tx + t];
        }
        rotate_symbol(&fft, &mut buf, &rot_tx);
        for k in 0..n {
            tx_stacked[k * h.n_tx + t] = buf[k];
        }
    }
    let mut y = h.apply(&tx_stacked);
    for r in 0..h.n_rx {
        for k in 0..n {
            buf[k] = y[k * h.n_rx + r];
        }
        rotate_symbol(&fft, &mut buf, &rot_rx);
        for k in 0..n {
            y[k * h.n_rx + r] = buf[k];
        }
    }
    Ok(y)
}

/// DFT{ rot · IDFT{X} } in place.
pub(crate) fn rotate_symbol(fft: &FftPair, x: &mut [Complex64], rot: &[Complex64]) {
    fft.idft(x);
    x.iter_mut().zip(rot).for_each(|(a, r)| *a *= r);
    fft.dft(x);
}

/// CPE term g₀^Rx g₀^Tx H x and ICI term e, the latter assembled from the
/// three cross products of P_T = G_T − g₀^Tx I and P_R = G_R − g₀^Rx I.
pub fn decompose_cpe_ici(
    h: &ChannelRealization,
    g_tx: &[Complex64],
    g_rx: &[Complex64],
    x: &[Complex64],
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let n = h.n_blocks();
    h.check(n, x.len())?;
    check_pn(g_tx, n, "transmit phase-noise coefficients")?;
    check_pn(g_rx, n, "receive phase-noise coefficients")?;
    let (g0t, g0r) = (g_tx[0], g_rx[0]);
    let mut p_t = g_tx.to_vec();
    p_t[0] = Complex64::new(0.0, 0.0);
    let mut p_r = g_rx.to_vec();
    p_r[0] = Complex64::new(0.0, 0.0);

    let hx = h.apply(x);
    let cpe: Vec<Complex64> = hx.iter().map(|v| g0r * g0t * v).collect();
    let h_pt_x = h.apply(&circulant_apply(&p_t, x, h.n_tx));
    let pr_h_pt_x = circulant_apply(&p_r, &h_pt_x, h.n_rx);
    let pr_hx = circulant_apply(&p_r, &hx, h.n_rx);
    let e = (0..hx.len())
        .map(|i| pr_h_pt_x[i] + g0r * h_pt_x[i] + g0t * pr_hx[i])
        .collect();
    Ok((cpe, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn random_theta(rng: &mut RngStream, n: usize, scale: f64) -> Vec<f64> {
        (0..n).map(|_| scale * rng.standard_normal()).collect()
    }

    fn random_x(rng: &mut RngStream, len: usize) -> Vec<Complex64> {
        let mut x = vec![c(0.0, 0.0); len];
        fill_gaussian_complex(rng, &mut x, 1.0);
        x
    }

    #[test]
    fn identity_oscillator_and_pure_cpe() {
        let g = pn_dft_coeffs(&[0.0; 16], 16).unwrap();
        assert!((g[0] - c(1.0, 0.0)).norm() < 1e-15);
        assert!(g[1..].iter().all(|v| v.norm() == 0.0));
        let g = pn_dft_coeffs(&[0.3; 16], 16).unwrap();
        assert!((g[0] - Complex64::from_polar(1.0, 0.3)).norm() < 1e-15);
        assert!(g[1..].iter().all(|v| v.norm() < 1e-15));
        assert!(pn_dft_coeffs(&[0.0; 15], 16).is_err());
    }

    #[test]
    fn coefficient_energy_is_one() {
        let mut rng = RngStream::new(1, 0);
        for n in [8, 64, 1024] {
            let g = pn_dft_coeffs(&random_theta(&mut rng, n, 2.0), n).unwrap();
            let e: f64 = g.iter().map(|v| v.norm_sqr()).sum();
            assert!((e - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn circulant_layout() {
        let (a, b, cc) = (c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0));
        let m = build_pn_matrix(&[a, b, cc]);
        let rows = [[a, cc, b], [b, a, cc], [cc, b, a]];
        for (k, row) in rows.iter().enumerate() {
            for (l, v) in row.iter().enumerate() {
                assert_eq!(m[(k, l)], *v);
            }
        }
        assert_eq!(
            build_pn_matrix(&[c(1.0, 0.0), c(0.0, 0.0)]),
            DMatrix::identity(2, 2)
        );
        let mut rng = RngStream::new(2, 0);
        let g = random_x(&mut rng, 9);
        let m = build_pn_matrix(&g);
        for k in 1..9 {
            for l in 1..9 {
                assert_eq!(m[(k, l)], m[(k - 1, l - 1)]);
            }
        }
    }

    #[test]
    fn dft_diagonalizes_the_circulant() {
        let mut rng = RngStream::new(3, 0);
        for n in [8usize, 16, 32] {
            let g = random_x(&mut rng, n);
            let m = build_pn_matrix(&g);
            let f = DMatrix::from_fn(n, n, |k, l| {
                Complex64::from_polar(1.0, -std::f64::consts::TAU * (k * l) as f64 / n as f64)
            });
            let finv = f.adjoint().unscale(n as f64);
            let d = &f * &m * &finv;
            let mut eig = g.clone();
            FftPair::new(n).dft(&mut eig);
            for i in 0..n {
                for j in 0..n {
                    let expect = if i == j { eig[i] } else { c(0.0, 0.0) };
                    assert!((d[(i, j)] - expect).norm() < 1e-10);
                }
            }
        }
    }

    fn kron_identity(g: &[Complex64], a: usize) -> DMatrix<Complex64> {
        build_pn_matrix(g).kronecker(&DMatrix::<Complex64>::identity(a, a))
    }

    fn dense_h(h: &ChannelRealization) -> DMatrix<Complex64> {
        let n = h.n_blocks();
        let mut m = DMatrix::zeros(n * h.n_rx, n * h.n_tx);
        for k in 0..n {
            for r in 0..h.n_rx {
                for t in 0..h.n_tx {
                    m[(k * h.n_rx + r, k * h.n_tx + t)] = h.at(k, r, t);
                }
            }
        }
        m
    }

    #[test]
    fn matrix_model_matches_dense_kronecker() {
        let mut rng = RngStream::new(4, 0);
        let (n, nt, nr) = (8, 2, 2);
        let h = ChannelRealization::rayleigh(n, nr, nt, &mut rng);
        let g_tx = pn_dft_coeffs(&random_theta(&mut rng, n, 0.5), n).unwrap();
        let g_rx = pn_dft_coeffs(&random_theta(&mut rng, n, 0.5), n).unwrap();
        let x = random_x(&mut rng, n * nt);
        let y = apply_pn_matrix_model(&h, &g_tx, &g_rx, &x, 0.0, &mut rng).unwrap();
        let dense = kron_identity(&g_rx, nr)
            * dense_h(&h)
            * kron_identity(&g_tx, nt)
            * DMatrix::from_column_slice(n * nt, 1, &x);
        let err = y
            .iter()
            .zip(dense.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn transparent_link_and_pure_cpe() {
        let mut rng = RngStream::new(5, 0);
        let n = 16;
        let h = ChannelRealization::identity(n, 1);
        let x = random_x(&mut rng, n);
        let zero = pn_dft_coeffs(&vec![0.0; n], n).unwrap();
        assert_eq!(
            apply_pn_matrix_model(&h, &zero, &zero, &x, 0.0, &mut rng).unwrap(),
            x
        );
        let hr = ChannelRealization::rayleigh(n, 1, 1, &mut rng);
        let (a, b) = (0.4, -1.1);
        let ga = pn_dft_coeffs(&vec![a; n], n).unwrap();
        let gb = pn_dft_coeffs(&vec![b; n], n).unwrap();
        let y = apply_pn_matrix_model(&hr, &ga, &gb, &x, 0.0, &mut rng).unwrap();
        let rot = Complex64::from_polar(1.0, a + b);
        for (yi, hx) in y.iter().zip(hr.apply(&x)) {
            assert!((yi - rot * hx).norm() < 1e-12);
        }
    }

    #[test]
    fn time_domain_matches_matrix_form() {
        let mut rng = RngStream::new(6, 0);
        for (n, nt, nr) in [(16, 1, 1), (16, 2, 3), (64, 2, 2)] {
            let h = ChannelRealization::rayleigh(n, nr, nt, &mut rng);
            let tt = random_theta(&mut rng, n, 1.0);
            let tr = random_theta(&mut rng, n, 1.0);
            let x = random_x(&mut rng, n * nt);
            let a = apply_pn_time_domain(&h, &tt, &tr, &x).unwrap();
            let g_tx = pn_dft_coeffs(&tt, n).unwrap();
            let g_rx = pn_dft_coeffs(&tr, n).unwrap();
            let b = apply_pn_matrix_model(&h, &g_tx, &g_rx, &x, 0.0, &mut rng).unwrap();
            let err = a
                .iter()
                .zip(&b)
                .map(|(p, q)| (p - q).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-10, "n={n}: {err}");
        }
    }

    #[test]
    fn cancelling_phases_are_transparent() {
        let mut rng = RngStream::new(7, 0);
        let n = 32;
        let h = ChannelRealization::identity(n, 1);
        let tt = random_theta(&mut rng, n, 1.0);
        let tr: Vec<f64> = tt.iter().map(|v| -v).collect();
        let x = random_x(&mut rng, n);
        let y = apply_pn_time_domain(&h, &tt, &tr, &x).unwrap();
        assert!(y.iter().zip(&x).all(|(a, b)| (a - b).norm() < 1e-12));
    }

    #[test]
    fn cpe_plus_ici_reconstructs() {
        let mut rng = RngStream::new(8, 0);
        let (n, nt, nr) = (8, 2, 2);
        let h = ChannelRealization::rayleigh(n, nr, nt, &mut rng);
        let g_tx = pn_dft_coeffs(&random_theta(&mut rng, n, 0.7), n).unwrap();
        let g_rx = pn_dft_coeffs(&random_theta(&mut rng, n, 0.7), n).unwrap();
        let x = random_x(&mut rng, n * nt);
        let (cpe, e) = decompose_cpe_ici(&h, &g_tx, &g_rx, &x).unwrap();
        let full = apply_pn_matrix_model(&h, &g_tx, &g_rx, &x, 0.0, &mut rng).unwrap();
        let err = (0..full.len())
            .map(|i| (cpe[i] + e[i] - full[i]).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn pure_cpe_has_no_ici() {
        let mut rng = RngStream::new(9, 0);
        let n = 16;
        let h = ChannelRealization::rayleigh(n, 2, 2, &mut rng);
        let x = random_x(&mut rng, 2 * n);
        let g = pn_dft_coeffs(&vec![0.8; n], n).unwrap();
        let (cpe, e) = decompose_cpe_ici(&h, &g, &g, &x).unwrap();
        assert!(e.iter().all(|v| v.norm() == 0.0));
        let zero = pn_dft_coeffs(&vec![0.0; n], n).unwrap();
        let (cpe0, e0) = decompose_cpe_ici(&h, &zero, &zero, &x).unwrap();
        assert!(e0.iter().all(|v| v.norm() == 0.0));
        assert!(cpe0
            .iter()
            .zip(h.apply(&x))
            .all(|(a, b)| (a - b).norm() < 1e-15));
        let rot = Complex64::from_polar(1.0, 1.6);
        assert!(cpe
            .iter()
            .zip(h.apply(&x))
            .all(|(a, b)| (a - rot * b).norm() < 1e-12));
    }

    #[test]
    fn ici_power_grows_with_carrier() {
        use crate::phase_noise::{design_pn_filter, PoleZeroPnParams};
        let n = 2048;
        let fs = n as f64 * 15e3;
        let h = ChannelRealization::flat(n, 1, 1);
        let mut powers = Vec::new();
        for carrier in [15e9, 30e9, 60e9, 120e9] {
            let f = design_pn_filter(&PoleZeroPnParams::set_b(), carrier, fs).unwrap();
            let mut rng = RngStream::new(12, 0);
            let mut acc = 0.0;
            for _ in 0..4 {
                let tx = f.generate(n, f.default_warmup(), &mut rng).unwrap();
                let rx = f.generate(n, f.default_warmup(), &mut rng).unwrap();
                let x = random_x(&mut rng, n);
                let g_tx = pn_dft_coeffs(tx.phase_rad(), n).unwrap();
                let g_rx = pn_dft_coeffs(rx.phase_rad(), n).unwrap();
                let (_, e) = decompose_cpe_ici(&h, &g_tx, &g_rx, &x).unwrap();
                acc += e.iter().map(|v| v.norm_sqr()).sum::<f64>() / n as f64;
            }
            powers.push(acc / 4.0);
        }
        assert!(powers.windows(2).all(|w| w[1] > w[0]), "{powers:?}");
        // small-angle regime: each doubling of the carrier adds about 6 dB
        let step = 10.0 * (powers[1] / powers[0]).log10();
        assert!((step - 6.02).abs() < 0.5, "{step}");
    }

    #[test]
    fn dimension_mismatches_are_reported() {
        let mut rng = RngStream::new(10, 0);
        let h = ChannelRealization::identity(8, 1);
        let g = pn_dft_coeffs(&[0.0; 8], 8).unwrap();
        assert!(apply_pn_matrix_model(&h, &g, &g, &[c(1.0, 0.0); 7], 0.0, &mut rng).is_err());
        assert!(apply_pn_matrix_model(&h, &g[..4], &g, &[c(1.0, 0.0); 8], 0.0, &mut rng).is_err());
        assert!(apply_pn_time_domain(&h, &[0.0; 8], &[0.0; 4], &[c(1.0, 0.0); 8]).is_err());
    }
}
