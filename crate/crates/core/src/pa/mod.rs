//! Power-amplifier models: the static third-order polynomial and its
//! Bussgang decomposition, generalized memory polynomials, and the
//! multi-branch statistical model Y = ΛX + W.

mod array_stat;
mod gmp;
mod poly3;

pub use array_stat::{apply_array_stat, build_array_stat_model, ArrayStatModel};
pub use gmp::{
    apply_gmp, fit_gmp, gmp_basis, read_gmp_coefficients, write_gmp_coefficients, FitReport,
    GmpModel, GmpStructure, GmpTerm, Ridge,
};
pub use poly3::{
    apply_poly3, bussgang_alpha, bussgang_distortion_power, bussgang_monte_carlo,
    BussgangMonteCarlo, BussgangParams, DistortionEstimate, DistortionFormula, Poly3Params,
};
