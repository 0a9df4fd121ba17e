//! Impairment models for millimetre-wave transceivers.
//!
//! The crate is organized by subsystem:
//!
//! * [`signal`]: complex sample buffers, seeded random streams, Welch PSDs, dB helpers
//! * [`phase_noise`]: pole/zero phase-noise spectra, bilinear synthesis, PLL shaping
//! * [`pa`]: third-order PA polynomial, Bussgang decomposition, GMP fitting, array statistics
//! * [`antenna`]: array factors, steering, quantization, transmitarray budgets, masks
//! * [`ofdm`]: circulant phase-noise matrices, CPE/ICI split, PTRS and BLER simulation

pub mod antenna;
pub mod error;
pub mod ofdm;
pub mod pa;
pub mod phase_noise;
pub mod signal;

pub use antenna::{
    ArrayGeometry, BeamWeights, ElementPattern, FarFieldPattern, RadiationMask, TransmitarrayConfig,
};
pub use error::{Error, Result, Violation};
pub use num_complex::Complex64;
pub use ofdm::{
    BlerExperiment, BlerPoint, ChannelKind, ChannelRealization, Modulation, OfdmConfig,
    PrbAllocation, PtrsConfig,
};
pub use pa::{GmpModel, GmpStructure, Poly3Params};
pub use phase_noise::{PhaseTrajectory, PllPnParams, PoleZeroPnParams};
pub use signal::{ComplexSequence, RngStream, SpectrumEstimate};
