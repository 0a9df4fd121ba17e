//! Single-slot OFDM link with oscillator phase noise: the frequency-domain
//! impairment model, PTRS-based CPE correction and Monte-Carlo BLER.

mod bler;
mod coding;
mod config;
mod pn_model;
mod ptrs;

pub use bler::{run_bler, wilson_interval, BlerExperiment, BlerPoint, LinkPhaseNoise};
pub use coding::{conv_encode, viterbi_decode, FecConfig, FecKind, Interleaver, QamMapper};
pub use config::{
    ChannelKind, ChannelRealization, Modulation, OfdmConfig, PrbAllocation, PtrsConfig,
    SUBCARRIERS_PER_PRB, SYMBOLS_PER_SLOT,
};
pub use pn_model::{
    apply_pn_matrix_model, apply_pn_time_domain, build_pn_matrix, decompose_cpe_ici, pn_dft_coeffs,
    FftPair,
};
pub use ptrs::{
    correct_cpe, estimate_cpe, insert_ptrs, EffectiveChannel, ReKind, RxGrid, SlotGrid,
};
