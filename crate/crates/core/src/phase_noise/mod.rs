//! Oscillator phase noise: the multi-pole/zero PSD model, its carrier
//! scaling, discrete-time synthesis and the PLL noise-shaping combiner.
//!
//! Model values are single-sideband levels L(f) in dBc/Hz. Internally the
//! two-sided phase PSD is S(f) = L(|f|) (equivalently the one-sided
//! S_φ(f) = 2·L(f)). [`SidebandConvention::Dsb`] treats the input as a
//! double-sideband level and halves it instead.

mod filter;
mod pll;
mod pole_zero;

pub use filter::{
    design_pn_filter, design_pn_filter_with, synthesize_phase, synthesize_phase_with,
    FirstOrderSection, PhaseTrajectory, PnFilter, SynthesisOptions,
};
pub use pll::{
    eval_pll_psd, loop_bandwidth_hz, pll_transfer, PllPnParams, PllTransfer, RationalFunction,
    SourcePsd,
};
pub use pole_zero::{carrier_scale_db, eval_pole_zero_psd, PoleZeroPnParams, SidebandConvention};
