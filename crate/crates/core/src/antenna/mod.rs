//! Idealized array antennas: element patterns, array factors with steering
//! and phase quantization, transmitarray budgets and radiation masks.
//!
//! Positions are in wavelengths; θ is measured from broadside (+z) and φ
//! from +x.

mod geometry;
mod mask;
mod pattern;
mod transmitarray;
mod weights;

pub use geometry::{direction, ArrayGeometry, ElementPattern, Lattice};
pub use mask::{extract_cut, mask_compliance, MaskReport, PrincipalCut, RadiationMask};
pub use pattern::{
    array_factor, array_factor_complex, directivity, total_pattern, Coverage, DirectivityEstimate,
    FarFieldPattern, PatternGrid,
};
pub use transmitarray::{
    quantization_loss_db, transmitarray_aperture, transmitarray_budget, transmitarray_pattern,
    TransmitarrayBudget, TransmitarrayConfig,
};
pub use weights::{grating_lobe_limit, quantize_phase, steering_weights, BeamWeights};
