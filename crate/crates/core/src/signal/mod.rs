//! Numeric foundations shared by every model: complex sample buffers,
//! reproducible random streams, spectral estimation and dB conversion.

mod rng;
mod sequence;
mod spectrum;
mod units;

pub use rng::{fill_gaussian_complex, gaussian_complex, RngStream};
pub use sequence::ComplexSequence;
pub use spectrum::{welch_psd, SpectrumEstimate, Window};
pub use units::{db_lin_convert, from_db, power_db, to_db, DbDirection};
