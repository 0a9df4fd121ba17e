use num_complex::Complex64;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, StandardNormal};

use super::ComplexSequence;
use crate::error::{Error, Result};

/// A reproducible random stream identified by `(seed, stream_id)`.
///
/// Streams with the same seed and different ids are drawn from disjoint
/// ChaCha keystreams. Each unit of parallel work should own its own stream.
#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    stream_id: u64,
    rng: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut rng = ChaCha12Rng::seed_from_u64(seed);
        rng.set_stream(stream_id);
        RngStream {
            seed,
            stream_id,
            rng,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    /// Derives an independent child stream. The child depends only on
    /// `(seed, stream_id, index)`, never on how much of `self` was consumed.
    pub fn substream(&self, index: u64) -> RngStream {
        let child_seed =
            splitmix64(self.seed ^ splitmix64(self.stream_id.wrapping_add(0x5851_f42d)));
        RngStream::new(child_seed, index)
    }

    /// One draw from N(0, 1).
    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// One draw uniform on [0, 1).
    pub fn uniform(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bit(&mut self) -> u8 {
        (self.rng.next_u32() & 1) as u8
    }
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.rng.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.rng.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.rng.fill_bytes(dst)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Fills `out` with circularly-symmetric CN(0, variance) samples.
pub fn fill_gaussian_complex(rng: &mut RngStream, out: &mut [Complex64], variance: f64) {
    let scale = (variance / 2.0).sqrt();
    for v in out.iter_mut() {
        let re = rng.standard_normal();
        let im = rng.standard_normal();
        *v = Complex64::new(re * scale, im * scale);
    }
}

/// Draws `n` circularly-symmetric complex Gaussian samples; real and
/// imaginary parts each carry `variance / 2`.
pub fn gaussian_complex(
    rng: &mut RngStream,
    n: usize,
    variance: f64,
    sample_rate_hz: f64,
) -> Result<ComplexSequence> {
    if !(variance >= 0.0) || !variance.is_finite() {
        return Err(Error::param(format!(
            "variance must be a finite non-negative number, got {variance}"
        )));
    }
    let mut samples = vec![Complex64::new(0.0, 0.0); n];
    if variance > 0.0 {
        fill_gaussian_complex(rng, &mut samples, variance);
    }
    ComplexSequence::new(samples, sample_rate_hz)
}
