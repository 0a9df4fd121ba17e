use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{first_violation, Error, Result, Violation};
use crate::signal::{fill_gaussian_complex, RngStream};

pub const SUBCARRIERS_PER_PRB: usize = 12;
pub const SYMBOLS_PER_SLOT: usize = 7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Modulation {
    #[serde(rename = "QPSK", alias = "qpsk")]
    Qpsk,
    #[serde(rename = "16QAM", alias = "16qam")]
    Qam16,
    #[serde(rename = "64QAM", alias = "64qam")]
    Qam64,
}

impl Modulation {
    pub fn bits_per_symbol(self) -> usize {
        match self {
            Modulation::Qpsk => 2,
            Modulation::Qam16 => 4,
            Modulation::Qam64 => 6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OfdmConfig {
    pub n_subcarriers: usize,
    pub cp_len: usize,
    pub subcarrier_spacing_hz: f64,
    pub n_tx: usize,
    pub n_rx: usize,
    pub modulation: Modulation,
}

impl OfdmConfig {
    pub fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let n = self.n_subcarriers;
        if n < 8 || !n.is_power_of_two() {
            v.push(Violation::new(
                "n_subcarriers",
                format!("must be a power of two ≥ 8, got {n}"),
            ));
        }
        if self.cp_len >= n {
            v.push(Violation::new(
                "cp_len",
                format!("must be below n_subcarriers ({n}), got {}", self.cp_len),
            ));
        }
        if !(self.subcarrier_spacing_hz > 0.0 && self.subcarrier_spacing_hz.is_finite()) {
            v.push(Violation::new("subcarrier_spacing_hz", "must be positive"));
        }
        if self.n_tx == 0 || self.n_rx == 0 {
            v.push(Violation::new("n_tx", "antenna counts must be at least 1"));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        first_violation(self.violations())
    }

    /// Time-domain sample rate N·Δf.
    pub fn sample_rate_hz(&self) -> f64 {
        self.n_subcarriers as f64 * self.subcarrier_spacing_hz
    }

    pub fn symbol_len(&self) -> usize {
        self.n_subcarriers + self.cp_len
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PrbAllocation {
    pub n_prbs: usize,
}

impl PrbAllocation {
    pub fn new(n_prbs: usize) -> Self {
        PrbAllocation { n_prbs }
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_prbs * SUBCARRIERS_PER_PRB
    }

    pub fn check_fits(&self, n: usize) -> Result<()> {
        if self.n_prbs == 0 {
            return Err(Error::Config("allocation needs at least one PRB".into()));
        }
        if self.n_subcarriers() > n {
            return Err(Error::Config(format!(
                "{} PRBs need {} subcarriers but the FFT has {n}",
                self.n_prbs,
                self.n_subcarriers()
            )));
        }
        Ok(())
    }

    /// FFT bin of allocated subcarrier `i`; the allocation is centred on DC.
    pub fn bin(&self, i: usize, n: usize) -> usize {
        (i + n - self.n_subcarriers() / 2) % n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PtrsConfig {
    /// One PTRS subcarrier per `freq_density` PRBs.
    pub freq_density: usize,
    /// PTRS on every `time_density`-th symbol.
    pub time_density: usize,
    #[serde(default = "default_pilot_seed")]
    pub pilot_seed: u64,
}

fn default_pilot_seed() -> u64 {
    0x5054_5253
}

impl PtrsConfig {
    pub fn new(freq_density: usize, time_density: usize) -> Self {
        PtrsConfig {
            freq_density,
            time_density,
            pilot_seed: default_pilot_seed(),
        }
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        if ![1, 2, 4, 8, 16].contains(&self.freq_density) {
            v.push(Violation::new(
                "ptrs.freq_density",
                format!("must be 1, 2, 4, 8 or 16, got {}", self.freq_density),
            ));
        }
        if ![1, 2, 4].contains(&self.time_density) {
            v.push(Violation::new(
                "ptrs.time_density",
                format!("must be 1, 2 or 4, got {}", self.time_density),
            ));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        first_violation(self.violations())
    }
}

/// How per-subcarrier channel blocks are produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ChannelKind {
    /// H_k = all-ones, every subcarrier.
    FlatAwgn,
    /// Independent CN(0, 1) entries per subcarrier, redrawn every trial.
    IidRayleighPerSubcarrier,
    UserSupplied {
        realization: ChannelRealization,
    },
}

/// N_R × N_T complex block per subcarrier, each stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub n_rx: usize,
    pub n_tx: usize,
    pub blocks: Vec<Vec<Complex64>>,
}

impl ChannelRealization {
    pub fn new(n_rx: usize, n_tx: usize, blocks: Vec<Vec<Complex64>>) -> Result<Self> {
        let h = ChannelRealization { n_rx, n_tx, blocks };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rx == 0 || self.n_tx == 0 || self.blocks.is_empty() {
            return Err(Error::param(
                "channel needs antennas and at least one block",
            ));
        }
        for b in &self.blocks {
            if b.len() != self.n_rx * self.n_tx {
                return Err(Error::Dimension {
                    what: "channel block entries",
                    expected: self.n_rx * self.n_tx,
                    got: b.len(),
                });
            }
        }
        Ok(())
    }

    pub fn identity(n: usize, antennas: usize) -> Self {
        let mut block = vec![Complex64::new(0.0, 0.0); antennas * antennas];
        for a in 0..antennas {
            block[a * antennas + a] = Complex64::new(1.0, 0.0);
        }
        ChannelRealization {
            n_rx: antennas,
            n_tx: antennas,
            blocks: vec![block; n],
        }
    }

    pub fn flat(n: usize, n_rx: usize, n_tx: usize) -> Self {
        ChannelRealization {
            n_rx,
            n_tx,
            blocks: vec![vec![Complex64::new(1.0, 0.0); n_rx * n_tx]; n],
        }
    }

    pub fn rayleigh(n: usize, n_rx: usize, n_tx: usize, rng: &mut RngStream) -> Self {
        let blocks = (0..n)
            .map(|_| {
                let mut b = vec![Complex64::new(0.0, 0.0); n_rx * n_tx];
                fill_gaussian_complex(rng, &mut b, 1.0);
                b
            })
            .collect();
        ChannelRealization { n_rx, n_tx, blocks }
    }

    pub fn n_blocks(&self) -> usize {
        self.blocks.len()
    }

    pub fn at(&self, k: usize, r: usize, t: usize) -> Complex64 {
        self.blocks[k][r * self.n_tx + t]
    }

    /// H x with x and the result stacked subcarrier-major (index k·N_T + t).
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n_blocks() * self.n_rx];
        for (k, b) in self.blocks.iter().enumerate() {
            for r in 0..self.n_rx {
                y[k * self.n_rx + r] = (0..self.n_tx)
                    .map(|t| b[r * self.n_tx + t] * x[k * self.n_tx + t])
                    .sum();
            }
        }
        y
    }

    pub(crate) fn check(&self, n: usize, x_len: usize) -> Result<()> {
        self.validate()?;
        if self.n_blocks() != n {
            return Err(Error::Dimension {
                what: "channel blocks",
                expected: n,
                got: self.n_blocks(),
            });
        }
        if x_len != n * self.n_tx {
            return Err(Error::Dimension {
                what: "stacked transmit vector",
                expected: n * self.n_tx,
                got: x_len,
            });
        }
        Ok(())
    }
}
