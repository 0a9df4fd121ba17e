use num_complex::Complex64;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::config::Modulation;
use crate::error::{Error, Result};
use crate::signal::RngStream;

fn gray(b: usize) -> usize {
    b ^ (b >> 1)
}

fn inverse_gray(mut g: usize) -> usize {
    let mut b = g;
    while g > 1 {
        g >>= 1;
        b ^= g;
    }
    b
}

/// Gray-coded square QAM with unit average energy. The first half of each
/// symbol's bits selects the in-phase level, MSB first.
#[derive(Debug, Clone)]
pub struct QamMapper {
    bits_per_axis: usize,
    levels: usize,
    scale: f64,
}

impl QamMapper {
    pub fn new(modulation: Modulation) -> Self {
        let bits_per_axis = modulation.bits_per_symbol() / 2;
        let levels = 1usize << bits_per_axis;
        let energy = 2.0 * ((levels * levels) as f64 - 1.0) / 3.0;
        QamMapper {
            bits_per_axis,
            levels,
            scale: 1.0 / energy.sqrt(),
        }
    }

    pub fn bits_per_symbol(&self) -> usize {
        2 * self.bits_per_axis
    }

    fn axis_level(&self, bits: &[u8]) -> f64 {
        let g = bits.iter().fold(0usize, |acc, b| (acc << 1) | *b as usize);
        let idx = inverse_gray(g);
        (2 * idx) as f64 - (self.levels - 1) as f64
    }

    fn axis_bits(&self, v: f64, out: &mut Vec<u8>) {
        let l = (self.levels - 1) as f64;
        let idx = ((v / self.scale + l) / 2.0).round().clamp(0.0, l) as usize;
        let g = gray(idx);
        for i in (0..self.bits_per_axis).rev() {
            out.push(((g >> i) & 1) as u8);
        }
    }

    pub fn map(&self, bits: &[u8]) -> Result<Vec<Complex64>> {
        let m = self.bits_per_symbol();
        if bits.len() % m != 0 {
            return Err(Error::Dimension {
                what: "bits for QAM mapping (multiple of bits per symbol)",
                expected: bits.len().div_ceil(m) * m,
                got: bits.len(),
            });
        }
        Ok(bits
            .chunks(m)
            .map(|c| {
                let (i, q) = c.split_at(self.bits_per_axis);
                Complex64::new(self.axis_level(i), self.axis_level(q)) * self.scale
            })
            .collect())
    }

    /// Nearest-point hard decisions.
    pub fn demap(&self, symbols: &[Complex64]) -> Vec<u8> {
        let mut out = Vec::with_capacity(symbols.len() * self.bits_per_symbol());
        for s in symbols {
            self.axis_bits(s.re, &mut out);
            self.axis_bits(s.im, &mut out);
        }
        out
    }
}

/// Channel coding applied to each transport block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FecKind {
    /// Rate-1/2, constraint length 7 (generators 133, 171 octal), zero-tail
    /// terminated, hard-decision Viterbi.
    #[default]
    Convolutional,
    Uncoded,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FecConfig {
    #[serde(default)]
    pub kind: FecKind,
    #[serde(default = "default_interleaver_seed")]
    pub interleaver_seed: u64,
}

fn default_interleaver_seed() -> u64 {
    0x1e_a7e5
}

impl Default for FecConfig {
    fn default() -> Self {
        FecConfig {
            kind: FecKind::Convolutional,
            interleaver_seed: default_interleaver_seed(),
        }
    }
}

impl FecConfig {
    /// Information bits carried by `coded_bits` channel bits.
    pub fn info_bits(&self, coded_bits: usize) -> Result<usize> {
        let k = match self.kind {
            FecKind::Uncoded => coded_bits,
            FecKind::Convolutional => (coded_bits / 2).saturating_sub(TAIL),
        };
        if k == 0 {
            return Err(Error::Config(format!(
                "{coded_bits} channel bits cannot carry a coded block"
            )));
        }
        Ok(k)
    }
}

const G0: u32 = 0o133;
const G1: u32 = 0o171;
const TAIL: usize = 6;
const STATES: usize = 64;

fn outputs(state: usize, bit: u8) -> (u8, u8) {
    let reg = ((bit as u32) << 6) | state as u32;
    (
        ((reg & G0).count_ones() & 1) as u8,
        ((reg & G1).count_ones() & 1) as u8,
    )
}

/// Rate-1/2 encoding with six zero tail bits; output length 2(k + 6).
pub fn conv_encode(bits: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(2 * (bits.len() + TAIL));
    let mut state = 0usize;
    for &b in bits.iter().chain(std::iter::repeat_n(&0u8, TAIL)) {
        let (a, c) = outputs(state, b);
        out.push(a);
        out.push(c);
        state = ((b as usize) << 5) | (state >> 1);
    }
    out
}

/// Hard-decision Viterbi for [`conv_encode`] output; returns the `k`
/// information bits.
pub fn viterbi_decode(coded: &[u8]) -> Result<Vec<u8>> {
    if coded.len() % 2 != 0 || coded.len() < 2 * TAIL {
        return Err(Error::param(format!(
            "coded length {} is not a terminated rate-1/2 block",
            coded.len()
        )));
    }
    let steps = coded.len() / 2;
    const HALF: usize = STATES / 2;
    // Both generators tap the newest and oldest register bits, so the four
    // branches of butterfly j (predecessors 2j, 2j+1; successors j, j+32)
    // carry only two complementary output pairs.
    let mut sym = [0u8; HALF];
    for (j, v) in sym.iter_mut().enumerate() {
        let (a, c) = outputs(2 * j, 0);
        *v = (a << 1) | c;
    }
    let inf = u32::MAX / 4;
    let mut metric = [inf; STATES];
    metric[0] = 0;
    let mut next = [0u32; STATES];
    let mut decisions = vec![[0u8; STATES]; steps];
    for (step, dec) in decisions.iter_mut().enumerate() {
        let rx = (coded[2 * step] << 1) | coded[2 * step + 1];
        for j in 0..HALF {
            let d = (sym[j] ^ rx).count_ones();
            let (m0, m1) = (metric[2 * j], metric[2 * j + 1]);
            let (a, b) = (m0 + d, m1 + 2 - d);
            let (c, e) = (m0 + 2 - d, m1 + d);
            next[j] = a.min(b);
            dec[j] = (b < a) as u8;
            next[j + HALF] = c.min(e);
            dec[j + HALF] = (e < c) as u8;
        }
        metric = next;
    }
    let mut state = 0usize;
    let mut bits = vec![0u8; steps];
    for step in (0..steps).rev() {
        bits[step] = (state >> 5) as u8;
        state = ((state & 31) << 1) | decisions[step][state] as usize;
    }
    bits.truncate(steps - TAIL);
    Ok(bits)
}

/// Fixed pseudo-random permutation of a block.
#[derive(Debug, Clone)]
pub struct Interleaver {
    perm: Vec<usize>,
}

impl Interleaver {
    pub fn new(len: usize, seed: u64) -> Self {
        let mut perm: Vec<usize> = (0..len).collect();
        perm.shuffle(&mut RngStream::new(seed, 0));
        Interleaver { perm }
    }

    pub fn len(&self) -> usize {
        self.perm.len()
    }

    pub fn is_empty(&self) -> bool {
        self.perm.is_empty()
    }

    pub fn interleave<T: Copy>(&self, x: &[T]) -> Vec<T> {
        self.perm.iter().map(|&i| x[i]).collect()
    }

    pub fn deinterleave<T: Copy + Default>(&self, x: &[T]) -> Vec<T> {
        let mut out = vec![T::default(); x.len()];
        for (j, &i) in self.perm.iter().enumerate() {
            out[i] = x[j];
        }
        out
    }
}
