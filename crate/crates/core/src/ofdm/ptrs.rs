use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

use num_complex::Complex64;

use super::config::{PrbAllocation, PtrsConfig, SUBCARRIERS_PER_PRB, SYMBOLS_PER_SLOT};
use crate::error::{Error, Result};
use crate::signal::RngStream;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReKind {
    Data,
    Ptrs,
}

/// One slot of resource elements over the allocation: `n_sc` subcarriers ×
/// 7 symbols, stored symbol-major (index s·n_sc + k).
#[derive(Debug, Clone, PartialEq)]
pub struct SlotGrid {
    n_sc: usize,
    values: Vec<Complex64>,
    kinds: Vec<ReKind>,
}

impl SlotGrid {
    /// All-data grid of zeros.
    pub fn new(allocation: &PrbAllocation) -> Self {
        let n_sc = allocation.n_subcarriers();
        SlotGrid {
            n_sc,
            values: vec![Complex64::new(0.0, 0.0); n_sc * SYMBOLS_PER_SLOT],
            kinds: vec![ReKind::Data; n_sc * SYMBOLS_PER_SLOT],
        }
    }

    pub fn n_subcarriers(&self) -> usize {
        self.n_sc
    }

    pub fn n_symbols(&self) -> usize {
        SYMBOLS_PER_SLOT
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn kinds(&self) -> &[ReKind] {
        &self.kinds
    }

    pub fn at(&self, symbol: usize, k: usize) -> Complex64 {
        self.values[symbol * self.n_sc + k]
    }

    pub fn symbol(&self, s: usize) -> &[Complex64] {
        &self.values[s * self.n_sc..(s + 1) * self.n_sc]
    }

    pub fn data_count(&self) -> usize {
        self.kinds.iter().filter(|k| **k == ReKind::Data).count()
    }

    pub fn pilot_count(&self) -> usize {
        self.kinds.len() - self.data_count()
    }

    /// Symbols carrying at least one PTRS.
    pub fn bearing_symbols(&self) -> Vec<usize> {
        (0..SYMBOLS_PER_SLOT)
            .filter(|s| self.kinds[s * self.n_sc..(s + 1) * self.n_sc].contains(&ReKind::Ptrs))
            .collect()
    }

    /// Writes `data` into the data REs in index order.
    pub fn fill_data(&mut self, data: &[Complex64]) -> Result<()> {
        if data.len() != self.data_count() {
            return Err(Error::Dimension {
                what: "data symbols for the slot",
                expected: self.data_count(),
                got: data.len(),
            });
        }
        let mut it = data.iter();
        for (v, k) in self.values.iter_mut().zip(&self.kinds) {
            if *k == ReKind::Data {
                *v = *it.next().expect("count checked above");
            }
        }
        Ok(())
    }

    /// Values of the data REs in index order.
    pub fn data(&self) -> Vec<Complex64> {
        self.values
            .iter()
            .zip(&self.kinds)
            .filter(|(_, k)| **k == ReKind::Data)
            .map(|(v, _)| *v)
            .collect()
    }
}

/// Marks PTRS on subcarrier 0 of the first PRB in every group of
/// `freq_density` PRBs, on symbols with index mod `time_density` = 0.
/// Pilots are QPSK points drawn from `pilot_seed`.
pub fn insert_ptrs(grid: &SlotGrid, cfg: &PtrsConfig) -> Result<SlotGrid> {
    cfg.validate()?;
    let n_prbs = grid.n_sc / SUBCARRIERS_PER_PRB;
    let subcarriers: Vec<usize> = (0..n_prbs)
        .step_by(cfg.freq_density)
        .map(|p| p * SUBCARRIERS_PER_PRB)
        .collect();
    if subcarriers.is_empty() {
        return Err(Error::Config(
            "allocation too small to host any PTRS".into(),
        ));
    }
    let mut out = grid.clone();
    let mut rng = RngStream::new(cfg.pilot_seed, 0);
    for s in (0..SYMBOLS_PER_SLOT).step_by(cfg.time_density) {
        for &k in &subcarriers {
            let q = (rng.bit() << 1 | rng.bit()) as f64;
            out.values[s * out.n_sc + k] = Complex64::from_polar(1.0, FRAC_PI_4 + FRAC_PI_2 * q);
            out.kinds[s * out.n_sc + k] = ReKind::Ptrs;
        }
    }
    Ok(out)
}

/// Received resource elements after the DFT, per receive antenna.
/// Index (s·n_sc + k)·n_rx + r.
#[derive(Debug, Clone, PartialEq)]
pub struct RxGrid {
    pub n_sc: usize,
    pub n_rx: usize,
    pub values: Vec<Complex64>,
}

impl RxGrid {
    pub fn at(&self, s: usize, k: usize, r: usize) -> Complex64 {
        self.values[(s * self.n_sc + k) * self.n_rx + r]
    }
}

/// Effective per-subcarrier channel seen by each receive antenna, index
/// k·n_rx + r.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveChannel {
    pub n_rx: usize,
    pub values: Vec<Complex64>,
}

impl EffectiveChannel {
    pub fn at(&self, k: usize, r: usize) -> Complex64 {
        self.values[k * self.n_rx + r]
    }

    pub fn unit(n_sc: usize) -> Self {
        EffectiveChannel {
            n_rx: 1,
            values: vec![Complex64::new(1.0, 0.0); n_sc],
        }
    }
}

/// Per-symbol CPE estimates: arg Σ y·conj(H p) over the PTRS of each bearing
/// symbol, linear interpolation of the unwrapped phase between bearing
/// symbols and nearest-estimate hold at the slot edges.
pub fn estimate_cpe(rx: &RxGrid, tx: &SlotGrid, h: &EffectiveChannel) -> Result<Vec<f64>> {
    if rx.n_sc != tx.n_sc || h.values.len() != tx.n_sc * rx.n_rx || h.n_rx != rx.n_rx {
        return Err(Error::Dimension {
            what: "receive grid / channel size",
            expected: tx.n_sc * rx.n_rx,
            got: h.values.len(),
        });
    }
    let bearing = tx.bearing_symbols();
    if bearing.is_empty() {
        return Err(Error::Config(
            "no PTRS in the slot; CPE cannot be estimated".into(),
        ));
    }
    let mut raw = Vec::with_capacity(bearing.len());
    for &s in &bearing {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..tx.n_sc {
            if tx.kinds[s * tx.n_sc + k] != ReKind::Ptrs {
                continue;
            }
            let p = tx.at(s, k);
            for r in 0..rx.n_rx {
                acc += rx.at(s, k, r) * (h.at(k, r) * p).conj();
            }
        }
        raw.push(acc.arg());
    }
    let mut unwrapped = raw.clone();
    for i in 1..unwrapped.len() {
        let mut d = unwrapped[i] - unwrapped[i - 1];
        d -= std::f64::consts::TAU * (d / std::f64::consts::TAU).round();
        unwrapped[i] = unwrapped[i - 1] + d;
    }
    let mut est = vec![0.0; SYMBOLS_PER_SLOT];
    for (s, e) in est.iter_mut().enumerate() {
        let after = bearing.partition_point(|&b| b < s);
        *e = if after < bearing.len() && bearing[after] == s {
            raw[after]
        } else if after == 0 {
            unwrapped[0]
        } else if after == bearing.len() {
            unwrapped[bearing.len() - 1]
        } else {
            let (s0, s1) = (bearing[after - 1], bearing[after]);
            let w = (s - s0) as f64 / (s1 - s0) as f64;
            unwrapped[after - 1] + w * (unwrapped[after] - unwrapped[after - 1])
        };
    }
    Ok(est)
}

/// Multiplies every RE of symbol s by e^{−jφ̂ₛ}.
pub fn correct_cpe(rx: &RxGrid, estimates: &[f64]) -> Result<RxGrid> {
    if estimates.len() * rx.n_sc * rx.n_rx != rx.values.len() {
        return Err(Error::Dimension {
            what: "CPE estimates (one per symbol)",
            expected: rx.values.len() / (rx.n_sc * rx.n_rx).max(1),
            got: estimates.len(),
        });
    }
    let per_symbol = rx.n_sc * rx.n_rx;
    let mut out = rx.clone();
    for (s, chunk) in out.values.chunks_mut(per_symbol).enumerate() {
        let rot = Complex64::from_polar(1.0, -estimates[s]);
        chunk.iter_mut().for_each(|v| *v *= rot);
    }
    Ok(out)
}
