use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::coding::{conv_encode, viterbi_decode, FecConfig, FecKind, Interleaver, QamMapper};
use super::config::{
    ChannelKind, ChannelRealization, OfdmConfig, PrbAllocation, PtrsConfig, SYMBOLS_PER_SLOT,
};
use super::pn_model::FftPair;
use super::ptrs::{correct_cpe, estimate_cpe, insert_ptrs, EffectiveChannel, RxGrid, SlotGrid};
use crate::error::{first_violation, Result, Violation};
use crate::phase_noise::{design_pn_filter, PnFilter, PoleZeroPnParams};
use crate::signal::{fill_gaussian_complex, RngStream};

/// Oscillator impairment on either end of the link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkPhaseNoise {
    pub model: PoleZeroPnParams,
    pub carrier_ghz: f64,
    #[serde(default = "yes")]
    pub tx: bool,
    #[serde(default = "yes")]
    pub rx: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BlerExperiment {
    pub ofdm: OfdmConfig,
    pub allocation: PrbAllocation,
    /// `None` sends no pilots and applies no correction.
    pub ptrs: Option<PtrsConfig>,
    /// With pilots present, whether the receiver uses them.
    #[serde(default = "yes")]
    pub cpe_correction: bool,
    pub phase_noise: Option<LinkPhaseNoise>,
    pub channel: ChannelKind,
    pub snr_db: Vec<f64>,
    pub trials: usize,
    #[serde(default)]
    pub fec: FecConfig,
}

impl BlerExperiment {
    pub fn violations(&self) -> Vec<Violation> {
        let mut v = self.ofdm.violations();
        if let Err(e) = self.allocation.check_fits(self.ofdm.n_subcarriers) {
            v.push(Violation::new("allocation.n_prbs", e.to_string()));
        }
        if let Some(p) = &self.ptrs {
            v.extend(p.violations());
        }
        if self.ofdm.n_tx != 1 {
            v.push(Violation::new(
                "ofdm.n_tx",
                "link simulation supports a single transmit antenna",
            ));
        }
        if let Some(pn) = &self.phase_noise {
            if !(pn.carrier_ghz > 0.0 && pn.carrier_ghz.is_finite()) {
                v.push(Violation::new(
                    "phase_noise.carrier_ghz",
                    "must be positive",
                ));
            }
            let nyquist = 0.5 * self.ofdm.sample_rate_hz();
            if let Some(c) = pn
                .model
                .poles_mhz
                .iter()
                .chain(&pn.model.zeros_mhz)
                .find(|c| **c * 1e6 >= nyquist)
            {
                v.push(Violation::new(
                    "phase_noise.model",
                    format!(
                        "corner at {c} MHz is at or above the {:.3} MHz Nyquist rate",
                        nyquist / 1e6
                    ),
                ));
            }
        }
        match &self.channel {
            ChannelKind::UserSupplied { realization } => {
                if realization.n_blocks() != self.ofdm.n_subcarriers
                    || realization.n_rx != self.ofdm.n_rx
                    || realization.n_tx != self.ofdm.n_tx
                {
                    v.push(Violation::new(
                        "channel.realization",
                        "block count or antenna counts disagree with ofdm",
                    ));
                }
            }
            ChannelKind::FlatAwgn | ChannelKind::IidRayleighPerSubcarrier => {}
        }
        if self.snr_db.is_empty() || self.snr_db.iter().any(|s| !s.is_finite()) {
            v.push(Violation::new("snr_db", "needs at least one finite SNR"));
        }
        if self.trials == 0 {
            v.push(Violation::new("trials", "must be at least 1"));
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        first_violation(self.violations())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlerPoint {
    pub snr_db: f64,
    pub bler: f64,
    pub block_errors: usize,
    pub trials: usize,
    /// 95 % Wilson interval.
    pub ci_low: f64,
    pub ci_high: f64,
    pub ci_halfwidth: f64,
    /// Data resource elements per slot (pilots excluded).
    pub data_res: usize,
    pub info_bits: usize,
    /// info_bits / data_res.
    pub spectral_efficiency: f64,
}

/// 95 % Wilson score interval for `k` successes in `n` trials.
pub fn wilson_interval(k: usize, n: usize) -> (f64, f64) {
    let z = 1.959_963_984_540_054;
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0 {
        0.0
    } else {
        (centre - half).max(0.0)
    };
    let hi = if k as f64 == n {
        1.0
    } else {
        (centre + half).min(1.0)
    };
    (lo, hi)
}

/// Everything fixed across trials.
struct LinkSetup {
    n: usize,
    cp: usize,
    n_rx: usize,
    alloc: PrbAllocation,
    grid: SlotGrid,
    mapper: QamMapper,
    interleaver: Interleaver,
    fec: FecConfig,
    info_bits: usize,
    coded_bits: usize,
    filter: Option<(PnFilter, usize, bool, bool)>,
    correct: bool,
    channel: ChannelKind,
    fft: FftPair,
}

impl LinkSetup {
    fn new(exp: &BlerExperiment) -> Result<Self> {
        exp.validate()?;
        let n = exp.ofdm.n_subcarriers;
        let empty = SlotGrid::new(&exp.allocation);
        let grid = match &exp.ptrs {
            Some(p) => insert_ptrs(&empty, p)?,
            None => empty,
        };
        let mapper = QamMapper::new(exp.ofdm.modulation);
        let coded_bits = grid.data_count() * mapper.bits_per_symbol();
        let info_bits = exp.fec.info_bits(coded_bits)?;
        let filter = match &exp.phase_noise {
            Some(pn) if pn.tx || pn.rx => {
                let f =
                    design_pn_filter(&pn.model, pn.carrier_ghz * 1e9, exp.ofdm.sample_rate_hz())?;
                let w = f.default_warmup();
                Some((f, w, pn.tx, pn.rx))
            }
            _ => None,
        };
        Ok(LinkSetup {
            n,
            cp: exp.ofdm.cp_len,
            n_rx: exp.ofdm.n_rx,
            alloc: exp.allocation,
            grid,
            mapper,
            interleaver: Interleaver::new(coded_bits, exp.fec.interleaver_seed),
            fec: exp.fec,
            info_bits,
            coded_bits,
            filter,
            correct: exp.ptrs.is_some() && exp.cpe_correction,
            channel: exp.channel.clone(),
            fft: FftPair::new(n),
        })
    }

    fn rotations(&self, rng: &mut RngStream, on: bool) -> Result<Option<Vec<Complex64>>> {
        match &self.filter {
            Some((f, warmup, _, _)) if on => {
                let len = SYMBOLS_PER_SLOT * (self.n + self.cp);
                let theta = f.generate(len, *warmup, rng)?;
                Ok(Some(
                    theta
                        .phase_rad()
                        .iter()
                        .map(|t| Complex64::from_polar(1.0, *t))
                        .collect(),
                ))
            }
            _ => Ok(None),
        }
    }

    /// Returns whether the block was decoded with an error.
    fn trial(&self, noise_variance: f64, mut rng: RngStream) -> Result<bool> {
        let mut pn_rng = rng.substream(1);
        let mut chan_rng = rng.substream(2);
        let info: Vec<u8> = (0..self.info_bits).map(|_| rng.bit()).collect();
        let coded = match self.fec.kind {
            FecKind::Convolutional => conv_encode(&info),
            FecKind::Uncoded => info.clone(),
        };
        debug_assert_eq!(coded.len(), self.coded_bits);
        let tx_bits = self.interleaver.interleave(&coded);
        let mut grid = self.grid.clone();
        grid.fill_data(&self.mapper.map(&tx_bits)?)?;

        let h = match &self.channel {
            ChannelKind::FlatAwgn => ChannelRealization::flat(self.n, self.n_rx, 1),
            ChannelKind::IidRayleighPerSubcarrier => {
                ChannelRealization::rayleigh(self.n, self.n_rx, 1, &mut chan_rng)
            }
            ChannelKind::UserSupplied { realization } => realization.clone(),
        };
        let (tx_on, rx_on) = self.filter.as_ref().map_or((false, false), |f| (f.2, f.3));
        let rot_tx = self.rotations(&mut pn_rng, tx_on)?;
        let rot_rx = self.rotations(&mut pn_rng, rx_on)?;

        let n_sc = grid.n_subcarriers();
        let mut rx = RxGrid {
            n_sc,
            n_rx: self.n_rx,
            values: vec![Complex64::new(0.0, 0.0); n_sc * SYMBOLS_PER_SLOT * self.n_rx],
        };
        let mut noise = vec![Complex64::new(0.0, 0.0); n_sc * self.n_rx];
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n];
        let mut branch = vec![Complex64::new(0.0, 0.0); self.n];
        let sym_len = self.n + self.cp;
        for s in 0..SYMBOLS_PER_SLOT {
            buf.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
            for (i, v) in grid.symbol(s).iter().enumerate() {
                buf[self.alloc.bin(i, self.n)] = *v;
            }
            let start = s * sym_len + self.cp;
            if let Some(r) = &rot_tx {
                self.rotate(&mut buf, &r[start..start + self.n]);
            }
            fill_gaussian_complex(&mut rng, &mut noise, noise_variance);
            for r in 0..self.n_rx {
                for (k, b) in branch.iter_mut().enumerate() {
                    *b = h.at(k, r, 0) * buf[k];
                }
                if let Some(rr) = &rot_rx {
                    self.rotate(&mut branch, &rr[start..start + self.n]);
                }
                for i in 0..n_sc {
                    rx.values[(s * n_sc + i) * self.n_rx + r] =
                        branch[self.alloc.bin(i, self.n)] + noise[i * self.n_rx + r];
                }
            }
        }

        let heff = EffectiveChannel {
            n_rx: self.n_rx,
            values: (0..n_sc)
                .flat_map(|i| (0..self.n_rx).map(move |r| (i, r)))
                .map(|(i, r)| h.at(self.alloc.bin(i, self.n), r, 0))
                .collect(),
        };
        if self.correct {
            let est = estimate_cpe(&rx, &grid, &heff)?;
            rx = correct_cpe(&rx, &est)?;
        }

        let mut equalized = Vec::with_capacity(grid.data_count());
        for (idx, kind) in grid.kinds().iter().enumerate() {
            if *kind != super::ptrs::ReKind::Data {
                continue;
            }
            let (s, i) = (idx / n_sc, idx % n_sc);
            let mut num = Complex64::new(0.0, 0.0);
            let mut den = 0.0;
            for r in 0..self.n_rx {
                let hv = heff.at(i, r);
                num += hv.conj() * rx.at(s, i, r);
                den += hv.norm_sqr();
            }
            equalized.push(if den > 0.0 {
                num / den
            } else {
                Complex64::new(0.0, 0.0)
            });
        }
        let rx_bits = self.mapper.demap(&equalized);
        if rx_bits == tx_bits {
            return Ok(false);
        }
        let decoded_in = self.interleaver.deinterleave(&rx_bits);
        Ok(match self.fec.kind {
            FecKind::Uncoded => true,
            FecKind::Convolutional => viterbi_decode(&decoded_in)? != info,
        })
    }

    fn rotate(&self, x: &mut [Complex64], rot: &[Complex64]) {
        super::pn_model::rotate_symbol(&self.fft, x, rot);
    }
}

/// Monte-Carlo BLER per SNR point. Trial t of point p draws from
/// `root.substream(p·2³² + t)`, so results do not depend on thread count.
pub fn run_bler(experiment: &BlerExperiment, root: &RngStream) -> Result<Vec<BlerPoint>> {
    let setup = LinkSetup::new(experiment)?;
    let data_res = setup.grid.data_count();
    let mut points = Vec::with_capacity(experiment.snr_db.len());
    for (p, &snr) in experiment.snr_db.iter().enumerate() {
        let noise_variance = 10f64.powf(-snr / 10.0);
        let errors = (0..experiment.trials)
            .into_par_iter()
            .map(|t| {
                setup
                    .trial(
                        noise_variance,
                        root.substream(((p as u64) << 32) | t as u64),
                    )
                    .map(usize::from)
            })
            .try_reduce(|| 0, |a, b| Ok(a + b))?;
        let (lo, hi) = wilson_interval(errors, experiment.trials);
        points.push(BlerPoint {
            snr_db: snr,
            bler: errors as f64 / experiment.trials as f64,
            block_errors: errors,
            trials: experiment.trials,
            ci_low: lo,
            ci_high: hi,
            ci_halfwidth: 0.5 * (hi - lo),
            data_res,
            info_bits: setup.info_bits,
            spectral_efficiency: setup.info_bits as f64 / data_res as f64,
        });
    }
    Ok(points)
}
