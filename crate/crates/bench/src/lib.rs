//! Inputs shared by the benchmarks, built once per group.

use mmw_core::ofdm::{
    BlerExperiment, ChannelKind, FecConfig, LinkPhaseNoise, Modulation, OfdmConfig, PtrsConfig,
};
use mmw_core::signal::{fill_gaussian_complex, RngStream};
use mmw_core::{Complex64, PoleZeroPnParams, PrbAllocation};

pub fn gaussian(n: usize, seed: u64) -> Vec<Complex64> {
    let mut x = vec![Complex64::new(0.0, 0.0); n];
    fill_gaussian_complex(&mut RngStream::new(seed, 0), &mut x, 1.0);
    x
}

/// One-trial 64QAM link at 15 kHz spacing with 60 GHz phase noise.
pub fn link(prbs: usize, trials: usize) -> BlerExperiment {
    BlerExperiment {
        ofdm: OfdmConfig {
            n_subcarriers: 2048,
            cp_len: 144,
            subcarrier_spacing_hz: 15e3,
            n_tx: 1,
            n_rx: 1,
            modulation: Modulation::Qam64,
        },
        allocation: PrbAllocation::new(prbs),
        ptrs: Some(PtrsConfig::new(4, 1)),
        cpe_correction: true,
        phase_noise: Some(LinkPhaseNoise {
            model: PoleZeroPnParams::set_b(),
            carrier_ghz: 60.0,
            tx: true,
            rx: true,
        }),
        channel: ChannelKind::FlatAwgn,
        snr_db: vec![20.5],
        trials,
        fec: FecConfig::default(),
    }
}
