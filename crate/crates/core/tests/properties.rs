use std::f64::consts::PI;

use mmw_core::antenna::{grating_lobe_limit, quantize_phase, BeamWeights};
use mmw_core::ofdm::{conv_encode, pn_dft_coeffs, viterbi_decode, wilson_interval, Interleaver};
use mmw_core::phase_noise::eval_pole_zero_psd;
use mmw_core::{Complex64, PoleZeroPnParams};
use proptest::prelude::*;

fn corners() -> impl Strategy<Value = (Vec<f64>, Vec<f64>)> {
    (1usize..4).prop_flat_map(|n| {
        (
            prop::collection::vec(1e-3f64..50.0, n),
            prop::collection::vec(1e-3f64..50.0, n),
        )
    })
}

proptest! {
    #[test]
    fn carrier_shift_is_twenty_log(
        (poles, zeros) in corners(),
        psd0 in -120.0f64..-40.0,
        base in 1.0f64..100.0,
        carrier in 1.0f64..300.0,
        f in 1.0f64..1e9,
    ) {
        let p = PoleZeroPnParams::new(psd0, poles, zeros, base * 1e9).unwrap();
        let shift = eval_pole_zero_psd(&p, f, carrier * 1e9).unwrap() - eval_pole_zero_psd(&p, f, base * 1e9).unwrap();
        prop_assert!((shift - 20.0 * (carrier / base).log10()).abs() < 1e-9);
    }

    #[test]
    fn pn_coefficients_are_unit_energy(theta in prop::collection::vec(-10.0f64..10.0, 2..256)) {
        let g = pn_dft_coeffs(&theta, theta.len()).unwrap();
        let e: f64 = g.iter().map(|v| v.norm_sqr()).sum();
        prop_assert!((e - 1.0).abs() < 1e-12);
    }

    #[test]
    fn quantization_error_is_bounded(
        phases in prop::collection::vec(-PI..PI, 1..64),
        bits in 1u32..6,
    ) {
        let w = BeamWeights::new(phases.iter().map(|p| Complex64::from_polar(1.0, *p)).collect());
        let q = quantize_phase(&w, bits).unwrap();
        let step = 2.0 * PI / f64::from(1u32 << bits);
        for (a, b) in w.weights.iter().zip(&q.weights) {
            prop_assert!((b.norm() - 1.0).abs() < 1e-12);
            let d = (b / a).arg().abs();
            prop_assert!(d <= step / 2.0 + 1e-9);
            let k = b.arg().rem_euclid(2.0 * PI) / step;
            prop_assert!((k - k.round()).abs() < 1e-9);
        }
    }

    #[test]
    fn grating_limit_falls_with_spacing(a in 0.51f64..0.99, b in 0.51f64..0.99) {
        prop_assume!(a < b);
        prop_assert!(grating_lobe_limit(a).unwrap() > grating_lobe_limit(b).unwrap());
    }

    #[test]
    fn wilson_interval_brackets_the_estimate(n in 1usize..100_000, frac in 0.0f64..=1.0) {
        let k = ((n as f64) * frac).floor() as usize;
        let (lo, hi) = wilson_interval(k, n);
        let p = k as f64 / n as f64;
        prop_assert!(0.0 <= lo && lo <= p + 1e-12 && p <= hi + 1e-12 && hi <= 1.0);
    }

    #[test]
    fn coding_chain_inverts_cleanly(bits in prop::collection::vec(0u8..2, 1..400), seed in any::<u64>()) {
        let coded = conv_encode(&bits);
        let il = Interleaver::new(coded.len(), seed);
        let back = il.deinterleave(&il.interleave(&coded));
        prop_assert_eq!(&back, &coded);
        prop_assert_eq!(viterbi_decode(&back).unwrap(), bits);
    }
}
