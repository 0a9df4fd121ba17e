//! Cross-module flows: pieces that are unit-tested separately, chained the
//! way an experiment uses them.

use mmw_core::antenna::{
    directivity, mask_compliance, quantize_phase, steering_weights, total_pattern, Coverage,
    FarFieldPattern, PatternGrid, PrincipalCut, RadiationMask,
};
use mmw_core::ofdm::{
    decompose_cpe_ici, estimate_cpe, insert_ptrs, pn_dft_coeffs, ChannelRealization,
    EffectiveChannel, PtrsConfig, RxGrid, SlotGrid, SYMBOLS_PER_SLOT,
};
use mmw_core::pa::{
    apply_gmp, apply_poly3, fit_gmp, read_gmp_coefficients, write_gmp_coefficients, GmpStructure,
    Poly3Params, Ridge,
};
use mmw_core::phase_noise::synthesize_phase;
use mmw_core::signal::{fill_gaussian_complex, ComplexSequence};
use mmw_core::{
    ArrayGeometry, Complex64, ElementPattern, PoleZeroPnParams, PrbAllocation, RngStream,
};

#[test]
fn ptrs_tracks_synthesized_common_phase() {
    // 60 kHz spacing, N = 2048: the per-symbol mean of a Set-A trajectory
    let n = 2048;
    let fs = 2048.0 * 60e3;
    let alloc = PrbAllocation::new(20);
    let n_sc = alloc.n_subcarriers();
    let mut rng = RngStream::new(4, 0);
    let theta = synthesize_phase(
        &PoleZeroPnParams::set_a(),
        30e9,
        fs,
        n * SYMBOLS_PER_SLOT,
        &mut rng,
    )
    .unwrap();

    let mut grid = SlotGrid::new(&alloc);
    let mut data = vec![Complex64::new(0.0, 0.0); grid.data_count()];
    fill_gaussian_complex(&mut rng, &mut data, 1.0);
    grid.fill_data(&data).unwrap();
    let tx = insert_ptrs(&grid, &PtrsConfig::new(1, 1)).unwrap();
    let h = ChannelRealization::flat(n_sc, 1, 1);
    let still = pn_dft_coeffs(&vec![0.0; n_sc], n_sc).unwrap();

    let mut values = Vec::new();
    let mut truth = Vec::new();
    for s in 0..SYMBOLS_PER_SLOT {
        // common phase of the symbol, applied to the allocated subcarriers only
        let seg = &theta.phase_rad()[s * n..(s + 1) * n];
        let g = pn_dft_coeffs(seg, n).unwrap();
        truth.push(g[0].arg());
        let rot = pn_dft_coeffs(&vec![g[0].arg(); n_sc], n_sc).unwrap();
        let (cpe, ici) = decompose_cpe_ici(&h, &rot, &still, tx.symbol(s)).unwrap();
        assert!(ici.iter().all(|v| v.norm() == 0.0));
        values.extend(cpe);
    }
    let rx = RxGrid {
        n_sc,
        n_rx: 1,
        values,
    };
    let est = estimate_cpe(&rx, &tx, &EffectiveChannel::unit(n_sc)).unwrap();
    for (e, t) in est.iter().zip(&truth) {
        assert!((e - t).abs() < 1e-12, "{e} vs {t}");
    }
}

#[test]
fn poly3_fits_inside_gmp_and_survives_file_round_trip() {
    let p = Poly3Params::new(Complex64::new(0.9, 0.1), Complex64::new(-0.08, 0.03)).unwrap();
    let mut x = vec![Complex64::new(0.0, 0.0); 4000];
    fill_gaussian_complex(&mut RngStream::new(8, 0), &mut x, 0.5);
    let xs = ComplexSequence::new(x, 1.0).unwrap();
    let y = apply_poly3(&p, &xs).unwrap();
    let s = GmpStructure::new(5, 2, 1, false).unwrap();
    let (model, report) = fit_gmp(&xs, &y, &s, None, Ridge::Auto).unwrap();
    assert!(report.nmse_db < -100.0, "{}", report.nmse_db);

    let text = write_gmp_coefficients(&model);
    let back = read_gmp_coefficients(&text).unwrap();
    assert_eq!(back.structure(), model.structure());
    let a = apply_gmp(&model, &xs, None).unwrap();
    let b = apply_gmp(&back, &xs, None).unwrap();
    let worst = a
        .samples()
        .iter()
        .zip(b.samples())
        .map(|(u, v)| (u - v).norm())
        .fold(0.0, f64::max);
    assert!(worst < 1e-12);
}

#[test]
fn steered_quantized_pattern_round_trips_and_meets_mask() {
    let g = ArrayGeometry::planar(1, 16, 0.5, 0.5).unwrap();
    let w = quantize_phase(&steering_weights(&g, 20f64.to_radians(), 0.0).unwrap(), 3).unwrap();
    let grid = PatternGrid::cut(0.0, 0.25).unwrap();
    let p = total_pattern(&g, &w, &ElementPattern::Isotropic, &grid).unwrap();
    let (theta, _) = p.peak_direction();
    assert!((theta.to_degrees() - 20.0).abs() < 1.0);

    let mut csv = Vec::new();
    p.write_csv(&mut csv).unwrap();
    let back = FarFieldPattern::read_csv(csv.as_slice(), Coverage::Cut).unwrap();
    assert_eq!(back.gain_db().len(), p.gain_db().len());
    // gains are written with six decimals
    assert!((back.peak_gain_dbi() - p.peak_gain_dbi()).abs() < 1e-6);

    // relative limits around the steered peak; phase quantization raises
    // sidelobes but not past −10 dB for 3 bits
    let mask = RadiationMask::new(vec![
        (-180.0, -10.0),
        (-12.0, -10.0),
        (-6.0, 0.0),
        (6.0, 0.0),
        (12.0, -10.0),
        (180.0, -10.0),
    ])
    .unwrap();
    let report = mask_compliance(&p, &mask, PrincipalCut { phi_deg: 0.0 }).unwrap();
    assert!(report.pass, "{report:?}");
}

/// N² / Σₘₙ sinc(k·|rₘ − rₙ|) for uniform in-phase isotropic elements.
fn broadside_directivity_oracle(positions: &[[f64; 3]]) -> f64 {
    let mut denom = 0.0;
    for a in positions {
        for b in positions {
            let kr =
                2.0 * std::f64::consts::PI * ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
            denom += if kr == 0.0 { 1.0 } else { kr.sin() / kr };
        }
    }
    let n = positions.len() as f64;
    10.0 * (n * n / denom).log10()
}

#[test]
fn integrated_directivity_matches_pair_sum() {
    for g in [
        ArrayGeometry::linear(8, 0.5).unwrap(),
        ArrayGeometry::planar(4, 4, 0.5, 0.5).unwrap(),
        ArrayGeometry::planar(3, 5, 0.7, 0.6).unwrap(),
    ] {
        let w = steering_weights(&g, 0.0, 0.0).unwrap();
        let p = total_pattern(
            &g,
            &w,
            &ElementPattern::Isotropic,
            &PatternGrid::sphere(1.0).unwrap(),
        )
        .unwrap();
        let d = directivity(&p).unwrap();
        let oracle = broadside_directivity_oracle(g.positions());
        assert!((d.dbi - oracle).abs() < 0.05, "{} vs {oracle}", d.dbi);
    }
    // half-wave line: exactly N
    let line = ArrayGeometry::linear(8, 0.5).unwrap();
    assert!((broadside_directivity_oracle(line.positions()) - 10.0 * 8f64.log10()).abs() < 1e-9);
}
