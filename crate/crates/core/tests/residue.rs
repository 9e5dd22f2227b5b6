//! The destructive exit keeps a small E residue once A and B are both driven.
//! S is odd in the tilts, so the leading term is cubic: (κ_A - κ_B)² κ_E.

use nested_mz_core::dynamics::{default_drives, power_spectrum, simulate, Sampling};
use nested_mz_core::{normalize_l2, AlignmentMode, InterferometerConfig, Mirror, TiltVector};

fn e_over_a(amplitude: f64) -> f64 {
    let cfg = InterferometerConfig::new(AlignmentMode::DestructiveInner, normalize_l2(1.0).unwrap());
    let mut drives = default_drives(1.0);
    for d in &mut drives {
        d.amplitude = amplitude;
    }
    let trace = simulate(&cfg, &drives, Sampling::default_for(&drives)).unwrap();
    power_spectrum(&trace, &drives)
        .unwrap()
        .peak_ratio(Mirror::E, Mirror::A)
        .unwrap()
}

#[test]
fn e_residue_ratio_scales_as_fourth_power() {
    let lo = e_over_a(3e-4);
    let hi = e_over_a(1e-3);
    let slope = (hi / lo).ln() / (1e-3f64 / 3e-4).ln();
    assert!((slope - 4.0).abs() < 0.1, "slope {slope}");
}

#[test]
fn signal_is_odd_in_tilts() {
    let cfg = InterferometerConfig::new(AlignmentMode::DestructiveInner, normalize_l2(1.0).unwrap());
    let t = TiltVector::new(2e-3, -1e-3, 5e-4, 3e-3, -2e-3);
    let up = nested_mz_core::quad_signal(&cfg.psi_d(&t)).value();
    let down = nested_mz_core::quad_signal(&cfg.psi_d(&t.scaled(-1.0))).value();
    assert!((up + down).abs() <= 1e-15 * up.abs());
}
