use proptest::prelude::*;

use yles::ed::{eigendecompose, ground_state};
use yles::floquet::{readout_magnetization, spin_echo_identity};
use yles::model::{build_hamiltonian, magnetization};
use yles::quench::detect_kink;
use yles::scaling::{fit_exponent, SizePoint};
use yles::{c64, Axis, ModelParams};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn spectrum_is_closed_under_conjugation(
        l in 2usize..=6, hx in 0.5f64..2.0, gamma in 0.0f64..0.5
    ) {
        let p = ModelParams::new(l, 1.0, hx, gamma).unwrap();
        let spec = eigendecompose(&build_hamiltonian(&p).unwrap()).unwrap();
        prop_assert!(spec.conjugation_defect() <= 1e-9);
        let gs = ground_state(&spec, &p).unwrap();
        let min_re = spec.eigenvalues.iter().map(|e| e.re).fold(f64::INFINITY, f64::min);
        prop_assert!((gs.energy.re - min_re).abs() <= 1e-9 * min_re.abs().max(1.0));
    }

    #[test]
    fn hermitian_point_has_real_spectrum(l in 2usize..=6, hx in 0.5f64..2.0) {
        let p = ModelParams::new(l, 1.0, hx, 0.0).unwrap();
        let spec = eigendecompose(&build_hamiltonian(&p).unwrap()).unwrap();
        prop_assert!(spec.max_abs_imag() <= 1e-10);
    }
}

proptest! {
    #[test]
    fn planted_power_law_is_recovered(
        gamma_inf in 0.05f64..0.3, amp in 0.1f64..5.0, alpha in 1.0f64..3.5
    ) {
        let points: Vec<SizePoint> = [8usize, 10, 12, 14, 16]
            .iter()
            .map(|&l| SizePoint { l, gamma_yl: gamma_inf + amp * (l as f64).powf(-alpha) })
            .collect();
        let fit = fit_exponent(&points, gamma_inf).unwrap();
        prop_assert!((fit.alpha - alpha).abs() < 1e-8);
        prop_assert!((fit.intercept - amp.ln()).abs() < 1e-8);
    }

    #[test]
    fn kink_is_equivariant_under_affine_maps(
        x0 in 0.12f64..0.22, scale in 0.1f64..10.0, offset in -1.0f64..1.0, shift in -0.5f64..0.5
    ) {
        let grid: Vec<f64> = (0..=70).map(|i| i as f64 * 0.005).collect();
        let curve: Vec<f64> = grid.iter().map(|&g| 0.2 + 0.5 * ((g - x0) / 0.01).tanh()).collect();
        let base = detect_kink(&grid, &curve, 8).unwrap();
        prop_assert!((base.gamma_yl - x0).abs() <= 0.0025 + 1e-9);

        let mapped: Vec<f64> = curve.iter().map(|m| scale * m + offset).collect();
        let k = detect_kink(&grid, &mapped, 8).unwrap();
        prop_assert!((k.gamma_yl - base.gamma_yl).abs() < 1e-9);

        let moved: Vec<f64> = grid.iter().map(|g| g + shift).collect();
        let k = detect_kink(&moved, &curve, 8).unwrap();
        prop_assert!((k.gamma_yl - base.gamma_yl - shift).abs() < 1e-9);
    }

    #[test]
    fn spin_echo_product_is_minus_identity(j0 in -50.0f64..50.0, dtau in 0.0f64..10.0) {
        prop_assert!(spin_echo_identity(j0, dtau) <= 1e-14);
    }

    #[test]
    fn readout_rotation_matches_direct_expectation(
        amps in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 8)
    ) {
        let v: Vec<c64> = amps.iter().map(|&(re, im)| c64::new(re, im)).collect();
        prop_assume!(v.iter().map(|a| a.norm_sqr()).sum::<f64>() > 1e-3);
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            prop_assert!((readout_magnetization(&v, 3, axis) - magnetization(axis, 3, &v)).abs() < 1e-12);
        }
    }
}
