use polariton_core::aah::{
    count_bands, harper_spectrum, hofstadter_butterfly, self_aah_spectrum, semianalytic_butterfly,
    Boundary, HarperParams, OmegaMode, SelfAahParams,
};
use polariton_core::params::ALIGN_OFFSET;
use polariton_core::ModelParams;
use proptest::prelude::*;

#[test]
fn self_aah_levels_satisfy_the_continuum_equation() {
    let model = ModelParams::new(40, 0.02).unwrap();
    for j in [2, 5, 9] {
        let s = self_aah_spectrum(&SelfAahParams::new(model, j).unwrap()).unwrap();
        assert_eq!(s.energies.len() + s.dropped, 40);
        assert!(s.max_residual() < 1e-8, "j = {j}: {}", s.max_residual());
        assert!(s.max_imag() < 1e-9);
    }
}

#[test]
fn semianalytic_butterfly_is_sorted_and_aligned() {
    let model = ModelParams::new(20, 0.02).unwrap();
    let pts = semianalytic_butterfly(&model, OmegaMode::Analytic).unwrap();
    assert!(pts
        .windows(2)
        .all(|w| (w[0].flux, w[0].energy) <= (w[1].flux, w[1].energy)));
    for j in 1..20 {
        let col: Vec<_> = pts.iter().filter(|p| p.j == j).collect();
        assert!(!col.is_empty());
        let min = col
            .iter()
            .map(|p| p.energy_aligned)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(min, ALIGN_OFFSET);
    }
}

#[test]
fn hofstadter_column_matches_direct_solve() {
    let pts = hofstadter_butterfly(30, 0.25, 0.0).unwrap();
    assert_eq!(pts.len(), 30 * 5);
    let direct =
        harper_spectrum(&HarperParams::new(30, 0.25, 0.0, Boundary::Open).unwrap()).unwrap();
    let col: Vec<f64> = pts
        .iter()
        .filter(|p| p.alpha == 0.25)
        .map(|p| p.energy)
        .collect();
    assert_eq!(col, direct.energies);
}

#[test]
fn periodic_ring_band_counts() {
    for (q, alpha) in [(2, 0.5), (3, 1.0 / 3.0), (5, 0.2)] {
        let p = HarperParams::new(60, alpha, 0.37, Boundary::Periodic).unwrap();
        let s = harper_spectrum(&p).unwrap();
        assert_eq!(count_bands(&s.energies, 10.0), q);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn flux_reflection_mirrors_the_phase(alpha in 0.0f64..1.0, k_y in -3.0f64..3.0) {
        let a = harper_spectrum(&HarperParams::new(24, alpha, k_y, Boundary::Open).unwrap()).unwrap();
        let b = harper_spectrum(&HarperParams::new(24, 1.0 - alpha, -k_y, Boundary::Open).unwrap()).unwrap();
        for (x, y) in a.energies.iter().zip(&b.energies) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn harper_spectrum_is_bounded(alpha in 0.0f64..1.0, k_y in -3.0f64..3.0) {
        let s = harper_spectrum(&HarperParams::new(18, alpha, k_y, Boundary::Periodic).unwrap()).unwrap();
        prop_assert!(s.energies.iter().all(|e| e.abs() <= 4.0 + 1e-12));
        prop_assert!(s.ipr.iter().all(|&p| p > 0.0 && p <= 1.0 + 1e-12));
    }
}
