use num_complex::Complex64;
use polariton_core::two_polariton::{
    apply_two_polariton, eigensolve_two, SolveOptions, SolverMode,
};
use polariton_core::{Error, ExpKernel, MemoryBudget, ModelParams};
use proptest::prelude::*;

fn params(n: usize) -> ModelParams {
    ModelParams::new(n, 0.2).unwrap()
}

#[test]
fn dense_spectrum_is_complete_and_accurate() {
    let p = params(16);
    let s = eigensolve_two(&p, &SolveOptions::default()).unwrap();
    assert_eq!(s.len(), 16 * 15 / 2);
    let worst = (0..s.len()).map(|i| s.residual(i)).fold(0.0, f64::max);
    assert!(worst < 1e-9, "worst residual {worst}");
    // sorted by real part
    assert!(s.energies().windows(2).all(|w| w[0].re() <= w[1].re()));
    // radiative states decay
    assert!(s.energies().iter().all(|e| e.im() < 1e-10));
}

#[test]
fn amplitudes_are_symmetric_with_empty_diagonal() {
    let s = eigensolve_two(&params(9), &SolveOptions::default()).unwrap();
    for i in [0, 7, s.len() - 1] {
        let a = s.state(i).amplitude;
        for x in 0..9 {
            assert_eq!(a[(x, x)], Complex64::new(0.0, 0.0));
            for y in 0..9 {
                assert!((a[(x, y)] - a[(y, x)]).norm() < 1e-14);
            }
        }
    }
}

#[test]
fn state_is_an_eigenvector_of_the_pair_operator() {
    let p = params(11);
    let s = eigensolve_two(&p, &SolveOptions::default()).unwrap();
    let kernel = ExpKernel::new(&p);
    let st = s.state(20);
    let out = apply_two_polariton(&kernel, &st.amplitude).unwrap();
    let theta = 2.0 * st.energy.0;
    let mut worst = 0.0f64;
    for x in 0..11 {
        for y in 0..11 {
            worst = worst.max((out[(x, y)] - theta * st.amplitude[(x, y)]).norm());
        }
    }
    assert!(worst < 1e-9 * theta.norm().max(1.0));
}

#[test]
fn iterative_matches_dense_near_the_shift() {
    let p = params(14);
    let dense = eigensolve_two(&p, &SolveOptions::default())
        .unwrap()
        .energies();
    let shift = dense[40].0;
    let opts = SolveOptions {
        mode: SolverMode::Iterative { shift, count: 3 },
        ..SolveOptions::default()
    };
    let it = eigensolve_two(&p, &opts).unwrap();
    assert!(!it.is_empty());
    for e in it.energies() {
        let nearest = dense
            .iter()
            .map(|d| (d.0 - e.0).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-8, "{e:?} is not a dense eigenvalue");
    }
    assert!(it.energies().iter().any(|e| (e.0 - shift).norm() < 1e-8));
}

#[test]
fn window_keeps_only_requested_states() {
    let p = params(12);
    let all = eigensolve_two(&p, &SolveOptions::default()).unwrap();
    let opts = SolveOptions {
        window: Some((-1.0, 0.0)),
        ..SolveOptions::default()
    };
    let some = eigensolve_two(&p, &opts).unwrap();
    let expected = all
        .energies()
        .iter()
        .filter(|e| (-1.0..=0.0).contains(&e.re()))
        .count();
    assert_eq!(some.len(), expected);
    assert!(some
        .energies()
        .iter()
        .all(|e| (-1.0..=0.0).contains(&e.re())));
}

#[test]
fn oversized_dense_request_is_refused() {
    let opts = SolveOptions {
        budget: MemoryBudget::from_mib(1),
        ..SolveOptions::default()
    };
    let err = eigensolve_two(&params(300), &opts).unwrap_err();
    assert!(matches!(err, Error::MemoryBudget { .. }), "{err}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn trace_of_the_pair_operator(n in 3usize..10, phi in 0.05f64..1.0) {
        let p = ModelParams::new(n, phi).unwrap();
        let s = eigensolve_two(&p, &SolveOptions::default()).unwrap();
        let single = polariton_core::eigensolve_single(&polariton_core::build_single_hamiltonian(&p)).unwrap();
        let t1: Complex64 = single.iter().map(|m| m.energy.0).sum();
        // each single-particle level appears in N - 1 pairs; energies are per excitation
        let t2: Complex64 = s.energies().iter().map(|e| 2.0 * e.0).sum();
        let expected = t1 * (n as f64 - 1.0);
        prop_assert!((t2 - expected).norm() < 1e-9 * expected.norm().max(1.0));
    }
}
