use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qfi::exact::*;
use qfi::linalg::{c, to_complex, CMatrix, CVector};
use qfi::models::{build_quantum, initial_state, Discretization, ModelSpec, StateKind};
use qfi::QfiError;

fn sz() -> CMatrix {
    to_complex(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]))
}

fn sx() -> CMatrix {
    to_complex(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]))
}

fn plus() -> QuantumState {
    QuantumState::from_real(&[1.0, 1.0]).unwrap()
}

fn random_hermitian(n: usize, seed: u64) -> CMatrix {
    let mut s = seed;
    let mut next = || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
    };
    let a = CMatrix::from_fn(n, n, |_, _| Complex64::new(next(), next()));
    (&a + a.adjoint()) * c(0.5)
}

#[test]
fn zero_hamiltonian_propagates_trivially() {
    let fam = HamiltonianFamily::linear(CMatrix::zeros(3, 3), vec![], 1.0, vec![]).unwrap();
    let u = evolution_operator(&fam, &[], 0.0, 2.7).unwrap();
    assert!((u - CMatrix::identity(3, 3)).norm() < 1e-14);
}

#[test]
fn two_level_phase_after_pi() {
    let h = to_complex(&DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 0.0, 1.0]));
    let fam = HamiltonianFamily::linear(h, vec![], 1.0, vec![]).unwrap();
    let out = propagate(&fam, &[], 0.0, PI, &QuantumState::basis(2, 1)).unwrap();
    assert!((out.amplitudes()[1] - c(-1.0)).norm() < 1e-12);
}

#[test]
fn random_hermitian_evolution_is_unitary_and_conserves_energy() {
    let h = random_hermitian(8, 3);
    let fam = HamiltonianFamily::linear(h.clone(), vec![], 1.0, vec![]).unwrap();
    let u = evolution_operator(&fam, &[], 0.0, 3.3).unwrap();
    assert!((u.adjoint() * &u - CMatrix::identity(8, 8)).norm() < 1e-10);
    let psi = QuantumState::normalized(CVector::from_fn(8, |i, _| Complex64::new(1.0 + i as f64, -0.3 * i as f64))).unwrap();
    let out = propagate(&fam, &[], 0.0, 3.3, &psi).unwrap();
    let e0 = qfi::linalg::expectation(&h, psi.amplitudes()).re;
    let e1 = qfi::linalg::expectation(&h, out.amplitudes()).re;
    assert!((out.amplitudes().norm() - 1.0).abs() < 1e-10);
    assert!((e0 - e1).abs() < 1e-10);
}

#[test]
fn commuting_deformation_gives_linear_generator() {
    let fam = HamiltonianFamily::linear(CMatrix::zeros(2, 2), vec![sz() * c(0.5)], 1.0, vec!["l".into()]).unwrap();
    let g = duhamel_generator(&fam, &[0.4], 1.7, 0, &QuadratureConfig::default()).unwrap();
    assert!((g.matrix - sz() * c(0.5 * 1.7)).norm() < 1e-12);
}

#[test]
fn generator_matches_finite_difference_of_propagator() {
    let fam = HamiltonianFamily::linear(sz(), vec![sx()], 1.0, vec!["l".into()]).unwrap();
    let (l, t, h) = (0.3, 2.0, 1e-5);
    let g = duhamel_generator(&fam, &[l], t, 0, &QuadratureConfig::default()).unwrap();
    let u = evolution_operator(&fam, &[l], 0.0, t).unwrap();
    let du = (evolution_operator(&fam, &[l + h], 0.0, t).unwrap() - evolution_operator(&fam, &[l - h], 0.0, t).unwrap())
        / c(2.0 * h);
    let fd = u.adjoint() * du * Complex64::new(0.0, 1.0);
    let defect = (g.matrix - fd).norm();
    assert!(defect < 1e-7, "{defect}");
}

#[test]
fn qubit_phase_qfi_is_t_squared() {
    let fam = build_quantum(&ModelSpec::qubit_phase()).unwrap();
    let cfg = QuadratureConfig::default();
    for t in [0.5, 1.0, 2.0] {
        let g = duhamel_generator(&fam, &[0.0], t, 0, &cfg).unwrap();
        let var = qfi_generator_variance(&plus(), &g).unwrap().value;
        let fd = qfi_overlap_fd(&fam, &plus(), &[0.0], t, 0, None).unwrap().value;
        assert!((var - t * t).abs() < 1e-10);
        assert!((fd - t * t).abs() < 1e-6);
    }
}

#[test]
fn eigenstate_of_commuting_generator_has_zero_qfi() {
    let fam = build_quantum(&ModelSpec::qubit_phase()).unwrap();
    let g = duhamel_generator(&fam, &[0.7], 3.0, 0, &QuadratureConfig::default()).unwrap();
    let est = qfi_generator_variance(&QuantumState::basis(2, 0), &g).unwrap();
    assert!(est.value.abs() < 1e-14);
}

#[test]
fn zero_time_gives_zero_qfi() {
    let fam = build_quantum(&ModelSpec::qubit_mixed_axis(0.3)).unwrap();
    let g = duhamel_generator(&fam, &[0.3], 0.0, 0, &QuadratureConfig::default()).unwrap();
    assert_eq!(qfi_generator_variance(&plus(), &g).unwrap().value, 0.0);
}

#[test]
fn qfim_of_one_parameter_is_the_variance() {
    let fam = build_quantum(&ModelSpec::qubit_mixed_axis(0.3)).unwrap();
    let cfg = QuadratureConfig::default();
    let m = qfim(&fam, &plus(), &[0.3], 1.3, &cfg).unwrap();
    let g = duhamel_generator(&fam, &[0.3], 1.3, 0, &cfg).unwrap();
    assert_eq!(m.entry(0, 0), qfi_generator_variance(&plus(), &g).unwrap().value);
}

#[test]
fn wrong_state_dimension_is_rejected() {
    let fam = build_quantum(&ModelSpec::qubit_phase()).unwrap();
    let err = qfi_overlap_fd(&fam, &QuantumState::basis(3, 0), &[0.0], 1.0, 0, None);
    assert!(matches!(err, Err(QfiError::DimensionMismatch { .. })));
}

#[test]
fn unnormalized_state_is_rejected() {
    let v = CVector::from_vec(vec![c(1.0), c(1.0)]);
    assert!(matches!(QuantumState::new(v), Err(QfiError::NotNormalized(_))));
}

#[test]
fn tiny_step_is_flagged() {
    let fam = build_quantum(&ModelSpec::qubit_phase()).unwrap();
    let est = qfi_overlap_fd(&fam, &plus(), &[0.0], 1.0, 0, Some(1e-10)).unwrap();
    assert!(!est.metadata.warnings.is_empty());
}

#[test]
fn force_sensing_closed_form() {
    let spec = ModelSpec::harmonic(1.0, 0.0);
    let fam = build_quantum(&spec).unwrap();
    let psi = initial_state(&spec, &StateKind::Ground).unwrap().state;
    for t in [PI / 4.0, PI / 2.0, PI] {
        let g = duhamel_generator(&fam, &spec.parameters(), t, 1, &QuadratureConfig::default()).unwrap();
        let f = qfi_generator_variance(&psi, &g).unwrap().value;
        let exact = 4.0 * (1.0 - t.cos());
        assert!((f - exact).abs() < 1e-3 * exact, "t={t}: {f} vs {exact}");
    }
}

#[test]
fn driven_oscillator_routes_agree() {
    let spec = ModelSpec::driven(1.0, 0.5, 1.3).with_discretization(Discretization::Fock { n_max: 20 });
    let fam = build_quantum(&spec).unwrap();
    let psi = initial_state(&spec, &StateKind::Ground).unwrap().state;
    let l = spec.parameters();
    for param in 0..2 {
        let g = duhamel_generator(&fam, &l, 1.5, param, &QuadratureConfig::default()).unwrap();
        let var = qfi_generator_variance(&psi, &g).unwrap().value;
        let fd = qfi_overlap_fd(&fam, &psi, &l, 1.5, param, None).unwrap().value;
        assert!((var - fd).abs() < 1e-6 * var.max(1.0), "param {param}: {var} vs {fd}");
    }
}

#[test]
fn insertion_residual_is_small_on_the_catalog() {
    for spec in ModelSpec::catalog() {
        let fam = build_quantum(&spec).unwrap();
        let kind = if spec.is_qubit() {
            StateKind::Bloch { theta: 1.1, phi: 0.4 }
        } else {
            StateKind::Ground
        };
        let psi = initial_state(&spec, &kind).unwrap().state;
        let r = insertion_amplitude_check(&fam, &psi, &spec.parameters(), 1.0, 0, &QuadratureConfig::default()).unwrap();
        assert!(r < 1e-5, "{}: {r}", spec.id());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn qfi_is_invariant_under_global_phase(theta in -3.0f64..3.0, l in -1.0f64..1.0, t in 0.1f64..3.0) {
        let fam = build_quantum(&ModelSpec::qubit_mixed_axis(l)).unwrap();
        let psi = QuantumState::from_real(&[0.8, 0.6]).unwrap();
        let g = duhamel_generator(&fam, &[l], t, 0, &QuadratureConfig::default()).unwrap();
        let a = qfi_generator_variance(&psi, &g).unwrap().value;
        let b = qfi_generator_variance(&psi.with_global_phase(theta), &g).unwrap().value;
        prop_assert!((a - b).abs() < 1e-12 * a.max(1.0));
    }

    #[test]
    fn qfi_is_nonnegative_and_bounded(l in -1.0f64..1.0, t in 0.0f64..4.0, a in -1.0f64..1.0, b in -1.0f64..1.0) {
        let fam = build_quantum(&ModelSpec::qubit_mixed_axis(l)).unwrap();
        let psi = QuantumState::normalized(CVector::from_vec(vec![Complex64::new(a, 0.2), Complex64::new(b, -0.5)])).unwrap();
        let g = duhamel_generator(&fam, &[l], t, 0, &QuadratureConfig::default()).unwrap();
        let f = qfi_generator_variance(&psi, &g).unwrap().value;
        // ‖∂H‖ = 1 bounds the spread of G by t.
        prop_assert!(f >= 0.0 && f <= 4.0 * t * t + 1e-9);
    }

    #[test]
    fn qfim_is_symmetric_psd(omega in 0.6f64..1.5, t in 0.2f64..2.5) {
        let spec = ModelSpec::harmonic(omega, 0.1).with_discretization(Discretization::Fock { n_max: 24 });
        let fam = build_quantum(&spec).unwrap();
        let psi = initial_state(&spec, &StateKind::Coherent { re: 0.5, im: 0.2 }).unwrap().state;
        let m = qfim(&fam, &psi, &spec.parameters(), t, &QuadratureConfig::default()).unwrap();
        prop_assert_eq!(m.values.clone(), m.values.transpose());
        let min = m.values.clone().symmetric_eigen().eigenvalues.min();
        prop_assert!(min > -1e-8);
    }
}
