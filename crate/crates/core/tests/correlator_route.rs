use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use qfi::correlator::*;
use qfi::exact::{duhamel_generator, qfi_generator_variance, QuadratureConfig, QuantumState};
use qfi::linalg::{c, expectation, to_complex, CMatrix};
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

fn small_force_model() -> (ModelSpec, QuantumState) {
    let spec = ModelSpec::harmonic(1.0, 0.0).with_discretization(Discretization::Grid {
        half_width: 8.0,
        points: 64,
    });
    let psi = initial_state(&spec, &StateKind::Ground).unwrap().state;
    (spec, psi)
}

#[test]
fn heisenberg_rotation_of_sigma_x() {
    let fam = build_quantum(&ModelSpec::qubit_phase()).unwrap();
    // H = λσ_z/2 with λ = 2 is σ_z.
    let out = heisenberg_matrix(&fam, &[2.0], &sx(), PI / 2.0).unwrap();
    assert!((out + sx()).norm() < 1e-10);
    let same = heisenberg_matrix(&fam, &[2.0], &sz(), 1.3).unwrap();
    assert!((same - sz()).norm() < 1e-12);
    let start = heisenberg_matrix(&fam, &[2.0], &sx(), 0.0).unwrap();
    assert!((start - sx()).norm() < 1e-14);
}

#[test]
fn qubit_phase_correlator_integral_is_t_squared() {
    let fam = build_quantum(&ModelSpec::qubit_phase()).unwrap();
    for t in [0.5, 1.0, 2.0] {
        let f = qfi_correlator_integral(&fam, &plus(), &[0.0], t, 0).unwrap().value;
        assert!((f - t * t).abs() < 1e-12);
    }
    let eig = qfi_correlator_integral(&fam, &QuantumState::basis(2, 1), &[0.3], 1.0, 0).unwrap();
    assert!(eig.value.abs() < 1e-14);
}

#[test]
fn force_model_correlator_integral_matches_closed_form_and_variance() {
    let spec = ModelSpec::harmonic(1.0, 0.0);
    let fam = build_quantum(&spec).unwrap();
    let psi = initial_state(&spec, &StateKind::Ground).unwrap().state;
    let f = qfi_correlator_integral(&fam, &psi, &spec.parameters(), PI, 1).unwrap().value;
    assert!((f - 8.0).abs() < 8e-3);
    let g = duhamel_generator(&fam, &spec.parameters(), PI, 1, &QuadratureConfig::default()).unwrap();
    let v = qfi_generator_variance(&psi, &g).unwrap().value;
    assert!((f - v).abs() < 1e-8 * v);
}

#[test]
fn correlator_integral_equals_variance_on_static_catalog() {
    for spec in ModelSpec::catalog().into_iter().filter(|s| !s.is_time_dependent()) {
        let fam = build_quantum(&spec).unwrap();
        let kind = if spec.is_qubit() {
            StateKind::Bloch { theta: 0.9, phi: 1.7 }
        } else {
            StateKind::Ground
        };
        let psi = initial_state(&spec, &kind).unwrap().state;
        for param in 0..fam.n_params() {
            let f = qfi_correlator_integral(&fam, &psi, &spec.parameters(), 1.7, param).unwrap().value;
            let g = duhamel_generator(&fam, &spec.parameters(), 1.7, param, &QuadratureConfig::default()).unwrap();
            let v = qfi_generator_variance(&psi, &g).unwrap().value;
            assert!((f - v).abs() <= 1e-8 * v.max(1e-12), "{} param {param}: {f} vs {v}", spec.id());
        }
    }
}

#[test]
fn driven_model_uses_flagged_fallback() {
    let spec = ModelSpec::driven(1.0, 0.5, 1.3).with_discretization(Discretization::Fock { n_max: 16 });
    let fam = build_quantum(&spec).unwrap();
    let psi = initial_state(&spec, &StateKind::Ground).unwrap().state;
    let est = qfi_correlator_integral(&fam, &psi, &spec.parameters(), 1.0, 0).unwrap();
    assert!(est.metadata.warnings.iter().any(|w| w.contains("quadrature")));
}

#[test]
fn log_z_without_kicks_vanishes() {
    let fam = build_quantum(&ModelSpec::qubit_mixed_axis(0.3)).unwrap();
    let grid = TimeGrid::new(2.0, 8).unwrap();
    let lz = ctp_log_z(&fam, &plus(), &[0.3], grid, &sx(), (&SourceProfile::empty(Branch::Plus), &SourceProfile::empty(Branch::Minus))).unwrap();
    assert!(lz.norm() < 1e-14);
}

#[test]
fn identical_kicks_cancel() {
    let fam = build_quantum(&ModelSpec::qubit_mixed_axis(0.3)).unwrap();
    let grid = TimeGrid::new(2.0, 8).unwrap();
    let lz = ctp_log_z(
        &fam,
        &plus(),
        &[0.3],
        grid,
        &sx(),
        (&SourceProfile::kick(Branch::Plus, 5, 0.2), &SourceProfile::kick(Branch::Minus, 5, 0.2)),
    )
    .unwrap();
    assert!(lz.norm() < 1e-14, "{lz}");
}

#[test]
fn single_plus_kick_measures_the_mean() {
    let fam = build_quantum(&ModelSpec::qubit_mixed_axis(0.3)).unwrap();
    let grid = TimeGrid::new(2.0, 8).unwrap();
    let psi = QuantumState::from_real(&[0.9, 0.3]).unwrap();
    let eps = 1e-3;
    for k in [0, 3, 8] {
        let lz = ctp_log_z(&fam, &psi, &[0.3], grid, &sx(), (&SourceProfile::kick(Branch::Plus, k, eps), &SourceProfile::empty(Branch::Minus))).unwrap();
        let oh = heisenberg_matrix(&fam, &[0.3], &sx(), grid.node(k)).unwrap();
        let mean = expectation(&oh, psi.amplitudes()).re;
        assert!((lz.im / eps - mean).abs() < 1e-5, "slice {k}");
    }
}

#[test]
fn kick_outside_grid_is_rejected() {
    let fam = build_quantum(&ModelSpec::qubit_phase()).unwrap();
    let grid = TimeGrid::new(1.0, 4).unwrap();
    let err = ctp_log_z(&fam, &plus(), &[0.0], grid, &sz(), (&SourceProfile::kick(Branch::Plus, 5, 1e-3), &SourceProfile::empty(Branch::Minus)));
    assert!(err.is_err());
}

#[test]
fn orthogonal_branches_hit_the_log_domain_guard() {
    let fam = build_quantum(&ModelSpec::qubit_phase()).unwrap();
    let grid = TimeGrid::new(1.0, 4).unwrap();
    // e^{iπσ_x/2} = iσ_x sends |0⟩ to i|1⟩, orthogonal to the unkicked branch.
    let err = ctp_log_z(
        &fam,
        &QuantumState::basis(2, 0),
        &[0.0],
        grid,
        &sx(),
        (&SourceProfile::kick(Branch::Plus, 0, PI / 2.0), &SourceProfile::empty(Branch::Minus)),
    );
    assert!(matches!(err, Err(QfiError::LogDomain(_))), "{err:?}");
}

#[test]
fn qubit_phase_mixed_derivative_is_a_quarter() {
    let fam = build_quantum(&ModelSpec::qubit_phase()).unwrap();
    let grid = TimeGrid::new(1.0, 8).unwrap();
    let o = sz() * c(0.5);
    for (a, b) in [(0, 0), (2, 7), (8, 1)] {
        let d = ctp_mixed_derivative(&fam, &plus(), &[0.0], grid, &o, a, b, 1e-3).unwrap();
        assert!((d - c(0.25)).norm() < 1e-6, "({a},{b}): {d}");
    }
}

#[test]
fn no_fluctuations_no_mixed_derivative() {
    let fam = build_quantum(&ModelSpec::qubit_phase()).unwrap();
    let grid = TimeGrid::new(1.0, 4).unwrap();
    let d = ctp_mixed_derivative(&fam, &QuantumState::basis(2, 0), &[0.4], grid, &sz(), 1, 3, 1e-3).unwrap();
    assert!(d.norm() < 1e-8);
}

#[test]
fn kick_strength_outside_range_is_rejected() {
    let fam = build_quantum(&ModelSpec::qubit_phase()).unwrap();
    let grid = TimeGrid::new(1.0, 4).unwrap();
    assert!(ctp_mixed_derivative(&fam, &plus(), &[0.0], grid, &sz(), 1, 3, 0.1).is_err());
}

#[test]
fn branch_order_gives_operator_order() {
    let fam = build_quantum(&ModelSpec::qubit_mixed_axis(0.3)).unwrap();
    let grid = TimeGrid::new(2.0, 10).unwrap();
    let contour = CtpContour::new(&fam, &plus(), &[0.3], grid, &sx()).unwrap();
    let (a, b) = (2, 7);
    let forward = contour.mixed_derivative(a, b, 1e-3).unwrap();
    let swapped = contour.mixed_derivative(b, a, 1e-3).unwrap();
    let w_ab = contour.wightman(a, b);
    let w_ba = contour.wightman(b, a);
    assert!((forward - w_ab).norm() < 5e-5 * w_ab.norm());
    assert!((swapped - w_ba).norm() < 5e-5 * w_ba.norm());
    assert!(w_ab.im.abs() > 1e-3, "operator order should matter here");
    let sym = symmetrized_correlator(&fam, &plus(), &[0.3], &sx(), grid.node(a), grid.node(b)).unwrap();
    assert!((0.5 * (forward + swapped) - sym).norm() < 5e-5 * sym.norm());
}

#[test]
fn qfi_from_lnz_on_qubit_phase() {
    let fam = build_quantum(&ModelSpec::qubit_phase()).unwrap();
    let est = qfi_from_lnz(&fam, &plus(), &[0.0], TimeGrid::new(1.0, 32).unwrap(), &(sz() * c(0.5))).unwrap();
    assert!((est.value - 1.0).abs() < 2e-3);
    assert!(est.metadata.diagnostics.contains_key("discretization_estimate"));
}

#[test]
fn qfi_from_lnz_on_force_model() {
    let (spec, psi) = small_force_model();
    let fam = build_quantum(&spec).unwrap();
    let o = fam.deformation(&spec.parameters(), 0.0, 1).unwrap();
    let est = qfi_from_lnz(&fam, &psi, &spec.parameters(), TimeGrid::new(PI, 24).unwrap(), &o).unwrap();
    assert!((est.value - 8.0).abs() < 0.16, "{}", est.value);
}

#[test]
fn zero_observable_gives_zero() {
    let fam = build_quantum(&ModelSpec::qubit_phase()).unwrap();
    let est = qfi_from_lnz(&fam, &plus(), &[0.0], TimeGrid::new(1.0, 4).unwrap(), &CMatrix::zeros(2, 2)).unwrap();
    assert_eq!(est.value, 0.0);
}

#[test]
fn too_many_slices_are_rejected() {
    let fam = build_quantum(&ModelSpec::qubit_phase()).unwrap();
    assert!(qfi_from_lnz(&fam, &plus(), &[0.0], TimeGrid::new(1.0, 65).unwrap(), &sz()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn symmetrized_correlator_is_real_and_symmetric(t1 in 0.0f64..3.0, t2 in 0.0f64..3.0, l in -1.0f64..1.0, a in -1.0f64..1.0) {
        let fam = build_quantum(&ModelSpec::qubit_mixed_axis(l)).unwrap();
        let psi = QuantumState::normalized(qfi::linalg::CVector::from_vec(vec![Complex64::new(a, 0.3), c(0.8)])).unwrap();
        let s12 = symmetrized_correlator(&fam, &psi, &[l], &sx(), t1, t2).unwrap();
        let s21 = symmetrized_correlator(&fam, &psi, &[l], &sx(), t2, t1).unwrap();
        prop_assert!(s12.im.abs() < 1e-10);
        prop_assert!((s12 - s21).norm() < 1e-10);
    }
}
