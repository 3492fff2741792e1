use std::sync::Arc;

use nalgebra::DMatrix;

use crate::error::{QfiError, Result};
use crate::exact::{HamiltonianFamily, DIM_CAP};
use crate::linalg::{kron, to_complex, CMatrix};
use crate::models::basis::OscillatorBasis;
use crate::models::{Discretization, ModelKind, ModelSpec};

fn pauli_z() -> CMatrix {
    to_complex(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]))
}

fn pauli_x() -> CMatrix {
    to_complex(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]))
}

fn labels(spec: &ModelSpec) -> Vec<String> {
    spec.parameter_labels().iter().map(|s| s.to_string()).collect()
}

/// Basis for the single-mode oscillator models.
pub(crate) fn single_mode_basis(spec: &ModelSpec) -> Result<OscillatorBasis> {
    let omega = spec
        .base_omega()
        .ok_or_else(|| QfiError::UnsupportedModel(format!("{} is not a single-mode oscillator", spec.id())))?;
    match spec.discretization() {
        Some(Discretization::Grid { half_width, points }) => {
            if points > DIM_CAP {
                return Err(QfiError::Resource { dim: points, cap: DIM_CAP });
            }
            Ok(OscillatorBasis::grid(half_width, points, spec.mass, spec.hbar))
        }
        Some(Discretization::Fock { n_max }) => {
            if n_max + 1 > DIM_CAP {
                return Err(QfiError::Resource { dim: n_max + 1, cap: DIM_CAP });
            }
            Ok(OscillatorBasis::fock(n_max, omega, spec.mass, spec.hbar))
        }
        other => Err(QfiError::invalid(format!("unsupported discretization {other:?} for {}", spec.id()))),
    }
}

/// Per-site operators of a lattice model in the product basis.
pub(crate) struct LatticeOperators {
    pub kinetic: DMatrix<f64>,
    pub phi2: DMatrix<f64>,
    pub phi4: DMatrix<f64>,
    pub gradient: DMatrix<f64>,
}

/// Nearest-neighbour bonds of the periodic chain. Two sites share both bonds.
pub(crate) fn lattice_bonds(sites: usize) -> Vec<(usize, usize)> {
    if sites < 2 {
        Vec::new()
    } else {
        (0..sites).map(|i| (i, (i + 1) % sites)).collect()
    }
}

/// Local oscillator frequency `√(m² + 2)` used for the per-site basis.
pub(crate) fn lattice_local_omega(sites: usize, mass_sq: f64) -> f64 {
    let coordination = if sites >= 2 { 2.0 } else { 0.0 };
    (mass_sq + coordination).sqrt()
}

pub(crate) fn lattice_operators(spec: &ModelSpec) -> Result<LatticeOperators> {
    let (sites, mass_sq) = match spec.kind {
        ModelKind::LatticeScalar { sites, mass_sq, .. } => (sites, mass_sq),
        _ => return Err(QfiError::UnsupportedModel(spec.id().into())),
    };
    let n_max = match spec.discretization() {
        Some(Discretization::Lattice { n_max }) => n_max,
        other => return Err(QfiError::invalid(format!("lattice needs a lattice discretization, got {other:?}"))),
    };
    let local = n_max + 1;
    let dim = (0..sites).try_fold(1usize, |acc, _| acc.checked_mul(local)).unwrap_or(usize::MAX);
    if dim > DIM_CAP {
        return Err(QfiError::Resource { dim, cap: DIM_CAP });
    }
    let basis = OscillatorBasis::fock(n_max, lattice_local_omega(sites, mass_sq), 1.0, spec.hbar);
    let eye = DMatrix::<f64>::identity(local, local);
    let embed = |op: &DMatrix<f64>, site: usize| {
        let mut m = DMatrix::<f64>::identity(1, 1);
        for s in 0..sites {
            m = kron(&m, if s == site { op } else { &eye });
        }
        m
    };
    let mut ops = LatticeOperators {
        kinetic: DMatrix::zeros(dim, dim),
        phi2: DMatrix::zeros(dim, dim),
        phi4: DMatrix::zeros(dim, dim),
        gradient: DMatrix::zeros(dim, dim),
    };
    let phis: Vec<DMatrix<f64>> = (0..sites).map(|s| embed(&basis.x, s)).collect();
    let phi2s: Vec<DMatrix<f64>> = (0..sites).map(|s| embed(&basis.x2, s)).collect();
    for s in 0..sites {
        ops.kinetic += embed(&basis.kinetic, s);
        ops.phi2 += &phi2s[s];
        ops.phi4 += embed(&basis.x4, s);
    }
    for (a, b) in lattice_bonds(sites) {
        ops.gradient += (&phi2s[a] + &phi2s[b] - (&phis[a] * &phis[b]) * 2.0) * 0.5;
    }
    Ok(ops)
}

/// Builds the quantum Hamiltonian family for a catalog model.
pub fn build_quantum(spec: &ModelSpec) -> Result<HamiltonianFamily> {
    spec.validate()?;
    let hbar = spec.hbar;
    let mass = spec.mass;
    let family = match spec.kind {
        ModelKind::QubitPhase { .. } => {
            HamiltonianFamily::linear(CMatrix::zeros(2, 2), vec![pauli_z() * crate::linalg::c(0.5)], hbar, labels(spec))?
        }
        ModelKind::QubitMixedAxis { .. } => HamiltonianFamily::linear(pauli_z(), vec![pauli_x()], hbar, labels(spec))?,
        ModelKind::Harmonic { .. } => {
            let b = Arc::new(single_mode_basis(spec)?);
            let bd = Arc::clone(&b);
            HamiltonianFamily::new(
                b.dim(),
                hbar,
                labels(spec),
                move |l| {
                    let (omega, force) = (l[0], l[1]);
                    to_complex(&(&b.kinetic + &b.x2 * (0.5 * mass * omega * omega) - &b.x * force))
                },
                move |l| vec![to_complex(&(&bd.x2 * (mass * l[0]))), to_complex(&(-&bd.x))],
            )?
        }
        ModelKind::Quartic { omega, .. } => {
            let b = Arc::new(single_mode_basis(spec)?);
            let quadratic = &b.kinetic + &b.x2 * (0.5 * mass * omega * omega);
            let x4 = b.x4.clone();
            let dx4 = to_complex(&b.x4);
            HamiltonianFamily::new(
                b.dim(),
                hbar,
                labels(spec),
                move |l| to_complex(&(&quadratic + &x4 * l[0])),
                move |_| vec![dx4.clone()],
            )?
        }
        ModelKind::DrivenOscillator { omega, .. } => {
            let b = single_mode_basis(spec)?;
            let dim = b.dim();
            let quadratic = to_complex(&(&b.kinetic + &b.x2 * (0.5 * mass * omega * omega)));
            let x = Arc::new(to_complex(&b.x));
            let xd = Arc::clone(&x);
            HamiltonianFamily::time_dependent(
                dim,
                hbar,
                labels(spec),
                move |l, t| {
                    let (a, big_omega) = (l[0], l[1]);
                    &quadratic - x.as_ref() * crate::linalg::c(a * (big_omega * t).sin())
                },
                move |l, t| {
                    let (a, big_omega) = (l[0], l[1]);
                    vec![
                        xd.as_ref() * crate::linalg::c(-(big_omega * t).sin()),
                        xd.as_ref() * crate::linalg::c(-a * t * (big_omega * t).cos()),
                    ]
                },
            )?
        }
        ModelKind::LatticeScalar { .. } => {
            let ops = lattice_operators(spec)?;
            let dim = ops.kinetic.nrows();
            let base = to_complex(&(&ops.kinetic + &ops.gradient));
            let phi2 = to_complex(&ops.phi2);
            let phi4 = to_complex(&ops.phi4);
            let dphi2 = phi2.clone() * crate::linalg::c(0.5);
            let dphi4 = phi4.clone();
            HamiltonianFamily::new(
                dim,
                hbar,
                labels(spec),
                move |l| &base + &phi2 * crate::linalg::c(0.5 * l[0]) + &phi4 * crate::linalg::c(l[1]),
                move |_| vec![dphi2.clone(), dphi4.clone()],
            )?
        }
    };
    Ok(family.with_id(spec.id()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Spectrum;

    #[test]
    fn two_site_chain_has_both_normal_modes() {
        let spec = ModelSpec::lattice(2, 1.0, 0.0).with_discretization(Discretization::Lattice { n_max: 10 });
        let fam = build_quantum(&spec).unwrap();
        let spectrum = Spectrum::of(&fam.hamiltonian(&spec.parameters(), 0.0).unwrap());
        let zero_point = 0.5 * (1.0 + 5.0f64.sqrt());
        assert!((spectrum.values[0] - zero_point).abs() < 1e-6, "E0 = {}", spectrum.values[0]);
        assert!((spectrum.values[1] - zero_point - 1.0).abs() < 1e-5, "E1 = {}", spectrum.values[1]);
    }

    #[test]
    fn oversized_lattice_is_rejected() {
        let spec = ModelSpec::lattice(6, 1.0, 0.0).with_discretization(Discretization::Lattice { n_max: 8 });
        assert!(matches!(build_quantum(&spec), Err(QfiError::Resource { .. })));
    }

    #[test]
    fn deformations_match_finite_differences() {
        for spec in ModelSpec::catalog() {
            let fam = build_quantum(&spec).unwrap();
            let defect = fam.deformation_fd_defect(&spec.parameters(), 0.37, 1e-5).unwrap();
            assert!(defect < 1e-6, "{}: {defect}", spec.id());
        }
    }
}
