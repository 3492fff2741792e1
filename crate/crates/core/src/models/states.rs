use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{QfiError, Result};
use crate::exact::QuantumState;
use crate::linalg::{to_complex, CVector, Spectrum};
use crate::models::quantum::{build_quantum, lattice_operators, single_mode_basis};
use crate::models::{Discretization, ModelKind, ModelSpec};
use crate::wigner::{gaussian_for, GaussianStateSpec};

/// Initial-state recipe. Oscillator states are Gaussian; `ground` refers to
/// the ground state of the quadratic reference part of the model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StateKind {
    Ground,
    /// `|α⟩` of the base-frequency oscillator.
    Coherent {
        re: f64,
        #[serde(default)]
        im: f64,
    },
    /// Pure 1D Gaussian with mean `(q, p)` and covariance `[[qq, qp], [qp, pp]]`.
    Gaussian { mean: [f64; 2], cov: [[f64; 2]; 2] },
    /// Qubit `cos(θ/2)|0⟩ + e^{iφ} sin(θ/2)|1⟩`.
    Bloch { theta: f64, phi: f64 },
}

impl Default for StateKind {
    fn default() -> Self {
        StateKind::Ground
    }
}

/// A state ready for both the exact and the semiclassical routes.
#[derive(Clone, Debug)]
pub struct PreparedState {
    pub state: QuantumState,
    /// Wigner function of the same state, when it is a Gaussian.
    pub wigner: Option<GaussianStateSpec>,
    pub warnings: Vec<String>,
}

const LEAKAGE_WARN: f64 = 1e-10;
const LEAKAGE_FAIL: f64 = 1e-4;
const PURITY_TOL: f64 = 1e-10;

pub fn initial_state(spec: &ModelSpec, kind: &StateKind) -> Result<PreparedState> {
    spec.validate()?;
    match spec.kind {
        ModelKind::QubitPhase { .. } | ModelKind::QubitMixedAxis { .. } => qubit_state(spec, kind),
        ModelKind::LatticeScalar { .. } => lattice_state(spec, kind),
        _ => oscillator_state(spec, kind),
    }
}

fn qubit_state(spec: &ModelSpec, kind: &StateKind) -> Result<PreparedState> {
    let state = match *kind {
        StateKind::Bloch { theta, phi } => {
            if !(theta.is_finite() && phi.is_finite()) {
                return Err(QfiError::invalid("Bloch angles must be finite"));
            }
            QuantumState::normalized(CVector::from_vec(vec![
                Complex64::new((0.5 * theta).cos(), 0.0),
                Complex64::from_polar((0.5 * theta).sin(), phi),
            ]))?
        }
        StateKind::Ground => {
            let h = build_quantum(spec)?.hamiltonian(&spec.parameters(), 0.0)?;
            QuantumState::normalized(Spectrum::of(&h).vectors.column(0).into_owned())?
        }
        _ => return Err(QfiError::UnsupportedState(format!("{kind:?} on a qubit"))),
    };
    Ok(PreparedState {
        state,
        wigner: None,
        warnings: Vec::new(),
    })
}

fn lattice_state(spec: &ModelSpec, kind: &StateKind) -> Result<PreparedState> {
    if *kind != StateKind::Ground {
        return Err(QfiError::UnsupportedState(format!("{kind:?} on a lattice; only ground is available")));
    }
    let mass_sq = spec.parameters()[0];
    let ops = lattice_operators(spec)?;
    let quadratic = &ops.kinetic + &ops.gradient + &ops.phi2 * (0.5 * mass_sq);
    let spectrum = Spectrum::of(&to_complex(&quadratic));
    let state = QuantumState::normalized(spectrum.vectors.column(0).into_owned())?;
    Ok(PreparedState {
        state,
        wigner: Some(gaussian_for(spec, kind)?),
        warnings: Vec::new(),
    })
}

fn oscillator_state(spec: &ModelSpec, kind: &StateKind) -> Result<PreparedState> {
    let gaussian = gaussian_for(spec, kind)?;
    let hbar = spec.hbar;
    let (q_mean, p_mean) = (gaussian.mean()[0], gaussian.mean()[1]);
    let cov = gaussian.cov();
    let (a, c) = (cov[(0, 0)], cov[(0, 1)]);
    let det = cov.determinant();
    if (det - 0.25 * hbar * hbar).abs() > PURITY_TOL * (0.25 * hbar * hbar).max(det) {
        return Err(QfiError::UnsupportedState(format!(
            "Gaussian is mixed: det Σ = {det:.6e}, pure states need ħ²/4 = {:.6e}",
            0.25 * hbar * hbar
        )));
    }
    let width = a.sqrt();
    let basis = single_mode_basis(spec)?;
    check_support(spec, q_mean, width, p_mean, cov[(1, 1)].sqrt())?;

    let amp = (2.0 * std::f64::consts::PI * a).powf(-0.25);
    let chirp = Complex64::new(1.0, -2.0 * c / hbar) / (4.0 * a);
    let psi = move |x: f64| {
        let d = x - q_mean;
        amp * (-(chirp * d * d) + Complex64::new(0.0, p_mean * d / hbar)).exp()
    };
    let raw = basis.project(psi, q_mean, width);
    finish(raw, gaussian)
}

fn finish(raw: CVector, gaussian: GaussianStateSpec) -> Result<PreparedState> {
    let mut warnings = Vec::new();
    let leakage = (1.0 - raw.norm_squared()).abs();
    if leakage > LEAKAGE_FAIL {
        return Err(QfiError::UnsupportedState(format!(
            "state is not representable in the basis: norm defect {leakage:.3e}"
        )));
    }
    if leakage > LEAKAGE_WARN {
        warnings.push(format!("basis truncation removed {leakage:.3e} of the state norm"));
    }
    Ok(PreparedState {
        state: QuantumState::normalized(raw)?,
        wigner: Some(gaussian),
        warnings,
    })
}

/// Grid boxes must hold the state in both position and momentum.
fn check_support(spec: &ModelSpec, q_mean: f64, q_width: f64, p_mean: f64, p_width: f64) -> Result<()> {
    if let Some(Discretization::Grid { half_width, points }) = spec.discretization() {
        if half_width <= 4.0 * q_width || q_mean.abs() + 4.0 * q_width > half_width {
            return Err(QfiError::invalid(format!(
                "grid half-width {half_width} does not contain the state (mean {q_mean}, spread {q_width:.4})"
            )));
        }
        let dx = 2.0 * half_width / points as f64;
        let p_max = spec.hbar * std::f64::consts::PI / dx;
        if p_mean.abs() + 4.0 * p_width > p_max {
            return Err(QfiError::invalid(format!(
                "grid spacing {dx} cannot resolve momenta up to {:.4}",
                p_mean.abs() + 4.0 * p_width
            )));
        }
    }
    Ok(())
}

/// Convenience used by tests and examples: the ground state of the quadratic reference part.
pub fn ground_state(spec: &ModelSpec) -> Result<PreparedState> {
    initial_state(spec, &StateKind::Ground)
}
