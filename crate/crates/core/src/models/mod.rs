//! Catalog of paired quantum and classical models.
//!
//! Sign conventions are fixed here once: `H = p²/2m + V(x; λ)` and
//! `L = m q̇²/2 − V`, so every potential-type deformation satisfies
//! `∂_λH = −∂_λL` at fixed canonical variables. Force terms enter as `−f·x`.

mod basis;
mod classical;
mod quantum;
mod states;

use serde::{Deserialize, Serialize};

use crate::error::{QfiError, Result};

pub use classical::{build_classical, CatalogClassical, ClassicalModel};
pub use quantum::build_quantum;
pub(crate) use quantum::lattice_bonds;
pub use states::{ground_state, initial_state, PreparedState, StateKind};

/// Catalog model identity and its base parameter values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "snake_case")]
pub enum ModelKind {
    /// `H = λ σ_z / 2`.
    QubitPhase {
        #[serde(default)]
        lambda: f64,
    },
    /// `H = σ_z + λ σ_x`.
    QubitMixedAxis {
        #[serde(default)]
        lambda: f64,
    },
    /// `V = m ω² x²/2 − f x`, parameters `(ω, f)`.
    Harmonic {
        omega: f64,
        #[serde(default)]
        force: f64,
    },
    /// `V = m ω² x²/2 + g x⁴`, parameter `g`.
    Quartic { omega: f64, g: f64 },
    /// `V = m ω² x²/2 − A sin(Ω t) x`, parameters `(A, Ω)`.
    DrivenOscillator {
        omega: f64,
        amplitude: f64,
        drive_frequency: f64,
    },
    /// Periodic chain `Σ π²/2 + (φ_{i+1}−φ_i)²/2 + m² φ²/2 + g φ⁴`, parameters `(m², g)`.
    LatticeScalar {
        sites: usize,
        mass_sq: f64,
        #[serde(default)]
        g: f64,
    },
}

/// Basis used for the quantum representation.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Discretization {
    /// Periodic position grid on `[−L, L)` with a Fourier-spectral kinetic term.
    Grid { half_width: f64, points: usize },
    /// Oscillator number states `|0⟩ … |n_max⟩` at the model's base frequency.
    Fock { n_max: usize },
    /// Per-site oscillator basis `|0⟩ … |n_max⟩` for lattice models.
    Lattice { n_max: usize },
}

fn one() -> f64 {
    1.0
}

/// A complete catalog manifest: model, constants and discretization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    #[serde(flatten)]
    pub kind: ModelKind,
    #[serde(default = "one")]
    pub mass: f64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discretization: Option<Discretization>,
}

impl ModelSpec {
    pub fn new(kind: ModelKind) -> Self {
        ModelSpec {
            kind,
            mass: 1.0,
            hbar: 1.0,
            discretization: None,
        }
    }

    pub fn with_discretization(mut self, d: Discretization) -> Self {
        self.discretization = Some(d);
        self
    }

    pub fn with_constants(mut self, mass: f64, hbar: f64) -> Self {
        self.mass = mass;
        self.hbar = hbar;
        self
    }

    pub fn qubit_phase() -> Self {
        Self::new(ModelKind::QubitPhase { lambda: 0.0 })
    }

    pub fn qubit_mixed_axis(lambda: f64) -> Self {
        Self::new(ModelKind::QubitMixedAxis { lambda })
    }

    pub fn harmonic(omega: f64, force: f64) -> Self {
        Self::new(ModelKind::Harmonic { omega, force })
    }

    pub fn quartic(omega: f64, g: f64) -> Self {
        Self::new(ModelKind::Quartic { omega, g })
    }

    pub fn driven(omega: f64, amplitude: f64, drive_frequency: f64) -> Self {
        Self::new(ModelKind::DrivenOscillator {
            omega,
            amplitude,
            drive_frequency,
        })
    }

    pub fn lattice(sites: usize, mass_sq: f64, g: f64) -> Self {
        Self::new(ModelKind::LatticeScalar { sites, mass_sq, g })
    }

    pub fn id(&self) -> &'static str {
        match self.kind {
            ModelKind::QubitPhase { .. } => "qubit_phase",
            ModelKind::QubitMixedAxis { .. } => "qubit_mixed_axis",
            ModelKind::Harmonic { .. } => "harmonic",
            ModelKind::Quartic { .. } => "quartic",
            ModelKind::DrivenOscillator { .. } => "driven_oscillator",
            ModelKind::LatticeScalar { .. } => "lattice_scalar",
        }
    }

    pub fn is_qubit(&self) -> bool {
        matches!(self.kind, ModelKind::QubitPhase { .. } | ModelKind::QubitMixedAxis { .. })
    }

    pub fn has_classical(&self) -> bool {
        !self.is_qubit()
    }

    /// Base λ-vector in the order of [`ModelSpec::parameter_labels`].
    pub fn parameters(&self) -> Vec<f64> {
        match self.kind {
            ModelKind::QubitPhase { lambda } | ModelKind::QubitMixedAxis { lambda } => vec![lambda],
            ModelKind::Harmonic { omega, force } => vec![omega, force],
            ModelKind::Quartic { g, .. } => vec![g],
            ModelKind::DrivenOscillator {
                amplitude,
                drive_frequency,
                ..
            } => vec![amplitude, drive_frequency],
            ModelKind::LatticeScalar { mass_sq, g, .. } => vec![mass_sq, g],
        }
    }

    /// Replaces parameter `index` (in [`parameters`](Self::parameters) order).
    pub fn with_parameter(mut self, index: usize, value: f64) -> Result<Self> {
        let slot = match (&mut self.kind, index) {
            (ModelKind::QubitPhase { lambda } | ModelKind::QubitMixedAxis { lambda }, 0) => lambda,
            (ModelKind::Harmonic { omega, .. }, 0) => omega,
            (ModelKind::Harmonic { force, .. }, 1) => force,
            (ModelKind::Quartic { g, .. }, 0) => g,
            (ModelKind::DrivenOscillator { amplitude, .. }, 0) => amplitude,
            (ModelKind::DrivenOscillator { drive_frequency, .. }, 1) => drive_frequency,
            (ModelKind::LatticeScalar { mass_sq, .. }, 0) => mass_sq,
            (ModelKind::LatticeScalar { g, .. }, 1) => g,
            _ => return Err(QfiError::invalid(format!("{} has no parameter {index}", self.id()))),
        };
        *slot = value;
        Ok(self)
    }

    pub fn parameter_labels(&self) -> Vec<&'static str> {
        match self.kind {
            ModelKind::QubitPhase { .. } | ModelKind::QubitMixedAxis { .. } => vec!["lambda"],
            ModelKind::Harmonic { .. } => vec!["omega", "force"],
            ModelKind::Quartic { .. } => vec!["g"],
            ModelKind::DrivenOscillator { .. } => vec!["amplitude", "drive_frequency"],
            ModelKind::LatticeScalar { .. } => vec!["mass_sq", "g"],
        }
    }

    pub fn parameter_index(&self, label: &str) -> Option<usize> {
        self.parameter_labels().iter().position(|l| *l == label)
    }

    pub fn is_time_dependent(&self) -> bool {
        matches!(self.kind, ModelKind::DrivenOscillator { .. })
    }

    /// Base oscillator frequency of the quadratic reference part.
    pub fn base_omega(&self) -> Option<f64> {
        match self.kind {
            ModelKind::Harmonic { omega, .. }
            | ModelKind::Quartic { omega, .. }
            | ModelKind::DrivenOscillator { omega, .. } => Some(omega),
            _ => None,
        }
    }

    /// Fastest classical frequency of the quadratic part, used for the default time step.
    pub fn omega_ref(&self) -> f64 {
        match self.kind {
            ModelKind::QubitPhase { lambda } => lambda.abs() / self.hbar,
            ModelKind::QubitMixedAxis { lambda } => 2.0 * (1.0 + lambda * lambda).sqrt() / self.hbar,
            ModelKind::Harmonic { omega, .. } | ModelKind::Quartic { omega, .. } => omega,
            ModelKind::DrivenOscillator {
                omega, drive_frequency, ..
            } => omega.max(drive_frequency.abs()),
            ModelKind::LatticeScalar { sites, mass_sq, .. } => {
                let max_lap = (0..sites)
                    .map(|k| {
                        let s = (std::f64::consts::PI * k as f64 / sites as f64).sin();
                        if sites >= 2 {
                            4.0 * s * s
                        } else {
                            0.0
                        }
                    })
                    .fold(0.0, f64::max);
                (mass_sq + max_lap).sqrt()
            }
        }
    }

    pub fn default_discretization(&self) -> Option<Discretization> {
        match self.kind {
            ModelKind::QubitPhase { .. } | ModelKind::QubitMixedAxis { .. } => None,
            ModelKind::Harmonic { .. } | ModelKind::Quartic { .. } => Some(Discretization::Grid {
                half_width: 10.0,
                points: 128,
            }),
            ModelKind::DrivenOscillator { .. } => Some(Discretization::Fock { n_max: 30 }),
            ModelKind::LatticeScalar { .. } => Some(Discretization::Lattice { n_max: 8 }),
        }
    }

    pub fn discretization(&self) -> Option<Discretization> {
        self.discretization.or_else(|| self.default_discretization())
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > 0.0 && self.mass.is_finite()) {
            return Err(QfiError::invalid(format!("mass must be positive, got {}", self.mass)));
        }
        if !(self.hbar > 0.0 && self.hbar.is_finite()) {
            return Err(QfiError::invalid(format!("hbar must be positive, got {}", self.hbar)));
        }
        if self.parameters().iter().any(|p| !p.is_finite()) {
            return Err(QfiError::invalid("model parameters must be finite"));
        }
        match self.kind {
            ModelKind::Harmonic { omega, .. } | ModelKind::Quartic { omega, .. } | ModelKind::DrivenOscillator { omega, .. }
                if omega < 0.0 =>
            {
                return Err(QfiError::invalid("omega must be non-negative"));
            }
            ModelKind::LatticeScalar { sites, mass_sq, .. } => {
                if sites == 0 {
                    return Err(QfiError::invalid("lattice needs at least one site"));
                }
                if mass_sq <= 0.0 {
                    return Err(QfiError::invalid("lattice mass_sq must be positive"));
                }
            }
            _ => {}
        }
        match (self.is_qubit(), self.discretization()) {
            (true, Some(_)) => return Err(QfiError::invalid("qubit models take no discretization")),
            (false, None) => return Err(QfiError::invalid("model requires a discretization")),
            _ => {}
        }
        match (&self.kind, self.discretization()) {
            (ModelKind::LatticeScalar { .. }, Some(Discretization::Lattice { n_max })) => {
                if n_max < 1 {
                    return Err(QfiError::invalid("lattice n_max must be at least 1"));
                }
            }
            (ModelKind::LatticeScalar { .. }, Some(_)) => {
                return Err(QfiError::invalid("lattice models use the lattice discretization"));
            }
            (_, Some(Discretization::Lattice { .. })) => {
                return Err(QfiError::invalid("lattice discretization is only valid for lattice_scalar"));
            }
            (_, Some(Discretization::Grid { half_width, points })) => {
                if !(half_width > 0.0) {
                    return Err(QfiError::invalid("grid half_width must be positive"));
                }
                if points < 64 || !points.is_power_of_two() {
                    return Err(QfiError::invalid(format!(
                        "grid points must be a power of two >= 64, got {points}"
                    )));
                }
            }
            (ModelKind::Harmonic { omega, .. } | ModelKind::Quartic { omega, .. } | ModelKind::DrivenOscillator { omega, .. }, Some(Discretization::Fock { .. }))
                if *omega <= 0.0 =>
            {
                return Err(QfiError::invalid("Fock basis needs a positive base frequency"));
            }
            _ => {}
        }
        Ok(())
    }

    /// The whole catalog at its default settings.
    pub fn catalog() -> Vec<ModelSpec> {
        vec![
            ModelSpec::qubit_phase(),
            ModelSpec::qubit_mixed_axis(0.3),
            ModelSpec::harmonic(1.0, 0.0),
            ModelSpec::quartic(1.0, 0.1),
            ModelSpec::driven(1.0, 0.5, 1.3),
            ModelSpec::lattice(2, 1.0, 0.0),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn manifest_round_trips_through_json() {
        let spec = ModelSpec::harmonic(1.0, 0.2).with_discretization(Discretization::Grid {
            half_width: 8.0,
            points: 64,
        });
        let text = serde_json::to_string(&spec).unwrap();
        assert!(text.contains("\"id\":\"harmonic\""));
        let back: ModelSpec = serde_json::from_str(&text).unwrap();
        assert_eq!(back, spec);
    }

    #[test]
    fn grid_points_must_be_power_of_two() {
        let spec = ModelSpec::harmonic(1.0, 0.0).with_discretization(Discretization::Grid {
            half_width: 8.0,
            points: 100,
        });
        assert!(spec.validate().is_err());
    }

    #[test]
    fn qubits_have_no_classical_counterpart() {
        assert!(!ModelSpec::qubit_phase().has_classical());
        assert!(ModelSpec::lattice(2, 1.0, 0.0).has_classical());
    }
}
