use crate::error::{QfiError, Result};
use crate::models::quantum::lattice_bonds;
use crate::models::{ModelKind, ModelSpec};

/// A classical system `H = Σ p²/2m + V(q; λ, t)` with analytic λ-derivatives of `V`.
///
/// The provided methods derive everything else from the potential, which keeps
/// `∂_λL = −∂_λV` consistent with the quantum deformation `∂_λH = ∂_λV`.
pub trait ClassicalModel: Send + Sync {
    fn id(&self) -> &str;
    fn dof(&self) -> usize;
    fn n_params(&self) -> usize;
    fn mass(&self) -> f64;
    /// Fastest frequency of the quadratic part.
    fn omega_ref(&self) -> f64;
    fn is_time_dependent(&self) -> bool {
        false
    }

    fn potential(&self, q: &[f64], lambda: &[f64], t: f64) -> f64;
    fn grad_potential(&self, q: &[f64], lambda: &[f64], t: f64, out: &mut [f64]);
    /// `∂V/∂λ_i` for every parameter.
    fn dlambda_potential(&self, q: &[f64], lambda: &[f64], t: f64, out: &mut [f64]);

    fn kinetic(&self, p: &[f64]) -> f64 {
        p.iter().map(|v| v * v).sum::<f64>() / (2.0 * self.mass())
    }

    fn hamiltonian(&self, q: &[f64], p: &[f64], lambda: &[f64], t: f64) -> f64 {
        self.kinetic(p) + self.potential(q, lambda, t)
    }

    /// `(∂H/∂p, −∂H/∂q)`.
    fn forces(&self, q: &[f64], p: &[f64], lambda: &[f64], t: f64) -> (Vec<f64>, Vec<f64>) {
        let qdot = p.iter().map(|v| v / self.mass()).collect();
        let mut grad = vec![0.0; q.len()];
        self.grad_potential(q, lambda, t, &mut grad);
        (qdot, grad.into_iter().map(|g| -g).collect())
    }

    fn lagrangian(&self, q: &[f64], qdot: &[f64], lambda: &[f64], t: f64) -> f64 {
        0.5 * self.mass() * qdot.iter().map(|v| v * v).sum::<f64>() - self.potential(q, lambda, t)
    }

    /// `∂L/∂λ_i` at fixed `(q, q̇)`.
    fn dlambda_lagrangian(&self, q: &[f64], _qdot: &[f64], lambda: &[f64], t: f64, out: &mut [f64]) {
        self.dlambda_potential(q, lambda, t, out);
        out.iter_mut().for_each(|v| *v = -*v);
    }
}

/// Classical counterpart of a catalog [`ModelSpec`].
///
/// Lattice fields always carry unit mass; the manifest `mass` applies to the
/// single-mode oscillators only.
#[derive(Clone, Debug)]
pub struct CatalogClassical {
    spec: ModelSpec,
    bonds: Vec<(usize, usize)>,
}

pub fn build_classical(spec: &ModelSpec) -> Result<CatalogClassical> {
    spec.validate()?;
    if !spec.has_classical() {
        return Err(QfiError::UnsupportedModel(format!("{} has no classical counterpart", spec.id())));
    }
    let bonds = match spec.kind {
        ModelKind::LatticeScalar { sites, .. } => lattice_bonds(sites),
        _ => Vec::new(),
    };
    Ok(CatalogClassical {
        spec: spec.clone(),
        bonds,
    })
}

impl CatalogClassical {
    pub fn spec(&self) -> &ModelSpec {
        &self.spec
    }
}

impl ClassicalModel for CatalogClassical {
    fn id(&self) -> &str {
        self.spec.id()
    }

    fn dof(&self) -> usize {
        match self.spec.kind {
            ModelKind::LatticeScalar { sites, .. } => sites,
            _ => 1,
        }
    }

    fn n_params(&self) -> usize {
        self.spec.parameters().len()
    }

    fn mass(&self) -> f64 {
        match self.spec.kind {
            ModelKind::LatticeScalar { .. } => 1.0,
            _ => self.spec.mass,
        }
    }

    fn omega_ref(&self) -> f64 {
        self.spec.omega_ref()
    }

    fn is_time_dependent(&self) -> bool {
        self.spec.is_time_dependent()
    }

    fn potential(&self, q: &[f64], lambda: &[f64], t: f64) -> f64 {
        let m = self.spec.mass;
        match self.spec.kind {
            ModelKind::Harmonic { .. } => 0.5 * m * lambda[0] * lambda[0] * q[0] * q[0] - lambda[1] * q[0],
            ModelKind::Quartic { omega, .. } => 0.5 * m * omega * omega * q[0] * q[0] + lambda[0] * q[0].powi(4),
            ModelKind::DrivenOscillator { omega, .. } => {
                0.5 * m * omega * omega * q[0] * q[0] - lambda[0] * (lambda[1] * t).sin() * q[0]
            }
            ModelKind::LatticeScalar { .. } => {
                let onsite: f64 = q.iter().map(|f| 0.5 * lambda[0] * f * f + lambda[1] * f.powi(4)).sum();
                let bonds: f64 = self.bonds.iter().map(|&(a, b)| 0.5 * (q[b] - q[a]).powi(2)).sum();
                onsite + bonds
            }
            ModelKind::QubitPhase { .. } | ModelKind::QubitMixedAxis { .. } => unreachable!("qubits are rejected at construction"),
        }
    }

    fn grad_potential(&self, q: &[f64], lambda: &[f64], t: f64, out: &mut [f64]) {
        let m = self.spec.mass;
        match self.spec.kind {
            ModelKind::Harmonic { .. } => out[0] = m * lambda[0] * lambda[0] * q[0] - lambda[1],
            ModelKind::Quartic { omega, .. } => out[0] = m * omega * omega * q[0] + 4.0 * lambda[0] * q[0].powi(3),
            ModelKind::DrivenOscillator { omega, .. } => {
                out[0] = m * omega * omega * q[0] - lambda[0] * (lambda[1] * t).sin()
            }
            ModelKind::LatticeScalar { .. } => {
                for (o, f) in out.iter_mut().zip(q) {
                    *o = lambda[0] * f + 4.0 * lambda[1] * f.powi(3);
                }
                for &(a, b) in &self.bonds {
                    let d = q[a] - q[b];
                    out[a] += d;
                    out[b] -= d;
                }
            }
            ModelKind::QubitPhase { .. } | ModelKind::QubitMixedAxis { .. } => unreachable!("qubits are rejected at construction"),
        }
    }

    fn dlambda_potential(&self, q: &[f64], lambda: &[f64], t: f64, out: &mut [f64]) {
        let m = self.spec.mass;
        match self.spec.kind {
            ModelKind::Harmonic { .. } => {
                out[0] = m * lambda[0] * q[0] * q[0];
                out[1] = -q[0];
            }
            ModelKind::Quartic { .. } => out[0] = q[0].powi(4),
            ModelKind::DrivenOscillator { .. } => {
                out[0] = -(lambda[1] * t).sin() * q[0];
                out[1] = -lambda[0] * t * (lambda[1] * t).cos() * q[0];
            }
            ModelKind::LatticeScalar { .. } => {
                out[0] = 0.5 * q.iter().map(|f| f * f).sum::<f64>();
                out[1] = q.iter().map(|f| f.powi(4)).sum();
            }
            ModelKind::QubitPhase { .. } | ModelKind::QubitMixedAxis { .. } => unreachable!("qubits are rejected at construction"),
        }
    }
}
