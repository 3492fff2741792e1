use num_complex::Complex64;

use crate::error::{QfiError, Result};
use crate::linalg::CVector;

pub const NORM_TOL: f64 = 1e-12;

/// A normalized pure state on the family's basis.
#[derive(Clone, Debug, PartialEq)]
pub struct QuantumState {
    amplitudes: CVector,
}

impl QuantumState {
    /// Wraps amplitudes that are already normalized to within `1e-12`.
    pub fn new(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(QfiError::NotNormalized(norm));
        }
        Ok(QuantumState { amplitudes })
    }

    /// Normalizes arbitrary non-zero amplitudes.
    pub fn normalized(amplitudes: CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(QfiError::invalid("cannot normalize a zero or non-finite vector"));
        }
        Ok(QuantumState {
            amplitudes: amplitudes.unscale(norm),
        })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::normalized(CVector::from_iterator(
            values.len(),
            values.iter().map(|&v| Complex64::new(v, 0.0)),
        ))
    }

    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = CVector::zeros(dim);
        v[k] = Complex64::new(1.0, 0.0);
        QuantumState { amplitudes: v }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVector {
        self.amplitudes
    }

    /// `e^{iθ}|ψ⟩`.
    pub fn with_global_phase(&self, theta: f64) -> Self {
        QuantumState {
            amplitudes: &self.amplitudes * Complex64::from_polar(1.0, theta),
        }
    }

    pub(crate) fn from_unitary_image(amplitudes: CVector) -> Self {
        QuantumState { amplitudes }
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            return Err(QfiError::DimensionMismatch {
                what: "state".into(),
                expected: dim,
                found: self.dim(),
            });
        }
        Ok(())
    }
}
