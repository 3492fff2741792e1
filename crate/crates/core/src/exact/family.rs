use std::fmt;
use std::sync::Arc;

use crate::error::{QfiError, Result};
use crate::linalg::{ensure_hermitian, CMatrix};

/// Default cap on the basis dimension for dense eigendecomposition.
pub const DIM_CAP: usize = 4096;

/// Tolerance for the Hermiticity check on `H(λ)` and its deformations.
pub const HERMITIAN_TOL: f64 = 1e-12;

type MatrixFn = dyn Fn(&[f64], f64) -> CMatrix + Send + Sync;
type DeformFn = dyn Fn(&[f64], f64) -> Vec<CMatrix> + Send + Sync;

/// A parameterized Hermitian family `H(λ, t)` together with its deformations `∂H/∂λ_i`.
///
/// Closures receive the full λ-vector and the time; time-independent families
/// ignore the second argument. The initial state is never part of the family,
/// so parameter-dependent preparations cannot be expressed.
#[derive(Clone)]
pub struct HamiltonianFamily {
    id: String,
    dim: usize,
    hbar: f64,
    labels: Vec<String>,
    time_dependent: bool,
    hamiltonian: Arc<MatrixFn>,
    deformations: Arc<DeformFn>,
}

impl fmt::Debug for HamiltonianFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HamiltonianFamily")
            .field("id", &self.id)
            .field("dim", &self.dim)
            .field("hbar", &self.hbar)
            .field("labels", &self.labels)
            .field("time_dependent", &self.time_dependent)
            .finish()
    }
}

impl HamiltonianFamily {
    pub fn new<H, D>(dim: usize, hbar: f64, labels: Vec<String>, hamiltonian: H, deformations: D) -> Result<Self>
    where
        H: Fn(&[f64]) -> CMatrix + Send + Sync + 'static,
        D: Fn(&[f64]) -> Vec<CMatrix> + Send + Sync + 'static,
    {
        Self::build(
            dim,
            hbar,
            labels,
            false,
            Arc::new(move |l: &[f64], _t: f64| hamiltonian(l)),
            Arc::new(move |l: &[f64], _t: f64| deformations(l)),
        )
    }

    pub fn time_dependent<H, D>(
        dim: usize,
        hbar: f64,
        labels: Vec<String>,
        hamiltonian: H,
        deformations: D,
    ) -> Result<Self>
    where
        H: Fn(&[f64], f64) -> CMatrix + Send + Sync + 'static,
        D: Fn(&[f64], f64) -> Vec<CMatrix> + Send + Sync + 'static,
    {
        Self::build(dim, hbar, labels, true, Arc::new(hamiltonian), Arc::new(deformations))
    }

    /// `H(λ) = H₀ + Σ λ_i V_i`.
    pub fn linear(h0: CMatrix, terms: Vec<CMatrix>, hbar: f64, labels: Vec<String>) -> Result<Self> {
        let dim = h0.nrows();
        if labels.len() != terms.len() {
            return Err(QfiError::invalid("one label per linear term is required"));
        }
        for term in &terms {
            if term.shape() != (dim, dim) {
                return Err(QfiError::DimensionMismatch {
                    what: "linear term".into(),
                    expected: dim,
                    found: term.nrows(),
                });
            }
        }
        let terms = Arc::new(terms);
        let dterms = Arc::clone(&terms);
        Self::new(
            dim,
            hbar,
            labels,
            move |l| {
                let mut h = h0.clone();
                for (li, v) in l.iter().zip(terms.iter()) {
                    h += v * crate::linalg::c(*li);
                }
                h
            },
            move |_| dterms.as_ref().clone(),
        )
    }

    fn build(
        dim: usize,
        hbar: f64,
        labels: Vec<String>,
        time_dependent: bool,
        hamiltonian: Arc<MatrixFn>,
        deformations: Arc<DeformFn>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(QfiError::invalid("dimension must be positive"));
        }
        if dim > DIM_CAP {
            return Err(QfiError::Resource { dim, cap: DIM_CAP });
        }
        if !(hbar > 0.0 && hbar.is_finite()) {
            return Err(QfiError::invalid(format!("hbar must be positive, got {hbar}")));
        }
        Ok(HamiltonianFamily {
            id: "custom".into(),
            dim,
            hbar,
            labels,
            time_dependent,
            hamiltonian,
            deformations,
        })
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn n_params(&self) -> usize {
        self.labels.len()
    }

    pub fn is_time_dependent(&self) -> bool {
        self.time_dependent
    }

    fn check_lambda(&self, lambda: &[f64]) -> Result<()> {
        if lambda.len() != self.n_params() {
            return Err(QfiError::DimensionMismatch {
                what: "parameter vector".into(),
                expected: self.n_params(),
                found: lambda.len(),
            });
        }
        if lambda.iter().any(|l| !l.is_finite()) {
            return Err(QfiError::invalid("parameter vector has non-finite entries"));
        }
        Ok(())
    }

    pub fn check_param(&self, param: usize) -> Result<()> {
        if param >= self.n_params() {
            return Err(QfiError::invalid(format!(
                "parameter index {param} out of range for {} parameters",
                self.n_params()
            )));
        }
        Ok(())
    }

    /// `H(λ, t)`, checked for shape and Hermiticity.
    pub fn hamiltonian(&self, lambda: &[f64], t: f64) -> Result<CMatrix> {
        self.check_lambda(lambda)?;
        let h = (self.hamiltonian)(lambda, t);
        self.check_matrix(&h, "Hamiltonian")?;
        Ok(h)
    }

    /// All deformation matrices `∂H/∂λ_i` at `(λ, t)`.
    pub fn deformations(&self, lambda: &[f64], t: f64) -> Result<Vec<CMatrix>> {
        self.check_lambda(lambda)?;
        let d = (self.deformations)(lambda, t);
        if d.len() != self.n_params() {
            return Err(QfiError::DimensionMismatch {
                what: "deformation list".into(),
                expected: self.n_params(),
                found: d.len(),
            });
        }
        for m in &d {
            self.check_matrix(m, "deformation")?;
        }
        Ok(d)
    }

    pub fn deformation(&self, lambda: &[f64], t: f64, param: usize) -> Result<CMatrix> {
        self.check_param(param)?;
        Ok(self.deformations(lambda, t)?.swap_remove(param))
    }

    fn check_matrix(&self, m: &CMatrix, what: &str) -> Result<()> {
        if m.shape() != (self.dim, self.dim) {
            return Err(QfiError::DimensionMismatch {
                what: what.into(),
                expected: self.dim,
                found: m.nrows(),
            });
        }
        ensure_hermitian(m, what, HERMITIAN_TOL)
    }

    /// Largest Frobenius distance between the analytic deformations and a
    /// central finite difference of `H` with step `h`.
    pub fn deformation_fd_defect(&self, lambda: &[f64], t: f64, h: f64) -> Result<f64> {
        let analytic = self.deformations(lambda, t)?;
        let mut worst: f64 = 0.0;
        for (i, d) in analytic.iter().enumerate() {
            let mut lp = lambda.to_vec();
            let mut lm = lambda.to_vec();
            lp[i] += h;
            lm[i] -= h;
            let fd = (self.hamiltonian(&lp, t)? - self.hamiltonian(&lm, t)?) / crate::linalg::c(2.0 * h);
            let scale = d.norm().max(1.0);
            worst = worst.max((fd - d).norm() / scale);
        }
        Ok(worst)
    }
}
