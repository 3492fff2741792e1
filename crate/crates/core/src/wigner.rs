//! Gaussian Wigner functions and reproducible phase-space sampling.
//!
//! Coordinates are ordered `(q₁…q_n, p₁…p_n)`. Sample `i` of a run with seed
//! `s` always comes from the ChaCha8 stream `i` of seed `s`, so samples can be
//! drawn in any order or in parallel without changing their values.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::classical::PhaseSpacePoint;
use crate::error::{QfiError, Result};
use crate::linalg::{c, CMatrix, Spectrum, I};
use crate::models::{ModelKind, ModelSpec, StateKind};

/// Tolerance on the smallest eigenvalue of `Σ + (iħ/2)Ω`.
pub const UNCERTAINTY_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct GaussianStateSpec {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
    hbar: f64,
    chol: DMatrix<f64>,
}

impl PartialEq for GaussianStateSpec {
    fn eq(&self, other: &Self) -> bool {
        self.mean == other.mean && self.cov == other.cov && self.hbar == other.hbar
    }
}

impl GaussianStateSpec {
    /// Validates positivity and the uncertainty relation before accepting `(mean, cov)`.
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>, hbar: f64) -> Result<Self> {
        let dim = mean.len();
        if dim == 0 || dim % 2 != 0 {
            return Err(QfiError::InvalidCovariance(format!("phase-space dimension {dim} is not a positive even number")));
        }
        if cov.shape() != (dim, dim) {
            return Err(QfiError::DimensionMismatch {
                what: "covariance".into(),
                expected: dim,
                found: cov.nrows(),
            });
        }
        if !(hbar > 0.0) {
            return Err(QfiError::invalid("hbar must be positive"));
        }
        if mean.iter().chain(cov.iter()).any(|v| !v.is_finite()) {
            return Err(QfiError::InvalidCovariance("non-finite entries".into()));
        }
        let scale = cov.amax().max(f64::MIN_POSITIVE);
        if (&cov - cov.transpose()).amax() > 1e-12 * scale {
            return Err(QfiError::InvalidCovariance("covariance is not symmetric".into()));
        }
        let cov = (&cov + cov.transpose()) * 0.5;
        let chol = Cholesky::<f64, Dyn>::new(cov.clone())
            .ok_or_else(|| QfiError::InvalidCovariance("covariance is not positive definite".into()))?
            .l();
        let n = dim / 2;
        let omega = DMatrix::from_fn(dim, dim, |i, j| {
            if j == i + n {
                1.0
            } else if i == j + n {
                -1.0
            } else {
                0.0
            }
        });
        let form: CMatrix = cov.map(c) + omega.map(|v| I * (0.5 * hbar * v));
        let min = Spectrum::of(&form).values[0];
        if min < -UNCERTAINTY_TOL * scale.max(hbar) {
            return Err(QfiError::InvalidCovariance(format!(
                "uncertainty relation violated: min eig of Σ + iħΩ/2 is {min:.3e}"
            )));
        }
        Ok(GaussianStateSpec { mean, cov, hbar, chol })
    }

    /// Single-mode convenience constructor.
    pub fn single_mode(q: f64, p: f64, cov: [[f64; 2]; 2], hbar: f64) -> Result<Self> {
        Self::new(
            DVector::from_vec(vec![q, p]),
            DMatrix::from_row_slice(2, 2, &[cov[0][0], cov[0][1], cov[1][0], cov[1][1]]),
            hbar,
        )
    }

    pub fn dof(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    /// Pure Gaussians saturate `det Σ = (ħ/2)^{2n}`.
    pub fn purity(&self) -> f64 {
        (0.5 * self.hbar).powi(self.dof() as i32) / self.cov.determinant().sqrt()
    }

    /// `n` samples with indices `0..n`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<PhaseSpacePoint>> {
        if n == 0 {
            return Err(QfiError::invalid("sample count must be at least 1"));
        }
        Ok(self.sample_range(seed, 0..n as u64))
    }

    /// Sample `index` of the ensemble with `seed`.
    pub fn point(&self, seed: u64, index: u64) -> PhaseSpacePoint {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(index);
        let z = DVector::from_iterator(self.mean.len(), (0..self.mean.len()).map(|_| StandardNormal.sample(&mut rng)));
        let x = &self.mean + &self.chol * z;
        let n = self.dof();
        PhaseSpacePoint::new(x.rows(0, n).iter().copied().collect(), x.rows(n, n).iter().copied().collect())
    }

    pub fn sample_range(&self, seed: u64, range: std::ops::Range<u64>) -> Vec<PhaseSpacePoint> {
        range.map(|i| self.point(seed, i)).collect()
    }
}

/// Wigner function of a catalog initial state, when it is Gaussian.
pub fn gaussian_for(spec: &ModelSpec, kind: &StateKind) -> Result<GaussianStateSpec> {
    let hbar = spec.hbar;
    let m = spec.mass;
    match spec.kind {
        ModelKind::QubitPhase { .. } | ModelKind::QubitMixedAxis { .. } => {
            Err(QfiError::UnsupportedState(format!("{} has no phase-space representation", spec.id())))
        }
        ModelKind::LatticeScalar { sites, mass_sq, .. } => {
            if *kind != StateKind::Ground {
                return Err(QfiError::UnsupportedState("lattice models support the ground state only".into()));
            }
            lattice_ground(sites, mass_sq, hbar)
        }
        _ => {
            let omega = spec.base_omega().unwrap_or(0.0);
            let vacuum = |o: f64| -> Result<[[f64; 2]; 2]> {
                if !(o > 0.0) {
                    return Err(QfiError::UnsupportedState("ground and coherent states need omega > 0".into()));
                }
                Ok([[hbar / (2.0 * m * o), 0.0], [0.0, 0.5 * hbar * m * o]])
            };
            match *kind {
                StateKind::Ground => GaussianStateSpec::single_mode(0.0, 0.0, vacuum(omega)?, hbar),
                StateKind::Coherent { re, im } => {
                    let q = (2.0 * hbar / (m * omega)).sqrt() * re;
                    let p = (2.0 * hbar * m * omega).sqrt() * im;
                    GaussianStateSpec::single_mode(q, p, vacuum(omega)?, hbar)
                }
                StateKind::Gaussian { mean, cov } => GaussianStateSpec::single_mode(mean[0], mean[1], cov, hbar),
                StateKind::Bloch { .. } => Err(QfiError::UnsupportedState("Bloch states are for qubits".into())),
            }
        }
    }
}

/// `Σ_φφ = (ħ/2)K^{−1/2}`, `Σ_ππ = (ħ/2)K^{1/2}` for the quadratic coupling matrix `K`.
fn lattice_ground(sites: usize, mass_sq: f64, hbar: f64) -> Result<GaussianStateSpec> {
    let mut k = DMatrix::<f64>::identity(sites, sites) * mass_sq;
    for (a, b) in crate::models::lattice_bonds(sites) {
        k[(a, a)] += 1.0;
        k[(b, b)] += 1.0;
        k[(a, b)] -= 1.0;
        k[(b, a)] -= 1.0;
    }
    let eig = k.symmetric_eigen();
    if eig.eigenvalues.iter().any(|&w| w <= 0.0) {
        return Err(QfiError::UnsupportedState("lattice coupling matrix is not positive".into()));
    }
    let power = |s: f64| {
        let d = DMatrix::from_diagonal(&eig.eigenvalues.map(|w| w.powf(s)));
        &eig.eigenvectors * d * eig.eigenvectors.transpose()
    };
    let mut cov = DMatrix::zeros(2 * sites, 2 * sites);
    cov.view_mut((0, 0), (sites, sites)).copy_from(&(power(-0.5) * (0.5 * hbar)));
    cov.view_mut((sites, sites), (sites, sites)).copy_from(&(power(0.5) * (0.5 * hbar)));
    GaussianStateSpec::new(DVector::zeros(2 * sites), cov, hbar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn uncertainty_violation_is_rejected() {
        let err = GaussianStateSpec::single_mode(0.0, 0.0, [[0.1, 0.0], [0.0, 0.1]], 1.0);
        assert!(matches!(err, Err(QfiError::InvalidCovariance(_))));
    }

    #[test]
    fn indefinite_covariance_is_rejected() {
        let err = GaussianStateSpec::single_mode(0.0, 0.0, [[1.0, 2.0], [2.0, 1.0]], 1.0);
        assert!(matches!(err, Err(QfiError::InvalidCovariance(_))));
    }

    #[test]
    fn samples_are_indexed_not_sequential() {
        let g = GaussianStateSpec::single_mode(0.0, 0.0, [[0.5, 0.0], [0.0, 0.5]], 1.0).unwrap();
        let batch = g.sample_range(7, 0..10);
        assert_eq!(batch[6], g.point(7, 6));
        assert_ne!(g.point(7, 6), g.point(8, 6));
        assert_eq!(g.sample(10, 7).unwrap(), batch);
        assert!(g.sample(0, 7).is_err());
    }

    #[test]
    fn lattice_ground_is_pure() {
        let g = gaussian_for(&ModelSpec::lattice(3, 0.7, 0.0), &StateKind::Ground).unwrap();
        assert!((g.purity() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn sample_moments_match_covariance() {
        let g = GaussianStateSpec::single_mode(0.3, -0.2, [[0.8, 0.3], [0.3, 0.6]], 1.0).unwrap();
        let n = 40_000;
        let pts = g.sample_range(11, 0..n);
        let mq = pts.iter().map(|x| x.q[0]).sum::<f64>() / n as f64;
        let cqp = pts.iter().map(|x| (x.q[0] - 0.3) * (x.p[0] + 0.2)).sum::<f64>() / n as f64;
        assert!((mq - 0.3).abs() < 0.02);
        assert!((cqp - 0.3).abs() < 0.02);
    }

    proptest! {
        #[test]
        fn squeezed_vacua_are_accepted(r in -1.5f64..1.5, theta in 0.0f64..6.28, hbar in 0.1f64..3.0) {
            let (c2, s2) = ((2.0 * theta).cos(), (2.0 * theta).sin());
            let (ch, sh) = ((2.0 * r).cosh(), (2.0 * r).sinh());
            let qq = 0.5 * hbar * (ch - sh * c2);
            let pp = 0.5 * hbar * (ch + sh * c2);
            let qp = -0.5 * hbar * sh * s2;
            let g = GaussianStateSpec::single_mode(0.0, 0.0, [[qq, qp], [qp, pp]], hbar);
            prop_assert!(g.is_ok());
            prop_assert!((g.unwrap().purity() - 1.0).abs() < 1e-8);
        }
    }
}
