use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::linalg::CVector;

/// Single-mode operators on a truncated basis. `kinetic` is `p²/2m`.
pub(crate) struct OscillatorBasis {
    pub x: DMatrix<f64>,
    pub x2: DMatrix<f64>,
    pub x4: DMatrix<f64>,
    pub kinetic: DMatrix<f64>,
    layout: Layout,
}

enum Layout {
    Grid { points: Vec<f64>, dx: f64 },
    Fock { n_max: usize, length: f64 },
}

const FOCK_PADDING: usize = 4;

impl OscillatorBasis {
    /// Periodic grid on `[−L, L)`. The kinetic term is the exact Fourier-spectral
    /// matrix, which is real and Toeplitz.
    pub fn grid(half_width: f64, n: usize, mass: f64, hbar: f64) -> Self {
        let dx = 2.0 * half_width / n as f64;
        let points: Vec<f64> = (0..n).map(|j| -half_width + j as f64 * dx).collect();
        let dk = 2.0 * std::f64::consts::PI / (n as f64 * dx);
        let half = n as i64 / 2;
        let row: Vec<f64> = (0..n)
            .map(|d| {
                let mut s = 0.0;
                for m in -half..half {
                    let k = m as f64 * dk;
                    s += hbar * hbar * k * k / (2.0 * mass) * (k * d as f64 * dx).cos();
                }
                s / n as f64
            })
            .collect();
        let kinetic = DMatrix::from_fn(n, n, |i, j| row[i.abs_diff(j)]);
        let x = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(points.clone()));
        let x2 = x.map(|v| v * v);
        let x4 = x2.map(|v| v * v);
        OscillatorBasis {
            x,
            x2,
            x4,
            kinetic,
            layout: Layout::Grid { points, dx },
        }
    }

    /// Number states `|0⟩…|n_max⟩` of the oscillator with frequency `omega`.
    /// Products are formed in a padded basis and truncated afterwards, so the
    /// retained block of `x²` and `x⁴` equals the Galerkin projection of the
    /// full operators.
    pub fn fock(n_max: usize, omega: f64, mass: f64, hbar: f64) -> Self {
        let dim = n_max + 1;
        let padded = dim + FOCK_PADDING;
        let length = (hbar / (mass * omega)).sqrt();
        let s = (hbar / (2.0 * mass * omega)).sqrt();
        let x = DMatrix::from_fn(padded, padded, |i, j| {
            if i + 1 == j {
                s * (j as f64).sqrt()
            } else if j + 1 == i {
                s * (i as f64).sqrt()
            } else {
                0.0
            }
        });
        let pf = (hbar * mass * omega / 2.0).sqrt();
        // p = i pf (a† − a) has the real square −pf² (a† − a)².
        let antisym = DMatrix::from_fn(padded, padded, |i, j| {
            if j + 1 == i {
                (i as f64).sqrt()
            } else if i + 1 == j {
                -(j as f64).sqrt()
            } else {
                0.0
            }
        });
        let p2 = (&antisym * &antisym) * (-pf * pf);
        let x2 = &x * &x;
        let x4 = &x2 * &x2;
        let cut = |m: &DMatrix<f64>| m.view((0, 0), (dim, dim)).into_owned();
        OscillatorBasis {
            x: cut(&x),
            x2: cut(&x2),
            x4: cut(&x4),
            kinetic: cut(&p2) / (2.0 * mass),
            layout: Layout::Fock { n_max, length },
        }
    }

    pub fn dim(&self) -> usize {
        self.x.nrows()
    }

    /// Expands a wavefunction `ψ(x)` concentrated around `center` with spread `width`.
    pub fn project<F: Fn(f64) -> Complex64>(&self, psi: F, center: f64, width: f64) -> CVector {
        match &self.layout {
            Layout::Grid { points, dx } => {
                CVector::from_iterator(points.len(), points.iter().map(|&x| psi(x) * dx.sqrt()))
            }
            Layout::Fock { n_max, length } => project_hermite(&psi, *n_max, *length, center, width),
        }
    }
}

/// `c_n = ∫ φ_n(x) ψ(x) dx` on a uniform grid fine enough for both the
/// Gaussian envelope and the highest retained Hermite function.
fn project_hermite<F: Fn(f64) -> Complex64>(psi: &F, n_max: usize, length: f64, center: f64, width: f64) -> CVector {
    let wavelength = 2.0 * std::f64::consts::PI * length / ((2 * n_max + 1) as f64).sqrt();
    let h = width.min(wavelength) / 32.0;
    let lo = center - 12.0 * width;
    let steps = (24.0 * width / h).ceil() as usize;
    let mut out = CVector::zeros(n_max + 1);
    let mut herm = vec![0.0; n_max + 1];
    for k in 0..=steps {
        let x = lo + k as f64 * h;
        let w = if k == 0 || k == steps { 0.5 * h } else { h };
        let value = psi(x) * w;
        hermite_functions(x / length, &mut herm);
        let norm = length.sqrt().recip();
        for n in 0..=n_max {
            out[n] += value * (herm[n] * norm);
        }
    }
    out
}

/// Normalized Hermite functions `φ_n(ξ)` by the stable three-term recurrence.
pub(crate) fn hermite_functions(xi: f64, out: &mut [f64]) {
    if out.is_empty() {
        return;
    }
    out[0] = std::f64::consts::PI.powf(-0.25) * (-0.5 * xi * xi).exp();
    if out.len() > 1 {
        out[1] = std::f64::consts::SQRT_2 * xi * out[0];
    }
    for k in 1..out.len() - 1 {
        let kf = k as f64;
        out[k + 1] = (2.0 / (kf + 1.0)).sqrt() * xi * out[k] - (kf / (kf + 1.0)).sqrt() * out[k - 1];
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fock_quadratic_operators_match_ladder_algebra() {
        let b = OscillatorBasis::fock(10, 1.3, 0.7, 1.0);
        let h = &b.kinetic + &b.x2 * (0.5 * 0.7 * 1.3 * 1.3);
        for n in 0..=10 {
            assert!((h[(n, n)] - 1.3 * (n as f64 + 0.5)).abs() < 1e-12, "level {n}");
        }
        assert!((&h - DMatrix::from_diagonal(&h.diagonal())).norm() < 1e-12);
    }

    #[test]
    fn grid_kinetic_is_exact_on_band_limited_gaussian() {
        let b = OscillatorBasis::grid(8.0, 64, 1.0, 1.0);
        let psi: Vec<f64> = (0..64).map(|j| {
            let x = -8.0 + j as f64 * 0.25;
            (-0.5 * x * x).exp()
        }).collect();
        let v = nalgebra::DVector::from_vec(psi.clone());
        let norm = v.norm_squared();
        let t = (v.transpose() * &b.kinetic * &v)[(0, 0)] / norm;
        assert!((t - 0.25).abs() < 1e-10, "⟨T⟩ = {t}");
    }

    #[test]
    fn hermite_projection_of_ground_state_is_a_basis_vector() {
        let b = OscillatorBasis::fock(12, 1.0, 1.0, 1.0);
        let psi = |x: f64| Complex64::new(std::f64::consts::PI.powf(-0.25) * (-0.5 * x * x).exp(), 0.0);
        let c = b.project(psi, 0.0, 1.0);
        assert!((c[0].re - 1.0).abs() < 1e-10);
        assert!(c.iter().skip(1).all(|z| z.norm() < 1e-10));
    }
}
