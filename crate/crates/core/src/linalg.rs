//! Dense complex linear algebra shared by the quantum routes.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{QfiError, Result};

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn to_complex(m: &DMatrix<f64>) -> CMatrix {
    m.map(c)
}

/// Relative Frobenius norm of the anti-Hermitian part, `‖M − M†‖ / ‖M‖`.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let norm = m.norm();
    if norm == 0.0 {
        return 0.0;
    }
    (m - m.adjoint()).norm() / norm
}

pub fn ensure_hermitian(m: &CMatrix, what: &str, tol: f64) -> Result<()> {
    if !m.is_square() {
        return Err(QfiError::invalid(format!("{what} is not square")));
    }
    let defect = hermiticity_defect(m);
    if defect > tol || !defect.is_finite() {
        return Err(QfiError::NonHermitian {
            what: what.to_string(),
            defect,
        });
    }
    Ok(())
}

/// Eigendecomposition `M = V diag(E) V†` of a Hermitian matrix, eigenvalues ascending.
#[derive(Clone, Debug)]
pub struct Spectrum {
    pub values: DVector<f64>,
    pub vectors: CMatrix,
}

impl Spectrum {
    pub fn of(m: &CMatrix) -> Spectrum {
        let n = m.nrows();
        let (values, vectors) = if m.iter().all(|z| z.im == 0.0) {
            let eig = SymmetricEigen::new(m.map(|z| z.re));
            (eig.eigenvalues, to_complex(&eig.eigenvectors))
        } else {
            // symmetrize first; SymmetricEigen only reads one triangle
            let herm = (m + m.adjoint()) * c(0.5);
            let eig = SymmetricEigen::new(herm);
            (eig.eigenvalues, eig.eigenvectors)
        };
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        let sorted_values = DVector::from_iterator(n, order.iter().map(|&k| values[k]));
        let mut sorted_vectors = CMatrix::zeros(n, n);
        for (dst, &src) in order.iter().enumerate() {
            sorted_vectors.set_column(dst, &vectors.column(src));
        }
        Spectrum {
            values: sorted_values,
            vectors: sorted_vectors,
        }
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    /// Phases `exp(-i E_n s)` for a scaled time `s` (already divided by ħ).
    pub fn phases(&self, s: f64) -> CVector {
        self.values.map(|e| Complex64::from_polar(1.0, -e * s))
    }

    /// `exp(-i M s) v` without forming the exponential.
    pub fn exp_apply(&self, s: f64, v: &CVector) -> CVector {
        let mut coeffs = self.vectors.ad_mul(v);
        for (a, e) in coeffs.iter_mut().zip(self.values.iter()) {
            *a *= Complex64::from_polar(1.0, -e * s);
        }
        &self.vectors * coeffs
    }

    /// `exp(-i M s)` as a dense matrix.
    pub fn exp_matrix(&self, s: f64) -> CMatrix {
        let phases = self.phases(s);
        let mut scaled = self.vectors.clone();
        for (j, ph) in phases.iter().enumerate() {
            for z in scaled.column_mut(j).iter_mut() {
                *z *= ph;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn to_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        self.vectors.adjoint() * m * &self.vectors
    }

    pub fn from_eigenbasis(&self, m: &CMatrix) -> CMatrix {
        &self.vectors * m * self.vectors.adjoint()
    }
}

/// `⟨v|M|v⟩`.
pub fn expectation(m: &CMatrix, v: &CVector) -> Complex64 {
    v.dotc(&(m * v))
}

/// `⟨a|b⟩`, conjugating the left argument.
#[inline]
pub fn inner(a: &CVector, b: &CVector) -> Complex64 {
    a.dotc(b)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` (Newton iteration on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss–Legendre rule on `[a, b]` with `panels` equal panels of `order` nodes.
pub fn composite_gauss_legendre(a: f64, b: f64, order: usize, panels: usize) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(order);
    let width = (b - a) / panels as f64;
    let mut rule = Vec::with_capacity(order * panels);
    for k in 0..panels {
        let lo = a + k as f64 * width;
        let mid = lo + 0.5 * width;
        for (xi, wi) in x.iter().zip(&w) {
            rule.push((mid + 0.5 * width * xi, 0.5 * width * wi));
        }
    }
    rule
}

/// Kronecker product of real matrices.
pub fn kron(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    a.kronecker(b)
}

/// Minimum eigenvalue of a real symmetric matrix.
pub fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym).eigenvalues.min()
}
