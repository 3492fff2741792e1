use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{QfiError, Result};
use crate::estimate::{clamp_qfi, Metadata, Method, QfiEstimate};
use crate::exact::family::HamiltonianFamily;
use crate::exact::generator::{duhamel_generator, DeformationGenerator, QuadratureConfig};
use crate::exact::propagate::{propagate_stencil, Evolver};
use crate::exact::state::QuantumState;
use crate::linalg::{c, inner, CVector};

/// Below this step the central difference is dominated by round-off.
pub const DLAMBDA_FLOOR: f64 = 1e-9;

/// Default relative λ step for central differences.
pub const DLAMBDA_REL: f64 = 1e-5;

pub fn default_dlambda(lambda: f64) -> f64 {
    DLAMBDA_REL * lambda.abs().max(1.0)
}

pub(crate) fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// `(Gψ, ⟨G⟩)`.
fn generator_image(g: &DeformationGenerator, psi: &CVector) -> (CVector, f64) {
    let image = &g.matrix * psi;
    let mean = inner(psi, &image).re;
    (image, mean)
}

/// `4 (Re⟨G_iψ|G_jψ⟩ − ⟨G_i⟩⟨G_j⟩)`, the covariance form shared by the variance and QFIM routes.
fn covariance_entry(a: &(CVector, f64), b: &(CVector, f64)) -> f64 {
    4.0 * (inner(&a.0, &b.0).re - a.1 * b.1)
}

/// `F = 4(⟨G²⟩ − ⟨G⟩²)` in the initial state.
pub fn qfi_generator_variance(state0: &QuantumState, g: &DeformationGenerator) -> Result<QfiEstimate> {
    let start = Instant::now();
    state0.check_dim(g.matrix.nrows())?;
    let moments = generator_image(g, state0.amplitudes());
    let raw = covariance_entry(&moments, &moments);
    let mut meta = Metadata::new(&g.model, &g.lambda, Some(g.param), g.t);
    meta.diagnostics
        .insert("quadrature_nodes".into(), g.quadrature_nodes as f64);
    meta.diagnostics.insert("quadrature_residual".into(), g.residual);
    meta.runtime_ms = elapsed_ms(start);
    QfiEstimate::new(raw, Method::GeneratorVariance, meta)
}

/// `(ψ(t), ∂_λψ(t))` by central difference with one Richardson step.
pub(crate) fn state_derivative(
    family: &HamiltonianFamily,
    psi0: &CVector,
    lambda: &[f64],
    t: f64,
    param: usize,
    h: f64,
) -> Result<(CVector, CVector)> {
    family.check_param(param)?;
    let shifted = |delta: f64| {
        let mut l = lambda.to_vec();
        l[param] += delta;
        l
    };
    let stencil = vec![
        lambda.to_vec(),
        shifted(h),
        shifted(-h),
        shifted(0.5 * h),
        shifted(-0.5 * h),
    ];
    let v = propagate_stencil(family, &stencil, t, psi0)?;
    let coarse = (&v[1] - &v[2]) / c(2.0 * h);
    let fine = (&v[3] - &v[4]) / c(h);
    let deriv = (fine * c(4.0) - coarse) / c(3.0);
    Ok((v[0].clone(), deriv))
}

/// `F = 4(⟨∂ψ|∂ψ⟩ − |⟨ψ|∂ψ⟩|²)` with `∂_λψ(t)` from finite differences of the propagated state.
pub fn qfi_overlap_fd(
    family: &HamiltonianFamily,
    state0: &QuantumState,
    lambda: &[f64],
    t: f64,
    param: usize,
    d_lambda: Option<f64>,
) -> Result<QfiEstimate> {
    let start = Instant::now();
    state0.check_dim(family.dim())?;
    family.check_param(param)?;
    let h = d_lambda.unwrap_or_else(|| default_dlambda(lambda[param]));
    if !(h > 0.0) {
        return Err(QfiError::invalid(format!("d_lambda must be positive, got {h}")));
    }
    let (psi, dpsi) = state_derivative(family, state0.amplitudes(), lambda, t, param, h)?;
    let overlap = inner(&psi, &dpsi);
    let raw = 4.0 * (dpsi.norm_squared() - overlap.norm_sqr());
    let mut meta = Metadata::new(family.id(), lambda, Some(param), t).tolerance("d_lambda", h);
    if h <= DLAMBDA_FLOOR {
        meta.warn(format!("d_lambda = {h:.3e} is at or below the round-off floor {DLAMBDA_FLOOR:.0e}"));
    }
    meta.runtime_ms = elapsed_ms(start);
    QfiEstimate::new(raw, Method::OverlapFd, meta)
}

/// Quantum Fisher information matrix with its provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct Qfim {
    pub values: DMatrix<f64>,
    pub stderr: Option<DMatrix<f64>>,
    pub method: Method,
    pub metadata: Metadata,
}

impl Qfim {
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        (0..self.values.nrows())
            .map(|i| self.values.row(i).iter().copied().collect())
            .collect()
    }
}

/// `F_ij = 2⟨{G_i, G_j}⟩ − 4⟨G_i⟩⟨G_j⟩` over every parameter of the family.
pub fn qfim(
    family: &HamiltonianFamily,
    state0: &QuantumState,
    lambda: &[f64],
    t: f64,
    cfg: &QuadratureConfig,
) -> Result<Qfim> {
    let start = Instant::now();
    state0.check_dim(family.dim())?;
    let m = family.n_params();
    if m == 0 {
        return Err(QfiError::invalid("family exposes no parameters"));
    }
    let images: Vec<(CVector, f64)> = (0..m)
        .map(|i| duhamel_generator(family, lambda, t, i, cfg).map(|g| generator_image(&g, state0.amplitudes())))
        .collect::<Result<_>>()?;
    let mut meta = Metadata::new(family.id(), lambda, None, t).tolerance("quadrature", cfg.tol);
    let mut values = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let mut v = covariance_entry(&images[i], &images[j]);
            if i == j {
                v = clamp_qfi(v, &mut meta.warnings)?;
            }
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    meta.runtime_ms = elapsed_ms(start);
    Ok(Qfim {
        values,
        stderr: None,
        method: Method::GeneratorVariance,
        metadata: meta,
    })
}

/// Residual `‖(ħ/i)∂_λψ(t) − (−ħ U G ψ₀)‖` between the insertion amplitude and its operator form.
pub fn insertion_amplitude_check(
    family: &HamiltonianFamily,
    state0: &QuantumState,
    lambda: &[f64],
    t: f64,
    param: usize,
    cfg: &QuadratureConfig,
) -> Result<f64> {
    state0.check_dim(family.dim())?;
    let hbar = family.hbar();
    let h = default_dlambda(lambda[param]);
    let (_, dpsi) = state_derivative(family, state0.amplitudes(), lambda, t, param, h)?;
    let insertion = dpsi * Complex64::new(0.0, -hbar);
    let g = duhamel_generator(family, lambda, t, param, cfg)?;
    let evolver = Evolver::new(family, lambda)?;
    let g_psi = &g.matrix * state0.amplitudes();
    let (u_g_psi, _) = evolver.apply_converged(0.0, t, &g_psi)?;
    let operator_form = u_g_psi * c(-hbar);
    Ok((insertion - operator_form).norm())
}
