use num_complex::Complex64;

use crate::error::{QfiError, Result};
use crate::exact::family::HamiltonianFamily;
use crate::exact::propagate::Evolver;
use crate::linalg::{c, composite_gauss_legendre, ensure_hermitian, CMatrix, CVector, Spectrum};

/// Quadrature policy for the Duhamel integral.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureConfig {
    /// Gauss–Legendre nodes per panel.
    pub quad_order: usize,
    /// Convergence threshold on the Frobenius change between refinements,
    /// relative to `max(1, ‖G‖_F)`.
    pub tol: f64,
    pub max_nodes: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            quad_order: 16,
            tol: 1e-9,
            max_nodes: 1 << 17,
        }
    }
}

/// The Hermitian deformation generator `G_λ(t) = (1/ħ) ∫₀ᵗ U†(∂H)U dt′`.
#[derive(Clone, Debug)]
pub struct DeformationGenerator {
    pub matrix: CMatrix,
    pub t: f64,
    pub lambda: Vec<f64>,
    pub param: usize,
    pub model: String,
    pub quadrature_nodes: usize,
    /// Frobenius change at the last refinement.
    pub residual: f64,
}

pub const GENERATOR_HERMITIAN_TOL: f64 = 1e-10;

/// Builds `G_λ(t)` for parameter `param` by refined composite Gauss–Legendre quadrature.
pub fn duhamel_generator(
    family: &HamiltonianFamily,
    lambda: &[f64],
    t: f64,
    param: usize,
    cfg: &QuadratureConfig,
) -> Result<DeformationGenerator> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(QfiError::invalid(format!("evolution time must be >= 0, got {t}")));
    }
    if cfg.quad_order < 2 {
        return Err(QfiError::invalid("quad_order must be at least 2"));
    }
    family.check_param(param)?;
    let dim = family.dim();
    let make = |matrix: CMatrix, nodes: usize, residual: f64| DeformationGenerator {
        matrix,
        t,
        lambda: lambda.to_vec(),
        param,
        model: family.id().to_string(),
        quadrature_nodes: nodes,
        residual,
    };
    if t == 0.0 {
        return Ok(make(CMatrix::zeros(dim, dim), 0, 0.0));
    }

    let evolver = Evolver::new(family, lambda)?;
    let (d_eig, slices) = match evolver.spectrum() {
        Some(spectrum) => (Some(spectrum.to_eigenbasis(&family.deformation(lambda, 0.0, param)?)), 0),
        None => (None, evolver.operator_converged(0.0, t)?.1),
    };
    let mut cache = Vec::new();
    let mut integrate = |panels: usize| -> Result<CMatrix> {
        match (evolver.spectrum(), d_eig.as_ref()) {
            (Some(spectrum), Some(d)) => Ok(static_integral(spectrum, d, family.hbar(), t, cfg.quad_order, panels)),
            _ => sliced_integral(&evolver, family, lambda, param, t, slices, cfg.quad_order, panels, &mut cache),
        }
    };

    let mut panels = 1;
    let mut previous = integrate(panels)?;
    loop {
        panels *= 2;
        let nodes = panels * cfg.quad_order;
        let current = integrate(panels)?;
        let residual = (&current - &previous).norm() / current.norm().max(1.0);
        if residual < cfg.tol {
            let mut g = current / c(family.hbar());
            g = (&g + g.adjoint()) * c(0.5);
            ensure_hermitian(&g, "deformation generator", GENERATOR_HERMITIAN_TOL)?;
            return Ok(make(g, nodes, residual));
        }
        if 2 * nodes > cfg.max_nodes {
            return Err(QfiError::Convergence {
                what: "Duhamel quadrature".into(),
                residual,
            });
        }
        previous = current;
    }
}

/// `∫₀ᵗ U†(∂H)U dt′` for a static Hamiltonian, returned in the original basis.
///
/// In the eigenbasis the integrand is `D_nm e^{i ω_nm t′}`; only the phase
/// factors are accumulated per node.
fn static_integral(spectrum: &Spectrum, d_eig: &CMatrix, hbar: f64, t: f64, order: usize, panels: usize) -> CMatrix {
    let n = spectrum.dim();
    let mut weights = CMatrix::zeros(n, n);
    for (tk, wk) in composite_gauss_legendre(0.0, t, order, panels) {
        let a: CVector = spectrum.values.map(|e| Complex64::from_polar(1.0, e * tk / hbar));
        for j in 0..n {
            let aj = a[j].conj() * wk;
            let mut col = weights.column_mut(j);
            for i in 0..n {
                col[i] += a[i] * aj;
            }
        }
    }
    spectrum.from_eigenbasis(&weights.component_mul(d_eig))
}

/// Above this many stored entries the slice propagators are recomputed instead of cached.
const STEP_CACHE_ENTRIES: usize = 1 << 22;

/// Same integral for a time-dependent family, marching slice propagators across the nodes.
#[allow(clippy::too_many_arguments)]
fn sliced_integral(
    evolver: &Evolver<'_>,
    family: &HamiltonianFamily,
    lambda: &[f64],
    param: usize,
    t: f64,
    slices: usize,
    order: usize,
    panels: usize,
    cache: &mut Vec<CMatrix>,
) -> Result<CMatrix> {
    let dim = family.dim();
    let h = t / slices as f64;
    let cacheable = slices * dim * dim <= STEP_CACHE_ENTRIES;
    if cacheable && cache.is_empty() {
        for k in 0..slices {
            let ta = k as f64 * h;
            cache.push(evolver.slice_operator(ta, ta + h)?);
        }
    }
    let mut boundary = 0usize;
    let mut u_boundary = CMatrix::identity(dim, dim);
    let mut acc = CMatrix::zeros(dim, dim);
    for (tk, wk) in composite_gauss_legendre(0.0, t, order, panels) {
        while ((boundary + 1) as f64) * h <= tk {
            let step = if cacheable {
                cache[boundary].clone()
            } else {
                let ta = boundary as f64 * h;
                evolver.slice_operator(ta, ta + h)?
            };
            u_boundary = step * u_boundary;
            boundary += 1;
        }
        let tb = boundary as f64 * h;
        let u = evolver.slice_operator(tb, tk)? * &u_boundary;
        let d = family.deformation(lambda, tk, param)?;
        acc += (u.adjoint() * d * u) * c(wk);
    }
    Ok(acc)
}
