//! Correlator route: the QFI as the double time integral of the connected
//! symmetrized correlator of the deformation operator, and the closed-time-path
//! generating functional `Z[J₊, J₋] = ⟨ψ₀|Ũ₋†Ũ₊|ψ₀⟩` with impulse sources.
//!
//! A kick of strength `ε` at slice `k` inserts `e^{iεo/ħ}` into the evolution of
//! its branch. Because the minus branch enters through its adjoint, a plus kick
//! and a minus kick of equal strength at the same slice cancel, and
//! `∂²ln Z/∂ε₋∂ε₊ = ⟨o_H(t₋) o_H(t₊)⟩_c / ħ²`.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{QfiError, Result};
use crate::estimate::{Metadata, Method, QfiEstimate};
use crate::exact::{
    duhamel_generator, elapsed_ms, evolution_operator, Evolver, HamiltonianFamily, QuadratureConfig, QuantumState,
    HERMITIAN_TOL,
};
use crate::linalg::{ensure_hermitian, expectation, inner, CMatrix, CVector, Spectrum};

/// `U†(t′,0) o U(t′,0)`.
pub fn heisenberg_matrix(family: &HamiltonianFamily, lambda: &[f64], o: &CMatrix, t_prime: f64) -> Result<CMatrix> {
    check_observable(family, o)?;
    let u = evolution_operator(family, lambda, 0.0, t_prime)?;
    Ok(u.adjoint() * o * u)
}

fn check_observable(family: &HamiltonianFamily, o: &CMatrix) -> Result<()> {
    if o.shape() != (family.dim(), family.dim()) {
        return Err(QfiError::DimensionMismatch {
            what: "observable".into(),
            expected: family.dim(),
            found: o.nrows(),
        });
    }
    ensure_hermitian(o, "observable", HERMITIAN_TOL)
}

/// `⟨o_H(t₁) o_H(t₂)⟩ − ⟨o_H(t₁)⟩⟨o_H(t₂)⟩`, operator order as written.
pub fn connected_wightman(
    family: &HamiltonianFamily,
    state0: &QuantumState,
    lambda: &[f64],
    o: &CMatrix,
    t1: f64,
    t2: f64,
) -> Result<Complex64> {
    state0.check_dim(family.dim())?;
    let a = heisenberg_matrix(family, lambda, o, t1)?;
    let b = heisenberg_matrix(family, lambda, o, t2)?;
    Ok(wightman_from(&a, &b, state0.amplitudes()))
}

fn wightman_from(a: &CMatrix, b: &CMatrix, psi: &CVector) -> Complex64 {
    let a_psi = a * psi;
    let b_psi = b * psi;
    inner(&a_psi, &b_psi) - inner(psi, &a_psi) * inner(psi, &b_psi)
}

/// `½⟨{δo_H(t₁), δo_H(t₂)}⟩`; real up to round-off.
pub fn symmetrized_correlator(
    family: &HamiltonianFamily,
    state0: &QuantumState,
    lambda: &[f64],
    o: &CMatrix,
    t1: f64,
    t2: f64,
) -> Result<Complex64> {
    let w12 = connected_wightman(family, state0, lambda, o, t1, t2)?;
    let w21 = connected_wightman(family, state0, lambda, o, t2, t1)?;
    Ok(0.5 * (w12 + w21))
}

/// Below this `|ωt|` the integral `I(ω) = (e^{iωt}−1)/(iω)` is evaluated by its series.
pub const SERIES_THRESHOLD: f64 = 1e-4;

/// `∫₀ᵗ e^{iωt′} dt′`.
pub fn phase_integral(omega: f64, t: f64) -> Complex64 {
    let x = omega * t;
    if x.abs() < SERIES_THRESHOLD {
        t * Complex64::new(1.0 - x * x / 6.0, 0.5 * x)
    } else {
        (Complex64::from_polar(1.0, x) - 1.0) / Complex64::new(0.0, omega)
    }
}

pub(crate) const TIME_DEPENDENT_FALLBACK: &str =
    "time-dependent Hamiltonian: correlator integral evaluated by Duhamel quadrature";

/// `F = (4/ħ²) Var(Ō)` with `Ō = ∫₀ᵗ o_H(t′) dt′` built in the eigenbasis of `H(λ)`.
/// Time-dependent families fall back to quadrature and are flagged.
pub fn qfi_correlator_integral(
    family: &HamiltonianFamily,
    state0: &QuantumState,
    lambda: &[f64],
    t: f64,
    param: usize,
) -> Result<QfiEstimate> {
    let start = Instant::now();
    state0.check_dim(family.dim())?;
    family.check_param(param)?;
    if !(t >= 0.0 && t.is_finite()) {
        return Err(QfiError::invalid(format!("evolution time must be >= 0, got {t}")));
    }
    let hbar = family.hbar();
    let mut meta = Metadata::new(family.id(), lambda, Some(param), t);
    let (o_bar, psi) = if family.is_time_dependent() {
        let cfg = QuadratureConfig::default();
        let g = duhamel_generator(family, lambda, t, param, &cfg)?;
        meta.warn(TIME_DEPENDENT_FALLBACK);
        meta.diagnostics.insert("quadrature_nodes".into(), g.quadrature_nodes as f64);
        (g.matrix * Complex64::new(hbar, 0.0), state0.amplitudes().clone())
    } else {
        let h = family.hamiltonian(lambda, 0.0)?;
        let spectrum = Spectrum::of(&h);
        let o_eig = spectrum.to_eigenbasis(&family.deformation(lambda, 0.0, param)?);
        let e = &spectrum.values;
        let o_bar = CMatrix::from_fn(o_eig.nrows(), o_eig.ncols(), |n, m| {
            o_eig[(n, m)] * phase_integral((e[n] - e[m]) / hbar, t)
        });
        let psi = spectrum.vectors.adjoint() * state0.amplitudes();
        (o_bar, psi)
    };
    let image = &o_bar * &psi;
    let mean = inner(&psi, &image).re;
    let raw = 4.0 / (hbar * hbar) * (image.norm_squared() - mean * mean);
    meta.runtime_ms = elapsed_ms(start);
    QfiEstimate::new(raw, Method::CorrelatorIntegral, meta)
}

/// Uniform slicing of `[0, t]` into `n_slices` intervals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t: f64,
    n_slices: usize,
}

impl TimeGrid {
    pub fn new(t: f64, n_slices: usize) -> Result<Self> {
        if n_slices < 2 {
            return Err(QfiError::invalid(format!("time grid needs at least 2 slices, got {n_slices}")));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(QfiError::invalid(format!("time grid needs t > 0, got {t}")));
        }
        Ok(TimeGrid { t, n_slices })
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn n_slices(&self) -> usize {
        self.n_slices
    }

    pub fn dt(&self) -> f64 {
        self.t / self.n_slices as f64
    }

    /// Node `k ∈ 0..=n_slices`; the last node is exactly `t`.
    pub fn node(&self, k: usize) -> f64 {
        if k == self.n_slices {
            self.t
        } else {
            k as f64 * self.dt()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n_slices).map(|k| self.node(k)).collect()
    }

    pub fn trapezoid_weight(&self, k: usize) -> f64 {
        if k == 0 || k == self.n_slices {
            0.5 * self.dt()
        } else {
            self.dt()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Plus,
    Minus,
}

/// Impulse sources on one branch: `(slice, strength)` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SourceProfile {
    pub branch: Branch,
    pub kicks: Vec<(usize, f64)>,
}

impl SourceProfile {
    pub fn empty(branch: Branch) -> Self {
        SourceProfile { branch, kicks: Vec::new() }
    }

    pub fn kick(branch: Branch, slice: usize, strength: f64) -> Self {
        SourceProfile {
            branch,
            kicks: vec![(slice, strength)],
        }
    }
}

/// Below this `|Z|` the logarithm is refused.
pub const LOG_DOMAIN_FLOOR: f64 = 1e-12;

/// Precomputed contour: one propagator per slice, the unkicked state at every
/// node, and the spectrum of `o` for exact kick unitaries.
pub struct CtpContour {
    grid: TimeGrid,
    hbar: f64,
    steps: Vec<CMatrix>,
    checkpoints: Vec<CVector>,
    heisenberg: Vec<CMatrix>,
    o_spectrum: Spectrum,
}

impl CtpContour {
    pub fn new(family: &HamiltonianFamily, state0: &QuantumState, lambda: &[f64], grid: TimeGrid, o: &CMatrix) -> Result<Self> {
        state0.check_dim(family.dim())?;
        check_observable(family, o)?;
        let evolver = Evolver::new(family, lambda)?;
        let steps: Vec<CMatrix> = (0..grid.n_slices())
            .map(|k| evolver.operator_converged(grid.node(k), grid.node(k + 1)).map(|(u, _)| u))
            .collect::<Result<_>>()?;
        let dim = family.dim();
        let mut checkpoints = Vec::with_capacity(grid.n_slices() + 1);
        let mut heisenberg = Vec::with_capacity(grid.n_slices() + 1);
        let mut psi = state0.amplitudes().clone();
        let mut u = CMatrix::identity(dim, dim);
        checkpoints.push(psi.clone());
        heisenberg.push(o.clone());
        for step in &steps {
            psi = step * psi;
            u = step * u;
            checkpoints.push(psi.clone());
            heisenberg.push(u.adjoint() * o * &u);
        }
        Ok(CtpContour {
            grid,
            hbar: family.hbar(),
            steps,
            checkpoints,
            heisenberg,
            o_spectrum: Spectrum::of(o),
        })
    }

    pub fn grid(&self) -> &TimeGrid {
        &self.grid
    }

    fn check_sources(&self, sources: &[&SourceProfile]) -> Result<()> {
        for s in sources {
            for &(k, e) in &s.kicks {
                if k > self.grid.n_slices() {
                    return Err(QfiError::invalid(format!(
                        "kick slice {k} outside grid of {} slices",
                        self.grid.n_slices()
                    )));
                }
                if !e.is_finite() {
                    return Err(QfiError::invalid("kick strength must be finite"));
                }
            }
        }
        Ok(())
    }

    /// `Ũ(t_end, 0)|ψ₀⟩` for one branch, with its kicks applied in slice order.
    fn branch_state(&self, kicks: &[(usize, f64)], end: usize) -> CVector {
        let mut kicks = kicks.to_vec();
        kicks.sort_by_key(|&(k, _)| k);
        let Some(&(first, _)) = kicks.first() else {
            return self.checkpoints[end].clone();
        };
        let mut psi = self.checkpoints[first].clone();
        let mut slice = first;
        for (k, eps) in kicks {
            while slice < k {
                psi = &self.steps[slice] * psi;
                slice += 1;
            }
            psi = self.o_spectrum.exp_apply(-eps / self.hbar, &psi);
        }
        while slice < end {
            psi = &self.steps[slice] * psi;
            slice += 1;
        }
        psi
    }

    /// `ln Z` on the principal branch. The evolution stops at the last kicked
    /// slice since the common tail `U†U` cancels.
    pub fn log_z(&self, a: &SourceProfile, b: &SourceProfile) -> Result<Complex64> {
        self.check_sources(&[a, b])?;
        let mut plus = Vec::new();
        let mut minus = Vec::new();
        for s in [a, b] {
            match s.branch {
                Branch::Plus => plus.extend_from_slice(&s.kicks),
                Branch::Minus => minus.extend_from_slice(&s.kicks),
            }
        }
        let end = plus.iter().chain(&minus).map(|&(k, _)| k).max().unwrap_or(0);
        let z = inner(&self.branch_state(&minus, end), &self.branch_state(&plus, end));
        if z.norm() < LOG_DOMAIN_FLOOR {
            return Err(QfiError::LogDomain(z.norm()));
        }
        Ok(z.ln())
    }

    /// Central mixed difference `[L(+,+) − L(+,−) − L(−,+) + L(−,−)]/4ε²` with the
    /// minus-branch kick at `k_minus` and the plus-branch kick at `k_plus`.
    pub fn mixed_derivative(&self, k_minus: usize, k_plus: usize, eps: f64) -> Result<Complex64> {
        if !(1e-5..=1e-2).contains(&eps) {
            return Err(QfiError::invalid(format!("kick strength must lie in [1e-5, 1e-2], got {eps}")));
        }
        let l = |sm: f64, sp: f64| {
            self.log_z(
                &SourceProfile::kick(Branch::Minus, k_minus, sm * eps),
                &SourceProfile::kick(Branch::Plus, k_plus, sp * eps),
            )
        };
        Ok((l(1.0, 1.0)? - l(1.0, -1.0)? - l(-1.0, 1.0)? + l(-1.0, -1.0)?) / (4.0 * eps * eps))
    }

    /// Direct operator value `⟨o_H(t_a) o_H(t_b)⟩_c / ħ²` at grid nodes.
    pub fn wightman(&self, k_a: usize, k_b: usize) -> Complex64 {
        wightman_from(&self.heisenberg[k_a], &self.heisenberg[k_b], &self.checkpoints[0]) / (self.hbar * self.hbar)
    }

    /// `⟨o_H(t_k)⟩`.
    pub fn expectation(&self, k: usize) -> f64 {
        expectation(&self.heisenberg[k], &self.checkpoints[0]).re
    }

    /// Mixed derivative with one Richardson step in `ε`; `ε` is halved until
    /// `D(ε)` and `D(ε/2)` agree to `1e-6` relative.
    fn refined_derivative(&self, k_minus: usize, k_plus: usize) -> Result<Complex64> {
        let mut eps = 1e-3;
        let mut coarse = self.mixed_derivative(k_minus, k_plus, eps)?;
        loop {
            let fine = self.mixed_derivative(k_minus, k_plus, 0.5 * eps)?;
            let scale = fine.norm().max(1e-12);
            if (fine - coarse).norm() <= 1e-6 * scale || 0.25 * eps < 1e-5 {
                return Ok((4.0 * fine - coarse) / 3.0);
            }
            eps *= 0.5;
            coarse = fine;
        }
    }

    /// `4 ΣΣ w_k w_l Re D(k, l)` over the grid nodes.
    pub fn qfi_sum(&self) -> Result<f64> {
        let n = self.grid.n_slices();
        let pairs: Vec<(usize, usize)> = (0..=n).flat_map(|a| (a..=n).map(move |b| (a, b))).collect();
        let terms: Vec<f64> = pairs
            .par_iter()
            .map(|&(a, b)| {
                let d = self.refined_derivative(a, b)?;
                let mult = if a == b { 1.0 } else { 2.0 };
                Ok(mult * self.grid.trapezoid_weight(a) * self.grid.trapezoid_weight(b) * d.re)
            })
            .collect::<Result<_>>()?;
        Ok(4.0 * terms.iter().sum::<f64>())
    }
}

pub fn ctp_log_z(
    family: &HamiltonianFamily,
    state0: &QuantumState,
    lambda: &[f64],
    grid: TimeGrid,
    o: &CMatrix,
    sources: (&SourceProfile, &SourceProfile),
) -> Result<Complex64> {
    CtpContour::new(family, state0, lambda, grid, o)?.log_z(sources.0, sources.1)
}

#[allow(clippy::too_many_arguments)]
pub fn ctp_mixed_derivative(
    family: &HamiltonianFamily,
    state0: &QuantumState,
    lambda: &[f64],
    grid: TimeGrid,
    o: &CMatrix,
    k_minus: usize,
    k_plus: usize,
    eps: f64,
) -> Result<Complex64> {
    CtpContour::new(family, state0, lambda, grid, o)?.mixed_derivative(k_minus, k_plus, eps)
}

pub const MAX_LNZ_SLICES: usize = 64;

/// QFI from the mixed functional derivative of `ln Z`, trapezoid-summed over the grid.
/// The difference to the same sum on half the slices is attached as
/// `discretization_estimate`.
pub fn qfi_from_lnz(
    family: &HamiltonianFamily,
    state0: &QuantumState,
    lambda: &[f64],
    grid: TimeGrid,
    o: &CMatrix,
) -> Result<QfiEstimate> {
    let start = Instant::now();
    if grid.n_slices() > MAX_LNZ_SLICES {
        return Err(QfiError::invalid(format!(
            "at most {MAX_LNZ_SLICES} slices are supported, got {}",
            grid.n_slices()
        )));
    }
    if family.is_time_dependent() {
        return Err(QfiError::UnsupportedModel(
            "the ln Z route needs a time-independent deformation operator".into(),
        ));
    }
    let raw = CtpContour::new(family, state0, lambda, grid, o)?.qfi_sum()?;
    let mut meta = Metadata::new(family.id(), lambda, None, grid.t()).tolerance("slices", grid.n_slices() as f64);
    let half = grid.n_slices() / 2;
    if grid.n_slices() % 2 == 0 && half >= 2 {
        let coarse = CtpContour::new(family, state0, lambda, TimeGrid::new(grid.t(), half)?, o)?.qfi_sum()?;
        meta.diagnostics.insert("discretization_estimate".into(), (raw - coarse).abs());
    }
    meta.runtime_ms = elapsed_ms(start);
    QfiEstimate::new(raw, Method::CtpLnz, meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;

    #[test]
    fn phase_integral_series_joins_closed_form() {
        // t·sin(x)/x + i·t·2sin²(x/2)/x has no cancellation near x = 0
        let stable = |w: f64, t: f64| {
            let x = w * t;
            Complex64::new(t * x.sin() / x, t * 2.0 * (0.5 * x).sin().powi(2) / x)
        };
        for t in [0.5, 2.0] {
            let w = SERIES_THRESHOLD / t;
            for w in [0.999 * w, 1.001 * w] {
                assert!((phase_integral(w, t) - stable(w, t)).norm() < 1e-12 * t);
            }
        }
        assert_eq!(phase_integral(0.0, 1.5), c(1.5));
    }

    #[test]
    fn grid_nodes_end_exactly_at_t() {
        let g = TimeGrid::new(0.3, 7).unwrap();
        let nodes = g.nodes();
        assert_eq!(nodes[0], 0.0);
        assert_eq!(*nodes.last().unwrap(), 0.3);
        assert!(nodes.windows(2).all(|w| w[1] > w[0]));
        assert!(TimeGrid::new(1.0, 1).is_err());
    }
}
