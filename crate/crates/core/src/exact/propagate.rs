//! Time evolution `U_λ(t₁, t₀)`.
//!
//! Time-independent families use the eigendecomposition exponential directly.
//! Time-dependent families are sliced uniformly and each slice is replaced by
//! exponentials of `H` sampled inside it; the slice count is doubled until two
//! successive results agree to `SLICE_TOL`.

use crate::error::{QfiError, Result};
use crate::exact::family::HamiltonianFamily;
use crate::exact::state::QuantumState;
use crate::linalg::{c, CMatrix, CVector, Spectrum};

pub const SLICE_TOL: f64 = 1e-9;
const INITIAL_SLICES: usize = 16;
const MAX_SLICES: usize = 1 << 17;

/// Per-slice exponential rule for time-dependent Hamiltonians.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum SliceRule {
    /// `exp(−i h H(t_mid)/ħ)`; second order.
    Midpoint,
    /// Two exponentials of Gauss-node combinations of `H`; fourth order, unitary.
    #[default]
    CommutatorFree4,
}

const SQRT3: f64 = 1.732_050_807_568_877_2;
const GAUSS_NODES: [f64; 2] = [0.5 - SQRT3 / 6.0, 0.5 + SQRT3 / 6.0];
const CF4_WEIGHTS: [f64; 2] = [0.25 - SQRT3 / 6.0, 0.25 + SQRT3 / 6.0];

/// Evolution for one fixed λ.
pub(crate) enum Evolver<'a> {
    Static {
        spectrum: Spectrum,
        hbar: f64,
    },
    Sliced {
        family: &'a HamiltonianFamily,
        lambda: Vec<f64>,
        rule: SliceRule,
    },
}

impl<'a> Evolver<'a> {
    pub fn new(family: &'a HamiltonianFamily, lambda: &[f64]) -> Result<Self> {
        Self::with_rule(family, lambda, SliceRule::default())
    }

    pub fn with_rule(family: &'a HamiltonianFamily, lambda: &[f64], rule: SliceRule) -> Result<Self> {
        if family.is_time_dependent() {
            // validate once up front
            family.hamiltonian(lambda, 0.0)?;
            Ok(Evolver::Sliced {
                family,
                lambda: lambda.to_vec(),
                rule,
            })
        } else {
            let h = family.hamiltonian(lambda, 0.0)?;
            Ok(Evolver::Static {
                spectrum: Spectrum::of(&h),
                hbar: family.hbar(),
            })
        }
    }

    pub fn spectrum(&self) -> Option<&Spectrum> {
        match self {
            Evolver::Static { spectrum, .. } => Some(spectrum),
            Evolver::Sliced { .. } => None,
        }
    }

    /// The exponential factors of one slice, in order of application.
    fn slice_factors(&self, ta: f64, tb: f64) -> Result<Vec<(Spectrum, f64)>> {
        match self {
            Evolver::Sliced { family, lambda, rule } => {
                let s = (tb - ta) / family.hbar();
                match rule {
                    SliceRule::Midpoint => Ok(vec![(Spectrum::of(&family.hamiltonian(lambda, 0.5 * (ta + tb))?), s)]),
                    SliceRule::CommutatorFree4 => {
                        let h = tb - ta;
                        let h1 = family.hamiltonian(lambda, ta + GAUSS_NODES[0] * h)?;
                        let h2 = family.hamiltonian(lambda, ta + GAUSS_NODES[1] * h)?;
                        let [a1, a2] = CF4_WEIGHTS;
                        let first = &h1 * c(a2) + &h2 * c(a1);
                        let second = &h1 * c(a1) + &h2 * c(a2);
                        Ok(vec![(Spectrum::of(&first), s), (Spectrum::of(&second), s)])
                    }
                }
            }
            Evolver::Static { .. } => unreachable!("static evolution is not sliced"),
        }
    }

    /// `U(tb, ta)` for a single slice.
    pub fn slice_operator(&self, ta: f64, tb: f64) -> Result<CMatrix> {
        match self {
            Evolver::Static { spectrum, hbar } => Ok(spectrum.exp_matrix((tb - ta) / hbar)),
            Evolver::Sliced { .. } => {
                let mut factors = self.slice_factors(ta, tb)?.into_iter();
                let (spec, s) = factors.next().expect("at least one factor");
                let mut u = spec.exp_matrix(s);
                for (spec, s) in factors {
                    u = spec.exp_matrix(s) * u;
                }
                Ok(u)
            }
        }
    }

    /// Applies `U(t1, t0)` with a fixed slice count (ignored for static families).
    pub fn apply(&self, t0: f64, t1: f64, v: &CVector, slices: usize) -> Result<CVector> {
        match self {
            Evolver::Static { spectrum, hbar } => Ok(spectrum.exp_apply((t1 - t0) / hbar, v)),
            Evolver::Sliced { .. } => {
                let h = (t1 - t0) / slices as f64;
                let mut out = v.clone();
                for k in 0..slices {
                    let ta = t0 + k as f64 * h;
                    for (spec, s) in self.slice_factors(ta, ta + h)? {
                        out = spec.exp_apply(s, &out);
                    }
                }
                Ok(out)
            }
        }
    }

    /// `U(t1, t0)` as a matrix with a fixed slice count.
    pub fn operator(&self, t0: f64, t1: f64, slices: usize) -> Result<CMatrix> {
        match self {
            Evolver::Static { spectrum, hbar } => Ok(spectrum.exp_matrix((t1 - t0) / hbar)),
            Evolver::Sliced { family, .. } => {
                let h = (t1 - t0) / slices as f64;
                let mut u = CMatrix::identity(family.dim(), family.dim());
                for k in 0..slices {
                    let ta = t0 + k as f64 * h;
                    u = self.slice_operator(ta, ta + h)? * u;
                }
                Ok(u)
            }
        }
    }

    /// Applies `U(t1, t0)`, refining the slicing until converged. Returns the slice count used.
    pub fn apply_converged(&self, t0: f64, t1: f64, v: &CVector) -> Result<(CVector, usize)> {
        if let Evolver::Static { .. } = self {
            return Ok((self.apply(t0, t1, v, 1)?, 1));
        }
        if t1 == t0 {
            return Ok((v.clone(), 1));
        }
        let mut slices = INITIAL_SLICES;
        let mut coarse = self.apply(t0, t1, v, slices)?;
        loop {
            let fine = self.apply(t0, t1, v, 2 * slices)?;
            let residual = (&fine - &coarse).norm();
            slices *= 2;
            if residual < SLICE_TOL {
                return Ok((fine, slices));
            }
            if slices >= MAX_SLICES {
                return Err(QfiError::Convergence {
                    what: "midpoint time slicing".into(),
                    residual,
                });
            }
            coarse = fine;
        }
    }

    /// Matrix version of [`Evolver::apply_converged`]; residual is `‖ΔU‖_F / √dim`.
    pub fn operator_converged(&self, t0: f64, t1: f64) -> Result<(CMatrix, usize)> {
        match self {
            Evolver::Static { .. } => Ok((self.operator(t0, t1, 1)?, 1)),
            Evolver::Sliced { family, .. } => {
                if t1 == t0 {
                    return Ok((CMatrix::identity(family.dim(), family.dim()), 1));
                }
                let scale = (family.dim() as f64).sqrt();
                let mut slices = INITIAL_SLICES;
                let mut coarse = self.operator(t0, t1, slices)?;
                loop {
                    let fine = self.operator(t0, t1, 2 * slices)?;
                    let residual = (&fine - &coarse).norm() / scale;
                    slices *= 2;
                    if residual < SLICE_TOL {
                        return Ok((fine, slices));
                    }
                    if slices >= MAX_SLICES {
                        return Err(QfiError::Convergence {
                            what: "midpoint time slicing".into(),
                            residual,
                        });
                    }
                    coarse = fine;
                }
            }
        }
    }
}

fn check_times(t0: f64, t1: f64) -> Result<()> {
    if !(t0.is_finite() && t1.is_finite()) || t1 < t0 {
        return Err(QfiError::invalid(format!("require finite t1 >= t0, got t0={t0}, t1={t1}")));
    }
    Ok(())
}

/// `U_λ(t1, t0)|state⟩`.
pub fn propagate(
    family: &HamiltonianFamily,
    lambda: &[f64],
    t0: f64,
    t1: f64,
    state: &QuantumState,
) -> Result<QuantumState> {
    check_times(t0, t1)?;
    state.check_dim(family.dim())?;
    let evolver = Evolver::new(family, lambda)?;
    let (v, _) = evolver.apply_converged(t0, t1, state.amplitudes())?;
    Ok(QuantumState::from_unitary_image(v))
}

/// [`propagate`] with an explicit slice rule for time-dependent families.
pub fn propagate_with_rule(
    family: &HamiltonianFamily,
    lambda: &[f64],
    t0: f64,
    t1: f64,
    state: &QuantumState,
    rule: SliceRule,
) -> Result<QuantumState> {
    check_times(t0, t1)?;
    state.check_dim(family.dim())?;
    let evolver = Evolver::with_rule(family, lambda, rule)?;
    let (v, _) = evolver.apply_converged(t0, t1, state.amplitudes())?;
    Ok(QuantumState::from_unitary_image(v))
}

/// The dense propagator `U_λ(t1, t0)`.
pub fn evolution_operator(family: &HamiltonianFamily, lambda: &[f64], t0: f64, t1: f64) -> Result<CMatrix> {
    check_times(t0, t1)?;
    let evolver = Evolver::new(family, lambda)?;
    Ok(evolver.operator_converged(t0, t1)?.0)
}

/// Propagation at several λ sharing one slice count, so that finite differences
/// in λ see a smooth discretization error. The count is chosen at `lambdas[0]`.
pub(crate) fn propagate_stencil(
    family: &HamiltonianFamily,
    lambdas: &[Vec<f64>],
    t: f64,
    psi0: &CVector,
) -> Result<Vec<CVector>> {
    let first = Evolver::new(family, &lambdas[0])?;
    let (v0, slices) = first.apply_converged(0.0, t, psi0)?;
    let mut out = vec![v0];
    for l in &lambdas[1..] {
        let ev = Evolver::new(family, l)?;
        out.push(ev.apply(0.0, t, psi0, slices)?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::to_complex;
    use nalgebra::DMatrix;

    fn driven_qubit() -> HamiltonianFamily {
        let sz = to_complex(&DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]));
        let sx = to_complex(&DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
        let dsx = sx.clone();
        HamiltonianFamily::time_dependent(
            2,
            1.0,
            vec!["a".into()],
            move |l, t| &sz + &sx * c(l[0] * (2.0 * t).cos()),
            move |_, t| vec![&dsx * c((2.0 * t).cos())],
        )
        .unwrap()
    }

    #[test]
    fn slice_rules_agree_and_have_their_orders() {
        let fam = driven_qubit();
        let psi = QuantumState::basis(2, 0);
        let a = propagate_with_rule(&fam, &[0.7], 0.0, 2.0, &psi, SliceRule::Midpoint).unwrap();
        let b = propagate_with_rule(&fam, &[0.7], 0.0, 2.0, &psi, SliceRule::CommutatorFree4).unwrap();
        assert!((a.amplitudes() - b.amplitudes()).norm() < 1e-8);
        assert!((b.amplitudes().norm() - 1.0).abs() < 1e-12);

        let reference = b.amplitudes();
        for (rule, expected) in [(SliceRule::Midpoint, 4.0), (SliceRule::CommutatorFree4, 16.0)] {
            let ev = Evolver::with_rule(&fam, &[0.7], rule).unwrap();
            let e1 = (ev.apply(0.0, 2.0, psi.amplitudes(), 16).unwrap() - reference).norm();
            let e2 = (ev.apply(0.0, 2.0, psi.amplitudes(), 32).unwrap() - reference).norm();
            let ratio = e1 / e2;
            assert!((ratio / expected - 1.0).abs() < 0.15, "{rule:?}: ratio {ratio}");
        }
    }
}
