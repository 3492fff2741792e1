//! Classical trajectories with the action `S` and its parameter derivative `∂_λS`
//! accumulated along the way, plus 1D boundary-value shooting.

use serde::{Deserialize, Serialize};

use crate::error::{QfiError, Result};
use crate::models::ClassicalModel;

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseSpacePoint {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
}

impl PhaseSpacePoint {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Self {
        PhaseSpacePoint { q, p }
    }

    pub fn dof(&self) -> usize {
        self.q.len()
    }

    fn is_sane(&self) -> bool {
        self.q.iter().chain(&self.p).all(|v| v.is_finite() && v.abs() < DIVERGENCE_BOUND)
    }
}

const DIVERGENCE_BOUND: f64 = 1e12;

/// Steps per reference period in the default time step.
pub const STEPS_PER_PERIOD: f64 = 200.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Kick-drift-kick; symplectic, second order.
    #[default]
    Leapfrog,
    /// Classical fourth-order Runge–Kutta on `(q, p, S, ∂S)`.
    Rk4,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepperConfig {
    /// Upper bound on the step; the actual step divides the span evenly.
    pub dt: f64,
    pub scheme: Scheme,
}

impl StepperConfig {
    pub fn new(dt: f64) -> Self {
        StepperConfig {
            dt,
            scheme: Scheme::Leapfrog,
        }
    }

    /// `dt = (2π/ω_ref)/200`.
    pub fn for_model(model: &dyn ClassicalModel) -> Self {
        Self::new(default_dt(model.omega_ref()))
    }

    pub fn with_scheme(mut self, scheme: Scheme) -> Self {
        self.scheme = scheme;
        self
    }
}

pub fn default_dt(omega_ref: f64) -> f64 {
    if omega_ref > 0.0 {
        2.0 * std::f64::consts::PI / omega_ref / STEPS_PER_PERIOD
    } else {
        1e-2
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryResult {
    pub final_point: PhaseSpacePoint,
    pub action: f64,
    /// `∂S/∂λ_i = ∫ ∂L/∂λ_i dt` at fixed initial phase-space point.
    pub dlambda_action: Vec<f64>,
    pub steps: usize,
    /// The step actually used.
    pub dt: f64,
    /// `|E(t) − E(0)| / |E(0)|` at the final time; zero for driven models.
    pub energy_drift: f64,
    /// Largest relative energy excursion along the way; zero for driven models.
    pub max_energy_error: f64,
}

fn check_inputs(model: &dyn ClassicalModel, initial: &PhaseSpacePoint, lambda: &[f64], t: f64, cfg: &StepperConfig) -> Result<()> {
    let n = model.dof();
    if initial.q.len() != n || initial.p.len() != n {
        return Err(QfiError::DimensionMismatch {
            what: "phase-space point".into(),
            expected: n,
            found: initial.q.len().max(initial.p.len()),
        });
    }
    if lambda.len() != model.n_params() {
        return Err(QfiError::DimensionMismatch {
            what: "parameter vector".into(),
            expected: model.n_params(),
            found: lambda.len(),
        });
    }
    if !(t >= 0.0 && t.is_finite()) {
        return Err(QfiError::invalid(format!("evolution time must be >= 0, got {t}")));
    }
    if !(cfg.dt > 0.0 && cfg.dt.is_finite()) {
        return Err(QfiError::invalid(format!("time step must be positive, got {}", cfg.dt)));
    }
    Ok(())
}

struct Workspace {
    grad: Vec<f64>,
    dl: Vec<f64>,
    q_mid: Vec<f64>,
    qdot: Vec<f64>,
}

impl Workspace {
    fn new(n: usize, m: usize) -> Self {
        Workspace {
            grad: vec![0.0; n],
            dl: vec![0.0; m],
            q_mid: vec![0.0; n],
            qdot: vec![0.0; n],
        }
    }
}

/// One leapfrog step; the action increment uses the Lagrangian at the
/// midpoint of the drift with the secant velocity.
#[allow(clippy::too_many_arguments)]
fn leapfrog_step(
    model: &dyn ClassicalModel,
    x: &mut PhaseSpacePoint,
    lambda: &[f64],
    t: f64,
    dt: f64,
    ws: &mut Workspace,
    action: &mut f64,
    dlambda: &mut [f64],
) {
    let inv_m = 1.0 / model.mass();
    model.grad_potential(&x.q, lambda, t, &mut ws.grad);
    for (p, g) in x.p.iter_mut().zip(&ws.grad) {
        *p -= 0.5 * dt * g;
    }
    for i in 0..x.q.len() {
        let q_new = x.q[i] + dt * x.p[i] * inv_m;
        ws.q_mid[i] = 0.5 * (x.q[i] + q_new);
        ws.qdot[i] = (q_new - x.q[i]) / dt;
        x.q[i] = q_new;
    }
    let t_mid = t + 0.5 * dt;
    *action += dt * model.lagrangian(&ws.q_mid, &ws.qdot, lambda, t_mid);
    model.dlambda_lagrangian(&ws.q_mid, &ws.qdot, lambda, t_mid, &mut ws.dl);
    for (acc, v) in dlambda.iter_mut().zip(&ws.dl) {
        *acc += dt * v;
    }
    model.grad_potential(&x.q, lambda, t + dt, &mut ws.grad);
    for (p, g) in x.p.iter_mut().zip(&ws.grad) {
        *p -= 0.5 * dt * g;
    }
}

/// Right-hand side of the augmented system `(q, p, S, ∂S)`.
fn rk4_rhs(model: &dyn ClassicalModel, y: &[f64], lambda: &[f64], t: f64, ws: &mut Workspace, out: &mut [f64]) {
    let n = model.dof();
    let m = model.n_params();
    let (q, rest) = y.split_at(n);
    let p = &rest[..n];
    let inv_m = 1.0 / model.mass();
    for i in 0..n {
        ws.qdot[i] = p[i] * inv_m;
        out[i] = ws.qdot[i];
    }
    model.grad_potential(q, lambda, t, &mut ws.grad);
    for i in 0..n {
        out[n + i] = -ws.grad[i];
    }
    out[2 * n] = model.lagrangian(q, &ws.qdot, lambda, t);
    model.dlambda_lagrangian(q, &ws.qdot, lambda, t, &mut ws.dl);
    out[2 * n + 1..2 * n + 1 + m].copy_from_slice(&ws.dl);
}

fn rk4_step(model: &dyn ClassicalModel, y: &mut [f64], lambda: &[f64], t: f64, dt: f64, ws: &mut Workspace) {
    let len = y.len();
    let shifted = |base: &[f64], k: &[f64], c: f64| -> Vec<f64> { base.iter().zip(k).map(|(a, b)| a + c * b).collect() };
    let mut k1 = vec![0.0; len];
    let mut k2 = vec![0.0; len];
    let mut k3 = vec![0.0; len];
    let mut k4 = vec![0.0; len];
    rk4_rhs(model, y, lambda, t, ws, &mut k1);
    rk4_rhs(model, &shifted(y, &k1, 0.5 * dt), lambda, t + 0.5 * dt, ws, &mut k2);
    rk4_rhs(model, &shifted(y, &k2, 0.5 * dt), lambda, t + 0.5 * dt, ws, &mut k3);
    rk4_rhs(model, &shifted(y, &k3, dt), lambda, t + dt, ws, &mut k4);
    for i in 0..len {
        y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
}

fn integrate_impl(
    model: &dyn ClassicalModel,
    initial: &PhaseSpacePoint,
    lambda: &[f64],
    t: f64,
    cfg: &StepperConfig,
    mut record: Option<&mut Vec<(f64, PhaseSpacePoint)>>,
) -> Result<TrajectoryResult> {
    check_inputs(model, initial, lambda, t, cfg)?;
    let n = model.dof();
    let m = model.n_params();
    let steps = if t == 0.0 { 0 } else { ((t / cfg.dt) * (1.0 - 1e-12)).ceil().max(1.0) as usize };
    let dt = if steps == 0 { cfg.dt } else { t / steps as f64 };
    let mut ws = Workspace::new(n, m);
    let conserve = !model.is_time_dependent();
    let e0 = model.hamiltonian(&initial.q, &initial.p, lambda, 0.0);
    let mut excursion: f64 = 0.0;
    let mut drift = 0.0;
    let mut x = initial.clone();
    let mut action = 0.0;
    let mut dlambda = vec![0.0; m];
    let mut y = match cfg.scheme {
        Scheme::Rk4 => {
            let mut y = Vec::with_capacity(2 * n + 1 + m);
            y.extend_from_slice(&x.q);
            y.extend_from_slice(&x.p);
            y.resize(2 * n + 1 + m, 0.0);
            y
        }
        Scheme::Leapfrog => Vec::new(),
    };
    if let Some(r) = record.as_deref_mut() {
        r.push((0.0, x.clone()));
    }
    for k in 0..steps {
        let tk = k as f64 * dt;
        match cfg.scheme {
            Scheme::Leapfrog => leapfrog_step(model, &mut x, lambda, tk, dt, &mut ws, &mut action, &mut dlambda),
            Scheme::Rk4 => {
                rk4_step(model, &mut y, lambda, tk, dt, &mut ws);
                x.q.copy_from_slice(&y[..n]);
                x.p.copy_from_slice(&y[n..2 * n]);
            }
        }
        if !x.is_sane() {
            return Err(QfiError::Divergence { time: tk + dt });
        }
        if conserve {
            let e = model.hamiltonian(&x.q, &x.p, lambda, tk + dt);
            drift = (e - e0).abs() / e0.abs().max(f64::MIN_POSITIVE);
            excursion = excursion.max(drift);
        }
        if let Some(r) = record.as_deref_mut() {
            r.push((tk + dt, x.clone()));
        }
    }
    if cfg.scheme == Scheme::Rk4 {
        action = y[2 * n];
        dlambda.copy_from_slice(&y[2 * n + 1..]);
    }
    Ok(TrajectoryResult {
        final_point: x,
        action,
        dlambda_action: dlambda,
        steps,
        dt,
        energy_drift: drift,
        max_energy_error: excursion,
    })
}

/// Integrates from `initial` at time 0 to `t`.
pub fn integrate_trajectory(
    model: &dyn ClassicalModel,
    initial: &PhaseSpacePoint,
    lambda: &[f64],
    t: f64,
    cfg: &StepperConfig,
) -> Result<TrajectoryResult> {
    integrate_impl(model, initial, lambda, t, cfg, None)
}

/// Like [`integrate_trajectory`], also returning every visited point.
pub fn integrate_recorded(
    model: &dyn ClassicalModel,
    initial: &PhaseSpacePoint,
    lambda: &[f64],
    t: f64,
    cfg: &StepperConfig,
) -> Result<(TrajectoryResult, Vec<(f64, PhaseSpacePoint)>)> {
    let mut path = Vec::new();
    let result = integrate_impl(model, initial, lambda, t, cfg, Some(&mut path))?;
    Ok((result, path))
}

/// Options for [`shoot_bvp_1d`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShootOptions {
    /// Half-width of the initial-momentum scan. `None` uses `4√(2m E_window)`.
    pub p_max: Option<f64>,
    pub scan_points: usize,
    /// Endpoint tolerance `|q(t) − q_f|`.
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for ShootOptions {
    fn default() -> Self {
        ShootOptions {
            p_max: None,
            scan_points: 200,
            tol: 1e-12,
            max_iter: 200,
        }
    }
}

/// Below this `|∂q_f/∂p_i|` the boundary-value problem is at a caustic.
pub const CAUSTIC_TOL: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct ShootResult {
    pub p_initial: f64,
    pub trajectory: TrajectoryResult,
    /// `∂q_f/∂p_i`.
    pub jacobian: f64,
    pub p_max: f64,
}

/// Energy scale bounding the momenta worth scanning:
/// `E_window = m(q_f−q_i)²/2t² + |V(q_i,0)| + |V(q_f,t)| + mω_ref²(q_f−q_i)²/2`.
pub fn energy_window(model: &dyn ClassicalModel, q_i: f64, q_f: f64, lambda: &[f64], t: f64) -> f64 {
    let m = model.mass();
    let span = q_f - q_i;
    let w = model.omega_ref();
    0.5 * m * (span / t).powi(2)
        + model.potential(&[q_i], lambda, 0.0).abs()
        + model.potential(&[q_f], lambda, t).abs()
        + 0.5 * m * w * w * span * span
}

/// Finds the initial momentum with `q(0) = q_i`, `q(t) = q_f`.
///
/// Scans `[−p_max, p_max]`, takes the first sign change of `q(t; p) − q_f`,
/// bisects it down and polishes with secant steps. Only that branch is returned.
pub fn shoot_bvp_1d(
    model: &dyn ClassicalModel,
    q_i: f64,
    q_f: f64,
    lambda: &[f64],
    t: f64,
    cfg: &StepperConfig,
    opts: &ShootOptions,
) -> Result<ShootResult> {
    if model.dof() != 1 {
        return Err(QfiError::UnsupportedModel(format!("shooting needs one degree of freedom, {} has {}", model.id(), model.dof())));
    }
    if !(t > 0.0) {
        return Err(QfiError::invalid("shooting needs t > 0"));
    }
    if opts.scan_points < 2 {
        return Err(QfiError::invalid("scan needs at least two points"));
    }
    let p_max = match opts.p_max {
        Some(p) if p > 0.0 => p,
        Some(p) => return Err(QfiError::invalid(format!("p_max must be positive, got {p}"))),
        None => {
            let e = energy_window(model, q_i, q_f, lambda, t);
            (4.0 * (2.0 * model.mass() * e).sqrt()).max(1e-6)
        }
    };
    let residual = |p: f64| -> Result<f64> {
        let r = integrate_trajectory(model, &PhaseSpacePoint::new(vec![q_i], vec![p]), lambda, t, cfg)?;
        Ok(r.final_point.q[0] - q_f)
    };

    let mut bracket = None;
    let step = 2.0 * p_max / (opts.scan_points - 1) as f64;
    let mut prev_p = -p_max;
    let mut prev_r = residual(prev_p)?;
    if prev_r == 0.0 {
        bracket = Some((prev_p, prev_p, 0.0, 0.0));
    }
    for k in 1..opts.scan_points {
        if bracket.is_some() {
            break;
        }
        let p = -p_max + k as f64 * step;
        let r = residual(p)?;
        if r == 0.0 || r.signum() != prev_r.signum() {
            bracket = Some((prev_p, p, prev_r, r));
        }
        prev_p = p;
        prev_r = r;
    }
    let (mut a, mut b, mut ra, mut rb) = bracket.ok_or_else(|| {
        QfiError::NoBranch(format!("no trajectory reaches q_f = {q_f} from q_i = {q_i} within |p| <= {p_max:.4e}"))
    })?;
    if ra == 0.0 {
        b = a;
        rb = 0.0;
    }
    let mut iter = 0;
    while rb != 0.0 && (b - a).abs() > 1e-10 * p_max && iter < opts.max_iter {
        let mid = 0.5 * (a + b);
        let rm = residual(mid)?;
        if rm.signum() == ra.signum() {
            a = mid;
            ra = rm;
        } else {
            b = mid;
            rb = rm;
        }
        iter += 1;
    }
    let (mut p0, mut r0, mut p1, mut r1) = (a, ra, b, rb);
    if r0.abs() < r1.abs() {
        std::mem::swap(&mut p0, &mut p1);
        std::mem::swap(&mut r0, &mut r1);
    }
    while r1.abs() > opts.tol && iter < opts.max_iter && r1 != r0 {
        let p2 = p1 - r1 * (p1 - p0) / (r1 - r0);
        p0 = p1;
        r0 = r1;
        p1 = p2;
        r1 = residual(p1)?;
        iter += 1;
    }
    if r1.abs() > opts.tol.max(1e-9 * q_f.abs()) {
        return Err(QfiError::Convergence {
            what: "shooting".into(),
            residual: r1.abs(),
        });
    }
    let h = 1e-6 * p1.abs().max(1.0);
    let jacobian = (residual(p1 + h)? - residual(p1 - h)?) / (2.0 * h);
    if jacobian.abs() < CAUSTIC_TOL {
        return Err(QfiError::Caustic { jacobian });
    }
    let trajectory = integrate_trajectory(model, &PhaseSpacePoint::new(vec![q_i], vec![p1]), lambda, t, cfg)?;
    Ok(ShootResult {
        p_initial: p1,
        trajectory,
        jacobian,
        p_max,
    })
}

/// `|∂p_i/∂q_f|` by central differences of re-shot boundary-value problems.
pub fn van_vleck_determinant_1d(
    model: &dyn ClassicalModel,
    q_i: f64,
    q_f: f64,
    lambda: &[f64],
    t: f64,
    cfg: &StepperConfig,
    opts: &ShootOptions,
) -> Result<f64> {
    let center = shoot_bvp_1d(model, q_i, q_f, lambda, t, cfg, opts)?;
    let h = 1e-5 * q_f.abs().max(1.0);
    let fixed = ShootOptions {
        p_max: Some(center.p_max),
        ..*opts
    };
    let plus = shoot_bvp_1d(model, q_i, q_f + h, lambda, t, cfg, &fixed)?;
    let minus = shoot_bvp_1d(model, q_i, q_f - h, lambda, t, cfg, &fixed)?;
    Ok(((plus.p_initial - minus.p_initial) / (2.0 * h)).abs())
}
