//! Semiclassical QFI: `F ≈ (4/ħ²) Var_W(∂_λS_cl)` over a Gaussian Wigner ensemble.
//!
//! Every trajectory starts from an indexed sample, so the per-trajectory values
//! do not depend on the worker count. Moments are accumulated in fixed chunks
//! and merged in a fixed pairwise tree for the same reason.

use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classical::{integrate_trajectory, StepperConfig};
use crate::correlator::qfi_correlator_integral;
use crate::error::{QfiError, Result};
use crate::estimate::{Metadata, Method, QfiEstimate};
use crate::exact::{duhamel_generator, elapsed_ms, qfi_generator_variance, qfi_overlap_fd, QuadratureConfig, Qfim};
use crate::models::{build_classical, build_quantum, initial_state, ClassicalModel, ModelSpec, StateKind};
use crate::wigner::{gaussian_for, GaussianStateSpec};

pub const MIN_SAMPLES: usize = 100;
pub const BOOTSTRAP_RESAMPLES: usize = 200;
const CHUNK: usize = 1024;
const BOOTSTRAP_SALT: u64 = 0x9e37_79b9_7f4a_7c15;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailurePolicy {
    #[default]
    FailFast,
    /// Diverged trajectories are dropped and their fraction recorded.
    DropAndFlag,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScOptions {
    pub n_samples: usize,
    pub seed: u64,
    /// `None` uses the model's default step.
    pub stepper: Option<StepperConfig>,
    pub failure: FailurePolicy,
    pub bootstrap: usize,
}

impl ScOptions {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        ScOptions {
            n_samples,
            seed,
            stepper: None,
            failure: FailurePolicy::FailFast,
            bootstrap: BOOTSTRAP_RESAMPLES,
        }
    }

    pub fn with_stepper(mut self, cfg: StepperConfig) -> Self {
        self.stepper = Some(cfg);
        self
    }

    pub fn with_failure(mut self, policy: FailurePolicy) -> Self {
        self.failure = policy;
        self
    }

    pub fn with_bootstrap(mut self, resamples: usize) -> Self {
        self.bootstrap = resamples;
        self
    }
}

/// Streaming mean and upper-triangle co-moment of a vector stream.
#[derive(Clone, Debug)]
struct Moments {
    n: usize,
    mean: Vec<f64>,
    comoment: Vec<f64>,
    delta: Vec<f64>,
}

impl Moments {
    fn new(m: usize) -> Self {
        Moments {
            n: 0,
            mean: vec![0.0; m],
            comoment: vec![0.0; m * m],
            delta: vec![0.0; m],
        }
    }

    fn push(&mut self, x: &[f64]) {
        let m = self.mean.len();
        self.n += 1;
        let n = self.n as f64;
        let factor = (n - 1.0) / n;
        for ((d, mu), xi) in self.delta.iter_mut().zip(self.mean.iter_mut()).zip(x) {
            *d = xi - *mu;
            *mu += *d / n;
        }
        for i in 0..m {
            for j in i..m {
                self.comoment[i * m + j] += self.delta[i] * self.delta[j] * factor;
            }
        }
    }

    fn merge(a: &Moments, b: &Moments) -> Moments {
        if a.n == 0 {
            return b.clone();
        }
        if b.n == 0 {
            return a.clone();
        }
        let m = a.mean.len();
        let n = a.n + b.n;
        let (na, nb, nt) = (a.n as f64, b.n as f64, n as f64);
        let delta: Vec<f64> = b.mean.iter().zip(&a.mean).map(|(x, y)| x - y).collect();
        let mean = a.mean.iter().zip(&delta).map(|(mu, d)| mu + d * nb / nt).collect();
        let weight = na * nb / nt;
        let mut comoment = vec![0.0; m * m];
        for i in 0..m {
            for j in i..m {
                let k = i * m + j;
                comoment[k] = a.comoment[k] + b.comoment[k] + delta[i] * delta[j] * weight;
            }
        }
        Moments {
            n,
            mean,
            comoment,
            delta: vec![0.0; m],
        }
    }

    /// Unbiased covariance, mirrored from the upper triangle.
    fn covariance(&self) -> DMatrix<f64> {
        let m = self.mean.len();
        let denom = (self.n as f64 - 1.0).max(1.0);
        DMatrix::from_fn(m, m, |i, j| {
            let (a, b) = if i <= j { (i, j) } else { (j, i) };
            self.comoment[a * m + b] / denom
        })
    }
}

fn tree_reduce(mut parts: Vec<Moments>, m: usize) -> Moments {
    if parts.is_empty() {
        return Moments::new(m);
    }
    while parts.len() > 1 {
        parts = parts
            .chunks(2)
            .map(|pair| match pair {
                [a, b] => Moments::merge(a, b),
                [a] => a.clone(),
                _ => unreachable!(),
            })
            .collect();
    }
    parts.pop().unwrap()
}

fn moments_of(values: &[Vec<f64>], m: usize) -> Moments {
    let parts = values
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = Moments::new(m);
            chunk.iter().for_each(|x| acc.push(x));
            acc
        })
        .collect();
    tree_reduce(parts, m)
}

/// Per-trajectory `∂_λS` vectors for the selected parameters.
struct Ensemble {
    values: Vec<Vec<f64>>,
    dropped: Vec<usize>,
    max_drift: f64,
    dt: f64,
}

fn run_ensemble(
    model: &dyn ClassicalModel,
    gspec: &GaussianStateSpec,
    lambda: &[f64],
    t: f64,
    params: &[usize],
    opts: &ScOptions,
) -> Result<Ensemble> {
    if opts.n_samples < MIN_SAMPLES {
        return Err(QfiError::invalid(format!(
            "semiclassical estimate needs at least {MIN_SAMPLES} samples, got {}",
            opts.n_samples
        )));
    }
    if opts.bootstrap < 2 {
        return Err(QfiError::invalid("bootstrap needs at least 2 resamples"));
    }
    if gspec.dof() != model.dof() {
        return Err(QfiError::DimensionMismatch {
            what: "Wigner ensemble".into(),
            expected: model.dof(),
            found: gspec.dof(),
        });
    }
    if let Some(&p) = params.iter().find(|&&p| p >= model.n_params()) {
        return Err(QfiError::invalid(format!("parameter index {p} out of range for {}", model.id())));
    }
    let cfg = opts.stepper.unwrap_or_else(|| StepperConfig::for_model(model));
    let outcomes: Vec<Result<(Vec<f64>, f64, f64)>> = (0..opts.n_samples as u64)
        .into_par_iter()
        .map(|i| {
            let start = gspec.point(opts.seed, i);
            let traj = integrate_trajectory(model, &start, lambda, t, &cfg)?;
            let picked = params.iter().map(|&p| traj.dlambda_action[p]).collect();
            Ok((picked, traj.energy_drift, traj.dt))
        })
        .collect();
    let mut values = Vec::with_capacity(outcomes.len());
    let mut dropped = Vec::new();
    let mut max_drift: f64 = 0.0;
    let mut dt = cfg.dt;
    for (i, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok((v, drift, step)) => {
                values.push(v);
                max_drift = max_drift.max(drift);
                dt = step;
            }
            Err(QfiError::Divergence { .. }) => dropped.push(i),
            Err(e) => return Err(e),
        }
    }
    if !dropped.is_empty() && (opts.failure == FailurePolicy::FailFast || values.len() < 2) {
        return Err(QfiError::SampleDivergence { indices: dropped });
    }
    Ok(Ensemble {
        values,
        dropped,
        max_drift,
        dt,
    })
}

/// Covariance estimate and its bootstrap standard error, both scaled by `4/ħ²`.
fn covariance_with_bootstrap(values: &[Vec<f64>], m: usize, scale: f64, seed: u64, resamples: usize) -> (DMatrix<f64>, DMatrix<f64>) {
    let n = values.len();
    let estimate = moments_of(values, m).covariance() * scale;
    let flat: Vec<f64> = values.iter().flatten().copied().collect();
    let replicas: Vec<DMatrix<f64>> = (0..resamples as u64)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ BOOTSTRAP_SALT);
            rng.set_stream(b);
            let mut acc = Moments::new(m);
            for _ in 0..n {
                let k = rng.random_range(0..n) * m;
                acc.push(&flat[k..k + m]);
            }
            acc.covariance() * scale
        })
        .collect();
    let mut spread = Moments::new(m * m);
    for r in &replicas {
        spread.push(r.as_slice());
    }
    let var = spread.covariance();
    let stderr = DMatrix::from_fn(m, m, |i, j| {
        let k = j * m + i;
        var[(k, k)].max(0.0).sqrt()
    });
    (estimate, stderr)
}

fn metadata(model: &dyn ClassicalModel, lambda: &[f64], param: Option<usize>, t: f64, opts: &ScOptions, ens: &Ensemble) -> Metadata {
    let mut meta = Metadata::new(model.id(), lambda, param, t);
    meta.seed = Some(opts.seed);
    meta.n_samples = Some(ens.values.len());
    meta.dt = Some(ens.dt);
    meta.tolerances.insert("bootstrap_resamples".into(), opts.bootstrap as f64);
    meta.diagnostics.insert("max_energy_drift".into(), ens.max_drift);
    meta.diagnostics.insert("dropped_fraction".into(), ens.dropped.len() as f64 / opts.n_samples as f64);
    if !ens.dropped.is_empty() {
        meta.warn(format!("{} of {} trajectories diverged and were dropped", ens.dropped.len(), opts.n_samples));
    }
    meta
}

/// `(4/ħ²)` times the unbiased ensemble variance of `∂S/∂λ_param`.
pub fn estimate_qfi_sc(
    model: &dyn ClassicalModel,
    gspec: &GaussianStateSpec,
    lambda: &[f64],
    t: f64,
    param: usize,
    opts: &ScOptions,
) -> Result<QfiEstimate> {
    let start = Instant::now();
    let ens = run_ensemble(model, gspec, lambda, t, &[param], opts)?;
    let scale = 4.0 / (gspec.hbar() * gspec.hbar());
    let (value, stderr) = covariance_with_bootstrap(&ens.values, 1, scale, opts.seed, opts.bootstrap);
    let mut meta = metadata(model, lambda, Some(param), t, opts, &ens);
    meta.runtime_ms = elapsed_ms(start);
    Ok(QfiEstimate::new(value[(0, 0)], Method::SemiclassicalMc, meta)?.with_stderr(stderr[(0, 0)]))
}

/// `(4/ħ²)` times the ensemble covariance of the full `∂_λS` vector.
pub fn estimate_qfim_sc(
    model: &dyn ClassicalModel,
    gspec: &GaussianStateSpec,
    lambda: &[f64],
    t: f64,
    opts: &ScOptions,
) -> Result<Qfim> {
    let start = Instant::now();
    let m = model.n_params();
    if m == 0 {
        return Err(QfiError::invalid(format!("{} has no parameters", model.id())));
    }
    let params: Vec<usize> = (0..m).collect();
    let ens = run_ensemble(model, gspec, lambda, t, &params, opts)?;
    let scale = 4.0 / (gspec.hbar() * gspec.hbar());
    let (values, stderr) = covariance_with_bootstrap(&ens.values, m, scale, opts.seed, opts.bootstrap);
    let mut meta = metadata(model, lambda, None, t, opts, &ens);
    meta.runtime_ms = elapsed_ms(start);
    Ok(Qfim {
        values,
        stderr: Some(stderr),
        method: Method::SemiclassicalMc,
        metadata: meta,
    })
}

/// One route's outcome in a [`CompareReport`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RouteOutcome {
    pub method: Method,
    pub value: Option<f64>,
    pub stderr: Option<f64>,
    pub error: Option<String>,
    pub runtime_ms: f64,
}

impl RouteOutcome {
    fn from_result(method: Method, r: Result<QfiEstimate>) -> Self {
        match r {
            Ok(e) => RouteOutcome {
                method,
                value: Some(e.value),
                stderr: e.stderr,
                error: None,
                runtime_ms: e.metadata.runtime_ms,
            },
            Err(e) => RouteOutcome {
                method,
                value: None,
                stderr: None,
                error: Some(e.to_string()),
                runtime_ms: 0.0,
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Discrepancy {
    pub a: Method,
    pub b: Method,
    pub abs: f64,
    /// `|a − b| / max(|a|, |b|)`; zero when both vanish.
    pub rel: f64,
    /// `|a − b|` in units of the combined standard error, when either side has one.
    pub sigmas: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub model: String,
    pub lambda: Vec<f64>,
    pub param: usize,
    pub t: f64,
    pub routes: Vec<RouteOutcome>,
    pub discrepancies: Vec<Discrepancy>,
}

impl CompareReport {
    pub fn route(&self, method: Method) -> Option<&RouteOutcome> {
        self.routes.iter().find(|r| r.method == method)
    }

    pub fn discrepancy(&self, a: Method, b: Method) -> Option<&Discrepancy> {
        self.discrepancies
            .iter()
            .find(|d| (d.a == a && d.b == b) || (d.a == b && d.b == a))
    }
}

/// Runs both exact operator routes, the correlator route and the semiclassical
/// route on one configuration and tabulates pairwise discrepancies.
pub fn compare_routes(spec: &ModelSpec, state: &StateKind, t: f64, param: usize, opts: &ScOptions) -> Result<CompareReport> {
    let family = build_quantum(spec)?;
    family.check_param(param)?;
    let psi = initial_state(spec, state)?.state;
    let lambda = spec.parameters();
    let cfg = QuadratureConfig::default();
    let mut routes = vec![
        RouteOutcome::from_result(
            Method::GeneratorVariance,
            duhamel_generator(&family, &lambda, t, param, &cfg).and_then(|g| qfi_generator_variance(&psi, &g)),
        ),
        RouteOutcome::from_result(Method::OverlapFd, qfi_overlap_fd(&family, &psi, &lambda, t, param, None)),
        RouteOutcome::from_result(Method::CorrelatorIntegral, qfi_correlator_integral(&family, &psi, &lambda, t, param)),
    ];
    let sc = if spec.has_classical() {
        build_classical(spec).and_then(|model| {
            let gspec = gaussian_for(spec, state)?;
            estimate_qfi_sc(&model, &gspec, &lambda, t, param, opts)
        })
    } else {
        Err(QfiError::UnsupportedModel(format!("{} has no classical counterpart", spec.id())))
    };
    routes.push(RouteOutcome::from_result(Method::SemiclassicalMc, sc));
    let mut discrepancies = Vec::new();
    for (i, a) in routes.iter().enumerate() {
        for b in &routes[i + 1..] {
            let (Some(va), Some(vb)) = (a.value, b.value) else {
                continue;
            };
            let abs = (va - vb).abs();
            let top = va.abs().max(vb.abs());
            let se = a.stderr.unwrap_or(0.0).hypot(b.stderr.unwrap_or(0.0));
            discrepancies.push(Discrepancy {
                a: a.method,
                b: b.method,
                abs,
                rel: if top > 0.0 { abs / top } else { 0.0 },
                sigmas: (se > 0.0).then(|| abs / se),
            });
        }
    }
    Ok(CompareReport {
        model: spec.id().to_string(),
        lambda,
        param,
        t,
        routes,
        discrepancies,
    })
}
