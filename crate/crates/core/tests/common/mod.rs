#![allow(dead_code)]

use qfi::models::ClassicalModel;

/// `V = 0`, with a single parameter that never enters.
pub struct Free;

impl ClassicalModel for Free {
    fn id(&self) -> &str {
        "free"
    }
    fn dof(&self) -> usize {
        1
    }
    fn n_params(&self) -> usize {
        1
    }
    fn mass(&self) -> f64 {
        1.0
    }
    fn omega_ref(&self) -> f64 {
        0.0
    }
    fn potential(&self, _: &[f64], _: &[f64], _: f64) -> f64 {
        0.0
    }
    fn grad_potential(&self, _: &[f64], _: &[f64], _: f64, out: &mut [f64]) {
        out[0] = 0.0;
    }
    fn dlambda_potential(&self, _: &[f64], _: &[f64], _: f64, out: &mut [f64]) {
        out[0] = 0.0;
    }
}

/// Harmonic oscillator whose only parameter never enters the dynamics.
pub struct Inert;

impl ClassicalModel for Inert {
    fn id(&self) -> &str {
        "inert"
    }
    fn dof(&self) -> usize {
        1
    }
    fn n_params(&self) -> usize {
        1
    }
    fn mass(&self) -> f64 {
        1.0
    }
    fn omega_ref(&self) -> f64 {
        1.0
    }
    fn potential(&self, q: &[f64], _: &[f64], _: f64) -> f64 {
        0.5 * q[0] * q[0]
    }
    fn grad_potential(&self, q: &[f64], _: &[f64], _: f64, out: &mut [f64]) {
        out[0] = q[0];
    }
    fn dlambda_potential(&self, _: &[f64], _: &[f64], _: f64, out: &mut [f64]) {
        out[0] = 0.0;
    }
}

/// Two uncoupled unit oscillators, each pushed by its own force.
pub struct TwoForces;

impl ClassicalModel for TwoForces {
    fn id(&self) -> &str {
        "two_forces"
    }
    fn dof(&self) -> usize {
        2
    }
    fn n_params(&self) -> usize {
        2
    }
    fn mass(&self) -> f64 {
        1.0
    }
    fn omega_ref(&self) -> f64 {
        1.0
    }
    fn potential(&self, q: &[f64], l: &[f64], _: f64) -> f64 {
        0.5 * (q[0] * q[0] + q[1] * q[1]) - l[0] * q[0] - l[1] * q[1]
    }
    fn grad_potential(&self, q: &[f64], l: &[f64], _: f64, out: &mut [f64]) {
        out[0] = q[0] - l[0];
        out[1] = q[1] - l[1];
    }
    fn dlambda_potential(&self, q: &[f64], _: &[f64], _: f64, out: &mut [f64]) {
        out[0] = -q[0];
        out[1] = -q[1];
    }
}

/// `V = −q⁴`: trajectories starting far enough out blow up in finite time.
pub struct Runaway;

impl ClassicalModel for Runaway {
    fn id(&self) -> &str {
        "runaway"
    }
    fn dof(&self) -> usize {
        1
    }
    fn n_params(&self) -> usize {
        1
    }
    fn mass(&self) -> f64 {
        1.0
    }
    fn omega_ref(&self) -> f64 {
        1.0
    }
    fn potential(&self, q: &[f64], l: &[f64], _: f64) -> f64 {
        -l[0] * q[0].powi(4)
    }
    fn grad_potential(&self, q: &[f64], l: &[f64], _: f64, out: &mut [f64]) {
        out[0] = -4.0 * l[0] * q[0].powi(3);
    }
    fn dlambda_potential(&self, q: &[f64], _: &[f64], _: f64, out: &mut [f64]) {
        out[0] = -q[0].powi(4);
    }
}
