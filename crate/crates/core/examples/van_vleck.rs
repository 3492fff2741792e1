//! Boundary-value shooting and the Van Vleck factor for a harmonic oscillator,
//! where |∂p_i/∂q_f| = mω/|sin ωt| and the fold at ωt = π is a caustic.

use qfi::classical::{shoot_bvp_1d, van_vleck_determinant_1d, ShootOptions, StepperConfig};
use qfi::models::{build_classical, ModelSpec};

fn main() -> qfi::Result<()> {
    let spec = ModelSpec::harmonic(1.0, 0.0);
    let model = build_classical(&spec)?;
    let lambda = spec.parameters();
    let opts = ShootOptions::default();
    let (q_i, q_f) = (0.3, -0.5);

    for t in [0.5, 1.0, 2.0, 2.8] {
        let cfg = StepperConfig::new(t / 20_000.0);
        let shot = shoot_bvp_1d(&model, q_i, q_f, &lambda, t, &cfg, &opts)?;
        let vv = van_vleck_determinant_1d(&model, q_i, q_f, &lambda, t, &cfg, &opts)?;
        let p_exact = (q_f - q_i * t.cos()) / t.sin();
        println!(
            "t = {t:.2}: p_i {:.8} (closed form {p_exact:.8}), |dp_i/dq_f| {vv:.8} (closed form {:.8})",
            shot.p_initial,
            1.0 / t.sin().abs()
        );
    }
    let t = std::f64::consts::PI;
    match shoot_bvp_1d(&model, q_i, q_f, &lambda, t, &StepperConfig::new(t / 20_000.0), &opts) {
        Ok(r) => println!("t = π: unexpectedly found p_i = {}", r.p_initial),
        Err(e) => println!("t = π: {e}"),
    }
    Ok(())
}
