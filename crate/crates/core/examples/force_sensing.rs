//! Force sensing with an oscillator in its ground state.
//!
//! The force generator is linear in (q, p), so the semiclassical estimate is
//! exact up to sampling noise and both agree with 4(1 − cos t).

use qfi::exact::{duhamel_generator, qfi_generator_variance, QuadratureConfig};
use qfi::models::{build_classical, build_quantum, initial_state, ModelSpec, StateKind};
use qfi::semiclassical::{estimate_qfi_sc, ScOptions};
use qfi::wigner::gaussian_for;

fn main() -> qfi::Result<()> {
    let spec = ModelSpec::harmonic(1.0, 0.0);
    let force = spec.parameter_index("force").unwrap();
    let family = build_quantum(&spec)?;
    let model = build_classical(&spec)?;
    let psi = initial_state(&spec, &StateKind::Ground)?.state;
    let wigner = gaussian_for(&spec, &StateKind::Ground)?;
    let lambda = spec.parameters();

    println!("{:>6} {:>12} {:>20} {:>12}", "t", "exact", "semiclassical", "4(1-cos t)");
    for t in [0.5, 1.0, 2.0, std::f64::consts::PI, 5.0] {
        let g = duhamel_generator(&family, &lambda, t, force, &QuadratureConfig::default())?;
        let exact = qfi_generator_variance(&psi, &g)?.value;
        let sc = estimate_qfi_sc(&model, &wigner, &lambda, t, force, &ScOptions::new(20_000, 11))?;
        println!(
            "{t:>6.3} {exact:>12.6} {:>12.6}±{:<7.4} {:>12.6}",
            sc.value,
            sc.stderr.unwrap_or(0.0),
            4.0 * (1.0 - t.cos())
        );
    }
    Ok(())
}
