//! Amplitude sensing for a periodically driven oscillator, a time-dependent
//! Hamiltonian, by the exact, correlator and semiclassical routes.

use qfi::correlator::qfi_correlator_integral;
use qfi::exact::{duhamel_generator, qfi_generator_variance, QuadratureConfig};
use qfi::models::{build_classical, build_quantum, initial_state, ModelSpec, StateKind};
use qfi::semiclassical::{estimate_qfi_sc, ScOptions};
use qfi::wigner::gaussian_for;

fn main() -> qfi::Result<()> {
    let spec = ModelSpec::driven(1.0, 0.5, 1.3);
    let kind = StateKind::Coherent { re: 0.5, im: 0.0 };
    let lambda = spec.parameters();
    let family = build_quantum(&spec)?;
    let model = build_classical(&spec)?;
    let psi = initial_state(&spec, &kind)?.state;
    let wigner = gaussian_for(&spec, &kind)?;

    println!("{:>5} {:>12} {:>12} {:>20}", "t", "variance", "correlator", "semiclassical");
    for t in [1.0, 2.5, 4.0] {
        let g = duhamel_generator(&family, &lambda, t, 0, &QuadratureConfig::default())?;
        let var = qfi_generator_variance(&psi, &g)?.value;
        let corr = qfi_correlator_integral(&family, &psi, &lambda, t, 0)?.value;
        let sc = estimate_qfi_sc(&model, &wigner, &lambda, t, 0, &ScOptions::new(10_000, 2))?;
        println!("{t:>5.1} {var:>12.6} {corr:>12.6} {:>12.6}±{:.4}", sc.value, sc.stderr.unwrap_or(0.0));
    }
    Ok(())
}
