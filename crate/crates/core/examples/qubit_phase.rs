//! Phase imprinting on a qubit in |+⟩: every route should give F = t².

use qfi::correlator::{qfi_correlator_integral, qfi_from_lnz, TimeGrid};
use qfi::exact::{duhamel_generator, qfi_generator_variance, qfi_overlap_fd, QuadratureConfig};
use qfi::models::{build_quantum, initial_state, ModelSpec, StateKind};

fn main() -> qfi::Result<()> {
    let spec = ModelSpec::qubit_phase();
    let family = build_quantum(&spec)?;
    let plus = StateKind::Bloch { theta: std::f64::consts::FRAC_PI_2, phi: 0.0 };
    let psi = initial_state(&spec, &plus)?.state;
    let lambda = spec.parameters();
    let o = family.deformation(&lambda, 0.0, 0)?;

    println!("{:>5} {:>12} {:>12} {:>12} {:>12} {:>8}", "t", "variance", "overlap", "correlator", "ln Z", "t^2");
    for t in [0.5, 1.0, 2.0, 3.0] {
        let g = duhamel_generator(&family, &lambda, t, 0, &QuadratureConfig::default())?;
        let var = qfi_generator_variance(&psi, &g)?.value;
        let fd = qfi_overlap_fd(&family, &psi, &lambda, t, 0, None)?.value;
        let corr = qfi_correlator_integral(&family, &psi, &lambda, t, 0)?.value;
        let lnz = qfi_from_lnz(&family, &psi, &lambda, TimeGrid::new(t, 32)?, &o)?.value;
        println!("{t:>5.2} {var:>12.8} {fd:>12.8} {corr:>12.8} {lnz:>12.8} {:>8.4}", t * t);
    }
    Ok(())
}
