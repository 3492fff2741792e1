//! Joint estimation of frequency and force: exact and semiclassical QFIM.

use qfi::exact::{qfim, QuadratureConfig};
use qfi::models::{build_classical, build_quantum, initial_state, ModelSpec, StateKind};
use qfi::semiclassical::{estimate_qfim_sc, ScOptions};
use qfi::wigner::gaussian_for;

fn main() -> qfi::Result<()> {
    let spec = ModelSpec::harmonic(1.0, 0.2);
    let kind = StateKind::Coherent { re: 1.0, im: 0.5 };
    let lambda = spec.parameters();
    let t = 2.0;

    let exact = qfim(&build_quantum(&spec)?, &initial_state(&spec, &kind)?.state, &lambda, t, &QuadratureConfig::default())?;
    let sc = estimate_qfim_sc(&build_classical(&spec)?, &gaussian_for(&spec, &kind)?, &lambda, t, &ScOptions::new(20_000, 7))?;
    let se = sc.stderr.clone().unwrap();

    let labels = spec.parameter_labels();
    for i in 0..2 {
        for j in i..2 {
            println!(
                "F[{},{}]  exact {:>10.4}   semiclassical {:>10.4} ± {:.4}",
                labels[i],
                labels[j],
                exact.entry(i, j),
                sc.entry(i, j),
                se[(i, j)]
            );
        }
    }
    let eig = exact.values.clone().symmetric_eigenvalues();
    println!("exact eigenvalues: {:.4} {:.4}", eig[0], eig[1]);
    Ok(())
}
