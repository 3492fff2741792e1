//! Driving the runner from a JSON config: one run, a time sweep to CSV and a
//! route comparison.

use qfi::config::RunConfig;
use qfi::runner;

const CONFIG: &str = r#"{
  "model": { "id": "harmonic", "omega": 1.0, "force": 0.0 },
  "state": { "kind": "coherent", "re": 1.0 },
  "parameters": { "target": "omega" },
  "evolution": { "t": 1.0 },
  "method": { "route": "semiclassical_mc", "n_samples": 5000, "seed": 42 }
}"#;

fn main() -> Result<(), runner::RunError> {
    let mut cfg = RunConfig::from_json(CONFIG)?;
    println!("{}", runner::run(&cfg)?.to_line());

    cfg.evolution.t = None;
    cfg.evolution.t_grid = Some(vec![0.5, 1.0, 2.0]);
    runner::sweep(&cfg)?.write_csv(std::io::stdout())?;

    cfg.evolution.t = Some(1.0);
    cfg.evolution.t_grid = None;
    let report = runner::compare(&cfg)?;
    for r in &report.routes {
        println!("{:<22} {:?} ± {:?}", r.method.as_str(), r.value, r.stderr);
    }
    for d in &report.discrepancies {
        println!("{} vs {}: rel {:.2e}", d.a.as_str(), d.b.as_str(), d.rel);
    }
    Ok(())
}
