use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qfi::config::{ConfigError, RunConfig};
use qfi::models::ModelSpec;
use qfi::runner::{self, RunError};
use qfi::verify::{self, Mutation, VerifyOptions};

#[derive(Parser)]
#[command(name = "qfi", version, about = "Dynamical quantum Fisher information by exact, Keldysh and semiclassical routes")]
struct Cli {
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Results file; overrides `output.path`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Overrides `method.seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one route at one time and append a JSON-lines record.
    Run,
    /// Evaluate a λ × t × seed grid and write CSV.
    Sweep,
    /// Run every applicable route at one point and report discrepancies.
    Compare,
    /// Run the acceptance criteria.
    Verify {
        /// Inject a deliberate defect.
        #[arg(long, value_enum)]
        mutation: Option<MutationArg>,
        /// Criterion ids to run, comma separated.
        #[arg(long, value_delimiter = ',')]
        only: Vec<u8>,
    },
    /// List the model catalog.
    Models,
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum MutationArg {
    FlipOmegaLagrangian,
}

fn load(cli: &Cli) -> Result<RunConfig, RunError> {
    let path = cli.config.as_deref().ok_or_else(|| ConfigError {
        path: "--config".into(),
        line: None,
        message: "this subcommand needs a config file".into(),
    })?;
    let mut cfg = RunConfig::read_path(path)?;
    if cli.seed.is_some() {
        cfg.method.seed = cli.seed;
    }
    if cli.out.is_some() {
        cfg.output.path = cli.out.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn execute(cli: &Cli) -> Result<ExitCode, RunError> {
    match &cli.command {
        Command::Run => {
            let cfg = load(cli)?;
            let record = runner::run(&cfg)?;
            if !cli.quiet {
                for w in &record.warnings {
                    eprintln!("warning: {w}");
                }
            }
            runner::persist(&record, cfg.output.path.as_deref())?;
        }
        Command::Sweep => {
            let cfg = load(cli)?;
            let table = runner::sweep(&cfg)?;
            match &cfg.output.path {
                Some(p) => table.write_csv(std::fs::File::create(p)?)?,
                None => table.write_csv(std::io::stdout().lock())?,
            }
            if table.all_failed() {
                return Err(RunError::AllFailed(table.rows.len()));
            }
            if !cli.quiet {
                let failed = table.rows.iter().filter(|r| r.error.is_some()).count();
                if failed > 0 {
                    eprintln!("{failed} of {} points failed", table.rows.len());
                }
            }
        }
        Command::Compare => {
            let cfg = load(cli)?;
            let report = runner::compare(&cfg)?;
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            match &cfg.output.path {
                Some(p) => std::fs::write(p, text + "\n")?,
                None => println!("{text}"),
            }
        }
        Command::Verify { mutation, only } => {
            let opts = VerifyOptions {
                mutation: mutation.map(|MutationArg::FlipOmegaLagrangian| Mutation::FlipOmegaLagrangian),
                only: only.clone(),
            };
            let report = verify::run_all(&opts);
            if !cli.quiet {
                print!("{}", report.table());
            }
            if let Some(p) = &cli.out {
                std::fs::write(p, serde_json::to_string_pretty(&report).expect("report serializes") + "\n")?;
            }
            if !report.all_passed() {
                return Ok(ExitCode::from(1));
            }
        }
        Command::Models => {
            for spec in ModelSpec::catalog() {
                let kind = if spec.has_classical() { "quantum+classical" } else { "quantum" };
                println!("{:<18} {:<18} {}", spec.id(), kind, spec.parameter_labels().join(","));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size the worker pool: {e}");
            return ExitCode::from(2);
        }
    }
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
