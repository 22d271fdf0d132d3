use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ebdevs_harness::config::{ExperimentConfig, TraceMode};
use ebdevs_harness::gallery::{ModelSpec, MODELS};
use ebdevs_harness::verify::{check_horizon, transform_report, verify_equivalence, TransformKind};
use ebdevs_harness::{HarnessError, Result};

#[derive(Parser)]
#[command(name = "ebdevs", version, about = "Run and check the ebdevs case-study models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run replications and write per-replication and summary CSVs.
    Run {
        #[arg(long)]
        model: Option<String>,
        /// JSON experiment config; flags override its values.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<u32>,
        #[arg(long)]
        horizon: Option<f64>,
        /// Output directory (default: $EBDEVS_OUT, then ./out).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Sampling interval of the output series.
        #[arg(long)]
        dt: Option<f64>,
        #[arg(long, value_enum)]
        trace: Option<TraceMode>,
    },
    /// Flatten or lower a reduced-size gallery model and run the result.
    Transform {
        #[arg(value_enum)]
        kind: TransformKind,
        #[arg(long)]
        model: String,
        /// Agents (SIR), birds (boids) or expected active mitochondria (mito).
        #[arg(long, default_value_t = 10)]
        size: usize,
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Check that flattening and lowering preserve behavior.
    Verify {
        #[command(subcommand)]
        what: Verify,
    },
    /// List the gallery models.
    ListModels,
}

#[derive(Subcommand)]
enum Verify {
    Equivalence {
        #[arg(long)]
        model: String,
        #[arg(long, default_value_t = 10)]
        size: usize,
        #[arg(long, value_delimiter = ',', default_value = "1,2,3,4,5")]
        seeds: Vec<u64>,
        #[arg(long)]
        horizon: Option<f64>,
    },
}

fn run(command: Command) -> Result<()> {
    match command {
        Command::Run { model, config, seed, reps, horizon, out, dt, trace } => {
            let mut c = match &config {
                Some(path) => ExperimentConfig::load(path)?,
                None => ExperimentConfig::default(),
            };
            c.model = model.or(c.model);
            c.seed = seed.or(c.seed);
            c.replications = reps.or(c.replications);
            c.horizon = horizon.or(c.horizon);
            c.out = out.or(c.out);
            c.sample_dt = dt.or(c.sample_dt);
            c.trace = trace.or(c.trace);
            let exp = c.resolve()?;
            let report = exp.run_to_disk()?;
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            for (stream, error) in &report.failures {
                eprintln!("replication {stream} aborted: {error}");
            }
            if !report.failures.is_empty() {
                return Err(HarnessError::Aborted { failed: report.failures.len(), total: exp.replications as usize });
            }
            Ok(())
        }
        Command::Transform { kind, model, size, horizon } => {
            let spec = ModelSpec::named(&model)?.reduced(size)?;
            let horizon = horizon.unwrap_or_else(|| check_horizon(&spec));
            println!("{}", transform_report(&spec, kind, horizon)?);
            Ok(())
        }
        Command::Verify { what: Verify::Equivalence { model, size, seeds, horizon } } => {
            let spec = ModelSpec::named(&model)?.reduced(size)?;
            let horizon = horizon.unwrap_or_else(|| check_horizon(&spec));
            let checks = verify_equivalence(&spec, &seeds, horizon)?;
            let mut failed = Vec::new();
            for c in &checks {
                let verdict = |ok: bool| if ok { "equivalent" } else { "DIFFERENT" };
                println!(
                    "seed {}: {} observations, flatten {}, lower {}",
                    c.seed,
                    c.observations,
                    verdict(c.flatten.equivalent),
                    verdict(c.lower.equivalent)
                );
                for d in [&c.flatten.divergence, &c.lower.divergence].into_iter().flatten() {
                    println!("  first divergence at observation {}: {}", d.index, d.reason);
                }
                if !c.passed() {
                    failed.push(c.seed.to_string());
                }
            }
            if failed.is_empty() {
                Ok(())
            } else {
                Err(HarnessError::Verification(format!("{model} differs for seeds {}", failed.join(","))))
            }
        }
        Command::ListModels => {
            for (name, about) in MODELS {
                println!("{name:10} {about}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
