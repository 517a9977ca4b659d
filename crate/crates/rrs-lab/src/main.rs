//! Thin command-line front end over the library. All the work happens in
//! `rrs_lab::verify`; this binary parses flags, wires the thread pool, and
//! maps errors to exit codes (0 = pass, 1 = failure, 2 = usage or config).

use clap::{Parser, Subcommand};
use rrs_lab::config::Convention;
use rrs_lab::error::Error;
use rrs_lab::observable::Observable;
use rrs_lab::verify::{evolve_csv, run_verification, scatter_json, RunConfig};
use std::path::{Path, PathBuf};
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "rrs-lab",
    version,
    about = "Verification laboratory for the rational Ruijsenaars-Schneider model"
)]
struct Cli {
    /// Flat JSON run configuration; defaults apply when absent.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Seed override for the sampling generator.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads for the suites (0 = one per core).
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Output file; stdout when absent. Files are written atomically.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Momentum convention override.
    #[arg(long, global = true, value_parser = ["half", "literal"])]
    convention: Option<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every verification suite and emit the JSON report.
    Verify,
    /// Calibrate the bracket scale kappa and emit the result.
    Calibrate,
    /// Integrate the flow of an observable and emit the trajectory as CSV.
    Evolve {
        /// Registry id of the flow generator, e.g. I(1), I(2), H, P.
        #[arg(long, default_value = "H")]
        observable: String,
        /// Horizon; defaults to the config's t_end or 50.
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Run a long principal-Hamiltonian flow and emit the scattering record.
    Scatter {
        /// Horizon; defaults to the config's t_end or 200.
        #[arg(long)]
        t_end: Option<f64>,
    },
}

fn main() {
    std::process::exit(run());
}

fn run() -> i32 {
    let cli = Cli::parse();
    let rc = match load_config(&cli) {
        Ok(rc) => rc,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if rc.jobs > 0 {
        // ignore AlreadyInitialized; harmless if the pool exists
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(rc.jobs)
            .build_global();
    }
    match dispatch(&cli, &rc) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    }
}

fn load_config(cli: &Cli) -> Result<RunConfig, Error> {
    let mut rc = match &cli.config {
        Some(path) => RunConfig::from_json(&std::fs::read_to_string(path)?)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        rc.seed = seed;
    }
    if let Some(jobs) = cli.jobs {
        rc.jobs = jobs;
    }
    if let Some(conv) = &cli.convention {
        rc.convention = conv.parse::<Convention>()?;
    }
    // surface config invariant violations (chi = 0, n out of range) early
    rc.model_config()?;
    Ok(rc)
}

fn dispatch(cli: &Cli, rc: &RunConfig) -> Result<i32, Error> {
    match &cli.command {
        Command::Verify => {
            let started = Instant::now();
            let report = run_verification(rc)?;
            emit(cli.out.as_deref(), &report.to_json_string())?;
            eprintln!(
                "verification {} in {:.2}s ({} suites, {} findings)",
                if report.overall_pass { "passed" } else { "FAILED" },
                started.elapsed().as_secs_f64(),
                report.suites.len(),
                report.findings.len(),
            );
            for finding in &report.findings {
                eprintln!("finding: {finding}");
            }
            Ok(if report.overall_pass { 0 } else { 1 })
        }
        Command::Calibrate => {
            use rrs_lab::report::Json;
            let cfg = rc.model_config()?;
            let calibration = rrs_lab::poisson::calibrate_kappa(
                &cfg,
                &rc.index_range(),
                rc.samples.max(10),
                &mut rc.rng(),
            )?;
            let expected = match cfg.convention {
                Convention::Half => 1.0,
                Convention::Literal => 2.0,
            };
            let ok =
                calibration.consistent && (calibration.kappa - expected).abs() < cfg.tol.rel_tol;
            let text = Json::obj(vec![
                ("kappa", Json::Float(calibration.kappa)),
                ("fit_residual", Json::Float(calibration.fit_residual)),
                ("expected", Json::Float(expected)),
                ("rows", Json::UInt(calibration.rows as u64)),
                ("samples", Json::UInt(calibration.samples as u64)),
                ("consistent", Json::Bool(calibration.consistent)),
                ("convention", Json::Str(cfg.convention.name().to_string())),
                ("seed", Json::UInt(rc.seed)),
            ])
            .to_string_canonical();
            emit(cli.out.as_deref(), &text)?;
            Ok(if ok { 0 } else { 1 })
        }
        Command::Evolve { observable, t_end } => {
            let obs = Observable::parse(observable)?;
            let horizon = t_end.or(rc.t_end).unwrap_or(50.0);
            let csv = evolve_csv(rc, &obs, horizon)?;
            emit(cli.out.as_deref(), &csv)?;
            Ok(0)
        }
        Command::Scatter { t_end } => {
            let horizon = t_end.or(rc.t_end).unwrap_or(200.0);
            let json = scatter_json(rc, horizon)?;
            emit(cli.out.as_deref(), &json)?;
            Ok(0)
        }
    }
}

/// Print to stdout, or write the file atomically (temp file + rename).
fn emit(out: Option<&Path>, content: &str) -> Result<(), Error> {
    match out {
        None => {
            print!("{content}");
            Ok(())
        }
        Some(path) => {
            let name = path.file_name().unwrap_or_default().to_string_lossy();
            let tmp = match path.parent().filter(|p| !p.as_os_str().is_empty()) {
                Some(d) => d.join(format!(".{name}.tmp")),
                None => PathBuf::from(format!(".{name}.tmp")),
            };
            std::fs::write(&tmp, content)?;
            std::fs::rename(&tmp, path)?;
            Ok(())
        }
    }
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::ZeroCoupling
        | Error::InvalidParticleCount(_)
        | Error::NonPositiveParameter { .. }
        | Error::DimensionMismatch { .. }
        | Error::UnknownObservable(_)
        | Error::InvalidFlowGenerator(_)
        | Error::Config(_)
        | Error::Json(_)
        | Error::Io(_) => 2,
        _ => 1,
    }
}
