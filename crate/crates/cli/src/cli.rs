use crate::commands::{batch, certify, repro_figure1, solve, to_json, verify, FIGURE_ITERS};
use crate::config::{ExperimentConfig, NormChoice, ProblemSource};
use crate::error::{exit, CliError};
use crate::trace_io::write_file;
use altmin::engine::DEFAULT_INNER_TOL;
use clap::{Args, Parser, Subcommand};
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

#[derive(Debug, Parser)]
#[command(
    name = "am-certify",
    version,
    about = "Solve two-block problems by alternating minimization and certify their convergence"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run alternating minimization and write the objective trace.
    Solve(CommonArgs),
    /// Report convexity constants and the applicable rate or bound.
    Certify(CommonArgs),
    /// Check a fresh trace against its theoretical bound and descent lemma.
    Verify(VerifyArgs),
    /// Reproduce the convergence plot of the built-in 3+2 example.
    #[command(name = "repro-figure1")]
    ReproFigure1(ReproArgs),
    /// Run `verify` over consecutive seeds, optionally in parallel.
    Batch(BatchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Built-in name or path to a JSON problem file.
    #[arg(long, default_value = "paper-example")]
    pub problem: String,
    #[arg(long, value_enum, default_value_t = NormChoice::L2)]
    pub norm: NormChoice,
    /// Number of general steps after the initialization.
    #[arg(long, default_value_t = 100)]
    pub iters: usize,
    /// Stop early once a full step decreases H by at most this much.
    #[arg(long)]
    pub gap_tol: Option<f64>,
    #[arg(long, default_value_t = DEFAULT_INNER_TOL)]
    pub inner_tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Trace output; `.json` selects JSON, anything else CSV.
    #[arg(long)]
    pub out_trace: Option<PathBuf>,
    #[arg(long)]
    pub out_report: Option<PathBuf>,
    /// Estimate H* by a long reference run when no closed form exists.
    #[arg(long)]
    pub reference_solve: bool,
}

#[derive(Debug, Clone, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Check against this linear rate instead of the theoretical one.
    #[arg(long)]
    pub rate_override: Option<f64>,
}

#[derive(Debug, Clone, Args)]
pub struct ReproArgs {
    #[arg(long, default_value_t = FIGURE_ITERS)]
    pub iters: usize,
    /// CSV with columns `j,gap,reference`.
    #[arg(long)]
    pub out_trace: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BatchArgs {
    #[command(flatten)]
    pub verify: VerifyArgs,
    /// Number of consecutive seeds, starting at `--seed`.
    #[arg(long, default_value_t = 8)]
    pub count: u64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[arg(long)]
    pub out_dir: PathBuf,
}

impl CommonArgs {
    pub fn config(&self) -> Result<ExperimentConfig, CliError> {
        let config = ExperimentConfig {
            problem_source: ProblemSource::parse(&self.problem)?,
            norm_choice: self.norm,
            max_iters: self.iters,
            gap_tol: self.gap_tol,
            inner_tol: self.inner_tol,
            rng_seed: self.seed,
            out_trace: self.out_trace.clone(),
            out_report: self.out_report.clone(),
            rate_override: None,
            reference_solve: self.reference_solve,
        };
        config.validate()?;
        Ok(config)
    }
}

impl VerifyArgs {
    pub fn config(&self) -> Result<ExperimentConfig, CliError> {
        let config = ExperimentConfig {
            rate_override: self.rate_override,
            ..self.common.config()?
        };
        config.validate()?;
        Ok(config)
    }
}

fn emit(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(p) => write_file(p, text),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())
                .and_then(|_| out.flush())
                .map_err(|e| CliError::io("<stdout>", e))
        }
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Solve(args) => {
            let config = args.config()?;
            let out = solve(&config)?;
            match &config.out_trace {
                Some(p) => out.table.write(p)?,
                None => emit(None, &out.table.to_csv())?,
            }
            let summary = to_json(&out.summary);
            match (&config.out_report, &config.out_trace) {
                (Some(p), _) => write_file(p, &summary)?,
                (None, Some(_)) => emit(None, &summary)?,
                (None, None) => log::info!("summary: {summary}"),
            }
        }
        Command::Certify(args) => {
            let config = args.config()?;
            let report = certify(&config)?;
            emit(config.out_report.as_deref(), &to_json(&report))?;
        }
        Command::Verify(args) => {
            let config = args.config()?;
            let out = verify(&config)?;
            if let Some(p) = &config.out_trace {
                out.table.write(p)?;
            }
            emit(config.out_report.as_deref(), &to_json(&out.report))?;
            if !out.report.passed() {
                return Err(CliError::DominationFailure(out.report.failure_summary()));
            }
        }
        Command::ReproFigure1(args) => {
            let fig = repro_figure1(args.iters)?;
            emit(None, &fig.table())?;
            if let Some(p) = &args.out_trace {
                write_file(p, &fig.to_csv())?;
            }
            if !fig.passed() {
                eprint!("{}", fig.anchor_table());
                return Err(CliError::AnchorMismatch);
            }
        }
        Command::Batch(args) => {
            let config = args.verify.config()?;
            let entries = batch(&config, args.count, args.jobs, &args.out_dir)?;
            emit(config.out_report.as_deref(), &to_json(&entries))?;
            let failed: Vec<String> = entries
                .iter()
                .filter(|e| !e.passed)
                .map(|e| e.seed.to_string())
                .collect();
            if !failed.is_empty() {
                return Err(CliError::DominationFailure(format!(
                    "failing seeds: {}",
                    failed.join(", ")
                )));
            }
        }
    }
    Ok(())
}

fn init_logging() {
    let env = env_logger::Env::new().filter_or("AM_CERTIFY_LOG", "error");
    // a second call (tests driving `main_with_args` repeatedly) is harmless
    let _ = env_logger::Builder::from_env(env)
        .format_timestamp(None)
        .try_init();
}

/// Parses arguments, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    init_logging();
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { exit::USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
