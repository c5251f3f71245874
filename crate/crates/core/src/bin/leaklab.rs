use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use leaklab::experiments::{
    run_analytic, run_empirical, run_figure2, run_verify, ExperimentSpec, Mode, Mutation, Settings,
};
use leaklab::LeakError;

#[derive(Parser)]
#[command(name = "leaklab", version, about = "Timing side-channel leakage of shared schedulers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Analytic leakage-ratio curves for every scheduler (plot-ready CSV)
    Figure2(Common),
    /// Run the verification suite; exits nonzero if any check fails
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum, default_value = "text")]
        format: ReportFormat,
        #[arg(long, hide = true)]
        mutate: Option<String>,
    },
    /// Simulation-based leakage estimates with confidence intervals
    Empirical(Common),
    /// Analytic leakage values for selected schedulers
    Analytic(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum ReportFormat {
    Text,
    Json,
}

#[derive(Args, Default)]
struct Common {
    /// `start:stop:step` or a comma-separated list of rates
    #[arg(long)]
    lambda_grid: Option<String>,
    /// Comma-separated: lqf, fcfs, rr, wctdma, detwc
    #[arg(long)]
    scheduler: Option<String>,
    /// nonstop, odd, silent, periodic or periodic:<omega>
    #[arg(long)]
    attacker: Option<String>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    horizon: Option<u64>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file (stdout when absent)
    #[arg(long)]
    out: Option<PathBuf>,
    /// key=value file; command-line flags take precedence
    #[arg(long)]
    config: Option<PathBuf>,
}

impl Common {
    fn spec(&self, mode: Mode) -> Result<ExperimentSpec, LeakError> {
        let file = match &self.config {
            Some(p) => Settings::from_file(p)?,
            None => Settings::default(),
        };
        let cli = Settings {
            lambda_grid: self.lambda_grid.clone(),
            scheduler: self.scheduler.clone(),
            attacker: self.attacker.clone(),
            omega: self.omega.map(|o| o.to_string()),
            horizon: self.horizon.map(|h| h.to_string()),
            trials: self.trials.map(|t| t.to_string()),
            seed: self.seed.map(|s| s.to_string()),
            out: self.out.as_ref().map(|p| p.display().to_string()),
        };
        ExperimentSpec::resolve(mode, cli, file)
    }
}

fn emit(spec: &ExperimentSpec, text: &str) -> Result<(), LeakError> {
    match &spec.out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool, LeakError> {
    match cli.command {
        Command::Figure2(c) => {
            let spec = c.spec(Mode::Figure2)?;
            emit(&spec, &run_figure2(&spec)?)?;
        }
        Command::Analytic(c) => {
            let spec = c.spec(Mode::Analytic)?;
            emit(&spec, &run_analytic(&spec)?)?;
        }
        Command::Empirical(c) => {
            let spec = c.spec(Mode::Empirical)?;
            emit(&spec, &run_empirical(&spec)?)?;
        }
        Command::Verify { common, format, mutate } => {
            let spec = common.spec(Mode::Verify)?;
            let mutation = mutate
                .map(|m| Mutation::parse(&m).ok_or_else(|| LeakError::Config(format!("unknown mutation {m:?}"))))
                .transpose()?;
            let report = run_verify(&spec, mutation)?;
            let text = match format {
                ReportFormat::Text => report.to_text(),
                ReportFormat::Json => report.to_json() + "\n",
            };
            emit(&spec, &text)?;
            return Ok(report.passed());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
