use std::path::{Path, PathBuf};
use std::process::ExitCode;

use bergtrace_cli::report::Format;
use bergtrace_cli::{run, selftest, CliError, Experiment, ExperimentConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "bergtrace", version, about = "Trace identities for Toeplitz operators on weighted Bergman spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Directory for reports; defaults to out_dir from the config, then the current directory.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    /// Worker threads for the (t, N) cells.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides the matrix-dimension budget.
    #[arg(long)]
    budget: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment and compare both sides.
    Verify {
        experiment: String,
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run every config listed in a sweep file (`configs = [...]`).
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Run the quick invariant checks.
    Selftest {
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn verify_one(path: &Path, id: Option<Experiment>, common: &Common) -> Result<bool, CliError> {
    let mut cfg = ExperimentConfig::load(path, id)?;
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(b) = common.budget {
        cfg.budget = b;
    }
    let report = run(&cfg, common.workers)?;
    let dir = common.out_dir.clone().or_else(|| cfg.out_dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."));
    report.emit(&dir, common.format)?;
    for r in &report.rows {
        println!(
            "{} t={} N={} lhs={:.10e} rhs={:.10e} diff={:.2e} {}",
            r.experiment,
            r.t,
            r.n_core,
            r.lhs_extrapolated,
            r.rhs,
            r.abs_diff,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    Ok(report.passed())
}

#[derive(serde::Deserialize)]
#[serde(deny_unknown_fields)]
struct SweepFile {
    configs: Vec<String>,
}

fn sweep(path: &Path, common: &Common) -> Result<bool, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let list: SweepFile = toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    if list.configs.is_empty() {
        return Err(CliError::Config(format!("{}: configs is empty", path.display())));
    }
    let base = path.parent().unwrap_or(Path::new("."));
    let mut all = true;
    for c in &list.configs {
        all &= verify_one(&base.join(c), None, common)?;
    }
    Ok(all)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Verify { experiment, config, common } => {
            experiment.parse::<Experiment>().and_then(|id| verify_one(config, Some(id), common))
        }
        Command::Sweep { config, common } => sweep(config, common),
        Command::Selftest { seed } => selftest::run(*seed).map(|checks| {
            for c in &checks {
                println!("{:<24} {} {}", c.name, if c.pass { "pass" } else { "FAIL" }, c.detail);
            }
            checks.iter().all(|c| c.pass)
        }),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("bergtrace: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
