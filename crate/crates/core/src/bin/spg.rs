use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use spg::harness::{
    cmd_constants, cmd_run, cmd_sweep, cmd_validate, ExitStatus, ExperimentConfig, Schedule, ValidateOptions,
};
use spg::oracle::DEFAULT_PATH_BUDGET;
use spg::{Result, SpgError};

#[derive(Parser)]
#[command(name = "spg", version, about = "Safe policy gradient experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// Experiment configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Master seed, overriding the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory, overriding the config.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl ConfigArgs {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::load(&self.config)?;
        if let Some(seed) = self.seed {
            cfg.seed = seed;
        }
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        Ok(cfg)
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run safe policy gradient and write run.csv.
    Run(ConfigArgs),
    /// Print smoothing, Lipschitz, variance and error constants.
    Constants(ConfigArgs),
    /// Run the oracle-backed self-check suite.
    Validate {
        /// Largest number of trajectory paths an oracle check may enumerate.
        #[arg(long, default_value_t = DEFAULT_PATH_BUDGET)]
        budget: u128,
        /// Also write validate.csv to this directory.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Multiply every Lipschitz constant (debugging aid).
        #[arg(long, default_value_t = 1.0, hide = true)]
        lipschitz_scale: f64,
    },
    /// Compare safe policy gradient against fixed schedules.
    Sweep {
        #[command(flatten)]
        args: ConfigArgs,
        /// `spg` or `fixed:<alpha>:<N>` (alpha may be `<c>/L`); comma-separated or repeated.
        #[arg(long = "schedule", value_delimiter = ',', required = true)]
        schedules: Vec<String>,
    },
}

fn write_out(dir: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), text)?;
    Ok(())
}

fn execute(command: Command) -> Result<ExitStatus> {
    match command {
        Command::Run(args) => {
            let cfg = args.load()?;
            let path = cmd_run(&cfg, &cfg.output.dir)?;
            println!("wrote {}", path.display());
        }
        Command::Constants(args) => {
            print!("{}", cmd_constants(&args.load()?)?.render());
        }
        Command::Validate { budget, out, lipschitz_scale } => {
            let report = cmd_validate(&ValidateOptions { budget, lipschitz_scale });
            let csv = report.to_csv()?;
            print!("{csv}");
            if let Some(dir) = out {
                write_out(&dir, "validate.csv", &csv)?;
            }
            return Ok(report.status());
        }
        Command::Sweep { args, schedules } => {
            let cfg = args.load()?;
            let schedules = schedules.iter().map(|s| s.parse()).collect::<Result<Vec<Schedule>>>()?;
            let output = cmd_sweep(&cfg, &schedules, &cfg.output.dir)?;
            for path in output.runs.iter().chain([&output.summary]) {
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(ExitStatus::Success)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let status = execute(cli.command).unwrap_or_else(|e: SpgError| {
        eprintln!("error: {e}");
        ExitStatus::from(&e)
    });
    ExitCode::from(status.code() as u8)
}
