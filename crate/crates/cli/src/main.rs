use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};

use binpick::PolicyKind;
use binpick_cli::{
    cmd_metrics, cmd_run, cmd_sweep, format_sweep, format_table, load_config, write_metrics,
    Overrides, DEFAULT_SWEEP_RADII,
};

#[derive(Parser)]
#[command(
    name = "binpick",
    version,
    about = "Multi-gripper bin picking simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML config file; defaults apply to anything left out.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides experiment.master_seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides experiment.n_trials.
    #[arg(long)]
    trials: Option<u64>,
    /// Worker threads. Results do not depend on this.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
}

impl Common {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            trials: self.trials,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run every configured policy and write logs and summaries.
    Run(Common),
    /// Run one policy over a list of mask radii.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "circle_radius")]
        param: String,
        #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SWEEP_RADII)]
        values: Vec<f64>,
        #[arg(long, default_value = "circle")]
        policy: String,
    },
    /// Recompute the summary from a stored trial log.
    Metrics {
        log: PathBuf,
        /// Write summary.csv here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Estimate elapsed time as attempts x this many seconds.
        #[arg(long = "t-pick")]
        t_pick: Option<f64>,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(common) => {
            let config = load_config(common.config.as_deref(), common.overrides())?;
            let output = cmd_run(&config, &common.out, common.jobs)?;
            print!("{}", format_table(&output.rows));
        }
        Command::Sweep {
            common,
            param,
            values,
            policy,
        } => {
            let config = load_config(common.config.as_deref(), common.overrides())?;
            let policy: PolicyKind = policy.parse()?;
            let sweep = cmd_sweep(&config, &param, &values, policy, &common.out, common.jobs)?;
            print!("{}", format_sweep(&param, &sweep));
        }
        Command::Metrics { log, out, t_pick } => {
            let rows = cmd_metrics(&log, t_pick)?;
            match out {
                Some(dir) => {
                    let path = write_metrics(&rows, &dir)?;
                    print!("{}", format_table(&rows));
                    println!("wrote {}", path.display());
                }
                None => print!("{}", binpick::records::summary_csv(&rows)),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
