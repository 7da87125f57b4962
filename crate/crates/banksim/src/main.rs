use std::path::PathBuf;
use std::process::ExitCode;

use banksim::config;
use banksim::ensemble::{run_ensemble, sweep, write_ensemble, write_sweep};
use banksim::matrix::load_matrix;
use banksim::output::write_run;
use banksim::CliError;
use banksim_core::SimConfig;
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "banksim", version, about = "Agent-based banking system simulator")]
struct Cli {
    /// TOML parameter file; missing keys keep their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Parameter override `key=value`, applied after the file. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE", global = true)]
    set: Vec<String>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Seed (base seed for ensembles and sweeps).
    #[arg(long)]
    seed: Option<u64>,

    /// Number of steps.
    #[arg(long)]
    steps: Option<u64>,

    /// Output directory.
    #[arg(long, env = "BANKSIM_OUT", default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Single run; writes timeseries, panel, events and summary files.
    Run {
        #[command(flatten)]
        common: Common,
        /// Dense CSV exposure matrix used instead of a generated network.
        #[arg(long)]
        network: Option<PathBuf>,
    },
    /// Monte Carlo ensemble over consecutive seeds.
    Ensemble {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        runs: Option<usize>,
    },
    /// One ensemble per value of a parameter.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        runs: Option<usize>,
        /// Parameter name, e.g. `a0`.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        values: Vec<String>,
    },
    /// Parses and checks the configuration, then prints it.
    Validate,
}

fn effective(cli: &Cli, common: Option<&Common>, runs: Option<usize>) -> Result<SimConfig, CliError> {
    let mut c = config::load(cli.config.as_deref(), &cli.set)?;
    if let Some(common) = common {
        if let Some(seed) = common.seed {
            c.seed = seed;
        }
        if let Some(steps) = common.steps {
            c.horizon_steps = steps;
        }
    }
    if let Some(runs) = runs {
        c.m_sim = runs;
    }
    c.validate()?;
    Ok(c)
}

fn execute(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Run { common, network } => {
            let c = effective(cli, Some(common), None)?;
            let network = network.as_deref().map(load_matrix).transpose()?;
            let s = write_run(&c, network, &common.out)?;
            println!(
                "seed {} alpha {:.4} H(T) {} defaults {} volatility {} -> {}",
                s.seed,
                s.alpha,
                s.final_loss,
                s.n_defaults,
                s.return_volatility,
                common.out.display()
            );
        }
        Command::Ensemble { common, runs } => {
            let c = effective(cli, Some(common), *runs)?;
            let summary = run_ensemble(&c, c.m_sim, c.seed)?;
            write_ensemble(&common.out, &c, c.seed, &summary)?;
            println!(
                "{} runs, mean alpha {:.4}, mean H(T) {}, mean defaults {}, systemic {} -> {}",
                summary.runs,
                summary.alpha.mean,
                summary.final_loss.mean,
                summary.n_defaults.mean,
                summary.systemic_default_probability,
                common.out.display()
            );
        }
        Command::Sweep {
            common,
            runs,
            param,
            values,
        } => {
            let c = effective(cli, Some(common), *runs)?;
            let rows = sweep(&c, param, values, c.m_sim, c.seed)?;
            write_sweep(&common.out, &c, param, c.seed, &rows)?;
            println!("{param}\tmean_alpha\tvolatility\tmean_H\tmean_defaults\tsystemic");
            for r in &rows {
                println!(
                    "{}\t{:.4}\t{:.6}\t{:.1}\t{:.2}\t{:.3}",
                    r.value,
                    r.mean_alpha,
                    r.mean_return_volatility,
                    r.mean_final_loss,
                    r.mean_n_defaults,
                    r.systemic_default_probability
                );
            }
        }
        Command::Validate => {
            let c = effective(cli, None, None)?;
            print!("{}", config::to_toml(&c));
            println!("# config_hash = {}", config::config_hash(&c));
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
