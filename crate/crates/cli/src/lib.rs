//! Command-line front end: `fit` on CSV data, `simulate` for recovery
//! studies and `benchmark` for runtime sweeps.
//!
//! Exit codes are 0 on success, 2 for usage or configuration problems and
//! 3 for unusable input data.

pub mod args;
pub mod benchmark;
pub mod config;
pub mod error;
pub mod fit;
pub mod format;
pub mod output;
pub mod simulate;

use args::{Cli, Command};
use config::{ConfigLayer, RunConfig};
use error::CliResult;

pub use benchmark::BENCHMARK_HEADER;
pub use simulate::SIMULATE_HEADER;

/// Resolves defaults, then the config file, then flags.
pub fn resolve(defaults: RunConfig, config_path: Option<&std::path::Path>, flags: ConfigLayer) -> CliResult<RunConfig> {
    let file = match config_path {
        Some(path) => ConfigLayer::from_file(path)?,
        None => ConfigLayer::default(),
    };
    Ok(defaults.overlay(file).overlay(flags))
}

pub fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Fit(args) => {
            let outcome = fit::fit(&args.input, &args.response, &args.solver)?;
            for name in &outcome.constant_columns {
                log::warn!("column `{name}` is constant and is excluded from selection");
            }
            print!("{}", outcome.summary);
            if let Some(out) = &args.out {
                output::emit(Some(out), &outcome.coefficients_csv, &outcome.effective_config)?;
            }
            Ok(())
        }
        Command::Simulate(args) => {
            let mut flags = args.grid.layer();
            flags.threads = args.threads;
            if args.no_timing {
                flags.timing = Some(false);
            }
            let config = resolve(RunConfig::simulate_defaults(), args.grid.config.as_deref(), flags)?;
            let csv = simulate::simulate(&config)?;
            output::emit(config.out.as_deref(), &csv, &config.to_toml())
        }
        Command::Benchmark(args) => {
            let mut flags = args.grid.layer();
            flags.sweep = args.sweep.clone();
            let config = resolve(RunConfig::benchmark_defaults(), args.grid.config.as_deref(), flags)?;
            let csv = benchmark::benchmark(&config)?;
            output::emit(config.out.as_deref(), &csv, &config.to_toml())
        }
    }
}
