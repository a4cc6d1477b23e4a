use ranksubset_core::harness::{run_experiment, HarnessOptions};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::format::{seconds, sig6};
use crate::output::{csv_buffer, finish};

pub const SIMULATE_HEADER: [&str; 17] = [
    "n",
    "p",
    "sparsity",
    "signal",
    "cov",
    "rho",
    "link",
    "error",
    "method",
    "reps",
    "active_cover",
    "inactive_cover",
    "exact",
    "mean_time_s",
    "q05_time_s",
    "q95_time_s",
    "failures",
];

/// Runs every design point of the grid and renders one row per
/// (design, method). `reps` counts successful replications, the
/// denominator of the three fractions.
pub fn simulate(config: &RunConfig) -> CliResult<String> {
    let methods = config.parsed_methods()?;
    let options = HarnessOptions {
        methods: config.method_options()?,
        threads: config.threads,
        record_time: config.timing,
        transform: None,
    };
    let designs = config.designs()?;

    let mut writer = csv_buffer();
    writer.write_record(SIMULATE_HEADER).map_err(csv_error)?;
    for (i, design) in designs.iter().enumerate() {
        log::info!(
            "design {}/{}: n={} p={} cov={} link={} error={}",
            i + 1,
            designs.len(),
            design.n,
            design.p,
            design.covariance.name(),
            design.link,
            design.error
        );
        let records = run_experiment(design, &methods, config.reps, &options).map_err(CliError::from_config)?;
        for record in records {
            let times = record.time_summary();
            writer
                .write_record([
                    design.n.to_string(),
                    design.p.to_string(),
                    design.sparsity.to_string(),
                    sig6(design.signal),
                    design.covariance.name().to_string(),
                    sig6(design.covariance.rho()),
                    design.link.to_string(),
                    design.error.to_string(),
                    record.method.to_string(),
                    record.replications.to_string(),
                    sig6(record.active_cover()),
                    sig6(record.inactive_cover()),
                    sig6(record.exact()),
                    seconds(times.map(|t| t.mean)),
                    seconds(times.map(|t| t.q05)),
                    seconds(times.map(|t| t.q95)),
                    record.failures.to_string(),
                ])
                .map_err(csv_error)?;
        }
    }
    finish(writer)
}

pub(crate) fn csv_error(e: csv::Error) -> CliError {
    CliError::Usage(format!("csv output: {e}"))
}
