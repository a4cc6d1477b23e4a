use ranksubset_core::harness::run_timing;

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::format::seconds;
use crate::output::{csv_buffer, finish};
use crate::simulate::csv_error;

pub const BENCHMARK_HEADER: [&str; 6] = ["sweep_var", "value", "method", "mean_time_s", "q05", "q95"];

/// Times each method along the swept dimension. Fits run one after another
/// on the calling thread.
pub fn benchmark(config: &RunConfig) -> CliResult<String> {
    let methods = config.parsed_methods()?;
    let options = config.method_options()?;
    let sweep = config.sweep.as_deref().unwrap_or("p");
    let fixed = match sweep {
        "n" => &config.p,
        "p" => &config.n,
        other => return Err(CliError::Usage(format!("sweep must be `n` or `p`, got `{other}`"))),
    };
    if fixed.len() != 1 {
        return Err(CliError::Usage(format!(
            "sweeping {sweep} needs exactly one value of the other dimension, got {}",
            fixed.len()
        )));
    }
    if config.covariance.len() != 1 || config.link.len() != 1 || config.error.len() != 1 {
        return Err(CliError::Usage("benchmark takes one covariance, link and error".into()));
    }

    let mut writer = csv_buffer();
    writer.write_record(BENCHMARK_HEADER).map_err(csv_error)?;
    for design in config.designs()? {
        let value = if sweep == "n" { design.n } else { design.p };
        log::info!("timing {sweep}={value}");
        for record in run_timing(&design, &methods, config.reps, &options).map_err(CliError::from_config)? {
            let summary = record.summary();
            writer
                .write_record([
                    sweep.to_string(),
                    value.to_string(),
                    record.method.to_string(),
                    seconds(summary.map(|s| s.mean)),
                    seconds(summary.map(|s| s.q05)),
                    seconds(summary.map(|s| s.q95)),
                ])
                .map_err(csv_error)?;
        }
    }
    finish(writer)
}
