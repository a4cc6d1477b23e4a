use std::io::Write;
use std::path::{Path, PathBuf};

use crate::error::{CliError, CliResult};

/// CSV writer with `\n` line endings into memory.
pub fn csv_buffer() -> csv::Writer<Vec<u8>> {
    csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new())
}

pub fn finish(writer: csv::Writer<Vec<u8>>) -> CliResult<String> {
    let bytes = writer.into_inner().map_err(|e| CliError::Usage(format!("csv buffer: {e}")))?;
    String::from_utf8(bytes).map_err(|e| CliError::Usage(format!("csv buffer: {e}")))
}

/// `results.csv` → `results.config.toml`.
pub fn sidecar_path(out: &Path) -> PathBuf {
    out.with_extension("config.toml")
}

/// Writes `body` to `out`, or to stdout when no path is given. With a path,
/// the effective configuration is written next to it.
pub fn emit(out: Option<&Path>, body: &str, effective_config: &str) -> CliResult<()> {
    match out {
        Some(path) => {
            std::fs::write(path, body).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
            let sidecar = sidecar_path(path);
            std::fs::write(&sidecar, effective_config)
                .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", sidecar.display())))?;
            log::info!("wrote {} and {}", path.display(), sidecar.display());
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(|e| CliError::Usage(format!("cannot write to stdout: {e}")))?;
        }
    }
    Ok(())
}
