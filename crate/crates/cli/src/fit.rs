use std::fmt::Write as _;
use std::path::Path;

use ndarray::{Array1, Array2, ShapeBuilder};

use ranksubset_core::harness::{fit_rank_abess, MethodOptions};
use ranksubset_core::{rank_response, Dataset, FitReport, LeastSquares};

use crate::args::SolverArgs;
use crate::error::{CliError, CliResult};
use crate::format::sig6;
use crate::output::{csv_buffer, finish};
use crate::simulate::csv_error;

/// A parsed input table: predictor names, predictors and the response.
#[derive(Debug, Clone)]
pub struct Table {
    pub names: Vec<String>,
    pub x: Array2<f64>,
    pub y: Array1<f64>,
}

/// Reads an RFC-4180 CSV with a header row. Structural problems are usage
/// errors; cells that are not finite numbers are data errors.
pub fn read_table(path: &Path, response: &str) -> CliResult<Table> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    let headers = reader
        .headers()
        .map_err(|e| CliError::Usage(format!("malformed CSV header: {e}")))?
        .clone();
    let response_col = headers
        .iter()
        .position(|h| h == response)
        .ok_or_else(|| CliError::Usage(format!("response column `{response}` not found in header")))?;
    let names: Vec<String> = headers
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != response_col)
        .map(|(_, h)| h.to_string())
        .collect();
    if names.is_empty() {
        return Err(CliError::Usage("no predictor columns".into()));
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (r, record) in reader.records().enumerate() {
        // data rows are numbered from 1; the header is line 1 of the file
        let row = r + 1;
        let record = record.map_err(|e| CliError::Usage(format!("malformed CSV at data row {row}: {e}")))?;
        let values = record
            .iter()
            .zip(headers.iter())
            .map(|(cell, name)| match cell.trim().parse::<f64>() {
                Ok(v) if v.is_finite() => Ok(v),
                _ => Err(CliError::Data(format!(
                    "data row {row}, column `{name}`: `{cell}` is not a finite number"
                ))),
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(values);
    }
    if rows.is_empty() {
        return Err(CliError::Usage("CSV has a header but no data rows".into()));
    }

    let n = rows.len();
    let p = names.len();
    let y = Array1::from_iter(rows.iter().map(|r| r[response_col]));
    let mut x = Array2::zeros((n, p).f());
    for (i, row) in rows.iter().enumerate() {
        let predictors = row.iter().enumerate().filter(|&(c, _)| c != response_col).map(|(_, v)| *v);
        for (j, v) in predictors.enumerate() {
            x[[i, j]] = v;
        }
    }
    Ok(Table { names, x, y })
}

/// The outcome of `fit`: the report plus what the CLI prints and writes.
#[derive(Debug)]
pub struct FitOutcome {
    pub report: FitReport,
    pub summary: String,
    pub coefficients_csv: String,
    pub constant_columns: Vec<String>,
    pub effective_config: String,
}

pub fn fit(input: &Path, response: &str, solver: &SolverArgs) -> CliResult<FitOutcome> {
    let table = read_table(input, response)?;
    let dataset = if solver.standardize {
        Dataset::standardized(table.x.view(), table.y.view())
    } else {
        Dataset::new(table.x.view(), table.y.view())
    }
    .map_err(CliError::from_data)?;
    if dataset.n() < 3 {
        return Err(CliError::Data(format!("need at least 3 rows for model selection, got {}", dataset.n())));
    }
    let constant_columns: Vec<String> =
        (0..dataset.p()).filter(|&j| dataset.is_degenerate(j)).map(|j| table.names[j].clone()).collect();
    if constant_columns.len() == dataset.p() {
        return Err(CliError::Data("every predictor column is constant".into()));
    }

    let pseudo = rank_response(dataset.y()).map_err(CliError::from_data)?;
    let ls = LeastSquares::new(&dataset, &pseudo).map_err(CliError::from_data)?;
    let options = MethodOptions {
        s_max: solver.smax,
        k_max: solver.kmax,
        tau: solver.tau,
        standardize: solver.standardize,
        ..MethodOptions::default()
    };
    if options.s_max == Some(0) || options.k_max == Some(0) {
        return Err(CliError::Usage("smax and kmax must be positive".into()));
    }
    if let Some(tau) = options.tau {
        if !(tau >= 0.0) {
            return Err(CliError::Usage(format!("tau must be nonnegative, got {tau}")));
        }
    }
    let report = fit_rank_abess(&ls, &options).map_err(CliError::from_data)?;

    let selected = &report.selected;
    let coefficients = dataset.original_scale(selected);
    let mut summary = String::new();
    let names: Vec<&str> = selected.active.iter().map(|j| table.names[j].as_str()).collect();
    writeln!(summary, "n = {}, p = {}", dataset.n(), dataset.p()).unwrap();
    writeln!(summary, "selected support ({}): {}", names.len(), names.join(", ")).unwrap();
    writeln!(summary, "coefficients:").unwrap();
    for (name, b) in names.iter().zip(&coefficients) {
        writeln!(summary, "  {name}\t{}", sig6(*b)).unwrap();
    }
    writeln!(summary, "GIC path:").unwrap();
    writeln!(summary, "  size\tgic\tloss\tsupport").unwrap();
    for entry in &report.gic_path {
        let support: Vec<&str> = entry.model.active.iter().map(|j| table.names[j].as_str()).collect();
        let marker = if entry.model == *selected { " *" } else { "" };
        writeln!(
            summary,
            "  {}\t{}\t{}\t{}{marker}",
            entry.support_size,
            sig6(entry.gic_value),
            sig6(entry.model.loss),
            support.join(" ")
        )
        .unwrap();
    }

    let mut writer = csv_buffer();
    writer.write_record(["variable", "coefficient"]).map_err(csv_error)?;
    for (name, b) in names.iter().zip(&coefficients) {
        writer.write_record([name.to_string(), sig6(*b)]).map_err(csv_error)?;
    }
    let coefficients_csv = finish(writer)?;

    let effective_config = format!(
        "input = {:?}\nresponse = {:?}\nstandardize = {}\ns_max = {}\n{}{}",
        input.display().to_string(),
        response,
        solver.standardize,
        options.effective_s_max(&ls),
        solver.kmax.map(|k| format!("k_max = {k}\n")).unwrap_or_default(),
        solver.tau.map(|t| format!("tau = {t:?}\n")).unwrap_or_default(),
    );

    Ok(FitOutcome { report, summary, coefficients_csv, constant_columns, effective_config })
}
