//! Run configuration: built-in defaults, overlaid by a TOML file, overlaid
//! by command-line flags.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use ranksubset_core::harness::{Method, MethodOptions};
use ranksubset_core::simgen::{derive_seed, Covariance, ErrorLaw, Link, SimDesign};

use crate::error::{CliError, CliResult};

/// Default ρ when a correlated structure is named without one.
const DEFAULT_EXPONENTIAL_RHO: f64 = 0.8;
const DEFAULT_EQUICORRELATED_RHO: f64 = 0.2;

/// Every key accepted in a config file. Flags are parsed into the same
/// shape so the two layers merge uniformly.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigLayer {
    pub seed: Option<u64>,
    pub reps: Option<usize>,
    pub threads: Option<usize>,
    pub methods: Option<Vec<String>>,
    pub out: Option<PathBuf>,
    pub timing: Option<bool>,
    pub n: Option<Vec<usize>>,
    pub p: Option<Vec<usize>>,
    pub sparsity: Option<usize>,
    pub signal: Option<f64>,
    pub covariance: Option<Vec<String>>,
    pub link: Option<Vec<String>>,
    pub error: Option<Vec<String>>,
    pub s_max: Option<usize>,
    pub k_max: Option<usize>,
    pub tau: Option<f64>,
    pub standardize: Option<bool>,
    pub lasso_c: Option<f64>,
    pub cv_folds: Option<usize>,
    pub cv_grid: Option<usize>,
    pub sweep: Option<String>,
}

impl ConfigLayer {
    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("invalid config {}: {e}", path.display())))
    }
}

/// Fully resolved settings of a `simulate` or `benchmark` run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub reps: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threads: Option<usize>,
    pub methods: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    pub timing: bool,
    pub n: Vec<usize>,
    pub p: Vec<usize>,
    pub sparsity: usize,
    pub signal: f64,
    pub covariance: Vec<String>,
    pub link: Vec<String>,
    pub error: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_max: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    pub standardize: bool,
    pub lasso_c: f64,
    pub cv_folds: usize,
    pub cv_grid: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<String>,
}

impl RunConfig {
    /// Defaults of `simulate`: the published grid, n from 200 to 2000 at
    /// p = 2000 with ten coefficients equal to 2.
    pub fn simulate_defaults() -> Self {
        Self {
            seed: 1,
            reps: 100,
            threads: None,
            methods: vec![Method::RankAbess.name().into()],
            out: None,
            timing: true,
            n: (1..=10).map(|k| 200 * k).collect(),
            p: vec![2000],
            sparsity: 10,
            signal: 2.0,
            covariance: vec!["independent".into()],
            link: vec!["linear".into()],
            error: vec!["gaussian".into()],
            s_max: None,
            k_max: None,
            tau: None,
            standardize: false,
            lasso_c: MethodOptions::default().lasso_c,
            cv_folds: MethodOptions::default().cv_folds,
            cv_grid: MethodOptions::default().cv_grid,
            sweep: None,
        }
    }

    /// Defaults of `benchmark`: n = 200 with p swept from 200 to 2000.
    pub fn benchmark_defaults() -> Self {
        Self {
            reps: 20,
            n: vec![200],
            p: (1..=10).map(|k| 200 * k).collect(),
            sweep: Some("p".into()),
            ..Self::simulate_defaults()
        }
    }

    /// Applies every key set in `layer`.
    pub fn overlay(mut self, layer: ConfigLayer) -> Self {
        macro_rules! take {
            ($($field:ident),*) => { $( if let Some(v) = layer.$field { self.$field = v; } )* };
        }
        macro_rules! take_opt {
            ($($field:ident),*) => { $( if layer.$field.is_some() { self.$field = layer.$field; } )* };
        }
        take!(seed, reps, methods, timing, n, p, sparsity, signal, covariance, link, error, standardize, lasso_c, cv_folds, cv_grid);
        take_opt!(threads, out, s_max, k_max, tau, sweep);
        self
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    pub fn parsed_methods(&self) -> CliResult<Vec<Method>> {
        if self.methods.is_empty() {
            return Err(CliError::Usage("no methods requested".into()));
        }
        self.methods
            .iter()
            .map(|m| m.parse().map_err(|e: ranksubset_core::Error| CliError::Usage(e.to_string())))
            .collect()
    }

    pub fn method_options(&self) -> CliResult<MethodOptions> {
        if self.reps == 0 {
            return Err(CliError::Usage("reps must be at least 1".into()));
        }
        if self.threads == Some(0) {
            return Err(CliError::Usage("threads must be at least 1".into()));
        }
        if self.cv_folds < 2 || self.cv_grid == 0 {
            return Err(CliError::Usage("cv_folds must be at least 2 and cv_grid positive".into()));
        }
        if !(self.lasso_c > 0.0) {
            return Err(CliError::Usage("lasso_c must be positive".into()));
        }
        if let Some(tau) = self.tau {
            if !(tau >= 0.0) {
                return Err(CliError::Usage(format!("tau must be nonnegative, got {tau}")));
            }
        }
        if self.s_max == Some(0) || self.k_max == Some(0) {
            return Err(CliError::Usage("smax and kmax must be positive".into()));
        }
        Ok(MethodOptions {
            s_max: self.s_max,
            k_max: self.k_max,
            tau: self.tau,
            standardize: self.standardize,
            lasso_c: self.lasso_c,
            cv_folds: self.cv_folds,
            cv_grid: self.cv_grid,
        })
    }

    /// Expands the grid, covariance outermost and n innermost. Design `d`
    /// receives a seed derived from the master seed and `d`.
    pub fn designs(&self) -> CliResult<Vec<SimDesign>> {
        if self.n.is_empty() || self.p.is_empty() {
            return Err(CliError::Usage("n and p need at least one value each".into()));
        }
        let covariances = self.covariance.iter().map(|c| parse_covariance(c)).collect::<CliResult<Vec<_>>>()?;
        let links = parse_all::<Link>(&self.link)?;
        let errors = parse_all::<ErrorLaw>(&self.error)?;
        let mut designs = Vec::new();
        for &covariance in &covariances {
            for &link in &links {
                for &error in &errors {
                    for &p in &self.p {
                        for &n in &self.n {
                            let design = SimDesign {
                                n,
                                p,
                                sparsity: self.sparsity,
                                signal: self.signal,
                                covariance,
                                link,
                                error,
                                seed: derive_seed(self.seed, designs.len() as u64),
                            };
                            design.validate().map_err(CliError::from_config)?;
                            designs.push(design);
                        }
                    }
                }
            }
        }
        Ok(designs)
    }
}

/// `independent`, `exponential[:rho]` or `equicorrelated[:rho]`.
pub fn parse_covariance(spec: &str) -> CliResult<Covariance> {
    let (name, rho) = match spec.split_once(':') {
        Some((name, rho)) => {
            let rho: f64 = rho
                .trim()
                .parse()
                .map_err(|_| CliError::Usage(format!("invalid rho in covariance `{spec}`")))?;
            (name.trim(), Some(rho))
        }
        None => (spec.trim(), None),
    };
    let default_rho = match name {
        "exponential" | "ar1" => DEFAULT_EXPONENTIAL_RHO,
        "equicorrelated" | "constant" => DEFAULT_EQUICORRELATED_RHO,
        _ => 0.0,
    };
    Covariance::from_name(name, rho.unwrap_or(default_rho)).map_err(CliError::from_config)
}

fn parse_all<T>(values: &[String]) -> CliResult<Vec<T>>
where
    T: std::str::FromStr<Err = ranksubset_core::Error>,
{
    if values.is_empty() {
        return Err(CliError::Usage("link and error need at least one value each".into()));
    }
    values
        .iter()
        .map(|v| v.parse().map_err(|e: ranksubset_core::Error| CliError::Usage(e.to_string())))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        let err = toml::from_str::<ConfigLayer>("reps = 3\nbogus = 1\n").unwrap_err();
        assert!(err.to_string().contains("bogus"));
    }

    #[test]
    fn layers_override_in_order() {
        let file: ConfigLayer = toml::from_str("reps = 3\nn = [100, 200]\ntau = 0.5\n").unwrap();
        let flags = ConfigLayer { reps: Some(7), ..ConfigLayer::default() };
        let config = RunConfig::simulate_defaults().overlay(file).overlay(flags);
        assert_eq!(config.reps, 7);
        assert_eq!(config.n, vec![100, 200]);
        assert_eq!(config.tau, Some(0.5));
        assert_eq!(config.p, vec![2000]);
    }

    #[test]
    fn effective_config_round_trips() {
        let config = RunConfig { reps: 3, tau: Some(0.1), methods: vec!["ranklasso".into()], ..RunConfig::simulate_defaults() };
        let layer: ConfigLayer = toml::from_str(&config.to_toml()).unwrap();
        assert_eq!(RunConfig::simulate_defaults().overlay(layer), config);
    }

    #[test]
    fn covariance_specs() {
        assert_eq!(parse_covariance("independent").unwrap(), Covariance::Independent);
        assert_eq!(parse_covariance("exponential").unwrap(), Covariance::Exponential(0.8));
        assert_eq!(parse_covariance("equicorrelated:0.5").unwrap(), Covariance::Equicorrelated(0.5));
        assert!(parse_covariance("banded").is_err());
        assert!(parse_covariance("exponential:x").is_err());
    }

    #[test]
    fn grid_order_and_distinct_seeds() {
        let config = RunConfig {
            n: vec![100, 200],
            p: vec![50],
            sparsity: 3,
            covariance: vec!["independent".into(), "exponential".into()],
            ..RunConfig::simulate_defaults()
        };
        let designs = config.designs().unwrap();
        assert_eq!(designs.len(), 4);
        assert_eq!(designs.iter().map(|d| d.n).collect::<Vec<_>>(), vec![100, 200, 100, 200]);
        assert_eq!(designs[2].covariance, Covariance::Exponential(0.8));
        let mut seeds: Vec<u64> = designs.iter().map(|d| d.seed).collect();
        seeds.dedup();
        assert_eq!(seeds.len(), 4);
    }
}
