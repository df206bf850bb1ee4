//! JSON run configuration.
//!
//! Every key is optional; missing keys take the defaults below. Unknown keys
//! and out-of-domain values are rejected with the offending key named.
//!
//! | key | default |
//! |-----|---------|
//! | `distance` | 10 |
//! | `boundary` | `"periodic"` |
//! | `cooperativity` | 160 |
//! | `n_qubits` | 15 |
//! | `mode` | `"redistribution"` |
//! | `edge_order` | `"shuffled_per_trial"` |
//! | `trials` | 10000 |
//! | `seed` | 0 |
//! | `measurement_infidelity` | 0 |
//! | `op_time` | 0 s |
//! | `coherence_time` | 1.5 s |
//! | `gate_infidelity` | 0 |
//! | `epsilon_n` | 3e-5 (lumped per-qubit error on top of the above) |
//! | `grid_c` | 10, 20, ..., 300 |
//! | `grid_n` | 9, 10, ..., 21 |
//! | `sweep_modes` | `["redistribution", "partitioning"]` |
//! | `edge_target` | 0.0145 |
//! | `pauli_target` | 6.7e-4 |
//! | `c_search_min` / `c_search_max` | 36 / 1000 |
//! | `c_resolution` | 0.5 |
//! | `initial_trials` / `max_trials` | 64 / 16384 |
//! | `sigma` | 3 |
//! | `plot_epsilon_n` | [5.5e-5, 1e-5] |
//! | `workers` | null (available parallelism) |
//! | `out` | null (stdout) |
//! | `format` | `"csv"` |

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use crate::contours::{BisectionSettings, GridSpec, SimSettings, EDGE_FAILURE_TARGET, PAULI_TARGET};
use crate::error::{Error, Result};
use crate::error_budget::ErrorParams;
use crate::merge_sim::{EdgeOrder, MergeConfig};
use crate::resource_states::AllocationMode;
use crate::rhg_lattice::{Boundary, LatticeSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub distance: u32,
    pub boundary: Boundary,
    pub cooperativity: f64,
    pub n_qubits: u32,
    pub mode: AllocationMode,
    pub edge_order: EdgeOrder,
    pub trials: u64,
    pub seed: u64,
    pub measurement_infidelity: f64,
    pub op_time: f64,
    pub coherence_time: f64,
    pub gate_infidelity: f64,
    pub epsilon_n: f64,
    pub grid_c: Vec<f64>,
    pub grid_n: Vec<u32>,
    pub sweep_modes: Vec<AllocationMode>,
    pub edge_target: f64,
    pub pauli_target: f64,
    pub c_search_min: f64,
    pub c_search_max: f64,
    pub c_resolution: f64,
    pub initial_trials: u64,
    pub max_trials: u64,
    pub sigma: f64,
    pub plot_epsilon_n: Vec<f64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
    pub format: OutputFormat,
}

impl Default for RunConfig {
    fn default() -> Self {
        let grid = GridSpec::default();
        let bisection = BisectionSettings::default();
        let errors = ErrorParams::default();
        RunConfig {
            distance: 10,
            boundary: Boundary::Periodic,
            cooperativity: 160.0,
            n_qubits: 15,
            mode: AllocationMode::Redistribution,
            edge_order: EdgeOrder::ShuffledPerTrial,
            trials: 10_000,
            seed: 0,
            measurement_infidelity: errors.measurement_infidelity,
            op_time: errors.op_time,
            coherence_time: errors.coherence_time,
            gate_infidelity: errors.gate_infidelity,
            epsilon_n: 3e-5,
            grid_c: grid.c_values,
            grid_n: grid.n_values,
            sweep_modes: grid.modes,
            edge_target: EDGE_FAILURE_TARGET,
            pauli_target: PAULI_TARGET,
            c_search_min: bisection.c_min,
            c_search_max: bisection.c_max,
            c_resolution: bisection.resolution,
            initial_trials: bisection.initial_trials,
            max_trials: 16_384,
            sigma: bisection.sigma,
            plot_epsilon_n: vec![5.5e-5, 1e-5],
            workers: None,
            out: None,
            format: OutputFormat::Csv,
        }
    }
}

fn config_error(key: impl Into<String>, message: impl Into<String>) -> Error {
    Error::Config {
        key: key.into(),
        message: message.into(),
    }
}

/// Parse and validate a JSON configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig> {
    let value: serde_json::Value = serde_json::from_str(text).map_err(|e| config_error("<document>", e.to_string()))?;
    let object = value
        .as_object()
        .ok_or_else(|| config_error("<document>", "top level must be a JSON object"))?;
    let defaults = serde_json::to_value(RunConfig::default())?;
    let known = defaults.as_object().expect("config serializes to an object");
    if let Some(key) = object.keys().find(|k| !known.contains_key(*k)) {
        return Err(config_error(key.as_str(), "unknown key"));
    }
    let config: RunConfig = serde_path_to_error::deserialize(&value).map_err(|e| {
        let key = e.path().to_string();
        config_error(key, e.into_inner().to_string())
    })?;
    config.validate()?;
    Ok(config)
}

/// Serialize a configuration so that [`parse_config`] reads it back unchanged.
pub fn config_to_json(config: &RunConfig) -> Result<String> {
    Ok(serde_json::to_string_pretty(config)? + "\n")
}

pub fn load_config(path: &std::path::Path) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_config(&text)
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |key: &str, msg: &str| Err(config_error(key, msg));
        if self.distance == 0 {
            return fail("distance", "must be at least 1");
        }
        if !(self.cooperativity > 0.0) || !self.cooperativity.is_finite() {
            return fail("cooperativity", "must be positive and finite");
        }
        if self.n_qubits < 2 {
            return fail("n_qubits", "must be at least 2");
        }
        if self.trials == 0 {
            return fail("trials", "must be at least 1");
        }
        for (key, v) in [
            ("measurement_infidelity", self.measurement_infidelity),
            ("op_time", self.op_time),
            ("gate_infidelity", self.gate_infidelity),
            ("epsilon_n", self.epsilon_n),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return fail(key, "must be non-negative and finite");
            }
        }
        if !(self.coherence_time > 0.0) {
            return fail("coherence_time", "must be positive");
        }
        if let Err(Error::InvalidParameter { name, reason }) = self.grid_spec().validate() {
            return fail(name, &reason);
        }
        for (key, t) in [("edge_target", self.edge_target), ("pauli_target", self.pauli_target)] {
            if !(t > 0.0 && t <= 1.0) {
                return fail(key, "must lie in (0, 1]");
            }
        }
        if !(self.c_search_min > 0.0) {
            return fail("c_search_min", "must be positive");
        }
        if !(self.c_search_max > self.c_search_min) {
            return fail("c_search_max", "must exceed c_search_min");
        }
        if !(self.c_resolution > 0.0) {
            return fail("c_resolution", "must be positive");
        }
        if self.initial_trials == 0 {
            return fail("initial_trials", "must be at least 1");
        }
        if self.max_trials < self.initial_trials {
            return fail("max_trials", "must be at least initial_trials");
        }
        if !(self.sigma >= 0.0) {
            return fail("sigma", "must be non-negative");
        }
        if self.plot_epsilon_n.iter().any(|&e| !(e >= 0.0)) {
            return fail("plot_epsilon_n", "values must be non-negative");
        }
        if self.workers == Some(0) {
            return fail("workers", "must be at least 1");
        }
        Ok(())
    }

    pub fn lattice_spec(&self) -> LatticeSpec {
        LatticeSpec {
            distance: self.distance,
            boundary: self.boundary,
        }
    }

    pub fn merge_config(&self) -> MergeConfig {
        MergeConfig {
            cooperativity: self.cooperativity,
            n_qubits: self.n_qubits,
            mode: self.mode,
            edge_order: self.edge_order,
            trials: self.trials,
            master_seed: self.seed,
        }
    }

    pub fn error_params(&self) -> ErrorParams {
        ErrorParams {
            measurement_infidelity: self.measurement_infidelity,
            op_time: self.op_time,
            coherence_time: self.coherence_time,
            gate_infidelity: self.gate_infidelity,
            extra_per_qubit: self.epsilon_n,
        }
    }

    pub fn grid_spec(&self) -> GridSpec {
        GridSpec {
            c_values: self.grid_c.clone(),
            n_values: self.grid_n.clone(),
            modes: self.sweep_modes.clone(),
        }
    }

    pub fn sim_settings(&self) -> SimSettings {
        SimSettings {
            edge_order: self.edge_order,
            master_seed: self.seed,
            bisection: BisectionSettings {
                c_min: self.c_search_min,
                c_max: self.c_search_max,
                resolution: self.c_resolution,
                initial_trials: self.initial_trials,
                max_trials: self.max_trials,
                sigma: self.sigma,
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn key_of(err: Error) -> String {
        match err {
            Error::Config { key, .. } => key,
            other => panic!("expected config error, got {other}"),
        }
    }

    #[test]
    fn empty_document_gives_defaults() {
        let c = parse_config("{}").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.distance, 10);
        assert_eq!(c.boundary, Boundary::Periodic);
        assert_eq!(c.grid_c.len(), 30);
        assert_eq!(c.grid_c[0], 10.0);
        assert_eq!(c.grid_c[29], 300.0);
        assert_eq!(c.grid_n, (9..=21).collect::<Vec<_>>());
        assert_eq!(c.trials, 10_000);
        assert_eq!(c.coherence_time, 1.5);
        assert_eq!(c.edge_target, 0.0145);
        assert_eq!(c.pauli_target, 6.7e-4);
    }

    #[test]
    fn overrides_apply() {
        let c = parse_config(r#"{"epsilon_n": 3e-5, "grid_n": [15]}"#).unwrap();
        assert_eq!(c.epsilon_n, 3e-5);
        assert_eq!(c.grid_n, vec![15]);
        assert_eq!(c.grid_c, RunConfig::default().grid_c);
    }

    #[test]
    fn errors_name_the_key() {
        assert_eq!(key_of(parse_config(r#"{"distance": 0}"#).unwrap_err()), "distance");
        assert_eq!(key_of(parse_config(r#"{"trials": 0}"#).unwrap_err()), "trials");
        assert_eq!(key_of(parse_config(r#"{"bogus": 1}"#).unwrap_err()), "bogus");
        assert_eq!(key_of(parse_config(r#"{"distance": "ten"}"#).unwrap_err()), "distance");
        assert_eq!(key_of(parse_config(r#"{"grid_n": [15, 9]}"#).unwrap_err()), "grid_n");
        assert_eq!(
            key_of(parse_config(r#"{"boundary": "twisted"}"#).unwrap_err()),
            "boundary"
        );
        assert_eq!(
            key_of(parse_config(r#"{"pauli_target": 0}"#).unwrap_err()),
            "pauli_target"
        );
        assert_eq!(
            key_of(parse_config(r#"{"grid_c": [10, "x"]}"#).unwrap_err()),
            "grid_c[1]"
        );
        assert!(parse_config("[1, 2]").is_err());
    }

    #[test]
    fn defaults_round_trip() {
        let text = config_to_json(&RunConfig::default()).unwrap();
        assert_eq!(parse_config(&text).unwrap(), RunConfig::default());
    }

    #[test]
    fn conversions() {
        let c = parse_config(r#"{"cooperativity": 130, "n_qubits": 17, "mode": "partitioning", "seed": 9}"#).unwrap();
        let m = c.merge_config();
        assert_eq!(m.cooperativity, 130.0);
        assert_eq!(m.n_qubits, 17);
        assert_eq!(m.mode, AllocationMode::Partitioning);
        assert_eq!(m.master_seed, 9);
        assert_eq!(c.error_params().epsilon_n(), 3e-5);
        assert_eq!(c.sim_settings().bisection.max_trials, 16_384);
    }
}
