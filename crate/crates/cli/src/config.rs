// Copyright 2026 The matchforge Authors
// SPDX-License-Identifier: Apache-2.0

//! Experiment configuration. Unknown keys are rejected at every level.

use std::path::PathBuf;

use matchforge::basis::{parse_basis_label, zeros_label};
use matchforge::circuitsim::NoiseModel;
use matchforge::compiler::{default_columns, OptimizerConfig};
use matchforge::matchgate::GateFamily;
use matchforge::model::{CouplingProfile, ModelPreset};
use matchforge::Execution;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelConfig {
    /// Preset label such as `mirror5`; `mirror5` when neither a preset nor
    /// couplings are given. Explicit fields must agree with the preset,
    /// except `field`, which overrides it.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_sites: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub couplings: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub field: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub dt: f64,
    pub n_steps: usize,
    pub shots: u64,
    pub seed: u64,
    /// Basis label, right-most character is qubit 1; all zeros when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_state: Option<String>,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig { dt: 0.1, n_steps: 100, shots: 8192, seed: 0, initial_state: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CompilerConfig {
    /// Brickwork columns; `N + 1` when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub columns: Option<usize>,
    pub tolerance: f64,
    pub restarts: usize,
    pub family: GateFamily,
    pub max_iter: usize,
}

impl Default for CompilerConfig {
    fn default() -> Self {
        let d = OptimizerConfig::default();
        CompilerConfig {
            columns: None,
            tolerance: d.tolerance,
            restarts: d.restarts,
            family: d.family,
            max_iter: d.max_iter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
    Qasm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: PathBuf::from("out"),
            formats: vec![OutputFormat::Csv, OutputFormat::Json, OutputFormat::Qasm],
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, f: OutputFormat) -> bool {
        self.formats.contains(&f)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: ModelConfig,
    pub sim: SimConfig,
    pub compiler: CompilerConfig,
    pub noise: NoiseModel,
    pub output: OutputConfig,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("invalid configuration: {e}")))
    }

    pub fn load(path: &std::path::Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Fill every default and check consistency. Resolving a resolved
    /// configuration returns it unchanged.
    pub fn resolve(&self) -> Result<ExperimentConfig, CliError> {
        let profile = self.profile()?;
        let n = profile.n_sites;
        let mut out = self.clone();
        out.model = ModelConfig {
            preset: profile.name.clone(),
            n_sites: Some(n),
            couplings: Some(profile.couplings.clone()),
            field: Some(profile.field),
        };
        let sim = &self.sim;
        if !(sim.dt.is_finite() && sim.dt > 0.0) {
            return Err(CliError::Config(format!("sim.dt must be positive, got {}", sim.dt)));
        }
        if sim.n_steps == 0 {
            return Err(CliError::Config("sim.n_steps must be at least 1".into()));
        }
        if sim.shots == 0 {
            return Err(CliError::Config("sim.shots must be at least 1".into()));
        }
        let initial = sim.initial_state.clone().unwrap_or_else(|| zeros_label(n));
        parse_basis_label(&initial, n).map_err(config_error)?;
        out.sim.initial_state = Some(initial);
        let columns = self.compiler.columns.unwrap_or_else(|| default_columns(n));
        if columns == 0 {
            return Err(CliError::Config("compiler.columns must be at least 1".into()));
        }
        out.compiler.columns = Some(columns);
        if self.compiler.tolerance.is_nan() || self.compiler.tolerance < 0.0 {
            return Err(CliError::Config("compiler.tolerance must be non-negative".into()));
        }
        self.noise.validate().map_err(config_error)?;
        Ok(out)
    }

    pub fn profile(&self) -> Result<CouplingProfile, CliError> {
        let m = &self.model;
        let default_preset = ModelPreset::Mirror5.label().to_string();
        let preset = m.preset.as_ref().or(m.couplings.is_none().then_some(&default_preset));
        let mut profile = match (preset, &m.couplings) {
            (Some(label), couplings) => {
                let preset: ModelPreset = label.parse().map_err(config_error)?;
                let p = preset.profile();
                if couplings.as_ref().is_some_and(|c| c != &p.couplings) {
                    return Err(CliError::Config(format!("model.couplings disagree with preset {label}")));
                }
                p
            }
            (None, Some(couplings)) => CouplingProfile::new(couplings.clone(), 1.0).map_err(config_error)?,
            (None, None) => unreachable!("a missing model falls back to the default preset"),
        };
        if m.n_sites.is_some_and(|n| n != profile.n_sites) {
            return Err(CliError::Config(format!(
                "model.n_sites = {} but the couplings describe {} sites",
                m.n_sites.unwrap_or_default(),
                profile.n_sites
            )));
        }
        if let Some(h) = m.field {
            profile = profile.with_field(h);
        }
        profile.validate().map_err(config_error)?;
        Ok(profile)
    }

    /// Only valid on a resolved configuration.
    pub fn initial_state(&self) -> String {
        self.sim.initial_state.clone().unwrap_or_default()
    }

    pub fn optimizer(&self, execution: Execution) -> OptimizerConfig {
        OptimizerConfig {
            tolerance: self.compiler.tolerance,
            restarts: self.compiler.restarts,
            max_iter: self.compiler.max_iter,
            seed: self.sim.seed,
            family: self.compiler.family,
            columns: self.compiler.columns,
            execution,
            ..OptimizerConfig::default()
        }
    }
}

fn config_error(e: matchforge::Error) -> CliError {
    CliError::Config(e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_match_reference_run() {
        let c = ExperimentConfig::default().resolve().unwrap();
        assert_eq!(c.sim.dt, 0.1);
        assert_eq!(c.sim.n_steps, 100);
        assert_eq!(c.sim.shots, 8192);
        assert_eq!(c.sim.initial_state.as_deref(), Some("00000"));
        assert_eq!(c.compiler.columns, Some(6));
        assert_eq!(c.model.couplings.as_deref(), Some(&[2.0, 4.0, 4.0, 2.0][..]));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ExperimentConfig::from_json(r#"{"sim": {"dtt": 0.2}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"simulation": {}}"#).is_err());
        assert!(ExperimentConfig::from_json(r#"{"noise": {"readout": 0.1}}"#).is_err());
    }

    #[test]
    fn inconsistent_models_are_rejected() {
        let bad = [
            r#"{"model": {"preset": "mirror5", "couplings": [1, 1, 1, 1]}}"#,
            r#"{"model": {"preset": "nope"}}"#,
            r#"{"model": {"couplings": [1, 2], "n_sites": 4}}"#,
            r#"{"sim": {"initial_state": "0001"}}"#,
            r#"{"sim": {"dt": -1}}"#,
            r#"{"noise": {"readout_flip_p": 1.5}}"#,
        ];
        for text in bad {
            let parsed = ExperimentConfig::from_json(text).and_then(|c| c.resolve());
            assert!(parsed.is_err(), "{text}");
        }
    }

    #[test]
    fn explicit_model_and_field_override() {
        let c = ExperimentConfig::from_json(r#"{"model": {"couplings": [1.0, -2.0], "field": 0.5}}"#)
            .unwrap()
            .resolve()
            .unwrap();
        let p = c.profile().unwrap();
        assert_eq!((p.n_sites, p.field), (3, 0.5));
        assert_eq!(c.compiler.columns, Some(4));
    }

    #[test]
    fn resolved_config_round_trips() {
        let texts = [
            "{}",
            r#"{"model": {"preset": "defect5", "field": 0.0}, "sim": {"seed": 9, "n_steps": 3}}"#,
            r#"{"model": {"couplings": [1.5, 0.5, 2.0]}, "compiler": {"family": "six_param", "columns": 2}}"#,
        ];
        for text in texts {
            let resolved = ExperimentConfig::from_json(text).unwrap().resolve().unwrap();
            let json = serde_json::to_string_pretty(&resolved).unwrap();
            let back = ExperimentConfig::from_json(&json).unwrap();
            assert_eq!(back, resolved);
            assert_eq!(back.resolve().unwrap(), resolved);
        }
    }
}
