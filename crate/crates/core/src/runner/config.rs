//! TOML run configuration.
//!
//! ```toml
//! seed = 7
//! workers = 8
//! dataset = "tasks.jsonl"      # relative to this file
//!
//! [pipeline]
//! mode = "bidirectional"       # unidirectional | symmetric_baseline
//! scale_factor = 3
//!
//! [pipeline.zoom]
//! delta_in = 0.10
//! s_min = 1000
//!
//! [pipeline.stage1]
//! backend = "sim"
//! kind = "noisy"
//! sigma = 300
//!
//! [pipeline.stage2]
//! backend = "remote"
//! endpoint = { base_url = "https://api.example.com/v1", model = "grounder", api_key_env = "GROUNDER_KEY" }
//!
//! [pipeline.rewrite]
//! strategy = "raw"
//!
//! [sweep]
//! roi_sizes = [400, 600, 800]
//! method = "static_one_shot"
//!
//! [ablation]
//! kind = "pruning_rates"
//! seeds = [0, 1, 2]
//! ```
//!
//! API keys never appear in the file: endpoints name the environment
//! variable that holds them.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::agents::{PipelineConfig, SearchMethod};
use crate::gbt::sweep::{default_sizes, AblationKind};
use crate::gbt::Membership;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSection {
    #[serde(default = "default_sizes")]
    pub roi_sizes: Vec<f64>,
    #[serde(default)]
    pub method: SearchMethod,
}

impl Default for SweepSection {
    fn default() -> Self {
        Self { roi_sizes: default_sizes(), method: SearchMethod::StaticOneShot }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AblationSection {
    pub kind: AblationKind,
    /// Defaults to three consecutive seeds starting at the run seed.
    #[serde(default)]
    pub seeds: Option<Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub dataset: Option<PathBuf>,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub membership: Membership,
    #[serde(default)]
    pub pipeline: PipelineConfig,
    #[serde(default)]
    pub sweep: Option<SweepSection>,
    #[serde(default)]
    pub ablation: Option<AblationSection>,
}

fn default_workers() -> usize {
    4
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            workers: default_workers(),
            dataset: None,
            out: None,
            membership: Membership::Center,
            pipeline: PipelineConfig::default(),
            sweep: None,
            ablation: None,
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Reads a config file; relative dataset/out paths become relative to
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        let mut cfg = Self::from_toml(&text).map_err(|e| format!("{}: {e}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        for p in [&mut cfg.dataset, &mut cfg.out].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn ablation_seeds(&self) -> Vec<u64> {
        self.ablation
            .as_ref()
            .and_then(|a| a.seeds.clone())
            .unwrap_or_else(|| (0..3).map(|i| self.seed.wrapping_add(i)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictors::SimKind;
    use crate::zoom::ZoomMode;

    #[test]
    fn parses_documented_example() {
        let text = r#"
seed = 7
workers = 8
dataset = "tasks.jsonl"

[pipeline]
mode = "symmetric_baseline"
scale_factor = 2

[pipeline.zoom]
delta_in = 0.2
s_min = 800.0

[pipeline.stage1]
backend = "sim"
kind = "noisy"
sigma = 300.0

[pipeline.stage2]
backend = "remote"
endpoint = { base_url = "http://localhost:1/v1", model = "m", api_key_env = "KEY" }

[pipeline.rewrite]
strategy = "raw"

[sweep]
roi_sizes = [400.0, 600.0]

[ablation]
kind = "pruning_rates"
"#;
        let c = RunConfig::from_toml(text).unwrap();
        assert_eq!(c.pipeline.mode, ZoomMode::SymmetricBaseline);
        assert_eq!(c.pipeline.zoom.delta_in, 0.2);
        assert_eq!(c.pipeline.zoom.e_max, 5);
        assert!(matches!(&c.pipeline.stage1, crate::agents::PredictorConfig::Sim(s) if s.kind == SimKind::Noisy));
        assert_eq!(c.sweep.as_ref().unwrap().roi_sizes, vec![400.0, 600.0]);
        assert_eq!(c.ablation_seeds(), vec![7, 8, 9]);
        c.pipeline.validate().unwrap();
    }

    #[test]
    fn empty_config_is_oracle() {
        let c = RunConfig::from_toml("").unwrap();
        assert_eq!(c, RunConfig::default());
        let partial = RunConfig::from_toml("[pipeline.refusal]\nenabled = true\n").unwrap();
        assert_eq!(partial.pipeline.stage1, PipelineConfig::default().stage1);
        c.pipeline.validate().unwrap();
    }
}
