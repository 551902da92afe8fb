//! Experiment configuration: defaults, key-value files, and overrides.
//!
//! Config files are plain text, one `key=value` per line, `#` comments:
//!
//! ```text
//! models=TMP36,LM61,MCP9700,LMT85
//! instances_per_model=3
//! base_seed=42
//! n_matchings=1000
//! n_repeats=3
//! p_values=5,10,20,50,100
//! theta_min=0.001
//! theta_max=0.02
//! theta_count=20
//! grid=1000:1000000:1000
//! temperature_c=25
//! temp_jitter_std_c=0.25
//! session_drift_std_c=0.25
//! output_dir=out
//! ```
//!
//! Unknown keys are rejected. Any key may be omitted; defaults above apply.

use std::path::{Path, PathBuf};

use sensorprint_core::fingerprint::FrequencyGrid;
use sensorprint_core::sensor::Environment;

use crate::error::{Error, Result};
use crate::fpfile::parse_grid;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Builtin preset names to evaluate.
    pub models: Vec<String>,
    /// Additional custom model files, appended to the pool.
    pub model_files: Vec<PathBuf>,
    pub instances_per_model: u32,
    pub base_seed: u64,
    /// Matchings per experiment cell.
    pub n_matchings: u32,
    /// Repeats per frequency during bootstrap sweeps.
    pub n_repeats: u32,
    pub p_values: Vec<usize>,
    pub theta_values: Vec<f64>,
    pub grid: FrequencyGrid,
    /// Nominal ambient temperature.
    pub temperature_c: f64,
    /// Per-measurement temperature jitter (std dev).
    pub temp_jitter_std_c: f64,
    /// Per-session ambient drift between bootstrap and field sessions.
    pub session_drift_std_c: f64,
    pub output_dir: PathBuf,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            models: vec![
                "TMP36".into(),
                "LM61".into(),
                "MCP9700".into(),
                "LMT85".into(),
            ],
            model_files: Vec::new(),
            instances_per_model: 3,
            base_seed: 42,
            n_matchings: 1000,
            n_repeats: 3,
            p_values: vec![5, 10, 20, 50, 100],
            theta_values: linspace(0.001, 0.02, 20),
            grid: FrequencyGrid::default(),
            temperature_c: 25.0,
            temp_jitter_std_c: 0.25,
            session_drift_std_c: 0.25,
            output_dir: PathBuf::from("out"),
        }
    }
}

/// `count` evenly spaced values covering `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    assert!(count >= 2);
    let step = (hi - lo) / (count as f64 - 1.0);
    (0..count).map(|i| lo + i as f64 * step).collect()
}

impl ExperimentConfig {
    /// Nominal environment used for bootstrap sweeps.
    pub fn environment(&self) -> Environment {
        Environment::new(self.temperature_c, self.temp_jitter_std_c)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::default();
        let mut theta_min = 0.001;
        let mut theta_max = 0.02;
        let mut theta_count = 20usize;
        let mut theta_bounds_set = false;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::parse(path, i + 1, "expected key=value"))?;
            let bad = |what: &str| Error::parse(path, i + 1, format!("bad {what}: '{value}'"));
            match key.trim() {
                "models" => {
                    config.models = value.split(',').map(|s| s.trim().to_string()).collect();
                }
                "model_files" => {
                    config.model_files =
                        value.split(',').map(|s| PathBuf::from(s.trim())).collect();
                }
                "instances_per_model" => {
                    config.instances_per_model = value.trim().parse().map_err(|_| bad("count"))?;
                }
                "base_seed" => {
                    config.base_seed = value.trim().parse().map_err(|_| bad("seed"))?;
                }
                "n_matchings" => {
                    config.n_matchings = value.trim().parse().map_err(|_| bad("count"))?;
                }
                "n_repeats" => {
                    config.n_repeats = value.trim().parse().map_err(|_| bad("count"))?;
                }
                "p_values" => {
                    config.p_values = value
                        .split(',')
                        .map(|s| s.trim().parse())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(|_| bad("P list"))?;
                }
                "theta_min" => {
                    theta_min = value.trim().parse().map_err(|_| bad("theta"))?;
                    theta_bounds_set = true;
                }
                "theta_max" => {
                    theta_max = value.trim().parse().map_err(|_| bad("theta"))?;
                    theta_bounds_set = true;
                }
                "theta_count" => {
                    theta_count = value.trim().parse().map_err(|_| bad("count"))?;
                    theta_bounds_set = true;
                }
                "grid" => {
                    config.grid = parse_grid(value.trim()).ok_or_else(|| bad("grid"))?;
                }
                "temperature_c" => {
                    config.temperature_c = value.trim().parse().map_err(|_| bad("temperature"))?;
                }
                "temp_jitter_std_c" => {
                    config.temp_jitter_std_c =
                        value.trim().parse().map_err(|_| bad("jitter"))?;
                }
                "session_drift_std_c" => {
                    config.session_drift_std_c =
                        value.trim().parse().map_err(|_| bad("drift"))?;
                }
                "output_dir" => {
                    config.output_dir = PathBuf::from(value.trim());
                }
                other => {
                    return Err(Error::parse(path, i + 1, format!("unknown key '{other}'")));
                }
            }
        }
        if theta_bounds_set {
            if theta_count < 2 || !(theta_min < theta_max) {
                return Err(Error::Config {
                    reason: "theta sweep needs theta_min < theta_max and theta_count >= 2".into(),
                });
            }
            config.theta_values = linspace(theta_min, theta_max, theta_count);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.models.is_empty() && self.model_files.is_empty() {
            return Err(Error::Config {
                reason: "at least one model is required".into(),
            });
        }
        if self.instances_per_model < 1 {
            return Err(Error::Config {
                reason: "instances_per_model must be at least 1".into(),
            });
        }
        if self.n_matchings < 1 {
            return Err(Error::Config {
                reason: "n_matchings must be at least 1".into(),
            });
        }
        if self.n_repeats < 1 {
            return Err(Error::Config {
                reason: "n_repeats must be at least 1".into(),
            });
        }
        for &p in &self.p_values {
            if p < 1 || p > self.grid.len() {
                return Err(Error::Config {
                    reason: format!("P={p} outside 1..={}", self.grid.len()),
                });
            }
        }
        if self.theta_values.is_empty() {
            return Err(Error::Config {
                reason: "theta_values must not be empty".into(),
            });
        }
        Ok(())
    }
}
