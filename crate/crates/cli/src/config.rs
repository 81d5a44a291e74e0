use std::path::{Path, PathBuf};

use cas_core::discrete::{BaOptions, FiniteCasModel};
use cas_core::gaussian::{TrmGenerator, TrmModel};
use cas_core::waveform::IsacOptions;
use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// Capacity under estimation-distortion and cost constraints.
    DiscreteCapacity,
    /// Rate-distortion function of a discrete source.
    DiscreteRd,
    /// Boundary of the (D_s, D_c) region and its smallest total distortion.
    DiscreteTradeoff,
    /// Joint sensing/communication Gram optimization.
    TrmOptimize,
    /// Separated-waveform baseline.
    TrmSw,
    /// Both schemes over a list of SNRs.
    SnrSweep,
    /// Monte Carlo run of the Gaussian chain.
    Simulate,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::DiscreteCapacity => "discrete-capacity",
            Mode::DiscreteRd => "discrete-rd",
            Mode::DiscreteTradeoff => "discrete-tradeoff",
            Mode::TrmOptimize => "trm-optimize",
            Mode::TrmSw => "trm-sw",
            Mode::SnrSweep => "snr-sweep",
            Mode::Simulate => "simulate",
        }
    }
}

/// Waveform used by the `simulate` mode.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WaveformChoice {
    /// The optimized joint Gram.
    #[default]
    Isac,
    /// Full power spread evenly over all transmit dimensions.
    Isotropic,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    /// Inline model: a finite CAS model for the discrete modes, a TRM model
    /// otherwise.
    #[serde(default)]
    pub model: Option<serde_json::Value>,
    /// Model file, relative to the config file.
    #[serde(default)]
    pub model_path: Option<PathBuf>,
    /// Random TRM instance drawn with `seed`.
    #[serde(default)]
    pub generator: Option<TrmGenerator>,
    /// Source law for `discrete-rd` when no model is given.
    #[serde(default)]
    pub source: Option<Vec<f64>>,
    #[serde(default)]
    pub distortion: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub d_s: Option<f64>,
    #[serde(default)]
    pub d_c: Option<f64>,
    #[serde(default)]
    pub budget: Option<f64>,
    /// Grid size: estimation thresholds for `discrete-tradeoff`, power splits
    /// for the SW scheme.
    #[serde(default)]
    pub grid: Option<usize>,
    #[serde(default)]
    pub snr_db: Option<Vec<f64>>,
    #[serde(default)]
    pub waveform: WaveformChoice,
    /// Link rate for `simulate`; defaults to the channel mutual information.
    #[serde(default)]
    pub rate_budget: Option<f64>,
    #[serde(default)]
    pub trials: Option<usize>,
    #[serde(default)]
    pub chunk_size: Option<usize>,
    /// Also write one CSV row per Monte Carlo trial.
    #[serde(default)]
    pub per_trial_csv: bool,
    #[serde(default)]
    pub ba: BaOptions,
    #[serde(default)]
    pub isac: IsacOptions,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn config_err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        let mut cfg: Self = serde_json::from_str(&text).map_err(|e| {
            config_err(format!("{}: {e}", path.display()))
        })?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.ba.validate().map_err(|e| config_err(format!("ba: {e}")))?;
        let isac = &self.isac;
        if isac.max_iters == 0 || isac.patience == 0 {
            return Err(config_err("isac: max_iters and patience must be positive"));
        }
        for (name, v) in [("tol", isac.tol), ("fd_rel_step", isac.fd_rel_step), ("armijo", isac.armijo)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(config_err(format!("isac: {name} must be positive, got {v}")));
            }
        }
        if self.model.is_some() && self.model_path.is_some() {
            return Err(config_err("give either model or model_path, not both"));
        }
        if matches!(self.grid, Some(g) if g < 2) {
            return Err(config_err("grid must be at least 2"));
        }
        if self.trials == Some(0) {
            return Err(config_err("trials must be at least 1"));
        }
        if self.chunk_size == Some(0) {
            return Err(config_err("chunk_size must be at least 1"));
        }
        match self.mode {
            Mode::DiscreteRd => {
                if self.d_c.is_none() {
                    return Err(config_err("discrete-rd needs d_c"));
                }
                let explicit = self.source.is_some() || self.distortion.is_some();
                if explicit && (self.source.is_none() || self.distortion.is_none()) {
                    return Err(config_err("discrete-rd needs both source and distortion"));
                }
                if !explicit && !self.has_model() {
                    return Err(config_err("discrete-rd needs source and distortion, or a model"));
                }
            }
            Mode::DiscreteCapacity | Mode::DiscreteTradeoff => {
                if !self.has_model() {
                    return Err(config_err(format!("{} needs model or model_path", self.mode.name())));
                }
            }
            Mode::TrmOptimize | Mode::TrmSw | Mode::SnrSweep | Mode::Simulate => {
                if !self.has_model() && self.generator.is_none() {
                    return Err(config_err(format!(
                        "{} needs model, model_path or generator",
                        self.mode.name()
                    )));
                }
                if self.has_model() && self.generator.is_some() {
                    return Err(config_err("give either a model or a generator, not both"));
                }
                if self.mode == Mode::SnrSweep && self.snr_db.as_ref().is_none_or(|s| s.is_empty()) {
                    return Err(config_err("snr-sweep needs a nonempty snr_db list"));
                }
            }
        }
        Ok(())
    }

    fn has_model(&self) -> bool {
        self.model.is_some() || self.model_path.is_some()
    }

    fn model_text(&self) -> Result<Option<String>> {
        if let Some(v) = &self.model {
            return Ok(Some(v.to_string()));
        }
        match &self.model_path {
            Some(p) => {
                let path = self.base_dir.join(p);
                std::fs::read_to_string(&path)
                    .map(Some)
                    .map_err(|e| config_err(format!("{}: {e}", path.display())))
            }
            None => Ok(None),
        }
    }

    pub fn finite_model(&self) -> Result<FiniteCasModel> {
        let text = self.model_text()?.ok_or_else(|| config_err("no model given"))?;
        FiniteCasModel::from_json_str(&text).map_err(|e| config_err(format!("model: {e}")))
    }

    pub fn trm_model(&self) -> Result<TrmModel> {
        if let Some(text) = self.model_text()? {
            return TrmModel::from_json_str(&text).map_err(|e| config_err(format!("model: {e}")));
        }
        let generator = self.generator.as_ref().ok_or_else(|| config_err("no model given"))?;
        generator
            .generate(self.seed)
            .map_err(|e| config_err(format!("generator: {e}")))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}
