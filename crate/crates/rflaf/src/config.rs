//! Experiment configuration, read from TOML.
//!
//! Only `mode` is required; every section falls back to the defaults below
//! and unknown keys are rejected. All randomness is keyed by the top-level
//! `seed`.
//!
//! ```toml
//! mode = "train-compare"
//! seed = 7
//!
//! [train]
//! targets = ["s2"]
//! epochs = 10
//! ```

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use rflaf_core::data::Sigma;
use rflaf_core::model::BaselineActivation;
use rflaf_core::optim::TrainConfig;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    KernelVerify,
    TaylorVerify,
    RateStudy,
    TrainCompare,
    ExportActivation,
    Bounds,
}

impl Mode {
    pub const ALL: [Mode; 6] = [
        Mode::KernelVerify,
        Mode::TaylorVerify,
        Mode::RateStudy,
        Mode::TrainCompare,
        Mode::ExportActivation,
        Mode::Bounds,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Mode::KernelVerify => "kernel-verify",
            Mode::TaylorVerify => "taylor-verify",
            Mode::RateStudy => "rate-study",
            Mode::TrainCompare => "train-compare",
            Mode::ExportActivation => "export-activation",
            Mode::Bounds => "bounds",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: Mode,
    #[serde(default)]
    pub seed: u64,
    /// Output directory; the command line `--out` takes precedence.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub kernel: KernelVerifyConfig,
    #[serde(default)]
    pub taylor: TaylorVerifyConfig,
    #[serde(default)]
    pub rate: RateStudyConfig,
    #[serde(default)]
    pub train: TrainCompareConfig,
    #[serde(default)]
    pub export: ExportConfig,
    #[serde(default)]
    pub bounds: BoundsConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct KernelVerifyConfig {
    pub dims: Vec<usize>,
    pub centers: Vec<f64>,
    pub widths: Vec<f64>,
    pub trials: usize,
    pub samples: usize,
    /// A trial passes when `|closed - mc| <= k_sigma · stderr`.
    pub k_sigma: f64,
    /// Passing trials needed per `(d, c, h)` setting.
    pub min_passes: usize,
}

impl Default for KernelVerifyConfig {
    fn default() -> Self {
        KernelVerifyConfig {
            dims: vec![2, 5],
            centers: vec![0.0, 1.0],
            widths: vec![0.5, 1.0],
            trials: 20,
            samples: 1_000_000,
            k_sigma: 4.0,
            min_passes: 19,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TaylorVerifyConfig {
    pub p_values: Vec<f64>,
    pub n_max: usize,
    pub rel_tol: f64,
    pub widths: Vec<f64>,
    pub centers: Vec<f64>,
    pub n_terms: usize,
    pub grid_points: usize,
    pub abs_tol: f64,
}

impl Default for TaylorVerifyConfig {
    fn default() -> Self {
        TaylorVerifyConfig {
            p_values: vec![0.0, 0.5, 1.0, 2.0, 5.0],
            n_max: 16,
            rel_tol: 1e-8,
            widths: vec![0.5, 1.0],
            centers: vec![0.0, 1.0, 2.0],
            n_terms: 60,
            grid_points: 101,
            abs_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RateStudyConfig {
    pub center: f64,
    pub width: f64,
    /// Coefficient map `v(w) = v0 + b·w`; its length sets the input dimension.
    pub v0: f64,
    pub b: Vec<f64>,
    pub m_list: Vec<usize>,
    pub trials: usize,
    pub test_points: usize,
    pub slope_min: f64,
    pub slope_max: f64,
}

impl Default for RateStudyConfig {
    fn default() -> Self {
        RateStudyConfig {
            center: 0.5,
            width: 1.0,
            v0: 1.0,
            b: vec![0.6, -0.4, 0.3],
            m_list: vec![32, 64, 128, 256, 512, 1024, 2048],
            trials: 10,
            test_points: 2000,
            slope_min: -0.65,
            slope_max: -0.35,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainCompareConfig {
    pub targets: Vec<String>,
    pub dim: usize,
    pub n: usize,
    pub test_fraction: f64,
    pub mc_samples: usize,
    /// Rescale each target so that `E|f| ≈ 1`.
    pub calibrate: bool,
    pub features: usize,
    pub basis: usize,
    pub support: [f64; 2],
    /// RBF width; when absent it is `width_ratio` grid spacings.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    pub width_ratio: f64,
    pub baselines: Vec<String>,
    /// Must equal `features + basis` when given.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub baseline_width: Option<usize>,
    pub lambda1: f64,
    pub lambda2: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub adam_beta1: f64,
    pub adam_beta2: f64,
    pub adam_eps: f64,
    pub activation_points: usize,
    pub max_mse_ratio: f64,
    pub min_correlation: f64,
    /// Also write each dataset in binary and CSV form.
    pub save_data: bool,
}

impl Default for TrainCompareConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainCompareConfig {
            targets: vec!["s1".into(), "s2".into()],
            dim: 2,
            n: 6000,
            test_fraction: 0.2,
            mc_samples: 100_000,
            calibrate: true,
            features: 300,
            basis: 200,
            support: [-2.0, 2.0],
            width: None,
            width_ratio: 2.0,
            baselines: BaselineActivation::ALL.iter().map(|b| b.name().into()).collect(),
            baseline_width: None,
            lambda1: t.lambda1,
            lambda2: t.lambda2,
            learning_rate: 1e-2,
            epochs: 30,
            batch_size: 64,
            adam_beta1: t.adam_beta1,
            adam_beta2: t.adam_beta2,
            adam_eps: t.adam_eps,
            activation_points: 401,
            max_mse_ratio: 0.5,
            min_correlation: 0.9,
            save_data: false,
        }
    }
}

impl TrainCompareConfig {
    pub fn width(&self) -> f64 {
        self.width
            .unwrap_or(self.width_ratio * (self.support[1] - self.support[0]) / self.basis as f64)
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            lambda1: self.lambda1,
            lambda2: self.lambda2,
            learning_rate: self.learning_rate,
            epochs: self.epochs,
            batch_size: self.batch_size,
            seed,
            adam_beta1: self.adam_beta1,
            adam_beta2: self.adam_beta2,
            adam_eps: self.adam_eps,
        }
    }

    pub fn sigmas(&self) -> Result<Vec<Sigma>> {
        self.targets.iter().map(|t| parse_sigma(t)).collect()
    }

    pub fn baseline_activations(&self) -> Result<Vec<BaselineActivation>> {
        self.baselines
            .iter()
            .map(|b| {
                BaselineActivation::from_name(b)
                    .ok_or_else(|| Error::Config(format!("train.baselines: unknown activation `{b}`")))
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExportConfig {
    /// Trained model to export; without one the quadrature construction for
    /// `target` is exported instead.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoint: Option<PathBuf>,
    /// True activation written alongside; required without a checkpoint.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    pub basis: usize,
    pub support: [f64; 2],
    pub width: f64,
    pub points: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_correlation: Option<f64>,
}

impl Default for ExportConfig {
    fn default() -> Self {
        ExportConfig {
            checkpoint: None,
            target: Some("s1".into()),
            basis: 400,
            support: [-2.0, 2.0],
            width: 0.02,
            points: 401,
            min_correlation: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    pub h: f64,
    pub basis: usize,
    pub features: usize,
    pub delta: f64,
    pub sigma_sup: f64,
    pub support_len: f64,
    pub radius: f64,
    /// With `lipschitz`, also reports the grid needed for this accuracy.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lipschitz: Option<f64>,
    pub quadrature_targets: Vec<String>,
    pub quadrature_basis: Vec<usize>,
    pub quadrature_support: [f64; 2],
    pub quadrature_width_ratio: f64,
    pub quadrature_points: usize,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        BoundsConfig {
            h: 0.02,
            basis: 400,
            features: 1000,
            delta: 0.01,
            sigma_sup: 1.0,
            support_len: 4.0,
            radius: 2.0,
            eps: None,
            lipschitz: None,
            quadrature_targets: vec!["s1".into(), "s2".into(), "s3".into()],
            quadrature_basis: vec![100, 200, 400],
            quadrature_support: [-2.0, 2.0],
            quadrature_width_ratio: 2.0,
            quadrature_points: 2001,
        }
    }
}

pub fn parse_sigma(name: &str) -> Result<Sigma> {
    Sigma::from_name(name).ok_or_else(|| Error::Config(format!("unknown target activation `{name}` (expected s1, s2 or s3)")))
}

fn keyed(key: &str, err: Error) -> Error {
    match err {
        Error::Config(msg) => Error::Config(format!("{key}: {msg}")),
        other => other,
    }
}

fn require(cond: bool, key: &str, msg: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Config(format!("{key}: {msg}")))
    }
}

impl ExperimentConfig {
    pub fn new(mode: Mode) -> Self {
        ExperimentConfig {
            mode,
            seed: 0,
            out: None,
            kernel: Default::default(),
            taylor: Default::default(),
            rate: Default::default(),
            train: Default::default(),
            export: Default::default(),
            bounds: Default::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("configuration is always representable in TOML")
    }

    /// Checks the section used by `mode`.
    pub fn validate(&self) -> Result<()> {
        match self.mode {
            Mode::KernelVerify => {
                let k = &self.kernel;
                require(!k.dims.is_empty() && k.dims.iter().all(|&d| d >= 1), "kernel.dims", "need at least one dimension >= 1")?;
                require(!k.centers.is_empty(), "kernel.centers", "must be non-empty")?;
                require(!k.widths.is_empty(), "kernel.widths", "must be non-empty")?;
                require(k.widths.iter().all(|&h| h > 0.0), "kernel.widths", "must be positive")?;
                require(k.samples >= 2, "kernel.samples", "must be >= 2")?;
                require(k.trials >= 1, "kernel.trials", "must be >= 1")?;
                require(k.min_passes <= k.trials, "kernel.min_passes", "cannot exceed trials")?;
                require(k.k_sigma > 0.0, "kernel.k_sigma", "must be positive")?;
            }
            Mode::TaylorVerify => {
                let t = &self.taylor;
                require(t.n_max >= 2, "taylor.n_max", "must be >= 2")?;
                require(t.p_values.iter().all(|&p| p >= 0.0), "taylor.p_values", "must be >= 0")?;
                require(t.widths.iter().all(|&h| h > 0.0), "taylor.widths", "must be positive")?;
                require(t.n_terms >= 1, "taylor.n_terms", "must be >= 1")?;
                require(t.grid_points >= 2, "taylor.grid_points", "must be >= 2")?;
            }
            Mode::RateStudy => {
                let r = &self.rate;
                require(!r.b.is_empty(), "rate.b", "must be non-empty")?;
                require(r.width > 0.0, "rate.width", "must be positive")?;
                require(!r.m_list.is_empty() && r.m_list.iter().all(|&m| m >= 1), "rate.m_list", "need positive widths")?;
                require(r.trials >= 1, "rate.trials", "must be >= 1")?;
                require(r.test_points >= 1, "rate.test_points", "must be >= 1")?;
                require(r.slope_min <= r.slope_max, "rate.slope_min", "must not exceed slope_max")?;
            }
            Mode::TrainCompare => {
                let t = &self.train;
                t.sigmas().map_err(|e| keyed("train.targets", e))?;
                t.baseline_activations()?;
                require(!t.targets.is_empty(), "train.targets", "must be non-empty")?;
                require(t.dim >= 1, "train.dim", "must be >= 1")?;
                require(t.n >= 2, "train.n", "must be >= 2")?;
                require(t.test_fraction > 0.0 && t.test_fraction < 1.0, "train.test_fraction", "must lie in (0, 1)")?;
                require(t.features >= 1, "train.features", "must be >= 1")?;
                require(t.basis >= 2, "train.basis", "must be >= 2")?;
                require(t.support[0] < t.support[1], "train.support", "must be an increasing pair")?;
                require(t.width() > 0.0, "train.width", "must be positive")?;
                require(t.activation_points >= 2, "train.activation_points", "must be >= 2")?;
                if let Some(w) = t.baseline_width {
                    require(
                        w == t.features + t.basis,
                        "train.baseline_width",
                        &format!("must equal features + basis = {} to match parameter counts, got {w}", t.features + t.basis),
                    )?;
                }
                t.train_config(self.seed).validate().map_err(|e| Error::Config(format!("train: {e}")))?;
            }
            Mode::ExportActivation => {
                let e = &self.export;
                if let Some(t) = &e.target {
                    parse_sigma(t).map_err(|e| keyed("export.target", e))?;
                }
                require(e.checkpoint.is_some() || e.target.is_some(), "export.target", "required without a checkpoint")?;
                require(e.points >= 2, "export.points", "must be >= 2")?;
                require(e.support[0] < e.support[1], "export.support", "must be an increasing pair")?;
                require(e.basis >= 2, "export.basis", "must be >= 2")?;
                require(e.width > 0.0, "export.width", "must be positive")?;
            }
            Mode::Bounds => {
                let b = &self.bounds;
                for t in &b.quadrature_targets {
                    parse_sigma(t).map_err(|e| keyed("bounds.quadrature_targets", e))?;
                }
                require(b.eps.is_some() == b.lipschitz.is_some(), "bounds.eps", "eps and lipschitz must be given together")?;
                require(b.quadrature_basis.iter().all(|&n| n >= 2), "bounds.quadrature_basis", "must be >= 2")?;
                require(b.quadrature_points >= 2, "bounds.quadrature_points", "must be >= 2")?;
            }
        }
        Ok(())
    }
}
