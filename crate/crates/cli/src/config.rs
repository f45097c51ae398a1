//! Run configuration read from TOML.

use std::path::{Path, PathBuf};

use mlgcp::fields::CorrelationFamily;
use mlgcp::model::Theta;
use mlgcp::optimizer::OptimizerConfig;
use mlgcp::scenario::{true_theta, ScenarioConfig, Setting};
use mlgcp::selection::CvConfig;
use mlgcp::study::StudyConfig;
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Config {
    pub seed: Option<u64>,
    #[serde(default)]
    pub data: DataConfig,
    pub scenario: Option<ScenarioConfig>,
    #[serde(default)]
    pub fit: FitConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub cv: CvSection,
    #[serde(default)]
    pub assess: AssessConfig,
    pub truth: Option<TruthConfig>,
    pub study: Option<StudyConfig>,
}

/// How to read an observed pattern and its covariates.
#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DataConfig {
    /// `[x0, y0, x1, y1]`.
    pub window: [f64; 4],
    /// Declared number of types; the largest label when absent.
    pub n_types: Option<usize>,
    /// Covariate rasters, relative to the configuration file.
    pub covariates: Vec<PathBuf>,
    /// 1-based baseline type of the first-order contrasts; the last type when absent.
    pub baseline: Option<usize>,
}

impl Default for DataConfig {
    fn default() -> Self {
        Self { window: [0.0, 0.0, 1.0, 1.0], n_types: None, covariates: Vec::new(), baseline: None }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FitConfig {
    pub r_max: f64,
    pub q: usize,
    pub lambda: f64,
    /// Number of lags in curve output, evenly spaced up to `r_max`.
    pub n_lags: usize,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { r_max: 0.1, q: 0, lambda: 0.0, n_lags: 100 }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CvSection {
    pub q_grid: Vec<usize>,
    pub lambda_grid: Vec<f64>,
    pub k: usize,
    pub l: usize,
    pub fold_max_outer: usize,
}

impl Default for CvSection {
    fn default() -> Self {
        let d = CvConfig::default();
        Self {
            q_grid: (0..=5).collect(),
            lambda_grid: vec![0.0, 0.25, 0.5, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 8.0, 10.0],
            k: d.k,
            l: d.l,
            fold_max_outer: d.fold_max_outer,
        }
    }
}

impl CvSection {
    pub fn cv_config(&self, seed: u64) -> CvConfig {
        CvConfig { k: self.k, l: self.l, seed, init_seed: seed, fold_max_outer: self.fold_max_outer }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssessConfig {
    /// Ratios `g_ij / g_lk` as `[[i, j], [l, k]]` with 1-based types; every
    /// `g_ij / g_ii` with `i < j` when empty.
    pub ratios: Vec<[[usize; 2]; 2]>,
    pub n_sim: usize,
    pub level: f64,
    /// Pair-distance smoothing bandwidth; a rule of thumb when absent.
    pub pcf_bandwidth: Option<f64>,
    /// Candidate background bandwidths; a default grid when empty.
    pub bandwidth_grid: Vec<f64>,
    /// Grid cells per axis of the background estimate.
    pub intensity_grid: usize,
    pub n_lags: usize,
}

impl Default for AssessConfig {
    fn default() -> Self {
        Self {
            ratios: Vec::new(),
            n_sim: 99,
            level: 0.05,
            pcf_bandwidth: None,
            bandwidth_grid: Vec::new(),
            intensity_grid: 64,
            n_lags: 46,
        }
    }
}

/// True second-order structure for error reporting: either a benchmark
/// setting or explicit parameters.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TruthConfig {
    pub setting: Option<Setting>,
    pub theta: Option<Theta<f64>>,
    #[serde(default = "exponential")]
    pub family: CorrelationFamily,
}

fn exponential() -> CorrelationFamily {
    CorrelationFamily::Exponential
}

impl TruthConfig {
    pub fn theta(&self) -> Result<Theta<f64>, CliError> {
        match (&self.setting, &self.theta) {
            (Some(s), None) => Ok(true_theta(*s)),
            (None, Some(t)) => {
                t.validate().map_err(|e| CliError::Usage(format!("[truth] {e}")))?;
                Ok(t.clone())
            }
            _ => Err(CliError::Usage("[truth] needs exactly one of `setting` or `theta`".into())),
        }
    }
}

/// A parsed configuration with its raw bytes and location.
pub struct Loaded {
    pub config: Config,
    pub bytes: Vec<u8>,
    pub dir: PathBuf,
}

pub fn load(path: &Path) -> Result<Loaded, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let text = std::str::from_utf8(&bytes).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let config: Config = toml::from_str(text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(Loaded { config, bytes, dir })
}
