//! The five-type simulation settings used for benchmarking: a shared
//! background intensity and one covariate, with either independent types or
//! two common latent fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::fields::{CorrelationFamily, CorrelationModel, GrfSampler};
use crate::geometry::{ScalarField, Window};
use crate::model::{FirstOrder, SimulationSpec, Theta};
use crate::real::Real;

/// Which second-order structure to simulate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    /// No common fields: the five types are independent given the background.
    Independent,
    /// Two common fields with loadings mixing positive and negative dependence.
    TwoFields,
}

impl Setting {
    pub fn q(self) -> usize {
        match self {
            Setting::Independent => 0,
            Setting::TwoFields => 2,
        }
    }
}

/// Parameters of a benchmark environment (background and covariate draw).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    pub setting: Setting,
    /// Mean level of the background intensity.
    pub rho0_level: f64,
    /// Grid cells per axis on the unit square.
    pub grid: usize,
    /// Correlation family of the simulated latent fields.
    pub family: CorrelationFamily,
    /// Seed for the background and covariate realization.
    pub environment_seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            setting: Setting::TwoFields,
            rho0_level: 400.0,
            grid: 128,
            family: CorrelationFamily::Gaussian,
            environment_seed: 2021,
        }
    }
}

pub const GAMMA: [[f64; 2]; 5] = [[0.1, -0.1], [0.2, -0.2], [0.3, 0.0], [0.4, 0.1], [0.5, 0.2]];
pub const SIGMA: f64 = 0.71;
pub const PHI: [f64; 5] = [0.02, 0.02, 0.03, 0.03, 0.04];
pub const ALPHA: [[f64; 2]; 5] = [[0.5, -1.0], [0.5, 0.0], [-1.0, 0.0], [0.0, 0.5], [0.0, 0.5]];
pub const XI: [f64; 2] = [0.02, 0.03];
const COVARIATE_SCALE: f64 = 0.05;
const BACKGROUND_SCALE: f64 = 0.2;
const BACKGROUND_SD: f64 = 0.5;

/// True second-order parameters of a setting.
pub fn true_theta<T: Real>(setting: Setting) -> Theta<T> {
    let of = |v: &[f64]| v.iter().map(|&x| T::of(x)).collect::<Vec<T>>();
    let sigma2 = vec![T::of(SIGMA * SIGMA); 5];
    match setting {
        Setting::Independent => Theta { alpha: vec![Vec::new(); 5], xi: Vec::new(), sigma2, phi: of(&PHI) },
        Setting::TwoFields => Theta { alpha: ALPHA.iter().map(|r| of(r)).collect(), xi: of(&XI), sigma2, phi: of(&PHI) },
    }
}

/// A fixed background and covariate realization plus the true parameters.
/// Individual replicates differ only in `SimulationSpec::seed`.
pub fn build<T: Real>(cfg: &ScenarioConfig) -> Result<SimulationSpec<T>> {
    let w = Window::<T>::unit();
    let n = cfg.grid;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.environment_seed);
    let (sv, sz): (u64, u64) = (rng.random(), rng.random());
    let v = GrfSampler::new(w, n, n, CorrelationModel::gaussian(T::of(BACKGROUND_SCALE))?)?.sample(sv)?;
    let z = GrfSampler::new(w, n, n, CorrelationModel::exponential(T::of(COVARIATE_SCALE))?)?.sample(sz)?;
    let (level, sd) = (T::of(cfg.rho0_level), T::of(BACKGROUND_SD));
    let rho0 = v.map(|x| level * (sd * x - sd * sd / T::of(2.0)).exp())?;
    let gamma = FirstOrder::new(
        GAMMA.iter().map(|r| vec![T::of(r[0]), T::of(r[1])]).collect(),
        vec![z],
        None,
    )?;
    Ok(SimulationSpec { rho0, gamma, theta: true_theta(cfg.setting), family: cfg.family, seed: 0 })
}

/// The covariate field of a built scenario.
pub fn covariate<T: Real>(spec: &SimulationSpec<T>) -> &ScalarField<T> {
    &spec.gamma.covariates[0]
}
