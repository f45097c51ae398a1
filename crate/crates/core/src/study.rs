//! Replicated simulation study comparing second-order estimates against the
//! truth: the composite-likelihood fit chosen by cross-validation and two
//! kernel baselines.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::fields::CorrelationFamily;
use crate::first_order::estimate_beta;
use crate::geometry::{PointPattern, ScalarField};
use crate::likelihood::LikelihoodContext;
use crate::model::{simulate_mlgcp, FirstOrder, SimulationSpec};
use crate::nonparam::{
    default_bandwidth_grid, diggle_rho0_minus_i, kernel_intensity, mise_grid, nonparam_pcf_all, pcf_curves, select_bandwidth,
    integrated_squared_error,
};
use crate::optimizer::OptimizerConfig;
use crate::scenario::{build, ScenarioConfig};
use crate::selection::{select_q_lambda, CvConfig};

/// Estimators compared by a study.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Composite-likelihood fit with `(q, lambda)` chosen by the MIN rule.
    Semiparametric,
    /// Composite-likelihood fit with `q` chosen by the one-standard-error rule.
    OneSe,
    /// Kernel pair correlation with per-type kernel intensities.
    Simple,
    /// Kernel pair correlation with leave-one-type-out background intensities.
    Diggle,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Semiparametric => "semiparametric",
            Method::OneSe => "onese",
            Method::Simple => "simple",
            Method::Diggle => "diggle",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StudyConfig {
    pub scenario: ScenarioConfig,
    pub n_replicates: usize,
    /// Master seed; replicate seeds are derived from it.
    pub seed: u64,
    pub methods: Vec<Method>,
    /// Pair interaction range of the composite likelihood.
    pub r_max: f64,
    pub q_grid: Vec<usize>,
    pub lambda_grid: Vec<f64>,
    pub cv: CvConfig,
    pub optimizer: OptimizerConfig,
    /// Candidate bandwidths for the background estimate; a default grid
    /// scaled to the window when empty.
    pub bandwidth_grid: Vec<f64>,
    /// Intensity bandwidth of the simple method; the selected background
    /// bandwidth when absent.
    pub intensity_bandwidth: Option<f64>,
    /// Pair-distance smoothing bandwidth of the kernel estimators.
    pub pcf_bandwidth: f64,
    /// Grid cells per axis of kernel intensity estimates.
    pub intensity_grid: usize,
    /// Number of lags in the error grid.
    pub n_lags: usize,
}

impl Default for StudyConfig {
    fn default() -> Self {
        Self {
            scenario: ScenarioConfig::default(),
            n_replicates: 20,
            seed: 1,
            methods: vec![Method::Semiparametric, Method::OneSe, Method::Simple, Method::Diggle],
            r_max: 0.1,
            q_grid: (0..=5).collect(),
            lambda_grid: vec![0.0, 1.0, 4.0, 16.0],
            cv: CvConfig::default(),
            optimizer: OptimizerConfig::default(),
            bandwidth_grid: Vec::new(),
            intensity_bandwidth: None,
            pcf_bandwidth: 0.01,
            intensity_grid: 64,
            n_lags: 46,
        }
    }
}

impl StudyConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_replicates == 0 {
            return invalid("n_replicates must be positive");
        }
        if self.methods.is_empty() {
            return invalid("at least one method is required");
        }
        if !(self.r_max > 0.0) || !(self.pcf_bandwidth > 0.0) {
            return invalid("r_max and pcf_bandwidth must be positive");
        }
        if self.intensity_bandwidth.is_some_and(|b| !(b > 0.0)) {
            return invalid("intensity_bandwidth must be positive");
        }
        if self.bandwidth_grid.iter().any(|&b| !(b > 0.0)) {
            return invalid("bandwidths must be positive");
        }
        if self.intensity_grid < 2 || self.n_lags < 2 {
            return invalid("intensity_grid and n_lags must be at least 2");
        }
        self.cv.validate()?;
        self.optimizer.validate()
    }

    /// Seed of replicate `rep`.
    pub fn replicate_seed(&self, rep: usize) -> u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut s = 0;
        for _ in 0..=rep {
            s = rng.random();
        }
        s
    }
}

/// Integrated squared errors of one method on one replicate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Errors {
    pub within: f64,
    pub between: f64,
    pub total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub replicate: usize,
    pub seed: u64,
    pub n_points: usize,
    pub q_min: Option<usize>,
    pub q_1se: Option<usize>,
    pub lambda: Option<f64>,
    pub bandwidth: Option<f64>,
    pub errors: Vec<(Method, Errors)>,
}

impl ReplicateOutcome {
    pub fn error(&self, method: Method) -> Option<Errors> {
        self.errors.iter().find(|(m, _)| *m == method).map(|(_, e)| *e)
    }
}

/// Averages per method over all replicates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    pub mise_within: f64,
    pub mise_between: f64,
    pub mise_total: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyResult {
    pub replicates: Vec<ReplicateOutcome>,
    pub summary: Vec<MethodSummary>,
}

fn errors(est: &[Vec<Vec<f64>>], truth: &[Vec<Vec<f64>>], r: &[f64]) -> Errors {
    let p = truth.len();
    let (mut within, mut between) = (0.0, 0.0);
    for i in 0..p {
        for j in i..p {
            let e = integrated_squared_error(&est[i][j], &truth[i][j], r);
            if i == j {
                within += e;
            } else {
                between += e;
            }
        }
    }
    Errors { within, between, total: within + between }
}

/// Type-specific intensities `rho0(u) f_i(u)` from a background estimate.
fn type_intensities(rho0: &[ScalarField<f64>], beta: &FirstOrder<f64>) -> Result<Vec<ScalarField<f64>>> {
    rho0.iter()
        .enumerate()
        .map(|(i, r)| {
            let mut vals = r.values().to_vec();
            for (k, v) in vals.iter_mut().enumerate() {
                let (x, y) = r.cell_center(k % r.nx(), k / r.nx());
                *v *= beta.log_f(&beta.covariates_at(x, y))[i].exp();
            }
            ScalarField::new(*r.window(), r.nx(), r.ny(), vals)
        })
        .collect()
}

/// Runs one replicate of the study on an already built scenario.
pub fn run_replicate(cfg: &StudyConfig, spec: &SimulationSpec<f64>, rep: usize) -> Result<ReplicateOutcome> {
    let seed = cfg.replicate_seed(rep);
    let pattern = simulate_mlgcp(&SimulationSpec { seed, ..spec.clone() })?;
    let p = pattern.n_types();
    let r = mise_grid::<f64>(cfg.n_lags);
    let truth = pcf_curves(&spec.theta, spec.family, &r)?;
    let beta = estimate_beta(&pattern, &spec.gamma.covariates, p - 1)?;
    let mut out = ReplicateOutcome {
        replicate: rep,
        seed,
        n_points: pattern.len(),
        q_min: None,
        q_1se: None,
        lambda: None,
        bandwidth: None,
        errors: Vec::new(),
    };
    let wants = |m: Method| cfg.methods.contains(&m);
    if wants(Method::Semiparametric) || wants(Method::OneSe) {
        let ctx = LikelihoodContext::new(&pattern, beta.clone(), cfg.r_max)?;
        let cv = CvConfig { seed: cfg.cv.seed ^ seed, ..cfg.cv };
        let sel = select_q_lambda(&ctx, &cfg.q_grid, &cfg.lambda_grid, &cv, &cfg.optimizer)?;
        out.q_min = Some(sel.q_min);
        out.q_1se = Some(sel.q_1se);
        out.lambda = Some(sel.lambda_star);
        let exp = CorrelationFamily::Exponential;
        if wants(Method::Semiparametric) {
            out.errors.push((Method::Semiparametric, errors(&pcf_curves(&sel.fit.theta, exp, &r)?, &truth, &r)));
        }
        if wants(Method::OneSe) {
            out.errors.push((Method::OneSe, errors(&pcf_curves(&sel.fit_1se.theta, exp, &r)?, &truth, &r)));
        }
    }
    if wants(Method::Simple) || wants(Method::Diggle) {
        let grid = if cfg.bandwidth_grid.is_empty() {
            default_bandwidth_grid(pattern.window(), 12)
        } else {
            cfg.bandwidth_grid.clone()
        };
        let b = select_bandwidth(&pattern, &beta, &grid)?.b;
        out.bandwidth = Some(b);
        let n = cfg.intensity_grid;
        let h = cfg.pcf_bandwidth;
        if wants(Method::Simple) {
            let bi = cfg.intensity_bandwidth.unwrap_or(b);
            let lam = (0..p)
                .map(|i| kernel_intensity(&pattern.of_type(i)?, bi, n, n))
                .collect::<Result<Vec<_>>>()?;
            out.errors.push((Method::Simple, errors(&nonparam_pcf_all(&pattern, &lam, &r, h)?, &truth, &r)));
        }
        if wants(Method::Diggle) {
            let rho = (0..p)
                .map(|i| diggle_rho0_minus_i(&pattern, &beta, b, i, n, n))
                .collect::<Result<Vec<_>>>()?;
            let lam = type_intensities(&rho, &beta)?;
            out.errors.push((Method::Diggle, errors(&nonparam_pcf_all(&pattern, &lam, &r, h)?, &truth, &r)));
        }
    }
    Ok(out)
}

/// Runs all replicates concurrently and aggregates the errors.
pub fn run_study(cfg: &StudyConfig) -> Result<StudyResult> {
    cfg.validate()?;
    let spec = build::<f64>(&cfg.scenario)?;
    let replicates = (0..cfg.n_replicates)
        .into_par_iter()
        .map(|rep| run_replicate(cfg, &spec, rep))
        .collect::<Result<Vec<_>>>()?;
    Ok(StudyResult { summary: summarize(&cfg.methods, &replicates), replicates })
}

pub fn summarize(methods: &[Method], replicates: &[ReplicateOutcome]) -> Vec<MethodSummary> {
    methods
        .iter()
        .map(|&method| {
            let errs: Vec<Errors> = replicates.iter().filter_map(|o| o.error(method)).collect();
            let n = errs.len().max(1) as f64;
            MethodSummary {
                method,
                mise_within: errs.iter().map(|e| e.within).sum::<f64>() / n,
                mise_between: errs.iter().map(|e| e.between).sum::<f64>() / n,
                mise_total: errs.iter().map(|e| e.total).sum::<f64>() / n,
            }
        })
        .collect()
}

/// Pattern of replicate `rep`, for inspection outside a study.
pub fn replicate_pattern(cfg: &StudyConfig, spec: &SimulationSpec<f64>, rep: usize) -> Result<PointPattern<f64>> {
    simulate_mlgcp(&SimulationSpec { seed: cfg.replicate_seed(rep), ..spec.clone() })
}
