use std::io::Write;
use std::path::Path;

use log::info;
use mlgcp::fields::CorrelationFamily;
use mlgcp::first_order::estimate_beta;
use mlgcp::geometry::{PointPattern, Window};
use mlgcp::io::{read_pattern, read_raster, write_columns, write_pattern, write_raster};
use mlgcp::likelihood::LikelihoodContext;
use mlgcp::model::{simulate_mlgcp, FirstOrder, Theta};
use mlgcp::nonparam::{
    default_bandwidth_grid, envelope_test, estimate_rho0, integrated_squared_error, mise_grid, pcf_curves,
    pcf_ratios_nonparam, select_bandwidth, silverman_bandwidth, EnvelopeConfig,
};
use mlgcp::optimizer::{fit_penalized, FitResult, Init};
use mlgcp::scenario::{build, covariate};
use mlgcp::selection::select_q_lambda;
use mlgcp::study::run_study;
use serde::{Deserialize, Serialize};

use crate::config::{Config, Loaded};
use crate::error::CliError;
use crate::output::{create, write_json, Manifest};
use crate::Common;

fn seed(cfg: &Config, common: &Common) -> Result<u64, CliError> {
    common
        .seed
        .or(cfg.seed)
        .ok_or_else(|| CliError::Usage("a seed is required: set `seed` in the configuration or pass --seed".into()))
}

fn finish(out: &Path, mut manifest: Manifest, files: &[&str]) -> Result<(), CliError> {
    manifest.outputs = files.iter().map(|s| s.to_string()).collect();
    write_json(out, "manifest.json", &manifest)
}

/// Column names `g_i_j` (1-based) and values for every `i <= j`.
fn curve_columns(r: &[f64], curves: &[Vec<Vec<f64>>]) -> (Vec<String>, Vec<Vec<Option<f64>>>) {
    let mut names = vec!["r".to_string()];
    let mut cols = vec![r.iter().map(|&v| Some(v)).collect::<Vec<_>>()];
    for (i, row) in curves.iter().enumerate() {
        for (j, c) in row.iter().enumerate().skip(i) {
            names.push(format!("g_{}_{}", i + 1, j + 1));
            cols.push(c.iter().map(|&v| Some(v)).collect());
        }
    }
    (names, cols)
}

fn write_curves(out: &Path, name: &str, r: &[f64], curves: &[Vec<Vec<f64>>]) -> Result<(), CliError> {
    let (names, cols) = curve_columns(r, curves);
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    write_columns(create(out, name)?, &refs, &cols)?;
    Ok(())
}

pub fn simulate(loaded: &Loaded, common: &Common) -> Result<(), CliError> {
    let cfg = &loaded.config;
    let seed = seed(cfg, common)?;
    let scenario = cfg.scenario.ok_or_else(|| CliError::Usage("simulate needs a [scenario] section".into()))?;
    let mut spec = build::<f64>(&scenario)?;
    spec.seed = seed;
    let pattern = simulate_mlgcp(&spec)?;
    info!("simulated {} points", pattern.len());
    let out = &common.out;
    write_pattern(create(out, "pattern.csv")?, &pattern)?;
    write_raster(create(out, "rho0.csv")?, &spec.rho0)?;
    write_raster(create(out, "covariate.csv")?, covariate(&spec))?;
    let r = mise_grid::<f64>(46);
    write_curves(out, "true_pcf.csv", &r, &pcf_curves(&spec.theta, spec.family, &r)?)?;
    write_json(out, "truth.json", &spec.theta)?;
    let mut m = Manifest::new("simulate", &loaded.bytes, seed);
    m.grids.insert("field", scenario.grid);
    finish(out, m, &["pattern.csv", "rho0.csv", "covariate.csv", "true_pcf.csv", "truth.json"])
}

struct Data {
    pattern: PointPattern<f64>,
    beta: FirstOrder<f64>,
}

fn load_data(loaded: &Loaded, manifest: &mut Manifest, pattern_path: &Path) -> Result<Data, CliError> {
    let d = &loaded.config.data;
    let [x0, y0, x1, y1] = d.window;
    let window = Window::new(x0, y0, x1, y1).map_err(|e| CliError::Usage(format!("[data] window: {e}")))?;
    let bytes = manifest.input(pattern_path)?;
    let pattern = read_pattern(bytes.as_slice(), window, d.n_types)
        .map_err(|e| CliError::Io(format!("{}: {e}", pattern_path.display())))?;
    let mut covariates = Vec::new();
    for rel in &d.covariates {
        let path = loaded.dir.join(rel);
        let bytes = manifest.input(&path)?;
        covariates.push(read_raster(bytes.as_slice()).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?);
    }
    let p = pattern.n_types();
    let baseline = match d.baseline {
        None => p - 1,
        Some(b) if (1..=p).contains(&b) => b - 1,
        Some(b) => return Err(CliError::Usage(format!("[data] baseline {b} is not a type in 1..={p}"))),
    };
    let beta = estimate_beta(&pattern, &covariates, baseline)?;
    Ok(Data { pattern, beta })
}

/// Written by `fit`, read back by `assess`.
#[derive(Serialize, Deserialize)]
pub struct FitArtifact {
    pub n_points: usize,
    pub n_pair_entries: usize,
    pub r_max: f64,
    pub q: usize,
    pub beta: Vec<Vec<f64>>,
    pub fit: FitResult<f64>,
}

fn lags(r_max: f64, n: usize) -> Vec<f64> {
    let n = n.max(2);
    (1..=n).map(|k| r_max * k as f64 / n as f64).collect()
}

pub fn fit(loaded: &Loaded, common: &Common, pattern_path: &Path) -> Result<(), CliError> {
    let cfg = &loaded.config;
    let seed = seed(cfg, common)?;
    let mut m = Manifest::new("fit", &loaded.bytes, seed);
    let data = load_data(loaded, &mut m, pattern_path)?;
    let f = &cfg.fit;
    let ctx = LikelihoodContext::new(&data.pattern, data.beta.clone(), f.r_max)?;
    let length = data.pattern.window().shorter_side();
    let result = fit_penalized(&ctx, f.q, &cfg.optimizer, f.lambda, Init::Seed(seed), length)?;
    if !result.converged {
        log::warn!("optimizer stopped after {} iterations without converging", result.iterations);
    }
    let out = &common.out;
    let r = lags(f.r_max, f.n_lags);
    write_curves(out, "curves.csv", &r, &pcf_curves(&result.theta, CorrelationFamily::Exponential, &r)?)?;
    let artifact = FitArtifact {
        n_points: data.pattern.len(),
        n_pair_entries: ctx.pair_index().len(),
        r_max: f.r_max,
        q: f.q,
        beta: data.beta.beta.clone(),
        fit: result,
    };
    write_json(out, "fit.json", &artifact)?;
    m.r_max = Some(f.r_max);
    m.grids.insert("lags", r.len());
    finish(out, m, &["fit.json", "curves.csv"])
}

pub fn cv(loaded: &Loaded, common: &Common, pattern_path: &Path) -> Result<(), CliError> {
    let cfg = &loaded.config;
    let seed = seed(cfg, common)?;
    let mut m = Manifest::new("cv", &loaded.bytes, seed);
    let data = load_data(loaded, &mut m, pattern_path)?;
    let ctx = LikelihoodContext::new(&data.pattern, data.beta.clone(), cfg.fit.r_max)?;
    let cvc = cfg.cv.cv_config(seed);
    cvc.validate()?;
    let res = select_q_lambda(&ctx, &cfg.cv.q_grid, &cfg.cv.lambda_grid, &cvc, &cfg.optimizer)?;
    let out = &common.out;
    let table = |points: &[mlgcp::selection::CvPoint<f64>], key: &str, name: &str| -> Result<(), CliError> {
        let keys = points.iter().map(|c| Some(if key == "q" { c.q as f64 } else { c.lambda })).collect();
        let means = points.iter().map(|c| Some(c.mean)).collect();
        let ses = points.iter().map(|c| Some(c.se)).collect();
        write_columns(create(out, name)?, &[key, "mean", "se"], &[keys, means, ses])?;
        Ok(())
    };
    table(&res.q_scores, "q", "cv_q.csv")?;
    table(&res.lambda_scores, "lambda", "cv_lambda.csv")?;
    write_json(out, "cv.json", &res)?;
    m.r_max = Some(cfg.fit.r_max);
    finish(out, m, &["cv.json", "cv_q.csv", "cv_lambda.csv"])
}

#[derive(Serialize)]
struct MiseReport {
    within: f64,
    between: f64,
    total: f64,
}

#[derive(Serialize)]
struct AssessReport {
    bandwidth: f64,
    omega: f64,
    w: f64,
    envelope: mlgcp::nonparam::EnvelopeResult<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    mise: Option<MiseReport>,
}

pub fn assess(loaded: &Loaded, common: &Common, pattern_path: &Path, fit_path: &Path) -> Result<(), CliError> {
    let cfg = &loaded.config;
    let a = &cfg.assess;
    let seed = seed(cfg, common)?;
    let mut m = Manifest::new("assess", &loaded.bytes, seed);
    let data = load_data(loaded, &mut m, pattern_path)?;
    let fit_bytes = m.input(fit_path)?;
    let artifact: FitArtifact = serde_json::from_slice(&fit_bytes)
        .map_err(|e| CliError::Io(format!("{}: {e}", fit_path.display())))?;
    let theta: Theta<f64> = artifact.fit.theta;
    let p = data.pattern.n_types();
    if theta.p() != p {
        return Err(CliError::Usage(format!("the fit has {} types but the pattern has {p}", theta.p())));
    }
    let ratios: Vec<((usize, usize), (usize, usize))> = if a.ratios.is_empty() {
        (0..p).flat_map(|i| ((i + 1)..p).map(move |j| ((i, j), (i, i)))).collect()
    } else {
        let mut v = Vec::new();
        for [[i, j], [l, k]] in &a.ratios {
            if [i, j, l, k].iter().any(|&&t| t == 0 || t > p) {
                return Err(CliError::Usage(format!("[assess] ratio types must lie in 1..={p}")));
            }
            v.push(((i - 1, j - 1), (l - 1, k - 1)));
        }
        v
    };
    if ratios.is_empty() {
        return Err(CliError::Usage("[assess] no ratios to assess".into()));
    }
    let grid = if a.bandwidth_grid.is_empty() {
        default_bandwidth_grid(data.pattern.window(), 12)
    } else {
        a.bandwidth_grid.clone()
    };
    let choice = select_bandwidth(&data.pattern, &data.beta, &grid)?;
    let n = a.intensity_grid;
    let rho0 = estimate_rho0(&data.pattern, &data.beta, choice.b, n, n)?;
    let r = mise_grid::<f64>(a.n_lags);
    let h = match a.pcf_bandwidth {
        Some(h) => h,
        None => silverman_bandwidth(&data.pattern, r[r.len() - 1])?,
    };
    let env_cfg = EnvelopeConfig { n_sim: a.n_sim, level: a.level, bandwidth: Some(h), seed };
    let envelope = envelope_test(&data.pattern, &theta, &data.beta, &rho0, &ratios, &r, &env_cfg)?;
    let nonparam = pcf_ratios_nonparam(&data.pattern, &data.beta, &ratios, &r, h)?;
    let mut names = vec!["r".to_string()];
    let mut cols: Vec<Vec<Option<f64>>> = vec![r.iter().map(|&v| Some(v)).collect()];
    for ((band, np), &((i, j), (l, k))) in envelope.bands.iter().zip(&nonparam).zip(&ratios) {
        let tag = format!("{}_{}_over_{}_{}", i + 1, j + 1, l + 1, k + 1);
        let model: Vec<Option<f64>> = r
            .iter()
            .map(|&x| Ok(Some(theta.pcf_with_family(CorrelationFamily::Exponential, i, j, x)? / theta.pcf_with_family(CorrelationFamily::Exponential, l, k, x)?)))
            .collect::<Result<_, mlgcp::Error>>()?;
        for (prefix, col) in [
            ("model", model),
            ("nonparam", np.clone()),
            ("difference", band.observed.iter().map(|&v| Some(v)).collect()),
            ("lo", band.lo.iter().map(|&v| Some(v)).collect()),
            ("hi", band.hi.iter().map(|&v| Some(v)).collect()),
        ] {
            names.push(format!("{prefix}_{tag}"));
            cols.push(col);
        }
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let out = &common.out;
    write_columns(create(out, "ratios.csv")?, &refs, &cols)?;
    let mise = match &cfg.truth {
        None => None,
        Some(t) => {
            let truth_theta = t.theta()?;
            if truth_theta.p() != p {
                return Err(CliError::Usage("[truth] has the wrong number of types".into()));
            }
            let truth = pcf_curves(&truth_theta, t.family, &r)?;
            let est = pcf_curves(&theta, CorrelationFamily::Exponential, &r)?;
            let (mut within, mut between) = (0.0, 0.0);
            for i in 0..p {
                for j in i..p {
                    let e = integrated_squared_error(&est[i][j], &truth[i][j], &r);
                    if i == j {
                        within += e;
                    } else {
                        between += e;
                    }
                }
            }
            Some(MiseReport { within, between, total: within + between })
        }
    };
    let report = AssessReport { bandwidth: choice.b, omega: choice.omega, w: choice.w, envelope, mise };
    write_json(out, "assess.json", &report)?;
    m.grids.insert("intensity", n);
    m.grids.insert("lags", r.len());
    finish(out, m, &["assess.json", "ratios.csv"])
}

pub fn bench(loaded: &Loaded, common: &Common) -> Result<(), CliError> {
    let cfg = &loaded.config;
    let seed = seed(cfg, common)?;
    let mut study = cfg.study.clone().ok_or_else(|| CliError::Usage("bench needs a [study] section".into()))?;
    study.seed = seed;
    let res = run_study(&study)?;
    let out = &common.out;
    let mut w = create(out, "mise_table.csv")?;
    writeln!(w, "method,mise_within,mise_between,mise_total")?;
    for s in &res.summary {
        writeln!(w, "{},{},{},{}", s.method.name(), s.mise_within, s.mise_between, s.mise_total)?;
    }
    w.flush()?;
    let mut w = create(out, "replicates.csv")?;
    let mut header = "replicate,seed,n_points,q_min,q_1se,lambda,bandwidth".to_string();
    for mth in &study.methods {
        header += &format!(",{}_total", mth.name());
    }
    writeln!(w, "{header}")?;
    let na = |v: Option<String>| v.unwrap_or_else(|| "NA".into());
    for o in &res.replicates {
        let mut line = format!(
            "{},{},{},{},{},{},{}",
            o.replicate,
            o.seed,
            o.n_points,
            na(o.q_min.map(|v| v.to_string())),
            na(o.q_1se.map(|v| v.to_string())),
            na(o.lambda.map(|v| v.to_string())),
            na(o.bandwidth.map(|v| v.to_string())),
        );
        for mth in &study.methods {
            line += &format!(",{}", na(o.error(*mth).map(|e| e.total.to_string())));
        }
        writeln!(w, "{line}")?;
    }
    w.flush()?;
    write_json(out, "study.json", &res)?;
    let mut m = Manifest::new("bench", &loaded.bytes, seed);
    m.r_max = Some(study.r_max);
    m.grids.insert("field", study.scenario.grid);
    m.grids.insert("intensity", study.intensity_grid);
    m.grids.insert("lags", study.n_lags);
    finish(out, m, &["mise_table.csv", "replicates.csv", "study.json"])
}
