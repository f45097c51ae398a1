//! Acceptance criteria. Each test prints one `criterion NN PASS|FAIL` line
//! with the measured quantities, then asserts.

use std::io::Write;

use mlgcp::fields::{CorrelationFamily, CorrelationModel, GrfSampler};
use mlgcp::first_order::estimate_beta;
use mlgcp::geometry::{enumerate_pairs, Point, PointPattern, ScalarField, Window};
use mlgcp::likelihood::{estimated_hessian, get_block, neg_log_cl, score, set_block, Block, LikelihoodContext};
use mlgcp::model::{simulate_mlgcp, FirstOrder, SimulationSpec, Theta};
use mlgcp::nonparam::{default_bandwidth_grid, envelope_test, mise_grid, select_bandwidth, EnvelopeConfig};
use mlgcp::optimizer::{fit, fit_lasso, soft_threshold, FitResult, Init, OptimizerConfig};
use mlgcp::scenario::{ScenarioConfig, Setting};
use mlgcp::selection::{select_lambda, select_q, CvConfig, Rule};
use mlgcp::study::{run_study, Method, StudyConfig};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, Poisson};

fn report(n: u32, name: &str, pass: bool, detail: String) {
    // Written to the stdout handle directly so the line survives test output capture.
    let line = format!("criterion {n:02} {} {name}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stdout().lock().write_all(line.as_bytes());
    assert!(pass, "criterion {n} ({name}) failed: {detail}");
}

fn uniform_pattern(rng: &mut ChaCha8Rng, n: usize, p: usize) -> PointPattern<f64> {
    let pts = (0..n)
        .map(|_| Point { x: rng.random(), y: rng.random(), ty: rng.random_range(0..p) })
        .collect();
    PointPattern::new(Window::unit(), p, pts).unwrap()
}

fn random_theta(rng: &mut ChaCha8Rng, p: usize, q: usize) -> Theta<f64> {
    let nrm = Normal::new(0.0, 0.7).unwrap();
    Theta::new(
        (0..p).map(|_| (0..q).map(|_| nrm.sample(rng)).collect()).collect(),
        (0..q).map(|_| rng.random_range(0.01..0.05)).collect(),
        (0..p).map(|_| rng.random_range(0.2..1.0)).collect(),
        (0..p).map(|_| rng.random_range(0.01..0.05)).collect(),
    )
    .unwrap()
}

fn intercepts(rng: &mut ChaCha8Rng, p: usize) -> FirstOrder<f64> {
    FirstOrder::new((0..p).map(|_| vec![rng.random_range(-0.5..0.5)]).collect(), Vec::new(), None).unwrap()
}

/// Direct evaluation of `log g_ij(r)` for exponential correlations.
fn log_g(t: &Theta<f64>, i: usize, j: usize, r: f64) -> f64 {
    let mut v = 0.0;
    for k in 0..t.q() {
        v += t.alpha[i][k] * t.alpha[j][k] * (-r / t.xi[k]).exp();
    }
    if i == j {
        v += t.sigma2[i] * (-r / t.phi[i]).exp();
    }
    v
}

/// Type-label probabilities of an ordered pair, computed from scratch.
fn naive_probs(fo: &FirstOrder<f64>, t: &Theta<f64>, u: &Point<f64>, v: &Point<f64>, r: f64) -> Vec<Vec<f64>> {
    let p = t.p();
    let (fu, fv) = (fo.log_f(&fo.covariates_at(u.x, u.y)), fo.log_f(&fo.covariates_at(v.x, v.y)));
    let w: Vec<Vec<f64>> = (0..p).map(|a| (0..p).map(|b| (fu[a] + fv[b] + log_g(t, a, b, r)).exp()).collect()).collect();
    let total: f64 = w.iter().flatten().sum();
    w.into_iter().map(|row| row.into_iter().map(|x| x / total).collect()).collect()
}

/// Gradient of `log g_ab(r)` in one block, written out by hand.
fn grad_log_g(t: &Theta<f64>, block: Block, a: usize, b: usize, r: f64) -> Vec<f64> {
    let (p, q) = (t.p(), t.q());
    match block {
        Block::Alpha => {
            let mut g = vec![0.0; p * q];
            for k in 0..q {
                let e = (-r / t.xi[k]).exp();
                g[k * p + a] += t.alpha[b][k] * e;
                g[k * p + b] += t.alpha[a][k] * e;
            }
            g
        }
        Block::Xi => (0..q).map(|k| t.alpha[a][k] * t.alpha[b][k] * (-r / t.xi[k]).exp() * r / (t.xi[k] * t.xi[k])).collect(),
        Block::Sigma2 => (0..p).map(|m| if a == b && a == m { (-r / t.phi[m]).exp() } else { 0.0 }).collect(),
        Block::Phi => (0..p)
            .map(|m| if a == b && a == m { t.sigma2[m] * (-r / t.phi[m]).exp() * r / (t.phi[m] * t.phi[m]) } else { 0.0 })
            .collect(),
    }
}

fn brute_force_pairs(pat: &PointPattern<f64>, r_max: f64) -> Vec<(usize, usize, f64)> {
    let pts = pat.points();
    let mut out = Vec::new();
    for a in 0..pts.len() {
        for b in 0..pts.len() {
            if a == b {
                continue;
            }
            let r = ((pts[a].x - pts[b].x).powi(2) + (pts[a].y - pts[b].y).powi(2)).sqrt();
            if r > 0.0 && r <= r_max {
                out.push((a, b, r));
            }
        }
    }
    out
}

#[test]
fn criterion_01_score_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let h = 1e-6;
    let mut worst = 0.0f64;
    let mut coords = 0;
    for _ in 0..20 {
        let n = rng.random_range(100..=300);
        let pat = uniform_pattern(&mut rng, n, 3);
        let fo = intercepts(&mut rng, 3);
        let theta = random_theta(&mut rng, 3, 2);
        let ctx = LikelihoodContext::new(&pat, fo, 0.1).unwrap();
        for block in Block::ALL {
            let g = score(&ctx, &theta, block).unwrap();
            let x0 = get_block(&theta, block);
            for c in 0..x0.len() {
                let (mut tp, mut tm) = (theta.clone(), theta.clone());
                let (mut xp, mut xm) = (x0.clone(), x0.clone());
                xp[c] += h;
                xm[c] -= h;
                set_block(&mut tp, block, &xp);
                set_block(&mut tm, block, &xm);
                let fd = (neg_log_cl(&ctx, &tp).unwrap() - neg_log_cl(&ctx, &tm).unwrap()) / (2.0 * h);
                worst = worst.max((fd - g[c]).abs() / g[c].abs().max(1.0));
                coords += 1;
            }
        }
    }
    report(1, "score vs central differences", worst <= 1e-5, format!("{coords} coordinates, max relative error {worst:.2e}"));
}

#[test]
fn criterion_02_score_is_unbiased_at_the_truth() {
    let p = 3;
    let theta = Theta::new(
        vec![vec![0.8], vec![-0.3], vec![-0.5]],
        vec![0.05],
        vec![0.5, 0.4, 0.6],
        vec![0.04, 0.05, 0.06],
    )
    .unwrap();
    let gamma = FirstOrder::new(vec![vec![0.0], vec![0.2], vec![-0.2]], Vec::new(), None).unwrap();
    let rho0 = ScalarField::constant(Window::unit(), 128, 128, 100.0).unwrap();
    let spec = SimulationSpec { rho0, gamma: gamma.clone(), theta: theta.clone(), family: CorrelationFamily::Exponential, seed: 0 };
    let reps = 200;
    let mut scores: Vec<Vec<f64>> = Vec::with_capacity(reps);
    for rep in 0..reps {
        let pat = simulate_mlgcp(&SimulationSpec { seed: 5000 + rep as u64, ..spec.clone() }).unwrap();
        let ctx = LikelihoodContext::new(&pat, gamma.clone(), 0.1).unwrap();
        let s: Vec<f64> = Block::ALL.iter().flat_map(|&b| score(&ctx, &theta, b).unwrap()).collect();
        scores.push(s);
    }
    let dim = scores[0].len();
    assert_eq!(dim, p + 1 + p + p);
    let mut worst = 0.0f64;
    for c in 0..dim {
        let xs: Vec<f64> = scores.iter().map(|s| s[c]).collect();
        let mean = xs.iter().sum::<f64>() / reps as f64;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps - 1) as f64).sqrt();
        worst = worst.max(mean.abs() / (sd / (reps as f64).sqrt()));
    }
    report(2, "score unbiasedness", worst <= 3.0, format!("{reps} replicates, {dim} coordinates, max |mean|/SE = {worst:.2}"));
}

#[test]
fn criterion_03_hessian_matches_enumeration() {
    let mut rng = ChaCha8Rng::seed_from_u64(303);
    let mut worst_rel = 0.0f64;
    let mut worst_asym = 0.0f64;
    let mut min_eig_rel = f64::INFINITY;
    for _ in 0..5 {
        let n = rng.random_range(40..=80);
        let pat = uniform_pattern(&mut rng, n, 3);
        let fo = intercepts(&mut rng, 3);
        let theta = random_theta(&mut rng, 3, 2);
        let ctx = LikelihoodContext::new(&pat, fo.clone(), 0.15).unwrap();
        let entries = brute_force_pairs(&pat, 0.15);
        for block in Block::ALL {
            let h = estimated_hessian(&ctx, &theta, block).unwrap();
            let d = h.nrows();
            let mut want = DMatrix::<f64>::zeros(d, d);
            for &(a, b, r) in &entries {
                let (u, v) = (&pat.points()[a], &pat.points()[b]);
                let probs = naive_probs(&fo, &theta, u, v, r);
                let mut mean = vec![0.0; d];
                let mut second = DMatrix::<f64>::zeros(d, d);
                for (i, row) in probs.iter().enumerate() {
                    for (j, &pij) in row.iter().enumerate() {
                        let s = grad_log_g(&theta, block, i, j, r);
                        for x in 0..d {
                            mean[x] += pij * s[x];
                            for y in 0..d {
                                second[(x, y)] += pij * s[x] * s[y];
                            }
                        }
                    }
                }
                for x in 0..d {
                    for y in 0..d {
                        want[(x, y)] += second[(x, y)] - mean[x] * mean[y];
                    }
                }
            }
            let scale = want.amax().max(1.0);
            worst_rel = worst_rel.max((&h - &want).amax() / scale);
            worst_asym = worst_asym.max((&h - h.transpose()).amax());
            let eig = h.clone().symmetric_eigen().eigenvalues.min();
            min_eig_rel = min_eig_rel.min(eig / scale);
        }
    }
    let pass = worst_rel <= 1e-12 && worst_asym == 0.0 && min_eig_rel >= -1e-10;
    report(
        3,
        "estimated Hessian vs enumeration",
        pass,
        format!("max relative deviation {worst_rel:.2e}, asymmetry {worst_asym:.1e}, min eigenvalue / scale {min_eig_rel:.2e}"),
    );
}

#[test]
fn criterion_04_objective_matches_naive_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(404);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let n = rng.random_range(50..=200);
        let p = rng.random_range(2..=4);
        let q = rng.random_range(0..=2);
        let pat = uniform_pattern(&mut rng, n, p);
        let fo = intercepts(&mut rng, p);
        let theta = random_theta(&mut rng, p, q);
        let ctx = LikelihoodContext::new(&pat, fo.clone(), 0.1).unwrap();
        let got = neg_log_cl(&ctx, &theta).unwrap();
        let pts = pat.points();
        let mut want = 0.0;
        for (a, b, r) in brute_force_pairs(&pat, 0.1) {
            want -= naive_probs(&fo, &theta, &pts[a], &pts[b], r)[pts[a].ty][pts[b].ty].ln();
        }
        worst = worst.max((got - want).abs() / want.abs().max(1.0));
    }
    report(4, "objective vs naive oracle", worst <= 1e-10, format!("10 patterns, max relative difference {worst:.2e}"));
}

fn small_lgcp(seed: u64) -> (PointPattern<f64>, FirstOrder<f64>) {
    let theta = Theta::new(
        vec![vec![0.9], vec![0.5], vec![-1.4]],
        vec![0.04],
        vec![0.4, 0.4, 0.4],
        vec![0.03, 0.03, 0.03],
    )
    .unwrap();
    let gamma = FirstOrder::uniform(3);
    let rho0 = ScalarField::constant(Window::unit(), 128, 128, 250.0).unwrap();
    let spec = SimulationSpec { rho0, gamma: gamma.clone(), theta, family: CorrelationFamily::Exponential, seed };
    (simulate_mlgcp(&spec).unwrap(), gamma)
}

fn curves(t: &Theta<f64>, r: &[f64]) -> Vec<f64> {
    let p = t.p();
    let mut out = Vec::new();
    for i in 0..p {
        for j in i..p {
            out.extend(r.iter().map(|&x| t.pcf_with_family(CorrelationFamily::Exponential, i, j, x).unwrap()));
        }
    }
    out
}

#[test]
fn criterion_05_identifiability_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(505);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let pat = uniform_pattern(&mut rng, 250, 3);
        let fo = intercepts(&mut rng, 3);
        let theta = random_theta(&mut rng, 3, 2);
        let ctx = LikelihoodContext::new(&pat, fo, 0.1).unwrap();
        let base = neg_log_cl(&ctx, &theta).unwrap();
        let mut swapped = theta.clone();
        for row in swapped.alpha.iter_mut() {
            row.swap(0, 1);
        }
        swapped.xi.swap(0, 1);
        let mut flipped = theta.clone();
        for row in flipped.alpha.iter_mut() {
            row[1] = -row[1];
        }
        for t in [swapped, flipped] {
            worst = worst.max((neg_log_cl(&ctx, &t).unwrap() - base).abs() / base.abs());
        }
    }
    let (pat, fo) = small_lgcp(77);
    let ctx = LikelihoodContext::new(&pat, fo, 0.1).unwrap();
    let cfg = OptimizerConfig { epsilon: 1e-8, ..Default::default() };
    let a = fit(&ctx, 1, &cfg, Init::Seed(1), 1.0).unwrap();
    let b = fit(&ctx, 1, &cfg, Init::Seed(2), 1.0).unwrap();
    let r: Vec<f64> = (1..=20).map(|k| 0.005 * k as f64).collect();
    let (ca, cb) = (curves(&a.theta, &r), curves(&b.theta, &r));
    let dev = ca.iter().zip(&cb).map(|(x, y)| (x - y).abs() / y.abs()).fold(0.0, f64::max);
    let pass = worst <= 1e-12 && dev <= 0.05;
    report(
        5,
        "identifiability invariance",
        pass,
        format!("max relative objective change {worst:.1e}; two-seed fitted curves differ by at most {:.2}% ({} points)", 100.0 * dev, pat.len()),
    );
}

#[test]
fn criterion_06_constraint_and_lasso() {
    let (pat, fo) = small_lgcp(78);
    let ctx = LikelihoodContext::new(&pat, fo, 0.1).unwrap();
    let cfg = OptimizerConfig { epsilon: 1e-10, ..Default::default() };
    let q = 2;
    let plain = fit(&ctx, q, &cfg, Init::Seed(3), 1.0).unwrap();
    let tiny = fit_lasso(&ctx, q, &cfg, 1e-8, Init::Seed(3), 1.0).unwrap();
    let mid = fit_lasso(&ctx, q, &cfg, 5.0, Init::Seed(3), 1.0).unwrap();
    let huge = fit_lasso(&ctx, q, &cfg, 1e6, Init::Seed(3), 1.0).unwrap();
    let fits: [&FitResult<f64>; 4] = [&plain, &tiny, &mid, &huge];
    let constraint = fits.iter().map(|f| f.theta.constraint_violation()).fold(0.0, f64::max);
    let zeros = huge.theta.alpha.iter().flatten().all(|&a| a == 0.0) && huge.zero_mask.iter().flatten().all(|&z| z);
    let r: Vec<f64> = (1..=100).map(|k| 0.001 * k as f64).collect();
    let sup = curves(&plain.theta, &r)
        .iter()
        .zip(curves(&tiny.theta, &r))
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let alpha_sup = plain
        .theta
        .alpha
        .iter()
        .flatten()
        .zip(tiny.theta.alpha.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let pass = constraint <= 1e-8 && zeros && sup <= 1e-3;
    report(
        6,
        "constraint and lasso behaviour",
        pass,
        format!("max column sum {constraint:.1e}; lambda=1e6 all zero: {zeros}; lambda=1e-8 vs 0 curve sup-norm {sup:.1e} (loadings {alpha_sup:.1e})"),
    );
}

/// The scaled replication shared by the selection and error-ordering criteria.
fn replication() -> &'static mlgcp::study::StudyResult {
    use std::sync::OnceLock;
    static RESULT: OnceLock<mlgcp::study::StudyResult> = OnceLock::new();
    RESULT.get_or_init(|| {
        let cfg = StudyConfig {
            scenario: ScenarioConfig { setting: Setting::TwoFields, rho0_level: 200.0, ..Default::default() },
            n_replicates: 20,
            cv: CvConfig { k: 5, l: 1, ..Default::default() },
            ..Default::default()
        };
        run_study(&cfg).unwrap()
    })
}

#[test]
fn criterion_07_cv_selects_near_true_q() {
    let res = replication();
    let qs: Vec<usize> = res.replicates.iter().map(|o| o.q_min.unwrap()).collect();
    let hits = qs.iter().filter(|q| (1..=3).contains(*q)).count();
    let frac = hits as f64 / qs.len() as f64;
    report(7, "MIN rule selects q in {1,2,3}", frac >= 0.7, format!("{hits}/{} replicates, selected q = {qs:?}", qs.len()));
}

#[test]
fn criterion_08_semiparametric_beats_simple() {
    let res = replication();
    let wins = res
        .replicates
        .iter()
        .filter(|o| o.error(Method::Semiparametric).unwrap().total < o.error(Method::Simple).unwrap().total)
        .count();
    let n = res.replicates.len();
    let mean = |m: Method| res.summary.iter().find(|s| s.method == m).unwrap().mise_total;
    let (semi, simple, diggle) = (mean(Method::Semiparametric), mean(Method::Simple), mean(Method::Diggle));
    report(
        8,
        "semi-parametric total error below simple",
        wins as f64 >= 0.8 * n as f64,
        format!(
            "{wins}/{n} replicates; mean total {semi:.2e} vs simple {simple:.2e} ({:.1}x), Diggle {diggle:.2e}",
            simple / semi
        ),
    );
}

fn two_type_counts(n1: usize, n2: usize) -> PointPattern<f64> {
    let pts = (0..n1 + n2)
        .map(|k| {
            let x = (k as f64 * 0.618_033_988_75).fract();
            let y = (k as f64 + 0.5) / (n1 + n2) as f64;
            Point { x, y, ty: usize::from(k >= n1) }
        })
        .collect();
    PointPattern::new(Window::unit(), 2, pts).unwrap()
}

#[test]
fn criterion_09_count_ratio_first_order() {
    let round2 = |x: f64| (x * 100.0).round() / 100.0;
    let a = estimate_beta(&two_type_counts(3007, 1466), &[], 1).unwrap().beta[0][0];
    let b = estimate_beta(&two_type_counts(2346, 3693), &[], 1).unwrap().beta[0][0];
    let pass = round2(a) == 0.72 && round2(b) == -0.45;
    report(9, "count-ratio first-order estimates", pass, format!("{a:.4} -> {:.2}, {b:.4} -> {:.2}", round2(a), round2(b)));
}

#[test]
fn criterion_10_bandwidth_recovers_area() {
    let mut omegas = Vec::new();
    for seed in 0..20u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let n = Poisson::new(500.0).unwrap().sample(&mut rng) as usize;
        let pat = uniform_pattern(&mut rng, n, 2);
        let beta = estimate_beta(&pat, &[], 1).unwrap();
        let grid = default_bandwidth_grid(pat.window(), 12);
        omegas.push(select_bandwidth(&pat, &beta, &grid).unwrap().omega);
    }
    let inside = omegas.iter().filter(|w| (0.9..=1.1).contains(*w)).count();
    let (lo, hi) = omegas.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &w| (a.min(w), b.max(w)));
    report(
        10,
        "bandwidth criterion area recovery",
        inside == omegas.len(),
        format!("{inside}/{} Poisson patterns with omega(b*) in [0.9, 1.1]; range [{lo:.3}, {hi:.3}]", omegas.len()),
    );
}

#[test]
fn criterion_11_gaussian_field_fidelity() {
    let n = 64;
    let lag = 4;
    let xi = lag as f64 / n as f64;
    let sampler = GrfSampler::new(Window::unit(), n, n, CorrelationModel::exponential(xi).unwrap()).unwrap();
    let probes: Vec<usize> = [0, n / 2, n - 1]
        .iter()
        .flat_map(|&iy| [0, n / 2, n - 1].map(|ix| iy * n + ix))
        .collect();
    let reps = 500;
    let mut sums = vec![0.0; probes.len()];
    let mut squares = vec![0.0; probes.len()];
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for rep in 0..reps {
        let f = sampler.sample(9000 + rep).unwrap();
        let v = f.values();
        for (k, &c) in probes.iter().enumerate() {
            sums[k] += v[c];
            squares[k] += v[c] * v[c];
        }
        for iy in 0..n {
            for ix in 0..n - lag {
                let (a, b) = (v[iy * n + ix], v[iy * n + ix + lag]);
                sxy += a * b;
                sxx += a * a;
                syy += b * b;
            }
        }
        for iy in 0..n - lag {
            for ix in 0..n {
                let (a, b) = (v[iy * n + ix], v[(iy + lag) * n + ix]);
                sxy += a * b;
                sxx += a * a;
                syy += b * b;
            }
        }
    }
    let r = reps as f64;
    let vars: Vec<f64> = sums.iter().zip(&squares).map(|(s, q)| (q - s * s / r) / (r - 1.0)).collect();
    let corr = sxy / (sxx * syy).sqrt();
    let target = (-1.0f64).exp();
    let var_ok = vars.iter().all(|v| (0.85..=1.15).contains(v));
    let pass = var_ok && (corr - target).abs() <= 0.05;
    let (lo, hi) = vars.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &w| (a.min(w), b.max(w)));
    report(
        11,
        "Gaussian field fidelity",
        pass,
        format!("{reps} fields; probe-cell variances in [{lo:.3}, {hi:.3}]; lag-scale correlation {corr:.4} vs {target:.4}"),
    );
}

#[test]
fn criterion_12_envelope_null_calibration() {
    let theta = Theta::new(vec![vec![0.5], vec![-0.5]], vec![0.04], vec![0.3, 0.3], vec![0.03, 0.03]).unwrap();
    let beta = FirstOrder::uniform(2);
    let rho0 = ScalarField::constant(Window::unit(), 32, 32, 150.0).unwrap();
    let spec = SimulationSpec { rho0: rho0.clone(), gamma: beta.clone(), theta: theta.clone(), family: CorrelationFamily::Exponential, seed: 0 };
    let r = mise_grid::<f64>(10);
    let ratios = [((0, 1), (0, 0)), ((1, 1), (0, 0))];
    let runs = 100;
    let mut rejections = 0;
    for run in 0..runs {
        let data = simulate_mlgcp(&SimulationSpec { seed: 70_000 + run, ..spec.clone() }).unwrap();
        let cfg = EnvelopeConfig { n_sim: 99, level: 0.05, bandwidth: Some(0.01), seed: 80_000 + run };
        let res = envelope_test(&data, &theta, &beta, &rho0, &ratios, &r, &cfg).unwrap();
        if res.p_value <= 0.05 {
            rejections += 1;
        }
    }
    let rate = rejections as f64 / runs as f64;
    report(12, "envelope null calibration", (0.01..=0.12).contains(&rate), format!("{rejections}/{runs} null runs rejected at level 0.05"));
}

#[test]
fn criterion_13_threshold_and_rule_examples() {
    let st = [soft_threshold(3.0, 1.0), soft_threshold(-3.0, 1.0), soft_threshold(0.5, 1.0)];
    let qs = [0, 1, 2];
    let rules = [
        select_q(&qs, &[5.0, 4.0, 4.5], &[0.6; 3], Rule::Min).unwrap(),
        select_q(&qs, &[5.0, 4.0, 4.5], &[0.6; 3], Rule::OneSe).unwrap(),
        select_q(&qs, &[4.5, 4.0, 4.4], &[0.6; 3], Rule::Min).unwrap(),
        select_q(&qs, &[4.5, 4.0, 4.4], &[0.6; 3], Rule::OneSe).unwrap(),
        select_q(&qs, &[2.0, 2.0, 2.0], &[0.1; 3], Rule::Min).unwrap(),
        select_q(&qs, &[2.0, 2.0, 2.0], &[0.1; 3], Rule::OneSe).unwrap(),
    ];
    let lam = [select_lambda(&[0.0], &[1.0]).unwrap(), select_lambda(&[0.0, 1.0, 2.0], &[3.0, 2.0, 2.0]).unwrap()];
    let pass = st == [2.0, -2.0, 0.0] && rules == [1, 1, 1, 0, 0, 0] && lam == [0.0, 2.0];
    report(13, "soft-threshold and selection rules", pass, format!("S = {st:?}, rules = {rules:?}, lambda = {lam:?}"));
}

#[test]
fn library_pairs_match_the_brute_force_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(1313);
    let pat = uniform_pattern(&mut rng, 120, 3);
    let pairs = enumerate_pairs(&pat, 0.1).unwrap();
    assert_eq!(pairs.len(), brute_force_pairs(&pat, 0.1).len());
}
