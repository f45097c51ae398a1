//! Kernel baselines and model assessment: intensity and background
//! estimation, bandwidth choice, non-parametric (cross) pair correlation and
//! ratio estimators, integrated squared error and a global envelope test.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fields::CorrelationFamily;
use crate::geometry::{enumerate_pairs, PointPattern, ScalarField, Window};
use crate::model::{simulate_mlgcp, FirstOrder, SimulationSpec, Theta};
use crate::real::Real;

fn phi_pdf<T: Real>(x: T) -> T {
    (-x * x / T::of(2.0)).exp() / T::of((2.0 * PI).sqrt())
}

/// Per-axis Gaussian kernel weights of one point over the cell centres of a
/// grid, plus the edge-correction mass `c_b` (their product sum times area).
struct AxisWeights<T> {
    kx: Vec<T>,
    ky: Vec<T>,
    mass: T,
}

fn axis_weights<T: Real>(grid: &ScalarField<T>, x: T, y: T, b: T) -> AxisWeights<T> {
    let kx: Vec<T> = (0..grid.nx()).map(|ix| phi_pdf((grid.cell_center(ix, 0).0 - x) / b) / b).collect();
    let ky: Vec<T> = (0..grid.ny()).map(|iy| phi_pdf((grid.cell_center(0, iy).1 - y) / b) / b).collect();
    let mass = kx.iter().copied().sum::<T>() * ky.iter().copied().sum::<T>() * grid.cell_area();
    AxisWeights { kx, ky, mass }
}

/// Edge-correction factor `c_b(v)`: the kernel mass centred at `v` inside the
/// window, by quadrature on the grid of `template`.
pub fn edge_correction<T: Real>(template: &ScalarField<T>, x: T, y: T, b: T) -> T {
    axis_weights(template, x, y, b).mass
}

/// Weighted, edge-corrected kernel sum over the points on an `nx x ny` grid.
fn weighted_kernel_field<T: Real>(
    window: Window<T>,
    nx: usize,
    ny: usize,
    points: &[(T, T, T)],
    b: T,
) -> Result<ScalarField<T>> {
    if !(b > T::zero()) {
        return invalid("bandwidth must be positive");
    }
    let grid = ScalarField::constant(window, nx, ny, T::zero())?;
    let mut values = vec![T::zero(); nx * ny];
    for &(x, y, w) in points {
        let aw = axis_weights(&grid, x, y, b);
        if !(aw.mass > T::zero()) {
            continue;
        }
        let scale = w / aw.mass;
        for iy in 0..ny {
            let sy = scale * aw.ky[iy];
            let row = &mut values[iy * nx..(iy + 1) * nx];
            for (v, &kx) in row.iter_mut().zip(&aw.kx) {
                *v += sy * kx;
            }
        }
    }
    ScalarField::new(window, nx, ny, values)
}

/// Edge-corrected Gaussian kernel estimate of the intensity of all points in
/// `pattern` on an `nx x ny` grid.
pub fn kernel_intensity<T: Real>(pattern: &PointPattern<T>, b: T, nx: usize, ny: usize) -> Result<ScalarField<T>> {
    let pts: Vec<(T, T, T)> = pattern.points().iter().map(|p| (p.x, p.y, T::one())).collect();
    weighted_kernel_field(*pattern.window(), nx, ny, &pts, b)
}

fn rho0_points<T: Real>(pattern: &PointPattern<T>, beta: &FirstOrder<T>, skip: Option<usize>) -> Vec<(T, T, T)> {
    pattern
        .points()
        .iter()
        .filter(|p| Some(p.ty) != skip)
        .map(|p| (p.x, p.y, (-beta.log_f(&beta.covariates_at(p.x, p.y))[p.ty]).exp()))
        .collect()
}

/// Semi-parametric background estimate: each point weighted by
/// `exp(-beta_i' z(v))`, averaged over the `p` types.
pub fn estimate_rho0<T: Real>(
    pattern: &PointPattern<T>,
    beta: &FirstOrder<T>,
    b: T,
    nx: usize,
    ny: usize,
) -> Result<ScalarField<T>> {
    check_types(pattern, beta)?;
    let p = T::of(pattern.n_types() as f64);
    weighted_kernel_field(*pattern.window(), nx, ny, &rho0_points(pattern, beta, None), b)?.map(|v| v / p)
}

/// Background estimate that leaves out type `i`, for use as a plug-in with
/// the type-`i` pattern.
pub fn diggle_rho0_minus_i<T: Real>(
    pattern: &PointPattern<T>,
    beta: &FirstOrder<T>,
    b: T,
    i: usize,
    nx: usize,
    ny: usize,
) -> Result<ScalarField<T>> {
    check_types(pattern, beta)?;
    let p = pattern.n_types();
    if p < 2 {
        return invalid("the leave-one-type-out estimate needs at least two types");
    }
    if i >= p {
        return Err(Error::TypeOutOfRange { index: i, n_types: p });
    }
    let scale = T::of((p - 1) as f64);
    weighted_kernel_field(*pattern.window(), nx, ny, &rho0_points(pattern, beta, Some(i)), b)?.map(|v| v / scale)
}

fn check_types<T: Real>(pattern: &PointPattern<T>, beta: &FirstOrder<T>) -> Result<()> {
    if beta.p() != pattern.n_types() {
        return invalid("first-order estimate and pattern disagree on the number of types");
    }
    Ok(())
}

/// Grid resolution used for edge-correction quadrature when evaluating the
/// background estimate at the data points.
const QUADRATURE_CELLS: usize = 128;

/// Background estimate evaluated exactly at every data point (self term
/// included).
fn rho0_at_points<T: Real>(pattern: &PointPattern<T>, beta: &FirstOrder<T>, b: T) -> Vec<T> {
    let grid = ScalarField::constant(*pattern.window(), QUADRATURE_CELLS, QUADRATURE_CELLS, T::zero())
        .expect("quadrature grid is valid");
    let src = rho0_points(pattern, beta, None);
    let weights: Vec<T> = src.iter().map(|&(x, y, w)| w / edge_correction(&grid, x, y, b)).collect();
    let p = T::of(pattern.n_types() as f64);
    let two_b2 = T::of(2.0) * b * b;
    let norm = T::one() / (T::of(2.0 * PI) * b * b);
    pattern
        .points()
        .par_iter()
        .map(|u| {
            let mut s = T::zero();
            for (&(x, y, _), &w) in src.iter().zip(&weights) {
                let (dx, dy) = (u.x - x, u.y - y);
                s += w * (-(dx * dx + dy * dy) / two_b2).exp();
            }
            s * norm / p
        })
        .collect()
}

/// Geometric grid of `n` bandwidths from 1/20 to 1/2 of the shorter window
/// side. Much smaller values let each point's own kernel dominate the
/// background estimate at that point, which drives both area estimates
/// towards zero together.
pub fn default_bandwidth_grid<T: Real>(window: &Window<T>, n: usize) -> Vec<T> {
    let s = window.shorter_side().as_f64();
    let (lo, hi) = (s / 20.0, s / 2.0);
    match n {
        0 => Vec::new(),
        1 => vec![T::of(lo)],
        _ => (0..n).map(|k| T::of(lo * (hi / lo).powf(k as f64 / (n - 1) as f64))).collect(),
    }
}

/// Outcome of the area-matching bandwidth criterion.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct BandwidthChoice<T> {
    pub b: T,
    /// Type-weighted area estimate at `b`.
    pub omega: T,
    /// Pooled area estimate at `b`.
    pub w: T,
    /// `(b, omega, w, criterion)` for every usable grid value.
    pub table: Vec<(T, T, T, T)>,
    /// Grid values skipped because the estimate vanished at a data point.
    pub skipped: Vec<T>,
    /// The criterion was identically zero, so the smallest usable value was returned.
    pub degenerate: bool,
}

/// Chooses `b` from `grid` minimizing `(omega(b) - w(b))^2`, where both are
/// area estimates built from the background estimate at the data points.
pub fn select_bandwidth<T: Real>(pattern: &PointPattern<T>, beta: &FirstOrder<T>, grid: &[T]) -> Result<BandwidthChoice<T>> {
    check_types(pattern, beta)?;
    if grid.is_empty() {
        return invalid("bandwidth grid must be non-empty");
    }
    if grid.iter().any(|&b| !(b > T::zero())) {
        return invalid("bandwidths must be positive");
    }
    let mut sorted = grid.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let p = T::of(pattern.n_types() as f64);
    let log_f: Vec<Vec<T>> = pattern.points().iter().map(|u| beta.log_f(&beta.covariates_at(u.x, u.y))).collect();
    let mut table = Vec::new();
    let mut skipped = Vec::new();
    for &b in &sorted {
        let rho = rho0_at_points(pattern, beta, b);
        if rho.iter().any(|r| !(*r > T::zero()) || !r.is_finite()) {
            skipped.push(b);
            continue;
        }
        let mut omega = T::zero();
        let mut w = T::zero();
        for ((u, r), lf) in pattern.points().iter().zip(&rho).zip(&log_f) {
            omega += T::one() / (*r * lf[u.ty].exp());
            let pooled: T = lf.iter().map(|v| v.exp()).sum();
            w += T::one() / (*r * pooled);
        }
        omega /= p;
        table.push((b, omega, w, (omega - w) * (omega - w)));
    }
    if table.is_empty() {
        return Err(Error::NoUsableBandwidth);
    }
    let scale = table.iter().fold(T::zero(), |a, t| a.max(t.1.abs()).max(t.2.abs()));
    let tiny = T::of(1e-24) * scale * scale;
    let degenerate = table.iter().all(|t| t.3 <= tiny);
    let best = if degenerate {
        0
    } else {
        let mut best = 0;
        for k in 1..table.len() {
            if table[k].3 < table[best].3 {
                best = k;
            }
        }
        best
    };
    let (b, omega, w, _) = table[best];
    Ok(BandwidthChoice { b, omega, w, table, skipped, degenerate })
}

/// One-dimensional Gaussian smoothing kernel for pair distances.
#[inline]
fn k1<T: Real>(x: T, h: T) -> T {
    phi_pdf(x / h) / h
}

const KERNEL_REACH: f64 = 6.0;

fn check_r_grid<T: Real>(r_grid: &[T], h: T) -> Result<()> {
    if r_grid.is_empty() || r_grid.iter().any(|&r| !(r > T::zero())) {
        return invalid("the r grid must be non-empty and exclude zero");
    }
    if !(h > T::zero()) {
        return invalid("smoothing bandwidth must be positive");
    }
    Ok(())
}

/// Translation-corrected kernel estimates of every `g_ij` on `r_grid`.
/// `intensities[i]` is evaluated at type-`i` points by the nearest-cell rule.
/// Returns `p x p` curves with `out[i][j] == out[j][i]` exactly.
pub fn nonparam_pcf_all<T: Real>(
    pattern: &PointPattern<T>,
    intensities: &[ScalarField<T>],
    r_grid: &[T],
    h: T,
) -> Result<Vec<Vec<Vec<T>>>> {
    check_r_grid(r_grid, h)?;
    let p = pattern.n_types();
    if intensities.len() != p {
        return invalid("one intensity field per type is required");
    }
    let pts = pattern.points();
    let lam: Vec<T> = pts.iter().map(|u| intensities[u.ty].value_at(u.x, u.y)).collect();
    if lam.iter().any(|v| !(*v > T::zero())) {
        return invalid("intensities must be positive at the data points");
    }
    let r_top = r_grid.iter().fold(T::zero(), |a, &b| a.max(b)) + T::of(KERNEL_REACH) * h;
    let pairs = enumerate_pairs(pattern, r_top)?;
    let win = pattern.window();
    let nr = r_grid.len();
    let mut acc = vec![vec![T::zero(); nr]; p * p];
    for e in pairs.entries().iter().filter(|e| e.u < e.v) {
        let (a, b) = (&pts[e.u], &pts[e.v]);
        let overlap = win.translated_overlap(a.x - b.x, a.y - b.y);
        if !(overlap > T::zero()) {
            continue;
        }
        let denom = lam[e.u] * lam[e.v] * overlap;
        for (t, &r) in r_grid.iter().enumerate() {
            let term = k1(r - e.r, h) / (T::of(2.0 * PI) * r * denom);
            let (i, j) = (e.ti, e.tj);
            if i == j {
                acc[i * p + i][t] += term + term;
            } else {
                acc[i * p + j][t] += term;
                acc[j * p + i][t] += term;
            }
        }
    }
    Ok((0..p).map(|i| (0..p).map(|j| acc[i * p + j].clone()).collect()).collect())
}

/// Translation-corrected kernel estimate of `g_ij` on `r_grid`.
pub fn nonparam_pcf<T: Real>(
    pattern: &PointPattern<T>,
    intensities: &[ScalarField<T>],
    i: usize,
    j: usize,
    r_grid: &[T],
    h: T,
) -> Result<Vec<T>> {
    let p = pattern.n_types();
    for index in [i, j] {
        if index >= p {
            return Err(Error::TypeOutOfRange { index, n_types: p });
        }
    }
    Ok(nonparam_pcf_all(pattern, intensities, r_grid, h)?.swap_remove(i).swap_remove(j))
}

/// Rule-of-thumb bandwidth `0.9 min(sd, iqr / 1.34) n^(-1/5)` for pair
/// distances up to `r_max`.
pub fn silverman_bandwidth<T: Real>(pattern: &PointPattern<T>, r_max: T) -> Result<T> {
    let pairs = enumerate_pairs(pattern, r_max)?;
    let mut d: Vec<f64> = pairs.entries().iter().filter(|e| e.u < e.v).map(|e| e.r.as_f64()).collect();
    if d.len() < 2 {
        return invalid("too few pairs for a bandwidth rule");
    }
    d.sort_by(f64::total_cmp);
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let sd = (d.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0)).sqrt();
    let q = |f: f64| d[((n - 1.0) * f).round() as usize];
    let iqr = q(0.75) - q(0.25);
    let spread = if iqr > 0.0 { sd.min(iqr / 1.34) } else { sd };
    Ok(T::of(0.9 * spread * n.powf(-0.2)))
}

/// Non-parametric estimate of `g_ij(r) / g_lk(r)`: kernel-smoothed counts of
/// type-`(i, j)` pairs against type-`(l, k)` pairs at distance `r`, each pair
/// down-weighted by its first-order terms. Entries are `None` where the
/// denominator vanishes.
pub fn pcf_ratio_nonparam<T: Real>(
    pattern: &PointPattern<T>,
    beta: &FirstOrder<T>,
    num: (usize, usize),
    den: (usize, usize),
    r_grid: &[T],
    h: T,
) -> Result<Vec<Option<T>>> {
    Ok(pcf_ratios_nonparam(pattern, beta, &[(num, den)], r_grid, h)?.swap_remove(0))
}

/// Several ratio curves sharing one pair enumeration.
pub fn pcf_ratios_nonparam<T: Real>(
    pattern: &PointPattern<T>,
    beta: &FirstOrder<T>,
    ratios: &[((usize, usize), (usize, usize))],
    r_grid: &[T],
    h: T,
) -> Result<Vec<Vec<Option<T>>>> {
    check_types(pattern, beta)?;
    check_r_grid(r_grid, h)?;
    let p = pattern.n_types();
    for &((i, j), (l, k)) in ratios {
        for index in [i, j, l, k] {
            if index >= p {
                return Err(Error::TypeOutOfRange { index, n_types: p });
            }
        }
    }
    let pts = pattern.points();
    let log_f: Vec<T> = pts.iter().map(|u| beta.log_f(&beta.covariates_at(u.x, u.y))[u.ty]).collect();
    let r_top = r_grid.iter().fold(T::zero(), |a, &b| a.max(b)) + T::of(KERNEL_REACH) * h;
    let pairs = enumerate_pairs(pattern, r_top)?;
    let nr = r_grid.len();
    let mut acc = vec![vec![T::zero(); nr]; p * p];
    for e in pairs.entries().iter().filter(|e| e.u < e.v) {
        let w = (-(log_f[e.u] + log_f[e.v])).exp();
        for (t, &r) in r_grid.iter().enumerate() {
            let term = w * k1(r - e.r, h);
            acc[e.ti * p + e.tj][t] += term;
            if e.ti != e.tj {
                acc[e.tj * p + e.ti][t] += term;
            } else {
                acc[e.ti * p + e.ti][t] += term;
            }
        }
    }
    Ok(ratios
        .iter()
        .map(|&((i, j), (l, k))| {
            (0..nr)
                .map(|t| {
                    let d = acc[l * p + k][t];
                    if d > T::zero() && d.is_finite() {
                        Some(acc[i * p + j][t] / d)
                    } else {
                        None
                    }
                })
                .collect()
        })
        .collect())
}

/// Which `(i, j)` curves enter an aggregate error.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scope {
    /// `i = j`.
    Within,
    /// `i < j`.
    Between,
    /// `i <= j`.
    Total,
}

impl Scope {
    fn includes(self, i: usize, j: usize) -> bool {
        match self {
            Scope::Within => i == j,
            Scope::Between => i < j,
            Scope::Total => i <= j,
        }
    }
}

/// Trapezoid-rule integral of `(a - b)^2` over `r_grid`.
pub fn integrated_squared_error<T: Real>(a: &[T], b: &[T], r_grid: &[T]) -> T {
    let sq: Vec<T> = a.iter().zip(b).map(|(x, y)| (*x - *y) * (*x - *y)).collect();
    (1..r_grid.len()).fold(T::zero(), |s, t| s + (r_grid[t] - r_grid[t - 1]) * (sq[t] + sq[t - 1]) / T::of(2.0))
}

/// Evenly spaced lags from 0.01 to 0.1, the default error range.
pub fn mise_grid<T: Real>(n: usize) -> Vec<T> {
    let n = n.max(2);
    (0..n).map(|k| T::of(0.01 + 0.09 * k as f64 / (n - 1) as f64)).collect()
}

/// `p x p` curves of a parameter value on `r_grid`.
pub fn pcf_curves<T: Real>(theta: &Theta<T>, family: CorrelationFamily, r_grid: &[T]) -> Result<Vec<Vec<Vec<T>>>> {
    let p = theta.p();
    (0..p)
        .map(|i| (0..p).map(|j| r_grid.iter().map(|&r| theta.pcf_with_family(family, i, j, r)).collect()).collect::<Result<_>>())
        .collect()
}

/// Monte Carlo mean over replicates of the summed integrated squared error
/// of the curves in `scope`.
pub fn mise<T: Real>(replicates: &[Vec<Vec<Vec<T>>>], truth: &[Vec<Vec<T>>], r_grid: &[T], scope: Scope) -> Result<T> {
    if replicates.is_empty() {
        return invalid("at least one replicate is required");
    }
    let p = truth.len();
    let total: T = replicates
        .iter()
        .map(|est| {
            let mut s = T::zero();
            for i in 0..p {
                for j in 0..p {
                    if scope.includes(i, j) {
                        s += integrated_squared_error(&est[i][j], &truth[i][j], r_grid);
                    }
                }
            }
            s
        })
        .sum();
    Ok(total / T::of(replicates.len() as f64))
}

/// Options for [`envelope_test`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EnvelopeConfig {
    pub n_sim: usize,
    pub level: f64,
    /// Pair-distance smoothing bandwidth; Silverman's rule when absent.
    pub bandwidth: Option<f64>,
    pub seed: u64,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        Self { n_sim: 99, level: 0.05, bandwidth: None, seed: 1 }
    }
}

/// Difference curves and the global envelope for one ratio.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EnvelopeBand<T> {
    pub numerator: (usize, usize),
    pub denominator: (usize, usize),
    pub observed: Vec<T>,
    pub lo: Vec<T>,
    pub hi: Vec<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct EnvelopeResult<T> {
    pub p_value: T,
    pub level: T,
    pub n_sim: usize,
    pub bandwidth: T,
    pub r: Vec<T>,
    pub bands: Vec<EnvelopeBand<T>>,
}

/// Global rank envelope over a set of curves. Curve 0 is the observed one.
/// Returns the p-value and the pointwise band spanned by all curves whose own
/// p-value exceeds `level`.
pub fn rank_envelope<T: Real>(curves: &[Vec<T>], level: f64) -> Result<(T, Vec<T>, Vec<T>)> {
    let s1 = curves.len();
    if s1 < 2 {
        return invalid("at least one simulated curve is required");
    }
    let len = curves[0].len();
    if len == 0 || curves.iter().any(|c| c.len() != len) {
        return invalid("curves must share a non-empty grid");
    }
    let mut ranks = vec![vec![0usize; len]; s1];
    for t in 0..len {
        for a in 0..s1 {
            let x = curves[a][t];
            let below = curves.iter().filter(|c| c[t] <= x).count();
            let above = curves.iter().filter(|c| c[t] >= x).count();
            ranks[a][t] = below.min(above);
        }
    }
    for r in ranks.iter_mut() {
        r.sort_unstable();
    }
    // Smaller rank vectors (lexicographically) are more extreme.
    let p_of = |a: usize| ranks.iter().filter(|r| **r <= ranks[a]).count() as f64 / s1 as f64;
    let p_values: Vec<f64> = (0..s1).map(p_of).collect();
    let mut lo = vec![T::infinity(); len];
    let mut hi = vec![T::neg_infinity(); len];
    let mut any = false;
    for a in (0..s1).filter(|&a| p_values[a] > level) {
        any = true;
        for t in 0..len {
            lo[t] = lo[t].min(curves[a][t]);
            hi[t] = hi[t].max(curves[a][t]);
        }
    }
    if !any {
        lo = vec![T::nan(); len];
        hi = vec![T::nan(); len];
    }
    Ok((T::of(p_values[0]), lo, hi))
}

/// Goodness-of-fit test of a fitted model through ratio curves. The
/// statistic is the model ratio `g_ij / g_lk` minus its non-parametric
/// estimate; replicates are simulated from the fitted parameters with the
/// background replaced by `rho0_hat` and the first-order terms by `beta`.
#[allow(clippy::too_many_arguments)]
pub fn envelope_test<T: Real>(
    data: &PointPattern<T>,
    theta: &Theta<T>,
    beta: &FirstOrder<T>,
    rho0_hat: &ScalarField<T>,
    ratios: &[((usize, usize), (usize, usize))],
    r_grid: &[T],
    cfg: &EnvelopeConfig,
) -> Result<EnvelopeResult<T>> {
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return invalid("level must lie in (0, 1)");
    }
    if ((cfg.n_sim + 1) as f64 * cfg.level) < 2.0 - 1e-9 {
        return invalid(format!("n_sim = {} is too small for level {}", cfg.n_sim, cfg.level));
    }
    if ratios.is_empty() {
        return invalid("at least one ratio is required");
    }
    let h = match cfg.bandwidth {
        Some(b) => T::of(b),
        None => {
            let r_max = r_grid.iter().fold(T::zero(), |a, &b| a.max(b));
            silverman_bandwidth(data, r_max)?
        }
    };
    let model: Vec<Vec<T>> = ratios
        .iter()
        .map(|&((i, j), (l, k))| {
            r_grid
                .iter()
                .map(|&r| Ok(crate::model::cross_pcf(theta, i, j, r)? / crate::model::cross_pcf(theta, l, k, r)?))
                .collect::<Result<Vec<T>>>()
        })
        .collect::<Result<_>>()?;
    let statistic = |pat: &PointPattern<T>| -> Result<Vec<T>> {
        let est = pcf_ratios_nonparam(pat, beta, ratios, r_grid, h)?;
        Ok(est
            .iter()
            .zip(&model)
            .flat_map(|(e, m)| e.iter().zip(m).map(|(v, mv)| v.map_or(T::zero(), |v| *mv - v)))
            .collect())
    };
    let mut seeds = ChaCha8Rng::seed_from_u64(cfg.seed);
    let sim_seeds: Vec<u64> = (0..cfg.n_sim).map(|_| seeds.random()).collect();
    let spec = SimulationSpec {
        rho0: rho0_hat.clone(),
        gamma: beta.clone(),
        theta: theta.clone(),
        family: CorrelationFamily::Exponential,
        seed: 0,
    };
    let mut curves = vec![statistic(data)?];
    let sims: Vec<Vec<T>> = sim_seeds
        .par_iter()
        .map(|&seed| {
            let pat = simulate_mlgcp(&SimulationSpec { seed, ..spec.clone() })?;
            statistic(&pat)
        })
        .collect::<Result<_>>()?;
    curves.extend(sims);
    let (p_value, lo, hi) = rank_envelope(&curves, cfg.level)?;
    let nr = r_grid.len();
    let bands = ratios
        .iter()
        .enumerate()
        .map(|(a, &(num, den))| EnvelopeBand {
            numerator: num,
            denominator: den,
            observed: curves[0][a * nr..(a + 1) * nr].to_vec(),
            lo: lo[a * nr..(a + 1) * nr].to_vec(),
            hi: hi[a * nr..(a + 1) * nr].to_vec(),
        })
        .collect();
    Ok(EnvelopeResult { p_value, level: T::of(cfg.level), n_sim: cfg.n_sim, bandwidth: h, r: r_grid.to_vec(), bands })
}
