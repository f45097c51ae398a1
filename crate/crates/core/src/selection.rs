//! K-fold cross-validation over pair sets and the MIN / one-standard-error
//! rules for choosing the number of common fields and the lasso penalty.
//!
//! Scores are negated validation log-likelihoods over cross-type pairs, so
//! smaller is better for every rule.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::kfold_assign;
use crate::likelihood::{neg_log_cl, LikelihoodContext};
use crate::model::Theta;
use crate::optimizer::{fit_path, fit_penalized, FitResult, Init, OptimizerConfig};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Min,
    #[serde(rename = "1se")]
    OneSe,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CvConfig {
    /// Number of folds.
    pub k: usize,
    /// Number of independent random splits.
    pub l: usize,
    /// Seed for the fold assignment.
    pub seed: u64,
    /// Seed for the random start of full-data fits.
    pub init_seed: u64,
    /// Outer-iteration cap for fold fits, which warm-start from the full-data fit.
    pub fold_max_outer: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self { k: 5, l: 10, seed: 1, init_seed: 1, fold_max_outer: 60 }
    }
}

impl CvConfig {
    pub fn validate(&self) -> Result<()> {
        if !(2..=10).contains(&self.k) {
            return invalid("the number of folds must lie in 2..=10");
        }
        if self.l == 0 || self.fold_max_outer == 0 {
            return invalid("the number of splits and the fold iteration cap must be positive");
        }
        Ok(())
    }
}

/// Cross-validation summary for one `(q, lambda)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CvPoint<T> {
    pub q: usize,
    pub lambda: T,
    pub mean: T,
    pub se: T,
    /// Raw fold scores ordered by split, then fold.
    pub raw: Vec<T>,
    /// `(split, fold)` pairs whose validation set had no cross-type pairs.
    pub empty_folds: Vec<(usize, usize)>,
}

/// Mean and standard error `SD / sqrt(n)` of raw fold scores.
pub fn summarize<T: Real>(raw: &[T]) -> (T, T) {
    let n = raw.len();
    if n == 0 {
        return (T::nan(), T::nan());
    }
    let nf = T::of(n as f64);
    let mean = raw.iter().copied().sum::<T>() / nf;
    if n < 2 {
        return (mean, T::zero());
    }
    let var = raw.iter().map(|&x| (x - mean) * (x - mean)).sum::<T>() / T::of((n - 1) as f64);
    (mean, (var / nf).sqrt())
}

/// Scores one `(q, lambda)` by `L` repetitions of `K`-fold cross-validation.
/// `start` is the full-data fit used to warm-start every fold; without it
/// folds start from `cfg.init_seed`.
pub fn cv_score<T: Real>(
    ctx: &LikelihoodContext<T>,
    q: usize,
    lambda: T,
    cv: &CvConfig,
    opt: &OptimizerConfig,
    start: Option<&Theta<T>>,
) -> Result<CvPoint<T>> {
    cv.validate()?;
    let index = ctx.pair_index();
    let assignments: Vec<Vec<usize>> = (0..cv.l)
        .map(|l| kfold_assign(index, cv.k, split_seed(cv.seed, l)))
        .collect::<Result<_>>()?;
    let fold_opt = OptimizerConfig { max_outer: cv.fold_max_outer, ..*opt };
    let length = ctx.length();
    let jobs: Vec<(usize, usize)> = (0..cv.l).flat_map(|l| (0..cv.k).map(move |k| (l, k))).collect();
    let results: Vec<(T, bool)> = jobs
        .par_iter()
        .map(|&(l, k)| {
            let fold = &assignments[l];
            let train = index.select(|e| fold[e] != k);
            let valid = index.select(|e| fold[e] == k && index.entries()[e].ti != index.entries()[e].tj);
            let init = match start {
                Some(t) => Init::Start(t.clone()),
                None => Init::Seed(cv.init_seed),
            };
            let fitted = fit_penalized(&ctx.with_pairs(&train), q, &fold_opt, lambda, init, length)?;
            if valid.is_empty() {
                return Ok((T::zero(), true));
            }
            Ok((neg_log_cl(&ctx.with_pairs(&valid), &fitted.theta)?, false))
        })
        .collect::<Result<_>>()?;
    let raw: Vec<T> = results.iter().map(|r| r.0).collect();
    let empty_folds = jobs.iter().zip(&results).filter(|(_, r)| r.1).map(|(j, _)| *j).collect();
    let (mean, se) = summarize(&raw);
    Ok(CvPoint { q, lambda, mean, se, raw, empty_folds })
}

fn split_seed(seed: u64, l: usize) -> u64 {
    seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(l as u64)
}

/// Picks `q` from scores at `lambda = 0`. MIN takes the arg-min (ties to the
/// smaller `q`); 1SE takes the smallest `q` whose mean is within one standard
/// error of the minimum.
pub fn select_q<T: Real>(qs: &[usize], means: &[T], ses: &[T], rule: Rule) -> Result<usize> {
    if qs.is_empty() || qs.len() != means.len() || qs.len() != ses.len() {
        return invalid("q grid, means and standard errors must be non-empty and of equal length");
    }
    let mut order: Vec<usize> = (0..qs.len()).collect();
    order.sort_by_key(|&i| qs[i]);
    let mut best = order[0];
    for &i in &order[1..] {
        if means[i] < means[best] {
            best = i;
        }
    }
    match rule {
        Rule::Min => Ok(qs[best]),
        Rule::OneSe => {
            let bound = means[best] + ses[best];
            Ok(order.iter().map(|&i| i).find(|&i| means[i] <= bound).map_or(qs[best], |i| qs[i]))
        }
    }
}

/// Arg-min over a penalty grid with ties resolved toward the larger penalty.
pub fn select_lambda<T: Real>(lambdas: &[T], means: &[T]) -> Result<T> {
    if lambdas.is_empty() || lambdas.len() != means.len() {
        return invalid("lambda grid and means must be non-empty and of equal length");
    }
    let mut best = 0;
    for i in 1..lambdas.len() {
        if means[i] < means[best] || (means[i] == means[best] && lambdas[i] > lambdas[best]) {
            best = i;
        }
    }
    Ok(lambdas[best])
}

/// Full two-step selection output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct CvResult<T> {
    /// Scores over the `q` grid at `lambda = 0`.
    pub q_scores: Vec<CvPoint<T>>,
    /// Scores over the `lambda` grid at `q_min`; empty when `q_min = 0`.
    pub lambda_scores: Vec<CvPoint<T>>,
    pub q_min: usize,
    pub q_1se: usize,
    pub lambda_star: T,
    /// Full-data fit at `(q_min, lambda_star)`.
    pub fit: FitResult<T>,
    /// Full-data fit at `(q_1se, 0)`.
    pub fit_1se: FitResult<T>,
}

/// Selects `q` by the MIN rule at `lambda = 0`, then `lambda` at that `q`.
/// The lambda grid must contain zero.
pub fn select_q_lambda<T: Real>(
    ctx: &LikelihoodContext<T>,
    q_grid: &[usize],
    lambda_grid: &[T],
    cv: &CvConfig,
    opt: &OptimizerConfig,
) -> Result<CvResult<T>> {
    if q_grid.is_empty() || lambda_grid.is_empty() {
        return invalid("the q and lambda grids must be non-empty");
    }
    if !lambda_grid.iter().any(|&l| l == T::zero()) {
        return invalid("the lambda grid must contain zero");
    }
    if lambda_grid.iter().any(|&l| l < T::zero() || !l.is_finite()) {
        return invalid("penalties must be non-negative and finite");
    }
    let mut qs: Vec<usize> = q_grid.to_vec();
    qs.sort_unstable();
    qs.dedup();
    let length = ctx.length();
    let mut full_fits = Vec::with_capacity(qs.len());
    let mut q_scores = Vec::with_capacity(qs.len());
    for &q in &qs {
        let full = fit_penalized(ctx, q, opt, T::zero(), Init::Seed(cv.init_seed), length)?;
        q_scores.push(cv_score(ctx, q, T::zero(), cv, opt, Some(&full.theta))?);
        full_fits.push(full);
    }
    let means: Vec<T> = q_scores.iter().map(|c| c.mean).collect();
    let ses: Vec<T> = q_scores.iter().map(|c| c.se).collect();
    let q_min = select_q(&qs, &means, &ses, Rule::Min)?;
    let q_1se = select_q(&qs, &means, &ses, Rule::OneSe)?;
    let at = |q: usize| qs.iter().position(|&x| x == q).expect("selected q is in the grid");
    let fit_1se = full_fits[at(q_1se)].clone();
    let base = full_fits[at(q_min)].clone();
    let positive: Vec<T> = lambda_grid.iter().copied().filter(|&l| l > T::zero()).collect();
    if q_min == 0 || positive.is_empty() {
        return Ok(CvResult { q_scores, lambda_scores: Vec::new(), q_min, q_1se, lambda_star: T::zero(), fit: base, fit_1se });
    }
    let path = fit_path(ctx, q_min, opt, &positive, Init::Start(base.theta.clone()), length)?;
    let mut lambda_scores = vec![q_scores[at(q_min)].clone()];
    let mut fits = vec![base];
    for (lam, f) in path {
        lambda_scores.push(cv_score(ctx, q_min, lam, cv, opt, Some(&f.theta))?);
        fits.push(f);
    }
    let lams: Vec<T> = lambda_scores.iter().map(|c| c.lambda).collect();
    let lmeans: Vec<T> = lambda_scores.iter().map(|c| c.mean).collect();
    let lambda_star = select_lambda(&lams, &lmeans)?;
    let fit = fits[lams.iter().position(|&l| l == lambda_star).expect("in grid")].clone();
    Ok(CvResult { q_scores, lambda_scores, q_min, q_1se, lambda_star, fit, fit_1se })
}
