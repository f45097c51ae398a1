//! First-order contrasts `beta_i = gamma_i - gamma_baseline`, estimated from
//! the type labels of the pooled points.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::geometry::{PointPattern, ScalarField};
use crate::model::FirstOrder;
use crate::real::{log_sum_exp, Real};

const NORM_CAP: f64 = 50.0;
const MAX_NEWTON: usize = 100;

/// Estimates the contrasts against `baseline`. Without covariates this is
/// the count ratio `log(n_i / n_baseline)`; with covariates it maximizes the
/// multinomial likelihood of the type labels given `z(u)`.
pub fn estimate_beta<T: Real>(
    pattern: &PointPattern<T>,
    covariates: &[ScalarField<T>],
    baseline: usize,
) -> Result<FirstOrder<T>> {
    let p = pattern.n_types();
    if baseline >= p {
        return Err(Error::TypeOutOfRange { index: baseline, n_types: p });
    }
    let counts = pattern.counts();
    if let Some(empty) = counts.iter().position(|&c| c == 0) {
        return Err(Error::FirstOrder(format!("type {} has no points", empty + 1)));
    }
    if covariates.is_empty() {
        let nb = T::of(counts[baseline] as f64);
        let beta = counts.iter().map(|&c| vec![(T::of(c as f64) / nb).ln()]).collect::<Vec<_>>();
        let mut beta = beta;
        beta[baseline][0] = T::zero();
        return FirstOrder::new(beta, Vec::new(), Some(baseline));
    }
    estimate_beta_newton(pattern, covariates, baseline)
}

/// Newton iterations on the multinomial log-likelihood of the labels.
pub fn estimate_beta_newton<T: Real>(
    pattern: &PointPattern<T>,
    covariates: &[ScalarField<T>],
    baseline: usize,
) -> Result<FirstOrder<T>> {
    let p = pattern.n_types();
    if baseline >= p {
        return Err(Error::TypeOutOfRange { index: baseline, n_types: p });
    }
    let counts = pattern.counts();
    if counts.iter().any(|&c| c == 0) {
        return Err(Error::FirstOrder("every type needs at least one point".into()));
    }
    let d = covariates.len() + 1;
    let free: Vec<usize> = (0..p).filter(|&i| i != baseline).collect();
    let dim = free.len() * d;
    let z: Vec<Vec<T>> = pattern
        .points()
        .iter()
        .map(|pt| std::iter::once(T::one()).chain(covariates.iter().map(|f| f.value_at(pt.x, pt.y))).collect())
        .collect();
    let types: Vec<usize> = pattern.points().iter().map(|pt| pt.ty).collect();
    let mut beta = vec![vec![T::zero(); d]; p];
    let nb = T::of(counts[baseline] as f64);
    for &i in &free {
        beta[i][0] = (T::of(counts[i] as f64) / nb).ln();
    }
    let loglik = |b: &[Vec<T>]| -> T {
        let mut s = T::zero();
        let mut eta = vec![T::zero(); p];
        for (zv, &t) in z.iter().zip(&types) {
            for i in 0..p {
                eta[i] = b[i].iter().zip(zv).fold(T::zero(), |a, (x, y)| a + *x * *y);
            }
            s += eta[t] - log_sum_exp(&eta);
        }
        s
    };
    let mut current = loglik(&beta);
    for _ in 0..MAX_NEWTON {
        let mut g = vec![T::zero(); dim];
        let mut h = DMatrix::<T>::zeros(dim, dim);
        let mut eta = vec![T::zero(); p];
        for (zv, &t) in z.iter().zip(&types) {
            for i in 0..p {
                eta[i] = beta[i].iter().zip(zv).fold(T::zero(), |a, (x, y)| a + *x * *y);
            }
            let lse = log_sum_exp(&eta);
            let pr: Vec<T> = eta.iter().map(|&e| (e - lse).exp()).collect();
            for (a, &i) in free.iter().enumerate() {
                let resid = if t == i { T::one() } else { T::zero() } - pr[i];
                for r in 0..d {
                    g[a * d + r] += resid * zv[r];
                }
                for (b, &j) in free.iter().enumerate() {
                    let w = if i == j { pr[i] * (T::one() - pr[i]) } else { -pr[i] * pr[j] };
                    for r in 0..d {
                        for c in 0..d {
                            h[(a * d + r, b * d + c)] += w * zv[r] * zv[c];
                        }
                    }
                }
            }
        }
        let step = T::cholesky_lower(&h)
            .map(|l| {
                let y = solve_lower(&l, &g);
                solve_upper_t(&l, &y)
            })
            .ok_or_else(|| Error::FirstOrder("information matrix is singular".into()))?;
        let mut t = T::one();
        let mut accepted = false;
        for _ in 0..30 {
            let mut trial = beta.clone();
            for (a, &i) in free.iter().enumerate() {
                for r in 0..d {
                    trial[i][r] += t * step[a * d + r];
                }
            }
            let v = loglik(&trial);
            if v.is_finite() && v >= current {
                let gain = v - current;
                beta = trial;
                current = v;
                accepted = true;
                if gain <= T::of(1e-12) * current.abs().max(T::one()) {
                    return finish(beta, covariates, baseline);
                }
                break;
            }
            t *= T::of(0.5);
        }
        let norm = beta.iter().flatten().fold(T::zero(), |a, b| a + *b * *b).sqrt();
        if norm > T::of(NORM_CAP) {
            return Err(Error::FirstOrder("coefficients diverge; the types appear separated by the covariates".into()));
        }
        if !accepted {
            return finish(beta, covariates, baseline);
        }
    }
    finish(beta, covariates, baseline)
}

fn finish<T: Real>(beta: Vec<Vec<T>>, covariates: &[ScalarField<T>], baseline: usize) -> Result<FirstOrder<T>> {
    if beta.iter().flatten().fold(T::zero(), |a, b| a + *b * *b).sqrt() > T::of(NORM_CAP) {
        return Err(Error::FirstOrder("coefficients diverge; the types appear separated by the covariates".into()));
    }
    FirstOrder::new(beta, covariates.to_vec(), Some(baseline))
}

fn solve_lower<T: Real>(l: &DMatrix<T>, b: &[T]) -> Vec<T> {
    let n = b.len();
    let mut y = vec![T::zero(); n];
    for i in 0..n {
        let s = (0..i).fold(b[i], |s, j| s - l[(i, j)] * y[j]);
        y[i] = s / l[(i, i)];
    }
    y
}

fn solve_upper_t<T: Real>(l: &DMatrix<T>, y: &[T]) -> Vec<T> {
    let n = y.len();
    let mut x = vec![T::zero(); n];
    for i in (0..n).rev() {
        let s = (i + 1..n).fold(y[i], |s, j| s - l[(j, i)] * x[j]);
        x[i] = s / l[(i, i)];
    }
    x
}
