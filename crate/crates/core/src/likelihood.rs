//! Negative log conditional composite likelihood over pairs of nearby points,
//! with its analytic score and the covariance-based Hessian estimator.
//!
//! Mirrored entries `(u, v)` and `(v, u)` carry the same information because
//! `p_ij(u, v) = p_ji(v, u)`, so each unordered pair is evaluated once with a
//! multiplicity weight.

use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{PairEntry, PairIndex, PointPattern};
use crate::model::{FirstOrder, Theta};
use crate::real::{log_sum_exp, tree_sum, Real};

/// Parameter blocks in the order the optimizer visits them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Block {
    Alpha,
    Xi,
    Sigma2,
    Phi,
}

impl Block {
    pub const ALL: [Block; 4] = [Block::Alpha, Block::Xi, Block::Sigma2, Block::Phi];

    pub fn dim(self, p: usize, q: usize) -> usize {
        match self {
            Block::Alpha => p * q,
            Block::Xi => q,
            Block::Sigma2 | Block::Phi => p,
        }
    }
}

/// Position of `alpha[m][k]` in the stacked-columns vector of the alpha block.
#[inline]
pub fn alpha_index(p: usize, m: usize, k: usize) -> usize {
    k * p + m
}

/// An unordered pair `a < b` with observed types and multiplicity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedPair<T> {
    pub a: usize,
    pub b: usize,
    pub ti: usize,
    pub tj: usize,
    pub r: T,
    pub weight: T,
}

/// Data side of the likelihood: pairs, per-point first-order terms and the
/// fixed first-order estimate.
#[derive(Debug, Clone)]
pub struct LikelihoodContext<T: Real> {
    n_types: usize,
    log_f: Arc<Vec<Vec<T>>>,
    point_types: Arc<Vec<usize>>,
    index: Arc<PairIndex<T>>,
    pairs: Vec<WeightedPair<T>>,
    first_order: Arc<FirstOrder<T>>,
    length: T,
}

const CHUNK: usize = 512;

impl<T: Real> LikelihoodContext<T> {
    /// Enumerates pairs within `r_max` and caches `log f_i` at every point.
    pub fn new(pattern: &PointPattern<T>, first_order: FirstOrder<T>, r_max: T) -> Result<Self> {
        let pairs = crate::geometry::enumerate_pairs(pattern, r_max)?;
        Self::from_pairs(pattern, first_order, &pairs)
    }

    pub fn from_pairs(pattern: &PointPattern<T>, first_order: FirstOrder<T>, pairs: &PairIndex<T>) -> Result<Self> {
        if first_order.p() != pattern.n_types() {
            return invalid("first-order estimate and pattern disagree on the number of types");
        }
        let log_f = pattern
            .points()
            .iter()
            .map(|pt| first_order.log_f(&first_order.covariates_at(pt.x, pt.y)))
            .collect();
        let point_types = pattern.points().iter().map(|pt| pt.ty).collect();
        let base = Self {
            n_types: pattern.n_types(),
            log_f: Arc::new(log_f),
            point_types: Arc::new(point_types),
            index: Arc::new(PairIndex::from_entries(pairs.r_max(), pattern.n_types(), Vec::new())),
            pairs: Vec::new(),
            first_order: Arc::new(first_order),
            length: pattern.window().shorter_side(),
        };
        Ok(base.with_pairs(pairs))
    }

    /// Same points and first-order terms, different pair support.
    pub fn with_pairs(&self, pairs: &PairIndex<T>) -> Self {
        let mut canon: Vec<(usize, usize, T)> = pairs
            .entries()
            .iter()
            .map(|e| (e.u.min(e.v), e.u.max(e.v), e.r))
            .collect();
        canon.sort_by(|x, y| (x.0, x.1).cmp(&(y.0, y.1)));
        let mut out: Vec<WeightedPair<T>> = Vec::with_capacity(canon.len() / 2 + 1);
        for (a, b, r) in canon {
            match out.last_mut() {
                Some(last) if last.a == a && last.b == b => last.weight += T::one(),
                _ => out.push(WeightedPair {
                    a,
                    b,
                    ti: self.point_types[a],
                    tj: self.point_types[b],
                    r,
                    weight: T::one(),
                }),
            }
        }
        Self { pairs: out, index: Arc::new(pairs.clone()), ..self.clone_shallow() }
    }

    /// Keeps only the entries accepted by `keep`.
    pub fn filter(&self, keep: impl Fn(&PairEntry<T>) -> bool) -> Self {
        let sub = self.index.select(|k| keep(&self.index.entries()[k]));
        self.with_pairs(&sub)
    }

    /// The ordered pair entries behind this context.
    pub fn pair_index(&self) -> &PairIndex<T> {
        &self.index
    }

    fn clone_shallow(&self) -> Self {
        Self {
            n_types: self.n_types,
            log_f: Arc::clone(&self.log_f),
            point_types: Arc::clone(&self.point_types),
            index: Arc::clone(&self.index),
            pairs: Vec::new(),
            first_order: Arc::clone(&self.first_order),
            length: self.length,
        }
    }

    /// Shorter side of the observation window; sets the scale of parameter starts.
    pub fn length(&self) -> T {
        self.length
    }

    pub fn n_types(&self) -> usize {
        self.n_types
    }

    pub fn pairs(&self) -> &[WeightedPair<T>] {
        &self.pairs
    }

    /// Number of ordered entries represented.
    pub fn n_entries(&self) -> T {
        self.pairs.iter().map(|p| p.weight).sum()
    }

    pub fn log_f(&self, point: usize) -> &[T] {
        &self.log_f[point]
    }

    pub fn first_order(&self) -> &FirstOrder<T> {
        &self.first_order
    }

    /// Unordered pairs whose two points are both of type `m`.
    pub fn within_type_pairs(&self, m: usize) -> usize {
        self.pairs.iter().filter(|w| w.ti == m && w.tj == m).count()
    }
}

/// Objective value with optional block gradient and estimated Hessian
/// (row-major, `dim x dim`).
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<T> {
    pub value: T,
    pub grad: Vec<T>,
    pub hess: Vec<T>,
    pub dim: usize,
}

impl<T: Real> Evaluation<T> {
    fn zero(dim: usize, with_hess: bool) -> Self {
        Self { value: T::zero(), grad: vec![T::zero(); dim], hess: vec![T::zero(); if with_hess { dim * dim } else { 0 }], dim }
    }

    pub fn hessian_matrix(&self) -> DMatrix<T> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.hess)
    }
}

struct Scratch<T> {
    logits: Vec<T>,
    prob: Vec<T>,
    ps: Vec<T>,
    e: Vec<T>,
    d: Vec<T>,
    zbar: Vec<T>,
    zobs: Vec<T>,
    work: Vec<T>,
}

impl<T: Real> Scratch<T> {
    fn new(p: usize, q: usize, dim: usize) -> Self {
        Self {
            logits: vec![T::zero(); p * p],
            prob: vec![T::zero(); p * p],
            ps: vec![T::zero(); (p * p).max(q)],
            e: vec![T::zero(); q],
            d: vec![T::zero(); p],
            zbar: vec![T::zero(); dim],
            zobs: vec![T::zero(); dim],
            work: vec![T::zero(); p * q * q.max(p)],
        }
    }
}

fn check_theta<T: Real>(ctx: &LikelihoodContext<T>, theta: &Theta<T>) -> Result<()> {
    theta.validate()?;
    if theta.p() != ctx.n_types {
        return invalid("theta and data disagree on the number of types");
    }
    Ok(())
}

/// Fills `prob` and returns `log p` of the observed type pair.
#[inline]
fn pair_probs<T: Real>(ctx: &LikelihoodContext<T>, theta: &Theta<T>, w: &WeightedPair<T>, s: &mut Scratch<T>) -> Result<T> {
    let p = ctx.n_types;
    let q = theta.q();
    for k in 0..q {
        s.e[k] = (-w.r / theta.xi[k]).exp();
    }
    for m in 0..p {
        s.d[m] = (-w.r / theta.phi[m]).exp();
    }
    let (fa, fb) = (&ctx.log_f[w.a], &ctx.log_f[w.b]);
    for i in 0..p {
        let ai = &theta.alpha[i];
        for j in 0..p {
            let aj = &theta.alpha[j];
            let mut l = fa[i] + fb[j];
            for k in 0..q {
                l += ai[k] * aj[k] * s.e[k];
            }
            if i == j {
                l += theta.sigma2[i] * s.d[i];
            }
            s.logits[i * p + j] = l;
        }
    }
    let lse = log_sum_exp(&s.logits);
    for (pr, &l) in s.prob.iter_mut().zip(&s.logits) {
        *pr = (l - lse).exp();
    }
    let obs = w.ti * p + w.tj;
    if !(s.prob[obs] > T::zero()) {
        return Err(Error::ProbabilityUnderflow { u: w.a, v: w.b, r: w.r.as_f64() });
    }
    Ok(s.logits[obs] - lse)
}

/// Fills `zbar` (expected gradient of `log rho` under the pair probabilities)
/// and `zobs` (gradient at the observed outcome) and accumulates the second
/// moment into `acc.hess` if requested.
fn pair_block<T: Real>(
    theta: &Theta<T>,
    block: Block,
    w: &WeightedPair<T>,
    s: &mut Scratch<T>,
    acc: &mut Evaluation<T>,
    with_hess: bool,
) {
    let p = theta.p();
    let q = theta.q();
    let dim = acc.dim;
    let (oi, oj) = (w.ti, w.tj);
    let wt = w.weight;
    let prob = &s.prob;
    let alpha = &theta.alpha;
    match block {
        Block::Alpha => {
            for m in 0..p {
                for j in 0..p {
                    s.ps[m * p + j] = prob[m * p + j] + prob[j * p + m];
                }
            }
            let ps = &s.ps;
            for k in 0..q {
                for m in 0..p {
                    let mut acc_mk = T::zero();
                    for j in 0..p {
                        acc_mk += ps[m * p + j] * alpha[j][k];
                    }
                    let idx = alpha_index(p, m, k);
                    s.zbar[idx] = s.e[k] * acc_mk;
                    let mut o = T::zero();
                    if oi == m {
                        o += alpha[oj][k];
                    }
                    if oj == m {
                        o += alpha[oi][k];
                    }
                    s.zobs[idx] = s.e[k] * o;
                }
            }
            if with_hess {
                // work[m][k][k'] = sum_j Ps_mj alpha_jk alpha_jk'
                for m in 0..p {
                    for k in 0..q {
                        for k2 in k..q {
                            let mut g = T::zero();
                            for j in 0..p {
                                g += ps[m * p + j] * alpha[j][k] * alpha[j][k2];
                            }
                            s.work[(m * q + k) * q + k2] = g;
                            s.work[(m * q + k2) * q + k] = g;
                        }
                    }
                }
                for k in 0..q {
                    for m in 0..p {
                        let r = alpha_index(p, m, k);
                        for k2 in 0..q {
                            let ee = s.e[k] * s.e[k2];
                            for m2 in 0..p {
                                let c = alpha_index(p, m2, k2);
                                if c < r {
                                    continue;
                                }
                                let mut sm = ps[m * p + m2] * alpha[m2][k] * alpha[m][k2];
                                if m == m2 {
                                    sm += s.work[(m * q + k) * q + k2];
                                }
                                let v = wt * (ee * sm - s.zbar[r] * s.zbar[c]);
                                acc.hess[r * dim + c] += v;
                            }
                        }
                    }
                }
            }
        }
        Block::Xi => {
            // work[(i*p+j)*q + k] = alpha_ik alpha_jk
            for i in 0..p {
                for j in 0..p {
                    for k in 0..q {
                        s.work[(i * p + j) * q + k] = alpha[i][k] * alpha[j][k];
                    }
                }
            }
            // ps holds the scale factors s_k for this block
            for k in 0..q {
                s.ps[k] = s.e[k] * w.r / (theta.xi[k] * theta.xi[k]);
            }
            for k in 0..q {
                let mut m1 = T::zero();
                for ij in 0..p * p {
                    m1 += prob[ij] * s.work[ij * q + k];
                }
                s.zbar[k] = s.ps[k] * m1;
                s.zobs[k] = s.ps[k] * s.work[(oi * p + oj) * q + k];
            }
            if with_hess {
                for k in 0..q {
                    for k2 in k..q {
                        let mut m2 = T::zero();
                        for ij in 0..p * p {
                            m2 += prob[ij] * s.work[ij * q + k] * s.work[ij * q + k2];
                        }
                        acc.hess[k * dim + k2] += wt * (s.ps[k] * s.ps[k2] * m2 - s.zbar[k] * s.zbar[k2]);
                    }
                }
            }
        }
        Block::Sigma2 | Block::Phi => {
            for m in 0..p {
                let t = match block {
                    Block::Sigma2 => s.d[m],
                    _ => theta.sigma2[m] * s.d[m] * w.r / (theta.phi[m] * theta.phi[m]),
                };
                s.ps[m] = t;
                s.zbar[m] = prob[m * p + m] * t;
                s.zobs[m] = if oi == m && oj == m { t } else { T::zero() };
            }
            if with_hess {
                for m in 0..p {
                    for m2 in m..p {
                        let second = if m == m2 { prob[m * p + m] * s.ps[m] * s.ps[m] } else { T::zero() };
                        acc.hess[m * dim + m2] += wt * (second - s.zbar[m] * s.zbar[m2]);
                    }
                }
            }
        }
    }
    for t in 0..dim {
        acc.grad[t] += wt * (s.zbar[t] - s.zobs[t]);
    }
}

fn reduce<T: Real>(mut parts: Vec<Evaluation<T>>, dim: usize, with_hess: bool) -> Evaluation<T> {
    if parts.is_empty() {
        return Evaluation::zero(dim, with_hess);
    }
    // Pairwise tree over chunk results; layout depends only on the pair count.
    while parts.len() > 1 {
        let mut next = Vec::with_capacity(parts.len().div_ceil(2));
        let mut it = parts.into_iter();
        while let Some(mut a) = it.next() {
            if let Some(b) = it.next() {
                a.value += b.value;
                for (x, y) in a.grad.iter_mut().zip(&b.grad) {
                    *x += *y;
                }
                for (x, y) in a.hess.iter_mut().zip(&b.hess) {
                    *x += *y;
                }
            }
            next.push(a);
        }
        parts = next;
    }
    parts.pop().expect("non-empty")
}

/// Objective and, for `Some(block)`, the block gradient and (optionally) the
/// estimated Hessian, all with respect to the natural parameters.
pub fn evaluate<T: Real>(
    ctx: &LikelihoodContext<T>,
    theta: &Theta<T>,
    block: Option<Block>,
    with_hess: bool,
) -> Result<Evaluation<T>> {
    check_theta(ctx, theta)?;
    let (p, q) = (ctx.n_types, theta.q());
    let dim = block.map_or(0, |b| b.dim(p, q));
    let with_hess = with_hess && block.is_some();
    let parts: Vec<Evaluation<T>> = ctx
        .pairs
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut s = Scratch::new(p, q, dim);
            let mut acc = Evaluation::zero(dim, with_hess);
            let mut vals = Vec::with_capacity(chunk.len());
            for w in chunk {
                let lp = pair_probs(ctx, theta, w, &mut s)?;
                vals.push(-w.weight * lp);
                if let Some(b) = block {
                    pair_block(theta, b, w, &mut s, &mut acc, with_hess);
                }
            }
            acc.value = tree_sum(&vals);
            Ok(acc)
        })
        .collect::<Result<_>>()?;
    let mut out = reduce(parts, dim, with_hess);
    if with_hess {
        for r in 0..dim {
            for c in 0..r {
                out.hess[r * dim + c] = out.hess[c * dim + r];
            }
        }
    }
    Ok(out)
}

/// Negative log composite likelihood over all pair entries.
pub fn neg_log_cl<T: Real>(ctx: &LikelihoodContext<T>, theta: &Theta<T>) -> Result<T> {
    Ok(evaluate(ctx, theta, None, false)?.value)
}

/// Analytic gradient of [`neg_log_cl`] in one block. Alpha coordinates are
/// stacked by column (see [`alpha_index`]).
pub fn score<T: Real>(ctx: &LikelihoodContext<T>, theta: &Theta<T>, block: Block) -> Result<Vec<T>> {
    Ok(evaluate(ctx, theta, Some(block), false)?.grad)
}

/// Sum over pairs of the covariance of `grad log rho_ij` under the pair's
/// type probabilities.
pub fn estimated_hessian<T: Real>(ctx: &LikelihoodContext<T>, theta: &Theta<T>, block: Block) -> Result<DMatrix<T>> {
    Ok(evaluate(ctx, theta, Some(block), true)?.hessian_matrix())
}

/// Reads a block out of `theta` as a flat vector.
pub fn get_block<T: Real>(theta: &Theta<T>, block: Block) -> Vec<T> {
    let p = theta.p();
    match block {
        Block::Alpha => {
            let mut v = vec![T::zero(); p * theta.q()];
            for m in 0..p {
                for k in 0..theta.q() {
                    v[alpha_index(p, m, k)] = theta.alpha[m][k];
                }
            }
            v
        }
        Block::Xi => theta.xi.clone(),
        Block::Sigma2 => theta.sigma2.clone(),
        Block::Phi => theta.phi.clone(),
    }
}

/// Writes a flat block vector back into `theta`.
pub fn set_block<T: Real>(theta: &mut Theta<T>, block: Block, values: &[T]) {
    let p = theta.p();
    match block {
        Block::Alpha => {
            for m in 0..p {
                for k in 0..theta.q() {
                    theta.alpha[m][k] = values[alpha_index(p, m, k)];
                }
            }
        }
        Block::Xi => theta.xi.copy_from_slice(values),
        Block::Sigma2 => theta.sigma2.copy_from_slice(values),
        Block::Phi => theta.phi.copy_from_slice(values),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{enumerate_pairs, Point, Window};
    use crate::model::conditional_probs;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pattern(n: usize, p: usize, seed: u64) -> PointPattern<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = (0..n)
            .map(|_| Point { x: rng.random(), y: rng.random(), ty: rng.random_range(0..p) })
            .collect();
        PointPattern::new(Window::unit(), p, pts).unwrap()
    }

    fn theta3(seed: u64) -> Theta<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut alpha: Vec<Vec<f64>> = (0..3).map(|_| (0..2).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        for k in 0..2 {
            let s: f64 = alpha.iter().map(|r| r[k]).sum::<f64>() / 3.0;
            alpha.iter_mut().for_each(|r| r[k] -= s);
        }
        Theta::new(
            alpha,
            vec![rng.random_range(0.01..0.08), rng.random_range(0.01..0.08)],
            (0..3).map(|_| rng.random_range(0.1..1.0)).collect(),
            (0..3).map(|_| rng.random_range(0.01..0.08)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn two_point_uniform_model() {
        let pts = vec![Point { x: 0.2, y: 0.2, ty: 0 }, Point { x: 0.25, y: 0.2, ty: 1 }];
        let pat = PointPattern::new(Window::unit(), 2, pts).unwrap();
        let ctx = LikelihoodContext::new(&pat, FirstOrder::uniform(2), 0.1).unwrap();
        let t = Theta::independent(vec![0.0, 0.0], vec![0.05, 0.05]).unwrap();
        assert!((neg_log_cl(&ctx, &t).unwrap() - 2.0 * 4f64.ln()).abs() < 1e-14);
        assert_eq!(ctx.pairs().len(), 1);
        assert_eq!(ctx.pairs()[0].weight, 2.0);
    }

    #[test]
    fn empty_pairs_give_zero() {
        let pat = pattern(1, 2, 0);
        let ctx = LikelihoodContext::new(&pat, FirstOrder::uniform(2), 0.1).unwrap();
        let t = Theta::independent(vec![0.3, 0.3], vec![0.05, 0.05]).unwrap();
        assert_eq!(neg_log_cl(&ctx, &t).unwrap(), 0.0);
        assert!(score(&ctx, &t, Block::Sigma2).unwrap().iter().all(|&g| g == 0.0));
    }

    #[test]
    fn matches_direct_product_over_entries() {
        let pat = pattern(120, 3, 5);
        let fo = FirstOrder::new(vec![vec![0.2], vec![-0.1], vec![0.0]], Vec::new(), Some(2)).unwrap();
        let t = theta3(1);
        let ctx = LikelihoodContext::new(&pat, fo.clone(), 0.12).unwrap();
        let pairs = enumerate_pairs(&pat, 0.12).unwrap();
        let naive: f64 = pairs
            .entries()
            .iter()
            .map(|e| -conditional_probs(&fo, &t, &[], &[], e.r).unwrap()[e.ti][e.tj].ln())
            .sum();
        assert!((neg_log_cl(&ctx, &t).unwrap() - naive).abs() < 1e-9 * naive.abs());
    }

    #[test]
    fn zero_alpha_column_has_zero_xi_score() {
        let pat = pattern(150, 3, 2);
        let ctx = LikelihoodContext::new(&pat, FirstOrder::uniform(3), 0.1).unwrap();
        let mut t = theta3(3);
        for row in t.alpha.iter_mut() {
            row[1] = 0.0;
        }
        let g = score(&ctx, &t, Block::Xi).unwrap();
        assert_eq!(g[1], 0.0);
        assert!(g[0] != 0.0);
    }

    #[test]
    fn uniform_gradient_model_has_zero_hessian() {
        let pat = pattern(80, 2, 4);
        let ctx = LikelihoodContext::new(&pat, FirstOrder::uniform(2), 0.15).unwrap();
        let t = Theta::new(vec![vec![0.0], vec![0.0]], vec![0.05], vec![0.5, 0.5], vec![0.05, 0.05]).unwrap();
        let h = estimated_hessian(&ctx, &t, Block::Xi).unwrap();
        assert!(h.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn thread_count_does_not_change_bits() {
        let pat = pattern(400, 3, 8);
        let ctx = LikelihoodContext::new(&pat, FirstOrder::uniform(3), 0.1).unwrap();
        let t = theta3(4);
        let serial = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let wide = rayon::ThreadPoolBuilder::new().num_threads(4).build().unwrap();
        let a = serial.install(|| evaluate(&ctx, &t, Some(Block::Alpha), true).unwrap());
        let b = wide.install(|| evaluate(&ctx, &t, Some(Block::Alpha), true).unwrap());
        assert_eq!(a, b);
    }

    #[test]
    fn block_round_trip() {
        let mut t = theta3(9);
        let v = get_block(&t, Block::Alpha);
        assert_eq!(v[alpha_index(3, 2, 1)], t.alpha[2][1]);
        let mut w = v.clone();
        w[0] = 7.0;
        set_block(&mut t, Block::Alpha, &w);
        assert_eq!(t.alpha[0][0], 7.0);
    }

    #[test]
    fn score_matches_central_differences() {
        let pat = pattern(200, 3, 11);
        let fo = FirstOrder::new(vec![vec![0.3], vec![-0.2], vec![0.0]], Vec::new(), Some(2)).unwrap();
        let ctx = LikelihoodContext::new(&pat, fo, 0.1).unwrap();
        let t = theta3(12);
        for block in Block::ALL {
            let g = score(&ctx, &t, block).unwrap();
            let x0 = get_block(&t, block);
            for c in 0..x0.len() {
                let h = 1e-6;
                let mut tp = t.clone();
                let mut tm = t.clone();
                let (mut xp, mut xm) = (x0.clone(), x0.clone());
                xp[c] += h;
                xm[c] -= h;
                set_block(&mut tp, block, &xp);
                set_block(&mut tm, block, &xm);
                let fd = (neg_log_cl(&ctx, &tp).unwrap() - neg_log_cl(&ctx, &tm).unwrap()) / (2.0 * h);
                assert!((fd - g[c]).abs() <= 1e-5 * g[c].abs().max(1.0), "{block:?}[{c}]: {fd} vs {}", g[c]);
            }
        }
    }
}
