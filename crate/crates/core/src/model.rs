//! Parametric model: second-order parameters, first-order contrasts, cross
//! pair correlation functions, conditional type probabilities and forward
//! simulation of multivariate log-Gaussian Cox processes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fields::{CorrelationFamily, CorrelationModel, GrfSampler};
use crate::geometry::{Point, PointPattern, ScalarField};
use crate::real::{log_sum_exp, Real};

/// Second-order parameters: loadings `alpha` (p rows of length q), common
/// field scales `xi`, type-specific variances `sigma2` and scales `phi`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct Theta<T> {
    pub alpha: Vec<Vec<T>>,
    pub xi: Vec<T>,
    pub sigma2: Vec<T>,
    pub phi: Vec<T>,
}

impl<T: Real> Theta<T> {
    pub fn new(alpha: Vec<Vec<T>>, xi: Vec<T>, sigma2: Vec<T>, phi: Vec<T>) -> Result<Self> {
        let t = Self { alpha, xi, sigma2, phi };
        t.validate()?;
        Ok(t)
    }

    /// Independent types with no common fields.
    pub fn independent(sigma2: Vec<T>, phi: Vec<T>) -> Result<Self> {
        let p = sigma2.len();
        Self::new(vec![Vec::new(); p], Vec::new(), sigma2, phi)
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.sigma2.len();
        let q = self.xi.len();
        if p == 0 {
            return invalid("at least one type is required");
        }
        if self.phi.len() != p || self.alpha.len() != p {
            return invalid("alpha, sigma2 and phi must have one entry per type");
        }
        if self.alpha.iter().any(|row| row.len() != q) {
            return invalid("every alpha row needs one loading per common field");
        }
        let finite = |v: &[T]| v.iter().all(|x| x.is_finite());
        if !self.alpha.iter().all(|r| finite(r)) {
            return invalid("alpha must be finite");
        }
        if !self.xi.iter().chain(&self.phi).all(|&v| v > T::zero() && v.is_finite()) {
            return invalid("xi and phi must be positive and finite");
        }
        if !self.sigma2.iter().all(|&v| v >= T::zero() && v.is_finite()) {
            return invalid("sigma2 must be non-negative and finite");
        }
        Ok(())
    }

    pub fn p(&self) -> usize {
        self.sigma2.len()
    }

    pub fn q(&self) -> usize {
        self.xi.len()
    }

    pub fn column_sums(&self) -> Vec<T> {
        (0..self.q()).map(|k| self.alpha.iter().map(|r| r[k]).sum()).collect()
    }

    /// Largest absolute column sum of `alpha`.
    pub fn constraint_violation(&self) -> T {
        self.column_sums().into_iter().fold(T::zero(), |a, s| a.max(s.abs()))
    }

    fn check_types(&self, i: usize, j: usize) -> Result<()> {
        let p = self.p();
        for index in [i, j] {
            if index >= p {
                return Err(Error::TypeOutOfRange { index, n_types: p });
            }
        }
        Ok(())
    }

    #[inline]
    pub(crate) fn log_pcf_unchecked(&self, family: CorrelationFamily, i: usize, j: usize, r: T) -> T {
        let c = |scale: T| {
            let s = r / scale;
            match family {
                CorrelationFamily::Exponential => (-s).exp(),
                CorrelationFamily::Gaussian => (-s * s).exp(),
            }
        };
        let mut v = T::zero();
        for k in 0..self.q() {
            v += self.alpha[i][k] * self.alpha[j][k] * c(self.xi[k]);
        }
        if i == j {
            v += self.sigma2[i] * c(self.phi[i]);
        }
        v
    }

    /// Cross pair correlation `g_ij(r)` when the latent fields have the given
    /// correlation family. The fitted model is always exponential.
    pub fn pcf_with_family(&self, family: CorrelationFamily, i: usize, j: usize, r: T) -> Result<T> {
        self.check_types(i, j)?;
        if r < T::zero() || r.is_nan() {
            return invalid("lag must be non-negative");
        }
        Ok(self.log_pcf_unchecked(family, i, j, r).exp())
    }
}

/// Cross pair correlation function of the exponential-covariance model.
pub fn cross_pcf<T: Real>(theta: &Theta<T>, i: usize, j: usize, r: T) -> Result<T> {
    theta.pcf_with_family(CorrelationFamily::Exponential, i, j, r)
}

/// Log-linear first-order terms. Row `i` of `beta` holds an intercept
/// followed by one coefficient per covariate. When `baseline` is set that
/// row is identically zero and the rows are contrasts against it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound = "T: Real")]
pub struct FirstOrder<T> {
    pub beta: Vec<Vec<T>>,
    #[serde(skip)]
    pub covariates: Vec<ScalarField<T>>,
    pub baseline: Option<usize>,
}

impl<T: Real> FirstOrder<T> {
    pub fn new(beta: Vec<Vec<T>>, covariates: Vec<ScalarField<T>>, baseline: Option<usize>) -> Result<Self> {
        let m = covariates.len();
        if beta.is_empty() {
            return invalid("at least one type is required");
        }
        if beta.iter().any(|row| row.len() != m + 1 || row.iter().any(|v| !v.is_finite())) {
            return invalid("each beta row needs a finite intercept plus one coefficient per covariate");
        }
        if let Some(b) = baseline {
            if b >= beta.len() {
                return Err(Error::TypeOutOfRange { index: b, n_types: beta.len() });
            }
            if beta[b].iter().any(|v| *v != T::zero()) {
                return invalid("the baseline row of beta must be zero");
            }
        }
        Ok(Self { beta, covariates, baseline })
    }

    /// All types share the same first-order term.
    pub fn uniform(p: usize) -> Self {
        Self { beta: vec![vec![T::zero()]; p], covariates: Vec::new(), baseline: None }
    }

    pub fn p(&self) -> usize {
        self.beta.len()
    }

    pub fn n_covariates(&self) -> usize {
        self.covariates.len()
    }

    pub fn covariates_at(&self, x: T, y: T) -> Vec<T> {
        self.covariates.iter().map(|f| f.value_at(x, y)).collect()
    }

    /// `log f_i` for every type given covariate values `z`.
    pub fn log_f(&self, z: &[T]) -> Vec<T> {
        self.beta
            .iter()
            .map(|row| row[0] + row[1..].iter().zip(z).fold(T::zero(), |s, (b, v)| s + *b * *v))
            .collect()
    }
}

/// Probability that the first point of a pair at distance `r` is of type `i`
/// and the second of type `j`, returned as a `p x p` matrix.
pub fn conditional_probs<T: Real>(
    first_order: &FirstOrder<T>,
    theta: &Theta<T>,
    z_u: &[T],
    z_v: &[T],
    r: T,
) -> Result<Vec<Vec<T>>> {
    let p = theta.p();
    if first_order.p() != p {
        return invalid("first-order and second-order parts disagree on the number of types");
    }
    if !(r > T::zero()) {
        return invalid("pair distance must be positive");
    }
    let m = first_order.n_covariates();
    if z_u.len() != m || z_v.len() != m {
        return invalid("covariate vectors must match the number of covariates");
    }
    let fu = first_order.log_f(z_u);
    let fv = first_order.log_f(z_v);
    let mut logits = Vec::with_capacity(p * p);
    for i in 0..p {
        for j in 0..p {
            logits.push(fu[i] + fv[j] + theta.log_pcf_unchecked(CorrelationFamily::Exponential, i, j, r));
        }
    }
    let lse = log_sum_exp(&logits);
    Ok(logits.chunks(p).map(|row| row.iter().map(|&l| (l - lse).exp()).collect()).collect())
}

/// Everything needed to draw a multivariate LGCP. The first-order rows are
/// the actual `gamma_i`, not contrasts; fields are drawn on the grid of `rho0`.
#[derive(Debug, Clone)]
pub struct SimulationSpec<T: Real> {
    pub rho0: ScalarField<T>,
    pub gamma: FirstOrder<T>,
    pub theta: Theta<T>,
    pub family: CorrelationFamily,
    pub seed: u64,
}

impl<T: Real> SimulationSpec<T> {
    pub fn validate(&self) -> Result<()> {
        self.theta.validate()?;
        if self.gamma.p() != self.theta.p() {
            return invalid("gamma and theta disagree on the number of types");
        }
        if self.rho0.values().iter().any(|&v| !(v > T::zero())) {
            return invalid("rho0 must be strictly positive");
        }
        Ok(())
    }

    /// `rho0(u) exp(gamma_i' z(u))` on the simulation grid.
    pub fn type_intensity(&self, i: usize) -> Result<ScalarField<T>> {
        if i >= self.theta.p() {
            return Err(Error::TypeOutOfRange { index: i, n_types: self.theta.p() });
        }
        let f = &self.rho0;
        let mut values = Vec::with_capacity(f.values().len());
        for iy in 0..f.ny() {
            for ix in 0..f.nx() {
                let (x, y) = f.cell_center(ix, iy);
                let lf = self.gamma.log_f(&self.gamma.covariates_at(x, y))[i];
                values.push(f.values()[iy * f.nx() + ix] * lf.exp());
            }
        }
        ScalarField::new(*f.window(), f.nx(), f.ny(), values)
    }

    /// Draws the random intensities `Lambda_i` on the grid.
    pub fn simulate_intensities(&self) -> Result<Vec<ScalarField<T>>> {
        self.validate()?;
        let (p, q) = (self.theta.p(), self.theta.q());
        let grid = &self.rho0;
        let (win, nx, ny) = (*grid.window(), grid.nx(), grid.ny());
        let mut seeds = ChaCha8Rng::seed_from_u64(self.seed);
        let field_seeds: Vec<u64> = (0..q + p).map(|_| seeds.random()).collect();
        let sample = |scale: T, seed: u64| -> Result<ScalarField<T>> {
            GrfSampler::new(win, nx, ny, CorrelationModel::new(self.family, scale)?)?.sample(seed)
        };
        let common: Vec<ScalarField<T>> =
            (0..q).map(|k| sample(self.theta.xi[k], field_seeds[k])).collect::<Result<_>>()?;
        let half = T::of(0.5);
        let mut out = Vec::with_capacity(p);
        for i in 0..p {
            let alpha = &self.theta.alpha[i];
            let s2 = self.theta.sigma2[i];
            let mu = -alpha.iter().fold(T::zero(), |a, &v| a + v * v) * half - s2 * half;
            let specific = if s2 > T::zero() { Some(sample(self.theta.phi[i], field_seeds[q + i])?) } else { None };
            let base = self.type_intensity(i)?;
            let sd = s2.sqrt();
            let values = (0..nx * ny)
                .map(|c| {
                    let mut e = mu;
                    for (k, y) in common.iter().enumerate() {
                        e += alpha[k] * y.values()[c];
                    }
                    if let Some(u) = &specific {
                        e += sd * u.values()[c];
                    }
                    base.values()[c] * e.exp()
                })
                .collect();
            out.push(ScalarField::new(win, nx, ny, values)?);
        }
        Ok(out)
    }
}

/// Simulates a multivariate LGCP by drawing Poisson counts per grid cell and
/// placing the points uniformly inside each cell.
pub fn simulate_mlgcp<T: Real>(spec: &SimulationSpec<T>) -> Result<PointPattern<T>> {
    let lambdas = spec.simulate_intensities()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed ^ 0x9e37_79b9_7f4a_7c15);
    poisson_points(&lambdas, &mut rng)
}

/// Inhomogeneous Poisson points for piecewise-constant intensities on a
/// shared grid, one field per type.
pub fn poisson_points<T: Real>(lambdas: &[ScalarField<T>], rng: &mut impl Rng) -> Result<PointPattern<T>> {
    let first = lambdas.first().ok_or_else(|| Error::InvalidArgument("no intensities".into()))?;
    let (win, nx) = (*first.window(), first.nx());
    let (dx, dy, area) = (first.dx(), first.dy(), first.cell_area());
    let mut points = Vec::new();
    for (ty, lam) in lambdas.iter().enumerate() {
        for (c, &v) in lam.values().iter().enumerate() {
            let mean = (v * area).as_f64();
            if !(mean > 0.0) {
                continue;
            }
            let n = Poisson::new(mean).map_err(|e| Error::InvalidArgument(e.to_string()))?.sample(rng) as usize;
            let (ix, iy) = (c % nx, c / nx);
            let x0 = win.x0 + dx * T::of(ix as f64);
            let y0 = win.y0 + dy * T::of(iy as f64);
            for _ in 0..n {
                let x = (x0 + dx * T::of(rng.random::<f64>())).min(win.x1);
                let y = (y0 + dy * T::of(rng.random::<f64>())).min(win.y1);
                points.push(Point { x, y, ty });
            }
        }
    }
    PointPattern::new(win, lambdas.len(), points)
}
