//! Stationary Gaussian random fields on a regular grid.
//!
//! Fields are drawn by circulant embedding: the covariance of the grid is
//! embedded in a periodic covariance on a larger torus whose eigenvalues are
//! one 2-D FFT away. If the embedding has materially negative eigenvalues
//! after enlarging the torus, small grids fall back to a dense Cholesky
//! factorization.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::geometry::{ScalarField, Window};
use crate::real::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CorrelationFamily {
    Exponential,
    Gaussian,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationModel<T> {
    pub family: CorrelationFamily,
    pub scale: T,
}

impl<T: Real> CorrelationModel<T> {
    pub fn new(family: CorrelationFamily, scale: T) -> Result<Self> {
        if !(scale > T::zero()) || !scale.is_finite() {
            return invalid("correlation scale must be positive");
        }
        Ok(Self { family, scale })
    }

    pub fn exponential(scale: T) -> Result<Self> {
        Self::new(CorrelationFamily::Exponential, scale)
    }

    pub fn gaussian(scale: T) -> Result<Self> {
        Self::new(CorrelationFamily::Gaussian, scale)
    }

    #[inline]
    fn eval(&self, r: T) -> T {
        let s = r / self.scale;
        match self.family {
            CorrelationFamily::Exponential => (-s).exp(),
            CorrelationFamily::Gaussian => (-s * s).exp(),
        }
    }
}

/// Correlation at lag `r`.
pub fn corr<T: Real>(model: &CorrelationModel<T>, r: T) -> Result<T> {
    if r < T::zero() || r.is_nan() {
        return invalid("correlation lag must be non-negative");
    }
    Ok(model.eval(r))
}

const EMBED_TOLERANCE: f64 = 1e-6;
const MAX_PADDING: usize = 4;
const CHOLESKY_MAX_CELLS: usize = 4096;
const CHOLESKY_JITTER: f64 = 1e-10;

enum Method<T: Real> {
    Circulant {
        mx: usize,
        my: usize,
        /// sqrt(eigenvalue / (mx * my)), row-major over the torus.
        amplitude: Vec<T>,
        row_fft: Arc<dyn Fft<T>>,
        col_fft: Arc<dyn Fft<T>>,
    },
    Cholesky(DMatrix<T>),
}

/// Reusable sampler for one (grid, correlation model) combination.
pub struct GrfSampler<T: Real> {
    window: Window<T>,
    nx: usize,
    ny: usize,
    method: Method<T>,
}

impl<T: Real> GrfSampler<T> {
    pub fn new(window: Window<T>, nx: usize, ny: usize, model: CorrelationModel<T>) -> Result<Self> {
        if nx < 2 || ny < 2 {
            return invalid("field grids need at least 2 cells per axis");
        }
        let dx = window.width() / T::of(nx as f64);
        let dy = window.height() / T::of(ny as f64);
        if (dx * dx + dy * dy).sqrt() >= model.scale / T::of(2.0) {
            // Repeated simulations would flood the log; warn once per process.
            static WARNED: AtomicBool = AtomicBool::new(false);
            let level = if WARNED.swap(true, Ordering::Relaxed) { log::Level::Debug } else { log::Level::Warn };
            log::log!(
                level,
                "grid cell diagonal {} is not below half the correlation scale {}",
                (dx * dx + dy * dy).sqrt(),
                model.scale
            );
        }
        let mut planner = FftPlanner::<T>::new();
        for pad in (0..).map(|k| 1usize << k).take_while(|&f| f <= MAX_PADDING) {
            let (mx, my) = (2 * nx * pad, 2 * ny * pad);
            let mut base = vec![Complex::new(T::zero(), T::zero()); mx * my];
            for ly in 0..my {
                let hy = dy * T::of(ly.min(my - ly) as f64);
                for lx in 0..mx {
                    let hx = dx * T::of(lx.min(mx - lx) as f64);
                    base[ly * mx + lx].re = model.eval((hx * hx + hy * hy).sqrt());
                }
            }
            let row_fft = planner.plan_fft_forward(mx);
            let col_fft = planner.plan_fft_forward(my);
            fft2(&mut base, mx, my, &*row_fft, &*col_fft);
            let lmax = base.iter().fold(T::zero(), |a, c| a.max(c.re));
            let lmin = base.iter().fold(T::infinity(), |a, c| a.min(c.re));
            if lmin >= -T::of(EMBED_TOLERANCE) * lmax {
                let norm = T::of((mx * my) as f64);
                let amplitude = base.iter().map(|c| (c.re.max(T::zero()) / norm).sqrt()).collect();
                return Ok(Self {
                    window,
                    nx,
                    ny,
                    method: Method::Circulant { mx, my, amplitude, row_fft, col_fft },
                });
            }
        }
        let n = nx * ny;
        if n > CHOLESKY_MAX_CELLS {
            return Err(Error::FieldSimulation(format!(
                "circulant embedding is not non-negative definite and the {nx}x{ny} grid exceeds the dense fallback limit"
            )));
        }
        let centers: Vec<(T, T)> = (0..n)
            .map(|k| (dx * T::of((k % nx) as f64), dy * T::of((k / nx) as f64)))
            .collect();
        let mut cov = DMatrix::<T>::zeros(n, n);
        for a in 0..n {
            for b in 0..=a {
                let (hx, hy) = (centers[a].0 - centers[b].0, centers[a].1 - centers[b].1);
                let c = model.eval((hx * hx + hy * hy).sqrt());
                cov[(a, b)] = c;
                cov[(b, a)] = c;
            }
            cov[(a, a)] += T::of(CHOLESKY_JITTER);
        }
        let l = T::cholesky_lower(&cov)
            .ok_or_else(|| Error::FieldSimulation("grid covariance is not positive definite".into()))?;
        Ok(Self { window, nx, ny, method: Method::Cholesky(l) })
    }

    pub fn uses_circulant_embedding(&self) -> bool {
        matches!(self.method, Method::Circulant { .. })
    }

    /// Draws one zero-mean, unit-variance realization.
    pub fn sample(&self, seed: u64) -> Result<ScalarField<T>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut normal = || T::of(StandardNormal.sample(&mut rng));
        let values = match &self.method {
            Method::Circulant { mx, my, amplitude, row_fft, col_fft } => {
                let mut buf: Vec<Complex<T>> = amplitude
                    .iter()
                    .map(|&a| {
                        let re = normal();
                        let im = normal();
                        Complex::new(a * re, a * im)
                    })
                    .collect();
                fft2(&mut buf, *mx, *my, &**row_fft, &**col_fft);
                let mut v = Vec::with_capacity(self.nx * self.ny);
                for iy in 0..self.ny {
                    for ix in 0..self.nx {
                        v.push(buf[iy * mx + ix].re);
                    }
                }
                v
            }
            Method::Cholesky(l) => {
                let n = l.nrows();
                let z: Vec<T> = (0..n).map(|_| normal()).collect();
                (0..n)
                    .map(|a| (0..=a).fold(T::zero(), |s, b| s + l[(a, b)] * z[b]))
                    .collect()
            }
        };
        ScalarField::new(self.window, self.nx, self.ny, values)
    }
}

fn fft2<T: Real>(buf: &mut [Complex<T>], mx: usize, my: usize, row: &dyn Fft<T>, col: &dyn Fft<T>) {
    row.process(buf);
    let mut column = vec![Complex::new(T::zero(), T::zero()); my];
    for x in 0..mx {
        for y in 0..my {
            column[y] = buf[y * mx + x];
        }
        col.process(&mut column);
        for y in 0..my {
            buf[y * mx + x] = column[y];
        }
    }
}

/// Simulates a zero-mean unit-variance stationary Gaussian field on an
/// `nx` x `ny` grid over `window`.
pub fn simulate_grf<T: Real>(
    window: Window<T>,
    nx: usize,
    ny: usize,
    model: CorrelationModel<T>,
    seed: u64,
) -> Result<ScalarField<T>> {
    GrfSampler::new(window, nx, ny, model)?.sample(seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn correlation_values() {
        let e = CorrelationModel::exponential(0.05).unwrap();
        assert_eq!(corr(&e, 0.0).unwrap(), 1.0);
        assert!((corr(&e, 0.05).unwrap() - (-1f64).exp()).abs() < 1e-15);
        let g = CorrelationModel::gaussian(0.2).unwrap();
        assert!((corr(&g, 0.2).unwrap() - 0.36787944117144233f64).abs() < 1e-15);
        assert!(corr(&g, -0.1).is_err());
        assert!(CorrelationModel::<f64>::exponential(0.0).is_err());
    }

    #[test]
    fn correlation_is_monotone() {
        for m in [CorrelationModel::exponential(0.1).unwrap(), CorrelationModel::gaussian(0.1).unwrap()] {
            let vals: Vec<f64> = (0..100).map(|k| corr(&m, k as f64 * 0.01).unwrap()).collect();
            assert!(vals.windows(2).all(|w| w[1] <= w[0] && w[1] > 0.0));
        }
    }

    #[test]
    fn same_seed_is_bit_identical() {
        let m = CorrelationModel::exponential(0.1).unwrap();
        let a = simulate_grf(Window::unit(), 32, 32, m, 9).unwrap();
        let b = simulate_grf(Window::unit(), 32, 32, m, 9).unwrap();
        let c = simulate_grf(Window::unit(), 32, 32, m, 10).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn sample_covariance_matches_model() {
        let w = Window::unit();
        let m = CorrelationModel::gaussian(0.3).unwrap();
        let s = GrfSampler::<f64>::new(w, 4, 4, m).unwrap();
        assert!(s.uses_circulant_embedding());
        let n = 16;
        let mut sum = vec![0.0; n * n];
        let reps = 4000;
        for seed in 0..reps {
            let f = s.sample(seed).unwrap();
            let v = f.values();
            for a in 0..n {
                for b in 0..n {
                    sum[a * n + b] += v[a] * v[b];
                }
            }
        }
        let d = 0.25;
        for a in 0..n {
            for b in 0..n {
                let (hx, hy) = (((a % 4) as f64 - (b % 4) as f64) * d, ((a / 4) as f64 - (b / 4) as f64) * d);
                let target = corr(&m, (hx * hx + hy * hy).sqrt()).unwrap();
                assert!((sum[a * n + b] / reps as f64 - target).abs() < 0.08);
            }
        }
    }

    #[test]
    fn f32_fields_work() {
        let m = CorrelationModel::<f32>::exponential(0.1).unwrap();
        let f = simulate_grf(Window::unit(), 16, 16, m, 1).unwrap();
        assert!(f.values().iter().all(|v| v.is_finite()));
    }
}
