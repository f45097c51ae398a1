//! Scalar abstraction shared by every numeric routine in the crate.
//!
//! All math is written against [`Real`], which is implemented for `f32` and
//! `f64`. Dense linear algebra that needs a factorization is dispatched to
//! nalgebra through the trait so generic code never has to name nalgebra's
//! own field traits (whose method names collide with `num_traits::Float`).

use std::fmt::{Debug, Display};
use std::iter::Sum;

use nalgebra::DMatrix;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + rustfft::FftNum
    + nalgebra::Scalar
{
    /// Converts an `f64` literal. Never fails for the supported types.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 converts to every Real")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("Real converts to f64")
    }

    /// Eigenvalues (ascending) and eigenvectors (as columns) of a symmetric matrix.
    fn symmetric_eigen(m: &DMatrix<Self>) -> (Vec<Self>, DMatrix<Self>);

    /// Lower Cholesky factor, or `None` if the matrix is not positive definite.
    fn cholesky_lower(m: &DMatrix<Self>) -> Option<DMatrix<Self>>;
}

macro_rules! impl_real {
    ($t:ty) => {
        impl Real for $t {
            fn symmetric_eigen(m: &DMatrix<Self>) -> (Vec<Self>, DMatrix<Self>) {
                let eig = nalgebra::SymmetricEigen::new(m.clone());
                let n = eig.eigenvalues.len();
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
                let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
                let mut vectors = DMatrix::<$t>::zeros(n, n);
                for (dst, &src) in order.iter().enumerate() {
                    vectors.set_column(dst, &eig.eigenvectors.column(src));
                }
                (values, vectors)
            }

            fn cholesky_lower(m: &DMatrix<Self>) -> Option<DMatrix<Self>> {
                nalgebra::Cholesky::new(m.clone()).map(|c| c.l())
            }
        }
    };
}

impl_real!(f32);
impl_real!(f64);

/// Order-stable pairwise summation.
///
/// The reduction tree depends only on the slice length, so results are
/// bit-identical no matter how the inputs were produced.
pub fn tree_sum<T: Real>(xs: &[T]) -> T {
    match xs.len() {
        0 => T::zero(),
        1 => xs[0],
        n if n <= 8 => xs.iter().fold(T::zero(), |a, &b| a + b),
        n => {
            let (a, b) = xs.split_at(n / 2);
            tree_sum(a) + tree_sum(b)
        }
    }
}

/// `log(sum(exp(xs)))` without overflow.
pub fn log_sum_exp<T: Real>(xs: &[T]) -> T {
    let m = xs.iter().fold(T::neg_infinity(), |a, &b| a.max(b));
    if !m.is_finite() {
        return m;
    }
    let s: T = xs.iter().map(|&x| (x - m).exp()).sum();
    m + s.ln()
}
