//! Multivariate log-Gaussian Cox processes: simulation and inference by
//! second-order conditional composite likelihood.

pub mod error;
pub mod fields;
pub mod first_order;
pub mod geometry;
pub mod io;
pub mod likelihood;
pub mod model;
pub mod nonparam;
pub mod optimizer;
pub mod real;
pub mod scenario;
pub mod selection;
pub mod study;

pub use error::{Error, Result};
pub use real::Real;

/// Double-precision aliases for the common types.
pub type Theta64 = model::Theta<f64>;
pub type FirstOrder64 = model::FirstOrder<f64>;
pub type PointPattern64 = geometry::PointPattern<f64>;
pub type ScalarField64 = geometry::ScalarField<f64>;
pub type Window64 = geometry::Window<f64>;
pub type FitResult64 = optimizer::FitResult<f64>;
pub type LikelihoodContext64 = likelihood::LikelihoodContext<f64>;

/// Single-precision aliases for the common types.
pub type Theta32 = model::Theta<f32>;
pub type PointPattern32 = geometry::PointPattern<f32>;
pub type ScalarField32 = geometry::ScalarField<f32>;
