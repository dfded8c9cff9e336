//! Exact graded series arithmetic and the fiber contraction operators.

pub mod contraction;
pub mod expr;
pub mod matrix;
pub mod model;
pub mod monomial;
pub mod product;
pub mod rational;
pub mod sample;
pub mod series;

pub use contraction::{chi, delta, delta_inv, filtration_weight, hodge_residual};
pub use expr::{format_series, parse_series};
pub use matrix::MatrixSeries;
pub use model::{ModelConfig, ModelKind};
pub use monomial::{Monomial, MAX_DIM};
pub use product::{Pointwise, SeriesProduct};
pub use rational::Rational;
pub use series::{base_derive, series_mul, FormalSeries};
