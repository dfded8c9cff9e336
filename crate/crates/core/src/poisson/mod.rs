//! Polyvector calculus and zeroth Poisson homology.

pub mod homology;
pub mod polyvector;

pub use homology::{hp0_reduce, hp_dim, Hp0Reducer};
pub use polyvector::{
    contract, de_rham, is_poisson, koszul, lichnerowicz, poisson_bracket, schouten, DifferentialForm,
    Polyvector,
};
