use crate::error::{Error, Result};
use crate::poisson::{Hp0Reducer, Polyvector};
use crate::starprod::StarProduct;
use crate::weyl::model::ModelConfig;
use crate::weyl::monomial::{Monomial, MAX_DIM};
use crate::weyl::rational;
use crate::weyl::series::FormalSeries;

/// Trace density on functions: reduction modulo the image of the Koszul
/// differential of `π₁`, one power of ℏ at a time.
///
/// The construction checks that the reduction kills ⋆-commutators of all
/// pairs of monomials with exponents in `[-1, 1]` and refuses the model otherwise.
#[derive(Clone, Debug)]
pub struct TraceDensity {
    star: StarProduct,
    reducer: Hp0Reducer,
}

/// Base monomials with every exponent in `[-r, r]` (or `[0, r]` on the plane).
pub fn sample_modes(model: &ModelConfig, r: u32) -> Vec<FormalSeries> {
    let lo = if model.is_torus() { -(r as i16) } else { 0 };
    let mut exps: Vec<[i16; MAX_DIM]> = vec![[0; MAX_DIM]];
    for i in 0..model.dim {
        exps = exps
            .into_iter()
            .flat_map(|e| {
                (lo..=r as i16).map(move |k| {
                    let mut e2 = e;
                    e2[i] = k;
                    e2
                })
            })
            .collect();
    }
    exps.into_iter()
        .map(|e| {
            let mut m = Monomial::one();
            m.base = e;
            FormalSeries::term(*model, m, rational::one())
        })
        .collect()
}

impl TraceDensity {
    pub fn new(pi1: &Polyvector) -> Result<Self> {
        let star = StarProduct::moyal(pi1)?;
        let reducer = Hp0Reducer::new(pi1)?;
        let out = TraceDensity { star, reducer };
        let model = *pi1.model();
        let modes = sample_modes(&model, (model.base_cutoff / 2).min(1));
        for a in &modes {
            for b in &modes {
                let c = out.apply(&out.commutator(a, b)?)?;
                if !c.is_zero() {
                    return Err(Error::Unsupported(format!("reduction is not a trace: trd([{a}, {b}]) = {c}")));
                }
            }
        }
        Ok(out)
    }

    pub fn star(&self) -> &StarProduct {
        &self.star
    }

    pub fn reducer(&self) -> &Hp0Reducer {
        &self.reducer
    }

    pub fn apply(&self, a: &FormalSeries) -> Result<FormalSeries> {
        self.reducer.reduce(a)
    }

    /// `a ⋆ b − b ⋆ a`.
    pub fn commutator(&self, a: &FormalSeries, b: &FormalSeries) -> Result<FormalSeries> {
        Ok(&self.star.star_mul(a, b)? - &self.star.star_mul(b, a)?)
    }
}

/// `trd(a)` for a constant Poisson bivector `π₁`.
pub fn trd(a: &FormalSeries, pi1: &Polyvector) -> Result<FormalSeries> {
    TraceDensity::new(pi1)?.apply(a)
}
