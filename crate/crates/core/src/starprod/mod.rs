//! Star products given by bidifferential series, the fiberwise product they
//! induce, and idempotents in the matrix star algebra.

mod idempotent;

pub use idempotent::{
    ch00, idempotent_lift, idempotent_path, mat_binomial_invsqrt, mat_neumann_inverse, path_derivative_residual, path_sandwich,
    principal_symbol,
};

use std::collections::{BTreeMap, HashMap};

use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fedosov::FedosovData;
use crate::hochschild::{Cochain, Multi};
use crate::poisson::Polyvector;
use crate::weyl::matrix::MatrixSeries;
use crate::weyl::model::ModelConfig;
use crate::weyl::monomial::MAX_DIM;
use crate::weyl::product::SeriesProduct;
use crate::weyl::rational::{self, Rational};
use crate::weyl::series::FormalSeries;

/// `Σ c_{αβ} ∂^α a · ∂^β b`, keyed by the pair of multi-indices.
pub type Bidifferential = BTreeMap<(Multi, Multi), FormalSeries>;

/// `a ⋆ b = ab + Σ_k ℏ^k B_k(a, b)` on base functions. `orders[k-1]` is `B_k`.
#[derive(Clone, Debug, PartialEq)]
pub struct StarProduct {
    model: ModelConfig,
    orders: Vec<Bidifferential>,
}

fn total(alpha: &Multi) -> u32 {
    alpha.iter().map(|&a| a as u32).sum()
}

fn add_multi(a: &Multi, i: usize) -> Multi {
    let mut out = *a;
    out[i] += 1;
    out
}

/// `(1/(2^k k!)) (π^{ij} ∂_i ⊗ ∂_j)^k` for a constant matrix `π`.
fn moyal_orders(model: ModelConfig, pi: &[Vec<Rational>], max_order: u32) -> Vec<Bidifferential> {
    let d = model.dim;
    let mut power: BTreeMap<(Multi, Multi), Rational> = BTreeMap::new();
    power.insert(([0; MAX_DIM], [0; MAX_DIM]), rational::one());
    let mut orders = Vec::new();
    for k in 1..=max_order {
        let mut next: BTreeMap<(Multi, Multi), Rational> = BTreeMap::new();
        for ((a, b), c) in &power {
            for i in 0..d {
                for j in 0..d {
                    if pi[i][j].is_zero() {
                        continue;
                    }
                    *next.entry((add_multi(a, i), add_multi(b, j))).or_insert_with(rational::zero) += c * &pi[i][j];
                }
            }
        }
        next.retain(|_, c| !c.is_zero());
        power = next;
        let norm = rational::int(1i64 << k) * rational::factorial(k);
        orders.push(
            power
                .iter()
                .map(|(key, c)| (*key, FormalSeries::constant(model, c / &norm)))
                .collect(),
        );
    }
    orders
}

fn constant_matrix(pi1: &Polyvector) -> Result<Vec<Vec<Rational>>> {
    let model = *pi1.model();
    if !pi1.is_hbar_free() || pi1.degree_part(2) != *pi1 {
        return Err(Error::Precondition("expected an hbar-free bivector".into()));
    }
    let d = model.dim;
    let mut out = vec![vec![rational::zero(); d]; d];
    for i in 0..d {
        for j in 0..d {
            let c = pi1.component(i, j);
            let value = c.coefficient(&crate::weyl::monomial::Monomial::one());
            if c != FormalSeries::constant(model, value.clone()) {
                return Err(Error::Precondition(format!(
                    "bivector component ({}, {}) is not constant: {c}",
                    i + 1,
                    j + 1
                )));
            }
            out[i][j] = value;
        }
    }
    Ok(out)
}

impl StarProduct {
    /// Arbitrary bidifferential terms; used to build counterexamples and to
    /// load products that were not generated here.
    pub fn from_orders(model: ModelConfig, orders: Vec<Bidifferential>) -> Result<Self> {
        for b in &orders {
            for c in b.values() {
                model.ensure_same(c.model())?;
                if c.has_fiber() {
                    return Err(Error::Precondition("star product coefficients must be base functions".into()));
                }
            }
        }
        Ok(StarProduct { model, orders })
    }

    /// Weyl-symmetric Moyal product for a constant bivector, using the model's
    /// base derivations.
    pub fn moyal(pi1: &Polyvector) -> Result<Self> {
        let model = *pi1.model();
        let pi = constant_matrix(pi1)?;
        Ok(StarProduct {
            model,
            orders: moyal_orders(model, &pi, model.hbar_max),
        })
    }

    /// Moyal product on Laurent polynomials, derivations `u^i ∂_{u^i}`.
    pub fn moyal_torus(pi1: &Polyvector) -> Result<Self> {
        if !pi1.model().is_torus() {
            return Err(Error::Precondition("moyal_torus needs a torus model".into()));
        }
        Self::moyal(pi1)
    }

    pub fn model(&self) -> &ModelConfig {
        &self.model
    }

    pub fn orders(&self) -> &[Bidifferential] {
        &self.orders
    }

    /// Every `B_k` has order at most `k` in each argument.
    pub fn is_natural(&self) -> bool {
        self.orders.iter().enumerate().all(|(i, b)| {
            let k = i as u32 + 1;
            b.iter()
                .all(|((a, c), coef)| coef.is_zero() || (total(a) <= k && total(c) <= k))
        })
    }

    /// `a ⋆ b`; inputs may carry forms, ℏ and `t` but no fiber variables.
    pub fn star_mul(&self, a: &FormalSeries, b: &FormalSeries) -> Result<FormalSeries> {
        self.model.ensure_same(a.model())?;
        self.model.ensure_same(b.model())?;
        if a.has_fiber() || b.has_fiber() {
            return Err(Error::Precondition("star product of series with fiber content".into()));
        }
        Ok(self.apply(a, b, |s, alpha| s.base_derive_multi(alpha)))
    }

    pub fn mat_star_mul(&self, a: &MatrixSeries, b: &MatrixSeries) -> Result<MatrixSeries> {
        for e in a.entries().iter().chain(b.entries()) {
            if e.has_fiber() {
                return Err(Error::Precondition("star product of series with fiber content".into()));
            }
        }
        self.model.ensure_same(a.model())?;
        Ok(a.mul_with(b, self))
    }

    /// `(a ⋆ b) ⋆ c − a ⋆ (b ⋆ c)`.
    pub fn associator(&self, a: &FormalSeries, b: &FormalSeries, c: &FormalSeries) -> Result<FormalSeries> {
        let left = self.star_mul(&self.star_mul(a, b)?, c)?;
        let right = self.star_mul(a, &self.star_mul(b, c)?)?;
        Ok(&left - &right)
    }

    /// `ab + Σ ℏ^k Σ c ∂^α a ∂^β b` with a pluggable derivative.
    fn apply(&self, a: &FormalSeries, b: &FormalSeries, derive: impl Fn(&FormalSeries, &Multi) -> FormalSeries) -> FormalSeries {
        let mut out = a * b;
        if a.is_zero() || b.is_zero() {
            return out;
        }
        let mut left: HashMap<Multi, FormalSeries> = HashMap::new();
        let mut right: HashMap<Multi, FormalSeries> = HashMap::new();
        for (i, bk) in self.orders.iter().enumerate() {
            let k = i as u8 + 1;
            if k as u32 > self.model.hbar_max {
                break;
            }
            for ((alpha, beta), coef) in bk {
                let da = left.entry(*alpha).or_insert_with(|| derive(a, alpha));
                if da.is_zero() {
                    continue;
                }
                let db = right.entry(*beta).or_insert_with(|| derive(b, beta));
                if db.is_zero() {
                    continue;
                }
                let term = &(coef * &*da) * &*db;
                out = &out + &term.shift_hbar(k);
            }
        }
        out
    }

    /// The induced fiberwise product `⋄` as an arity-2 cochain acting on fiber
    /// variables. Only the flat model is supported, where the lift of a
    /// constant-coefficient product is the same series in `y`.
    pub fn fiber_product(&self, fd: &FedosovData) -> Result<Cochain> {
        self.model.ensure_same(fd.model())?;
        if !fd.is_flat() {
            return Err(Error::Unsupported("fiber product for a curved connection".into()));
        }
        self.ensure_constant()?;
        let mut out = Cochain::product(self.model, 1);
        for (i, bk) in self.orders.iter().enumerate() {
            for ((alpha, beta), coef) in bk {
                let term = Cochain::scalar_operator(&coef.shift_hbar(i as u8 + 1), &[*alpha, *beta]);
                out = out.try_add(&term)?;
            }
        }
        Ok(out)
    }

    /// `⋄` as a product on fiber series.
    pub fn fiber_moyal(&self, fd: &FedosovData) -> Result<FiberProduct> {
        self.model.ensure_same(fd.model())?;
        if !fd.is_flat() {
            return Err(Error::Unsupported("fiber product for a curved connection".into()));
        }
        self.ensure_constant()?;
        Ok(FiberProduct { star: self.clone() })
    }

    fn ensure_constant(&self) -> Result<()> {
        let one = crate::weyl::monomial::Monomial::one();
        for b in &self.orders {
            for c in b.values() {
                if *c != FormalSeries::constant(self.model, c.coefficient(&one)) {
                    return Err(Error::Precondition("fiber lift needs constant coefficients".into()));
                }
            }
        }
        Ok(())
    }
}

impl SeriesProduct for StarProduct {
    fn product(&self, a: &FormalSeries, b: &FormalSeries) -> FormalSeries {
        self.star_mul(a, b).expect("star product inputs")
    }
}

/// The same bidifferential series with fiber derivatives `∂/∂y`.
#[derive(Clone, Debug)]
pub struct FiberProduct {
    star: StarProduct,
}

impl SeriesProduct for FiberProduct {
    fn product(&self, a: &FormalSeries, b: &FormalSeries) -> FormalSeries {
        self.star.model.ensure_same(a.model()).expect("fiber product across models");
        self.star.model.ensure_same(b.model()).expect("fiber product across models");
        self.star.apply(a, b, |s, alpha| s.fiber_derive_multi(alpha))
    }
}

/// Whether every stored `B_k` has order at most `k` per argument.
pub fn naturality_check(s: &StarProduct) -> bool {
    s.is_natural()
}
