//! Maurer–Cartan calculus over the graded Lie algebras of the engine:
//! residuals, twisted differentials, gauge action and twisted modules.

use std::fmt;

use crate::error::{Error, Result};
use crate::fedosov::FedosovData;
use crate::hochschild::{Chain, Cochain};
use crate::poisson::{schouten, Polyvector};
use crate::weyl::matrix::MatrixSeries;
use crate::weyl::model::ModelConfig;
use crate::weyl::product::Pointwise;
use crate::weyl::rational::{self, frac, Rational};
use crate::weyl::series::FormalSeries;

/// A differential graded Lie algebra with `ℏ`-adic elements.
pub trait Dgla {
    type Elem: Clone + PartialEq + fmt::Debug;

    fn model(&self) -> &ModelConfig;
    fn zero(&self) -> Self::Elem;
    fn is_zero(&self, x: &Self::Elem) -> bool;
    fn add(&self, x: &Self::Elem, y: &Self::Elem) -> Result<Self::Elem>;
    fn scale(&self, x: &Self::Elem, c: &Rational) -> Self::Elem;
    /// Degrees of the homogeneous pieces, sorted and deduplicated.
    fn degrees(&self, x: &Self::Elem) -> Vec<i64>;
    /// Lowest power of `ℏ`, `None` for zero.
    fn hbar_order(&self, x: &Self::Elem) -> Option<u32>;
    fn d(&self, x: &Self::Elem) -> Result<Self::Elem>;
    fn bracket(&self, x: &Self::Elem, y: &Self::Elem) -> Result<Self::Elem>;
}

/// A dg module over `L`.
pub trait DglaModule<L: Dgla> {
    type Elem: Clone + PartialEq + fmt::Debug;

    fn d(&self, m: &Self::Elem) -> Result<Self::Elem>;
    fn act(&self, a: &L::Elem, m: &Self::Elem) -> Result<Self::Elem>;
    fn add(&self, m: &Self::Elem, n: &Self::Elem) -> Result<Self::Elem>;
}

fn series_hbar_order(s: &FormalSeries) -> Option<u32> {
    s.iter().map(|(m, _)| m.hbar as u32).min()
}

fn min_order(orders: impl Iterator<Item = Option<u32>>) -> Option<u32> {
    orders.flatten().min()
}

fn ensure_degree<L: Dgla>(l: &L, x: &L::Elem, degree: i64, what: &str) -> Result<()> {
    let degrees = l.degrees(x);
    if degrees.iter().any(|&k| k != degree) {
        return Err(Error::Precondition(format!("{what} must have degree {degree}, found {degrees:?}")));
    }
    Ok(())
}

fn ensure_small<L: Dgla>(l: &L, x: &L::Elem, what: &str) -> Result<()> {
    if l.hbar_order(x).is_some_and(|h| h == 0) {
        return Err(Error::Precondition(format!("{what} must be divisible by hbar")));
    }
    Ok(())
}

/// `d α + ½[α, α]` for `α ∈ ℏ L¹`.
pub fn mc_residual<L: Dgla>(l: &L, alpha: &L::Elem) -> Result<L::Elem> {
    ensure_degree(l, alpha, 1, "Maurer-Cartan element")?;
    ensure_small(l, alpha, "Maurer-Cartan element")?;
    l.add(&l.d(alpha)?, &l.scale(&l.bracket(alpha, alpha)?, &frac(1, 2)))
}

pub fn is_mc<L: Dgla>(l: &L, alpha: &L::Elem) -> Result<bool> {
    Ok(l.is_zero(&mc_residual(l, alpha)?))
}

fn ensure_mc<L: Dgla>(l: &L, alpha: &L::Elem) -> Result<()> {
    let r = mc_residual(l, alpha)?;
    if !l.is_zero(&r) {
        return Err(Error::Residual {
            check: "Maurer-Cartan equation".into(),
            residual: format!("{r:?}"),
        });
    }
    Ok(())
}

/// `d x + [α, x]` for a Maurer–Cartan `α`.
pub fn twist_differential<L: Dgla>(l: &L, alpha: &L::Elem, x: &L::Elem) -> Result<L::Elem> {
    ensure_mc(l, alpha)?;
    l.add(&l.d(x)?, &l.bracket(alpha, x)?)
}

/// `α + f([·, ξ])(dξ + [α, ξ])` with `f(x) = (eˣ − 1)/x`. The series stops
/// because each bracket with `ξ` raises the `ℏ` order.
pub fn gauge_act<L: Dgla>(l: &L, xi: &L::Elem, alpha: &L::Elem) -> Result<L::Elem> {
    ensure_degree(l, xi, 0, "gauge element")?;
    ensure_small(l, xi, "gauge element")?;
    ensure_degree(l, alpha, 1, "Maurer-Cartan element")?;
    let mut term = l.add(&l.d(xi)?, &l.bracket(alpha, xi)?)?;
    let mut out = alpha.clone();
    for k in 1..=l.model().hbar_max + 1 {
        if l.is_zero(&term) {
            break;
        }
        // term = ad^{k−1}(y) / k!
        out = l.add(&out, &term)?;
        term = l.scale(&l.bracket(&term, xi)?, &frac(1, k as i64 + 1));
    }
    Ok(out)
}

/// Module differential twisted by a Maurer–Cartan element: `d_M + act(α)`.
pub fn semidirect_twist<L: Dgla, M: DglaModule<L>>(l: &L, module: &M, alpha: &L::Elem, m: &M::Elem) -> Result<M::Elem> {
    ensure_mc(l, alpha)?;
    module.add(&module.d(m)?, &module.act(alpha, m)?)
}

/// Polyvector fields with the Schouten bracket; a `k`-vector has degree `k − 1`.
#[derive(Clone, Debug)]
pub struct PolyvectorDgla {
    model: ModelConfig,
}

impl PolyvectorDgla {
    pub fn new(model: ModelConfig) -> Self {
        PolyvectorDgla { model }
    }
}

impl Dgla for PolyvectorDgla {
    type Elem = Polyvector;

    fn model(&self) -> &ModelConfig {
        &self.model
    }
    fn zero(&self) -> Polyvector {
        Polyvector::zero(self.model)
    }
    fn is_zero(&self, x: &Polyvector) -> bool {
        x.is_zero()
    }
    fn add(&self, x: &Polyvector, y: &Polyvector) -> Result<Polyvector> {
        Polyvector::new(x.series().try_add(y.series())?)
    }
    fn scale(&self, x: &Polyvector, c: &Rational) -> Polyvector {
        Polyvector::new(x.series().scale(c)).expect("scaling keeps base content")
    }
    fn degrees(&self, x: &Polyvector) -> Vec<i64> {
        x.series().form_components().iter().map(|(k, _)| *k as i64 - 1).collect()
    }
    fn hbar_order(&self, x: &Polyvector) -> Option<u32> {
        series_hbar_order(x.series())
    }
    fn d(&self, _x: &Polyvector) -> Result<Polyvector> {
        Ok(self.zero())
    }
    fn bracket(&self, x: &Polyvector, y: &Polyvector) -> Result<Polyvector> {
        schouten(x, y)
    }
}

/// Sign of the coefficient derivative in the cochain differential; the
/// suspension makes `D` anticommute with `[μ, ·]` only with this sign.
const COEFFICIENT_SIGN: i64 = -1;

/// Polydifferential cochains with the Gerstenhaber bracket and differential
/// `[μ, ·] − D` on coefficients; either part may be absent.
#[derive(Clone, Debug)]
pub struct CochainDgla {
    model: ModelConfig,
    size: usize,
    product: Option<Cochain>,
    fedosov: Option<FedosovData>,
}

impl CochainDgla {
    pub fn new(model: ModelConfig, size: usize) -> Self {
        CochainDgla {
            model,
            size,
            product: None,
            fedosov: None,
        }
    }

    /// Adds `[prod, ·]`; `prod` must itself be associative.
    pub fn with_product(mut self, prod: Cochain) -> Result<Self> {
        self.model.ensure_same(prod.model())?;
        if !prod.gerstenhaber(&prod)?.is_zero() {
            return Err(Error::Precondition("product cochain is not associative".into()));
        }
        self.product = Some(prod);
        Ok(self)
    }

    pub fn with_fedosov(mut self, fd: FedosovData) -> Result<Self> {
        self.model.ensure_same(fd.model())?;
        self.fedosov = Some(fd);
        Ok(self)
    }
}

impl Dgla for CochainDgla {
    type Elem = Cochain;

    fn model(&self) -> &ModelConfig {
        &self.model
    }
    fn zero(&self) -> Cochain {
        Cochain::zero(self.model, self.size)
    }
    fn is_zero(&self, x: &Cochain) -> bool {
        x.is_zero()
    }
    fn add(&self, x: &Cochain, y: &Cochain) -> Result<Cochain> {
        x.try_add(y)
    }
    fn scale(&self, x: &Cochain, c: &Rational) -> Cochain {
        x.scale(c)
    }
    fn degrees(&self, x: &Cochain) -> Vec<i64> {
        let mut out: Vec<i64> = x
            .graded_parts()
            .iter()
            .map(|(m, g, _)| *g as i64 + *m as i64 - 1)
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }
    fn hbar_order(&self, x: &Cochain) -> Option<u32> {
        min_order(x.terms().values().map(series_hbar_order))
    }
    fn d(&self, x: &Cochain) -> Result<Cochain> {
        let mut out = self.zero();
        if let Some(prod) = &self.product {
            out = out.try_add(&prod.gerstenhaber(x)?)?;
        }
        if let Some(fd) = &self.fedosov {
            let dx = x.map_coefficients(|s| fd.apply_d(s));
            out = out.try_add(&dx.scale(&rational::int(COEFFICIENT_SIGN)))?;
        }
        Ok(out)
    }
    fn bracket(&self, x: &Cochain, y: &Cochain) -> Result<Cochain> {
        x.gerstenhaber(y)
    }
}

/// Matrix-valued forms with the graded commutator and optional `D`.
#[derive(Clone, Debug)]
pub struct MatrixDgla {
    model: ModelConfig,
    fedosov: Option<FedosovData>,
}

impl MatrixDgla {
    pub fn new(model: ModelConfig) -> Self {
        MatrixDgla { model, fedosov: None }
    }

    pub fn with_fedosov(mut self, fd: FedosovData) -> Result<Self> {
        self.model.ensure_same(fd.model())?;
        self.fedosov = Some(fd);
        Ok(self)
    }
}

impl Dgla for MatrixDgla {
    type Elem = MatrixSeries;

    fn model(&self) -> &ModelConfig {
        &self.model
    }
    fn zero(&self) -> MatrixSeries {
        MatrixSeries::zero(self.model)
    }
    fn is_zero(&self, x: &MatrixSeries) -> bool {
        x.is_zero()
    }
    fn add(&self, x: &MatrixSeries, y: &MatrixSeries) -> Result<MatrixSeries> {
        x.try_add(y)
    }
    fn scale(&self, x: &MatrixSeries, c: &Rational) -> MatrixSeries {
        x.scale(c)
    }
    fn degrees(&self, x: &MatrixSeries) -> Vec<i64> {
        x.form_components().iter().map(|(k, _)| *k as i64).collect()
    }
    fn hbar_order(&self, x: &MatrixSeries) -> Option<u32> {
        min_order(x.entries().iter().map(series_hbar_order))
    }
    fn d(&self, x: &MatrixSeries) -> Result<MatrixSeries> {
        Ok(match &self.fedosov {
            Some(fd) => x.map(|e| fd.apply_d(e)),
            None => MatrixSeries::zero_sized(self.model, x.size()),
        })
    }
    fn bracket(&self, x: &MatrixSeries, y: &MatrixSeries) -> Result<MatrixSeries> {
        self.model.ensure_same(x.model())?;
        Ok(x.bracket_with(y, &Pointwise))
    }
}

/// Hochschild chains as a module over cochains: `b_μ + D`, acted on by `R_P`.
#[derive(Clone, Debug)]
pub struct ChainModule {
    product: Cochain,
    fedosov: Option<FedosovData>,
}

impl ChainModule {
    pub fn new(product: Cochain) -> Self {
        ChainModule { product, fedosov: None }
    }

    pub fn with_fedosov(mut self, fd: FedosovData) -> Result<Self> {
        self.product.model().ensure_same(fd.model())?;
        self.fedosov = Some(fd);
        Ok(self)
    }
}

impl DglaModule<CochainDgla> for ChainModule {
    type Elem = Chain;

    fn d(&self, c: &Chain) -> Result<Chain> {
        let mut out = c.boundary(&self.product)?;
        if let Some(fd) = &self.fedosov {
            out = out.try_add(&c.differential(|a| a.map(|e| fd.apply_d(e))))?;
        }
        Ok(out)
    }
    fn act(&self, a: &Cochain, c: &Chain) -> Result<Chain> {
        c.act(a)
    }
    fn add(&self, m: &Chain, n: &Chain) -> Result<Chain> {
        m.try_add(n)
    }
}
