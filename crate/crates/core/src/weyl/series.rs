use std::collections::BTreeMap;

use rustc_hash::FxHashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_traits::{One, Zero};

use super::model::{ModelConfig, ModelKind};
use super::monomial::{count_below, Monomial, MAX_DIM};
use super::rational::{self, int, Rational};
use crate::error::{Error, Result};

/// Truncated series in base coordinates, fiber coordinates `y`, odd
/// generators `θ`, `ℏ` and the path parameter `t`, with exact coefficients.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct FormalSeries {
    model: ModelConfig,
    terms: BTreeMap<Monomial, Rational>,
}

impl FormalSeries {
    pub fn zero(model: ModelConfig) -> Self {
        FormalSeries {
            model,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(model: ModelConfig) -> Self {
        Self::constant(model, rational::one())
    }

    pub fn constant(model: ModelConfig, c: Rational) -> Self {
        Self::term(model, Monomial::one(), c)
    }

    /// A single term; dropped if truncated or zero.
    pub fn term(model: ModelConfig, m: Monomial, c: Rational) -> Self {
        let mut s = Self::zero(model);
        s.add_term(m, c);
        s
    }

    pub fn from_terms(model: ModelConfig, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut s = Self::zero(model);
        for (m, c) in terms {
            s.add_term(m, c);
        }
        s
    }

    pub fn base_var(model: ModelConfig, i: usize) -> Self {
        Self::term(model, Monomial::base_var(i, 1), rational::one())
    }

    pub fn fiber_var(model: ModelConfig, i: usize) -> Self {
        Self::term(model, Monomial::fiber_var(i), rational::one())
    }

    pub fn theta(model: ModelConfig, i: usize) -> Self {
        Self::term(model, Monomial::theta(i), rational::one())
    }

    pub fn hbar(model: ModelConfig) -> Self {
        Self::term(model, Monomial::hbar(1), rational::one())
    }

    pub fn t_var(model: ModelConfig) -> Self {
        let mut m = Monomial::one();
        m.t = 1;
        Self::term(model, m, rational::one())
    }

    pub fn model(&self) -> &ModelConfig {
        &self.model
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, Rational> {
        &self.terms
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(rational::zero)
    }

    /// Adds `c·m`, respecting truncation and dropping zeros.
    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() || !self.model.keeps(&m) {
            return;
        }
        debug_assert!(self.model.admits(&m), "monomial {m:?} outside model");
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    /// Adds a term without applying the truncation predicate.
    pub(crate) fn add_term_raw(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m).or_insert_with(rational::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.model);
        }
        FormalSeries {
            model: self.model,
            terms: self.terms.iter().map(|(m, v)| (*m, v * c)).collect(),
        }
    }

    /// Maps every term, accumulating the outputs under truncation.
    pub fn map_terms<F>(&self, mut f: F) -> Self
    where
        F: FnMut(&Monomial, &Rational, &mut FormalSeries),
    {
        let mut out = Self::zero(self.model);
        for (m, c) in &self.terms {
            f(m, c, &mut out);
        }
        out
    }

    pub fn filter<F: Fn(&Monomial) -> bool>(&self, keep: F) -> Self {
        FormalSeries {
            model: self.model,
            terms: self
                .terms
                .iter()
                .filter(|(m, _)| keep(m))
                .map(|(m, c)| (*m, c.clone()))
                .collect(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.model.ensure_same(&other.model)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(*m, c.clone());
        }
        Ok(out)
    }

    /// Graded-commutative product; terms beyond the cutoffs are dropped.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.model.ensure_same(&other.model)?;
        Ok(self.mul_unchecked(other))
    }

    fn mul_unchecked(&self, other: &Self) -> Self {
        self.mul_within(other, self.model.fiber_max)
    }

    /// Product keeping only terms of weight at most `cap`; pairs above the
    /// cap are never formed.
    pub(crate) fn mul_within(&self, other: &Self, cap: u32) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.model);
        }
        let right = by_weight(other);
        let mut acc: FxHashMap<Monomial, Rational> = FxHashMap::default();
        for (m1, c1) in &self.terms {
            let w1 = m1.weight();
            if w1 > cap {
                continue;
            }
            for (w2, m2, c2) in &right {
                if w1 + w2 > cap {
                    break;
                }
                if let Some((m, neg)) = m1.mul(m2) {
                    if !self.model.keeps(&m) {
                        continue;
                    }
                    let v = c1 * *c2;
                    let e = acc.entry(m).or_insert_with(rational::zero);
                    if neg {
                        *e -= v;
                    } else {
                        *e += v;
                    }
                }
            }
        }
        Self::from_accumulator(self.model, acc)
    }

    pub(crate) fn from_accumulator(model: ModelConfig, acc: FxHashMap<Monomial, Rational>) -> Self {
        FormalSeries {
            model,
            terms: acc.into_iter().filter(|(_, c)| !c.is_zero()).collect(),
        }
    }

    /// Highest form degree present, `None` for zero.
    pub fn max_form_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.form_degree()).max()
    }

    pub fn min_form_degree(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.form_degree()).min()
    }

    /// Homogeneous component of form degree `k`.
    pub fn form_part(&self, k: u32) -> Self {
        self.filter(|m| m.form_degree() == k)
    }

    /// Splits into homogeneous form-degree components (nonzero ones only).
    pub fn form_components(&self) -> Vec<(u32, FormalSeries)> {
        let mut parts: BTreeMap<u32, FormalSeries> = BTreeMap::new();
        for (m, c) in &self.terms {
            parts
                .entry(m.form_degree())
                .or_insert_with(|| Self::zero(self.model))
                .terms
                .insert(*m, c.clone());
        }
        parts.into_iter().collect()
    }

    /// Terms of filtration weight strictly below `w`.
    pub fn below_weight(&self, w: u32) -> Self {
        self.filter(|m| m.weight() < w)
    }

    pub fn min_weight(&self) -> Option<u32> {
        self.terms.keys().map(|m| m.weight()).min()
    }

    pub fn is_base_only(&self) -> bool {
        self.terms.keys().all(|m| m.is_base_only())
    }

    pub fn has_fiber(&self) -> bool {
        self.terms.keys().any(|m| m.has_fiber())
    }

    pub fn is_hbar_free(&self) -> bool {
        self.terms.keys().all(|m| m.hbar == 0)
    }

    /// Restriction `y = 0` (forms, base, ℏ and t kept).
    pub fn restrict_fiber_zero(&self) -> Self {
        self.filter(|m| !m.has_fiber())
    }

    /// Sets `ℏ = 0`.
    pub fn principal_symbol(&self) -> Self {
        self.filter(|m| m.hbar == 0)
    }

    /// Coefficient of `ℏ^k`, as an ℏ-free series.
    pub fn hbar_coefficient(&self, k: u8) -> Self {
        let mut out = Self::zero(self.model);
        for (m, c) in &self.terms {
            if m.hbar == k {
                let mut m2 = *m;
                m2.hbar = 0;
                out.terms.insert(m2, c.clone());
            }
        }
        out
    }

    /// Multiplies by `ℏ^k`.
    pub fn shift_hbar(&self, k: u8) -> Self {
        self.map_terms(|m, c, out| {
            let mut m2 = *m;
            m2.hbar += k;
            out.add_term(m2, c.clone());
        })
    }

    /// Partial derivative in the fiber coordinate `y^{i+1}`.
    pub fn fiber_derive(&self, i: usize) -> Self {
        self.map_terms(|m, c, out| {
            let b = m.fiber[i];
            if b > 0 {
                let mut m2 = *m;
                m2.fiber[i] -= 1;
                out.add_term(m2, c * int(b as i64));
            }
        })
    }

    /// `∂_y^α` for a fiber multi-index.
    pub fn fiber_derive_multi(&self, alpha: &[u8; MAX_DIM]) -> Self {
        if alpha.iter().all(|&a| a == 0) {
            return self.clone();
        }
        self.map_terms(|m, c, out| {
            if let Some((m2, f)) = fiber_derive_monomial(m, alpha) {
                out.add_term(m2, c * f);
            }
        })
    }

    /// Base derivation `∂_{x^i}` on the plane, Euler derivation `u^i ∂_{u^i}` on the torus.
    /// `i` is zero-based here.
    pub fn base_derive0(&self, i: usize) -> Self {
        let torus = self.model.kind == ModelKind::Torus;
        self.map_terms(|m, c, out| {
            let a = m.base[i];
            if a != 0 {
                let mut m2 = *m;
                if !torus {
                    m2.base[i] -= 1;
                }
                out.add_term(m2, c * int(a as i64));
            }
        })
    }

    pub fn base_derive_multi(&self, alpha: &[u8; MAX_DIM]) -> Self {
        let mut s = self.clone();
        for (i, &a) in alpha.iter().enumerate() {
            for _ in 0..a {
                s = s.base_derive0(i);
            }
        }
        s
    }

    /// Left multiplication by `θ^{i+1}`.
    pub fn theta_left(&self, i: usize) -> Self {
        self.map_terms(|m, c, out| {
            if m.forms & (1 << i) == 0 {
                let mut m2 = *m;
                m2.forms |= 1 << i;
                let neg = count_below(m.forms, i) % 2 == 1;
                out.add_term(m2, if neg { -c.clone() } else { c.clone() });
            }
        })
    }

    /// Left derivative `∂/∂θ^{i+1}`.
    pub fn theta_derive(&self, i: usize) -> Self {
        self.map_terms(|m, c, out| {
            if m.forms & (1 << i) != 0 {
                let mut m2 = *m;
                m2.forms &= !(1 << i);
                let neg = count_below(m.forms, i) % 2 == 1;
                out.add_term(m2, if neg { -c.clone() } else { c.clone() });
            }
        })
    }

    /// `d/dt`.
    pub fn t_derive(&self) -> Self {
        self.map_terms(|m, c, out| {
            if m.t > 0 {
                let mut m2 = *m;
                m2.t -= 1;
                out.add_term(m2, c * int(m.t as i64));
            }
        })
    }

    /// Substitutes a rational value for `t`.
    pub fn eval_t(&self, value: &Rational) -> Self {
        self.map_terms(|m, c, out| {
            let mut m2 = *m;
            m2.t = 0;
            let mut p = rational::one();
            for _ in 0..m.t {
                p *= value;
            }
            out.add_term(m2, c * p);
        })
    }

    pub fn max_t_degree(&self) -> u8 {
        self.terms.keys().map(|m| m.t).max().unwrap_or(0)
    }

    pub fn to_string_in_model(&self) -> String {
        super::expr::format_series(self)
    }
}

pub(crate) fn fiber_derive_monomial(m: &Monomial, alpha: &[u8; MAX_DIM]) -> Option<(Monomial, Rational)> {
    let mut m2 = *m;
    let mut f: i64 = 1;
    for i in 0..MAX_DIM {
        let a = alpha[i];
        if a == 0 {
            continue;
        }
        let b = m.fiber[i];
        if b < a {
            return None;
        }
        for j in 0..a {
            f *= (b - j) as i64;
        }
        m2.fiber[i] = b - a;
    }
    Some((m2, int(f)))
}

fn by_weight(s: &FormalSeries) -> Vec<(u32, &Monomial, &Rational)> {
    let mut v: Vec<_> = s.terms.iter().map(|(m, c)| (m.weight(), m, c)).collect();
    v.sort_by_key(|(w, _, _)| *w);
    v
}

impl fmt::Display for FormalSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", super::expr::format_series(self))
    }
}

impl Add for &FormalSeries {
    type Output = FormalSeries;
    fn add(self, rhs: &FormalSeries) -> FormalSeries {
        self.try_add(rhs).expect("series addition across models")
    }
}

impl Sub for &FormalSeries {
    type Output = FormalSeries;
    fn sub(self, rhs: &FormalSeries) -> FormalSeries {
        self.try_add(&-rhs).expect("series subtraction across models")
    }
}

impl Neg for &FormalSeries {
    type Output = FormalSeries;
    fn neg(self) -> FormalSeries {
        FormalSeries {
            model: self.model,
            terms: self.terms.iter().map(|(m, c)| (*m, -c.clone())).collect(),
        }
    }
}

impl Mul for &FormalSeries {
    type Output = FormalSeries;
    fn mul(self, rhs: &FormalSeries) -> FormalSeries {
        self.try_mul(rhs).expect("series product across models")
    }
}

/// `series_mul` with the model check surfaced as an error.
pub fn series_mul(a: &FormalSeries, b: &FormalSeries) -> Result<FormalSeries> {
    a.try_mul(b)
}

/// `∂/∂x^i` (plane) or `u^i ∂/∂u^i` (torus), `i` one-based.
pub fn base_derive(i: usize, f: &FormalSeries) -> Result<FormalSeries> {
    f.model.check_index(i)?;
    Ok(f.base_derive0(i - 1))
}

/// Sum of `c · θ^{i}` with `c` rational, used by tests and parsers.
pub fn ensure_same_model(a: &FormalSeries, b: &FormalSeries) -> Result<()> {
    if a.model != b.model {
        return Err(Error::ModelMismatch(format!("{:?} vs {:?}", a.model, b.model)));
    }
    Ok(())
}

impl FormalSeries {
    /// `true` iff this is the constant `c`.
    pub fn is_constant(&self, c: &Rational) -> bool {
        if c.is_zero() {
            return self.is_zero();
        }
        self.terms.len() == 1 && self.terms.get(&Monomial::one()).is_some_and(|v| v == c)
    }

    pub fn is_one(&self) -> bool {
        self.is_constant(&Rational::one())
    }
}
