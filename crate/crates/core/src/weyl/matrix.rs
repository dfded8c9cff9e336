use std::fmt;
use std::ops::{Add, Neg, Sub};

use super::model::ModelConfig;
use super::product::SeriesProduct;
use super::rational::Rational;
use super::series::FormalSeries;
use crate::error::{Error, Result};

/// Square matrix of series. The default size is the model's `matrix_size`;
/// other sizes (scalar chains next to matrix ones) use the `_sized` constructors.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct MatrixSeries {
    model: ModelConfig,
    size: usize,
    entries: Vec<FormalSeries>,
}

impl MatrixSeries {
    pub fn zero(model: ModelConfig) -> Self {
        Self::zero_sized(model, model.matrix_size)
    }

    pub fn zero_sized(model: ModelConfig, size: usize) -> Self {
        MatrixSeries {
            model,
            size,
            entries: vec![FormalSeries::zero(model); size * size],
        }
    }

    pub fn identity(model: ModelConfig) -> Self {
        Self::scalar(&FormalSeries::one(model))
    }

    pub fn identity_sized(model: ModelConfig, size: usize) -> Self {
        Self::scalar_sized(&FormalSeries::one(model), size)
    }

    /// `s · I`.
    pub fn scalar(s: &FormalSeries) -> Self {
        Self::scalar_sized(s, s.model().matrix_size)
    }

    pub fn scalar_sized(s: &FormalSeries, size: usize) -> Self {
        let mut m = Self::zero_sized(*s.model(), size);
        for i in 0..size {
            m.set(i, i, s.clone());
        }
        m
    }

    /// Matrix unit `e_{ij}` times `s`.
    pub fn unit(s: &FormalSeries, i: usize, j: usize) -> Self {
        Self::unit_sized(s, i, j, s.model().matrix_size)
    }

    pub fn unit_sized(s: &FormalSeries, i: usize, j: usize, size: usize) -> Self {
        let mut m = Self::zero_sized(*s.model(), size);
        m.set(i, j, s.clone());
        m
    }

    /// Any square shape is accepted.
    pub fn from_rows(model: ModelConfig, rows: Vec<Vec<FormalSeries>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Precondition(format!("expected a square matrix, got {n} rows")));
        }
        let entries: Vec<FormalSeries> = rows.into_iter().flatten().collect();
        for e in &entries {
            model.ensure_same(e.model())?;
        }
        Ok(MatrixSeries {
            model,
            size: n,
            entries,
        })
    }

    pub fn model(&self) -> &ModelConfig {
        &self.model
    }

    pub fn size(&self) -> usize {
        self.size
    }

    fn ensure_same(&self, other: &Self) -> Result<()> {
        self.model.ensure_same(&other.model)?;
        if self.size != other.size {
            return Err(Error::Precondition(format!(
                "matrix sizes differ: {} and {}",
                self.size, other.size
            )));
        }
        Ok(())
    }

    pub fn get(&self, i: usize, j: usize) -> &FormalSeries {
        &self.entries[i * self.size() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, s: FormalSeries) {
        let n = self.size();
        self.entries[i * n + j] = s;
    }

    pub fn entries(&self) -> &[FormalSeries] {
        &self.entries
    }

    /// `self += other` entrywise without rebuilding untouched entries.
    pub(crate) fn add_assign_ref(&mut self, other: &MatrixSeries) {
        debug_assert_eq!(self.size, other.size);
        for (a, b) in self.entries.iter_mut().zip(&other.entries) {
            for (m, c) in b.terms() {
                a.add_term_raw(*m, c.clone());
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| e.is_zero())
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity_sized(self.model, self.size)
    }

    pub fn map(&self, f: impl Fn(&FormalSeries) -> FormalSeries) -> Self {
        MatrixSeries {
            model: self.model,
            size: self.size,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|e| e.scale(c))
    }

    /// Entrywise product with a scalar series on the left.
    pub fn left_scalar(&self, s: &FormalSeries) -> Self {
        self.map(|e| s * e)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.ensure_same(other)?;
        Ok(MatrixSeries {
            model: self.model,
            size: self.size,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Matrix product with entries multiplied by `prod`.
    pub fn mul_with(&self, other: &Self, prod: &dyn SeriesProduct) -> Self {
        self.ensure_same(other).expect("matrix product across models");
        let n = self.size();
        let mut out = Self::zero_sized(self.model, n);
        for i in 0..n {
            for k in 0..n {
                let mut acc = FormalSeries::zero(self.model);
                for j in 0..n {
                    let a = self.get(i, j);
                    let b = other.get(j, k);
                    if a.is_zero() || b.is_zero() {
                        continue;
                    }
                    acc = &acc + &prod.product(a, b);
                }
                out.set(i, k, acc);
            }
        }
        out
    }

    /// Graded commutator, entries split by form degree.
    pub fn bracket_with(&self, other: &Self, prod: &dyn SeriesProduct) -> Self {
        let mut out = Self::zero_sized(self.model, self.size);
        for (p, a) in self.form_components() {
            for (q, b) in other.form_components() {
                let ab = a.mul_with(&b, prod);
                let ba = b.mul_with(&a, prod);
                out = if p * q % 2 == 1 { &(&out + &ab) + &ba } else { &(&out + &ab) - &ba };
            }
        }
        out
    }

    pub fn form_part(&self, k: u32) -> Self {
        self.map(|e| e.form_part(k))
    }

    pub fn form_components(&self) -> Vec<(u32, MatrixSeries)> {
        let mut degrees: Vec<u32> = self
            .entries
            .iter()
            .flat_map(|e| e.iter().map(|(m, _)| m.form_degree()))
            .collect();
        degrees.sort_unstable();
        degrees.dedup();
        degrees.into_iter().map(|k| (k, self.form_part(k))).collect()
    }

    /// Sum of diagonal entries.
    pub fn trace(&self) -> FormalSeries {
        let mut acc = FormalSeries::zero(self.model);
        for i in 0..self.size() {
            acc = &acc + self.get(i, i);
        }
        acc
    }
}

impl Add for &MatrixSeries {
    type Output = MatrixSeries;
    fn add(self, rhs: &MatrixSeries) -> MatrixSeries {
        self.try_add(rhs).expect("matrix addition across models")
    }
}

impl Sub for &MatrixSeries {
    type Output = MatrixSeries;
    fn sub(self, rhs: &MatrixSeries) -> MatrixSeries {
        self.try_add(&-rhs).expect("matrix subtraction across models")
    }
}

impl Neg for &MatrixSeries {
    type Output = MatrixSeries;
    fn neg(self) -> MatrixSeries {
        self.map(|e| -e)
    }
}

impl fmt::Display for MatrixSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let n = self.size();
        write!(f, "[")?;
        for i in 0..n {
            if i > 0 {
                write!(f, "; ")?;
            }
            for j in 0..n {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self.get(i, j))?;
            }
        }
        write!(f, "]")
    }
}
