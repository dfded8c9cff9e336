use serde::{Deserialize, Serialize};

use super::monomial::{Monomial, MAX_DIM};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModelKind {
    /// Polynomial functions on an affine plane, coordinates `x1..xd`.
    AffinePlane,
    /// Laurent polynomials on a torus, exponential coordinates `u1..ud`.
    Torus,
}

/// Dimensions and truncation cutoffs shared by every series of one computation.
///
/// Truncation keeps a monomial iff its hbar power is at most `hbar_max`, its
/// path power at most `t_max`, and its filtration weight `2h + |b|` at most
/// `fiber_max`. The weight cut is an ideal for every weight-additive product
/// (pointwise, star, fiber Moyal), which is what makes truncated arithmetic
/// a ring quotient. `base_cutoff` bounds enumerated bases (homology, sampling)
/// and is never applied to products.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ModelConfig {
    pub kind: ModelKind,
    pub dim: usize,
    pub base_cutoff: u32,
    pub fiber_max: u32,
    pub hbar_max: u32,
    pub t_max: u32,
    pub matrix_size: usize,
}

impl ModelConfig {
    pub fn new(
        kind: ModelKind,
        dim: usize,
        base_cutoff: u32,
        fiber_max: u32,
        hbar_max: u32,
        t_max: u32,
        matrix_size: usize,
    ) -> Result<Self> {
        let m = ModelConfig {
            kind,
            dim,
            base_cutoff,
            fiber_max,
            hbar_max,
            t_max,
            matrix_size,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn plane(dim: usize, fiber_max: u32, hbar_max: u32) -> Result<Self> {
        Self::new(ModelKind::AffinePlane, dim, 6, fiber_max, hbar_max, 0, 1)
    }

    pub fn torus(dim: usize, fiber_max: u32, hbar_max: u32) -> Result<Self> {
        Self::new(ModelKind::Torus, dim, 3, fiber_max, hbar_max, 0, 1)
    }

    pub fn with_base_cutoff(mut self, c: u32) -> Self {
        self.base_cutoff = c;
        self
    }

    pub fn with_t_max(mut self, t: u32) -> Result<Self> {
        self.t_max = t;
        self.validate()?;
        Ok(self)
    }

    pub fn with_matrix_size(mut self, n: usize) -> Result<Self> {
        self.matrix_size = n;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim == 0 || self.dim > MAX_DIM {
            return Err(Error::InvalidModel(format!(
                "dimension {} outside 1..={MAX_DIM}",
                self.dim
            )));
        }
        if self.matrix_size == 0 {
            return Err(Error::InvalidModel("matrix size must be positive".into()));
        }
        if self.fiber_max > 40 || self.hbar_max > 20 || self.t_max > 60 {
            return Err(Error::InvalidModel("cutoff too large".into()));
        }
        if self.fiber_max < 2 * self.hbar_max {
            return Err(Error::InvalidModel(format!(
                "fiber cutoff {} must be at least twice the hbar cutoff {}",
                self.fiber_max, self.hbar_max
            )));
        }
        Ok(())
    }

    pub fn is_torus(&self) -> bool {
        self.kind == ModelKind::Torus
    }

    /// Truncation predicate.
    #[inline]
    pub fn keeps(&self, m: &Monomial) -> bool {
        (m.hbar as u32) <= self.hbar_max
            && (m.t as u32) <= self.t_max
            && m.weight() <= self.fiber_max
    }

    /// Checks a monomial against the structural (non-truncating) invariants.
    pub fn admits(&self, m: &Monomial) -> bool {
        for i in self.dim..MAX_DIM {
            if m.base[i] != 0 || m.fiber[i] != 0 || m.forms & (1 << i) != 0 {
                return false;
            }
        }
        match self.kind {
            ModelKind::AffinePlane => m.base.iter().all(|&a| a >= 0),
            ModelKind::Torus => true,
        }
    }

    pub fn ensure_same(&self, other: &ModelConfig) -> Result<()> {
        if self != other {
            return Err(Error::ModelMismatch(format!("{self:?} vs {other:?}")));
        }
        Ok(())
    }

    pub fn check_index(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.dim {
            return Err(Error::IndexOutOfRange {
                index: i,
                dim: self.dim,
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_configs() {
        assert!(ModelConfig::plane(0, 4, 1).is_err());
        assert!(ModelConfig::plane(5, 4, 1).is_err());
        assert!(ModelConfig::plane(2, 3, 2).is_err());
        assert!(ModelConfig::plane(2, 4, 2).is_ok());
    }

    #[test]
    fn truncation_is_by_weight() {
        let m = ModelConfig::plane(2, 4, 2).unwrap();
        let mut mono = Monomial::one();
        mono.fiber[0] = 2;
        mono.hbar = 1;
        assert!(m.keeps(&mono));
        mono.fiber[1] = 1;
        assert!(!m.keeps(&mono));
    }
}
