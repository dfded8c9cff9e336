//! Seeded random series for property checks.

use rand::Rng;

use super::model::{ModelConfig, ModelKind};
use super::monomial::Monomial;
use super::rational::{frac, Rational};
use super::series::FormalSeries;

/// What a sampled series may contain.
#[derive(Debug, Clone, Copy)]
pub struct Shape {
    pub terms: usize,
    pub fiber: bool,
    pub forms: bool,
    pub hbar: bool,
    pub t: bool,
}

impl Shape {
    pub fn full(terms: usize) -> Self {
        Shape {
            terms,
            fiber: true,
            forms: true,
            hbar: true,
            t: false,
        }
    }

    /// Functions on the base with ℏ, no fiber or form part.
    pub fn base(terms: usize) -> Self {
        Shape {
            terms,
            fiber: false,
            forms: false,
            hbar: true,
            t: false,
        }
    }
}

pub fn random_rational<R: Rng>(rng: &mut R) -> Rational {
    let mut p: i64 = rng.gen_range(-5..=5);
    if p == 0 {
        p = 1;
    }
    frac(p, rng.gen_range(1..=3))
}

/// A random monomial inside the model window.
pub fn random_monomial<R: Rng>(model: &ModelConfig, shape: &Shape, rng: &mut R) -> Monomial {
    let mut m = Monomial::one();
    let k = model.base_cutoff as i16;
    for i in 0..model.dim {
        m.base[i] = match model.kind {
            ModelKind::AffinePlane => rng.gen_range(0..=k.min(3)),
            ModelKind::Torus => rng.gen_range(-k..=k),
        };
    }
    if shape.hbar && model.hbar_max > 0 && rng.gen_bool(0.4) {
        m.hbar = rng.gen_range(1..=model.hbar_max as u8);
    }
    if shape.fiber {
        let room = model.fiber_max.saturating_sub(m.weight());
        let total = rng.gen_range(0..=room.min(4));
        for _ in 0..total {
            m.fiber[rng.gen_range(0..model.dim)] += 1;
        }
    }
    if shape.forms {
        for i in 0..model.dim {
            if rng.gen_bool(0.35) {
                m.forms |= 1 << i;
            }
        }
    }
    if shape.t && model.t_max > 0 {
        m.t = rng.gen_range(0..=model.t_max.min(3) as u8);
    }
    m
}

pub fn random_series<R: Rng>(model: &ModelConfig, shape: &Shape, rng: &mut R) -> FormalSeries {
    let mut s = FormalSeries::zero(*model);
    for _ in 0..shape.terms {
        let m = random_monomial(model, shape, rng);
        s.add_term(m, random_rational(rng));
    }
    s
}

/// A random form-homogeneous series of form degree `k`.
pub fn random_homogeneous<R: Rng>(model: &ModelConfig, shape: &Shape, k: u32, rng: &mut R) -> FormalSeries {
    let mut s = FormalSeries::zero(*model);
    let no_forms = Shape { forms: false, ..*shape };
    for _ in 0..shape.terms {
        let mut m = random_monomial(model, &no_forms, rng);
        let mut idx: Vec<usize> = (0..model.dim).collect();
        for j in (1..idx.len()).rev() {
            idx.swap(j, rng.gen_range(0..=j));
        }
        if (k as usize) > model.dim {
            return s;
        }
        for &i in &idx[..k as usize] {
            m.forms |= 1 << i;
        }
        s.add_term(m, random_rational(rng));
    }
    s
}
