//! Small seeded samples for the algebraic checks: few terms, low degrees, so
//! that iterated operations stay well inside the truncation window.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::hochschild::{Cochain, Multi, Slot, Word};
use crate::poisson::Polyvector;
use crate::weyl::model::ModelConfig;
use crate::weyl::monomial::Monomial;
use crate::weyl::rational::{self, frac, Rational};
use crate::weyl::sample::{random_homogeneous, Shape};
use crate::weyl::{FormalSeries, MatrixSeries};

pub fn small_series(m: &ModelConfig, rng: &mut ChaCha8Rng, terms: usize, max_fiber: u8, forms: bool) -> FormalSeries {
    let mut s = FormalSeries::zero(*m);
    for _ in 0..terms {
        let mut mono = Monomial::one();
        for i in 0..m.dim {
            mono.base[i] = rng.gen_range(0..=1);
            mono.fiber[i] = rng.gen_range(0..=max_fiber);
            if forms && rng.gen_bool(0.4) {
                mono.forms |= 1 << i;
            }
        }
        s.add_term(mono, frac(rng.gen_range(-4..=4), rng.gen_range(1..=2)));
    }
    s
}

pub fn random_matrix(m: &ModelConfig, size: usize, rng: &mut ChaCha8Rng) -> MatrixSeries {
    let mut a = MatrixSeries::zero_sized(*m, size);
    for i in 0..size {
        for j in 0..size {
            if size == 1 || rng.gen_bool(0.6) {
                a.set(i, j, small_series(m, rng, 2, 2, true));
            }
        }
    }
    a
}

pub fn random_multi(m: &ModelConfig, rng: &mut ChaCha8Rng) -> Multi {
    loop {
        let mut a: Multi = [0; crate::weyl::MAX_DIM];
        for x in a.iter_mut().take(m.dim.min(2)) {
            *x = rng.gen_range(0..=1);
        }
        if a.iter().any(|&x| x > 0) {
            return a;
        }
    }
}

/// A normalized cochain with two words of the given arity.
pub fn random_cochain(m: &ModelConfig, size: usize, arity: usize, rng: &mut ChaCha8Rng) -> Cochain {
    let n = size as u8;
    let mut c = Cochain::zero(*m, size);
    for _ in 0..2 {
        let w = Word {
            out: (rng.gen_range(0..n), rng.gen_range(0..n)),
            slots: (0..arity)
                .map(|_| Slot {
                    alpha: random_multi(m, rng),
                    row: rng.gen_range(0..n),
                    col: rng.gen_range(0..n),
                })
                .collect(),
        };
        c.add_term(w, small_series(m, rng, 1, 1, true))
            .expect("word fits the cochain size");
    }
    c
}

/// Homogeneous pieces with the parity of their shifted degree.
pub fn homogeneous_parts(c: &Cochain) -> Vec<(bool, Cochain)> {
    c.graded_parts()
        .into_iter()
        .map(|(m, g, part)| ((g as usize + m + 1) % 2 == 1, part))
        .collect()
}

pub fn sign(odd: bool) -> Rational {
    rational::sign(odd)
}

pub fn random_polyvector(m: &ModelConfig, rng: &mut ChaCha8Rng, k: u32) -> Polyvector {
    let shape = Shape {
        hbar: false,
        fiber: false,
        ..Shape::base(3)
    };
    let s = random_homogeneous(m, &shape, k, rng);
    Polyvector::new(s).expect("fiber-free sample")
}

/// A function with exponents in a small box: `[0, 2]` on the plane, `[-1, 1]` on the torus.
pub fn small_function(m: &ModelConfig, rng: &mut ChaCha8Rng, terms: usize) -> FormalSeries {
    let (lo, hi) = if m.is_torus() { (-1, 1) } else { (0, 2) };
    let mut s = FormalSeries::zero(*m);
    for _ in 0..terms {
        let mut mono = Monomial::one();
        for i in 0..m.dim {
            mono.base[i] = rng.gen_range(lo..=hi);
        }
        s.add_term(mono, frac(rng.gen_range(-3..=3), rng.gen_range(1..=2)));
    }
    s
}
