//! Zeroth Poisson homology `A⁰ / L_π A¹` on a finite monomial window.

use std::collections::HashMap;

use super::polyvector::{is_poisson, koszul_unchecked, mode_support, Polyvector};
use crate::error::{Error, Result};
use crate::linalg::{Echelon, Row};
use crate::weyl::model::{ModelConfig, ModelKind};
use crate::weyl::monomial::{Monomial, MAX_DIM};
use crate::weyl::rational;
use crate::weyl::series::FormalSeries;

/// Target coordinates are offset so that everything outside the window is
/// eliminated first.
const TARGET_OFFSET: usize = 1 << 40;

/// Base exponent vectors in the window: total degree `≤ cutoff` on the
/// plane, `|k_i| ≤ cutoff[i]` on the torus.
pub fn base_window(model: &ModelConfig, cutoff: &[u32; MAX_DIM]) -> Vec<[i16; MAX_DIM]> {
    let mut out: Vec<[i16; MAX_DIM]> = vec![[0; MAX_DIM]];
    for i in 0..model.dim {
        let mut next = Vec::new();
        for e in &out {
            let range: Vec<i16> = match model.kind {
                ModelKind::AffinePlane => {
                    let used: i16 = e.iter().sum();
                    (0..=(cutoff[0] as i16 - used)).collect()
                }
                ModelKind::Torus => (-(cutoff[i] as i16)..=cutoff[i] as i16).collect(),
            };
            for k in range {
                let mut f = *e;
                f[i] = k;
                next.push(f);
            }
        }
        out = next;
    }
    out
}

fn graded_key(e: &[i16; MAX_DIM]) -> (u32, [i16; MAX_DIM]) {
    (e.iter().map(|k| k.unsigned_abs() as u32).sum(), *e)
}

/// Row-reduced image of `L_π` on 1-forms, restricted to the target window.
#[derive(Clone, Debug)]
pub struct Hp0Reducer {
    model: ModelConfig,
    target: Vec<[i16; MAX_DIM]>,
    index: HashMap<[i16; MAX_DIM], usize>,
    image: Echelon,
}

impl Hp0Reducer {
    /// Window: the model's base cutoff. `pi` must be Poisson and ℏ-free.
    pub fn new(pi: &Polyvector) -> Result<Self> {
        let model = *pi.model();
        if !is_poisson(pi) {
            return Err(Error::Precondition("bivector does not satisfy [π, π] = 0".into()));
        }
        if !pi.is_hbar_free() {
            return Err(Error::Unsupported(
                "homology reduction needs an ℏ-free bivector; pass the coefficient of ℏ".into(),
            ));
        }
        let c = model.base_cutoff;
        let target_cut = [c; MAX_DIM];
        let mut target = base_window(&model, &target_cut);
        // largest monomials first, so they become pivots
        target.sort_by_key(|e| std::cmp::Reverse(graded_key(e)));
        let index: HashMap<_, _> = target
            .iter()
            .enumerate()
            .map(|(k, e)| (*e, TARGET_OFFSET + k))
            .collect();

        let support = mode_support(pi);
        let input_cut = match model.kind {
            ModelKind::AffinePlane => [c + 1; MAX_DIM],
            ModelKind::Torus => {
                let mut s = [0; MAX_DIM];
                for i in 0..MAX_DIM {
                    s[i] = c + support[i];
                }
                s
            }
        };
        let mut outside: HashMap<[i16; MAX_DIM], usize> = HashMap::new();
        let mut image = Echelon::new();
        for e in base_window(&model, &input_cut) {
            for k in 0..model.dim {
                let mut m = Monomial::one();
                m.base = e;
                m.forms = 1 << k;
                let w = FormalSeries::term(model, m, rational::one());
                let lw = koszul_unchecked(pi, &w)?;
                let mut row = Row::new();
                for (mono, v) in lw.iter() {
                    let key = match index.get(&mono.base) {
                        Some(&t) => t,
                        None => {
                            let n = outside.len();
                            *outside.entry(mono.base).or_insert(n)
                        }
                    };
                    row.insert(key, v.clone());
                }
                image.insert(&row);
            }
        }
        Ok(Hp0Reducer {
            model,
            target,
            index,
            image: image.restricted(TARGET_OFFSET),
        })
    }

    /// Dimension of the quotient on the window.
    pub fn dim(&self) -> usize {
        self.target.len() - self.image.rank()
    }

    /// Monomials spanning the quotient (the non-pivot window coordinates).
    pub fn basis(&self) -> Vec<Monomial> {
        let pivots: std::collections::HashSet<usize> = self.image.pivots().copied().collect();
        let mut out: Vec<Monomial> = (0..self.target.len())
            .filter(|k| !pivots.contains(&(TARGET_OFFSET + k)))
            .map(|k| {
                let mut m = Monomial::one();
                m.base = self.target[k];
                m
            })
            .collect();
        out.sort();
        out
    }

    /// Canonical representative, reduced separately in each power of ℏ.
    pub fn reduce(&self, f: &FormalSeries) -> Result<FormalSeries> {
        self.model.ensure_same(f.model())?;
        if f.iter().any(|(m, _)| m.has_fiber() || m.forms != 0 || m.t != 0) {
            return Err(Error::Precondition(format!("homology reduction needs a function, got {f}")));
        }
        let mut out = FormalSeries::zero(self.model);
        for h in 0..=self.model.hbar_max as u8 {
            let part = f.hbar_coefficient(h);
            if part.is_zero() {
                continue;
            }
            let mut row = Row::new();
            for (m, c) in part.iter() {
                let Some(&k) = self.index.get(&m.base) else {
                    return Err(Error::Precondition(format!(
                        "term {} lies outside the homology window (base cutoff {})",
                        crate::weyl::expr::format_monomial(self.model.kind, m),
                        self.model.base_cutoff
                    )));
                };
                row.insert(k, c.clone());
            }
            for (k, c) in self.image.reduce(&row) {
                let mut m = Monomial::one();
                m.base = self.target[k - TARGET_OFFSET];
                m.hbar = h;
                out.add_term(m, c);
            }
        }
        Ok(out)
    }
}

/// Canonical representative of `f` in `HP₀`.
pub fn hp0_reduce(f: &FormalSeries, pi: &Polyvector) -> Result<FormalSeries> {
    Hp0Reducer::new(pi)?.reduce(f)
}

/// Dimension of `HP₀` on the configured window.
pub fn hp_dim(pi: &Polyvector) -> Result<usize> {
    Ok(Hp0Reducer::new(pi)?.dim())
}
