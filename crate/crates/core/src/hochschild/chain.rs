use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use super::cochain::{Cochain, Multi};
use super::parity_sign;
use crate::error::{Error, Result};
use crate::weyl::expr::format_series;
use crate::weyl::matrix::MatrixSeries;
use crate::weyl::model::ModelConfig;
use crate::weyl::monomial::{Monomial, MAX_DIM};
use crate::weyl::rational::{self, Rational};
use crate::weyl::series::FormalSeries;

/// A canonical tensor factor `e_{row col} · y^fiber`, of form degree zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Tail {
    pub row: u8,
    pub col: u8,
    pub fiber: Multi,
}

impl Tail {
    fn weight(&self) -> u32 {
        self.fiber.iter().map(|&b| b as u32).sum()
    }

    fn matrix(&self, model: ModelConfig, size: usize) -> MatrixSeries {
        let mut m = Monomial::one();
        m.fiber = self.fiber;
        MatrixSeries::unit_sized(
            &FormalSeries::term(model, m, rational::one()),
            self.row as usize,
            self.col as usize,
            size,
        )
    }
}

/// Hochschild chains stored as suspended words `sa₀ ⊗ sa₁ ⊗ … ⊗ saₙ` over the
/// base ring of forms in `x`, `θ`, `ℏ`.
///
/// Base-ring factors of the slots `1..n` are moved into slot 0, so every term
/// is `sM ⊗ s(e y^β) ⊗ …` and equal chains have equal storage. Terms are
/// truncated by total filtration weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    model: ModelConfig,
    size: usize,
    terms: BTreeMap<Vec<Tail>, MatrixSeries>,
}

/// A suspended word whose slots are form-homogeneous of the given degrees.
#[derive(Clone, Debug)]
struct Homogeneous {
    slots: Vec<MatrixSeries>,
    degrees: Vec<u32>,
}

impl Homogeneous {
    /// Sum of shifted degrees `|a| + 1` over `range`.
    fn shifted(&self, range: std::ops::Range<usize>) -> u32 {
        self.degrees[range.clone()].iter().sum::<u32>() + range.len() as u32
    }
}

fn split_slots(slots: &[MatrixSeries]) -> Vec<Homogeneous> {
    let mut out = vec![Homogeneous {
        slots: vec![],
        degrees: vec![],
    }];
    for s in slots {
        let comps = s.form_components();
        let mut next = Vec::new();
        for w in &out {
            for (d, c) in &comps {
                let mut w2 = w.clone();
                w2.slots.push(c.clone());
                w2.degrees.push(*d);
                next.push(w2);
            }
        }
        out = next;
    }
    out
}

fn keep_weight(m: &MatrixSeries, budget: u32) -> MatrixSeries {
    m.map(|e| e.filter(|mono| mono.weight() <= budget))
}

impl Chain {
    pub fn zero(model: ModelConfig, size: usize) -> Self {
        Chain {
            model,
            size,
            terms: BTreeMap::new(),
        }
    }

    pub fn model(&self) -> &ModelConfig {
        &self.model
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn terms(&self) -> &BTreeMap<Vec<Tail>, MatrixSeries> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// 0-chain `a`.
    pub fn from_element(a: &MatrixSeries) -> Self {
        let mut c = Self::zero(*a.model(), a.size());
        c.add_canonical(vec![], a.clone());
        c
    }

    /// The chain `a₀ ⊗ … ⊗ aₙ` in the unsuspended convention, i.e. the
    /// suspended word times `(−1)^{Σ_i (n−i)|a_i|}`.
    pub fn from_tuple(slots: &[MatrixSeries]) -> Result<Self> {
        let first = slots
            .first()
            .ok_or_else(|| Error::Precondition("a chain needs at least one slot".into()))?;
        let mut c = Self::zero(*first.model(), first.size());
        for s in slots {
            c.check(s)?;
        }
        let n = slots.len() - 1;
        for h in split_slots(slots) {
            let e: u32 = h.degrees.iter().enumerate().map(|(i, d)| (n - i) as u32 * d).sum();
            c.add_word(&parity_sign(e), &h.slots);
        }
        Ok(c)
    }

    /// The suspended word `sa₀ ⊗ … ⊗ saₙ`.
    pub fn from_suspended(slots: &[MatrixSeries]) -> Result<Self> {
        let first = slots
            .first()
            .ok_or_else(|| Error::Precondition("a chain needs at least one slot".into()))?;
        let mut c = Self::zero(*first.model(), first.size());
        for s in slots {
            c.check(s)?;
        }
        c.add_word(&rational::one(), slots);
        Ok(c)
    }

    fn check(&self, s: &MatrixSeries) -> Result<()> {
        self.model.ensure_same(s.model())?;
        if s.size() != self.size {
            return Err(Error::Precondition(format!(
                "slot of size {} in a chain over size {}",
                s.size(),
                self.size
            )));
        }
        Ok(())
    }

    fn add_canonical(&mut self, key: Vec<Tail>, slot0: MatrixSeries) {
        let used: u32 = key.iter().map(|t| t.weight()).sum();
        let Some(budget) = self.model.fiber_max.checked_sub(used) else {
            return;
        };
        let slot0 = keep_weight(&slot0, budget);
        if slot0.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(slot0);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let done = {
                    let acc = e.get_mut();
                    acc.add_assign_ref(&slot0);
                    acc.is_zero()
                };
                if done {
                    e.remove();
                }
            }
        }
    }

    /// Adds `c · sa₀ ⊗ … ⊗ saₙ`, moving base-ring factors into slot 0.
    ///
    /// A factor `ρ` of slot `j` crosses the suspension and the `j − 1` slots
    /// already reduced to degree-zero tails, giving `(−1)^{|ρ| j}`.
    fn add_word(&mut self, c: &Rational, slots: &[MatrixSeries]) {
        // each tail sequence arises once, so the base-ring factors can be
        // multiplied out before touching slot 0
        let unit = FormalSeries::constant(self.model, c.clone());
        let mut partial: Vec<(Vec<Tail>, FormalSeries, u32)> = vec![(vec![], unit, 0)];
        let cap = self.model.fiber_max;
        let floor = slots[0].entries().iter().filter_map(|e| e.min_weight()).min();
        let Some(floor) = floor else {
            return;
        };
        for (j, slot) in slots.iter().enumerate().skip(1) {
            let mut groups: BTreeMap<Tail, FormalSeries> = BTreeMap::new();
            for r in 0..self.size {
                for col in 0..self.size {
                    for (m, v) in slot.get(r, col).iter() {
                        let tail = Tail {
                            row: r as u8,
                            col: col as u8,
                            fiber: m.fiber,
                        };
                        let mut rho = *m;
                        rho.fiber = [0; MAX_DIM];
                        let neg = rho.form_degree() as usize * j % 2 == 1;
                        let e = groups.entry(tail).or_insert_with(|| FormalSeries::zero(self.model));
                        e.add_term(rho, if neg { -v.clone() } else { v.clone() });
                    }
                }
            }
            let mut next = Vec::new();
            for (key, acc, used) in &partial {
                for (tail, rho) in &groups {
                    let u = used + tail.weight();
                    if u + floor > cap || rho.is_zero() {
                        continue;
                    }
                    let a1 = acc.mul_within(rho, cap - u - floor);
                    if a1.is_zero() {
                        continue;
                    }
                    let mut k2 = key.clone();
                    k2.push(*tail);
                    next.push((k2, a1, u));
                }
            }
            partial = next;
            if partial.is_empty() {
                return;
            }
        }
        for (key, acc, used) in partial {
            let m0 = slots[0].map(|e| e.mul_within(&acc, cap - used));
            self.add_canonical(key, m0);
        }
    }

    /// Terms as form-homogeneous suspended words.
    fn words(&self) -> Vec<Homogeneous> {
        let mut out = Vec::new();
        for (key, m0) in &self.terms {
            for (h, comp) in m0.form_components() {
                let mut slots = vec![comp];
                let mut degrees = vec![h];
                for t in key {
                    slots.push(t.matrix(self.model, self.size));
                    degrees.push(0);
                }
                out.push(Homogeneous { slots, degrees });
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        let mut out = Self::zero(self.model, self.size);
        for (k, m) in &self.terms {
            out.add_canonical(k.clone(), m.scale(c));
        }
        out
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.model.ensure_same(&other.model)?;
        if self.size != other.size {
            return Err(Error::Precondition("chains over different matrix sizes".into()));
        }
        let mut out = self.clone();
        for (k, m) in &other.terms {
            out.add_canonical(k.clone(), m.clone());
        }
        Ok(out)
    }

    /// Chain degrees present.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d: Vec<usize> = self.terms.keys().map(|k| k.len()).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    /// Part of chain degree `n` and total form degree `f`.
    pub fn component(&self, n: usize, f: u32) -> Self {
        let mut out = Self::zero(self.model, self.size);
        for (k, m) in &self.terms {
            if k.len() == n {
                out.add_canonical(k.clone(), m.form_part(f));
            }
        }
        out
    }

    /// `(chain degree, form degree)` pairs present.
    pub fn bidegrees(&self) -> Vec<(usize, u32)> {
        let mut out: Vec<(usize, u32)> = self
            .terms
            .iter()
            .flat_map(|(k, m)| m.form_components().into_iter().map(move |(f, _)| (k.len(), f)))
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// Terms whose total weight is below `w`.
    pub fn below_weight(&self, w: u32) -> Self {
        let mut out = Self::zero(self.model, self.size);
        for (k, m) in &self.terms {
            let used: u32 = k.iter().map(|t| t.weight()).sum();
            if used < w {
                out.add_canonical(k.clone(), keep_weight(m, w - used - 1));
            }
        }
        out
    }

    /// The action `R_P` of a cochain: insertions into consecutive slots and
    /// wrap-around insertions through slot 0.
    pub fn act(&self, p: &Cochain) -> Result<Chain> {
        self.model.ensure_same(p.model())?;
        if p.size() != self.size {
            return Err(Error::Precondition("cochain and chain over different matrix sizes".into()));
        }
        let mut out = Self::zero(self.model, self.size);
        let parts = p.graded_parts();
        for w in self.words() {
            let n = w.slots.len() - 1;
            for (m, g, part) in &parts {
                let m = *m;
                let norm = *g + m as u32 + 1; // parity of ‖P‖
                if m == 0 {
                    let v = part.apply_shifted(&[], &[]);
                    for i in 1..=n + 1 {
                        let sign = parity_sign(norm * w.shifted(0..i));
                        let mut slots = w.slots[..i].to_vec();
                        slots.push(v.clone());
                        slots.extend_from_slice(&w.slots[i..]);
                        out.add_word(&sign, &slots);
                    }
                    continue;
                }
                if m > n + 1 {
                    continue;
                }
                for i in 1..=n + 1 - m {
                    let sign = parity_sign(norm * w.shifted(0..i));
                    let v = part.apply_shifted(&w.slots[i..i + m], &w.degrees[i..i + m]);
                    if v.is_zero() {
                        continue;
                    }
                    let mut slots = w.slots[..i].to_vec();
                    slots.push(v);
                    slots.extend_from_slice(&w.slots[i + m..]);
                    out.add_word(&sign, &slots);
                }
                for j in 0..m {
                    if j > n {
                        break;
                    }
                    // rotate the last j slots to the front
                    let cut = n + 1 - j;
                    let rot_sign = w.shifted(cut..n + 1) * w.shifted(0..cut);
                    let mut slots = w.slots[cut..].to_vec();
                    slots.extend_from_slice(&w.slots[..cut]);
                    let mut degrees = w.degrees[cut..].to_vec();
                    degrees.extend_from_slice(&w.degrees[..cut]);
                    let v = part.apply_shifted(&slots[..m], &degrees[..m]);
                    if v.is_zero() {
                        continue;
                    }
                    let mut new = vec![v];
                    new.extend_from_slice(&slots[m..]);
                    out.add_word(&parity_sign(rot_sign), &new);
                }
            }
        }
        Ok(out)
    }

    /// Hochschild boundary relative to an associative product cochain.
    pub fn boundary(&self, prod: &Cochain) -> Result<Chain> {
        self.act(prod)
    }

    /// Extends an odd derivation `d` of the algebra to chains, slot by slot.
    pub fn differential(&self, d: impl Fn(&MatrixSeries) -> MatrixSeries) -> Chain {
        let mut out = Self::zero(self.model, self.size);
        for w in self.words() {
            for i in 0..w.slots.len() {
                let di = d(&w.slots[i]);
                if di.is_zero() {
                    continue;
                }
                let mut slots = w.slots.clone();
                slots[i] = di;
                out.add_word(&parity_sign(w.shifted(0..i)), &slots);
            }
        }
        out
    }

    /// `exp(R_γ)` for an arity-0 cochain of shifted degree zero (a 1-form);
    /// terminates through the form-degree cap.
    pub fn exp_act(&self, gamma: &Cochain) -> Result<Chain> {
        let mut term = self.clone();
        let mut out = self.clone();
        let mut k = 1i64;
        while !term.is_zero() {
            term = term.act(gamma)?.scale(&rational::frac(1, k));
            out = &out + &term;
            k += 1;
            if k > 64 {
                return Err(Error::Precondition("exponential action did not terminate".into()));
            }
        }
        Ok(out)
    }

    /// Cyclic contraction of matrix indices: a scalar chain.
    pub fn trace(&self) -> Chain {
        let mut out = Self::zero(self.model, 1);
        for (key, m0) in &self.terms {
            let entry = if key.is_empty() {
                m0.trace()
            } else {
                if key.windows(2).any(|w| w[0].col != w[1].row) {
                    continue;
                }
                m0.get(key[key.len() - 1].col as usize, key[0].row as usize).clone()
            };
            let k2 = key
                .iter()
                .map(|t| Tail {
                    row: 0,
                    col: 0,
                    fiber: t.fiber,
                })
                .collect();
            out.add_canonical(k2, MatrixSeries::scalar_sized(&entry, 1));
        }
        out
    }

    /// `tr ∘ exp(R_{−γ})` for a matrix 1-form `γ`. With `D^E = D + [γ, ·]` flat,
    /// this carries `D^E + b` on matrix chains to `D + b` on scalar ones.
    pub fn trace_twisted(&self, gamma: &MatrixSeries) -> Result<Chain> {
        Ok(self.exp_act(&Cochain::element(&-gamma))?.trace())
    }

    /// Quotient by tails in the scalar line `R·I`: for scalars these tails
    /// vanish; for matrices `e_NN` is rewritten as `−Σ_{r<N} e_rr`.
    pub fn normalize(&self) -> Chain {
        let n = self.size as u8;
        let mut out = Self::zero(self.model, self.size);
        for (key, m0) in &self.terms {
            let mut partial: Vec<(Vec<Tail>, bool)> = vec![(vec![], false)];
            for t in key {
                let constant = t.fiber == [0; MAX_DIM];
                let replacement: Vec<(Tail, bool)> = if constant && t.row == n - 1 && t.col == n - 1 {
                    (0..n - 1)
                        .map(|r| {
                            (
                                Tail {
                                    row: r,
                                    col: r,
                                    fiber: t.fiber,
                                },
                                true,
                            )
                        })
                        .collect()
                } else {
                    vec![(*t, false)]
                };
                partial = partial
                    .into_iter()
                    .flat_map(|(k, neg)| {
                        replacement.iter().map(move |(t2, n2)| {
                            let mut k2 = k.clone();
                            k2.push(*t2);
                            (k2, neg ^ n2)
                        })
                    })
                    .collect();
            }
            for (k, neg) in partial {
                out.add_canonical(k, if neg { -m0 } else { m0.clone() });
            }
        }
        out
    }
}

impl Add for &Chain {
    type Output = Chain;
    fn add(self, rhs: &Chain) -> Chain {
        self.try_add(rhs).expect("chain addition across models")
    }
}

impl Sub for &Chain {
    type Output = Chain;
    fn sub(self, rhs: &Chain) -> Chain {
        self.try_add(&-rhs).expect("chain subtraction across models")
    }
}

impl Neg for &Chain {
    type Output = Chain;
    fn neg(self) -> Chain {
        self.scale(&-rational::one())
    }
}

/// One line per canonical term, `a0 (x) a1 (x) ...`, slot 0 first.
impl fmt::Display for Chain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (key, m0)) in self.terms.iter().enumerate() {
            if k > 0 {
                writeln!(f)?;
            }
            if self.size == 1 {
                write!(f, "{}", format_series(m0.get(0, 0)))?;
            } else {
                write!(f, "{m0}")?;
            }
            for t in key {
                let mut m = Monomial::one();
                m.fiber = t.fiber;
                let y = format_series(&FormalSeries::term(self.model, m, rational::one()));
                if self.size == 1 {
                    write!(f, " (x) {y}")?;
                } else {
                    write!(f, " (x) e{}{}*{y}", t.row + 1, t.col + 1)?;
                }
            }
        }
        Ok(())
    }
}
