use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Neg, Sub};

use super::{distributions, parity_sign};
use crate::error::{Error, Result};
use crate::weyl::expr::format_series;
use crate::weyl::matrix::MatrixSeries;
use crate::weyl::model::ModelConfig;
use crate::weyl::monomial::MAX_DIM;
use crate::weyl::rational::{self, Rational};
use crate::weyl::series::FormalSeries;

/// Fiber multi-index `α`; `∂_y^α`.
pub type Multi = [u8; MAX_DIM];

/// One argument of a word: `∂_y^α` applied to the `(row, col)` entry.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Slot {
    pub alpha: Multi,
    pub row: u8,
    pub col: u8,
}

/// `e_out · ∏_k (∂^{α_k} a_k)_{row_k col_k}`, the products taken left to right.
/// Every matrix polydifferential operator is a unique sum of series multiples
/// of such words, with the series coefficient standing on the far left.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Word {
    pub out: (u8, u8),
    pub slots: Vec<Slot>,
}

impl Word {
    pub fn arity(&self) -> usize {
        self.slots.len()
    }
}

/// Finite sum of coefficient · word; arities may be mixed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cochain {
    model: ModelConfig,
    size: usize,
    terms: BTreeMap<Word, FormalSeries>,
}

fn add_into(terms: &mut BTreeMap<Word, FormalSeries>, w: Word, s: FormalSeries) {
    if s.is_zero() {
        return;
    }
    match terms.entry(w) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(s);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let sum = e.get() + &s;
            if sum.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = sum;
            }
        }
    }
}

/// `(−1)^{Σ_k (m−k)|a_k|}`: the sign of desuspending `m` arguments.
pub(crate) fn desuspension_odd(degrees: &[u32]) -> bool {
    let m = degrees.len();
    degrees
        .iter()
        .enumerate()
        .map(|(k, d)| (m - 1 - k) as u32 * d)
        .sum::<u32>()
        % 2
        == 1
}

impl Cochain {
    pub fn zero(model: ModelConfig, size: usize) -> Self {
        Cochain {
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

    pub fn terms(&self) -> &BTreeMap<Word, FormalSeries> {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn add_term(&mut self, w: Word, s: FormalSeries) -> Result<()> {
        self.model.ensure_same(s.model())?;
        let n = self.size as u8;
        if w.out.0 >= n || w.out.1 >= n || w.slots.iter().any(|sl| sl.row >= n || sl.col >= n) {
            return Err(Error::Precondition(format!("word indices exceed matrix size {n}")));
        }
        add_into(&mut self.terms, w, s);
        Ok(())
    }

    /// Arity-0 cochain: the element `a` itself.
    pub fn element(a: &MatrixSeries) -> Self {
        let mut out = Self::zero(*a.model(), a.size());
        for i in 0..a.size() {
            for j in 0..a.size() {
                let w = Word {
                    out: (i as u8, j as u8),
                    slots: vec![],
                };
                add_into(&mut out.terms, w, a.get(i, j).clone());
            }
        }
        out
    }

    /// Scalar operator `s · ∂^{α₁} ⊗ … ⊗ ∂^{α_m}`.
    pub fn scalar_operator(coefficient: &FormalSeries, alphas: &[Multi]) -> Self {
        let mut out = Self::zero(*coefficient.model(), 1);
        let w = Word {
            out: (0, 0),
            slots: alphas
                .iter()
                .map(|a| Slot {
                    alpha: *a,
                    row: 0,
                    col: 0,
                })
                .collect(),
        };
        add_into(&mut out.terms, w, coefficient.clone());
        out
    }

    /// Pointwise product `μ(a, b) = ab` on `size × size` matrices.
    pub fn product(model: ModelConfig, size: usize) -> Self {
        let mu = Self::scalar_operator(&FormalSeries::one(model), &[[0; MAX_DIM], [0; MAX_DIM]]);
        mu.cotrace(size).expect("scalar cochain")
    }

    pub fn arities(&self) -> Vec<usize> {
        let mut a: Vec<usize> = self.terms.keys().map(|w| w.arity()).collect();
        a.sort_unstable();
        a.dedup();
        a
    }

    pub fn arity_part(&self, m: usize) -> Self {
        self.filter_words(|w| w.arity() == m)
    }

    fn filter_words(&self, keep: impl Fn(&Word) -> bool) -> Self {
        Cochain {
            model: self.model,
            size: self.size,
            terms: self
                .terms
                .iter()
                .filter(|(w, _)| keep(w))
                .map(|(w, s)| (w.clone(), s.clone()))
                .collect(),
        }
    }

    /// Vanishes on fiber-constant arguments term by term.
    pub fn is_normalized(&self) -> bool {
        self.terms
            .keys()
            .all(|w| w.slots.iter().all(|s| s.alpha.iter().any(|&a| a != 0)))
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map_coefficients(|s| s.scale(c))
    }

    /// Applies `f` to every coefficient; `f` must be linear.
    pub fn map_coefficients(&self, f: impl Fn(&FormalSeries) -> FormalSeries) -> Self {
        let mut out = Self::zero(self.model, self.size);
        for (w, s) in &self.terms {
            add_into(&mut out.terms, w.clone(), f(s));
        }
        out
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.ensure_same(other)?;
        let mut out = self.clone();
        for (w, s) in &other.terms {
            add_into(&mut out.terms, w.clone(), s.clone());
        }
        Ok(out)
    }

    fn ensure_same(&self, other: &Self) -> Result<()> {
        self.model.ensure_same(&other.model)?;
        if self.size != other.size {
            return Err(Error::Precondition(format!(
                "cochains over different matrix sizes: {} and {}",
                self.size, other.size
            )));
        }
        Ok(())
    }

    /// Splits into pieces of one arity and one coefficient form degree:
    /// `(arity, form degree, piece)`.
    pub fn graded_parts(&self) -> Vec<(usize, u32, Cochain)> {
        let mut parts: BTreeMap<(usize, u32), Cochain> = BTreeMap::new();
        for (w, s) in &self.terms {
            for (g, sg) in s.form_components() {
                let e = parts
                    .entry((w.arity(), g))
                    .or_insert_with(|| Self::zero(self.model, self.size));
                add_into(&mut e.terms, w.clone(), sg);
            }
        }
        parts.into_iter().map(|((m, g), c)| (m, g, c)).collect()
    }

    /// Shifted degrees `g + m − 1` present, as parities.
    pub fn shifted_parities(&self) -> Vec<bool> {
        let mut p: Vec<bool> = self
            .graded_parts()
            .iter()
            .map(|(m, g, _)| (*g as usize + *m + 1) % 2 == 1)
            .collect();
        p.sort_unstable();
        p.dedup();
        p
    }

    /// `Σ coefficient · ∏ ∂^{α_k}(a_k)_{row col}` placed at the output entry.
    pub fn evaluate(&self, args: &[MatrixSeries]) -> Result<MatrixSeries> {
        for w in self.terms.keys() {
            if w.arity() != args.len() {
                return Err(Error::Arity {
                    expected: w.arity(),
                    got: args.len(),
                });
            }
        }
        for a in args {
            self.model.ensure_same(a.model())?;
            if a.size() != self.size {
                return Err(Error::Precondition(format!(
                    "argument of size {} for a cochain over size {}",
                    a.size(),
                    self.size
                )));
            }
        }
        Ok(self.evaluate_unchecked(args))
    }

    pub(crate) fn evaluate_unchecked(&self, args: &[MatrixSeries]) -> MatrixSeries {
        let mut out = MatrixSeries::zero_sized(self.model, self.size);
        // the same derivative of an argument entry recurs across many terms
        let mut derivs: rustc_hash::FxHashMap<(usize, u8, u8, Multi), FormalSeries> = Default::default();
        for (w, s) in &self.terms {
            let mut acc = s.clone();
            for (k, sl) in w.slots.iter().enumerate() {
                let d = derivs.entry((k, sl.row, sl.col, sl.alpha)).or_insert_with(|| {
                    args[k].get(sl.row as usize, sl.col as usize).fiber_derive_multi(&sl.alpha)
                });
                if d.is_zero() {
                    acc = FormalSeries::zero(self.model);
                    break;
                }
                acc = &acc * &*d;
                if acc.is_zero() {
                    break;
                }
            }
            if !acc.is_zero() {
                let (i, j) = (w.out.0 as usize, w.out.1 as usize);
                let v = out.get(i, j) + &acc;
                out.set(i, j, v);
            }
        }
        out
    }

    /// The suspended map on `sa₁ ⊗ … ⊗ sa_m` for arguments homogeneous of the
    /// given form degrees; returns the desuspended value.
    pub(crate) fn apply_shifted(&self, args: &[MatrixSeries], degrees: &[u32]) -> MatrixSeries {
        let v = self.evaluate_unchecked(args);
        if desuspension_odd(degrees) {
            -&v
        } else {
            v
        }
    }

    /// `P ∘ Q = Σ_i P ∘_i Q` in the suspended (pre-Lie) convention.
    pub fn compose(&self, q: &Cochain) -> Result<Cochain> {
        self.ensure_same(q)?;
        let mut out = Self::zero(self.model, self.size);
        let q_parts: Vec<(Word, u32, FormalSeries)> = q
            .terms
            .iter()
            .flat_map(|(w, s)| s.form_components().into_iter().map(move |(g, sg)| (w.clone(), g, sg)))
            .collect();
        for (pw, ps) in &self.terms {
            let m = pw.arity();
            for i0 in 0..m {
                let target = pw.slots[i0];
                for (qw, g, qs) in &q_parts {
                    if qw.out != (target.row, target.col) {
                        continue;
                    }
                    let n = qw.arity();
                    // ‖Q‖(i−1) + (m−i)|g| with i one-based
                    let e = (*g as usize + n + 1) * i0 + (m - 1 - i0) * *g as usize;
                    let sign = parity_sign(e as u32);
                    for (split, mult) in distributions(&target.alpha, n + 1) {
                        let coeff = qs.fiber_derive_multi(&split[0]);
                        if coeff.is_zero() {
                            continue;
                        }
                        let c = (ps * &coeff).scale(&(&mult * &sign));
                        let mut slots = pw.slots[..i0].to_vec();
                        for (l, qsl) in qw.slots.iter().enumerate() {
                            let mut sl = *qsl;
                            for k in 0..MAX_DIM {
                                sl.alpha[k] += split[l + 1][k];
                            }
                            slots.push(sl);
                        }
                        slots.extend_from_slice(&pw.slots[i0 + 1..]);
                        add_into(&mut out.terms, Word { out: pw.out, slots }, c);
                    }
                }
            }
        }
        Ok(out)
    }

    /// `[P, Q] = P∘Q − (−1)^{‖P‖‖Q‖} Q∘P`.
    pub fn gerstenhaber(&self, q: &Cochain) -> Result<Cochain> {
        self.ensure_same(q)?;
        let mut out = Self::zero(self.model, self.size);
        let pp = self.graded_parts();
        let qp = q.graded_parts();
        for (m, g, p) in &pp {
            let pd = (*g as usize + *m + 1) % 2;
            for (n, h, qq) in &qp {
                let qd = (*h as usize + *n + 1) % 2;
                let pq = p.compose(qq)?;
                let qpc = qq.compose(p)?;
                out = &out + &pq;
                out = if pd * qd == 1 { &out + &qpc } else { &out - &qpc };
            }
        }
        Ok(out)
    }

    /// Hochschild codifferential `∂P = [prod, P]`.
    pub fn codifferential(&self, prod: &Cochain) -> Result<Cochain> {
        prod.gerstenhaber(self)
    }

    /// `(cotr P)(M₀,…,M_k)_{ij} = Σ P((M₀)_{i i₁}, …, (M_k)_{i_k j})` for a scalar `P`.
    pub fn cotrace(&self, n: usize) -> Result<Cochain> {
        if self.size != 1 {
            return Err(Error::Precondition("cotrace needs a scalar cochain".into()));
        }
        let mut out = Self::zero(self.model, n);
        for (w, s) in &self.terms {
            let m = w.arity();
            // index chains i₀, …, i_m
            let mut chains: Vec<Vec<u8>> = vec![vec![]];
            for _ in 0..=m {
                chains = chains
                    .into_iter()
                    .flat_map(|c| {
                        (0..n as u8).map(move |i| {
                            let mut c2 = c.clone();
                            c2.push(i);
                            c2
                        })
                    })
                    .collect();
            }
            for c in chains {
                let slots = w
                    .slots
                    .iter()
                    .enumerate()
                    .map(|(k, sl)| Slot {
                        alpha: sl.alpha,
                        row: c[k],
                        col: c[k + 1],
                    })
                    .collect();
                add_into(
                    &mut out.terms,
                    Word {
                        out: (c[0], c[m]),
                        slots,
                    },
                    s.clone(),
                );
            }
        }
        Ok(out)
    }

    /// `exp(−ad_γ)(cotr P)` for a matrix form `γ`; the series stops because
    /// every bracket with `γ` raises the form degree.
    pub fn cotrace_twisted(&self, gamma: &MatrixSeries) -> Result<Cochain> {
        let g = Cochain::element(gamma);
        let mut term = self.cotrace(gamma.size())?;
        let mut out = term.clone();
        let mut k = 1u32;
        while !term.is_zero() {
            term = g.gerstenhaber(&term)?.scale(&-rational::frac(1, k as i64));
            out = &out + &term;
            k += 1;
            if k > 64 {
                return Err(Error::Precondition("twisting series did not terminate".into()));
            }
        }
        Ok(out)
    }
}

impl Add for &Cochain {
    type Output = Cochain;
    fn add(self, rhs: &Cochain) -> Cochain {
        self.try_add(rhs).expect("cochain addition across models")
    }
}

impl Sub for &Cochain {
    type Output = Cochain;
    fn sub(self, rhs: &Cochain) -> Cochain {
        self.try_add(&-rhs).expect("cochain subtraction across models")
    }
}

impl Neg for &Cochain {
    type Output = Cochain;
    fn neg(self) -> Cochain {
        self.map_coefficients(|s| -s)
    }
}

fn format_multi(a: &Multi) -> String {
    let parts: Vec<String> = a
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(i, &k)| if k == 1 { format!("d{}", i + 1) } else { format!("d{}^{k}", i + 1) })
        .collect();
    if parts.is_empty() {
        "id".into()
    } else {
        parts.join("")
    }
}

impl fmt::Display for Cochain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, (w, s)) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({})", format_series(s))?;
            if self.size > 1 {
                write!(f, " e{}{}", w.out.0 + 1, w.out.1 + 1)?;
            }
            let slots: Vec<String> = w
                .slots
                .iter()
                .map(|sl| {
                    if self.size > 1 {
                        format!("{}[{}{}]", format_multi(&sl.alpha), sl.row + 1, sl.col + 1)
                    } else {
                        format_multi(&sl.alpha)
                    }
                })
                .collect();
            if !slots.is_empty() {
                write!(f, " {}", slots.join(" (x) "))?;
            }
        }
        Ok(())
    }
}
