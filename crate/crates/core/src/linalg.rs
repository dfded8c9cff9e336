//! Sparse exact row reduction.

use std::collections::BTreeMap;

use num_traits::Zero;

use crate::weyl::rational::Rational;

/// Sparse vector keyed by coordinate index.
pub type Row = BTreeMap<usize, Rational>;

/// Rows in echelon form; each row's pivot is its smallest coordinate and has
/// coefficient one. Lower indices are eliminated first.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    rows: BTreeMap<usize, Row>,
}

fn axpy(v: &mut Row, c: &Rational, r: &Row) {
    for (k, x) in r {
        let e = v.entry(*k).or_insert_with(Rational::zero);
        *e -= c * x;
        if e.is_zero() {
            v.remove(k);
        }
    }
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    pub fn pivots(&self) -> impl Iterator<Item = &usize> {
        self.rows.keys()
    }

    pub fn rows(&self) -> impl Iterator<Item = (&usize, &Row)> {
        self.rows.iter()
    }

    /// Removes every pivot coordinate from `v`; the result is the canonical
    /// representative of `v` modulo the row space.
    pub fn reduce(&self, v: &Row) -> Row {
        let mut v = v.clone();
        let mut cursor = 0usize;
        loop {
            let next = v
                .range(cursor..)
                .map(|(k, _)| *k)
                .find(|k| self.rows.contains_key(k));
            let Some(k) = next else { return v };
            let c = v[&k].clone();
            axpy(&mut v, &c, &self.rows[&k]);
            cursor = k + 1;
        }
    }

    /// Adds a vector; returns `false` if it was already in the span.
    pub fn insert(&mut self, v: &Row) -> bool {
        let r = self.reduce(v);
        let Some((&p, lead)) = r.iter().next() else {
            return false;
        };
        let inv = lead.recip();
        let r: Row = r.iter().map(|(k, x)| (*k, x * &inv)).collect();
        self.rows.insert(p, r);
        true
    }

    /// Rows whose pivot is at least `from`.
    pub fn restricted(&self, from: usize) -> Echelon {
        Echelon {
            rows: self
                .rows
                .range(from..)
                .map(|(k, r)| (*k, r.clone()))
                .collect(),
        }
    }
}
