//! Polydifferential Hochschild cochains and chains over the fiberwise algebra.
//!
//! Everything is computed on the suspension `sA`: a cochain `P` of arity `m`
//! and coefficient form degree `g` acts as a map of degree `‖P‖ = g + m − 1`,
//! and chains are words `sa₀ ⊗ … ⊗ saₙ`. Signs are the Koszul signs of those
//! shifted maps, so the Lie and module identities hold by construction and are
//! checked rather than assumed.

mod chain;
mod cochain;

pub use chain::{Chain, Tail};
pub use cochain::{Cochain, Multi, Slot, Word};

use crate::weyl::monomial::MAX_DIM;
use crate::weyl::rational::{self, Rational};

/// `(−1)^k` as a rational.
pub(crate) fn parity_sign(k: u32) -> Rational {
    rational::sign(k % 2 == 1)
}

/// Every way to write `alpha = γ₀ + δ₁ + … + δ_{parts−1}` together with the
/// multinomial coefficient of that split.
pub(crate) fn distributions(alpha: &Multi, parts: usize) -> Vec<(Vec<Multi>, Rational)> {
    let mut out: Vec<(Vec<Multi>, Rational)> = vec![(vec![[0; MAX_DIM]; parts], rational::one())];
    for coord in 0..MAX_DIM {
        let a = alpha[coord];
        if a == 0 {
            continue;
        }
        let mut next = Vec::new();
        for (split, c) in &out {
            for comp in compositions(a, parts) {
                let mut s = split.clone();
                let mut denom = rational::one();
                for (p, &v) in comp.iter().enumerate() {
                    s[p][coord] = v;
                    denom *= rational::factorial(v as u32);
                }
                next.push((s, c * rational::factorial(a as u32) / denom));
            }
        }
        out = next;
    }
    out
}

/// Ordered ways to write `total` as a sum of `parts` non-negative integers.
fn compositions(total: u8, parts: usize) -> Vec<Vec<u8>> {
    if parts == 0 {
        return if total == 0 { vec![vec![]] } else { vec![] };
    }
    if parts == 1 {
        return vec![vec![total]];
    }
    let mut out = Vec::new();
    for first in 0..=total {
        for mut rest in compositions(total - first, parts - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weyl::rational::int;

    #[test]
    fn multinomial_splits_sum_to_power() {
        // Σ multinomials = parts^|α|
        let alpha = [2, 1, 0, 0];
        let d = distributions(&alpha, 3);
        let total: Rational = d.iter().map(|(_, c)| c.clone()).sum();
        assert_eq!(total, int(27));
        assert!(d.iter().all(|(s, _)| {
            let mut acc = [0u8; MAX_DIM];
            for p in s {
                for i in 0..MAX_DIM {
                    acc[i] += p[i];
                }
            }
            acc == alpha
        }));
    }
}
