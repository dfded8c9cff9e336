use super::monomial::{count_below, Monomial};
use super::rational::{int, Rational};
use super::series::FormalSeries;

fn push(out: &mut FormalSeries, m: Monomial, c: Rational, truncate: bool) {
    if truncate {
        out.add_term(m, c);
    } else {
        out.add_term_raw(m, c);
    }
}

fn delta_impl(a: &FormalSeries, truncate: bool) -> FormalSeries {
    let dim = a.model().dim;
    a.map_terms(|m, c, out| {
        for i in 0..dim {
            let b = m.fiber[i];
            if b == 0 || m.forms & (1 << i) != 0 {
                continue;
            }
            let mut m2 = *m;
            m2.fiber[i] -= 1;
            m2.forms |= 1 << i;
            let mut v = c * int(b as i64);
            if count_below(m.forms, i) % 2 == 1 {
                v = -v;
            }
            push(out, m2, v, truncate);
        }
    })
}

fn delta_inv_impl(a: &FormalSeries, truncate: bool) -> FormalSeries {
    let dim = a.model().dim;
    a.map_terms(|m, c, out| {
        let pq = m.fiber_degree() + m.form_degree();
        if pq == 0 {
            return;
        }
        let scaled = c / int(pq as i64);
        for k in 0..dim {
            if m.forms & (1 << k) == 0 {
                continue;
            }
            let mut m2 = *m;
            m2.forms &= !(1 << k);
            m2.fiber[k] += 1;
            let v = if count_below(m.forms, k) % 2 == 1 {
                -scaled.clone()
            } else {
                scaled.clone()
            };
            push(out, m2, v, truncate);
        }
    })
}

/// `δ = Σ θ^i ∂/∂y^i`, a left derivation.
pub fn delta(a: &FormalSeries) -> FormalSeries {
    delta_impl(a, true)
}

/// Contracting homotopy: `y^k ∂/∂θ^k` divided by fiber plus form degree.
pub fn delta_inv(a: &FormalSeries) -> FormalSeries {
    delta_inv_impl(a, true)
}

/// Restriction to `y = 0`, `θ = 0`.
pub fn chi(a: &FormalSeries) -> FormalSeries {
    a.filter(|m| m.is_base_only())
}

/// `a − χa − δδ⁻¹a − δ⁻¹δa`; vanishes identically.
///
/// The intermediate `δ⁻¹a` may leave the weight window, so both compositions
/// are evaluated without truncation and truncated at the end.
pub fn hodge_residual(a: &FormalSeries) -> FormalSeries {
    let up = delta_impl(&delta_inv_impl(a, false), false);
    let down = delta_inv_impl(&delta_impl(a, false), false);
    let model = *a.model();
    let mut out = a.clone();
    for (m, c) in chi(a).iter().chain(up.iter()).chain(down.iter()) {
        if model.keeps(m) {
            out.add_term(*m, -c.clone());
        }
    }
    out
}

/// `2h + |b|`.
pub fn filtration_weight(m: &Monomial) -> u32 {
    m.weight()
}
