use super::StarProduct;
use crate::error::{Error, Result};
use crate::weyl::matrix::MatrixSeries;
use crate::weyl::product::{Pointwise, SeriesProduct};
use crate::weyl::rational::{self, frac, Rational};
use crate::weyl::series::FormalSeries;

fn ensure_positive_weight(z: &MatrixSeries, what: &str) -> Result<()> {
    for e in z.entries() {
        if e.min_weight() == Some(0) {
            return Err(Error::Precondition(format!("{what} has a weight-zero part: {z}")));
        }
    }
    Ok(())
}

/// `Σ_k c_k Z^k`; the powers die once their weight passes the cutoff.
fn power_series(z: &MatrixSeries, prod: &dyn SeriesProduct, coefficient: impl Fn(u32) -> Rational) -> MatrixSeries {
    let model = *z.model();
    let mut power = MatrixSeries::identity_sized(model, z.size());
    let mut acc = power.clone();
    for k in 1..=model.fiber_max {
        power = power.mul_with(z, prod);
        if power.is_zero() {
            break;
        }
        acc = &acc + &power.scale(&coefficient(k));
    }
    acc
}

/// `A⁻¹ = Σ (−Z)^k` for `A = I + Z` with `Z` of positive filtration weight.
pub fn mat_neumann_inverse(a: &MatrixSeries, prod: &dyn SeriesProduct) -> Result<MatrixSeries> {
    let z = a - &MatrixSeries::identity_sized(*a.model(), a.size());
    ensure_positive_weight(&z, "A − I")?;
    Ok(power_series(&z, prod, |k| rational::sign(k % 2 == 1)))
}

/// `(I + Z)^{−1/2} = Σ binom(−1/2, k) Z^k` for `Z` of positive filtration weight.
pub fn mat_binomial_invsqrt(z: &MatrixSeries, prod: &dyn SeriesProduct) -> Result<MatrixSeries> {
    ensure_positive_weight(z, "Z")?;
    let half = frac(-1, 2);
    Ok(power_series(z, prod, |k| rational::binomial(&half, k)))
}

/// `½ + (p − ½) ⋆ (1 + 4(p⋆p − p))^{−1/2}`.
fn project(p: &MatrixSeries, s: &StarProduct) -> Result<MatrixSeries> {
    let model = *p.model();
    let n = p.size();
    let half = MatrixSeries::identity_sized(model, n).scale(&frac(1, 2));
    let defect = &s.mat_star_mul(p, p)? - p;
    let root = mat_binomial_invsqrt(&defect.scale(&rational::int(4)), s)?;
    Ok(&half + &s.mat_star_mul(&(p - &half), &root)?)
}

/// A ⋆-idempotent with principal symbol `q`, for a pointwise idempotent `q`.
pub fn idempotent_lift(q: &MatrixSeries, s: &StarProduct) -> Result<MatrixSeries> {
    if q.entries().iter().any(|e| !e.is_hbar_free()) {
        return Err(Error::Precondition("idempotent to lift must be hbar-free".into()));
    }
    if q.mul_with(q, &Pointwise) != *q {
        return Err(Error::Precondition(format!("not a pointwise idempotent: {q}")));
    }
    project(q, s)
}

/// Idempotent path from `P` to `Q` through the projection of `(1−t)P + tQ`.
/// Exact as a polynomial in `t` once `t_max ≥ 2·hbar_max + 1`.
pub fn idempotent_path(p: &MatrixSeries, q: &MatrixSeries, s: &StarProduct) -> Result<MatrixSeries> {
    let model = *p.model();
    if principal_symbol(p) != principal_symbol(q) {
        return Err(Error::Precondition("path endpoints have different principal symbols".into()));
    }
    if model.t_max < 2 * model.hbar_max + 1 {
        return Err(Error::InvalidModel(format!(
            "t_max {} is below 2·hbar_max + 1 = {}",
            model.t_max,
            2 * model.hbar_max + 1
        )));
    }
    let t = FormalSeries::t_var(model);
    let one_minus_t = &FormalSeries::one(model) - &t;
    let straight = &p.left_scalar(&one_minus_t) + &q.left_scalar(&t);
    project(&straight, s)
}

fn t_derivative(p: &MatrixSeries) -> MatrixSeries {
    p.map(|e| e.t_derive())
}

/// `d_t P − [P, P ⋆ d_tP − d_tP ⋆ P]_⋆`; vanishes along an idempotent path.
pub fn path_derivative_residual(p: &MatrixSeries, s: &StarProduct) -> Result<MatrixSeries> {
    let dp = t_derivative(p);
    let inner = &s.mat_star_mul(p, &dp)? - &s.mat_star_mul(&dp, p)?;
    let comm = &s.mat_star_mul(p, &inner)? - &s.mat_star_mul(&inner, p)?;
    Ok(&dp - &comm)
}

/// `P ⋆ d_tP ⋆ P`; vanishes along an idempotent path.
pub fn path_sandwich(p: &MatrixSeries, s: &StarProduct) -> Result<MatrixSeries> {
    let dp = t_derivative(p);
    s.mat_star_mul(&s.mat_star_mul(p, &dp)?, p)
}

/// Sets `ℏ = 0`.
pub fn principal_symbol(p: &MatrixSeries) -> MatrixSeries {
    p.map(|e| e.principal_symbol())
}

/// Matrix trace, read as a degree-zero Hochschild chain.
pub fn ch00(p: &MatrixSeries) -> FormalSeries {
    p.trace()
}
