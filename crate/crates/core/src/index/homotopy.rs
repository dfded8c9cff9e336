use super::IndexInstance;
use crate::error::Result;
use crate::hochschild::{Chain, Cochain};
use crate::weyl::matrix::MatrixSeries;
use crate::weyl::rational;

/// `Σ_n (−1)^⌊n/2⌋ slots(n)` in the unsuspended convention, for `n` up to
/// the number of form directions (more `B` factors have no room in `θ`).
fn alternating_sum(q: &MatrixSeries, build: impl Fn(usize) -> Vec<MatrixSeries>) -> Result<Chain> {
    let model = *q.model();
    let mut out = Chain::zero(model, q.size());
    for n in 0..=model.dim {
        let term = Chain::from_tuple(&build(n))?;
        let sign = rational::sign((n / 2) % 2 == 1);
        out = out.try_add(&term.scale(&sign))?;
    }
    Ok(out)
}

/// `exp(R_B)(q)`.
pub fn q_tilde(q: &MatrixSeries, bq: &MatrixSeries) -> Result<Chain> {
    Chain::from_element(q).exp_act(&Cochain::element(bq))
}

/// `Σ_k (−1)^k [q ⊗ B^{⊗2k} + q ⊗ B^{⊗2k+1}]`, term by term.
pub fn q_tilde_series(q: &MatrixSeries, bq: &MatrixSeries) -> Result<Chain> {
    alternating_sum(q, |n| {
        let mut slots = vec![q.clone()];
        slots.extend(std::iter::repeat_n(bq.clone(), n));
        slots
    })
}

/// `ψ = Σ_n sU ⊗ sB ⊗ … ⊗ sB ⊗ s(q⋄U⁻¹)` with `n` copies of `B`. As
/// unsuspended tuples this is `Σ_k (−1)^k U ⊗ B^{⊗2k} ⊗ q⋄U⁻¹` plus
/// `Σ_k (−1)^{k+1} U ⊗ B^{⊗2k+1} ⊗ q⋄U⁻¹`.
pub fn psi_homotopy(q: &MatrixSeries, bq: &MatrixSeries, u: &MatrixSeries, inst: &IndexInstance) -> Result<Chain> {
    let model = *q.model();
    let u_inv = crate::starprod::mat_neumann_inverse(u, inst.diamond())?;
    let last = inst.dmul(q, &u_inv);
    let mut out = Chain::zero(model, q.size());
    for n in 0..=model.dim {
        let mut slots = vec![u.clone()];
        slots.extend(std::iter::repeat_n(bq.clone(), n));
        slots.push(last.clone());
        out = out.try_add(&Chain::from_suspended(&slots)?)?;
    }
    Ok(out)
}

/// `(Q − Q̃) − (b_⋄ψ − Dψ)` below the weight cap, with `D` extended to
/// chains slot by slot under the suspended signs.
pub fn homotopy_residual(q_full: &MatrixSeries, q_tilde: &Chain, psi: &Chain, inst: &IndexInstance) -> Result<Chain> {
    let fd = inst.fedosov();
    let d_psi = psi.differential(|a| a.map(|e| fd.apply_d(e)));
    let b_psi = psi.boundary(inst.diamond_cochain())?;
    let lhs = Chain::from_element(q_full).try_add(&-q_tilde)?;
    let rhs = b_psi.try_add(&-&d_psi)?;
    Ok(lhs.try_add(&-&rhs)?.below_weight(inst.model().fiber_max))
}
