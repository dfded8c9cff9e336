//! Index densities of idempotents: the geometric route through the fiberwise
//! connection `B^q`, the algebraic route through a ⋆-idempotent lift, and the
//! chain-level homotopy relating the two.

mod homotopy;
mod trace;

pub use homotopy::{homotopy_residual, psi_homotopy, q_tilde, q_tilde_series};
pub use trace::{sample_modes, trd, TraceDensity};

use crate::error::{Error, Result};
use crate::fedosov::{base_differential, fixed_point, FedosovData};
use crate::hochschild::{Chain, Cochain};
use crate::poisson::Polyvector;
use crate::starprod::{ch00, idempotent_lift, mat_neumann_inverse, principal_symbol, FiberProduct, StarProduct};
use crate::weyl::contraction::delta_inv;
use crate::weyl::matrix::MatrixSeries;
use crate::weyl::model::ModelConfig;
use crate::weyl::product::Pointwise;
use crate::weyl::rational::frac;
use crate::weyl::series::FormalSeries;

/// A pointwise idempotent over a flat model with a constant Poisson bivector.
#[derive(Clone, Debug)]
pub struct IndexInstance {
    model: ModelConfig,
    pi1: Polyvector,
    star: StarProduct,
    diamond: FiberProduct,
    diamond_cochain: Cochain,
    fedosov: FedosovData,
    q: MatrixSeries,
}

fn ensure_idempotent(q: &MatrixSeries) -> Result<()> {
    for e in q.entries() {
        if !e.is_base_only() || !e.is_hbar_free() {
            return Err(Error::Precondition(format!("idempotent must be an hbar-free function matrix: {q}")));
        }
    }
    let defect = &q.mul_with(q, &Pointwise) - q;
    if !defect.is_zero() {
        return Err(Error::Residual {
            check: "q·q − q".into(),
            residual: defect.to_string(),
        });
    }
    Ok(())
}

impl IndexInstance {
    pub fn new(pi1: &Polyvector, q: &MatrixSeries) -> Result<Self> {
        let model = *pi1.model();
        model.ensure_same(q.model())?;
        ensure_idempotent(q)?;
        let fedosov = FedosovData::flat(model);
        let star = StarProduct::moyal(pi1)?;
        let diamond = star.fiber_moyal(&fedosov)?;
        let diamond_cochain = star.fiber_product(&fedosov)?.cotrace(q.size())?;
        Ok(IndexInstance {
            model,
            pi1: pi1.clone(),
            star,
            diamond,
            diamond_cochain,
            fedosov,
            q: q.clone(),
        })
    }

    pub fn model(&self) -> &ModelConfig {
        &self.model
    }

    pub fn pi1(&self) -> &Polyvector {
        &self.pi1
    }

    pub fn star(&self) -> &StarProduct {
        &self.star
    }

    pub fn diamond(&self) -> &FiberProduct {
        &self.diamond
    }

    /// `⋄` as a product cochain on `N × N` matrices.
    pub fn diamond_cochain(&self) -> &Cochain {
        &self.diamond_cochain
    }

    pub fn fedosov(&self) -> &FedosovData {
        &self.fedosov
    }

    pub fn q(&self) -> &MatrixSeries {
        &self.q
    }

    fn size(&self) -> usize {
        self.q.size()
    }

    fn d(&self, a: &MatrixSeries) -> MatrixSeries {
        a.map(|e| self.fedosov.apply_d(e))
    }

    /// `∇ + A`, the part of `D` that keeps the filtration.
    fn nabla_a(&self, a: &MatrixSeries) -> MatrixSeries {
        a.map(|e| &self.fedosov.nabla(e) + &self.fedosov.apply_a(e))
    }

    fn exact_band(&self, a: &MatrixSeries) -> MatrixSeries {
        let w = self.model.fiber_max;
        a.map(|e| e.below_weight(w))
    }

    fn dmul(&self, a: &MatrixSeries, b: &MatrixSeries) -> MatrixSeries {
        a.mul_with(b, &self.diamond)
    }
}

fn clip(a: &MatrixSeries, w: u32) -> MatrixSeries {
    a.map(|e| e.below_weight(w + 1))
}

/// Solves `x = step(x)` when the weight-`w` part of `step(x)` reads only the
/// parts of `x` below `w`: one pass per weight on clipped inputs, then a full
/// pass to confirm the fixed point.
fn solve_by_weight(model: &ModelConfig, size: usize, step: impl Fn(&MatrixSeries) -> MatrixSeries) -> MatrixSeries {
    let mut x = MatrixSeries::zero_sized(*model, size);
    for w in 0..=model.fiber_max {
        x = clip(&step(&x), w);
    }
    if step(&x) == x {
        x
    } else {
        fixed_point(model, x, step)
    }
}

/// Entrywise base de Rham differential.
pub fn matrix_differential(a: &MatrixSeries) -> MatrixSeries {
    a.map(base_differential)
}

/// `Γ^q = q·dq − dq·q`.
pub fn gamma_q(q: &MatrixSeries) -> Result<MatrixSeries> {
    ensure_idempotent(q)?;
    let dq = matrix_differential(q);
    Ok(&q.mul_with(&dq, &Pointwise) - &dq.mul_with(q, &Pointwise))
}

/// `dq + [Γ, q]`, which vanishes for `Γ = Γ^q`.
pub fn gamma_q_residual(q: &MatrixSeries, gamma: &MatrixSeries) -> MatrixSeries {
    &matrix_differential(q) + &gamma.bracket_with(q, &Pointwise)
}

/// Fixed point of `B = Γ^q + δ⁻¹(∇B + A(B) + ½[B, B]_⋄)`.
pub fn bq_iterate(inst: &IndexInstance) -> Result<MatrixSeries> {
    let gamma = gamma_q(&inst.q)?;
    let half = frac(1, 2);
    Ok(solve_by_weight(&inst.model, inst.size(), |b| {
        let rhs = &inst.nabla_a(b) + &b.bracket_with(b, &inst.diamond).scale(&half);
        &gamma + &rhs.map(delta_inv)
    }))
}

/// `D B + ½[B, B]_⋄` on the exact band.
pub fn bq_mc_residual(bq: &MatrixSeries, inst: &IndexInstance) -> MatrixSeries {
    let r = &inst.d(bq) + &bq.bracket_with(bq, &inst.diamond).scale(&frac(1, 2));
    inst.exact_band(&r)
}

/// `D q + [B, q]_⋄` on the exact band.
pub fn lemma_residual(q: &MatrixSeries, bq: &MatrixSeries, inst: &IndexInstance) -> MatrixSeries {
    inst.exact_band(&(&inst.d(q) + &bq.bracket_with(q, &inst.diamond)))
}

/// Fixed point of `U = I + δ⁻¹(∇U + A(U) − U ⋄ B)`.
pub fn u_iterate(inst: &IndexInstance, bq: &MatrixSeries) -> MatrixSeries {
    let id = MatrixSeries::identity_sized(inst.model, inst.size());
    solve_by_weight(&inst.model, inst.size(), |u| {
        let rhs = &inst.nabla_a(u) - &inst.dmul(u, bq);
        &id + &rhs.map(delta_inv)
    })
}

/// `D U − U ⋄ B` on the exact band.
pub fn u_residual(u: &MatrixSeries, bq: &MatrixSeries, inst: &IndexInstance) -> MatrixSeries {
    inst.exact_band(&(&inst.d(u) - &inst.dmul(u, bq)))
}

/// `U⁻¹ ⋄ DU − B` on the exact band.
pub fn u_twist_residual(u: &MatrixSeries, bq: &MatrixSeries, inst: &IndexInstance) -> Result<MatrixSeries> {
    let inv = mat_neumann_inverse(u, &inst.diamond)?;
    Ok(inst.exact_band(&(&inst.dmul(&inv, &inst.d(u)) - bq)))
}

/// `Q = U ⋄ q ⋄ U⁻¹` with its value `Q₀` at `y = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct FlatIdempotent {
    pub q_full: MatrixSeries,
    pub q0: MatrixSeries,
    pub u_inv: MatrixSeries,
}

impl FlatIdempotent {
    /// Named residuals, each zero on a correct run: flatness, idempotency in
    /// both algebras, principal symbol, and agreement with the flat lift.
    pub fn residuals(&self, inst: &IndexInstance) -> Result<Vec<(&'static str, &'static str, MatrixSeries)>> {
        let q = &self.q_full;
        let q0 = &self.q0;
        let lift = inst.fedosov.flat_lift_matrix(q0)?;
        Ok(vec![
            ("q_flatness", "DQ", inst.exact_band(&inst.d(q))),
            ("q_idempotent", "Q⋄Q − Q", &inst.dmul(q, q) - q),
            ("q0_idempotent", "Q0⋆Q0 − Q0", &inst.star.mat_star_mul(q0, q0)? - q0),
            ("q0_symbol", "σ(Q0) − q", &principal_symbol(q0) - &inst.q),
            ("q_is_flat_lift", "Q − lift(Q0)", q - &lift),
        ])
    }
}

pub fn build_q(inst: &IndexInstance, q: &MatrixSeries, u: &MatrixSeries) -> Result<FlatIdempotent> {
    let u_inv = mat_neumann_inverse(u, &inst.diamond)?;
    let q_full = inst.dmul(&inst.dmul(u, q), &u_inv);
    let q0 = q_full.map(|e| e.restrict_fiber_zero());
    let out = FlatIdempotent { q_full, q0, u_inv };
    for (_, name, r) in out.residuals(inst)? {
        if !r.is_zero() {
            return Err(Error::Residual {
                check: name.into(),
                residual: r.to_string(),
            });
        }
    }
    Ok(out)
}

/// Off-diagonal blocks of `g⁻¹ B g + g⁻¹ dg` for a frame `g` with
/// `g⁻¹ q g = diag(I_rank, 0)`; these vanish.
pub fn adapted_frame_residual(bq: &MatrixSeries, g: &MatrixSeries, g_inv: &MatrixSeries, rank: usize) -> Result<MatrixSeries> {
    let model = *bq.model();
    let n = bq.size();
    if !g.mul_with(g_inv, &Pointwise).is_identity() {
        return Err(Error::Precondition("frame and inverse do not multiply to I".into()));
    }
    if rank > n {
        return Err(Error::Precondition(format!("rank {rank} exceeds matrix size {n}")));
    }
    let moved = &g_inv.mul_with(bq, &Pointwise).mul_with(g, &Pointwise) + &g_inv.mul_with(&matrix_differential(g), &Pointwise);
    let mut out = MatrixSeries::zero_sized(model, n);
    for i in 0..n {
        for j in 0..n {
            if (i < rank) != (j < rank) {
                out.set(i, j, moved.get(i, j).clone());
            }
        }
    }
    Ok(out)
}

/// A frame `g` with its exact inverse.
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub g: MatrixSeries,
    pub g_inv: MatrixSeries,
}

impl Frame {
    /// `g = (I + a·e_{1N})(I + b·e_{N1})`; both factors are unipotent, so the
    /// inverse is exact for any functions `a`, `b`.
    pub fn elementary(a: &FormalSeries, b: &FormalSeries, size: usize) -> Result<Self> {
        let model = *a.model();
        model.ensure_same(b.model())?;
        if size < 2 {
            return Err(Error::Precondition("an elementary frame needs size at least 2".into()));
        }
        if !a.is_base_only() || !b.is_base_only() || !a.is_hbar_free() || !b.is_hbar_free() {
            return Err(Error::Precondition("frame entries must be hbar-free functions".into()));
        }
        let id = MatrixSeries::identity_sized(model, size);
        let up = |c: &FormalSeries| &id + &MatrixSeries::unit_sized(c, 0, size - 1, size);
        let lo = |c: &FormalSeries| &id + &MatrixSeries::unit_sized(c, size - 1, 0, size);
        let neg_a = -a;
        let neg_b = -b;
        Ok(Frame {
            g: up(a).mul_with(&lo(b), &Pointwise),
            g_inv: lo(&neg_b).mul_with(&up(&neg_a), &Pointwise),
        })
    }

    /// `g · diag(I_rank, 0) · g⁻¹`.
    pub fn projector(&self, rank: usize) -> Result<MatrixSeries> {
        let model = *self.g.model();
        let n = self.g.size();
        if rank > n {
            return Err(Error::Precondition(format!("rank {rank} exceeds matrix size {n}")));
        }
        let mut block = MatrixSeries::zero_sized(model, n);
        for i in 0..rank {
            block.set(i, i, FormalSeries::one(model));
        }
        Ok(self.g.mul_with(&block, &Pointwise).mul_with(&self.g_inv, &Pointwise))
    }
}

/// `trd(tr P)` for a ⋆-idempotent `P`.
pub fn quantum_index(p: &MatrixSeries, trd: &TraceDensity) -> Result<FormalSeries> {
    let defect = &trd.star().mat_star_mul(p, p)? - p;
    if !defect.is_zero() {
        return Err(Error::Residual {
            check: "P⋆P − P".into(),
            residual: defect.to_string(),
        });
    }
    trd.apply(&ch00(p))
}

/// The objects of the geometric route.
#[derive(Clone, Debug)]
pub struct Pipeline {
    pub gamma: MatrixSeries,
    pub bq: MatrixSeries,
    pub u: MatrixSeries,
    pub flat: FlatIdempotent,
}

/// Runs `Γ^q → B^q → U → Q` and checks every residual along the way.
pub fn run_pipeline(inst: &IndexInstance) -> Result<Pipeline> {
    let gamma = gamma_q(&inst.q)?;
    let bq = bq_iterate(inst)?;
    let checks = [
        ("dq + [Γ, q]", gamma_q_residual(&inst.q, &gamma)),
        ("B|y=0 − Γ", &bq.map(|e| e.restrict_fiber_zero()) - &gamma),
        ("DB + ½[B,B]", bq_mc_residual(&bq, inst)),
        ("Dq + [B,q]", lemma_residual(&inst.q, &bq, inst)),
    ];
    for (name, r) in checks {
        if !r.is_zero() {
            return Err(Error::Residual {
                check: name.into(),
                residual: r.to_string(),
            });
        }
    }
    let u = u_iterate(inst, &bq);
    let r = u_residual(&u, &bq, inst);
    if !r.is_zero() {
        return Err(Error::Residual {
            check: "DU − U⋄B".into(),
            residual: r.to_string(),
        });
    }
    let flat = build_q(inst, &inst.q, &u)?;
    Ok(Pipeline { gamma, bq, u, flat })
}

/// `trd(tr Q₀)` through the geometric route.
pub fn classical_index(inst: &IndexInstance, trd: &TraceDensity) -> Result<FormalSeries> {
    let p = run_pipeline(inst)?;
    trd.apply(&ch00(&p.flat.q0))
}

/// One named identity with its exact residual.
#[derive(Clone, Debug, PartialEq)]
pub struct LedgerEntry {
    pub id: String,
    pub name: String,
    pub residual: String,
    pub zero: bool,
}

impl LedgerEntry {
    fn matrix(id: &str, name: &str, r: &MatrixSeries) -> Self {
        LedgerEntry {
            id: id.into(),
            name: name.into(),
            residual: r.to_string(),
            zero: r.is_zero(),
        }
    }

    fn series(id: &str, name: &str, r: &FormalSeries) -> Self {
        LedgerEntry {
            id: id.into(),
            name: name.into(),
            residual: r.to_string(),
            zero: r.is_zero(),
        }
    }

    fn chain(id: &str, name: &str, r: &Chain) -> Self {
        LedgerEntry {
            id: id.into(),
            name: name.into(),
            residual: r.to_string(),
            zero: r.is_zero(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct IndexResult {
    pub lift: MatrixSeries,
    pub second_lift: MatrixSeries,
    pub pipeline: Pipeline,
    pub q_tilde: Option<Chain>,
    pub psi: Option<Chain>,
    pub ledger: Vec<LedgerEntry>,
    pub quantum_index: FormalSeries,
    pub second_quantum_index: FormalSeries,
    pub classical_index: FormalSeries,
}

impl IndexResult {
    pub fn all_zero(&self) -> bool {
        self.ledger.iter().all(|e| e.zero)
    }
}

/// `G ⋆ P ⋆ G⁻¹` with `G = I + ℏX`, `X` the off-diagonal matrix of the first
/// coordinate: another ⋆-idempotent with the same principal symbol.
pub fn conjugated_lift(p: &MatrixSeries, star: &StarProduct) -> Result<MatrixSeries> {
    let model = *p.model();
    let n = p.size();
    let x = FormalSeries::base_var(model, 0).shift_hbar(1);
    let mut g = MatrixSeries::identity_sized(model, n);
    for i in 0..n {
        for j in 0..n {
            if i != j {
                g.set(i, j, x.clone());
            }
        }
    }
    let g_inv = mat_neumann_inverse(&g, star)?;
    star.mat_star_mul(&star.mat_star_mul(&g, p)?, &g_inv)
}

/// Computes both index densities and the ledger of every residual met on
/// the way. The chain homotopy is the expensive part and is optional.
pub fn index_compare(inst: &IndexInstance, with_homotopy: bool) -> Result<IndexResult> {
    let trd = TraceDensity::new(&inst.pi1)?;
    let lift = idempotent_lift(&inst.q, &inst.star)?;
    let second_lift = conjugated_lift(&lift, &inst.star)?;
    let pipeline = run_pipeline(inst)?;
    let flat = &pipeline.flat;

    let mut ledger = vec![
        LedgerEntry::matrix("gamma_q_residual", "dq + [Γ, q]", &gamma_q_residual(&inst.q, &pipeline.gamma)),
        LedgerEntry::matrix("bq_mc_residual", "DB + ½[B,B]", &bq_mc_residual(&pipeline.bq, inst)),
        LedgerEntry::matrix("lemma_residual", "Dq + [B,q]", &lemma_residual(&inst.q, &pipeline.bq, inst)),
        LedgerEntry::matrix("u_flatness", "DU − U⋄B", &u_residual(&pipeline.u, &pipeline.bq, inst)),
        LedgerEntry::matrix("u_twist", "U⁻¹⋄DU − B", &u_twist_residual(&pipeline.u, &pipeline.bq, inst)?),
    ];
    for (id, name, r) in flat.residuals(inst)? {
        ledger.push(LedgerEntry::matrix(id, name, &r));
    }
    for (id, name, p) in [
        ("lift_idempotent", "P⋆P − P", &lift),
        ("second_lift_idempotent", "P'⋆P' − P'", &second_lift),
    ] {
        ledger.push(LedgerEntry::matrix(id, name, &(&inst.star.mat_star_mul(p, p)? - p)));
    }
    ledger.push(LedgerEntry::matrix("second_lift_symbol", "σ(P') − q", &(&principal_symbol(&second_lift) - &inst.q)));

    let (q_tilde_chain, psi) = if with_homotopy {
        let qt = q_tilde(&inst.q, &pipeline.bq)?;
        let explicit = q_tilde_series(&inst.q, &pipeline.bq)?;
        let psi = psi_homotopy(&inst.q, &pipeline.bq, &pipeline.u, inst)?;
        ledger.push(LedgerEntry::chain("q_tilde_series", "Q̃ − exp(R_B)q", &(&explicit - &qt)));
        ledger.push(LedgerEntry::chain(
            "homotopy_residual",
            "Q − Q̃ − (D + b)ψ",
            &homotopy_residual(&flat.q_full, &qt, &psi, inst)?,
        ));
        (Some(qt), Some(psi))
    } else {
        (None, None)
    };

    let quantum = quantum_index(&lift, &trd)?;
    let second = quantum_index(&second_lift, &trd)?;
    let classical = trd.apply(&ch00(&flat.q0))?;
    ledger.push(LedgerEntry::series("lift_independence", "ind(P) − ind(P')", &(&quantum - &second)));
    ledger.push(LedgerEntry::series("index_theorem", "ind(P) − ind_c(q)", &(&quantum - &classical)));

    Ok(IndexResult {
        lift,
        second_lift,
        pipeline,
        q_tilde: q_tilde_chain,
        psi,
        ledger,
        quantum_index: quantum,
        second_quantum_index: second,
        classical_index: classical,
    })
}
