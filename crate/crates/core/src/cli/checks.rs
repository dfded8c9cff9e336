use std::fmt::Display;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::samples::*;
use super::scenario::Resolved;
use crate::dgla::*;
use crate::error::{Error, Result};
use crate::fedosov::{base_differential, spanning_monomials, FedosovData};
use crate::hochschild::{Chain, Cochain};
use crate::index::{adapted_frame_residual, conjugated_lift, index_compare, IndexInstance};
use crate::poisson::{de_rham, koszul, lichnerowicz, poisson_bracket, schouten, Hp0Reducer};
use crate::starprod::{
    idempotent_lift, idempotent_path, naturality_check, path_derivative_residual, path_sandwich, principal_symbol,
    StarProduct,
};
use crate::weyl::model::ModelConfig;
use crate::weyl::monomial::Monomial;
use crate::weyl::rational::int;
use crate::weyl::sample::{random_series, Shape};
use crate::weyl::{chi, delta, delta_inv, hodge_residual, FormalSeries, MatrixSeries, Pointwise};

pub struct CheckInfo {
    pub id: &'static str,
    pub suite: &'static str,
    /// The identity the check realizes.
    pub anchor: &'static str,
}

macro_rules! checks {
    ($($suite:literal: [$($id:literal => $anchor:literal),* $(,)?]),* $(,)?) => {
        pub const CHECKS: &[CheckInfo] = &[$($(CheckInfo { id: $id, suite: $suite, anchor: $anchor }),*),*];
    };
}

checks! {
    "weyl": [
        "delta_squared" => "δ² = 0 on the Weyl algebra with forms",
        "delta_inv_squared" => "(δ⁻¹)² = 0",
        "hodge" => "a = σ(a) + δδ⁻¹a + δ⁻¹δa (Hodge decomposition)",
    ],
    "fedosov": [
        "d_squared" => "D² = 0 for D = ∇ − δ + [A, ·], on generators and a spanning set",
        "flat_lift_symbol" => "σ(τ(f)) = f for the flat lift τ",
        "flat_lift_flatness" => "D τ(f) = 0 for the flat lift τ",
        "solve_de" => "D^E s = p solved exactly for D^E-exact p",
    ],
    "poisson": [
        "poisson_jacobi" => "[π, π] = 0 (Schouten bracket)",
        "lichnerowicz_squared" => "d_π² = 0 for d_π = [π, ·]",
        "koszul_squared" => "∂_π² = 0 for the Koszul differential ∂_π = [ι_π, d]",
        "de_rham_squared" => "d² = 0 on forms",
        "hp0_kills_brackets" => "{f, g} vanishes in HP₀ = functions / {·, ·}",
    ],
    "hochschild": [
        "b_squared" => "b² = 0 for the Hochschild boundary",
        "codifferential_squared" => "∂² = 0 for the Hochschild codifferential",
        "graded_jacobi" => "graded antisymmetry and Jacobi identity of the Gerstenhaber bracket",
        "action_bracket" => "R_[P,Q] = [R_P, R_Q] for the action of cochains on chains",
        "boundary_action" => "[b, R_P] = R_∂P",
        "trace_chain_map" => "tr ∘ b = b ∘ tr for the matrix trace on chains",
        "cotrace_chain_map" => "cotr ∘ ∂ = ∂ ∘ cotr for the cotrace on cochains",
        "twisted_trace_chain_map" => "tr^γ ∘ (D^γ + b) = (D + b) ∘ tr^γ for a flat twist γ",
    ],
    "star": [
        "associativity" => "(a ⋆ b) ⋆ c = a ⋆ (b ⋆ c) modulo ℏ^(H+1)",
        "naturality" => "the k-th bidifferential order has order at most k in each argument",
        "torus_constant_mode" => "the constant Fourier mode of [u^a, u^b]⋆ vanishes",
        "star_lift_idempotent" => "P ⋆ P = P for the lift P of a pointwise idempotent q",
        "star_lift_symbol" => "σ(P) = q for the lift of q",
        "path_idempotent" => "P_t ⋆ P_t = P_t along the idempotent path between two lifts",
        "path_derivative" => "d_tP = [P, [P, d_tP]⋆]⋆ along an idempotent path",
        "path_sandwich" => "P ⋆ d_tP ⋆ P = 0 along an idempotent path",
    ],
    "dgla": [
        "poisson_mc" => "ℏπ is a Maurer–Cartan element of the polyvector algebra",
        "star_mc" => "∂Π + ½[Π, Π] = 0: the star product is a Maurer–Cartan element",
        "twist_squared" => "(∂ + [Π, ·])² = 0",
        "gauge_mc" => "gauge transforms exp(ξ)·Π of the star product stay Maurer–Cartan",
        "chain_twist_squared" => "(b + R_Π)² = 0 on chains",
    ],
    "index": [
        "gamma_q_residual" => "dq + [Γ^q, q] = 0 for Γ^q = q dq − dq q",
        "bq_mc_residual" => "D B + ½[B, B]⋄ = 0 for the resolved connection form B^q",
        "lemma_residual" => "Dq + [B^q, q]⋄ = 0",
        "u_flatness" => "DU = U ⋄ B^q",
        "u_twist" => "U⁻¹ ⋄ DU = B^q",
        "q_flatness" => "DQ = 0 for Q = U ⋄ q ⋄ U⁻¹",
        "q_idempotent" => "Q ⋄ Q = Q",
        "q0_idempotent" => "Q₀ ⋆ Q₀ = Q₀ for Q₀ = Q at y = 0",
        "q0_symbol" => "σ(Q₀) = q",
        "q_is_flat_lift" => "Q is the flat lift of Q₀",
        "lift_idempotent" => "P ⋆ P = P for the algebraic lift P of q",
        "second_lift_idempotent" => "P' ⋆ P' = P' for a conjugated lift P'",
        "second_lift_symbol" => "σ(P') = q",
        "q_tilde_series" => "exp(R_B)q = Σ (−1)^⌊n/2⌋ q ⊗ B^⊗n",
        "homotopy_residual" => "Q − exp(R_B)q = (b⋄ − D)ψ for ψ = Σ U ⊗ B^⊗n ⊗ q⋄U⁻¹",
        "lift_independence" => "trd(tr P) = trd(tr P'): the index does not depend on the lift",
        "index_theorem" => "trd(tr P) = trd(tr Q₀): the quantum index equals the classical index",
        "adapted_frame" => "g⁻¹B^q g + g⁻¹dg is block diagonal in an adapted frame g",
        "index_value" => "trd(tr P) equals the expected index",
    ],
}

pub fn info(id: &str) -> Option<&'static CheckInfo> {
    let base = id.split('[').next().unwrap_or(id);
    CHECKS.iter().find(|c| c.id == base)
}

/// An exact residual in canonical text.
#[derive(Clone, Debug, PartialEq)]
pub struct Residual {
    pub text: String,
    pub zero: bool,
}

impl Residual {
    pub fn zero() -> Self {
        Residual {
            text: "0".into(),
            zero: true,
        }
    }

    fn flag(ok: bool, failure: &str) -> Self {
        if ok {
            Self::zero()
        } else {
            Residual {
                text: failure.into(),
                zero: false,
            }
        }
    }
}

pub trait Vanishing: Display {
    fn vanishes(&self) -> bool;
}

macro_rules! vanishing {
    ($($t:ty),*) => {$(
        impl Vanishing for $t {
            fn vanishes(&self) -> bool {
                self.is_zero()
            }
        }
    )*};
}

vanishing!(FormalSeries, MatrixSeries, Chain, Cochain);

fn residual<T: Vanishing>(x: &T) -> Residual {
    if x.vanishes() {
        Residual::zero()
    } else {
        Residual {
            text: x.to_string(),
            zero: false,
        }
    }
}

/// The first nonzero residual, or zero.
fn first<T: Vanishing>(items: impl IntoIterator<Item = Result<T>>) -> Result<Residual> {
    for x in items {
        let x = x?;
        if !x.vanishes() {
            return Ok(residual(&x));
        }
    }
    Ok(Residual::zero())
}

/// One check outcome; `id` may carry an `[k]` suffix naming the idempotent.
pub struct Outcome {
    pub id: String,
    pub result: Result<Residual>,
}

fn outcome(id: &str, result: Result<Residual>) -> Vec<Outcome> {
    vec![Outcome { id: id.into(), result }]
}

/// A unit of work for the pool.
pub struct Job {
    pub suite: &'static str,
    pub run: Box<dyn Fn() -> Vec<Outcome> + Send + Sync>,
}

fn rng_for(seed: u64, id: &str) -> ChaCha8Rng {
    // FNV-1a, stable across platforms and releases
    let mut h: u64 = 0xcbf29ce484222325;
    for b in id.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

fn variant(base: &ModelConfig, fiber_max: u32, hbar_max: u32, size: usize) -> Result<ModelConfig> {
    ModelConfig::new(base.kind, base.dim, base.base_cutoff, fiber_max, hbar_max, 0, size)
}

pub fn jobs(r: &Resolved, suite: &str) -> Vec<Job> {
    let ids: Vec<&'static str> = CHECKS.iter().filter(|c| c.suite == suite).map(|c| c.id).collect();
    match suite {
        "index" => index_jobs(r),
        "star" => {
            let mut out = Vec::new();
            for id in ["associativity", "naturality", "torus_constant_mode"] {
                if id == "torus_constant_mode" && !r.model.is_torus() {
                    continue;
                }
                out.push(single(r, "star", id));
            }
            for k in 0..r.idempotents.len() {
                let r2 = r.clone();
                out.push(Job {
                    suite: "star",
                    run: Box::new(move || lift_checks(&r2, k)),
                });
            }
            out
        }
        _ => ids.into_iter().map(|id| single(r, leak(suite), id)).collect(),
    }
}

fn leak(suite: &str) -> &'static str {
    super::SUITES.iter().find(|s| **s == suite).copied().unwrap_or("unknown")
}

fn single(r: &Resolved, suite: &'static str, id: &'static str) -> Job {
    let r = r.clone();
    Job {
        suite,
        run: Box::new(move || {
            let mut rng = rng_for(r.scenario.seed, id);
            outcome(id, run_single(&r, id, &mut rng))
        }),
    }
}

fn run_single(r: &Resolved, id: &str, rng: &mut ChaCha8Rng) -> Result<Residual> {
    let m = r.model;
    let n = r.scenario.samples.max(1);
    match id {
        "delta_squared" => first((0..n).map(|_| Ok(delta(&delta(&random_series(&m, &Shape::full(8), rng)))))),
        "delta_inv_squared" => {
            first((0..n).map(|_| Ok(delta_inv(&delta_inv(&random_series(&m, &Shape::full(8), rng))))))
        }
        "hodge" => first((0..n).map(|_| Ok(hodge_residual(&random_series(&m, &Shape::full(10), rng))))),

        "d_squared" => {
            let fd = FedosovData::build_a(r.connection.clone())?;
            let gens = fd.d_squared_generators().into_iter().map(Ok);
            let bases = [Monomial::one(), Monomial::base_var(0, 1), Monomial::base_var(m.dim - 1, 2)];
            let span = spanning_monomials(&m, 3, &bases)
                .into_iter()
                .map(|mono| Ok(fd.d_squared(&FormalSeries::term(m, mono, int(1)))));
            first(gens.chain(span))
        }
        "flat_lift_symbol" | "flat_lift_flatness" => {
            let fd = FedosovData::build_a(r.connection.clone())?;
            first((0..n).map(|_| {
                let f = small_function(&m, rng, 3);
                let a = fd.flat_lift(&f)?;
                Ok(if id == "flat_lift_symbol" {
                    &chi(&a) - &f
                } else {
                    fd.flatness_residual(&a)
                })
            }))
        }
        "solve_de" => {
            let fd = FedosovData::build_a(r.connection.clone())?;
            let size = m.matrix_size;
            first((0..n).map(|_| {
                let mut sec = MatrixSeries::zero(m);
                for i in 0..size {
                    for j in 0..size {
                        sec.set(i, j, random_series(&m, &Shape::full(3), rng).form_part(0));
                    }
                }
                let target = fd.apply_d_matrix(&sec);
                let s = fd.solve_de(&target)?;
                Ok(fd.solve_residual(&s, &target))
            }))
        }

        "poisson_jacobi" => Ok(residual(schouten(&r.poisson_pi, &r.poisson_pi)?.series())),
        "lichnerowicz_squared" => first((0..n).map(|i| {
            let q = random_polyvector(&m, rng, (i % (m.dim + 1)) as u32);
            let once = lichnerowicz(&r.poisson_pi, &q)?;
            Ok(lichnerowicz(&r.poisson_pi, &once)?.series().clone())
        })),
        "koszul_squared" => first((0..n).map(|i| {
            let w = random_polyvector(&m, rng, (i % (m.dim + 1)) as u32).series().clone();
            koszul(&r.poisson_pi, &koszul(&r.poisson_pi, &w)?)
        })),
        "de_rham_squared" => first((0..n).map(|i| {
            let w = random_polyvector(&m, rng, (i % (m.dim + 1)) as u32).series().clone();
            de_rham(&de_rham(&w)?)
        })),
        "hp0_kills_brackets" => {
            let reducer = Hp0Reducer::new(&r.poisson_pi)?;
            first((0..n).map(|_| {
                let f = small_function(&m, rng, 2);
                let g = small_function(&m, rng, 2);
                reducer.reduce(&poisson_bracket(&r.poisson_pi, &f, &g))
            }))
        }

        "b_squared" | "codifferential_squared" | "graded_jacobi" | "action_bracket" | "boundary_action"
        | "trace_chain_map" | "cotrace_chain_map" => hochschild_check(r, id, rng),
        "twisted_trace_chain_map" => twisted_trace(r),

        "associativity" => {
            let star = StarProduct::moyal(&r.star_pi)?;
            first((0..n).map(|_| {
                let [a, b, c] = [0; 3].map(|_| small_function(&m, rng, 2));
                star.associator(&a, &b, &c)
            }))
        }
        "naturality" => {
            let star = StarProduct::moyal(&r.star_pi)?;
            Ok(Residual::flag(naturality_check(&star), "a bidifferential order exceeds its degree"))
        }
        "torus_constant_mode" => {
            let star = StarProduct::moyal(&r.star_pi)?;
            let k = 3.min(m.base_cutoff as i16 / 2);
            let modes = mode_box(&m, k);
            let zero_mode = |s: FormalSeries| s.filter(|mono| mono.base.iter().all(|&e| e == 0));
            let mut pairs = Vec::new();
            for a in &modes {
                for b in &modes {
                    pairs.push((a, b));
                }
            }
            first(
                pairs
                    .into_iter()
                    .map(|(a, b)| Ok(zero_mode(&star.star_mul(a, b)? - &star.star_mul(b, a)?))),
            )
        }

        "poisson_mc" => {
            if m.hbar_max == 0 {
                return Err(Error::Precondition("ℏπ needs hbar_max ≥ 1".into()));
            }
            let l = PolyvectorDgla::new(m);
            Ok(residual(mc_residual(&l, &r.poisson_pi.scale_hbar(1))?.series()))
        }
        "star_mc" | "twist_squared" | "gauge_mc" | "chain_twist_squared" => dgla_check(r, id, rng),
        other => Err(Error::Unknown {
            kind: "check",
            name: other.into(),
        }),
    }
}

/// Laurent modes `u^a` with `|a_i| ≤ k`.
fn mode_box(m: &ModelConfig, k: i16) -> Vec<FormalSeries> {
    let mut exps = vec![[0i16; crate::weyl::MAX_DIM]];
    for i in 0..m.dim {
        exps = exps
            .into_iter()
            .flat_map(|e| {
                (-k..=k).map(move |v| {
                    let mut e = e;
                    e[i] = v;
                    e
                })
            })
            .collect();
    }
    exps.into_iter()
        .map(|e| {
            let mut mono = Monomial::one();
            mono.base = e;
            FormalSeries::term(*m, mono, int(1))
        })
        .collect()
}

// Generous fiber cap so that no identity reaches the truncation.
fn hochschild_check(r: &Resolved, id: &str, rng: &mut ChaCha8Rng) -> Result<Residual> {
    let size = r.model.matrix_size;
    let m = variant(&r.model, 12, 0, size)?;
    let mu = Cochain::product(m, size);
    let rounds = r.scenario.samples.clamp(1, 4);
    let chain = |rng: &mut ChaCha8Rng, len: usize| {
        let slots: Vec<MatrixSeries> = (0..len).map(|_| random_matrix(&m, size, rng)).collect();
        Chain::from_tuple(&slots)
    };
    match id {
        "b_squared" => first((0..rounds).map(|k| chain(rng, 2 + k % 3)?.boundary(&mu)?.boundary(&mu))),
        "codifferential_squared" => first((0..rounds).map(|k| {
            let c = random_cochain(&m, size, k % 3, rng);
            c.codifferential(&mu)?.codifferential(&mu)
        })),
        "graded_jacobi" => {
            let mut out = Vec::new();
            for round in 0..rounds {
                let a = random_cochain(&m, size, 1 + round % 2, rng);
                let b = random_cochain(&m, size, round % 3, rng);
                let c = random_cochain(&m, size, 1, rng);
                for (pa, a) in homogeneous_parts(&a) {
                    for (pb, b) in homogeneous_parts(&b) {
                        let ab = a.gerstenhaber(&b)?;
                        let ba = b.gerstenhaber(&a)?;
                        out.push(Ok(&ab + &ba.scale(&sign(pa && pb))));
                        for (_, c) in homogeneous_parts(&c) {
                            let lhs = a.gerstenhaber(&b.gerstenhaber(&c)?)?;
                            let r1 = ab.gerstenhaber(&c)?;
                            let r2 = b.gerstenhaber(&a.gerstenhaber(&c)?)?;
                            out.push(Ok(&lhs - &(&r1 + &r2.scale(&sign(pa && pb)))));
                        }
                    }
                }
            }
            first(out)
        }
        "action_bracket" => {
            let mut out = Vec::new();
            for round in 0..rounds {
                let a = random_cochain(&m, size, round % 3, rng);
                let b = random_cochain(&m, size, 1 + round % 2, rng);
                let c = chain(rng, 3)?;
                for (pa, a) in homogeneous_parts(&a) {
                    for (pb, b) in homogeneous_parts(&b) {
                        let lhs = c.act(&a.gerstenhaber(&b)?)?;
                        let ab = c.act(&b)?.act(&a)?;
                        let ba = c.act(&a)?.act(&b)?;
                        out.push(Ok(&lhs - &(&ab - &ba.scale(&sign(pa && pb)))));
                    }
                }
            }
            first(out)
        }
        "boundary_action" => {
            let mut out = Vec::new();
            for arity in 0..3 {
                let a = random_cochain(&m, size, arity, rng);
                let c = chain(rng, 3)?;
                for (pa, a) in homogeneous_parts(&a) {
                    let lhs = c.act(&a.codifferential(&mu)?)?;
                    let b_r = c.act(&a)?.boundary(&mu)?;
                    let r_b = c.boundary(&mu)?.act(&a)?;
                    out.push(Ok(&lhs - &(&b_r - &r_b.scale(&sign(pa)))));
                }
            }
            first(out)
        }
        "trace_chain_map" => {
            let mu1 = Cochain::product(m, 1);
            first((0..rounds).map(|k| {
                let c = chain(rng, 1 + k % 4)?;
                Ok(&c.boundary(&mu)?.trace() - &c.trace().boundary(&mu1)?)
            }))
        }
        "cotrace_chain_map" => {
            let mu1 = Cochain::product(m, 1);
            first((0..rounds).map(|k| {
                let c = random_cochain(&m, 1, k % 3, rng);
                Ok(&c.codifferential(&mu1)?.cotrace(size)? - &c.cotrace(size)?.codifferential(&mu)?)
            }))
        }
        _ => unreachable!("dispatched above"),
    }
}

/// Twisted trace against the flat twist of a base gauge transformation and a
/// fiber-dependent pure gauge.
fn twisted_trace(r: &Resolved) -> Result<Residual> {
    let m = variant(&r.model, 5, 0, 2)?;
    let fd = FedosovData::flat(m);
    let x = |i: usize| FormalSeries::base_var(m, i % m.dim);
    let y = |i: usize| FormalSeries::fiber_var(m, i % m.dim);
    let one = FormalSeries::one(m);
    let (x1, x2, y1, y2) = (x(0), x(1), y(0), y(1));
    let g = MatrixSeries::from_rows(m, vec![vec![&one + &(&x1 * &x2), x1.clone()], vec![x2.clone(), one.clone()]])?;
    let gi = MatrixSeries::from_rows(m, vec![vec![one.clone(), -&x1], vec![-&x2, &one + &(&x1 * &x2)]])?;
    let base = gi.mul_with(&g.map(base_differential), &Pointwise);
    let fg = MatrixSeries::from_rows(m, vec![vec![one.clone(), y1.clone()], vec![y2.clone(), &one + &(&y1 * &y2)]])?;
    let fgi = MatrixSeries::from_rows(m, vec![vec![&one + &(&y1 * &y2), -&y1], vec![-&y2, one.clone()]])?;
    let fiber = fgi.mul_with(&fg.map(|e| fd.apply_d(e)), &Pointwise);
    let c = Chain::from_tuple(&[
        MatrixSeries::unit(&(&x1 * &y1), 0, 1),
        MatrixSeries::unit(&(&y2 + &(&x2 * &y1)), 1, 0),
        MatrixSeries::unit(&y1, 0, 0),
    ])?;
    let scalar_mu = Cochain::product(m, 1);
    let mu2 = Cochain::product(m, 2);
    let d = |a: &MatrixSeries| a.map(|e| fd.apply_d(e));
    let mut out = Vec::new();
    for gamma in [fd.gamma_e(&base)?, fiber] {
        let twisted_d = |a: &MatrixSeries| &d(a) + &gamma.bracket_with(a, &Pointwise);
        let lhs = (&c.differential(twisted_d) + &c.boundary(&mu2)?).trace_twisted(&gamma)?;
        let t = c.trace_twisted(&gamma)?;
        let rhs = &t.differential(d) + &t.boundary(&scalar_mu)?;
        out.push(Ok((&lhs - &rhs).below_weight(m.fiber_max - 1)));
    }
    first(out)
}

fn dgla_check(r: &Resolved, id: &str, rng: &mut ChaCha8Rng) -> Result<Residual> {
    let m = variant(&r.model, 12, 3, 1)?;
    let fd = FedosovData::flat(m);
    let pi = r.star_pi_on(m)?;
    let star = StarProduct::moyal(&pi)?.fiber_product(&fd)?;
    let big_pi = star.try_add(&Cochain::product(m, 1).scale(&int(-1)))?;
    let l = CochainDgla::new(m, 1).with_product(Cochain::product(m, 1))?;
    let full = l.clone().with_fedosov(fd.clone())?;
    let rounds = r.scenario.samples.clamp(1, 8);
    let cochain = |rng: &mut ChaCha8Rng, arity: usize, g: u32| {
        let alphas: Vec<_> = (0..arity).map(|_| random_multi(&m, rng)).collect();
        let mut coef = small_series(&m, rng, 2, 1, false);
        for i in 0..g as usize {
            coef = coef.theta_left(i);
        }
        Cochain::scalar_operator(&coef, &alphas)
    };
    match id {
        "star_mc" => first([mc_residual(&l, &big_pi), mc_residual(&full, &big_pi)]),
        "twist_squared" => first([(0, 1), (1, 0), (1, 1), (2, 0)].into_iter().map(|(a, g)| {
            let x = cochain(rng, a, g);
            let once = twist_differential(&l, &big_pi, &x)?;
            twist_differential(&l, &big_pi, &once)
        })),
        "gauge_mc" => first((0..rounds).map(|_| {
            let op = Cochain::scalar_operator(&small_series(&m, rng, 2, 1, false).shift_hbar(1), &[random_multi(&m, rng)]);
            let form = small_series(&m, rng, 2, 1, false).theta_left(0).shift_hbar(1);
            let xi = op.try_add(&Cochain::element(&MatrixSeries::scalar(&form)))?;
            let moved = gauge_act(&full, &xi, &big_pi)?;
            mc_residual(&full, &moved)
        })),
        "chain_twist_squared" => {
            let module = ChainModule::new(Cochain::product(m, 1)).with_fedosov(fd.clone())?;
            first((1..=3).map(|len| {
                let slots: Vec<MatrixSeries> =
                    (0..len).map(|_| MatrixSeries::scalar(&small_series(&m, rng, 2, 1, true))).collect();
                let c = Chain::from_tuple(&slots)?;
                let once = semidirect_twist(&full, &module, &big_pi, &c)?;
                semidirect_twist(&full, &module, &big_pi, &once)
            }))
        }
        _ => unreachable!("dispatched above"),
    }
}

fn lift_checks(r: &Resolved, k: usize) -> Vec<Outcome> {
    let tag = |id: &str| format!("{id}[{k}]");
    let star = match StarProduct::moyal(&r.star_pi) {
        Ok(s) => s,
        Err(e) => return vec![Outcome { id: tag("star_lift_idempotent"), result: Err(e) }],
    };
    let q = &r.idempotents[k].q;
    let lift = match idempotent_lift(q, &star) {
        Ok(p) => p,
        Err(e) => return vec![Outcome { id: tag("star_lift_idempotent"), result: Err(e) }],
    };
    let mut out = vec![
        Outcome {
            id: tag("star_lift_idempotent"),
            result: star.mat_star_mul(&lift, &lift).map(|pp| residual(&(&pp - &lift))),
        },
        Outcome {
            id: tag("star_lift_symbol"),
            result: Ok(residual(&(&principal_symbol(&lift) - q))),
        },
    ];
    if r.model.t_max > 0 {
        let path = conjugated_lift(&lift, &star).and_then(|other| idempotent_path(&lift, &other, &star));
        match path {
            Err(e) => out.push(Outcome { id: tag("path_idempotent"), result: Err(e) }),
            Ok(path) => {
                out.push(Outcome {
                    id: tag("path_idempotent"),
                    result: star.mat_star_mul(&path, &path).map(|pp| residual(&(&pp - &path))),
                });
                out.push(Outcome {
                    id: tag("path_derivative"),
                    result: path_derivative_residual(&path, &star).map(|x| residual(&x)),
                });
                out.push(Outcome {
                    id: tag("path_sandwich"),
                    result: path_sandwich(&path, &star).map(|x| residual(&x)),
                });
            }
        }
    }
    out
}

fn index_jobs(r: &Resolved) -> Vec<Job> {
    (0..r.idempotents.len())
        .map(|k| {
            let r = r.clone();
            Job {
                suite: "index",
                run: Box::new(move || index_checks(&r, k)),
            }
        })
        .collect()
}

fn index_checks(r: &Resolved, k: usize) -> Vec<Outcome> {
    let tag = |id: &str| format!("{id}[{k}]");
    let idem = &r.idempotents[k];
    let run = IndexInstance::new(&r.star_pi, &idem.q).and_then(|inst| index_compare(&inst, r.scenario.homotopy));
    let res = match run {
        Ok(res) => res,
        Err(e) => return vec![Outcome { id: tag("index_theorem"), result: Err(e) }],
    };
    let mut out: Vec<Outcome> = res
        .ledger
        .iter()
        .map(|e| Outcome {
            id: tag(&e.id),
            result: Ok(Residual {
                text: if e.zero { "0".into() } else { e.residual.clone() },
                zero: e.zero,
            }),
        })
        .collect();
    out.push(Outcome {
        id: tag("adapted_frame"),
        result: adapted_frame_residual(&res.pipeline.bq, &idem.frame.g, &idem.frame.g_inv, idem.rank).map(|x| residual(&x)),
    });
    if let Some(expected) = &idem.expected_index {
        let diff = &res.quantum_index - &FormalSeries::constant(r.model, expected.clone());
        out.push(Outcome {
            id: tag("index_value"),
            result: Ok(residual(&diff)),
        });
    }
    out
}
