//! Fedosov differential `D = ∇ − δ + A`, its twist by a bundle connection, flat
//! lifts and the solver for `D^E S = P` in positive form degree.
//!
//! Everything is written through odd fiberwise vector fields `V = Σ V^k ∂/∂y^k`
//! with 1-form components: the connection term is `G^k = θ^i Γ^k_{ij} y^j`,
//! `δ` has components `θ^k`, and `A` has components `A^k`. Then
//! `D = d_x + V` with `V^k = A^k − G^k − θ^k`, and `D² = Σ F^k ∂/∂y^k` with
//! `F^k = D(y^k)` applied once more, so `D²` vanishes iff `D(D y^k) = 0`.

use crate::error::{Error, Result};
use crate::weyl::contraction::{delta, delta_inv};
use crate::weyl::expr::parse_series;
use crate::weyl::matrix::MatrixSeries;
use crate::weyl::model::ModelConfig;
use crate::weyl::monomial::Monomial;
use crate::weyl::product::Pointwise;
use crate::weyl::series::FormalSeries;

/// Christoffel symbols `Γ^k_{ij}` (zero-based `[k][i][j]`), base functions only.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectionData {
    model: ModelConfig,
    christoffel: Vec<Vec<Vec<FormalSeries>>>,
}

impl ConnectionData {
    pub fn flat(model: ModelConfig) -> Self {
        let d = model.dim;
        ConnectionData {
            model,
            christoffel: vec![vec![vec![FormalSeries::zero(model); d]; d]; d],
        }
    }

    /// Validates symmetry and base-only content.
    pub fn new(model: ModelConfig, christoffel: Vec<Vec<Vec<FormalSeries>>>) -> Result<Self> {
        let d = model.dim;
        let shape_ok = christoffel.len() == d
            && christoffel
                .iter()
                .all(|g| g.len() == d && g.iter().all(|r| r.len() == d));
        if !shape_ok {
            return Err(Error::Precondition(format!("christoffel symbols must be {d}x{d}x{d}")));
        }
        for (k, g) in christoffel.iter().enumerate() {
            for i in 0..d {
                for j in 0..d {
                    let s = &g[i][j];
                    model.ensure_same(s.model())?;
                    if !s.iter().all(|(m, _)| m.is_base_only() && m.hbar == 0 && m.t == 0) {
                        return Err(Error::Precondition(format!(
                            "christoffel[{}][{}][{}] must be a base function",
                            k + 1,
                            i + 1,
                            j + 1
                        )));
                    }
                    if *s != g[j][i] {
                        return Err(Error::Precondition(format!(
                            "connection has torsion: christoffel[{}][{}][{}] differs from christoffel[{}][{}][{}]",
                            k + 1,
                            i + 1,
                            j + 1,
                            k + 1,
                            j + 1,
                            i + 1
                        )));
                    }
                }
            }
        }
        let conn = ConnectionData { model, christoffel };
        if model.is_torus() && !conn.is_flat() {
            return Err(Error::Unsupported(
                "curved connections are only supported on the affine plane".into(),
            ));
        }
        Ok(conn)
    }

    /// Parses `christoffel[k][i][j]` expressions (zero-based nesting).
    pub fn parse(model: ModelConfig, exprs: &[Vec<Vec<String>>]) -> Result<Self> {
        let parsed = exprs
            .iter()
            .map(|g| {
                g.iter()
                    .map(|r| r.iter().map(|s| parse_series(&model, s)).collect::<Result<Vec<_>>>())
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(model, parsed)
    }

    pub fn get(&self, k: usize, i: usize, j: usize) -> &FormalSeries {
        &self.christoffel[k][i][j]
    }

    pub fn is_flat(&self) -> bool {
        self.christoffel.iter().flatten().flatten().all(|s| s.is_zero())
    }

    pub fn model(&self) -> &ModelConfig {
        &self.model
    }
}

/// Connection, the solved `A` and an optional bundle twist `γ^E`.
#[derive(Clone, Debug)]
pub struct FedosovData {
    model: ModelConfig,
    connection: ConnectionData,
    /// `G^k = θ^i Γ^k_{ij} y^j`.
    conn_field: Vec<FormalSeries>,
    a_field: Vec<FormalSeries>,
    gamma: Option<MatrixSeries>,
}

fn apply_field(field: &[FormalSeries], a: &FormalSeries) -> FormalSeries {
    let mut out = FormalSeries::zero(*a.model());
    for (k, v) in field.iter().enumerate() {
        if v.is_zero() {
            continue;
        }
        let da = a.fiber_derive(k);
        if !da.is_zero() {
            out = &out + &(v * &da);
        }
    }
    out
}

/// `d_x a = Σ θ^i ∂_i a` (Euler derivations on the torus).
pub fn base_differential(a: &FormalSeries) -> FormalSeries {
    let mut out = FormalSeries::zero(*a.model());
    for i in 0..a.model().dim {
        let d = a.base_derive0(i);
        if !d.is_zero() {
            out = &out + &d.theta_left(i);
        }
    }
    out
}

/// Iterates `x ↦ step(x)` until it stops changing. Each pass fixes one more
/// filtration level, so `W + 2` passes always suffice.
pub(crate) fn fixed_point<T: PartialEq + Clone>(model: &ModelConfig, start: T, step: impl Fn(&T) -> T) -> T {
    let mut x = start;
    for _ in 0..(model.fiber_max + 3) {
        let next = step(&x);
        if next == x {
            return x;
        }
        x = next;
    }
    panic!("filtration iteration did not stabilize");
}

impl FedosovData {
    /// Flat data: `Γ = 0`, `A = 0`.
    pub fn flat(model: ModelConfig) -> Self {
        let d = model.dim;
        FedosovData {
            model,
            connection: ConnectionData::flat(model),
            conn_field: vec![FormalSeries::zero(model); d],
            a_field: vec![FormalSeries::zero(model); d],
            gamma: None,
        }
    }

    pub fn model(&self) -> &ModelConfig {
        &self.model
    }

    pub fn connection(&self) -> &ConnectionData {
        &self.connection
    }

    /// Components `A^k`.
    pub fn a_field(&self) -> &[FormalSeries] {
        &self.a_field
    }

    pub fn gamma(&self) -> Option<&MatrixSeries> {
        self.gamma.as_ref()
    }

    pub fn is_flat(&self) -> bool {
        self.connection.is_flat() && self.gamma.is_none()
    }

    /// `∇a = d_x a − G(a)`.
    pub fn nabla(&self, a: &FormalSeries) -> FormalSeries {
        &base_differential(a) - &apply_field(&self.conn_field, a)
    }

    /// `A(a) = Σ A^k ∂a/∂y^k`.
    pub fn apply_a(&self, a: &FormalSeries) -> FormalSeries {
        apply_field(&self.a_field, a)
    }

    /// `∇ + A`, the part of `D` that does not lower the filtration.
    fn nabla_a(&self, a: &FormalSeries) -> FormalSeries {
        &self.nabla(a) + &self.apply_a(a)
    }

    /// `D a = ∇a − δa + A(a)` on scalar sections.
    pub fn apply_d(&self, a: &FormalSeries) -> FormalSeries {
        &self.nabla_a(a) - &delta(a)
    }

    /// `D^E` on matrix sections: entrywise `D` plus `[γ^E, ·]`.
    pub fn apply_d_matrix(&self, a: &MatrixSeries) -> MatrixSeries {
        let base = a.map(|e| self.apply_d(e));
        match &self.gamma {
            Some(g) => &base + &g.bracket_with(a, &Pointwise),
            None => base,
        }
    }

    fn nabla_a_gamma(&self, a: &MatrixSeries) -> MatrixSeries {
        let base = a.map(|e| self.nabla_a(e));
        match &self.gamma {
            Some(g) => &base + &g.bracket_with(a, &Pointwise),
            None => base,
        }
    }

    /// Builds `A` for a torsion-free connection by iterating
    /// `A^k = δ⁻¹(R^k + ∇A^k + A(∇y^k) + A(A^k))` with `R^k = ∇∇y^k`.
    pub fn build_a(connection: ConnectionData) -> Result<Self> {
        let model = connection.model;
        let d = model.dim;
        let mut data = FedosovData::flat(model);
        data.connection = connection;
        data.conn_field = (0..d)
            .map(|k| {
                let mut g = FormalSeries::zero(model);
                for i in 0..d {
                    for j in 0..d {
                        let c = data.connection.get(k, i, j);
                        if !c.is_zero() {
                            let yj = FormalSeries::fiber_var(model, j);
                            g = &g + &(&c.theta_left(i) * &yj);
                        }
                    }
                }
                g
            })
            .collect();
        if data.connection.is_flat() {
            return Ok(data);
        }
        let nabla_y: Vec<FormalSeries> = (0..d)
            .map(|k| data.nabla(&FormalSeries::fiber_var(model, k)))
            .collect();
        let curvature: Vec<FormalSeries> = nabla_y.iter().map(|v| data.nabla(v)).collect();
        let a_field = fixed_point(&model, vec![FormalSeries::zero(model); d], |a| {
            let mut trial = data.clone();
            trial.a_field = a.clone();
            (0..d)
                .map(|k| {
                    let rhs = &(&curvature[k] + &trial.nabla(&a[k]))
                        + &(&trial.apply_a(&nabla_y[k]) + &trial.apply_a(&a[k]));
                    delta_inv(&rhs)
                })
                .collect()
        });
        data.a_field = a_field;
        let residual = data.d_squared_generators();
        if let Some(r) = residual.iter().find(|r| !r.is_zero()) {
            return Err(Error::Residual {
                check: "D^2 on fiber generators".into(),
                residual: r.to_string(),
            });
        }
        Ok(data)
    }

    /// `D(D y^k)` for each `k`, restricted to the exact band.
    pub fn d_squared_generators(&self) -> Vec<FormalSeries> {
        (0..self.model.dim)
            .map(|k| self.d_squared(&FormalSeries::fiber_var(self.model, k)))
            .collect()
    }

    /// `D(D a)` on the weights where truncation cannot interfere.
    pub fn d_squared(&self, a: &FormalSeries) -> FormalSeries {
        self.apply_d(&self.apply_d(a))
            .below_weight(self.model.fiber_max.saturating_sub(1))
    }

    pub fn d_squared_matrix(&self, a: &MatrixSeries) -> MatrixSeries {
        let w = self.model.fiber_max.saturating_sub(1);
        self.apply_d_matrix(&self.apply_d_matrix(a))
            .map(|e| e.below_weight(w))
    }

    /// The unique flat section with `χ(a) = f`.
    pub fn flat_lift(&self, f: &FormalSeries) -> Result<FormalSeries> {
        if !f.is_base_only() {
            return Err(Error::Precondition(format!("flat_lift needs a base function, got {f}")));
        }
        Ok(self.lift_unchecked(f))
    }

    pub(crate) fn lift_unchecked(&self, f: &FormalSeries) -> FormalSeries {
        fixed_point(&self.model, f.clone(), |a| f + &delta_inv(&self.nabla_a(a)))
    }

    /// Entrywise flat lift of a matrix of base functions.
    pub fn flat_lift_matrix(&self, f: &MatrixSeries) -> Result<MatrixSeries> {
        let n = f.size();
        let mut out = MatrixSeries::zero_sized(self.model, n);
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, self.flat_lift(f.get(i, j))?);
            }
        }
        Ok(out)
    }

    /// `D a` on the exact band (weights below the cap).
    pub fn flatness_residual(&self, a: &FormalSeries) -> FormalSeries {
        self.apply_d(a).below_weight(self.model.fiber_max)
    }

    /// Solves for `γ^E = Γ^E + δ⁻¹(∇γ + A(γ) + γ·γ)` and returns it.
    pub fn gamma_e(&self, gamma_base: &MatrixSeries) -> Result<MatrixSeries> {
        self.model.ensure_same(gamma_base.model())?;
        let ok = gamma_base
            .entries()
            .iter()
            .all(|e| e.iter().all(|(m, _)| !m.has_fiber() && m.form_degree() == 1));
        if !ok {
            return Err(Error::Precondition(
                "bundle connection must be a base-only matrix of 1-forms".into(),
            ));
        }
        let plain = FedosovData {
            gamma: None,
            ..self.clone()
        };
        Ok(fixed_point(&self.model, gamma_base.clone(), |g| {
            let rhs = &g.map(|e| plain.nabla_a(e)) + &g.mul_with(g, &Pointwise);
            gamma_base + &rhs.map(delta_inv)
        }))
    }

    /// Copy of these data twisted by `γ^E` solved from `Γ^E`.
    pub fn with_bundle_connection(&self, gamma_base: &MatrixSeries) -> Result<Self> {
        let g = self.gamma_e(gamma_base)?;
        Ok(FedosovData {
            gamma: Some(g),
            ..self.clone()
        })
    }

    /// Solves `D^E S = P` for `D^E`-closed `P` of positive form degree via
    /// `S = −δ⁻¹P + δ⁻¹(∇S + A(S) + [γ^E, S])`.
    pub fn solve_de(&self, p: &MatrixSeries) -> Result<MatrixSeries> {
        self.model.ensure_same(p.model())?;
        if p
            .entries()
            .iter()
            .any(|e| e.iter().any(|(m, _)| m.form_degree() == 0))
        {
            return Err(Error::Precondition("right-hand side must have positive form degree".into()));
        }
        let closed = self.exact_band(&self.apply_d_matrix(p));
        if !closed.is_zero() {
            return Err(Error::Precondition(format!("right-hand side is not closed: {closed}")));
        }
        let minus_p = p.map(|e| -&delta_inv(e));
        Ok(fixed_point(&self.model, minus_p.clone(), |s| {
            &minus_p + &self.nabla_a_gamma(s).map(delta_inv)
        }))
    }

    /// Scalar form of `solve_de`; the bundle twist is ignored.
    pub fn solve_d(&self, p: &FormalSeries) -> Result<FormalSeries> {
        self.model.ensure_same(p.model())?;
        if p.iter().any(|(m, _)| m.form_degree() == 0) {
            return Err(Error::Precondition("right-hand side must have positive form degree".into()));
        }
        let closed = self.flatness_residual(p);
        if !closed.is_zero() {
            return Err(Error::Precondition(format!("right-hand side is not closed: {closed}")));
        }
        let minus_p = -&delta_inv(p);
        Ok(fixed_point(&self.model, minus_p.clone(), |s| {
            &minus_p + &delta_inv(&self.nabla_a(s))
        }))
    }

    /// `D^E S − P` on the exact band.
    pub fn solve_residual(&self, s: &MatrixSeries, p: &MatrixSeries) -> MatrixSeries {
        let w = self.model.fiber_max;
        (&self.apply_d_matrix(s) - p).map(|e| e.below_weight(w))
    }

    fn exact_band(&self, a: &MatrixSeries) -> MatrixSeries {
        a.map(|e| e.below_weight(self.model.fiber_max))
    }
}

/// Every monomial in `y`, `θ` of weight at most `w` times the given base monomials.
pub fn spanning_monomials(model: &ModelConfig, w: u32, bases: &[Monomial]) -> Vec<Monomial> {
    let d = model.dim;
    let mut fibers: Vec<[u8; crate::weyl::MAX_DIM]> = vec![[0; crate::weyl::MAX_DIM]];
    for _ in 0..w {
        let mut next = Vec::new();
        for f in &fibers {
            for k in 0..d {
                let mut g = *f;
                g[k] += 1;
                next.push(g);
            }
        }
        fibers.extend(next);
        fibers.sort();
        fibers.dedup();
    }
    let mut out = Vec::new();
    for base in bases {
        for f in &fibers {
            for forms in 0..(1u8 << d) {
                let mut m = *base;
                m.fiber = *f;
                m.forms = forms;
                if m.weight() <= w {
                    out.push(m);
                }
            }
        }
    }
    out.sort();
    out.dedup();
    out
}
