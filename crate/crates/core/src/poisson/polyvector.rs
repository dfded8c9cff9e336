use crate::error::{Error, Result};
use crate::fedosov::base_differential;
use crate::weyl::expr::parse_series;
use crate::weyl::model::ModelConfig;
use crate::weyl::monomial::MAX_DIM;
use crate::weyl::series::FormalSeries;

/// Polyvector field `Σ P^{i₁…i_k} ξ_{i₁}⋯ξ_{i_k}`. The odd generators `θ^i` of
/// the series stand for `ξ_i = ∂/∂x^i`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polyvector {
    series: FormalSeries,
}

/// A form with base and ℏ content only.
pub type DifferentialForm = FormalSeries;

fn ensure_base_content(s: &FormalSeries, what: &str) -> Result<()> {
    if s.iter().any(|(m, _)| m.has_fiber() || m.t != 0) {
        return Err(Error::Precondition(format!("{what} must not contain fiber or path variables: {s}")));
    }
    Ok(())
}

impl Polyvector {
    pub fn new(series: FormalSeries) -> Result<Self> {
        ensure_base_content(&series, "polyvector")?;
        Ok(Polyvector { series })
    }

    pub fn zero(model: ModelConfig) -> Self {
        Polyvector {
            series: FormalSeries::zero(model),
        }
    }

    /// `f ∂_i`, `i` zero-based.
    pub fn vector_field(f: &FormalSeries, i: usize) -> Result<Self> {
        Self::new(f.theta_left(i))
    }

    /// Bivector from a full antisymmetric matrix of coefficients.
    pub fn bivector(model: ModelConfig, comps: &[Vec<FormalSeries>]) -> Result<Self> {
        let d = model.dim;
        if comps.len() != d || comps.iter().any(|r| r.len() != d) {
            return Err(Error::Precondition(format!("bivector needs a {d}x{d} matrix")));
        }
        let mut s = FormalSeries::zero(model);
        for i in 0..d {
            for j in 0..d {
                model.ensure_same(comps[i][j].model())?;
                if comps[i][j] != -&comps[j][i] {
                    return Err(Error::Precondition(format!(
                        "bivector is not antisymmetric at ({}, {})",
                        i + 1,
                        j + 1
                    )));
                }
                if i < j {
                    s = &s + &comps[i][j].theta_left(j).theta_left(i);
                }
            }
        }
        Self::new(s)
    }

    /// Parses `pi[i][j]` expressions.
    pub fn parse_bivector(model: ModelConfig, exprs: &[Vec<String>]) -> Result<Self> {
        let comps = exprs
            .iter()
            .map(|r| r.iter().map(|s| parse_series(&model, s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::bivector(model, &comps)
    }

    /// The constant symplectic bivector `Σ ∂_{2k-1} ∧ ∂_{2k}`.
    pub fn standard(model: ModelConfig) -> Self {
        let mut s = FormalSeries::zero(model);
        for k in 0..model.dim / 2 {
            s = &s + &FormalSeries::one(model).theta_left(2 * k + 1).theta_left(2 * k);
        }
        Polyvector { series: s }
    }

    pub fn series(&self) -> &FormalSeries {
        &self.series
    }

    pub fn model(&self) -> &ModelConfig {
        self.series.model()
    }

    pub fn is_zero(&self) -> bool {
        self.series.is_zero()
    }

    /// Coefficient of `ξ_i ξ_j` for `i < j` (zero-based); antisymmetric.
    pub fn component(&self, i: usize, j: usize) -> FormalSeries {
        if i == j {
            return FormalSeries::zero(*self.model());
        }
        self.series
            .form_part(2)
            .theta_derive(i)
            .theta_derive(j)
    }

    /// Homogeneous degree-`k` part.
    pub fn degree_part(&self, k: u32) -> Polyvector {
        Polyvector {
            series: self.series.form_part(k),
        }
    }

    pub fn scale_hbar(&self, k: u8) -> Polyvector {
        Polyvector {
            series: self.series.shift_hbar(k),
        }
    }

    pub fn is_hbar_free(&self) -> bool {
        self.series.is_hbar_free()
    }
}

/// Right derivative `∂/∂ξ_i` from the right.
fn right_derive(s: &FormalSeries, i: usize) -> FormalSeries {
    s.map_terms(|m, c, out| {
        if m.forms & (1 << i) != 0 {
            let mut m2 = *m;
            m2.forms &= !(1 << i);
            let above = (m.forms >> (i + 1)).count_ones();
            out.add_term(m2, if above % 2 == 1 { -c.clone() } else { c.clone() });
        }
    })
}

fn schouten_homogeneous(p: &FormalSeries, pd: u32, q: &FormalSeries, qd: u32) -> FormalSeries {
    let model = *p.model();
    let mut out = FormalSeries::zero(model);
    let sign_flip = (pd + 1) * (qd + 1) % 2 == 1;
    for i in 0..model.dim {
        let a = &right_derive(p, i) * &q.base_derive0(i);
        let b = &right_derive(q, i) * &p.base_derive0(i);
        out = &out + &a;
        out = if sign_flip { &out + &b } else { &out - &b };
    }
    out
}

/// Schouten–Nijenhuis bracket, graded antisymmetric for the shifted degree.
pub fn schouten(p: &Polyvector, q: &Polyvector) -> Result<Polyvector> {
    p.model().ensure_same(q.model())?;
    let mut out = FormalSeries::zero(*p.model());
    for (pd, ps) in p.series.form_components() {
        for (qd, qs) in q.series.form_components() {
            out = &out + &schouten_homogeneous(&ps, pd, &qs, qd);
        }
    }
    Ok(Polyvector { series: out })
}

pub fn is_poisson(pi: &Polyvector) -> bool {
    schouten(pi, pi).map(|s| s.is_zero()).unwrap_or(false)
}

fn ensure_poisson(pi: &Polyvector) -> Result<()> {
    if !is_poisson(pi) {
        return Err(Error::Precondition("bivector does not satisfy [π, π] = 0".into()));
    }
    Ok(())
}

/// `{f, g} = Σ π^{ij} ∂_i f ∂_j g`, computed from components.
pub fn poisson_bracket(pi: &Polyvector, f: &FormalSeries, g: &FormalSeries) -> FormalSeries {
    let d = pi.model().dim;
    let mut out = FormalSeries::zero(*pi.model());
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            let c = pi.component(i, j);
            if c.is_zero() {
                continue;
            }
            out = &out + &(&c * &(&f.base_derive0(i) * &g.base_derive0(j)));
        }
    }
    out
}

/// `d_π P = [π, P]`.
pub fn lichnerowicz(pi: &Polyvector, p: &Polyvector) -> Result<Polyvector> {
    ensure_poisson(pi)?;
    schouten(pi, p)
}

/// de Rham differential `Σ θ^i ∂_i`.
pub fn de_rham(w: &DifferentialForm) -> Result<DifferentialForm> {
    ensure_base_content(w, "differential form")?;
    Ok(base_differential(w))
}

/// Contraction `i_π = Σ_{i<j} π^{ij} ι_j ι_i`, of degree −2.
pub fn contract(pi: &Polyvector, w: &DifferentialForm) -> DifferentialForm {
    let d = pi.model().dim;
    let mut out = FormalSeries::zero(*w.model());
    for i in 0..d {
        for j in (i + 1)..d {
            let c = pi.component(i, j);
            if c.is_zero() {
                continue;
            }
            let inner = w.theta_derive(i).theta_derive(j);
            out = &out + &(&c * &inner);
        }
    }
    out
}

/// Koszul differential `L_π = i_π d − d i_π`.
pub fn koszul(pi: &Polyvector, w: &DifferentialForm) -> Result<DifferentialForm> {
    ensure_poisson(pi)?;
    koszul_unchecked(pi, w)
}

pub(crate) fn koszul_unchecked(pi: &Polyvector, w: &DifferentialForm) -> Result<DifferentialForm> {
    pi.model().ensure_same(w.model())?;
    let dw = de_rham(w)?;
    Ok(&contract(pi, &dw) - &de_rham(&contract(pi, w))?)
}

/// Largest absolute base exponent per coordinate among the coefficients of `pi`.
pub(crate) fn mode_support(pi: &Polyvector) -> [u32; MAX_DIM] {
    let mut s = [0u32; MAX_DIM];
    for (m, _) in pi.series.iter() {
        for i in 0..MAX_DIM {
            s[i] = s[i].max(m.base[i].unsigned_abs() as u32);
        }
    }
    s
}
