//! Norms and Gram matrices of monomial forms z^J·dz^K.
//!
//! Every pairing reduces to
//!
//! ∫ |z^A|² g(|z|²) dλ = πⁿ A!/(|A|+n−1)! · ∫ t^{|A|+n−1} g(t) dt,
//!
//! so a model only has to supply the radial moments
//! R_p(M) = ∫ t^{M+n−1} φ(t)^p ρ(t) dt, where ρ is the weight density and φ
//! the metric factor of [`ModelSpec::metric_factor`].

use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, RwLock};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forms::{Component, FormCoefficients, Term};
use crate::models::ModelSpec;
use crate::numerics::{
    enumerate_multiindices, ln_beta, ln_factorial, ln_gamma, make_rule, MultiIndex, QuadratureRule,
    RuleKind,
};

pub const DEFAULT_NODES: usize = 200;
/// Relative change between N and 2N nodes above which a quadrature is rejected.
pub const QUADRATURE_TOL: f64 = 1e-6;
const MIN_NODES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    ClosedForm,
    Quadrature,
}

impl NormMethod {
    /// Closed forms where they exist, quadrature otherwise.
    pub fn preferred(model: &ModelSpec) -> Self {
        match model {
            ModelSpec::SegalBargmann { .. } | ModelSpec::ConformalStandard { .. } => {
                NormMethod::ClosedForm
            }
            _ => NormMethod::Quadrature,
        }
    }
}

/// Memoized quadrature rules.
#[derive(Debug, Default)]
pub struct RuleCache {
    rules: RwLock<HashMap<(RuleKind, usize), Arc<QuadratureRule>>>,
}

impl RuleCache {
    pub fn get(&self, kind: RuleKind, n: usize) -> Result<Arc<QuadratureRule>> {
        if let Some(r) = self
            .rules
            .read()
            .expect("rule cache poisoned")
            .get(&(kind, n))
        {
            return Ok(r.clone());
        }
        let rule = Arc::new(make_rule(kind, n)?);
        self.rules
            .write()
            .expect("rule cache poisoned")
            .entry((kind, n))
            .or_insert_with(|| rule.clone());
        Ok(rule)
    }
}

/// ln(πⁿ A!/(|A|+n−1)!).
pub fn ln_angular(a: &MultiIndex) -> f64 {
    let n = a.dim() as u32;
    n as f64 * std::f64::consts::PI.ln() + a.ln_factorial() - ln_factorial(a.degree() + n - 1)
}

/// ln ∫₀¹ s^a (1−s)^b ds by Gauss–Legendre after the substitution 1−s = u^q,
/// which makes the endpoint behaviour at s = 1 smooth.
pub(crate) fn ln_beta_quadrature(rule: &QuadratureRule, a: f64, b: f64) -> f64 {
    let q = if b.fract() == 0.0 {
        1.0
    } else {
        (4.0 / (b + 1.0)).ceil().max(1.0)
    };
    let e = q * (b + 1.0) - 1.0;
    rule.integrate_ln(|u| {
        let tail = if a == 0.0 {
            0.0
        } else {
            a * (-u.powf(q)).ln_1p()
        };
        q.ln() + e * u.ln() + tail
    })
}

/// ln ∫₀^∞ s^a (α+s)^{−b} e^{−s} ds on a Laguerre rule rescaled to the peak
/// of the integrand.
fn ln_shifted_laguerre(rule: &QuadratureRule, a: f64, b: f64, alpha: f64) -> f64 {
    // peak of a ln s − b ln(α+s) − s
    let lin = alpha + b - a;
    let peak = 0.5 * (-lin + (lin * lin + 4.0 * a * alpha).sqrt());
    let n = rule.len() as f64;
    let lambda = (alpha / 2.0).min(1.0).max(2.0 * peak / n);
    lambda.ln()
        + rule.integrate_ln(|x| {
            let s = lambda * x;
            let la = if a == 0.0 { 0.0 } else { a * s.ln() };
            la - b * (alpha + s).ln() - (lambda - 1.0) * x
        })
}

/// ln R_p(M) from the closed form, where one exists.
pub fn ln_radial_moment_closed(model: &ModelSpec, p: usize, m: u32) -> Result<f64> {
    let n = model.dim() as f64;
    match *model {
        ModelSpec::SegalBargmann { .. } => ln_gamma(m as f64 + n),
        ModelSpec::ConformalStandard { gamma, .. } => ln_beta(m as f64 + n, gamma + p as f64),
        _ => Err(Error::Unsupported(format!(
            "no closed-form norms for the {} model; use norm_quadrature",
            model.name()
        ))),
    }
}

fn check_integrable(model: &ModelSpec, p: usize, m: u32) -> Result<()> {
    if let ModelSpec::Cigar { alpha } = *model {
        if !model.is_integrable(m, p) {
            return Err(Error::Divergent(format!(
                "degree-{m} monomial {p}-forms are not square integrable on the cigar with α = {alpha} (need degree < α − p)"
            )));
        }
    }
    Ok(())
}

/// ln R_p(M) by a single quadrature of `nodes` points.
fn ln_radial_moment_single(
    model: &ModelSpec,
    p: usize,
    m: u32,
    nodes: usize,
    rules: &RuleCache,
) -> Result<f64> {
    check_integrable(model, p, m)?;
    let n = model.dim() as f64;
    let a = m as f64 + n - 1.0;
    Ok(match *model {
        ModelSpec::SegalBargmann { .. } => {
            let rule = rules.get(RuleKind::GaussLaguerre, nodes)?;
            rule.integrate_ln(|s| if a == 0.0 { 0.0 } else { a * s.ln() })
        }
        ModelSpec::ConformalStandard { gamma, .. } => {
            let rule = rules.get(RuleKind::GaussLegendre, nodes)?;
            ln_beta_quadrature(&rule, a, gamma - 1.0 + p as f64)
        }
        ModelSpec::Cigar { alpha } => {
            // t = s/(1−s) maps the half-line onto [0, 1)
            let rule = rules.get(RuleKind::GaussLegendre, nodes)?;
            ln_beta_quadrature(&rule, m as f64, alpha - p as f64 - m as f64 - 1.0)
        }
        ModelSpec::HyperbolicExponential { alpha, .. } => {
            // s = α/(1−t) − α
            let rule = rules.get(RuleKind::GaussLaguerre, nodes)?;
            -alpha
                + (p as f64 - n) * alpha.ln()
                + ln_shifted_laguerre(&rule, a, m as f64 + p as f64, alpha)
        }
    })
}

/// ln R_p(M) with the N versus 2N acceptance check.
pub fn ln_radial_moment_quadrature(
    model: &ModelSpec,
    p: usize,
    m: u32,
    nodes: usize,
    rules: &RuleCache,
) -> Result<f64> {
    if nodes < MIN_NODES {
        return Err(Error::domain(format!(
            "quadrature needs at least {MIN_NODES} nodes, got {nodes}"
        )));
    }
    let coarse = ln_radial_moment_single(model, p, m, nodes, rules)?;
    let fine = ln_radial_moment_single(model, p, m, 2 * nodes, rules)?;
    let change = (fine - coarse).exp_m1().abs();
    if !(change <= QUADRATURE_TOL) || !fine.is_finite() {
        return Err(Error::Accuracy {
            what: format!("radial moment R_{p}({m}) of the {model} model"),
            change,
            nodes,
        });
    }
    Ok(fine)
}

/// Terms (coefficient, P, Q) of the pointwise pairing of two frame elements:
/// ⟨z^A f, z^B g⟩_h = φ^p Σ coef · z^{A+P} conj(z^{B+Q}).
fn frame_terms(
    n: usize,
    cross: bool,
    f: Component,
    g: Component,
) -> Vec<(f64, MultiIndex, MultiIndex)> {
    let zero = MultiIndex::zero(n);
    let e = |i: usize| MultiIndex::unit(n, i);
    match (f, g) {
        (Component::Scalar, Component::Scalar) => vec![(1.0, zero.clone(), zero)],
        (Component::Dz(a), Component::Dz(c)) => {
            let mut t = Vec::new();
            if a == c {
                t.push((1.0, zero.clone(), zero));
            }
            if cross {
                t.push((-1.0, e(a), e(c)));
            }
            t
        }
        (Component::Wedge(a, b), Component::Wedge(c, d)) => {
            // G_ac G_bd − G_ad G_bc with G_xy = δ_xy − κ z_x z̄_y
            let mut t = Vec::new();
            let d_ = |x: usize, y: usize| if x == y { 1.0 } else { 0.0 };
            let det = d_(a, c) * d_(b, d) - d_(a, d) * d_(b, c);
            if det != 0.0 {
                t.push((det, zero.clone(), zero.clone()));
            }
            if cross {
                for (s, x, y, u, v) in [(1.0, a, c, b, d), (-1.0, a, d, b, c)] {
                    // G_xy G_uv ⊃ −δ_xy z_u z̄_v − δ_uv z_x z̄_y (+ a κ² term that
                    // cancels between the two products)
                    if x == y {
                        t.push((-s, e(u), e(v)));
                    }
                    if u == v {
                        t.push((-s, e(x), e(y)));
                    }
                }
            }
            t
        }
        _ => Vec::new(),
    }
}

/// Radial moments and pairings for one model, with memoization.
#[derive(Debug)]
pub struct NormEngine {
    model: ModelSpec,
    method: NormMethod,
    nodes: usize,
    rules: RuleCache,
    moments: RwLock<HashMap<(usize, u32), f64>>,
}

impl NormEngine {
    pub fn new(model: ModelSpec, method: NormMethod, nodes: usize) -> Result<Self> {
        if method == NormMethod::ClosedForm {
            ln_radial_moment_closed(&model, 0, 0)?;
        }
        if nodes < MIN_NODES {
            return Err(Error::domain(format!(
                "quadrature needs at least {MIN_NODES} nodes, got {nodes}"
            )));
        }
        Ok(NormEngine {
            model,
            method,
            nodes,
            rules: RuleCache::default(),
            moments: RwLock::new(HashMap::new()),
        })
    }

    /// Closed forms where available, quadrature with the default node count otherwise.
    pub fn preferred(model: ModelSpec) -> Self {
        NormEngine::new(model, NormMethod::preferred(&model), DEFAULT_NODES)
            .expect("preferred method is always available")
    }

    pub fn model(&self) -> &ModelSpec {
        &self.model
    }

    pub fn method(&self) -> NormMethod {
        self.method
    }

    pub fn ln_radial_moment(&self, p: usize, m: u32) -> Result<f64> {
        if let Some(v) = self
            .moments
            .read()
            .expect("moment cache poisoned")
            .get(&(p, m))
        {
            return Ok(*v);
        }
        let v = match self.method {
            NormMethod::ClosedForm => ln_radial_moment_closed(&self.model, p, m)?,
            NormMethod::Quadrature => {
                ln_radial_moment_quadrature(&self.model, p, m, self.nodes, &self.rules)?
            }
        };
        self.moments
            .write()
            .expect("moment cache poisoned")
            .insert((p, m), v);
        Ok(v)
    }

    /// Squared norm ‖z^J f‖² of a single monomial term.
    pub fn squared_norm(&self, j: &MultiIndex, c: Component) -> Result<f64> {
        Ok(self.ln_squared_norm(j, c)?.exp())
    }

    pub fn ln_squared_norm(&self, j: &MultiIndex, c: Component) -> Result<f64> {
        self.check_term(j, c)?;
        let p = c.degree();
        let m = j.degree();
        if !self.model.has_cross_term() || p == 0 {
            return Ok(ln_angular(j) + self.ln_radial_moment(p, m)?);
        }
        // |z^J f|² = φ^p |z^J|² (1 − Σ_{i∈f} |z_i|²) under the hyperbolic
        // metric. Splitting 1 − t = φ keeps both pieces positive:
        // ang(J)[R_{p+1}(m) + (1 − s) R_p(m+1)], s = Σ_{i∈f}(j_i+1)/(m+n).
        let n = self.model.dim() as f64;
        let s: f64 = c
            .indices()
            .iter()
            .map(|&i| j.get(i) as f64 + 1.0)
            .sum::<f64>()
            / (m as f64 + n);
        let first = self.ln_radial_moment(p + 1, m)?;
        let rest = if s < 1.0 {
            (1.0 - s).ln() + self.ln_radial_moment(p, m + 1)?
        } else {
            f64::NEG_INFINITY
        };
        let hi = first.max(rest);
        Ok(ln_angular(j) + hi + ((first - hi).exp() + (rest - hi).exp()).ln())
    }

    fn check_term(&self, j: &MultiIndex, c: Component) -> Result<()> {
        let n = self.model.dim();
        if j.dim() != n {
            return Err(Error::domain(format!(
                "multi-index {j} has length {}, model dimension is {n}",
                j.dim()
            )));
        }
        if c.degree() > 2 || c.indices().iter().any(|&i| i >= n) {
            return Err(Error::domain(format!("component {c} invalid for n = {n}")));
        }
        if c.degree() == 2 && matches!(self.model, ModelSpec::Cigar { .. }) {
            return Err(Error::Unsupported(
                "the cigar model has no (2,0)-forms".into(),
            ));
        }
        Ok(())
    }

    /// Real Gram entry ⟨z^A f, z^B g⟩.
    pub fn pairing(&self, a: &Term, b: &Term) -> Result<f64> {
        if a == b {
            return self.squared_norm(&a.0, a.1);
        }
        self.check_term(&a.0, a.1)?;
        self.check_term(&b.0, b.1)?;
        let p = a.1.degree();
        if b.1.degree() != p {
            return Err(Error::domain("pairing forms of different degree"));
        }
        let mut total = 0.0;
        for (coef, pp, qq) in frame_terms(self.model.dim(), self.model.has_cross_term(), a.1, b.1) {
            let x = a.0.add(&pp);
            if x != b.0.add(&qq) {
                continue;
            }
            total += coef * (ln_angular(&x) + self.ln_radial_moment(p, x.degree())?).exp();
        }
        Ok(total)
    }

    /// Row-major Gram matrix of the given terms.
    pub fn gram(&self, terms: &[Term]) -> Result<Vec<f64>> {
        let d = terms.len();
        let mut g = vec![0.0; d * d];
        for i in 0..d {
            for j in i..d {
                let v = self.pairing(&terms[i], &terms[j])?;
                g[i * d + j] = v;
                g[j * d + i] = v;
            }
        }
        Ok(g)
    }

    /// Hermitian L² inner product ⟨u, v⟩ (linear in u).
    pub fn inner(&self, u: &FormCoefficients, v: &FormCoefficients) -> Result<Complex64> {
        if u.dim() != v.dim() || u.degree_p() != v.degree_p() {
            return Err(Error::domain(
                "inner product of forms with different shapes",
            ));
        }
        let mut by_degree: BTreeMap<u32, Vec<(Term, Complex64)>> = BTreeMap::new();
        for (j, c, z) in v.iter() {
            by_degree
                .entry(j.degree())
                .or_default()
                .push(((j.clone(), c), z));
        }
        let mut total = Complex64::new(0.0, 0.0);
        for (j, c, zu) in u.iter() {
            let Some(vs) = by_degree.get(&j.degree()) else {
                continue;
            };
            let a = (j.clone(), c);
            for (b, zv) in vs {
                let g = self.pairing(&a, b)?;
                if g != 0.0 {
                    total += zu * zv.conj() * g;
                }
            }
        }
        Ok(total)
    }

    pub fn norm_sq(&self, u: &FormCoefficients) -> Result<f64> {
        Ok(self.inner(u, u)?.re)
    }
}

fn check_component(model: &ModelSpec, p: usize, c: Component) -> Result<()> {
    if p > 2 {
        return Err(Error::domain(format!("form degree {p} not supported")));
    }
    if c.degree() != p {
        return Err(Error::domain(format!(
            "component {c} is not a {p}-form frame element"
        )));
    }
    if c.indices().iter().any(|&i| i >= model.dim()) {
        return Err(Error::domain(format!(
            "component {c} out of range for n = {}",
            model.dim()
        )));
    }
    Ok(())
}

/// Squared norm of z^J·c from the Gamma/Beta closed forms (standard and
/// Segal–Bargmann models only).
pub fn norm_closed_form(model: &ModelSpec, p: usize, j: &MultiIndex, c: Component) -> Result<f64> {
    check_component(model, p, c)?;
    let engine = NormEngine::new(*model, NormMethod::ClosedForm, DEFAULT_NODES)?;
    engine.squared_norm(j, c)
}

/// Squared norm of z^J·c with the radial factor by quadrature of `nodes`
/// points, checked against `2·nodes`.
pub fn norm_quadrature(
    model: &ModelSpec,
    p: usize,
    j: &MultiIndex,
    c: Component,
    nodes: usize,
) -> Result<f64> {
    check_component(model, p, c)?;
    let engine = NormEngine::new(*model, NormMethod::Quadrature, nodes)?;
    engine.squared_norm(j, c)
}

/// Relative residual of c·‖z^{J+e_k}‖² = ⟨∂z^{J+e_k}, z^J dz^k⟩, where c is the
/// duality constant. Without metric cross terms the right side is
/// (j_k+1)·‖z^J dz^k‖².
pub fn verify_duality_identity(engine: &NormEngine, j: &MultiIndex, k: usize) -> Result<f64> {
    let model = engine.model();
    let n = model.dim();
    if k >= n {
        return Err(Error::domain(format!(
            "component index {} out of range for n = {n}",
            k + 1
        )));
    }
    let up = j.increment(k);
    let lhs = model.duality_constant() * engine.squared_norm(&up, Component::Scalar)?;
    let target = (j.clone(), Component::Dz(k));
    let mut rhs = 0.0;
    for i in 0..n {
        if let Some(down) = up.decrement(i) {
            let coef = up.get(i) as f64;
            rhs += coef * engine.pairing(&(down, Component::Dz(i)), &target)?;
        }
    }
    Ok((lhs - rhs).abs() / engine.squared_norm(j, Component::Dz(k))?)
}

/// Squared norms of all monomial p-forms up to a degree.
#[derive(Debug, Clone, Serialize)]
pub struct NormTable {
    pub model: ModelSpec,
    pub p: usize,
    pub method: NormMethod,
    #[serde(skip)]
    ln_entries: BTreeMap<Term, f64>,
}

impl NormTable {
    /// All J with |J| ≤ max_degree (and finite norm) and every component.
    pub fn build(engine: &NormEngine, p: usize, max_degree: u32) -> Result<Self> {
        let model = *engine.model();
        let n = model.dim();
        let mut terms = Vec::new();
        for m in 0..=max_degree {
            if !model.is_integrable(m, p) {
                break;
            }
            for j in enumerate_multiindices(n, m)? {
                for c in Component::all(n, p) {
                    terms.push((j.clone(), c));
                }
            }
        }
        let values: Vec<Result<f64>> = terms
            .par_iter()
            .map(|(j, c)| engine.ln_squared_norm(j, *c))
            .collect();
        let mut ln_entries = BTreeMap::new();
        for (t, v) in terms.into_iter().zip(values) {
            let v = v?;
            if !v.is_finite() {
                return Err(Error::Invariant(format!(
                    "non-finite norm for z^{} {}",
                    t.0, t.1
                )));
            }
            ln_entries.insert(t, v);
        }
        Ok(NormTable {
            model,
            p,
            method: engine.method(),
            ln_entries,
        })
    }

    pub fn ln_squared_norm(&self, j: &MultiIndex, c: Component) -> Option<f64> {
        self.ln_entries.get(&(j.clone(), c)).copied()
    }

    pub fn squared_norm(&self, j: &MultiIndex, c: Component) -> Option<f64> {
        self.ln_squared_norm(j, c).map(f64::exp)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, Component, f64)> {
        self.ln_entries.iter().map(|((j, c), v)| (j, *c, v.exp()))
    }

    pub fn len(&self) -> usize {
        self.ln_entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ln_entries.is_empty()
    }
}

/// Squared norm of the hyperbolic-model basis element written as
/// (|J|+n−1)!/(√a_{|J|} π^{n/2} J!)·z^J, against the first-principles
/// normalization √((|J|+n−1)!/(πⁿ J! a_{|J|})) which has norm one.
#[derive(Debug, Clone, Serialize)]
pub struct NormalizationReport {
    #[serde(rename = "J")]
    pub j: MultiIndex,
    /// a_{|J|} = R_0(|J|).
    pub radial_moment: f64,
    pub first_principles_norm_sq: f64,
    pub alternative_norm_sq: f64,
    /// (|J|+n−1)!/J!.
    pub discrepancy_factor: f64,
}

pub fn hyperbolic_normalization_report(
    engine: &NormEngine,
    j: &MultiIndex,
) -> Result<NormalizationReport> {
    let model = engine.model();
    let ModelSpec::HyperbolicExponential { n, .. } = *model else {
        return Err(Error::Unsupported(
            "the normalization report concerns the hyperbolic model".into(),
        ));
    };
    let m = j.degree();
    let ln_a = engine.ln_radial_moment(0, m)?;
    let ln_fact = ln_factorial(m + n as u32 - 1);
    let ln_pi_n = n as f64 * std::f64::consts::PI.ln();
    let ln_norm = engine.ln_squared_norm(j, Component::Scalar)?;
    let ln_first = ln_fact - ln_pi_n - j.ln_factorial() - ln_a;
    let ln_alt = 2.0 * ln_fact - ln_a - ln_pi_n - 2.0 * j.ln_factorial();
    Ok(NormalizationReport {
        j: j.clone(),
        radial_moment: ln_a.exp(),
        first_principles_norm_sq: (ln_first + ln_norm).exp(),
        alternative_norm_sq: (ln_alt + ln_norm).exp(),
        discrepancy_factor: (ln_fact - j.ln_factorial()).exp(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn standard_closed_forms_one_variable() {
        let m = ModelSpec::standard(1, 1.0).unwrap();
        let leg = make_rule(RuleKind::GaussLegendre, 60).unwrap();
        for k in 0..8u32 {
            let c2 = norm_closed_form(&m, 0, &mi(&[k]), Component::Scalar).unwrap();
            assert!(rel(c2, PI / (k as f64 + 1.0)) < 1e-13);
            // 2π ∫₀¹ r^{2k+1} dr
            let oracle = 2.0 * PI * leg.integrate(|r| r.powi(2 * k as i32 + 1));
            assert!(rel(c2, oracle) < 1e-12);

            let d2 = norm_closed_form(&m, 1, &mi(&[k]), Component::Dz(0)).unwrap();
            assert!(rel(d2, PI / ((k as f64 + 1.0) * (k as f64 + 2.0))) < 1e-13);
            let oracle = 2.0 * PI * leg.integrate(|r| r.powi(2 * k as i32 + 1) * (1.0 - r * r));
            assert!(rel(d2, oracle) < 1e-12);
        }
    }

    #[test]
    fn segal_bargmann_closed_form() {
        let m = ModelSpec::segal_bargmann(1).unwrap();
        let v = norm_closed_form(&m, 0, &mi(&[2]), Component::Scalar).unwrap();
        assert!(rel(v, 2.0 * PI) < 1e-14);
        // 2π ∫ r⁵ e^{−r²} dr = π ∫ t² e^{−t} dt
        let lag = make_rule(RuleKind::GaussLaguerre, 10).unwrap();
        assert!(rel(v, PI * lag.integrate(|t| t * t)) < 1e-13);
        let q = norm_quadrature(&m, 1, &mi(&[2]), Component::Dz(0), 20).unwrap();
        assert!(rel(q, 2.0 * PI) < 1e-12);
    }

    #[test]
    fn closed_form_unsupported_models() {
        let h = ModelSpec::hyperbolic(1, 1.0).unwrap();
        let c = ModelSpec::cigar(5.0).unwrap();
        for m in [h, c] {
            assert!(matches!(
                norm_closed_form(&m, 0, &mi(&[0]), Component::Scalar),
                Err(Error::Unsupported(_))
            ));
        }
    }

    fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
        fn rec(
            f: &dyn Fn(f64) -> f64,
            a: f64,
            b: f64,
            fa: f64,
            fm: f64,
            fb: f64,
            whole: f64,
            tol: f64,
            depth: u32,
        ) -> f64 {
            let m = 0.5 * (a + b);
            let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
            let (flm, frm) = (f(lm), f(rm));
            let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
            let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
            if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
                return left + right + (left + right - whole) / 15.0;
            }
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
        let (fa, fm, fb) = (f(a), f(0.5 * (a + b)), f(b));
        let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
        rec(f, a, b, fa, fm, fb, whole, tol, 50)
    }

    #[test]
    fn hyperbolic_ground_norm_against_adaptive_simpson() {
        let m = ModelSpec::hyperbolic(1, 1.0).unwrap();
        let q = norm_quadrature(&m, 0, &mi(&[0]), Component::Scalar, 100).unwrap();
        let f = |r: f64| {
            let s = 1.0 - r * r;
            if s <= 0.0 {
                0.0
            } else {
                2.0 * PI * r / (s * s) * (-1.0 / s).exp()
            }
        };
        let oracle = adaptive_simpson(&f, 0.0, 1.0, 1e-14);
        assert!(rel(q, oracle) < 1e-8, "{q} vs {oracle}");
    }

    #[test]
    fn standard_quadrature_matches_closed_form() {
        let m = ModelSpec::standard(2, 1.5).unwrap();
        for deg in 0..=4 {
            for j in enumerate_multiindices(2, deg).unwrap() {
                for c in [
                    Component::Scalar,
                    Component::Dz(0),
                    Component::Dz(1),
                    Component::Wedge(0, 1),
                ] {
                    let p = c.degree();
                    let a = norm_closed_form(&m, p, &j, c).unwrap();
                    let b = norm_quadrature(&m, p, &j, c, 50).unwrap();
                    assert!(rel(a, b) < 1e-8, "{j} {c}: {a} vs {b}");
                }
            }
        }
    }

    #[test]
    fn cigar_integrability_edge() {
        let m = ModelSpec::cigar(5.0).unwrap();
        let v = norm_quadrature(&m, 0, &mi(&[4]), Component::Scalar, 100).unwrap();
        // π B(5, 1) = π/5
        assert!(rel(v, PI / 5.0) < 1e-10);
        let err = norm_quadrature(&m, 0, &mi(&[5]), Component::Scalar, 100).unwrap_err();
        assert_eq!(err.class(), crate::error::ErrorClass::Accuracy);
        assert!(norm_quadrature(&m, 1, &mi(&[3]), Component::Dz(0), 100).is_ok());
        assert!(norm_quadrature(&m, 1, &mi(&[4]), Component::Dz(0), 100).is_err());
    }

    #[test]
    fn node_count_floor() {
        let m = ModelSpec::hyperbolic(1, 1.0).unwrap();
        assert!(norm_quadrature(&m, 0, &mi(&[0]), Component::Scalar, 9).is_err());
    }

    #[test]
    fn duality_examples() {
        let s = NormEngine::preferred(ModelSpec::standard(2, 1.5).unwrap());
        assert!(verify_duality_identity(&s, &mi(&[2, 1]), 0).unwrap() < 1e-12);
        let h = NormEngine::preferred(ModelSpec::hyperbolic(1, 2.0).unwrap());
        assert!(verify_duality_identity(&h, &mi(&[3]), 0).unwrap() < 1e-8);
        let sb = NormEngine::preferred(ModelSpec::segal_bargmann(1).unwrap());
        assert_eq!(verify_duality_identity(&sb, &mi(&[0]), 0).unwrap(), 0.0);
    }

    #[test]
    fn hyperbolic_split_matches_generic_expansion() {
        // ⟨z^J dz^k, z^J dz^k⟩ written out term by term
        for n in 1..=3usize {
            let e = NormEngine::preferred(ModelSpec::hyperbolic(n, 1.3).unwrap());
            for deg in 0..=3 {
                for j in enumerate_multiindices(n, deg).unwrap() {
                    for c in Component::all(n, 1).into_iter().chain(Component::all(n, 2)) {
                        let p = c.degree();
                        let mut direct = 0.0;
                        for (coef, pp, qq) in frame_terms(n, true, c, c) {
                            let x = j.add(&pp);
                            assert_eq!(x, j.add(&qq));
                            direct += coef
                                * (ln_angular(&x) + e.ln_radial_moment(p, x.degree()).unwrap())
                                    .exp();
                        }
                        let split = e.squared_norm(&j, c).unwrap();
                        assert!(
                            rel(split, direct) < 1e-11,
                            "n={n} {j} {c}: {split} vs {direct}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn normalization_report_factor() {
        let e = NormEngine::preferred(ModelSpec::hyperbolic(2, 1.0).unwrap());
        let r = hyperbolic_normalization_report(&e, &mi(&[2, 1])).unwrap();
        assert!((r.first_principles_norm_sq - 1.0).abs() < 1e-12);
        assert!(rel(r.alternative_norm_sq, 24.0 / 2.0) < 1e-12);
        assert!(rel(r.discrepancy_factor, 12.0) < 1e-12);
    }
}
