//! Term-by-term evaluation of the basic identity
//! ‖∂u − Tu‖² + ‖∂*u‖² = κ‖∇u‖² + (i∂∂̄ψ + Θ, u∧ū) − (projection defect)
//! for (1,0)-forms u on models where T u = 0 and the defect vanishes.

use std::f64::consts::PI;

use serde::Serialize;

use crate::basis::{
    ln_beta_quadrature, NormEngine, NormMethod, RuleCache, DEFAULT_NODES, QUADRATURE_TOL,
};
use crate::error::{Error, Result};
use crate::forms::{CoefficientEntry, FormCoefficients};
use crate::models::ModelSpec;
use crate::numerics::RuleKind;
use crate::operators::{del, del_adjoint};

#[derive(Debug, Clone, Serialize)]
pub struct BasicIdentityReport {
    pub model: ModelSpec,
    pub u: Vec<CoefficientEntry>,
    /// ‖∂u − Tu‖² (T u = 0 here).
    pub del_norm_sq: f64,
    pub del_adjoint_norm_sq: f64,
    pub lhs: f64,
    /// (i∂∂̄ψ + Θ, u∧ū)_{h,ψ}.
    pub curvature: f64,
    /// ‖(I − P)⟨u, ∂ψ − τ⟩‖², zero when (∂̄ψ − τ̄)♯ is holomorphic.
    pub projection_defect: f64,
    /// lhs − curvature + projection_defect.
    pub implied_gradient: f64,
    /// ‖∇u‖² for the (1,0) part of the Chern connection.
    pub chern_gradient_norm_sq: f64,
    /// implied_gradient / chern_gradient_norm_sq, absent when ∇u = 0.
    pub constant: Option<f64>,
}

/// Evaluates `f(nodes)` at N and 2N nodes; `f` returns the integral and the
/// integral of its absolute value.
fn checked(what: &str, f: impl Fn(usize) -> Result<(f64, f64)>) -> Result<f64> {
    let (coarse, _) = f(DEFAULT_NODES)?;
    let (fine, scale) = f(2 * DEFAULT_NODES)?;
    let change = (fine - coarse).abs() / scale.max(f64::MIN_POSITIVE);
    if !(change <= QUADRATURE_TOL) {
        return Err(Error::Accuracy {
            what: what.to_string(),
            change,
            nodes: DEFAULT_NODES,
        });
    }
    Ok(fine)
}

fn laguerre(rules: &RuleCache, nodes: usize, g: impl Fn(f64) -> f64) -> Result<(f64, f64)> {
    let rule = rules.get(RuleKind::GaussLaguerre, nodes)?;
    Ok((rule.integrate(&g), rule.integrate(|s| g(s).abs())))
}

/// Curvature and Chern-gradient weights of z^k dz in one variable:
/// π∫t^k C φ²ρ dt and π∫t^{k−1}(k − tℓ′)²φ²ρ dt with ℓ = log h_{11̄}.
fn one_variable_terms(model: &ModelSpec, k: u32, rules: &RuleCache) -> Result<(f64, f64)> {
    let kf = k as f64;
    match *model {
        ModelSpec::SegalBargmann { .. } => {
            let curv = checked("curvature term", |n| {
                laguerre(rules, n, |s| s.powi(k as i32))
            })?;
            let grad = if k == 0 {
                0.0
            } else {
                checked("gradient term", |n| {
                    laguerre(rules, n, |s| kf * kf * s.powi(k as i32 - 1))
                })?
            };
            Ok((PI * curv, PI * grad))
        }
        ModelSpec::HyperbolicExponential { n: 1, alpha } => {
            // t = s/(α+s): C φ²ρ dt = α e^{−α}(α+2s−2)(α+s)^{−2} e^{−s} ds
            let pre = alpha * (-alpha).exp();
            let curv = checked("curvature term", |n| {
                laguerre(rules, n, |s| {
                    (s / (alpha + s)).powi(k as i32) * (alpha + 2.0 * s - 2.0) / (alpha + s).powi(2)
                })
            })?;
            let grad = checked("gradient term", |n| {
                laguerre(rules, n, |s| {
                    let lead = if k == 0 {
                        4.0 * s / (alpha * alpha)
                    } else {
                        s.powi(k as i32 - 1) * (kf - 2.0 * s / alpha).powi(2)
                    };
                    alpha * alpha * lead / (alpha + s).powi(k as i32 + 3)
                })
            })?;
            Ok((PI * pre * curv, PI * pre * grad))
        }
        ModelSpec::Cigar { alpha } => {
            if !model.is_integrable(k, 1) {
                return Err(Error::Divergent(format!(
                    "z^{k} dz is not square integrable on the cigar with α = {alpha}"
                )));
            }
            // with s = t/(1+t): C φ²ρ = (α+1)(1+t)^{−α−1} and
            // (k − tℓ′)² = (k + s)², so both reduce to beta-type integrals
            let beta = |n: usize, a: f64, b: f64| -> Result<f64> {
                Ok(ln_beta_quadrature(&*rules.get(RuleKind::GaussLegendre, n)?, a, b).exp())
            };
            let curv = checked("curvature term", |n| {
                let v = (alpha + 1.0) * beta(n, kf, alpha - kf - 1.0)?;
                Ok((v, v))
            })?;
            let grad = checked("gradient term", |n| {
                let mut v = beta(n, kf + 1.0, alpha - kf - 2.0)?;
                if k > 0 {
                    v += kf * kf * beta(n, kf - 1.0, alpha - kf - 2.0)?
                        + 2.0 * kf * beta(n, kf, alpha - kf - 2.0)?;
                }
                Ok((v, v))
            })?;
            Ok((PI * curv, PI * grad))
        }
        _ => Err(Error::Unsupported(format!(
            "no one-variable identity terms for the {model} model"
        ))),
    }
}

/// Every term of the basic identity for a polynomial (1,0)-form u.
pub fn basic_identity_diagnostic(
    model: &ModelSpec,
    u: &FormCoefficients,
) -> Result<BasicIdentityReport> {
    let n = model.dim();
    let supported = matches!(
        model,
        ModelSpec::SegalBargmann { .. } | ModelSpec::Cigar { .. }
    ) || matches!(model, ModelSpec::HyperbolicExponential { n: 1, .. });
    if !supported {
        return Err(Error::Unsupported(format!(
            "the basic-identity diagnostic covers the Segal–Bargmann model, the cigar and the one-dimensional hyperbolic model, not {model}"
        )));
    }
    if u.dim() != n || u.degree_p() != 1 {
        return Err(Error::domain(format!(
            "u must be a (1,0)-form in {n} variables"
        )));
    }
    let engine = NormEngine::new(*model, NormMethod::Quadrature, DEFAULT_NODES)?;
    let du = del(u)?;
    let del_norm_sq = if du.is_empty() {
        0.0
    } else {
        engine.norm_sq(&du)?
    };
    let del_adjoint_norm_sq = engine.norm_sq(&del_adjoint(model, u)?)?;
    let lhs = del_norm_sq + del_adjoint_norm_sq;

    let (curvature, chern) = if n == 1 {
        let rules = RuleCache::default();
        let mut curv = 0.0;
        let mut grad = 0.0;
        for (j, _, z) in u.iter() {
            let (c, g) = one_variable_terms(model, j.degree(), &rules)?;
            curv += z.norm_sqr() * c;
            grad += z.norm_sqr() * g;
        }
        (curv, grad)
    } else {
        // flat metric, i∂∂̄ψ = ω: the curvature term is ‖u‖² and ∇ = ∂
        let mut grad = 0.0;
        for j in 0..n {
            let mut dj = FormCoefficients::zero(n, 1);
            for (a, c, z) in u.iter() {
                if let Some(b) = a.decrement(j) {
                    dj.add_term(b, c, z * a.get(j) as f64)?;
                }
            }
            if !dj.is_empty() {
                grad += engine.norm_sq(&dj)?;
            }
        }
        (engine.norm_sq(u)?, grad)
    };
    let projection_defect = 0.0;
    let implied_gradient = lhs - curvature + projection_defect;
    let scale = lhs.abs().max(curvature.abs());
    let constant = (chern > 1e-12 * scale).then(|| implied_gradient / chern);
    Ok(BasicIdentityReport {
        model: *model,
        u: u.to_entries(),
        del_norm_sq,
        del_adjoint_norm_sq,
        lhs,
        curvature,
        projection_defect,
        implied_gradient,
        chern_gradient_norm_sq: chern,
        constant,
    })
}
