//! The acceptance suite: one function per criterion, each returning a
//! verdict with the worst observed deviation.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{NormEngine, NormMethod, DEFAULT_NODES};
use crate::error::Result;
use crate::forms::{Component, FormCoefficients};
use crate::geometry::{
    basic_identity_diagnostic, check_conformal_duality, check_kahler_duality, curvature_at,
    curvature_threshold, RadialProfile, GRID_POINTS,
};
use crate::models::ModelSpec;
use crate::numerics::{enumerate_multiindices, make_rule, MultiIndex, RuleKind};
use crate::operators::{assemble_block, del, del_adjoint};
use crate::spectral::{solve_dbar_with, spectrum, spectrum_with, unboundedness_demo, Laplacian};

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "criterion {:>2} {:<32} {}  {}",
            self.id,
            self.title,
            if self.passed { "PASS" } else { "FAIL" },
            self.detail
        )
    }
}

pub const TITLES: [&str; 11] = [
    "norm duality, standard weight",
    "norm duality, exponential weight",
    "hyperbolic spectrum",
    "standard-weight spectrum",
    "sharp solver estimate, standard",
    "solver estimate, hyperbolic",
    "cigar model",
    "unboundedness",
    "geometry audit",
    "adjointness",
    "basic-identity diagnostic",
];

fn verdict(id: u32, outcome: Result<(bool, String)>) -> CriterionResult {
    let (passed, detail) = outcome.unwrap_or_else(|e| (false, format!("error: {e}")));
    CriterionResult {
        id,
        title: TITLES[id as usize - 1],
        passed,
        detail,
    }
}

pub fn run_criterion(id: u32) -> Option<CriterionResult> {
    let outcome = match id {
        1 => norm_duality_standard(),
        2 => norm_duality_exponential(),
        3 => hyperbolic_spectrum(),
        4 => standard_spectrum(),
        5 => solver_standard(),
        6 => solver_hyperbolic(),
        7 => cigar(),
        8 => unboundedness(),
        9 => geometry_audit(),
        10 => adjointness(),
        11 => basic_identity(),
        _ => return None,
    };
    Some(verdict(id, outcome))
}

/// All criteria, evaluated in parallel and returned in order.
pub fn run_all() -> Vec<CriterionResult> {
    (1..=11u32)
        .into_par_iter()
        .map(|i| run_criterion(i).expect("criterion ids are 1..=11"))
        .collect()
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn random_coefficient(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// Polynomial p-form with random coefficients on every monomial term of
/// degree in [lo, hi].
pub fn random_form(
    rng: &mut ChaCha8Rng,
    n: usize,
    p: usize,
    lo: u32,
    hi: u32,
) -> Result<FormCoefficients> {
    let mut f = FormCoefficients::zero(n, p);
    for m in lo..=hi {
        for j in enumerate_multiindices(n, m)? {
            for c in Component::all(n, p) {
                f.add_term(j.clone(), c, random_coefficient(rng))?;
            }
        }
    }
    Ok(f)
}

fn norm_duality_standard() -> Result<(bool, String)> {
    let model = ModelSpec::standard(2, 1.5)?;
    let closed = NormEngine::new(model, NormMethod::ClosedForm, DEFAULT_NODES)?;
    let quad = NormEngine::new(model, NormMethod::Quadrature, DEFAULT_NODES)?;
    let (mut residual, mut agreement) = (0.0f64, 0.0f64);
    for m in 0..=6 {
        for j in enumerate_multiindices(2, m)? {
            for k in 0..2 {
                let up = j.increment(k);
                let c2 = closed.squared_norm(&up, Component::Scalar)?;
                let d2 = closed.squared_norm(&j, Component::Dz(k))?;
                let jk = j.get(k) as f64 + 1.0;
                residual = residual.max(rel(1.5 * c2, jk * d2));
                agreement = agreement.max(rel(quad.squared_norm(&up, Component::Scalar)?, c2));
                agreement = agreement.max(rel(quad.squared_norm(&j, Component::Dz(k))?, d2));
            }
        }
    }
    Ok((
        residual < 1e-12 && agreement < 1e-8,
        format!("max duality residual {residual:.2e} (< 1e-12), max closed/quadrature difference {agreement:.2e} (< 1e-8)"),
    ))
}

fn norm_duality_exponential() -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for alpha in [0.5, 1.0, 2.0] {
        let engine = NormEngine::new(
            ModelSpec::hyperbolic(1, alpha)?,
            NormMethod::Quadrature,
            DEFAULT_NODES,
        )?;
        for k in 0..=20u32 {
            let c2 = engine.squared_norm(&MultiIndex::new(vec![k + 1]), Component::Scalar)?;
            let d2 = engine.squared_norm(&MultiIndex::new(vec![k]), Component::Dz(0))?;
            worst = worst.max(rel(alpha * c2, (k as f64 + 1.0) * d2));
        }
    }
    Ok((
        worst < 1e-8,
        format!("max residual {worst:.2e} over α ∈ {{0.5, 1, 2}}, k ≤ 20 (< 1e-8)"),
    ))
}

fn hyperbolic_spectrum() -> Result<(bool, String)> {
    let r = spectrum(&ModelSpec::hyperbolic(2, 1.0)?, 6, Laplacian::Box1)?;
    let mut dev = 0.0f64;
    for b in &r.blocks {
        for v in &b.eigenvalues {
            dev = dev.max((v - (b.m as f64 + 1.0)).abs());
        }
    }
    let mults_ok = r.aggregated.len() == 7
        && r.aggregated.iter().enumerate().all(|(i, c)| {
            c.multiplicity == 2 * (i + 1) && (c.value - (i + 1) as f64).abs() < 1e-10
        });
    let mults: Vec<usize> = r.aggregated.iter().map(|c| c.multiplicity).collect();
    Ok((
        dev < 1e-10 && mults_ok,
        format!("max |λ − α(m+1)| {dev:.2e} (< 1e-10), multiplicities {mults:?}"),
    ))
}

fn standard_spectrum() -> Result<(bool, String)> {
    let b = assemble_block(&ModelSpec::standard(2, 1.0)?, 1)?;
    let e = crate::numerics::eigh(&b.matrix)?;
    let m1 = e
        .values
        .iter()
        .zip([2.0, 2.0, 2.0, 4.0])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let mut min_dev = 0.0f64;
    let mut max_excess = f64::NEG_INFINITY;
    for n in 1..=3 {
        let gamma = 1.0;
        let r = spectrum(&ModelSpec::standard(n, gamma)?, 6, Laplacian::Box1)?;
        for blk in &r.blocks {
            let m = blk.m as f64;
            let lo = blk.eigenvalues[0];
            let hi = *blk.eigenvalues.last().unwrap_or(&lo);
            min_dev = min_dev.max((lo - (m + 1.0) * gamma).abs());
            max_excess = max_excess.max(hi - (gamma + m * (2.0 + gamma)));
        }
    }
    let ok = e.values.len() == 4 && m1 < 1e-10 && min_dev < 1e-9 && max_excess <= 1e-9;
    Ok((
        ok,
        format!(
            "m=1 block deviation {m1:.2e}, max |λ_min − (m+1)γ| {min_dev:.2e}, max (λ_max − γ − m(2+γ)) {max_excess:.2e} (attained at m = 1)"
        ),
    ))
}

/// Equality for constant η, and for random closed η: exactness, orthogonality
/// to constants, the sharp bound, and the spectral-gap bound when η has no
/// constant part.
fn solver_protocol(models: &[ModelSpec], seed: u64) -> Result<(bool, String)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut eq_dev, mut residual, mut orth, mut excess, mut gap_excess) =
        (0.0f64, 0.0f64, 0.0f64, f64::NEG_INFINITY, f64::NEG_INFINITY);
    for model in models {
        let n = model.dim();
        let engine = NormEngine::preferred(*model);
        let dz1 = FormCoefficients::monomial(
            MultiIndex::zero(n),
            Component::Dz(0),
            Complex64::new(1.0, 0.0),
        )?;
        let constant = random_form(&mut rng, n, 1, 0, 0)?;
        for eta in [dz1, constant] {
            eq_dev = eq_dev.max((solve_dbar_with(&engine, &eta)?.norm_ratio - 1.0).abs());
        }
        for trial in 0..10 {
            let lo = if trial % 2 == 0 { 1 } else { 2 };
            let g = random_form(&mut rng, n, 0, lo, 6)?;
            let eta = del(&g)?;
            let r = solve_dbar_with(&engine, &eta)?;
            residual = residual.max(r.residual_dbar);
            orth = orth.max(r.orthogonality_defect);
            excess = excess.max(r.norm_ratio - 1.0);
            if lo == 2 {
                gap_excess = gap_excess.max(r.norm_ratio - r.spectral_bound.min(0.5));
            }
        }
    }
    let ok =
        eq_dev < 1e-10 && residual <= 1e-9 && orth <= 1e-10 && excess <= 1e-9 && gap_excess <= 1e-9;
    Ok((
        ok,
        format!(
            "constant η: |ratio − 1| {eq_dev:.2e}; random closed η: residual {residual:.2e}, ⟨f,1⟩ defect {orth:.2e}, max ratio − 1 {excess:.2e}, nonconstant η ratio − 1/2 ≤ {gap_excess:.2e}"
        ),
    ))
}

fn solver_standard() -> Result<(bool, String)> {
    solver_protocol(
        &[
            ModelSpec::standard(2, 1.0)?,
            ModelSpec::standard(1, 2.0)?,
            ModelSpec::standard(3, 0.5)?,
        ],
        5,
    )
}

fn solver_hyperbolic() -> Result<(bool, String)> {
    solver_protocol(
        &[
            ModelSpec::hyperbolic(2, 1.0)?,
            ModelSpec::hyperbolic(1, 2.0)?,
            ModelSpec::hyperbolic(3, 0.7)?,
        ],
        6,
    )
}

fn cigar() -> Result<(bool, String)> {
    let model = ModelSpec::cigar(5.0)?;
    let engine = NormEngine::preferred(model);
    let dim = model.bergman_dimension(0);
    let check = |op: Laplacian, want: &[f64]| -> Result<(bool, Vec<f64>)> {
        let r = spectrum_with(&engine, 8, op)?;
        let all = r.all_eigenvalues();
        let simple = r.aggregated.iter().all(|c| c.multiplicity == 1);
        let ok = all.len() == want.len()
            && simple
            && all.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-10);
        Ok((ok, all))
    };
    let (ok0, s0) = check(Laplacian::Box0, &[0.0, 5.0, 10.0, 15.0, 20.0])?;
    let (ok1, s1) = check(Laplacian::Box1, &[5.0, 10.0, 15.0, 20.0])?;
    Ok((
        dim == Some(5) && ok0 && ok1,
        format!("dim A² = {dim:?}, □̃₀ {s0:.10?}, □̃₁ {s1:.10?}"),
    ))
}

fn unboundedness() -> Result<(bool, String)> {
    let r = unboundedness_demo(&ModelSpec::hyperbolic(1, 1.0)?, 100_000)?;
    let ok = (r.s_over_log - 1.0).abs() < 0.05 && r.max_ratio_defect < 1e-8;
    Ok((
        ok,
        format!(
            "S_N/(α ln N) = {:.4} at N = 1e5 (within 0.05 of 1), max ratio defect {:.2e} for k ≤ 30 (< 1e-8)",
            r.s_over_log, r.max_ratio_defect
        ),
    ))
}

fn geometry_audit() -> Result<(bool, String)> {
    let mut dev = 0.0f64;
    let mut defect = 0.0f64;
    let mut constants_ok = true;
    let mut record = |c: Option<f64>, d: f64, want: f64| {
        defect = defect.max(d);
        match c {
            Some(c) => dev = dev.max((c - want).abs()),
            None => constants_ok = false,
        }
    };
    for (n, alpha) in [(1, 0.5), (2, 1.5), (3, 4.0)] {
        let m = ModelSpec::hyperbolic(n, alpha)?;
        let r = check_kahler_duality(&RadialProfile::for_model(&m))?;
        record(
            r.holomorphicity_constant,
            r.constancy_defect,
            m.duality_constant(),
        );
    }
    for (n, gamma) in [(1, 2.0), (2, 1.5), (3, 0.5)] {
        let m = ModelSpec::standard(n, gamma)?;
        let r = check_conformal_duality(&RadialProfile::for_model(&m))?;
        record(
            r.holomorphicity_constant,
            r.constancy_defect,
            m.duality_constant(),
        );
    }
    for alpha in [0.5, 2.0] {
        for mm in [1.0, 2.0] {
            let r =
                check_conformal_duality(&RadialProfile::polynomial_conformal_example(mm, alpha))?;
            record(r.holomorphicity_constant, r.constancy_defect, -alpha);
        }
        let r = check_conformal_duality(&RadialProfile::exponential_conformal_example(alpha))?;
        record(r.holomorphicity_constant, r.constancy_defect, -alpha);
    }
    let mut threshold_dev = 0.0f64;
    for (n, alpha) in [(1, 3.0), (2, 5.0), (3, 2.5)] {
        let p = RadialProfile::for_model(&ModelSpec::hyperbolic(n, alpha)?);
        let t = curvature_threshold(&p, None, &p.grid(GRID_POINTS), 1e-8)?;
        threshold_dev = threshold_dev.max((t - (alpha - n as f64 - 1.0)).abs());
    }
    let mut worst_at_boundary = f64::NEG_INFINITY;
    for gamma in [0.5, 1.0, 2.0] {
        let p = RadialProfile::for_model(&ModelSpec::standard(2, gamma)?);
        for sigma in [1.01, 2.0, 10.0, 1e3] {
            for eps in [1e-6, 0.1, 1.0] {
                worst_at_boundary =
                    worst_at_boundary.max(curvature_at(&p, eps, Some(sigma), 0.81)?.min);
            }
        }
    }
    let ok = constants_ok
        && dev < 1e-10
        && defect < 1e-8
        && threshold_dev < 1e-6
        && worst_at_boundary < 0.0;
    Ok((
        ok,
        format!(
            "duality constant deviation {dev:.2e}, constancy defect {defect:.2e}, threshold error {threshold_dev:.2e}, largest min eigenvalue at |z| = 0.9 {worst_at_boundary:.3}"
        ),
    ))
}

/// Largest relative adjointness residual |⟨∂u,v⟩ − ⟨u,∂*v⟩| / max(‖∂u‖‖v‖, ‖u‖‖∂*v‖)
/// over `trials` random pairs of p- and (p+1)-forms.
pub fn adjointness_residual(model: &ModelSpec, p: usize, trials: usize, seed: u64) -> Result<f64> {
    let n = model.dim();
    let engine = NormEngine::preferred(*model);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (du, dv) = match *model {
        ModelSpec::Cigar { alpha } => {
            let top = (alpha - p as f64 - 1.0).ceil() as u32 - 1;
            (top.min(4), top.min(4).saturating_sub(1))
        }
        _ => (4, 3),
    };
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let u = random_form(&mut rng, n, p, 0, du)?;
        let v = random_form(&mut rng, n, p + 1, 0, dv)?;
        let d = del(&u)?;
        let a = del_adjoint(model, &v)?;
        let lhs = engine.inner(&d, &v)?;
        let rhs = engine.inner(&u, &a)?;
        let scale = (engine.norm_sq(&d)? * engine.norm_sq(&v)?)
            .sqrt()
            .max((engine.norm_sq(&u)? * engine.norm_sq(&a)?).sqrt());
        if scale > 0.0 {
            worst = worst.max((lhs - rhs).norm() / scale);
        }
    }
    Ok(worst)
}

pub fn adjointness_models() -> Vec<ModelSpec> {
    [
        ModelSpec::segal_bargmann(1),
        ModelSpec::segal_bargmann(2),
        ModelSpec::hyperbolic(1, 1.5),
        ModelSpec::hyperbolic(2, 1.5),
        ModelSpec::hyperbolic(3, 0.8),
        ModelSpec::standard(1, 2.0),
        ModelSpec::standard(2, 1.0),
        ModelSpec::standard(3, 0.5),
        ModelSpec::cigar(5.0),
        ModelSpec::cigar(6.5),
    ]
    .into_iter()
    .map(|m| m.expect("valid model parameters"))
    .collect()
}

fn adjointness() -> Result<(bool, String)> {
    let mut cases = Vec::new();
    for (i, m) in adjointness_models().into_iter().enumerate() {
        cases.push((m, 0, i as u64));
        if m.dim() >= 2 {
            cases.push((m, 1, 100 + i as u64));
        }
    }
    let results = cases
        .par_iter()
        .map(|(m, p, seed)| adjointness_residual(m, *p, 100, *seed))
        .collect::<Result<Vec<_>>>()?;
    let worst = results.iter().copied().fold(0.0, f64::max);
    Ok((
        worst < 1e-9,
        format!(
            "max relative residual {worst:.2e} over {} model/degree cases × 100 pairs (< 1e-9)",
            cases.len()
        ),
    ))
}

fn basic_identity() -> Result<(bool, String)> {
    let model = ModelSpec::segal_bargmann(1)?;
    let rule = make_rule(RuleKind::GaussLaguerre, 64)?;
    let (mut min_g, mut dev) = (f64::INFINITY, 0.0f64);
    let mut constants = Vec::new();
    for k in 0..=5u32 {
        let u = FormCoefficients::monomial(
            MultiIndex::new(vec![k]),
            Component::Dz(0),
            Complex64::new(1.0, 0.0),
        )?;
        let r = basic_identity_diagnostic(&model, &u)?;
        // Σ∫|∂u|² e^{−|z|²} dλ = π k² ∫ t^{k−1} e^{−t} dt
        let kf = k as f64;
        let oracle = if k == 0 {
            0.0
        } else {
            std::f64::consts::PI * kf * kf * rule.integrate(|t| t.powi(k as i32 - 1))
        };
        min_g = min_g.min(r.implied_gradient);
        dev = dev.max((r.implied_gradient - oracle).abs() / oracle.max(r.lhs));
        if let Some(c) = r.constant {
            constants.push(c);
        }
    }
    let spread = constants
        .iter()
        .map(|c| (c - constants[0]).abs())
        .fold(0.0, f64::max);
    let ok = min_g >= -1e-8 && dev < 1e-6;
    Ok((
        ok,
        format!(
            "min G {min_g:.2e}, max relative deviation from oracle {dev:.2e} (< 1e-6), measured gradient constant {:.6} (spread {spread:.1e})",
            constants.first().copied().unwrap_or(f64::NAN)
        ),
    ))
}
