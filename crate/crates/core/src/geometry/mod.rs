//! Radial metrics and weights: the holomorphicity condition on the weight,
//! torsion, the curvature criterion, and the basic-identity diagnostic.

pub mod expr;
mod identity;

use std::f64::consts::PI;
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{parse_model, ModelSpec};

pub use expr::{finite_difference, parse_expr, Expr, Jet};
pub use identity::{basic_identity_diagnostic, BasicIdentityReport};

pub const GRID_POINTS: usize = 1000;
/// Largest coefficient spread for which a duality constant is reported.
pub const CONSTANCY_TOL: f64 = 1e-8;
/// Minimum eigenvalue accepted as nonnegative.
pub const CURVATURE_TOL: f64 = 1e-10;
const C_GRID_END: f64 = 50.0;
const BALL_MARGIN: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    /// h = i∂∂̄h̃(|z|²).
    KahlerPotential,
    /// h_{jk̄} = e^{φ̃(|z|²)} δ_{jk}.
    ConformalFactor,
}

/// Radial metric datum and weight ψ = ψ̃(|z|²) on {r = |z|² < R}.
#[derive(Debug, Clone)]
pub struct RadialProfile {
    pub kind: ProfileKind,
    pub n: usize,
    /// R; infinite for ℂⁿ.
    pub radius: f64,
    /// h̃ or φ̃.
    pub metric: Expr,
    /// ψ̃.
    pub weight: Expr,
}

impl fmt::Display for RadialProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (kind, key) = match self.kind {
            ProfileKind::KahlerPotential => ("kahler", "h"),
            ProfileKind::ConformalFactor => ("conformal", "phi"),
        };
        write!(
            f,
            "{kind}:n={},{key}={},psi={}",
            self.n, self.metric, self.weight
        )?;
        if self.radius.is_finite() {
            write!(f, ",R={}", self.radius)?;
        }
        Ok(())
    }
}

fn one_minus_r() -> Expr {
    Expr::num(1.0) - Expr::r()
}

fn one_plus_r() -> Expr {
    Expr::num(1.0) + Expr::r()
}

impl RadialProfile {
    pub fn kahler(n: usize, h: Expr, psi: Expr, radius: f64) -> Result<Self> {
        Self::new(ProfileKind::KahlerPotential, n, h, psi, radius)
    }

    pub fn conformal(n: usize, phi: Expr, psi: Expr, radius: f64) -> Result<Self> {
        Self::new(ProfileKind::ConformalFactor, n, phi, psi, radius)
    }

    fn new(kind: ProfileKind, n: usize, metric: Expr, weight: Expr, radius: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("profile dimension must be at least 1"));
        }
        if !(radius > 0.0) {
            return Err(Error::domain(format!(
                "profile radius must be positive, got {radius}"
            )));
        }
        Ok(RadialProfile {
            kind,
            n,
            radius,
            metric,
            weight,
        })
    }

    /// The metric and weight of a model.
    pub fn for_model(model: &ModelSpec) -> Self {
        let r = Expr::r;
        let (kind, n, radius, metric, weight) = match *model {
            ModelSpec::SegalBargmann { n } => {
                (ProfileKind::KahlerPotential, n, f64::INFINITY, r(), r())
            }
            ModelSpec::HyperbolicExponential { n, alpha } => (
                ProfileKind::KahlerPotential,
                n,
                1.0,
                -one_minus_r().log(),
                Expr::num(alpha) / one_minus_r(),
            ),
            ModelSpec::ConformalStandard { n, .. } => {
                let alpha = model.standard_alpha().unwrap_or(0.0);
                (
                    ProfileKind::ConformalFactor,
                    n,
                    1.0,
                    -one_minus_r().log(),
                    Expr::num(alpha) * one_minus_r().log(),
                )
            }
            ModelSpec::Cigar { alpha } => (
                ProfileKind::ConformalFactor,
                1,
                f64::INFINITY,
                -one_plus_r().log(),
                Expr::num(alpha) * one_plus_r().log(),
            ),
        };
        RadialProfile {
            kind,
            n,
            radius,
            metric,
            weight,
        }
    }

    /// φ̃ = m log(1+r), ψ̃ = m log(1+r) − α(1+r)^{m+1}/(m+1) on ℂ².
    pub fn polynomial_conformal_example(m: f64, alpha: f64) -> Self {
        let phi = Expr::num(m) * one_plus_r().log();
        let psi = phi.clone() - Expr::num(alpha / (m + 1.0)) * one_plus_r().pow(Expr::num(m + 1.0));
        RadialProfile {
            kind: ProfileKind::ConformalFactor,
            n: 2,
            radius: f64::INFINITY,
            metric: phi,
            weight: psi,
        }
    }

    /// φ̃ = r, ψ̃ = r − α e^r on ℂ².
    pub fn exponential_conformal_example(alpha: f64) -> Self {
        let psi = Expr::r() - Expr::num(alpha) * Expr::r().exp();
        RadialProfile {
            kind: ProfileKind::ConformalFactor,
            n: 2,
            radius: f64::INFINITY,
            metric: Expr::r(),
            weight: psi,
        }
    }

    /// Right end of the sampling interval.
    pub fn grid_end(&self) -> f64 {
        if self.radius.is_finite() {
            self.radius * (1.0 - BALL_MARGIN)
        } else {
            C_GRID_END
        }
    }

    /// Chebyshev–Lobatto points on [0, grid_end].
    pub fn grid(&self, points: usize) -> Vec<f64> {
        chebyshev_grid(self.grid_end(), points)
    }

    /// (value, first, second derivative) of the metric datum and of ψ̃.
    pub fn derivatives(&self, r: f64) -> ([f64; 3], [f64; 3]) {
        let d = |j: Jet| [j.derivative(0), j.derivative(1), j.derivative(2)];
        (d(self.metric.jet(r)), d(self.weight.jet(r)))
    }

    /// Kähler positivity h̃′ > 0 and h̃′ + r h̃″ > 0 on the grid.
    pub fn check_positivity(&self, grid: &[f64]) -> Result<()> {
        if self.kind != ProfileKind::KahlerPotential {
            return Ok(());
        }
        for &r in grid {
            let ([_, h1, h2], _) = self.derivatives(r);
            let radial = h1 + r * h2;
            if !(h1 > 0.0 && radial > 0.0) {
                return Err(Error::domain(format!(
                    "Kähler positivity fails at r = {r}: h′ = {h1}, h′ + r h″ = {radial}"
                )));
            }
        }
        Ok(())
    }

    /// The coefficient c(r) of Σ z^j ∂/∂z^j in (∂̄ψ − τ̄)♯.
    pub fn duality_coefficient(&self, r: f64) -> f64 {
        let ([m0, m1, m2], [_, w1, _]) = self.derivatives(r);
        match self.kind {
            ProfileKind::KahlerPotential => w1 / (m1 + r * m2),
            ProfileKind::ConformalFactor => (-m0).exp() * (w1 - (self.n as f64 - 1.0) * m1),
        }
    }
}

pub fn chebyshev_grid(end: f64, points: usize) -> Vec<f64> {
    if points < 2 {
        return vec![0.0; points];
    }
    (0..points)
        .map(|i| {
            if i == points - 1 {
                end
            } else {
                0.5 * end * (1.0 - (PI * i as f64 / (points - 1) as f64).cos())
            }
        })
        .collect()
}

/// Parses `kahler:h=EXPR,psi=EXPR[,n=N][,R=R]`,
/// `conformal:phi=EXPR,psi=EXPR[,n=N][,R=R]`, or a model specification.
pub fn parse_profile(s: &str) -> Result<RadialProfile> {
    let s = s.trim();
    let Some((head, rest)) = s.split_once(':') else {
        return Ok(RadialProfile::for_model(&parse_model(s)?));
    };
    let kind = match head {
        "kahler" => ProfileKind::KahlerPotential,
        "conformal" => ProfileKind::ConformalFactor,
        _ => return Ok(RadialProfile::for_model(&parse_model(s)?)),
    };
    let metric_key = if kind == ProfileKind::KahlerPotential {
        "h"
    } else {
        "phi"
    };
    let (mut n, mut radius, mut metric, mut weight) = (None, None, None, None);
    for part in rest.split(',') {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got '{part}' in '{s}'")))?;
        let (k, v) = (k.trim(), v.trim());
        let dup = || Error::Parse(format!("duplicate key '{k}' in '{s}'"));
        match k {
            "n" => {
                let v = v.parse::<usize>().map_err(|_| {
                    Error::Parse(format!("n must be a positive integer, got '{v}'"))
                })?;
                n.replace(v).map_or(Ok(()), |_| Err(dup()))?
            }
            "R" => {
                let v = v
                    .parse::<f64>()
                    .map_err(|_| Error::Parse(format!("R must be a number, got '{v}'")))?;
                radius.replace(v).map_or(Ok(()), |_| Err(dup()))?
            }
            "psi" => weight
                .replace(parse_expr(v)?)
                .map_or(Ok(()), |_| Err(dup()))?,
            k if k == metric_key => metric
                .replace(parse_expr(v)?)
                .map_or(Ok(()), |_| Err(dup()))?,
            _ => return Err(Error::Parse(format!("unknown key '{k}' in profile '{s}'"))),
        }
    }
    let metric =
        metric.ok_or_else(|| Error::Parse(format!("profile '{s}' needs {metric_key}=...")))?;
    let weight = weight.ok_or_else(|| Error::Parse(format!("profile '{s}' needs psi=...")))?;
    RadialProfile::new(
        kind,
        n.unwrap_or(1),
        metric,
        weight,
        radius.unwrap_or(f64::INFINITY),
    )
}

#[derive(Debug, Clone, Serialize)]
pub struct DualityCheck {
    /// Mean of c(r), present only when the spread is below CONSTANCY_TOL.
    pub holomorphicity_constant: Option<f64>,
    /// max |c(r) − mean| over the grid.
    pub constancy_defect: f64,
    pub mean: f64,
}

fn duality_check(profile: &RadialProfile, grid: &[f64]) -> Result<DualityCheck> {
    profile.check_positivity(grid)?;
    let c: Vec<f64> = grid
        .iter()
        .map(|&r| profile.duality_coefficient(r))
        .collect();
    if let Some(i) = c.iter().position(|v| !v.is_finite()) {
        return Err(Error::domain(format!(
            "duality coefficient is not finite at r = {}",
            grid[i]
        )));
    }
    let mean = c.iter().sum::<f64>() / c.len() as f64;
    let constancy_defect = c.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    let holomorphicity_constant = (constancy_defect < CONSTANCY_TOL).then_some(mean);
    Ok(DualityCheck {
        holomorphicity_constant,
        constancy_defect,
        mean,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct TorsionProfile {
    /// (n−1)φ̃′(r), the coefficient of z̄_j in τ_j.
    pub coefficient: Vec<f64>,
    /// |τ|_h.
    pub norm: Vec<f64>,
}

pub fn torsion_profile(profile: &RadialProfile, grid: &[f64]) -> TorsionProfile {
    let k = profile.n as f64 - 1.0;
    let (coefficient, norm) = grid
        .iter()
        .map(|&r| match profile.kind {
            ProfileKind::KahlerPotential => (0.0, 0.0),
            ProfileKind::ConformalFactor => {
                let ([m0, m1, _], _) = profile.derivatives(r);
                let c = k * m1;
                (c, (c * c * r * (-m0).exp()).sqrt())
            }
        })
        .unzip();
    TorsionProfile { coefficient, norm }
}

/// The two eigenvalues of i∂∂̄ψ + Θ − μ iT∘T̄ − ε ω_h at one radius.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CurvatureSample {
    pub r: f64,
    /// Eigenvalue on vectors orthogonal to z; absent when n = 1.
    pub tangential: Option<f64>,
    /// Eigenvalue in the direction of z.
    pub radial: f64,
    pub min: f64,
}

fn mu(sigma: Option<f64>) -> Result<f64> {
    match sigma {
        None => Ok(0.0),
        Some(s) if s > 1.0 && s.is_finite() => Ok(s / (s - 1.0)),
        Some(s) => Err(Error::domain(format!("σ must exceed 1, got {s}"))),
    }
}

/// Each radial (1,1)-form is a·δ_{jk} + b·z̄_j z_k in coordinates, with
/// eigenvalues a (multiplicity n−1) and a + b r.
pub fn curvature_at(
    profile: &RadialProfile,
    epsilon: f64,
    sigma: Option<f64>,
    r: f64,
) -> Result<CurvatureSample> {
    let mu = mu(sigma)?;
    let n = profile.n as f64;
    let w = profile.weight.jet(r);
    let (w1, w2) = (w.derivative(1), w.derivative(2));
    let (a, b) = match profile.kind {
        ProfileKind::KahlerPotential => {
            let h = profile.metric.jet(r);
            let h1 = h.differentiate();
            let h2 = h1.differentiate();
            let radial = h1 + Jet::variable(r) * h2;
            let l = Jet::constant(n - 1.0) * h1.ln() + radial.ln();
            (
                w1 - l.derivative(1) - epsilon * h1.value(),
                w2 - l.derivative(2) - epsilon * h2.value(),
            )
        }
        ProfileKind::ConformalFactor => {
            let p = profile.metric.jet(r);
            let (p0, p1, p2) = (p.value(), p.derivative(1), p.derivative(2));
            // iT∘T̄ = 2φ̃′²(r δ − z̄z)
            let t = 2.0 * mu * p1 * p1;
            (w1 - n * p1 - t * r - epsilon * p0.exp(), w2 - n * p2 + t)
        }
    };
    let radial = a + b * r;
    let tangential = (profile.n > 1).then_some(a);
    Ok(CurvatureSample {
        r,
        tangential,
        radial,
        min: tangential.map_or(radial, |t| t.min(radial)),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureVerdicts {
    pub epsilon: f64,
    pub sigma: Option<f64>,
    /// Minimum eigenvalue per grid radius.
    pub min_eigenvalues: Vec<f64>,
    pub minimum: f64,
    pub argmin_r: f64,
    pub holds: bool,
}

pub fn curvature_condition(
    profile: &RadialProfile,
    epsilon: f64,
    sigma: Option<f64>,
    grid: &[f64],
) -> Result<CurvatureVerdicts> {
    mu(sigma)?;
    let samples = grid
        .par_iter()
        .map(|&r| curvature_at(profile, epsilon, sigma, r))
        .collect::<Result<Vec<_>>>()?;
    let mut minimum = f64::INFINITY;
    let mut argmin_r = f64::NAN;
    for s in &samples {
        if !s.min.is_finite() {
            return Err(Error::domain(format!(
                "curvature form is not finite at r = {}",
                s.r
            )));
        }
        if s.min < minimum {
            minimum = s.min;
            argmin_r = s.r;
        }
    }
    Ok(CurvatureVerdicts {
        epsilon,
        sigma,
        min_eigenvalues: samples.iter().map(|s| s.min).collect(),
        minimum,
        argmin_r,
        holds: minimum >= -CURVATURE_TOL,
    })
}

/// Largest ε for which the curvature condition holds on the grid, by
/// bisection to `tol`.
pub fn curvature_threshold(
    profile: &RadialProfile,
    sigma: Option<f64>,
    grid: &[f64],
    tol: f64,
) -> Result<f64> {
    let holds = |e: f64| curvature_condition(profile, e, sigma, grid).map(|v| v.holds);
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut step = 1.0;
    while !holds(lo)? {
        step *= 2.0;
        lo -= step;
        if lo < -1e12 {
            return Err(Error::domain("curvature condition fails for every ε"));
        }
    }
    hi = hi.max(lo + 1.0);
    step = 1.0;
    while holds(hi)? {
        lo = hi;
        step *= 2.0;
        hi += step;
        if hi > 1e12 {
            return Err(Error::domain("curvature condition holds for every ε"));
        }
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if holds(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, Serialize)]
pub struct GeometryReport {
    pub profile: String,
    pub kind: ProfileKind,
    pub n: usize,
    pub holomorphicity_constant: Option<f64>,
    pub constancy_defect: f64,
    pub grid: Vec<f64>,
    pub torsion_norm_profile: Vec<f64>,
    pub curvature_verdicts: Option<CurvatureVerdicts>,
    /// Sup of ε with the curvature condition holding, when requested.
    pub curvature_threshold: Option<f64>,
}

fn duality_report(profile: &RadialProfile) -> Result<GeometryReport> {
    let grid = profile.grid(GRID_POINTS);
    let d = duality_check(profile, &grid)?;
    let torsion = torsion_profile(profile, &grid);
    Ok(GeometryReport {
        profile: profile.to_string(),
        kind: profile.kind,
        n: profile.n,
        holomorphicity_constant: d.holomorphicity_constant,
        constancy_defect: d.constancy_defect,
        torsion_norm_profile: torsion.norm,
        grid,
        curvature_verdicts: None,
        curvature_threshold: None,
    })
}

pub fn check_kahler_duality(profile: &RadialProfile) -> Result<GeometryReport> {
    if profile.kind != ProfileKind::KahlerPotential {
        return Err(Error::domain(
            "check_kahler_duality needs a Kähler potential",
        ));
    }
    duality_report(profile)
}

/// Uses the dimension n of the profile.
pub fn check_conformal_duality(profile: &RadialProfile) -> Result<GeometryReport> {
    if profile.kind != ProfileKind::ConformalFactor {
        return Err(Error::domain(
            "check_conformal_duality needs a conformal factor",
        ));
    }
    duality_report(profile)
}

/// Duality check, torsion, and optionally the curvature condition at ε and
/// its threshold.
pub fn audit(
    profile: &RadialProfile,
    epsilon: Option<f64>,
    sigma: Option<f64>,
    threshold: bool,
) -> Result<GeometryReport> {
    let mut report = duality_report(profile)?;
    if let Some(e) = epsilon {
        report.curvature_verdicts = Some(curvature_condition(profile, e, sigma, &report.grid)?);
    }
    if threshold {
        report.curvature_threshold = Some(curvature_threshold(profile, sigma, &report.grid, 1e-8)?);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn models() -> Vec<ModelSpec> {
        vec![
            ModelSpec::segal_bargmann(2).unwrap(),
            ModelSpec::hyperbolic(1, 0.7).unwrap(),
            ModelSpec::hyperbolic(3, 4.0).unwrap(),
            ModelSpec::standard(2, 1.5).unwrap(),
            ModelSpec::standard(3, 0.5).unwrap(),
            ModelSpec::cigar(5.0).unwrap(),
        ]
    }

    #[test]
    fn model_profiles_reproduce_duality_constants() {
        for m in models() {
            let rep = audit(&RadialProfile::for_model(&m), None, None, false).unwrap();
            let c = rep
                .holomorphicity_constant
                .unwrap_or_else(|| panic!("{m}: defect {}", rep.constancy_defect));
            assert!((c - m.duality_constant()).abs() < 1e-10, "{m}: {c}");
        }
    }

    #[test]
    fn non_constant_coefficient() {
        let p = parse_profile("kahler:h=r,psi=r^2").unwrap();
        let rep = check_kahler_duality(&p).unwrap();
        assert!(rep.holomorphicity_constant.is_none());
        let mean = 50.0;
        assert!(
            (rep.constancy_defect - (100.0 - mean)).abs() < 1e-9,
            "{}",
            rep.constancy_defect
        );
        let flat = check_kahler_duality(&parse_profile("kahler:h=r,psi=r").unwrap()).unwrap();
        assert_eq!(flat.holomorphicity_constant, Some(1.0));
    }

    #[test]
    fn example_profiles() {
        for alpha in [0.5, 2.0] {
            for m in [1.0, 2.0, 3.0] {
                let rep =
                    check_conformal_duality(&RadialProfile::polynomial_conformal_example(m, alpha))
                        .unwrap();
                assert!((rep.holomorphicity_constant.unwrap() + alpha).abs() < 1e-10);
            }
            let rep = check_conformal_duality(&RadialProfile::exponential_conformal_example(alpha))
                .unwrap();
            assert!((rep.holomorphicity_constant.unwrap() + alpha).abs() < 1e-10);
        }
    }

    #[test]
    fn positivity_failure_is_reported() {
        let p = parse_profile("kahler:h=-r,psi=r").unwrap();
        assert!(matches!(check_kahler_duality(&p), Err(Error::Domain(_))));
        assert!(check_conformal_duality(&p).is_err());
    }

    #[test]
    fn torsion_examples() {
        let grid = [0.0, 0.5, 2.0];
        let one = RadialProfile::conformal(1, Expr::r(), Expr::r(), f64::INFINITY).unwrap();
        assert!(torsion_profile(&one, &grid)
            .coefficient
            .iter()
            .all(|&c| c == 0.0));
        let three = RadialProfile::conformal(3, Expr::r(), Expr::r(), f64::INFINITY).unwrap();
        assert_eq!(torsion_profile(&three, &grid).coefficient[2], 2.0);
        let ball = parse_profile("conformal:n=2,phi=-log(1-r),psi=0,R=1").unwrap();
        let t = torsion_profile(&ball, &[0.5]);
        assert!((t.coefficient[0] - 2.0).abs() < 1e-14);
        // |τ|² = φ̃′² r e^{−φ̃} = 4 · 0.5 · 0.5
        assert!((t.norm[0] - 1.0).abs() < 1e-14);
        let k = RadialProfile::for_model(&ModelSpec::hyperbolic(3, 2.0).unwrap());
        assert!(torsion_profile(&k, &k.grid(50))
            .norm
            .iter()
            .all(|&v| v == 0.0));
    }

    #[test]
    fn flat_curvature_is_zero_at_unit_epsilon() {
        let p = RadialProfile::for_model(&ModelSpec::segal_bargmann(2).unwrap());
        let v = curvature_condition(&p, 1.0, None, &p.grid(GRID_POINTS)).unwrap();
        assert!(v.min_eigenvalues.iter().all(|&x| x.abs() < 1e-14));
        assert!(v.holds);
    }

    #[test]
    fn hyperbolic_threshold() {
        for (n, alpha) in [(1, 0.5), (2, 5.0), (3, 2.5)] {
            let p = RadialProfile::for_model(&ModelSpec::hyperbolic(n, alpha).unwrap());
            let t = curvature_threshold(&p, None, &p.grid(GRID_POINTS), 1e-8).unwrap();
            assert!((t - (alpha - n as f64 - 1.0)).abs() < 1e-6, "n = {n}: {t}");
        }
    }

    #[test]
    fn standard_model_fails_near_boundary() {
        for gamma in [0.5, 1.0, 2.0] {
            let p = RadialProfile::for_model(&ModelSpec::standard(2, gamma).unwrap());
            for sigma in [1.5, 3.0, 100.0] {
                for eps in [1e-3, 0.5] {
                    let s = curvature_at(&p, eps, Some(sigma), 0.81).unwrap();
                    assert!(s.min < 0.0, "γ = {gamma}, σ = {sigma}, ε = {eps}");
                }
            }
        }
    }

    #[test]
    fn closed_derivatives_match_differences() {
        for m in models() {
            let p = RadialProfile::for_model(&m);
            for &r in p.grid(40).iter().take(39) {
                let (a, b) = p.derivatives(r);
                for (expr, d) in [(&p.metric, a), (&p.weight, b)] {
                    let (d1, d2) = finite_difference(&|x| expr.eval(x), r, p.grid_end());
                    assert!(
                        (d1 - d[1]).abs() <= 1e-6 * (1.0 + d[1].abs()),
                        "{m} r = {r}: {d1} vs {}",
                        d[1]
                    );
                    assert!(
                        (d2 - d[2]).abs() <= 1e-3 * (1.0 + d[2].abs()),
                        "{m} r = {r}: {d2} vs {}",
                        d[2]
                    );
                }
            }
        }
    }

    #[test]
    fn profile_parsing() {
        let p = parse_profile("conformal:n=2,phi=r,psi=r-2*exp(r)").unwrap();
        assert_eq!(p.n, 2);
        assert!(parse_profile(&p.to_string()).is_ok());
        let h = parse_profile("hyperbolic:n=2,alpha=1").unwrap();
        assert_eq!(h.kind, ProfileKind::KahlerPotential);
        for bad in [
            "kahler:psi=r",
            "kahler:h=r",
            "kahler:h=r,psi=r,x=1",
            "kahler:h=r,h=r,psi=r",
            "kahler:h=r,psi=r,n=0",
        ] {
            assert!(parse_profile(bad).is_err(), "{bad}");
        }
    }
}
