//! The four concrete geometric models and their radial data.
//!
//! Every model is radial, and all densities are written in t = |z|².

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ModelSpec {
    /// ℂⁿ, flat metric, weight |z|².
    SegalBargmann { n: usize },
    /// Unit ball, Bergman–Kähler metric −∂∂̄ log(1−|z|²), weight α/(1−|z|²).
    HyperbolicExponential { n: usize, alpha: f64 },
    /// Unit ball, metric (1−|z|²)⁻¹δ, weight α log(1−|z|²) with γ = 1−n−α.
    ConformalStandard { n: usize, gamma: f64 },
    /// ℂ with the metric (1+|z|²)⁻¹ dz⊗dz̄ and weight α log(1+|z|²).
    Cigar { alpha: f64 },
}

impl ModelSpec {
    pub fn segal_bargmann(n: usize) -> Result<Self> {
        ModelSpec::SegalBargmann { n }.validated()
    }

    pub fn hyperbolic(n: usize, alpha: f64) -> Result<Self> {
        ModelSpec::HyperbolicExponential { n, alpha }.validated()
    }

    pub fn standard(n: usize, gamma: f64) -> Result<Self> {
        ModelSpec::ConformalStandard { n, gamma }.validated()
    }

    /// Standard model from the weight exponent α, with γ = 1 − n − α.
    pub fn standard_from_alpha(n: usize, alpha: f64) -> Result<Self> {
        Self::standard(n, 1.0 - n as f64 - alpha)
    }

    pub fn cigar(alpha: f64) -> Result<Self> {
        ModelSpec::Cigar { alpha }.validated()
    }

    pub fn validated(self) -> Result<Self> {
        let n = self.dim();
        if n == 0 {
            return Err(Error::Parse("dimension n ≥ 1 required".into()));
        }
        match self {
            ModelSpec::HyperbolicExponential { alpha, .. }
                if !(alpha > 0.0 && alpha.is_finite()) =>
            {
                Err(Error::Parse(format!(
                    "α > 0 required for the exponential weight, got {alpha}"
                )))
            }
            ModelSpec::ConformalStandard { gamma, .. } if !(gamma > 0.0 && gamma.is_finite()) => {
                Err(Error::Parse(format!("γ > 0 required, got {gamma}")))
            }
            ModelSpec::Cigar { alpha } if !(alpha >= 2.0 && alpha.is_finite()) => {
                Err(Error::Parse(format!(
                    "α ≥ 2 required for a nontrivial cigar Bergman space, got {alpha}"
                )))
            }
            m => Ok(m),
        }
    }

    /// Complex dimension n.
    pub fn dim(&self) -> usize {
        match *self {
            ModelSpec::SegalBargmann { n }
            | ModelSpec::HyperbolicExponential { n, .. }
            | ModelSpec::ConformalStandard { n, .. } => n,
            ModelSpec::Cigar { .. } => 1,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ModelSpec::SegalBargmann { .. } => "segal-bargmann",
            ModelSpec::HyperbolicExponential { .. } => "hyperbolic",
            ModelSpec::ConformalStandard { .. } => "standard",
            ModelSpec::Cigar { .. } => "cigar",
        }
    }

    /// Named parameters in grammar order.
    pub fn parameters(&self) -> Vec<(&'static str, f64)> {
        match *self {
            ModelSpec::SegalBargmann { n } => vec![("n", n as f64)],
            ModelSpec::HyperbolicExponential { n, alpha } => {
                vec![("n", n as f64), ("alpha", alpha)]
            }
            ModelSpec::ConformalStandard { n, gamma } => vec![("n", n as f64), ("gamma", gamma)],
            ModelSpec::Cigar { alpha } => vec![("alpha", alpha)],
        }
    }

    /// Weight exponent α of the standard model, α = 1 − n − γ.
    pub fn standard_alpha(&self) -> Option<f64> {
        match *self {
            ModelSpec::ConformalStandard { n, gamma } => Some(1.0 - n as f64 - gamma),
            _ => None,
        }
    }

    /// Ball models live on t ∈ [0, 1), the others on t ≥ 0.
    pub fn is_ball(&self) -> bool {
        matches!(
            self,
            ModelSpec::HyperbolicExponential { .. } | ModelSpec::ConformalStandard { .. }
        )
    }

    /// The constant c with ∂*(Σ u_j dz^j) = c Σ z^j u_j.
    pub fn duality_constant(&self) -> f64 {
        match *self {
            ModelSpec::SegalBargmann { .. } => 1.0,
            ModelSpec::HyperbolicExponential { alpha, .. } => alpha,
            ModelSpec::ConformalStandard { gamma, .. } => gamma,
            ModelSpec::Cigar { alpha } => alpha,
        }
    }

    /// The constant c₂ with ∂*v = c₂ Σ_{r,s} z^r v_{rs} dz^s on (2,0)-forms.
    pub fn adjoint_constant_2(&self) -> Result<f64> {
        match *self {
            ModelSpec::SegalBargmann { .. } => Ok(1.0),
            ModelSpec::HyperbolicExponential { alpha, .. } => Ok(alpha),
            ModelSpec::ConformalStandard { gamma, .. } => Ok(gamma + 1.0),
            ModelSpec::Cigar { .. } => Err(Error::Unsupported(
                "the cigar model has no (2,0)-forms".into(),
            )),
        }
    }

    fn check_t(&self, t: f64) -> Result<()> {
        let ok = if self.is_ball() {
            (0.0..1.0).contains(&t)
        } else {
            t >= 0.0 && t.is_finite()
        };
        if ok {
            Ok(())
        } else {
            Err(Error::domain(format!(
                "t = {t} outside the domain of the {} model",
                self.name()
            )))
        }
    }

    /// Density of e^{−ψ} dvol_h against Lebesgue measure at |z|² = t.
    pub fn radial_weight_density(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.ln_density(t).exp())
    }

    pub(crate) fn ln_density(&self, t: f64) -> f64 {
        match *self {
            ModelSpec::SegalBargmann { .. } => -t,
            ModelSpec::HyperbolicExponential { n, alpha } => {
                -(n as f64 + 1.0) * (-t).ln_1p() - alpha / (1.0 - t)
            }
            ModelSpec::ConformalStandard { gamma, .. } => (gamma - 1.0) * (-t).ln_1p(),
            ModelSpec::Cigar { alpha } => -(alpha + 1.0) * t.ln_1p(),
        }
    }

    /// The radial factor φ(t) with h^{jk̄} = φ(t)·(δ_{jk} − κ z^j z̄^k); the
    /// pointwise norm of a p-form carries φ^p. κ = 1 for the hyperbolic model
    /// and 0 otherwise.
    pub fn metric_factor(&self, t: f64) -> f64 {
        match self {
            ModelSpec::SegalBargmann { .. } => 1.0,
            ModelSpec::HyperbolicExponential { .. } | ModelSpec::ConformalStandard { .. } => {
                1.0 - t
            }
            ModelSpec::Cigar { .. } => 1.0 + t,
        }
    }

    /// Scale of |dz^k|²_h raised to the form degree, at |z|² = t. For the
    /// hyperbolic model this is the factor in front of the diagonal monomial
    /// pairing; its cross terms are handled by the basis module.
    pub fn metric_component_scale(&self, t: f64, p: usize) -> Result<f64> {
        if p > 2 {
            return Err(Error::domain(format!(
                "form degree {p} not supported (p ∈ {{0,1,2}})"
            )));
        }
        if p == 2 && matches!(self, ModelSpec::Cigar { .. }) {
            return Err(Error::Unsupported(
                "the cigar model has no (2,0)-forms".into(),
            ));
        }
        self.check_t(t)?;
        Ok(self.metric_factor(t).powi(p as i32))
    }

    /// Whether h^{jk̄} has the −z^j z̄^k correction.
    pub fn has_cross_term(&self) -> bool {
        matches!(self, ModelSpec::HyperbolicExponential { .. })
    }

    /// dim A²_{(p,0)}, or `None` when infinite.
    pub fn bergman_dimension(&self, p: usize) -> Option<usize> {
        match self {
            ModelSpec::Cigar { .. } => {
                Some(self.max_integrable_degree(p).map_or(0, |m| m as usize + 1))
            }
            _ => None,
        }
    }

    /// Largest monomial degree m for which z^J (times a p-form frame) has
    /// finite norm. Unbounded (`None`) except for the cigar, where the
    /// condition is m < α − p.
    pub fn max_integrable_degree(&self, p: usize) -> Option<u32> {
        match *self {
            ModelSpec::Cigar { alpha } => {
                let bound = alpha - p as f64;
                if bound <= 0.0 {
                    return None;
                }
                // largest integer strictly below the bound
                let m = bound.ceil() - 1.0;
                Some(m as u32)
            }
            _ => Some(u32::MAX),
        }
    }

    pub fn is_integrable(&self, degree: u32, p: usize) -> bool {
        match *self {
            ModelSpec::Cigar { alpha } => (degree as f64) < alpha - p as f64,
            _ => true,
        }
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:", self.name())?;
        for (i, (k, v)) in self.parameters().into_iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{k}={v}")?;
        }
        Ok(())
    }
}

impl FromStr for ModelSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_model(s)
    }
}

/// Parses `segal-bargmann:n=2`, `hyperbolic:n=2,alpha=1.5`,
/// `standard:n=2,gamma=1`, `cigar:alpha=5`.
pub fn parse_model(s: &str) -> Result<ModelSpec> {
    let (name, rest) = s.trim().split_once(':').unwrap_or((s.trim(), ""));
    let mut n: Option<usize> = None;
    let mut alpha: Option<f64> = None;
    let mut gamma: Option<f64> = None;
    for item in rest.split(',').map(str::trim).filter(|x| !x.is_empty()) {
        let (key, value) = item
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("expected key=value, got `{item}`")))?;
        let num = || -> Result<f64> {
            value
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("`{value}` is not a number")))
        };
        let slot_taken = |k: &str| Error::Parse(format!("parameter `{k}` given twice"));
        match key.trim() {
            "n" => {
                let v: usize = value.trim().parse().map_err(|_| {
                    Error::Parse(format!("n must be a positive integer, got `{value}`"))
                })?;
                if n.replace(v).is_some() {
                    return Err(slot_taken("n"));
                }
            }
            "alpha" => {
                if alpha.replace(num()?).is_some() {
                    return Err(slot_taken("alpha"));
                }
            }
            "gamma" => {
                if gamma.replace(num()?).is_some() {
                    return Err(slot_taken("gamma"));
                }
            }
            other => return Err(Error::Parse(format!("unknown parameter `{other}`"))),
        }
    }
    let missing = |k: &str| Error::Parse(format!("model `{name}` needs parameter `{k}`"));
    let unexpected = |k: &str| Error::Parse(format!("model `{name}` takes no parameter `{k}`"));
    match name {
        "segal-bargmann" => {
            if alpha.is_some() {
                return Err(unexpected("alpha"));
            }
            if gamma.is_some() {
                return Err(unexpected("gamma"));
            }
            ModelSpec::segal_bargmann(n.ok_or_else(|| missing("n"))?)
        }
        "hyperbolic" => {
            if gamma.is_some() {
                return Err(unexpected("gamma"));
            }
            ModelSpec::hyperbolic(
                n.ok_or_else(|| missing("n"))?,
                alpha.ok_or_else(|| missing("alpha"))?,
            )
        }
        "standard" => {
            let n = n.ok_or_else(|| missing("n"))?;
            match (gamma, alpha) {
                (Some(g), None) => ModelSpec::standard(n, g),
                (None, Some(a)) => ModelSpec::standard_from_alpha(n, a),
                (Some(_), Some(_)) => {
                    Err(Error::Parse("give either gamma or alpha, not both".into()))
                }
                (None, None) => Err(missing("gamma")),
            }
        }
        "cigar" => {
            if n.is_some_and(|n| n != 1) {
                return Err(Error::Parse("the cigar model is one-dimensional".into()));
            }
            if gamma.is_some() {
                return Err(unexpected("gamma"));
            }
            ModelSpec::cigar(alpha.ok_or_else(|| missing("alpha"))?)
        }
        other => Err(Error::Parse(format!(
            "unknown model `{other}` (expected segal-bargmann, hyperbolic, standard or cigar)"
        ))),
    }
}
