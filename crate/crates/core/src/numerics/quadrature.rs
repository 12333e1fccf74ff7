//! Gauss–Legendre (on [0, 1]) and Gauss–Laguerre (on [0, ∞), weight e^{-s})
//! rules.
//!
//! Laguerre weights underflow f64 beyond roughly 180 nodes, so every rule
//! also carries its weights in log form; [`QuadratureRule::integrate_ln`]
//! works entirely in that representation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RuleKind {
    /// Unit weight on [0, 1].
    GaussLegendre,
    /// Weight e^{-s} on [0, ∞).
    GaussLaguerre,
}

#[derive(Debug, Clone)]
pub struct QuadratureRule {
    kind: RuleKind,
    nodes: Vec<f64>,
    weights: Vec<f64>,
    ln_weights: Vec<f64>,
}

/// Above this size Laguerre root guesses come from the Jacobi matrix.
const GOLUB_WELSCH_THRESHOLD: usize = 60;
const NEWTON_MAX_ITER: usize = 100;

pub fn make_rule(kind: RuleKind, n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::domain("quadrature rule needs at least one node"));
    }
    match kind {
        RuleKind::GaussLegendre => Ok(legendre(n)),
        RuleKind::GaussLaguerre => laguerre(n),
    }
}

impl QuadratureRule {
    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Weights; for large Laguerre rules the tail entries may underflow to 0.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn ln_weights(&self) -> &[f64] {
        &self.ln_weights
    }

    /// Σ wᵢ f(xᵢ).
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// ln Σ wᵢ exp(g(xᵢ)) for a log-integrand g; the integrand is positive
    /// by construction. Nodes where g is −∞ contribute nothing.
    pub fn integrate_ln<G: Fn(f64) -> f64>(&self, g: G) -> f64 {
        let vals: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.ln_weights)
            .map(|(&x, &lw)| lw + g(x))
            .collect();
        let max = vals.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return max;
        }
        max + vals.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
    }
}

fn legendre(n: usize) -> QuadratureRule {
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for i in 0..n {
        // roots on [-1, 1], descending from the cosine guess
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, p_prev) = legendre_pair(n, x);
            dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1e-3) {
                let (p, p_prev) = legendre_pair(n, x);
                dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes.push(0.5 * (1.0 + x));
        weights.push(0.5 * w);
    }
    nodes.reverse();
    weights.reverse();
    let ln_weights = weights.iter().map(|w| w.ln()).collect();
    QuadratureRule {
        kind: RuleKind::GaussLegendre,
        nodes,
        weights,
        ln_weights,
    }
}

/// (P_n(x), P_{n-1}(x)).
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (p0, 0.0);
    }
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0) * x * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

/// Laguerre recurrence with running rescaling: returns (L_n, L_{n-1}, s)
/// where the true values are the returned ones times e^s.
fn laguerre_scaled(n: usize, x: f64) -> (f64, f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = 1.0 - x;
    let mut scale = 0.0;
    if n == 0 {
        return (1.0, 0.0, 0.0);
    }
    for k in 1..n {
        let k = k as f64;
        let p2 = ((2.0 * k + 1.0 - x) * p1 - k * p0) / (k + 1.0);
        p0 = p1;
        p1 = p2;
        let m = p1.abs().max(p0.abs());
        if m > 1e100 {
            p0 /= m;
            p1 /= m;
            scale += m.ln();
        }
    }
    (p1, p0, scale)
}

fn laguerre(n: usize) -> Result<QuadratureRule> {
    let guesses = if n > GOLUB_WELSCH_THRESHOLD {
        let diag: Vec<f64> = (0..n).map(|i| 2.0 * i as f64 + 1.0).collect();
        let off: Vec<f64> = (1..n).map(|i| i as f64).collect();
        let mut ev = tridiagonal_eigenvalues(diag, off)?;
        ev.sort_by(|a, b| a.total_cmp(b));
        ev
    } else {
        Vec::new()
    };

    let nf = n as f64;
    let mut nodes: Vec<f64> = Vec::with_capacity(n);
    let mut ln_weights = Vec::with_capacity(n);
    let mut z = 0.0;
    for i in 0..n {
        if !guesses.is_empty() {
            z = guesses[i];
        } else if i == 0 {
            z = 3.0 / (1.0 + 2.4 * nf);
        } else if i == 1 {
            z += 15.0 / (1.0 + 2.5 * nf);
        } else {
            let ai = (i - 1) as f64;
            z += (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2]);
        }
        let mut last = f64::INFINITY;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, p_prev, _) = laguerre_scaled(n, z);
            // L_n' = n (L_n − L_{n−1}) / x; the common scale cancels
            let dp = nf * (p - p_prev) / z;
            let dz = p / dp;
            z -= dz;
            last = dz.abs();
            if last <= 4.0 * f64::EPSILON * z.abs() {
                break;
            }
        }
        // rounding noise in the recurrence can keep the last step at a few ulps
        if last > 1e-12 * z.abs() || !z.is_finite() || z <= 0.0 {
            return Err(Error::NoConvergence {
                sweeps: NEWTON_MAX_ITER,
                off: z,
            });
        }
        let (_, p_prev, scale) = laguerre_scaled(n, z);
        // w = x / (n L_{n−1}(x))²
        let lw = z.ln() - 2.0 * nf.ln() - 2.0 * (p_prev.abs().ln() + scale);
        nodes.push(z);
        ln_weights.push(lw);
    }
    if nodes.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Invariant(format!(
            "Gauss–Laguerre nodes for n = {n} not strictly increasing"
        )));
    }
    let weights = ln_weights.iter().map(|lw: &f64| lw.exp()).collect();
    Ok(QuadratureRule {
        kind: RuleKind::GaussLaguerre,
        nodes,
        weights,
        ln_weights,
    })
}

/// Eigenvalues of a symmetric tridiagonal matrix by implicit QL.
fn tridiagonal_eigenvalues(mut d: Vec<f64>, off: Vec<f64>) -> Result<Vec<f64>> {
    let n = d.len();
    let mut e = off;
    e.push(0.0);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NoConvergence {
                    sweeps: iter,
                    off: e[l].abs(),
                });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut i = m;
            let mut deflated = false;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::gamma::ln_factorial;

    #[test]
    fn midpoint_rule() {
        let r = make_rule(RuleKind::GaussLegendre, 1).unwrap();
        assert!((r.nodes()[0] - 0.5).abs() < 1e-15);
        assert!((r.weights()[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_nodes_rejected() {
        assert!(make_rule(RuleKind::GaussLaguerre, 0).is_err());
        assert!(make_rule(RuleKind::GaussLegendre, 0).is_err());
    }

    #[test]
    fn laguerre_gamma_four() {
        let r = make_rule(RuleKind::GaussLaguerre, 20).unwrap();
        let v = r.integrate(|s| s * s * s);
        assert!((v - 6.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn legendre_beta_moment() {
        let r = make_rule(RuleKind::GaussLegendre, 40).unwrap();
        let v = r.integrate(|t| t.powi(5) * (1.0 - t).powi(3));
        assert!((v - 1.0 / 504.0).abs() < 1e-12);
    }

    #[test]
    fn exactness_on_polynomial_moments() {
        for n in [5, 10, 20, 40] {
            let leg = make_rule(RuleKind::GaussLegendre, n).unwrap();
            let lag = make_rule(RuleKind::GaussLaguerre, n).unwrap();
            for k in 0..(2 * n) {
                let got = leg.integrate(|t| t.powi(k as i32));
                let want = 1.0 / (k as f64 + 1.0);
                assert!(((got - want) / want).abs() < 1e-11, "legendre n={n} k={k}");

                let got = lag.integrate_ln(|s| k as f64 * s.ln());
                let want = ln_factorial(k as u32);
                assert!(
                    (got - want).abs() < 1e-11,
                    "laguerre n={n} k={k}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn rule_shape_invariants() {
        for kind in [RuleKind::GaussLegendre, RuleKind::GaussLaguerre] {
            for n in [1, 2, 7, 60, 61, 150, 400] {
                let r = make_rule(kind, n).unwrap();
                assert_eq!(r.len(), n);
                assert!(r.nodes().windows(2).all(|w| w[0] < w[1]), "{kind:?} {n}");
                assert!(r.ln_weights().iter().all(|w| w.is_finite()));
                match kind {
                    RuleKind::GaussLegendre => {
                        assert!(r.nodes().iter().all(|&x| x > 0.0 && x < 1.0));
                        assert!(r.weights().iter().all(|&w| w > 0.0));
                        assert!((r.weights().iter().sum::<f64>() - 1.0).abs() < 1e-13);
                    }
                    RuleKind::GaussLaguerre => {
                        assert!(r.nodes().iter().all(|&x| x > 0.0));
                        assert!(r.integrate_ln(|_| 0.0).abs() < 1e-10, "{n}");
                    }
                }
            }
        }
    }

    #[test]
    fn newton_and_golub_welsch_agree() {
        // 60 uses the asymptotic guesses, the Jacobi-matrix path kicks in above
        let a = make_rule(RuleKind::GaussLaguerre, 60).unwrap();
        let diag: Vec<f64> = (0..60).map(|i| 2.0 * i as f64 + 1.0).collect();
        let off: Vec<f64> = (1..60).map(|i| i as f64).collect();
        let mut ev = tridiagonal_eigenvalues(diag, off).unwrap();
        ev.sort_by(|a, b| a.total_cmp(b));
        for (x, e) in a.nodes().iter().zip(&ev) {
            assert!((x - e).abs() < 1e-9 * x.max(1.0), "{x} vs {e}");
        }
    }
}
