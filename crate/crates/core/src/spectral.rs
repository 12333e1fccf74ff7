//! Block spectra of □̃₀ and □̃₁, the Neumann operator Ñ₁, and the canonical
//! solution f = ∂*Ñ₁η of ∂f = η.

use std::collections::BTreeSet;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::basis::NormEngine;
use crate::error::{Error, Result};
use crate::forms::{CoefficientEntry, Component, FormCoefficients};
use crate::models::ModelSpec;
use crate::numerics::linalg::CLUSTER_TOL;
use crate::numerics::{binomial, cluster, eigh, Eigen, MultiIndex};
use crate::operators::{assemble_block_with, del, del_adjoint, BlockOperator};

pub const DEFAULT_MMAX: u32 = 8;
/// Eigenvalues at or below this multiple of the block norm count as zero.
const KERNEL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Laplacian {
    /// □̃₀ on functions.
    Box0,
    /// □̃₁ on (1,0)-forms.
    Box1,
}

impl Laplacian {
    pub fn degree(&self) -> usize {
        match self {
            Laplacian::Box0 => 0,
            Laplacian::Box1 => 1,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Cluster {
    pub value: f64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct BlockSpectrum {
    pub m: u32,
    pub order: usize,
    pub eigenvalues: Vec<f64>,
    pub clusters: Vec<Cluster>,
    pub gershgorin: (f64, f64),
}

#[derive(Debug, Clone, Serialize)]
pub struct EigenvalueEntry {
    pub value: f64,
    pub multiplicity: usize,
    /// Block of origin.
    pub m: u32,
}

#[derive(Debug, Clone, Serialize)]
pub struct SpectralReport {
    pub model: ModelSpec,
    pub operator: Laplacian,
    pub m_max: u32,
    pub blocks: Vec<BlockSpectrum>,
    /// Per-block clusters, ordered by block then value.
    pub eigenvalues: Vec<EigenvalueEntry>,
    /// Clusters merged across blocks.
    pub aggregated: Vec<Cluster>,
    pub lambda_min: f64,
}

impl SpectralReport {
    /// Every eigenvalue with repetition, ascending.
    pub fn all_eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self
            .blocks
            .iter()
            .flat_map(|b| b.eigenvalues.iter().copied())
            .collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

fn block_spectrum(block: &BlockOperator) -> Result<(BlockSpectrum, Eigen)> {
    let e = if block.order() == 0 {
        Eigen {
            values: vec![],
            vectors: vec![],
        }
    } else {
        eigh(&block.matrix)?
    };
    let clusters = cluster(&e.values)
        .into_iter()
        .map(|(value, multiplicity)| Cluster {
            value,
            multiplicity,
        })
        .collect();
    let gershgorin = if block.order() == 0 {
        (f64::NAN, f64::NAN)
    } else {
        block.matrix.gershgorin()
    };
    Ok((
        BlockSpectrum {
            m: block.m,
            order: block.order(),
            eigenvalues: e.values.clone(),
            clusters,
            gershgorin,
        },
        e,
    ))
}

pub fn spectrum(model: &ModelSpec, m_max: u32, operator: Laplacian) -> Result<SpectralReport> {
    spectrum_with(&NormEngine::preferred(*model), m_max, operator)
}

/// Spectra of the blocks m = 0..=m_max, computed in parallel and reported in
/// block order.
pub fn spectrum_with(
    engine: &NormEngine,
    m_max: u32,
    operator: Laplacian,
) -> Result<SpectralReport> {
    let model = *engine.model();
    let p = operator.degree();
    let results: Vec<Result<BlockSpectrum>> = (0..=m_max)
        .into_par_iter()
        .map(|m| Ok(block_spectrum(&assemble_block_with(engine, p, m)?)?.0))
        .collect();
    let blocks: Vec<BlockSpectrum> = results
        .into_iter()
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .filter(|b| b.order > 0)
        .collect();

    if let (ModelSpec::HyperbolicExponential { n, alpha }, Laplacian::Box1) = (model, operator) {
        for b in &blocks {
            let want = alpha * (b.m as f64 + 1.0);
            let mult = n as f64 * binomial(b.m as u64 + n as u64 - 1, n as u64 - 1);
            let ok = b.clusters.len() == 1
                && (b.clusters[0].value - want).abs() <= 1e-9 * want
                && b.clusters[0].multiplicity as f64 == mult;
            if !ok {
                return Err(Error::Invariant(format!(
                    "hyperbolic block m = {} should be {want} with multiplicity {mult}, got {:?}",
                    b.m, b.clusters
                )));
            }
        }
    }

    let eigenvalues: Vec<EigenvalueEntry> = blocks
        .iter()
        .flat_map(|b| {
            b.clusters.iter().map(move |c| EigenvalueEntry {
                value: c.value,
                multiplicity: c.multiplicity,
                m: b.m,
            })
        })
        .collect();
    let mut sorted: Vec<(f64, usize)> = eigenvalues
        .iter()
        .map(|e| (e.value, e.multiplicity))
        .collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut aggregated: Vec<Cluster> = Vec::new();
    for (v, k) in sorted {
        match aggregated.last_mut() {
            Some(c) if (v - c.value).abs() <= CLUSTER_TOL * (1.0 + c.value.abs()) => {
                c.multiplicity += k
            }
            _ => aggregated.push(Cluster {
                value: v,
                multiplicity: k,
            }),
        }
    }
    let lambda_min = aggregated.first().map_or(f64::NAN, |c| c.value);
    let coercive = matches!(
        model,
        ModelSpec::HyperbolicExponential { .. } | ModelSpec::ConformalStandard { .. }
    );
    if operator == Laplacian::Box1 && coercive && !(lambda_min > 0.0) {
        return Err(Error::Invariant(format!(
            "□̃₁ should be coercive on the {model} model, λ_min = {lambda_min}"
        )));
    }
    Ok(SpectralReport {
        model,
        operator,
        m_max,
        blocks,
        eigenvalues,
        aggregated,
        lambda_min,
    })
}

/// Inverts □̃_p blockwise through the eigendecomposition.
pub struct NeumannSolver<'a> {
    engine: &'a NormEngine,
}

/// Result of a blockwise inversion: the solution and the smallest block
/// eigenvalue that was used.
#[derive(Debug, Clone)]
pub struct NeumannResult {
    pub solution: FormCoefficients,
    pub lambda_min: f64,
}

impl<'a> NeumannSolver<'a> {
    pub fn new(engine: &'a NormEngine) -> Self {
        NeumannSolver { engine }
    }

    pub fn solve(&self, p: usize, eta: &FormCoefficients) -> Result<NeumannResult> {
        let model = *self.engine.model();
        if eta.dim() != model.dim() || eta.degree_p() != p {
            return Err(Error::domain(format!(
                "expected a ({p},0)-form in {} variables, got a ({},0)-form in {}",
                model.dim(),
                eta.degree_p(),
                eta.dim()
            )));
        }
        let degrees: BTreeSet<u32> = eta.iter().map(|(j, _, _)| j.degree()).collect();
        let mut out = FormCoefficients::zero(model.dim(), p);
        let mut lambda_min = f64::INFINITY;
        for m in degrees {
            if !model.is_integrable(m, p) {
                return Err(Error::Divergent(format!(
                    "degree-{m} terms of η are not in the Bergman space of the {model} model"
                )));
            }
            let block = assemble_block_with(self.engine, p, m)?;
            let (_, e) = block_spectrum(&block)?;
            let scale = e.values.iter().fold(0.0f64, |a, v| a.max(v.abs())).max(1.0);
            let kernel: Vec<usize> = (0..e.values.len())
                .filter(|&i| e.values[i].abs() <= KERNEL_TOL * scale)
                .collect();
            if !kernel.is_empty() {
                let names: Vec<String> = kernel
                    .iter()
                    .map(|&i| {
                        let x = block.from_orthonormal(&e.vectors[i]);
                        let f = block
                            .form(&x, &vec![0.0; x.len()])
                            .map(|f| f.pruned(1e-12).to_string());
                        f.unwrap_or_default()
                    })
                    .collect();
                return Err(Error::SingularBlock {
                    degree: m as usize,
                    kernel: names.join("; "),
                });
            }
            lambda_min = lambda_min.min(e.values[0]);
            let (re, im) = block.coordinates(eta);
            let solve = |x: &[f64]| -> Vec<f64> {
                let y = block.to_orthonormal(x);
                let c: Vec<f64> = e
                    .project(&y)
                    .iter()
                    .zip(&e.values)
                    .map(|(a, l)| a / l)
                    .collect();
                block.from_orthonormal(&e.combine(&c))
            };
            out = out.add(&block.form(&solve(&re), &solve(&im))?)?;
        }
        Ok(NeumannResult {
            solution: out,
            lambda_min,
        })
    }
}

/// Ñ₁η.
pub fn neumann_apply(model: &ModelSpec, eta: &FormCoefficients) -> Result<FormCoefficients> {
    let engine = NormEngine::preferred(*model);
    Ok(NeumannSolver::new(&engine).solve(1, eta)?.solution)
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveReport {
    pub model: ModelSpec,
    pub eta: Vec<CoefficientEntry>,
    pub f: Vec<CoefficientEntry>,
    /// max |∂f − η| over coefficients.
    pub residual_dbar: f64,
    pub eta_norm_sq: f64,
    pub f_norm_sq: f64,
    /// The constant c in ‖f‖² ≤ c⁻¹‖η‖².
    pub sharp_constant: f64,
    /// c·‖f‖²/‖η‖².
    pub norm_ratio: f64,
    /// c / (smallest eigenvalue of □̃₁ on the blocks η occupies); the
    /// spectral gap bounds norm_ratio by this.
    pub spectral_bound: f64,
    /// |⟨f, 1⟩|/‖f‖.
    pub orthogonality_defect: f64,
    /// b·‖f‖²/‖η‖² for the lower bound b of □̃₁ on the blocks used; the
    /// generic estimate asks for at most 1.
    pub generic_ratio: f64,
}

/// Checks ∂η = 0 up to rounding.
pub fn check_closed(eta: &FormCoefficients) -> Result<()> {
    let d = del(eta)?;
    let deg = eta.max_degree().unwrap_or(0) as f64;
    let tol = 1e-12 * (1.0 + eta.max_abs()) * (1.0 + deg);
    if let Some((j, c, z)) = d.iter().find(|(_, _, z)| z.norm() > tol) {
        let (a, b) = match c {
            Component::Wedge(a, b) => (a + 1, b + 1),
            _ => (0, 0),
        };
        return Err(Error::NotClosed {
            component: format!("z^{j} dz{a}^dz{b} (∂η_{b}/∂z{a} ≠ ∂η_{a}/∂z{b})"),
            value: z.norm(),
        });
    }
    Ok(())
}

pub fn solve_dbar(model: &ModelSpec, eta: &FormCoefficients) -> Result<SolveReport> {
    solve_dbar_with(&NormEngine::preferred(*model), eta)
}

pub fn solve_dbar_with(engine: &NormEngine, eta: &FormCoefficients) -> Result<SolveReport> {
    let model = *engine.model();
    if eta.degree_p() != 1 || eta.dim() != model.dim() {
        return Err(Error::domain(format!(
            "η must be a (1,0)-form in {} variables",
            model.dim()
        )));
    }
    check_closed(eta)?;
    let neumann = NeumannSolver::new(engine).solve(1, eta)?;
    let f = del_adjoint(&model, &neumann.solution)?;
    let residual_dbar = del(&f)?.max_diff(eta)?;
    let eta_norm_sq = engine.norm_sq(eta)?;
    let f_norm_sq = engine.norm_sq(&f)?;
    let c = model.duality_constant();
    let ratio = |k: f64| {
        if eta_norm_sq > 0.0 {
            k * f_norm_sq / eta_norm_sq
        } else {
            0.0
        }
    };
    let one = FormCoefficients::monomial(
        MultiIndex::zero(model.dim()),
        Component::Scalar,
        Complex64::new(1.0, 0.0),
    )?;
    let orthogonality_defect = if f_norm_sq > 0.0 {
        engine.inner(&f, &one)?.norm() / f_norm_sq.sqrt()
    } else {
        0.0
    };
    let lambda = if neumann.lambda_min.is_finite() {
        neumann.lambda_min
    } else {
        c
    };
    Ok(SolveReport {
        model,
        eta: eta.to_entries(),
        f: f.to_entries(),
        residual_dbar,
        eta_norm_sq,
        f_norm_sq,
        sharp_constant: c,
        norm_ratio: ratio(c),
        spectral_bound: c / lambda,
        orthogonality_defect,
        generic_ratio: ratio(lambda),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct UnboundednessReport {
    pub model: ModelSpec,
    pub n_terms: usize,
    /// Σ_{k=1}^{N} d_k²/c²_{k+1} from the norm table.
    pub s_n: f64,
    /// Σ_{k=1}^{N} α/(k+1).
    pub s_n_closed: f64,
    /// S_N/(α ln N).
    pub s_over_log: f64,
    /// Σ_{k=1}^{N} α² c_k²/(k² d²_{k−1}): ‖∂*G_N‖² for G_N = Σ_k z^{k−1}dz/(k d_{k−1}).
    pub t_n: f64,
    /// Σ_{k=1}^{N} α/k.
    pub t_n_closed: f64,
    /// max over k ≤ min(N, 30) of |d_k²/c²_{k+1} − α/(k+1)|/(α/(k+1)).
    pub max_ratio_defect: f64,
}

/// Partial sums showing that ∂ and ∂* are unbounded on the one-dimensional
/// hyperbolic model.
pub fn unboundedness_demo(model: &ModelSpec, n_terms: usize) -> Result<UnboundednessReport> {
    let ModelSpec::HyperbolicExponential { n: 1, alpha } = *model else {
        return Err(Error::Unsupported(
            "the unboundedness demonstration needs the hyperbolic model with n = 1".into(),
        ));
    };
    if n_terms < 10 {
        return Err(Error::domain(
            "the unboundedness demonstration needs N ≥ 10",
        ));
    }
    let engine = NormEngine::preferred(*model);
    let ln_c = |k: u32| engine.ln_squared_norm(&MultiIndex::new(vec![k]), Component::Scalar);
    let ln_d = |k: u32| engine.ln_squared_norm(&MultiIndex::new(vec![k]), Component::Dz(0));
    let terms: Vec<Result<(f64, f64)>> = (1..=n_terms as u32)
        .into_par_iter()
        .map(|k| {
            let s = (ln_d(k)? - ln_c(k + 1)?).exp();
            let t = alpha * alpha * (ln_c(k)? - ln_d(k - 1)?).exp() / (k as f64 * k as f64);
            Ok((s, t))
        })
        .collect();
    let terms = terms.into_iter().collect::<Result<Vec<_>>>()?;
    let s_n: f64 = terms.iter().map(|t| t.0).sum();
    let t_n: f64 = terms.iter().map(|t| t.1).sum();
    let s_n_closed: f64 = (1..=n_terms).map(|k| alpha / (k as f64 + 1.0)).sum();
    let t_n_closed: f64 = (1..=n_terms).map(|k| alpha / k as f64).sum();
    let max_ratio_defect = terms
        .iter()
        .take(30)
        .enumerate()
        .map(|(i, t)| {
            let want = alpha / (i as f64 + 2.0);
            ((t.0 - want) / want).abs()
        })
        .fold(0.0, f64::max);
    Ok(UnboundednessReport {
        model: *model,
        n_terms,
        s_n,
        s_n_closed,
        s_over_log: s_n / (alpha * (n_terms as f64).ln()),
        t_n,
        t_n_closed,
        max_ratio_defect,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn hyperbolic_multiplicities() {
        let r = spectrum(&ModelSpec::hyperbolic(2, 1.0).unwrap(), 3, Laplacian::Box1).unwrap();
        let got: Vec<(f64, usize)> = r
            .aggregated
            .iter()
            .map(|c| (c.value, c.multiplicity))
            .collect();
        for ((v, k), (wv, wk)) in got.iter().zip([(1.0, 2), (2.0, 4), (3.0, 6), (4.0, 8)]) {
            assert!((v - wv).abs() < 1e-10);
            assert_eq!(*k, wk);
        }
        assert!((r.lambda_min - 1.0).abs() < 1e-12);
    }

    #[test]
    fn standard_low_blocks() {
        let r = spectrum(&ModelSpec::standard(2, 1.0).unwrap(), 1, Laplacian::Box1).unwrap();
        let all = r.all_eigenvalues();
        for (a, b) in all.iter().zip([1.0, 1.0, 2.0, 2.0, 2.0, 4.0]) {
            assert!((a - b).abs() < 1e-10);
        }
        assert_eq!(all.len(), 6);
    }

    #[test]
    fn cigar_scalar_laplacian() {
        let r = spectrum(&ModelSpec::cigar(5.0).unwrap(), 8, Laplacian::Box0).unwrap();
        let all = r.all_eigenvalues();
        assert_eq!(all.len(), 5);
        for (a, b) in all.iter().zip([0.0, 5.0, 10.0, 15.0, 20.0]) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn neumann_examples() {
        let h = ModelSpec::hyperbolic(1, 2.0).unwrap();
        let eta = FormCoefficients::monomial(mi(&[1]), Component::Dz(0), c(1.0)).unwrap();
        let x = neumann_apply(&h, &eta).unwrap();
        assert!((x.get(&mi(&[1]), Component::Dz(0)).re - 0.25).abs() < 1e-13);
        assert_eq!(x.len(), 1);

        let s = ModelSpec::standard(2, 1.0).unwrap();
        let eta = FormCoefficients::monomial(mi(&[0, 0]), Component::Dz(0), c(1.0)).unwrap();
        let x = neumann_apply(&s, &eta).unwrap();
        assert!(x.max_diff(&eta).unwrap() < 1e-13);

        assert!(neumann_apply(&s, &FormCoefficients::zero(2, 1))
            .unwrap()
            .is_empty());
    }

    #[test]
    fn scalar_laplacian_kernel_is_reported() {
        let engine = NormEngine::preferred(ModelSpec::cigar(5.0).unwrap());
        let f = FormCoefficients::monomial(mi(&[0]), Component::Scalar, c(1.0)).unwrap();
        let err = NeumannSolver::new(&engine).solve(0, &f).unwrap_err();
        assert!(
            matches!(err, Error::SingularBlock { degree: 0, .. }),
            "{err}"
        );
    }

    #[test]
    fn solve_examples() {
        let s = ModelSpec::standard(2, 1.0).unwrap();
        let eta = FormCoefficients::monomial(mi(&[0, 0]), Component::Dz(0), c(1.0)).unwrap();
        let r = solve_dbar(&s, &eta).unwrap();
        assert!((r.norm_ratio - 1.0).abs() < 1e-12);
        assert_eq!(r.f.len(), 1);
        assert_eq!(r.f[0].j, vec![1, 0]);
        assert!((r.f[0].re - 1.0).abs() < 1e-13);

        let s1 = ModelSpec::standard(1, 2.0).unwrap();
        let eta = FormCoefficients::monomial(mi(&[2]), Component::Dz(0), c(3.0)).unwrap();
        let r = solve_dbar(&s1, &eta).unwrap();
        assert!((r.f[0].re - 1.0).abs() < 1e-13 && r.f[0].j == vec![3]);
        // γ‖z³‖²/‖3z² dz‖² = γ · π/10 / (9 · 2π/(4·5·6)) with γ = 2
        assert!((r.norm_ratio - 1.0 / 3.0).abs() < 1e-12, "{}", r.norm_ratio);

        let h = ModelSpec::hyperbolic(2, 1.0).unwrap();
        let eta = FormCoefficients::from_terms(
            2,
            1,
            [
                (mi(&[0, 0]), Component::Dz(0), c(1.0)),
                (mi(&[0, 0]), Component::Dz(1), c(1.0)),
            ],
        )
        .unwrap();
        let r = solve_dbar(&h, &eta).unwrap();
        assert!((r.norm_ratio - 1.0).abs() < 1e-9);
    }

    #[test]
    fn non_closed_input_rejected() {
        let s = ModelSpec::standard(2, 1.0).unwrap();
        let eta = FormCoefficients::monomial(mi(&[0, 1]), Component::Dz(0), c(1.0)).unwrap();
        assert!(matches!(solve_dbar(&s, &eta), Err(Error::NotClosed { .. })));
    }

    #[test]
    fn unboundedness_small() {
        let r = unboundedness_demo(&ModelSpec::hyperbolic(1, 1.0).unwrap(), 10).unwrap();
        assert!((r.s_n - 2.0198773448773446).abs() < 1e-8, "{}", r.s_n);
        assert!(r.max_ratio_defect < 1e-8);
        assert!(((r.t_n - r.t_n_closed) / r.t_n_closed).abs() < 1e-8);
        assert!(unboundedness_demo(&ModelSpec::hyperbolic(1, 1.0).unwrap(), 9).is_err());
        assert!(unboundedness_demo(&ModelSpec::hyperbolic(2, 1.0).unwrap(), 10).is_err());
    }
}
