//! ∂, its adjoint, and the Laplacians □̃₀, □̃₁ on degree blocks.

use num_complex::Complex64;
use serde::Serialize;

use crate::basis::NormEngine;
use crate::error::{Error, Result};
use crate::forms::{Component, FormCoefficients, Term};
use crate::models::ModelSpec;
use crate::numerics::linalg::{cholesky, lower_inverse, matmul, transpose};
use crate::numerics::{enumerate_multiindices, MultiIndex, SymmetricMatrix};

/// Relative asymmetry tolerated before a block is declared non-self-adjoint.
pub const SYMMETRY_TOL: f64 = 1e-12;

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

/// ∂_k z^J as (coefficient, exponent), or `None` when it vanishes.
fn partial(j: &MultiIndex, k: usize) -> Option<(f64, MultiIndex)> {
    j.decrement(k).map(|d| (j.get(k) as f64, d))
}

/// ∂ on (0,0)- and (1,0)-forms.
pub fn del(u: &FormCoefficients) -> Result<FormCoefficients> {
    let n = u.dim();
    match u.degree_p() {
        0 => {
            let mut out = FormCoefficients::zero(n, 1);
            for (j, _, z) in u.iter() {
                for k in 0..n {
                    if let Some((c, d)) = partial(j, k) {
                        out.add_term(d, Component::Dz(k), z * c)?;
                    }
                }
            }
            Ok(out)
        }
        1 => {
            // (∂u)_{jk} = ∂_j u_k − ∂_k u_j
            let mut out = FormCoefficients::zero(n, 2);
            for (j, c, z) in u.iter() {
                let Component::Dz(k) = c else { unreachable!() };
                for i in 0..n {
                    if i == k {
                        continue;
                    }
                    if let Some((a, d)) = partial(j, i) {
                        out.add_term(d, Component::Wedge(i, k), z * a)?;
                    }
                }
            }
            Ok(out)
        }
        p => Err(Error::Unsupported(format!("∂ on ({p},0)-forms"))),
    }
}

/// ∂* on (1,0)- and (2,0)-forms: c₁ Σ z^j u_j, and c₂ Σ_{r,s} z^r v_{rs} dz^s.
pub fn del_adjoint(model: &ModelSpec, v: &FormCoefficients) -> Result<FormCoefficients> {
    let n = model.dim();
    if v.dim() != n {
        return Err(Error::domain(format!(
            "form dimension {} does not match the model dimension {n}",
            v.dim()
        )));
    }
    match v.degree_p() {
        1 => {
            let c = model.duality_constant();
            let mut out = FormCoefficients::zero(n, 0);
            for (j, comp, z) in v.iter() {
                let Component::Dz(k) = comp else {
                    unreachable!()
                };
                out.add_term(j.increment(k), Component::Scalar, z * c)?;
            }
            Ok(out)
        }
        2 => {
            let c = model.adjoint_constant_2()?;
            let mut out = FormCoefficients::zero(n, 1);
            for (j, comp, z) in v.iter() {
                let Component::Wedge(r, s) = comp else {
                    unreachable!()
                };
                // v_{rs} = z, v_{sr} = −z
                out.add_term(j.increment(r), Component::Dz(s), z * c)?;
                out.add_term(j.increment(s), Component::Dz(r), -z * c)?;
            }
            Ok(out)
        }
        0 => Err(Error::domain("∂* is not defined on functions")),
        p => Err(Error::Unsupported(format!("∂* on ({p},0)-forms"))),
    }
}

/// □̃₀ = ∂*∂: z^J ↦ c|J| z^J.
pub fn box0_apply(model: &ModelSpec, f: &FormCoefficients) -> Result<FormCoefficients> {
    if f.degree_p() != 0 || f.dim() != model.dim() {
        return Err(Error::domain("□̃₀ acts on functions of the model dimension"));
    }
    let c = model.duality_constant();
    let mut out = FormCoefficients::zero(f.dim(), 0);
    for (j, comp, z) in f.iter() {
        out.add_term(j.clone(), comp, z * (c * j.degree() as f64))?;
    }
    Ok(out)
}

/// □̃₁ = ∂*∂ + ∂∂* on (1,0)-forms.
pub fn box1_apply(model: &ModelSpec, u: &FormCoefficients) -> Result<FormCoefficients> {
    let n = model.dim();
    if u.degree_p() != 1 || u.dim() != n {
        return Err(Error::domain(
            "□̃₁ acts on (1,0)-forms of the model dimension",
        ));
    }
    let mut out = FormCoefficients::zero(n, 1);
    match *model {
        ModelSpec::ConformalStandard { gamma, .. } => {
            // γu + [(1+γ) Σ_j z^j ∂_j u_k − Σ_j z^j ∂_k u_j] dz^k
            for (j, comp, z) in u.iter() {
                let Component::Dz(k) = comp else {
                    unreachable!()
                };
                let deg = j.degree() as f64;
                out.add_term(j.clone(), comp, z * (gamma + (1.0 + gamma) * deg))?;
                // the term z^i ∂_l (z^J dz^i) with l ≠ i lands on dz^l
                for l in 0..n {
                    if let Some((a, d)) = partial(j, l) {
                        out.add_term(d.increment(k), Component::Dz(l), -z * a)?;
                    }
                }
            }
        }
        _ => {
            let c = model.duality_constant();
            for (j, comp, z) in u.iter() {
                out.add_term(j.clone(), comp, z * (c * (1.0 + j.degree() as f64)))?;
            }
        }
    }
    Ok(out)
}

/// ∂*∂u + ∂∂*u evaluated by composition. On one-dimensional models ∂u is
/// the zero 2-form and its adjoint is taken as zero.
pub fn box1_by_composition(model: &ModelSpec, u: &FormCoefficients) -> Result<FormCoefficients> {
    let du = del(u)?;
    let first = if du.is_empty() && model.dim() == 1 {
        FormCoefficients::zero(1, 1)
    } else {
        del_adjoint(model, &du)?
    };
    first.add(&del(&del_adjoint(model, u)?)?)
}

/// Degree-m block of □̃_p (p ∈ {0, 1}) in an orthonormal basis obtained from
/// the monomials z^J·c, |J| = m, by Gram–Schmidt in basis order.
#[derive(Debug, Clone, Serialize)]
pub struct BlockOperator {
    pub model: ModelSpec,
    pub p: usize,
    pub m: u32,
    pub basis: Vec<Term>,
    pub matrix: SymmetricMatrix,
    /// √⟨t_i, t_i⟩ for each monomial t_i.
    #[serde(skip)]
    scales: Vec<f64>,
    /// Lower Cholesky factor of the normalized Gram matrix.
    #[serde(skip)]
    chol: Vec<f64>,
}

impl BlockOperator {
    pub fn order(&self) -> usize {
        self.basis.len()
    }

    /// Orthonormal coordinates of Σ x_i t_i.
    pub fn to_orthonormal(&self, x: &[f64]) -> Vec<f64> {
        let d = self.order();
        let xh: Vec<f64> = x.iter().zip(&self.scales).map(|(a, s)| a * s).collect();
        // y = Lᵀ x̂
        (0..d)
            .map(|k| (k..d).map(|i| self.chol[i * d + k] * xh[i]).sum())
            .collect()
    }

    /// Monomial coordinates x from orthonormal coordinates y.
    pub fn from_orthonormal(&self, y: &[f64]) -> Vec<f64> {
        let d = self.order();
        // solve Lᵀ x̂ = y
        let mut xh = vec![0.0; d];
        for k in (0..d).rev() {
            let s: f64 = ((k + 1)..d).map(|i| self.chol[i * d + k] * xh[i]).sum();
            xh[k] = (y[k] - s) / self.chol[k * d + k];
        }
        xh.iter().zip(&self.scales).map(|(a, s)| a / s).collect()
    }

    /// Coefficient vector of the block component of a form.
    pub fn coordinates(&self, u: &FormCoefficients) -> (Vec<f64>, Vec<f64>) {
        let re = self.basis.iter().map(|(j, c)| u.get(j, *c).re).collect();
        let im = self.basis.iter().map(|(j, c)| u.get(j, *c).im).collect();
        (re, im)
    }

    pub fn form(&self, re: &[f64], im: &[f64]) -> Result<FormCoefficients> {
        let mut out = FormCoefficients::zero(self.model.dim(), self.p);
        for (((j, c), a), b) in self.basis.iter().zip(re).zip(im) {
            out.add_term(j.clone(), *c, Complex64::new(*a, *b))?;
        }
        Ok(out)
    }
}

/// Monomial basis of the degree-m block of p-forms, empty when the
/// monomials are not square integrable.
pub fn block_basis(model: &ModelSpec, p: usize, m: u32) -> Result<Vec<Term>> {
    if !model.is_integrable(m, p) {
        return Ok(Vec::new());
    }
    let n = model.dim();
    let mut basis = Vec::new();
    for j in enumerate_multiindices(n, m)? {
        for c in Component::all(n, p) {
            basis.push((j.clone(), c));
        }
    }
    Ok(basis)
}

/// □̃₁ on the degree-m block, with the model's preferred norms.
pub fn assemble_block(model: &ModelSpec, m: u32) -> Result<BlockOperator> {
    assemble_block_with(&NormEngine::preferred(*model), 1, m)
}

pub fn assemble_block_with(engine: &NormEngine, p: usize, m: u32) -> Result<BlockOperator> {
    let model = *engine.model();
    let basis = block_basis(&model, p, m)?;
    let d = basis.len();
    if d == 0 {
        return Ok(BlockOperator {
            model,
            p,
            m,
            basis,
            matrix: SymmetricMatrix::from_fn(0, |_, _| 0.0),
            scales: Vec::new(),
            chol: Vec::new(),
        });
    }
    let index = |t: &Term| basis.iter().position(|b| b == t);

    // action[i][j]: coefficient of t_i in □̃(t_j)
    let mut action = vec![0.0; d * d];
    for (col, (j, c)) in basis.iter().enumerate() {
        let u = FormCoefficients::monomial(j.clone(), *c, real(1.0))?;
        let image = match p {
            0 => box0_apply(&model, &u)?,
            1 => box1_apply(&model, &u)?,
            _ => return Err(Error::Unsupported(format!("□̃_{p} blocks"))),
        };
        for (jj, cc, z) in image.iter() {
            let row = index(&(jj.clone(), cc)).ok_or_else(|| {
                Error::Invariant(format!(
                    "□̃_{p}(z^{j} {c}) leaves the degree-{m} block (term z^{jj} {cc})"
                ))
            })?;
            if z.im != 0.0 {
                return Err(Error::Invariant(
                    "□̃ has non-real monomial coefficients".into(),
                ));
            }
            action[row * d + col] = z.re;
        }
    }

    let gram = engine.gram(&basis)?;
    let scales: Vec<f64> = (0..d).map(|i| gram[i * d + i].sqrt()).collect();
    let g_hat: Vec<f64> = (0..d * d)
        .map(|k| gram[k] / (scales[k / d] * scales[k % d]))
        .collect();
    let a_hat: Vec<f64> = (0..d * d)
        .map(|k| action[k] * scales[k / d] / scales[k % d])
        .collect();
    let chol = cholesky(d, &g_hat).map_err(|i| {
        Error::Invariant(format!(
            "Gram matrix of the degree-{m} block is not positive definite (pivot {i})"
        ))
    })?;
    let l_inv = lower_inverse(d, &chol);
    // M = Lᵀ Â L^{−T}
    let dense = matmul(
        d,
        &matmul(d, &transpose(d, &chol), &a_hat),
        &transpose(d, &l_inv),
    );
    let matrix = SymmetricMatrix::symmetrize(d, &dense, SYMMETRY_TOL).map_err(|asymmetry| {
        Error::NotSelfAdjoint {
            degree: m as usize,
            asymmetry,
        }
    })?;
    Ok(BlockOperator {
        model,
        p,
        m,
        basis,
        matrix,
        scales,
        chol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::binomial;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn mono(j: &[u32], c: Component, z: f64) -> FormCoefficients {
        FormCoefficients::monomial(mi(j), c, real(z)).unwrap()
    }

    #[test]
    fn del_examples() {
        let u = mono(&[2, 1], Component::Scalar, 1.0);
        let du = del(&u).unwrap();
        assert_eq!(du.get(&mi(&[1, 1]), Component::Dz(0)), real(2.0));
        assert_eq!(du.get(&mi(&[2, 0]), Component::Dz(1)), real(1.0));
        assert_eq!(du.len(), 2);

        let v = del(&mono(&[0, 1], Component::Dz(0), 1.0)).unwrap();
        assert_eq!(v.get(&mi(&[0, 0]), Component::Wedge(0, 1)), real(-1.0));
        assert!(del(&v).is_err());
    }

    #[test]
    fn del_adjoint_examples() {
        let h = ModelSpec::hyperbolic(2, 2.0).unwrap();
        let f = del_adjoint(&h, &mono(&[0, 1], Component::Dz(0), 1.0)).unwrap();
        assert_eq!(f.get(&mi(&[1, 1]), Component::Scalar), real(2.0));

        let s = ModelSpec::standard(2, 1.0).unwrap();
        let g = del_adjoint(&s, &mono(&[0, 0], Component::Wedge(0, 1), 1.0)).unwrap();
        assert_eq!(g.get(&mi(&[1, 0]), Component::Dz(1)), real(2.0));
        assert_eq!(g.get(&mi(&[0, 1]), Component::Dz(0)), real(-2.0));
        assert_eq!(g.len(), 2);

        assert!(del_adjoint(&s, &FormCoefficients::zero(2, 2))
            .unwrap()
            .is_empty());
        assert!(del_adjoint(&s, &FormCoefficients::zero(2, 0)).is_err());
        let cigar = ModelSpec::cigar(5.0).unwrap();
        assert!(matches!(
            del_adjoint(&cigar, &FormCoefficients::zero(1, 2)),
            Err(Error::Unsupported(_))
        ));
    }

    #[test]
    fn box1_examples() {
        let g = 0.7;
        let s = ModelSpec::standard(2, g).unwrap();
        let out = box1_apply(&s, &mono(&[1, 0], Component::Dz(1), 1.0)).unwrap();
        assert!((out.get(&mi(&[1, 0]), Component::Dz(1)).re - (2.0 * g + 1.0)).abs() < 1e-15);
        assert_eq!(out.get(&mi(&[0, 1]), Component::Dz(0)), real(-1.0));
        assert_eq!(out.len(), 2);

        let h = ModelSpec::hyperbolic(3, 1.5).unwrap();
        let out = box1_apply(&h, &mono(&[1, 0, 2], Component::Dz(2), 1.0)).unwrap();
        assert_eq!(out.get(&mi(&[1, 0, 2]), Component::Dz(2)), real(1.5 * 4.0));

        let c = ModelSpec::cigar(5.0).unwrap();
        let out = box1_apply(&c, &mono(&[2], Component::Dz(0), 1.0)).unwrap();
        assert_eq!(out.get(&mi(&[2]), Component::Dz(0)), real(15.0));
    }

    fn all_models() -> Vec<ModelSpec> {
        vec![
            ModelSpec::segal_bargmann(1).unwrap(),
            ModelSpec::segal_bargmann(3).unwrap(),
            ModelSpec::hyperbolic(1, 0.5).unwrap(),
            ModelSpec::hyperbolic(2, 1.5).unwrap(),
            ModelSpec::standard(1, 2.0).unwrap(),
            ModelSpec::standard(2, 0.5).unwrap(),
            ModelSpec::standard(3, 1.25).unwrap(),
            ModelSpec::cigar(5.0).unwrap(),
        ]
    }

    #[test]
    fn laplacian_equals_composition_on_monomials() {
        for model in all_models() {
            let n = model.dim();
            for m in 0..=6 {
                for j in enumerate_multiindices(n, m).unwrap() {
                    for c in Component::all(n, 1) {
                        let u = FormCoefficients::monomial(j.clone(), c, real(1.0)).unwrap();
                        let a = box1_apply(&model, &u).unwrap();
                        let b = box1_by_composition(&model, &u).unwrap();
                        assert_eq!(a.max_diff(&b).unwrap(), 0.0, "{model} z^{j} {c}");
                        assert!(a.iter().all(|(jj, _, _)| jj.degree() == m));
                    }
                    let f = FormCoefficients::monomial(j.clone(), Component::Scalar, real(1.0))
                        .unwrap();
                    let a = box0_apply(&model, &f).unwrap();
                    let b = del_adjoint(&model, &del(&f).unwrap()).unwrap();
                    assert_eq!(a.max_diff(&b).unwrap(), 0.0);
                }
            }
        }
    }

    #[test]
    fn standard_block_n2_m1() {
        let b = assemble_block(&ModelSpec::standard(2, 1.0).unwrap(), 1).unwrap();
        let want = [
            [2.0, 0.0, 0.0, 0.0],
            [0.0, 3.0, -1.0, 0.0],
            [0.0, -1.0, 3.0, 0.0],
            [0.0, 0.0, 0.0, 2.0],
        ];
        for i in 0..4 {
            for k in 0..4 {
                assert!((b.matrix.get(i, k) - want[i][k]).abs() < 1e-13, "{i},{k}");
            }
        }
        assert_eq!(b.basis[1], (mi(&[1, 0]), Component::Dz(1)));
    }

    #[test]
    fn one_variable_standard_blocks_are_scalar() {
        for &g in &[0.3, 1.0, 4.0] {
            let model = ModelSpec::standard(1, g).unwrap();
            for m in 0..10 {
                let b = assemble_block(&model, m).unwrap();
                assert_eq!(b.order(), 1);
                assert!((b.matrix.get(0, 0) - (m as f64 + 1.0) * g).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn hyperbolic_blocks_are_scalar_despite_cross_terms() {
        let model = ModelSpec::hyperbolic(2, 1.0).unwrap();
        let b = assemble_block(&model, 2).unwrap();
        assert_eq!(b.order(), 6);
        for i in 0..6 {
            assert!((b.matrix.get(i, i) - 3.0).abs() < 1e-12);
        }
        assert!(b.matrix.max_off_diagonal() < 1e-12);
    }

    #[test]
    fn block_orders() {
        for n in 1..=3usize {
            let model = ModelSpec::standard(n, 1.0).unwrap();
            for m in 0..=4u32 {
                let b = assemble_block(&model, m).unwrap();
                assert_eq!(
                    b.order() as f64,
                    n as f64 * binomial(m as u64 + n as u64 - 1, n as u64 - 1)
                );
            }
        }
        let c = ModelSpec::cigar(5.0).unwrap();
        assert_eq!(assemble_block(&c, 3).unwrap().order(), 1);
        assert_eq!(assemble_block(&c, 4).unwrap().order(), 0);
    }

    #[test]
    fn orthonormal_coordinates_round_trip() {
        let engine = NormEngine::preferred(ModelSpec::hyperbolic(3, 0.8).unwrap());
        let b = assemble_block_with(&engine, 1, 2).unwrap();
        let x: Vec<f64> = (0..b.order()).map(|i| (i as f64 * 0.37).sin()).collect();
        let y = b.to_orthonormal(&x);
        let back = b.from_orthonormal(&y);
        for (a, c) in x.iter().zip(&back) {
            assert!((a - c).abs() < 1e-12);
        }
        // Parseval against the Gram inner product
        let u = b.form(&x, &vec![0.0; x.len()]).unwrap();
        let norm = engine.norm_sq(&u).unwrap();
        let y2: f64 = y.iter().map(|v| v * v).sum();
        assert!(((norm - y2) / norm).abs() < 1e-12);
    }
}
