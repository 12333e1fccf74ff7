//! Versioned JSON envelopes and CSV tables for the command-line verbs.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::basis::{verify_duality_identity, NormEngine, NormMethod};
use crate::error::{Error, Result};
use crate::forms::Component;
use crate::models::ModelSpec;
use crate::numerics::enumerate_multiindices;
use crate::operators::BlockOperator;
use crate::spectral::SpectralReport;

pub const SCHEMA: u32 = 1;
pub const TOOL: &str = "bergman";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const NORMS_IDENTITIES: &[&str] = &[
    "squared norm of z^J dz^K as angular factor times radial moment",
    "norm duality: c‖z^(J+e_k)‖² equals the pairing of ∂z^(J+e_k) with z^J dz^k",
];
pub const BLOCK_IDENTITIES: &[&str] =
    &["degree-m monomial forms span an invariant subspace of the complex Laplacian"];
pub const SPECTRUM_IDENTITIES: &[&str] = &[
    "degree-m monomial forms span an invariant subspace of the complex Laplacian",
    "hyperbolic blocks are α(m+1) times the identity",
    "coercivity of the complex Laplacian on (1,0)-forms",
];
pub const SOLVE_IDENTITIES: &[&str] = &[
    "canonical solution f = ∂*Ñ₁η of ∂f = η",
    "sharp estimate c‖f‖² ≤ ‖η‖² with equality exactly for constant η",
];
pub const GEOMETRY_IDENTITIES: &[&str] = &[
    "holomorphicity of (∂̄ψ − τ̄)♯ as constancy of its radial coefficient",
    "torsion trace τ_j = (n−1)φ̃′ z̄_j for conformal metrics",
    "curvature criterion i∂∂̄ψ + Θ − μ iT∘T̄ ≥ ε ω_h",
];

#[derive(Debug, Clone, Serialize)]
pub struct Header {
    pub tool: &'static str,
    pub version: &'static str,
    pub model: Option<String>,
    pub parameters: BTreeMap<String, f64>,
    pub identities: Vec<&'static str>,
}

impl Header {
    pub fn new(model: Option<&ModelSpec>, identities: &[&'static str]) -> Self {
        Header {
            tool: TOOL,
            version: VERSION,
            model: model.map(|m| m.to_string()),
            parameters: model.map_or_else(BTreeMap::new, |m| {
                m.parameters()
                    .into_iter()
                    .map(|(k, v)| (k.to_string(), v))
                    .collect()
            }),
            identities: identities.to_vec(),
        }
    }
}

#[derive(Debug, Serialize)]
struct Envelope<'a, T: Serialize> {
    schema: u32,
    header: &'a Header,
    #[serde(flatten)]
    body: &'a T,
}

/// Pretty JSON of `{schema, header, ...body}` with a trailing newline.
pub fn to_json<T: Serialize>(header: &Header, body: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Envelope {
        schema: SCHEMA,
        header,
        body,
    })
    .map_err(|e| Error::Invariant(format!("report serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Basis element as (J, k) with k the 1-based dz index, 0 for functions.
#[derive(Debug, Clone, Serialize)]
pub struct BasisLabel(pub Vec<u32>, pub usize);

#[derive(Debug, Clone, Serialize)]
pub struct BlockJson {
    pub model: String,
    pub p: usize,
    pub m: u32,
    pub basis: Vec<BasisLabel>,
    pub matrix: Vec<Vec<f64>>,
}

impl From<&BlockOperator> for BlockJson {
    fn from(b: &BlockOperator) -> Self {
        let basis = b
            .basis
            .iter()
            .map(|(j, c)| {
                let k = match c {
                    Component::Dz(k) => k + 1,
                    _ => 0,
                };
                BasisLabel(j.exponents().to_vec(), k)
            })
            .collect();
        BlockJson {
            model: b.model.to_string(),
            p: b.p,
            m: b.m,
            basis,
            matrix: b.matrix.rows(),
        }
    }
}

/// One row of the norms table.
#[derive(Debug, Clone, Serialize)]
pub struct NormRow {
    pub model: String,
    pub p: usize,
    #[serde(rename = "J")]
    pub j: String,
    pub k: String,
    pub closed_form: Option<f64>,
    pub quadrature: f64,
    pub rel_diff: Option<f64>,
    pub duality_residual: Option<f64>,
}

/// Norm rows for every monomial p-form of degree ≤ max_degree with finite
/// norm, in multi-index order then component order.
pub fn norm_rows(
    model: &ModelSpec,
    p: usize,
    max_degree: u32,
    nodes: usize,
) -> Result<Vec<NormRow>> {
    if p > 2 || (p == 2 && model.dim() < 2) {
        return Err(Error::domain(format!(
            "no monomial {p}-forms in {} variables",
            model.dim()
        )));
    }
    let closed = match NormEngine::new(*model, NormMethod::ClosedForm, nodes) {
        Ok(e) => Some(e),
        Err(Error::Unsupported(_)) => None,
        Err(e) => return Err(e),
    };
    let quad = NormEngine::new(*model, NormMethod::Quadrature, nodes)?;
    let top = model
        .max_integrable_degree(p)
        .map_or(max_degree, |t| t.min(max_degree));
    if model.max_integrable_degree(p).is_none() && matches!(model, ModelSpec::Cigar { .. }) {
        return Ok(Vec::new());
    }
    let mut terms = Vec::new();
    for m in 0..=top {
        for j in enumerate_multiindices(model.dim(), m)? {
            for c in Component::all(model.dim(), p) {
                terms.push((j.clone(), c));
            }
        }
    }
    terms
        .into_par_iter()
        .map(|(j, c)| {
            let q = quad.squared_norm(&j, c)?;
            let cf = closed.as_ref().map(|e| e.squared_norm(&j, c)).transpose()?;
            let duality = match c {
                Component::Dz(k) if model.is_integrable(j.degree() + 1, 0) => {
                    let engine = closed.as_ref().unwrap_or(&quad);
                    Some(verify_duality_identity(engine, &j, k)?)
                }
                _ => None,
            };
            let k = match c {
                Component::Scalar => "0".to_string(),
                Component::Dz(k) => (k + 1).to_string(),
                Component::Wedge(a, b) => format!("{}^{}", a + 1, b + 1),
            };
            Ok(NormRow {
                model: model.to_string(),
                p,
                j: j.to_string(),
                k,
                closed_form: cf,
                quadrature: q,
                rel_diff: cf.map(|v| (q - v).abs() / v),
                duality_residual: duality,
            })
        })
        .collect()
}

fn csv_error(e: impl std::fmt::Display) -> Error {
    Error::Invariant(format!("CSV encoding failed: {e}"))
}

fn finish_csv(w: csv::Writer<Vec<u8>>) -> Result<String> {
    String::from_utf8(w.into_inner().map_err(csv_error)?).map_err(csv_error)
}

pub fn norms_csv(rows: &[NormRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r).map_err(csv_error)?;
    }
    if rows.is_empty() {
        w.write_record([
            "model",
            "p",
            "J",
            "k",
            "closed_form",
            "quadrature",
            "rel_diff",
            "duality_residual",
        ])
        .map_err(csv_error)?;
    }
    finish_csv(w)
}

/// Columns m, value, multiplicity.
pub fn spectrum_csv(report: &SpectralReport) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["m", "value", "multiplicity"])
        .map_err(csv_error)?;
    for e in &report.eigenvalues {
        w.write_record([
            e.m.to_string(),
            e.value.to_string(),
            e.multiplicity.to_string(),
        ])
        .map_err(csv_error)?;
    }
    finish_csv(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::DEFAULT_NODES;
    use crate::operators::assemble_block;
    use crate::spectral::{spectrum, Laplacian};

    #[test]
    fn envelope_shape() {
        let m = ModelSpec::standard(2, 1.0).unwrap();
        let b = assemble_block(&m, 1).unwrap();
        let s = to_json(
            &Header::new(Some(&m), BLOCK_IDENTITIES),
            &BlockJson::from(&b),
        )
        .unwrap();
        let v: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["header"]["parameters"]["gamma"], 1.0);
        assert_eq!(v["m"], 1);
        assert_eq!(v["basis"][0], serde_json::json!([[1, 0], 1]));
        assert_eq!(v["matrix"].as_array().unwrap().len(), 4);
    }

    #[test]
    fn norms_table() {
        let m = ModelSpec::standard(2, 1.5).unwrap();
        let rows = norm_rows(&m, 1, 2, DEFAULT_NODES).unwrap();
        assert_eq!(rows.len(), 2 * (1 + 2 + 3));
        for r in &rows {
            assert!(r.rel_diff.unwrap() < 1e-10 && r.duality_residual.unwrap() < 1e-12);
        }
        let csv = norms_csv(&rows).unwrap();
        assert!(csv.starts_with("model,p,J,k,closed_form,quadrature,rel_diff,duality_residual\n"));
        assert_eq!(csv.lines().count(), rows.len() + 1);

        let c = norm_rows(&ModelSpec::cigar(5.0).unwrap(), 0, 10, DEFAULT_NODES).unwrap();
        assert_eq!(c.len(), 5);
        assert!(c
            .iter()
            .all(|r| r.closed_form.is_none() && r.duality_residual.is_none()));
    }

    #[test]
    fn spectrum_table() {
        let r = spectrum(&ModelSpec::cigar(5.0).unwrap(), 8, Laplacian::Box1).unwrap();
        let csv = spectrum_csv(&r).unwrap();
        assert_eq!(csv.lines().count(), 5);
    }
}
