//! Holomorphic (p,0)-forms with polynomial coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::MultiIndex;

/// Frame element of a (p,0)-form. Indices are 0-based; `Wedge(j, k)` always
/// has j < k and stands for dz^j ∧ dz^k.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Component {
    Scalar,
    Dz(usize),
    Wedge(usize, usize),
}

impl Component {
    pub fn degree(&self) -> usize {
        match self {
            Component::Scalar => 0,
            Component::Dz(_) => 1,
            Component::Wedge(..) => 2,
        }
    }

    /// All frame elements of degree p in dimension n, in storage order.
    pub fn all(n: usize, p: usize) -> Vec<Component> {
        match p {
            0 => vec![Component::Scalar],
            1 => (0..n).map(Component::Dz).collect(),
            2 => (0..n)
                .flat_map(|j| ((j + 1)..n).map(move |k| Component::Wedge(j, k)))
                .collect(),
            _ => Vec::new(),
        }
    }

    /// Indices carried by the frame element, ascending.
    pub fn indices(&self) -> Vec<usize> {
        match *self {
            Component::Scalar => vec![],
            Component::Dz(k) => vec![k],
            Component::Wedge(j, k) => vec![j, k],
        }
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Component::Scalar => write!(f, "1"),
            Component::Dz(k) => write!(f, "dz{}", k + 1),
            Component::Wedge(j, k) => write!(f, "dz{}^dz{}", j + 1, k + 1),
        }
    }
}

pub type Term = (MultiIndex, Component);

/// Finite table of complex coefficients of z^J times a frame element.
/// Zero coefficients are never stored.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FormCoefficients {
    n: usize,
    p: usize,
    table: BTreeMap<Term, Complex64>,
}

impl FormCoefficients {
    pub fn zero(n: usize, p: usize) -> Self {
        FormCoefficients {
            n,
            p,
            table: BTreeMap::new(),
        }
    }

    /// Single monomial term.
    pub fn monomial(j: MultiIndex, c: Component, coef: Complex64) -> Result<Self> {
        let mut f = Self::zero(j.dim(), c.degree());
        f.add_term(j, c, coef)?;
        Ok(f)
    }

    pub fn from_terms(
        n: usize,
        p: usize,
        terms: impl IntoIterator<Item = (MultiIndex, Component, Complex64)>,
    ) -> Result<Self> {
        let mut f = Self::zero(n, p);
        for (j, c, z) in terms {
            f.add_term(j, c, z)?;
        }
        Ok(f)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn degree_p(&self) -> usize {
        self.p
    }

    /// Adds `coef` to the coefficient of z^J·c. A wedge with j > k is stored
    /// as −coef on (k, j); dz^j ∧ dz^j is zero.
    pub fn add_term(&mut self, j: MultiIndex, c: Component, coef: Complex64) -> Result<()> {
        if j.dim() != self.n {
            return Err(Error::domain(format!(
                "multi-index {j} has length {}, expected {}",
                j.dim(),
                self.n
            )));
        }
        if c.degree() != self.p {
            return Err(Error::domain(format!(
                "component {c} does not belong to a {}-form",
                self.p
            )));
        }
        let (c, coef) = match c {
            Component::Dz(k) if k >= self.n => {
                return Err(Error::domain(format!(
                    "component dz{} out of range for n = {}",
                    k + 1,
                    self.n
                )))
            }
            Component::Wedge(a, b) if a.max(b) >= self.n => {
                return Err(Error::domain(format!(
                    "wedge component out of range for n = {}",
                    self.n
                )))
            }
            Component::Wedge(a, b) if a == b => return Ok(()),
            Component::Wedge(a, b) if a > b => (Component::Wedge(b, a), -coef),
            c => (c, coef),
        };
        if !(coef.re.is_finite() && coef.im.is_finite()) {
            return Err(Error::domain("form coefficients must be finite"));
        }
        let key = (j, c);
        let v = self.table.get(&key).copied().unwrap_or_default() + coef;
        if v == Complex64::new(0.0, 0.0) {
            self.table.remove(&key);
        } else {
            self.table.insert(key, v);
        }
        Ok(())
    }

    pub fn get(&self, j: &MultiIndex, c: Component) -> Complex64 {
        self.table.get(&(j.clone(), c)).copied().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&MultiIndex, Component, Complex64)> {
        self.table.iter().map(|((j, c), z)| (j, *c, *z))
    }

    pub fn len(&self) -> usize {
        self.table.len()
    }

    pub fn is_empty(&self) -> bool {
        self.table.is_empty()
    }

    pub fn max_abs(&self) -> f64 {
        self.table.values().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest monomial degree present, or `None` for the zero form.
    pub fn max_degree(&self) -> Option<u32> {
        self.table.keys().map(|(j, _)| j.degree()).max()
    }

    pub fn min_degree(&self) -> Option<u32> {
        self.table.keys().map(|(j, _)| j.degree()).min()
    }

    /// Part with monomial degree exactly m.
    pub fn homogeneous_part(&self, m: u32) -> Self {
        let table = self
            .table
            .iter()
            .filter(|((j, _), _)| j.degree() == m)
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        FormCoefficients {
            n: self.n,
            p: self.p,
            table,
        }
    }

    pub fn scale(&self, s: Complex64) -> Self {
        let mut out = Self::zero(self.n, self.p);
        for (k, v) in &self.table {
            let w = v * s;
            if w != Complex64::new(0.0, 0.0) {
                out.table.insert(k.clone(), w);
            }
        }
        out
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.n != other.n || self.p != other.p {
            return Err(Error::domain(format!(
                "form shapes differ: (n={}, p={}) vs (n={}, p={})",
                self.n, self.p, other.n, other.p
            )));
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for ((j, c), z) in &other.table {
            out.add_term(j.clone(), *c, *z)?;
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// Coefficientwise max |self − other|.
    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        Ok(self.sub(other)?.max_abs())
    }

    /// Drops coefficients with modulus ≤ tol.
    pub fn pruned(&self, tol: f64) -> Self {
        let table = self
            .table
            .iter()
            .filter(|(_, v)| v.norm() > tol)
            .map(|(k, v)| (k.clone(), *v))
            .collect();
        FormCoefficients {
            n: self.n,
            p: self.p,
            table,
        }
    }
}

impl fmt::Display for FormCoefficients {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.table.is_empty() {
            return write!(f, "0");
        }
        for (i, ((j, c), z)) in self.table.iter().enumerate() {
            if i > 0 {
                write!(f, " + ")?;
            }
            write!(f, "({}{:+}i) z^{}", z.re, z.im, j)?;
            if *c != Component::Scalar {
                write!(f, " {c}")?;
            }
        }
        Ok(())
    }
}

/// Entry of the JSON coefficient list: `k` is the 1-based dz index, absent
/// or 0 for functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientEntry {
    #[serde(rename = "J")]
    pub j: Vec<u32>,
    #[serde(default)]
    pub k: usize,
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl FormCoefficients {
    /// Builds a (1,0)-form (or a function when every `k` is 0) from entries.
    pub fn from_entries(n: usize, entries: &[CoefficientEntry]) -> Result<Self> {
        let p = usize::from(entries.iter().any(|e| e.k > 0));
        if p == 1 && entries.iter().any(|e| e.k == 0) {
            return Err(Error::Parse(
                "mixing function (k = 0) and 1-form entries".into(),
            ));
        }
        let mut f = Self::zero(n, p);
        for e in entries {
            let c = if e.k == 0 {
                Component::Scalar
            } else {
                Component::Dz(e.k - 1)
            };
            f.add_term(MultiIndex::new(e.j.clone()), c, Complex64::new(e.re, e.im))?;
        }
        Ok(f)
    }

    /// Inverse of [`FormCoefficients::from_entries`]; 2-forms are not encoded.
    pub fn to_entries(&self) -> Vec<CoefficientEntry> {
        self.iter()
            .filter_map(|(j, c, z)| {
                let k = match c {
                    Component::Scalar => 0,
                    Component::Dz(k) => k + 1,
                    Component::Wedge(..) => return None,
                };
                Some(CoefficientEntry {
                    j: j.exponents().to_vec(),
                    k,
                    re: z.re,
                    im: z.im,
                })
            })
            .collect()
    }
}
