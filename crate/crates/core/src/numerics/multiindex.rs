use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::gamma::ln_factorial;
use crate::error::{Error, Result};

/// Exponent vector J of the monomial z^J.
///
/// Ordered by total degree first; within a degree, larger leading exponents
/// come first, so degree 1 in two variables reads (1,0), (0,1).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    /// e_k (0-based).
    pub fn unit(n: usize, k: usize) -> Self {
        let mut e = vec![0; n];
        e[k] = 1;
        MultiIndex(e)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn get(&self, k: usize) -> u32 {
        self.0[k]
    }

    /// |J|.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// J!, exact while it fits in f64's integer range.
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&j| (1..=j).map(f64::from).product::<f64>())
            .product()
    }

    pub fn ln_factorial(&self) -> f64 {
        self.0.iter().map(|&j| ln_factorial(j)).sum()
    }

    /// J with entry k (0-based) raised by one.
    pub fn increment(&self, k: usize) -> Self {
        let mut e = self.0.clone();
        e[k] += 1;
        MultiIndex(e)
    }

    /// J with entry k lowered by one, or `None` when that entry is zero.
    pub fn decrement(&self, k: usize) -> Option<Self> {
        if self.0[k] == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[k] -= 1;
        Some(MultiIndex(e))
    }

    pub fn add(&self, other: &MultiIndex) -> Self {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// z^J evaluated at a real point.
    pub fn eval(&self, z: &[f64]) -> f64 {
        self.0
            .iter()
            .zip(z)
            .map(|(&j, &x)| x.powi(j as i32))
            .product()
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, j) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{j}")?;
        }
        write!(f, ")")
    }
}

impl From<Vec<u32>> for MultiIndex {
    fn from(v: Vec<u32>) -> Self {
        MultiIndex(v)
    }
}

/// All J with |J| = m in n variables, leading exponent descending.
pub fn enumerate_multiindices(n: usize, m: u32) -> Result<Vec<MultiIndex>> {
    if n == 0 {
        return Err(Error::domain("multi-indices need n ≥ 1"));
    }
    let mut out = Vec::new();
    let mut cur = vec![0u32; n];
    fill(&mut cur, 0, m, &mut out);
    Ok(out)
}

fn fill(cur: &mut Vec<u32>, pos: usize, left: u32, out: &mut Vec<MultiIndex>) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for j in (0..=left).rev() {
        cur[pos] = j;
        fill(cur, pos + 1, left - j, out);
    }
}

/// C(a, b) as f64.
pub fn binomial(a: u64, b: u64) -> f64 {
    if b > a {
        return 0.0;
    }
    let b = b.min(a - b);
    (0..b)
        .fold(1.0, |acc, i| acc * (a - i) as f64 / (i + 1) as f64)
        .round()
}
