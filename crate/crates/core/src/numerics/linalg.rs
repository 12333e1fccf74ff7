//! Small dense linear algebra: symmetric matrices, cyclic Jacobi, Cholesky.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Off-diagonal Frobenius threshold relative to ‖M‖_F.
pub const JACOBI_TOL: f64 = 1e-14;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Relative tolerance under which two eigenvalues count as one.
pub const CLUSTER_TOL: f64 = 1e-8;

/// Real symmetric matrix, stored row-major. Symmetry is exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<f64>>", into = "Vec<Vec<f64>>")]
pub struct SymmetricMatrix {
    order: usize,
    entries: Vec<f64>,
}

impl SymmetricMatrix {
    pub fn identity(order: usize) -> Self {
        Self::from_fn(order, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    /// Builds from the upper triangle of `f`; the lower triangle mirrors it.
    pub fn from_fn(order: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut entries = vec![0.0; order * order];
        for i in 0..order {
            for j in i..order {
                let v = f(i, j);
                entries[i * order + j] = v;
                entries[j * order + i] = v;
            }
        }
        SymmetricMatrix { order, entries }
    }

    /// Rows must be square and exactly symmetric.
    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let order = rows.len();
        if order == 0 {
            return Err(Error::domain("symmetric matrix must have positive order"));
        }
        if rows.iter().any(|r| r.len() != order) {
            return Err(Error::domain(
                "symmetric matrix rows must all have length equal to the order",
            ));
        }
        for i in 0..order {
            for j in 0..i {
                if rows[i][j] != rows[j][i] {
                    return Err(Error::domain(format!(
                        "entries ({i},{j}) = {} and ({j},{i}) = {} differ",
                        rows[i][j], rows[j][i]
                    )));
                }
            }
        }
        Ok(SymmetricMatrix {
            order,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Averages a nearly symmetric row-major square matrix after checking that
    /// max|A − Aᵀ| ≤ tol·‖A‖_F. Returns the asymmetry on failure.
    pub fn symmetrize(order: usize, dense: &[f64], tol: f64) -> std::result::Result<Self, f64> {
        assert_eq!(dense.len(), order * order);
        let norm = dense.iter().map(|x| x * x).sum::<f64>().sqrt();
        let mut asym: f64 = 0.0;
        for i in 0..order {
            for j in 0..i {
                asym = asym.max((dense[i * order + j] - dense[j * order + i]).abs());
            }
        }
        if asym > tol * norm {
            return Err(asym);
        }
        Ok(Self::from_fn(order, |i, j| {
            0.5 * (dense[i * order + j] + dense[j * order + i])
        }))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.order + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.entries
            .chunks(self.order)
            .map(|r| r.to_vec())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }

    pub fn max_off_diagonal(&self) -> f64 {
        let n = self.order;
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m = m.max(self.get(i, j).abs());
                }
            }
        }
        m
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        self.entries
            .chunks(self.order)
            .map(|r| r.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Union of the Geršgorin discs, as an interval.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.order;
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let radius: f64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| self.get(i, j).abs())
                .sum();
            lo = lo.min(self.get(i, i) - radius);
            hi = hi.max(self.get(i, i) + radius);
        }
        (lo, hi)
    }
}

impl TryFrom<Vec<Vec<f64>>> for SymmetricMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<f64>>) -> Result<Self> {
        Self::from_rows(rows)
    }
}

impl From<SymmetricMatrix> for Vec<Vec<f64>> {
    fn from(m: SymmetricMatrix) -> Self {
        m.rows()
    }
}

#[derive(Debug, Clone)]
pub struct Eigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// `vectors[i]` belongs to `values[i]`.
    pub vectors: Vec<Vec<f64>>,
}

impl Eigen {
    /// Vᵀx.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        self.vectors
            .iter()
            .map(|v| v.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Σ cᵢ vᵢ.
    pub fn combine(&self, c: &[f64]) -> Vec<f64> {
        let n = self.values.len();
        let mut out = vec![0.0; n];
        for (ci, v) in c.iter().zip(&self.vectors) {
            for (o, vi) in out.iter_mut().zip(v) {
                *o += ci * vi;
            }
        }
        out
    }
}

/// Eigen-decomposition by cyclic Jacobi rotations.
pub fn eigh(m: &SymmetricMatrix) -> Result<Eigen> {
    if m.entries.iter().any(|x| !x.is_finite()) {
        return Err(Error::domain("eigh requires finite matrix entries"));
    }
    let n = m.order;
    let mut a = m.entries.clone();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    let norm = m.frobenius_norm();
    let off = |a: &[f64]| -> f64 {
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += a[i * n + j] * a[i * n + j];
                }
            }
        }
        s.sqrt()
    };

    let mut sweeps = 0;
    loop {
        let o = off(&a);
        if o <= JACOBI_TOL * norm {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::NoConvergence { sweeps, off: o });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].total_cmp(&a[j * n + j]).then(i.cmp(&j)));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|k| v[k * n + i]).collect())
        .collect();
    Ok(Eigen { values, vectors })
}

/// Groups ascending eigenvalues into (representative, multiplicity) clusters.
pub fn cluster(values: &[f64]) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize, f64)> = Vec::new();
    for &x in values {
        match out.last_mut() {
            Some((rep, count, first))
                if (x - *first).abs() <= CLUSTER_TOL * (1.0 + first.abs()) =>
            {
                *rep += (x - *rep) / (*count as f64 + 1.0);
                *count += 1;
            }
            _ => out.push((x, 1, x)),
        }
    }
    out.into_iter().map(|(rep, c, _)| (rep, c)).collect()
}

/// Lower Cholesky factor of a row-major SPD matrix. Fails with the index of
/// the first non-positive pivot.
pub fn cholesky(n: usize, a: &[f64]) -> std::result::Result<Vec<f64>, usize> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(j);
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Ok(l)
}

/// Inverse of a lower-triangular matrix.
pub fn lower_inverse(n: usize, l: &[f64]) -> Vec<f64> {
    let mut inv = vec![0.0; n * n];
    for j in 0..n {
        inv[j * n + j] = 1.0 / l[j * n + j];
        for i in (j + 1)..n {
            let mut s = 0.0;
            for k in j..i {
                s += l[i * n + k] * inv[k * n + j];
            }
            inv[i * n + j] = -s / l[i * n + i];
        }
    }
    inv
}

/// Row-major product of square matrices.
pub fn matmul(n: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut c = vec![0.0; n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..n {
                c[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    c
}

pub fn transpose(n: usize, a: &[f64]) -> Vec<f64> {
    let mut t = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            t[j * n + i] = a[i * n + j];
        }
    }
    t
}

pub fn matvec(n: usize, a: &[f64], x: &[f64]) -> Vec<f64> {
    (0..n)
        .map(|i| (0..n).map(|j| a[i * n + j] * x[j]).sum())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_symmetric(n: usize, rng: &mut impl Rng) -> SymmetricMatrix {
        let raw: Vec<f64> = (0..n * n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        SymmetricMatrix::from_fn(n, |i, j| raw[i * n + j])
    }

    fn det_cofactor(n: usize, a: &[f64]) -> f64 {
        if n == 1 {
            return a[0];
        }
        let mut det = 0.0;
        for c in 0..n {
            let minor: Vec<f64> = (1..n)
                .flat_map(|i| (0..n).filter(move |&j| j != c).map(move |j| (i, j)))
                .map(|(i, j)| a[i * n + j])
                .collect();
            let sign = if c % 2 == 0 { 1.0 } else { -1.0 };
            det += sign * a[c] * det_cofactor(n - 1, &minor);
        }
        det
    }

    fn check_decomposition(m: &SymmetricMatrix, e: &Eigen) {
        let n = m.order();
        let scale = 1.0 + m.frobenius_norm();
        for (lam, v) in e.values.iter().zip(&e.vectors) {
            let mv = m.mul_vec(v);
            let r: f64 = mv
                .iter()
                .zip(v)
                .map(|(a, b)| (a - lam * b).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(r <= 1e-11 * scale, "residual {r}");
        }
        for i in 0..n {
            for j in 0..n {
                let d: f64 = e.vectors[i]
                    .iter()
                    .zip(&e.vectors[j])
                    .map(|(a, b)| a * b)
                    .sum();
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((d - want).abs() < 1e-11);
            }
        }
        assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn identity_spectrum() {
        let e = eigh(&SymmetricMatrix::identity(3)).unwrap();
        assert_eq!(e.values, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn coupled_four_by_four() {
        let m = SymmetricMatrix::from_rows(vec![
            vec![2.0, 0.0, 0.0, 0.0],
            vec![0.0, 3.0, -1.0, 0.0],
            vec![0.0, -1.0, 3.0, 0.0],
            vec![0.0, 0.0, 0.0, 2.0],
        ])
        .unwrap();
        let e = eigh(&m).unwrap();
        for (got, want) in e.values.iter().zip([2.0, 2.0, 2.0, 4.0]) {
            assert!((got - want).abs() < 1e-12);
        }
        check_decomposition(&m, &e);
        let c = cluster(&e.values);
        assert_eq!(c.iter().map(|x| x.1).collect::<Vec<_>>(), vec![3, 1]);
        assert!((c[0].0 - 2.0).abs() < 1e-12 && (c[1].0 - 4.0).abs() < 1e-12);
    }

    #[test]
    fn random_reconstruction() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = random_symmetric(8, &mut rng);
        let e = eigh(&m).unwrap();
        check_decomposition(&m, &e);
        let mut err: f64 = 0.0;
        for i in 0..8 {
            for j in 0..8 {
                let r: f64 = (0..8)
                    .map(|k| e.vectors[k][i] * e.values[k] * e.vectors[k][j])
                    .sum();
                err = err.max((r - m.get(i, j)).abs());
            }
        }
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn rejects_non_finite_and_asymmetric() {
        let m = SymmetricMatrix::from_fn(2, |_, _| f64::NAN);
        assert!(matches!(eigh(&m), Err(Error::Domain(_))));
        assert!(SymmetricMatrix::from_rows(vec![vec![1.0, 2.0], vec![2.0 + 1e-15, 1.0]]).is_err());
        assert!(SymmetricMatrix::symmetrize(2, &[1.0, 2.0, 2.1, 1.0], 1e-12).is_err());
    }

    #[test]
    fn cholesky_and_inverse() {
        let a = [4.0, 2.0, 0.6, 2.0, 5.0, 1.0, 0.6, 1.0, 3.0];
        let l = cholesky(3, &a).unwrap();
        let llt = matmul(3, &l, &transpose(3, &l));
        for (x, y) in llt.iter().zip(&a) {
            assert!((x - y).abs() < 1e-14);
        }
        let li = lower_inverse(3, &l);
        let id = matmul(3, &l, &li);
        for i in 0..3 {
            for j in 0..3 {
                assert!((id[i * 3 + j] - if i == j { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
        assert_eq!(cholesky(2, &[1.0, 2.0, 2.0, 1.0]), Err(1));
    }

    #[test]
    fn serde_round_trip() {
        let m = SymmetricMatrix::from_fn(3, |i, j| (i + 2 * j) as f64);
        let s = serde_json::to_string(&m).unwrap();
        let back: SymmetricMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back, m);
        assert!(serde_json::from_str::<SymmetricMatrix>("[[1,2],[3,4]]").is_err());
    }

    proptest! {
        #[test]
        fn trace_and_determinant_preserved(n in 1usize..=6, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_symmetric(n, &mut rng);
            let e = eigh(&m).unwrap();
            check_decomposition(&m, &e);
            let tr: f64 = e.values.iter().sum();
            prop_assert!((tr - m.trace()).abs() <= 1e-10 * (1.0 + m.trace().abs()));
            let det: f64 = e.values.iter().product();
            let want = det_cofactor(n, m.entries());
            prop_assert!((det - want).abs() <= 1e-10 * (1.0 + want.abs()), "{} vs {}", det, want);
        }

        #[test]
        fn gershgorin_contains_spectrum(n in 1usize..=10, seed in any::<u64>()) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let m = random_symmetric(n, &mut rng);
            let (lo, hi) = m.gershgorin();
            for v in eigh(&m).unwrap().values {
                prop_assert!(v >= lo - 1e-12 && v <= hi + 1e-12);
            }
        }
    }
}
