//! Dense vectors, sparse rows, dense symmetric matrices and a power-iteration
//! estimate of the largest eigenvalue.
//!
//! Every reduction sums in index-ascending order so that results are
//! reproducible bit-for-bit on a given platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense real vector.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Vector(Vec<f64>);

impl Vector {
    pub fn zeros(n: usize) -> Self {
        Vector(vec![0.0; n])
    }

    pub fn from_vec(v: Vec<f64>) -> Self {
        Vector(v)
    }

    /// Standard basis vector `e_i` of dimension `n`.
    pub fn basis(n: usize, i: usize) -> Self {
        let mut v = Self::zeros(n);
        v.0[i] = 1.0;
        v
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    /// Inner product. Panics on dimension mismatch; use [`dot`] for a checked version.
    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.len(), other.len(), "dot: dimension mismatch");
        dot_slices(&self.0, &other.0)
    }

    pub fn norm_sq(&self) -> f64 {
        dot_slices(&self.0, &self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// `self += a * x`
    pub fn axpy(&mut self, a: f64, x: &Vector) {
        assert_eq!(self.len(), x.len(), "axpy: dimension mismatch");
        for (s, xi) in self.0.iter_mut().zip(&x.0) {
            *s += a * xi;
        }
    }

    pub fn scale(&mut self, a: f64) {
        for s in &mut self.0 {
            *s *= a;
        }
    }

    pub fn scaled(&self, a: f64) -> Vector {
        Vector(self.0.iter().map(|v| a * v).collect())
    }

    pub fn add(&self, other: &Vector) -> Vector {
        self.lincomb(1.0, 1.0, other)
    }

    pub fn sub(&self, other: &Vector) -> Vector {
        self.lincomb(1.0, -1.0, other)
    }

    /// `a * self + b * other`
    pub fn lincomb(&self, a: f64, b: f64, other: &Vector) -> Vector {
        assert_eq!(self.len(), other.len(), "lincomb: dimension mismatch");
        Vector(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(x, y)| a * x + b * y)
                .collect(),
        )
    }

    pub fn dist(&self, other: &Vector) -> f64 {
        assert_eq!(self.len(), other.len(), "dist: dimension mismatch");
        self.0
            .iter()
            .zip(&other.0)
            .map(|(x, y)| (x - y) * (x - y))
            .sum::<f64>()
            .sqrt()
    }

    /// Index of the first non-finite entry, if any.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.0.iter().position(|v| !v.is_finite())
    }

    pub(crate) fn check_finite(&self, what: &'static str) -> Result<()> {
        match self.first_non_finite() {
            Some(coordinate) => Err(Error::NonFinite { what, coordinate }),
            None => Ok(()),
        }
    }
}

impl std::ops::Index<usize> for Vector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl std::ops::IndexMut<usize> for Vector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl From<Vec<f64>> for Vector {
    fn from(v: Vec<f64>) -> Self {
        Vector(v)
    }
}

#[inline]
fn dot_slices(u: &[f64], v: &[f64]) -> f64 {
    let mut acc = 0.0;
    for i in 0..u.len() {
        acc += u[i] * v[i];
    }
    acc
}

pub(crate) fn check_dim(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Checked inner product.
pub fn dot(u: &Vector, v: &Vector) -> Result<f64> {
    check_dim(u.len(), v.len())?;
    Ok(dot_slices(u.as_slice(), v.as_slice()))
}

/// Sparse row with strictly increasing column indices.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SparseRow {
    indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseRow {
    pub fn new(indices: Vec<usize>, values: Vec<f64>) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::DimensionMismatch {
                expected: indices.len(),
                got: values.len(),
            });
        }
        if indices.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "sparse row indices must be strictly increasing".into(),
            ));
        }
        Ok(SparseRow { indices, values })
    }

    pub fn empty() -> Self {
        SparseRow {
            indices: Vec::new(),
            values: Vec::new(),
        }
    }

    /// Keeps every entry of a dense slice, zeros included.
    pub fn from_dense(dense: &[f64]) -> Self {
        SparseRow {
            indices: (0..dense.len()).collect(),
            values: dense.to_vec(),
        }
    }

    pub fn nnz(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn norm_sq(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }

    /// Largest stored index plus one (0 for the empty row).
    pub fn min_dim(&self) -> usize {
        self.indices.last().map_or(0, |i| i + 1)
    }

    pub fn scaled(&self, a: f64) -> SparseRow {
        SparseRow {
            indices: self.indices.clone(),
            values: self.values.iter().map(|v| a * v).collect(),
        }
    }

    pub fn densify(&self, n: usize) -> Result<Vector> {
        check_index(self, n)?;
        let mut out = Vector::zeros(n);
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            out[i] = v;
        }
        Ok(out)
    }

    /// `⟨row, x⟩` without bounds checking beyond slice indexing.
    #[inline]
    pub(crate) fn dot_unchecked(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            acc += v * x[i];
        }
        acc
    }

    /// `out += a * row`
    #[inline]
    pub(crate) fn scatter_add(&self, a: f64, out: &mut [f64]) {
        for (&i, &v) in self.indices.iter().zip(&self.values) {
            out[i] += a * v;
        }
    }
}

fn check_index(row: &SparseRow, n: usize) -> Result<()> {
    if let Some(&last) = row.indices.last() {
        if last >= n {
            return Err(Error::IndexOutOfRange {
                index: last,
                len: n,
            });
        }
    }
    Ok(())
}

/// `⟨row, x⟩`, touching only the stored entries.
pub fn sparse_dot(row: &SparseRow, x: &Vector) -> Result<f64> {
    check_index(row, x.len())?;
    Ok(row.dot_unchecked(x.as_slice()))
}

/// Dense symmetric matrix, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymmetricMatrix {
    n: usize,
    data: Vec<f64>,
    psd: bool,
}

impl SymmetricMatrix {
    /// Builds from a row-major buffer; rejects any asymmetric pair.
    pub fn from_row_major(n: usize, data: Vec<f64>) -> Result<Self> {
        check_dim(n * n, data.len())?;
        for i in 0..n {
            for j in (i + 1)..n {
                if data[i * n + j] != data[j * n + i] {
                    return Err(Error::InvalidParameter(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                what: "matrix",
                coordinate: k,
            });
        }
        Ok(SymmetricMatrix {
            n,
            data,
            psd: false,
        })
    }

    /// Builds from a nearly symmetric buffer by averaging mirrored entries.
    pub fn symmetrized(n: usize, mut data: Vec<f64>) -> Result<Self> {
        check_dim(n * n, data.len())?;
        for i in 0..n {
            for j in (i + 1)..n {
                let avg = 0.5 * (data[i * n + j] + data[j * n + i]);
                data[i * n + j] = avg;
                data[j * n + i] = avg;
            }
        }
        Self::from_row_major(n, data)
    }

    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![1.0; n])
    }

    pub fn zeros(n: usize) -> Self {
        SymmetricMatrix {
            n,
            data: vec![0.0; n * n],
            psd: true,
        }
    }

    pub fn diagonal(d: &[f64]) -> Self {
        let n = d.len();
        let mut data = vec![0.0; n * n];
        for (i, &v) in d.iter().enumerate() {
            data[i * n + i] = v;
        }
        SymmetricMatrix {
            n,
            data,
            psd: d.iter().all(|&v| v >= 0.0),
        }
    }

    /// Marks the matrix as positive semidefinite. The caller vouches for it;
    /// nothing is checked at runtime.
    pub fn assume_psd(mut self) -> Self {
        self.psd = true;
        self
    }

    pub fn is_psd(&self) -> bool {
        self.psd
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    pub fn as_row_major(&self) -> &[f64] {
        &self.data
    }

    /// Embeds `self` in the leading block of an `n × n` zero matrix.
    pub fn embed(&self, n: usize) -> Result<Self> {
        if n < self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                got: n,
            });
        }
        let mut data = vec![0.0; n * n];
        for i in 0..self.n {
            data[i * n..i * n + self.n].copy_from_slice(self.row(i));
        }
        Ok(SymmetricMatrix {
            n,
            data,
            psd: self.psd,
        })
    }

    pub(crate) fn apply_into(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = dot_slices(self.row(i), x);
        }
    }
}

/// `C x`
pub fn symv(c: &SymmetricMatrix, x: &Vector) -> Result<Vector> {
    check_dim(c.dim(), x.len())?;
    let mut y = Vector::zeros(c.dim());
    c.apply_into(x.as_slice(), y.as_mut_slice());
    Ok(y)
}

/// Outcome of a power iteration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenEstimate {
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub const DEFAULT_POWER_TOL: f64 = 1e-6;
const POWER_SEED: u64 = 0x5eed_1a3b;

/// Largest eigenvalue of a PSD matrix by power iteration.
///
/// Stops once the eigen-residual `‖Cv − λv‖` drops below `tol·λ`. The start
/// vector is drawn from a fixed seed, so the result is deterministic.
pub fn lambda_max(c: &SymmetricMatrix, tol: f64, max_iters: usize) -> Result<EigenEstimate> {
    lambda_max_seeded(c, tol, max_iters, POWER_SEED)
}

pub fn lambda_max_seeded(
    c: &SymmetricMatrix,
    tol: f64,
    max_iters: usize,
    seed: u64,
) -> Result<EigenEstimate> {
    power_iteration(c.dim(), |x, y| c.apply_into(x, y), tol, max_iters, seed)
}

/// Power iteration on an implicit symmetric PSD operator `apply(x, y): y ← Ax`.
pub fn power_iteration<F>(
    n: usize,
    mut apply: F,
    tol: f64,
    max_iters: usize,
    seed: u64,
) -> Result<EigenEstimate>
where
    F: FnMut(&[f64], &mut [f64]),
{
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter("power iteration tol must be > 0".into()));
    }
    if n == 0 {
        return Err(Error::InvalidParameter("empty operator".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let nv = dot_slices(&v, &v).sqrt();
    v.iter_mut().for_each(|x| *x /= nv);
    let mut av = vec![0.0; n];
    let mut lambda = 0.0;

    for it in 1..=max_iters.max(1) {
        apply(&v, &mut av);
        lambda = dot_slices(&v, &av);
        let norm_av = dot_slices(&av, &av).sqrt();
        if norm_av == 0.0 {
            // v lies in the null space; the operator is zero along it
            return Ok(EigenEstimate {
                value: 0.0,
                iterations: it,
                converged: true,
            });
        }
        let resid: f64 = av
            .iter()
            .zip(&v)
            .map(|(a, x)| (a - lambda * x) * (a - lambda * x))
            .sum::<f64>()
            .sqrt();
        if resid <= tol * lambda.abs() {
            return Ok(EigenEstimate {
                value: lambda,
                iterations: it,
                converged: true,
            });
        }
        for (x, a) in v.iter_mut().zip(&av) {
            *x = a / norm_av;
        }
    }
    Ok(EigenEstimate {
        value: lambda,
        iterations: max_iters,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn rand_vec(rng: &mut ChaCha8Rng, n: usize) -> Vector {
        Vector::from_vec((0..n).map(|_| rng.random_range(-1.0..1.0)).collect())
    }

    #[test]
    fn dot_trivial_cases() {
        let x = Vector::from_vec(vec![5.0, 7.0, 9.0]);
        assert_eq!(dot(&x, &Vector::zeros(3)).unwrap(), 0.0);
        assert_eq!(dot(&Vector::basis(3, 1), &x).unwrap(), 7.0);
    }

    #[test]
    fn dot_matches_elementwise_accumulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = rand_vec(&mut rng, 50);
        let v = rand_vec(&mut rng, 50);
        let mut oracle = 0.0f64;
        for i in 0..50 {
            oracle += u[i] * v[i];
        }
        let got = dot(&u, &v).unwrap();
        assert!((got - oracle).abs() <= 1e-12 * oracle.abs().max(1.0));
    }

    #[test]
    fn dot_rejects_mismatch() {
        let err = dot(&Vector::zeros(2), &Vector::zeros(3)).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
    }

    #[test]
    fn sparse_dot_cases() {
        let x = Vector::from_vec((0..100).map(|i| (i as f64).sin()).collect());
        assert_eq!(sparse_dot(&SparseRow::empty(), &x).unwrap(), 0.0);

        let full = SparseRow::from_dense(x.as_slice());
        let a = sparse_dot(&full, &x).unwrap();
        let b = x.dot(&x);
        assert!((a - b).abs() <= 1e-15 * b.abs());

        let row = SparseRow::new(vec![3, 17, 40, 41, 99], vec![1.5, -2.0, 0.25, 3.0, -1.0]).unwrap();
        let dense = row.densify(100).unwrap();
        let oracle = dense.dot(&x);
        assert!((sparse_dot(&row, &x).unwrap() - oracle).abs() <= 1e-12 * oracle.abs().max(1.0));
    }

    #[test]
    fn sparse_dot_index_out_of_range() {
        let row = SparseRow::new(vec![0, 5], vec![1.0, 1.0]).unwrap();
        let err = sparse_dot(&row, &Vector::zeros(5)).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { index: 5, len: 5 }));
    }

    #[test]
    fn sparse_row_rejects_unsorted() {
        assert!(SparseRow::new(vec![2, 1], vec![1.0, 1.0]).is_err());
        assert!(SparseRow::new(vec![1, 1], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn symv_cases() {
        let x = Vector::from_vec(vec![1.0, -2.0, 3.0]);
        assert_eq!(symv(&SymmetricMatrix::identity(3), &x).unwrap(), x);
        let d = SymmetricMatrix::diagonal(&[2.0, 4.0]);
        assert_eq!(
            symv(&d, &Vector::from_vec(vec![1.0, 1.0])).unwrap().as_slice(),
            &[2.0, 4.0]
        );
        assert!(symv(&d, &x).is_err());
    }

    #[test]
    fn symv_matches_naive_double_loop() {
        let n = 20;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v: f64 = rng.random_range(-1.0..1.0);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        let c = SymmetricMatrix::from_row_major(n, data.clone()).unwrap();
        let x = rand_vec(&mut rng, n);
        let y = symv(&c, &x).unwrap();
        for i in 0..n {
            let mut acc = 0.0;
            for j in 0..n {
                acc += data[i * n + j] * x[j];
            }
            assert!((y[i] - acc).abs() <= 1e-12 * acc.abs().max(1.0));
        }
    }

    #[test]
    fn asymmetric_matrix_rejected() {
        let err = SymmetricMatrix::from_row_major(2, vec![1.0, 2.0, 3.0, 1.0]);
        assert!(err.is_err());
    }

    #[test]
    fn lambda_max_simple_spectra() {
        let e = lambda_max(&SymmetricMatrix::identity(4), 1e-6, 100).unwrap();
        assert!(e.converged);
        assert!((e.value - 1.0).abs() <= 1e-12);

        let tol = 1e-6;
        let e = lambda_max(&SymmetricMatrix::diagonal(&[1.0, 2.0, 3.0]), tol, 10_000).unwrap();
        assert!(e.converged);
        assert!(e.value <= 3.0 + 1e-12 && e.value >= 3.0 * (1.0 - tol));
    }

    #[test]
    fn lambda_max_matches_dense_eigensolver() {
        let n = 15;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = nalgebra::DMatrix::<f64>::from_fn(n + 5, n, |_, _| rng.random_range(-1.0..1.0));
        let ata = a.transpose() * &a;
        let oracle = nalgebra::SymmetricEigen::new(ata.clone())
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::MIN, f64::max);
        let data: Vec<f64> = (0..n * n).map(|k| ata[(k / n, k % n)]).collect();
        let c = SymmetricMatrix::symmetrized(n, data).unwrap().assume_psd();
        let e = lambda_max(&c, 1e-10, 100_000).unwrap();
        assert!(e.converged);
        assert!((e.value - oracle).abs() <= 1e-6 * oracle);
    }

    #[test]
    fn lambda_max_reports_nonconvergence() {
        let c = SymmetricMatrix::diagonal(&[1.0, 0.999_999, 0.5]);
        let e = lambda_max(&c, 1e-14, 3).unwrap();
        assert!(!e.converged);
        assert_eq!(e.iterations, 3);
    }

    #[test]
    fn operations_are_repeatable() {
        let c = SymmetricMatrix::diagonal(&[0.3, 2.0, 1.1, 0.7]);
        let a = lambda_max(&c, 1e-8, 1000).unwrap();
        let b = lambda_max(&c, 1e-8, 1000).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn sparse_dot_equals_densified_dot(
                x in proptest::collection::vec(-10.0f64..10.0, 30),
                mask in proptest::collection::vec(any::<bool>(), 30),
                vals in proptest::collection::vec(-5.0f64..5.0, 30),
            ) {
                let idx: Vec<usize> = (0..30).filter(|&i| mask[i]).collect();
                let v: Vec<f64> = idx.iter().map(|&i| vals[i]).collect();
                let row = SparseRow::new(idx, v).unwrap();
                let x = Vector::from_vec(x);
                let a = sparse_dot(&row, &x).unwrap();
                let b = row.densify(30).unwrap().dot(&x);
                prop_assert!((a - b).abs() <= 1e-12 * b.abs().max(1.0));
            }

            #[test]
            fn symv_is_linear(
                entries in proptest::collection::vec(-3.0f64..3.0, 36),
                x in proptest::collection::vec(-3.0f64..3.0, 6),
                y in proptest::collection::vec(-3.0f64..3.0, 6),
                alpha in -2.0f64..2.0,
                beta in -2.0f64..2.0,
            ) {
                let c = SymmetricMatrix::symmetrized(6, entries).unwrap();
                let x = Vector::from_vec(x);
                let y = Vector::from_vec(y);
                let lhs = symv(&c, &x.lincomb(alpha, beta, &y)).unwrap();
                let rhs = symv(&c, &x).unwrap().lincomb(alpha, beta, &symv(&c, &y).unwrap());
                let scale = 1.0 + rhs.norm();
                prop_assert!(lhs.dist(&rhs) <= 1e-10 * scale);
            }
        }
    }
}
