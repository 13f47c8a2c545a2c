//! Dense complex matrices with explicit tensor-factor bookkeeping.
//!
//! Storage is row-major. Subsystem index 0 is the leftmost tensor factor, so a
//! computational basis index is the big-endian mixed-radix number formed from
//! the per-subsystem digits.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::tolerance;

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Local Hilbert-space dimensions of a composite system, leftmost factor first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct DimList(Vec<usize>);

impl DimList {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidDims("empty dimension list".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidDims(format!("zero local dimension in {dims:?}")));
        }
        Ok(Self(dims))
    }

    /// `n` copies of the same local dimension.
    pub fn uniform(local: usize, n: usize) -> Result<Self> {
        Self::new(vec![local; n])
    }

    pub fn qubits(n: usize) -> Self {
        Self(vec![2; n.max(1)])
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn concat(&self, other: &DimList) -> DimList {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        DimList(v)
    }

    pub fn select(&self, which: &[usize]) -> Result<DimList> {
        let dims = which
            .iter()
            .map(|&k| {
                self.0.get(k).copied().ok_or_else(|| {
                    Error::InvalidDims(format!("subsystem {k} out of range for {:?}", self.0))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        DimList::new(dims)
    }

    /// Row-major strides: `strides[k]` is the index step of subsystem `k`.
    pub fn strides(&self) -> Vec<usize> {
        let mut s = vec![1; self.0.len()];
        for k in (0..self.0.len().saturating_sub(1)).rev() {
            s[k] = s[k + 1] * self.0[k + 1];
        }
        s
    }

    /// Splits a flat basis index into per-subsystem digits.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.0.len()];
        for k in (0..self.0.len()).rev() {
            out[k] = index % self.0[k];
            index /= self.0[k];
        }
        out
    }

    pub fn check_matrix(&self, a: &Matrix) -> Result<()> {
        if !a.is_square() || a.rows() != self.total() {
            return Err(Error::InvalidDims(format!(
                "{}x{} matrix does not match dims {:?} (product {})",
                a.rows(),
                a.cols(),
                self.0,
                self.total()
            )));
        }
        Ok(())
    }
}

impl fmt::Display for DimList {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidDims(format!("{rows}x{cols} matrix")));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidDims(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { ONE } else { ZERO })
    }

    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { C64::new(values[i], 0.0) } else { ZERO })
    }

    /// `|v⟩⟨v|`.
    pub fn outer(v: &[C64]) -> Self {
        let n = v.len();
        Self::from_fn(n, n, |i, j| v[i] * v[j].conj())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self.get(i, i)).sum()
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    pub fn scale(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&z| f(z)).collect() }
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::InvalidDims(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let row = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                for (r, &b) in row.iter_mut().zip(brow) {
                    *r += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        if v.len() != self.cols {
            return Err(Error::InvalidDims(format!(
                "vector of length {} for a {}x{} matrix",
                v.len(),
                self.rows,
                self.cols
            )));
        }
        Ok((0..self.rows)
            .map(|i| self.data[i * self.cols..(i + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `⟨v|A|v⟩`.
    pub fn expectation(&self, v: &[C64]) -> Result<C64> {
        let av = self.apply(v)?;
        Ok(v.iter().zip(&av).map(|(a, b)| a.conj() * b).sum())
    }

    /// `Tr[A B]` without forming the product.
    pub fn trace_product(&self, other: &Matrix) -> Result<C64> {
        if self.cols != other.rows || self.rows != other.cols {
            return Err(Error::InvalidDims(format!(
                "trace of {}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut acc = ZERO;
        for i in 0..self.rows {
            for k in 0..self.cols {
                acc += self.data[i * self.cols + k] * other.data[k * other.cols + i];
            }
        }
        Ok(acc)
    }

    pub fn max_abs_diff(&self, other: &Matrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }
}

impl Add<&Matrix> for &Matrix {
    type Output = Matrix;

    fn add(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix shapes differ");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub<&Matrix> for &Matrix {
    type Output = Matrix;

    fn sub(self, rhs: &Matrix) -> Matrix {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "matrix shapes differ");
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Mul<&Matrix> for &Matrix {
    type Output = Matrix;

    fn mul(self, rhs: &Matrix) -> Matrix {
        self.matmul(rhs).expect("matrix shapes differ")
    }
}

/// Kronecker product; entry `((i1,i2),(j1,j2))` is `a[i1][j1] * b[i2][j2]`.
pub fn kron(a: &Matrix, b: &Matrix) -> Matrix {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let mut data = vec![ZERO; rows * cols];
    for i1 in 0..a.rows {
        for j1 in 0..a.cols {
            let s = a.get(i1, j1);
            if s == ZERO {
                continue;
            }
            for i2 in 0..b.rows {
                let row = (i1 * b.rows + i2) * cols + j1 * b.cols;
                for j2 in 0..b.cols {
                    data[row + j2] = s * b.data[i2 * b.cols + j2];
                }
            }
        }
    }
    Matrix { rows, cols, data }
}

pub fn kron_all<'a>(factors: impl IntoIterator<Item = &'a Matrix>) -> Option<Matrix> {
    factors.into_iter().fold(None, |acc, m| match acc {
        None => Some(m.clone()),
        Some(a) => Some(kron(&a, m)),
    })
}

pub fn kron_vec(a: &[C64], b: &[C64]) -> Vec<C64> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect()
}

/// Splits every basis index into (kept index, traced index).
fn split_indices(dims: &DimList, keep: &[usize]) -> (Vec<usize>, Vec<usize>, usize, usize) {
    let d = dims.as_slice();
    let mut kept_dim = 1;
    let mut traced_dim = 1;
    for (k, &dk) in d.iter().enumerate() {
        if keep.contains(&k) {
            kept_dim *= dk;
        } else {
            traced_dim *= dk;
        }
    }
    let total = dims.total();
    let mut kept = Vec::with_capacity(total);
    let mut traced = Vec::with_capacity(total);
    for idx in 0..total {
        let digits = dims.digits(idx);
        let (mut ki, mut ti) = (0, 0);
        for (k, &dig) in digits.iter().enumerate() {
            if keep.contains(&k) {
                ki = ki * d[k] + dig;
            } else {
                ti = ti * d[k] + dig;
            }
        }
        kept.push(ki);
        traced.push(ti);
    }
    (kept, traced, kept_dim, traced_dim)
}

fn normalized_subset(keep: &[usize], n: usize) -> Result<Vec<usize>> {
    let mut k = keep.to_vec();
    k.sort_unstable();
    k.dedup();
    if k.len() != keep.len() {
        return Err(Error::InvalidDims(format!("repeated subsystem in {keep:?}")));
    }
    if let Some(&bad) = k.iter().find(|&&s| s >= n) {
        return Err(Error::InvalidDims(format!("subsystem {bad} out of range (have {n})")));
    }
    Ok(k)
}

/// Reduced operator on the `keep` subsystems, in their original relative order.
///
/// An empty `keep` traces everything out and yields the 1x1 matrix `[Tr a]`.
pub fn partial_trace(a: &Matrix, dims: &DimList, keep: &[usize]) -> Result<Matrix> {
    dims.check_matrix(a)?;
    let keep = normalized_subset(keep, dims.len())?;
    let (kept, traced, kept_dim, traced_dim) = split_indices(dims, &keep);
    let mut groups: Vec<Vec<(usize, usize)>> = vec![Vec::with_capacity(kept_dim); traced_dim];
    for idx in 0..dims.total() {
        groups[traced[idx]].push((kept[idx], idx));
    }
    let mut out = Matrix::zeros(kept_dim, kept_dim);
    for group in &groups {
        for &(ki, i) in group {
            for &(kj, j) in group {
                out.data[ki * kept_dim + kj] += a.get(i, j);
            }
        }
    }
    Ok(out)
}

/// `Tr_first[(E ⊗ I) a]` where `E` acts on the leading `e.rows()`-dimensional factor.
pub fn contract_leading(a: &Matrix, e: &Matrix) -> Result<Matrix> {
    let d = e.rows();
    if !e.is_square() || !a.is_square() || d == 0 || !a.rows().is_multiple_of(d) {
        return Err(Error::InvalidDims(format!(
            "cannot contract a {}x{} element against a {}x{} operator",
            e.rows(),
            e.cols(),
            a.rows(),
            a.cols()
        )));
    }
    let rest = a.rows() / d;
    let mut out = Matrix::zeros(rest, rest);
    for i in 0..d {
        for j in 0..d {
            let w = e.get(j, i);
            if w == ZERO {
                continue;
            }
            for r in 0..rest {
                let src = &a.data[(i * rest + r) * a.cols + j * rest..(i * rest + r) * a.cols + (j + 1) * rest];
                let dst = &mut out.data[r * rest..(r + 1) * rest];
                for (o, &s) in dst.iter_mut().zip(src) {
                    *o += w * s;
                }
            }
        }
    }
    Ok(out)
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::InvalidPermutation(perm.to_vec()));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::InvalidPermutation(perm.to_vec()));
        }
        seen[p] = true;
    }
    Ok(())
}

/// Basis-index map for a subsystem reordering: output subsystem `k` is input
/// subsystem `perm[k]`. Returns the map `input index -> output index` and the
/// output dimension list.
pub fn permutation_map(dims: &DimList, perm: &[usize]) -> Result<(Vec<usize>, DimList)> {
    check_permutation(perm, dims.len())?;
    let out_dims = dims.select(perm)?;
    let out_strides = out_dims.strides();
    let map = (0..dims.total())
        .map(|idx| {
            let digits = dims.digits(idx);
            perm.iter().enumerate().map(|(k, &p)| digits[p] * out_strides[k]).sum()
        })
        .collect();
    Ok((map, out_dims))
}

/// Conjugation by the subsystem permutation unitary.
///
/// Output subsystem `k` is input subsystem `perm[k]`; so `perm = [1, 0]` maps
/// `ρ ⊗ σ` to `σ ⊗ ρ`.
pub fn permute_subsystems(a: &Matrix, dims: &DimList, perm: &[usize]) -> Result<(Matrix, DimList)> {
    dims.check_matrix(a)?;
    let (map, out_dims) = permutation_map(dims, perm)?;
    let n = a.rows();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            out.data[map[i] * n + map[j]] = a.get(i, j);
        }
    }
    Ok((out, out_dims))
}

pub fn permute_vector(v: &[C64], dims: &DimList, perm: &[usize]) -> Result<(Vec<C64>, DimList)> {
    if v.len() != dims.total() {
        return Err(Error::InvalidDims(format!("vector of length {} for dims {dims}", v.len())));
    }
    let (map, out_dims) = permutation_map(dims, perm)?;
    let mut out = vec![ZERO; v.len()];
    for (i, &x) in v.iter().enumerate() {
        out[map[i]] = x;
    }
    Ok((out, out_dims))
}

/// Inverse of a permutation given as `output k <- input perm[k]`.
pub fn inverse_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &p) in perm.iter().enumerate() {
        inv[p] = k;
    }
    inv
}

/// Transposes the listed subsystems (computational basis).
pub fn partial_transpose(a: &Matrix, dims: &DimList, which: &[usize]) -> Result<Matrix> {
    dims.check_matrix(a)?;
    let which = normalized_subset(which, dims.len())?;
    let n = a.rows();
    let digits: Vec<Vec<usize>> = (0..n).map(|i| dims.digits(i)).collect();
    let strides = dims.strides();
    let mut out = Matrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            let (mut ii, mut jj) = (0, 0);
            for k in 0..dims.len() {
                let (di, dj) = if which.contains(&k) {
                    (digits[j][k], digits[i][k])
                } else {
                    (digits[i][k], digits[j][k])
                };
                ii += di * strides[k];
                jj += dj * strides[k];
            }
            out.data[ii * n + jj] = a.get(i, j);
        }
    }
    Ok(out)
}

fn to_nalgebra_hermitian(a: &Matrix) -> DMatrix<C64> {
    // symmetrize so round-off asymmetry below the tolerance cannot bias the solver
    DMatrix::from_fn(a.rows, a.cols, |i, j| (a.get(i, j) + a.get(j, i).conj()) * 0.5)
}

fn require_hermitian(a: &Matrix) -> Result<()> {
    let deviation = a.hermitian_deviation();
    if deviation > tolerance::HERMITIAN {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(())
}

/// Real eigenvalues of a Hermitian matrix, ascending.
pub fn hermitian_eigenvalues(a: &Matrix) -> Result<Vec<f64>> {
    require_hermitian(a)?;
    let eig = nalgebra::SymmetricEigen::try_new(to_nalgebra_hermitian(a), f64::EPSILON, 0)
        .ok_or_else(|| Error::InvalidDims("eigenvalue iteration did not converge".into()))?;
    let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    values.sort_by(f64::total_cmp);
    Ok(values)
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues with the
/// matching orthonormal eigenvectors.
pub fn hermitian_eigen(a: &Matrix) -> Result<Vec<(f64, Vec<C64>)>> {
    require_hermitian(a)?;
    let eig = nalgebra::SymmetricEigen::try_new(to_nalgebra_hermitian(a), f64::EPSILON, 0)
        .ok_or_else(|| Error::InvalidDims("eigenvalue iteration did not converge".into()))?;
    let mut pairs: Vec<(f64, Vec<C64>)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &lambda)| (lambda, eig.eigenvectors.column(k).iter().copied().collect()))
        .collect();
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(pairs)
}

pub fn pauli_x() -> Matrix {
    Matrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
}

pub fn pauli_z() -> Matrix {
    Matrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
}

pub fn pauli_y() -> Matrix {
    Matrix::new(2, 2, vec![ZERO, C64::new(0.0, -1.0), C64::new(0.0, 1.0), ZERO]).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(rows: usize, cols: usize, seed: u64) -> Matrix {
        // small LCG so the kernel tests need no extra dependencies
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let mut next = move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) * 2.0 - 1.0
        };
        Matrix::from_fn(rows, cols, |_, _| C64::new(next(), next()))
    }

    fn hermitian_sample(n: usize, seed: u64) -> Matrix {
        let a = sample(n, n, seed);
        (&a + &a.dagger()).scale(0.5)
    }

    #[test]
    fn kron_identities_give_identity() {
        assert_eq!(kron(&Matrix::identity(2), &Matrix::identity(2)), Matrix::identity(4));
    }

    #[test]
    fn kron_x_z_entries() {
        let k = kron(&pauli_x(), &pauli_z());
        let mut expected = Matrix::zeros(4, 4);
        expected.set(0, 2, ONE);
        expected.set(1, 3, -ONE);
        expected.set(2, 0, ONE);
        expected.set(3, 1, -ONE);
        assert_eq!(k, expected);
    }

    #[test]
    fn kron_shape() {
        let k = kron(&Matrix::zeros(2, 3), &Matrix::zeros(4, 5));
        assert_eq!((k.rows(), k.cols()), (8, 15));
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi = Matrix::outer(&[C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)]);
        let dims = DimList::new(vec![2, 2]).unwrap();
        let r = partial_trace(&phi, &dims, &[0]).unwrap();
        assert!(r.max_abs_diff(&Matrix::identity(2).scale(0.5)) < 1e-15);
    }

    #[test]
    fn partial_trace_of_product_keeps_first_factor() {
        let rho = hermitian_sample(3, 1);
        let sigma = hermitian_sample(2, 2);
        let dims = DimList::new(vec![3, 2]).unwrap();
        let r = partial_trace(&kron(&rho, &sigma), &dims, &[0]).unwrap();
        assert!(r.max_abs_diff(&rho.scale_complex(sigma.trace())) < 1e-12);
    }

    #[test]
    fn partial_trace_matches_index_sum() {
        // random positive 2⊗3 operator
        let g = sample(6, 6, 7);
        let a = &g * &g.dagger();
        let dims = DimList::new(vec![2, 3]).unwrap();
        let keep_a = partial_trace(&a, &dims, &[0]).unwrap();
        let keep_b = partial_trace(&a, &dims, &[1]).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let s: C64 = (0..3).map(|k| a.get(i * 3 + k, j * 3 + k)).sum();
                assert!((keep_a.get(i, j) - s).norm() < 1e-12);
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                let s: C64 = (0..2).map(|k| a.get(k * 3 + i, k * 3 + j)).sum();
                assert!((keep_b.get(i, j) - s).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn partial_trace_rejects_bad_dims() {
        let dims = DimList::new(vec![2, 3]).unwrap();
        assert!(matches!(partial_trace(&Matrix::identity(4), &dims, &[0]), Err(Error::InvalidDims(_))));
        let dims = DimList::new(vec![2, 2]).unwrap();
        assert!(partial_trace(&Matrix::identity(4), &dims, &[2]).is_err());
    }

    #[test]
    fn tracing_everything_gives_trace() {
        let a = hermitian_sample(8, 3);
        let dims = DimList::qubits(3);
        let r = partial_trace(&a, &dims, &[]).unwrap();
        assert!((r.get(0, 0) - a.trace()).norm() < 1e-12);
    }

    #[test]
    fn contract_leading_matches_embedding() {
        let a = hermitian_sample(6, 11);
        let e = hermitian_sample(2, 12);
        let dims = DimList::new(vec![2, 3]).unwrap();
        let full = &kron(&e, &Matrix::identity(3)) * &a;
        let expected = partial_trace(&full, &dims, &[1]).unwrap();
        assert!(contract_leading(&a, &e).unwrap().max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn identity_permutation_is_noop() {
        let a = sample(8, 8, 4);
        let dims = DimList::qubits(3);
        let (p, d) = permute_subsystems(&a, &dims, &[0, 1, 2]).unwrap();
        assert_eq!(p, a);
        assert_eq!(d, dims);
    }

    #[test]
    fn swap_of_product() {
        let rho = hermitian_sample(2, 5);
        let sigma = hermitian_sample(3, 6);
        let dims = DimList::new(vec![2, 3]).unwrap();
        let (p, d) = permute_subsystems(&kron(&rho, &sigma), &dims, &[1, 0]).unwrap();
        assert_eq!(d.as_slice(), &[3, 2]);
        assert!(p.max_abs_diff(&kron(&sigma, &rho)) < 1e-15);
    }

    #[test]
    fn cyclic_shift_has_order_three() {
        let a = sample(8, 8, 9);
        let dims = DimList::qubits(3);
        let mut m = a.clone();
        for _ in 0..3 {
            m = permute_subsystems(&m, &dims, &[1, 2, 0]).unwrap().0;
        }
        assert!(m.max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn permutation_roundtrip_with_mixed_dims() {
        let a = sample(12, 12, 10);
        let dims = DimList::new(vec![2, 3, 2]).unwrap();
        let perm = [2, 0, 1];
        let (p, d) = permute_subsystems(&a, &dims, &perm).unwrap();
        let (back, d2) = permute_subsystems(&p, &d, &inverse_permutation(&perm)).unwrap();
        assert_eq!(d2, dims);
        assert!(back.max_abs_diff(&a) < 1e-15);
    }

    #[test]
    fn invalid_permutation_rejected() {
        let dims = DimList::qubits(2);
        let a = Matrix::identity(4);
        assert!(matches!(permute_subsystems(&a, &dims, &[0, 0]), Err(Error::InvalidPermutation(_))));
        assert!(permute_subsystems(&a, &dims, &[0]).is_err());
        assert!(permute_subsystems(&a, &dims, &[0, 2]).is_err());
    }

    #[test]
    fn pauli_z_eigenvalues() {
        assert_eq!(hermitian_eigenvalues(&pauli_z()).unwrap(), vec![-1.0, 1.0]);
        let e = hermitian_eigenvalues(&Matrix::identity(4)).unwrap();
        assert!(e.iter().all(|&x| (x - 1.0).abs() < 1e-15));
    }

    #[test]
    fn two_by_two_eigenvalues_match_quadratic_formula() {
        for seed in 0..50 {
            let h = hermitian_sample(2, 100 + seed);
            let (a, d, b) = (h.get(0, 0).re, h.get(1, 1).re, h.get(0, 1));
            let mean = 0.5 * (a + d);
            let radius = (0.25 * (a - d).powi(2) + b.norm_sqr()).sqrt();
            let e = hermitian_eigenvalues(&h).unwrap();
            assert!((e[0] - (mean - radius)).abs() < 1e-10);
            assert!((e[1] - (mean + radius)).abs() < 1e-10);
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let a = Matrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(hermitian_eigenvalues(&a), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eigenvectors_reconstruct() {
        let h = hermitian_sample(5, 77);
        let pairs = hermitian_eigen(&h).unwrap();
        let mut rebuilt = Matrix::zeros(5, 5);
        for (lambda, v) in &pairs {
            rebuilt = &rebuilt + &Matrix::outer(v).scale(*lambda);
        }
        assert!(rebuilt.max_abs_diff(&h) < 1e-12);
    }

    #[test]
    fn partial_transpose_of_bell_state() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi = Matrix::outer(&[C64::new(s, 0.0), ZERO, ZERO, C64::new(s, 0.0)]);
        let pt = partial_transpose(&phi, &DimList::qubits(2), &[1]).unwrap();
        let e = hermitian_eigenvalues(&pt).unwrap();
        assert!((e[0] + 0.5).abs() < 1e-12);
        assert!((e[3] - 0.5).abs() < 1e-12);
    }
}
