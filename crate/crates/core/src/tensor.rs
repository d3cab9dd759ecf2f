//! Sparse square tensors in coordinate form and their contraction kernels.
//!
//! A [`SquareTensor`] of order `m` and dimension `n` stores its nonzeros as
//! flat index tuples plus values. Duplicated tuples are allowed on input and
//! accumulate; [`SquareTensor::canonicalize`] sorts the tuples
//! lexicographically, merges duplicates and drops exact zeros. Canonical
//! tensors carry a row pointer over the first index so every kernel works
//! row by row.

use std::borrow::Cow;

use nalgebra::DMatrix;
use thiserror::Error;

use crate::exec::{self, Execution};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TensorError {
    #[error("tensor order must be at least 3, got {0}")]
    OrderTooSmall(usize),
    #[error("tensor dimension must be at least 1")]
    EmptyDimension,
    #[error("tensor dimension {0} exceeds the supported index range")]
    DimensionTooLarge(usize),
    #[error("entry {entry}: expected {expected} indices, got {got}")]
    IndexArity {
        entry: usize,
        expected: usize,
        got: usize,
    },
    #[error("entry {entry}: index {index} out of range for dimension {dim}")]
    IndexOutOfRange {
        entry: usize,
        index: usize,
        dim: usize,
    },
    #[error("entry {entry}: value is not finite")]
    NonFinite { entry: usize },
    #[error("dimension mismatch: tensor has n = {expected}, vector has length {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

/// An order-`m`, dimension-`n` real tensor in sparse coordinate storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareTensor {
    order: usize,
    dim: usize,
    indices: Vec<u32>,
    values: Vec<f64>,
    // `Some` exactly when the entries are canonical.
    row_ptr: Option<Vec<usize>>,
}

impl SquareTensor {
    /// The zero tensor.
    pub fn zeros(order: usize, dim: usize) -> Result<Self, TensorError> {
        check_shape(order, dim)?;
        Ok(Self {
            order,
            dim,
            indices: Vec::new(),
            values: Vec::new(),
            row_ptr: Some(vec![0; dim + 1]),
        })
    }

    /// Builds a tensor from raw `(index tuple, value)` pairs. The result is
    /// not canonical; duplicates are kept until [`Self::canonicalize`].
    pub fn from_entries<I, T>(order: usize, dim: usize, entries: I) -> Result<Self, TensorError>
    where
        I: IntoIterator<Item = (T, f64)>,
        T: AsRef<[usize]>,
    {
        let mut t = Self::zeros(order, dim)?;
        for (idx, v) in entries {
            t.push(idx.as_ref(), v)?;
        }
        Ok(t)
    }

    /// Like [`Self::from_entries`] followed by canonicalization.
    pub fn canonical_from_entries<I, T>(
        order: usize,
        dim: usize,
        entries: I,
    ) -> Result<Self, TensorError>
    where
        I: IntoIterator<Item = (T, f64)>,
        T: AsRef<[usize]>,
    {
        let mut t = Self::from_entries(order, dim, entries)?;
        t.canonicalize();
        Ok(t)
    }

    /// The identity tensor: ones on the superdiagonal `(i, i, ..., i)`.
    pub fn identity(order: usize, dim: usize) -> Result<Self, TensorError> {
        Self::canonical_from_entries(order, dim, (0..dim).map(|i| (vec![i; order], 1.0)))
    }

    /// Appends one entry. Marks the tensor non-canonical.
    pub fn push(&mut self, idx: &[usize], value: f64) -> Result<(), TensorError> {
        let entry = self.values.len();
        if idx.len() != self.order {
            return Err(TensorError::IndexArity {
                entry,
                expected: self.order,
                got: idx.len(),
            });
        }
        if let Some(&index) = idx.iter().find(|&&i| i >= self.dim) {
            return Err(TensorError::IndexOutOfRange {
                entry,
                index,
                dim: self.dim,
            });
        }
        if !value.is_finite() {
            return Err(TensorError::NonFinite { entry });
        }
        self.indices.extend(idx.iter().map(|&i| i as u32));
        self.values.push(value);
        self.row_ptr = None;
        Ok(())
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of stored entries (including duplicates when not canonical).
    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn is_canonical(&self) -> bool {
        self.row_ptr.is_some()
    }

    /// Stored entries in storage order.
    pub fn entries(&self) -> impl Iterator<Item = (&[u32], f64)> + '_ {
        self.indices
            .chunks_exact(self.order)
            .zip(self.values.iter().copied())
    }

    /// Sorts, merges duplicates and drops explicit zeros.
    pub fn canonicalize(&mut self) {
        if self.is_canonical() {
            return;
        }
        let m = self.order;
        let mut perm: Vec<usize> = (0..self.values.len()).collect();
        let idx = &self.indices;
        // Stable so duplicates accumulate in insertion order.
        perm.sort_by(|&a, &b| idx[a * m..(a + 1) * m].cmp(&idx[b * m..(b + 1) * m]));

        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        let mut k = 0;
        while k < perm.len() {
            let key = &idx[perm[k] * m..(perm[k] + 1) * m];
            let mut sum = 0.0;
            let mut l = k;
            while l < perm.len() && &idx[perm[l] * m..(perm[l] + 1) * m] == key {
                sum += self.values[perm[l]];
                l += 1;
            }
            if sum != 0.0 {
                indices.extend_from_slice(key);
                values.push(sum);
            }
            k = l;
        }
        self.indices = indices;
        self.values = values;
        self.row_ptr = Some(build_row_ptr(&self.indices, m, self.dim));
    }

    /// Consuming form of [`Self::canonicalize`].
    pub fn into_canonical(mut self) -> Self {
        self.canonicalize();
        self
    }

    pub(crate) fn canonical_view(&self) -> Cow<'_, SquareTensor> {
        if self.is_canonical() {
            Cow::Borrowed(self)
        } else {
            Cow::Owned(self.clone().into_canonical())
        }
    }

    /// Value of the logical tensor at `idx` (duplicates summed).
    pub fn get(&self, idx: &[usize]) -> f64 {
        if idx.len() != self.order || idx.iter().any(|&i| i >= self.dim) {
            return 0.0;
        }
        let key: Vec<u32> = idx.iter().map(|&i| i as u32).collect();
        match &self.row_ptr {
            Some(rp) => {
                let m = self.order;
                let (lo, hi) = (rp[idx[0]], rp[idx[0] + 1]);
                let rows = &self.indices[lo * m..hi * m];
                let mut a = 0;
                let mut b = hi - lo;
                while a < b {
                    let mid = (a + b) / 2;
                    match rows[mid * m..(mid + 1) * m].cmp(&key) {
                        std::cmp::Ordering::Less => a = mid + 1,
                        std::cmp::Ordering::Greater => b = mid,
                        std::cmp::Ordering::Equal => return self.values[lo + mid],
                    }
                }
                0.0
            }
            None => self
                .entries()
                .filter(|(t, _)| *t == key.as_slice())
                .map(|(_, v)| v)
                .sum(),
        }
    }

    /// Returns `factor * self`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut t = self.clone();
        t.values.iter_mut().for_each(|v| *v *= factor);
        if factor == 0.0 {
            t.indices.clear();
            t.values.clear();
            t.row_ptr = None;
            t.canonicalize();
        }
        t
    }

    /// Returns `self / divisor`, entry by entry.
    pub fn divided_by(&self, divisor: f64) -> Self {
        let mut t = self.clone();
        t.values.iter_mut().for_each(|v| *v /= divisor);
        t
    }

    /// Largest absolute entry of the logical tensor.
    pub fn max_abs(&self) -> f64 {
        self.canonical_view()
            .values
            .iter()
            .fold(0.0_f64, |acc, v| acc.max(v.abs()))
    }

    /// Diagonal entries `a_{i...i}`.
    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.dim];
        for (t, v) in self.entries() {
            if is_diagonal_tuple(t) {
                d[t[0] as usize] += v;
            }
        }
        d
    }

    /// Sum of the entries of each row `i` (all tuples starting with `i`).
    pub fn row_sums(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.dim];
        for (t, v) in self.entries() {
            s[t[0] as usize] += v;
        }
        s
    }

    fn check_vector(&self, x: &[f64]) -> Result<(), TensorError> {
        if x.len() != self.dim {
            return Err(TensorError::DimensionMismatch {
                expected: self.dim,
                got: x.len(),
            });
        }
        Ok(())
    }

    /// `y_i = sum a_{i i2 ... im} x_{i2} ... x_{im}`.
    pub fn contract_m1(&self, x: &[f64]) -> Result<Vec<f64>, TensorError> {
        self.contract_m1_with(x, Execution::default())
    }

    pub fn contract_m1_with(&self, x: &[f64], exec: Execution) -> Result<Vec<f64>, TensorError> {
        self.check_vector(x)?;
        let t = self.canonical_view();
        let mut y = vec![0.0; self.dim];
        exec::for_each_chunk(&mut y, 1, exec, |i, out| out[0] = t.row_value(i, x));
        Ok(y)
    }

    /// Component `i` of [`Self::contract_m1`]. The tensor must be canonical.
    pub fn contract_m1_row(&self, i: usize, x: &[f64]) -> f64 {
        assert!(self.is_canonical(), "row access requires a canonical tensor");
        self.row_value(i, x)
    }

    /// Components `rows` of [`Self::contract_m1`].
    pub fn contract_m1_rows(&self, rows: &[usize], x: &[f64]) -> Result<Vec<f64>, TensorError> {
        self.check_vector(x)?;
        let t = self.canonical_view();
        Ok(exec::map_collect(rows, Execution::default(), |&i| {
            t.row_value(i, x)
        }))
    }

    fn row_value(&self, i: usize, x: &[f64]) -> f64 {
        let rp = self.row_ptr.as_ref().expect("canonical");
        let m = self.order;
        let mut acc = 0.0;
        for e in rp[i]..rp[i + 1] {
            let mut prod = self.values[e];
            for &k in &self.indices[e * m + 1..(e + 1) * m] {
                prod *= x[k as usize];
            }
            acc += prod;
        }
        acc
    }

    /// `M_{ij} = sum a_{i j i3 ... im} x_{i3} ... x_{im}` as a dense matrix.
    pub fn contract_m2(&self, x: &[f64]) -> Result<DMatrix<f64>, TensorError> {
        self.contract_m2_with(x, Execution::default())
    }

    pub fn contract_m2_with(&self, x: &[f64], exec: Execution) -> Result<DMatrix<f64>, TensorError> {
        self.check_vector(x)?;
        let t = self.canonical_view();
        let n = self.dim;
        let m = self.order;
        let rp = t.row_ptr.as_ref().expect("canonical");
        let mut buf = vec![0.0; n * n];
        exec::for_each_chunk(&mut buf, n, exec, |i, row| {
            for e in rp[i]..rp[i + 1] {
                let tuple = &t.indices[e * m..(e + 1) * m];
                let mut prod = t.values[e];
                for &k in &tuple[2..] {
                    prod *= x[k as usize];
                }
                row[tuple[1] as usize] += prod;
            }
        });
        Ok(DMatrix::from_row_slice(n, n, &buf))
    }

    /// `(m - 1) * contract_m2(x)`: the Jacobian of `x -> contract_m1(x)`
    /// when `self` is semi-symmetric.
    pub fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>, TensorError> {
        self.jacobian_with(x, Execution::default())
    }

    pub fn jacobian_with(&self, x: &[f64], exec: Execution) -> Result<DMatrix<f64>, TensorError> {
        let mut j = self.contract_m2_with(x, exec)?;
        j *= (self.order - 1) as f64;
        Ok(j)
    }

    /// Averages every row over the permutations of its trailing `m - 1`
    /// indices. Each distinct multiset of trailing indices is visited once:
    /// its values are summed and spread evenly over its distinct
    /// arrangements, so the cost never involves `(m - 1)!`.
    pub fn semi_symmetrize(&self) -> SquareTensor {
        let t = self.canonical_view();
        let m = self.order;
        let nnz = t.values.len();

        let mut keys = Vec::with_capacity(nnz * m);
        for tuple in t.indices.chunks_exact(m) {
            keys.push(tuple[0]);
            let start = keys.len();
            keys.extend_from_slice(&tuple[1..]);
            keys[start..].sort_unstable();
        }
        let mut perm: Vec<usize> = (0..nnz).collect();
        perm.sort_by(|&a, &b| keys[a * m..(a + 1) * m].cmp(&keys[b * m..(b + 1) * m]));

        let mut out = SquareTensor {
            order: m,
            dim: self.dim,
            indices: Vec::with_capacity(t.indices.len()),
            values: Vec::with_capacity(nnz),
            row_ptr: None,
        };
        let mut arrangement: Vec<u32> = Vec::with_capacity(m - 1);
        let mut arrangements: Vec<u32> = Vec::new();
        let mut k = 0;
        while k < nnz {
            let key = &keys[perm[k] * m..(perm[k] + 1) * m];
            let mut l = k;
            let mut sum = 0.0;
            while l < nnz && &keys[perm[l] * m..(perm[l] + 1) * m] == key {
                sum += t.values[perm[l]];
                l += 1;
            }

            arrangements.clear();
            arrangement.clear();
            arrangement.extend_from_slice(&key[1..]);
            loop {
                arrangements.extend_from_slice(&arrangement);
                if !next_permutation(&mut arrangement) {
                    break;
                }
            }
            let count = arrangements.len() / (m - 1);
            let first = t.values[perm[k]];
            let uniform = l - k == count && perm[k..l].iter().all(|&e| t.values[e] == first);
            let value = if uniform { first } else { sum / count as f64 };

            for a in arrangements.chunks_exact(m - 1) {
                out.indices.push(key[0]);
                out.indices.extend_from_slice(a);
                out.values.push(value);
            }
            k = l;
        }
        out.canonicalize();
        out
    }

    /// Whether every row is symmetric in its trailing indices, up to `tol`
    /// absolute.
    pub fn is_semi_symmetric(&self, tol: f64) -> bool {
        let t = self.canonical_view();
        let mut key = vec![0usize; self.order];
        let symmetric = t.entries().all(|(tuple, v)| {
            key[0] = tuple[0] as usize;
            let mut trailing: Vec<u32> = tuple[1..].to_vec();
            trailing.sort_unstable();
            loop {
                for (dst, &src) in key[1..].iter_mut().zip(&trailing) {
                    *dst = src as usize;
                }
                if (t.get(&key) - v).abs() > tol {
                    return false;
                }
                if !next_permutation(&mut trailing) {
                    return true;
                }
            }
        });
        symmetric
    }
}

fn check_shape(order: usize, dim: usize) -> Result<(), TensorError> {
    if order < 3 {
        return Err(TensorError::OrderTooSmall(order));
    }
    if dim == 0 {
        return Err(TensorError::EmptyDimension);
    }
    if dim > u32::MAX as usize {
        return Err(TensorError::DimensionTooLarge(dim));
    }
    Ok(())
}

fn build_row_ptr(indices: &[u32], order: usize, dim: usize) -> Vec<usize> {
    let mut rp = vec![0usize; dim + 1];
    for tuple in indices.chunks_exact(order) {
        rp[tuple[0] as usize + 1] += 1;
    }
    for i in 0..dim {
        rp[i + 1] += rp[i];
    }
    rp
}

pub(crate) fn is_diagonal_tuple(t: &[u32]) -> bool {
    t.iter().all(|&i| i == t[0])
}

/// Advances `a` to the next lexicographic permutation of its multiset.
/// Returns `false` (leaving `a` untouched) when `a` is the last one.
pub(crate) fn next_permutation<T: Ord>(a: &mut [T]) -> bool {
    if a.len() < 2 {
        return false;
    }
    let mut i = a.len() - 1;
    while i > 0 && a[i - 1] >= a[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = a.len() - 1;
    while a[j] <= a[i - 1] {
        j -= 1;
    }
    a.swap(i - 1, j);
    a[i..].reverse();
    true
}
