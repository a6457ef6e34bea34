//! Compressed-row complex operators on the many-body space `(C^d)^{⊗N}`.
//!
//! Basis layout is site-major: site 0 is the slowest-varying digit of the
//! base-`d` basis index.

use nalgebra::{ComplexField, DMatrix};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// Hard ceiling on operator dimension for any sparse assembly.
pub const SPARSE_DIM_CAP: usize = 2_000_000;

/// `d^n` with overflow and cap checks.
pub fn many_body_dim(d: usize, n: usize, cap: usize) -> Result<usize> {
    let dim = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if dim > cap as u128 {
        return Err(Error::SizeCap { dim, cap });
    }
    Ok(dim as usize)
}

/// Square complex matrix in CSR form.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseOperator<T> {
    dim: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    vals: Vec<Cplx<T>>,
}

impl<T: Real> SparseOperator<T> {
    pub fn zero(dim: usize) -> Self {
        Self {
            dim,
            row_ptr: vec![0; dim + 1],
            col_idx: Vec::new(),
            vals: Vec::new(),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::diagonal(vec![T::one(); dim])
    }

    pub fn diagonal(diag: Vec<T>) -> Self {
        let dim = diag.len();
        Self {
            dim,
            row_ptr: (0..=dim).collect(),
            col_idx: (0..dim).collect(),
            vals: diag.into_iter().map(|x| Cplx::new(x, T::zero())).collect(),
        }
    }

    /// Builds from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(dim: usize, mut triplets: Vec<(usize, usize, Cplx<T>)>) -> Self {
        triplets.sort_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut vals: Vec<Cplx<T>> = Vec::with_capacity(triplets.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in triplets {
            assert!(r < dim && c < dim, "triplet ({r}, {c}) outside {dim}x{dim}");
            if last == Some((r, c)) {
                *vals.last_mut().unwrap() += v;
            } else {
                row_ptr[r + 1] += 1;
                col_idx.push(c);
                vals.push(v);
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            dim,
            row_ptr,
            col_idx,
            vals,
        }
    }

    /// Entries whose modulus is at most `tol` are dropped.
    pub fn from_dense(m: &DMatrix<Cplx<T>>, tol: T) -> Self {
        assert_eq!(m.nrows(), m.ncols(), "operator must be square");
        let mut t = Vec::new();
        for r in 0..m.nrows() {
            for c in 0..m.ncols() {
                let v = m[(r, c)];
                if v.modulus() > tol {
                    t.push((r, c, v));
                }
            }
        }
        Self::from_triplets(m.nrows(), t)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Iterates `(row, col, value)` in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, Cplx<T>)> + '_ {
        (0..self.dim)
            .flat_map(move |r| (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.col_idx[k], self.vals[k])))
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, Cplx<T>)> + '_ {
        (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (self.col_idx[k], self.vals[k]))
    }

    pub fn get(&self, r: usize, c: usize) -> Cplx<T> {
        let cols = &self.col_idx[self.row_ptr[r]..self.row_ptr[r + 1]];
        match cols.binary_search(&c) {
            Ok(k) => self.vals[self.row_ptr[r] + k],
            Err(_) => Cplx::zero(),
        }
    }

    /// `y = A x`.
    pub fn apply_into(&self, x: &[Cplx<T>], y: &mut [Cplx<T>]) {
        assert_eq!(x.len(), self.dim);
        assert_eq!(y.len(), self.dim);
        for (r, yr) in y.iter_mut().enumerate() {
            let mut acc = Cplx::zero();
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * x[self.col_idx[k]];
            }
            *yr = acc;
        }
    }

    pub fn apply(&self, x: &[Cplx<T>]) -> Vec<Cplx<T>> {
        let mut y = vec![Cplx::zero(); self.dim];
        self.apply_into(x, &mut y);
        y
    }

    /// `⟨x|A|x⟩` (real part; exact for Hermitian `A`).
    pub fn expectation(&self, x: &[Cplx<T>]) -> T {
        let ax = self.apply(x);
        x.iter().zip(&ax).map(|(a, b)| (a.conj() * b).re).sum()
    }

    /// Sparse product `self · rhs`.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.dim, rhs.dim);
        let n = self.dim;
        let mut acc = vec![Cplx::<T>::zero(); n];
        let mut mark = vec![usize::MAX; n];
        let mut touched = Vec::new();
        let mut row_ptr = Vec::with_capacity(n + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        for r in 0..n {
            for (k, a) in self.row(r) {
                for (c, b) in rhs.row(k) {
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = Cplx::zero();
                        touched.push(c);
                    }
                    acc[c] += a * b;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                col_idx.push(c);
                vals.push(acc[c]);
            }
            touched.clear();
            row_ptr.push(col_idx.len());
        }
        Self {
            dim: n,
            row_ptr,
            col_idx,
            vals,
        }
    }

    /// `Σ_k coeff_k · op_k`, merged row by row.
    pub fn linear_combination(dim: usize, terms: &[(Cplx<T>, &Self)]) -> Self {
        for (_, op) in terms {
            assert_eq!(op.dim, dim);
        }
        let mut acc = vec![Cplx::<T>::zero(); dim];
        let mut mark = vec![usize::MAX; dim];
        let mut touched = Vec::new();
        let mut row_ptr = Vec::with_capacity(dim + 1);
        row_ptr.push(0);
        let mut col_idx = Vec::new();
        let mut vals = Vec::new();
        for r in 0..dim {
            for (coeff, op) in terms {
                for (c, v) in op.row(r) {
                    if mark[c] != r {
                        mark[c] = r;
                        acc[c] = Cplx::zero();
                        touched.push(c);
                    }
                    acc[c] += *coeff * v;
                }
            }
            touched.sort_unstable();
            for &c in &touched {
                col_idx.push(c);
                vals.push(acc[c]);
            }
            touched.clear();
            row_ptr.push(col_idx.len());
        }
        Self {
            dim,
            row_ptr,
            col_idx,
            vals,
        }
    }

    pub fn scaled(&self, s: T) -> Self {
        let mut out = self.clone();
        for v in &mut out.vals {
            *v = v.scale(s);
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let one = Cplx::new(T::one(), T::zero());
        Self::linear_combination(self.dim, &[(one, self), (one, rhs)])
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let one = Cplx::new(T::one(), T::zero());
        Self::linear_combination(self.dim, &[(one, self), (-one, rhs)])
    }

    /// `[A, B] = AB − BA`.
    pub fn commutator(&self, rhs: &Self) -> Self {
        self.matmul(rhs).sub(&rhs.matmul(self))
    }

    pub fn max_abs_entry(&self) -> T {
        self.vals.iter().fold(T::zero(), |m, v| m.max(v.modulus()))
    }

    /// Largest `|A_rc − conj(A_cr)|`.
    pub fn hermiticity_defect(&self) -> T {
        self.iter()
            .fold(T::zero(), |m, (r, c, v)| m.max((v - self.get(c, r).conj()).modulus()))
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.hermiticity_defect() <= tol
    }

    pub fn to_dense(&self) -> DMatrix<Cplx<T>> {
        let mut m = DMatrix::from_element(self.dim, self.dim, Cplx::zero());
        for (r, c, v) in self.iter() {
            m[(r, c)] += v;
        }
        m
    }
}

/// Embeds a `d × d` matrix at `site` of an `n`-site chain:
/// `𝟙 ⊗ … ⊗ a ⊗ … ⊗ 𝟙`.
pub fn site_operator<T: Real>(a: &DMatrix<Cplx<T>>, site: usize, n: usize) -> Result<SparseOperator<T>> {
    site_operator_capped(a, site, n, SPARSE_DIM_CAP)
}

pub fn site_operator_capped<T: Real>(
    a: &DMatrix<Cplx<T>>,
    site: usize,
    n: usize,
    cap: usize,
) -> Result<SparseOperator<T>> {
    if site >= n {
        return Err(Error::SiteOutOfRange { site, sites: n });
    }
    let d = a.nrows();
    assert_eq!(d, a.ncols(), "single-site matrix must be square");
    let dim = many_body_dim(d, n, cap)?;
    let stride = d.pow((n - 1 - site) as u32);

    // local nonzeros a[(to, from)] grouped by the column (`from`) digit
    let mut by_col: Vec<Vec<(usize, Cplx<T>)>> = vec![Vec::new(); d];
    for from in 0..d {
        for to in 0..d {
            let v = a[(to, from)];
            if !v.is_zero() {
                by_col[from].push((to, v));
            }
        }
    }
    let mut by_row: Vec<Vec<(usize, Cplx<T>)>> = vec![Vec::new(); d];
    for (from, entries) in by_col.iter().enumerate() {
        for &(to, v) in entries {
            by_row[to].push((from, v));
        }
    }

    let mut row_ptr = Vec::with_capacity(dim + 1);
    row_ptr.push(0);
    let mut col_idx = Vec::new();
    let mut vals = Vec::new();
    for r in 0..dim {
        let digit = (r / stride) % d;
        let base = r - digit * stride;
        for &(from, v) in &by_row[digit] {
            col_idx.push(base + from * stride);
            vals.push(v);
        }
        row_ptr.push(col_idx.len());
    }
    Ok(SparseOperator {
        dim,
        row_ptr,
        col_idx,
        vals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Cplx<f64> {
        Cplx::new(re, 0.0)
    }

    fn half_sz() -> DMatrix<Cplx<f64>> {
        DMatrix::from_row_slice(2, 2, &[c(0.5), c(0.0), c(0.0), c(-0.5)])
    }

    #[test]
    fn single_site_embedding_is_the_matrix() {
        let op = site_operator(&half_sz(), 0, 1).unwrap();
        assert_eq!(op.to_dense(), half_sz());
    }

    #[test]
    fn identity_embeds_to_identity() {
        let id = DMatrix::<Cplx<f64>>::identity(3, 3);
        for site in 0..3 {
            let op = site_operator(&id, site, 3).unwrap();
            assert_eq!(op.to_dense(), DMatrix::identity(27, 27));
        }
    }

    #[test]
    fn second_site_sz_matches_kronecker() {
        // 𝟙₂ ⊗ diag(½, −½)
        let op = site_operator(&half_sz(), 1, 2).unwrap();
        let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.5), c(-0.5), c(0.5), c(-0.5)]));
        assert_eq!(op.to_dense(), expected);
    }

    #[test]
    fn embedding_matches_dense_kronecker() {
        let a = DMatrix::from_fn(3, 3, |r, col| Cplx::new((r * 3 + col) as f64, r as f64 - col as f64));
        let id = DMatrix::<Cplx<f64>>::identity(3, 3);
        let expected = id.kronecker(&a).kronecker(&id);
        let op = site_operator(&a, 1, 3).unwrap();
        assert_eq!(op.to_dense(), expected);
    }

    #[test]
    fn site_out_of_range() {
        assert!(matches!(
            site_operator(&half_sz(), 2, 2),
            Err(Error::SiteOutOfRange { site: 2, sites: 2 })
        ));
    }

    #[test]
    fn size_cap_is_enforced() {
        assert!(matches!(
            site_operator_capped(&half_sz(), 0, 12, 1024),
            Err(Error::SizeCap { dim: 4096, cap: 1024 })
        ));
    }

    #[test]
    fn products_and_sums_match_dense() {
        let a = DMatrix::from_fn(2, 2, |r, col| Cplx::new(r as f64 + 1.0, col as f64));
        let b = DMatrix::from_fn(2, 2, |r, col| Cplx::new(col as f64 - r as f64, 0.5));
        let sa = site_operator(&a, 0, 3).unwrap();
        let sb = site_operator(&b, 2, 3).unwrap();
        let prod = sa.matmul(&sb).to_dense();
        assert!((prod - sa.to_dense() * sb.to_dense()).norm() < 1e-14);
        let comb = SparseOperator::linear_combination(8, &[(Cplx::new(2.0, 1.0), &sa), (c(-1.0), &sb)]);
        let dense = sa.to_dense() * Cplx::new(2.0, 1.0) - sb.to_dense();
        assert!((comb.to_dense() - dense).norm() < 1e-14);
        // distinct sites commute
        assert!(sa.commutator(&sb).max_abs_entry() < 1e-14);
    }

    #[test]
    fn triplets_merge_duplicates() {
        let op = SparseOperator::from_triplets(2, vec![(1, 0, c(1.0)), (0, 1, c(2.0)), (1, 0, c(3.0))]);
        assert_eq!(op.nnz(), 2);
        assert_eq!(op.get(1, 0), c(4.0));
        assert!(!op.is_hermitian(1e-12));
        assert_eq!(op.apply(&[c(1.0), c(1.0)]), vec![c(2.0), c(4.0)]);
    }
}
