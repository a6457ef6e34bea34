//! Many-body Hamiltonians on a graph and their extreme eigenvalues.
//!
//! `Ĥ_QMC = ½ Σ w_ij (𝟙 − Ŝ_i·Ŝ_j / S²)` and
//! `Ĥ_QHA = (1/(2S²)) Σ w_ij Ŝ_i·Ŝ_j`, so `Ĥ_QMC = W·𝟙 − Ĥ_QHA`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::eigen::{extreme_eigenvalue, EigenConfig, SpectralResult, Which};
use crate::error::Result;
use crate::graph::WeightedGraph;
use crate::scalar::{Cplx, Real};
use crate::sparse::{many_body_dim, site_operator_capped, SparseOperator, SPARSE_DIM_CAP};
use crate::spin::{spin_matrices, SpinTriple, SpinValue};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactConfig {
    /// Largest many-body dimension `d^N` the solver will assemble.
    pub dim_cap: usize,
    pub eigen: EigenConfig,
}

impl Default for ExactConfig {
    fn default() -> Self {
        Self {
            dim_cap: SPARSE_DIM_CAP,
            eigen: EigenConfig::default(),
        }
    }
}

/// `Ŝ_i·Ŝ_j = Σ_α Ŝ^α_i Ŝ^α_j` on `n` sites.
pub fn spin_dot<T: Real>(spin: &SpinTriple<T>, i: usize, j: usize, n: usize, cap: usize) -> Result<SparseOperator<T>> {
    let dim = many_body_dim(spin.s.dim(), n, cap)?;
    let one = Cplx::from(T::one());
    let mut terms = Vec::with_capacity(3);
    for m in spin.components() {
        let a = site_operator_capped(m, i, n, cap)?;
        let b = site_operator_capped(m, j, n, cap)?;
        terms.push(a.matmul(&b));
    }
    let refs: Vec<_> = terms.iter().map(|t| (one, t)).collect();
    Ok(SparseOperator::linear_combination(dim, &refs))
}

/// `Σ_{ij∈E} w_ij Ŝ_i·Ŝ_j`, assembled edge by edge.
pub fn heisenberg_sum<T: Real>(g: &WeightedGraph<T>, s: SpinValue, cap: usize) -> Result<SparseOperator<T>> {
    let n = g.vertex_count();
    let dim = many_body_dim(s.dim(), n, cap)?;
    let spin = spin_matrices::<T>(s);
    let mut acc = SparseOperator::zero(dim);
    for e in g.edges() {
        if e.w == T::zero() {
            continue;
        }
        let term = spin_dot(&spin, e.i, e.j, n, cap)?;
        let one = Cplx::from(T::one());
        acc = SparseOperator::linear_combination(dim, &[(one, &acc), (Cplx::from(e.w), &term)]);
    }
    Ok(acc)
}

/// `Ĥ_QHA = (1/(2S²)) Σ w_ij Ŝ_i·Ŝ_j`.
pub fn build_qha_hamiltonian<T: Real>(g: &WeightedGraph<T>, s: SpinValue, cap: usize) -> Result<SparseOperator<T>> {
    let sv = s.s::<T>();
    Ok(heisenberg_sum(g, s, cap)?.scaled(T::one() / (T::lit(2.0) * sv * sv)))
}

/// `Ĥ_QMC = ½ Σ w_ij (𝟙 − Ŝ_i·Ŝ_j/S²)`, assembled term by term.
pub fn build_qmc_hamiltonian<T: Real>(g: &WeightedGraph<T>, s: SpinValue, cap: usize) -> Result<SparseOperator<T>> {
    let n = g.vertex_count();
    let dim = many_body_dim(s.dim(), n, cap)?;
    let spin = spin_matrices::<T>(s);
    let sv = s.s::<T>();
    let inv_s2 = T::one() / (sv * sv);
    let identity = SparseOperator::identity(dim);
    let mut acc = SparseOperator::zero(dim);
    let half = T::lit(0.5);
    for e in g.edges() {
        if e.w == T::zero() {
            continue;
        }
        let dot = spin_dot(&spin, e.i, e.j, n, cap)?;
        let hw = Cplx::from(half * e.w);
        acc = SparseOperator::linear_combination(
            dim,
            &[
                (Cplx::from(T::one()), &acc),
                (hw, &identity),
                (-hw * Cplx::from(inv_s2), &dot),
            ],
        );
    }
    Ok(acc)
}

/// Total `Ŝ^3 = Σ_i Ŝ^3_i`.
pub fn total_sz<T: Real>(n: usize, s: SpinValue, cap: usize) -> Result<SparseOperator<T>> {
    let dim = many_body_dim(s.dim(), n, cap)?;
    let spin = spin_matrices::<T>(s);
    let mut acc = SparseOperator::zero(dim);
    for i in 0..n {
        acc = acc.add(&site_operator_capped(&spin.sz, i, n, cap)?);
    }
    Ok(acc)
}

/// `QMaxCut_S(G)`: the largest eigenvalue of `Ĥ_QMC` with its eigenvector.
pub fn qmaxcut<T: Real>(g: &WeightedGraph<T>, s: SpinValue, cfg: &ExactConfig) -> Result<SpectralResult<T>> {
    let h = build_qmc_hamiltonian(g, s, cfg.dim_cap)?;
    extreme_eigenvalue(&h, Which::Largest, &cfg.eigen)
}

/// `QHA_S(G)`: the smallest eigenvalue of `Ĥ_QHA` with its eigenvector.
pub fn qha<T: Real>(g: &WeightedGraph<T>, s: SpinValue, cfg: &ExactConfig) -> Result<SpectralResult<T>> {
    let h = build_qha_hamiltonian(g, s, cfg.dim_cap)?;
    extreme_eigenvalue(&h, Which::Smallest, &cfg.eigen)
}

pub fn qmaxcut_value<T: Real>(g: &WeightedGraph<T>, s: SpinValue, cfg: &ExactConfig) -> Result<T> {
    Ok(qmaxcut(g, s, cfg)?.value)
}

pub fn qha_value<T: Real>(g: &WeightedGraph<T>, s: SpinValue, cfg: &ExactConfig) -> Result<T> {
    Ok(qha(g, s, cfg)?.value)
}

/// Both values from a single eigensolve via `QMaxCut = W − QHA`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactValues<T> {
    pub qmaxcut: T,
    pub qha: T,
    pub residual: T,
    pub dim: usize,
}

pub fn exact_values<T: Real>(g: &WeightedGraph<T>, s: SpinValue, cfg: &ExactConfig) -> Result<ExactValues<T>> {
    let r = qha(g, s, cfg)?;
    Ok(ExactValues {
        qmaxcut: g.total_weight() - r.value,
        qha: r.value,
        residual: r.residual,
        dim: r.vector.len(),
    })
}

/// Dense copy of an operator, for small oracles.
pub fn dense<T: Real>(h: &SparseOperator<T>) -> DMatrix<Cplx<T>> {
    h.to_dense()
}
