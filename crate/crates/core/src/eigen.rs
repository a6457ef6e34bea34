//! Extreme eigenpairs of Hermitian operators.
//!
//! Small operators go through a dense Hermitian eigendecomposition; larger
//! ones through Lanczos with full reorthogonalization and explicit restarts
//! from the current Ritz vector. Every result carries the true residual
//! `‖Hv − λv‖`.

use nalgebra::{ComplexField, DMatrix, SymmetricEigen};

use num_traits::Zero;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};
use crate::sparse::SparseOperator;
use crate::spin::StateVector;

/// Largest dimension for which a dense path is ever allowed.
pub const DENSE_DIM_CAP: usize = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Which {
    Largest,
    Smallest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EigenConfig {
    /// Operators up to this dimension use the dense solver.
    pub dense_threshold: usize,
    pub seed: u64,
    /// Krylov basis size between restarts.
    pub krylov_dim: usize,
    /// Total matrix-vector products before giving up.
    pub max_iterations: usize,
    /// Target residual relative to `max(1, |λ|)`.
    pub tolerance: f64,
}

impl Default for EigenConfig {
    fn default() -> Self {
        Self {
            dense_threshold: 256,
            seed: 0,
            krylov_dim: 120,
            max_iterations: 20_000,
            tolerance: 1e-10,
        }
    }
}

/// An extreme eigenpair with its residual certificate.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult<T: Real> {
    pub value: T,
    pub vector: StateVector<T>,
    pub residual: T,
    pub iterations: usize,
}

fn residual<T: Real>(h: &SparseOperator<T>, v: &[Cplx<T>], lambda: T) -> T {
    let hv = h.apply(v);
    hv.iter()
        .zip(v)
        .map(|(a, b)| (a - b.scale(lambda)).norm_sqr())
        .sum::<T>()
        .sqrt()
}

fn real_part_if_real<T: Real>(m: &DMatrix<Cplx<T>>) -> Option<DMatrix<T>> {
    m.iter().all(|z| z.im == T::zero()).then(|| m.map(|z| z.re))
}

/// Full dense Hermitian spectrum, eigenvalues ascending with matching
/// eigenvector columns. Real symmetric input takes the real solver.
pub fn dense_spectrum<T: Real>(m: &DMatrix<Cplx<T>>) -> (Vec<T>, DMatrix<Cplx<T>>) {
    let (values, vectors): (Vec<T>, DMatrix<Cplx<T>>) = match real_part_if_real(m) {
        Some(re) => {
            let eig = SymmetricEigen::new(re);
            (
                eig.eigenvalues.iter().copied().collect(),
                eig.eigenvectors.map(Cplx::from),
            )
        }
        None => {
            let eig = SymmetricEigen::new(m.clone());
            (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
        }
    };
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
    let sorted = order.iter().map(|&k| values[k]).collect();
    let columns = DMatrix::from_fn(m.nrows(), order.len(), |r, c| vectors[(r, order[c])]);
    (sorted, columns)
}

/// Ascending eigenvalues of a dense Hermitian matrix.
pub fn dense_eigenvalues<T: Real>(m: &DMatrix<Cplx<T>>) -> Vec<T> {
    let mut v: Vec<T> = match real_part_if_real(m) {
        Some(re) => re.symmetric_eigenvalues().iter().copied().collect(),
        None => m.clone().symmetric_eigenvalues().iter().copied().collect(),
    };
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    v
}

/// Dense extreme eigenpair; the oracle for the Lanczos path.
pub fn dense_extreme<T: Real>(h: &SparseOperator<T>, which: Which) -> Result<SpectralResult<T>> {
    if h.dim() > DENSE_DIM_CAP {
        return Err(Error::SizeCap {
            dim: h.dim() as u128,
            cap: DENSE_DIM_CAP,
        });
    }
    let (values, vectors) = dense_spectrum(&h.to_dense());
    let k = match which {
        Which::Largest => values.len() - 1,
        Which::Smallest => 0,
    };
    let vector = StateVector::new(vectors.column(k).iter().copied().collect())?;
    let res = residual(h, vector.amplitudes(), values[k]);
    Ok(SpectralResult {
        value: values[k],
        vector,
        residual: res,
        iterations: 0,
    })
}

/// Extreme eigenpair by the configured backend.
pub fn extreme_eigenvalue<T: Real>(
    h: &SparseOperator<T>,
    which: Which,
    cfg: &EigenConfig,
) -> Result<SpectralResult<T>> {
    if h.dim() == 0 {
        return Err(Error::InvalidParameter("operator dimension must be at least 1".into()));
    }
    if h.dim() <= cfg.dense_threshold.min(DENSE_DIM_CAP) {
        dense_extreme(h, which)
    } else {
        lanczos(h, which, cfg)
    }
}

fn dotc<T: Real>(a: &[Cplx<T>], b: &[Cplx<T>]) -> Cplx<T> {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn vnorm<T: Real>(a: &[Cplx<T>]) -> T {
    a.iter().map(|x| x.norm_sqr()).sum::<T>().sqrt()
}

/// Thick-restart Lanczos with full reorthogonalization.
///
/// The projected matrix `Vᴴ H V` is accumulated from the Gram-Schmidt
/// coefficients. When the basis is full, the best `krylov_dim / 3` Ritz
/// vectors are kept together with the pending residual direction.
pub fn lanczos<T: Real>(h: &SparseOperator<T>, which: Which, cfg: &EigenConfig) -> Result<SpectralResult<T>> {
    let n = h.dim();
    let tol = T::tol(cfg.tolerance);
    let m = cfg.krylov_dim.clamp(2, n);
    let keep = (m / 3).max(1);
    const CHECK_EVERY: usize = 8;

    // a real start vector keeps real operators in real arithmetic
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut v0: Vec<Cplx<T>> = (0..n)
        .map(|_| {
            let re: f64 = StandardNormal.sample(&mut rng);
            Cplx::from(T::lit(re))
        })
        .collect();
    let s0 = vnorm(&v0);
    v0.iter_mut().for_each(|x| *x = x.unscale(s0));

    // basis[..done] have their projected columns; basis[done] (if any) is pending
    let mut basis: Vec<Vec<Cplx<T>>> = vec![v0];
    let mut proj = DMatrix::<Cplx<T>>::zeros(m, m);
    let mut done = 0usize;
    let mut last_beta = T::zero();
    let mut iterations = 0usize;
    let mut w = vec![Cplx::<T>::zero(); n];
    let mut best_residual = T::max_value().unwrap_or(T::one());

    let pick = |values: &[T]| match which {
        Which::Largest => values.len() - 1,
        Which::Smallest => 0,
    };

    loop {
        // expand
        let mut invariant = false;
        while done < m && done < basis.len() && iterations < cfg.max_iterations {
            h.apply_into(&basis[done], &mut w);
            iterations += 1;
            let mut coeffs = vec![Cplx::<T>::zero(); basis.len()];
            for _ in 0..2 {
                for (q, c) in basis.iter().zip(coeffs.iter_mut()) {
                    let proj_c = dotc(q, &w);
                    *c += proj_c;
                    for (wi, qi) in w.iter_mut().zip(q) {
                        *wi -= proj_c * qi;
                    }
                }
            }
            for (i, c) in coeffs.iter().enumerate().take(done + 1) {
                if i == done {
                    proj[(i, i)] = Cplx::from(c.re);
                } else {
                    proj[(i, done)] = *c;
                    proj[(done, i)] = c.conj();
                }
            }
            done += 1;
            last_beta = vnorm(&w);
            let scale = T::one().max(proj[(done - 1, done - 1)].re.abs());
            if last_beta <= T::tol_floor() * scale || done == n {
                invariant = true;
                break;
            }
            if done < m {
                basis.push(w.iter().map(|x| x.unscale(last_beta)).collect());
            }
            if done.is_multiple_of(CHECK_EVERY) && done < m {
                let (values, vectors) = dense_spectrum(&proj.view((0, 0), (done, done)).into_owned());
                let k = pick(&values);
                let estimate = last_beta * vectors[(done - 1, k)].modulus();
                if estimate <= tol * T::one().max(values[k].abs()) * T::lit(0.1) {
                    break;
                }
            }
        }

        // Rayleigh-Ritz on the computed columns
        let (values, vectors) = dense_spectrum(&proj.view((0, 0), (done, done)).into_owned());
        let k = pick(&values);
        let mut x = vec![Cplx::<T>::zero(); n];
        for (q, c) in basis.iter().take(done).zip(vectors.column(k).iter()) {
            for (xi, qi) in x.iter_mut().zip(q) {
                *xi += qi * c;
            }
        }
        let xn = vnorm(&x);
        x.iter_mut().for_each(|v| *v = v.unscale(xn));
        let lambda = h.expectation(&x);
        let res = residual(h, &x, lambda);
        best_residual = best_residual.min(res);
        if res <= tol * T::one().max(lambda.abs()) {
            return Ok(SpectralResult {
                value: lambda,
                vector: StateVector::new(x)?,
                residual: res,
                iterations,
            });
        }
        if iterations >= cfg.max_iterations || (invariant && done == n) {
            return Err(Error::NoConvergence {
                iterations,
                residual: best_residual.as_f64(),
            });
        }

        // thick restart: keep the best Ritz vectors plus the pending direction
        let order: Vec<usize> = match which {
            Which::Largest => (0..done).rev().take(keep).collect(),
            Which::Smallest => (0..done).take(keep).collect(),
        };
        let mut kept: Vec<Vec<Cplx<T>>> = Vec::with_capacity(order.len() + 1);
        for &r in &order {
            let mut y = vec![Cplx::<T>::zero(); n];
            for (q, c) in basis.iter().take(done).zip(vectors.column(r).iter()) {
                for (yi, qi) in y.iter_mut().zip(q) {
                    *yi += qi * c;
                }
            }
            kept.push(y);
        }
        proj.fill(Cplx::zero());
        for (i, &r) in order.iter().enumerate() {
            proj[(i, i)] = Cplx::from(values[r]);
        }
        let pending = if invariant {
            None
        } else if basis.len() > done {
            Some(basis[done].clone())
        } else {
            Some(w.iter().map(|x| x.unscale(last_beta)).collect())
        };
        done = order.len();
        basis = kept;
        match pending {
            Some(p) => basis.push(p),
            None => {
                // fresh random direction orthogonal to the kept vectors
                let mut r: Vec<Cplx<T>> = (0..n)
                    .map(|_| {
                        let re: f64 = StandardNormal.sample(&mut rng);
                        Cplx::from(T::lit(re))
                    })
                    .collect();
                for _ in 0..2 {
                    for q in &basis {
                        let c = dotc(q, &r);
                        for (ri, qi) in r.iter_mut().zip(q) {
                            *ri -= c * qi;
                        }
                    }
                }
                let rn = vnorm(&r);
                if rn <= T::tol_floor() {
                    return Err(Error::NoConvergence {
                        iterations,
                        residual: best_residual.as_f64(),
                    });
                }
                basis.push(r.iter().map(|x| x.unscale(rn)).collect());
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::site_operator;
    use crate::spin::{spin_matrices, SpinValue};

    #[test]
    fn diagonal_largest() {
        let h = SparseOperator::<f64>::diagonal(vec![1.0, 2.0, 3.0]);
        let r = extreme_eigenvalue(&h, Which::Largest, &EigenConfig::default()).unwrap();
        assert!((r.value - 3.0).abs() < 1e-14);
        let s = extreme_eigenvalue(&h, Which::Smallest, &EigenConfig::default()).unwrap();
        assert!((s.value - 1.0).abs() < 1e-14);
    }

    #[test]
    fn lanczos_diagonal() {
        let diag: Vec<f64> = (0..500).map(|k| (k as f64 * 0.37).sin() * 10.0).collect();
        let max = diag.iter().cloned().fold(f64::MIN, f64::max);
        let min = diag.iter().cloned().fold(f64::MAX, f64::min);
        let h = SparseOperator::diagonal(diag);
        let cfg = EigenConfig {
            dense_threshold: 0,
            ..Default::default()
        };
        let r = extreme_eigenvalue(&h, Which::Largest, &cfg).unwrap();
        assert!((r.value - max).abs() < 1e-9 && r.residual <= 1e-8 * max.abs());
        let r = extreme_eigenvalue(&h, Which::Smallest, &cfg).unwrap();
        assert!((r.value - min).abs() < 1e-9);
    }

    #[test]
    fn lanczos_matches_dense_on_spin_chain() {
        // open spin-1 chain with complex Ŝ^y terms present individually
        let t = spin_matrices::<f64>(SpinValue::ONE);
        let n = 5;
        let mut h = SparseOperator::zero(243);
        for i in 0..n - 1 {
            for (k, m) in t.components().into_iter().enumerate() {
                let term = site_operator(m, i, n)
                    .unwrap()
                    .matmul(&site_operator(m, i + 1, n).unwrap());
                h = h.add(&term.scaled(1.0 + 0.1 * (i + k) as f64));
            }
        }
        let cfg = EigenConfig {
            dense_threshold: 0,
            seed: 3,
            ..Default::default()
        };
        for which in [Which::Largest, Which::Smallest] {
            let l = extreme_eigenvalue(&h, which, &cfg).unwrap();
            let d = dense_extreme(&h, which).unwrap();
            assert!(
                (l.value - d.value).abs() < 1e-8,
                "{which:?}: {} vs {}",
                l.value,
                d.value
            );
            assert!(l.residual <= 1e-8 * l.value.abs().max(1.0));
        }
    }

    #[test]
    fn lanczos_is_deterministic() {
        let diag: Vec<f64> = (0..300).map(|k| ((k * 7919) % 301) as f64).collect();
        let h = SparseOperator::diagonal(diag);
        let cfg = EigenConfig {
            dense_threshold: 0,
            seed: 42,
            ..Default::default()
        };
        let a = lanczos(&h, Which::Largest, &cfg).unwrap();
        let b = lanczos(&h, Which::Largest, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn non_convergence_is_reported() {
        let diag: Vec<f64> = (0..400).map(|k| k as f64 / 400.0).collect();
        let h = SparseOperator::diagonal(diag);
        let cfg = EigenConfig {
            dense_threshold: 0,
            krylov_dim: 3,
            max_iterations: 6,
            tolerance: 1e-14,
            ..Default::default()
        };
        assert!(matches!(
            lanczos(&h, Which::Largest, &cfg),
            Err(Error::NoConvergence { .. })
        ));
    }

    #[test]
    fn dense_cap() {
        let h = SparseOperator::<f64>::identity(DENSE_DIM_CAP + 1);
        assert!(matches!(dense_extreme(&h, Which::Largest), Err(Error::SizeCap { .. })));
    }
}
