//! Mediator gadget on four spins ordered `(1, 2, a, b)`: a strongly penalized
//! pair `a, b` whose virtual excitations couple spins 1 and 2 at second order.
//!
//! Everything here is dense; `d⁴` stays small for the spins of interest.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::eigen::{dense_eigenvalues, dense_spectrum, DENSE_DIM_CAP};
use crate::error::{Error, Result};
use crate::exact::spin_dot;
use crate::scalar::{Cplx, Real};
use crate::sparse::{site_operator, SparseOperator};
use crate::spin::{spin_matrices, SpinValue, StateVector};

const SITES: usize = 4;
const SITE_A: usize = 2;
const SITE_B: usize = 3;

/// Relative tolerance of the Heisenberg-plus-identity fit.
pub const FIT_TOLERANCE: f64 = 1e-10;

fn check_dim(s: SpinValue) -> Result<usize> {
    let d = s.dim();
    let dim = d.pow(SITES as u32);
    if dim > DENSE_DIM_CAP {
        return Err(Error::SizeCap {
            dim: dim as u128,
            cap: DENSE_DIM_CAP,
        });
    }
    Ok(dim)
}

/// `Ĥ_0 = (Ŝ_a+Ŝ_b)² = 2Ŝ_a·Ŝ_b + 2S(S+1)` on the full four-site space.
pub fn build_h0<T: Real>(s: SpinValue) -> Result<SparseOperator<T>> {
    let dim = check_dim(s)?;
    let spin = spin_matrices::<T>(s);
    let ab = spin_dot(&spin, SITE_A, SITE_B, SITES, dim)?;
    let shift = SparseOperator::identity(dim).scaled(T::lit(2.0) * s.casimir::<T>());
    Ok(ab.scaled(T::lit(2.0)).add(&shift))
}

/// `Ĥ_2 = (Ŝ_1+Ŝ_2)·Ŝ_a`.
pub fn build_h2<T: Real>(s: SpinValue) -> Result<SparseOperator<T>> {
    let dim = check_dim(s)?;
    let spin = spin_matrices::<T>(s);
    let a1 = spin_dot(&spin, 0, SITE_A, SITES, dim)?;
    let a2 = spin_dot(&spin, 1, SITE_A, SITES, dim)?;
    Ok(a1.add(&a2))
}

/// Identity offset the construction may add to cancel the constant term.
pub fn h1_offset<T: Real>(s: SpinValue) -> T {
    let c = s.casimir::<T>();
    T::lit(2.0) * s.s::<T>() * s.s::<T>() * c * c / (T::lit(3.0) * T::lit(s.dim() as f64))
}

/// Reference coupling `S(S+1)/(3(2S+1))` the fitted `c` is compared with.
pub fn reference_coupling<T: Real>(s: SpinValue) -> T {
    s.casimir::<T>() / (T::lit(3.0) * T::lit(s.dim() as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GadgetInstance<T> {
    pub s: SpinValue,
    pub delta: T,
    pub include_h1: bool,
}

impl<T: Real> GadgetInstance<T> {
    pub fn new(s: SpinValue, delta: T, include_h1: bool) -> Result<Self> {
        if !(delta > T::zero()) || !delta.is_finite() {
            return Err(Error::InvalidParameter(format!("delta must be positive, got {delta}")));
        }
        check_dim(s)?;
        Ok(Self { s, delta, include_h1 })
    }

    /// `Δ Ĥ_0 + Δ^{1/2} Ĥ_2 (+ Ĥ_1)`.
    pub fn hamiltonian(&self) -> Result<SparseOperator<T>> {
        let h0 = build_h0::<T>(self.s)?;
        let h2 = build_h2::<T>(self.s)?;
        let mut h = h0.scaled(self.delta).add(&h2.scaled(self.delta.sqrt()));
        if self.include_h1 {
            h = h.add(&SparseOperator::identity(h.dim()).scaled(h1_offset(self.s)));
        }
        Ok(h)
    }
}

/// Mediator pair ground state: the kernel of `(Ŝ_a+Ŝ_b)²` on `d²`, with the
/// pseudo-inverse of that pair operator and its spectral gap.
struct PairData<T: Real> {
    kernel: Vec<Cplx<T>>,
    pinv: DMatrix<Cplx<T>>,
    gap: T,
}

fn pair_data<T: Real>(s: SpinValue) -> Result<PairData<T>> {
    let d2 = s.dim() * s.dim();
    let spin = spin_matrices::<T>(s);
    let ab = spin_dot(&spin, 0, 1, 2, d2)?;
    let h = ab
        .scaled(T::lit(2.0))
        .add(&SparseOperator::identity(d2).scaled(T::lit(2.0) * s.casimir::<T>()));
    let (values, vectors) = dense_spectrum(&h.to_dense());
    let tol = T::tol(1e-9);
    if values[0].abs() > tol || values[1] <= tol {
        return Err(Error::Verification(format!(
            "mediator kernel is not one-dimensional (lowest eigenvalues {}, {})",
            values[0], values[1]
        )));
    }
    let mut kernel = StateVector::new(vectors.column(0).iter().copied().collect())?;
    kernel.fix_phase();
    let mut pinv = DMatrix::zeros(d2, d2);
    for (k, &lam) in values.iter().enumerate().skip(1) {
        let v = vectors.column(k);
        pinv += (v * v.adjoint()).scale(T::one() / lam);
    }
    Ok(PairData {
        kernel: kernel.into_amplitudes(),
        pinv,
        gap: values[1],
    })
}

/// `V = 𝟙_{12} ⊗ |Ψ_0⟩`, a `d⁴ × d²` isometry.
fn isometry<T: Real>(kernel: &[Cplx<T>]) -> DMatrix<Cplx<T>> {
    let d2 = kernel.len();
    DMatrix::from_fn(d2 * d2, d2, |r, c| {
        if r / d2 == c {
            kernel[r % d2]
        } else {
            Cplx::from(T::zero())
        }
    })
}

fn frobenius<T: Real>(m: &DMatrix<Cplx<T>>) -> T {
    m.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

fn re_inner<T: Real>(a: &DMatrix<Cplx<T>>, b: &DMatrix<Cplx<T>>) -> T {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// `M ≈ −c Ŝ_1·Ŝ_2 + e 𝟙` by least squares.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EffectiveFit<T> {
    pub c: T,
    pub e: T,
    pub residual: T,
}

pub fn fit_heisenberg<T: Real>(m: &DMatrix<Cplx<T>>, s1s2: &DMatrix<Cplx<T>>) -> Result<EffectiveFit<T>> {
    let id = DMatrix::<Cplx<T>>::identity(m.nrows(), m.ncols());
    let (aa, ai, ii) = (re_inner(s1s2, s1s2), re_inner(s1s2, &id), re_inner(&id, &id));
    let (am, im) = (re_inner(s1s2, m), re_inner(&id, m));
    let det = aa * ii - ai * ai;
    let alpha = (am * ii - ai * im) / det;
    let e = (aa * im - ai * am) / det;
    let fitted = s1s2.scale(alpha) + id.scale(e);
    let residual = frobenius(&(m - fitted));
    if residual > T::tol(FIT_TOLERANCE) * frobenius(m).max(T::one()) {
        return Err(Error::NotHeisenberg {
            residual: residual.as_f64(),
        });
    }
    Ok(EffectiveFit { c: -alpha, e, residual })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectiveHamiltonian<T: Real> {
    pub two_s: u32,
    pub include_h1: bool,
    #[serde(skip)]
    pub matrix: DMatrix<Cplx<T>>,
    pub fit: EffectiveFit<T>,
    /// Ascending eigenvalues of `matrix`.
    pub levels: Vec<T>,
    /// Largest entry of `P Ĥ_2 P`, restricted to the low-energy space.
    pub first_order_norm: T,
    /// Second-smallest eigenvalue of the mediator pair penalty.
    pub mediator_gap: T,
    /// `‖[M, Ŝ^α_1 + Ŝ^α_2]‖_F`, maximized over α.
    pub rotation_defect: T,
    pub reference_coupling: T,
    pub coupling_ratio: T,
    /// `⟨Ψ_0|Ŝ^α_a Ŝ^α_b|Ψ_0⟩` for the computed kernel state.
    pub kernel_correlations: [T; 3],
    /// The same for the unphased state `(2S+1)^{-1/2} Σ_m |m⟩|−m⟩`.
    pub written_state_correlations: [T; 3],
    /// The value `S(S+1)/(3(2S+1))` these are compared against.
    pub reference_correlation: T,
}

fn pair_correlations<T: Real>(s: SpinValue, psi: &[Cplx<T>]) -> Result<[T; 3]> {
    let spin = spin_matrices::<T>(s);
    let mut out = [T::zero(); 3];
    for (o, m) in out.iter_mut().zip(spin.components()) {
        let op = site_operator(m, 0, 2)?.matmul(&site_operator(m, 1, 2)?);
        *o = op.expectation(psi);
    }
    Ok(out)
}

fn written_state<T: Real>(s: SpinValue) -> Vec<Cplx<T>> {
    let d = s.dim();
    let amp = Cplx::from(T::one() / T::lit(d as f64).sqrt());
    let mut v = vec![Cplx::from(T::zero()); d * d];
    for k in 0..d {
        v[k * d + (d - 1 - k)] = amp;
    }
    v
}

/// `V†Ĥ_1V − V†Ĥ_2 Ĥ_0⁺ Ĥ_2 V`, fitted to Heisenberg-plus-identity form.
pub fn effective_hamiltonian<T: Real>(s: SpinValue, include_h1: bool) -> Result<EffectiveHamiltonian<T>> {
    check_dim(s)?;
    let d2 = s.dim() * s.dim();
    let pair = pair_data::<T>(s)?;
    let v = isometry(&pair.kernel);
    let h2 = build_h2::<T>(s)?.to_dense();
    let h2v = &h2 * &v;
    // Ĥ_0⁺ = 𝟙_{12} ⊗ (pair pseudo-inverse), applied block by block.
    let mut pinv_h2v = DMatrix::zeros(h2v.nrows(), d2);
    for blk in 0..d2 {
        let rows = h2v.rows(blk * d2, d2);
        pinv_h2v.rows_mut(blk * d2, d2).copy_from(&(&pair.pinv * rows));
    }
    let mut m = -(h2v.adjoint() * pinv_h2v);
    if include_h1 {
        m += DMatrix::identity(d2, d2).scale(h1_offset::<T>(s));
    }
    let first_order = v.adjoint() * &h2v;
    let first_order_norm = first_order
        .iter()
        .map(|z| z.norm_sqr().sqrt())
        .fold(T::zero(), |a, b| a.max(b));

    let spin = spin_matrices::<T>(s);
    let s1s2 = spin_dot(&spin, 0, 1, 2, d2)?.to_dense();
    let fit = fit_heisenberg(&m, &s1s2)?;

    let mut rotation_defect = T::zero();
    for comp in spin.components() {
        let tot = site_operator(comp, 0, 2)?.add(&site_operator(comp, 1, 2)?).to_dense();
        rotation_defect = rotation_defect.max(frobenius(&(&m * &tot - &tot * &m)));
    }

    let reference = reference_coupling::<T>(s);
    Ok(EffectiveHamiltonian {
        two_s: s.two_s(),
        include_h1,
        levels: dense_eigenvalues(&m),
        matrix: m,
        fit,
        first_order_norm,
        mediator_gap: pair.gap,
        rotation_defect,
        reference_coupling: reference,
        coupling_ratio: fit.c / reference,
        kernel_correlations: pair_correlations(s, &pair.kernel)?,
        written_state_correlations: pair_correlations(s, &written_state(s))?,
        reference_correlation: reference,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SpectralRow<T> {
    pub two_s: u32,
    pub delta: T,
    pub spec_error: T,
    pub scaled_error: T,
}

/// Largest deviation of the lowest `d²` levels of the full gadget from the
/// effective spectrum, for each `Δ`. Points are diagonalized in parallel.
pub fn spectral_convergence<T: Real>(s: SpinValue, deltas: &[T], include_h1: bool) -> Result<Vec<SpectralRow<T>>> {
    if deltas.is_empty() {
        return Err(Error::InvalidParameter("at least one delta is required".into()));
    }
    if deltas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(Error::InvalidParameter("deltas must be strictly increasing".into()));
    }
    let instances = deltas
        .iter()
        .map(|&d| GadgetInstance::new(s, d, include_h1))
        .collect::<Result<Vec<_>>>()?;
    let eff = effective_hamiltonian::<T>(s, include_h1)?;
    let k = eff.levels.len();
    let spectra: Vec<Result<Vec<T>>> = std::thread::scope(|scope| {
        let handles: Vec<_> = instances
            .iter()
            .map(|inst| scope.spawn(move || inst.hamiltonian().map(|h| dense_eigenvalues(&h.to_dense()))))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("diagonalization thread panicked"))
            .collect()
    });
    let mut rows = Vec::with_capacity(deltas.len());
    for (inst, spec) in instances.iter().zip(spectra) {
        let spec = spec?;
        let err = spec[..k]
            .iter()
            .zip(&eff.levels)
            .map(|(a, b)| (*a - *b).abs())
            .fold(T::zero(), |a, b| a.max(b));
        rows.push(SpectralRow {
            two_s: s.two_s(),
            delta: inst.delta,
            spec_error: err,
            scaled_error: err * inst.delta.sqrt(),
        });
    }
    Ok(rows)
}
