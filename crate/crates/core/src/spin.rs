//! Spin-S matrices, Bloch coherent states and product states.

use std::fmt;

use nalgebra::{ComplexField, DMatrix, SymmetricEigen};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::classical::UnitVectorAssignment;
use crate::error::{Error, Result};
use crate::scalar::{Cplx, Real};

/// Spin quantum number stored as the integer `2S ≥ 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u32", into = "u32")]
pub struct SpinValue(u32);

impl SpinValue {
    pub fn from_two_s(two_s: u32) -> Result<Self> {
        if two_s == 0 {
            return Err(Error::InvalidParameter("2S must be a positive integer".into()));
        }
        Ok(Self(two_s))
    }

    pub const HALF: SpinValue = SpinValue(1);
    pub const ONE: SpinValue = SpinValue(2);

    pub fn two_s(self) -> u32 {
        self.0
    }

    /// On-site dimension `d = 2S + 1`.
    pub fn dim(self) -> usize {
        self.0 as usize + 1
    }

    pub fn s<T: Real>(self) -> T {
        T::lit(self.0 as f64 / 2.0)
    }

    /// `S(S+1)`.
    pub fn casimir<T: Real>(self) -> T {
        let s = self.s::<T>();
        s * (s + T::one())
    }

    /// `(S+1)/S`, the coefficient of the spin-S relaxation.
    pub fn relaxation_coefficient<T: Real>(self) -> T {
        let s = self.s::<T>();
        (s + T::one()) / s
    }

    pub fn next(self) -> Self {
        Self(self.0 + 2)
    }
}

impl TryFrom<u32> for SpinValue {
    type Error = Error;
    fn try_from(v: u32) -> Result<Self> {
        Self::from_two_s(v)
    }
}

impl From<SpinValue> for u32 {
    fn from(s: SpinValue) -> u32 {
        s.0
    }
}

impl fmt::Display for SpinValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_multiple_of(2) {
            write!(f, "{}", self.0 / 2)
        } else {
            write!(f, "{}/2", self.0)
        }
    }
}

/// The three spin-S matrices in the basis `m = S, S−1, …, −S`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinTriple<T: Real> {
    pub s: SpinValue,
    pub sx: DMatrix<Cplx<T>>,
    pub sy: DMatrix<Cplx<T>>,
    pub sz: DMatrix<Cplx<T>>,
}

impl<T: Real> SpinTriple<T> {
    pub fn components(&self) -> [&DMatrix<Cplx<T>>; 3] {
        [&self.sx, &self.sy, &self.sz]
    }

    /// `Ŝ·n = n₁Ŝ¹ + n₂Ŝ² + n₃Ŝ³`.
    pub fn along(&self, n: [T; 3]) -> DMatrix<Cplx<T>> {
        &self.sx * Cplx::from(n[0]) + &self.sy * Cplx::from(n[1]) + &self.sz * Cplx::from(n[2])
    }

    /// `Ŝ·Ŝ`.
    pub fn casimir_matrix(&self) -> DMatrix<Cplx<T>> {
        &self.sx * &self.sx + &self.sy * &self.sy + &self.sz * &self.sz
    }

    /// `⟨ψ|Ŝ|ψ⟩` for a single-site state.
    pub fn expectation(&self, psi: &[Cplx<T>]) -> [T; 3] {
        let v = nalgebra::DVector::from_column_slice(psi);
        self.components().map(|m| v.dotc(&(m * &v)).re)
    }
}

/// Builds `Ŝ¹, Ŝ², Ŝ³` from the ladder operators, with
/// `⟨m+1|Ŝ⁺|m⟩ = √(S(S+1) − m(m+1))`.
pub fn spin_matrices<T: Real>(s: SpinValue) -> SpinTriple<T> {
    let d = s.dim();
    let two_s = s.two_s() as i64;
    let casimir = s.casimir::<T>();
    // basis index k carries m = S − k; twice that is 2S − 2k
    let m = |k: usize| T::lit((two_s - 2 * k as i64) as f64 / 2.0);

    let mut sz = DMatrix::from_element(d, d, Cplx::zero());
    let mut raise = DMatrix::<Cplx<T>>::from_element(d, d, Cplx::zero());
    for k in 0..d {
        sz[(k, k)] = Cplx::from(m(k));
        if k > 0 {
            // Ŝ⁺ |m_k⟩ = c |m_k + 1⟩ = c |k − 1⟩
            let mk = m(k);
            raise[(k - 1, k)] = Cplx::from((casimir - mk * (mk + T::one())).sqrt());
        }
    }
    let lower = raise.adjoint();
    let half = Cplx::from(T::lit(0.5));
    let sx = (&raise + &lower) * half;
    let sy = (&raise - &lower) * Cplx::new(T::zero(), -T::lit(0.5));
    SpinTriple { s, sx, sy, sz }
}

/// Normalized complex amplitudes in site-major Kronecker order.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector<T: Real> {
    amps: Vec<Cplx<T>>,
}

impl<T: Real> StateVector<T> {
    /// Normalizes `amps`; fails on the zero vector.
    pub fn new(mut amps: Vec<Cplx<T>>) -> Result<Self> {
        let norm = norm(&amps);
        if norm == T::zero() || !norm.is_finite() {
            return Err(Error::InvalidParameter("state vector has zero norm".into()));
        }
        for a in &mut amps {
            *a = a.unscale(norm);
        }
        Ok(Self { amps })
    }

    pub fn amplitudes(&self) -> &[Cplx<T>] {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Cplx<T>> {
        self.amps
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn norm(&self) -> T {
        norm(&self.amps)
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Cplx<T> {
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn kron(&self, other: &Self) -> Self {
        let mut amps = Vec::with_capacity(self.len() * other.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        Self { amps }
    }

    /// Rotates the global phase so the largest-modulus amplitude (first
    /// one on ties) is real and positive.
    pub fn fix_phase(&mut self) {
        let mut best = 0;
        for (k, a) in self.amps.iter().enumerate() {
            if a.modulus() > self.amps[best].modulus() * (T::one() + T::lit(1e-12)) {
                best = k;
            }
        }
        let pivot = self.amps[best];
        if pivot.modulus() > T::zero() {
            let phase = pivot.conj().unscale(pivot.modulus());
            for a in &mut self.amps {
                *a *= phase;
            }
            self.amps[best] = Cplx::from(self.amps[best].re);
        }
    }
}

pub(crate) fn norm<T: Real>(v: &[Cplx<T>]) -> T {
    v.iter().map(|a| a.norm_sqr()).sum::<T>().sqrt()
}

pub(crate) fn check_unit<T: Real>(index: usize, v: [T; 3]) -> Result<()> {
    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !((n - T::one()).abs() <= T::tol(1e-10)) {
        return Err(Error::NotUnit {
            index,
            norm: n.as_f64(),
        });
    }
    Ok(())
}

/// Highest-weight eigenvector of `Ŝ·Ω`: the Bloch coherent state with
/// `⟨Ω|Ŝ|Ω⟩ = SΩ`.
pub fn coherent_state<T: Real>(s: SpinValue, omega: [T; 3]) -> Result<StateVector<T>> {
    check_unit(0, omega)?;
    Ok(coherent_state_with(&spin_matrices(s), omega))
}

fn coherent_state_with<T: Real>(spin: &SpinTriple<T>, omega: [T; 3]) -> StateVector<T> {
    let eig = SymmetricEigen::new(spin.along(omega));
    let top = eig.eigenvalues.imax();
    let mut state = StateVector {
        amps: eig.eigenvectors.column(top).iter().copied().collect(),
    };
    let n = state.norm();
    for a in &mut state.amps {
        *a = a.unscale(n);
    }
    state.fix_phase();
    state
}

/// `|Ω⃗⟩ = ⊗_i |Ω_i⟩` in site order.
pub fn product_coherent_state<T: Real>(s: SpinValue, omegas: &UnitVectorAssignment<T>) -> Result<StateVector<T>> {
    for (i, v) in omegas.vectors().iter().enumerate() {
        check_unit(i, *v)?;
    }
    let spin = spin_matrices::<T>(s);
    let mut out = StateVector {
        amps: vec![Cplx::from(T::one())],
    };
    for v in omegas.vectors() {
        out = out.kron(&coherent_state_with(&spin, *v));
    }
    Ok(out)
}
