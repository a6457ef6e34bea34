//! Approximation-ratio functions.
//!
//! `F*(3, ρ) = (8/(3π)) ρ ₂F₁(½, ½; 5/2; ρ²)` is the expected overlap of two
//! unit vectors at inner product `ρ` after Gaussian projection to `R³`. The
//! ratios are minima over `ρ ∈ [−1, 0)`:
//!
//! * `α_BOV  = min (1 − F*(ρ)) / (1 − ρ)`
//! * `α_GP(S) = min (1 − F*(ρ)) / (1 − ((S+1)/S) ρ)`
//!
//! together with `α_L(S) = (S/(S+1))² α_BOV` and `α*(S) = 2S/(2S+1)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::spin::SpinValue;

const MAX_TERMS: usize = 10_000;

/// Sums `₂F₁(a, b; c; z)` by its power series until the term falls below
/// `eps · |partial sum|`. Only used with `|z| ≤ ½`, where it converges
/// geometrically.
fn gauss_series<T: Real>(a: T, b: T, c: T, z: T, eps: T) -> T {
    let mut term = T::one();
    let mut sum = T::one();
    for n in 0..MAX_TERMS {
        let k = T::lit(n as f64);
        term *= (a + k) * (b + k) / ((c + k) * (k + T::one())) * z;
        sum += term;
        if term.abs() <= eps * sum.abs() {
            break;
        }
    }
    sum
}

/// `₂F₁(½, ½; 5/2; z)` on `[0, 1]`.
///
/// For `z ≤ ½` the defining series is summed directly. Above that the
/// `z → 1 − z` connection formula is used (here `c − a − b = 3/2`):
///
/// `₂F₁(z) = (3π/8) ₂F₁(½, ½; −½; 1−z) + (1−z)^{3/2} ₂F₁(2, 2; 5/2; 1−z)`,
///
/// so both series again converge at least like `2^{-n}`, and `z = 1`
/// returns `3π/8` exactly.
pub fn hyp2f1_half<T: Real>(z: T) -> Result<T> {
    if !(z >= T::zero() && z <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "hyp2f1_half needs 0 <= z <= 1, got {z}"
        )));
    }
    let half = T::lit(0.5);
    let eps = T::lit(1e-15).min(T::default_epsilon() * T::lit(0.5));
    let three_pi_8 = T::FRAC_PI_8() * T::lit(3.0);
    if z == T::one() {
        return Ok(three_pi_8);
    }
    if z <= half {
        return Ok(gauss_series(half, half, T::lit(2.5), z, eps));
    }
    let w = T::one() - z;
    let regular = gauss_series(half, half, -half, w, eps);
    let singular = gauss_series(T::lit(2.0), T::lit(2.0), T::lit(2.5), w, eps);
    Ok(three_pi_8 * regular + w * w.sqrt() * singular)
}

/// `F*(3, ρ)`; odd in `ρ` by construction.
pub fn f_star<T: Real>(rho: T) -> Result<T> {
    if !(rho.abs() <= T::one()) {
        return Err(Error::InvalidParameter(format!("F* needs |rho| <= 1, got {rho}")));
    }
    let r = rho.abs();
    let v = T::lit(8.0) / (T::lit(3.0) * T::pi()) * r * hyp2f1_half(r * r)?;
    Ok(if rho < T::zero() { -v } else { v })
}

/// `g(ρ) = (1 − F*(ρ)) / (1 − ρ)`.
pub fn g_bov<T: Real>(rho: T) -> Result<T> {
    Ok((T::one() - f_star(rho)?) / (T::one() - rho))
}

/// `f_S(ρ) = (1 − F*(ρ)) / (1 − ((S+1)/S) ρ)`.
pub fn f_spin<T: Real>(s: SpinValue, rho: T) -> Result<T> {
    let c: T = s.relaxation_coefficient();
    Ok((T::one() - f_star(rho)?) / (T::one() - c * rho))
}

/// A minimum of a ratio function over `[−1, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Minimum<T> {
    pub value: T,
    pub argmin_rho: T,
}

const GRID_POINTS: usize = 10_000;

/// Dense grid on `[−1, 0)` then golden-section refinement of the best
/// bracket down to `1e-12` in `ρ`.
fn minimize_on_negative_axis<T: Real>(f: impl Fn(T) -> Result<T>) -> Result<Minimum<T>> {
    let step = T::one() / T::lit(GRID_POINTS as f64);
    let at = |k: usize| -T::one() + step * T::lit(k as f64);
    let mut best_k = 0;
    let mut best_v = f(at(0))?;
    for k in 1..GRID_POINTS {
        let v = f(at(k))?;
        if v < best_v {
            best_v = v;
            best_k = k;
        }
    }
    let mut lo = if best_k == 0 { -T::one() } else { at(best_k - 1) };
    let mut hi = if best_k + 1 >= GRID_POINTS {
        -step * T::lit(1e-3)
    } else {
        at(best_k + 1)
    };
    let inv_phi = (T::lit(5.0).sqrt() - T::one()) * T::lit(0.5);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let width = T::tol(1e-12);
    while hi - lo > width {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1)?;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2)?;
        }
    }
    let (mut value, mut argmin) = if f1 <= f2 { (f1, x1) } else { (f2, x2) };
    if best_v < value {
        value = best_v;
        argmin = at(best_k);
    }
    Ok(Minimum {
        value,
        argmin_rho: argmin,
    })
}

/// `α_BOV`, the rank-3 rounding ratio for the Max-Cut SDP.
pub fn alpha_bov<T: Real>() -> Result<Minimum<T>> {
    minimize_on_negative_axis(g_bov)
}

/// `α_GP(S)`, the coherent-state rounding ratio for the spin-S SDP.
pub fn alpha_gp<T: Real>(s: SpinValue) -> Result<Minimum<T>> {
    minimize_on_negative_axis(|r| f_spin(s, r))
}

/// `α_L(S) = (S/(S+1))² α_BOV`.
pub fn alpha_lieb<T: Real>(s: SpinValue, alpha_bov: T) -> T {
    let sv: T = s.s();
    let q = sv / (sv + T::one());
    q * q * alpha_bov
}

/// `α*(S) = 2S/(2S+1)`, the single-edge ceiling for product states.
pub fn alpha_star<T: Real>(s: SpinValue) -> T {
    let two_s = T::lit(s.two_s() as f64);
    two_s / (two_s + T::one())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRow<T> {
    pub two_s: u32,
    pub alpha_star: T,
    pub alpha_lieb: T,
    pub alpha_gp: T,
    pub argmin_rho: T,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioTable<T> {
    pub alpha_bov: T,
    pub bov_argmin_rho: T,
    pub rows: Vec<RatioRow<T>>,
    /// Smallest `2S` with `α_GP(S) ≥ 0.99 α_BOV`.
    pub first_two_s_within_99pct: Option<u32>,
}

pub fn ratio_row<T: Real>(s: SpinValue, bov: T) -> Result<RatioRow<T>> {
    let gp = alpha_gp::<T>(s)?;
    Ok(RatioRow {
        two_s: s.two_s(),
        alpha_star: alpha_star(s),
        alpha_lieb: alpha_lieb(s, bov),
        alpha_gp: gp.value,
        argmin_rho: gp.argmin_rho,
    })
}

/// Smallest `2S ≤ limit` with `α_GP(S) ≥ fraction · α_BOV`, using that
/// `α_GP` increases with `S`.
pub fn first_two_s_reaching<T: Real>(fraction: T, bov: T, limit: u32) -> Result<Option<u32>> {
    let target = fraction * bov;
    let reaches = |two_s: u32| -> Result<bool> { Ok(alpha_gp::<T>(SpinValue::from_two_s(two_s)?)?.value >= target) };
    let mut hi = 1u32;
    while !reaches(hi)? {
        if hi >= limit {
            return Ok(None);
        }
        hi = (hi * 2).min(limit);
    }
    let mut lo = hi / 2; // fails (or zero)
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if reaches(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some(hi))
}

/// Rows for `2S = 1..=max_two_s` plus the `α_BOV` constants.
pub fn ratio_table<T: Real>(max_two_s: u32) -> Result<RatioTable<T>> {
    if max_two_s == 0 {
        return Err(Error::InvalidParameter("need 2S_max >= 1".into()));
    }
    let bov = alpha_bov::<T>()?;
    let rows = (1..=max_two_s)
        .map(|t| ratio_row(SpinValue::from_two_s(t)?, bov.value))
        .collect::<Result<Vec<_>>>()?;
    Ok(RatioTable {
        alpha_bov: bov.value,
        bov_argmin_rho: bov.argmin_rho,
        rows,
        first_two_s_within_99pct: first_two_s_reaching(T::lit(0.99), bov.value, 4096)?,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainViolation {
    pub two_s: u32,
    pub rho: f64,
    pub inequality: String,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChainReport {
    pub max_two_s: u32,
    pub grid_points: usize,
    pub pointwise_checks: usize,
    /// Smallest `rhs − lhs` seen for each pointwise inequality, in order
    /// lieb-vs-spin, spin-vs-next-spin, next-spin-vs-bov.
    pub min_margins: [f64; 3],
    pub violations: Vec<ChainViolation>,
}

impl ChainReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

pub const CHAIN_GRID_POINTS: usize = 1000;

/// Checks `(S/(S+1))² g < f_S < f_{S+1} < g` on a grid over `[−1, −1e-6]`,
/// and `α_L(S) < α_GP(S) < α_BOV`, `α_GP` increasing, for `2S ≤ max_two_s`.
pub fn verify_chain(max_two_s: u32) -> Result<ChainReport> {
    if max_two_s == 0 {
        return Err(Error::InvalidParameter("need 2S_max >= 1".into()));
    }
    let grid: Vec<f64> = (0..CHAIN_GRID_POINTS)
        .map(|k| -1.0 + (1.0 - 1e-6) * k as f64 / (CHAIN_GRID_POINTS - 1) as f64)
        .collect();
    let g_vals = grid.iter().map(|&r| g_bov(r)).collect::<Result<Vec<f64>>>()?;
    let mut report = ChainReport {
        max_two_s,
        grid_points: grid.len(),
        pointwise_checks: 0,
        min_margins: [f64::INFINITY; 3],
        violations: Vec::new(),
    };
    let check = |report: &mut ChainReport, slot: usize, two_s: u32, rho: f64, name: &str, lhs: f64, rhs: f64| {
        if slot < 3 {
            report.pointwise_checks += 1;
            report.min_margins[slot] = report.min_margins[slot].min(rhs - lhs);
        }
        if !(lhs < rhs) {
            report.violations.push(ChainViolation {
                two_s,
                rho,
                inequality: name.to_string(),
                lhs,
                rhs,
            });
        }
    };

    for two_s in 1..=max_two_s {
        let s = SpinValue::from_two_s(two_s)?;
        let next = s.next();
        let sv = two_s as f64 / 2.0;
        let q = (sv / (sv + 1.0)).powi(2);
        for (&rho, &g) in grid.iter().zip(&g_vals) {
            let fs = f_spin(s, rho)?;
            let fn_ = f_spin(next, rho)?;
            check(&mut report, 0, two_s, rho, "(S/(S+1))^2 g < f_S", q * g, fs);
            check(&mut report, 1, two_s, rho, "f_S < f_{S+1}", fs, fn_);
            check(&mut report, 2, two_s, rho, "f_{S+1} < g", fn_, g);
        }
    }

    let bov = alpha_bov::<f64>()?.value;
    let mut prev: Option<f64> = None;
    for two_s in 1..=max_two_s + 2 {
        let s = SpinValue::from_two_s(two_s)?;
        let gp = alpha_gp::<f64>(s)?.value;
        if two_s <= max_two_s {
            check(
                &mut report,
                3,
                two_s,
                f64::NAN,
                "alpha_L < alpha_GP",
                alpha_lieb(s, bov),
                gp,
            );
            check(&mut report, 3, two_s, f64::NAN, "alpha_GP < alpha_BOV", gp, bov);
        }
        if let Some(p) = prev {
            check(&mut report, 3, two_s, f64::NAN, "alpha_GP(2S-1) < alpha_GP(2S)", p, gp);
        }
        prev = Some(gp);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// `₂F₁(½, ½; 5/2; z)` with every Pochhammer symbol formed as an explicit
    /// product; no term recurrence.
    fn pochhammer_reference(z: f64, terms: usize) -> f64 {
        let poch = |x: f64, n: usize| (0..n).map(|k| x + k as f64).product::<f64>();
        let fact = |n: usize| (1..=n).map(|k| k as f64).product::<f64>();
        (0..terms)
            .map(|n| poch(0.5, n) * poch(0.5, n) / (poch(2.5, n) * fact(n)) * z.powi(n as i32))
            .sum()
    }

    #[test]
    fn hypergeometric_values() {
        assert_eq!(hyp2f1_half(0.0).unwrap(), 1.0);
        assert_eq!(hyp2f1_half(1.0).unwrap(), 3.0 * std::f64::consts::PI / 8.0);
        let reference = pochhammer_reference(0.25, 50);
        assert!((hyp2f1_half(0.25).unwrap() - reference).abs() < 1e-13);
        assert!(hyp2f1_half(-0.1).is_err());
        assert!(hyp2f1_half(1.1).is_err());
        assert!(hyp2f1_half(f64::NAN).is_err());
    }

    #[test]
    fn hypergeometric_matches_high_precision_values() {
        // 30-digit reference values
        let cases: [(f64, f64); 4] = [
            (0.25, 1.027_279_884_558_419_3),
            (0.5, 1.060_660_171_779_821_3),
            (0.81, 1.117_858_029_030_672_7),
            (0.99, 1.173_088_567_520_666_1),
        ];
        for (z, expected) in cases {
            let v = hyp2f1_half(z).unwrap();
            assert!((v - expected).abs() < 2e-15, "z={z}: {v} vs {expected}");
        }
        // the two branches agree across the switch point
        let below = hyp2f1_half(0.5_f64).unwrap();
        let above = hyp2f1_half(0.5 + 1e-15).unwrap();
        assert!((below - above).abs() < 1e-14);
    }

    #[test]
    fn f_star_values() {
        assert_eq!(f_star(0.0).unwrap(), 0.0);
        assert!((f_star(1.0_f64).unwrap() - 1.0).abs() < 1e-15);
        assert!((f_star(-1.0_f64).unwrap() + 1.0).abs() < 1e-15);
        let refs: [(f64, f64); 4] = [
            (-0.5, -0.435_991_124_176_917_43),
            (-0.75, -0.681_422_107_502_560_6),
            (-0.25, -0.213_560_325_101_344_4),
            (0.3, 0.257_008_948_707_312_04),
        ];
        for (r, e) in refs {
            assert!(
                (f_star(r).unwrap() - e).abs() < 1e-14,
                "{r}: {} vs {e}",
                f_star(r).unwrap()
            );
        }
        for k in 1..1000 {
            let r = k as f64 / 1000.0;
            let v = f_star(r).unwrap();
            assert!(v > 0.0 && v < r);
            assert!((f_star(-r).unwrap() + v).abs() <= 1e-14);
        }
        assert!(f_star(1.5).is_err());
    }

    #[test]
    fn bov_constant() {
        let m = alpha_bov::<f64>().unwrap();
        assert!((m.value - 0.956).abs() <= 0.001);
        assert!(m.value < 1.0);
        assert!(m.argmin_rho > -1.0 && m.argmin_rho < 0.0);
        assert!((g_bov(-1.0_f64).unwrap() - 1.0).abs() < 1e-15);
        assert!((g_bov(-1e-9_f64).unwrap() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn gp_constants() {
        let m = alpha_gp::<f64>(SpinValue::HALF).unwrap();
        assert!((m.value - 0.498).abs() <= 0.002);
        for two_s in 1..=10 {
            let s = SpinValue::from_two_s(two_s).unwrap();
            let star = alpha_star::<f64>(s);
            assert!((f_spin(s, -1.0).unwrap() - star).abs() <= 1e-12);
            assert!((f_spin(s, 0.0_f64).unwrap() - 1.0).abs() <= 1e-15);
            let gp = alpha_gp::<f64>(s).unwrap();
            assert!(gp.value <= star);
            assert!(gp.argmin_rho > -1.0 && gp.argmin_rho < 0.0);
        }
        let bov = alpha_bov::<f64>().unwrap().value;
        let big = alpha_gp::<f64>(SpinValue::from_two_s(200).unwrap()).unwrap().value;
        assert!(bov - big < 0.01 && big < bov);
    }

    #[test]
    fn lieb_and_star() {
        let bov = alpha_bov::<f64>().unwrap().value;
        assert_eq!(alpha_star::<f64>(SpinValue::HALF), 0.5);
        assert!((alpha_lieb(SpinValue::HALF, bov) - bov / 9.0).abs() < 1e-16);
        assert!((alpha_lieb(SpinValue::HALF, bov) - 0.1063).abs() < 1e-4);
        for two_s in 1..10 {
            let s = SpinValue::from_two_s(two_s).unwrap();
            assert!(alpha_lieb(s, bov) < alpha_lieb(s.next(), bov));
        }
    }

    #[test]
    fn chain_holds_up_to_spin_five() {
        let r = verify_chain(10).unwrap();
        assert!(r.holds(), "{:?}", r.violations.first());
        assert!(r.min_margins.iter().all(|&m| m > 0.0));
        let one = SpinValue::ONE;
        let bov = alpha_bov::<f64>().unwrap().value;
        assert!(alpha_lieb(one, bov) < alpha_gp::<f64>(one).unwrap().value);
        assert!(alpha_gp::<f64>(SpinValue::HALF).unwrap().value < alpha_gp::<f64>(one).unwrap().value);
    }

    #[test]
    fn table_and_crossing() {
        let t = ratio_table::<f64>(4).unwrap();
        assert_eq!(t.rows.len(), 4);
        for w in t.rows.windows(2) {
            assert!(w[1].alpha_gp > w[0].alpha_gp);
        }
        let first = t.first_two_s_within_99pct.unwrap();
        let s = SpinValue::from_two_s(first).unwrap();
        let prev = SpinValue::from_two_s(first - 1).unwrap();
        assert!(alpha_gp::<f64>(s).unwrap().value >= 0.99 * t.alpha_bov);
        assert!(alpha_gp::<f64>(prev).unwrap().value < 0.99 * t.alpha_bov);
    }

    #[test]
    fn single_precision_ratios() {
        let m = alpha_bov::<f32>().unwrap();
        assert!((m.value - 0.956).abs() < 0.001);
        assert!((f_star(1.0f32).unwrap() - 1.0).abs() < 1e-6);
    }
}
