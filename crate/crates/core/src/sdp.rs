//! Max-Cut and spin-S SDP relaxations by low-rank block-coordinate ascent.
//!
//! Both relaxations maximize `½ Σ w_ij (1 − c·y_i·y_j)` over unit vectors
//! `y_i ∈ R^k`; `c = 1` is the Max-Cut SDP and `c = (S+1)/S` the spin-S SDP.
//! The maximizers do not depend on `c > 0`, so one update serves both:
//! `y_i ← −normalize(Σ_j w_ij y_j)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{exact_values, ExactConfig};
use crate::graph::WeightedGraph;
use crate::scalar::Real;
use crate::spin::SpinValue;

/// Unit vectors `y_i ∈ R^k` whose Gram matrix is a feasible SDP point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GramVectors<T> {
    vectors: Vec<Vec<T>>,
    rank: usize,
    /// Objective coefficient `c`.
    pub objective_c: T,
}

impl<T: Real> GramVectors<T> {
    /// Validates unit norms (to `1e-10`) and a common dimension.
    pub fn new(vectors: Vec<Vec<T>>, objective_c: T) -> Result<Self> {
        let rank = vectors.first().map_or(0, Vec::len);
        for (i, y) in vectors.iter().enumerate() {
            if y.len() != rank {
                return Err(Error::LengthMismatch {
                    expected: rank,
                    actual: y.len(),
                });
            }
            let n = norm(y);
            if !((n - T::one()).abs() <= T::tol(1e-10)) {
                return Err(Error::NotUnit {
                    index: i,
                    norm: n.as_f64(),
                });
            }
        }
        Ok(Self {
            vectors,
            rank,
            objective_c,
        })
    }

    pub fn vectors(&self) -> &[Vec<T>] {
        &self.vectors
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    /// `ρ_ij = y_i·y_j`.
    pub fn overlap(&self, i: usize, j: usize) -> T {
        dot(&self.vectors[i], &self.vectors[j])
    }

    pub fn gram_matrix(&self) -> Vec<Vec<T>> {
        let n = self.len();
        (0..n).map(|i| (0..n).map(|j| self.overlap(i, j)).collect()).collect()
    }

    /// Applies an orthogonal `k × k` matrix (row-major) to every vector.
    pub fn rotated(&self, q: &[Vec<T>]) -> Result<Self> {
        let vectors = self
            .vectors
            .iter()
            .map(|y| q.iter().map(|row| dot(row, y)).collect())
            .collect();
        Self::new(vectors, self.objective_c)
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(x, y)| *x * *y).sum()
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

/// `½ Σ w_ij (1 − c·ρ_ij)`.
pub fn sdp_objective<T: Real>(g: &WeightedGraph<T>, gram: &GramVectors<T>, c: T) -> T {
    g.edges()
        .iter()
        .map(|e| e.w * (T::one() - c * gram.overlap(e.i, e.j)))
        .fold(T::zero(), |a, b| a + b)
        * T::lit(0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SdpConfig {
    /// `None` selects `min(N, ⌈√(2N)⌉ + 1)`.
    pub rank: Option<usize>,
    pub restarts: usize,
    pub seed: u64,
    pub max_sweeps: usize,
    /// Relative objective change that ends a restart once stationary.
    pub relative_tolerance: f64,
    /// Stationarity residual required for a certified solution.
    pub stationarity_tolerance: f64,
}

impl Default for SdpConfig {
    fn default() -> Self {
        Self {
            rank: None,
            restarts: 8,
            seed: 0,
            max_sweeps: 100_000,
            relative_tolerance: 1e-12,
            stationarity_tolerance: 1e-8,
        }
    }
}

/// Smallest rank the solver accepts for `n` vertices.
pub fn default_rank(n: usize) -> usize {
    let r = ((2.0 * n as f64).sqrt().ceil() as usize) + 1;
    r.min(n).max(1)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SdpSolution<T> {
    pub gram: GramVectors<T>,
    pub value: T,
    /// `max_i ‖y_i + normalize(Σ_j w_ij y_j)‖` over vertices with a nonzero
    /// local field.
    pub stationarity_residual: T,
    pub sweeps: usize,
    /// Stationarity residual within tolerance.
    pub certified: bool,
    /// Objective after every sweep of the winning restart.
    #[serde(skip)]
    pub trace: Vec<T>,
}

fn local_field<T: Real>(adj: &[(usize, T)], ys: &[Vec<T>], k: usize) -> Vec<T> {
    let mut f = vec![T::zero(); k];
    for &(j, w) in adj {
        for (fi, yj) in f.iter_mut().zip(&ys[j]) {
            *fi += w * *yj;
        }
    }
    f
}

fn stationarity<T: Real>(adj: &[Vec<(usize, T)>], ys: &[Vec<T>], k: usize) -> T {
    let mut worst = T::zero();
    for (i, a) in adj.iter().enumerate() {
        let f = local_field(a, ys, k);
        let n = norm(&f);
        if n > T::zero() {
            let r = norm(&ys[i].iter().zip(&f).map(|(y, x)| *y + *x / n).collect::<Vec<_>>());
            worst = worst.max(r);
        }
    }
    worst
}

/// Solves `max ½ Σ w_ij (1 − c·y_i·y_j)` over unit `y_i ∈ R^k`.
pub fn solve_sdp<T: Real>(g: &WeightedGraph<T>, c: T, cfg: &SdpConfig) -> Result<SdpSolution<T>> {
    if !(c >= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "objective coefficient must be >= 1, got {c}"
        )));
    }
    if cfg.restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be at least 1".into()));
    }
    let n = g.vertex_count();
    let k = cfg.rank.unwrap_or_else(|| default_rank(n));
    if k < default_rank(n) && k != n {
        return Err(Error::InvalidParameter(format!(
            "rank {k} below the safe minimum {} for {n} vertices",
            default_rank(n)
        )));
    }
    let adj = g.adjacency();
    let rel_tol = T::lit(cfg.relative_tolerance);
    let stat_tol = T::tol(cfg.stationarity_tolerance);
    // stop a restart only once comfortably inside the certification bound
    let inner_tol = stat_tol * T::lit(1e-2);

    let mut best: Option<SdpSolution<T>> = None;
    for restart in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(restart as u64);
        let mut ys: Vec<Vec<T>> = (0..n)
            .map(|_| {
                let v: Vec<T> = (0..k)
                    .map(|_| {
                        let x: f64 = StandardNormal.sample(&mut rng);
                        T::lit(x)
                    })
                    .collect();
                let nv = norm(&v);
                v.into_iter().map(|x| x / nv).collect()
            })
            .collect();

        let value_of = |ys: &[Vec<T>]| {
            g.edges()
                .iter()
                .map(|e| e.w * (T::one() - c * dot(&ys[e.i], &ys[e.j])))
                .fold(T::zero(), |a, b| a + b)
                * T::lit(0.5)
        };
        let mut value = value_of(&ys);
        let mut trace = vec![value];
        let mut sweeps = 0;
        let mut residual = stationarity(&adj, &ys, k);
        while sweeps < cfg.max_sweeps && residual > inner_tol {
            for i in 0..n {
                let f = local_field(&adj[i], &ys, k);
                let nf = norm(&f);
                // zero field: leave y_i where it is
                if nf > T::zero() {
                    ys[i] = f.into_iter().map(|x| -x / nf).collect();
                }
            }
            sweeps += 1;
            let next = value_of(&ys);
            trace.push(next);
            let change = (next - value).abs() / T::one().max(next.abs());
            value = next;
            residual = stationarity(&adj, &ys, k);
            if change < rel_tol && residual <= stat_tol {
                break;
            }
        }
        let certified = residual <= stat_tol;
        let better = match &best {
            None => true,
            Some(b) => (certified && !b.certified) || (certified == b.certified && value > b.value),
        };
        if better {
            best = Some(SdpSolution {
                gram: GramVectors::new(ys, c)?,
                value,
                stationarity_residual: residual,
                sweeps,
                certified,
                trace,
            });
        }
    }
    Ok(best.expect("at least one restart"))
}

/// `SDP_MC(G)`: the Max-Cut relaxation (`c = 1`).
pub fn sdp_value_mc<T: Real>(g: &WeightedGraph<T>, cfg: &SdpConfig) -> Result<T> {
    Ok(solve_sdp(g, T::one(), cfg)?.value)
}

/// `SDP_S(G)` with `c = (S+1)/S`.
pub fn sdp_value_s<T: Real>(g: &WeightedGraph<T>, s: SpinValue, cfg: &SdpConfig) -> Result<T> {
    Ok(solve_sdp(g, s.relaxation_coefficient(), cfg)?.value)
}

/// `(1 − c)·W + c·SDP_MC`, the spin-S value implied by the Max-Cut value.
pub fn spin_value_from_mc<T: Real>(g: &WeightedGraph<T>, s: SpinValue, sdp_mc: T) -> T {
    let c: T = s.relaxation_coefficient();
    (T::one() - c) * g.total_weight() + c * sdp_mc
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RelaxationReport<T> {
    pub sdp_s: T,
    pub qmaxcut: T,
    /// `SDP_S − QMaxCut_S`.
    pub gap: T,
    /// Largest `|M_ii − S(S+1)|` with `M = S(S+1)·ρ`.
    pub moment_diagonal_error: T,
    pub holds: bool,
}

/// Checks that the spin-S SDP value upper-bounds `QMaxCut_S(G)`.
pub fn verify_relaxation<T: Real>(
    g: &WeightedGraph<T>,
    s: SpinValue,
    exact: &ExactConfig,
    sdp: &SdpConfig,
) -> Result<RelaxationReport<T>> {
    let sol = solve_sdp(g, s.relaxation_coefficient(), sdp)?;
    let q = exact_values(g, s, exact)?.qmaxcut;
    let casimir: T = s.casimir();
    let moment_diagonal_error = (0..sol.gram.len())
        .map(|i| (casimir * sol.gram.overlap(i, i) - casimir).abs())
        .fold(T::zero(), |a, b| a.max(b));
    let gap = sol.value - q;
    let holds = gap >= -T::tol(1e-7) && moment_diagonal_error <= T::tol(1e-9);
    let report = RelaxationReport {
        sdp_s: sol.value,
        qmaxcut: q,
        gap,
        moment_diagonal_error,
        holds,
    };
    if !holds {
        return Err(Error::Verification(format!(
            "SDP_S = {} < QMaxCut_S = {} (diagonal error {})",
            report.sdp_s, report.qmaxcut, report.moment_diagonal_error
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::GraphSpec;

    fn g0() -> WeightedGraph<f64> {
        GraphSpec::SingleEdge { w: 2.0 }.generate().unwrap()
    }

    fn k3() -> WeightedGraph<f64> {
        GraphSpec::Complete { n: 3, w: 1.0 }.generate().unwrap()
    }

    #[test]
    fn single_edge_is_antipodal() {
        let sol = solve_sdp(&g0(), 3.0, &SdpConfig::default()).unwrap();
        assert!((sol.value - 4.0).abs() < 1e-12);
        assert!((sol.gram.overlap(0, 1) + 1.0).abs() < 1e-12);
        assert!(sol.certified);
    }

    #[test]
    fn triangle_max_cut_value() {
        // brute force over planar angles of y_1, y_2 with y_0 fixed
        let steps = 1440;
        let mut oracle: f64 = 0.0;
        for a in 0..steps {
            for b in 0..steps {
                let ta = std::f64::consts::TAU * a as f64 / steps as f64;
                let tb = std::f64::consts::TAU * b as f64 / steps as f64;
                let v = 0.5 * ((1.0 - ta.cos()) + (1.0 - tb.cos()) + (1.0 - (ta - tb).cos()));
                oracle = oracle.max(v);
            }
        }
        assert!((oracle - 2.25).abs() < 1e-9);
        let v = sdp_value_mc(&k3(), &SdpConfig::default()).unwrap();
        assert!((v - oracle).abs() < 1e-9);
    }

    #[test]
    fn bipartite_graphs_saturate() {
        for seed in 0..5 {
            // random bipartite graph between {0,1,2} and {3,4,5}
            let mut edges = Vec::new();
            for i in 0..3 {
                for j in 3..6 {
                    if (i + j + seed) % 3 != 0 {
                        edges.push((i, j, 0.5 + (i * j + seed) as f64 * 0.1));
                    }
                }
            }
            let g: WeightedGraph<f64> = WeightedGraph::new(6, edges).unwrap();
            let v = sdp_value_mc(&g, &SdpConfig::default()).unwrap();
            assert!((v - 2.0 * g.total_weight()).abs() < 1e-9);
        }
    }

    #[test]
    fn affine_identity_examples() {
        let cfg = SdpConfig::default();
        let mc = sdp_value_mc(&g0(), &cfg).unwrap();
        assert!((mc - 2.0).abs() < 1e-12);
        assert!((sdp_value_s(&g0(), SpinValue::HALF, &cfg).unwrap() - 4.0).abs() < 1e-12);
        assert!((spin_value_from_mc(&g0(), SpinValue::HALF, mc) - 4.0).abs() < 1e-12);

        let mc = sdp_value_mc(&k3(), &cfg).unwrap();
        let s1 = sdp_value_s(&k3(), SpinValue::ONE, &cfg).unwrap();
        assert!((s1 - 3.0).abs() < 1e-9);
        assert!((spin_value_from_mc(&k3(), SpinValue::ONE, mc) - s1).abs() < 1e-9);
    }

    #[test]
    fn large_spin_limit_approaches_max_cut() {
        let g: WeightedGraph<f64> = GraphSpec::Random {
            n: 6,
            p: 0.6,
            w_max: 1.0,
            seed: 3,
        }
        .generate()
        .unwrap();
        let cfg = SdpConfig::default();
        let mc = sdp_value_mc(&g, &cfg).unwrap();
        let mut prev = f64::INFINITY;
        for two_s in [1, 4, 16, 64, 256, 1024] {
            let s = SpinValue::from_two_s(two_s).unwrap();
            let gap = (sdp_value_s(&g, s, &cfg).unwrap() - mc).abs();
            assert!(gap <= prev + 1e-12);
            prev = gap;
        }
        assert!(prev < 1e-2);
    }

    #[test]
    fn sweeps_ascend_and_stay_feasible() {
        for seed in 0..10 {
            let g: WeightedGraph<f64> = GraphSpec::Random {
                n: 9,
                p: 0.5,
                w_max: 1.0,
                seed,
            }
            .generate()
            .unwrap();
            let sol = solve_sdp(
                &g,
                1.0,
                &SdpConfig {
                    seed,
                    ..Default::default()
                },
            )
            .unwrap();
            for w in sol.trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-12);
            }
            for y in sol.gram.vectors() {
                assert!((norm(y) - 1.0).abs() <= 1e-10);
            }
            assert!(sol.certified, "seed {seed}: residual {}", sol.stationarity_residual);
        }
    }

    #[test]
    fn rank_robustness() {
        for seed in 0..5 {
            let n = 6 + seed as usize;
            let g: WeightedGraph<f64> = GraphSpec::Random {
                n,
                p: 0.6,
                w_max: 1.0,
                seed,
            }
            .generate()
            .unwrap();
            let low = sdp_value_mc(&g, &SdpConfig::default()).unwrap();
            let full = sdp_value_mc(
                &g,
                &SdpConfig {
                    rank: Some(n),
                    ..Default::default()
                },
            )
            .unwrap();
            assert!((low - full).abs() <= 1e-6 * full.abs().max(1.0));
        }
    }

    #[test]
    fn parameter_validation() {
        let g: WeightedGraph<f64> = GraphSpec::Complete { n: 8, w: 1.0 }.generate().unwrap();
        assert!(solve_sdp(&g, 0.5, &SdpConfig::default()).is_err());
        assert!(solve_sdp(
            &g,
            1.0,
            &SdpConfig {
                rank: Some(2),
                ..Default::default()
            }
        )
        .is_err());
        assert!(solve_sdp(
            &g,
            1.0,
            &SdpConfig {
                restarts: 0,
                ..Default::default()
            }
        )
        .is_err());
        assert!(GramVectors::new(vec![vec![1.0, 0.0], vec![0.5, 0.5]], 1.0).is_err());
    }

    #[test]
    fn isolated_vertices_stay_put() {
        let g: WeightedGraph<f64> = WeightedGraph::new(4, [(0, 1, 1.0)]).unwrap();
        let sol = solve_sdp(
            &g,
            1.0,
            &SdpConfig {
                rank: Some(4),
                ..Default::default()
            },
        )
        .unwrap();
        assert!((sol.value - 1.0).abs() < 1e-12);
        assert!(sol.certified);
    }

    #[test]
    fn relaxation_examples() {
        let ex = ExactConfig::default();
        let cfg = SdpConfig::default();
        let r = verify_relaxation(&g0(), SpinValue::HALF, &ex, &cfg).unwrap();
        assert!(r.gap.abs() < 1e-9);
        // SDP_S(K3, 1/2) = −2·1.5 + 3·2.25 = 3.75 against an exact value of 3
        let r = verify_relaxation(&k3(), SpinValue::HALF, &ex, &cfg).unwrap();
        assert!((r.sdp_s - 3.75).abs() < 1e-9 && (r.qmaxcut - 3.0).abs() < 1e-9);
        assert!(r.moment_diagonal_error < 1e-12);
        let edgeless: WeightedGraph<f64> = WeightedGraph::empty(3).unwrap();
        let r = verify_relaxation(&edgeless, SpinValue::ONE, &ex, &cfg).unwrap();
        assert_eq!((r.sdp_s, r.qmaxcut), (0.0, 0.0));
    }
}
