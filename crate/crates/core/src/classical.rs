//! Classical Heisenberg energies and the product-state value.
//!
//! For unit vectors `Ω_i` the product-state objective is
//! `½ Σ w_ij (1 − Ω_i·Ω_j) = W − E_CHA(Ω)`. Its maximum over coherent
//! product states equals the maximum over all product states, so it is
//! searched with the single-site replacement `Ω_i ← −w_i/‖w_i‖`, which never
//! lowers the objective.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitSphere};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::scalar::Real;
use crate::spin::check_unit;

/// `N` unit 3-vectors: a classical spin configuration.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitVectorAssignment<T> {
    vectors: Vec<[T; 3]>,
}

impl<T: Real> UnitVectorAssignment<T> {
    /// Fails if any vector is off the unit sphere by more than `1e-10`.
    pub fn new(vectors: Vec<[T; 3]>) -> Result<Self> {
        for (i, v) in vectors.iter().enumerate() {
            check_unit(i, *v)?;
        }
        Ok(Self { vectors })
    }

    /// Normalizes every vector; zero vectors are rejected.
    pub fn normalized(vectors: Vec<[T; 3]>) -> Result<Self> {
        let mut out = Vec::with_capacity(vectors.len());
        for (i, v) in vectors.into_iter().enumerate() {
            let n = norm3(v);
            if n == T::zero() || !n.is_finite() {
                return Err(Error::NotUnit {
                    index: i,
                    norm: n.as_f64(),
                });
            }
            out.push(v.map(|x| x / n));
        }
        Ok(Self { vectors: out })
    }

    /// I.i.d. uniform points on the sphere.
    pub fn random(n: usize, rng: &mut impl rand::Rng) -> Self {
        Self {
            vectors: (0..n)
                .map(|_| {
                    let p: [f64; 3] = UnitSphere.sample(rng);
                    p.map(T::lit)
                })
                .collect(),
        }
    }

    pub fn vectors(&self) -> &[[T; 3]] {
        &self.vectors
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

pub(crate) fn dot3<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn norm3<T: Real>(a: [T; 3]) -> T {
    dot3(a, a).sqrt()
}

fn check_len<T: Real>(g: &WeightedGraph<T>, n: usize) -> Result<()> {
    if g.vertex_count() != n {
        return Err(Error::LengthMismatch {
            expected: g.vertex_count(),
            actual: n,
        });
    }
    Ok(())
}

/// Classical Heisenberg antiferromagnet energy `½ Σ w_ij Ω_i·Ω_j`.
pub fn cha_energy<T: Real>(g: &WeightedGraph<T>, omegas: &UnitVectorAssignment<T>) -> Result<T> {
    check_len(g, omegas.len())?;
    Ok(cha_energy_unchecked(g, &omegas.vectors))
}

fn cha_energy_unchecked<T: Real>(g: &WeightedGraph<T>, v: &[[T; 3]]) -> T {
    g.edges()
        .iter()
        .map(|e| e.w * dot3(v[e.i], v[e.j]))
        .fold(T::zero(), |a, b| a + b)
        * T::lit(0.5)
}

/// Product-state objective `½ Σ w_ij (1 − Ω_i·Ω_j)`; also `⟨Ω⃗|Ĥ_QMC|Ω⃗⟩`
/// for the matching coherent product state at any `S`.
pub fn prod_objective<T: Real>(g: &WeightedGraph<T>, omegas: &UnitVectorAssignment<T>) -> Result<T> {
    check_len(g, omegas.len())?;
    Ok(prod_objective_unchecked(g, &omegas.vectors))
}

pub(crate) fn prod_objective_unchecked<T: Real>(g: &WeightedGraph<T>, v: &[[T; 3]]) -> T {
    g.edges()
        .iter()
        .map(|e| e.w * (T::one() - dot3(v[e.i], v[e.j])))
        .fold(T::zero(), |a, b| a + b)
        * T::lit(0.5)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalSearchConfig {
    pub restarts: usize,
    pub seed: u64,
    /// A sweep improving the objective by less than this ends a restart.
    pub tolerance: f64,
    pub max_sweeps: usize,
}

impl Default for LocalSearchConfig {
    fn default() -> Self {
        Self {
            restarts: 32,
            seed: 0,
            tolerance: 1e-12,
            max_sweeps: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProdResult<T> {
    pub value: T,
    pub omegas: UnitVectorAssignment<T>,
    /// Best restart index.
    pub restart: usize,
}

/// One restart of the single-site replacement sweep, starting from `start`
/// (entries may lie inside the ball). Returns the final objective and the
/// per-sweep objective trace.
pub fn sweep_to_local_optimum<T: Real>(
    g: &WeightedGraph<T>,
    adj: &[Vec<(usize, T)>],
    start: &mut [[T; 3]],
    tolerance: T,
    max_sweeps: usize,
) -> (T, Vec<T>) {
    let mut value = prod_objective_unchecked(g, start);
    let mut trace = vec![value];
    for _ in 0..max_sweeps {
        for i in 0..start.len() {
            let mut field = [T::zero(); 3];
            for &(j, w) in &adj[i] {
                for k in 0..3 {
                    field[k] += w * start[j][k];
                }
            }
            let n = norm3(field);
            // zero local field: keep Ω_i
            if n > T::zero() {
                start[i] = field.map(|x| -x / n);
            }
        }
        let next = prod_objective_unchecked(g, start);
        trace.push(next);
        let gain = next - value;
        value = next;
        if gain < tolerance {
            break;
        }
    }
    (value, trace)
}

/// Best local optimum of the product-state objective over seeded restarts.
pub fn prod_local_search<T: Real>(g: &WeightedGraph<T>, cfg: &LocalSearchConfig) -> Result<ProdResult<T>> {
    if cfg.restarts == 0 {
        return Err(Error::InvalidParameter("restarts must be at least 1".into()));
    }
    let adj = g.adjacency();
    let tol = T::lit(cfg.tolerance);
    let mut best: Option<ProdResult<T>> = None;
    for restart in 0..cfg.restarts {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        rng.set_stream(restart as u64);
        let mut v = UnitVectorAssignment::<T>::random(g.vertex_count(), &mut rng).vectors;
        let (value, _) = sweep_to_local_optimum(g, &adj, &mut v, tol, cfg.max_sweeps);
        if best.as_ref().is_none_or(|b| value > b.value) {
            best = Some(ProdResult {
                value,
                omegas: UnitVectorAssignment::normalized(v)?,
                restart,
            });
        }
    }
    Ok(best.expect("at least one restart"))
}

/// `CHA(G) = min_Ω E_CHA = W − Prod(G)`.
pub fn cha_value<T: Real>(g: &WeightedGraph<T>, prod_value: T) -> T {
    g.total_weight() - prod_value
}

pub const BRUTE_FORCE_MAX_VERTICES: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BruteForceResult<T> {
    pub value: T,
    pub omegas: UnitVectorAssignment<T>,
    pub grid_points: u64,
}

/// 26 directions: cube faces, edges and corners.
fn coarse_directions<T: Real>() -> Vec<[T; 3]> {
    let mut dirs = Vec::new();
    for x in -1i32..=1 {
        for y in -1i32..=1 {
            for z in -1i32..=1 {
                if (x, y, z) != (0, 0, 0) {
                    let v = [x as f64, y as f64, z as f64];
                    let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                    dirs.push(v.map(|c| T::lit(c / n)));
                }
            }
        }
    }
    dirs
}

/// Rotates `v` by angle `theta` towards tangent direction `phi`.
fn tilt<T: Real>(v: [T; 3], theta: T, phi: T) -> [T; 3] {
    // orthonormal tangent frame at v
    let helper = if v[0].abs() < T::lit(0.9) {
        [T::one(), T::zero(), T::zero()]
    } else {
        [T::zero(), T::one(), T::zero()]
    };
    let d = dot3(helper, v);
    let mut e1 = [helper[0] - d * v[0], helper[1] - d * v[1], helper[2] - d * v[2]];
    let n1 = norm3(e1);
    e1 = e1.map(|x| x / n1);
    let e2 = [
        v[1] * e1[2] - v[2] * e1[1],
        v[2] * e1[0] - v[0] * e1[2],
        v[0] * e1[1] - v[1] * e1[0],
    ];
    let (c, s) = (theta.cos(), theta.sin());
    let (cp, sp) = (phi.cos(), phi.sin());
    let out = [0, 1, 2].map(|k| c * v[k] + s * (cp * e1[k] + sp * e2[k]));
    let n = norm3(out);
    out.map(|x| x / n)
}

/// Grid oracle for `Prod(G)` on at most six vertices.
///
/// Vertex 0 is pinned to `+ẑ` (the objective is rotation invariant); every
/// other vertex ranges over a 26-direction grid. The best coarse candidates
/// are then refined by a per-site cap search whose radius is halved until it
/// drops below `2^-grid_depth`. The refinement uses only objective
/// evaluations, never the local-field update of [`prod_local_search`].
pub fn prod_brute_force<T: Real>(g: &WeightedGraph<T>, grid_depth: u32) -> Result<BruteForceResult<T>> {
    let n = g.vertex_count();
    if n > BRUTE_FORCE_MAX_VERTICES {
        return Err(Error::InvalidParameter(format!(
            "brute force supports at most {BRUTE_FORCE_MAX_VERTICES} vertices, got {n}"
        )));
    }
    let north = [T::zero(), T::zero(), T::one()];
    if n == 1 {
        return Ok(BruteForceResult {
            value: T::zero(),
            omegas: UnitVectorAssignment { vectors: vec![north] },
            grid_points: 1,
        });
    }

    let dirs = coarse_directions::<T>();
    const KEEP: usize = 24;
    let free = n - 1;
    let total = (dirs.len() as u64).pow(free as u32);
    let mut top: Vec<(T, Vec<usize>)> = Vec::with_capacity(KEEP + 1);
    let mut idx = vec![0usize; free];
    let mut config = vec![north; n];
    for _ in 0..total {
        for (k, &d) in idx.iter().enumerate() {
            config[k + 1] = dirs[d];
        }
        let val = prod_objective_unchecked(g, &config);
        if top.len() < KEEP || val > top.last().unwrap().0 {
            let pos = top.partition_point(|(v, _)| *v >= val);
            top.insert(pos, (val, idx.clone()));
            top.truncate(KEEP);
        }
        // odometer increment
        for digit in idx.iter_mut() {
            *digit += 1;
            if *digit < dirs.len() {
                break;
            }
            *digit = 0;
        }
    }

    let mut best_val = -T::one();
    let mut best_cfg = config.clone();
    let two_pi = T::two_pi();
    let directions = 8;
    for (_, cand) in &top {
        for (k, &d) in cand.iter().enumerate() {
            config[k + 1] = dirs[d];
        }
        let mut val = prod_objective_unchecked(g, &config);
        let mut radius = T::lit(0.5);
        let stop = T::lit(2f64.powi(-(grid_depth as i32)));
        while radius >= stop {
            let mut improved = false;
            for site in 0..n {
                let base = config[site];
                let mut site_best = (val, base);
                for step in 0..directions {
                    let phi = two_pi * T::lit(step as f64 / directions as f64);
                    config[site] = tilt(base, radius, phi);
                    let trial = prod_objective_unchecked(g, &config);
                    if trial > site_best.0 {
                        site_best = (trial, config[site]);
                    }
                }
                config[site] = site_best.1;
                if site_best.0 > val {
                    val = site_best.0;
                    improved = true;
                }
            }
            if !improved {
                radius *= T::lit(0.5);
            }
        }
        if val > best_val {
            best_val = val;
            best_cfg = config.clone();
        }
    }
    Ok(BruteForceResult {
        value: best_val,
        omegas: UnitVectorAssignment::normalized(best_cfg)?,
        grid_points: total,
    })
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

    fn planar(angle_deg: f64) -> [f64; 3] {
        let a = angle_deg.to_radians();
        [a.cos(), a.sin(), 0.0]
    }

    #[test]
    fn cha_energy_examples() {
        let anti = UnitVectorAssignment::new(vec![[0.0, 0.0, 1.0], [0.0, 0.0, -1.0]]).unwrap();
        assert_eq!(cha_energy(&g0(), &anti).unwrap(), -1.0);

        let tri = UnitVectorAssignment::new(vec![planar(0.0), planar(120.0), planar(240.0)]).unwrap();
        assert!((cha_energy(&k3(), &tri).unwrap() + 0.75).abs() < 1e-14);

        let g: WeightedGraph<f64> = GraphSpec::Random {
            n: 5,
            p: 0.7,
            w_max: 2.0,
            seed: 1,
        }
        .generate()
        .unwrap();
        let aligned = UnitVectorAssignment::new(vec![[0.6, 0.0, 0.8]; 5]).unwrap();
        assert!((cha_energy(&g, &aligned).unwrap() - g.total_weight()).abs() < 1e-14);
    }

    #[test]
    fn cha_energy_length_mismatch() {
        let one = UnitVectorAssignment::new(vec![[1.0, 0.0, 0.0]]).unwrap();
        assert!(matches!(cha_energy(&g0(), &one), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn non_unit_vectors_rejected() {
        assert!(UnitVectorAssignment::new(vec![[1.0, 1.0, 0.0]]).is_err());
    }

    #[test]
    fn local_search_examples() {
        let cfg = LocalSearchConfig::default();
        assert!((prod_local_search(&g0(), &cfg).unwrap().value - 2.0).abs() < 1e-12);
        assert!((prod_local_search(&k3(), &cfg).unwrap().value - 2.25).abs() < 1e-10);
        let path: WeightedGraph<f64> = WeightedGraph::new(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        assert!((prod_local_search(&path, &cfg).unwrap().value - 2.0).abs() < 1e-12);
        assert!(prod_local_search(&path, &LocalSearchConfig { restarts: 0, ..cfg }).is_err());
    }

    #[test]
    fn local_search_is_deterministic() {
        let g: WeightedGraph<f64> = GraphSpec::Random {
            n: 7,
            p: 0.6,
            w_max: 1.0,
            seed: 4,
        }
        .generate()
        .unwrap();
        let cfg = LocalSearchConfig {
            seed: 9,
            ..Default::default()
        };
        assert_eq!(
            prod_local_search(&g, &cfg).unwrap(),
            prod_local_search(&g, &cfg).unwrap()
        );
    }

    #[test]
    fn zero_field_keeps_current_vector() {
        // vertex 2 is isolated
        let g: WeightedGraph<f64> = WeightedGraph::new(3, [(0, 1, 1.0)]).unwrap();
        let adj = g.adjacency();
        let start = [0.0, 0.6, 0.8];
        let mut v = vec![[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], start];
        sweep_to_local_optimum(&g, &adj, &mut v, 1e-12, 100);
        assert_eq!(v[2], start);
    }

    #[test]
    fn sweeps_are_monotone() {
        for seed in 0..10 {
            let g: WeightedGraph<f64> = GraphSpec::Random {
                n: 8,
                p: 0.5,
                w_max: 1.0,
                seed,
            }
            .generate()
            .unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut v = UnitVectorAssignment::<f64>::random(8, &mut rng).vectors;
            let (_, trace) = sweep_to_local_optimum(&g, &g.adjacency(), &mut v, 1e-12, 10_000);
            for w in trace.windows(2) {
                assert!(w[1] >= w[0] - 1e-14);
            }
        }
    }

    #[test]
    fn brute_force_examples() {
        assert!((prod_brute_force(&g0(), 20).unwrap().value - 2.0).abs() < 1e-3);
        assert!((prod_brute_force(&k3(), 20).unwrap().value - 2.25).abs() < 1e-3);
        let single: WeightedGraph<f64> = WeightedGraph::empty(1).unwrap();
        assert_eq!(prod_brute_force(&single, 20).unwrap().value, 0.0);
        let big: WeightedGraph<f64> = WeightedGraph::empty(7).unwrap();
        assert!(prod_brute_force(&big, 20).is_err());
    }

    #[test]
    fn k3_planar_angle_oracle() {
        // independent parametrization: Ω_0 fixed, Ω_1, Ω_2 in a plane
        let mut best: f64 = 0.0;
        let steps = 720;
        for a in 0..steps {
            for b in 0..steps {
                let (ta, tb) = (360.0 * a as f64 / steps as f64, 360.0 * b as f64 / steps as f64);
                let v = [planar(0.0), planar(ta), planar(tb)];
                best = best.max(prod_objective_unchecked(&k3(), &v));
            }
        }
        assert!((best - 2.25).abs() < 1e-9);
    }

    #[test]
    fn single_precision_local_search() {
        let g: WeightedGraph<f32> = GraphSpec::Complete { n: 3, w: 1.0 }.generate().unwrap();
        let r = prod_local_search(
            &g,
            &LocalSearchConfig {
                tolerance: 1e-6,
                ..Default::default()
            },
        )
        .unwrap();
        assert!((r.value - 2.25).abs() < 1e-4);
    }
}
