//! Gaussian projection of SDP vectors to unit 3-vectors, and Monte-Carlo
//! statistics of the rounded product-state objective.
//!
//! Trial `t` draws its randomness from the ChaCha stream `t` of the given
//! seed, so results do not depend on evaluation order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::classical::{dot3, prod_objective_unchecked, UnitVectorAssignment};
use crate::eigen::EigenConfig;
use crate::error::{Error, Result};
use crate::exact::{exact_values, ExactConfig};
use crate::graph::WeightedGraph;
use crate::scalar::Real;
use crate::sdp::{solve_sdp, GramVectors, SdpConfig};
use crate::spin::SpinValue;

const DEGENERATE_PROJECTION: f64 = 1e-14;

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// `Ω_i = Z y_i / ‖Z y_i‖` for a `3 × k` standard normal `Z`. The whole of
/// `Z` is redrawn if any projection is (numerically) zero.
pub fn gaussian_round_with<T: Real>(gram: &GramVectors<T>, rng: &mut impl rand::Rng) -> UnitVectorAssignment<T> {
    let k = gram.rank();
    loop {
        let z: Vec<[T; 3]> = (0..k)
            .map(|_| {
                [0, 1, 2].map(|_| {
                    let x: f64 = StandardNormal.sample(rng);
                    T::lit(x)
                })
            })
            .collect();
        let mut out = Vec::with_capacity(gram.len());
        let mut degenerate = false;
        for y in gram.vectors() {
            let mut p = [T::zero(); 3];
            for (zc, &yc) in z.iter().zip(y) {
                for r in 0..3 {
                    p[r] += zc[r] * yc;
                }
            }
            let n = dot3(p, p).sqrt();
            if n < T::lit(DEGENERATE_PROJECTION) {
                degenerate = true;
                break;
            }
            out.push(p.map(|x| x / n));
        }
        if !degenerate {
            return UnitVectorAssignment::normalized(out).expect("nonzero projections");
        }
    }
}

/// Seeded single rounding.
pub fn gaussian_round<T: Real>(gram: &GramVectors<T>, seed: u64) -> UnitVectorAssignment<T> {
    gaussian_round_with(gram, &mut trial_rng(seed, 0))
}

/// Sample mean with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MonteCarloEstimate<T> {
    pub trials: usize,
    pub mean: T,
    pub std_error: T,
}

/// Welford accumulator.
#[derive(Debug, Clone, Copy)]
struct Moments<T> {
    n: usize,
    mean: T,
    m2: T,
}

impl<T: Real> Moments<T> {
    fn new() -> Self {
        Self {
            n: 0,
            mean: T::zero(),
            m2: T::zero(),
        }
    }

    fn push(&mut self, x: T) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / T::lit(self.n as f64);
        self.m2 += delta * (x - self.mean);
    }

    fn std_error(&self) -> T {
        if self.n < 2 {
            return T::zero();
        }
        let var = self.m2 / T::lit((self.n - 1) as f64);
        (var.max(T::zero()) / T::lit(self.n as f64)).sqrt()
    }
}

/// Monte-Carlo mean of `Ω_1·Ω_2` for two unit vectors at inner product `ρ`.
pub fn estimate_overlap_mean<T: Real>(rho: T, trials: usize, seed: u64) -> Result<MonteCarloEstimate<T>> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if !(rho.abs() <= T::one()) {
        return Err(Error::InvalidParameter(format!(
            "overlap must lie in [-1, 1], got {rho}"
        )));
    }
    let y2 = vec![rho, (T::one() - rho * rho).max(T::zero()).sqrt()];
    let gram = GramVectors::new(vec![vec![T::one(), T::zero()], y2], T::one())?;
    let mut acc = Moments::new();
    for t in 0..trials {
        let omegas = gaussian_round_with(&gram, &mut trial_rng(seed, t as u64));
        let v = omegas.vectors();
        acc.push(dot3(v[0], v[1]));
    }
    Ok(MonteCarloEstimate {
        trials,
        mean: acc.mean,
        std_error: acc.std_error(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RoundingReport<T> {
    pub trials: usize,
    pub seed: u64,
    pub best_value: T,
    pub mean_value: T,
    pub std_error: T,
    pub best_trial: usize,
    pub best_assignment: UnitVectorAssignment<T>,
    /// Mean `Ω_i·Ω_j` per edge, in edge order.
    pub edge_overlap_means: Vec<T>,
}

/// Rounds `gram` `trials` times and evaluates `½ Σ w_ij (1 − Ω_i·Ω_j)`.
pub fn round_and_evaluate<T: Real>(
    g: &WeightedGraph<T>,
    gram: &GramVectors<T>,
    trials: usize,
    seed: u64,
) -> Result<RoundingReport<T>> {
    if gram.len() != g.vertex_count() {
        return Err(Error::LengthMismatch {
            expected: g.vertex_count(),
            actual: gram.len(),
        });
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    let mut acc = Moments::new();
    let mut edge_sums = vec![T::zero(); g.edges().len()];
    let mut best: Option<(T, usize, UnitVectorAssignment<T>)> = None;
    for t in 0..trials {
        let omegas = gaussian_round_with(gram, &mut trial_rng(seed, t as u64));
        let v = omegas.vectors();
        for (s, e) in edge_sums.iter_mut().zip(g.edges()) {
            *s += dot3(v[e.i], v[e.j]);
        }
        let value = prod_objective_unchecked(g, v);
        acc.push(value);
        if best.as_ref().is_none_or(|b| value > b.0) {
            best = Some((value, t, omegas));
        }
    }
    let (best_value, best_trial, best_assignment) = best.expect("at least one trial");
    let n = T::lit(trials as f64);
    Ok(RoundingReport {
        trials,
        seed,
        best_value,
        mean_value: acc.mean,
        std_error: acc.std_error(),
        best_trial,
        best_assignment,
        edge_overlap_means: edge_sums.into_iter().map(|s| s / n).collect(),
    })
}

/// Which SDP is rounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    /// Max-Cut SDP (`c = 1`), guarantee `α_L(S)`.
    LiebBov,
    /// Spin-S SDP (`c = (S+1)/S`), guarantee `α_GP(S)`.
    GpS,
}

impl std::str::FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lieb_bov" => Ok(Algorithm::LiebBov),
            "gp_s" => Ok(Algorithm::GpS),
            other => Err(Error::InvalidParameter(format!("unknown algorithm {other:?}"))),
        }
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Algorithm::LiebBov => "lieb_bov",
            Algorithm::GpS => "gp_s",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PipelineConfig {
    pub trials: usize,
    pub seed: u64,
    pub sdp: SdpConfig,
    /// `None` skips the exact comparison.
    pub exact: Option<ExactConfig>,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            seed: 0,
            sdp: SdpConfig::default(),
            exact: Some(ExactConfig {
                dim_cap: 1 << 16,
                eigen: EigenConfig::default(),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineResult<T> {
    pub algorithm: Algorithm,
    pub two_s: u32,
    pub sdp_value: T,
    pub rounding: RoundingReport<T>,
    pub qmaxcut: Option<T>,
    /// `best_value / qmaxcut`, when the exact value is available and nonzero.
    pub realized_ratio: Option<T>,
}

impl<T: Real> PipelineResult<T> {
    pub fn value(&self) -> T {
        self.rounding.best_value
    }

    pub fn assignment(&self) -> &UnitVectorAssignment<T> {
        &self.rounding.best_assignment
    }
}

/// Solve the chosen SDP, round it `trials` times, keep the best, and compare
/// against the exact value when the instance fits the configured cap.
pub fn end_to_end<T: Real>(
    g: &WeightedGraph<T>,
    s: SpinValue,
    algorithm: Algorithm,
    cfg: &PipelineConfig,
) -> Result<PipelineResult<T>> {
    let c = match algorithm {
        Algorithm::LiebBov => T::one(),
        Algorithm::GpS => s.relaxation_coefficient(),
    };
    let sol = solve_sdp(g, c, &cfg.sdp)?;
    let rounding = round_and_evaluate(g, &sol.gram, cfg.trials, cfg.seed)?;
    let qmaxcut = match &cfg.exact {
        Some(ex) => match exact_values(g, s, ex) {
            Ok(v) => Some(v.qmaxcut),
            Err(Error::SizeCap { .. }) => None,
            Err(e) => return Err(e),
        },
        None => None,
    };
    let realized_ratio = qmaxcut.filter(|q| *q > T::zero()).map(|q| rounding.best_value / q);
    Ok(PipelineResult {
        algorithm,
        two_s: s.two_s(),
        sdp_value: sol.value,
        rounding,
        qmaxcut,
        realized_ratio,
    })
}
