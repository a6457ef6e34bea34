//! The invariant suite behind `qmc verify`: every check is seeded, so two
//! runs with the same configuration produce identical reports.

use serde::Serialize;

use crate::classical::{cha_value, prod_brute_force, prod_local_search, LocalSearchConfig, BRUTE_FORCE_MAX_VERTICES};
use crate::error::{Error, Result};
use crate::exact::{exact_values, ExactConfig};
use crate::gadget::{effective_hamiltonian, spectral_convergence};
use crate::graph::{GraphSpec, WeightedGraph};
use crate::ratios::{alpha_bov, alpha_gp, f_spin, f_star, hyp2f1_half, verify_chain};
use crate::rounding::{end_to_end, estimate_overlap_mean, round_and_evaluate, Algorithm, PipelineConfig};
use crate::sdp::{solve_sdp, spin_value_from_mc, SdpConfig};
use crate::spin::SpinValue;

/// Slack for inequalities between independently computed values.
pub const SLACK: f64 = 1e-7;
const BRUTE_FORCE_DEPTH: u32 = 12;
const BRUTE_FORCE_AGREEMENT: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyConfig {
    pub seed: u64,
    /// Random instances for the exact-versus-relaxation checks.
    pub instances: usize,
    pub max_vertices: usize,
    pub rounding_trials: usize,
    pub guarantee_trials: usize,
    pub chain_max_two_s: u32,
    pub gadget_two_s: Vec<u32>,
    pub gadget_deltas: Vec<f64>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            instances: 12,
            max_vertices: 7,
            rounding_trials: 100_000,
            guarantee_trials: 2_000,
            chain_max_two_s: 10,
            gadget_two_s: vec![1, 2],
            gadget_deltas: vec![1e2, 1e3, 1e4],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Check-specific figure of merit: worst margin, error or count.
    pub metric: f64,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, metric: f64, detail: String) -> Self {
        Self {
            name: name.to_string(),
            passed,
            metric,
            detail,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub passed: bool,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    fn from_checks(checks: Vec<Check>) -> Self {
        Self {
            passed: checks.iter().all(|c| c.passed),
            checks,
        }
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Seeded random instances cycling through `N = 2..=max_vertices` and
/// `2S = 1, 2, 3`. Edgeless draws are replaced, since every check is
/// trivially tight on them.
pub fn random_instances(count: usize, seed: u64, max_vertices: usize) -> Result<Vec<(WeightedGraph<f64>, SpinValue)>> {
    if max_vertices < 2 {
        return Err(Error::InvalidParameter("max_vertices must be at least 2".into()));
    }
    (0..count)
        .map(|k| {
            let n = 2 + k % (max_vertices - 1);
            let s = SpinValue::from_two_s(1 + (k % 3) as u32)?;
            let base = seed.wrapping_mul(1_000_003).wrapping_add((k as u64) << 16);
            for attempt in 0.. {
                let spec = GraphSpec::Random {
                    n,
                    p: 0.6,
                    w_max: 1.0,
                    seed: base.wrapping_add(attempt),
                };
                let g: WeightedGraph<f64> = spec.generate()?;
                if !g.edges().is_empty() {
                    return Ok((g, s));
                }
            }
            unreachable!()
        })
        .collect()
}

/// Everything computed once per instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InstanceValues {
    pub two_s: u32,
    pub vertices: usize,
    pub total_weight: f64,
    pub qmaxcut: f64,
    pub qha: f64,
    pub prod: f64,
    pub cha: f64,
    pub prod_brute_force: Option<f64>,
    pub sdp_mc: f64,
    pub sdp_s: f64,
}

pub fn instance_values(g: &WeightedGraph<f64>, s: SpinValue, seed: u64) -> Result<InstanceValues> {
    let ex = exact_values(g, s, &ExactConfig::default())?;
    let prod = prod_local_search(
        g,
        &LocalSearchConfig {
            seed,
            ..Default::default()
        },
    )?
    .value;
    let prod_brute_force = if g.vertex_count() <= BRUTE_FORCE_MAX_VERTICES {
        Some(prod_brute_force(g, BRUTE_FORCE_DEPTH)?.value)
    } else {
        None
    };
    let sdp_cfg = SdpConfig {
        seed,
        ..Default::default()
    };
    Ok(InstanceValues {
        two_s: s.two_s(),
        vertices: g.vertex_count(),
        total_weight: g.total_weight(),
        qmaxcut: ex.qmaxcut,
        qha: ex.qha,
        prod,
        cha: cha_value(g, prod),
        prod_brute_force,
        sdp_mc: solve_sdp(g, 1.0, &sdp_cfg)?.value,
        sdp_s: solve_sdp(g, s.relaxation_coefficient(), &sdp_cfg)?.value,
    })
}

/// `((S+1)/S)² CHA ≤ QHA_S ≤ CHA`; returns the smaller of the two margins.
pub fn lieb_margin(v: &InstanceValues) -> f64 {
    let r = (v.two_s as f64 + 2.0) / v.two_s as f64;
    (v.qha - r * r * v.cha).min(v.cha - v.qha)
}

/// `(S/(S+1))² QMaxCut ≤ Prod ≤ QMaxCut`; returns the smaller margin.
pub fn sandwich_margin(v: &InstanceValues) -> f64 {
    let r = v.two_s as f64 / (v.two_s as f64 + 2.0);
    (v.prod - r * r * v.qmaxcut).min(v.qmaxcut - v.prod)
}

/// `|SDP_S − ((1−c)W + c SDP_MC)|`, relative to `max(1, SDP_S)`.
pub fn affine_defect(g: &WeightedGraph<f64>, v: &InstanceValues) -> Result<f64> {
    let s = SpinValue::from_two_s(v.two_s)?;
    Ok((v.sdp_s - spin_value_from_mc(g, s, v.sdp_mc)).abs() / v.sdp_s.max(1.0))
}

fn check_ratio_constants() -> Result<Check> {
    let bov = alpha_bov::<f64>()?.value;
    let gp = alpha_gp::<f64>(SpinValue::HALF)?.value;
    let ok = (0.955..=0.957).contains(&bov) && (0.496..=0.500).contains(&gp);
    Ok(Check::new(
        "ratio_constants",
        ok,
        bov,
        format!("alpha_bov={bov:.6} alpha_gp(1/2)={gp:.6}"),
    ))
}

fn check_endpoints() -> Result<Check> {
    let mut worst: f64 = 0.0;
    for two_s in 1..=10 {
        let s = SpinValue::from_two_s(two_s)?;
        let t = two_s as f64;
        worst = worst.max((f_spin(s, -1.0)? - t / (t + 1.0)).abs());
    }
    worst = worst.max((hyp2f1_half(1.0)? - 3.0 * std::f64::consts::PI / 8.0).abs());
    worst = worst
        .max((f_star(1.0_f64)? - 1.0).abs())
        .max((f_star(-1.0_f64)? + 1.0).abs());
    Ok(Check::new(
        "endpoints",
        worst <= 1e-12,
        worst,
        format!("max endpoint error {worst:.3e}"),
    ))
}

fn check_single_edge(seed: u64) -> Result<Check> {
    let g0: WeightedGraph<f64> = GraphSpec::SingleEdge { w: 2.0 }.generate()?;
    let cfg = PipelineConfig {
        trials: 100,
        seed,
        ..Default::default()
    };
    let mut worst: f64 = 0.0;
    for two_s in 1..=3 {
        let s = SpinValue::from_two_s(two_s)?;
        let t = two_s as f64;
        let q = exact_values(&g0, s, &ExactConfig::default())?.qmaxcut;
        worst = worst.max((q - (2.0 + 2.0 / t)).abs());
        let r = end_to_end(&g0, s, Algorithm::GpS, &cfg)?;
        worst = worst.max((r.value() - 2.0).abs());
        let ratio = r.realized_ratio.unwrap_or(f64::NAN);
        worst = worst.max((ratio - t / (t + 1.0)).abs());
    }
    Ok(Check::new(
        "single_edge",
        worst <= 1e-8,
        worst,
        format!("max deviation {worst:.3e}"),
    ))
}

fn instance_checks(tag: &str, items: &[(WeightedGraph<f64>, InstanceValues)]) -> Result<Vec<Check>> {
    let mut lieb = f64::INFINITY;
    let mut sandwich = f64::INFINITY;
    let mut relax = f64::INFINITY;
    let mut affine: f64 = 0.0;
    let mut brute: f64 = 0.0;
    let mut brute_count = 0;
    for (g, v) in items {
        lieb = lieb.min(lieb_margin(v));
        sandwich = sandwich.min(sandwich_margin(v));
        relax = relax.min(v.sdp_s - v.qmaxcut);
        affine = affine.max(affine_defect(g, v)?);
        if let Some(bf) = v.prod_brute_force {
            brute = brute.max((bf - v.prod).abs());
            brute_count += 1;
        }
    }
    let n = items.len();
    let name = |base: &str| format!("{tag}{base}");
    Ok(vec![
        Check::new(
            &name("lieb_chain"),
            lieb >= -SLACK,
            lieb,
            format!("{n} instances, worst margin {lieb:.3e}"),
        ),
        Check::new(
            &name("prod_brute_force_agreement"),
            brute <= BRUTE_FORCE_AGREEMENT,
            brute,
            format!("{brute_count} instances, max |local - grid| {brute:.3e}"),
        ),
        Check::new(
            &name("prod_sandwich"),
            sandwich >= -SLACK,
            sandwich,
            format!("{n} instances, worst margin {sandwich:.3e}"),
        ),
        Check::new(
            &name("sdp_relaxation"),
            relax >= -SLACK,
            relax,
            format!("{n} instances, min SDP_S - QMaxCut_S {relax:.3e}"),
        ),
        Check::new(
            &name("sdp_affine_identity"),
            affine <= SLACK,
            affine,
            format!("{n} instances, max relative defect {affine:.3e}"),
        ),
    ])
}

fn check_rounding_law(trials: usize, seed: u64) -> Result<Check> {
    let mut worst: f64 = 0.0;
    for (k, rho) in [-1.0_f64, -0.75, -0.5, -0.25, 0.0].into_iter().enumerate() {
        let est = estimate_overlap_mean(rho, trials, seed.wrapping_add(k as u64))?;
        let dev = (est.mean - f_star(rho)?).abs();
        let z = if est.std_error > 0.0 {
            dev / est.std_error
        } else if dev <= 1e-12 {
            0.0
        } else {
            f64::INFINITY
        };
        worst = worst.max(z);
    }
    Ok(Check::new(
        "rounding_law",
        worst <= 4.0,
        worst,
        format!("{trials} trials per overlap, max deviation {worst:.2} standard errors"),
    ))
}

fn check_guarantee(items: &[(WeightedGraph<f64>, InstanceValues)], trials: usize, seed: u64) -> Result<Check> {
    let mut worst = f64::INFINITY;
    for (k, (g, v)) in items.iter().enumerate() {
        let s = SpinValue::from_two_s(v.two_s)?;
        let sol = solve_sdp(
            g,
            s.relaxation_coefficient(),
            &SdpConfig {
                seed,
                ..Default::default()
            },
        )?;
        let r = round_and_evaluate(g, &sol.gram, trials, seed.wrapping_add(k as u64))?;
        let alpha = alpha_gp::<f64>(s)?.value;
        worst = worst.min(r.mean_value - (alpha * sol.value - 4.0 * r.std_error));
    }
    Ok(Check::new(
        "rounding_guarantee",
        worst >= 0.0,
        worst,
        format!(
            "{} instances, {trials} trials each, worst margin {worst:.3e}",
            items.len()
        ),
    ))
}

fn check_ratio_chain(max_two_s: u32) -> Result<Check> {
    let r = verify_chain(max_two_s)?;
    let m = r.min_margins.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(Check::new(
        "ratio_chain",
        r.holds(),
        m,
        format!(
            "2S <= {max_two_s}, {} pointwise checks, {} violations",
            r.pointwise_checks,
            r.violations.len()
        ),
    ))
}

fn check_gadget(two_s: u32, deltas: &[f64]) -> Result<Check> {
    let s = SpinValue::from_two_s(two_s)?;
    let eff = effective_hamiltonian::<f64>(s, false)?;
    let rows = spectral_convergence::<f64>(s, deltas, false)?;
    let monotone = rows.windows(2).all(|w| w[1].spec_error < w[0].spec_error);
    let (lo, hi) = rows.iter().fold((f64::INFINITY, 0.0_f64), |(l, h), r| {
        (l.min(r.scaled_error), h.max(r.scaled_error))
    });
    let spread = hi / lo;
    let ok = eff.first_order_norm <= 1e-12 && eff.fit.c > 0.0 && monotone && spread < 3.0;
    Ok(Check::new(
        &format!("gadget_two_s_{two_s}"),
        ok,
        spread,
        format!(
            "|PH2P|={:.2e} c={:.6} e={:.6} residual={:.2e} c/c_ref={:.6} monotone={monotone} scaled spread={spread:.3}",
            eff.first_order_norm, eff.fit.c, eff.fit.e, eff.fit.residual, eff.coupling_ratio
        ),
    ))
}

/// Runs the whole suite, optionally adding the instance checks for a
/// user-supplied graph at each of `2S = 1, 2, 3`.
pub fn run_suite(cfg: &VerifyConfig, extra: Option<&WeightedGraph<f64>>) -> Result<VerifyReport> {
    let mut checks = vec![
        check_ratio_constants()?,
        check_endpoints()?,
        check_single_edge(cfg.seed)?,
    ];

    let items = random_instances(cfg.instances, cfg.seed, cfg.max_vertices)?
        .into_iter()
        .map(|(g, s)| instance_values(&g, s, cfg.seed).map(|v| (g, v)))
        .collect::<Result<Vec<_>>>()?;
    checks.extend(instance_checks("", &items)?);
    checks.push(check_rounding_law(cfg.rounding_trials, cfg.seed)?);
    checks.push(check_guarantee(&items, cfg.guarantee_trials, cfg.seed)?);
    checks.push(check_ratio_chain(cfg.chain_max_two_s)?);
    for &two_s in &cfg.gadget_two_s {
        checks.push(check_gadget(two_s, &cfg.gadget_deltas)?);
    }

    if let Some(g) = extra {
        let items = (1..=3)
            .map(|t| {
                let s = SpinValue::from_two_s(t)?;
                instance_values(g, s, cfg.seed).map(|v| (g.clone(), v))
            })
            .collect::<Result<Vec<_>>>()?;
        checks.extend(instance_checks("instance_", &items)?);
    }
    Ok(VerifyReport::from_checks(checks))
}
