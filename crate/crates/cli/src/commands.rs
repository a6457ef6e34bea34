use std::fmt;
use std::time::Instant;

use serde::Serialize;
use spin_qmc::classical::{cha_value, prod_local_search, LocalSearchConfig};
use spin_qmc::exact::{exact_values, ExactConfig};
use spin_qmc::gadget::{effective_hamiltonian, spectral_convergence};
use spin_qmc::graph::{parse_instance, GraphSpec};
use spin_qmc::ratios::{alpha_gp, alpha_lieb, ratio_table};
use spin_qmc::rounding::round_and_evaluate;
use spin_qmc::sdp::{solve_sdp, SdpConfig};
use spin_qmc::verify::{run_suite, Check, VerifyConfig};
use spin_qmc::{Algorithm, EffectiveHamiltonian, Graph, RatioTable, SpectralRow, SpinValue};

use crate::output::{self, Tool, TOOL};
use crate::{Format, GadgetArgs, RatiosArgs, SolveArgs, Source, VerifyArgs};

/// Largest `2S` the gadget command diagonalizes.
const GADGET_MAX_TWO_S: u32 = 4;

#[derive(Debug)]
pub enum CliError {
    Lib(spin_qmc::Error),
    Input(String),
    Io(String),
    ChecksFailed(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use spin_qmc::Error as E;
        match self {
            CliError::Lib(E::SizeCap { .. }) => 2,
            CliError::Lib(E::Verification(_) | E::NotHeisenberg { .. } | E::NoConvergence { .. }) => 3,
            CliError::ChecksFailed(_) => 3,
            CliError::Lib(_) | CliError::Input(_) | CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Lib(e) => write!(f, "{e}"),
            CliError::Input(m) | CliError::Io(m) => f.write_str(m),
            CliError::ChecksFailed(names) => write!(f, "failed checks: {}", names.join(", ")),
        }
    }
}

impl From<spin_qmc::Error> for CliError {
    fn from(e: spin_qmc::Error) -> Self {
        CliError::Lib(e)
    }
}

fn load(source: &Source) -> Result<Option<(Graph, String)>, CliError> {
    match (&source.instance, &source.generate) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            let g = parse_instance(&text)?;
            Ok(Some((g, path.display().to_string())))
        }
        (None, Some(spec)) => {
            let g = spec.parse::<GraphSpec>()?.generate()?;
            Ok(Some((g, spec.clone())))
        }
        (None, None) => Ok(None),
    }
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

fn log_time(command: &str, t: Instant) {
    eprintln!("{command}: {:.1} ms", elapsed_ms(t));
}

#[derive(Debug, Serialize)]
struct InstanceSummary {
    source: String,
    vertices: usize,
    edges: usize,
    total_weight: f64,
}

#[derive(Debug, Serialize)]
struct Seeds {
    local_search: u64,
    sdp: u64,
    rounding: u64,
}

#[derive(Debug, Serialize)]
struct Values {
    qmaxcut: Option<f64>,
    qha: Option<f64>,
    prod: f64,
    cha: f64,
    sdp_mc: f64,
    sdp_s: f64,
    sdp_mc_certified: bool,
    sdp_s_certified: bool,
}

#[derive(Debug, Serialize)]
struct Rounded {
    algorithm: Algorithm,
    trials: usize,
    best: f64,
    mean: f64,
    std_error: f64,
    best_trial: usize,
    /// `α_GP(S)` for `gp_s`, `α_L(S)` for `lieb_bov`.
    guarantee: f64,
    best_assignment: Vec<[f64; 3]>,
}

#[derive(Debug, Serialize)]
struct Ratios {
    best_over_qmaxcut: Option<f64>,
    mean_over_sdp: Option<f64>,
    prod_over_qmaxcut: Option<f64>,
}

#[derive(Debug, Serialize)]
struct SolveReport<'a> {
    tool: Tool,
    command: &'static str,
    config: &'a SolveArgs,
    seeds: Seeds,
    instance: InstanceSummary,
    two_s: u32,
    values: Values,
    rounding: Rounded,
    ratios: Ratios,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings_ms: Option<SolveTimings>,
}

#[derive(Debug, Default, Serialize)]
struct SolveTimings {
    exact: f64,
    local_search: f64,
    sdp: f64,
    rounding: f64,
    total: f64,
}

#[derive(Debug, Serialize)]
struct SolveRow {
    source: String,
    vertices: usize,
    edges: usize,
    two_s: u32,
    algorithm: Algorithm,
    seed: u64,
    trials: usize,
    total_weight: f64,
    qmaxcut: Option<f64>,
    qha: Option<f64>,
    prod: f64,
    sdp_mc: f64,
    sdp_s: f64,
    rounded_best: f64,
    rounded_mean: f64,
    rounded_std_error: f64,
    best_over_qmaxcut: Option<f64>,
}

fn ratio(a: f64, b: f64) -> Option<f64> {
    (b > 0.0).then(|| a / b)
}

pub fn solve(a: &SolveArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let (g, source) = load(&a.source)?.ok_or_else(|| CliError::Input("solve needs --instance or --generate".into()))?;
    let s = SpinValue::from_two_s(a.two_s)?;
    let algorithm: Algorithm = a.algorithm.into();
    let mut t = SolveTimings::default();

    let clock = Instant::now();
    let exact = if a.no_exact {
        None
    } else {
        Some(exact_values(&g, s, &ExactConfig::default())?)
    };
    t.exact = elapsed_ms(clock);

    let clock = Instant::now();
    let prod = prod_local_search(
        &g,
        &LocalSearchConfig {
            seed: a.seed,
            ..Default::default()
        },
    )?;
    t.local_search = elapsed_ms(clock);

    let clock = Instant::now();
    let sdp_cfg = SdpConfig {
        seed: a.seed,
        ..Default::default()
    };
    let mc = solve_sdp(&g, 1.0, &sdp_cfg)?;
    let sp = solve_sdp(&g, s.relaxation_coefficient(), &sdp_cfg)?;
    t.sdp = elapsed_ms(clock);

    let clock = Instant::now();
    let (used, guarantee) = match algorithm {
        Algorithm::LiebBov => (&mc, alpha_lieb(s, spin_qmc::ratios::alpha_bov::<f64>()?.value)),
        Algorithm::GpS => (&sp, alpha_gp::<f64>(s)?.value),
    };
    let r = round_and_evaluate(&g, &used.gram, a.trials, a.seed)?;
    t.rounding = elapsed_ms(clock);
    t.total = elapsed_ms(start);

    let qmaxcut = exact.map(|e| e.qmaxcut);
    let report = SolveReport {
        tool: TOOL,
        command: "solve",
        config: a,
        seeds: Seeds {
            local_search: a.seed,
            sdp: a.seed,
            rounding: a.seed,
        },
        instance: InstanceSummary {
            source: source.clone(),
            vertices: g.vertex_count(),
            edges: g.edges().len(),
            total_weight: g.total_weight(),
        },
        two_s: a.two_s,
        values: Values {
            qmaxcut,
            qha: exact.map(|e| e.qha),
            prod: prod.value,
            cha: cha_value(&g, prod.value),
            sdp_mc: mc.value,
            sdp_s: sp.value,
            sdp_mc_certified: mc.certified,
            sdp_s_certified: sp.certified,
        },
        rounding: Rounded {
            algorithm,
            trials: r.trials,
            best: r.best_value,
            mean: r.mean_value,
            std_error: r.std_error,
            best_trial: r.best_trial,
            guarantee,
            best_assignment: r.best_assignment.vectors().to_vec(),
        },
        ratios: Ratios {
            best_over_qmaxcut: qmaxcut.and_then(|q| ratio(r.best_value, q)),
            mean_over_sdp: ratio(r.mean_value, used.value),
            prod_over_qmaxcut: qmaxcut.and_then(|q| ratio(prod.value, q)),
        },
        timings_ms: a.common.timings.then_some(t),
    };
    match a.common.format {
        Format::Json => output::json(&a.common, &report)?,
        Format::Csv => output::csv(
            &a.common,
            &[SolveRow {
                source,
                vertices: g.vertex_count(),
                edges: g.edges().len(),
                two_s: a.two_s,
                algorithm,
                seed: a.seed,
                trials: a.trials,
                total_weight: g.total_weight(),
                qmaxcut,
                qha: report.values.qha,
                prod: prod.value,
                sdp_mc: mc.value,
                sdp_s: sp.value,
                rounded_best: r.best_value,
                rounded_mean: r.mean_value,
                rounded_std_error: r.std_error,
                best_over_qmaxcut: report.ratios.best_over_qmaxcut,
            }],
        )?,
    }
    log_time("solve", start);
    Ok(())
}

#[derive(Debug, Serialize)]
struct LargeSpinCheck {
    two_s: u32,
    alpha_gp: f64,
    fraction_of_bov: f64,
}

#[derive(Debug, Serialize)]
struct RatiosReport<'a> {
    tool: Tool,
    command: &'static str,
    config: &'a RatiosArgs,
    table: RatioTable,
    large_spin: LargeSpinCheck,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings_ms: Option<f64>,
}

#[derive(Debug, Serialize)]
struct RatioCsvRow {
    row: &'static str,
    two_s: Option<u32>,
    alpha_star: Option<f64>,
    alpha_lieb: Option<f64>,
    alpha_gp: Option<f64>,
    alpha_bov: f64,
    argmin_rho: Option<f64>,
}

/// `2S` of the large-spin comparison point, `S = 200`.
const LARGE_TWO_S: u32 = 400;

pub fn ratios(a: &RatiosArgs) -> Result<(), CliError> {
    let start = Instant::now();
    if a.two_s == 0 {
        return Err(CliError::Input("--two-s must be at least 1".into()));
    }
    let table = ratio_table::<f64>(a.two_s)?;
    let gp_large = alpha_gp::<f64>(SpinValue::from_two_s(LARGE_TWO_S)?)?.value;
    let large_spin = LargeSpinCheck {
        two_s: LARGE_TWO_S,
        alpha_gp: gp_large,
        fraction_of_bov: gp_large / table.alpha_bov,
    };
    match a.common.format {
        Format::Json => output::json(
            &a.common,
            &RatiosReport {
                tool: TOOL,
                command: "ratios",
                config: a,
                table,
                large_spin,
                timings_ms: a.common.timings.then(|| elapsed_ms(start)),
            },
        )?,
        Format::Csv => {
            let bov = table.alpha_bov;
            let mut rows = vec![RatioCsvRow {
                row: "bov",
                two_s: None,
                alpha_star: None,
                alpha_lieb: None,
                alpha_gp: None,
                alpha_bov: bov,
                argmin_rho: Some(table.bov_argmin_rho),
            }];
            rows.extend(table.rows.iter().map(|r| RatioCsvRow {
                row: "spin",
                two_s: Some(r.two_s),
                alpha_star: Some(r.alpha_star),
                alpha_lieb: Some(r.alpha_lieb),
                alpha_gp: Some(r.alpha_gp),
                alpha_bov: bov,
                argmin_rho: Some(r.argmin_rho),
            }));
            rows.push(RatioCsvRow {
                row: "large_spin",
                two_s: Some(LARGE_TWO_S),
                alpha_star: None,
                alpha_lieb: None,
                alpha_gp: Some(gp_large),
                alpha_bov: bov,
                argmin_rho: None,
            });
            if let Some(t) = table.first_two_s_within_99pct {
                let gp = alpha_gp::<f64>(SpinValue::from_two_s(t)?)?;
                rows.push(RatioCsvRow {
                    row: "first_within_99pct",
                    two_s: Some(t),
                    alpha_star: None,
                    alpha_lieb: None,
                    alpha_gp: Some(gp.value),
                    alpha_bov: bov,
                    argmin_rho: Some(gp.argmin_rho),
                });
            }
            output::csv(&a.common, &rows)?
        }
    }
    log_time("ratios", start);
    Ok(())
}

#[derive(Debug, Serialize)]
struct GadgetReport<'a> {
    tool: Tool,
    command: &'static str,
    config: &'a GadgetArgs,
    effective: EffectiveHamiltonian,
    convergence: Vec<SpectralRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    timings_ms: Option<f64>,
}

#[derive(Debug, Serialize)]
struct GadgetCsvRow {
    two_s: u32,
    delta: f64,
    spec_error: f64,
    scaled_error: f64,
    c: f64,
    e: f64,
    fit_residual: f64,
    coupling_ratio: f64,
    first_order_norm: f64,
}

pub fn gadget(a: &GadgetArgs) -> Result<(), CliError> {
    let start = Instant::now();
    if a.two_s > GADGET_MAX_TWO_S {
        let d = (a.two_s + 1) as u128;
        return Err(spin_qmc::Error::SizeCap {
            dim: d.pow(4),
            cap: (GADGET_MAX_TWO_S as usize + 1).pow(4),
        }
        .into());
    }
    let s = SpinValue::from_two_s(a.two_s)?;
    let effective = effective_hamiltonian::<f64>(s, a.include_h1)?;
    let convergence = spectral_convergence::<f64>(s, &a.deltas, a.include_h1)?;
    match a.common.format {
        Format::Json => output::json(
            &a.common,
            &GadgetReport {
                tool: TOOL,
                command: "gadget",
                config: a,
                effective,
                convergence,
                timings_ms: a.common.timings.then(|| elapsed_ms(start)),
            },
        )?,
        Format::Csv => {
            let rows: Vec<_> = convergence
                .iter()
                .map(|r| GadgetCsvRow {
                    two_s: r.two_s,
                    delta: r.delta,
                    spec_error: r.spec_error,
                    scaled_error: r.scaled_error,
                    c: effective.fit.c,
                    e: effective.fit.e,
                    fit_residual: effective.fit.residual,
                    coupling_ratio: effective.coupling_ratio,
                    first_order_norm: effective.first_order_norm,
                })
                .collect();
            output::csv(&a.common, &rows)?
        }
    }
    log_time("gadget", start);
    Ok(())
}

#[derive(Debug, Serialize)]
struct VerifyReportOut<'a> {
    tool: Tool,
    command: &'static str,
    config: &'a VerifyArgs,
    suite: &'a VerifyConfig,
    instance: Option<String>,
    passed: bool,
    checks: &'a [Check],
    #[serde(skip_serializing_if = "Option::is_none")]
    timings_ms: Option<f64>,
}

pub fn verify(a: &VerifyArgs) -> Result<(), CliError> {
    let start = Instant::now();
    let extra = load(&a.source)?;
    let suite = VerifyConfig {
        seed: a.seed,
        instances: a.instances,
        rounding_trials: a.trials,
        ..Default::default()
    };
    let report = run_suite(&suite, extra.as_ref().map(|(g, _)| g))?;
    match a.common.format {
        Format::Json => output::json(
            &a.common,
            &VerifyReportOut {
                tool: TOOL,
                command: "verify",
                config: a,
                suite: &suite,
                instance: extra.as_ref().map(|(_, src)| src.clone()),
                passed: report.passed,
                checks: &report.checks,
                timings_ms: a.common.timings.then(|| elapsed_ms(start)),
            },
        )?,
        Format::Csv => output::csv(&a.common, &report.checks)?,
    }
    for c in &report.checks {
        eprintln!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    log_time("verify", start);
    if !report.passed {
        return Err(CliError::ChecksFailed(
            report.failures().map(|c| c.name.clone()).collect(),
        ));
    }
    Ok(())
}
