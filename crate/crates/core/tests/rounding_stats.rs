use approx::assert_abs_diff_eq;

use spin_qmc::graph::{GraphSpec, WeightedGraph};
use spin_qmc::ratios::{alpha_bov, alpha_gp, f_star};
use spin_qmc::rounding::{end_to_end, round_and_evaluate, Algorithm, PipelineConfig};
use spin_qmc::sdp::{solve_sdp, SdpConfig};
use spin_qmc::{Graph, SpinValue};

// Orthogonal 3×3 rotation about an oblique axis, padded to rank k.
fn rotation(k: usize) -> Vec<Vec<f64>> {
    let (c, s) = (0.3f64.cos(), 0.3f64.sin());
    let mut q = vec![vec![0.0; k]; k];
    for (i, row) in q.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    q[0][0] = c;
    q[0][1] = -s;
    q[1][0] = s;
    q[1][1] = c;
    q
}

#[test]
fn rotated_vectors_round_alike() {
    let g: Graph = GraphSpec::Random {
        n: 6,
        p: 0.7,
        w_max: 1.0,
        seed: 11,
    }
    .generate()
    .unwrap();
    let sol = solve_sdp(&g, 1.5, &SdpConfig::default()).unwrap();
    let rot = sol.gram.rotated(&rotation(sol.gram.rank())).unwrap();
    for (i, j) in [(0, 1), (2, 5), (3, 4)] {
        assert_abs_diff_eq!(sol.gram.overlap(i, j), rot.overlap(i, j), epsilon = 1e-12);
    }
    let a = round_and_evaluate(&g, &sol.gram, 40_000, 1).unwrap();
    let b = round_and_evaluate(&g, &rot, 40_000, 2).unwrap();
    let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
    assert!((a.mean_value - b.mean_value).abs() <= 5.0 * se);
}

#[test]
fn edge_overlaps_follow_the_law() {
    let g: Graph = GraphSpec::Cycle { n: 5, w: 1.0 }.generate().unwrap();
    let sol = solve_sdp(&g, 1.0, &SdpConfig::default()).unwrap();
    let r = round_and_evaluate(&g, &sol.gram, 50_000, 3).unwrap();
    for (e, m) in g.edges().iter().zip(&r.edge_overlap_means) {
        let rho = sol.gram.overlap(e.i, e.j);
        assert!((m - f_star(rho).unwrap()).abs() < 0.015, "rho {rho}: {m}");
    }
}

#[test]
fn pipeline_is_reproducible_and_bounded() {
    let g: Graph = GraphSpec::Random {
        n: 5,
        p: 0.8,
        w_max: 2.0,
        seed: 4,
    }
    .generate()
    .unwrap();
    let cfg = PipelineConfig {
        trials: 300,
        seed: 9,
        ..Default::default()
    };
    for alg in [Algorithm::LiebBov, Algorithm::GpS] {
        let a = end_to_end(&g, SpinValue::ONE, alg, &cfg).unwrap();
        let b = end_to_end(&g, SpinValue::ONE, alg, &cfg).unwrap();
        assert_eq!(a, b);
        let q = a.qmaxcut.unwrap();
        assert!(a.value() <= q + 1e-9);
        assert!(a.realized_ratio.unwrap() > 0.5);
    }
}

#[test]
fn single_precision_agrees() {
    let bov32 = alpha_bov::<f32>().unwrap().value;
    let bov64 = alpha_bov::<f64>().unwrap().value;
    assert_abs_diff_eq!(bov32 as f64, bov64, epsilon = 1e-4);
    let gp32 = alpha_gp::<f32>(SpinValue::HALF).unwrap().value;
    assert_abs_diff_eq!(gp32 as f64, 0.498767, epsilon = 1e-4);
    let k3: WeightedGraph<f32> = GraphSpec::Complete { n: 3, w: 1.0 }.generate().unwrap();
    let sol = solve_sdp(
        &k3,
        1.0f32,
        &SdpConfig {
            stationarity_tolerance: 1e-4,
            ..Default::default()
        },
    )
    .unwrap();
    assert_abs_diff_eq!(sol.value, 2.25, epsilon = 1e-4);
}
