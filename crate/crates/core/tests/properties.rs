use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, UnitBall};

use spin_qmc::classical::{
    cha_value, prod_brute_force, prod_local_search, sweep_to_local_optimum, LocalSearchConfig, UnitVectorAssignment,
};
use spin_qmc::exact::{exact_values, ExactConfig};
use spin_qmc::graph::parse_instance;
use spin_qmc::ratios::{f_spin, g_bov};
use spin_qmc::sdp::{solve_sdp, spin_value_from_mc, SdpConfig};
use spin_qmc::spin::{coherent_state, spin_matrices};
use spin_qmc::{Graph, SpinValue};

fn graph(max_n: usize) -> impl Strategy<Value = Graph> {
    (1..=max_n).prop_flat_map(|n| {
        let pairs = n * (n - 1) / 2;
        prop::collection::vec(prop::option::weighted(0.7, 0.05f64..2.0), pairs).prop_map(move |ws| {
            let mut edges = Vec::new();
            let mut k = 0;
            for i in 0..n {
                for j in i + 1..n {
                    if let Some(w) = ws[k] {
                        edges.push((i, j, w));
                    }
                    k += 1;
                }
            }
            Graph::new(n, edges).unwrap()
        })
    })
}

fn spin() -> impl Strategy<Value = SpinValue> {
    (1u32..=3).prop_map(|t| SpinValue::from_two_s(t).unwrap())
}

fn exact() -> ExactConfig {
    ExactConfig::default()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn instance_text_round_trips(g in graph(7)) {
        let back: Graph = parse_instance(&g.render()).unwrap();
        prop_assert_eq!(back, g);
    }

    #[test]
    fn weight_and_energy_add_over_components(a in graph(3), b in graph(3)) {
        let u = a.disjoint_union(&b);
        prop_assert!((u.total_weight() - a.total_weight() - b.total_weight()).abs() < 1e-12);
        let s = SpinValue::HALF;
        let (qa, qb, qu) = (
            exact_values(&a, s, &exact()).unwrap().qha,
            exact_values(&b, s, &exact()).unwrap().qha,
            exact_values(&u, s, &exact()).unwrap().qha,
        );
        prop_assert!((qu - qa - qb).abs() < 1e-9);
    }

    #[test]
    fn quantum_classical_chains(g in graph(5), s in spin(), seed in 0u64..1000) {
        let ex = exact_values(&g, s, &exact()).unwrap();
        let prod = prod_local_search(&g, &LocalSearchConfig { seed, ..Default::default() }).unwrap().value;
        let cha = cha_value(&g, prod);
        let r = s.relaxation_coefficient::<f64>();
        prop_assert!(r * r * cha <= ex.qha + 1e-7);
        prop_assert!(ex.qha <= cha + 1e-7);
        prop_assert!(ex.qmaxcut <= r * r * prod + 1e-7);
        prop_assert!(prod <= ex.qmaxcut + 1e-7);
    }

    #[test]
    fn spin_sdp_bounds_the_quantum_value(g in graph(5), s in spin(), seed in 0u64..1000) {
        let cfg = SdpConfig { seed, ..Default::default() };
        let sdp_s = solve_sdp(&g, s.relaxation_coefficient(), &cfg).unwrap().value;
        let sdp_mc = solve_sdp(&g, 1.0, &cfg).unwrap().value;
        let q = exact_values(&g, s, &exact()).unwrap().qmaxcut;
        prop_assert!(sdp_s >= q - 1e-7);
        prop_assert!((sdp_s - spin_value_from_mc(&g, s, sdp_mc)).abs() <= 1e-7 * sdp_s.max(1.0));
    }

    #[test]
    fn ball_points_never_beat_the_sphere(g in graph(4), seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ls = prod_local_search(&g, &LocalSearchConfig::default()).unwrap().value;
        let bf = prod_brute_force(&g, 12).unwrap().value;
        let best = ls.max(bf);
        let adj = g.adjacency();
        for _ in 0..8 {
            let mut u: Vec<[f64; 3]> = (0..g.vertex_count()).map(|_| UnitBall.sample(&mut rng)).collect();
            let start: f64 = g.edges().iter()
                .map(|e| e.w * (1.0 - (0..3).map(|k| u[e.i][k] * u[e.j][k]).sum::<f64>()))
                .sum::<f64>() * 0.5;
            prop_assert!(start <= best + 1e-9);
            let (end, trace) = sweep_to_local_optimum(&g, &adj, &mut u, 1e-12, 10_000);
            prop_assert!(end <= best + 1e-9);
            prop_assert!(trace.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        }
    }

    #[test]
    fn coherent_states_point_along_omega(s in (1u32..=8).prop_map(|t| SpinValue::from_two_s(t).unwrap()), seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let omega = UnitVectorAssignment::<f64>::random(1, &mut rng).vectors()[0];
        let psi = coherent_state(s, omega).unwrap();
        let m = spin_matrices::<f64>(s).expectation(psi.amplitudes());
        for k in 0..3 {
            prop_assert!((m[k] - s.s::<f64>() * omega[k]).abs() < 1e-10);
        }
    }

    #[test]
    fn spin_curves_interleave(rho in -1.0f64..-1e-6, two_s in 1u32..=12) {
        let s = SpinValue::from_two_s(two_s).unwrap();
        let r = s.s::<f64>() / (s.s::<f64>() + 1.0);
        let (g, f, f_next) = (g_bov(rho).unwrap(), f_spin(s, rho).unwrap(), f_spin(s.next(), rho).unwrap());
        prop_assert!(r * r * g < f);
        prop_assert!(f < f_next);
        prop_assert!(f_next < g);
    }
}
