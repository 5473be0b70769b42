use smooth_counting::analysis::oracle::{lower_triangular_sqrt, prefix_query_intervals};
use smooth_counting::analysis::{chi_square_band, empirical_variance, flip_sensitivity_report, run_accounting};
use smooth_counting::baselines::{toeplitz_coeffs, NaiveInputFactory, ToeplitzFactory};
use smooth_counting::binary::{binary_height, BinaryFactory, BinaryMechanism};
use smooth_counting::bitcodec::PathWord;
use smooth_counting::smooth::SmoothFactory;
use smooth_counting::{Mechanism, MechanismConfig, MechanismFactory, PrivacyBudget, StreamElement, TreeInspect};

fn budget(rho: f64) -> PrivacyBudget {
    PrivacyBudget::new(rho).unwrap()
}

#[test]
fn binary_flip_matches_zero_count_for_all_small_horizons() {
    for horizon in 1..=64u64 {
        let h = binary_height(horizon).unwrap();
        for t in 1..=horizon {
            let zeros = h - (t - 1).count_ones();
            let r = flip_sensitivity_report(&BinaryFactory, horizon, t).unwrap();
            assert_eq!(r.stored, zeros as usize, "T={horizon} t={t}");
            assert_eq!(r.released, r.stored);
        }
    }
}

#[test]
fn binary_live_nodes_follow_the_query_walk() {
    let horizon = 300;
    let cfg = MechanismConfig::new(horizon, budget(1.0)).zero_noise();
    let mut m = BinaryMechanism::new(cfg).unwrap();
    let h = m.height();
    for t in 1..=horizon {
        m.step(&StreamElement::bit(true)).unwrap();
        let walk = prefix_query_intervals(PathWord::new(t, h).unwrap());
        let live: Vec<_> = m.live_node_ids().iter().map(|n| n.interval(h)).collect();
        assert_eq!(live, walk);
        assert_eq!(live.len(), t.count_ones() as usize);
    }
}

#[test]
fn binary_empirical_variance_tracks_popcount() {
    let horizon = 15;
    let est = empirical_variance(&BinaryFactory, horizon, budget(0.5), 30_000, 5).unwrap();
    for (i, v) in est.per_step.iter().enumerate() {
        let t = i as u64 + 1;
        let expected = BinaryFactory.analytic_variance(horizon, budget(0.5), t).unwrap();
        let band = chi_square_band(expected, est.trials, 0.99, horizon as usize).unwrap();
        assert!(band.contains(*v), "t={t}: {v} vs {expected}");
    }
}

#[test]
fn binary_space_is_logarithmic() {
    let r = run_accounting(&BinaryFactory, 1 << 16, 1).unwrap();
    assert!(r.max_live_nodes <= 17);
}

#[test]
fn naive_input_empirical_variance() {
    let est = empirical_variance(&NaiveInputFactory, 8, budget(2.0), 20_000, 1).unwrap();
    for (i, v) in est.per_step.iter().enumerate() {
        let expected = (i + 1) as f64 / 4.0;
        let band = chi_square_band(expected, est.trials, 0.99, 8).unwrap();
        assert!(band.contains(*v));
    }
}

#[test]
fn toeplitz_factor_reconstructs_prefix_matrix() {
    for n in [1usize, 2, 3, 17, 64, 256] {
        let f = toeplitz_coeffs(n as u64).unwrap();
        let oracle = lower_triangular_sqrt(n);
        for i in 0..n {
            for j in 0..n {
                assert!((f.entry(i, j) - oracle[i][j]).abs() < 1e-9, "n={n} ({i},{j})");
                let lr: f64 = (0..n).map(|k| f.entry(i, k) * f.entry(k, j)).sum();
                let a = if j <= i { 1.0 } else { 0.0 };
                assert!((lr - a).abs() < 1e-9, "n={n} ({i},{j}): {lr}");
            }
        }
    }
}

#[test]
fn variance_ordering_matrix_smooth_binary() {
    let b = budget(0.7);
    for e in 4..=12 {
        let horizon = 1u64 << e;
        let matrix = ToeplitzFactory.max_variance(horizon, b).unwrap();
        let smooth = SmoothFactory.max_variance(horizon, b).unwrap();
        let binary = BinaryFactory.max_variance(horizon, b).unwrap();
        assert!(matrix <= smooth && smooth <= binary, "T={horizon}: {matrix} {smooth} {binary}");
    }
}

#[test]
fn toeplitz_empirical_variance() {
    let horizon = 6;
    let est = empirical_variance(&ToeplitzFactory, horizon, budget(0.5), 20_000, 8).unwrap();
    let running = ToeplitzFactory.running_variance(horizon, budget(0.5)).unwrap();
    for (v, expected) in est.per_step.iter().zip(&running) {
        let band = chi_square_band(*expected, est.trials, 0.99, horizon as usize).unwrap();
        assert!(band.contains(*v), "{v} vs {expected}");
    }
}

#[test]
fn tree_view_is_exposed_only_by_tree_mechanisms() {
    let names_with_tree: Vec<_> = smooth_counting::Registry::builtin()
        .iter()
        .filter(|f| {
            f.build(MechanismConfig::new(4, budget(1.0)))
                .unwrap()
                .tree()
                .is_some()
        })
        .map(|f| f.name())
        .collect();
    assert_eq!(names_with_tree, ["smooth", "binary"]);
    let m = BinaryMechanism::new(MechanismConfig::new(4, budget(1.0))).unwrap();
    assert_eq!(m.tree_capacity(), 7);
    assert_eq!(m.live_nodes(), 0);
}
